//! JSON operator and state-set files.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major with the
//! product index `i·dB + j`. A `subspace` file lists its orthonormal basis
//! vectors, one per inner array.

use anyhow::{anyhow, bail, ensure, Context, Result};
use manycopy::bipartite::{self, BipartiteOperator, CVector, Subspace};
use manycopy::discrimination::{LabeledState, StateSet};
use manycopy::linalg::{self, c, CMatrix};
use serde::{Deserialize, Serialize};

pub type Entry = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Density,
    Pure,
    Projector,
    Subspace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Data {
    Vector(Vec<Entry>),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    #[serde(rename = "dA")]
    pub dim_a: usize,
    #[serde(rename = "dB")]
    pub dim_b: usize,
    pub kind: Kind,
    pub data: Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub label: String,
    pub kind: Kind,
    pub data: Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSetFile {
    #[serde(rename = "dA")]
    pub dim_a: usize,
    #[serde(rename = "dB")]
    pub dim_b: usize,
    pub states: Vec<StateEntry>,
}

/// A validated operator file.
#[derive(Debug, Clone)]
pub enum Operator {
    Density(BipartiteOperator),
    Pure { dim_a: usize, dim_b: usize, psi: CVector },
    Projector(BipartiteOperator),
    Subspace(Subspace),
}

/// Checks applied when loading files.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Eigenvalue, normalization and idempotence tolerance.
    pub tol: f64,
    pub max_dim: usize,
}

fn entry(z: num_complex::Complex64) -> Entry {
    [z.re, z.im]
}

fn matrix_data(m: &CMatrix) -> Data {
    Data::Matrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| entry(m[(i, j)])).collect()).collect())
}

fn vector_data(v: &CVector) -> Data {
    Data::Vector(v.iter().map(|&z| entry(z)).collect())
}

fn as_matrix(data: &Data, n: usize) -> Result<CMatrix> {
    let Data::Matrix(rows) = data else { bail!("expected a {n}×{n} matrix of [re, im] pairs, found a flat vector") };
    ensure!(rows.len() == n, "expected {n} rows, found {}", rows.len());
    for (i, r) in rows.iter().enumerate() {
        ensure!(r.len() == n, "row {i} has {} entries, expected {n}", r.len());
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn as_vector(data: &Data, n: usize) -> Result<CVector> {
    let Data::Vector(v) = data else { bail!("expected a vector of {n} [re, im] pairs, found a matrix") };
    ensure!(v.len() == n, "expected {n} amplitudes, found {}", v.len());
    Ok(CVector::from_fn(n, |i, _| c(v[i][0], v[i][1])))
}

fn as_columns(data: &Data, n: usize) -> Result<CMatrix> {
    let Data::Matrix(vectors) = data else { bail!("expected a list of basis vectors") };
    ensure!(!vectors.is_empty(), "a subspace needs at least one basis vector");
    ensure!(vectors.len() <= n, "{} basis vectors cannot be independent in dimension {n}", vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        ensure!(v.len() == n, "basis vector {k} has {} entries, expected {n}", v.len());
    }
    Ok(CMatrix::from_fn(n, vectors.len(), |i, k| c(vectors[k][i][0], vectors[k][i][1])))
}

fn check_dims(dim_a: usize, dim_b: usize, limits: &Limits) -> Result<usize> {
    ensure!(dim_a >= 1 && dim_b >= 1, "dA and dB must be positive");
    let d = dim_a.checked_mul(dim_b).ok_or_else(|| anyhow!("dimension overflow"))?;
    ensure!(d <= limits.max_dim, "dimension {d} exceeds the cap {}; raise it with --max-dim", limits.max_dim);
    Ok(d)
}

fn parse_operator(dim_a: usize, dim_b: usize, kind: Kind, data: &Data, limits: &Limits) -> Result<Operator> {
    let d = check_dims(dim_a, dim_b, limits)?;
    Ok(match kind {
        Kind::Density => {
            let op = BipartiteOperator::new(dim_a, dim_b, as_matrix(data, d)?)?;
            op.check_density(limits.tol).context("not a density operator")?;
            Operator::Density(op)
        }
        Kind::Pure => {
            let psi = as_vector(data, d)?;
            let norm = psi.norm();
            ensure!((norm - 1.0).abs() <= 1e-10, "pure state has norm {norm}; normalize it");
            Operator::Pure { dim_a, dim_b, psi }
        }
        Kind::Projector => {
            let m = as_matrix(data, d)?;
            linalg::check_hermitian(&m).context("projector is not Hermitian")?;
            let defect = linalg::max_abs(&(&m * &m - &m));
            ensure!(defect <= limits.tol.max(1e-12), "projector fails P² = P by {defect:.2e}");
            Operator::Projector(BipartiteOperator::new(dim_a, dim_b, m)?)
        }
        Kind::Subspace => Operator::Subspace(
            Subspace::from_orthonormal(dim_a, dim_b, as_columns(data, d)?).context("basis is not orthonormal")?,
        ),
    })
}

impl OperatorFile {
    pub fn validate(&self, limits: &Limits) -> Result<Operator> {
        parse_operator(self.dim_a, self.dim_b, self.kind, &self.data, limits)
    }
}

impl Operator {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Operator::Density(o) | Operator::Projector(o) => (o.dim_a(), o.dim_b()),
            Operator::Pure { dim_a, dim_b, .. } => (*dim_a, *dim_b),
            Operator::Subspace(s) => (s.dim_a(), s.dim_b()),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Operator::Density(_) => Kind::Density,
            Operator::Pure { .. } => Kind::Pure,
            Operator::Projector(_) => Kind::Projector,
            Operator::Subspace(_) => Kind::Subspace,
        }
    }

    pub fn data(&self) -> Data {
        match self {
            Operator::Density(o) | Operator::Projector(o) => matrix_data(o.matrix()),
            Operator::Pure { psi, .. } => vector_data(psi),
            Operator::Subspace(s) => {
                let b = s.basis();
                Data::Matrix((0..b.ncols()).map(|k| b.column(k).iter().map(|&z| entry(z)).collect()).collect())
            }
        }
    }

    pub fn to_file(&self) -> OperatorFile {
        let (dim_a, dim_b) = self.dims();
        OperatorFile { dim_a, dim_b, kind: self.kind(), data: self.data() }
    }

    /// The subspace the operator lives on: the support of a density operator
    /// or projector, the ray of a pure state, or the subspace itself.
    pub fn support(&self, tol: f64) -> Result<Subspace> {
        Ok(match self {
            Operator::Density(o) => bipartite::support_projector(o, tol)?,
            Operator::Projector(p) => bipartite::support_projector(p, 0.5)?,
            Operator::Pure { dim_a, dim_b, psi } => Subspace::span(*dim_a, *dim_b, std::slice::from_ref(psi), 1e-10)?,
            Operator::Subspace(s) => s.clone(),
        })
    }

    /// Density operator: pure states become rank-one projectors and
    /// projectors are normalized.
    pub fn as_state(&self) -> Result<BipartiteOperator> {
        Ok(match self {
            Operator::Density(o) => o.clone(),
            Operator::Pure { dim_a, dim_b, psi } => BipartiteOperator::projector_onto(*dim_a, *dim_b, psi)?,
            Operator::Projector(p) => {
                let tr = p.trace();
                ensure!(tr > 0.5, "the zero projector is not a state");
                p.scaled(1.0 / tr)
            }
            Operator::Subspace(_) => bail!("kind 'subspace' does not describe a state; use 'projector'"),
        })
    }
}

impl StateSetFile {
    pub fn validate(&self, limits: &Limits) -> Result<StateSet> {
        ensure!(!self.states.is_empty(), "state set is empty");
        let mut states = Vec::with_capacity(self.states.len());
        for s in &self.states {
            let op = parse_operator(self.dim_a, self.dim_b, s.kind, &s.data, limits)
                .with_context(|| format!("state '{}'", s.label))?;
            let rho = op.as_state().with_context(|| format!("state '{}'", s.label))?;
            states.push(LabeledState { label: s.label.clone(), rho });
        }
        Ok(StateSet::new(self.dim_a, self.dim_b, states)?)
    }

    pub fn from_set(set: &StateSet) -> Self {
        StateSetFile {
            dim_a: set.dim_a(),
            dim_b: set.dim_b(),
            states: set
                .states()
                .iter()
                .map(|s| StateEntry { label: s.label.clone(), kind: Kind::Density, data: matrix_data(s.rho.matrix()) })
                .collect(),
        }
    }
}

/// Either file shape, told apart by the presence of a `states` key.
#[derive(Debug, Clone)]
pub enum InputFile {
    Operator(OperatorFile),
    StateSet(StateSetFile),
}

pub fn parse_input(text: &str) -> Result<InputFile> {
    let value: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    if value.get("states").is_some() {
        Ok(InputFile::StateSet(serde_json::from_value(value).context("malformed state-set file")?))
    } else {
        Ok(InputFile::Operator(serde_json::from_value(value).context("malformed operator file")?))
    }
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
