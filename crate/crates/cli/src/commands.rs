use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use manycopy::bipartite::{basis_ket, CVector, Subspace};
use manycopy::discrimination::{
    self, AnalysisOptions, DiscriminationMode, StateSet, Verdict, CROSS_TERM_TOL, ORTHOGONALITY_TOL,
};
use manycopy::linalg::{self, c};
use manycopy::sdp::SolverOptions;
use manycopy::unextendible;
use manycopy::witness::{self, TmaxResult, TmaxStatus, WITNESS_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::files::{self, InputFile, Limits, Operator, StateSetFile};
use crate::report::{Inputs, Report, Tolerances, VerdictReport, SCHEMA_VERSION, SUFFICIENCY_NOTE};

/// Global flag values.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub tol_eig: f64,
    pub tol_sdp: f64,
    pub max_dim: usize,
    pub copies: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { tol_eig: 1e-10, tol_sdp: 1e-9, max_dim: 4096, copies: 1 }
    }
}

impl Settings {
    fn limits(&self) -> Limits {
        Limits { tol: self.tol_eig, max_dim: self.max_dim }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { tolerance: self.tol_sdp, ..SolverOptions::default() }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            eig: self.tol_eig,
            sdp: self.tol_sdp,
            witness: WITNESS_TOL,
            cross_term: CROSS_TERM_TOL,
            orthogonality: ORTHOGONALITY_TOL,
            max_dim: self.max_dim,
            copies: self.copies,
        }
    }

    fn report(
        &self,
        command: &str,
        inputs: Inputs,
        verdict: VerdictReport,
        evidence: serde_json::Value,
        diagnostics: serde_json::Value,
    ) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: format!("manycopy {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            inputs,
            tolerances: self.tolerances(),
            verdict,
            evidence,
            diagnostics,
            generated_unix: crate::report::now_unix(),
        }
    }
}

fn read(path: &Path) -> Result<(Vec<u8>, InputFile)> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let parsed = files::parse_input(text).with_context(|| format!("{}", path.display()))?;
    Ok((bytes, parsed))
}

fn read_operator(path: &Path, settings: &Settings) -> Result<(Vec<u8>, Operator)> {
    match read(path)? {
        (bytes, InputFile::Operator(f)) => {
            Ok((bytes, f.validate(&settings.limits()).with_context(|| format!("{}", path.display()))?))
        }
        (_, InputFile::StateSet(_)) => {
            bail!("{} is a state-set file; this command needs a single operator", path.display())
        }
    }
}

fn status_name(s: TmaxStatus) -> &'static str {
    match s {
        TmaxStatus::Optimal => "optimal",
        TmaxStatus::LowerBoundOnly => "lower-bound-only",
    }
}

fn tmax_evidence(s: &Subspace, r: &TmaxResult) -> Result<serde_json::Value> {
    let check = r.check(s)?;
    Ok(json!({
        "ambient": [s.dim_a(), s.dim_b()],
        "subspace_dim": s.dim(),
        "value": r.value,
        "upper_bound": r.upper_bound,
        "spectral_lower_bound": witness::tmax_lower_bound(s)?,
        "status": status_name(r.status),
        "certificate_check": {
            "lower_margin": check.lower_margin,
            "upper_margin": check.upper_margin,
            "pt_margin": check.pt_margin,
        },
    }))
}

fn tmax_diagnostics(r: &TmaxResult) -> serde_json::Value {
    json!({ "solver_iterations": r.iterations, "residual": r.residual })
}

fn witness_steps() -> Vec<String> {
    vec![
        "T(S) > 0: the optimal R is a PPT-definite operator supported on S".into(),
        "T is supermultiplicative, so T(S^k) >= T(S)^k > 0 for every copy number k".into(),
        "a PPT-definite operator on S^k excludes every PPT operator on its orthogonal complement: S is strongly PPT-unextendible".into(),
    ]
}

fn subspace_verdict(value: f64) -> VerdictReport {
    if value > WITNESS_TOL {
        VerdictReport::decided("Witnessed", witness_steps(), None)
    } else {
        VerdictReport::inconclusive(
            vec![format!("T(S) = {value:.3e} is not above {WITNESS_TOL:.0e}")],
            SUFFICIENCY_NOTE,
        )
    }
}

/// Witness value of the subspace carried by an operator file, on
/// `settings.copies` copies.
pub fn tmax(path: &Path, settings: &Settings) -> Result<Report> {
    let (bytes, op) = read_operator(path, settings)?;
    let mut s = op.support(settings.tol_eig)?;
    if settings.copies > 1 {
        s = s.tensor_power(settings.copies, settings.max_dim)?;
    }
    let r = witness::tmax_with(&s, &settings.solver())?;
    Ok(settings.report(
        "tmax",
        Inputs::from_bytes(path.display().to_string(), &bytes),
        subspace_verdict(r.value),
        tmax_evidence(&s, &r)?,
        tmax_diagnostics(&r),
    ))
}

/// Many-copy indistinguishability for a state-set file, or strong
/// unextendibility for a single operator file.
pub fn witness(path: &Path, settings: &Settings) -> Result<Report> {
    let (bytes, input) = read(path)?;
    let inputs = Inputs::from_bytes(path.display().to_string(), &bytes);
    let file = match input {
        InputFile::StateSet(f) => f,
        InputFile::Operator(f) => {
            let op = f.validate(&settings.limits()).with_context(|| format!("{}", path.display()))?;
            let s = op.support(settings.tol_eig)?;
            let r = witness::tmax_with(&s, &settings.solver())?;
            let verdict = if r.value > WITNESS_TOL {
                VerdictReport::decided("StronglyPptUnextendible", witness_steps(), None)
            } else {
                subspace_verdict(r.value)
            };
            return Ok(settings.report("witness", inputs, verdict, tmax_evidence(&s, &r)?, tmax_diagnostics(&r)));
        }
    };
    let set = file.validate(&settings.limits()).with_context(|| format!("{}", path.display()))?;
    let options = AnalysisOptions { support_tol: settings.tol_eig, solver: settings.solver() };
    let analysis = discrimination::many_copy_ppt_indistinguishable_with(&set, &options)?;
    let states: Vec<_> = analysis
        .per_state
        .iter()
        .map(|w| {
            json!({
                "label": w.label,
                "support_dim": w.support_dim,
                "value": w.tmax.value,
                "upper_bound": w.tmax.upper_bound,
                "status": status_name(w.tmax.status),
                "witnessed": w.witnessed,
            })
        })
        .collect();
    let witnessed_label = analysis.witnessed_state.map(|i| analysis.per_state[i].label.clone());
    let verdict = match &witnessed_label {
        Some(label) => {
            let mut steps = vec![format!(
                "T(supp {label}) = {:.6e} > {WITNESS_TOL:.0e}",
                analysis.per_state[analysis.witnessed_state.unwrap_or(0)].tmax.value
            )];
            steps.extend(witness_steps());
            steps.push(format!(
                "every other state is orthogonal to '{label}' and hence supported on the orthogonal complement of its support; no PPT measurement on any number of copies discriminates the set unambiguously"
            ));
            steps.push(discrimination::INFERENCE_CHAIN.into());
            VerdictReport::decided("IndistinguishableManyCopy", steps, Some(SUFFICIENCY_NOTE))
        }
        None => VerdictReport::inconclusive(vec!["no support has a positive witness value".into()], SUFFICIENCY_NOTE),
    };
    let diagnostics = json!({
        "solver_iterations": analysis.per_state.iter().map(|w| w.tmax.iterations).collect::<Vec<_>>(),
        "residuals": analysis.per_state.iter().map(|w| w.tmax.residual).collect::<Vec<_>>(),
    });
    Ok(settings.report(
        "witness",
        inputs,
        verdict,
        json!({ "states": states, "witnessed_state": witnessed_label }),
        diagnostics,
    ))
}

/// Builds `S_mn`, its positive-partial-transpose operator and the witness
/// value. Optionally writes the basis as a subspace file.
pub fn subspace(m: usize, n: usize, out: Option<&Path>, settings: &Settings) -> Result<Report> {
    ensure!(
        m * n <= settings.max_dim,
        "dimension {} exceeds the cap {}; raise it with --max-dim",
        m * n,
        settings.max_dim
    );
    let s = unextendible::build_smn_basis(m, n)?;
    let coeffs = unextendible::find_coefficients(m, n)?;
    let rho = unextendible::assemble_rho(m, n, &coeffs)?;
    let pt_min = linalg::min_eigenvalue(rho.partial_transpose().matrix())?;
    let dec = unextendible::verify_block_decomposition(&rho, m, n)?;
    let block_min: Vec<f64> = dec.blocks().map(linalg::min_eigenvalue).collect::<manycopy::Result<Vec<_>>>()?;
    let r = witness::tmax_with(&s, &settings.solver())?;
    if let Some(path) = out {
        files::write_json(path, &Operator::Subspace(s.clone()).to_file())?;
    }
    let mut verdict = subspace_verdict(r.value);
    if pt_min > 0.0 {
        verdict.inference.insert(
            0,
            format!("rho_mn is supported on S_mn with lambda_min(rho_mn^T_B) = {pt_min:.6e} > 0, a PPT-definite operator on S_mn"),
        );
    }
    let evidence = json!({
        "m": m,
        "n": n,
        "dim": s.dim(),
        "x": coeffs.x,
        "y": coeffs.y,
        "weights": coeffs.weights(),
        "integral": coeffs.is_integral(),
        "symmetric": coeffs.is_symmetric(),
        "min_pt_eigenvalue": pt_min,
        "block_min_eigenvalues": block_min,
        "off_block_max": dec.off_block_max,
        "pattern_deviation": dec.pattern_deviation,
        "witness_value": r.value,
        "witness_upper_bound": r.upper_bound,
        "basis_file": out.map(|p| p.display().to_string()),
    });
    Ok(settings.report(
        "subspace",
        Inputs::from_params(format!("subspace m={m} n={n}")),
        verdict,
        evidence,
        tmax_diagnostics(&r),
    ))
}

#[derive(Debug, Clone)]
pub enum PairState {
    /// `Σᵢ|ii⟩/√d`.
    Bell,
    /// `Σᵢ √wᵢ |ii⟩` for squared Schmidt coefficients `wᵢ`.
    Schmidt(Vec<f64>),
    Product,
    Random(u64),
}

#[derive(Debug, Clone)]
pub enum Example {
    EntangledPair { d: usize, state: PairState },
    MeFamily { d: usize, m: usize, k: usize },
    ClassicalPair,
}

fn pair_vector(d: usize, state: &PairState) -> Result<CVector> {
    Ok(match state {
        PairState::Bell => discrimination::generalized_bell_basis(d)?.swap_remove(0),
        PairState::Product => basis_ket(d, d, 0, 0),
        PairState::Schmidt(w) => {
            ensure!(!w.is_empty() && w.len() <= d, "give between 1 and {d} Schmidt weights");
            ensure!(w.iter().all(|&x| x >= 0.0), "Schmidt weights must be non-negative");
            let total: f64 = w.iter().sum();
            ensure!((total - 1.0).abs() <= 1e-10, "Schmidt weights sum to {total}, not 1");
            w.iter()
                .enumerate()
                .map(|(i, &x)| basis_ket(d, d, i, i) * c(x.sqrt(), 0.0))
                .fold(CVector::zeros(d * d), |a, b| a + b)
        }
        PairState::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let v = CVector::from_fn(d * d, |_, _| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
            let norm = v.norm();
            v / c(norm, 0.0)
        }
    })
}

fn describe(example: &Example) -> String {
    match example {
        Example::EntangledPair { d, state } => format!("examples entangled-pair d={d} state={state:?}"),
        Example::MeFamily { d, m, k } => format!("examples me-family d={d} m={m} k={k}"),
        Example::ClassicalPair => "examples classical-pair".into(),
    }
}

/// Writes a state-set file and reports what was built.
pub fn examples(example: &Example, out: &Path, settings: &Settings) -> Result<Report> {
    let (name, set, metadata, note): (&str, StateSet, serde_json::Value, Option<&str>) = match example {
        Example::EntangledPair { d, state } => {
            ensure!(d * d <= settings.max_dim, "dimension {} exceeds the cap {}", d * d, settings.max_dim);
            let phi = pair_vector(*d, state)?;
            let pair = discrimination::pure_state_complement_pair(*d, &phi)?;
            let meta = json!({
                "d": d,
                "schmidt_rank": pair.schmidt_rank,
                "largest_schmidt_sq": pair.largest_schmidt_sq,
                "witness_bound": pair.witness_bound,
                "entangled": pair.entangled,
            });
            let note = (!pair.entangled)
                .then_some("not entangled: the complement construction gives no witness for a product state");
            ("entangled-pair", pair.set, meta, note)
        }
        Example::MeFamily { d, m, k } => {
            ensure!(d * d <= settings.max_dim, "dimension {} exceeds the cap {}", d * d, settings.max_dim);
            let fam = discrimination::maximally_entangled_family(*d, *m, *k)?;
            let meta = json!({
                "d": d,
                "m": m,
                "k": k,
                "measured_min_pt": fam.measured_min_pt,
                "bound": fam.bound,
            });
            ("me-family", fam.set, meta, None)
        }
        Example::ClassicalPair => {
            let set = StateSet::from_pure(2, 2, &[basis_ket(2, 2, 0, 0), basis_ket(2, 2, 1, 1)])?;
            ("classical-pair", set, json!({ "d": 2 }), None)
        }
    };
    files::write_json(out, &StateSetFile::from_set(&set))?;
    let evidence = json!({
        "example": name,
        "path": out.display().to_string(),
        "labels": set.states().iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
        "metadata": metadata,
    });
    let verdict = VerdictReport::decided("Generated", vec![], note);
    Ok(settings.report("examples", Inputs::from_params(describe(example)), verdict, evidence, json!({})))
}

/// Single-shot PPT discrimination on `settings.copies` copies.
pub fn discriminate(path: &Path, mode: DiscriminationMode, settings: &Settings) -> Result<Report> {
    let (bytes, input) = read(path)?;
    let InputFile::StateSet(file) = input else {
        bail!("{} is an operator file; discrimination needs a state-set file", path.display())
    };
    let set = file.validate(&settings.limits()).with_context(|| format!("{}", path.display()))?;
    let r =
        discrimination::ppt_discrimination_sdp_with(&set, mode, settings.copies, settings.max_dim, &settings.solver())?;
    let powered = set.tensor_power(settings.copies, settings.max_dim)?;
    let probabilities: Vec<f64> = r
        .measurements
        .iter()
        .zip(powered.states())
        .map(|(m, s)| linalg::trace_product_re(m.matrix(), s.rho.matrix()))
        .collect();
    let mode_name = match mode {
        DiscriminationMode::Perfect => "perfect",
        DiscriminationMode::Unambiguous => "unambiguous",
    };
    let verdict = match r.verdict {
        Verdict::Distinguishable => VerdictReport::decided(
            "Distinguishable",
            vec![format!(
                "a PPT measurement with cross terms <= {:.1e} and success probabilities >= {:.6} was found",
                r.max_cross_term, r.value
            )],
            None,
        ),
        Verdict::Indistinguishable => VerdictReport::decided(
            "Indistinguishable",
            vec![format!(
                "every PPT measurement has a cross term >= {:.6e} on {} copies (dual bound)",
                r.cross_term_lower_bound, settings.copies
            )],
            None,
        ),
        Verdict::Inconclusive => VerdictReport::inconclusive(
            vec![format!(
                "smallest cross term found {:.3e}, certified lower bound {:.3e}",
                r.max_cross_term, r.cross_term_lower_bound
            )],
            "the solver could not separate the cross-term value from zero",
        ),
    };
    let evidence = json!({
        "mode": mode_name,
        "copies": settings.copies,
        "states": set.len(),
        "value": r.value,
        "max_cross_term": r.max_cross_term,
        "cross_term_lower_bound": r.cross_term_lower_bound,
        "success_probabilities": probabilities,
    });
    Ok(settings.report(
        "discriminate",
        Inputs::from_bytes(path.display().to_string(), &bytes),
        verdict,
        evidence,
        json!({ "solver_iterations": r.iterations }),
    ))
}
