use manycopy::bipartite::{basis_ket, BipartiteOperator, CVector, Subspace};
use manycopy::linalg::{self, c, CMatrix};
use manycopy_cli::files::{self, InputFile, Limits, Operator, OperatorFile, StateSetFile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const LIMITS: Limits = Limits { tol: 1e-10, max_dim: 4096 };

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

fn roundtrip(op: &Operator) -> Operator {
    let text = serde_json::to_string(&op.to_file()).unwrap();
    let file: OperatorFile = serde_json::from_str(&text).unwrap();
    file.validate(&LIMITS).unwrap()
}

fn max_diff(a: &Operator, b: &Operator) -> f64 {
    let flat = |op: &Operator| -> Vec<[f64; 2]> {
        match op.data() {
            files::Data::Vector(v) => v,
            files::Data::Matrix(m) => m.into_iter().flatten().collect(),
        }
    };
    flat(a).iter().zip(flat(b)).map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs())).fold(0.0, f64::max)
}

#[test]
fn every_kind_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = gaussian(&mut rng, 6, 6);
    let rho = &g * g.adjoint();
    let rho = rho.scale(1.0 / linalg::trace_re(&rho));
    let psi: CVector = gaussian(&mut rng, 6, 1).column(0).into_owned();
    let psi = psi.clone() / c(psi.norm(), 0.0);
    let sub = Subspace::span(2, 3, &[psi.clone(), gaussian(&mut rng, 6, 1).column(0).into_owned()], 1e-10).unwrap();
    let ops = [
        Operator::Density(BipartiteOperator::new(2, 3, linalg::hermitian_part(&rho)).unwrap()),
        Operator::Pure { dim_a: 2, dim_b: 3, psi },
        Operator::Projector(sub.projector()),
        Operator::Subspace(sub),
    ];
    for op in &ops {
        let back = roundtrip(op);
        assert_eq!(back.kind(), op.kind());
        assert_eq!(back.dims(), (2, 3));
        assert!(max_diff(op, &back) < 1e-15);
    }
}

#[test]
fn state_set_round_trips() {
    let set =
        manycopy::discrimination::StateSet::from_pure(2, 2, &[basis_ket(2, 2, 0, 0), basis_ket(2, 2, 1, 1)]).unwrap();
    let file = StateSetFile::from_set(&set);
    let text = serde_json::to_string_pretty(&file).unwrap();
    let InputFile::StateSet(parsed) = files::parse_input(&text).unwrap() else { panic!("not a state set") };
    assert_eq!(parsed, file);
    let back = parsed.validate(&LIMITS).unwrap();
    assert_eq!(back.rho(1).matrix(), set.rho(1).matrix());
}

fn load(text: &str) -> anyhow::Result<Operator> {
    match files::parse_input(text)? {
        InputFile::Operator(f) => f.validate(&LIMITS),
        InputFile::StateSet(_) => panic!("unexpected state set"),
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let cases = [
        ("{", "malformed JSON"),
        (r#"{"dA":2,"dB":1,"kind":"density","data":[[[1,0],[1,0]],[[0,0],[0,0]]]}"#, "Hermitian"),
        (r#"{"dA":2,"dB":1,"kind":"density","data":[[[2,0],[0,0]],[[0,0],[-1,0]]]}"#, "density"),
        (r#"{"dA":2,"dB":1,"kind":"density","data":[[[0.5,0],[0,0]],[[0,0],[0.25,0]]]}"#, "density"),
        (r#"{"dA":2,"dB":1,"kind":"pure","data":[[1,0],[1,0]]}"#, "norm"),
        (r#"{"dA":2,"dB":1,"kind":"projector","data":[[[0.5,0],[0,0]],[[0,0],[0,0]]]}"#, "P²"),
        (r#"{"dA":2,"dB":1,"kind":"subspace","data":[[[1,0],[0,0]],[[1,0],[0,0]]]}"#, "orthonormal"),
        (r#"{"dA":2,"dB":2,"kind":"pure","data":[[1,0],[0,0]]}"#, "amplitudes"),
        (r#"{"dA":2,"dB":1,"kind":"mixed","data":[[1,0],[0,0]]}"#, "malformed"),
        (r#"{"dA":2,"dB":1,"kind":"pure","data":[[1,0],[0,0]],"extra":1}"#, "malformed"),
    ];
    for (text, needle) in cases {
        let err = load(text).expect_err(text);
        let msg = format!("{err:#}");
        assert!(msg.contains(needle), "{text}: '{msg}' lacks '{needle}'");
    }
}

#[test]
fn size_cap_is_enforced() {
    let limits = Limits { tol: 1e-10, max_dim: 3 };
    let file: OperatorFile =
        serde_json::from_str(r#"{"dA":2,"dB":2,"kind":"pure","data":[[1,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    let msg = format!("{:#}", file.validate(&limits).unwrap_err());
    assert!(msg.contains("--max-dim"), "{msg}");
}

#[test]
fn supports_of_each_kind() {
    let op = load(r#"{"dA":2,"dB":2,"kind":"projector","data":[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#).unwrap();
    assert_eq!(op.support(1e-10).unwrap().dim(), 2);
    let state = op.as_state().unwrap();
    assert!((state.trace() - 1.0).abs() < 1e-15);
    let sub = load(r#"{"dA":2,"dB":2,"kind":"subspace","data":[[[1,0],[0,0],[0,0],[0,0]]]}"#).unwrap();
    assert!(sub.as_state().is_err());
}
