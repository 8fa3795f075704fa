use std::f64::consts::PI;

use hadamard_core::constructions::{catalog, fourier, hadamard4_family, CatalogId};
use hadamard_core::equivalence::{dephase, equivalent_exhaustive};
use hadamard_core::matrix::{is_hadamard, ToleranceSpec};
use hadamard_core::solver::*;
use hadamard_core::unitary_param::{param_point_from_dephased, ParamPoint};
use hadamard_core::CMatrix;

fn tol(eps: f64) -> ToleranceSpec {
    ToleranceSpec::uniform(eps).unwrap()
}

/// Some `τ` with `m ≅ H₄(τ)`. The inner entries of the dephased core are
/// `±e^{±iτ}/2` (up to the equivalences), so candidates come from their
/// arguments.
fn order4_parameter(m: &CMatrix) -> Option<f64> {
    let core = dephase(m).ok()?.core;
    let mut cands: Vec<f64> = Vec::new();
    for z in core.data() {
        for t in [z.arg(), (-z).arg()] {
            for c in [t, -t] {
                if !cands.iter().any(|&d: &f64| ((c - d).rem_euclid(2.0 * PI)).min((d - c).rem_euclid(2.0 * PI)) < 1e-9) {
                    cands.push(c);
                }
            }
        }
    }
    cands
        .into_iter()
        .find(|&t| equivalent_exhaustive(&hadamard4_family(t), m, &tol(1e-8)).unwrap().is_some())
}

#[test]
fn n3_has_one_class() {
    let mut cfg = SolveConfig::new(3, 5);
    cfg.max_restarts = 30;
    let sols = solve_hadamard(&cfg).unwrap();
    assert_eq!(sols.len(), 1);
    assert!(equivalent_exhaustive(&sols[0].matrix, &fourier(3), &tol(1e-8)).unwrap().is_some());
}

#[test]
fn n4_lands_on_the_single_family() {
    let mut cfg = SolveConfig::new(4, 7);
    cfg.max_restarts = 30;
    let report = solve_hadamard_report(&cfg).unwrap();
    assert!(report.converged * 10 >= report.attempted * 9);
    for s in &report.solutions {
        assert_eq!(s.family_dim, 1);
        assert_eq!(s.report.jacobian_rank, Some(3));
        assert!(is_hadamard(&s.matrix, &tol(1e-9)));
        assert!(order4_parameter(&s.matrix).is_some(), "{:?}", s.point);
        // the dephased inner block is ±1/2 or ±e^{iτ}/2
        let core = dephase(&s.matrix).unwrap().core;
        assert!(core.data().iter().all(|z| (z.norm() - 0.5).abs() < 1e-9));
    }
}

#[test]
fn n4_full_period_traces_stay_in_the_family() {
    let mut cfg = SolveConfig::new(4, 8);
    cfg.max_restarts = 6;
    for s in solve_hadamard(&cfg).unwrap() {
        let t = trace_full_period(&s, 0.05).unwrap();
        assert_eq!(t.failed_at, None, "{:?}", t.diagnostic);
        assert_eq!(t.chain.len(), t.grid.len());
        for (k, link) in t.chain.iter().enumerate().step_by(9) {
            assert!(order4_parameter(&link.matrix).is_some(), "step {k}");
        }
        for w in t.chain.windows(2) {
            assert!(w[0].matrix.max_abs_diff(&w[1].matrix) < 0.2);
        }
    }
}

#[test]
fn dita6_trace_is_hadamard_throughout() {
    let core = dephase(&catalog(CatalogId::Dita6, &[0.6]).unwrap()).unwrap().core;
    let start = Solution::at(param_point_from_dephased(&core).unwrap()).unwrap();
    assert!(start.family_dim >= 1);
    let k = trace_phase_order(&start).unwrap()[0];
    let t0 = start.point.free_phases[k];
    let grid: Vec<f64> = (0..20).map(|i| t0 + 0.05 * i as f64).collect();
    let t = trace_family(&start, k, &grid).unwrap();
    assert_eq!(t.failed_at, None, "{:?}", t.diagnostic);
    for link in &t.chain {
        assert!(is_hadamard(&link.matrix, &tol(1e-9)));
    }
}

#[test]
fn trace_errors() {
    let start = Solution::at(ParamPoint::new(4, vec![0.0], vec![PI, 0.0, 0.0]).unwrap()).unwrap();
    assert!(trace_family(&start, 3, &[0.0]).is_err());
    assert!(Solution::at(ParamPoint::new(4, vec![0.3], vec![0.0, 0.0, 0.0]).unwrap()).is_err());
}

#[test]
fn same_output_on_any_thread_count() {
    let mut cfg = SolveConfig::new(5, 42);
    cfg.max_restarts = 12;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| solve_hadamard_report(&cfg).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let back: SolveReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn config_validation() {
    let mut cfg = SolveConfig::new(2, 0);
    assert!(solve_hadamard(&cfg).is_err());
    cfg.n = 4;
    cfg.tol = 1e-3;
    assert!(solve_hadamard(&cfg).is_err());
    cfg.tol = 1e-10;
    cfg.max_restarts = 0;
    assert!(solve_hadamard(&cfg).is_err());
}
