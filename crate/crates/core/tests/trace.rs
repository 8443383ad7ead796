mod common;

use common::secular_roots;
use std::f64::consts::{PI, TAU};
use tracelab::bc::BoundaryConditionSet;
use tracelab::cplx::c;
use tracelab::spectrum::{find_paired, DensityPiece, Measure, SearchOptions, SpectralProblem};
use tracelab::trace::{cesaro, estimate_trace, partial_sums, rhs_prediction, Verdict};
use tracelab::{Complex64, Error};

fn example(x: f64) -> SpectralProblem {
    SpectralProblem::new(
        BoundaryConditionSet::fourth_order_example(),
        Measure::atom(x, c(1.0, 0.0)),
    )
    .unwrap()
}

#[test]
fn example_coefficient_has_closed_form() {
    let rep = example(0.5).report;
    let expected = -(4.0 * 5f64.sqrt()).atan() / 5f64.sqrt();
    assert!((rep.frak_cap - expected).norm() < 1e-12, "{}", rep.frak_cap);
    assert!((rep.frak_c.unwrap() - 2.0 / 3.0).norm() < 1e-12);
    let root = c(-2.0 / 3.0, 5f64.sqrt() / 3.0);
    assert!(rep.xi.iter().any(|&x| (x - root).norm() < 1e-12));
    assert!(rep.xi.iter().any(|&x| (x - root.conj()).norm() < 1e-12));
}

#[test]
fn dirichlet_partial_sums_match_secular_roots() {
    let (h, x0) = (1.0, 0.37);
    let problem = SpectralProblem::new(BoundaryConditionSet::dirichlet2(), Measure::atom(x0, c(h, 0.0))).unwrap();
    let slices = find_paired(&problem, 0..41, &SearchOptions::default()).unwrap();
    let sums = partial_sums(&slices, c(h, 0.0));
    let roots = secular_roots(h, x0, slices.last().unwrap().radius);
    let mut acc = 0.0;
    let mut oracle = vec![];
    for (k, z) in roots.iter().enumerate() {
        let n = (k + 1) as f64;
        acc += z * z - (PI * n).powi(2) - h;
        oracle.push(acc);
    }
    // Annulus l holds the l-th eigenvalue; annulus 0 is empty.
    assert!(sums[0].norm() < 1e-12);
    for (s, o) in sums[1..].iter().zip(&oracle) {
        assert!((s - o).norm() < 1e-8, "{s} vs {o}");
    }
}

#[test]
fn dirichlet_trace_of_an_offcenter_atom() {
    // h/2 - h^2/8 for a unit atom.
    let problem = SpectralProblem::new(BoundaryConditionSet::dirichlet2(), Measure::atom(0.37, c(1.0, 0.0))).unwrap();
    let est = estimate_trace(&problem, 0..401, &SearchOptions::default(), 5e-3).unwrap();
    assert!((est.limit_estimate - 0.375).norm() < 5e-3, "{}", est.limit_estimate);
    assert_eq!(est.rhs_prediction, Some(c(0.0, 0.0)));
    assert_eq!(est.verdict, Verdict::NoMatch);
}

#[test]
fn midpoint_atom_trace_tends_to_coefficient() {
    let problem = example(0.5);
    let est = estimate_trace(&problem, 0..300, &SearchOptions::default(), 5e-2).unwrap();
    let expected = problem.report.frak_cap / TAU;
    assert!(
        (est.limit_estimate - expected).norm() < 5e-2,
        "{} vs {expected}",
        est.limit_estimate
    );
    assert_eq!(est.rhs_prediction, Some(expected));
    assert_eq!(est.verdict, Verdict::Match);
    // The bracketed sums alternate; the split estimate agrees with the mean.
    let split = est.split_limit.unwrap();
    assert!((split - est.limit_estimate).norm() < 1e-2);
}

#[test]
fn zero_measure_has_zero_sums() {
    let problem = SpectralProblem::new(BoundaryConditionSet::fourth_order_example(), Measure::zero()).unwrap();
    let slices = find_paired(&problem, 0..30, &SearchOptions::default()).unwrap();
    let sums = partial_sums(&slices, c(0.0, 0.0));
    assert!(sums.iter().all(|s| s.norm() == 0.0));
    let ces = cesaro(&sums).unwrap();
    assert_eq!(ces.limit, Complex64::new(0.0, 0.0));
}

#[test]
fn constant_density_shift_cancels() {
    let m = Measure {
        atoms: vec![],
        density: vec![DensityPiece {
            start: 0.0,
            end: 1.0,
            value: c(2.0, 1.0),
        }],
    };
    let problem = SpectralProblem::new(BoundaryConditionSet::fourth_order_example(), m).unwrap();
    let slices = find_paired(&problem, 0..25, &SearchOptions::default()).unwrap();
    let sums = partial_sums(&slices, problem.measure.total());
    for (l, s) in sums.iter().enumerate() {
        assert!(s.norm() < 1e-5, "{l}: {s}");
    }
}

#[test]
fn endpoint_density_has_no_prediction() {
    let m = Measure {
        atoms: vec![],
        density: vec![DensityPiece {
            start: 0.0,
            end: 0.25,
            value: c(2.0, 0.0),
        }],
    };
    let problem = SpectralProblem::new(BoundaryConditionSet::fourth_order_example(), m).unwrap();
    assert!(matches!(
        rhs_prediction(&problem),
        Err(Error::UnsupportedEndpointDerivative { .. })
    ));
}
