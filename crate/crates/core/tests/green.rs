use std::f64::consts::TAU;
use tracelab::bc::BoundaryConditionSet;
use tracelab::cplx::{c, I};
use tracelab::green::{contour_options, contour_sequence, frak_c_via_lemma51, write_csv, GreenDiagonal};
use tracelab::spectrum::{find_paired, plan_contours, Measure, SearchOptions, SpectralProblem};
use tracelab::trace::cesaro;
use tracelab::Complex64;

fn radii(problem: &SpectralProblem, count: usize) -> Vec<(usize, f64)> {
    let plan = plan_contours(&problem.report, problem.n(), 0.0, &SearchOptions::default());
    (0..count).map(|l| (l, plan.radius(l))).collect()
}

#[test]
fn centered_contour_means_tend_to_coefficient() {
    let problem = SpectralProblem::new(
        BoundaryConditionSet::fourth_order_example(),
        Measure::atom(0.5, c(1.0, 0.0)),
    )
    .unwrap();
    let values = contour_sequence(
        &problem.bcs,
        &problem.measure,
        &radii(&problem, 300),
        true,
        contour_options(),
    )
    .unwrap();
    let seq: Vec<Complex64> = values.iter().map(|v| v.value).collect();
    let ces = cesaro(&seq).unwrap();
    let expected = -I * problem.report.frak_cap;
    assert!((ces.limit - expected).norm() < 5e-2, "{} vs {expected}", ces.limit);
}

#[test]
fn contour_integrals_count_eigenvalue_shifts() {
    // Sum of first-order shifts inside each contour against the full contour integral.
    let problem = SpectralProblem::new(BoundaryConditionSet::dirichlet2(), Measure::atom(0.37, c(0.01, 0.0))).unwrap();
    let r = radii(&problem, 30);
    let raw = contour_sequence(&problem.bcs, &problem.measure, &r, false, contour_options()).unwrap();
    let slices = find_paired(&problem, 0..30, &SearchOptions::default()).unwrap();
    let mut inside = c(0.0, 0.0);
    for (slice, contour) in slices.iter().zip(&raw) {
        inside += slice.pairs.iter().map(|p| p.delta_lambda).sum::<Complex64>();
        let green = I / TAU * contour.value;
        // Second-order terms are of size h^2.
        assert!(
            (inside - green).norm() < 1e-3,
            "l = {}: {inside} vs {green}",
            slice.annulus
        );
    }
}

#[test]
fn lemma51_matches_closed_form() {
    let problem = SpectralProblem::new(
        BoundaryConditionSet::fourth_order_example(),
        Measure::atom(0.5, c(1.0, 0.0)),
    )
    .unwrap();
    for (r0, r1) in [(std::f64::consts::PI, 0.0), (1.0, 2.5)] {
        let lemma = frak_c_via_lemma51(&problem.report, r0, r1).unwrap();
        assert!(
            (lemma.value - problem.report.frak_cap).norm() < 1e-10,
            "{}",
            lemma.value
        );
        for (n, p) in lemma.numeric.iter().zip(&lemma.primitive) {
            assert!((n - p).norm() < 1e-10);
        }
    }
}

#[test]
fn green_diagonal_is_finite_off_spectrum() {
    let bcs = BoundaryConditionSet::fourth_order_example();
    let g = GreenDiagonal::new(&bcs);
    for k in 1..20 {
        let z = Complex64::from_polar(k as f64 * 7.3, 0.2);
        for x in [0.1, 0.5, 0.9] {
            assert!(g.green_diag(x, z).unwrap().is_finite());
        }
    }
}

#[test]
fn csv_lists_running_means() {
    let problem = SpectralProblem::new(
        BoundaryConditionSet::fourth_order_example(),
        Measure::atom(0.5, c(1.0, 0.0)),
    )
    .unwrap();
    let values = contour_sequence(
        &problem.bcs,
        &problem.measure,
        &radii(&problem, 4),
        true,
        contour_options(),
    )
    .unwrap();
    let mut buf = vec![];
    write_csv(&values, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "l,re,im,cesaro_re,cesaro_im");
    assert_eq!(text.lines().count(), 5);
}
