//! Regularized trace: partial sums over annuli, Cesàro means and the predicted limit.

use crate::cplx::{self, c};
use crate::determinants::RegularityReport;
use crate::error::{Error, Result};
use crate::spectrum::{find_paired, PairedSlice, SearchOptions, SpectralProblem};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::io::Write;
use std::ops::Range;

/// Fewest terms accepted by the Cesàro transforms.
pub const MIN_TERMS: usize = 20;

/// `I_l = sum over annuli <= l of sum [lambda(q) - lambda(0) - correction]`.
///
/// Each annulus is summed as a block, so pairs of close eigenvalues enter together.
pub fn partial_sums(slices: &[PairedSlice], mean_correction: Complex64) -> Vec<Complex64> {
    let mut acc = c(0.0, 0.0);
    slices
        .iter()
        .map(|s| {
            acc += s
                .pairs
                .iter()
                .map(|p| p.delta_lambda - mean_correction)
                .sum::<Complex64>();
            acc
        })
        .collect()
}

/// Partial sums taken one eigenvalue at a time, in the order of the slices.
pub fn partial_sums_unbracketed(slices: &[PairedSlice], mean_correction: Complex64) -> Vec<Complex64> {
    let mut acc = c(0.0, 0.0);
    slices
        .iter()
        .flat_map(|s| s.pairs.iter())
        .map(|p| {
            acc += p.delta_lambda - mean_correction;
            acc
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cesaro {
    #[serde(with = "cplx::pair_vec")]
    pub means: Vec<Complex64>,
    /// Last arithmetic mean.
    #[serde(with = "cplx::pair")]
    pub limit: Complex64,
    /// Largest distance of the last quarter of means from `limit`.
    pub error_bar: f64,
}

impl Cesaro {
    pub fn check(&self, tolerance: f64) -> Result<Complex64> {
        if self.error_bar > tolerance {
            return Err(Error::NotConverged {
                error_bar: self.error_bar,
                tolerance,
            });
        }
        Ok(self.limit)
    }
}

/// (C,1) means of `seq`.
pub fn cesaro(seq: &[Complex64]) -> Result<Cesaro> {
    if seq.len() < MIN_TERMS {
        return Err(Error::TooFewTerms(seq.len(), MIN_TERMS));
    }
    let mut acc = c(0.0, 0.0);
    let means: Vec<Complex64> = seq
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            acc += x;
            acc / (k + 1) as f64
        })
        .collect();
    let limit = *means.last().unwrap_or(&acc);
    let tail = &means[means.len() - means.len() / 4..];
    let error_bar = tail.iter().map(|m| (m - limit).norm()).fold(0.0, f64::max);
    Ok(Cesaro {
        means,
        limit,
        error_bar,
    })
}

/// Average of the Cesàro limits of the even- and odd-indexed subsequences.
///
/// When partial sums alternate between two limits this recovers their mean without the
/// `1/k` tail of the plain transform.
pub fn cesaro_bracketed(seq: &[Complex64]) -> Result<Cesaro> {
    if seq.len() < 2 * MIN_TERMS {
        return Err(Error::TooFewTerms(seq.len(), 2 * MIN_TERMS));
    }
    let even: Vec<Complex64> = seq.iter().step_by(2).copied().collect();
    let odd: Vec<Complex64> = seq.iter().skip(1).step_by(2).copied().collect();
    let (e, o) = (cesaro(&even)?, cesaro(&odd)?);
    let means = e.means.iter().zip(&o.means).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(Cesaro {
        means,
        limit: 0.5 * (e.limit + o.limit),
        error_bar: e.error_bar.max(o.error_bar),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsTerms {
    #[serde(with = "cplx::pair")]
    pub endpoint_a: Complex64,
    #[serde(with = "cplx::pair")]
    pub endpoint_b: Complex64,
    #[serde(with = "cplx::pair")]
    pub midpoint_atom: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsPrediction {
    #[serde(with = "cplx::pair")]
    pub value: Complex64,
    pub terms: RhsTerms,
}

/// Predicted trace: zero for odd `n`, `h_{1/2} frak_C / 2 pi` for even `n`.
pub fn rhs_prediction(problem: &SpectralProblem) -> Result<RhsPrediction> {
    rhs_for(&problem.measure, &problem.report, problem.n())
}

fn rhs_for(measure: &crate::spectrum::Measure, report: &RegularityReport, n: usize) -> Result<RhsPrediction> {
    let (qa, qb) = (measure.dqa(), measure.dqb());
    if qa.norm() > 0.0 || qb.norm() > 0.0 {
        return Err(Error::UnsupportedEndpointDerivative {
            qa: qa.to_string(),
            qb: qb.to_string(),
        });
    }
    let zero = c(0.0, 0.0);
    if n % 2 == 1 {
        return Ok(RhsPrediction {
            value: zero,
            terms: RhsTerms {
                endpoint_a: zero,
                endpoint_b: zero,
                midpoint_atom: zero,
            },
        });
    }
    let h = measure.midpoint_mass();
    if report.flags.ratio_on_positive_axis && h.norm() > 0.0 {
        return Err(Error::AmbiguousBranch);
    }
    let mid = h * report.frak_cap / TAU;
    Ok(RhsPrediction {
        value: mid,
        terms: RhsTerms {
            endpoint_a: zero,
            endpoint_b: zero,
            midpoint_atom: mid,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    NoMatch,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEstimate {
    #[serde(with = "cplx::pair_vec")]
    pub partial_sums: Vec<Complex64>,
    #[serde(with = "cplx::pair_vec")]
    pub cesaro_means: Vec<Complex64>,
    pub bracketed: bool,
    #[serde(with = "cplx::pair")]
    pub limit_estimate: Complex64,
    pub error_bar: f64,
    /// Even/odd split estimate, when enough terms are available.
    #[serde(with = "cplx::pair_opt")]
    pub split_limit: Option<Complex64>,
    #[serde(with = "cplx::pair_opt")]
    pub rhs_prediction: Option<Complex64>,
    pub rhs_terms: Option<RhsTerms>,
    /// Why no prediction is available, if it is not.
    pub rhs_error: Option<String>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl TraceEstimate {
    pub fn from_sums(partial_sums: Vec<Complex64>, rhs: Result<RhsPrediction>, tolerance: f64) -> Result<Self> {
        let ces = cesaro(&partial_sums)?;
        let split_limit = cesaro_bracketed(&partial_sums).ok().map(|s| s.limit);
        let (rhs_prediction, rhs_terms, rhs_error) = match rhs {
            Ok(r) => (Some(r.value), Some(r.terms), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        let verdict = match rhs_prediction {
            _ if ces.error_bar > tolerance => Verdict::Inconclusive,
            None => Verdict::Inconclusive,
            Some(r) if (ces.limit - r).norm() <= tolerance => Verdict::Match,
            Some(_) => Verdict::NoMatch,
        };
        Ok(Self {
            partial_sums,
            cesaro_means: ces.means,
            bracketed: true,
            limit_estimate: ces.limit,
            error_bar: ces.error_bar,
            split_limit,
            rhs_prediction,
            rhs_terms,
            rhs_error,
            tolerance,
            verdict,
        })
    }
}

/// Solves the paired spectra over `annuli` and summarises the trace.
pub fn estimate_trace(
    problem: &SpectralProblem,
    annuli: Range<usize>,
    opts: &SearchOptions,
    tolerance: f64,
) -> Result<TraceEstimate> {
    let slices = find_paired(problem, annuli, opts)?;
    let sums = partial_sums(&slices, problem.measure.total());
    TraceEstimate::from_sums(sums, rhs_prediction(problem), tolerance)
}

#[derive(Serialize)]
struct Row {
    l: usize,
    re_partial: f64,
    im_partial: f64,
    re_mean: f64,
    im_mean: f64,
}

/// Trajectory of partial sums and their means.
pub fn write_csv<W: Write>(est: &TraceEstimate, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (l, (s, m)) in est.partial_sums.iter().zip(&est.cesaro_means).enumerate() {
        w.serialize(Row {
            l,
            re_partial: s.re,
            im_partial: s.im,
            re_mean: m.re,
            im_mean: m.im,
        })?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::BoundaryConditionSet;
    use crate::spectrum::Measure;
    use proptest::prelude::*;

    #[test]
    fn constant_sequence() {
        let r = cesaro(&vec![c(2.0, -1.0); 40]).unwrap();
        assert_eq!(r.limit, c(2.0, -1.0));
        assert_eq!(r.error_bar, 0.0);
    }

    #[test]
    fn alternating_sequence() {
        let seq: Vec<Complex64> = (0..400).map(|l| c(if l % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let r = cesaro(&seq).unwrap();
        assert!(r.limit.norm() <= 1.0 / 400.0 + 1e-15);
        assert!(r.error_bar <= 1.0 / 300.0);
        let s = cesaro_bracketed(&seq).unwrap();
        assert!(s.limit.norm() < 1e-15);
    }

    #[test]
    fn short_sequence_rejected() {
        assert_eq!(cesaro(&[c(1.0, 0.0); 5]), Err(Error::TooFewTerms(5, MIN_TERMS)));
    }

    #[test]
    fn not_converged_is_reported() {
        let seq: Vec<Complex64> = (0..40).map(|l| c(l as f64, 0.0)).collect();
        assert!(matches!(
            cesaro(&seq).unwrap().check(1e-3),
            Err(Error::NotConverged { .. })
        ));
    }

    proptest! {
        #[test]
        fn cosine_sequence_tends_to_mean(a in -2.0..2.0f64, b in 0.1..2.0f64, theta in 0.3..2.8f64, phi in 0.0..6.0f64) {
            let k = 2000;
            let seq: Vec<Complex64> = (0..k).map(|l| c(a + b * (l as f64 * theta + phi).cos(), 0.0)).collect();
            let r = cesaro(&seq).unwrap();
            // Dirichlet-kernel bound: |sum cos| <= 1/|sin(theta/2)|.
            let bound = b / (theta / 2.0).sin() / k as f64;
            prop_assert!((r.limit.re - a).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn prediction_cases() {
        let ex = BoundaryConditionSet::fourth_order_example();
        let mid = SpectralProblem::new(ex.clone(), Measure::atom(0.5, c(1.0, 0.0))).unwrap();
        let r = rhs_prediction(&mid).unwrap();
        assert!((r.value - mid.report.frak_cap / TAU).norm() < 1e-15);
        let off = SpectralProblem::new(ex, Measure::atom(0.3, c(1.0, 0.0))).unwrap();
        assert_eq!(rhs_prediction(&off).unwrap().value, c(0.0, 0.0));
        let odd = SpectralProblem::new(BoundaryConditionSet::periodic(3), Measure::atom(0.5, c(1.0, 0.0))).unwrap();
        assert_eq!(rhs_prediction(&odd).unwrap().value, c(0.0, 0.0));
        let dense = SpectralProblem::new(BoundaryConditionSet::dirichlet2(), Measure::constant(c(1.0, 0.0))).unwrap();
        assert!(matches!(
            rhs_prediction(&dense),
            Err(Error::UnsupportedEndpointDerivative { .. })
        ));
    }

    #[test]
    fn prediction_is_linear_in_midpoint_mass() {
        let ex = BoundaryConditionSet::fourth_order_example();
        let one = SpectralProblem::new(ex.clone(), Measure::atom(0.5, c(1.0, 0.0))).unwrap();
        let three = SpectralProblem::new(ex, Measure::atom(0.5, c(3.0, 0.5))).unwrap();
        let (a, b) = (
            rhs_prediction(&one).unwrap().value,
            rhs_prediction(&three).unwrap().value,
        );
        assert!((b - c(3.0, 0.5) * a).norm() < 1e-14);
    }

    #[test]
    fn zero_measure_gives_zero_sums() {
        let p = SpectralProblem::new(BoundaryConditionSet::fourth_order_example(), Measure::zero()).unwrap();
        let slices = find_paired(&p, 0..25, &SearchOptions::default()).unwrap();
        assert!(partial_sums(&slices, c(0.0, 0.0)).iter().all(|s| s.norm() == 0.0));
    }
}
