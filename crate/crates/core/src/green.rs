//! Diagonal of the unperturbed Green function and two independent routes to `frak_C`.
//!
//! The ratios `Delta_{a,b} / Delta` are obtained for all `b` at once from one linear solve
//! (Cramer's rule), with growing exponential columns divided out. Each term of the double
//! sum is then a bounded exponential in `x`, so measures integrate in closed form.

use crate::bc::BoundaryConditionSet;
use crate::cplx::{self, c, I};
use crate::determinants::{RegularityReport, RootOfUnityContext};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quad::{self, QuadOptions};
use crate::spectrum::Measure;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// `|det| / hadamard` below this means the point is too close to the spectrum.
pub const NEAR_SPECTRUM: f64 = 1e-10;

pub struct GreenDiagonal<'a> {
    pub bcs: &'a BoundaryConditionSet,
    ctx: RootOfUnityContext,
}

/// `coef * exp(e0 + k x)`.
#[derive(Debug, Clone, Copy)]
struct Term {
    coef: Complex64,
    e0: Complex64,
    k: Complex64,
    diagonal: bool,
}

impl Term {
    fn at(&self, x: f64) -> Complex64 {
        self.coef * (self.e0 + self.k * x).exp()
    }

    /// `int_a^b` of the term, evaluated from the better-conditioned end.
    fn integral(&self, a: f64, b: f64) -> Complex64 {
        let len = b - a;
        let kl = self.k * len;
        let start = (self.e0 + self.k * a).exp();
        let v = if kl.norm() < 1.0 {
            if kl.norm() == 0.0 {
                start * len
            } else {
                start * cplx::expm1(kl) / self.k
            }
        } else {
            ((self.e0 + self.k * b).exp() - start) / self.k
        };
        self.coef * v
    }
}

impl<'a> GreenDiagonal<'a> {
    pub fn new(bcs: &'a BoundaryConditionSet) -> Self {
        Self {
            bcs,
            ctx: RootOfUnityContext::new(bcs.n),
        }
    }

    /// Terms of `n z^{n-1} G(x, x, z^n) = -i sum_{a,b} rho^a e^{i z x (rho^b - rho^a)} Delta_{a,b} / Delta`.
    fn terms(&self, z: Complex64) -> Result<Vec<Term>> {
        let n = self.bcs.n;
        let iz_inv = (I * z).inv();
        let w: Vec<Complex64> = (0..n).map(|m| z * self.ctx.powers[m]).collect();
        let growing: Vec<bool> = w.iter().map(|&om| (I * om).re > 0.0).collect();
        let mut wh = linalg::zeros(n, n);
        let mut ph = linalg::zeros(n, n);
        let mut qh = linalg::zeros(n, n);
        for (j, f) in self.bcs.forms.iter().enumerate() {
            let row = cplx::powu(iz_inv, f.d);
            for m in 0..n {
                let s = I * w[m];
                let p = f.p.eval(s) * row;
                let q = f.q.eval(s) * row;
                ph[(j, m)] = p;
                qh[(j, m)] = q;
                wh[(j, m)] = if growing[m] {
                    p * (-I * w[m]).exp() + q
                } else {
                    p + (I * w[m]).exp() * q
                };
            }
        }
        let lu = wh.clone().lu();
        let det = lu.determinant();
        let rel = det.norm() / linalg::hadamard_bound(&wh);
        // Also rejects NaN.
        if rel.is_nan() || rel <= NEAR_SPECTRUM {
            return Err(Error::NearSpectrum {
                z: z.to_string(),
                magnitude: rel,
            });
        }
        let mut rhs = CMat::zeros(n, 2 * n);
        rhs.columns_mut(0, n).copy_from(&ph);
        rhs.columns_mut(n, n).copy_from(&qh);
        let sol = lu.solve(&rhs).ok_or(Error::NearSpectrum {
            z: z.to_string(),
            magnitude: rel,
        })?;
        let mut out = Vec::with_capacity(n * n + n);
        for a in 0..n {
            let ra = self.ctx.powers[a];
            let iwa = I * w[a];
            for b in 0..n {
                let iwb = I * w[b];
                let gb = if growing[b] { iwb } else { c(0.0, 0.0) };
                let k = iwb - iwa;
                let (coef, e0) = if growing[a] {
                    (-ra * sol[(b, a)], -gb)
                } else {
                    (ra * sol[(b, n + a)], iwa - gb)
                };
                out.push(Term {
                    coef: -I * coef,
                    e0,
                    k,
                    diagonal: a == b,
                });
                if growing[a] && a == b {
                    out.push(Term {
                        coef: -I * ra,
                        e0: c(0.0, 0.0),
                        k: c(0.0, 0.0),
                        diagonal: true,
                    });
                }
            }
        }
        Ok(out)
    }

    /// `G(x, x, z^n)`.
    pub fn green_diag(&self, x: f64, z: Complex64) -> Result<Complex64> {
        let n = self.bcs.n;
        let s: Complex64 = self.terms(z)?.iter().map(|t| t.at(x)).sum();
        Ok(s / (n as f64 * cplx::powu(z, n - 1)))
    }

    /// `int n z^{n-1} G(x, x, z^n) q(dx)`; `centered` drops the `a = b` terms, which only see `int q`.
    pub fn measure_integral(&self, measure: &Measure, z: Complex64, centered: bool) -> Result<Complex64> {
        let terms = self.terms(z)?;
        let pieces = measure.pieces();
        let mut acc = c(0.0, 0.0);
        for t in terms.iter().filter(|t| !(centered && t.diagonal)) {
            for a in &measure.atoms {
                acc += a.h * t.at(a.x);
            }
            for p in &pieces {
                acc += p.value * t.integral(p.start, p.end);
            }
        }
        Ok(acc)
    }

    /// `int_{|lambda| = R^n} int G(x, x, lambda) q(dx) d lambda`, as an integral over the arc
    /// `z = R e^{i t}`, `0 <= t <= 2 pi / n`.
    pub fn contour_trace_integral(
        &self,
        measure: &Measure,
        radius: f64,
        centered: bool,
        opts: QuadOptions,
    ) -> Result<Complex64> {
        if measure.is_zero() {
            return Ok(c(0.0, 0.0));
        }
        let n = self.bcs.n;
        let mut failure = None;
        let (v, _, _) = quad::integrate(
            |t| {
                let z = Complex64::from_polar(radius, t);
                match self.measure_integral(measure, z, centered) {
                    Ok(v) => v * I * z,
                    Err(e) => {
                        failure.get_or_insert(e);
                        c(0.0, 0.0)
                    }
                }
            },
            0.0,
            TAU / n as f64,
            &[PI / n as f64],
            opts,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}

/// Default quadrature for contour integrals.
pub fn contour_options() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-13,
        max_evals: 1 << 14,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourValue {
    pub l: usize,
    pub radius: f64,
    #[serde(with = "cplx::pair")]
    pub value: Complex64,
}

/// Contour integrals over the given radii, computed in parallel and returned in order.
pub fn contour_sequence(
    bcs: &BoundaryConditionSet,
    measure: &Measure,
    radii: &[(usize, f64)],
    centered: bool,
    opts: QuadOptions,
) -> Result<Vec<ContourValue>> {
    let g = GreenDiagonal::new(bcs);
    radii
        .par_iter()
        .map(|&(l, radius)| {
            Ok(ContourValue {
                l,
                radius,
                value: g.contour_trace_integral(measure, radius, centered, opts)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma51 {
    /// Average over the two phases.
    #[serde(with = "cplx::pair")]
    pub value: Complex64,
    /// Half-line quadrature for each phase.
    #[serde(with = "cplx::pair_vec")]
    pub numeric: Vec<Complex64>,
    /// Partial-fraction primitive for each phase.
    #[serde(with = "cplx::pair_vec")]
    pub primitive: Vec<Complex64>,
}

/// `frak_C` as the average over the phases `r0, r1` of
/// `frak_c int_0^inf e^{-iR} dt / ((t - e^{-iR} xi_1)(t - e^{-iR} xi_2))`.
pub fn frak_c_via_lemma51(report: &RegularityReport, r0: f64, r1: f64) -> Result<Lemma51> {
    let fc = report.frak_c.ok_or(Error::OddOrderUnsupported(report.kappa))?;
    if report.xi.len() != 2 {
        return Err(Error::NotRegular { magnitude: 0.0 });
    }
    let (xi1, xi2) = (report.xi1(), report.xi2());
    let mut numeric = vec![];
    let mut primitive = vec![];
    for r in [r0, r1] {
        let rot = Complex64::from_polar(1.0, -r);
        let (a, b) = (rot * xi1, rot * xi2);
        for p in [a, b] {
            if p.re > 0.0 && p.im.abs() < 1e-9 * p.norm().max(1.0) {
                return Err(Error::PoleOnPath);
            }
        }
        let opts = QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_evals: 1 << 16,
        };
        let (v, _, _) = quad::integrate_half_line(|t| fc * rot / ((t - a) * (t - b)), opts)?;
        numeric.push(v);
        primitive.push(fc * ((-b).ln() - (-a).ln()) / (xi1 - xi2));
    }
    Ok(Lemma51 {
        value: 0.5 * (numeric[0] + numeric[1]),
        numeric,
        primitive,
    })
}

#[derive(Serialize)]
struct Row {
    l: usize,
    re: f64,
    im: f64,
    cesaro_re: f64,
    cesaro_im: f64,
}

/// Contour integrals with their running means.
pub fn write_csv<W: Write>(values: &[ContourValue], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut acc = c(0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        acc += v.value;
        let m = acc / (k + 1) as f64;
        w.serialize(Row {
            l: v.l,
            re: v.value.re,
            im: v.value.im,
            cesaro_re: m.re,
            cesaro_im: m.im,
        })?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinants;
    use proptest::prelude::*;

    fn dirichlet_closed_form(x: f64, lambda: Complex64) -> Complex64 {
        let k = lambda.sqrt();
        (k * x).sin() * (k * (1.0 - x)).sin() / (k * k.sin())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn dirichlet_matches_closed_form(x in 0.0..1.0f64, r in 0.5..40.0f64, t in 0.05..3.0f64) {
            let bcs = BoundaryConditionSet::dirichlet2();
            let g = GreenDiagonal::new(&bcs);
            let z = Complex64::from_polar(r, t);
            let got = g.green_diag(x, z).unwrap();
            let want = dirichlet_closed_form(x, z * z);
            prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-300), "{} vs {}", got, want);
        }
    }

    #[test]
    fn self_adjoint_symmetry() {
        let bcs = BoundaryConditionSet::fourth_order_example();
        let g = GreenDiagonal::new(&bcs);
        for &(x, lam) in &[(0.3, c(50.0, 20.0)), (0.5, c(-300.0, 1.0)), (0.9, c(4000.0, -700.0))] {
            let z = |l: Complex64| l.powf(0.25);
            let a = g.green_diag(x, crate::spectrum::to_sector(z(lam), 4)).unwrap();
            let b = g.green_diag(x, crate::spectrum::to_sector(z(lam.conj()), 4)).unwrap();
            assert!((a - b.conj()).norm() < 1e-10 * a.norm(), "{a} {b}");
        }
    }

    #[test]
    fn decay_on_contours() {
        let bcs = BoundaryConditionSet::fourth_order_example();
        let g = GreenDiagonal::new(&bcs);
        let mut worst: f64 = 0.0;
        for l in 1..40 {
            let r = PI * l as f64;
            for j in 0..20 {
                let z = Complex64::from_polar(r, j as f64 / 20.0 * PI / 2.0);
                worst = worst.max(g.green_diag(0.37, z).unwrap().norm() * r.powi(3));
            }
        }
        assert!(worst < 10.0, "{worst}");
    }

    #[test]
    fn near_spectrum_is_reported() {
        let bcs = BoundaryConditionSet::dirichlet2();
        let g = GreenDiagonal::new(&bcs);
        assert!(matches!(g.green_diag(0.5, c(PI, 0.0)), Err(Error::NearSpectrum { .. })));
    }

    #[test]
    fn density_integral_matches_quadrature() {
        let bcs = BoundaryConditionSet::fourth_order_example();
        let g = GreenDiagonal::new(&bcs);
        let m = Measure {
            atoms: vec![],
            density: vec![crate::spectrum::DensityPiece {
                start: 0.2,
                end: 0.7,
                value: c(1.5, -0.5),
            }],
        };
        let z = Complex64::from_polar(23.0, 0.3);
        let exact = g.measure_integral(&m, z, false).unwrap();
        let scale = 4.0 * cplx::powu(z, 3);
        let (num, _, _) = quad::integrate(
            |x| c(1.5, -0.5) * g.green_diag(x, z).unwrap() * scale,
            0.2,
            0.7,
            &[],
            QuadOptions {
                rel_tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((exact - num).norm() < 1e-9 * num.norm());
    }

    #[test]
    fn zero_measure_integral() {
        let bcs = BoundaryConditionSet::fourth_order_example();
        let g = GreenDiagonal::new(&bcs);
        assert_eq!(
            g.contour_trace_integral(&Measure::zero(), 10.0, false, contour_options())
                .unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn lemma51_example() {
        let rep = determinants::regularity(&BoundaryConditionSet::fourth_order_example()).unwrap();
        let l = frak_c_via_lemma51(&rep, 0.0, PI).unwrap();
        assert!((l.value - rep.frak_cap).norm() < 1e-9);
        for (a, b) in l.numeric.iter().zip(&l.primitive) {
            assert!((a - b).norm() < 1e-9);
        }
        let swapped = frak_c_via_lemma51(&rep, PI, 0.0).unwrap();
        assert!((swapped.value - l.value).norm() < 1e-14);
    }

    #[test]
    fn lemma51_almost_separated_vanishes() {
        let rep = determinants::regularity(&BoundaryConditionSet::dirichlet2()).unwrap();
        let l = frak_c_via_lemma51(&rep, PI / 2.0, 1.5 * PI).unwrap();
        assert!(l.value.norm() < 1e-10);
        assert_eq!(frak_c_via_lemma51(&rep, 0.0, PI), Err(Error::PoleOnPath));
    }
}
