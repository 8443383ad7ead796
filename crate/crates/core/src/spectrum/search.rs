//! Eigenvalue search by annuli.
//!
//! Circles `|z| = R_l` are placed in the gaps between the asymptotic root sequences. On
//! each circle the moments `(1/2 pi i) int (lambda/R^n)^p d log D` are integrated over the
//! arc `0 <= arg z <= 2 pi/n` only: the rotation `z -> rho z` permutes the exponential
//! columns, so the arc differences of two circles are exactly the power sums of the
//! eigenvalues `lambda = z^n` between them. Roots of the resulting polynomial seed Newton
//! iterations on the scaled determinant. The disk inside the first circle is handled in the
//! `lambda`-plane with the entire function `det(P + Q M(lambda))`.

use super::block::{BlockEvaluator, Layout, FD_STEP};
use super::propagator::taylor_matrix;
use super::roots::{aberth, newton_power_sums};
use super::SpectralProblem;
use crate::bc::BoundaryConditionSet;
use crate::cplx::{self, c};
use crate::determinants::RegularityReport;
use crate::error::{Error, Result};
use crate::linalg;
use crate::quad::{self, QuadOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::ops::Range;

/// Roots with `arg z` in `[-SECTOR_TOL, 2 pi/n - SECTOR_TOL)` count as lying in the sector.
pub const SECTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Largest number of eigenvalues resolved inside one annulus.
    pub max_moments: usize,
    pub quad: QuadOptions,
    /// Relative residual `|det| / hadamard` accepted at a root.
    pub residual_tol: f64,
    /// Smallest `|det| / hadamard` tolerated on a contour before it is moved.
    pub contour_floor: f64,
    /// Offset gaps narrower than this do not receive a contour.
    pub gap_threshold: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_moments: 8,
            quad: QuadOptions {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                max_evals: 1 << 15,
            },
            residual_tol: 1e-9,
            contour_floor: 1e-7,
            gap_threshold: 0.3,
        }
    }
}

/// Contour radii `R_l`, repeating a fixed set of phases every `2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourPlan {
    pub n: usize,
    /// Asymptotic offsets of the root sequences, reduced to `[0, 2 pi)`.
    pub offsets: Vec<f64>,
    /// Contour phases in `[0, 2 pi)`, ascending.
    pub phases: Vec<f64>,
    /// Index of the first contour in the infinite sequence of phases.
    pub start: usize,
}

impl ContourPlan {
    pub fn radius(&self, l: usize) -> f64 {
        let k = self.phases.len();
        let idx = self.start + l;
        self.phases[idx % k] + TAU * (idx / k) as f64
    }
}

fn reduce(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Real parts of the asymptotic offsets: `z ~ offset + 2 pi N` along the rays.
pub fn sequence_offsets(report: &RegularityReport) -> Vec<f64> {
    if let Some(odd) = report.odd_leading {
        let alpha = -cplx::I * (-odd.a0 / odd.a1).ln();
        let beta = -cplx::I * (-odd.a0 / odd.b1).ln();
        vec![reduce(alpha.re), reduce(-beta.re)]
    } else {
        report.alpha.iter().map(|a| reduce(a.re)).collect()
    }
}

/// Contours at the midpoints of the gaps between offsets, starting above `r_min`.
pub fn plan_contours(report: &RegularityReport, n: usize, max_density: f64, opts: &SearchOptions) -> ContourPlan {
    let mut offsets = sequence_offsets(report);
    offsets.sort_by(f64::total_cmp);
    let k = offsets.len();
    let mut phases = vec![];
    for i in 0..k {
        let next = if i + 1 < k { offsets[i + 1] } else { offsets[0] + TAU };
        let gap = next - offsets[i];
        if gap > opts.gap_threshold {
            phases.push(reduce(offsets[i] + 0.5 * gap));
        }
    }
    if phases.is_empty() {
        phases.push(reduce(offsets.first().copied().unwrap_or(0.0) + PI));
    }
    phases.sort_by(f64::total_cmp);
    let r_min = 1.5_f64.max((4.0 * max_density).powf(1.0 / n as f64));
    let mut plan = ContourPlan {
        n,
        offsets,
        phases,
        start: 0,
    };
    while plan.radius(0) < r_min {
        plan.start += 1;
    }
    plan
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    #[serde(with = "cplx::pair")]
    pub z: Complex64,
    #[serde(with = "cplx::pair")]
    pub lambda: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSlice {
    pub annulus: usize,
    /// Outer contour radius in the `z`-plane.
    pub radius: f64,
    /// Inner contour radius, zero for the central disk.
    pub inner_radius: f64,
    pub winding: usize,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl SpectrumSlice {
    pub fn eigen_z(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|e| e.z).collect()
    }

    pub fn eigen_lambda(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Eigenvalue> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(*e, e.multiplicity))
            .collect()
    }
}

/// A perturbed eigenvalue together with its unperturbed partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub unperturbed: Eigenvalue,
    pub perturbed: Eigenvalue,
    /// `lambda(q) - lambda(0)`, computed without forming the large `lambda`s.
    #[serde(with = "cplx::pair")]
    pub delta_lambda: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedSlice {
    pub annulus: usize,
    pub radius: f64,
    pub pairs: Vec<EigenPair>,
}

struct Contour {
    radius: f64,
    moments: Vec<Complex64>,
}

/// Arc moments at radius `r`, or `None` if the determinant gets too small on the arc.
fn arc_moments(ev: &BlockEvaluator, r: f64, opts: &SearchOptions) -> Result<Option<Vec<Complex64>>> {
    let n = ev.n();
    let kmax = opts.max_moments;
    let mut floor = f64::INFINITY;
    let breaks: Vec<f64> = (1..2).map(|k| k as f64 * PI / n as f64).collect();
    let res = quad::integrate_vec(
        |t| {
            let z = Complex64::from_polar(r, t);
            let (g, rel) = ev.log_derivative(z);
            floor = floor.min(rel);
            let u = Complex64::from_polar(1.0, n as f64 * t);
            let mut term = g * z / TAU;
            let mut out = Vec::with_capacity(kmax + 1);
            for _ in 0..=kmax {
                out.push(term);
                term *= u;
            }
            out
        },
        0.0,
        TAU / n as f64,
        &breaks,
        opts.quad,
    );
    match res {
        Ok(v) if floor >= opts.contour_floor && v.value.iter().all(|x| x.is_finite()) => Ok(Some(v.value)),
        Ok(_) | Err(Error::QuadratureNotConverged { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

const NUDGES: [f64; 9] = [0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.45, -0.45];

/// Moments on a common circle for every evaluator, moving the circle slightly if needed.
fn contour_set(evs: &[&BlockEvaluator], r: f64, opts: &SearchOptions) -> Result<Vec<Contour>> {
    'nudge: for d in NUDGES {
        let radius = r + d;
        let mut out = Vec::with_capacity(evs.len());
        for ev in evs {
            match arc_moments(ev, radius, opts)? {
                Some(moments) => out.push(Contour { radius, moments }),
                None => continue 'nudge,
            }
        }
        return Ok(out);
    }
    Err(Error::ContourTooClose {
        radius: r,
        distance: 0.0,
    })
}

fn nearest_integer(x: Complex64, annulus: usize) -> Result<usize> {
    let k = x.re.round();
    if (x - c(k, 0.0)).norm() > 0.05 || k < 0.0 {
        return Err(Error::CountMismatch {
            annulus,
            winding: k.max(0.0) as usize,
            found: 0,
        });
    }
    Ok(k as usize)
}

/// Groups of (nearly) coincident seeds: centroid and size.
fn clusters(seeds: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut used = vec![false; seeds.len()];
    let mut out = vec![];
    for i in 0..seeds.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![seeds[i]];
        used[i] = true;
        for j in i + 1..seeds.len() {
            if !used[j] && (seeds[j] - seeds[i]).norm() < tol {
                used[j] = true;
                members.push(seeds[j]);
            }
        }
        let m = members.len();
        out.push((members.iter().sum::<Complex64>() / m as f64, m));
    }
    out
}

/// Newton in `eps` for `det(base + eps) = 0` with the mask of `base`; returns `(eps, residual)`.
pub(crate) fn newton_block(ev: &BlockEvaluator, base: Complex64, eps0: Complex64, mult: usize) -> (Complex64, f64) {
    let mut eps = eps0;
    let mut last = f64::INFINITY;
    let scale = base.norm().max(1.0);
    for _ in 0..80 {
        let v = ev.eval(base, eps).value;
        let dv = ev.value_derivative(base, eps, FD_STEP);
        let step = mult as f64 * v / dv;
        if !step.is_finite() {
            break;
        }
        let size = step.norm();
        if size < 1e-9 * scale && size >= last {
            break;
        }
        eps -= step;
        if size <= 1e-16 * scale {
            break;
        }
        last = size;
    }
    let v = ev.eval_full(base, eps);
    (eps, v.det.value.norm() / v.hadamard)
}

/// Newton from `z0`, re-basing whenever the correction leaves the neighbourhood of the base.
fn polish_block(ev: &BlockEvaluator, z0: Complex64, mult: usize) -> (Complex64, f64) {
    let mut base = z0;
    for _ in 0..6 {
        let (eps, res) = newton_block(ev, base, c(0.0, 0.0), mult);
        if eps.norm() < 0.25 || !eps.is_finite() {
            return (base + eps, res);
        }
        base += eps;
    }
    let (eps, res) = newton_block(ev, base, c(0.0, 0.0), mult);
    (base + eps, res)
}

/// Rotates `z` by powers of `rho` into the principal sector.
pub fn to_sector(z: Complex64, n: usize) -> Complex64 {
    if z.norm() == 0.0 {
        return z;
    }
    let width = TAU / n as f64;
    let arg = z.arg();
    let k = ((arg + SECTOR_TOL) / width).floor();
    z * Complex64::from_polar(1.0, -k * width)
}

fn sort_slice(v: &mut [Eigenvalue]) {
    v.sort_by(|a, b| {
        a.lambda
            .norm()
            .total_cmp(&b.lambda.norm())
            .then(a.z.arg().total_cmp(&b.z.arg()))
    });
}

/// Merges roots that converged to the same point.
fn merge(roots: Vec<(Complex64, usize, f64)>, n: usize) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = vec![];
    for (z, m, res) in roots {
        let z = to_sector(z, n);
        if let Some(e) = out.iter_mut().find(|e| (e.z - z).norm() <= 1e-9 * z.norm().max(1.0)) {
            e.multiplicity += m;
            e.residual = e.residual.max(res);
        } else {
            out.push(Eigenvalue {
                z,
                lambda: cplx::powu(z, n),
                multiplicity: m,
                residual: res,
            });
        }
    }
    sort_slice(&mut out);
    out
}

fn check_slice(slice: &SpectrumSlice, opts: &SearchOptions) -> Result<()> {
    let found: usize = slice.eigenvalues.iter().map(|e| e.multiplicity).sum();
    let inside = slice
        .eigenvalues
        .iter()
        .all(|e| e.z.norm() < slice.radius && e.z.norm() >= slice.inner_radius);
    if found != slice.winding || !inside {
        return Err(Error::CountMismatch {
            annulus: slice.annulus,
            winding: slice.winding,
            found,
        });
    }
    for e in &slice.eigenvalues {
        for r in [slice.inner_radius, slice.radius] {
            let distance = (e.z.norm() - r).abs();
            if r > 0.0 && distance < 1e-6 * r {
                return Err(Error::ContourTooClose { radius: r, distance });
            }
        }
        if e.residual > opts.residual_tol {
            return Err(Error::RootNotFound {
                z: e.z.to_string(),
                reason: format!("residual {:e}", e.residual),
            });
        }
    }
    Ok(())
}

fn annulus_slice(
    ev: &BlockEvaluator,
    annulus: usize,
    inner: &Contour,
    outer: &Contour,
    opts: &SearchOptions,
) -> Result<SpectrumSlice> {
    let n = ev.n();
    let shrink = (inner.radius / outer.radius).powi(n as i32);
    let mut mu = Vec::with_capacity(outer.moments.len());
    let mut w = 1.0;
    for (o, i) in outer.moments.iter().zip(&inner.moments) {
        mu.push(o - w * i);
        w *= shrink;
    }
    let winding = nearest_integer(mu[0], annulus)?;
    let mut slice = SpectrumSlice {
        annulus,
        radius: outer.radius,
        inner_radius: inner.radius,
        winding,
        eigenvalues: vec![],
    };
    if winding == 0 {
        return Ok(slice);
    }
    if winding > opts.max_moments {
        return Err(Error::CountMismatch {
            annulus,
            winding,
            found: 0,
        });
    }
    let seeds = aberth(&newton_power_sums(&mu, winding));
    let s = outer.radius.powi(n as i32);
    let mut roots = vec![];
    for (u, m) in clusters(&seeds, 1e-6) {
        let z0 = to_sector(principal_root(u * s, n), n);
        let (z, res) = polish_block(ev, z0, m);
        if res <= opts.residual_tol || m == 1 {
            roots.push((z, m, res));
        } else {
            for &u in seeds.iter().filter(|&&x| (x - u).norm() < 1e-6) {
                let (z, res) = polish_block(ev, principal_root(u * s, n), 1);
                roots.push((z, 1, res));
            }
        }
    }
    slice.eigenvalues = merge(roots, n);
    check_slice(&slice, opts)?;
    Ok(slice)
}

fn principal_root(lambda: Complex64, n: usize) -> Complex64 {
    if lambda.norm() == 0.0 {
        return lambda;
    }
    Complex64::from_polar(lambda.norm().powf(1.0 / n as f64), lambda.arg() / n as f64)
}

fn taylor_eval(bcs: &BoundaryConditionSet, layout: &Layout, lambda: Complex64) -> Complex64 {
    linalg::det(&taylor_matrix(bcs, layout, lambda))
}

fn taylor_derivative(bcs: &BoundaryConditionSet, layout: &Layout, lambda: Complex64, h: f64) -> Complex64 {
    let f = |t: f64| taylor_eval(bcs, layout, lambda + t);
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

fn lambda_step(lambda: Complex64, n: usize) -> f64 {
    1e-3 * (n as f64 * lambda.norm().powf((n - 1) as f64 / n as f64)).max(1.0)
}

/// Newton in `lambda`; the residual is relative to `scale`, the size of the function on the disk boundary.
fn polish_taylor(
    bcs: &BoundaryConditionSet,
    layout: &Layout,
    l0: Complex64,
    mult: usize,
    scale: f64,
) -> (Complex64, f64) {
    let n = bcs.n;
    let mut lambda = l0;
    let mut last = f64::INFINITY;
    for _ in 0..80 {
        let v = taylor_eval(bcs, layout, lambda);
        let dv = taylor_derivative(bcs, layout, lambda, lambda_step(lambda, n));
        let step = mult as f64 * v / dv;
        if !step.is_finite() {
            break;
        }
        let size = step.norm();
        if size < 1e-9 * lambda.norm().max(1.0) && size >= last {
            break;
        }
        lambda -= step;
        if size <= 1e-16 * lambda.norm().max(1.0) {
            break;
        }
        last = size;
    }
    (lambda, taylor_eval(bcs, layout, lambda).norm() / scale)
}

/// Eigenvalues with `|z| < r`, from trapezoidal moments of `det(P + Q M(lambda))`.
fn disk_slice(bcs: &BoundaryConditionSet, layout: &Layout, r: f64, opts: &SearchOptions) -> Result<SpectrumSlice> {
    let n = bcs.n;
    let s = r.powi(n as i32);
    let kmax = opts.max_moments;
    let moments = |points: usize| -> (Vec<Complex64>, f64) {
        let mut mu = vec![c(0.0, 0.0); kmax + 1];
        let mut size = 0.0_f64;
        for j in 0..points {
            let u = Complex64::from_polar(1.0, TAU * j as f64 / points as f64);
            let lambda = u * s;
            let v = taylor_eval(bcs, layout, lambda);
            size = size.max(v.norm());
            let dv = taylor_derivative(bcs, layout, lambda, lambda_step(lambda, n));
            let mut term = dv / v * lambda / points as f64;
            for m in mu.iter_mut() {
                *m += term;
                term *= u;
            }
        }
        (mu, size)
    };
    let mut points = 64;
    let (mut mu, scale) = moments(points);
    loop {
        points *= 2;
        let (next, _) = moments(points);
        let diff = next.iter().zip(&mu).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        mu = next;
        if diff < 1e-10 * (1.0 + mu[0].norm()) {
            break;
        }
        if points >= 1 << 13 {
            return Err(Error::QuadratureNotConverged {
                error: diff,
                evaluations: points,
            });
        }
    }
    let winding = nearest_integer(mu[0], 0)?;
    let mut slice = SpectrumSlice {
        annulus: 0,
        radius: r,
        inner_radius: 0.0,
        winding,
        eigenvalues: vec![],
    };
    if winding == 0 {
        return Ok(slice);
    }
    if winding > kmax {
        return Err(Error::CountMismatch {
            annulus: 0,
            winding,
            found: 0,
        });
    }
    let seeds = aberth(&newton_power_sums(&mu, winding));
    let mut roots = vec![];
    for (u, m) in clusters(&seeds, 1e-6) {
        let (lambda, res) = polish_taylor(bcs, layout, u * s, m, scale);
        if res <= opts.residual_tol || m == 1 {
            roots.push((lambda, m, res));
        } else {
            for &u in seeds.iter().filter(|&&x| (x - u).norm() < 1e-6) {
                let (lambda, res) = polish_taylor(bcs, layout, u * s, 1, scale);
                roots.push((lambda, 1, res));
            }
        }
    }
    let mut out: Vec<Eigenvalue> = vec![];
    for (lambda, m, res) in roots {
        if let Some(e) = out.iter_mut().find(|e| (e.lambda - lambda).norm() <= 1e-9 * s.max(1.0)) {
            e.multiplicity += m;
            e.residual = e.residual.max(res);
        } else {
            out.push(Eigenvalue {
                z: to_sector(principal_root(lambda, n), n),
                lambda,
                multiplicity: m,
                residual: res,
            });
        }
    }
    sort_slice(&mut out);
    slice.eigenvalues = out;
    check_slice(&slice, opts)?;
    Ok(slice)
}

/// Contours `0..=last` for each evaluator, computed in parallel.
fn all_contours(
    evs: &[&BlockEvaluator],
    plan: &ContourPlan,
    last: usize,
    opts: &SearchOptions,
) -> Result<Vec<Vec<Contour>>> {
    (0..=last)
        .into_par_iter()
        .map(|l| contour_set(evs, plan.radius(l), opts))
        .collect()
}

/// Eigenvalues in the given annuli; annulus `0` is the disk inside the first contour.
pub fn find_eigenvalues(
    problem: &SpectralProblem,
    annuli: Range<usize>,
    opts: &SearchOptions,
) -> Result<Vec<SpectrumSlice>> {
    if annuli.is_empty() {
        return Ok(vec![]);
    }
    let layout = problem.layout();
    let ev = BlockEvaluator::new(&problem.bcs, &layout);
    let plan = plan_contours(&problem.report, problem.n(), layout.max_density(), opts);
    let contours = all_contours(&[&ev], &plan, annuli.end - 1, opts)?;
    annuli
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                disk_slice(&problem.bcs, &layout, contours[0][0].radius, opts)
            } else {
                annulus_slice(&ev, l, &contours[l - 1][0], &contours[l][0], opts)
            }
        })
        .collect()
}

fn pair_key(e: &Eigenvalue) -> (i64, f64) {
    ((e.z.arg() * 1e8).round() as i64, e.z.norm())
}

/// Perturbed and unperturbed eigenvalues bracketed by common contours and paired per annulus.
///
/// The unperturbed problem is solved with the same breakpoints as the perturbed one, so
/// both determinants share their rounding and `delta_lambda` keeps full precision.
pub fn find_paired(problem: &SpectralProblem, annuli: Range<usize>, opts: &SearchOptions) -> Result<Vec<PairedSlice>> {
    if annuli.is_empty() {
        return Ok(vec![]);
    }
    let n = problem.n();
    let lq = problem.layout();
    let l0 = lq.companion();
    let evq = BlockEvaluator::new(&problem.bcs, &lq);
    let ev0 = BlockEvaluator::new(&problem.bcs, &l0);
    let plan = plan_contours(&problem.report, n, lq.max_density(), opts);
    let contours = all_contours(&[&evq, &ev0], &plan, annuli.end - 1, opts)?;
    annuli
        .into_par_iter()
        .map(|l| {
            let (sq, s0) = if l == 0 {
                let r = contours[0][0].radius;
                (
                    disk_slice(&problem.bcs, &lq, r, opts)?,
                    disk_slice(&problem.bcs, &l0, r, opts)?,
                )
            } else {
                (
                    annulus_slice(&evq, l, &contours[l - 1][0], &contours[l][0], opts)?,
                    annulus_slice(&ev0, l, &contours[l - 1][1], &contours[l][1], opts)?,
                )
            };
            let mut eq = sq.expanded();
            let mut e0 = s0.expanded();
            if eq.len() != e0.len() {
                return Err(Error::PairingMismatch {
                    annulus: l,
                    perturbed: eq.len(),
                    unperturbed: e0.len(),
                });
            }
            eq.sort_by(|a, b| {
                pair_key(a)
                    .partial_cmp(&pair_key(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            e0.sort_by(|a, b| {
                pair_key(a)
                    .partial_cmp(&pair_key(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let pairs = eq
                .into_iter()
                .zip(e0)
                .map(|(pq, p0)| {
                    let delta_lambda = if l == 0 {
                        pq.lambda - p0.lambda
                    } else {
                        shared_base_delta(&evq, &ev0, p0, pq, n)
                    };
                    EigenPair {
                        unperturbed: p0,
                        perturbed: pq,
                        delta_lambda,
                    }
                })
                .collect();
            Ok(PairedSlice {
                annulus: l,
                radius: sq.radius,
                pairs,
            })
        })
        .collect()
}

/// Re-solves both roots as offsets from the unperturbed one and differences `(base + eps)^n`.
fn shared_base_delta(
    evq: &BlockEvaluator,
    ev0: &BlockEvaluator,
    p0: Eigenvalue,
    pq: Eigenvalue,
    n: usize,
) -> Complex64 {
    let base = p0.z;
    let (e0, _) = newton_block(ev0, base, c(0.0, 0.0), p0.multiplicity);
    let (eq, res) = newton_block(evq, base, pq.z - base, pq.multiplicity);
    if res > 1e-6 || (eq - (pq.z - base)).norm() > 1e-6 * base.norm().max(1.0) {
        return pq.lambda - p0.lambda;
    }
    cplx::pow_diff(base, eq, n) - cplx::pow_diff(base, e0, n)
}

#[derive(Serialize)]
struct Row {
    annulus: usize,
    re_z: f64,
    im_z: f64,
    re_lambda: f64,
    im_lambda: f64,
    multiplicity: usize,
    residual: f64,
}

/// Eigenvalue table with one row per distinct root.
pub fn write_csv<W: Write>(slices: &[SpectrumSlice], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in slices {
        for e in &s.eigenvalues {
            w.serialize(Row {
                annulus: s.annulus,
                re_z: e.z.re,
                im_z: e.z.im,
                re_lambda: e.lambda.re,
                im_lambda: e.lambda.im,
                multiplicity: e.multiplicity,
                residual: e.residual,
            })?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::BoundaryConditionSet;
    use crate::spectrum::Measure;

    fn solve(bcs: BoundaryConditionSet, m: Measure, range: Range<usize>) -> Vec<SpectrumSlice> {
        let p = SpectralProblem::new(bcs, m).unwrap();
        find_eigenvalues(&p, range, &SearchOptions::default()).unwrap()
    }

    #[test]
    fn dirichlet_plan_and_spectrum() {
        let bcs = BoundaryConditionSet::dirichlet2();
        let p = SpectralProblem::new(bcs.clone(), Measure::zero()).unwrap();
        let plan = plan_contours(&p.report, 2, 0.0, &SearchOptions::default());
        assert!((plan.radius(0) - 0.5 * PI).abs() < 1e-12);
        assert!((plan.radius(1) - 1.5 * PI).abs() < 1e-12);
        let slices = solve(bcs, Measure::zero(), 0..11);
        let all: Vec<Complex64> = slices.iter().flat_map(|s| s.eigen_lambda()).collect();
        assert_eq!(all.len(), 10);
        for (k, l) in all.iter().enumerate() {
            let exact = (PI * (k + 1) as f64).powi(2);
            assert!((l - exact).norm() < 1e-9 * exact, "{k}: {l}");
        }
    }

    #[test]
    fn fourth_order_example_has_one_root_per_annulus() {
        let slices = solve(BoundaryConditionSet::fourth_order_example(), Measure::zero(), 1..12);
        for s in &slices {
            assert_eq!(s.winding, 1, "annulus {}", s.annulus);
            assert!(s.eigenvalues[0].lambda.im.abs() < 1e-8 * s.eigenvalues[0].lambda.norm());
        }
    }

    #[test]
    fn periodic_roots_are_double() {
        let slices = solve(BoundaryConditionSet::periodic(4), Measure::zero(), 0..5);
        assert_eq!(slices[0].eigenvalues[0].multiplicity, 1);
        assert!(slices[0].eigenvalues[0].lambda.norm() < 1e-8);
        for s in &slices[1..] {
            assert_eq!(s.eigenvalues.len(), 1);
            let e = s.eigenvalues[0];
            assert_eq!(e.multiplicity, 2);
            let exact = (TAU * s.annulus as f64).powi(4);
            assert!((e.lambda - exact).norm() < 1e-8 * exact);
        }
    }

    #[test]
    fn clusters_group_close_seeds() {
        let g = clusters(&[c(0.0, 0.0), c(1e-8, 0.0), c(1.0, 0.0)], 1e-6);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].1, 2);
    }

    #[test]
    fn sector_rotation() {
        let z = Complex64::from_polar(3.0, -0.3);
        let r = to_sector(z, 4);
        assert!((r.arg() - (PI / 2.0 - 0.3)).abs() < 1e-14);
        assert!((cplx::powu(r, 4) - cplx::powu(z, 4)).norm() < 1e-12);
        let edge = Complex64::from_polar(3.0, PI / 2.0 - 1e-12);
        assert!(to_sector(edge, 4).arg().abs() < 1e-9);
    }
}
