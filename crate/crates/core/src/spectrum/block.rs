//! Multi-segment characteristic determinant.
//!
//! On each segment the solution is a combination of `exp(i w_m (x - a_m))`, `w_m = z_s rho^m`,
//! where `z_s^n = z^n - p` absorbs the local density `p`. Decaying exponentials are anchored
//! at the left end of the segment and growing ones at the right end, so every entry is
//! bounded by one. Rows are the boundary forms (scaled by `(iz)^{-d_j}`) followed by the
//! continuity conditions at each interior breakpoint (scaled by `(iz)^{-k}`), with the
//! `(n-1)`-st derivative jumping by `-h i^n y(c)` at an atom of mass `h`.
//!
//! The argument is split as `base + eps`. The mask and the large phases depend on `base`
//! only, so two layouts with the same breakpoints round identically and the difference of
//! their roots keeps full precision in `eps`.

use super::measure::Measure;
use crate::bc::BoundaryConditionSet;
use crate::cplx::{self, c, I};
use crate::determinants::{RootOfUnityContext, ScaledDet};
use crate::linalg;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    /// Constant density on the segment.
    pub p: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub segments: Vec<Segment>,
    /// Atom mass at the right end of segment `s`, for `s = 0..S-2`.
    pub masses: Vec<Complex64>,
}

impl Layout {
    pub fn free() -> Self {
        Self {
            segments: vec![Segment {
                x0: 0.0,
                x1: 1.0,
                p: c(0.0, 0.0),
            }],
            masses: vec![],
        }
    }

    pub fn from_measure(m: &Measure) -> Self {
        let pieces = m.pieces();
        let mut breaks = vec![0.0, 1.0];
        breaks.extend(m.atoms.iter().map(|a| a.x));
        for p in &pieces {
            breaks.push(p.start);
            breaks.push(p.end);
        }
        breaks.retain(|&x| (0.0..=1.0).contains(&x));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let segments: Vec<Segment> = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let p = pieces
                    .iter()
                    .filter(|p| p.start <= mid && mid < p.end)
                    .map(|p| p.value)
                    .sum();
                Segment { x0: w[0], x1: w[1], p }
            })
            .collect();
        let masses = segments[..segments.len() - 1]
            .iter()
            .map(|s| m.atoms.iter().filter(|a| a.x == s.x1).map(|a| a.h).sum())
            .collect();
        Self { segments, masses }
    }

    /// Same breakpoints with the measure removed.
    pub fn companion(&self) -> Self {
        Self {
            segments: self.segments.iter().map(|s| Segment { p: c(0.0, 0.0), ..*s }).collect(),
            masses: vec![c(0.0, 0.0); self.masses.len()],
        }
    }

    /// Layout with the given atom masses replaced, used by the Green-function identity.
    pub fn with_masses(&self, masses: Vec<Complex64>) -> Self {
        Self {
            segments: self.segments.clone(),
            masses,
        }
    }

    pub fn max_density(&self) -> f64 {
        self.segments.iter().map(|s| s.p.norm()).fold(0.0, f64::max)
    }
}

/// `(z_s(base), z_s(base + eps) - z_s(base))` with `z_s = z (1 - p / z^n)^{1/n}`.
pub fn local_offset(base: Complex64, eps: Complex64, p: Complex64, n: usize) -> (Complex64, Complex64) {
    if p == c(0.0, 0.0) {
        return (base, eps);
    }
    let bn = cplx::powu(base, n);
    let u0 = p / bn;
    let f0 = (cplx::log1p(-u0) / n as f64).exp();
    let base_s = base * f0;
    if eps == c(0.0, 0.0) {
        return (base_s, eps);
    }
    let z1n = bn + cplx::pow_diff(base, eps, n);
    let du = p * cplx::pow_diff(base, eps, n) / (bn * z1n);
    let dlog = cplx::log1p(du / (1.0 - u0));
    let df = f0 * cplx::expm1(dlog / n as f64);
    (base_s, eps * (f0 + df) + base * df)
}

pub struct BlockEvaluator<'a> {
    pub bcs: &'a BoundaryConditionSet,
    pub layout: &'a Layout,
    ctx: RootOfUnityContext,
}

/// Scaled value plus the Hadamard bound of the scaled matrix.
#[derive(Debug, Clone, Copy)]
pub struct BlockValue {
    pub det: ScaledDet,
    pub hadamard: f64,
}

impl<'a> BlockEvaluator<'a> {
    pub fn new(bcs: &'a BoundaryConditionSet, layout: &'a Layout) -> Self {
        Self {
            bcs,
            layout,
            ctx: RootOfUnityContext::new(bcs.n),
        }
    }

    pub fn n(&self) -> usize {
        self.bcs.n
    }

    fn power_count(&self) -> f64 {
        let n = self.n();
        let s = self.layout.segments.len();
        (self.bcs.kappa + (s - 1) * n * (n - 1) / 2) as f64
    }

    pub fn eval(&self, base: Complex64, eps: Complex64) -> ScaledDet {
        self.eval_full(base, eps).det
    }

    pub fn eval_full(&self, base: Complex64, eps: Complex64) -> BlockValue {
        let n = self.n();
        let segs = &self.layout.segments;
        let ns = segs.len();
        let size = n * ns;
        let z = base + eps;
        let iz = I * z;
        let iz_inv = iz.inv();
        let mut mat = linalg::zeros(size, size);
        let mut log_scale = self.power_count() * cplx::ln_iz(z);

        // Per segment and column: derivative ratio w/z and the anchored exponential at both ends.
        let mut ratio = vec![c(0.0, 0.0); size];
        let mut at_left = vec![c(0.0, 0.0); size];
        let mut at_right = vec![c(0.0, 0.0); size];
        for (s, seg) in segs.iter().enumerate() {
            let (bs, es) = local_offset(base, eps, seg.p, n);
            let len = seg.x1 - seg.x0;
            for m in 0..n {
                let wb = bs * self.ctx.powers[m];
                let we = es * self.ctx.powers[m];
                let col = s * n + m;
                ratio[col] = (wb + we) / z;
                if (I * wb).re > 0.0 {
                    log_scale += I * (wb + we) * seg.x1;
                    at_left[col] = (-I * wb * len).exp() * (-I * we * len).exp();
                    at_right[col] = c(1.0, 0.0);
                } else {
                    log_scale += I * (wb + we) * seg.x0;
                    at_left[col] = c(1.0, 0.0);
                    at_right[col] = (I * wb * len).exp() * (I * we * len).exp();
                }
            }
        }
        let mut iz_pows = vec![c(1.0, 0.0); n];
        for k in 1..n {
            iz_pows[k] = iz_pows[k - 1] * iz_inv;
        }

        let last = ns - 1;
        for (j, f) in self.bcs.forms.iter().enumerate() {
            let d = f.d;
            for m in 0..n {
                let (cl, cr) = (m, last * n + m);
                let mut left = c(0.0, 0.0);
                let mut rp = c(1.0, 0.0);
                let mut right = c(0.0, 0.0);
                let mut rq = c(1.0, 0.0);
                for k in 0..=d {
                    left += f.p.coeff(k) * rp * iz_pows[d - k];
                    right += f.q.coeff(k) * rq * iz_pows[d - k];
                    rp *= ratio[cl];
                    rq *= ratio[cr];
                }
                mat[(j, cl)] += left * at_left[cl];
                mat[(j, cr)] += right * at_right[cr];
            }
        }

        let jump = cplx::i_pow(n) * iz_pows[n - 1];
        for (b, &h) in self.layout.masses.iter().enumerate() {
            for m in 0..n {
                let cl = b * n + m;
                let cr = (b + 1) * n + m;
                let mut pl = c(1.0, 0.0);
                let mut pr = c(1.0, 0.0);
                for k in 0..n {
                    let row = n + b * n + k;
                    mat[(row, cl)] = -pl * at_right[cl];
                    mat[(row, cr)] = pr * at_left[cr];
                    pl *= ratio[cl];
                    pr *= ratio[cr];
                }
                if h != c(0.0, 0.0) {
                    mat[(n + b * n + n - 1, cl)] += h * jump * at_right[cl];
                }
            }
        }
        BlockValue {
            det: ScaledDet {
                value: linalg::det(&mat),
                log_scale,
            },
            hadamard: linalg::hadamard_bound(&mat),
        }
    }

    /// `d/dz` of the log-scale at `z = base`, with the mask of `base`.
    pub fn log_scale_derivative(&self, base: Complex64) -> Complex64 {
        let n = self.n();
        let mut acc = self.power_count() / base;
        for seg in &self.layout.segments {
            let (bs, _) = local_offset(base, c(0.0, 0.0), seg.p, n);
            let dzs = if seg.p == c(0.0, 0.0) {
                c(1.0, 0.0)
            } else {
                cplx::powu(base / bs, n - 1)
            };
            for m in 0..n {
                let wb = bs * self.ctx.powers[m];
                let anchor = if (I * wb).re > 0.0 { seg.x1 } else { seg.x0 };
                acc += I * self.ctx.powers[m] * dzs * anchor;
            }
        }
        acc
    }

    /// `d/deps` of the scaled value at `eps` by a fourth-order central difference.
    pub fn value_derivative(&self, base: Complex64, eps: Complex64, h: f64) -> Complex64 {
        let f = |t: f64| self.eval(base, eps + t).value;
        (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
    }

    /// Logarithmic derivative of the unscaled determinant at `z`.
    pub fn log_derivative(&self, z: Complex64) -> (Complex64, f64) {
        let v = self.eval_full(z, c(0.0, 0.0));
        let dv = self.value_derivative(z, c(0.0, 0.0), FD_STEP);
        (
            dv / v.det.value + self.log_scale_derivative(z),
            v.det.value.norm() / v.hadamard,
        )
    }
}

/// Finite-difference step in `z` for the scaled determinant, which varies on an O(1) scale.
pub const FD_STEP: f64 = 1e-3;
