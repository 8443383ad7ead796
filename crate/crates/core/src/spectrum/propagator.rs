//! Cauchy-data propagators and the entire characteristic function `det(P + Q M(lambda))`.

use super::block::Layout;
use crate::bc::BoundaryConditionSet;
use crate::cplx::{self, c, I};
use crate::linalg::{self, CMat};
use num_complex::Complex64;

/// Switch from the power series to the exponential form above this `|w| L`.
const SERIES_LIMIT: f64 = 2.0;

/// Propagator of `y^{(n)} = coef * y` over a length `len`, acting on `(y, y', ..., y^{(n-1)})`.
pub fn propagator_matrix(n: usize, coef: Complex64, len: f64) -> CMat {
    let root = if coef == c(0.0, 0.0) {
        c(0.0, 0.0)
    } else {
        Complex64::from_polar(coef.norm().powf(1.0 / n as f64), coef.arg() / n as f64)
    };
    if root.norm() * len.abs() <= SERIES_LIMIT {
        series_propagator(n, coef, len)
    } else {
        exponential_propagator(n, root, len)
    }
}

/// `M_{kl} = sum_j coef^j len^{nj+l-k} / (nj+l-k)!`.
fn series_propagator(n: usize, coef: Complex64, len: f64) -> CMat {
    let mut m = linalg::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let mut acc = c(0.0, 0.0);
            let mut j0 = 0;
            while n * j0 + l < k {
                j0 += 1;
            }
            let mut p = n * j0 + l - k;
            let mut term = cplx::powu(coef, j0) * len.powi(p as i32) / factorial(p);
            for _ in 0..200 {
                acc += term;
                if term.norm() <= 1e-18 * acc.norm() {
                    break;
                }
                let next = p + n;
                let mut t = term * coef;
                for q in p + 1..=next {
                    t *= len / q as f64;
                }
                term = t;
                p = next;
            }
            m[(k, l)] = acc;
        }
    }
    m
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|x| x as f64).product()
}

/// `M_{kl} = (1/n) sum_m (r rho^m)^{k-l} exp(r rho^m len)` with `r^n = coef`.
fn exponential_propagator(n: usize, root: Complex64, len: f64) -> CMat {
    let rho = Complex64::from_polar(1.0, std::f64::consts::TAU / n as f64);
    let mut m = linalg::zeros(n, n);
    let nodes: Vec<Complex64> = (0..n).map(|j| root * rho.powu(j as u32)).collect();
    let exps: Vec<Complex64> = nodes.iter().map(|&w| (w * len).exp()).collect();
    for k in 0..n {
        for l in 0..n {
            let d = k as i32 - l as i32;
            m[(k, l)] = nodes.iter().zip(&exps).map(|(&w, &e)| w.powi(d) * e).sum::<Complex64>() / n as f64;
        }
    }
    m
}

/// Propagator of `(-i)^n y^{(n)} = z^n y` from `x0` to `x1`.
pub fn fundamental_matrix(n: usize, z: Complex64, x0: f64, x1: f64) -> CMat {
    let coef = cplx::powu(I * z, n);
    if z.norm() * (x1 - x0).abs() > SERIES_LIMIT {
        return exponential_propagator(n, I * z, x1 - x0);
    }
    series_propagator(n, coef, x1 - x0)
}

/// Jump in `y^{(n-1)}` across an atom of mass `h` where the solution equals `y`.
pub fn atom_jump(n: usize, h: Complex64, y: Complex64) -> Complex64 {
    -h * y / cplx::powu(c(0.0, -1.0), n)
}

/// Cauchy propagator over `[0, 1]` for the layout at spectral parameter `lambda`.
pub fn monodromy(n: usize, layout: &Layout, lambda: Complex64) -> CMat {
    let mut m = linalg::identity(n);
    for (s, seg) in layout.segments.iter().enumerate() {
        let coef = cplx::i_pow(n) * (lambda - seg.p);
        m = propagator_matrix(n, coef, seg.x1 - seg.x0) * m;
        if let Some(&h) = layout.masses.get(s) {
            if h != c(0.0, 0.0) {
                let mut jump = linalg::identity(n);
                jump[(n - 1, 0)] = -h * cplx::i_pow(n);
                m = jump * m;
            }
        }
    }
    m
}

/// `det(P + Q M(lambda))`, entire in `lambda` with zeros exactly at the eigenvalues.
pub fn taylor_char_det(bcs: &BoundaryConditionSet, layout: &Layout, lambda: Complex64) -> Complex64 {
    linalg::det(&taylor_matrix(bcs, layout, lambda))
}

/// `P + Q M(lambda)`.
pub fn taylor_matrix(bcs: &BoundaryConditionSet, layout: &Layout, lambda: Complex64) -> CMat {
    let n = bcs.n;
    let mut p = linalg::zeros(n, n);
    let mut q = linalg::zeros(n, n);
    for (j, f) in bcs.forms.iter().enumerate() {
        for k in 0..n {
            p[(j, k)] = f.p.coeff(k);
            q[(j, k)] = f.q.coeff(k);
        }
    }
    p + q * monodromy(n, layout, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Measure;
    use std::f64::consts::PI;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn identity_at_zero_length() {
        let m = fundamental_matrix(4, c(7.0, 1.0), 0.3, 0.3);
        assert!(close(&m, &linalg::identity(4), 1e-15));
    }

    #[test]
    fn flow_property() {
        for &z in &[c(0.4, 0.1), c(5.0, 2.0), c(30.0, 1.0)] {
            let ab = fundamental_matrix(4, z, 0.1, 0.45);
            let bc = fundamental_matrix(4, z, 0.45, 0.8);
            let ac = fundamental_matrix(4, z, 0.1, 0.8);
            assert!(close(&(bc * ab), &ac, 1e-10));
        }
    }

    #[test]
    fn second_order_cosine() {
        let m = fundamental_matrix(2, c(PI, 0.0), 0.0, 1.0);
        assert!((m[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        // y = sin(pi x)/pi has y'(1) = -1.
        assert!((m[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn series_and_exponential_agree() {
        for &coef in &[c(3.0, 1.0), c(-2.0, 0.5), c(0.0, 4.0)] {
            let r = Complex64::from_polar(coef.norm().powf(0.25), coef.arg() / 4.0);
            let a = series_propagator(4, coef, 0.7);
            let b = exponential_propagator(4, r, 0.7);
            assert!(close(&a, &b, 1e-12));
        }
    }

    #[test]
    fn jump_signs() {
        assert_eq!(atom_jump(2, c(0.0, 0.0), c(1.0, 0.0)), c(0.0, 0.0));
        assert!((atom_jump(2, c(1.5, 0.0), c(1.0, 0.0)) - c(1.5, 0.0)).norm() < 1e-15);
        assert!((atom_jump(4, c(1.0, 0.0), c(1.0, 0.0)) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn taylor_form_zeros() {
        let bcs = BoundaryConditionSet::dirichlet2();
        let layout = Layout::free();
        for k in 1..6 {
            let lam = c((PI * k as f64).powi(2), 0.0);
            let v = taylor_char_det(&bcs, &layout, lam);
            assert!(v.norm() < 1e-12, "{k}: {v}");
        }
        // Delta potential: zeros of z sin z + h sin(zc) sin(z(1-c)).
        let (h, cp) = (1.0, 0.37);
        let layout = Layout::from_measure(&Measure::atom(cp, c(h, 0.0)));
        let f = |z: f64| z * z.sin() + h * (z * cp).sin() * (z * (1.0 - cp)).sin();
        let (mut a, mut b) = (3.0, 3.5);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        let root = 0.5 * (a + b);
        let v = taylor_char_det(&bcs, &layout, c(root * root, 0.0));
        assert!(v.norm() < 1e-12, "{v}");
    }
}
