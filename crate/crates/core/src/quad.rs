//! Adaptive Gauss–Kronrod (7/15) quadrature for complex scalar and vector integrands.

use crate::error::{Error, Result};
use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights on the odd-indexed Kronrod nodes (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evals: 1 << 14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<Complex64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Panel
where
    F: FnMut(f64) -> Vec<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let centre = f(c);
    let dim = centre.len();
    let mut kron: Vec<Complex64> = centre.iter().map(|&v| v * WGK[7]).collect();
    let mut gauss: Vec<Complex64> = centre.iter().map(|&v| v * WG[3]).collect();
    for i in 0..7 {
        let x = h * XGK[i];
        let fl = f(c - x);
        let fr = f(c + x);
        for d in 0..dim {
            let s = fl[d] + fr[d];
            kron[d] += s * WGK[i];
            if i % 2 == 1 {
                gauss[d] += s * WG[i / 2];
            }
        }
    }
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
    }
    let diff: Vec<Complex64> = kron.iter().zip(&gauss).map(|(k, g)| k - g).collect();
    Panel {
        a,
        b,
        error: norm(&diff),
        value: kron,
    }
}

/// Integrates a vector-valued `f` over `[a, b]`, with the initial panels split at `breaks`.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Vec<Complex64>,
{
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let mut panels: Vec<Panel> = edges.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    let mut evals = 15 * panels.len();
    loop {
        let dim = panels[0].value.len();
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        let mut err = 0.0;
        for p in &panels {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.error;
        }
        let target = opts.abs_tol.max(opts.rel_tol * norm(&total));
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations: evals,
            });
        }
        if evals + 30 > opts.max_evals {
            return Err(Error::QuadratureNotConverged {
                error: err,
                evaluations: evals,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::QuadratureNotConverged {
                error: err,
                evaluations: evals,
            });
        }
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
        evals += 30;
    }
}

/// Scalar variant of [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<(Complex64, f64, usize)>
where
    F: FnMut(f64) -> Complex64,
{
    let r = integrate_vec(|x| vec![f(x)], a, b, breaks, opts)?;
    Ok((r.value[0], r.error, r.evaluations))
}

/// `int_0^inf f(t) dt` through `t = s / (1 - s)`.
pub fn integrate_half_line<F>(mut f: F, opts: QuadOptions) -> Result<(Complex64, f64, usize)>
where
    F: FnMut(f64) -> Complex64,
{
    integrate(
        |s| {
            let one_minus = 1.0 - s;
            f(s / one_minus) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        &[0.5],
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;

    #[test]
    fn polynomial_exact() {
        let (v, _, _) = integrate(|x| c(x.powi(5), 2.0 * x), 0.0, 2.0, &[], QuadOptions::default()).unwrap();
        assert!((v - c(64.0 / 6.0, 4.0)).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let w = 40.0;
        let (v, _, _) = integrate(
            |x| Complex64::from_polar(1.0, w * x),
            0.0,
            1.0,
            &[],
            QuadOptions {
                rel_tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        let exact = (Complex64::from_polar(1.0, w) - 1.0) / c(0.0, w);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn half_line_rational() {
        let (v, _, _) = integrate_half_line(
            |t| c(1.0 / (1.0 + t * t), 0.0),
            QuadOptions {
                rel_tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((v.re - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn cap_is_reported() {
        let r = integrate(
            |x| c(1.0 / x.abs().max(1e-300).sqrt(), 0.0),
            -1.0,
            1.0,
            &[],
            QuadOptions {
                rel_tol: 1e-14,
                abs_tol: 0.0,
                max_evals: 200,
            },
        );
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }
}
