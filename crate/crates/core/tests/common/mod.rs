//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Secular function of `-y''` with Dirichlet conditions and an atom of mass `h` at `x0`.
pub fn secular(z: f64, h: f64, x0: f64) -> f64 {
    z * z.sin() + h * (z * x0).sin() * (z * (1.0 - x0)).sin()
}

/// Positive real roots below `zmax` by sign changes on a fine grid and bisection.
pub fn secular_roots(h: f64, x0: f64, zmax: f64) -> Vec<f64> {
    let steps = (zmax * 200.0) as usize;
    let f = |z: f64| secular(z, h, x0);
    let mut roots = vec![];
    for k in 0..steps {
        let (mut a, mut b) = (
            1e-9 + zmax * k as f64 / steps as f64,
            1e-9 + zmax * (k + 1) as f64 / steps as f64,
        );
        if f(a).signum() == f(b).signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a).signum() == f(m).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}
