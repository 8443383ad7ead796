//! Polynomial roots from power sums.

use crate::cplx::c;
use num_complex::Complex64;

/// Monic polynomial `[a_0, ..., a_{k-1}, 1]` whose roots have the power sums `s[1..=k]`.
///
/// `sums[p]` is the `p`-th power sum; `sums[0]` is ignored.
pub fn newton_power_sums(sums: &[Complex64], k: usize) -> Vec<Complex64> {
    assert!(sums.len() > k, "need power sums up to order {k}");
    // e_j from Newton's identities: j e_j = sum_{i=1}^j (-1)^{i-1} e_{j-i} s_i.
    let mut e = vec![c(1.0, 0.0); k + 1];
    for j in 1..=k {
        let mut acc = c(0.0, 0.0);
        for i in 1..=j {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[j - i] * sums[i];
        }
        e[j] = acc / j as f64;
    }
    // prod (x - r) = sum_j (-1)^j e_j x^{k-j}.
    let mut coeffs = vec![c(0.0, 0.0); k + 1];
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[k - j] = sign * e[j];
    }
    coeffs
}

fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = c(0.0, 0.0);
    let mut dp = c(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// All roots of `sum_j coeffs[j] x^j` by the Aberth-Ehrlich iteration.
pub fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last().is_some_and(|a| a.norm() == 0.0) {
        coeffs.pop();
    }
    let k = coeffs.len() - 1;
    if k == 0 {
        return vec![];
    }
    let lead = coeffs[k];
    let radius = coeffs[..k]
        .iter()
        .map(|a| (a / lead).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    // Start on a circle inside the Cauchy bound, with an offset angle to avoid symmetry traps.
    let r0 = (coeffs[0] / lead)
        .norm()
        .powf(1.0 / k as f64)
        .min(1.0 + radius)
        .max(1e-12);
    let mut z: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(r0, std::f64::consts::TAU * j as f64 / k as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..k {
            let (p, dp) = horner(&coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: Complex64 = (0..k).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (1.0 - ratio * repulse);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}
