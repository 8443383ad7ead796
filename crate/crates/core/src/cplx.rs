//! Complex helpers and the `[re, im]` wire encoding used in every file format.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Argument mapped to `[0, 2pi)`.
pub fn arg_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// `i^k` without rounding.
pub fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// Integer power by repeated squaring; `powi` on complex goes through polar form.
pub fn powu(z: Complex64, mut k: usize) -> Complex64 {
    let mut acc = c(1.0, 0.0);
    let mut base = z;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// Serde adapter for a single complex number as `[re, im]`.
pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapter for `Vec<Complex64>` as `[[re, im], ...]`.
pub mod pair_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Serde adapter for `Option<Complex64>`.
pub mod pair_opt {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        let raw = Option::<[f64; 2]>::deserialize(d)?;
        Ok(raw.map(|[re, im]| Complex64::new(re, im)))
    }
}

/// `ln(1 + w)` without cancellation for small `w`.
pub fn log1p(w: Complex64) -> Complex64 {
    if w.norm() < 1e-2 {
        // Alternating series; |w|^10 / 10 < 1e-21 here.
        let mut term = w;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=10 {
            acc += term / k as f64;
            term *= -w;
        }
        acc
    } else {
        (1.0 + w).ln()
    }
}

/// `exp(w) - 1` without cancellation for small `w`.
pub fn expm1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-1 {
        let mut term = w;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=14 {
            acc += term;
            term *= w / (k + 1) as f64;
        }
        acc
    } else {
        w.exp() - 1.0
    }
}

/// Continuous logarithm of `iz` on the sector `0 <= arg z <= pi`.
pub fn ln_iz(z: Complex64) -> Complex64 {
    let a = if z.arg() < -std::f64::consts::FRAC_PI_2 {
        z.arg() + std::f64::consts::TAU
    } else {
        z.arg()
    };
    Complex64::new(z.norm().ln(), a + std::f64::consts::FRAC_PI_2)
}

/// `(b + e)^n - b^n` expanded so that a tiny `e` keeps full relative accuracy.
pub fn pow_diff(b: Complex64, e: Complex64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    let mut e_pow = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        binom = binom * (n + 1 - j) as f64 / j as f64;
        e_pow *= e;
        acc += binom * powu(b, n - j) * e_pow;
    }
    acc
}
