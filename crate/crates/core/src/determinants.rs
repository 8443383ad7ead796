//! Characteristic determinants of the free operator and the constant terms of their
//! large-`z` expansions, which fix the Birkhoff polynomial, the regularity class and
//! the midpoint-atom coefficient.

use crate::bc::{BoundaryConditionSet, Shape};
use crate::cplx::{self, c, I};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Powers of `rho = exp(2 pi i / n)`.
#[derive(Debug, Clone)]
pub struct RootOfUnityContext {
    pub n: usize,
    pub rho: Complex64,
    /// `n / 2` for even `n`.
    pub k: Option<usize>,
    pub powers: Vec<Complex64>,
}

impl RootOfUnityContext {
    pub fn new(n: usize) -> Self {
        let powers: Vec<Complex64> = (0..n)
            .map(|m| {
                // Exact values on the axes keep rho^k = -1 and friends free of rounding.
                match (4 * m) % n == 0 {
                    true => cplx::i_pow(4 * m / n),
                    false => Complex64::from_polar(1.0, TAU * m as f64 / n as f64),
                }
            })
            .collect();
        Self {
            n,
            rho: powers[1 % n],
            k: n.is_multiple_of(2).then_some(n / 2),
            powers,
        }
    }

    /// `rho^e` for any integer exponent.
    pub fn pow(&self, e: i64) -> Complex64 {
        self.powers[e.rem_euclid(self.n as i64) as usize]
    }
}

/// Which of the two sectors `[0, pi/n]` and `[pi/n, 2pi/n]` a direction lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Gamma1,
    Gamma2,
}

/// Number of exponentials that decay to the right in the given sector.
pub fn nu(n: usize, sector: Sector) -> usize {
    match sector {
        Sector::Gamma1 => n.div_ceil(2),
        Sector::Gamma2 => n / 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeadingVariant {
    Plain,
    /// First summand of `m1`: column 1 switched to the `b` side.
    E1First,
    /// Second summand of `m1`: column `k+1` switched to the `a` side.
    E1Middle,
    E2,
    M1K1,
    MK11,
    MKN,
    MNK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    B,
}

fn column_recipe(n: usize, variant: LeadingVariant) -> Vec<(Side, usize)> {
    let k = n / 2;
    let mut cols: Vec<(Side, usize)> = (0..n).map(|m| (if m < k { Side::A } else { Side::B }, m)).collect();
    match variant {
        LeadingVariant::Plain => {}
        LeadingVariant::E1First => cols[0] = (Side::B, 0),
        LeadingVariant::E1Middle => cols[k] = (Side::A, k),
        LeadingVariant::E2 => {
            cols[0] = (Side::B, 0);
            cols[k] = (Side::A, k);
        }
        LeadingVariant::M1K1 => cols[k] = (Side::B, 0),
        LeadingVariant::MK11 => {
            cols[0] = (Side::B, k);
            cols[k] = (Side::A, k);
        }
        LeadingVariant::MKN => cols[n - 1] = (Side::B, k - 1),
        LeadingVariant::MNK => {
            cols[k - 1] = (Side::B, n - 1);
            cols[n - 1] = (Side::A, n - 1);
        }
    }
    cols
}

fn recipe_matrix(bcs: &BoundaryConditionSet, ctx: &RootOfUnityContext, cols: &[(Side, usize)]) -> CMat {
    let n = bcs.n;
    let mut m = linalg::zeros(n, n);
    for (j, f) in bcs.forms.iter().enumerate() {
        for (col, &(side, e)) in cols.iter().enumerate() {
            let lead = match side {
                Side::A => f.a_lead,
                Side::B => f.b_lead,
            };
            m[(j, col)] = lead * ctx.pow((e * f.d) as i64);
        }
    }
    m
}

/// Constant-term matrix of the requested determinant.
pub fn leading_matrix(bcs: &BoundaryConditionSet, variant: LeadingVariant) -> Result<CMat> {
    let n = bcs.n;
    if n % 2 == 1 && variant != LeadingVariant::Plain {
        return Err(Error::OddOrderUnsupported(n));
    }
    let ctx = RootOfUnityContext::new(n);
    if n % 2 == 1 {
        return Ok(recipe_matrix(bcs, &ctx, &odd_recipe(n, None)));
    }
    Ok(recipe_matrix(bcs, &ctx, &column_recipe(n, variant)))
}

/// Odd order: columns `0..=(n-1)/2` on the `a` side, the rest on the `b` side,
/// optionally with one column switched to `b`.
fn odd_recipe(n: usize, switched: Option<usize>) -> Vec<(Side, usize)> {
    (0..n)
        .map(|m| {
            let side = if m <= (n - 1) / 2 && Some(m) != switched {
                Side::A
            } else {
                Side::B
            };
            (side, m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingDeterminants {
    #[serde(with = "cplx::pair")]
    pub m: Complex64,
    #[serde(with = "cplx::pair")]
    pub m1: Complex64,
    #[serde(with = "cplx::pair")]
    pub m2: Complex64,
    #[serde(with = "cplx::pair")]
    pub m_1_k1: Complex64,
    #[serde(with = "cplx::pair")]
    pub m_k1_1: Complex64,
    #[serde(with = "cplx::pair")]
    pub m_k_n: Complex64,
    #[serde(with = "cplx::pair")]
    pub m_n_k: Complex64,
}

pub fn leading_determinants(bcs: &BoundaryConditionSet) -> Result<LeadingDeterminants> {
    let n = bcs.n;
    if n % 2 == 1 {
        return Err(Error::OddOrderUnsupported(n));
    }
    let ctx = RootOfUnityContext::new(n);
    let d = |v| linalg::det(&recipe_matrix(bcs, &ctx, &column_recipe(n, v)));
    Ok(LeadingDeterminants {
        m: d(LeadingVariant::Plain),
        m1: d(LeadingVariant::E1First) + d(LeadingVariant::E1Middle),
        m2: d(LeadingVariant::E2),
        m_1_k1: d(LeadingVariant::M1K1),
        m_k1_1: d(LeadingVariant::MK11),
        m_k_n: d(LeadingVariant::MKN),
        m_n_k: d(LeadingVariant::MNK),
    })
}

/// Leading coefficients for odd order on the two oscillatory rays.
///
/// On `arg z = 0` the scaled determinant tends to `a0 + a1 e^{iz}`; on
/// `arg z = pi/n` to `a0 + b1 e^{i z rho^{(n-1)/2}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OddLeading {
    #[serde(with = "cplx::pair")]
    pub a0: Complex64,
    #[serde(with = "cplx::pair")]
    pub a1: Complex64,
    #[serde(with = "cplx::pair")]
    pub b1: Complex64,
}

pub fn odd_leading(bcs: &BoundaryConditionSet) -> OddLeading {
    let n = bcs.n;
    let ctx = RootOfUnityContext::new(n);
    let d = |sw| linalg::det(&recipe_matrix(bcs, &ctx, &odd_recipe(n, sw)));
    OddLeading {
        a0: d(None),
        a1: d(Some(0)),
        b1: d(Some((n - 1) / 2)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    NotRegular,
    Regular,
    StronglyRegular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityFlags {
    pub ratio_on_positive_axis: bool,
    /// Both branch values of the coefficient when the logarithm is ambiguous.
    #[serde(with = "cplx::pair_vec")]
    pub branch_values: Vec<Complex64>,
    pub shape: Shape,
    pub odd_order: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub classification: Classification,
    #[serde(with = "cplx::pair_vec")]
    pub xi: Vec<Complex64>,
    #[serde(with = "cplx::pair_vec")]
    pub alpha: Vec<Complex64>,
    #[serde(with = "cplx::pair_opt")]
    pub frak_c: Option<Complex64>,
    #[serde(rename = "frak_C", with = "cplx::pair")]
    pub frak_cap: Complex64,
    pub kappa: usize,
    pub leading_determinants: Option<LeadingDeterminants>,
    pub odd_leading: Option<OddLeading>,
    pub flags: RegularityFlags,
}

impl RegularityReport {
    pub fn xi1(&self) -> Complex64 {
        self.xi[0]
    }

    pub fn xi2(&self) -> Complex64 {
        self.xi[1]
    }
}

/// Roots of `a x^2 + b x + c`, the larger one from the cancellation-free branch and the
/// other through Vieta; sorted by argument in `[0, 2pi)`, then modulus.
pub fn quadratic_roots(a: Complex64, b: Complex64, c0: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 {
        b + disc
    } else {
        b - disc
    };
    let q = -0.5 * s;
    let (r1, r2) = if q.norm() == 0.0 {
        let r = -b / (2.0 * a);
        (r, r)
    } else {
        (q / a, c0 / q)
    };
    let mut roots = [r1, r2];
    roots.sort_by(|x, y| {
        cplx::arg_2pi(*x)
            .total_cmp(&cplx::arg_2pi(*y))
            .then(x.norm().total_cmp(&y.norm()))
    });
    roots
}

/// Threshold separating `m = 0` from a genuine leading determinant.
pub const NOT_REGULAR_REL: f64 = 1e-10;
/// Roots closer than this (relative) count as a double root.
pub const DOUBLE_ROOT_REL: f64 = 1e-8;
/// `|Arg(xi2/xi1)|` below this puts the ratio on the positive axis.
pub const POSITIVE_AXIS_TOL: f64 = 1e-9;

/// `frak_C = c Log(-xi2/xi1) / (xi1 - xi2)` with the principal branch.
pub fn frak_cap_closed_form(frak_c: Complex64, xi1: Complex64, xi2: Complex64) -> Complex64 {
    frak_c * (-xi2 / xi1).ln() / (xi1 - xi2)
}

pub fn regularity(bcs: &BoundaryConditionSet) -> Result<RegularityReport> {
    let n = bcs.n;
    let ctx = RootOfUnityContext::new(n);
    let plain = leading_matrix(bcs, LeadingVariant::Plain)?;
    let floor = NOT_REGULAR_REL * linalg::hadamard_bound(&plain);
    let shape = bcs.classify_shape();

    if n % 2 == 1 {
        let odd = odd_leading(bcs);
        let smallest = odd.a0.norm().min(odd.a1.norm()).min(odd.b1.norm());
        if smallest <= floor {
            return Err(Error::NotRegular { magnitude: smallest });
        }
        return Ok(RegularityReport {
            classification: Classification::Regular,
            xi: vec![],
            alpha: vec![],
            frak_c: None,
            frak_cap: c(0.0, 0.0),
            kappa: bcs.kappa,
            leading_determinants: None,
            odd_leading: Some(odd),
            flags: RegularityFlags {
                ratio_on_positive_axis: false,
                branch_values: vec![],
                shape,
                odd_order: true,
            },
        });
    }

    let ld = leading_determinants(bcs)?;
    if ld.m.norm() <= floor {
        return Err(Error::NotRegular { magnitude: ld.m.norm() });
    }
    let rk = ctx.pow(bcs.kappa as i64);
    let [xi1, xi2] = quadratic_roots(-rk * ld.m, ld.m1, ld.m);
    let strongly = (xi1 - xi2).norm() > DOUBLE_ROOT_REL * xi1.norm().max(xi2.norm());
    let alpha = vec![-I * xi1.ln(), -I * xi2.ln()];
    let frak_c = (ld.m_1_k1 - ld.m_k1_1) / (I * rk * ld.m);

    let mut ratio_on_positive_axis = false;
    let mut branch_values = vec![];
    let frak_cap = if strongly {
        let ratio = xi2 / xi1;
        if ratio.re > 0.0 && ratio.arg().abs() < POSITIVE_AXIS_TOL {
            ratio_on_positive_axis = true;
            let ln_mod = ratio.norm().ln();
            branch_values = [PI, -PI].iter().map(|&b| frak_c * c(ln_mod, b) / (xi1 - xi2)).collect();
        }
        frak_cap_closed_form(frak_c, xi1, xi2)
    } else {
        -frak_c / xi1
    };

    Ok(RegularityReport {
        classification: if strongly {
            Classification::StronglyRegular
        } else {
            Classification::Regular
        },
        xi: vec![xi1, xi2],
        alpha,
        frak_c: Some(frak_c),
        frak_cap,
        kappa: bcs.kappa,
        leading_determinants: Some(ld),
        odd_leading: None,
        flags: RegularityFlags {
            ratio_on_positive_axis,
            branch_values,
            shape,
            odd_order: false,
        },
    })
}

/// Determinant split as `value * exp(log_scale)`; `value` stays O(1) for large `|z|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDet {
    pub value: Complex64,
    pub log_scale: Complex64,
}

impl ScaledDet {
    /// Full value; overflows for large `|z|`, use only for moderate arguments.
    pub fn unscaled(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    pub fn log_magnitude(&self) -> f64 {
        self.value.norm().ln() + self.log_scale.re
    }
}

fn check_sector(n: usize, z: Complex64) -> Result<()> {
    let a = z.arg();
    let top = TAU / n as f64;
    if z.norm() == 0.0 || a < -1e-12 || a > top + 1e-12 {
        return Err(Error::DegenerateArgument { z: format!("{z}") });
    }
    Ok(())
}

/// Column entries `(iz)^{-d_j} P_j(i z rho^m)` and `(iz)^{-d_j} Q_j(i z rho^m)`.
fn column_parts(bcs: &BoundaryConditionSet, iz: Complex64, s: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    bcs.forms
        .iter()
        .map(|f| {
            let r = cplx::powu(iz, f.d).inv();
            (f.p.eval(s) * r, f.q.eval(s) * r)
        })
        .unzip()
}

fn row_log_scale(bcs: &BoundaryConditionSet, z: Complex64) -> Complex64 {
    bcs.kappa as f64 * cplx::ln_iz(z)
}

/// `det W(z)` with rows divided by `(iz)^{d_j}` and every column whose exponential grows
/// multiplied by `exp(-i z rho^m)`.
pub fn char_det(bcs: &BoundaryConditionSet, z: Complex64) -> Result<ScaledDet> {
    check_sector(bcs.n, z)?;
    Ok(char_det_unchecked(bcs, z, None))
}

/// `Delta_{alpha,beta}`: column `beta` replaced by column `alpha` of `V`. Indices are zero-based.
pub fn char_det_minor(bcs: &BoundaryConditionSet, z: Complex64, alpha: usize, beta: usize) -> Result<ScaledDet> {
    check_sector(bcs.n, z)?;
    Ok(char_det_unchecked(bcs, z, Some((alpha, beta))))
}

pub(crate) fn char_det_unchecked(
    bcs: &BoundaryConditionSet,
    z: Complex64,
    replace: Option<(usize, usize)>,
) -> ScaledDet {
    let n = bcs.n;
    let ctx = RootOfUnityContext::new(n);
    let iz = I * z;
    let mut mat = linalg::zeros(n, n);
    let mut log_scale = row_log_scale(bcs, z);
    for col in 0..n {
        let (m, v_only) = match replace {
            Some((alpha, beta)) if beta == col => (alpha, true),
            _ => (col, false),
        };
        let w = iz * ctx.powers[m];
        let (p, q) = column_parts(bcs, iz, w);
        let grows = w.re > 0.0;
        if grows {
            log_scale += w;
        }
        let e = if grows { c(1.0, 0.0) } else { w.exp() };
        let e_inv = if grows { (-w).exp() } else { c(1.0, 0.0) };
        for j in 0..n {
            mat[(j, col)] = if v_only { e * q[j] } else { e_inv * p[j] + e * q[j] };
        }
    }
    ScaledDet {
        value: linalg::det(&mat),
        log_scale,
    }
}
