//! Two-point boundary forms `(P(D)y)(0) + (Q(D)y)(1) = 0` and their
//! normalization to minimal total order.

use crate::cplx::{self, c};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative threshold below which a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Polynomial in the derivative symbol; `coeffs[k]` multiplies `D^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ComplexPolynomial {
    #[serde(with = "cplx::pair_vec")]
    pub coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// `c * s^k`.
    pub fn monomial(k: usize, coef: Complex64) -> Self {
        let mut coeffs = vec![c(0.0, 0.0); k + 1];
        coeffs[k] = coef;
        Self::new(coeffs)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Degree with coefficients below `tol` treated as zero; `None` for the zero polynomial.
    pub fn degree_tol(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|z| z.norm() > tol)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * s + a)
    }

    /// Drops trailing zeros so the stored leading coefficient is nonzero.
    pub fn trimmed(&self, tol: f64) -> Self {
        let len = self.degree_tol(tol).map_or(0, |d| d + 1);
        Self::new(self.coeffs[..len].to_vec())
    }
}

/// One boundary form with its order `d` and leading pair `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawForm", into = "RawForm")]
pub struct BoundaryForm {
    pub p: ComplexPolynomial,
    pub q: ComplexPolynomial,
    pub d: usize,
    pub a_lead: Complex64,
    pub b_lead: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawForm {
    p: ComplexPolynomial,
    q: ComplexPolynomial,
}

impl From<RawForm> for BoundaryForm {
    fn from(r: RawForm) -> Self {
        BoundaryForm::new(r.p, r.q)
    }
}

impl From<BoundaryForm> for RawForm {
    fn from(f: BoundaryForm) -> Self {
        RawForm { p: f.p, q: f.q }
    }
}

impl BoundaryForm {
    pub fn new(p: ComplexPolynomial, q: ComplexPolynomial) -> Self {
        let scale = p.max_abs().max(q.max_abs());
        let tol = ZERO_TOL * scale;
        let p = p.trimmed(tol);
        let q = q.trimmed(tol);
        let d = match (p.degree_tol(tol), q.degree_tol(tol)) {
            (None, None) => 0,
            (a, b) => a.unwrap_or(0).max(b.unwrap_or(0)),
        };
        let a_lead = p.coeff(d);
        let b_lead = q.coeff(d);
        Self {
            p,
            q,
            d,
            a_lead,
            b_lead,
        }
    }

    /// `y^{(k)}(0)` with unit coefficient.
    pub fn left(k: usize) -> Self {
        Self::new(ComplexPolynomial::monomial(k, c(1.0, 0.0)), ComplexPolynomial::zero())
    }

    /// `y^{(k)}(1)` with unit coefficient.
    pub fn right(k: usize) -> Self {
        Self::new(ComplexPolynomial::zero(), ComplexPolynomial::monomial(k, c(1.0, 0.0)))
    }

    /// `a y^{(k)}(0) + b y^{(k)}(1)`.
    pub fn both(k: usize, a: Complex64, b: Complex64) -> Self {
        Self::new(ComplexPolynomial::monomial(k, a), ComplexPolynomial::monomial(k, b))
    }

    pub fn is_zero(&self) -> bool {
        self.p.max_abs() == 0.0 && self.q.max_abs() == 0.0
    }

    pub fn scale(&self) -> f64 {
        self.p.max_abs().max(self.q.max_abs())
    }

    /// Coefficient vector over `(order, endpoint)`: entry `2k` is the `D^k` coefficient
    /// at 0 and entry `2k + 1` the one at 1.
    pub fn to_vector(&self, n: usize) -> Vec<Complex64> {
        (0..n).flat_map(|k| [self.p.coeff(k), self.q.coeff(k)]).collect()
    }

    pub fn from_vector(v: &[Complex64]) -> Self {
        let p = v.iter().step_by(2).copied().collect();
        let q = v.iter().skip(1).step_by(2).copied().collect();
        Self::new(ComplexPolynomial::new(p), ComplexPolynomial::new(q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditionSet {
    pub n: usize,
    pub forms: Vec<BoundaryForm>,
    pub kappa: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub form: Option<usize>,
    pub invariant: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Shape {
    AlmostSeparated,
    QuasiPeriodic {
        #[serde(with = "cplx::pair")]
        theta: Complex64,
    },
    Other,
}

impl BoundaryConditionSet {
    pub fn new(n: usize, forms: Vec<BoundaryForm>) -> Self {
        let kappa = forms.iter().map(|f| f.d).sum();
        Self { n, forms, kappa }
    }

    pub fn dirichlet2() -> Self {
        Self::new(2, vec![BoundaryForm::left(0), BoundaryForm::right(0)])
    }

    /// `theta * y^{(j)}(0) + y^{(j)}(1) = 0`, `j = 0..n-1`, so that `a_j = theta * b_j`.
    pub fn quasi_periodic(n: usize, theta: Complex64) -> Self {
        let forms = (0..n).map(|j| BoundaryForm::both(j, theta, c(1.0, 0.0))).collect();
        Self::new(n, forms)
    }

    /// `y^{(j)}(0) = y^{(j)}(1)`, the quasi-periodic set with `theta = -1`.
    pub fn periodic(n: usize) -> Self {
        Self::quasi_periodic(n, c(-1.0, 0.0))
    }

    /// The fourth-order set `y(0)+y(1)`, `y'(1)`, `y''(0)`, `y'''(0)+y'''(1)`.
    pub fn fourth_order_example() -> Self {
        let one = c(1.0, 0.0);
        Self::new(
            4,
            vec![
                BoundaryForm::both(0, one, one),
                BoundaryForm::right(1),
                BoundaryForm::left(2),
                BoundaryForm::both(3, one, one),
            ],
        )
    }

    pub fn d(&self) -> Vec<usize> {
        self.forms.iter().map(|f| f.d).collect()
    }

    /// `n x 2n` coefficient matrix, one row per form.
    pub fn coefficient_matrix(&self) -> CMat {
        let mut m = linalg::zeros(self.forms.len(), 2 * self.n);
        for (j, f) in self.forms.iter().enumerate() {
            for (i, v) in f.to_vector(self.n).into_iter().enumerate() {
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.n < 2 {
            out.push(Diagnostic {
                form: None,
                invariant: "order",
                message: format!("operator order n = {} must be at least 2", self.n),
            });
        }
        if self.forms.len() != self.n {
            out.push(Diagnostic {
                form: None,
                invariant: "form_count",
                message: format!("expected {} forms, found {}", self.n, self.forms.len()),
            });
        }
        let kappa: usize = self.forms.iter().map(|f| f.d).sum();
        if kappa != self.kappa {
            out.push(Diagnostic {
                form: None,
                invariant: "kappa",
                message: format!("kappa = {} but orders sum to {}", self.kappa, kappa),
            });
        }
        for (j, f) in self.forms.iter().enumerate() {
            if f.is_zero() {
                out.push(Diagnostic {
                    form: Some(j),
                    invariant: "nonzero_form",
                    message: format!("zero form at index {j}"),
                });
                continue;
            }
            if f.p.coeffs.len() > self.n || f.q.coeffs.len() > self.n {
                out.push(Diagnostic {
                    form: Some(j),
                    invariant: "degree",
                    message: format!("form {j} has degree {} >= n = {}", f.d, self.n),
                });
            }
            let tol = ZERO_TOL * f.scale();
            if f.a_lead.norm() <= tol && f.b_lead.norm() <= tol {
                out.push(Diagnostic {
                    form: Some(j),
                    invariant: "leading_pair",
                    message: format!("form {j} has a_lead = b_lead = 0"),
                });
            }
        }
        out
    }

    /// Equivalent set with minimal `kappa`.
    ///
    /// Orders are processed from `n - 1` down. Among the forms of the current order the
    /// one with the largest leading pair becomes the pivot; a second pivot with a
    /// non-proportional leading pair is added when present, and every other form of that
    /// order has its leading block cancelled against the pivots. Leading data are
    /// re-derived after each step, and the sweep repeats until no order drops.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.n;
        if self.forms.len() != n {
            return Err(Error::InvalidBoundaryConditions(format!(
                "expected {n} forms, found {}",
                self.forms.len()
            )));
        }
        let mut rows: Vec<Vec<Complex64>> = self.forms.iter().map(|f| f.to_vector(n)).collect();
        let scale = rows.iter().flat_map(|r| r.iter().map(|z| z.norm())).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::DependentForms);
        }
        if linalg::rank(&self.coefficient_matrix(), 1e-10) < n {
            return Err(Error::DependentForms);
        }
        let tol = ZERO_TOL * scale;
        let order = |r: &[Complex64]| {
            (0..n)
                .rev()
                .find(|&k| r[2 * k].norm() > tol || r[2 * k + 1].norm() > tol)
        };

        loop {
            let mut changed = false;
            for k in (0..n).rev() {
                let mut members: Vec<usize> = (0..n).filter(|&j| order(&rows[j]) == Some(k)).collect();
                if members.len() < 2 {
                    continue;
                }
                let weight = |r: &Vec<Complex64>| r[2 * k].norm() + r[2 * k + 1].norm();
                members.sort_by(|&x, &y| weight(&rows[y]).total_cmp(&weight(&rows[x])).then(x.cmp(&y)));
                let p0 = members[0];
                let (a0, b0) = (rows[p0][2 * k], rows[p0][2 * k + 1]);
                // Second pivot: the heaviest remaining form whose block is independent of p0's.
                let det_with = |j: usize| a0 * rows[j][2 * k + 1] - b0 * rows[j][2 * k];
                let block_scale = |j: usize| (a0.norm() + b0.norm()) * weight(&rows[j]);
                let p1 = members[1..]
                    .iter()
                    .copied()
                    .find(|&j| det_with(j).norm() > 1e-10 * block_scale(j));
                for &j in &members[1..] {
                    if Some(j) == p1 {
                        continue;
                    }
                    let (aj, bj) = (rows[j][2 * k], rows[j][2 * k + 1]);
                    let (c0, c1) = match p1 {
                        None => {
                            let t = if a0.norm() >= b0.norm() { aj / a0 } else { bj / b0 };
                            (t, c(0.0, 0.0))
                        }
                        Some(p1) => {
                            let (a1, b1) = (rows[p1][2 * k], rows[p1][2 * k + 1]);
                            let dt = a0 * b1 - b0 * a1;
                            ((aj * b1 - bj * a1) / dt, (a0 * bj - b0 * aj) / dt)
                        }
                    };
                    let new: Vec<Complex64> = (0..2 * n)
                        .map(|i| {
                            let mut v = rows[j][i] - c0 * rows[p0][i];
                            if let Some(p1) = p1 {
                                v -= c1 * rows[p1][i];
                            }
                            v
                        })
                        .collect();
                    rows[j] = new;
                    rows[j][2 * k] = c(0.0, 0.0);
                    rows[j][2 * k + 1] = c(0.0, 0.0);
                    for v in rows[j].iter_mut() {
                        if v.norm() <= tol {
                            *v = c(0.0, 0.0);
                        }
                    }
                    if order(&rows[j]).is_none() {
                        return Err(Error::DependentForms);
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let forms = rows.iter().map(|r| BoundaryForm::from_vector(r)).collect();
        Ok(Self::new(n, forms))
    }

    pub fn classify_shape(&self) -> Shape {
        let n = self.n;
        let zero = |z: Complex64, f: &BoundaryForm| z.norm() <= 1e-10 * f.scale();
        let left_only = self
            .forms
            .iter()
            .filter(|f| zero(f.b_lead, f) && !zero(f.a_lead, f))
            .count();
        let right_only = self
            .forms
            .iter()
            .filter(|f| zero(f.a_lead, f) && !zero(f.b_lead, f))
            .count();
        if left_only + right_only == n && left_only.abs_diff(right_only) <= n % 2 {
            return Shape::AlmostSeparated;
        }
        if n.is_multiple_of(2) {
            let mut ds = self.d();
            ds.sort_unstable();
            if ds == (0..n).collect::<Vec<_>>() && self.forms.iter().all(|f| !zero(f.b_lead, f)) {
                let theta = self.forms[0].a_lead / self.forms[0].b_lead;
                let common = self
                    .forms
                    .iter()
                    .all(|f| (f.a_lead / f.b_lead - theta).norm() <= 1e-10 * theta.norm().max(1.0));
                if common && theta.norm() > 1e-12 {
                    return Shape::QuasiPeriodic { theta };
                }
            }
        }
        Shape::Other
    }

    /// Sum of the forms applied to a Cauchy data vector pair `(y^{(k)}(0), y^{(k)}(1))`.
    pub fn apply(&self, at0: &[Complex64], at1: &[Complex64]) -> Vec<Complex64> {
        self.forms
            .iter()
            .map(|f| (0..self.n).map(|k| f.p.coeff(k) * at0[k] + f.q.coeff(k) * at1[k]).sum())
            .collect()
    }
}
