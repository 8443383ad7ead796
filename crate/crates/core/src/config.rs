//! TOML problem description shared by the command-line tool and tests.
//!
//! ```toml
//! n = 4
//!
//! [[forms]]
//! p = [[1.0, 0.0]]
//! q = [[1.0, 0.0]]
//!
//! [measure]
//! atoms = [{ x = 0.5, h = [1.0, 0.0] }]
//!
//! [run]
//! annuli = [0, 300]
//! tolerance = 5e-2
//! ```
//!
//! Polynomial coefficients are listed from the constant term upwards; complex numbers are
//! `[re, im]` pairs.

use crate::bc::{BoundaryConditionSet, BoundaryForm};
use crate::error::{Error, Result};
use crate::quad::QuadOptions;
use crate::spectrum::{Measure, SearchOptions, SpectralProblem};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Oracle {
    #[default]
    ClosedForm,
    Lemma51,
    Green,
    Eigensum,
    All,
}

impl Oracle {
    pub fn includes(self, other: Oracle) -> bool {
        self == Oracle::All || self == other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_moments: usize,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub quad_max_evals: usize,
    pub residual_tol: f64,
    pub contour_floor: f64,
    pub gap_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchOptions::default();
        Self {
            max_moments: s.max_moments,
            quad_rel_tol: s.quad.rel_tol,
            quad_abs_tol: s.quad.abs_tol,
            quad_max_evals: s.quad.max_evals,
            residual_tol: s.residual_tol,
            contour_floor: s.contour_floor,
            gap_threshold: s.gap_threshold,
        }
    }
}

impl SearchConfig {
    pub fn options(&self) -> SearchOptions {
        SearchOptions {
            max_moments: self.max_moments,
            quad: QuadOptions {
                rel_tol: self.quad_rel_tol,
                abs_tol: self.quad_abs_tol,
                max_evals: self.quad_max_evals,
            },
            residual_tol: self.residual_tol,
            contour_floor: self.contour_floor,
            gap_threshold: self.gap_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Drop the terms that only see the total mass of the measure.
    pub centered: bool,
}

impl Default for GreenConfig {
    fn default() -> Self {
        let q = crate::green::contour_options();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_evals: q.max_evals,
            centered: true,
        }
    }
}

impl GreenConfig {
    pub fn options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_evals: self.max_evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Half-open range `[start, end)` of annulus indices.
    pub annuli: [usize; 2],
    /// Tolerance for the trace verdict.
    pub tolerance: f64,
    pub oracle: Oracle,
    pub search: SearchConfig,
    pub green: GreenConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            annuli: [0, 100],
            tolerance: 5e-2,
            oracle: Oracle::default(),
            search: SearchConfig::default(),
            green: GreenConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    pub forms: Vec<BoundaryForm>,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_problem(bcs: &BoundaryConditionSet, measure: Measure) -> Self {
        Self {
            n: bcs.n,
            forms: bcs.forms.clone(),
            measure,
            run: RunConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Validated and normalized boundary conditions.
    pub fn boundary_conditions(&self) -> Result<BoundaryConditionSet> {
        if self.n < 2 {
            return Err(Error::InvalidBoundaryConditions(format!(
                "order n = {} must be at least 2",
                self.n
            )));
        }
        let bcs = BoundaryConditionSet::new(self.n, self.forms.clone());
        if let Some(d) = bcs.validate().first() {
            return Err(Error::InvalidBoundaryConditions(d.message.clone()));
        }
        bcs.normalize()
    }

    pub fn problem(&self) -> Result<SpectralProblem> {
        SpectralProblem::new(self.boundary_conditions()?, self.measure.clone())
    }

    pub fn annuli(&self) -> std::ops::Range<usize> {
        self.run.annuli[0]..self.run.annuli[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;

    const EXAMPLE: &str = r#"
n = 4

[[forms]]
p = [[1.0, 0.0]]
q = [[1.0, 0.0]]

[[forms]]
p = []
q = [[0.0, 0.0], [1.0, 0.0]]

[[forms]]
p = [[0, 0], [0, 0], [1, 0]]
q = []

[[forms]]
p = [[0, 0], [0, 0], [0, 0], [1, 0]]
q = [[0, 0], [0, 0], [0, 0], [1, 0]]

[measure]
atoms = [{ x = 0.5, h = [1.0, 0.0] }]

[run]
annuli = [0, 40]
oracle = "lemma51"
"#;

    #[test]
    fn example_parses_to_fourth_order_set() {
        let cfg = ProblemConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(
            cfg.boundary_conditions().unwrap(),
            BoundaryConditionSet::fourth_order_example()
        );
        assert_eq!(cfg.measure, Measure::atom(0.5, c(1.0, 0.0)));
        assert_eq!(cfg.run.oracle, Oracle::Lemma51);
        assert_eq!(cfg.annuli(), 0..40);
        assert_eq!(cfg.run.search, SearchConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ProblemConfig::from_toml(EXAMPLE).unwrap();
        cfg.measure.density.push(crate::spectrum::DensityPiece {
            start: 0.1,
            end: 0.35,
            value: c(0.1 + 0.2, -1.0 / 3.0),
        });
        cfg.output.dir = Some("out".into());
        let text = cfg.to_toml().unwrap();
        assert_eq!(ProblemConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = ProblemConfig::from_toml("n = 4\nforms = [\n").unwrap_err();
        let Error::Config(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("line"), "{msg}");
        let err = ProblemConfig::from_toml("n = 2\nforms = []\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn wrong_form_count_is_rejected() {
        let cfg = ProblemConfig::from_toml("n = 2\n[[forms]]\np = [[1, 0]]\nq = []\n").unwrap();
        assert!(matches!(
            cfg.boundary_conditions(),
            Err(Error::InvalidBoundaryConditions(_))
        ));
    }
}
