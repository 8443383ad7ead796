use crate::cplx;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Pieces thinner than this are dropped.
pub const MIN_PIECE: f64 = 1e-12;
/// An atom within this distance of 1/2 counts as the midpoint atom.
pub const MIDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    #[serde(with = "cplx::pair")]
    pub h: Complex64,
}

/// Constant density `value` on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub start: f64,
    pub end: f64,
    #[serde(with = "cplx::pair")]
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Measure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub density: Vec<DensityPiece>,
}

impl Measure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn atom(x: f64, h: Complex64) -> Self {
        Self {
            atoms: vec![Atom { x, h }],
            density: vec![],
        }
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            atoms: vec![],
            density: vec![DensityPiece {
                start: 0.0,
                end: 1.0,
                value,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.h.norm() == 0.0) && self.density.iter().all(|p| p.value.norm() == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.x > 0.0 && a.x < 1.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} is not interior to (0, 1)",
                    a.x
                )));
            }
            if !a.h.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom at {} has non-finite mass", a.x)));
            }
        }
        let mut pieces = self.pieces();
        pieces.sort_by(|p, q| p.start.total_cmp(&q.start));
        for p in &pieces {
            if !(0.0..=1.0).contains(&p.start) || !(0.0..=1.0).contains(&p.end) || p.start >= p.end {
                return Err(Error::InvalidMeasure(format!(
                    "density piece [{}, {}) is not a subinterval of [0, 1]",
                    p.start, p.end
                )));
            }
            if !p.value.is_finite() {
                return Err(Error::InvalidMeasure("non-finite density value".into()));
            }
        }
        for w in pieces.windows(2) {
            if w[1].start < w[0].end - MIN_PIECE {
                return Err(Error::InvalidMeasure(format!(
                    "density pieces overlap at {}",
                    w[1].start
                )));
            }
        }
        Ok(())
    }

    /// Density pieces with the negligible ones removed.
    pub fn pieces(&self) -> Vec<DensityPiece> {
        self.density
            .iter()
            .copied()
            .filter(|p| p.end - p.start > MIN_PIECE)
            .collect()
    }

    /// `Q(x)`: mass of `[0, x]`.
    pub fn distribution(&self, x: f64) -> Complex64 {
        let atoms: Complex64 = self.atoms.iter().filter(|a| a.x <= x).map(|a| a.h).sum();
        let dens: Complex64 = self
            .pieces()
            .iter()
            .map(|p| p.value * (x.min(p.end) - p.start).max(0.0))
            .sum();
        atoms + dens
    }

    pub fn total(&self) -> Complex64 {
        self.distribution(1.0)
    }

    /// Density value at `x` (right limit; at `x = 1` the left limit).
    pub fn density_at(&self, x: f64) -> Complex64 {
        self.pieces()
            .iter()
            .find(|p| {
                if x >= 1.0 {
                    p.end >= 1.0 && p.start < 1.0
                } else {
                    p.start <= x && x < p.end
                }
            })
            .map_or(Complex64::new(0.0, 0.0), |p| p.value)
    }

    /// `Q'(0)`; atoms are interior so only the density contributes.
    pub fn dqa(&self) -> Complex64 {
        self.density_at(0.0)
    }

    /// `Q'(1)`.
    pub fn dqb(&self) -> Complex64 {
        self.density_at(1.0)
    }

    pub fn midpoint_mass(&self) -> Complex64 {
        self.atoms
            .iter()
            .filter(|a| (a.x - 0.5).abs() < MIDPOINT_TOL)
            .map(|a| a.h)
            .sum()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom { x: a.x, h: a.h * t }).collect(),
            density: self
                .density
                .iter()
                .map(|p| DensityPiece {
                    value: p.value * t,
                    ..*p
                })
                .collect(),
        }
    }

    /// Largest density magnitude, which bounds the local spectral shift.
    pub fn max_density(&self) -> f64 {
        self.pieces().iter().map(|p| p.value.norm()).fold(0.0, f64::max)
    }
}
