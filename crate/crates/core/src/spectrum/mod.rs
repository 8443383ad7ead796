//! Eigenvalues of the free operator and of its perturbation by a finite complex measure.
//!
//! Characteristic functions are built from exact exponential solutions on the segments
//! cut by atoms and density breakpoints, glued by the jump conditions at atoms. Zeros are
//! counted per annulus with the argument principle and polished with Newton's method.

mod block;
mod measure;
mod propagator;
mod roots;
mod search;

pub use block::{BlockEvaluator, Layout, Segment};
pub use measure::{Atom, DensityPiece, Measure};
pub use propagator::{atom_jump, fundamental_matrix, monodromy, propagator_matrix, taylor_char_det, taylor_matrix};
pub use roots::{aberth, newton_power_sums};
pub use search::{
    find_eigenvalues, find_paired, plan_contours, sequence_offsets, to_sector, write_csv, ContourPlan, EigenPair,
    Eigenvalue, PairedSlice, SearchOptions, SpectrumSlice,
};

use crate::bc::BoundaryConditionSet;
use crate::determinants::{self, RegularityReport, ScaledDet};
use crate::error::Result;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub bcs: BoundaryConditionSet,
    pub measure: Measure,
    pub report: RegularityReport,
}

impl SpectralProblem {
    pub fn new(bcs: BoundaryConditionSet, measure: Measure) -> Result<Self> {
        measure.validate()?;
        let report = determinants::regularity(&bcs)?;
        Ok(Self { bcs, measure, report })
    }

    pub fn n(&self) -> usize {
        self.bcs.n
    }

    pub fn layout(&self) -> Layout {
        Layout::from_measure(&self.measure)
    }

    /// Same problem without the measure.
    pub fn unperturbed(&self) -> Self {
        Self {
            bcs: self.bcs.clone(),
            measure: Measure::zero(),
            report: self.report.clone(),
        }
    }
}

/// Scaled characteristic determinant of the perturbed problem at `z`.
pub fn char_det_q(problem: &SpectralProblem, z: Complex64) -> ScaledDet {
    let layout = problem.layout();
    BlockEvaluator::new(&problem.bcs, &layout).eval(z, Complex64::new(0.0, 0.0))
}
