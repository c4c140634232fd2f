//! Reconciling the printed sector matrix with the generator restriction.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, ZERO};

use super::{ngl_matrix, oracle_block, permutations, SubspaceParams};

/// Residuals below this fraction of the energy scale count as agreement.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PrintedComparison {
    pub params: SubspaceParams,
    pub oracle: Vec<Complex64>,
    pub printed: Vec<Complex64>,
    /// `matched[k]` is the printed eigenvalue paired with `oracle[k]`.
    pub matched: Vec<usize>,
    /// Global offset added to the printed eigenvalues.
    pub shift: Complex64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub equivalent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonClass {
    /// Every point agrees after a shift: the matrices differ only by frame.
    FrameEquivalent,
    /// Residuals persist: the printed matrix is a different operator.
    Structured,
}

impl ComparisonClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComparisonClass::FrameEquivalent => "frame_equivalent",
            ComparisonClass::Structured => "structured",
        }
    }
}

/// Eigenvalues of the printed matrix against the oracle block, after the
/// assignment and global complex shift that minimize the squared residual.
/// For `n = 1` the two oracle values are matched to the best two of four.
pub fn compare_printed_vs_oracle(p: &SubspaceParams) -> Result<PrintedComparison> {
    p.validate()?;
    let oracle = linalg::eigenvalues(&oracle_block(p)?)?;
    let printed = linalg::eigenvalues(&ngl_matrix(p))?;
    let m = oracle.len();

    let mut best: Option<(f64, Vec<usize>, Complex64)> = None;
    for perm in permutations(printed.len()) {
        let chosen = &perm[..m];
        let shift: Complex64 = chosen.iter().zip(&oracle).map(|(&j, o)| o - printed[j]).sum::<Complex64>() / m as f64;
        let cost: f64 = chosen.iter().zip(&oracle).map(|(&j, o)| (o - printed[j] - shift).norm_sqr()).sum();
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, chosen.to_vec(), shift));
        }
    }
    let (_, matched, shift) = best.unwrap_or((0.0, Vec::new(), ZERO));
    let residuals: Vec<f64> = matched.iter().zip(&oracle).map(|(&j, o)| (o - printed[j] - shift).norm()).collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let equivalent = max_residual <= AGREEMENT_TOL * p.scale();
    Ok(PrintedComparison { params: *p, oracle, printed, matched, shift, residuals, max_residual, equivalent })
}

pub fn classify_comparisons(reports: &[PrintedComparison]) -> ComparisonClass {
    if reports.iter().all(|r| r.equivalent) {
        ComparisonClass::FrameEquivalent
    } else {
        ComparisonClass::Structured
    }
}
