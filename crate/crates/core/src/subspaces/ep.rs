//! Coalescence of the emission pair as `P_θ` grows.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};

use super::{label_sweep, Branch, Source, SubspaceParams};

/// A true exceptional point needs a residual gap below this fraction of `g`.
pub const EP_GAP_TOL: f64 = 1e-6;
/// ... and eigenvectors parallel to within this.
pub const EP_PARALLEL_TOL: f64 = 1e-4;
const SCAN_POINTS: usize = 200;
const GOLDEN_ITER: usize = 400;

/// Location of the smallest gap found between the two branches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapMinimum {
    pub p_theta: f64,
    pub gap: f64,
    /// Mean `Im λ` of the pair, meV from the cavity.
    pub omega: f64,
    /// `|⟨v₁,v₂⟩| / (‖v₁‖‖v₂‖)`.
    pub parallelism: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExceptionalPoint {
    pub n: usize,
    pub delta: f64,
    pub p_crit: f64,
    /// Position of the emerging singlet, meV from the cavity.
    pub omega_at_ep: f64,
    pub residual_gap: f64,
    pub parallelism: f64,
}

fn pair_probe(m: &CMat, pick: impl Fn(&[Complex64]) -> (usize, usize)) -> Result<GapMinimum> {
    let e = linalg::eigen(m)?;
    let (i, j) = pick(&e.values);
    let (a, b) = (e.values[i], e.values[j]);
    let vi: CVec = e.vectors.column(i).into_owned();
    let vj: CVec = e.vectors.column(j).into_owned();
    let parallelism = vi.dotc(&vj).norm() / (vi.norm() * vj.norm());
    Ok(GapMinimum { p_theta: f64::NAN, gap: (a - b).norm(), omega: 0.5 * (a.im + b.im), parallelism })
}

/// Pair whose midpoint lies closest to `mid`.
fn pair_near(values: &[Complex64], mid: Complex64) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_d = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = ((values[i] + values[j]) * 0.5 - mid).norm();
            if d < best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

/// Golden-section refinement of a gap minimum bracketed by `[a, b]`.
fn refine(mut f: impl FnMut(f64) -> Result<GapMinimum>, mut a: f64, mut b: f64, seed: GapMinimum) -> Result<GapMinimum> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = seed;
    let keep = |m: GapMinimum, best: &mut GapMinimum| {
        if m.gap < best.gap {
            *best = m;
        }
        m.gap
    };
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = keep(f(x1)?, &mut best);
    let mut f2 = keep(f(x2)?, &mut best);
    for _ in 0..GOLDEN_ITER {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = keep(f(x1)?, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = keep(f(x2)?, &mut best);
        }
    }
    Ok(best)
}

fn classify(min: GapMinimum, scale: f64) -> std::result::Result<GapMinimum, GapMinimum> {
    if min.gap < EP_GAP_TOL * scale && min.parallelism > 1.0 - EP_PARALLEL_TOL {
        Ok(min)
    } else {
        Err(min)
    }
}

/// Coalescence of `(−,−)` and `(−,+)` for `P_θ ∈ [lo, hi]` on the oracle block.
///
/// A 200-point scan along the labelled branches locates the smallest gap,
/// golden-section search refines it. A minimum whose gap stays above
/// `1e-6 g`, or whose eigenvectors are not parallel, is reported as
/// [`Error::AvoidedCrossing`].
pub fn exceptional_point(p: &SubspaceParams, lo: f64, hi: f64) -> Result<ExceptionalPoint> {
    p.validate()?;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter { name: "p_theta", reason: format!("bad search interval [{lo}, {hi}]") });
    }
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64).collect();
    let sweep = label_sweep(p, Source::Oracle, &grid)?;
    let (k, _) = sweep.iter().enumerate().min_by(|(_, a), (_, b)| a.emission_gap().total_cmp(&b.emission_gap())).unwrap();
    let e = &sweep[k];
    let mid = (e.lambda(Branch::MinusMinus).unwrap() + e.lambda(Branch::MinusPlus).unwrap()) * 0.5;

    let (m0, m1) = Source::Oracle.affine(p)?;
    let probe = |pt: f64| -> Result<GapMinimum> {
        let m = &m0 + &m1 * c(pt, 0.0);
        let mut g = pair_probe(&m, |v| pair_near(v, mid))?;
        g.p_theta = pt;
        Ok(g)
    };
    let seed = probe(grid[k])?;
    let (a, b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)]);
    let min = refine(probe, a, b, seed)?;
    let scale = if p.g > 0.0 { p.g } else { p.scale() };
    classify(min, scale)
        .map(|m| ExceptionalPoint {
            n: p.n,
            delta: p.delta,
            p_crit: m.p_theta,
            omega_at_ep: m.omega,
            residual_gap: m.gap,
            parallelism: m.parallelism,
        })
        .map_err(Error::AvoidedCrossing)
}

/// Coalescence of `[[0, x], [x, iγ]]` in `x ∈ [lo, hi]`; the exact answer is
/// `x = γ/2`. Exercises the search on a case with a closed form.
pub fn toy_exceptional_point(gamma: f64, lo: f64, hi: f64) -> Result<GapMinimum> {
    if !(gamma > 0.0 && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter { name: "gamma", reason: "need gamma > 0 and lo < hi".into() });
    }
    let probe = |x: f64| -> Result<GapMinimum> {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(x, 0.0), c(x, 0.0), c(0.0, gamma)]);
        let mut g = pair_probe(&m, |_| (0, 1))?;
        g.p_theta = x;
        Ok(g)
    };
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64).collect();
    let mut best = (0, probe(grid[0])?);
    for (k, &x) in grid.iter().enumerate().skip(1) {
        let g = probe(x)?;
        if g.gap < best.1.gap {
            best = (k, g);
        }
    }
    let (k, seed) = best;
    let min = refine(probe, grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)], seed)?;
    classify(min, gamma).map_err(Error::AvoidedCrossing)
}
