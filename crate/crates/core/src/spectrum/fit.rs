use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::{Peak, Spectrum};

/// Relative RMS residual above which a fit is flagged as not describing a
/// single line.
pub const RESIDUAL_FLAG: f64 = 0.02;
const MAX_ITER: usize = 500;

#[derive(Clone, Copy, Debug)]
pub struct FitResult {
    pub peak: Peak,
    pub background: f64,
    /// RMS residual divided by the fitted height.
    pub residual_norm: f64,
    pub large_residual: bool,
    pub iterations: usize,
}

/// `[center − factor·fwhm, center + factor·fwhm]`.
pub fn window_around(peak: &Peak, factor: f64) -> (f64, f64) {
    (peak.center - factor * peak.fwhm, peak.center + factor * peak.fwhm)
}

/// Joint fit of several lines sharing one constant background.
#[derive(Clone, Debug)]
pub struct MultiFit {
    /// Sorted by center.
    pub peaks: Vec<Peak>,
    pub background: f64,
    /// RMS residual divided by the largest fitted height.
    pub residual_norm: f64,
    pub large_residual: bool,
    pub iterations: usize,
}

/// Levenberg–Marquardt fit of `h / (1 + (2(ω − ω₀)/Γ)²) + b` on the grid
/// points inside `window`.
pub fn lorentzian_fit(s: &Spectrum, window: (f64, f64)) -> Result<FitResult> {
    let (xs, ys) = window_points(s, window)?;
    let (imax, &ymax) = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let half = 0.5 * (ymax + ymin);
    let above = xs.iter().zip(&ys).filter(|(_, y)| **y >= half).map(|(x, _)| *x);
    let (l, r) = above.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, r), x| (l.min(x), r.max(x)));
    let step = xs[1] - xs[0];
    let seed = Peak { center: xs[imax], height: ymax - ymin, fwhm: (r - l).max(2.0 * step) };
    let f = levenberg_marquardt(&xs, &ys, &[seed], ymin)?;
    Ok(FitResult {
        peak: f.peaks[0],
        background: f.background,
        residual_norm: f.residual_norm,
        large_residual: f.large_residual,
        iterations: f.iterations,
    })
}

/// Sum of `seeds.len()` Lorentzians plus a constant, fitted inside `window`
/// starting from the given peak estimates.
pub fn lorentzian_fit_many(s: &Spectrum, window: (f64, f64), seeds: &[Peak]) -> Result<MultiFit> {
    let (xs, ys) = window_points(s, window)?;
    if xs.len() < 3 * seeds.len() + 2 {
        return Err(Error::FitWindowTooSmall(xs.len()));
    }
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let seeds: Vec<Peak> = seeds.iter().map(|p| Peak { height: (p.height - ymin).max(f64::MIN_POSITIVE), ..*p }).collect();
    levenberg_marquardt(&xs, &ys, &seeds, ymin)
}

/// Abscissae relative to the window midpoint, with the midpoint.
fn window_points(s: &Spectrum, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        s.omega().iter().zip(s.intensity()).filter(|(w, _)| **w >= lo && **w <= hi).map(|(w, y)| (*w, *y)).unzip();
    if xs.len() < 5 {
        return Err(Error::FitWindowTooSmall(xs.len()));
    }
    Ok((xs, ys))
}

fn levenberg_marquardt(xs_abs: &[f64], ys: &[f64], seeds: &[Peak], background: f64) -> Result<MultiFit> {
    // centered coordinates keep the normal equations well scaled
    let origin = 0.5 * (xs_abs[0] + xs_abs[xs_abs.len() - 1]);
    let xs: Vec<f64> = xs_abs.iter().map(|x| x - origin).collect();
    let k = seeds.len();
    let np = 3 * k + 1;
    // θ = (center, fwhm, height) per line, then background
    let mut theta = DVector::zeros(np);
    for (i, p) in seeds.iter().enumerate() {
        theta[3 * i] = p.center - origin;
        theta[3 * i + 1] = p.fwhm;
        theta[3 * i + 2] = p.height;
    }
    theta[np - 1] = background;

    let residuals = |t: &DVector<f64>| -> Vec<f64> { xs.iter().zip(ys).map(|(x, y)| model(t, *x) - y).collect() };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut r = residuals(&theta);
    let mut current = cost(&r);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut jtj = DMatrix::zeros(np, np);
        let mut jtr = DVector::zeros(np);
        for (x, ri) in xs.iter().zip(&r) {
            let j = jacobian(&theta, *x);
            jtj += &j * j.transpose();
            jtr += &j * *ri;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut damped = jtj.clone();
            for d in 0..np {
                damped[(d, d)] += mu * jtj[(d, d)].max(1e-300);
            }
            let Some(delta) = damped.lu().solve(&(-&jtr)) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = &theta + &delta;
            for i in 0..k {
                trial[3 * i + 1] = trial[3 * i + 1].abs();
            }
            let rt = residuals(&trial);
            let ct = cost(&rt);
            if ct <= current {
                let small = delta.iter().zip(theta.iter()).all(|(d, t)| d.abs() <= 1e-12 * (t.abs() + 1e-12));
                let flat = current - ct <= 1e-15 * current.max(f64::MIN_POSITIVE);
                theta = trial;
                r = rt;
                current = ct;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                converged = small || flat;
                break;
            }
            mu *= 4.0;
        }
        if !accepted || converged {
            // no descent direction left: a minimum to working precision
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitNoConvergence(MAX_ITER));
    }
    let mut peaks: Vec<Peak> =
        (0..k).map(|i| Peak { center: theta[3 * i] + origin, fwhm: theta[3 * i + 1], height: theta[3 * i + 2] }).collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    let hmax = peaks.iter().map(|p| p.height.abs()).fold(0.0, f64::max);
    let residual_norm = (current / xs.len() as f64).sqrt() / hmax.max(f64::MIN_POSITIVE);
    Ok(MultiFit { peaks, background: theta[np - 1], residual_norm, large_residual: residual_norm > RESIDUAL_FLAG, iterations })
}

fn model(t: &DVector<f64>, x: f64) -> f64 {
    let k = (t.len() - 1) / 3;
    let mut y = t[t.len() - 1];
    for i in 0..k {
        let u = 2.0 * (x - t[3 * i]) / t[3 * i + 1];
        y += t[3 * i + 2] / (1.0 + u * u);
    }
    y
}

fn jacobian(t: &DVector<f64>, x: f64) -> DVector<f64> {
    let k = (t.len() - 1) / 3;
    let mut j = DVector::zeros(t.len());
    for i in 0..k {
        let (c, w, h) = (t[3 * i], t[3 * i + 1], t[3 * i + 2]);
        let u = 2.0 * (x - c) / w;
        let q = 1.0 + u * u;
        j[3 * i] = 4.0 * h * u / (w * q * q);
        j[3 * i + 1] = 2.0 * h * u * u / (w * q * q);
        j[3 * i + 2] = 1.0 / q;
    }
    j[t.len() - 1] = 1.0;
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::uniform_grid;

    fn line(w: f64, center: f64, fwhm: f64, h: f64) -> f64 {
        h / (1.0 + (2.0 * (w - center) / fwhm).powi(2))
    }

    #[test]
    fn exact_line() {
        let grid = uniform_grid(1042.3, 0.6, 601);
        let y = grid.iter().map(|w| line(*w, 1042.31, 0.08, 2.5) + 0.1).collect();
        let s = Spectrum::new(grid, y).unwrap();
        let f = lorentzian_fit(&s, (1042.0, 1042.6)).unwrap();
        assert!((f.peak.center - 1042.31).abs() < 1e-6 * 0.08);
        assert!((f.peak.fwhm / 0.08 - 1.0).abs() < 1e-6);
        assert!((f.peak.height / 2.5 - 1.0).abs() < 1e-6);
        assert!((f.background - 0.1).abs() < 1e-6);
        assert!(!f.large_residual);
    }

    #[test]
    fn noisy_line() {
        // 1 % white noise on top of a 1 % flat background, deterministic LCG
        let grid = uniform_grid(0.0, 0.5, 1001);
        let mut state: u64 = 0x2545_f491_4f6c_dd1d;
        let mut noise = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let y = grid.iter().map(|w| line(*w, 0.013, 0.1, 1.0) + 0.01 + 0.01 * noise()).collect();
        let s = Spectrum::new(grid, y).unwrap();
        let f = lorentzian_fit(&s, (-0.3, 0.3)).unwrap();
        assert!((f.peak.center - 0.013).abs() < 1e-3 * 0.1, "{}", f.peak.center);
        assert!(!f.large_residual);
    }

    #[test]
    fn overlapping_lines_flagged() {
        let grid = uniform_grid(0.0, 0.5, 1001);
        let y = grid.iter().map(|w| line(*w, -0.06, 0.08, 1.0) + line(*w, 0.06, 0.08, 0.8)).collect();
        let s = Spectrum::new(grid, y).unwrap();
        let f = lorentzian_fit(&s, (-0.3, 0.3)).unwrap();
        assert!(f.large_residual, "residual {}", f.residual_norm);
    }

    #[test]
    fn joint_fit_separates_overlapping_lines() {
        let grid = uniform_grid(0.0, 3.0, 3001);
        let y = grid.iter().map(|w| line(*w, -0.1, 0.25, 1.0) + line(*w, 0.5, 1.1, 0.15)).collect();
        let s = Spectrum::new(grid, y).unwrap();
        let seeds = [Peak { center: -0.1, height: 1.0, fwhm: 0.3 }, Peak { center: 0.6, height: 0.2, fwhm: 1.0 }];
        let f = lorentzian_fit_many(&s, (-2.0, 2.0), &seeds).unwrap();
        assert!((f.peaks[0].fwhm - 0.25).abs() < 1e-6 && (f.peaks[1].fwhm - 1.1).abs() < 1e-6);
        assert!((f.peaks[1].center - 0.5).abs() < 1e-6);
        assert!(f.background.abs() < 1e-6);
        assert!(!f.large_residual);
    }

    #[test]
    fn tiny_window_rejected() {
        let grid = uniform_grid(0.0, 0.5, 101);
        let y = grid.iter().map(|w| line(*w, 0.0, 0.1, 1.0)).collect();
        let s = Spectrum::new(grid, y).unwrap();
        assert!(matches!(lorentzian_fit(&s, (0.0, 0.01)), Err(Error::FitWindowTooSmall(_))));
    }
}
