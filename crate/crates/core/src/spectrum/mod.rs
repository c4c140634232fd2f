//! Cavity emission spectrum from the quantum regression formula.
//!
//! `S(ω) = 2 Re ∫₀^∞ ⟨a†(τ) a(0)⟩ e^{−iωτ} dτ`, with the correlation obtained
//! by propagating `a ρ_ss` under the generator. Two independent routes are
//! provided: a modal expansion (eigendecomposition of the generator) and a
//! direct time-domain quadrature of the propagated correlation.

mod fit;
mod peaks;
mod tracking;

pub use fit::{lorentzian_fit, lorentzian_fit_many, window_around, FitResult, MultiFit, RESIDUAL_FLAG};
pub use peaks::{dominant_peaks, find_peaks, Peak};
pub use tracking::{track_peaks, PeakLabel, PeakTrajectory, SweepPoint, TrackSample};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::liouville::{vectorize, Superoperator};
use crate::operators::{bare_operators, DensityMatrix};

/// Eigenvector condition number above which the modal expansion is rejected.
pub const CONDITION_LIMIT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    omega: Vec<f64>,
    intensity: Vec<f64>,
    normalized: bool,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if omega.len() != intensity.len() {
            return Err(Error::InvalidParameter {
                name: "intensity",
                reason: format!("{} values for {} frequencies", intensity.len(), omega.len()),
            });
        }
        if omega.len() < 2 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter { name: "omega", reason: "grid must be strictly increasing".into() });
        }
        if intensity.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter { name: "intensity", reason: "non-finite value".into() });
        }
        Ok(Self { omega, intensity, normalized: false })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescaled copy with maximum 1.
    pub fn normalized(&self) -> Spectrum {
        let m = self.max_intensity();
        let scale = if m > 0.0 { 1.0 / m } else { 1.0 };
        Spectrum { omega: self.omega.clone(), intensity: self.intensity.iter().map(|x| x * scale).collect(), normalized: true }
    }

    /// `max |S − other| / max S` on a shared grid.
    pub fn max_relative_deviation(&self, other: &Spectrum) -> f64 {
        assert_eq!(self.omega, other.omega, "spectra must share a grid");
        let diff = self.intensity.iter().zip(&other.intensity).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        diff / self.max_intensity()
    }
}

/// Uniform grid of `points` frequencies spanning `[center − half_width, center + half_width]`.
pub fn uniform_grid(center: f64, half_width: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let lo = center - half_width;
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

/// 2001 points over `ω₀ ± 6g`.
pub fn default_grid(omega0: f64, g: f64) -> Vec<f64> {
    uniform_grid(omega0, 6.0 * g, 2001)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMethod {
    Resolvent,
    TimeDomain,
}

impl SpectrumMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumMethod::Resolvent => "resolvent",
            SpectrumMethod::TimeDomain => "time_domain",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Emission {
    pub spectrum: Spectrum,
    pub method: SpectrumMethod,
}

/// Restriction of the regression problem to the invariant blocks that
/// `a ρ_ss` occupies.
struct Regression {
    indices: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    /// vec(a ρ_ss) on `indices`.
    seed: CVec,
    /// vec(a) on `indices`; `Tr(a† X) = vec(a)† vec(X)`.
    observable: CVec,
    frame: f64,
}

impl Regression {
    fn new(l: &Superoperator, rho_ss: &DensityMatrix) -> Self {
        let a = bare_operators(l.space()).a;
        let seed_full = vectorize(&(a.matrix() * rho_ss.matrix()));
        let obs_full = vectorize(a.matrix());
        let blocks = l.blocks_touching(&seed_full);
        let mut indices: Vec<usize> = blocks.iter().flatten().copied().collect();
        indices.sort_unstable();
        let seed = CVec::from_iterator(indices.len(), indices.iter().map(|&k| seed_full[k]));
        let observable = CVec::from_iterator(indices.len(), indices.iter().map(|&k| obs_full[k]));
        Self { indices, blocks, seed, observable, frame: l.frame() }
    }

    fn generator(&self, l: &Superoperator) -> CMat {
        l.restrict(&self.indices)
    }
}

/// `g(τ) = ⟨a†(τ) a(0)⟩ = Tr(a† e^{Lτ}[a ρ_ss])` in the laboratory frame.
pub fn correlation(l: &Superoperator, rho_ss: &DensityMatrix, taus: &[f64]) -> Result<Vec<Complex64>> {
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter { name: "tau", reason: "delays must be >= 0".into() });
    }
    let reg = Regression::new(l, rho_ss);
    if reg.indices.is_empty() {
        return Ok(vec![c(0.0, 0.0); taus.len()]);
    }
    let m = reg.generator(l);
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&i, &j| taus[i].total_cmp(&taus[j]));

    let mut out = vec![c(0.0, 0.0); taus.len()];
    let mut x = reg.seed.clone();
    let mut now = 0.0;
    let mut cached: Option<(f64, CMat)> = None;
    for &k in &order {
        let h = taus[k] - now;
        if h > 0.0 {
            let prop = match &cached {
                Some((hc, p)) if (hc - h).abs() <= 1e-14 * h => p,
                _ => {
                    cached = Some((h, linalg::expm(&(&m * c(h, 0.0)))));
                    &cached.as_ref().unwrap().1
                }
            };
            x = prop * &x;
            now = taus[k];
        }
        let rot = c(0.0, reg.frame * taus[k]).exp();
        out[k] = reg.observable.dotc(&x) * rot;
    }
    Ok(out)
}

/// One term `w / (iω − λ)` of the modal expansion; `lambda` in the laboratory frame.
#[derive(Clone, Copy, Debug)]
pub struct SpectralMode {
    pub lambda: Complex64,
    pub weight: Complex64,
}

impl SpectralMode {
    /// Peak contribution `|w| / |Re λ|` used to rank modes.
    pub fn strength(&self) -> f64 {
        self.weight.norm() / self.lambda.re.abs().max(f64::MIN_POSITIVE)
    }
}

/// Eigenmodes of the generator on the blocks `a ρ_ss` occupies, with their
/// regression weights. Fails with [`Error::IllConditioned`] when the
/// eigenbasis is numerically defective.
pub fn spectral_modes(l: &Superoperator, rho_ss: &DensityMatrix) -> Result<Vec<SpectralMode>> {
    let reg = Regression::new(l, rho_ss);
    let mut modes = Vec::new();
    for block in &reg.blocks {
        let local: Vec<usize> = block.iter().map(|k| reg.indices.binary_search(k).unwrap()).collect();
        let m = l.restrict(block);
        let seed = CVec::from_iterator(local.len(), local.iter().map(|&r| reg.seed[r]));
        let obs = CVec::from_iterator(local.len(), local.iter().map(|&r| reg.observable[r]));
        let e = linalg::eigen(&m)?;
        let cond = linalg::condition_number(&e.vectors);
        if !(cond <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned(cond));
        }
        let coeffs = e.vectors.clone().lu().solve(&seed).ok_or(Error::IllConditioned(f64::INFINITY))?;
        for (k, lam) in e.values.iter().enumerate() {
            let proj = obs.dotc(&e.vectors.column(k).into_owned());
            modes.push(SpectralMode { lambda: lam + c(0.0, reg.frame), weight: proj * coeffs[k] });
        }
    }
    Ok(modes)
}

/// Modal route: `S(ω) = 2 Re Σ_k w_k / (iω − λ_k)`.
pub fn resolvent_spectrum(l: &Superoperator, rho_ss: &DensityMatrix, omega: &[f64]) -> Result<Spectrum> {
    let modes = spectral_modes(l, rho_ss)?;
    let frame = l.frame();
    let intensity = omega
        .iter()
        .map(|&w| {
            let rel = w - frame;
            let s: Complex64 = modes.iter().map(|m| m.weight / (c(0.0, rel) - (m.lambda - c(0.0, frame)))).sum();
            2.0 * s.re
        })
        .collect();
    Spectrum::new(omega.to_vec(), intensity)
}

#[derive(Clone, Copy, Debug)]
pub struct TimeDomainOptions {
    /// Sampling step in 1/meV; chosen from the generator norm when `None`.
    pub step: Option<f64>,
    /// Stop once `‖e^{Lτ}[aρ]‖` falls below this fraction of its initial norm.
    pub decay_tol: f64,
    pub max_steps: usize,
}

impl Default for TimeDomainOptions {
    fn default() -> Self {
        Self { step: None, decay_tol: 1e-13, max_steps: 2_000_000 }
    }
}

/// Time-domain route: sample `g(τ)` on a uniform grid by repeated
/// application of `exp(L h)` and sum the one-sided Fourier integral with the
/// trapezoid rule plus its leading endpoint correction `h² f′(0)/12`.
pub fn time_domain_spectrum(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    omega: &[f64],
    opts: &TimeDomainOptions,
) -> Result<Spectrum> {
    let reg = Regression::new(l, rho_ss);
    let frame = l.frame();
    if reg.indices.is_empty() {
        return Spectrum::new(omega.to_vec(), vec![0.0; omega.len()]);
    }
    let m = reg.generator(l);
    let span = omega.iter().map(|w| (w - frame).abs()).fold(0.0, f64::max);
    let h = opts.step.unwrap_or_else(|| 0.2 / (span + linalg::norm_inf(&m)));
    let prop = linalg::expm(&(&m * c(h, 0.0)));

    let mut samples = Vec::new();
    let mut x = reg.seed.clone();
    let x0 = x.norm();
    let g_dot0 = reg.observable.dotc(&(&m * &x));
    loop {
        samples.push(reg.observable.dotc(&x));
        if x.norm() <= opts.decay_tol * x0 {
            break;
        }
        if samples.len() > opts.max_steps {
            return Err(Error::NoDecay(opts.max_steps));
        }
        x = &prop * &x;
    }

    let g0 = samples[0];
    let intensity = omega
        .iter()
        .map(|&w| {
            let rel = w - frame;
            let step = c(0.0, -rel * h).exp();
            let mut phase = c(1.0, 0.0);
            let mut acc = c(0.0, 0.0);
            for s in &samples {
                acc += s * phase;
                phase *= step;
            }
            let trap = (acc - g0 * 0.5) * h;
            let f_dot0 = g_dot0 - c(0.0, rel) * g0;
            2.0 * (trap + f_dot0 * (h * h / 12.0)).re
        })
        .collect();
    Spectrum::new(omega.to_vec(), intensity)
}

/// Modal spectrum, falling back to the time-domain route when the
/// eigenbasis is too ill-conditioned (close to an exceptional point).
pub fn emission_spectrum(l: &Superoperator, rho_ss: &DensityMatrix, omega: &[f64]) -> Result<Emission> {
    match resolvent_spectrum(l, rho_ss, omega) {
        Ok(spectrum) => Ok(Emission { spectrum, method: SpectrumMethod::Resolvent }),
        Err(Error::IllConditioned(_)) => {
            let spectrum = time_domain_spectrum(l, rho_ss, omega, &TimeDomainOptions::default())?;
            Ok(Emission { spectrum, method: SpectrumMethod::TimeDomain })
        }
        Err(e) => Err(e),
    }
}
