//! C/X labelling of the emission peaks across a temperature sweep.

use crate::error::{Error, Result};

use super::Peak;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PeakLabel {
    C,
    X,
}

impl PeakLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeakLabel::C => "C",
            PeakLabel::X => "X",
        }
    }
}

/// The one or two peaks resolved at one sweep temperature.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub temperature: f64,
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackSample {
    pub temperature: f64,
    pub center: f64,
    pub fwhm: f64,
    pub height: f64,
    /// Only one peak was resolvable; both labels share it.
    pub merged: bool,
}

#[derive(Clone, Debug)]
pub struct PeakTrajectory {
    pub label: PeakLabel,
    pub samples: Vec<TrackSample>,
}

/// Assign C and X along a sweep.
///
/// Labels start from proximity to the bare energies `bare(T) = (ω_c, ω_x)`
/// at the lowest temperature and are then carried by continuity: each label
/// claims a peak so that the summed squared distance to the linear
/// extrapolations from the two previous samples is smallest. A single resolvable peak is given to both labels and flagged as
/// merged; when two peaks reappear the bare-energy rule is used again.
/// Predictions for C and X within `tie_tol` meV of each other are reported
/// as [`Error::TrackingAmbiguity`].
pub fn track_peaks<F>(points: &[SweepPoint], bare: F, tie_tol: f64) -> Result<(PeakTrajectory, PeakTrajectory)>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut order: Vec<&SweepPoint> = points.iter().collect();
    order.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    if order.windows(2).any(|w| w[0].temperature == w[1].temperature) {
        return Err(Error::InvalidParameter { name: "sweep", reason: "repeated temperature".into() });
    }

    let mut c: Vec<TrackSample> = Vec::with_capacity(order.len());
    let mut x: Vec<TrackSample> = Vec::with_capacity(order.len());
    for p in order {
        let t = p.temperature;
        let sample = |peak: &Peak, merged| TrackSample {
            temperature: t,
            center: peak.center,
            fwhm: peak.fwhm,
            height: peak.height,
            merged,
        };
        match p.peaks.as_slice() {
            [only] => {
                c.push(sample(only, true));
                x.push(sample(only, true));
            }
            [lo, hi] => {
                let continuing = c.last().is_some_and(|s| !s.merged);
                let (tc, tx) = if continuing { (predict(&c, t), predict(&x, t)) } else { bare(t) };
                // Squared distances: the two costs differ by 2(hi − lo)(tc − tx),
                // so only coincident predictions leave the choice open.
                let keep = (lo.center - tc).powi(2) + (hi.center - tx).powi(2);
                let swap = (hi.center - tc).powi(2) + (lo.center - tx).powi(2);
                if (tc - tx).abs() <= tie_tol {
                    return Err(Error::TrackingAmbiguity { temperature: t });
                }
                let (pc, px) = if keep < swap { (lo, hi) } else { (hi, lo) };
                c.push(sample(pc, false));
                x.push(sample(px, false));
            }
            other => {
                return Err(Error::InvalidParameter {
                    name: "sweep",
                    reason: format!("{} peaks at T = {t} K, expected 1 or 2", other.len()),
                })
            }
        }
    }
    Ok((PeakTrajectory { label: PeakLabel::C, samples: c }, PeakTrajectory { label: PeakLabel::X, samples: x }))
}

fn predict(history: &[TrackSample], t: f64) -> f64 {
    match history {
        [.., a, b] if !a.merged => b.center + (b.center - a.center) * (t - b.temperature) / (b.temperature - a.temperature),
        [.., b] => b.center,
        [] => unreachable!("prediction needs history"),
    }
}
