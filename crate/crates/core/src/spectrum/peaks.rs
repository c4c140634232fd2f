use crate::error::{Error, Result};

use super::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// meV
    pub center: f64,
    pub height: f64,
    /// Full width at half maximum, meV.
    pub fwhm: f64,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    index: usize,
    prominence: f64,
}

/// Local maxima with topographic prominence of at least `min_prominence`
/// times the global maximum, sorted by center. Widths come from a
/// half-height scan with linear interpolation.
pub fn find_peaks(s: &Spectrum, min_prominence: f64) -> Result<Vec<Peak>> {
    let mut peaks: Vec<Peak> = candidates(s, min_prominence).iter().map(|c| describe(s, c.index)).collect();
    if peaks.is_empty() {
        return Err(Error::NoPeaks);
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(peaks)
}

/// The `count` most prominent peaks, sorted by center.
pub fn dominant_peaks(s: &Spectrum, min_prominence: f64, count: usize) -> Result<Vec<Peak>> {
    let mut cands = candidates(s, min_prominence);
    if cands.is_empty() {
        return Err(Error::NoPeaks);
    }
    cands.sort_by(|a, b| b.prominence.total_cmp(&a.prominence).then(a.index.cmp(&b.index)));
    cands.truncate(count);
    let mut peaks: Vec<Peak> = cands.iter().map(|c| describe(s, c.index)).collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(peaks)
}

fn candidates(s: &Spectrum, min_prominence: f64) -> Vec<Candidate> {
    let y = s.intensity();
    let n = y.len();
    let ymax = s.max_intensity();
    if !(ymax > 0.0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let mid = (i + j) / 2;
                let prom = prominence(y, mid);
                if prom >= min_prominence * ymax {
                    out.push(Candidate { index: mid, prominence: prom });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(y: &[f64], k: usize) -> f64 {
    let h = y[k];
    let mut left_min = h;
    for v in y[..k].iter().rev() {
        if *v > h {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = h;
    for v in &y[k + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

fn describe(s: &Spectrum, k: usize) -> Peak {
    let (x, y) = (s.omega(), s.intensity());
    let h = y[k];
    let half = 0.5 * h;
    let crossing = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);

    let left = (0..k).rev().find(|&i| y[i] < half).map_or(x[0], |i| crossing(i, i + 1));
    let right = (k + 1..x.len()).find(|&i| y[i] < half).map_or(x[x.len() - 1], |i| crossing(i - 1, i));
    let fwhm = (right - left).max(x[1] - x[0]);
    Peak { center: x[k], height: h, fwhm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::uniform_grid;

    fn lorentz(w: f64, center: f64, fwhm: f64) -> f64 {
        1.0 / (1.0 + (2.0 * (w - center) / fwhm).powi(2))
    }

    #[test]
    fn single_line() {
        let grid = uniform_grid(1042.0, 1.0, 2001);
        let y = grid.iter().map(|w| lorentz(*w, 1042.0, 0.1)).collect();
        let s = Spectrum::new(grid.clone(), y).unwrap();
        let p = find_peaks(&s, 0.01).unwrap();
        assert_eq!(p.len(), 1);
        let step = grid[1] - grid[0];
        assert!((p[0].center - 1042.0).abs() <= step);
        assert!((p[0].fwhm - 0.1).abs() < 1e-4);
    }

    #[test]
    fn separated_pair() {
        // lines 5 FWHM apart
        let grid = uniform_grid(0.0, 2.0, 4001);
        let y = grid.iter().map(|w| lorentz(*w, -0.25, 0.1) + 0.6 * lorentz(*w, 0.25, 0.1)).collect();
        let s = Spectrum::new(grid.clone(), y).unwrap();
        let p = find_peaks(&s, 0.01).unwrap();
        assert_eq!(p.len(), 2);
        let step = grid[1] - grid[0];
        assert!((p[0].center + 0.25).abs() <= 2.0 * step);
        assert!((p[1].center - 0.25).abs() <= 2.0 * step);
        assert!((p[1].height - 0.6).abs() < 0.02);
    }

    #[test]
    fn dominant_selection() {
        let grid = uniform_grid(0.0, 2.0, 4001);
        let y =
            grid.iter().map(|w| lorentz(*w, -1.0, 0.1) + 0.05 * lorentz(*w, 0.0, 0.1) + 0.5 * lorentz(*w, 1.0, 0.1)).collect();
        let s = Spectrum::new(grid, y).unwrap();
        assert_eq!(find_peaks(&s, 0.01).unwrap().len(), 3);
        let top = dominant_peaks(&s, 0.01, 2).unwrap();
        assert_eq!(top.len(), 2);
        assert!(top[0].center < -0.9 && top[1].center > 0.9);
    }

    #[test]
    fn flat_has_no_peaks() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4]).unwrap();
        assert!(matches!(find_peaks(&s, 0.0), Err(Error::NoPeaks)));
    }
}
