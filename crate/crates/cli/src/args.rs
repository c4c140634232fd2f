//! Command-line arguments and the list/grid value parsers.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "jcdyn", version, about = "Temperature sweeps of the phonon-fed quantum dot / cavity model")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; `outputs.dir` of the config when absent.
    #[arg(long, global = true, env = "JCDYN_OUT")]
    pub out: Option<PathBuf>,

    /// Worker threads; all available cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emission spectra over the temperature sweep.
    Spectra(SpectraArgs),
    /// Tracked C and X lines with fitted widths.
    Peaks,
    /// Labelled transition eigenvalues over the temperature sweep.
    Blocks(BlocksArgs),
    /// Exceptional points against detuning.
    EpMap(EpMapArgs),
    /// Bare-state content of the (−,−) branch against the phonon rate.
    Coefficients(CoefficientsArgs),
    /// Every command listed in `outputs.figures`, with default arguments.
    All(SpectraArgs),
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct SpectraArgs {
    /// Scale every spectrum to unit maximum.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Oracle,
    Printed,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct BlocksArgs {
    /// Rungs, comma separated.
    #[arg(long, default_value = "1,2,3,4", value_parser = parse_rungs)]
    pub n: Rungs,
    #[arg(long, value_enum, default_value_t = SourceArg::Oracle)]
    pub source: SourceArg,
}

impl Default for BlocksArgs {
    fn default() -> Self {
        Self { n: Rungs(vec![1, 2, 3, 4]), source: SourceArg::Oracle }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EpMapArgs {
    #[arg(long, default_value = "1,2,3,4", value_parser = parse_rungs)]
    pub n: Rungs,
    /// Detuning grid in units of g, `start:stop:count`.
    #[arg(long, default_value = "-1:1:21", value_parser = parse_grid, allow_hyphen_values = true)]
    pub delta_grid: Grid,
    /// Solve the 2x2 toy problem [[0, x], [x, i·gamma]] instead.
    #[arg(long, hide = true)]
    pub toy_gamma: Option<f64>,
}

impl Default for EpMapArgs {
    fn default() -> Self {
        Self { n: Rungs(vec![1, 2, 3, 4]), delta_grid: Grid { start: -1.0, stop: 1.0, count: 21 }, toy_gamma: None }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CoefficientsArgs {
    #[arg(long, default_value = "2,3,4", value_parser = parse_rungs)]
    pub n: Rungs,
    /// Phonon-rate grid in units of g, `start:stop:count`.
    #[arg(long, default_value = "0:6:121", value_parser = parse_grid)]
    pub p_grid: Grid,
}

impl Default for CoefficientsArgs {
    fn default() -> Self {
        Self { n: Rungs(vec![2, 3, 4]), p_grid: Grid { start: 0.0, stop: 6.0, count: 121 } }
    }
}

/// Largest rung accepted on the command line.
pub const MAX_RUNG: usize = 64;
/// Largest grid accepted on the command line.
pub const MAX_GRID: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rungs(pub Vec<usize>);

/// `"1,2,4"` to a sorted, duplicate-free rung list in `1..=MAX_RUNG`.
pub fn parse_rungs(s: &str) -> Result<Rungs, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let n: usize = part.parse().map_err(|_| format!("`{part}` is not a rung index"))?;
        if n == 0 || n > MAX_RUNG {
            return Err(format!("rung {n} outside 1..={MAX_RUNG}"));
        }
        out.push(n);
    }
    out.sort_unstable();
    out.dedup();
    Ok(Rungs(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    /// Evenly spaced values; the last one is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| if k + 1 == self.count { self.stop } else { self.start + h * k as f64 }).collect()
    }
}

/// `"start:stop:count"`; a count of 1 requires `start == stop`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("`{s}` is not of the form start:stop:count"));
    };
    let num = |x: &str| x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{x}` is not a finite number"));
    let (start, stop) = (num(a)?, num(b)?);
    let count: usize = n.parse().map_err(|_| format!("`{n}` is not a point count"))?;
    if count == 0 || count > MAX_GRID {
        return Err(format!("point count {count} outside 1..={MAX_GRID}"));
    }
    if count == 1 && start != stop {
        return Err("a single-point grid needs start == stop".into());
    }
    if count > 1 && !(stop > start) {
        return Err("grid needs start < stop".into());
    }
    let h = (stop - start) / count.saturating_sub(1).max(1) as f64;
    if count > 1 && !(h.is_finite() && h > 0.0) {
        return Err("grid spacing must be finite and non-zero".into());
    }
    Ok(Grid { start, stop, count })
}
