//! Sweep computations and the files each command writes.
//!
//! Rows are computed on the rayon pool and collected in sweep order, so the
//! output does not depend on the thread count.

use std::path::{Path, PathBuf};

use jcdyn::spectrum::{track_peaks, uniform_grid, SweepPoint};
use jcdyn::subspaces::{bare_coefficients, exceptional_point, label_sweep, toy_exceptional_point, TransitionEigen};
use jcdyn::sweep::{resolve_lines, spectrum_at, LineEstimate, TemperaturePoint};
use jcdyn::thermal::{REGION_III_RATIO, REGION_II_RATIO};
use jcdyn::{resonance_temperature, Branch, Error, Peak, PeakLabel, Source, SubspaceParams};
use rayon::prelude::*;

use crate::args::{BlocksArgs, CoefficientsArgs, EpMapArgs, SourceArg, SpectraArgs};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sci, temperature_tag, text_field, Csv};

/// A sweep row that could not be computed.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub command: &'static str,
    /// Sweep coordinate of the row, e.g. `T=12.5`.
    pub key: String,
    pub message: String,
}

/// Files written and rows lost by one command.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    fn merge(&mut self, other: Report) {
        self.files.extend(other.files);
        self.rows += other.rows;
        self.failures.extend(other.failures);
    }

    /// Partial completion is an error; so is a command with no good rows.
    pub fn status(&self) -> Result<(), CliError> {
        match self.failures.first() {
            None => Ok(()),
            Some(f) if self.failures.len() >= self.rows => {
                Err(CliError::Numerical(format!("{} failed at {}: {}", f.command, f.key, f.message)))
            }
            Some(_) => Err(CliError::Partial { failed: self.failures.len(), total: self.rows }),
        }
    }
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub hash: String,
    pub out: &'a Path,
}

impl Context<'_> {
    fn csv(&self, command: &str, extra: &[String], columns: &[&str]) -> Csv {
        let mut comments = vec![format!("command={command}")];
        comments.extend_from_slice(extra);
        Csv::new(&self.hash, &comments, columns)
    }
}

fn key_t(t: f64) -> String {
    format!("T={t}")
}

/// Frequency grid of the spectra: `points` values over `center ± half_width_over_g·g`,
/// centred on the crossover energy unless a center is configured.
pub fn omega_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let grid = &cfg.numerics.omega_grid;
    let center = match grid.center {
        Some(c) => c,
        None => {
            resonance_temperature(&cfg.thermal)
                .map_err(|e| CliError::Config(format!("numerics.omega_grid.center: no default, {e}")))?
                .omega0
        }
    };
    Ok(uniform_grid(center, grid.half_width_over_g * cfg.system.g, grid.points))
}

/// One sweep temperature and its outcome.
pub type SweepRow<T> = (f64, Result<T, Error>);

/// Steady-state spectra over the temperature sweep, in sweep order.
pub fn sweep_spectra(cfg: &RunConfig) -> Result<Vec<SweepRow<TemperaturePoint>>, CliError> {
    let omega = omega_grid(cfg)?;
    let base = cfg.system.base();
    let n_max = cfg.numerics.n_max;
    Ok(cfg.sweep.temperatures().into_par_iter().map(|t| (t, spectrum_at(&base, &cfg.thermal, t, n_max, &omega))).collect())
}

pub fn cmd_spectra(ctx: &Context, args: SpectraArgs) -> Result<Report, CliError> {
    let cfg = ctx.config;
    let sweep = sweep_spectra(cfg)?;
    let mut report = Report { rows: sweep.len(), ..Default::default() };
    let extra = [format!("normalized={}", args.normalize)];
    let mut long = ctx.csv("spectra", &extra, &["T_K", "omega_meV", "intensity"]);
    let mut summary = ctx.csv(
        "spectra",
        &extra,
        &["T_K", "omega_c_meV", "omega_x_meV", "p_theta_meV", "region", "photons", "method", "max_omega_meV", "max_intensity"],
    );
    for (t, point) in &sweep {
        let point = match point {
            Ok(p) => p,
            Err(e) => {
                report.failures.push(Failure { command: "spectra", key: key_t(*t), message: e.to_string() });
                continue;
            }
        };
        let s = &point.emission.spectrum;
        let s = if args.normalize { s.normalized() } else { s.clone() };
        let mut single = ctx.csv("spectra", &[format!("T_K={}", sci(*t)), extra[0].clone()], &["omega_meV", "intensity"]);
        for (w, i) in s.omega().iter().zip(s.intensity()) {
            single.row(&[sci(*w), sci(*i)]);
            long.row(&[sci(*t), sci(*w), sci(*i)]);
        }
        report.files.push(single.write(ctx.out, &format!("spectrum_T{}.csv", temperature_tag(*t)))?);
        let (k_max, i_max) =
            s.intensity().iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let p = &point.params;
        summary.row(&[
            sci(*t),
            sci(p.omega_c),
            sci(p.omega_x),
            sci(p.p_theta),
            cfg.thermal.classify(p.p_theta).as_str().into(),
            sci(point.photons),
            point.emission.method.as_str().into(),
            sci(s.omega()[k_max]),
            sci(i_max),
        ]);
    }
    report.files.push(long.write(ctx.out, "spectra_long.csv")?);
    report.files.push(summary.write(ctx.out, "spectra_summary.csv")?);
    Ok(report)
}

/// One labelled line at one temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakRow {
    pub temperature: f64,
    pub label: PeakLabel,
    /// Lorentzian fit.
    pub line: Peak,
    /// Width from the half-height scan.
    pub fwhm_halfheight: f64,
    pub merged: bool,
    pub large_residual: bool,
    pub omega_c: f64,
    pub omega_x: f64,
}

/// Resolved and tracked C/X lines over the sweep, sorted by temperature
/// then label, plus the temperatures that could not be evaluated.
pub fn peak_table(cfg: &RunConfig) -> Result<(Vec<PeakRow>, Vec<Failure>, usize), CliError> {
    let sweep = sweep_spectra(cfg)?;
    let total = sweep.len();
    let min_prom = cfg.numerics.tolerances.min_prominence;
    let lines: Vec<SweepRow<Vec<LineEstimate>>> =
        sweep.into_par_iter().map(|(t, point)| (t, point.and_then(|p| resolve_lines(&p.emission, min_prom)))).collect();
    let mut failures = Vec::new();
    let mut good = Vec::new();
    for (t, l) in lines {
        match l {
            Ok(l) => good.push((t, l)),
            Err(e) => failures.push(Failure { command: "peaks", key: key_t(t), message: e.to_string() }),
        }
    }
    if good.is_empty() {
        return Ok((Vec::new(), failures, total));
    }
    let points: Vec<SweepPoint> =
        good.iter().map(|(t, l)| SweepPoint { temperature: *t, peaks: l.iter().map(|e| e.fit).collect() }).collect();
    let m = &cfg.thermal;
    let (c, x) = track_peaks(&points, |t| (m.cavity_energy(t), m.exciton_energy(t)), cfg.numerics.tolerances.tie_tol)
        .map_err(|e| CliError::Numerical(format!("peaks: {e}")))?;
    let mut rows = Vec::with_capacity(2 * good.len());
    for (k, (t, estimates)) in good.iter().enumerate() {
        for traj in [&c, &x] {
            let s = traj.samples[k];
            let est = estimates.iter().find(|e| e.fit.center == s.center).expect("tracked peak comes from the estimates");
            rows.push(PeakRow {
                temperature: *t,
                label: traj.label,
                line: est.fit,
                fwhm_halfheight: est.scan.fwhm,
                merged: s.merged,
                large_residual: est.large_residual,
                omega_c: m.cavity_energy(*t),
                omega_x: m.exciton_energy(*t),
            });
        }
    }
    Ok((rows, failures, total))
}

pub fn cmd_peaks(ctx: &Context) -> Result<Report, CliError> {
    let (rows, failures, total) = peak_table(ctx.config)?;
    let mut csv = ctx.csv(
        "peaks",
        &[],
        &[
            "T_K",
            "label",
            "center_meV",
            "fwhm_meV",
            "fwhm_halfheight_meV",
            "height",
            "merged",
            "large_residual",
            "omega_c_meV",
            "omega_x_meV",
        ],
    );
    for r in &rows {
        csv.row(&[
            sci(r.temperature),
            r.label.as_str().into(),
            sci(r.line.center),
            sci(r.line.fwhm),
            sci(r.fwhm_halfheight),
            sci(r.line.height),
            r.merged.to_string(),
            r.large_residual.to_string(),
            sci(r.omega_c),
            sci(r.omega_x),
        ]);
    }
    let file = csv.write(ctx.out, "peaks.csv")?;
    Ok(Report { files: vec![file], rows: total, failures })
}

/// Transition-block parameters at temperature `t`: rates scaled by `g`,
/// phonon rate and detuning from the thermal model.
pub fn block_params(cfg: &RunConfig, n: usize, t: f64) -> SubspaceParams {
    let g = cfg.system.g;
    SubspaceParams {
        n,
        g,
        kappa: cfg.subspace.kappa_over_g * g,
        gamma_x: cfg.subspace.gamma_x_over_g * g,
        p_theta: cfg.thermal.phonon_rate(t),
        delta: cfg.thermal.detuning(t),
    }
}

fn sources(arg: SourceArg) -> &'static [Source] {
    match arg {
        SourceArg::Oracle => &[Source::Oracle],
        SourceArg::Printed => &[Source::Printed],
        SourceArg::Both => &[Source::Oracle, Source::Printed],
    }
}

/// Labelled eigenpairs for every (T, n, source), in that order.
pub fn block_sweep(
    cfg: &RunConfig,
    rungs: &[usize],
    arg: SourceArg,
) -> Vec<(f64, usize, Source, Result<TransitionEigen, Error>)> {
    let mut jobs = Vec::new();
    for t in cfg.sweep.temperatures() {
        for &n in rungs {
            for &s in sources(arg) {
                jobs.push((t, n, s));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(t, n, s)| {
            let p = block_params(cfg, n, t);
            (t, n, s, label_sweep(&p, s, &[p.p_theta]).map(|mut v| v.pop().unwrap()))
        })
        .collect()
}

/// Temperature at which the phonon rate reaches `ratio · P̃`.
fn ratio_temperature(cfg: &RunConfig, ratio: f64) -> f64 {
    let m = &cfg.thermal;
    m.t_prime - ((1.0 / ratio - 1.0) / m.a).ln() / m.b
}

pub fn cmd_blocks(ctx: &Context, args: &BlocksArgs) -> Result<Report, CliError> {
    let cfg = ctx.config;
    let sweep = block_sweep(cfg, &args.n.0, args.source);
    let mut report = Report { rows: sweep.len(), ..Default::default() };
    let mut csv = ctx.csv("blocks", &[], &["T_K", "n", "label", "omega_meV", "Gamma_meV", "source", "region", "ambiguous"]);
    // mean (−,−) frequency over rungs n >= 2, per temperature and source
    let mut resonance: Vec<(f64, Source, f64, usize)> = Vec::new();
    for (t, n, source, e) in &sweep {
        let e = match e {
            Ok(e) => e,
            Err(err) => {
                report.failures.push(Failure {
                    command: "blocks",
                    key: format!("T={t};n={n};source={}", source.as_str()),
                    message: err.to_string(),
                });
                continue;
            }
        };
        let omega_c = cfg.thermal.cavity_energy(*t);
        let region = cfg.thermal.region_at(*t).as_str();
        for b in Branch::ALL {
            let Some(l) = e.lambda(b) else { continue };
            csv.row(&[
                sci(*t),
                n.to_string(),
                b.as_str().into(),
                sci(omega_c + l.im),
                sci(l.re),
                source.as_str().into(),
                region.into(),
                e.ambiguous.to_string(),
            ]);
        }
        if *n >= 2 {
            let w = omega_c + e.omega(Branch::MinusMinus).unwrap();
            match resonance.iter_mut().find(|r| r.0 == *t && r.1 == *source) {
                Some(r) => {
                    r.2 += w;
                    r.3 += 1;
                }
                None => resonance.push((*t, *source, w, 1)),
            }
        }
    }
    report.files.push(csv.write(ctx.out, "blocks.csv")?);

    let mut agg = ctx.csv(
        "blocks",
        &["mean (-,-) transition frequency over rungs n >= 2; n = 1 excluded".into()],
        &["T_K", "source", "omega_resonance_meV", "rungs"],
    );
    for (t, s, sum, count) in &resonance {
        agg.row(&[sci(*t), s.as_str().into(), sci(sum / *count as f64), count.to_string()]);
    }
    report.files.push(agg.write(ctx.out, "blocks_resonance.csv")?);

    let mut regions = ctx.csv("blocks", &[], &["boundary", "p_ratio", "T_K"]);
    for (name, r) in [("I/II", REGION_II_RATIO), ("II/III", REGION_III_RATIO)] {
        regions.row(&[name.into(), sci(r), sci(ratio_temperature(cfg, r))]);
    }
    report.files.push(regions.write(ctx.out, "regions.csv")?);
    Ok(report)
}

/// One cell of the exceptional-point map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpRow {
    pub n: usize,
    pub delta_over_g: f64,
    /// Location of the coalescence, or of the gap minimum when there is none.
    pub p_crit_over_g: f64,
    /// meV from the cavity.
    pub omega_at_ep: f64,
    pub residual_gap: f64,
    pub parallelism: f64,
    pub is_ep: bool,
}

pub fn ep_rows(cfg: &RunConfig, rungs: &[usize], deltas_over_g: &[f64]) -> Vec<(usize, f64, Result<EpRow, Error>)> {
    let g = cfg.system.g;
    let hi = cfg.subspace.ep_search_max_over_g * g;
    let jobs: Vec<(usize, f64)> = rungs.iter().flat_map(|&n| deltas_over_g.iter().map(move |&d| (n, d))).collect();
    jobs.into_par_iter()
        .map(|(n, d)| {
            let p = SubspaceParams {
                n,
                g,
                kappa: cfg.subspace.kappa_over_g * g,
                gamma_x: cfg.subspace.gamma_x_over_g * g,
                p_theta: 0.0,
                delta: d * g,
            };
            let row = match exceptional_point(&p, 0.0, hi) {
                Ok(ep) => Ok(EpRow {
                    n,
                    delta_over_g: d,
                    p_crit_over_g: ep.p_crit / g,
                    omega_at_ep: ep.omega_at_ep,
                    residual_gap: ep.residual_gap,
                    parallelism: ep.parallelism,
                    is_ep: true,
                }),
                Err(Error::AvoidedCrossing(m)) => Ok(EpRow {
                    n,
                    delta_over_g: d,
                    p_crit_over_g: m.p_theta / g,
                    omega_at_ep: m.omega,
                    residual_gap: m.gap,
                    parallelism: m.parallelism,
                    is_ep: false,
                }),
                Err(e) => Err(e),
            };
            (n, d, row)
        })
        .collect()
}

pub fn cmd_ep_map(ctx: &Context, args: &EpMapArgs) -> Result<Report, CliError> {
    if let Some(gamma) = args.toy_gamma {
        return toy_ep(ctx, gamma);
    }
    let rows = ep_rows(ctx.config, &args.n.0, &args.delta_grid.values());
    let mut report = Report { rows: rows.len(), ..Default::default() };
    let mut csv = ctx.csv(
        "ep-map",
        &["status no_ep: no coalescence; P_crit and omega are those of the gap minimum".into()],
        &["n", "Delta_over_g", "P_crit_over_g", "omega_at_ep_meV", "residual_gap", "parallelism", "status"],
    );
    for (n, d, row) in rows {
        match row {
            Ok(r) => csv.row(&[
                n.to_string(),
                sci(d),
                sci(r.p_crit_over_g),
                sci(r.omega_at_ep),
                sci(r.residual_gap),
                sci(r.parallelism),
                if r.is_ep { "ep" } else { "no_ep" }.into(),
            ]),
            Err(e) => {
                let nan = sci(f64::NAN);
                csv.row(&[n.to_string(), sci(d), nan.clone(), nan.clone(), nan.clone(), nan, "failed".into()]);
                report.failures.push(Failure {
                    command: "ep-map",
                    key: format!("n={n};Delta_over_g={d}"),
                    message: e.to_string(),
                });
            }
        }
    }
    report.files.push(csv.write(ctx.out, "ep_map.csv")?);
    Ok(report)
}

fn toy_ep(ctx: &Context, gamma: f64) -> Result<Report, CliError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CliError::Config(format!("--toy-gamma: must be > 0, got {gamma}")));
    }
    let mut csv = ctx.csv(
        "ep-map",
        &["toy problem [[0, x], [x, i*gamma]]".into()],
        &["gamma", "x_crit", "residual_gap", "parallelism", "status"],
    );
    let (x, gap, par, status) = match toy_exceptional_point(gamma, 0.0, 2.0 * gamma) {
        Ok(m) => (m.p_theta, m.gap, m.parallelism, "ep"),
        Err(Error::AvoidedCrossing(m)) => (m.p_theta, m.gap, m.parallelism, "no_ep"),
        Err(e) => return Err(CliError::Numerical(format!("ep-map toy: {e}"))),
    };
    csv.row(&[sci(gamma), sci(x), sci(gap), sci(par), status.into()]);
    Ok(Report { files: vec![csv.write(ctx.out, "ep_toy.csv")?], rows: 1, failures: Vec::new() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientRow {
    pub p_theta_over_g: f64,
    pub n: usize,
    pub c00_sq: f64,
    pub c11_sq: f64,
    pub ambiguous: bool,
}

/// Bare-state weights of the `(−,−)` branch along the phonon-rate grid.
pub fn coefficient_rows(cfg: &RunConfig, rungs: &[usize], p_over_g: &[f64]) -> Vec<(usize, Result<Vec<CoefficientRow>, Error>)> {
    let g = cfg.system.g;
    rungs
        .par_iter()
        .map(|&n| {
            let p = SubspaceParams {
                n,
                g,
                kappa: cfg.subspace.kappa_over_g * g,
                gamma_x: cfg.subspace.gamma_x_over_g * g,
                p_theta: 0.0,
                delta: cfg.subspace.coefficients_delta_over_g * g,
            };
            let grid: Vec<f64> = p_over_g.iter().map(|x| x * g).collect();
            let rows = label_sweep(&p, Source::Oracle, &grid).and_then(|sweep| {
                sweep
                    .iter()
                    .zip(p_over_g)
                    .map(|(e, &x)| {
                        let c = bare_coefficients(e, Branch::MinusMinus)?;
                        Ok(CoefficientRow {
                            p_theta_over_g: x,
                            n,
                            c00_sq: c.c00_sq(),
                            c11_sq: c.c11_sq(),
                            ambiguous: e.ambiguous,
                        })
                    })
                    .collect()
            });
            (n, rows)
        })
        .collect()
}

pub fn cmd_coefficients(ctx: &Context, args: &CoefficientsArgs) -> Result<Report, CliError> {
    let grid = args.p_grid.values();
    if grid[0] < 0.0 {
        return Err(CliError::Config("--p-grid: phonon rates must be >= 0".into()));
    }
    let rows = coefficient_rows(ctx.config, &args.n.0, &grid);
    let mut report = Report { rows: rows.len(), ..Default::default() };
    let mut csv = ctx.csv(
        "coefficients",
        &[format!("branch=(-,-); Delta_over_g={}", sci(ctx.config.subspace.coefficients_delta_over_g))],
        &["P_theta_over_g", "n", "C00_sq", "C11_sq", "ambiguous"],
    );
    for (n, r) in rows {
        match r {
            Ok(rows) => {
                for r in rows {
                    csv.row(&[sci(r.p_theta_over_g), r.n.to_string(), sci(r.c00_sq), sci(r.c11_sq), r.ambiguous.to_string()]);
                }
            }
            Err(e) => report.failures.push(Failure { command: "coefficients", key: format!("n={n}"), message: e.to_string() }),
        }
    }
    report.files.push(csv.write(ctx.out, "coefficients.csv")?);
    Ok(report)
}

/// Runs the commands named in `outputs.figures` with default arguments.
pub fn cmd_all(ctx: &Context, spectra: SpectraArgs) -> Result<Report, CliError> {
    let mut report = Report::default();
    for fig in &ctx.config.outputs.figures {
        let r = match fig.as_str() {
            "spectra" => cmd_spectra(ctx, spectra)?,
            "peaks" => cmd_peaks(ctx)?,
            "blocks" => cmd_blocks(ctx, &BlocksArgs::default())?,
            "ep_map" => cmd_ep_map(ctx, &EpMapArgs::default())?,
            "coefficients" => cmd_coefficients(ctx, &CoefficientsArgs::default())?,
            other => return Err(CliError::Config(format!("outputs.figures: unknown figure `{other}`"))),
        };
        report.merge(r);
    }
    Ok(report)
}

pub fn failures_csv(ctx: &Context, failures: &[Failure]) -> Csv {
    let mut csv = ctx.csv("failures", &[], &["command", "key", "message"]);
    for f in failures {
        csv.row(&[f.command.into(), text_field(&f.key), text_field(&f.message)]);
    }
    csv
}
