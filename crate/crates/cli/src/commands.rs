use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use dicke_core::ecs::ground_state_ecs;
use dicke_core::fock::{
    cross_basis_overlap, fock_ground_state, fock_ground_state_converged, ORACLE_MAX_ATOMS,
};
use dicke_core::io::{
    format_collapse_csv, format_real, format_scan_csv, parse_n_list, parse_real_list,
    parse_scan_csv,
};
use dicke_core::observables::{delta_p_exact, excitation_distribution, ScanPoint};
use dicke_core::scaling::{
    build_collapse, collapse_spread, fit_chi_exponent, fit_fmin_quadratic, fit_gamma_exponent,
    ScalingFit,
};
use dicke_core::sweep::{locate_critical, refine_critical, run_sweep, CriticalPoint, SweepConfig};
use dicke_core::{critical_coupling, ModelParams};

use crate::args::{
    CollapseArgs, Criterion, ConvergeArgs, ExponentsArgs, ModelArgs, OracleArgs, OutputArgs, ScanArgs,
    SweepArgs,
};
use crate::config::{parse_scan_input, pick, resolve_workers, FileConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{FailedPoint, RunManifest, Timing};
use crate::plot;

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// The atom numbers of the reference finite-size campaign.
pub const DEFAULT_N_LIST: &str = "100,120,140,160,180,200,300,400,500,600,800,1000";
pub const ORACLE_ENERGY_TOL: f64 = 1e-9;
pub const ORACLE_OVERLAP_TOL: f64 = 1e-8;

/// Output directory, manifest and timers of one command invocation.
pub struct Run {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

impl Run {
    fn write(&mut self, name: &str, content: &str) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.push(path.clone());
        Ok(path)
    }

    fn time(&mut self, label: String, since: Instant) {
        self.manifest.timings.push(Timing {
            label,
            seconds: since.elapsed().as_secs_f64(),
        });
    }
}

fn execute<C: Serialize>(
    command: &str,
    out_dir: PathBuf,
    config: &C,
    body: impl FnOnce(&mut Run) -> CliResult<()>,
) -> CliResult<()> {
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let config = serde_json::to_value(config).map_err(|e| CliError::Io(e.to_string()))?;
    let mut run = Run {
        manifest: RunManifest::new(command, config),
        out_dir,
    };
    let start = Instant::now();
    let result = body(&mut run);
    run.manifest.total_seconds = start.elapsed().as_secs_f64();
    match &result {
        Ok(()) => run.manifest.status = "ok".into(),
        Err(e) => {
            run.manifest.status = "failed".into();
            run.manifest.error = Some(e.to_string());
        }
    }
    let path = RunManifest::path_in(&run.out_dir, command);
    run.manifest.write(&path)?;
    result
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    flag.or(file)
        .ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelSettings {
    pub omega: f64,
    pub omega0: f64,
}

impl ModelSettings {
    fn resolve(m: &ModelArgs, f: &FileConfig) -> CliResult<Self> {
        let s = Self {
            omega: pick(m.omega, f.omega, 1.0),
            omega0: pick(m.omega0, f.omega0, 1.0),
        };
        ModelParams::new(s.omega, s.omega0, 1, 0.0)?;
        Ok(s)
    }

    fn params_core(&self, n_atoms: u32) -> dicke_core::Result<ModelParams> {
        ModelParams::new(self.omega, self.omega0, n_atoms, 0.0)
    }

    fn params(&self, n_atoms: u32, gamma: f64) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.omega, self.omega0, n_atoms, gamma)?)
    }

    fn gamma_c(&self) -> f64 {
        critical_coupling(self.omega, self.omega0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSettings {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub dgamma: f64,
    pub nmax: usize,
    pub workers: usize,
    pub refine: bool,
}

impl SweepSettings {
    fn resolve(s: &SweepArgs, f: &FileConfig, env_workers: Option<&str>) -> CliResult<Self> {
        let std = SweepConfig::standard();
        let out = Self {
            gamma_min: pick(s.gamma_min, f.gamma_min, std.gamma_start),
            gamma_max: pick(s.gamma_max, f.gamma_max, std.gamma_end),
            dgamma: pick(s.dgamma, f.dgamma, std.dgamma),
            nmax: pick(s.nmax, f.nmax, std.n_max),
            workers: resolve_workers(env_workers, s.workers.or(f.workers))?,
            refine: s.refine || f.refine.unwrap_or(false),
        };
        out.config()?;
        Ok(out)
    }

    fn config_core(&self) -> dicke_core::Result<SweepConfig> {
        let mut c = SweepConfig::new(self.gamma_min, self.gamma_max, self.dgamma, self.nmax)?;
        c.refine = self.refine;
        c.workers = Some(self.workers);
        c.validate()?;
        Ok(c)
    }

    fn config(&self) -> CliResult<SweepConfig> {
        Ok(self.config_core()?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSettings {
    pub out: PathBuf,
    pub emit_plot: bool,
}

impl OutputSettings {
    fn resolve(o: &OutputArgs, f: &FileConfig) -> Self {
        Self {
            out: pick(o.out.clone(), f.out.clone(), PathBuf::from(".")),
            emit_plot: o.emit_plot || f.emit_plot.unwrap_or(false),
        }
    }
}

fn scan_file_name(n: u32) -> String {
    format!("scan_n{n}.csv")
}

/// Sweeps one atom number, writes its CSV and records failures. Failed
/// points are written as NaN rows before the error is returned.
fn sweep_one(
    run: &mut Run,
    model: &ModelSettings,
    sweep: &SweepSettings,
    n: u32,
) -> CliResult<Vec<ScanPoint>> {
    let start = Instant::now();
    let result = run_sweep(&model.params(n, 0.0)?, &sweep.config()?)?;
    run.time(format!("sweep N = {n}"), start);
    run.write(&scan_file_name(n), &format_scan_csv(&result.points))?;
    run.manifest.diagnostics.degenerate_points +=
        result.points.iter().filter(|p| p.degenerate).count();
    for (gamma, message) in &result.failures {
        run.manifest.diagnostics.failed_points.push(FailedPoint {
            n_atoms: n,
            gamma: *gamma,
            message: message.clone(),
        });
    }
    result
        .into_points()
        .map_err(|e| CliError::from(e).context(&format!("N = {n}")))
}

fn critical(
    run: &mut Run,
    model: &ModelSettings,
    sweep: &SweepSettings,
    n: u32,
    points: &[ScanPoint],
) -> dicke_core::Result<CriticalPoint> {
    let mut cp = locate_critical(n, points)?;
    if sweep.refine {
        let start = Instant::now();
        cp = refine_critical(&model.params_core(n)?, &sweep.config_core()?, &cp)?;
        run.time(format!("refine N = {n}"), start);
    }
    if cp.flagged {
        run.manifest.diagnostics.flagged.push(n);
    }
    Ok(cp)
}

fn at_n(n: u32) -> impl Fn(dicke_core::Error) -> CliError {
    move |e| CliError::Solver(format!("N = {n}: {e}"))
}

fn describe(cp: &CriticalPoint) -> String {
    format!(
        "N = {}: gamma_max = {}, F_min = {}, chi_max = {}, Delta P peak at {}{}",
        cp.n_atoms,
        cp.gamma_max,
        cp.f_min,
        cp.chi_max,
        cp.delta_p_peak_gamma,
        if cp.flagged { " (next to a degenerate point)" } else { "" }
    )
}

fn write_plots(run: &mut Run, scripts: Vec<(String, String)>) -> CliResult<()> {
    for (name, body) in scripts {
        run.write(&name, &body)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanResolved {
    n_atoms: u32,
    model: ModelSettings,
    sweep: SweepSettings,
    output: OutputSettings,
}

pub fn scan(args: &ScanArgs, file: &FileConfig, env_workers: Option<&str>) -> CliResult<()> {
    let cfg = ScanResolved {
        n_atoms: required(args.n_atoms, file.n_atoms, "n-atoms")?,
        model: ModelSettings::resolve(&args.model, file)?,
        sweep: SweepSettings::resolve(&args.sweep, file, env_workers)?,
        output: OutputSettings::resolve(&args.output, file),
    };
    cfg.model.params(cfg.n_atoms, 0.0)?;
    execute("scan", cfg.output.out.clone(), &cfg, |run| {
        let n = cfg.n_atoms;
        let points = sweep_one(run, &cfg.model, &cfg.sweep, n)?;
        if cfg.output.emit_plot {
            write_plots(run, plot::scan_scripts(&[(n, scan_file_name(n))]))?;
        }
        match critical(run, &cfg.model, &cfg.sweep, n, &points) {
            Ok(cp) => say!("{}", describe(&cp)),
            Err(e) => {
                let note = format!("no critical point located: {e}");
                say!("N = {n}: {note}");
                run.manifest.diagnostics.notes.push(note);
            }
        }
        say!("wrote {} rows to {}", points.len(), run.out_dir.join(scan_file_name(n)).display());
        Ok(())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub coefficients: Vec<f64>,
    pub exponent: Option<f64>,
    pub prefactor: f64,
    pub rsq: f64,
    pub residuals: Vec<f64>,
}

impl From<&ScalingFit> for FitReport {
    fn from(f: &ScalingFit) -> Self {
        Self {
            coefficients: f.coefficients.clone(),
            exponent: f.exponent,
            prefactor: f.prefactor(),
            rsq: f.rsq,
            residuals: f.residuals.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalReport {
    pub n_atoms: u32,
    pub gamma_max: f64,
    pub f_min: f64,
    pub chi_max: f64,
    pub delta_p_peak_gamma: f64,
    pub flagged: bool,
}

impl From<&CriticalPoint> for CriticalReport {
    fn from(c: &CriticalPoint) -> Self {
        Self {
            n_atoms: c.n_atoms,
            gamma_max: c.gamma_max,
            f_min: c.f_min,
            chi_max: c.chi_max,
            delta_p_peak_gamma: c.delta_p_peak_gamma,
            flagged: c.flagged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentsReport {
    pub gamma_c: f64,
    pub gamma_fit: FitReport,
    pub chi_fit: FitReport,
    pub fmin_fit: Option<FitReport>,
    pub fmin_note: Option<String>,
    pub critical_points: Vec<CriticalReport>,
}

pub const CRITICAL_HEADER: &str = "n_atoms,gamma_max,f_min,chi_max,delta_p_peak_gamma,flagged";

pub fn format_critical_csv(points: &[CriticalPoint]) -> String {
    let mut s = format!("{CRITICAL_HEADER}\n");
    for c in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.n_atoms,
            format_real(c.gamma_max),
            format_real(c.f_min),
            format_real(c.chi_max),
            format_real(c.delta_p_peak_gamma),
            u8::from(c.flagged)
        );
    }
    s
}

fn resolve_n_list(flag: Option<&String>, file: Option<&String>, default: Option<&str>) -> CliResult<Option<Vec<u32>>> {
    match flag.or(file).map(String::as_str).or(default) {
        None => Ok(None),
        Some(text) => Ok(Some(
            parse_n_list(text).map_err(|e| CliError::Usage(format!("--n-list: {e}")))?,
        )),
    }
}

#[derive(Serialize)]
struct ExponentsResolved {
    n_list: Vec<u32>,
    model: ModelSettings,
    sweep: SweepSettings,
    output: OutputSettings,
}

pub fn exponents(args: &ExponentsArgs, file: &FileConfig, env_workers: Option<&str>) -> CliResult<()> {
    let n_list = resolve_n_list(args.n_list.as_ref(), file.n_list.as_ref(), Some(DEFAULT_N_LIST))?
        .unwrap_or_default();
    if n_list.len() < 2 {
        return Err(CliError::Usage(
            "--n-list needs at least two atom numbers to fit".into(),
        ));
    }
    let cfg = ExponentsResolved {
        n_list,
        model: ModelSettings::resolve(&args.model, file)?,
        sweep: SweepSettings::resolve(&args.sweep, file, env_workers)?,
        output: OutputSettings::resolve(&args.output, file),
    };
    execute("exponents", cfg.output.out.clone(), &cfg, |run| {
        let mut criticals = Vec::new();
        let mut files = Vec::new();
        for &n in &cfg.n_list {
            let points = sweep_one(run, &cfg.model, &cfg.sweep, n)?;
            let cp = critical(run, &cfg.model, &cfg.sweep, n, &points).map_err(at_n(n))?;
            say!("{}", describe(&cp));
            criticals.push(cp);
            files.push((n, scan_file_name(n)));
        }
        let gamma_c = cfg.model.gamma_c();
        let gamma_fit = fit_gamma_exponent(&criticals, gamma_c)?;
        let chi_fit = fit_chi_exponent(&criticals)?;
        let (fmin_fit, fmin_note) = match fit_fmin_quadratic(&criticals) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let report = ExponentsReport {
            gamma_c,
            gamma_fit: (&gamma_fit).into(),
            chi_fit: (&chi_fit).into(),
            fmin_fit: fmin_fit.as_ref().map(Into::into),
            fmin_note: fmin_note.clone(),
            critical_points: criticals.iter().map(Into::into).collect(),
        };
        run.write("critical_points.csv", &format_critical_csv(&criticals))?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        run.write("exponents.json", &(json + "\n"))?;
        if cfg.output.emit_plot {
            write_plots(run, plot::scan_scripts(&files))?;
            write_plots(
                run,
                plot::exponent_scripts(
                    "critical_points.csv",
                    gamma_c,
                    Some(&gamma_fit),
                    fmin_fit.as_ref(),
                    Some(&chi_fit),
                ),
            )?;
        }
        say!(
            "gamma exponent = {} (prefactor {}, rsq {})",
            gamma_fit.exponent.unwrap_or(f64::NAN),
            gamma_fit.prefactor(),
            gamma_fit.rsq
        );
        say!(
            "chi exponent = {} (prefactor {}, rsq {})",
            chi_fit.exponent.unwrap_or(f64::NAN),
            chi_fit.prefactor(),
            chi_fit.rsq
        );
        match (&fmin_fit, &fmin_note) {
            (Some(f), _) => say!("log10 F_min quadratic = {:?} (rsq {})", f.coefficients, f.rsq),
            (None, Some(note)) => say!("log10 F_min quadratic skipped: {note}"),
            _ => {}
        }
        Ok(())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseReport {
    pub nu: f64,
    pub spread_width: f64,
    pub spread: f64,
    pub range: f64,
    pub relative_spread: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub skipped: Vec<(u32, f64)>,
    pub critical_points: Vec<CriticalReport>,
}

#[derive(Serialize)]
struct CollapseResolved {
    nu: f64,
    spread_width: f64,
    scans: Vec<(u32, PathBuf)>,
    n_list: Option<Vec<u32>>,
    model: ModelSettings,
    sweep: Option<SweepSettings>,
    output: OutputSettings,
}

fn load_scan(path: &Path) -> CliResult<Vec<ScanPoint>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read scan {}: {e}", path.display())))?;
    parse_scan_csv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn collapse(args: &CollapseArgs, file: &FileConfig, env_workers: Option<&str>) -> CliResult<()> {
    let scans = args
        .scans
        .iter()
        .map(|s| parse_scan_input(s))
        .collect::<CliResult<Vec<_>>>()?;
    let n_list = resolve_n_list(args.n_list.as_ref(), file.n_list.as_ref(), None)?;
    if scans.is_empty() && n_list.is_none() {
        return Err(CliError::Usage(
            "no sweep data: pass --scan N=path or --n-list".into(),
        ));
    }
    let nu = pick(args.nu, file.nu, 2.0 / 3.0);
    let spread_width = pick(args.spread_width, file.spread_width, 2.0);
    if !(nu > 0.0 && nu.is_finite()) || !(spread_width > 0.0 && spread_width.is_finite()) {
        return Err(CliError::Usage("--nu and --spread-width must be positive".into()));
    }
    let inline = scans.is_empty();
    let cfg = CollapseResolved {
        nu,
        spread_width,
        n_list: if inline { n_list } else { None },
        scans,
        model: ModelSettings::resolve(&args.model, file)?,
        sweep: if inline {
            Some(SweepSettings::resolve(&args.sweep, file, env_workers)?)
        } else {
            None
        },
        output: OutputSettings::resolve(&args.output, file),
    };
    execute("collapse", cfg.output.out.clone(), &cfg, |run| {
        let mut data: Vec<(u32, Vec<ScanPoint>)> = Vec::new();
        if let (Some(ns), Some(sweep)) = (&cfg.n_list, &cfg.sweep) {
            for &n in ns {
                data.push((n, sweep_one(run, &cfg.model, sweep, n)?));
            }
        } else {
            for (n, path) in &cfg.scans {
                if data.iter().any(|(m, _)| m == n) {
                    return Err(CliError::Usage(format!("N = {n} given twice")));
                }
                data.push((*n, load_scan(path)?));
            }
        }
        let mut criticals = Vec::new();
        for (n, points) in &data {
            let cp = match &cfg.sweep {
                Some(sweep) => critical(run, &cfg.model, sweep, *n, points),
                None => locate_critical(*n, points),
            }
            .map_err(at_n(*n))?;
            criticals.push(cp);
        }
        let col = build_collapse(&data, &criticals, cfg.nu)?;
        for (n, gamma) in &col.skipped {
            run.manifest
                .diagnostics
                .notes
                .push(format!("skipped N = {n}, gamma = {gamma}: zero or failed susceptibility"));
        }
        run.write("collapse.csv", &format_collapse_csv(&col.points))?;
        let spread = collapse_spread(&col.points, cfg.spread_width, 401)?;
        let report = CollapseReport {
            nu: cfg.nu,
            spread_width: cfg.spread_width,
            spread: spread.spread,
            range: spread.range,
            relative_spread: spread.relative,
            x_lo: spread.x_lo,
            x_hi: spread.x_hi,
            skipped: col.skipped.clone(),
            critical_points: criticals.iter().map(Into::into).collect(),
        };
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        run.write("collapse.json", &(json + "\n"))?;
        if cfg.output.emit_plot {
            let (name, body) = plot::collapse_script("collapse.csv", cfg.nu);
            run.write(&name, &body)?;
        }
        say!(
            "nu = {}: spread {} over range {} (relative {}) on x in [{}, {}]",
            cfg.nu, spread.spread, spread.range, spread.relative, spread.x_lo, spread.x_hi
        );
        Ok(())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderStep {
    pub n_max: usize,
    /// Top-layer weight of the solve at `n_max + 1`.
    pub delta_p: f64,
    /// `1 - |<psi(n_max)|psi(n_max + 1)>|`.
    pub delta_p_exact: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeReport {
    pub n_atoms: u32,
    pub gamma: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub n_max: Option<usize>,
    pub ladder: Vec<LadderStep>,
}

#[derive(Serialize)]
struct ConvergeResolved {
    n_atoms: u32,
    gamma: f64,
    tolerance: f64,
    criterion: Criterion,
    nmax_start: usize,
    nmax_ceiling: usize,
    model: ModelSettings,
    output: OutputSettings,
}

/// Raises the truncation from `start` until the precision estimate drops
/// below `tolerance`, or `ceiling` has been tried.
pub fn converge_ladder(
    params: &ModelParams,
    tolerance: f64,
    criterion: Criterion,
    start: usize,
    ceiling: usize,
) -> dicke_core::Result<ConvergeReport> {
    let mut ladder = Vec::new();
    let mut small = ground_state_ecs(params, start)?;
    let mut found = None;
    for n in start..=ceiling {
        let large = ground_state_ecs(params, n + 1)?;
        let step = LadderStep {
            n_max: n,
            delta_p: excitation_distribution(&large).delta_p,
            delta_p_exact: delta_p_exact(&small, &large)?,
            energy: small.energy,
        };
        let done = match criterion {
            Criterion::Exact => step.delta_p_exact < tolerance,
            Criterion::Bound => step.delta_p < tolerance,
        };
        ladder.push(step);
        if done {
            found = Some(n);
            break;
        }
        small = large;
    }
    Ok(ConvergeReport {
        n_atoms: params.n_atoms,
        gamma: params.gamma,
        tolerance,
        criterion,
        n_max: found,
        ladder,
    })
}

pub fn converge(args: &ConvergeArgs, file: &FileConfig) -> CliResult<()> {
    let cfg = ConvergeResolved {
        n_atoms: required(args.n_atoms, file.n_atoms, "n-atoms")?,
        gamma: required(args.gamma, file.gamma, "gamma")?,
        tolerance: pick(args.tolerance, file.tolerance, 1e-8),
        criterion: pick(args.criterion, file.criterion, Criterion::Exact),
        nmax_start: pick(args.nmax_start, file.nmax_start, 0),
        nmax_ceiling: pick(args.nmax_ceiling, file.nmax_ceiling, 40),
        model: ModelSettings::resolve(&args.model, file)?,
        output: OutputSettings::resolve(&args.output, file),
    };
    if !(cfg.tolerance > 0.0 && cfg.tolerance.is_finite()) {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    if cfg.nmax_ceiling < cfg.nmax_start {
        return Err(CliError::Usage("--nmax-ceiling is below --nmax-start".into()));
    }
    let params = cfg.model.params(cfg.n_atoms, cfg.gamma)?;
    execute("converge", cfg.output.out.clone(), &cfg, |run| {
        let start = Instant::now();
        let report = converge_ladder(&params, cfg.tolerance, cfg.criterion, cfg.nmax_start, cfg.nmax_ceiling)?;
        run.time("ladder".into(), start);
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        run.write("converge.json", &(json + "\n"))?;
        let mut csv = String::from("n_max,delta_p,delta_p_exact,energy\n");
        for s in &report.ladder {
            say!(
                "n_max = {}: Delta P = {:e} (exact {:e}), E = {}",
                s.n_max, s.delta_p, s.delta_p_exact, s.energy
            );
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                s.n_max,
                format_real(s.delta_p),
                format_real(s.delta_p_exact),
                format_real(s.energy)
            );
        }
        run.write("converge.csv", &csv)?;
        if cfg.output.emit_plot {
            let (name, body) = plot::converge_script("converge.csv");
            run.write(&name, &body)?;
        }
        match report.n_max {
            Some(n) => {
                say!("converged: n_max = {n} (tolerance {:e})", cfg.tolerance);
                Ok(())
            }
            None => Err(CliError::NotConverged(format!(
                "Delta P still above {:e} at n_max = {}",
                cfg.tolerance, cfg.nmax_ceiling
            ))),
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub gamma: f64,
    pub ecs_energy: f64,
    pub reference_energy: f64,
    pub energy_delta: f64,
    pub overlap: f64,
    pub photon_cutoff: usize,
    pub pass: bool,
}

#[derive(Serialize)]
struct OracleResolved {
    n_atoms: u32,
    gamma_list: Vec<f64>,
    cutoff: Option<usize>,
    nmax: usize,
    model: ModelSettings,
    output: OutputSettings,
}

/// One row of the cross-basis comparison.
pub fn oracle_row(params: &ModelParams, n_max: usize, cutoff: Option<usize>) -> dicke_core::Result<OracleRow> {
    let ecs = ground_state_ecs(params, n_max)?;
    let reference = match cutoff {
        Some(c) => fock_ground_state(params, c)?,
        None => fock_ground_state_converged(params)?,
    };
    let energy_delta = (ecs.energy - reference.energy).abs();
    let overlap = cross_basis_overlap(&reference, &ecs);
    Ok(OracleRow {
        gamma: params.gamma,
        ecs_energy: ecs.energy,
        reference_energy: reference.energy,
        energy_delta,
        overlap,
        photon_cutoff: reference.photon_cutoff,
        pass: energy_delta <= ORACLE_ENERGY_TOL && overlap >= 1.0 - ORACLE_OVERLAP_TOL,
    })
}

pub fn oracle_check(args: &OracleArgs, file: &FileConfig) -> CliResult<()> {
    let n_atoms = required(args.n_atoms, file.n_atoms, "n-atoms")?;
    if n_atoms > ORACLE_MAX_ATOMS {
        return Err(CliError::Usage(format!(
            "--n-atoms must be at most {ORACLE_MAX_ATOMS} for the reference solver"
        )));
    }
    let gamma_list = parse_real_list(
        args.gamma_list
            .as_deref()
            .or(file.gamma_list.as_deref())
            .unwrap_or("0,0.3,0.5,0.7"),
    )
    .map_err(|e| CliError::Usage(format!("--gamma-list: {e}")))?;
    let cfg = OracleResolved {
        n_atoms,
        gamma_list,
        cutoff: args.cutoff.or(file.cutoff),
        nmax: pick(args.nmax, file.nmax, 40),
        model: ModelSettings::resolve(&args.model, file)?,
        output: OutputSettings::resolve(&args.output, file),
    };
    for &g in &cfg.gamma_list {
        cfg.model.params(n_atoms, g)?;
    }
    execute("oracle-check", cfg.output.out.clone(), &cfg, |run| {
        let mut rows = Vec::new();
        for &g in &cfg.gamma_list {
            let start = Instant::now();
            let row = oracle_row(&cfg.model.params(cfg.n_atoms, g)?, cfg.nmax, cfg.cutoff)?;
            run.time(format!("gamma = {g}"), start);
            say!(
                "gamma = {}: |dE| = {:e}, overlap = {}, cutoff {} -> {}",
                row.gamma,
                row.energy_delta,
                row.overlap,
                row.photon_cutoff,
                if row.pass { "pass" } else { "FAIL" }
            );
            rows.push(row);
        }
        let json = serde_json::to_string_pretty(&rows).map_err(|e| CliError::Io(e.to_string()))?;
        run.write("oracle_check.json", &(json + "\n"))?;
        let failed = rows.iter().filter(|r| !r.pass).count();
        if failed > 0 {
            return Err(CliError::Failed(format!(
                "{failed} of {} couplings outside |dE| <= {ORACLE_ENERGY_TOL:e}, overlap >= 1 - {ORACLE_OVERLAP_TOL:e}",
                rows.len()
            )));
        }
        say!("all {} couplings agree", rows.len());
        Ok(())
    })
}
