//! Coupling sweeps at fixed atom number and location of the fidelity minimum
//! / susceptibility maximum.
//!
//! The grid is `gamma_k = gamma_start + k * dgamma` for `k = 0..=K` with
//! `K = round((gamma_end - gamma_start) / dgamma)`. Row `k < K` pairs
//! `psi(gamma_k)` with `psi(gamma_{k+1})`, so every grid state is solved once
//! and the sweep yields `K` points.

use rayon::prelude::*;

use crate::ecs::{ground_state_ecs_with, GroundStateOptions};
use crate::error::{Error, Result};
use crate::model::{ModelParams, WaveFunction};
use crate::observables::{excitation_distribution, fidelity, susceptibility_from_fidelity, ScanPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub gamma_start: f64,
    pub gamma_end: f64,
    /// Grid step, also the fidelity increment.
    pub dgamma: f64,
    pub n_max: usize,
    /// Golden-section refinement of the susceptibility peak.
    pub refine: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub ground: GroundStateOptions,
}

impl SweepConfig {
    pub fn new(gamma_start: f64, gamma_end: f64, dgamma: f64, n_max: usize) -> Result<Self> {
        let c = Self {
            gamma_start,
            gamma_end,
            dgamma,
            n_max,
            refine: false,
            workers: None,
            ground: GroundStateOptions::default(),
        };
        c.validate()?;
        Ok(c)
    }

    /// The production grid: `0.5..0.6` in steps of
    /// `0.001` with `n_max = 8`.
    pub fn standard() -> Self {
        Self::new(0.5, 0.6, 0.001, 8).expect("valid constants")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma_start, self.gamma_end, self.dgamma]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("sweep bounds must be finite".into()));
        }
        if self.gamma_start < 0.0 {
            return Err(Error::InvalidParameter("gamma_start must be non-negative".into()));
        }
        if !(self.gamma_start < self.gamma_end) {
            return Err(Error::InvalidParameter(format!(
                "gamma_start {} must be below gamma_end {}",
                self.gamma_start, self.gamma_end
            )));
        }
        if !(self.dgamma > 0.0) {
            return Err(Error::InvalidParameter("dgamma must be positive".into()));
        }
        // relative slack so that 0.0..0.01 with dgamma 0.001 passes
        if self.dgamma > (self.gamma_end - self.gamma_start) / 10.0 * (1.0 + 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "dgamma {} exceeds a tenth of the range",
                self.dgamma
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of sweep rows `K`.
    pub fn steps(&self) -> usize {
        ((self.gamma_end - self.gamma_start) / self.dgamma).round() as usize
    }

    pub fn gamma_at(&self, k: usize) -> f64 {
        self.gamma_start + k as f64 * self.dgamma
    }
}

/// Located precursor of the transition for one atom number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub n_atoms: u32,
    pub gamma_max: f64,
    pub f_min: f64,
    pub chi_max: f64,
    pub delta_p_peak_gamma: f64,
    /// A degenerate point next to the extremum was excluded from the search.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub n_atoms: u32,
    pub points: Vec<ScanPoint>,
    /// `(gamma, message)` for every grid state whose solve failed.
    pub failures: Vec<(f64, String)>,
}

impl SweepResult {
    pub fn into_points(self) -> Result<Vec<ScanPoint>> {
        match self.failures.first() {
            None => Ok(self.points),
            Some((g, msg)) => Err(Error::SweepFailed {
                failed: self.failures.len(),
                first: format!("gamma = {g}: {msg}"),
            }),
        }
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solves every grid state and assembles the scan. `base.gamma` is ignored.
pub fn run_sweep(base: &ModelParams, config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    base.validate()?;
    let k_max = config.steps();
    let states: Vec<Result<WaveFunction>> = in_pool(config.workers, || {
        (0..=k_max)
            .into_par_iter()
            .map(|k| {
                let p = base.with_gamma(config.gamma_at(k))?;
                ground_state_ecs_with(&p, config.n_max, &config.ground)
            })
            .collect()
    })?;

    let mut failures = Vec::new();
    for (k, s) in states.iter().enumerate() {
        if let Err(e) = s {
            failures.push((config.gamma_at(k), e.to_string()));
        }
    }
    let mut points = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let gamma = config.gamma_at(k);
        let point = match (&states[k], &states[k + 1]) {
            (Ok(a), Ok(b)) => {
                let f = fidelity(a, b)?;
                ScanPoint {
                    gamma,
                    fidelity: f,
                    chi_f: susceptibility_from_fidelity(f, config.dgamma)?,
                    delta_p: excitation_distribution(a).delta_p,
                    energy: a.energy,
                    degenerate: a.info.degenerate || b.info.degenerate,
                    failed: false,
                }
            }
            _ => ScanPoint::failed_at(gamma),
        };
        points.push(point);
    }
    Ok(SweepResult {
        n_atoms: base.n_atoms,
        points,
        failures,
    })
}

fn argmax_by(points: &[ScanPoint], key: impl Fn(&ScanPoint) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.is_clean() {
            continue;
        }
        let v = key(p);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Grid extremum of the susceptibility, cross-checked against the fidelity
/// minimum.
pub fn locate_critical(n_atoms: u32, points: &[ScanPoint]) -> Result<CriticalPoint> {
    let clean = points.iter().filter(|p| p.is_clean()).count();
    if clean < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 usable sweep points, got {clean}"
        )));
    }
    let i_chi = argmax_by(points, |p| p.chi_f).expect("clean points exist");
    let i_f = argmax_by(points, |p| -p.fidelity).expect("clean points exist");
    let first_clean = points.iter().position(|p| p.is_clean()).expect("clean");
    let last_clean = points.iter().rposition(|p| p.is_clean()).expect("clean");
    if i_chi == first_clean || i_chi == last_clean {
        return Err(Error::Boundary {
            gamma: points[i_chi].gamma,
        });
    }
    if i_chi.abs_diff(i_f) > 1 {
        return Err(Error::Inconsistent {
            fidelity_gamma: points[i_f].gamma,
            chi_gamma: points[i_chi].gamma,
        });
    }
    let i_dp = argmax_by(points, |p| p.delta_p).expect("clean points exist");
    let flagged = points[i_chi.saturating_sub(1)..=(i_chi + 1).min(points.len() - 1)]
        .iter()
        .any(|p| p.degenerate);
    Ok(CriticalPoint {
        n_atoms,
        gamma_max: points[i_chi].gamma,
        f_min: points[i_f].fidelity,
        chi_max: points[i_chi].chi_f,
        delta_p_peak_gamma: points[i_dp].gamma,
        flagged,
    })
}

/// Sweep followed by [`locate_critical`] and, if configured, refinement.
pub fn sweep_and_locate(
    base: &ModelParams,
    config: &SweepConfig,
) -> Result<(Vec<ScanPoint>, CriticalPoint)> {
    let points = run_sweep(base, config)?.into_points()?;
    let mut cp = locate_critical(base.n_atoms, &points)?;
    if config.refine {
        cp = refine_critical(base, config, &cp)?;
    }
    Ok((points, cp))
}

fn chi_at(base: &ModelParams, config: &SweepConfig, gamma: f64) -> Result<(f64, f64)> {
    let a = ground_state_ecs_with(&base.with_gamma(gamma)?, config.n_max, &config.ground)?;
    let b = ground_state_ecs_with(
        &base.with_gamma(gamma + config.dgamma)?,
        config.n_max,
        &config.ground,
    )?;
    let f = fidelity(&a, &b)?;
    Ok((susceptibility_from_fidelity(f, config.dgamma)?, f))
}

/// Golden-section search for the susceptibility maximum inside one grid step
/// either side of the coarse peak, until the bracket is narrower than
/// `dgamma / 10`.
pub fn refine_critical(
    base: &ModelParams,
    config: &SweepConfig,
    coarse: &CriticalPoint,
) -> Result<CriticalPoint> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (coarse.gamma_max - config.dgamma).max(0.0);
    let mut hi = coarse.gamma_max + config.dgamma;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = chi_at(base, config, x1)?;
    let mut f2 = chi_at(base, config, x2)?;
    while hi - lo >= config.dgamma / 10.0 {
        if f1.0 > f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = chi_at(base, config, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = chi_at(base, config, x2)?;
        }
    }
    let (gamma, (chi, f)) = if f1.0 > f2.0 { (x1, f1) } else { (x2, f2) };
    let mut out = *coarse;
    if chi > coarse.chi_max {
        out.gamma_max = gamma;
        out.chi_max = chi;
        out.f_min = f;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(gammas: &[f64], chi: impl Fn(f64) -> f64) -> Vec<ScanPoint> {
        gammas
            .iter()
            .map(|&g| {
                let c = chi(g);
                ScanPoint {
                    gamma: g,
                    fidelity: 1.0 - c * 1e-6 / 2.0,
                    chi_f: c,
                    delta_p: c,
                    energy: 0.0,
                    degenerate: false,
                    failed: false,
                }
            })
            .collect()
    }

    fn grid(start: f64, step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| start + k as f64 * step).collect()
    }

    #[test]
    fn config_invariants() {
        assert!(SweepConfig::new(0.6, 0.5, 0.001, 8).is_err());
        assert!(SweepConfig::new(0.5, 0.6, 0.0, 8).is_err());
        assert!(SweepConfig::new(0.5, 0.6, 0.02, 8).is_err());
        assert!(SweepConfig::new(0.0, 0.01, 0.001, 8).is_ok());
        let c = SweepConfig::standard();
        assert_eq!(c.steps(), 100);
        assert_eq!(c.gamma_at(0), 0.5);
        assert!((c.gamma_at(23) - 0.523).abs() < 1e-15);
    }

    #[test]
    fn parabola_peak() {
        let g = grid(0.5, 0.001, 60);
        let pts = synthetic(&g, |x| 1.0 - (x - 0.52).powi(2));
        let cp = locate_critical(7, &pts).unwrap();
        assert!((cp.gamma_max - 0.52).abs() < 1e-12);
        assert_eq!(cp.n_atoms, 7);
        assert!((cp.chi_max - 1.0).abs() < 1e-12);
        assert!((cp.delta_p_peak_gamma - 0.52).abs() < 1e-12);
    }

    #[test]
    fn boundary_peak_is_an_error() {
        let g = grid(0.5, 0.001, 20);
        let pts = synthetic(&g, |x| -x);
        assert!(matches!(locate_critical(1, &pts), Err(Error::Boundary { .. })));
        let pts = synthetic(&g, |x| x);
        assert!(matches!(locate_critical(1, &pts), Err(Error::Boundary { .. })));
    }

    #[test]
    fn too_few_points() {
        let pts = synthetic(&grid(0.5, 0.001, 4), |x| x);
        assert!(locate_critical(1, &pts).is_err());
    }

    #[test]
    fn disagreeing_extrema_rejected() {
        let g = grid(0.5, 0.001, 20);
        let mut pts = synthetic(&g, |x| 1.0 - (x - 0.505).powi(2));
        pts[15].fidelity = 0.0;
        assert!(matches!(
            locate_critical(1, &pts),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn degenerate_points_are_skipped() {
        let g = grid(0.5, 0.001, 20);
        let mut pts = synthetic(&g, |x| 1.0 - (x - 0.51).powi(2));
        pts[10].degenerate = true;
        pts[10].chi_f = 1e9;
        pts[10].fidelity = 0.0;
        let cp = locate_critical(1, &pts).unwrap();
        assert!((cp.gamma_max - 0.51).abs() > 1e-4);
        assert!(cp.flagged);
    }

    #[test]
    fn deep_normal_phase_has_no_interior_peak() {
        let base = ModelParams::resonant(2, 0.0).unwrap();
        let cfg = SweepConfig::new(0.0, 0.1, 0.01, 6).unwrap();
        let pts = run_sweep(&base, &cfg).unwrap().into_points().unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!(p.fidelity > 0.9999, "{p:?}");
            assert!(p.chi_f < 1.0);
        }
        // susceptibility grows monotonically towards the crossover
        assert!(matches!(
            locate_critical(2, &pts),
            Err(Error::Boundary { .. })
        ));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let base = ModelParams::resonant(20, 0.0).unwrap();
        let mut cfg = SweepConfig::new(0.5, 0.6, 0.01, 6).unwrap();
        cfg.workers = Some(1);
        let a = run_sweep(&base, &cfg).unwrap();
        cfg.workers = Some(3);
        let b = run_sweep(&base, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_stays_within_one_step() {
        let base = ModelParams::resonant(40, 0.0).unwrap();
        let mut cfg = SweepConfig::new(0.5, 0.7, 0.005, 8).unwrap();
        cfg.refine = true;
        let (pts, cp) = sweep_and_locate(&base, &cfg).unwrap();
        let coarse = locate_critical(40, &pts).unwrap();
        assert!((cp.gamma_max - coarse.gamma_max).abs() <= cfg.dgamma + 1e-12);
        assert!(cp.chi_max >= coarse.chi_max);
    }
}
