//! Finite-size scaling: power-law fits of the critical-point data and the
//! specific-susceptibility collapse.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::observables::{specific_susceptibility, ScanPoint};
use crate::sweep::CriticalPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    /// `log10 y = c0 + c1 log10 N`.
    LinearLogLog,
    /// `log10 y = c0 + c1 N + c2 N^2`.
    QuadraticSemiLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub kind: FitKind,
    /// Polynomial coefficients, constant term first.
    pub coefficients: Vec<f64>,
    /// Power-law exponent for log-log fits.
    pub exponent: Option<f64>,
    pub rsq: f64,
    /// `y_i - fit(x_i)` in the fitted (logarithmic) coordinates.
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    /// `10^c0`, the prefactor of the power law.
    pub fn prefactor(&self) -> f64 {
        10f64.powf(self.coefficients[0])
    }
}

/// Ordinary least squares for a polynomial of the given degree. Columns are
/// scaled by `max |x|` before a QR solve and unscaled afterwards.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if x.len() != y.len() {
        return Err(Error::Fit("x and y lengths differ".into()));
    }
    let n = x.len();
    let cols = degree + 1;
    if n < cols {
        return Err(Error::Fit(format!(
            "{n} points cannot determine {cols} coefficients"
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let design = DMatrix::from_fn(n, cols, |i, j| (x[i] / scale).powi(j as i32));
    let rhs = DVector::from_column_slice(y);
    let qr = design.clone().qr();
    let r = qr.r();
    let rmax = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|i| r[(i, i)].abs() <= 1e-12 * rmax.max(1e-300)) {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }
    let qty = qr.q().transpose() * &rhs;
    let sol = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Fit("singular triangular factor".into()))?;
    let coefficients: Vec<f64> = (0..cols).map(|j| sol[j] / scale.powi(j as i32)).collect();
    let fitted = design * sol;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let rsq = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok((coefficients, residuals, rsq))
}

fn check_count(points: &[CriticalPoint], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(Error::InvalidParameter(format!(
            "fit needs at least {min} critical points, got {}",
            points.len()
        )));
    }
    Ok(())
}

fn log_n(points: &[CriticalPoint]) -> Vec<f64> {
    points.iter().map(|p| f64::from(p.n_atoms).log10()).collect()
}

fn loglog(x: Vec<f64>, y: Vec<f64>, sign: f64) -> Result<ScalingFit> {
    let (coefficients, residuals, rsq) = polyfit(&x, &y, 1)?;
    Ok(ScalingFit {
        kind: FitKind::LinearLogLog,
        exponent: Some(sign * coefficients[1]),
        coefficients,
        rsq,
        residuals,
    })
}

/// `log10(gamma_max - gamma_c)` against `log10 N`; exponent is minus the slope.
pub fn fit_gamma_exponent(points: &[CriticalPoint], gamma_c: f64) -> Result<ScalingFit> {
    check_count(points, 2)?;
    let y = points
        .iter()
        .map(|p| {
            let d = p.gamma_max - gamma_c;
            if d > 0.0 {
                Ok(d.log10())
            } else {
                Err(Error::Domain(format!(
                    "gamma_max {} is not above gamma_c {gamma_c} for N = {}",
                    p.gamma_max, p.n_atoms
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    loglog(log_n(points), y, -1.0)
}

/// `log10 chi_max` against `log10 N`; exponent is the slope.
pub fn fit_chi_exponent(points: &[CriticalPoint]) -> Result<ScalingFit> {
    check_count(points, 2)?;
    let y = points
        .iter()
        .map(|p| {
            if p.chi_max > 0.0 {
                Ok(p.chi_max.log10())
            } else {
                Err(Error::Domain(format!(
                    "chi_max {} is not positive for N = {}",
                    p.chi_max, p.n_atoms
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    loglog(log_n(points), y, 1.0)
}

/// Quadratic in `N` of `log10 F_min`.
pub fn fit_fmin_quadratic(points: &[CriticalPoint]) -> Result<ScalingFit> {
    check_count(points, 4)?;
    let x: Vec<f64> = points.iter().map(|p| f64::from(p.n_atoms)).collect();
    let y = points
        .iter()
        .map(|p| {
            if p.f_min > 0.0 {
                Ok(p.f_min.log10())
            } else {
                Err(Error::Domain(format!("F_min {} is not positive", p.f_min)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (coefficients, residuals, rsq) = polyfit(&x, &y, 2)?;
    Ok(ScalingFit {
        kind: FitKind::QuadraticSemiLog,
        coefficients,
        exponent: None,
        rsq,
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsePoint {
    pub n_atoms: u32,
    /// `N^nu (gamma - gamma_max)`.
    pub x: f64,
    /// Specific susceptibility `(chi_max - chi) / chi`.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub points: Vec<CollapsePoint>,
    /// `(n_atoms, gamma)` of points left out because `chi` was zero or the
    /// point had failed.
    pub skipped: Vec<(u32, f64)>,
}

/// Rescales every sweep onto the universal axes. `scans` and `criticals` are
/// matched by atom number.
pub fn build_collapse(
    scans: &[(u32, Vec<ScanPoint>)],
    criticals: &[CriticalPoint],
    nu: f64,
) -> Result<Collapse> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (n_atoms, scan) in scans {
        let cp = criticals
            .iter()
            .find(|c| c.n_atoms == *n_atoms)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no critical point for N = {n_atoms}"))
            })?;
        let stretch = f64::from(*n_atoms).powf(nu);
        for p in scan {
            if p.failed || p.chi_f == 0.0 {
                skipped.push((*n_atoms, p.gamma));
                continue;
            }
            let y = specific_susceptibility(cp.chi_max, p.chi_f)?;
            // exact zero at the pivot regardless of rounding in the product
            let x = if p.gamma == cp.gamma_max {
                0.0
            } else {
                stretch * (p.gamma - cp.gamma_max)
            };
            points.push(CollapsePoint {
                n_atoms: *n_atoms,
                x,
                y,
            });
        }
    }
    Ok(Collapse { points, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseSpread {
    /// Largest vertical distance between curves on the common grid.
    pub spread: f64,
    /// `max y - min y` over the common grid.
    pub range: f64,
    /// `spread / range` (0 when there is a single curve).
    pub relative: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

fn interpolate(curve: &[(f64, f64)], x: f64) -> f64 {
    let i = curve.partition_point(|p| p.0 < x);
    if i == 0 {
        return curve[0].1;
    }
    if i == curve.len() {
        return curve[curve.len() - 1].1;
    }
    let (x0, y0) = curve[i - 1];
    let (x1, y1) = curve[i];
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Vertical spread between per-`N` collapse curves, linearly interpolated on
/// `samples` evenly spaced abscissae over the part of `|x| <= half_width`
/// covered by every curve.
pub fn collapse_spread(points: &[CollapsePoint], half_width: f64, samples: usize) -> Result<CollapseSpread> {
    let mut curves: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for p in points {
        curves.entry(p.n_atoms).or_default().push((p.x, p.y));
    }
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no collapse points".into()));
    }
    let mut lo = -half_width;
    let mut hi = half_width;
    for c in curves.values_mut() {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        lo = lo.max(c[0].0);
        hi = hi.min(c[c.len() - 1].0);
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(
            "collapse curves share no common x range".into(),
        ));
    }
    let samples = samples.max(2);
    let mut spread = 0.0_f64;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in 0..samples {
        let x = lo + (hi - lo) * s as f64 / (samples - 1) as f64;
        let ys: Vec<f64> = curves.values().map(|c| interpolate(c, x)).collect();
        let top = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bottom = ys.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(top - bottom);
        y_min = y_min.min(bottom);
        y_max = y_max.max(top);
    }
    let range = y_max - y_min;
    Ok(CollapseSpread {
        spread,
        range,
        relative: if range > 0.0 { spread / range } else { 0.0 },
        x_lo: lo,
        x_hi: hi,
    })
}
