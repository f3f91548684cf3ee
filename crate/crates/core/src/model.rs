//! Physical parameters, basis layout and the ground-state container.
//!
//! Spin projections are half-integers when the atom number is odd, so every
//! `m` is carried as the exact integer `2m` and only converted to `f64` when a
//! matrix element is evaluated.

use crate::error::{Error, Result};

/// Largest basis dimension any builder accepts unless told otherwise.
pub const DEFAULT_DIMENSION_CEILING: usize = 2_000_000;

/// Dicke model constants with `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Field frequency.
    pub omega: f64,
    /// Atomic level splitting.
    pub omega0: f64,
    /// Number of two-level atoms; the pseudospin length is `n_atoms / 2`.
    pub n_atoms: u32,
    /// Atom-field coupling.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(omega: f64, omega0: f64, n_atoms: u32, gamma: f64) -> Result<Self> {
        let p = Self {
            omega,
            omega0,
            n_atoms,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant parameters `omega = omega0 = 1`.
    pub fn resonant(n_atoms: u32, gamma: f64) -> Result<Self> {
        Self::new(1.0, 1.0, n_atoms, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be non-negative and finite, got {}",
                self.omega0
            )));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be non-negative and finite, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, self.n_atoms, gamma)
    }

    /// Pseudospin length `j = n_atoms / 2`.
    pub fn j(&self) -> f64 {
        f64::from(self.n_atoms) / 2.0
    }

    /// `2j`, exact.
    pub fn twice_j(&self) -> i64 {
        i64::from(self.n_atoms)
    }

    /// Thermodynamic-limit critical coupling `sqrt(omega * omega0) / 2`.
    pub fn critical_coupling(&self) -> f64 {
        critical_coupling(self.omega, self.omega0)
    }
}

pub fn critical_coupling(omega: f64, omega0: f64) -> f64 {
    (omega * omega0).sqrt() / 2.0
}

/// One state `|N; j, m>` of the displaced-boson basis: `N` excitations of the
/// shifted mode and `J_x = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EcsIndex {
    pub n_exc: usize,
    pub twice_m: i64,
}

impl EcsIndex {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// Index layout of a truncated basis: `m` is the outer (slow) index running
/// from `-j` to `j`, `N` the inner index running from `0` to `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisLayout {
    pub n_atoms: u32,
    pub n_max: usize,
}

impl BasisLayout {
    pub fn new(n_atoms: u32, n_max: usize) -> Result<Self> {
        Self::with_ceiling(n_atoms, n_max, DEFAULT_DIMENSION_CEILING)
    }

    pub fn with_ceiling(n_atoms: u32, n_max: usize, ceiling: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        let dim = (n_max as u128 + 1) * (u128::from(n_atoms) + 1);
        if dim > ceiling as u128 {
            return Err(Error::DimensionCeiling {
                requested: usize::try_from(dim).unwrap_or(usize::MAX),
                ceiling,
            });
        }
        Ok(Self { n_atoms, n_max })
    }

    /// Number of `m` values, `2j + 1`.
    pub fn m_count(&self) -> usize {
        self.n_atoms as usize + 1
    }

    /// Size of one `m` block, `n_max + 1`.
    pub fn block_len(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.m_count() * self.block_len()
    }

    /// Position of `m` in the outer ordering (0 for `m = -j`).
    pub fn m_slot(&self, twice_m: i64) -> Option<usize> {
        let tj = i64::from(self.n_atoms);
        if twice_m < -tj || twice_m > tj || (twice_m + tj) % 2 != 0 {
            return None;
        }
        Some(((twice_m + tj) / 2) as usize)
    }

    pub fn twice_m_of_slot(&self, slot: usize) -> i64 {
        2 * slot as i64 - i64::from(self.n_atoms)
    }

    pub fn index_of(&self, idx: EcsIndex) -> Option<usize> {
        if idx.n_exc > self.n_max {
            return None;
        }
        self.m_slot(idx.twice_m)
            .map(|slot| slot * self.block_len() + idx.n_exc)
    }

    pub fn at(&self, k: usize) -> EcsIndex {
        let slot = k / self.block_len();
        EcsIndex {
            n_exc: k % self.block_len(),
            twice_m: self.twice_m_of_slot(slot),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = EcsIndex> + '_ {
        (0..self.dim()).map(move |k| self.at(k))
    }
}

/// Enumerates the basis in storage order.
pub fn basis_enumerate(n_atoms: u32, n_max: usize) -> Result<Vec<EcsIndex>> {
    let layout = BasisLayout::new(n_atoms, n_max)?;
    Ok(layout.iter().collect())
}

/// Diagnostics carried alongside a solved state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveInfo {
    pub iterations: usize,
    pub residual: f64,
    /// Distance to the next eigenvalue of the solved operator, when known.
    pub gap: Option<f64>,
    pub degenerate: bool,
    pub dense: bool,
}

/// Ground state expanded over a truncated displaced-boson basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    coeffs: Vec<f64>,
    pub energy: f64,
    pub n_max: usize,
    pub params: ModelParams,
    pub info: SolveInfo,
}

/// Relative tolerance under which two magnitudes count as tied when choosing
/// the phase-fixing coefficient.
const PHASE_TIE_TOL: f64 = 1e-9;

impl WaveFunction {
    /// Normalizes `coeffs` and flips the global sign so that the first
    /// coefficient of (near-)largest magnitude is positive.
    pub fn new(
        params: ModelParams,
        n_max: usize,
        mut coeffs: Vec<f64>,
        energy: f64,
        info: SolveInfo,
    ) -> Result<Self> {
        let layout = BasisLayout::new(params.n_atoms, n_max)?;
        if coeffs.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                layout.dim(),
                coeffs.len()
            )));
        }
        normalize_and_fix_phase(&mut coeffs)?;
        Ok(Self {
            coeffs,
            energy,
            n_max,
            params,
            info,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn layout(&self) -> BasisLayout {
        BasisLayout {
            n_atoms: self.params.n_atoms,
            n_max: self.n_max,
        }
    }

    pub fn coeff(&self, n_exc: usize, twice_m: i64) -> f64 {
        self.layout()
            .index_of(EcsIndex { n_exc, twice_m })
            .map_or(0.0, |k| self.coeffs[k])
    }

    /// Same state embedded in a basis with a larger truncation (new
    /// components are zero).
    pub fn zero_extended(&self, n_max: usize) -> Result<Self> {
        if n_max < self.n_max {
            return Err(Error::DimensionMismatch(format!(
                "cannot extend n_max {} down to {}",
                self.n_max, n_max
            )));
        }
        let src = self.layout();
        let dst = BasisLayout::new(self.params.n_atoms, n_max)?;
        let mut out = vec![0.0; dst.dim()];
        for slot in 0..src.m_count() {
            let from = slot * src.block_len();
            let to = slot * dst.block_len();
            out[to..to + src.block_len()].copy_from_slice(&self.coeffs[from..from + src.block_len()]);
        }
        Ok(Self {
            coeffs: out,
            energy: self.energy,
            n_max,
            params: self.params,
            info: self.info,
        })
    }
}

pub(crate) fn normalize_and_fix_phase(v: &mut [f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidParameter(
            "state vector has zero or non-finite norm".into(),
        ));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    let largest = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let pivot = v
        .iter()
        .position(|x| x.abs() >= largest * (1.0 - PHASE_TIE_TOL))
        .expect("non-empty vector");
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(())
}
