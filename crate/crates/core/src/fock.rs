//! Reference Hamiltonian in the plain photon-number ⊗ `J_z` product basis.
//!
//! Used only to validate the displaced-basis construction at small atom
//! numbers. Everything here is built from textbook ladder-operator matrix
//! elements and dense linear algebra; nothing is shared with [`crate::ecs`]
//! except the parameter type.

use nalgebra::DMatrix;

use crate::eigen::{lowest_eigenpair, Method, SolverConfig, SymmetricOperator};
use crate::error::{Error, Result};
use crate::model::{normalize_and_fix_phase, ModelParams, WaveFunction, DEFAULT_DIMENSION_CEILING};

/// Largest atom number the oracle accepts.
pub const ORACLE_MAX_ATOMS: u32 = 12;

/// Shift below which doubling the photon cutoff is considered converged.
pub const CUTOFF_ENERGY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockIndex {
    pub photons: usize,
    pub twice_mz: i64,
}

/// Index layout: `J_z` projection outer (from `-j`), photon number inner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockLayout {
    pub n_atoms: u32,
    pub photon_cutoff: usize,
}

impl FockLayout {
    pub fn block_len(&self) -> usize {
        self.photon_cutoff + 1
    }

    pub fn spin_count(&self) -> usize {
        self.n_atoms as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.block_len() * self.spin_count()
    }

    pub fn index(&self, photons: usize, spin_slot: usize) -> usize {
        spin_slot * self.block_len() + photons
    }

    pub fn at(&self, k: usize) -> FockIndex {
        FockIndex {
            photons: k % self.block_len(),
            twice_mz: 2 * (k / self.block_len()) as i64 - i64::from(self.n_atoms),
        }
    }
}

/// Symmetric matrix stored as its diagonal plus strictly-upper entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparse {
    pub dim: usize,
    pub diagonal: Vec<f64>,
    /// `(row, col, value)` with `row < col`.
    pub upper: Vec<(usize, usize, f64)>,
}

impl SymmetricOperator for SymmetricSparse {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, (d, xi)) in y.iter_mut().zip(self.diagonal.iter().zip(x)) {
            *yi = d * xi;
        }
        for &(r, c, v) in &self.upper {
            y[r] += v * x[c];
            y[c] += v * x[r];
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (k, d) in self.diagonal.iter().enumerate() {
            m[(k, k)] = *d;
        }
        for &(r, c, v) in &self.upper {
            m[(r, c)] += v;
            m[(c, r)] += v;
        }
        m
    }
}

fn ladder(j: f64, m: f64, m_next: f64) -> f64 {
    (j * (j + 1.0) - m * m_next).max(0.0).sqrt()
}

pub fn build_fock_hamiltonian(params: &ModelParams, photon_cutoff: usize) -> Result<SymmetricSparse> {
    params.validate()?;
    if photon_cutoff < 1 {
        return Err(Error::InvalidParameter("photon cutoff must be at least 1".into()));
    }
    let layout = FockLayout {
        n_atoms: params.n_atoms,
        photon_cutoff,
    };
    let dim = (photon_cutoff as u128 + 1) * (u128::from(params.n_atoms) + 1);
    if dim > DEFAULT_DIMENSION_CEILING as u128 {
        return Err(Error::DimensionCeiling {
            requested: usize::try_from(dim).unwrap_or(usize::MAX),
            ceiling: DEFAULT_DIMENSION_CEILING,
        });
    }
    let j = params.j();
    let coupling = params.gamma / f64::from(params.n_atoms).sqrt();
    let diagonal = (0..layout.dim())
        .map(|k| {
            let idx = layout.at(k);
            params.omega * idx.photons as f64 + params.omega0 * idx.twice_mz as f64 / 2.0
        })
        .collect();
    // (a + a^dag)(J_+ + J_-): photon number and J_z both change by one
    let mut upper = Vec::new();
    if coupling != 0.0 {
        for slot in 0..layout.spin_count() - 1 {
            let mz = (2 * slot as i64 - i64::from(params.n_atoms)) as f64 / 2.0;
            let spin = ladder(j, mz, mz + 1.0);
            for n in 0..photon_cutoff {
                let boson = ((n + 1) as f64).sqrt();
                let v = coupling * spin * boson;
                // <n+1, mz+1| and <n, mz+1| |n+1, mz>
                upper.push((layout.index(n, slot), layout.index(n + 1, slot + 1), v));
                upper.push((layout.index(n + 1, slot), layout.index(n, slot + 1), v));
            }
        }
    }
    upper.sort_by_key(|&(r, c, _)| (r, c));
    Ok(SymmetricSparse {
        dim: layout.dim(),
        diagonal,
        upper,
    })
}

/// Ground state in the product basis, by dense diagonalization.
#[derive(Debug, Clone, PartialEq)]
pub struct FockGroundState {
    pub params: ModelParams,
    pub photon_cutoff: usize,
    pub energy: f64,
    /// Unit vector in [`FockLayout`] order with the largest entry positive.
    pub vector: Vec<f64>,
}

impl FockGroundState {
    pub fn layout(&self) -> FockLayout {
        FockLayout {
            n_atoms: self.params.n_atoms,
            photon_cutoff: self.photon_cutoff,
        }
    }

    /// `<exp(i pi (a^dag a + J_z + j))>`.
    pub fn parity(&self) -> f64 {
        let layout = self.layout();
        let tj = i64::from(self.params.n_atoms);
        self.vector
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let idx = layout.at(k);
                let exponent = idx.photons as i64 + (idx.twice_mz + tj) / 2;
                if exponent % 2 == 0 {
                    c * c
                } else {
                    -c * c
                }
            })
            .sum()
    }

    /// Photon-number distribution `P(n)`.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let layout = self.layout();
        let mut p = vec![0.0; layout.block_len()];
        for (k, c) in self.vector.iter().enumerate() {
            p[layout.at(k).photons] += c * c;
        }
        p
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.photon_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

pub fn fock_ground_state(params: &ModelParams, photon_cutoff: usize) -> Result<FockGroundState> {
    if params.n_atoms > ORACLE_MAX_ATOMS {
        return Err(Error::InvalidParameter(format!(
            "reference solver is limited to n_atoms <= {ORACLE_MAX_ATOMS}, got {}",
            params.n_atoms
        )));
    }
    let h = build_fock_hamiltonian(params, photon_cutoff)?;
    let cfg = SolverConfig {
        method: Method::Dense,
        tol: 1e-9,
        ..Default::default()
    };
    let pair = lowest_eigenpair(&h, &cfg)?;
    let mut vector = pair.vector;
    normalize_and_fix_phase(&mut vector)?;
    Ok(FockGroundState {
        params: *params,
        photon_cutoff,
        energy: pair.value,
        vector,
    })
}

/// Starting cutoff `20 + ceil(8 gamma^2 N / omega^2)`.
pub fn default_photon_cutoff(params: &ModelParams) -> usize {
    let extra = 8.0 * params.gamma * params.gamma * f64::from(params.n_atoms)
        / (params.omega * params.omega);
    20 + extra.ceil() as usize
}

/// Doubles the cutoff from [`default_photon_cutoff`] until the ground energy
/// moves by less than [`CUTOFF_ENERGY_TOL`]; returns the larger solve.
pub fn fock_ground_state_converged(params: &ModelParams) -> Result<FockGroundState> {
    let mut cutoff = default_photon_cutoff(params);
    let mut prev = fock_ground_state(params, cutoff)?;
    loop {
        cutoff *= 2;
        let next = fock_ground_state(params, cutoff)?;
        if (next.energy - prev.energy).abs() < CUTOFF_ENERGY_TOL {
            return Ok(next);
        }
        prev = next;
    }
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|c| a.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.amax() < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(beta (a^dag - a))` on a Fock space truncated at `size` states.
pub fn displacement_expm(size: usize, beta: f64) -> DMatrix<f64> {
    let mut gen = DMatrix::zeros(size, size);
    for n in 0..size - 1 {
        let s = ((n + 1) as f64).sqrt();
        gen[(n + 1, n)] = beta * s;
        gen[(n, n + 1)] = -beta * s;
    }
    expm(&gen)
}

/// `J_x` and `J_z` in the `J_z` basis ordered from `m = -j`.
pub fn spin_matrices(n_atoms: u32) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = n_atoms as usize + 1;
    let j = f64::from(n_atoms) / 2.0;
    let mut jx = DMatrix::zeros(d, d);
    let mut jz = DMatrix::zeros(d, d);
    for k in 0..d {
        let m = k as f64 - j;
        jz[(k, k)] = m;
        if k + 1 < d {
            let v = 0.5 * ladder(j, m, m + 1.0);
            jx[(k + 1, k)] = v;
            jx[(k, k + 1)] = v;
        }
    }
    (jx, jz)
}

/// `exp(-i pi/2 J_y)` in the `J_z` basis; column `k` is the `J_x`
/// eigenvector with eigenvalue `k - j`.
pub fn jx_rotation(n_atoms: u32) -> DMatrix<f64> {
    let d = n_atoms as usize + 1;
    let j = f64::from(n_atoms) / 2.0;
    // -i theta J_y = -(theta/2)(J_+ - J_-)
    let mut gen = DMatrix::zeros(d, d);
    for k in 0..d - 1 {
        let m = k as f64 - j;
        let v = ladder(j, m, m + 1.0);
        gen[(k + 1, k)] = -std::f64::consts::FRAC_PI_4 * v;
        gen[(k, k + 1)] = std::f64::consts::FRAC_PI_4 * v;
    }
    expm(&gen)
}

/// Re-expresses a displaced-basis state in the product basis with the given
/// photon cutoff, using independently computed displacement and rotation
/// matrices.
pub fn ecs_state_in_fock_basis(psi: &WaveFunction, photon_cutoff: usize) -> Vec<f64> {
    let layout = psi.layout();
    let g = 2.0 * psi.params.gamma / (psi.params.omega * f64::from(psi.params.n_atoms).sqrt());
    let size = photon_cutoff.max(psi.n_max) + 80;
    let rotation = jx_rotation(psi.params.n_atoms);
    let fock = FockLayout {
        n_atoms: psi.params.n_atoms,
        photon_cutoff,
    };
    let mut out = vec![0.0; fock.dim()];
    for slot in 0..layout.m_count() {
        let m = layout.twice_m_of_slot(slot) as f64 / 2.0;
        // vacuum of A = a + g m is the coherent state |-g m>
        let disp = displacement_expm(size, -g * m);
        let block = &psi.coeffs()[slot * layout.block_len()..(slot + 1) * layout.block_len()];
        let mut boson = vec![0.0; photon_cutoff + 1];
        for (n_exc, c) in block.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            for (n, b) in boson.iter_mut().enumerate() {
                *b += c * disp[(n, n_exc)];
            }
        }
        for z in 0..fock.spin_count() {
            let r = rotation[(z, slot)];
            if r == 0.0 {
                continue;
            }
            for (n, b) in boson.iter().enumerate() {
                out[fock.index(n, z)] += r * b;
            }
        }
    }
    out
}

/// `|<fock|ecs>|` after moving the displaced-basis state into the product basis.
pub fn cross_basis_overlap(fock: &FockGroundState, psi: &WaveFunction) -> f64 {
    let v = ecs_state_in_fock_basis(psi, fock.photon_cutoff);
    v.iter().zip(&fock.vector).map(|(a, b)| a * b).sum::<f64>().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecs::{build_ecs_hamiltonian, displaced_fock_overlap, ground_state_ecs};

    #[test]
    fn non_interacting_limit_is_diagonal() {
        let p = ModelParams::resonant(4, 0.0).unwrap();
        let h = build_fock_hamiltonian(&p, 10).unwrap();
        assert!(h.upper.is_empty());
        let gs = fock_ground_state(&p, 10).unwrap();
        assert!((gs.energy + 2.0).abs() < 1e-14);
        let pn = gs.photon_distribution();
        assert!((pn[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_atoms_zero_coupling_energy() {
        let p = ModelParams::resonant(2, 0.0).unwrap();
        assert_eq!(fock_ground_state(&p, 5).unwrap().energy, -1.0);
    }

    #[test]
    fn dense_copy_is_symmetric() {
        let p = ModelParams::new(1.3, 0.7, 3, 0.8).unwrap();
        let h = build_fock_hamiltonian(&p, 12).unwrap();
        let d = h.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn cutoff_validation() {
        let p = ModelParams::resonant(2, 0.1).unwrap();
        assert!(build_fock_hamiltonian(&p, 0).is_err());
        let big = ModelParams::resonant(13, 0.1).unwrap();
        assert!(fock_ground_state(&big, 5).is_err());
    }

    #[test]
    fn ground_state_has_even_parity() {
        for (n, g) in [(2, 0.5), (3, 0.7), (4, 0.3)] {
            let p = ModelParams::resonant(n, g).unwrap();
            let gs = fock_ground_state(&p, 60).unwrap();
            assert!((gs.parity() - 1.0).abs() < 1e-10, "N={n} g={g}: {}", gs.parity());
        }
    }

    #[test]
    fn cutoff_doubling_converges() {
        let p = ModelParams::resonant(2, 0.5).unwrap();
        let a = fock_ground_state(&p, 60).unwrap();
        let b = fock_ground_state(&p, 120).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-10);
        assert_eq!(default_photon_cutoff(&p), 24);
    }

    #[test]
    fn energy_non_increasing_in_cutoff() {
        let p = ModelParams::resonant(3, 0.6).unwrap();
        let mut last = f64::INFINITY;
        for c in [1, 2, 4, 8, 16, 32] {
            let e = fock_ground_state(&p, c).unwrap().energy;
            assert!(e <= last + 1e-12);
            last = e;
        }
    }

    #[test]
    fn expm_displacement_matches_laguerre_form() {
        let d = displacement_expm(60, 0.7);
        assert!((d[(3, 5)] - displaced_fock_overlap(3, 5, 0.7)).abs() < 1e-12);
        for r in 0..10 {
            for c in 0..10 {
                assert!((d[(r, c)] - displaced_fock_overlap(r, c, 0.7)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_diagonalizes_jx_and_fixes_jz_sign() {
        for n_atoms in [1, 2, 3, 6] {
            let (jx, jz) = spin_matrices(n_atoms);
            let r = jx_rotation(n_atoms);
            let d = r.transpose() * &jx * &r;
            let j = f64::from(n_atoms) / 2.0;
            for a in 0..d.nrows() {
                for b in 0..d.ncols() {
                    let expect = if a == b { a as f64 - j } else { 0.0 };
                    assert!((d[(a, b)] - expect).abs() < 1e-12);
                }
            }
            // J_z in the rotated basis is the ladder used by the ECS builder
            let p = ModelParams::new(1.0, 1.0, n_atoms, 0.0).unwrap();
            let h = build_ecs_hamiltonian(&p, 0).unwrap();
            let z = r.transpose() * &jz * &r;
            for s in 0..h.spin_factors.len() {
                assert!((z[(s + 1, s)] - h.spin_factors[s]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ecs_matches_oracle_two_atoms() {
        let p = ModelParams::resonant(2, 0.45).unwrap();
        let gs = fock_ground_state(&p, 120).unwrap();
        let psi = ground_state_ecs(&p, 30).unwrap();
        assert!((gs.energy - psi.energy).abs() < 1e-10);
        assert!(cross_basis_overlap(&gs, &psi) > 1.0 - 1e-9);
    }
}
