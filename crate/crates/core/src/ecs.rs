//! Hamiltonian in the extended coherent-state basis.
//!
//! Writing the coupling as `(2 gamma / sqrt(N)) (a + a^dag) J_x` and shifting
//! the boson by `g J_x` with `g = 2 gamma / (omega sqrt(N))` leaves
//!
//! ```text
//! H = omega A^dag A - omega g^2 J_x^2 + omega0 J_z
//! ```
//!
//! which is diagonal in `|N; j, m>` (`J_x = m`) except for `omega0 J_z`. In the
//! `J_x` eigenbasis `J_z` only connects `m` to `m +- 1`, and the boson parts of
//! neighbouring sectors overlap through the displacement operator `D(g)`, so
//! the matrix is block tridiagonal in `m` with every off-diagonal block equal
//! to a scalar multiple of one `(n_max + 1)^2` overlap matrix.

use nalgebra::DMatrix;

use crate::eigen::{lowest_eigenpair, SolverConfig, SymmetricOperator};
use crate::error::Result;
use crate::model::{BasisLayout, ModelParams, SolveInfo, WaveFunction, DEFAULT_DIMENSION_CEILING};

/// Per-unit-`m` displacement of the boson mode, `2 gamma / (omega sqrt(N))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementParameter(pub f64);

impl DisplacementParameter {
    pub fn from_params(p: &ModelParams) -> Self {
        Self(2.0 * p.gamma / (p.omega * f64::from(p.n_atoms).sqrt()))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial `L_n^(alpha)(x)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<n_row| D(beta) |n_col>` for real `beta`, `D(beta) = exp(beta (a^dag - a))`.
pub fn displaced_fock_overlap(n_row: usize, n_col: usize, beta: f64) -> f64 {
    let (lo, hi, base) = if n_row >= n_col {
        (n_col, n_row, beta)
    } else {
        (n_row, n_col, -beta)
    };
    let diff = hi - lo;
    let x = beta * beta;
    let lag = laguerre(lo, diff as f64, x);
    if lag == 0.0 {
        return 0.0;
    }
    if diff > 0 && base == 0.0 {
        return 0.0;
    }
    let mut log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * x;
    if diff > 0 {
        log_mag += diff as f64 * base.abs().ln();
    }
    let sign = if diff % 2 == 1 && base < 0.0 { -1.0 } else { 1.0 };
    sign * lag * log_mag.exp()
}

/// `(n+1) x (n+1)` matrix of `<r| D(beta) |c>` for `r, c <= n_max`.
pub fn displacement_block(n_max: usize, beta: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| displaced_fock_overlap(r, c, beta))
}

/// Sign attached to the `J_z` ladder elements in the `J_x` eigenbasis. With
/// `|m>_x = exp(-i pi/2 J_y) |m>_z` the operator `J_z` acts there as `-J_x`
/// acts on `|m>_z`.
const JZ_LADDER_SIGN: f64 = -1.0;

/// Assembled block-tridiagonal Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct EcsMatrix {
    pub params: ModelParams,
    pub layout: BasisLayout,
    pub displacement: DisplacementParameter,
    /// Diagonal `omega N - 4 gamma^2 m^2 / (N_atoms omega)` in storage order.
    pub diagonal: Vec<f64>,
    /// `<N'| D(g) |N>`, shared by every off-diagonal block.
    pub overlap: DMatrix<f64>,
    /// Spin factor of the block linking slot `s` (column) to slot `s + 1` (row).
    pub spin_factors: Vec<f64>,
}

pub fn build_ecs_hamiltonian(params: &ModelParams, n_max: usize) -> Result<EcsMatrix> {
    build_ecs_hamiltonian_with_ceiling(params, n_max, DEFAULT_DIMENSION_CEILING)
}

pub fn build_ecs_hamiltonian_with_ceiling(
    params: &ModelParams,
    n_max: usize,
    ceiling: usize,
) -> Result<EcsMatrix> {
    params.validate()?;
    let layout = BasisLayout::with_ceiling(params.n_atoms, n_max, ceiling)?;
    let disp = DisplacementParameter::from_params(params);
    let n_atoms = f64::from(params.n_atoms);
    let shift = 4.0 * params.gamma * params.gamma / (n_atoms * params.omega);
    let diagonal = layout
        .iter()
        .map(|idx| {
            let m = idx.m();
            params.omega * idx.n_exc as f64 - shift * m * m
        })
        .collect();
    let j = params.j();
    let spin_factors = (0..layout.m_count() - 1)
        .map(|slot| {
            let m = layout.twice_m_of_slot(slot) as f64 / 2.0;
            JZ_LADDER_SIGN * 0.5 * params.omega0 * (j * (j + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect();
    Ok(EcsMatrix {
        params: *params,
        layout,
        displacement: disp,
        diagonal,
        overlap: displacement_block(n_max, disp.value()),
        spin_factors,
    })
}

impl EcsMatrix {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Dense block `<., m_{s+1}| H |., m_s>`.
    pub fn block(&self, slot: usize) -> DMatrix<f64> {
        &self.overlap * self.spin_factors[slot]
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let b = self.layout.block_len();
        let blocks = self.layout.m_count();
        for (yi, (d, xi)) in y.iter_mut().zip(self.diagonal.iter().zip(x)) {
            *yi = d * xi;
        }
        for s in 0..blocks - 1 {
            let f = self.spin_factors[s];
            let (x_lo, x_hi) = (&x[s * b..(s + 1) * b], &x[(s + 1) * b..(s + 2) * b]);
            for r in 0..b {
                let mut up = 0.0;
                let mut down = 0.0;
                for c in 0..b {
                    up += self.overlap[(r, c)] * x_lo[c];
                    down += self.overlap[(c, r)] * x_hi[c];
                }
                y[(s + 1) * b + r] += f * up;
                y[s * b + r] += f * down;
            }
        }
    }

    pub fn to_dense_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let b = self.layout.block_len();
        let mut h = DMatrix::zeros(n, n);
        for (k, d) in self.diagonal.iter().enumerate() {
            h[(k, k)] = *d;
        }
        for s in 0..self.layout.m_count() - 1 {
            let f = self.spin_factors[s];
            for r in 0..b {
                for c in 0..b {
                    let v = f * self.overlap[(r, c)];
                    h[((s + 1) * b + r, s * b + c)] = v;
                    h[(s * b + c, (s + 1) * b + r)] = v;
                }
            }
        }
        h
    }
}

impl SymmetricOperator for EcsMatrix {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.to_dense_matrix()
    }
}

/// Eigenvalue of the parity `exp(i pi (a^dag a + J_z + j))`. In this basis it
/// maps `|N; m>` to `(-1)^N |N; -m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Applies the parity operator to a full-basis vector.
pub fn apply_parity(layout: &BasisLayout, x: &[f64]) -> Vec<f64> {
    let b = layout.block_len();
    let last = layout.m_count() - 1;
    let mut out = vec![0.0; x.len()];
    for slot in 0..layout.m_count() {
        for n in 0..b {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            out[(last - slot) * b + n] = s * x[slot * b + n];
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct SectorVector {
    primary: usize,
    partner: Option<(usize, f64)>,
}

/// Restriction of an [`EcsMatrix`] to one parity sector, expressed in an
/// orthonormal basis of symmetrized pairs `(|N;m> +- (-1)^N |N;-m>)/sqrt(2)`.
#[derive(Debug, Clone)]
pub struct ParitySector<'a> {
    matrix: &'a EcsMatrix,
    vectors: Vec<SectorVector>,
}

impl<'a> ParitySector<'a> {
    pub fn new(matrix: &'a EcsMatrix, parity: Parity) -> Self {
        let layout = matrix.layout;
        let b = layout.block_len();
        let last = layout.m_count() - 1;
        let mut vectors = Vec::with_capacity(layout.dim() / 2 + b);
        for slot in 0..layout.m_count() {
            let mirror = last - slot;
            if slot > mirror {
                break;
            }
            for n in 0..b {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 } * parity.sign();
                if slot == mirror {
                    if s > 0.0 {
                        vectors.push(SectorVector {
                            primary: slot * b + n,
                            partner: None,
                        });
                    }
                } else {
                    vectors.push(SectorVector {
                        primary: slot * b + n,
                        partner: Some((mirror * b + n, s)),
                    });
                }
            }
        }
        Self { matrix, vectors }
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.matrix.dim()];
        for (v, &c) in self.vectors.iter().zip(x) {
            match v.partner {
                Some((q, s)) => {
                    full[v.primary] = c * std::f64::consts::FRAC_1_SQRT_2;
                    full[q] = s * c * std::f64::consts::FRAC_1_SQRT_2;
                }
                None => full[v.primary] = c,
            }
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| match v.partner {
                Some((q, s)) => (full[v.primary] + s * full[q]) * std::f64::consts::FRAC_1_SQRT_2,
                None => full[v.primary],
            })
            .collect()
    }
}

impl SymmetricOperator for ParitySector<'_> {
    fn dim(&self) -> usize {
        self.vectors.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let full = self.expand(x);
        let mut hy = vec![0.0; full.len()];
        self.matrix.matvec(&full, &mut hy);
        y.copy_from_slice(&self.restrict(&hy));
    }
}

/// Which part of the Hilbert space the ground-state search covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    /// Positive-parity sector, which holds the ground state at finite `N`.
    EvenParity,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    pub solver: SolverConfig,
    pub space: SearchSpace,
    pub ceiling: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            space: SearchSpace::EvenParity,
            ceiling: DEFAULT_DIMENSION_CEILING,
        }
    }
}

pub fn ground_state_ecs(params: &ModelParams, n_max: usize) -> Result<WaveFunction> {
    ground_state_ecs_with(params, n_max, &GroundStateOptions::default())
}

pub fn ground_state_ecs_with(
    params: &ModelParams,
    n_max: usize,
    options: &GroundStateOptions,
) -> Result<WaveFunction> {
    let h = build_ecs_hamiltonian_with_ceiling(params, n_max, options.ceiling)?;
    let (pair, coeffs) = match options.space {
        SearchSpace::Full => {
            let pair = lowest_eigenpair(&h, &options.solver)?;
            let v = pair.vector.clone();
            (pair, v)
        }
        SearchSpace::EvenParity => {
            let sector = ParitySector::new(&h, Parity::Even);
            let pair = lowest_eigenpair(&sector, &options.solver)?;
            let v = sector.expand(&pair.vector);
            (pair, v)
        }
    };
    let info = SolveInfo {
        iterations: pair.iterations,
        residual: pair.residual,
        gap: pair.gap,
        degenerate: pair.degenerate,
        dense: pair.dense,
    };
    WaveFunction::new(*params, n_max, coeffs, pair.value, info)
}

/// `<a^dag a>` of the original photon mode, from
/// `a^dag a = A^dag A - g J_x (A + A^dag) + g^2 J_x^2`.
pub fn mean_photon_number(psi: &WaveFunction) -> f64 {
    let layout = psi.layout();
    let g = DisplacementParameter::from_params(&psi.params).value();
    let c = psi.coeffs();
    let b = layout.block_len();
    let mut number = 0.0;
    let mut cross = 0.0;
    let mut jx2 = 0.0;
    for slot in 0..layout.m_count() {
        let m = layout.twice_m_of_slot(slot) as f64 / 2.0;
        let block = &c[slot * b..(slot + 1) * b];
        let mut quad = 0.0;
        for n in 0..b {
            let p = block[n] * block[n];
            number += n as f64 * p;
            quad += 2.0 * ((n + 1) as f64).sqrt() * block.get(n + 1).map_or(0.0, |u| u * block[n]);
            jx2 += m * m * p;
        }
        cross += m * quad;
    }
    number - g * cross + g * g * jx2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::Method;

    #[test]
    fn vacuum_overlap_is_gaussian() {
        for beta in [0.0, 0.3, -1.2, 2.5] {
            let v = displaced_fock_overlap(0, 0, beta);
            assert!((v - (-beta * beta / 2.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_displacement_is_identity() {
        for r in 0..12 {
            for c in 0..12 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_eq!(displaced_fock_overlap(r, c, 0.0), expect);
            }
        }
    }

    #[test]
    fn overlap_antisymmetry_in_beta() {
        // <r|D(-b)|c> = (-1)^(r+c) <r|D(b)|c> and D(b)^T = D(-b)
        for r in 0..8 {
            for c in 0..8 {
                let a = displaced_fock_overlap(r, c, 0.8);
                let b = displaced_fock_overlap(r, c, -0.8);
                let t = displaced_fock_overlap(c, r, 0.8);
                let s = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - s * b).abs() < 1e-14);
                assert!((t - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn large_indices_stay_finite() {
        for (r, c) in [(500, 500), (500, 0), (0, 500), (250, 500), (499, 37)] {
            for beta in [1e-3, 0.7, 3.0, -5.0] {
                let v = displaced_fock_overlap(r, c, beta);
                assert!(v.is_finite(), "({r},{c},{beta}) -> {v}");
                assert!(v.abs() <= 1.0 + 1e-9, "({r},{c},{beta}) -> {v}");
            }
        }
    }

    #[test]
    fn unitarity_of_truncated_rows() {
        let n_max = 8;
        let range = 4 * n_max;
        for beta in [-1.0, -0.4, 0.0, 0.55, 1.0] {
            for n in 0..=n_max {
                let s: f64 = (0..=range)
                    .map(|k| displaced_fock_overlap(n, k, beta).powi(2))
                    .sum();
                assert!((s - 1.0).abs() < 1e-8, "beta {beta} row {n}: {s}");
            }
        }
    }

    #[test]
    fn laguerre_small_cases() {
        assert_eq!(laguerre(0, 3.0, 2.0), 1.0);
        assert!((laguerre(1, 2.0, 0.5) - 2.5).abs() < 1e-15);
        // L_2^(1)(x) = (x^2 - 6x + 6)/2
        let x: f64 = 0.7;
        assert!((laguerre(2, 1.0, x) - (x * x - 6.0 * x + 6.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_formula() {
        let p = ModelParams::resonant(4, 0.6).unwrap();
        let h = build_ecs_hamiltonian(&p, 3).unwrap();
        for (k, idx) in h.layout.iter().enumerate() {
            let m = idx.m();
            let expect = idx.n_exc as f64 - 4.0 * 0.36 * m * m / 4.0;
            assert!((h.diagonal[k] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn assembled_matrix_is_exactly_symmetric() {
        for (n_atoms, gamma) in [(1, 0.3), (4, 0.6), (7, 0.9)] {
            let p = ModelParams::resonant(n_atoms, gamma).unwrap();
            let h = build_ecs_hamiltonian(&p, 5).unwrap();
            let d = h.to_dense_matrix();
            assert_eq!(d, d.transpose());
            // matvec reproduces the dense matrix column by column
            let via_matvec = SymmetricOperator::to_dense(&DenseCheck(&h));
            assert_eq!(via_matvec, d);
        }
    }

    struct DenseCheck<'a>(&'a EcsMatrix);
    impl SymmetricOperator for DenseCheck<'_> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.matvec(x, y)
        }
    }

    #[test]
    fn zero_coupling_ground_energy() {
        for n_atoms in [1, 2, 5, 10] {
            let p = ModelParams::resonant(n_atoms, 0.0).unwrap();
            let psi = ground_state_ecs(&p, 3).unwrap();
            assert!((psi.energy + p.j()).abs() < 1e-12);
            let h = build_ecs_hamiltonian(&p, 3).unwrap();
            // blocks reduce to the J_z ladder times identity
            assert_eq!(h.overlap, DMatrix::identity(4, 4));
        }
    }

    #[test]
    fn zero_coupling_has_no_excitations() {
        let p = ModelParams::resonant(2, 0.0).unwrap();
        let psi = ground_state_ecs(&p, 4).unwrap();
        let p0: f64 = (-2..=2).step_by(2).map(|tm| psi.coeff(0, tm).powi(2)).sum();
        assert!((p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity_commutes_with_hamiltonian() {
        let p = ModelParams::resonant(5, 0.7).unwrap();
        let h = build_ecs_hamiltonian(&p, 6).unwrap();
        let x: Vec<f64> = (0..h.dim()).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
        let mut hx = vec![0.0; x.len()];
        h.matvec(&x, &mut hx);
        let px = apply_parity(&h.layout, &x);
        let mut hpx = vec![0.0; x.len()];
        h.matvec(&px, &mut hpx);
        let phx = apply_parity(&h.layout, &hx);
        for (a, b) in hpx.iter().zip(&phx) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sectors_partition_the_spectrum() {
        let p = ModelParams::resonant(4, 0.55).unwrap();
        let h = build_ecs_hamiltonian(&p, 6).unwrap();
        let even = ParitySector::new(&h, Parity::Even);
        let odd = ParitySector::new(&h, Parity::Odd);
        assert_eq!(even.dim() + odd.dim(), h.dim());
        let mut all: Vec<f64> = h.to_dense_matrix().symmetric_eigenvalues().iter().copied().collect();
        let mut parts: Vec<f64> = even
            .to_dense()
            .symmetric_eigenvalues()
            .iter()
            .chain(odd.to_dense().symmetric_eigenvalues().iter())
            .copied()
            .collect();
        all.sort_by(f64::total_cmp);
        parts.sort_by(f64::total_cmp);
        for (a, b) in all.iter().zip(&parts) {
            assert!((a - b).abs() < 1e-10);
        }
        // ground state sits in the even sector
        let full = ground_state_ecs_with(
            &p,
            6,
            &GroundStateOptions {
                space: SearchSpace::Full,
                ..Default::default()
            },
        )
        .unwrap();
        let sector = ground_state_ecs(&p, 6).unwrap();
        assert!((full.energy - sector.energy).abs() < 1e-12);
    }

    #[test]
    fn dense_and_lanczos_agree_on_sector() {
        let p = ModelParams::resonant(60, 0.52).unwrap();
        let run = |method| {
            ground_state_ecs_with(
                &p,
                8,
                &GroundStateOptions {
                    solver: SolverConfig {
                        method,
                        ..Default::default()
                    },
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let d = run(Method::Dense);
        let l = run(Method::Lanczos);
        assert!((d.energy - l.energy).abs() < 1e-10);
        let ov: f64 = d.coeffs().iter().zip(l.coeffs()).map(|(a, b)| a * b).sum();
        assert!(ov > 1.0 - 1e-12);
    }

    #[test]
    fn energy_non_increasing_in_truncation() {
        let p = ModelParams::resonant(6, 0.65).unwrap();
        let mut last = f64::INFINITY;
        for n_max in 0..16 {
            let e = ground_state_ecs(&p, n_max).unwrap().energy;
            assert!(e <= last + 1e-12, "n_max {n_max}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn photon_number_vanishes_without_coupling() {
        let p = ModelParams::resonant(8, 0.0).unwrap();
        let psi = ground_state_ecs(&p, 4).unwrap();
        assert!(mean_photon_number(&psi).abs() < 1e-12);
    }
}
