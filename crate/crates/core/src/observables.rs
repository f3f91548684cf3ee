//! Ground-state diagnostics: fidelity, fidelity susceptibility, the
//! excitation distribution `P_N`, and the truncation precision `Delta P`.

use crate::ecs::{displacement_block, DisplacementParameter};
use crate::error::{Error, Result};
use crate::model::WaveFunction;

/// One coupling value of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub gamma: f64,
    /// `|<psi(gamma)|psi(gamma + dgamma)>|`.
    pub fidelity: f64,
    pub chi_f: f64,
    /// Weight of the top retained excitation layer of `psi(gamma)`.
    pub delta_p: f64,
    pub energy: f64,
    /// Either solve behind this point reported a (near-)degenerate ground state.
    pub degenerate: bool,
    /// A solve failed; all numeric fields are NaN.
    pub failed: bool,
}

impl ScanPoint {
    pub fn failed_at(gamma: f64) -> Self {
        Self {
            gamma,
            fidelity: f64::NAN,
            chi_f: f64::NAN,
            delta_p: f64::NAN,
            energy: f64::NAN,
            degenerate: false,
            failed: true,
        }
    }

    /// Usable for extremum searches.
    pub fn is_clean(&self) -> bool {
        !self.failed && !self.degenerate
    }
}

/// Excitation distribution of a state and its precision estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `P_N = sum_m C_{N,m}^2` for `N = 0..=n_max`.
    pub p_n: Vec<f64>,
    pub delta_p: f64,
    pub n_max_used: usize,
}

fn check_same_basis(a: &WaveFunction, b: &WaveFunction) -> Result<()> {
    if a.params.n_atoms != b.params.n_atoms || a.n_max != b.n_max {
        return Err(Error::DimensionMismatch(format!(
            "states live in different bases: (n_atoms {}, n_max {}) vs (n_atoms {}, n_max {})",
            a.params.n_atoms, a.n_max, b.params.n_atoms, b.n_max
        )));
    }
    Ok(())
}

/// `<a|b>` as states. The displaced boson basis depends on the coupling, so
/// when the two couplings differ each `m` block picks up the overlap matrix
/// `<N|D((g_a - g_b) m)|N'>`.
pub fn state_overlap(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    check_same_basis(a, b)?;
    if a.params.omega != b.params.omega || a.params.omega0 != b.params.omega0 {
        return Err(Error::DimensionMismatch(
            "states belong to different frequencies".into(),
        ));
    }
    let dg = DisplacementParameter::from_params(&a.params).value()
        - DisplacementParameter::from_params(&b.params).value();
    if dg == 0.0 {
        return Ok(overlap(a.coeffs(), b.coeffs()));
    }
    let layout = a.layout();
    let len = layout.block_len();
    let mut total = 0.0;
    for slot in 0..layout.m_count() {
        let m = layout.twice_m_of_slot(slot) as f64 / 2.0;
        let ca = &a.coeffs()[slot * len..(slot + 1) * len];
        let cb = &b.coeffs()[slot * len..(slot + 1) * len];
        let d = displacement_block(a.n_max, dg * m);
        for (r, x) in ca.iter().enumerate() {
            let row: f64 = cb.iter().enumerate().map(|(c, y)| d[(r, c)] * y).sum();
            total += x * row;
        }
    }
    Ok(total)
}

fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F = |<a|b>|`, clamped to `[0, 1]`.
pub fn fidelity(psi_a: &WaveFunction, psi_b: &WaveFunction) -> Result<f64> {
    Ok(state_overlap(psi_a, psi_b)?.abs().min(1.0))
}

/// `2 (1 - F) / dgamma^2`.
pub fn susceptibility_from_fidelity(fidelity: f64, dgamma: f64) -> Result<f64> {
    if !(dgamma > 0.0 && dgamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dgamma must be positive, got {dgamma}"
        )));
    }
    Ok((2.0 * (1.0 - fidelity) / (dgamma * dgamma)).max(0.0))
}

/// Logarithmic form `-2 ln F / dgamma^2`, kept as a cross-check.
pub fn log_susceptibility_from_fidelity(fidelity: f64, dgamma: f64) -> Result<f64> {
    if !(dgamma > 0.0 && dgamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dgamma must be positive, got {dgamma}"
        )));
    }
    Ok((-2.0 * fidelity.ln() / (dgamma * dgamma)).max(0.0))
}

pub fn susceptibility(psi_a: &WaveFunction, psi_b: &WaveFunction, dgamma: f64) -> Result<f64> {
    susceptibility_from_fidelity(fidelity(psi_a, psi_b)?, dgamma)
}

/// `(chi_max - chi) / chi`.
pub fn specific_susceptibility(chi_at_max: f64, chi: f64) -> Result<f64> {
    if chi == 0.0 {
        return Err(Error::DivisionByZero(
            "specific susceptibility needs a non-zero susceptibility".into(),
        ));
    }
    Ok((chi_at_max - chi) / chi)
}

pub fn excitation_distribution(psi: &WaveFunction) -> ConvergenceReport {
    let layout = psi.layout();
    let b = layout.block_len();
    let mut p_n = vec![0.0; b];
    for (k, c) in psi.coeffs().iter().enumerate() {
        p_n[k % b] += c * c;
    }
    ConvergenceReport {
        delta_p: p_n[b - 1],
        p_n,
        n_max_used: psi.n_max,
    }
}

/// `1 - |<psi_small|psi_large>|` with the smaller state zero-extended by one
/// excitation layer.
pub fn delta_p_exact(psi_small: &WaveFunction, psi_large: &WaveFunction) -> Result<f64> {
    if psi_small.params.n_atoms != psi_large.params.n_atoms {
        return Err(Error::DimensionMismatch(format!(
            "atom numbers differ: {} vs {}",
            psi_small.params.n_atoms, psi_large.params.n_atoms
        )));
    }
    if psi_large.n_max != psi_small.n_max + 1 {
        return Err(Error::DimensionMismatch(format!(
            "truncations must differ by one, got {} and {}",
            psi_small.n_max, psi_large.n_max
        )));
    }
    let extended = psi_small.zero_extended(psi_large.n_max)?;
    Ok((1.0 - overlap(extended.coeffs(), psi_large.coeffs()).abs()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecs::ground_state_ecs;
    use crate::model::{ModelParams, SolveInfo};

    fn state(n_atoms: u32, n_max: usize, v: Vec<f64>) -> WaveFunction {
        let p = ModelParams::resonant(n_atoms, 0.1).unwrap();
        WaveFunction::new(p, n_max, v, 0.0, SolveInfo::default()).unwrap()
    }

    #[test]
    fn self_fidelity_is_one() {
        let p = ModelParams::resonant(6, 0.55).unwrap();
        let psi = ground_state_ecs(&p, 6).unwrap();
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-14);
        assert!(susceptibility(&psi, &psi, 1e-3).unwrap() < 1e-7);
    }

    #[test]
    fn orthogonal_states() {
        let a = state(1, 0, vec![1.0, 0.0]);
        let b = state(1, 0, vec![0.0, 1.0]);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_basis_rejected() {
        let a = state(1, 0, vec![1.0, 0.0]);
        let b = state(1, 1, vec![1.0, 0.0, 0.0, 0.0]);
        let c = state(2, 0, vec![1.0, 0.0, 0.0]);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch(_))));
        assert!(matches!(fidelity(&a, &c), Err(Error::DimensionMismatch(_))));
        assert!(susceptibility(&a, &b, 0.1).is_err());
    }

    #[test]
    fn unit_fidelity_gives_zero_susceptibility() {
        assert_eq!(susceptibility_from_fidelity(1.0, 0.001).unwrap(), 0.0);
        assert!(susceptibility_from_fidelity(0.9, 0.0).is_err());
        assert!(susceptibility_from_fidelity(0.9, -1.0).is_err());
    }

    #[test]
    fn linear_and_log_forms_agree_near_one() {
        for one_minus_f in [1e-8, 1e-6, 5e-5, 9e-5] {
            let f = 1.0 - one_minus_f;
            let lin = susceptibility_from_fidelity(f, 1e-3).unwrap();
            let log = log_susceptibility_from_fidelity(f, 1e-3).unwrap();
            assert!(((log - lin) / lin).abs() < 1e-4, "{one_minus_f}");
            // first-order Taylor bound
            assert!((log - lin).abs() * 1e-6 <= one_minus_f * one_minus_f * 4.0);
        }
    }

    #[test]
    fn specific_susceptibility_values() {
        assert_eq!(specific_susceptibility(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(specific_susceptibility(10.0, 5.0).unwrap(), 1.0);
        assert!(matches!(
            specific_susceptibility(10.0, 0.0),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn zero_coupling_distribution() {
        let p = ModelParams::resonant(4, 0.0).unwrap();
        let psi = ground_state_ecs(&p, 5).unwrap();
        let r = excitation_distribution(&psi);
        assert!((r.p_n[0] - 1.0).abs() < 1e-12);
        assert!(r.delta_p < 1e-20);
        assert_eq!(r.n_max_used, 5);
    }

    #[test]
    fn distribution_sums_to_one() {
        let p = ModelParams::resonant(10, 0.62).unwrap();
        let psi = ground_state_ecs(&p, 7).unwrap();
        let r = excitation_distribution(&psi);
        assert!((r.p_n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.p_n.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn exact_precision_of_identical_states() {
        let p = ModelParams::resonant(4, 0.3).unwrap();
        let small = ground_state_ecs(&p, 30).unwrap();
        let large = ground_state_ecs(&p, 31).unwrap();
        assert!(delta_p_exact(&small, &large).unwrap() < 1e-12);
        assert!(delta_p_exact(&small, &small).is_err());
    }

    #[test]
    fn exact_precision_respects_top_layer_bound() {
        let p = ModelParams::resonant(4, 0.55).unwrap();
        let small = ground_state_ecs(&p, 7).unwrap();
        let large = ground_state_ecs(&p, 8).unwrap();
        let exact = delta_p_exact(&small, &large).unwrap();
        let bound = excitation_distribution(&large).delta_p;
        assert!(exact <= bound + 1e-12, "{exact} > {bound}");
        assert!(exact > 0.0);
    }

    #[test]
    fn overlap_across_couplings_matches_product_basis() {
        use crate::fock::ecs_state_in_fock_basis;
        let a = ground_state_ecs(&ModelParams::resonant(3, 0.45).unwrap(), 20).unwrap();
        let b = ground_state_ecs(&ModelParams::resonant(3, 0.62).unwrap(), 20).unwrap();
        let fa = ecs_state_in_fock_basis(&a, 60);
        let fb = ecs_state_in_fock_basis(&b, 60);
        let direct = overlap(&fa, &fb);
        let via = state_overlap(&a, &b).unwrap();
        assert!((direct - via).abs() < 1e-12, "{direct} {via}");
        assert!((via - state_overlap(&b, &a).unwrap()).abs() < 1e-14);
        assert!(fidelity(&a, &b).unwrap() < 0.999);
    }

    #[test]
    fn fidelity_symmetric_and_sign_invariant() {
        let a = state(2, 1, vec![0.1, 0.5, -0.3, 0.2, 0.7, 0.1]);
        let b = state(2, 1, vec![0.4, -0.1, 0.2, 0.6, 0.2, -0.5]);
        let neg: Vec<f64> = b.coeffs().iter().map(|x| -x).collect();
        let fab = fidelity(&a, &b).unwrap();
        assert_eq!(fab, fidelity(&b, &a).unwrap());
        assert_eq!(fab, overlap(a.coeffs(), &neg).abs());
    }
}
