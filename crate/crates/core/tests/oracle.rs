use dicke_core::ecs::{displaced_fock_overlap, ground_state_ecs};
use dicke_core::fock::{
    cross_basis_overlap, displacement_expm, fock_ground_state, fock_ground_state_converged,
};
use dicke_core::observables::susceptibility_from_fidelity;
use dicke_core::sweep::{locate_critical, run_sweep, SweepConfig};
use dicke_core::ModelParams;
use proptest::prelude::*;

fn resonant(n: u32, gamma: f64) -> ModelParams {
    ModelParams::resonant(n, gamma).unwrap()
}

#[test]
fn displaced_overlap_matches_expm() {
    let d = displacement_expm(60, 0.7);
    assert!((displaced_fock_overlap(3, 5, 0.7) - d[(3, 5)]).abs() < 1e-12);
    assert!((displaced_fock_overlap(5, 3, 0.7) - d[(5, 3)]).abs() < 1e-12);
}

#[test]
fn four_atoms_cross_basis_energy() {
    let p = resonant(4, 0.6);
    let fock = fock_ground_state(&p, 80).unwrap();
    let ecs = ground_state_ecs(&p, 30).unwrap();
    assert!((fock.energy - ecs.energy).abs() < 1e-9, "{} vs {}", fock.energy, ecs.energy);
}

#[test]
fn two_atoms_energy_at_045() {
    let p = resonant(2, 0.45);
    let fock = fock_ground_state(&p, 120).unwrap();
    let ecs = ground_state_ecs(&p, 30).unwrap();
    assert!((fock.energy - ecs.energy).abs() < 1e-10);
}

#[test]
fn two_atoms_cutoff_sixty_matches_ecs() {
    let p = resonant(2, 0.5);
    let fock = fock_ground_state(&p, 60).unwrap();
    let ecs = ground_state_ecs(&p, 30).unwrap();
    assert!((fock.energy - ecs.energy).abs() < 1e-10);
}

#[test]
fn two_atoms_state_overlap_at_07() {
    let p = resonant(2, 0.7);
    let fock = fock_ground_state_converged(&p).unwrap();
    let ecs = ground_state_ecs(&p, 30).unwrap();
    let ov = cross_basis_overlap(&fock, &ecs);
    assert!(ov >= 1.0 - 1e-9, "overlap {ov}");
}

#[test]
fn zero_coupling_is_trivial() {
    let p = resonant(2, 0.0);
    let fock = fock_ground_state(&p, 10).unwrap();
    assert!((fock.energy + 1.0).abs() < 1e-14);
    let ecs = ground_state_ecs(&p, 4).unwrap();
    assert!((ecs.energy + 1.0).abs() < 1e-14);
    assert!((cross_basis_overlap(&fock, &ecs) - 1.0).abs() < 1e-12);
}

fn fock_chi_curve(n: u32, gammas: &[f64], dgamma: f64) -> Vec<f64> {
    let states: Vec<_> = gammas
        .iter()
        .map(|&g| fock_ground_state(&resonant(n, g), 120).unwrap())
        .collect();
    states
        .windows(2)
        .map(|w| {
            let f: f64 = w[0].vector.iter().zip(&w[1].vector).map(|(a, b)| a * b).sum();
            susceptibility_from_fidelity(f.abs().min(1.0), dgamma).unwrap()
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

// For two atoms the susceptibility is still rising at 0.7, so both sweeps put
// the extremum on the same boundary point.
#[test]
fn two_atom_sweep_agrees_with_brute_force() {
    let config = SweepConfig::new(0.4, 0.7, 0.01, 30).unwrap();
    let ecs = run_sweep(&resonant(2, 0.4), &config).unwrap().into_points().unwrap();
    let gammas: Vec<f64> = (0..=config.steps()).map(|k| config.gamma_at(k)).collect();
    let fock = fock_chi_curve(2, &gammas, config.dgamma);
    assert_eq!(ecs.len(), fock.len());
    for (p, c) in ecs.iter().zip(&fock) {
        assert!((p.chi_f - c).abs() <= 1e-5 * c.max(1.0), "{} {} {}", p.gamma, p.chi_f, c);
    }
    let chi: Vec<f64> = ecs.iter().map(|p| p.chi_f).collect();
    assert!(argmax(&chi).abs_diff(argmax(&fock)) <= 1);
    assert!(locate_critical(2, &ecs).is_err());
}

#[test]
fn four_atom_sweep_peak_matches_brute_force() {
    let config = SweepConfig::new(0.45, 0.75, 0.01, 30).unwrap();
    let ecs = run_sweep(&resonant(4, 0.45), &config).unwrap().into_points().unwrap();
    let cp = locate_critical(4, &ecs).unwrap();
    let gammas: Vec<f64> = (0..=config.steps()).map(|k| config.gamma_at(k)).collect();
    let fock = fock_chi_curve(4, &gammas, config.dgamma);
    let g_fock = gammas[argmax(&fock)];
    assert!((cp.gamma_max - g_fock).abs() <= config.dgamma + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn ecs_matches_converged_reference(n in 1u32..=8, gamma in 0.0f64..0.8) {
        let p = resonant(n, gamma);
        let fock = fock_ground_state_converged(&p).unwrap();
        let ecs = ground_state_ecs(&p, 40).unwrap();
        prop_assert!((fock.energy - ecs.energy).abs() < 1e-9);
        prop_assert!(cross_basis_overlap(&fock, &ecs) > 1.0 - 1e-8);
    }
}
