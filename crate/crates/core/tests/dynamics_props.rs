use nalgebra::{DMatrix, DVector, Matrix4};
use perceptron_core::analysis::{final_population, negativity};
use perceptron_core::dynamics::{
    evolve_lindblad, evolve_two_level, lindblad_propagate, perceptron_blocks, perceptron_unitary, superposition_input,
    Decoherence, EffectiveTwoLevelFrame, PerceptronConfig,
};
use perceptron_core::numerics::{DensityMatrix, QuantumState, StepRule, C64};
use perceptron_core::pulse::PulseFamily;
use perceptron_core::units::{mhz, us};
use proptest::prelude::*;

fn rule() -> StepRule {
    StepRule::default()
}

fn max_diff<const R: usize, const C: usize>(
    a: &nalgebra::SMatrix<C64, R, C>,
    b: &nalgebra::SMatrix<C64, R, C>,
) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The weights act only through the final detuning.
    #[test]
    fn shift_equivalence(w0 in -8.0..8.0f64, w1 in -8.0..8.0f64, b in -10.0..10.0f64) {
        let cfg = PerceptronConfig {
            weights: vec![mhz(w0), mhz(w1)],
            bias: mhz(b),
            ..PerceptronConfig::default()
        };
        let blocks = perceptron_blocks(&cfg, &rule()).unwrap();
        for (x, block) in blocks.iter().enumerate() {
            let bare = PerceptronConfig {
                weights: vec![],
                bias: cfg.bias + cfg.shift(x),
                ..cfg.clone()
            };
            let v0 = perceptron_blocks(&bare, &rule()).unwrap()[0];
            prop_assert!(max_diff(block, &v0) < 1e-10);
        }
    }

    /// Only detunings matter: shifting the drive and the qubit together
    /// leaves the evolution unchanged.
    #[test]
    fn common_frequency_offset_is_irrelevant(offset in -500.0..500.0f64, b in -10.0..10.0f64) {
        let cfg = PerceptronConfig { bias: mhz(b), ..PerceptronConfig::default() };
        let moved = PerceptronConfig { qubit_freq: cfg.qubit_freq + mhz(offset), ..cfg.clone() };
        let p = final_population(&cfg, 0, &rule()).unwrap();
        let q = final_population(&moved, 0, &rule()).unwrap();
        prop_assert!((p - q).abs() < 1e-12);
    }
}

#[test]
fn unitary_is_block_diagonal_on_the_input_register() {
    let cfg = PerceptronConfig {
        weights: vec![mhz(-5.2), mhz(-3.1)],
        bias: mhz(2.0),
        ..PerceptronConfig::default()
    };
    let u = perceptron_unitary(&cfg, &rule()).unwrap();
    assert_eq!(u.dims(), &[2, 2, 2]);
    let m = u.entries();
    for x in 0..4 {
        let mut proj = DMatrix::<C64>::zeros(8, 8);
        proj[(2 * x, 2 * x)] = C64::from(1.0);
        proj[(2 * x + 1, 2 * x + 1)] = C64::from(1.0);
        let comm = &proj * m - m * &proj;
        assert_eq!(comm.iter().fold(0.0_f64, |a, z| a.max(z.norm())), 0.0);
    }
    assert!(u.unitarity_error() < 1e-8);
}

#[test]
fn zero_inputs_is_the_bare_gate() {
    let r = rule();
    let lo = PerceptronConfig { bias: mhz(-10.0), ..PerceptronConfig::default() };
    let hi = PerceptronConfig { bias: mhz(10.0), ..PerceptronConfig::default() };
    let u = perceptron_unitary(&lo, &r).unwrap();
    assert_eq!(u.dims(), &[2]);
    let p_lo = u.entries()[(1, 0)].norm_sqr();
    let p_hi = perceptron_unitary(&hi, &r).unwrap().entries()[(1, 0)].norm_sqr();
    assert!(p_lo < 0.02 && p_hi > 0.98, "{p_lo} {p_hi}");
}

#[test]
fn zero_weight_gives_identical_blocks() {
    let cfg = PerceptronConfig {
        weights: vec![0.0],
        bias: mhz(1.3),
        ..PerceptronConfig::default()
    };
    let b = perceptron_blocks(&cfg, &rule()).unwrap();
    assert_eq!(max_diff(&b[0], &b[1]), 0.0);
}

#[test]
fn no_drive_leaves_populations_alone() {
    let frame = EffectiveTwoLevelFrame::new(mhz(-70.0), mhz(10.0), 0.0, us(1.67), PulseFamily::Chirp, 4.0).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let start = QuantumState::new(DVector::from_vec(vec![C64::from(h), C64::new(0.0, h)]), vec![2]).unwrap();
    let (out, u) = evolve_two_level(&frame, &start, &rule()).unwrap();
    assert!((out.population(1) - 0.5).abs() < 1e-8);
    let e = u.entries();
    assert!(e[(0, 1)].norm() < 1e-12 && e[(1, 0)].norm() < 1e-12);
}

#[test]
fn adiabatic_limit() {
    // |b|·T ≥ 60 rad at and below the default pulse length
    let r = rule();
    for &(b, t) in &[(6.0, 1.67), (12.0, 0.83), (24.0, 0.42)] {
        for sign in [-1.0, 1.0] {
            let cfg = PerceptronConfig {
                bias: mhz(sign * b),
                duration: us(t),
                ..PerceptronConfig::default()
            };
            let p = final_population(&cfg, 0, &r).unwrap();
            let target = if sign > 0.0 { 1.0 } else { 0.0 };
            assert!((p - target).abs() < 0.01, "b={} T={t}: p={p}", sign * b);
        }
    }
}

/// At the bias halfway between the two steps the gate is a CNOT up to local
/// phases: input 0 (Δ = +2.6 MHz) swaps, input 1 (Δ = −2.6 MHz) does not.
/// The steps overlap at this weight, so the blocks are only ~87–89 % pure.
#[test]
fn midpoint_blocks_are_cnot_like() {
    let cfg = PerceptronConfig::two_qubit(mhz(2.6));
    let b = perceptron_blocks(&cfg, &rule()).unwrap();
    let swap0 = b[0][(1, 0)].norm_sqr();
    let stay1 = b[1][(0, 0)].norm_sqr();
    assert!(swap0 > 0.85, "{swap0}");
    assert!(stay1 > 0.85, "{stay1}");
}

#[test]
fn amplitude_damping_of_idle_qubit() {
    // no drive, no detuning: pure T1 decay of the output qubit from |1⟩
    let cfg = PerceptronConfig {
        weights: vec![0.0],
        duration: us(20.0),
        omega0: 0.0,
        chirp_span: 0.0,
        ..PerceptronConfig::default()
    };
    let mut rho0 = Matrix4::<C64>::zeros();
    rho0[(1, 1)] = C64::from(1.0);
    let out = lindblad_propagate(&cfg, &rho0, &Decoherence::amplitude_damping(us(20.0)), &rule()).unwrap();
    assert!((out[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-4);
    assert!((out.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn infinite_t1_matches_unitary_evolution() {
    let cfg = PerceptronConfig::two_qubit(mhz(1.0));
    let rho0 = superposition_input().unwrap().to_density();
    let u = perceptron_unitary(&cfg, &rule()).unwrap();
    let expected = rho0.conjugate_by(&u).unwrap();
    let got = evolve_lindblad(&cfg, &rho0, &Decoherence::none(), &rule()).unwrap();
    assert!(got.trace_distance(&expected).unwrap() < 1e-7);
}

#[test]
fn damped_negativity_is_below_unitary_and_state_stays_physical() {
    let r = rule();
    let rho0 = superposition_input().unwrap().to_density();
    for b in [-4.0, 1.0, 2.6, 6.0] {
        let cfg = PerceptronConfig::two_qubit(mhz(b));
        let u = perceptron_unitary(&cfg, &r).unwrap();
        let n_u = negativity(&rho0.conjugate_by(&u).unwrap(), 0).unwrap();
        let rho = evolve_lindblad(&cfg, &rho0, &Decoherence::amplitude_damping(us(20.0)), &r).unwrap();
        rho.validate(1e-9, 1e-9, 1e-8).unwrap();
        let n_d = negativity(&rho, 0).unwrap();
        assert!(n_d < n_u, "b={b}: {n_d} !< {n_u}");
    }
}

#[test]
fn lindblad_rejects_bad_inputs() {
    let cfg = PerceptronConfig::two_qubit(0.0);
    let three = DensityMatrix::maximally_mixed(vec![2, 2, 2]);
    assert!(evolve_lindblad(&cfg, &three, &Decoherence::none(), &rule()).is_err());
    let two_inputs = PerceptronConfig {
        weights: vec![1.0, 2.0],
        ..cfg.clone()
    };
    let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
    assert!(evolve_lindblad(&two_inputs, &rho, &Decoherence::none(), &rule()).is_err());
    assert!(evolve_lindblad(&cfg, &rho, &Decoherence::amplitude_damping(-1.0), &rule()).is_err());
}

#[test]
fn invalid_configurations_are_rejected() {
    let r = rule();
    let too_many = PerceptronConfig {
        weights: vec![0.0; 13],
        ..PerceptronConfig::default()
    };
    assert!(perceptron_blocks(&too_many, &r).is_err());
    let bad_t = PerceptronConfig {
        duration: 0.0,
        ..PerceptronConfig::default()
    };
    assert!(perceptron_blocks(&bad_t, &r).is_err());
}
