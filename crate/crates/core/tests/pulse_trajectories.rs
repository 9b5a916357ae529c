//! Which sech variant traces the chirp's path in the (frequency, amplitude)
//! plane, measured rather than assumed.

use std::f64::consts::PI;

use perceptron_core::pulse::{
    schedule, time_transform, time_transform_scaled, trajectory_compare, PulseFamily, PulseParams, Reparametrized,
    Trajectory,
};
use proptest::prelude::*;

fn params(family: PulseFamily) -> PulseParams {
    PulseParams {
        family,
        ..PulseParams::default()
    }
}

fn span(p: &PulseParams) -> f64 {
    (p.omega_f - p.omega_i).abs()
}

#[test]
fn schedule_against_itself_is_zero() {
    for fam in [PulseFamily::Chirp, PulseFamily::SechPrinted, PulseFamily::SechMonotonic] {
        let s = schedule(&params(fam)).unwrap();
        assert_eq!(trajectory_compare(&s, &s, 200).unwrap(), 0.0);
    }
}

#[test]
fn monotonic_sech_traces_the_chirp() {
    let p = params(PulseFamily::Chirp);
    let chirp = schedule(&p).unwrap();
    let sech = schedule(&params(PulseFamily::SechMonotonic)).unwrap();
    let d = trajectory_compare(&chirp, &sech, 400).unwrap();
    assert!(d / span(&p) < 1e-9, "relative deviation {}", d / span(&p));
}

#[test]
fn printed_sech_does_not_trace_the_chirp() {
    let p = params(PulseFamily::Chirp);
    let chirp = schedule(&p).unwrap();
    let sech = schedule(&params(PulseFamily::SechPrinted)).unwrap();
    let d = trajectory_compare(&chirp, &sech, 400).unwrap();
    // the printed law starts and ends at ω_f, so the rising branches sit on
    // opposite ends of the sweep
    assert!(d / span(&p) > 0.5, "relative deviation {}", d / span(&p));
}

#[test]
fn chirp_is_invariant_under_reparametrization() {
    let chirp = schedule(&params(PulseFamily::Chirp)).unwrap();
    let t = chirp.params().duration;
    let warped = Reparametrized {
        base: &chirp,
        map: move |s: f64| s - 0.3 * t / (2.0 * PI) * (2.0 * PI * s / t).sin(),
        span: (0.0, t),
        peak: 0.5 * t,
    };
    let d = trajectory_compare(&chirp, &warped, 400).unwrap();
    assert!(d / span(chirp.params()) < 1e-9);
}

#[test]
fn scaled_time_transform_maps_the_chirp_onto_the_monotonic_sech() {
    let chirp = schedule(&params(PulseFamily::Chirp)).unwrap();
    let sech = schedule(&params(PulseFamily::SechMonotonic)).unwrap();
    let t = chirp.params().duration;
    for k in 1..200 {
        let tp = t * k as f64 / 200.0;
        let ts = time_transform_scaled(tp, t).unwrap();
        let (fc, ac) = chirp.sample(tp);
        let (fs, as_) = sech.sample(ts);
        assert!((ac - as_).abs() < 1e-10 * chirp.params().omega0);
        assert!((fc - fs).abs() < 1e-9 * span(chirp.params()));
    }
}

#[test]
fn time_transform_examples() {
    let t = 1.67e-6;
    assert!(time_transform(0.5 * t, t).unwrap().abs() < 1e-15);
    let quarter = time_transform(0.25 * t, t).unwrap();
    assert!((quarter + (PI / 4.0).cos().atanh() * t).abs() < 1e-15 * t * 10.0);
    assert!(time_transform(0.0, t).is_err());
    assert!(time_transform(t, t).is_err());
}

#[test]
fn sech_edges_are_off_and_amplitude_is_even() {
    for fam in [PulseFamily::SechPrinted, PulseFamily::SechMonotonic] {
        let s = schedule(&params(fam)).unwrap();
        let o0 = s.params().omega0;
        assert!(s.amplitude(s.t_start()) < 1e-3 * o0);
        assert!(s.amplitude(s.t_end()) < 1e-3 * o0);
        for k in 0..50 {
            let t = s.t_end() * k as f64 / 50.0;
            assert!((s.amplitude(t) - s.amplitude(-t)).abs() < 1e-14 * o0);
        }
    }
}

proptest! {
    #[test]
    fn time_transform_is_odd_and_monotone(a in 0.01..0.49f64, b in 0.01..0.49f64) {
        let t = 1.0e-6;
        let x = time_transform(a * t, t).unwrap();
        let y = time_transform((1.0 - a) * t, t).unwrap();
        prop_assert!((x + y).abs() < 1e-9 * t);
        if a < b {
            prop_assert!(time_transform(a * t, t).unwrap() < time_transform(b * t, t).unwrap());
        }
    }

    #[test]
    fn chirp_frequency_is_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let s = schedule(&params(PulseFamily::Chirp)).unwrap();
        let t = s.params().duration;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(s.frequency(lo * t) <= s.frequency(hi * t));
        prop_assert!((s.amplitude(lo * t) - s.amplitude((1.0 - lo) * t)).abs() < 1e-9 * s.params().omega0);
    }
}

#[test]
fn non_overlapping_amplitudes_are_rejected() {
    let a = schedule(&params(PulseFamily::Chirp)).unwrap();
    let weak = PulseParams {
        omega0: 0.0,
        ..params(PulseFamily::Chirp)
    };
    let b = schedule(&weak).unwrap();
    let shifted = Reparametrized {
        base: &b,
        map: |s: f64| s,
        span: b.span(),
        peak: b.peak_time(),
    };
    assert!(trajectory_compare(&a, &shifted, 10).is_err());
}
