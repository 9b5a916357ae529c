//! Drive schedules: the sin/sin² chirp and two hyperbolic-secant variants.
//!
//! A schedule maps time to `(ω_p, Ω)`: drive frequency and Rabi amplitude,
//! both in rad/s. The frequency law is always written as
//! `ω_p(t) = ω_i + (ω_f − ω_i)·s(t)` with a dimensionless shape `s`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ghz, mhz, to_ghz, to_mhz, to_ns, us};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseFamily {
    /// `s = sin²(πt/2T)`, `Ω = Ω₀ sin(πt/T)` on `[0, T]`.
    Chirp,
    /// `s = tanh²(πt/T)`, `Ω = Ω₀ sech(πt/T)`. Starts and ends at `ω_f`.
    SechPrinted,
    /// `s = (1 + tanh(πt/T))/2`, `Ω = Ω₀ sech(πt/T)`. Sweeps `ω_i → ω_f`.
    SechMonotonic,
}

impl PulseFamily {
    pub fn is_sech(self) -> bool {
        !matches!(self, PulseFamily::Chirp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    pub duration: f64,
    pub omega_i: f64,
    pub omega_f: f64,
    pub omega0: f64,
    pub family: PulseFamily,
    /// Half-width of the truncated sech support, in units of `duration`.
    pub sech_window: f64,
}

pub const DEFAULT_DURATION_US: f64 = 1.67;
pub const DEFAULT_AMPLITUDE_MHZ: f64 = 19.7;
pub const DEFAULT_CHIRP_SPAN_MHZ: f64 = 80.0;
pub const DEFAULT_SECH_WINDOW: f64 = 4.0;

impl Default for PulseParams {
    fn default() -> Self {
        let omega_f = ghz(6.189);
        Self {
            duration: us(DEFAULT_DURATION_US),
            omega_i: omega_f - mhz(DEFAULT_CHIRP_SPAN_MHZ),
            omega_f,
            omega0: mhz(DEFAULT_AMPLITUDE_MHZ),
            family: PulseFamily::Chirp,
            sech_window: DEFAULT_SECH_WINDOW,
        }
    }
}

impl PulseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Parameter(format!(
                "pulse duration {} must be positive",
                self.duration
            )));
        }
        if !(self.omega0 >= 0.0) || !self.omega0.is_finite() {
            return Err(Error::Parameter(format!(
                "pulse amplitude {} must be non-negative",
                self.omega0
            )));
        }
        if !self.omega_i.is_finite() || !self.omega_f.is_finite() {
            return Err(Error::Parameter("non-finite pulse frequency".into()));
        }
        if self.family.is_sech() && !(self.sech_window >= 3.0) {
            return Err(Error::Parameter(format!(
                "sech window {} must be at least 3",
                self.sech_window
            )));
        }
        Ok(())
    }
}

/// A sampled-on-demand drive schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSchedule {
    params: PulseParams,
    t_start: f64,
    t_end: f64,
}

impl PulseSchedule {
    pub fn params(&self) -> &PulseParams {
        &self.params
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Fraction of the frequency sweep completed at `t`.
    pub fn shape(&self, t: f64) -> f64 {
        let p = &self.params;
        match p.family {
            PulseFamily::Chirp => {
                let s = (PI * t / (2.0 * p.duration)).sin();
                s * s
            }
            PulseFamily::SechPrinted => {
                let th = (PI * t / p.duration).tanh();
                th * th
            }
            PulseFamily::SechMonotonic => 0.5 * (1.0 + (PI * t / p.duration).tanh()),
        }
    }

    pub fn frequency(&self, t: f64) -> f64 {
        let p = &self.params;
        p.omega_i + (p.omega_f - p.omega_i) * self.shape(t)
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let p = &self.params;
        match p.family {
            PulseFamily::Chirp => p.omega0 * (PI * t / p.duration).sin(),
            PulseFamily::SechPrinted | PulseFamily::SechMonotonic => {
                p.omega0 / (PI * t / p.duration).cosh()
            }
        }
    }

    /// `(ω_p(t), Ω(t))`.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        (self.frequency(t), self.amplitude(t))
    }

    /// Time of peak amplitude.
    pub fn peak_time(&self) -> f64 {
        match self.params.family {
            PulseFamily::Chirp => 0.5 * self.params.duration,
            _ => 0.0,
        }
    }

    fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = (self.t_start, self.t_end);
        let steps = n.max(2) - 1;
        (0..=steps).map(move |k| a + (b - a) * k as f64 / steps as f64)
    }

    /// Two-column CSV `time_ns,freq_GHz` on `n` uniform samples.
    pub fn frequency_csv(&self, n: usize) -> String {
        let mut out = String::from("time_ns,freq_GHz\n");
        for t in self.grid(n) {
            let _ = writeln!(out, "{},{}", to_ns(t), to_ghz(self.frequency(t)));
        }
        out
    }

    /// Two-column CSV `time_ns,amp_MHz` on `n` uniform samples.
    pub fn amplitude_csv(&self, n: usize) -> String {
        let mut out = String::from("time_ns,amp_MHz\n");
        for t in self.grid(n) {
            let _ = writeln!(out, "{},{}", to_ns(t), to_mhz(self.amplitude(t)));
        }
        out
    }
}

pub fn chirp_schedule(p: &PulseParams) -> Result<PulseSchedule> {
    p.validate()?;
    if p.family != PulseFamily::Chirp {
        return Err(Error::Parameter(format!(
            "chirp schedule requested for family {:?}",
            p.family
        )));
    }
    Ok(PulseSchedule {
        params: *p,
        t_start: 0.0,
        t_end: p.duration,
    })
}

/// Sech schedule truncated to `±sech_window·T`.
pub fn sech_schedule(p: &PulseParams) -> Result<PulseSchedule> {
    p.validate()?;
    if !p.family.is_sech() {
        return Err(Error::Parameter(
            "sech schedule requested for the chirp family".into(),
        ));
    }
    let half = p.sech_window * p.duration;
    Ok(PulseSchedule {
        params: *p,
        t_start: -half,
        t_end: half,
    })
}

pub fn schedule(p: &PulseParams) -> Result<PulseSchedule> {
    match p.family {
        PulseFamily::Chirp => chirp_schedule(p),
        _ => sech_schedule(p),
    }
}

fn check_open_interval(t_prime: f64, duration: f64) -> Result<()> {
    if !(duration > 0.0) {
        return Err(Error::Parameter(format!("duration {duration} must be positive")));
    }
    if !(t_prime > 0.0 && t_prime < duration) {
        return Err(Error::Parameter(format!(
            "t' = {t_prime:e} is outside (0, {duration:e}); the endpoints map to infinity"
        )));
    }
    Ok(())
}

/// `t = artanh(−cos(πt′/T))·T`, as printed.
pub fn time_transform(t_prime: f64, duration: f64) -> Result<f64> {
    check_open_interval(t_prime, duration)?;
    Ok((-(PI * t_prime / duration).cos()).atanh() * duration)
}

/// `t = artanh(−cos(πt′/T))·T/π`. Under this map `sech(πt/T) = sin(πt′/T)`
/// and `(1 + tanh(πt/T))/2 = sin²(πt′/2T)`, so the monotonic sech pulse and
/// the chirp trace the same path.
pub fn time_transform_scaled(t_prime: f64, duration: f64) -> Result<f64> {
    Ok(time_transform(t_prime, duration)? / PI)
}

/// Anything that traces a path in the (frequency, amplitude) plane with a
/// single amplitude maximum.
pub trait Trajectory {
    fn span(&self) -> (f64, f64);
    fn sample(&self, t: f64) -> (f64, f64);
    fn peak_time(&self) -> f64;
}

impl Trajectory for PulseSchedule {
    fn span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    fn sample(&self, t: f64) -> (f64, f64) {
        PulseSchedule::sample(self, t)
    }

    fn peak_time(&self) -> f64 {
        PulseSchedule::peak_time(self)
    }
}

/// A trajectory evaluated at `map(s)`, for a strictly increasing `map`.
pub struct Reparametrized<'a, S, F> {
    pub base: &'a S,
    pub map: F,
    pub span: (f64, f64),
    /// Parameter value at which `map` reaches the base peak time.
    pub peak: f64,
}

impl<S: Trajectory, F: Fn(f64) -> f64> Trajectory for Reparametrized<'_, S, F> {
    fn span(&self) -> (f64, f64) {
        self.span
    }

    fn sample(&self, s: f64) -> (f64, f64) {
        self.base.sample((self.map)(s))
    }

    fn peak_time(&self) -> f64 {
        self.peak
    }
}

/// Finds `t` in `[lo, hi]` where the amplitude equals `target`, given that
/// the amplitude is monotone on the interval.
fn invert_amplitude<T: Trajectory>(tr: &T, lo: f64, hi: f64, target: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let rising = tr.sample(b).1 >= tr.sample(a).1;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let above = tr.sample(m).1 >= target;
        if above == rising {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Largest frequency difference between two trajectories at equal amplitude,
/// comparing rising branch with rising branch and falling with falling, over
/// `n` amplitude levels inside the common amplitude range. The result is
/// invariant under any monotone reparametrization of either trajectory.
pub fn trajectory_compare<A: Trajectory, B: Trajectory>(a: &A, b: &B, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("need at least one comparison level".into()));
    }
    let branches = |tr: &dyn Fn() -> ((f64, f64), f64)| {
        let ((t0, t1), tp) = tr();
        [(t0, tp), (tp, t1)]
    };
    let ba = branches(&|| (a.span(), a.peak_time()));
    let bb = branches(&|| (b.span(), b.peak_time()));

    let mut worst: f64 = 0.0;
    for (&(a0, a1), &(b0, b1)) in ba.iter().zip(bb.iter()) {
        let range = |lo: f64, hi: f64, amp: &dyn Fn(f64) -> f64| {
            let (x, y) = (amp(lo), amp(hi));
            (x.min(y), x.max(y))
        };
        let (amin, amax) = range(a0, a1, &|t| a.sample(t).1);
        let (bmin, bmax) = range(b0, b1, &|t| b.sample(t).1);
        let lo = amin.max(bmin);
        let hi = amax.min(bmax);
        if !(hi > lo) {
            return Err(Error::Parameter(format!(
                "amplitude ranges [{amin:e}, {amax:e}] and [{bmin:e}, {bmax:e}] do not overlap"
            )));
        }
        for k in 0..n {
            let level = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
            let ta = invert_amplitude(a, a0, a1, level);
            let tb = invert_amplitude(b, b0, b1, level);
            worst = worst.max((a.sample(ta).0 - b.sample(tb).0).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chirp() -> PulseSchedule {
        chirp_schedule(&PulseParams::default()).unwrap()
    }

    fn sech(family: PulseFamily) -> PulseSchedule {
        sech_schedule(&PulseParams {
            family,
            ..PulseParams::default()
        })
        .unwrap()
    }

    #[test]
    fn chirp_endpoints_and_midpoint() {
        let s = chirp();
        let p = *s.params();
        let t = p.duration;
        let (f0, a0) = s.sample(0.0);
        assert_eq!(f0, p.omega_i);
        assert_eq!(a0, 0.0);
        let (f1, a1) = s.sample(t);
        assert!((f1 - p.omega_f).abs() <= 1e-15 * p.omega_f);
        assert!(a1.abs() < 1e-12 * p.omega0);
        let (fm, am) = s.sample(0.5 * t);
        assert!((fm - 0.5 * (p.omega_i + p.omega_f)).abs() <= 1e-15 * p.omega_f);
        assert!((am - p.omega0).abs() <= 1e-15 * p.omega0);
    }

    #[test]
    fn chirp_frequency_is_monotone_and_amplitude_symmetric() {
        let s = chirp();
        let t = s.params().duration;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let tk = t * k as f64 / 1000.0;
            let f = s.frequency(tk);
            assert!(f >= prev);
            prev = f;
            let sym = s.amplitude(t - tk) - s.amplitude(tk);
            assert!(sym.abs() < 1e-9 * s.params().omega0);
        }
    }

    #[test]
    fn sech_centre_and_edges() {
        let s = sech(PulseFamily::SechPrinted);
        let p = *s.params();
        assert_eq!(s.sample(0.0), (p.omega_i, p.omega0));
        let edge = s.amplitude(s.t_end());
        assert!(edge < 1e-3 * p.omega0);
        assert!(edge <= p.omega0 / (PI * p.sech_window).cosh() * (1.0 + 1e-12));
        for k in 0..100 {
            let t = s.t_end() * k as f64 / 100.0;
            assert!((s.amplitude(t) - s.amplitude(-t)).abs() <= 1e-14 * p.omega0);
        }
        let m = sech(PulseFamily::SechMonotonic);
        assert!((m.frequency(0.0) - 0.5 * (p.omega_i + p.omega_f)).abs() < 1e-3);
    }

    #[test]
    fn sech_window_must_be_at_least_three() {
        let p = PulseParams {
            family: PulseFamily::SechMonotonic,
            sech_window: 2.5,
            ..PulseParams::default()
        };
        assert!(sech_schedule(&p).is_err());
        assert!(chirp_schedule(&p).is_err());
        assert!(sech_schedule(&PulseParams::default()).is_err());
    }

    #[test]
    fn time_transform_values() {
        let t = 1.0;
        assert!(time_transform(0.5 * t, t).unwrap().abs() < 1e-15);
        let quarter = time_transform(0.25 * t, t).unwrap();
        assert!((quarter + (PI / 4.0).cos().atanh() * t).abs() < 1e-15);
        assert!(time_transform(0.0, t).is_err());
        assert!(time_transform(t, t).is_err());
    }

    #[test]
    fn time_transform_is_odd_and_increasing() {
        let t = 1.67e-6;
        let mut prev = f64::NEG_INFINITY;
        for k in 1..1000 {
            let tp = t * k as f64 / 1000.0;
            let v = time_transform(tp, t).unwrap();
            assert!(v > prev);
            prev = v;
            let mirrored = time_transform(t - tp, t).unwrap();
            assert!((v + mirrored).abs() <= 1e-9 * v.abs().max(t));
        }
    }

    #[test]
    fn csv_export_headers() {
        let s = chirp();
        let f = s.frequency_csv(5);
        let a = s.amplitude_csv(5);
        assert!(f.starts_with("time_ns,freq_GHz\n"));
        assert!(a.starts_with("time_ns,amp_MHz\n"));
        assert_eq!(f.lines().count(), 6);
        assert!(a.lines().nth(3).unwrap().starts_with("835,19.7"));
    }

    #[test]
    fn trajectory_self_distance_is_zero() {
        let s = chirp();
        assert_eq!(trajectory_compare(&s, &s, 200).unwrap(), 0.0);
    }
}
