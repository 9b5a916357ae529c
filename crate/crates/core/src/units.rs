//! Boundary unit conversions. Everything inside the crate is SI with angular
//! frequencies in rad/s; files and command-line flags use GHz, MHz and µs.

use std::f64::consts::TAU;

pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU / 1e9
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

pub fn to_us(t: f64) -> f64 {
    t * 1e6
}

pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert!((to_mhz(mhz(19.7)) - 19.7).abs() < 1e-12);
        assert!((to_ghz(ghz(6.189)) - 6.189).abs() < 1e-12);
        assert!((to_us(us(1.67)) - 1.67).abs() < 1e-12);
        assert!((to_ns(ns(60.0)) - 60.0).abs() < 1e-12);
    }
}
