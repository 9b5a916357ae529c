//! TOML run configuration. Frequencies are MHz/GHz and times µs in the file;
//! [`RunConfig`] converts to rad/s and seconds exactly once.
//!
//! ```toml
//! [device]                 # any DeviceFile key; omitted keys take defaults
//! omega_c_ghz = 7.0
//!
//! [perceptron]
//! weights_mhz = [-5.2]     # input 0 first
//! bias_mhz = 0.0
//!
//! [pulse]
//! duration_us = 1.67
//! amplitude_mhz = 19.7
//! chirp_span_mhz = 80.0
//! family = "chirp"         # chirp | sech_printed | sech_monotonic
//! sech_window = 4.0
//!
//! [sweep]                  # grid for the swept quantity
//! start = -15.0
//! stop = 15.0
//! points = 121
//! quantity = "bias"        # bias (MHz) | weight (MHz) | coupler (GHz)
//!
//! [activation]
//! durations_us = [0.42, 0.83, 1.67, 3.33]
//! inputs = ["0", "1"]
//!
//! [weight_sweep]
//! biases_mhz = [0.8, 4.0]
//!
//! [negativity]
//! t1_us = 20.0             # omit for the unitary curve only
//!
//! [decompose]
//! n_inputs = 1
//! thetas = { "0" = 0.0, "1" = 3.141592653589793 }
//! max_table_n = 4
//! cnot_fidelity = 0.997
//! cnot_time_ns = 60.0
//!
//! [fit]
//! durations_us = [1.67]
//! input = "0"
//!
//! [output]
//! path = "out.csv"
//! format = "csv"           # csv | svg
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::device::{DeviceFile, DeviceParams};
use crate::dynamics::{PerceptronConfig, MAX_INPUTS};
use crate::error::{Error, Result};
use crate::pulse::{PulseFamily, DEFAULT_AMPLITUDE_MHZ, DEFAULT_CHIRP_SPAN_MHZ, DEFAULT_DURATION_US, DEFAULT_SECH_WINDOW};
use crate::units::{ghz, mhz, us};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceFile,
    pub perceptron: PerceptronSection,
    pub pulse: PulseSection,
    pub sweep: Option<SweepSection>,
    pub activation: ActivationSection,
    pub weight_sweep: WeightSweepSection,
    pub negativity: NegativitySection,
    pub decompose: DecomposeSection,
    pub fit: FitSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptronSection {
    pub weights_mhz: Vec<f64>,
    pub bias_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub duration_us: f64,
    pub amplitude_mhz: f64,
    pub chirp_span_mhz: f64,
    pub family: PulseFamily,
    pub sech_window: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            duration_us: DEFAULT_DURATION_US,
            amplitude_mhz: DEFAULT_AMPLITUDE_MHZ,
            chirp_span_mhz: DEFAULT_CHIRP_SPAN_MHZ,
            family: PulseFamily::Chirp,
            sech_window: DEFAULT_SECH_WINDOW,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    Bias,
    Weight,
    Coupler,
}

impl SweepQuantity {
    pub fn unit(self) -> &'static str {
        match self {
            SweepQuantity::Coupler => "GHz",
            _ => "MHz",
        }
    }

    fn to_internal(self, v: f64) -> f64 {
        match self {
            SweepQuantity::Coupler => ghz(v),
            _ => mhz(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub quantity: Option<SweepQuantity>,
}

impl SweepSection {
    /// Default grid for each swept quantity, in file units.
    pub fn default_for(q: SweepQuantity) -> Self {
        let (start, stop, points) = match q {
            SweepQuantity::Bias => (-15.0, 15.0, 121),
            SweepQuantity::Weight => (-10.0, 0.0, 41),
            SweepQuantity::Coupler => (5.6, 7.8, 100),
        };
        Self {
            start,
            stop,
            points,
            quantity: Some(q),
        }
    }

    pub fn validate(&self, expected: SweepQuantity) -> Result<()> {
        if let Some(q) = self.quantity {
            if q != expected {
                return Err(Error::Config(format!(
                    "sweep quantity is {q:?} but this command sweeps {expected:?}"
                )));
            }
        }
        if self.points < 2 {
            return Err(Error::Config(format!("sweep needs at least 2 points, got {}", self.points)));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Config(format!(
                "sweep start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Grid in file units.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / n as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivationSection {
    pub durations_us: Vec<f64>,
    /// Input strings to sweep; empty means the all-zero string only.
    pub inputs: Vec<String>,
}

impl Default for ActivationSection {
    fn default() -> Self {
        Self {
            durations_us: vec![DEFAULT_DURATION_US],
            inputs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSweepSection {
    pub biases_mhz: Vec<f64>,
}

impl Default for WeightSweepSection {
    fn default() -> Self {
        Self {
            biases_mhz: vec![0.8, 4.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativitySection {
    pub t1_us: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub n_inputs: u32,
    /// Angle per input string, keyed by the bitstring (input 0 first).
    pub thetas: BTreeMap<String, f64>,
    pub max_table_n: u32,
    pub cnot_fidelity: f64,
    pub cnot_time_ns: f64,
}

impl Default for DecomposeSection {
    fn default() -> Self {
        Self {
            n_inputs: 1,
            thetas: BTreeMap::new(),
            max_table_n: 4,
            cnot_fidelity: crate::circuits::DEFAULT_CNOT_FIDELITY,
            cnot_time_ns: 60.0,
        }
    }
}

impl DecomposeSection {
    /// Angles in input-index order. Missing strings are an error.
    pub fn theta_vector(&self) -> Result<Vec<f64>> {
        let n = self.n_inputs as usize;
        if n == 0 || n > MAX_INPUTS {
            return Err(Error::Config(format!("n_inputs must be in 1..={MAX_INPUTS}, got {n}")));
        }
        for key in self.thetas.keys() {
            parse_bitstring(key, n)?;
        }
        (0..1usize << n)
            .map(|x| {
                let key = crate::analysis::bitstring(x, n);
                self.thetas
                    .get(&key)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("decompose.thetas has no entry for \"{key}\"")))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub durations_us: Vec<f64>,
    /// Input string of the fitted curve; empty means all zeros.
    pub input: String,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            durations_us: vec![DEFAULT_DURATION_US],
            input: String::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Svg,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: OutputFormat,
}

/// Parses an input string such as `"10"` (input 0 first) into its index.
/// The empty string is the only string for a gate with no inputs.
pub fn parse_bitstring(s: &str, n_inputs: usize) -> Result<usize> {
    if s.len() != n_inputs || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::Config(format!(
            "input string \"{s}\" is not a {n_inputs}-bit string of 0/1"
        )));
    }
    Ok(s.chars().fold(0, |acc, c| 2 * acc + usize::from(c == '1')))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn device_params(&self) -> Result<DeviceParams> {
        let p = DeviceParams::from(self.device.clone());
        p.validate()?;
        Ok(p)
    }

    /// Gate configuration with the pulse duration overridden by `duration_us`
    /// when given.
    pub fn perceptron_config(&self, duration_us: Option<f64>) -> Result<PerceptronConfig> {
        let d = self.device_params()?;
        let cfg = PerceptronConfig {
            weights: self.perceptron.weights_mhz.iter().map(|&w| mhz(w)).collect(),
            bias: mhz(self.perceptron.bias_mhz),
            qubit_freq: d.omega1,
            duration: us(duration_us.unwrap_or(self.pulse.duration_us)),
            omega0: mhz(self.pulse.amplitude_mhz),
            chirp_span: mhz(self.pulse.chirp_span_mhz),
            family: self.pulse.family,
            sech_window: self.pulse.sech_window,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// The sweep for `q`: the `[sweep]` section if present (validated against
    /// `q`), otherwise the default grid.
    pub fn sweep_for(&self, q: SweepQuantity) -> Result<SweepSection> {
        let s = self.sweep.clone().unwrap_or_else(|| SweepSection::default_for(q));
        s.validate(q)?;
        Ok(SweepSection {
            quantity: Some(q),
            ..s
        })
    }

    /// Resolves a configured input string; empty selects all zeros.
    pub fn input_index(&self, s: &str) -> Result<usize> {
        if s.is_empty() {
            return Ok(0);
        }
        parse_bitstring(s, self.perceptron.weights_mhz.len())
    }

    /// Sweep grid converted to rad/s.
    pub fn grid_for(&self, q: SweepQuantity) -> Result<Vec<f64>> {
        Ok(self.sweep_for(q)?.values().into_iter().map(|v| q.to_internal(v)).collect())
    }
}
