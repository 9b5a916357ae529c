//! Derived quantities: activation curves and their analytic fit, process
//! metrics of the two-qubit gate, and negativity.

use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix4};
use rayon::prelude::*;

use crate::dynamics::{lindblad_propagate, two_level_propagator, Decoherence, EffectiveTwoLevelFrame, PerceptronConfig};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, kron, partial_transpose, DensityMatrix, Operator, StepRule, C64};
use crate::units::{to_mhz, to_us};

#[derive(Clone, Debug, PartialEq)]
pub struct ActivationCurve {
    pub bias_points: Vec<f64>,
    pub populations: Vec<f64>,
    /// Configuration the curve was run with; its `bias` field is unused.
    pub config: PerceptronConfig,
    pub input: usize,
}

pub const ACTIVATION_HEADER: &str = "bias_MHz,population,input_string,T_us";

impl ActivationCurve {
    /// Input string with input 0 first, e.g. `"10"`; empty for no inputs.
    pub fn input_string(&self) -> String {
        bitstring(self.input, self.config.n_inputs())
    }

    /// Data rows matching [`ACTIVATION_HEADER`], without the header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        let label = self.input_string();
        let t = to_us(self.config.duration);
        for (b, p) in self.bias_points.iter().zip(&self.populations) {
            let _ = writeln!(out, "{},{},{},{}", to_mhz(*b), p, label, t);
        }
        out
    }
}

pub fn bitstring(x: usize, n: usize) -> String {
    (0..n)
        .map(|j| if (x >> (n - 1 - j)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parameter(format!("{what} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("{what} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter(format!("{what} grid must be strictly ascending")));
    }
    Ok(())
}

/// Excited population of the output qubit after one pulse from `|0⟩`.
pub fn final_population(cfg: &PerceptronConfig, input: usize, rule: &StepRule) -> Result<f64> {
    let u = two_level_propagator(&EffectiveTwoLevelFrame::for_input(cfg, input)?, rule)?;
    Ok(u[(1, 0)].norm_sqr())
}

/// One independent run per bias point, all starting in `|0⟩`.
pub fn activation_sweep(
    cfg: &PerceptronConfig,
    bias_grid: &[f64],
    input: usize,
    rule: &StepRule,
) -> Result<ActivationCurve> {
    cfg.validate()?;
    check_grid(bias_grid, "bias")?;
    let populations = bias_grid
        .par_iter()
        .map(|&b| {
            let c = PerceptronConfig {
                bias: b,
                ..cfg.clone()
            };
            final_population(&c, input, rule)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ActivationCurve {
        bias_points: bias_grid.to_vec(),
        populations,
        config: cfg.clone(),
        input,
    })
}

/// Bias at which the curve first rises through `level`, by linear
/// interpolation between grid points.
pub fn crossing(curve: &ActivationCurve, level: f64) -> Result<f64> {
    let (b, p) = (&curve.bias_points, &curve.populations);
    for k in 1..p.len() {
        if p[k - 1] < level && p[k] >= level {
            let f = (level - p[k - 1]) / (p[k] - p[k - 1]);
            return Ok(b[k - 1] + f * (b[k] - b[k - 1]));
        }
    }
    Err(Error::Parameter(format!(
        "activation curve never rises through {level}"
    )))
}

/// Width of the 10 %–90 % rise.
pub fn rise_width(curve: &ActivationCurve) -> Result<f64> {
    Ok(crossing(curve, 0.9)? - crossing(curve, 0.1)?)
}

/// `ln sech x`, stable for large `|x|`.
fn ln_sech(x: f64) -> f64 {
    let a = x.abs();
    std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p()
}

/// `ln sinh² x` for `x ≠ 0`.
fn ln_sinh_sq(x: f64) -> f64 {
    let a = x.abs();
    2.0 * (a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2)
}

/// Closed-form population transfer of the sech pulse:
/// `P = sech[(ωᵢ+Δ_f)T/2]·sech[(ωᵢ−Δ_f)T/2]·[sin²(√(Ω₀²+Δ_f²)T/2) + sinh²(Δ_f T/2)]`,
/// all arguments angular. Evaluated in the log domain so that large
/// arguments do not overflow.
pub fn analytic_transfer(omega_i: f64, delta_f: f64, omega0: f64, t: f64) -> Result<f64> {
    let a = 0.5 * (omega_i + delta_f) * t;
    let c = 0.5 * (omega_i - delta_f) * t;
    let d = 0.5 * delta_f * t;
    let s = 0.5 * omega0.hypot(delta_f) * t;
    let base = ln_sech(a) + ln_sech(c);
    let mut p = base.exp() * s.sin().powi(2);
    if d != 0.0 {
        p += (base + ln_sinh_sq(d)).exp();
    }
    const SLACK: f64 = 1e-9;
    if !p.is_finite() || !(-SLACK..=1.0 + SLACK).contains(&p) {
        return Err(Error::OutOfRange {
            value: p,
            inputs: format!("omega_i={omega_i:e}, delta_f={delta_f:e}, omega0={omega0:e}, T={t:e}"),
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// The analytic model for an activation curve: the formula's `ωᵢ` is read as
/// the centre of the detuning sweep, `Δ − span/2 + δ`, and its `Δ_f` as the
/// sweep half-width `span/2`. Near `Δ = 0` this reduces to the logistic
/// `1/(1 + e^{−(Δ+δ)T})`.
pub fn activation_model(final_detuning: f64, span: f64, omega0: f64, t_fit: f64, delta: f64) -> Result<f64> {
    analytic_transfer(final_detuning - 0.5 * span + delta, 0.5 * span, omega0, t_fit)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub t_fit: f64,
    pub delta_offset: f64,
    pub residual_rms: f64,
    pub iterations: usize,
}

pub const FIT_MAX_ITERATIONS: usize = 2000;
pub const FIT_TOLERANCE: f64 = 1e-10;

/// Fitted populations for `curve` under `fit`.
pub fn fitted_curve(curve: &ActivationCurve, fit: &FitResult) -> Result<Vec<f64>> {
    let cfg = &curve.config;
    let shift = cfg.shift(curve.input);
    curve
        .bias_points
        .iter()
        .map(|&b| activation_model(b + shift, cfg.chirp_span, cfg.omega0, fit.t_fit, fit.delta_offset))
        .collect()
}

/// Least-squares fit of [`activation_model`] with free `(T, δ)`, by
/// Nelder–Mead from `T₀ = pulse duration`, `δ₀ = 0`.
pub fn fit_activation(curve: &ActivationCurve) -> Result<FitResult> {
    let p = &curve.populations;
    if p.len() < 3 {
        return Err(Error::IllPosedFit("need at least three points".into()));
    }
    let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < 0.2 && hi > 0.8) {
        return Err(Error::IllPosedFit(format!(
            "curve spans [{lo:.3}, {hi:.3}]; both plateaus (< 0.2 and > 0.8) are required"
        )));
    }
    let cfg = &curve.config;
    let t0 = cfg.duration;
    let shift = cfg.shift(curve.input);
    // dimensionless coordinates: (T / T₀, δ·T₀)
    let cost = |x: &[f64; 2]| -> f64 {
        if !(x[0] > 0.0) {
            return f64::INFINITY;
        }
        let mut sum = 0.0;
        for (&b, &pop) in curve.bias_points.iter().zip(p) {
            match activation_model(b + shift, cfg.chirp_span, cfg.omega0, x[0] * t0, x[1] / t0) {
                Ok(m) => sum += (m - pop).powi(2),
                Err(_) => return f64::INFINITY,
            }
        }
        sum
    };
    let out = nelder_mead(&cost, [1.0, 0.0], [0.1, 0.5], FIT_MAX_ITERATIONS, FIT_TOLERANCE);
    let rms = (out.value / p.len() as f64).sqrt();
    let (t_fit, delta) = (out.x[0] * t0, out.x[1] / t0);
    if !out.converged {
        return Err(Error::FitNotConverged {
            iterations: out.iterations,
            t_fit,
            delta,
            rms,
        });
    }
    Ok(FitResult {
        t_fit,
        delta_offset: delta,
        residual_rms: rms,
        iterations: out.iterations,
    })
}

pub(crate) struct Minimum {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Two-dimensional Nelder–Mead with the standard coefficients. Converged
/// when both the spread of function values and the simplex extent fall below
/// `tol` relative to their scale. The function spread also has an absolute
/// floor of `tol²`: an exact fit drives the minimum to rounding noise, where
/// a purely relative test can never be met.
pub(crate) fn nelder_mead<F: Fn(&[f64; 2]) -> f64>(
    f: &F,
    start: [f64; 2],
    step: [f64; 2],
    max_iter: usize,
    tol: f64,
) -> Minimum {
    let mut pts = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut vals = pts.map(|p| f(&p));
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for it in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);

        let fspread = vals[2] - vals[0];
        let extent = (1..3)
            .map(|k| {
                let dx = (pts[k][0] - pts[0][0]).abs() / pts[0][0].abs().max(1.0);
                let dy = (pts[k][1] - pts[0][1]).abs() / pts[0][1].abs().max(1.0);
                dx.max(dy)
            })
            .fold(0.0, f64::max);
        if fspread.is_finite() && fspread <= tol * vals[0].abs() + tol * tol && extent <= tol.sqrt() {
            return Minimum {
                x: pts[0],
                value: vals[0],
                iterations: it,
                converged: true,
            };
        }

        let centroid = lerp(&pts[0], &pts[1], 0.5);
        let reflected = lerp(&centroid, &pts[2], -1.0);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &pts[2], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[2] {
            let c = lerp(&centroid, &reflected, 0.5);
            (c, f(&c))
        } else {
            let c = lerp(&centroid, &pts[2], 0.5);
            (c, f(&c))
        };
        if fc < vals[2].min(fr) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        for k in 1..3 {
            pts[k] = lerp(&pts[0], &pts[k], 0.5);
            vals[k] = f(&pts[k]);
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    Minimum {
        x: pts[best],
        value: vals[best],
        iterations: max_iter,
        converged: false,
    }
}

/// A linear map on `d×d` matrices, stored as the images of the matrix units:
/// `images[i·d + j] = M(|i⟩⟨j|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    images: Vec<DMatrix<C64>>,
    dims: Vec<usize>,
}

pub const CHANNEL_TOL: f64 = 1e-8;
pub const CP_TOL: f64 = 1e-7;

fn unit(d: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    m[(i, j)] = C64::from(1.0);
    m
}

impl QuantumChannel {
    pub fn from_map<F>(dims: Vec<usize>, map: F) -> Result<Self>
    where
        F: Fn(&DMatrix<C64>) -> Result<DMatrix<C64>> + Sync,
    {
        let d: usize = dims.iter().product();
        if d == 0 {
            return Err(Error::Dimension("empty channel".into()));
        }
        let images = (0..d * d)
            .into_par_iter()
            .map(|k| {
                let img = map(&unit(d, k / d, k % d))?;
                if img.shape() != (d, d) {
                    return Err(Error::Dimension(format!(
                        "map returned a {:?} matrix, expected {d}×{d}",
                        img.shape()
                    )));
                }
                Ok(img)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { images, dims })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        Self::from_map(dims, |m| Ok(m.clone())).expect("identity map")
    }

    /// `ρ ↦ tr(ρ)·I/d`.
    pub fn completely_depolarizing(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::from_map(dims, |m| Ok(DMatrix::identity(d, d) * (m.trace() / C64::from(d as f64))))
            .expect("depolarizing map")
    }

    pub fn from_unitary(u: &Operator) -> Result<Self> {
        if !u.is_unitary(1e-8) {
            return Err(Error::NotUnitary {
                deviation: u.unitarity_error(),
            });
        }
        let (m, md) = (u.entries(), u.entries().adjoint());
        Self::from_map(u.dims().to_vec(), |x| Ok(m * x * &md))
    }

    /// Two-qubit (input, output) channel of the driven gate under the master
    /// equation.
    pub fn from_lindblad(cfg: &PerceptronConfig, decoherence: &Decoherence, rule: &StepRule) -> Result<Self> {
        Self::from_map(vec![2, 2], |x| {
            let m = Matrix4::from_fn(|i, j| x[(i, j)]);
            let out = lindblad_propagate(cfg, &m, decoherence, rule)?;
            Ok(DMatrix::from_fn(4, 4, |i, j| out[(i, j)]))
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn apply_matrix(&self, x: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.dim();
        if x.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "channel on dimension {d} applied to a {:?} matrix",
                x.shape()
            )));
        }
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let c = x[(i, j)];
                if c != C64::from(0.0) {
                    out += &self.images[i * d + j] * c;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new_unchecked(self.apply_matrix(rho.entries())?, self.dims.clone())
    }

    /// `Σ |i⟩⟨j| ⊗ M(|i⟩⟨j|)`; positive semidefinite iff the map is
    /// completely positive.
    pub fn choi(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut c = DMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                c.view_mut((i * d, j * d), (d, d)).copy_from(&self.images[i * d + j]);
            }
        }
        c
    }

    /// `max |tr M(|i⟩⟨j|) − δ_ij|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim();
        (0..d * d)
            .map(|k| {
                let want = if k / d == k % d { 1.0 } else { 0.0 };
                (self.images[k].trace() - C64::from(want)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max ‖M(|j⟩⟨i|) − M(|i⟩⟨j|)†‖`.
    pub fn hermiticity_preservation_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let diff = &self.images[j * d + i] - self.images[i * d + j].adjoint();
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let c = self.choi();
        let n = c.nrows();
        let op = Operator::new(c, vec![n])?;
        Ok(hermitian_eig(&op)?.values[0])
    }

    pub fn validate(&self) -> Result<()> {
        let tp = self.trace_preservation_error();
        if tp > CHANNEL_TOL {
            return Err(Error::InvalidDensity(format!("channel not trace preserving ({tp:e})")));
        }
        let hp = self.hermiticity_preservation_error();
        if hp > CHANNEL_TOL {
            return Err(Error::NotHermitian { deviation: hp });
        }
        let min = self.choi_min_eigenvalue()?;
        if min < -CP_TOL {
            return Err(Error::InvalidDensity(format!(
                "channel not completely positive (Choi eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    /// Largest entrywise difference between the two channels' images.
    pub fn distance(&self, other: &QuantumChannel) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::Dimension("channels on different spaces".into()));
        }
        Ok(self
            .images
            .iter()
            .zip(&other.images)
            .flat_map(|(a, b)| (a - b).iter().map(|z| z.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max))
    }
}

fn require_two_qubits(dims: &[usize]) -> Result<()> {
    if dims != [2, 2] {
        return Err(Error::Dimension(format!("expected two qubits, got dims {dims:?}")));
    }
    Ok(())
}

/// How well the channel leaves the input (first) qubit's basis states alone:
/// `½ Σᵢ tr[(|i⟩⟨i| ⊗ I)·M(|i⟩⟨i| ⊗ I/2)]`.
pub fn avg_controlled_fidelity(m: &QuantumChannel) -> Result<f64> {
    require_two_qubits(m.dims())?;
    let id = Operator::identity(vec![2]);
    let mut total = 0.0;
    for i in 0..2 {
        let proj = Operator::from_matrix(unit(2, i, i))?;
        let p_full = kron(&proj, &id);
        let input = kron(&proj, &id.scaled(C64::from(0.5)));
        let out = m.apply_matrix(input.entries())?;
        total += (p_full.entries() * out).trace().re;
    }
    Ok(0.5 * total)
}

/// The six single-qubit Pauli eigenstates as density matrices.
pub fn pauli_eigenstates() -> Vec<DMatrix<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        [C64::from(1.0), C64::from(0.0)],
        [C64::from(0.0), C64::from(1.0)],
        [C64::from(h), C64::from(h)],
        [C64::from(h), C64::from(-h)],
        [C64::from(h), C64::new(0.0, h)],
        [C64::from(h), C64::new(0.0, -h)],
    ];
    kets.iter()
        .map(|k| DMatrix::from_fn(2, 2, |i, j| k[i] * k[j].conj()))
        .collect()
}

/// Mean output purity over the 36 products of Pauli eigenstates.
pub fn avg_purity(m: &QuantumChannel) -> Result<f64> {
    require_two_qubits(m.dims())?;
    let states = pauli_eigenstates();
    let mut total = 0.0;
    for a in &states {
        for b in &states {
            let out = m.apply_matrix(&a.kronecker(b))?;
            total += (&out * &out).trace().re;
        }
    }
    Ok(total / 36.0)
}

/// `Σ |min(λ, 0)|` over the spectrum of the partial transpose on `subsystem`.
pub fn negativity(rho: &DensityMatrix, subsystem: usize) -> Result<f64> {
    require_two_qubits(rho.dims())?;
    let pt = partial_transpose(rho, subsystem)?;
    Ok(hermitian_eig(&pt)?.values.iter().map(|&v| (-v).max(0.0)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityRow {
    pub bias: f64,
    pub unitary: f64,
    pub damped: Option<f64>,
}

/// Negativity after the gate with the input in `(|0⟩+|1⟩)/√2` and the output
/// in `|0⟩`, unitary and (optionally) with amplitude damping `t1`.
pub fn negativity_sweep(
    cfg: &PerceptronConfig,
    bias_grid: &[f64],
    t1: Option<f64>,
    rule: &StepRule,
) -> Result<Vec<NegativityRow>> {
    cfg.validate()?;
    check_grid(bias_grid, "bias")?;
    if cfg.n_inputs() != 1 {
        return Err(Error::Parameter(format!(
            "negativity sweep needs exactly one input weight, got {}",
            cfg.n_inputs()
        )));
    }
    let rho0 = crate::dynamics::superposition_input()?.to_density();
    bias_grid
        .par_iter()
        .map(|&b| {
            let c = PerceptronConfig {
                bias: b,
                ..cfg.clone()
            };
            let u = crate::dynamics::perceptron_unitary(&c, rule)?;
            let unitary = negativity(&rho0.conjugate_by(&u)?, 0)?;
            let damped = match t1 {
                Some(t1) => {
                    let r = crate::dynamics::evolve_lindblad(&c, &rho0, &Decoherence::amplitude_damping(t1), rule)?;
                    Some(negativity(&r, 0)?)
                }
                None => None,
            };
            Ok(NegativityRow { bias: b, unitary, damped })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightRow {
    pub weight: f64,
    pub population_input0: f64,
    pub population_input1: f64,
}

/// Output populations for both input values of a single-input gate as the
/// weight is varied at fixed bias.
pub fn weight_sweep(cfg: &PerceptronConfig, weights: &[f64], bias: f64, rule: &StepRule) -> Result<Vec<WeightRow>> {
    check_grid(weights, "weight")?;
    weights
        .par_iter()
        .map(|&w| {
            let c = PerceptronConfig {
                weights: vec![w],
                bias,
                ..cfg.clone()
            };
            c.validate()?;
            Ok(WeightRow {
                weight: w,
                population_input0: final_population(&c, 0, rule)?,
                population_input1: final_population(&c, 1, rule)?,
            })
        })
        .collect()
}
