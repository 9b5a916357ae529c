//! Output-qubit dynamics in the frame co-rotating with the drive phase.
//!
//! With `Δ(t) = ω_p(t) − ω_q,eff` the driven two-level Hamiltonian is
//! `H(t) = −Δ(t)|1⟩⟨1| + (Ω(t)/2)σx`. Excited inputs lower the output
//! frequency by `Σ w_j x_j`, so each input string only changes the detuning
//! offset; everything here is built from detunings relative to ω₁, never from
//! absolute frequencies, which keeps the shift equivalence exact.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{propagate, DensityMatrix, Operator, QuantumState, StepRule, C64, I};
use crate::pulse::{schedule, PulseFamily, PulseParams, PulseSchedule, DEFAULT_CHIRP_SPAN_MHZ};
use crate::units::{ghz, mhz};

pub const MAX_INPUTS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct PerceptronConfig {
    /// `w_j` in rad/s, one per input qubit; input 0 is the most significant bit.
    pub weights: Vec<f64>,
    /// `b = ω_f − ω₁`.
    pub bias: f64,
    /// Bare output-qubit frequency ω₁.
    pub qubit_freq: f64,
    pub duration: f64,
    pub omega0: f64,
    /// `ω_f − ω_i`.
    pub chirp_span: f64,
    pub family: PulseFamily,
    pub sech_window: f64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        let p = PulseParams::default();
        Self {
            weights: Vec::new(),
            bias: 0.0,
            qubit_freq: ghz(6.189),
            duration: p.duration,
            omega0: p.omega0,
            chirp_span: mhz(DEFAULT_CHIRP_SPAN_MHZ),
            family: p.family,
            sech_window: p.sech_window,
        }
    }
}

impl PerceptronConfig {
    /// Single input with `w₁/2π = −5.2 MHz`, the two-qubit operating point.
    pub fn two_qubit(bias: f64) -> Self {
        Self {
            weights: vec![mhz(-5.2)],
            bias,
            ..Self::default()
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() > MAX_INPUTS {
            return Err(Error::Parameter(format!(
                "{} inputs requested; at most {MAX_INPUTS} are supported",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) || !self.bias.is_finite() {
            return Err(Error::Parameter("non-finite weight or bias".into()));
        }
        if !(self.chirp_span.is_finite()) {
            return Err(Error::Parameter("non-finite chirp span".into()));
        }
        self.pulse_params().validate()
    }

    /// Absolute drive parameters: `ω_f = ω₁ + b`, `ω_i = ω_f − span`.
    pub fn pulse_params(&self) -> PulseParams {
        let omega_f = self.qubit_freq + self.bias;
        PulseParams {
            duration: self.duration,
            omega_i: omega_f - self.chirp_span,
            omega_f,
            omega0: self.omega0,
            family: self.family,
            sech_window: self.sech_window,
        }
    }

    /// `Σ w_j x_j` for the input string with index `x`.
    pub fn shift(&self, x: usize) -> f64 {
        let n = self.weights.len();
        self.weights
            .iter()
            .enumerate()
            .filter(|(j, _)| (x >> (n - 1 - j)) & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    /// Final detuning `Δ = Σ w_j x_j + b`.
    pub fn final_detuning(&self, x: usize) -> f64 {
        self.shift(x) + self.bias
    }
}

/// The output qubit's drive, expressed in detunings: the schedule's
/// "frequency" is `Δ(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveTwoLevelFrame {
    schedule: PulseSchedule,
}

impl EffectiveTwoLevelFrame {
    pub fn new(
        initial_detuning: f64,
        final_detuning: f64,
        omega0: f64,
        duration: f64,
        family: PulseFamily,
        sech_window: f64,
    ) -> Result<Self> {
        let p = PulseParams {
            duration,
            omega_i: initial_detuning,
            omega_f: final_detuning,
            omega0,
            family,
            sech_window,
        };
        Ok(Self {
            schedule: schedule(&p)?,
        })
    }

    pub fn for_input(cfg: &PerceptronConfig, x: usize) -> Result<Self> {
        if x >> cfg.n_inputs() != 0 {
            return Err(Error::Parameter(format!(
                "input index {x} out of range for {} inputs",
                cfg.n_inputs()
            )));
        }
        let df = cfg.final_detuning(x);
        Self::new(
            df - cfg.chirp_span,
            df,
            cfg.omega0,
            cfg.duration,
            cfg.family,
            cfg.sech_window,
        )
    }

    /// Frame for an absolute drive acting on a qubit at `qubit_freq_eff`.
    pub fn from_absolute(pulse: &PulseParams, qubit_freq_eff: f64) -> Result<Self> {
        Self::new(
            pulse.omega_i - qubit_freq_eff,
            pulse.omega_f - qubit_freq_eff,
            pulse.omega0,
            pulse.duration,
            pulse.family,
            pulse.sech_window,
        )
    }

    pub fn schedule(&self) -> &PulseSchedule {
        &self.schedule
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.schedule.frequency(t)
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.schedule.amplitude(t)
    }

    pub fn hamiltonian(&self, t: f64) -> Matrix2<C64> {
        let (d, a) = self.schedule.sample(t);
        let half = C64::from(0.5 * a);
        Matrix2::new(C64::from(0.0), half, half, C64::from(-d))
    }

    /// `max(|Δ|, Ω)` over the pulse, used by the step rule.
    pub fn max_rate(&self) -> f64 {
        let p = self.schedule.params();
        p.omega_i.abs().max(p.omega_f.abs()).max(p.omega0)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.schedule.t_start(), self.schedule.t_end())
    }
}

/// Evolves through the whole pulse. Returns the final state and the 2×2
/// propagator.
pub fn evolve_two_level(
    frame: &EffectiveTwoLevelFrame,
    initial: &QuantumState,
    rule: &StepRule,
) -> Result<(QuantumState, Operator)> {
    if initial.len() != 2 {
        return Err(Error::Dimension(format!(
            "two-level evolution needs a 2-dimensional state, got {}",
            initial.len()
        )));
    }
    let u = two_level_propagator(frame, rule)?;
    let a = initial.amplitudes();
    let out = u * nalgebra::Vector2::new(a[0], a[1]);
    // no renormalization: any drift stays visible to the caller
    let state = QuantumState::from_raw(nalgebra::DVector::from_column_slice(out.as_slice()), vec![2]);
    Ok((state, to_operator(&u)))
}

pub fn two_level_propagator(frame: &EffectiveTwoLevelFrame, rule: &StepRule) -> Result<Matrix2<C64>> {
    let (t0, t1) = frame.span();
    let n = rule.steps(t1 - t0, frame.max_rate())?;
    let h = |t: f64| frame.hamiltonian(t);
    propagate(&h, &Matrix2::identity(), t0, t1, n)
}

fn to_operator<R: nalgebra::Dim, C: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> Operator
where
    S: nalgebra::RawStorage<C64, R, C>,
{
    let d = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    Operator::from_matrix(d).expect("square propagator")
}

/// `V(x)` for every input string, in index order.
pub fn perceptron_blocks(cfg: &PerceptronConfig, rule: &StepRule) -> Result<Vec<Matrix2<C64>>> {
    cfg.validate()?;
    (0..1usize << cfg.n_inputs())
        .into_par_iter()
        .map(|x| two_level_propagator(&EffectiveTwoLevelFrame::for_input(cfg, x)?, rule))
        .collect()
}

/// Block-diagonal `Σ_x |x⟩⟨x| ⊗ V(x)` on inputs ⊗ output.
pub fn perceptron_unitary(cfg: &PerceptronConfig, rule: &StepRule) -> Result<Operator> {
    let blocks = perceptron_blocks(cfg, rule)?;
    let dim = 2 * blocks.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (x, b) in blocks.iter().enumerate() {
        m.view_mut((2 * x, 2 * x), (2, 2)).copy_from(b);
    }
    Operator::new(m, vec![2; cfg.n_inputs() + 1])
}

/// Decay and pure-dephasing times per qubit, ordered (input, output).
/// Infinite times switch the corresponding channel off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoherence {
    pub t1: [f64; 2],
    pub t_phi: [f64; 2],
}

impl Decoherence {
    pub fn none() -> Self {
        Self {
            t1: [f64::INFINITY; 2],
            t_phi: [f64::INFINITY; 2],
        }
    }

    pub fn amplitude_damping(t1: f64) -> Self {
        Self {
            t1: [t1; 2],
            ..Self::none()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &t in self.t1.iter().chain(&self.t_phi) {
            if !(t > 0.0) {
                return Err(Error::Parameter(format!(
                    "decay time {t} must be positive (or infinite)"
                )));
            }
        }
        Ok(())
    }

    fn collapse_ops(&self) -> Vec<Matrix4<C64>> {
        let one = C64::from(1.0);
        let lower = Matrix2::new(C64::from(0.0), one, C64::from(0.0), C64::from(0.0));
        let z = Matrix2::new(one, C64::from(0.0), C64::from(0.0), -one);
        let id = Matrix2::<C64>::identity();
        let mut ops = Vec::new();
        for q in 0..2 {
            let lift = |m: &Matrix2<C64>| {
                if q == 0 {
                    m.kronecker(&id)
                } else {
                    id.kronecker(m)
                }
            };
            if self.t1[q].is_finite() {
                ops.push(lift(&lower) * C64::from((1.0 / self.t1[q]).sqrt()));
            }
            if self.t_phi[q].is_finite() {
                ops.push(lift(&z) * C64::from((0.5 / self.t_phi[q]).sqrt()));
            }
        }
        ops
    }
}

/// `−i(H_eff ρ − ρ H_eff†) + Σ L ρ L†` with `H_eff = H − (i/2) Σ L†L`.
fn lindblad_rhs(h_eff: &Matrix4<C64>, ops: &[Matrix4<C64>], rho: &Matrix4<C64>) -> Matrix4<C64> {
    // ρ need not be Hermitian (matrix units), so ρH_eff† is formed directly
    let mut d = (h_eff * rho - rho * h_eff.adjoint()) * (-I);
    for l in ops {
        d += l * rho * l.adjoint();
    }
    d
}

/// The commutator with `H` has eigenvalues up to the full spread of `H`'s
/// spectrum, twice that of the traceless generator the Schrödinger
/// integrator sees; the extra margin keeps the two paths within 1e-8 of
/// each other.
pub const LINDBLAD_RATE_FACTOR: f64 = 3.0;

/// Integrates the master equation for one input and the output qubit,
/// acting on an arbitrary 4×4 operator (the generator is linear, so this
/// also propagates non-physical matrix units for channel reconstruction).
pub fn lindblad_propagate(
    cfg: &PerceptronConfig,
    rho0: &Matrix4<C64>,
    decoherence: &Decoherence,
    rule: &StepRule,
) -> Result<Matrix4<C64>> {
    cfg.validate()?;
    decoherence.validate()?;
    if cfg.n_inputs() != 1 {
        return Err(Error::Parameter(format!(
            "master-equation evolution is implemented for one input, got {}",
            cfg.n_inputs()
        )));
    }
    let f0 = EffectiveTwoLevelFrame::for_input(cfg, 0)?;
    let f1 = EffectiveTwoLevelFrame::for_input(cfg, 1)?;
    let (t0, t1) = f0.span();
    let n = rule.steps(t1 - t0, LINDBLAD_RATE_FACTOR * f0.max_rate().max(f1.max_rate()))?;
    let dt = (t1 - t0) / n as f64;

    let ops = decoherence.collapse_ops();
    let damping = ops
        .iter()
        .fold(Matrix4::<C64>::zeros(), |acc, l| acc + l.adjoint() * l)
        * C64::new(0.0, -0.5);
    let ham = |t: f64| {
        let mut h = damping;
        let mut top = h.fixed_view_mut::<2, 2>(0, 0);
        top += f0.hamiltonian(t);
        let mut bottom = h.fixed_view_mut::<2, 2>(2, 2);
        bottom += f1.hamiltonian(t);
        h
    };

    let mut rho = *rho0;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let hm = ham(t + 0.5 * dt);
        let k1 = lindblad_rhs(&ham(t), &ops, &rho);
        let k2 = lindblad_rhs(&hm, &ops, &(rho + k1 * C64::from(0.5 * dt)));
        let k3 = lindblad_rhs(&hm, &ops, &(rho + k2 * C64::from(0.5 * dt)));
        let k4 = lindblad_rhs(&ham(t + dt), &ops, &(rho + k3 * C64::from(dt)));
        rho += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0);
        if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "density matrix",
                t,
            });
        }
    }
    Ok(rho)
}

/// Master-equation evolution of a physical two-qubit state.
pub fn evolve_lindblad(
    cfg: &PerceptronConfig,
    rho0: &DensityMatrix,
    decoherence: &Decoherence,
    rule: &StepRule,
) -> Result<DensityMatrix> {
    if rho0.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "expected an (input, output) qubit pair, got dims {:?}",
            rho0.dims()
        )));
    }
    let m = Matrix4::from_fn(|i, j| rho0.entries()[(i, j)]);
    let out = lindblad_propagate(cfg, &m, decoherence, rule)?;
    let rho = DensityMatrix::new_unchecked(DMatrix::from_fn(4, 4, |i, j| out[(i, j)]), vec![2, 2])?;
    rho.validate(1e-9, 1e-9, 1e-8)?;
    Ok(rho)
}

/// Convenience for the Fig.-style two-qubit run: input `(|0⟩+|1⟩)/√2`,
/// output `|0⟩`.
pub fn superposition_input() -> Result<QuantumState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let input = QuantumState::new(
        nalgebra::DVector::from_vec(vec![C64::from(h), C64::from(h)]),
        vec![2],
    )?;
    QuantumState::product(&[input, QuantumState::basis(vec![2], 0)?])
}
