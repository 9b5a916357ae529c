//! Gate-model equivalent of the perceptron unitary and its cost.
//!
//! Wires are zero-indexed with wire 0 the most significant tensor factor,
//! matching [`crate::dynamics::perceptron_unitary`]: inputs on wires
//! `0..N`, output on wire `N`.
//!
//! Conventions: `RY(θ) = exp(−iθY/2)`, `RZ(θ) = exp(−iθZ/2)`,
//! `PHASE(θ) = diag(1, e^{iθ})`.
//!
//! Text format, one gate per line, `#` starts a comment:
//!
//! ```text
//! WIRES n
//! CNOT c t
//! RY q theta
//! RZ q theta
//! PHASE q theta
//! U1Q q m00r m00i m01r m01i m10r m10i m11r m11i
//! ```
//!
//! Angles are radians; `WIRES` must come first. Emitted numbers use the
//! shortest round-trip representation, so parse ∘ emit is the identity.

use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::numerics::{Operator, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Cnot { control: usize, target: usize },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    Phase { qubit: usize, theta: f64 },
    U1q { qubit: usize, matrix: Matrix2<C64> },
}

fn re(x: f64) -> C64 {
    C64::from(x)
}

pub fn ry(theta: f64) -> Matrix2<C64> {
    let (s, c) = (0.5 * theta).sin_cos();
    Matrix2::new(re(c), re(-s), re(s), re(c))
}

pub fn rz(theta: f64) -> Matrix2<C64> {
    Matrix2::new(
        C64::from_polar(1.0, -0.5 * theta),
        re(0.0),
        re(0.0),
        C64::from_polar(1.0, 0.5 * theta),
    )
}

pub fn phase(theta: f64) -> Matrix2<C64> {
    Matrix2::new(re(1.0), re(0.0), re(0.0), C64::from_polar(1.0, theta))
}

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(re(0.0), re(1.0), re(1.0), re(0.0))
}

/// `V(θ) = [[cos θ/2, sin θ/2], [−sin θ/2, cos θ/2]]`, i.e. `RY(−θ)`.
pub fn v_of_theta(theta: f64) -> Matrix2<C64> {
    ry(-theta)
}

fn unitarity_error(m: &Matrix2<C64>) -> f64 {
    (m.adjoint() * m - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } | Gate::Phase { qubit, .. } | Gate::U1q { qubit, .. } => {
                vec![qubit]
            }
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// The single-qubit matrix, for one-wire gates.
    pub fn matrix(&self) -> Option<Matrix2<C64>> {
        match *self {
            Gate::Cnot { .. } => None,
            Gate::Ry { theta, .. } => Some(ry(theta)),
            Gate::Rz { theta, .. } => Some(rz(theta)),
            Gate::Phase { theta, .. } => Some(phase(theta)),
            Gate::U1q { matrix, .. } => Some(matrix),
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Cnot { .. } => self.clone(),
            Gate::Ry { qubit, theta } => Gate::Ry { qubit, theta: -theta },
            Gate::Rz { qubit, theta } => Gate::Rz { qubit, theta: -theta },
            Gate::Phase { qubit, theta } => Gate::Phase { qubit, theta: -theta },
            Gate::U1q { qubit, matrix } => Gate::U1q {
                qubit,
                matrix: matrix.adjoint(),
            },
        }
    }

    pub fn validate(&self, n_wires: usize) -> Result<()> {
        let wires = self.wires();
        if let Some(&w) = wires.iter().find(|&&w| w >= n_wires) {
            return Err(Error::Gate(format!("wire {w} out of range for {n_wires} wires")));
        }
        match self {
            Gate::Cnot { control, target } if control == target => {
                Err(Error::Gate(format!("CNOT control and target are both wire {control}")))
            }
            Gate::Ry { theta, .. } | Gate::Rz { theta, .. } | Gate::Phase { theta, .. } if !theta.is_finite() => {
                Err(Error::Gate("non-finite rotation angle".into()))
            }
            Gate::U1q { matrix, .. } if !(unitarity_error(matrix) <= 1e-10) => Err(Error::Gate(format!(
                "U1Q matrix is not unitary (deviation {:e})",
                unitarity_error(matrix)
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_wires: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_wires: usize) -> Self {
        Self {
            n_wires,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_wires == 0 || self.n_wires > 16 {
            return Err(Error::Gate(format!("{} wires (supported: 1..=16)", self.n_wires)));
        }
        self.gates.iter().try_for_each(|g| g.validate(self.n_wires))
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cnot()).count()
    }

    /// Reversed order, every gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_wires: self.n_wires,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("WIRES {}\n", self.n_wires);
        for g in &self.gates {
            let _ = match g {
                Gate::Cnot { control, target } => writeln!(out, "CNOT {control} {target}"),
                Gate::Ry { qubit, theta } => writeln!(out, "RY {qubit} {theta}"),
                Gate::Rz { qubit, theta } => writeln!(out, "RZ {qubit} {theta}"),
                Gate::Phase { qubit, theta } => writeln!(out, "PHASE {qubit} {theta}"),
                Gate::U1q { qubit, matrix } => {
                    let m = matrix;
                    writeln!(
                        out,
                        "U1Q {qubit} {} {} {} {} {} {} {} {}",
                        m[(0, 0)].re,
                        m[(0, 0)].im,
                        m[(0, 1)].re,
                        m[(0, 1)].im,
                        m[(1, 0)].re,
                        m[(1, 0)].im,
                        m[(1, 1)].re,
                        m[(1, 1)].im
                    )
                }
            };
        }
        out
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let op = toks.next().unwrap_or_default();
            let args: Vec<&str> = toks.collect();
            let wire = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad wire index '{s}'")));
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{op} takes {n} arguments, got {}", args.len())))
                }
            };

            if op == "WIRES" {
                arity(1)?;
                if circuit.is_some() {
                    return Err(err("duplicate WIRES line".into()));
                }
                circuit = Some(Circuit::new(wire(args[0])?));
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| err("WIRES must precede the first gate".into()))?;
            let gate = match op {
                "CNOT" => {
                    arity(2)?;
                    Gate::Cnot {
                        control: wire(args[0])?,
                        target: wire(args[1])?,
                    }
                }
                "RY" | "RZ" | "PHASE" => {
                    arity(2)?;
                    let (qubit, theta) = (wire(args[0])?, num(args[1])?);
                    match op {
                        "RY" => Gate::Ry { qubit, theta },
                        "RZ" => Gate::Rz { qubit, theta },
                        _ => Gate::Phase { qubit, theta },
                    }
                }
                "U1Q" => {
                    arity(9)?;
                    let v = args[1..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                    Gate::U1q {
                        qubit: wire(args[0])?,
                        matrix: Matrix2::new(
                            C64::new(v[0], v[1]),
                            C64::new(v[2], v[3]),
                            C64::new(v[4], v[5]),
                            C64::new(v[6], v[7]),
                        ),
                    }
                }
                other => return Err(err(format!("unknown gate '{other}'"))),
            };
            gate.validate(c.n_wires).map_err(|e| err(e.to_string()))?;
            c.push(gate);
        }
        let c = circuit.ok_or(Error::Parse {
            line: 0,
            msg: "empty circuit file (no WIRES line)".into(),
        })?;
        c.validate()?;
        Ok(c)
    }
}

/// Left-multiplies `u` by a single-qubit gate on `wire`.
fn apply_1q(u: &mut DMatrix<C64>, n_wires: usize, wire: usize, g: &Matrix2<C64>) {
    let bit = 1usize << (n_wires - 1 - wire);
    let dim = u.nrows();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for col in 0..u.ncols() {
            let (a, b) = (u[(r0, col)], u[(r1, col)]);
            u[(r0, col)] = g[(0, 0)] * a + g[(0, 1)] * b;
            u[(r1, col)] = g[(1, 0)] * a + g[(1, 1)] * b;
        }
    }
}

fn apply_cnot(u: &mut DMatrix<C64>, n_wires: usize, control: usize, target: usize) {
    let cbit = 1usize << (n_wires - 1 - control);
    let tbit = 1usize << (n_wires - 1 - target);
    for r0 in (0..u.nrows()).filter(|r| r & cbit != 0 && r & tbit == 0) {
        u.swap_rows(r0, r0 | tbit);
    }
}

/// Product of the gates, first gate applied first.
pub fn circuit_unitary(c: &Circuit) -> Result<Operator> {
    c.validate()?;
    let dim = 1usize << c.n_wires;
    let mut u = DMatrix::identity(dim, dim);
    for g in &c.gates {
        match g {
            Gate::Cnot { control, target } => apply_cnot(&mut u, c.n_wires, *control, *target),
            other => {
                let m = other.matrix().expect("one-wire gate");
                apply_1q(&mut u, c.n_wires, other.wires()[0], &m);
            }
        }
    }
    Operator::new(u, vec![2; c.n_wires])
}

/// `|tr(U†V)| / d`: 1 exactly when `U = e^{iφ}V`.
pub fn equivalence_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension(format!(
            "comparing operators of dimension {} and {}",
            u.dim(),
            v.dim()
        )));
    }
    for op in [u, v] {
        if !op.is_unitary(1e-8) {
            return Err(Error::NotUnitary {
                deviation: op.unitarity_error(),
            });
        }
    }
    Ok((u.entries().adjoint() * v.entries()).trace().norm() / u.dim() as f64)
}

/// `Σ_x |x⟩⟨x| ⊗ V(θ_x)`.
pub fn block_target(thetas: &[f64]) -> Result<Operator> {
    let n = input_count(thetas)?;
    let dim = 2 * thetas.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (x, &t) in thetas.iter().enumerate() {
        m.view_mut((2 * x, 2 * x), (2, 2)).copy_from(&v_of_theta(t));
    }
    Operator::new(m, vec![2; n + 1])
}

fn input_count(thetas: &[f64]) -> Result<usize> {
    let len = thetas.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "need one angle per input string (a power of two ≥ 2), got {len}"
        )));
    }
    if thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("non-finite angle".into()));
    }
    Ok(len.trailing_zeros() as usize)
}

/// `C-RY(φ)`: `RY(φ/2)`, CNOT, `RY(−φ/2)`, CNOT on the target.
fn controlled_ry(c: &mut Circuit, control: usize, target: usize, phi: f64) {
    c.push(Gate::Ry { qubit: target, theta: 0.5 * phi });
    c.push(Gate::Cnot { control, target });
    c.push(Gate::Ry { qubit: target, theta: -0.5 * phi });
    c.push(Gate::Cnot { control, target });
}

/// `CC-RY(φ)` as a Gray-code multiplexor: four `RY(±φ/4)` separated by
/// CNOTs from alternating controls. The target sees the angle
/// `φ/4·[1 − (−1)^{a} + (−1)^{a⊕b} − (−1)^{b}]`, which is `φ` for
/// `a = b = 1` and 0 otherwise.
fn doubly_controlled_ry(c: &mut Circuit, c1: usize, c2: usize, target: usize, phi: f64) {
    let q = 0.25 * phi;
    c.push(Gate::Ry { qubit: target, theta: q });
    c.push(Gate::Cnot { control: c1, target });
    c.push(Gate::Ry { qubit: target, theta: -q });
    c.push(Gate::Cnot { control: c2, target });
    c.push(Gate::Ry { qubit: target, theta: q });
    c.push(Gate::Cnot { control: c1, target });
    c.push(Gate::Ry { qubit: target, theta: -q });
    c.push(Gate::Cnot { control: c2, target });
}

/// Circuit for `Σ_x |x⟩⟨x| ⊗ V(θ_x)` with one or two inputs. `V(0…0)` is
/// applied unconditionally; every other string gets a multi-controlled
/// `W(x) = V(θ_x)V(θ_0)† = RY(θ_0 − θ_x)`, with X gates on the controls
/// whose bit is 0. Strings with `W(x) = I` are skipped.
pub fn decompose_perceptron(thetas: &[f64]) -> Result<Circuit> {
    let n = input_count(thetas)?;
    if n > 2 {
        return Err(Error::Unsupported(
            "decomposition implemented only for N ≤ 2; use gate_count for scaling".into(),
        ));
    }
    let out = n;
    let mut c = Circuit::new(n + 1);
    if thetas[0] != 0.0 {
        c.push(Gate::Ry { qubit: out, theta: -thetas[0] });
    }
    for (x, &theta) in thetas.iter().enumerate().skip(1) {
        let phi = thetas[0] - theta;
        if phi == 0.0 {
            continue;
        }
        let zeros: Vec<usize> = (0..n).filter(|j| (x >> (n - 1 - j)) & 1 == 0).collect();
        let flip = |c: &mut Circuit| {
            for &j in &zeros {
                c.push(Gate::U1q {
                    qubit: j,
                    matrix: pauli_x(),
                });
            }
        };
        flip(&mut c);
        match n {
            1 => controlled_ry(&mut c, 0, out, phi),
            _ => doubly_controlled_ry(&mut c, 0, 1, out, phi),
        }
        flip(&mut c);
    }
    Ok(c)
}

/// Rotation angle of a 2×2 unitary's population transfer, `2·atan2(|u₁₀|, |u₀₀|)`.
pub fn block_angle(u: &Matrix2<C64>) -> f64 {
    2.0 * u[(1, 0)].norm().atan2(u[(0, 0)].norm())
}

/// Fidelity `|tr(B† D₁ C D₂)|/2` after choosing diagonal phase matrices
/// `D₁, D₂` to cancel the entrywise phase differences of `B` and `C`. Exact
/// whenever `B` and `C` differ only by local Z phases.
pub fn phase_aligned_fidelity(b: &Matrix2<C64>, c: &Matrix2<C64>) -> f64 {
    let z = |i: usize, j: usize| b[(i, j)].conj() * c[(i, j)];
    let arg = |w: C64| if w.norm() > 0.0 { w.arg() } else { 0.0 };
    let q0 = -arg(z(0, 0));
    let q1 = -arg(z(0, 1));
    let p1 = -arg(z(1, 0)) - q0;
    let total = z(0, 0) * C64::from_polar(1.0, q0)
        + z(0, 1) * C64::from_polar(1.0, q1)
        + z(1, 0) * C64::from_polar(1.0, p1 + q0)
        + z(1, 1) * C64::from_polar(1.0, p1 + q1);
    total.norm() / 2.0
}

/// End-to-end check of simulated blocks against their circuit: angles are
/// read off the blocks, the circuit is synthesised and multiplied out, and
/// each 2×2 block is compared after phase alignment. Returns the worst
/// block fidelity.
pub fn end_to_end_fidelity(blocks: &[Matrix2<C64>]) -> Result<f64> {
    let thetas: Vec<f64> = blocks.iter().map(block_angle).collect();
    let circuit = decompose_perceptron(&thetas)?;
    let u = circuit_unitary(&circuit)?;
    let mut worst: f64 = 1.0;
    for (x, b) in blocks.iter().enumerate() {
        let cb = u.entries().fixed_view::<2, 2>(2 * x, 2 * x).into_owned();
        worst = worst.min(phase_aligned_fidelity(b, &cb));
    }
    Ok(worst)
}

/// `N_g = (2^N − 1)(2^{N+1} − 2)`.
pub fn gate_count(n_inputs: u32) -> Result<u64> {
    if n_inputs == 0 || n_inputs > 30 {
        return Err(Error::Parameter(format!(
            "gate count defined for 1 ≤ N ≤ 30, got {n_inputs}"
        )));
    }
    Ok(((1u64 << n_inputs) - 1) * ((1u64 << (n_inputs + 1)) - 2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub n_inputs: u32,
    pub n_cnots: u64,
    pub total_time: f64,
    pub fidelity_estimate: f64,
}

pub const DEFAULT_CNOT_FIDELITY: f64 = 0.997;
pub const DEFAULT_CNOT_TIME: f64 = 60e-9;

pub fn estimate(n_inputs: u32, f_2q: f64, t_2q: f64) -> Result<CostEstimate> {
    if !(f_2q > 0.0 && f_2q <= 1.0) {
        return Err(Error::Parameter(format!("two-qubit fidelity {f_2q} outside (0, 1]")));
    }
    if !(t_2q > 0.0) || !t_2q.is_finite() {
        return Err(Error::Parameter(format!("two-qubit gate time {t_2q} must be positive")));
    }
    let n = gate_count(n_inputs)?;
    Ok(CostEstimate {
        n_inputs,
        n_cnots: n,
        total_time: n as f64 * t_2q,
        fidelity_estimate: f_2q.powf(n as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix2<C64>, b: &Matrix2<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn v_of_theta_values() {
        assert!(close(&v_of_theta(0.0), &Matrix2::identity(), 1e-15));
        let want = Matrix2::new(re(0.0), re(1.0), re(-1.0), re(0.0));
        assert!(close(&v_of_theta(std::f64::consts::PI), &want, 1e-15));
        assert!(close(&(v_of_theta(0.3) * v_of_theta(1.1)), &v_of_theta(1.4), 1e-12));
    }

    #[test]
    fn empty_and_cnot() {
        let u = circuit_unitary(&Circuit::new(2)).unwrap();
        assert_eq!(u.entries(), &DMatrix::identity(4, 4));
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot { control: 0, target: 1 });
        let u = circuit_unitary(&c).unwrap();
        let mut want = DMatrix::<C64>::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            want[(i, j)] = re(1.0);
        }
        assert_eq!(u.entries(), &want);
        let id = Operator::identity(vec![2, 2]);
        assert!((equivalence_fidelity(&u, &id).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn malformed_gates_rejected() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot { control: 1, target: 1 });
        assert!(circuit_unitary(&c).is_err());
        let mut c = Circuit::new(2);
        c.push(Gate::Ry { qubit: 2, theta: 0.1 });
        assert!(circuit_unitary(&c).is_err());
        let mut c = Circuit::new(1);
        c.push(Gate::U1q {
            qubit: 0,
            matrix: Matrix2::new(re(1.0), re(1.0), re(0.0), re(1.0)),
        });
        assert!(circuit_unitary(&c).is_err());
    }

    #[test]
    fn binary_limit_is_cnot_like() {
        let c = decompose_perceptron(&[0.0, std::f64::consts::PI]).unwrap();
        assert_eq!(c.cnot_count(), 2);
        let f = equivalence_fidelity(&circuit_unitary(&c).unwrap(), &block_target(&[0.0, std::f64::consts::PI]).unwrap())
            .unwrap();
        assert!(f > 1.0 - 1e-12);
    }

    #[test]
    fn uncontrolled_limit() {
        let c = decompose_perceptron(&[0.7, 0.7]).unwrap();
        assert_eq!(c.cnot_count(), 0);
        assert_eq!(c.gates.len(), 1);
    }

    #[test]
    fn three_inputs_unsupported() {
        assert!(matches!(decompose_perceptron(&[0.0; 8]), Err(Error::Unsupported(_))));
        assert!(decompose_perceptron(&[0.0; 3]).is_err());
    }

    #[test]
    fn table_counts() {
        let want = [2, 18, 98, 450];
        for (n, w) in (1..=4).zip(want) {
            assert_eq!(gate_count(n).unwrap(), w);
        }
        assert!(gate_count(0).is_err());
        assert!(gate_count(31).is_err());
        assert!(gate_count(30).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let mut c = decompose_perceptron(&[0.1, -0.4, 2.2, 3.0]).unwrap();
        c.push(Gate::Rz { qubit: 1, theta: 1.0 / 3.0 });
        c.push(Gate::Phase { qubit: 0, theta: -0.25 });
        let text = c.to_text();
        let back = Circuit::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Circuit::parse("WIRES 2\nRY 0 0.1\nCNOT 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(Circuit::parse("RY 0 0.1\n").is_err());
        assert!(Circuit::parse("WIRES 2\nFOO 1\n").is_err());
        assert!(Circuit::parse("# nothing\n").is_err());
    }

    #[test]
    fn phase_alignment() {
        let b = rz(0.4) * ry(1.3) * rz(-1.1) * C64::from_polar(1.0, 0.3);
        assert!(phase_aligned_fidelity(&b, &ry(1.3)) > 1.0 - 1e-14);
        assert!(phase_aligned_fidelity(&b, &ry(1.0)) < 0.999);
    }
}
