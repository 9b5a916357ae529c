//! Dense complex linear algebra and the fixed-step Schrödinger integrator.
//!
//! States, operators and density matrices carry their subsystem dimensions so
//! that tensor-product bookkeeping (partial traces, partial transposes) can be
//! checked rather than assumed. Subsystem 0 is the most significant index.

use nalgebra::allocator::Allocator;
use nalgebra::{DMatrix, DVector, DefaultAllocator, Dim, OMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used when accepting user-supplied Hermitian operators, relative to
/// the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!("bad subsystem dimensions {dims:?}")));
    }
    if product(dims) != len {
        return Err(Error::Dimension(format!(
            "subsystem dimensions {dims:?} do not multiply to {len}"
        )));
    }
    Ok(())
}

/// Largest entry magnitude.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

impl QuantumState {
    /// Accepts a state whose norm is 1 within 1e-9.
    pub fn new(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Dimension(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Dimension("cannot normalize a zero state".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::from(norm),
            dims,
        })
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = product(&dims);
        check_dims(n, &dims)?;
        if index >= n {
            return Err(Error::Dimension(format!("basis index {index} >= {n}")));
        }
        let mut amplitudes = DVector::zeros(n);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, dims })
    }

    /// Product state from per-subsystem states.
    pub fn product(parts: &[QuantumState]) -> Result<Self> {
        let mut iter = parts.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Dimension("empty product".into()))?;
        let mut amps = first.amplitudes.clone();
        let mut dims = first.dims.clone();
        for p in iter {
            amps = amps.kronecker(&p.amplitudes);
            dims.extend_from_slice(&p.dims);
        }
        Ok(Self {
            amplitudes: amps,
            dims,
        })
    }

    /// Skips the norm check. Used for integrator output, whose norm drift is a
    /// diagnostic rather than something to correct.
    pub(crate) fn from_raw(amplitudes: DVector<C64>, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let psi = &self.amplitudes;
        DensityMatrix {
            entries: psi * psi.adjoint(),
            dims: self.dims.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    entries: DMatrix<C64>,
    dims: Vec<usize>,
}

impl Operator {
    pub fn new(entries: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dims(entries.nrows(), &dims)?;
        Ok(Self { entries, dims })
    }

    /// Single-subsystem operator.
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, vec![n])
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self {
            entries: DMatrix::identity(n, n),
            dims,
        }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self {
            entries: DMatrix::zeros(n, n),
            dims,
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            dims: self.dims.clone(),
        }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "cannot multiply operators on {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self {
            entries: &self.entries * &other.entries,
            dims: self.dims.clone(),
        })
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if self.dims != state.dims {
            return Err(Error::Dimension(format!(
                "operator on {:?} applied to state on {:?}",
                self.dims, state.dims
            )));
        }
        Ok(QuantumState::from_raw(
            &self.entries * &state.amplitudes,
            self.dims.clone(),
        ))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            entries: &self.entries * s,
            dims: self.dims.clone(),
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.entries)
    }

    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let prod = self.entries.adjoint() * &self.entries;
        max_abs(&(prod - DMatrix::<C64>::identity(n, n)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::new_unchecked(entries, dims)?;
        rho.validate(1e-10, 1e-9, 1e-9)?;
        Ok(rho)
    }

    /// Shape checks only.
    pub fn new_unchecked(entries: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        check_dims(entries.nrows(), &dims)?;
        Ok(Self { entries, dims })
    }

    /// Checks Hermiticity, unit trace and positivity with the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<()> {
        let herm = hermiticity_error(&self.entries);
        if herm > herm_tol {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.entries.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -eig_tol {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n = product(&dims);
        Self {
            entries: DMatrix::identity(n, n) / C64::from(n as f64),
            dims,
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.entries[(index, index)].re
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::Dimension("trace distance between different spaces".into()));
        }
        let diff = &self.entries - &other.entries;
        let herm = (&diff + diff.adjoint()) * C64::from(0.5);
        let ev = SymmetricEigen::new(herm).eigenvalues;
        Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// U ρ U†.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        if u.dims() != self.dims.as_slice() {
            return Err(Error::Dimension("unitary acts on a different space".into()));
        }
        Ok(Self {
            entries: u.entries() * &self.entries * u.entries().adjoint(),
            dims: self.dims.clone(),
        })
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            entries: self.entries.clone(),
            dims: self.dims.clone(),
        }
    }
}

/// Kronecker product with concatenated subsystem dimensions.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator {
        entries: a.entries.kronecker(&b.entries),
        dims,
    }
}

/// Eigen-decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`, phase-fixed so that its
    /// largest-magnitude component is real and positive.
    pub vectors: Operator,
}

pub fn hermitian_eig(m: &Operator) -> Result<Eigensystem> {
    let scale = max_abs(&m.entries).max(1.0);
    let deviation = m.hermiticity_error();
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    if m.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            what: "matrix passed to hermitian_eig",
            t: 0.0,
        });
    }
    let herm = (&m.entries + m.entries.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(herm);

    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let vmax = v.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        // first component within rounding of the maximum wins ties
        let pivot = v
            .iter()
            .position(|z| z.norm() >= vmax * (1.0 - 1e-9))
            .unwrap_or(0);
        let phase = if v[pivot].norm() > 0.0 {
            v[pivot].conj() / v[pivot].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        vectors.set_column(col, &(v * phase));
    }
    Ok(Eigensystem {
        values,
        vectors: Operator {
            entries: vectors,
            dims: m.dims.clone(),
        },
    })
}

/// Step-size rule for the fixed-step integrators: the largest rate in the
/// generator times the step must not exceed `max_phase` radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRule {
    pub max_phase: f64,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            max_phase: 0.03,
            min_steps: 64,
            max_steps: 200_000,
        }
    }
}

impl StepRule {
    pub fn steps(&self, duration: f64, max_rate: f64) -> Result<usize> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::Parameter(format!("duration {duration} must be > 0")));
        }
        if !max_rate.is_finite() || max_rate < 0.0 {
            return Err(Error::NonFinite {
                what: "step-rule rate",
                t: 0.0,
            });
        }
        let required = ((duration * max_rate / self.max_phase).ceil() as usize).max(self.min_steps);
        if required > self.max_steps {
            return Err(Error::StepCap {
                required,
                cap: self.max_steps,
            });
        }
        Ok(required)
    }
}

fn traceless<R: Dim>(mut h: OMatrix<C64, R, R>) -> (OMatrix<C64, R, R>, f64)
where
    DefaultAllocator: Allocator<R, R>,
{
    let n = h.nrows();
    let mean = h.trace().re / n as f64;
    for i in 0..n {
        h[(i, i)] -= mean;
    }
    (h, mean)
}

fn all_finite<R: Dim, C: Dim>(m: &OMatrix<C64, R, C>) -> bool
where
    DefaultAllocator: Allocator<R, C>,
{
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// One RK4 step of `i dY/dt = H(t) Y` for a state vector or a block of
/// columns. The scalar part `tr H / n` commutes with everything, so it is
/// split off and applied as an exact phase (Simpson rule on the three RK4
/// samples); RK4 integrates the traceless remainder. This is the same 4th
/// order method with a smaller spectral radius.
pub fn schrodinger_rk4_step<R, C, F>(
    h: &F,
    y: &OMatrix<C64, R, C>,
    t: f64,
    dt: f64,
) -> Result<OMatrix<C64, R, C>>
where
    R: Dim,
    C: Dim,
    F: Fn(f64) -> OMatrix<C64, R, R>,
    DefaultAllocator: Allocator<R, R> + Allocator<R, C>,
{
    let sample = |ts: f64| -> Result<(OMatrix<C64, R, R>, f64)> {
        let m = h(ts);
        if !all_finite(&m) {
            return Err(Error::NonFinite {
                what: "Hamiltonian",
                t: ts,
            });
        }
        Ok(traceless(m))
    };
    let (h0, s0) = sample(t)?;
    let (hm, sm) = sample(t + 0.5 * dt)?;
    let (h1, s1) = sample(t + dt)?;

    let mi = -I;
    let k1 = (&h0 * y) * mi;
    let k2 = (&hm * (y + &k1 * C64::from(0.5 * dt))) * mi;
    let k3 = (&hm * (y + &k2 * C64::from(0.5 * dt))) * mi;
    let k4 = (&h1 * (y + &k3 * C64::from(dt))) * mi;
    let incr = (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    let scalar_phase = -dt * (s0 + 4.0 * sm + s1) / 6.0;
    let out = (y + incr) * C64::from_polar(1.0, scalar_phase);
    if !all_finite(&out) {
        return Err(Error::NonFinite {
            what: "integrator state",
            t,
        });
    }
    Ok(out)
}

/// Integrates `i dY/dt = H(t) Y` from `t0` to `t1` in `n_steps` equal steps.
pub fn propagate<R, C, F>(
    h: &F,
    y0: &OMatrix<C64, R, C>,
    t0: f64,
    t1: f64,
    n_steps: usize,
) -> Result<OMatrix<C64, R, C>>
where
    R: Dim,
    C: Dim,
    F: Fn(f64) -> OMatrix<C64, R, R>,
    DefaultAllocator: Allocator<R, R> + Allocator<R, C>,
{
    if n_steps == 0 || !(t1 > t0) {
        return Err(Error::Parameter(format!(
            "propagation needs t1 > t0 and at least one step (t0={t0}, t1={t1}, n={n_steps})"
        )));
    }
    let dt = (t1 - t0) / n_steps as f64;
    let mut y = y0.clone();
    for k in 0..n_steps {
        y = schrodinger_rk4_step(h, &y, t0 + k as f64 * dt, dt)?;
    }
    Ok(y)
}

/// One integrator step for a time-dependent Hamiltonian given as an
/// [`Operator`]-valued function.
pub fn evolve_step(
    h_of_t: &dyn Fn(f64) -> Operator,
    state: &QuantumState,
    t: f64,
    dt: f64,
) -> Result<QuantumState> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt = {dt} must be positive")));
    }
    let n = state.len();
    let h = |ts: f64| -> DMatrix<C64> {
        let op = h_of_t(ts);
        if op.dim() != n {
            // surfaces as a non-finite generator below
            return DMatrix::from_element(n, n, C64::new(f64::NAN, 0.0));
        }
        op.entries
    };
    let y = DMatrix::from_column_slice(n, 1, state.amplitudes.as_slice());
    let out = schrodinger_rk4_step(&h, &y, t, dt)?;
    Ok(QuantumState::from_raw(
        DVector::from_column_slice(out.as_slice()),
        state.dims.clone(),
    ))
}

fn multi_index(mut k: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, &d) in idx.iter_mut().zip(dims).rev() {
        *slot = k % d;
        k /= d;
    }
    idx
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Reduced state on the subsystems in `keep` (in ascending subsystem order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = &rho.dims;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Subsystem(format!(
            "subsystem {bad} does not exist (have {})",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let nk = product(&kept_dims);
    let nt = product(&traced_dims);

    let full = |kept: &[usize], tr: &[usize]| -> usize {
        let mut idx = vec![0; dims.len()];
        for (&pos, &v) in keep.iter().zip(kept) {
            idx[pos] = v;
        }
        for (&pos, &v) in traced.iter().zip(tr) {
            idx[pos] = v;
        }
        flat_index(&idx, dims)
    };

    let mut out = DMatrix::<C64>::zeros(nk, nk);
    for a in 0..nk {
        let ia = multi_index(a, &kept_dims);
        for b in 0..nk {
            let ib = multi_index(b, &kept_dims);
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..nt {
                let ic = multi_index(c, &traced_dims);
                acc += rho.entries[(full(&ia, &ic), full(&ib, &ic))];
            }
            out[(a, b)] = acc;
        }
    }
    let dims_out = if kept_dims.is_empty() { vec![1] } else { kept_dims };
    Ok(DensityMatrix {
        entries: out,
        dims: dims_out,
    })
}

/// Partial transpose of a bipartite matrix with respect to `subsystem`.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<Operator> {
    let dims = &rho.dims;
    if dims.len() != 2 {
        return Err(Error::Subsystem(format!(
            "partial transpose needs an explicit bipartition, got {} subsystems",
            dims.len()
        )));
    }
    if subsystem > 1 {
        return Err(Error::Subsystem(format!("subsystem {subsystem} out of range")));
    }
    let (da, db) = (dims[0], dims[1]);
    let n = da * db;
    let mut out = DMatrix::<C64>::zeros(n, n);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let (r, c) = if subsystem == 0 {
                        (k * db + j, i * db + l)
                    } else {
                        (i * db + l, k * db + j)
                    };
                    out[(r, c)] = rho.entries[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(Operator {
        entries: out,
        dims: dims.clone(),
    })
}

/// Pauli matrices and friends, as dense 2×2 operators.
pub mod pauli {
    use super::*;

    fn op2(a: [[C64; 2]; 2]) -> Operator {
        Operator {
            entries: DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]),
            dims: vec![2],
        }
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    pub fn identity() -> Operator {
        Operator::identity(vec![2])
    }

    pub fn x() -> Operator {
        op2([[r(0.0), r(1.0)], [r(1.0), r(0.0)]])
    }

    pub fn y() -> Operator {
        op2([[r(0.0), -I], [I, r(0.0)]])
    }

    pub fn z() -> Operator {
        op2([[r(1.0), r(0.0)], [r(0.0), r(-1.0)]])
    }

    /// |0⟩⟨1|, which lowers |1⟩ to |0⟩.
    pub fn lowering() -> Operator {
        op2([[r(0.0), r(1.0)], [r(0.0), r(0.0)]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities_and_z() {
        let i4 = kron(&pauli::identity(), &pauli::identity());
        assert_eq!(i4.entries(), &DMatrix::<C64>::identity(4, 4));
        assert_eq!(i4.dims(), &[2, 2]);
        let zi = kron(&pauli::z(), &pauli::identity());
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.), c(1.), c(-1.), c(-1.)]));
        assert_eq!(zi.entries(), &expected);
    }

    #[test]
    fn eig_of_diagonal_and_pauli_x() {
        let d = Operator::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(3.),
            c(1.),
            c(2.),
        ])))
        .unwrap();
        let e = hermitian_eig(&d).unwrap();
        assert_abs_diff_eq!(e.values.as_slice(), [1.0, 2.0, 3.0].as_slice(), epsilon = 1e-14);
        let e = hermitian_eig(&pauli::x()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        // phase fix: largest component real and positive
        for k in 0..2 {
            let col = e.vectors.entries().column(k);
            let vmax = col.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
            let best = col.iter().find(|z| z.norm() >= vmax * (1.0 - 1e-9)).unwrap();
            assert!(best.im.abs() < 1e-14 && best.re > 0.0);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Operator::from_matrix(DMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(0.), c(0.)])).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_hamiltonian_leaves_state_unchanged() {
        let psi = QuantumState::normalized(DVector::from_vec(vec![c(1.0), C64::new(0.3, -0.2)]), vec![2]).unwrap();
        let zero = |_t: f64| Operator::zeros(vec![2]);
        let out = evolve_step(&zero, &psi, 0.0, 1e-3).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn non_finite_generator_is_reported() {
        let psi = QuantumState::basis(vec![2], 0).unwrap();
        let bad = |_t: f64| pauli::x().scaled(c(f64::NAN));
        assert!(matches!(evolve_step(&bad, &psi, 0.0, 1e-3), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let zero = QuantumState::basis(vec![2], 0).unwrap();
        let one = QuantumState::basis(vec![2], 1).unwrap();
        let prod = QuantumState::product(&[zero.clone(), one.clone()]).unwrap().to_density();
        let a = partial_trace(&prod, &[0]).unwrap();
        let b = partial_trace(&prod, &[1]).unwrap();
        assert_abs_diff_eq!(a.population(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.population(1), 1.0, epsilon = 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::new(DVector::from_vec(vec![c(s), c(0.), c(0.), c(s)]), vec![2, 2])
            .unwrap()
            .to_density();
        for keep in [0, 1] {
            let red = partial_trace(&bell, &[keep]).unwrap();
            let diff = red.entries() - DMatrix::<C64>::identity(2, 2) * c(0.5);
            assert!(max_abs(&diff) < 1e-12);
        }
        assert!(matches!(partial_trace(&bell, &[2]), Err(Error::Subsystem(_))));
    }

    #[test]
    fn partial_trace_three_subsystems() {
        // |0⟩|+⟩|1⟩, keep the outer two
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = QuantumState::new(DVector::from_vec(vec![c(s), c(s)]), vec![2]).unwrap();
        let psi = QuantumState::product(&[
            QuantumState::basis(vec![2], 0).unwrap(),
            plus,
            QuantumState::basis(vec![3], 1).unwrap(),
        ])
        .unwrap();
        let red = partial_trace(&psi.to_density(), &[2, 0]).unwrap();
        assert_eq!(red.dims(), &[2, 3]);
        assert_abs_diff_eq!(red.population(1), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::new(DVector::from_vec(vec![c(s), c(0.), c(0.), c(s)]), vec![2, 2])
            .unwrap()
            .to_density();
        for sub in [0, 1] {
            let pt = partial_transpose(&bell, sub).unwrap();
            let ev = hermitian_eig(&pt).unwrap().values;
            assert_abs_diff_eq!(ev.as_slice(), [-0.5, 0.5, 0.5, 0.5].as_slice(), epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_needs_bipartition() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 2]);
        assert!(matches!(partial_transpose(&rho, 0), Err(Error::Subsystem(_))));
    }

    #[test]
    fn density_validation() {
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.2), c(-0.2)]));
        assert!(DensityMatrix::new(bad, vec![2]).is_err());
        let ok = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert_abs_diff_eq!(ok.purity(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn step_rule() {
        let rule = StepRule::default();
        assert_eq!(rule.steps(1e-6, 0.0).unwrap(), 64);
        assert_eq!(rule.steps(1e-6, 1e9).unwrap(), 33_334);
        let tight = StepRule { max_steps: 1000, ..rule };
        assert!(matches!(tight.steps(1e-6, 1e9), Err(Error::StepCap { .. })));
    }
}
