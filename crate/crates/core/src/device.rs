//! Two fixed-frequency transmons coupled through a tunable transmon coupler.
//!
//! Mode order in every operator built here is (qubit 1, qubit 2, coupler),
//! with qubit 1 the most significant index. Qubit 1 is the perceptron output
//! and qubit 2 the input.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, Operator, C64};
use crate::units::{ghz, mhz, to_ghz, to_mhz};

/// Circuit parameters, all angular frequencies in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    pub omega1: f64,
    pub omega2: f64,
    pub omega_c: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Not measured in the reference device; -2π·300 MHz is an assumed
    /// transmon-typical value.
    pub alpha_c: f64,
    pub g1c: f64,
    pub g2c: f64,
    /// Levels kept per mode.
    pub truncation: usize,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            omega1: ghz(6.189),
            omega2: ghz(5.089),
            omega_c: ghz(7.8),
            alpha1: mhz(-286.0),
            alpha2: mhz(-310.0),
            alpha_c: mhz(-300.0),
            g1c: mhz(142.0),
            g2c: mhz(116.0),
            truncation: 4,
        }
    }
}

impl DeviceParams {
    pub fn with_coupler(&self, omega_c: f64) -> Self {
        Self {
            omega_c,
            ..self.clone()
        }
    }

    /// Δ₁ = ω_c − ω₁.
    pub fn delta1(&self) -> f64 {
        self.omega_c - self.omega1
    }

    /// Δ₂ = ω_c − ω₂.
    pub fn delta2(&self) -> f64 {
        self.omega_c - self.omega2
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 3 {
            return Err(Error::Parameter(format!(
                "truncation {} < 3: anharmonic terms need at least three levels",
                self.truncation
            )));
        }
        let all = [
            self.omega1,
            self.omega2,
            self.omega_c,
            self.alpha1,
            self.alpha2,
            self.alpha_c,
            self.g1c,
            self.g2c,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("non-finite device parameter".into()));
        }
        Ok(())
    }

    /// Coupler far enough from both qubits that overlap tracking of dressed
    /// states is reliable: min(|Δ₁|, |Δ₂|) > `factor`·max(g).
    pub fn is_dispersive(&self, factor: f64) -> bool {
        let gmax = self.g1c.abs().max(self.g2c.abs());
        self.delta1().abs().min(self.delta2().abs()) > factor * gmax
    }

    pub fn to_file(&self) -> DeviceFile {
        DeviceFile {
            omega1_ghz: to_ghz(self.omega1),
            omega2_ghz: to_ghz(self.omega2),
            omega_c_ghz: to_ghz(self.omega_c),
            alpha1_mhz: to_mhz(self.alpha1),
            alpha2_mhz: to_mhz(self.alpha2),
            alpha_c_mhz: to_mhz(self.alpha_c),
            g1c_mhz: to_mhz(self.g1c),
            g2c_mhz: to_mhz(self.g2c),
            truncation: self.truncation,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_file()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: DeviceFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let p = DeviceParams::from(file);
        p.validate()?;
        Ok(p)
    }
}

/// On-disk form of [`DeviceParams`]: frequencies in GHz, anharmonicities and
/// couplings in MHz (ordinary, not angular, frequency).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceFile {
    pub omega1_ghz: f64,
    pub omega2_ghz: f64,
    pub omega_c_ghz: f64,
    pub alpha1_mhz: f64,
    pub alpha2_mhz: f64,
    pub alpha_c_mhz: f64,
    pub g1c_mhz: f64,
    pub g2c_mhz: f64,
    pub truncation: usize,
}

impl Default for DeviceFile {
    fn default() -> Self {
        DeviceParams::default().to_file()
    }
}

impl From<DeviceFile> for DeviceParams {
    fn from(f: DeviceFile) -> Self {
        Self {
            omega1: ghz(f.omega1_ghz),
            omega2: ghz(f.omega2_ghz),
            omega_c: ghz(f.omega_c_ghz),
            alpha1: mhz(f.alpha1_mhz),
            alpha2: mhz(f.alpha2_mhz),
            alpha_c: mhz(f.alpha_c_mhz),
            g1c: mhz(f.g1c_mhz),
            g2c: mhz(f.g2c_mhz),
            truncation: f.truncation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZZMethod {
    Numeric,
    Perturbative,
}

/// ZZ coupling `J` (defined by `H_int = J |11⟩⟨11|`) and the perceptron
/// weight it implements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZZResult {
    pub j: f64,
    pub weight: f64,
    pub method: ZZMethod,
}

impl ZZResult {
    fn new(j: f64, method: ZZMethod) -> Self {
        Self {
            j,
            weight: -j,
            method,
        }
    }
}

/// Flat index of the bare state |n1, n2, nc⟩.
pub fn bare_index(truncation: usize, n1: usize, n2: usize, nc: usize) -> usize {
    (n1 * truncation + n2) * truncation + nc
}

fn ladder(d: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

fn embed(op: &DMatrix<f64>, mode: usize, d: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(d, d);
    let parts: [&DMatrix<f64>; 3] = match mode {
        0 => [op, &id, &id],
        1 => [&id, op, &id],
        _ => [&id, &id, op],
    };
    parts[0].kronecker(parts[1]).kronecker(parts[2])
}

/// H = Σᵢ ωᵢ aᵢ†aᵢ + (αᵢ/2) aᵢ†aᵢ†aᵢaᵢ + Σ_{i=1,2} g_ic (aᵢ − aᵢ†)(a_c − a_c†),
/// with no rotating-wave simplification of the coupling.
pub fn build_hamiltonian(p: &DeviceParams) -> Result<Operator> {
    p.validate()?;
    let d = p.truncation;
    let a = ladder(d);
    let ad = a.transpose();
    let n = &ad * &a;
    let kerr = &ad * &ad * &a * &a;
    let x = &a - &ad;

    let modes = [(p.omega1, p.alpha1), (p.omega2, p.alpha2), (p.omega_c, p.alpha_c)];
    let dim = d * d * d;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (k, &(omega, alpha)) in modes.iter().enumerate() {
        let local = &n * omega + &kerr * (0.5 * alpha);
        h += embed(&local, k, d);
    }
    let xc = embed(&x, 2, d);
    h += (embed(&x, 0, d) * &xc) * p.g1c;
    h += (embed(&x, 1, d) * &xc) * p.g2c;

    // (a − a†) is anti-Hermitian, so the product of two commuting copies is
    // real symmetric.
    let h = h.map(|v| C64::new(v, 0.0));
    Operator::new(h, vec![d, d, d])
}

/// Dressed energies identified with the bare labels |00⟩, |01⟩, |10⟩, |11⟩
/// (qubit 1, qubit 2; coupler in its ground state).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedLevels {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
    /// Smallest squared overlap between a dressed state and its bare label.
    pub min_overlap: f64,
}

/// Greedy maximum-overlap assignment with a hard floor of 0.5 on the squared
/// overlap.
pub fn dressed_levels(p: &DeviceParams) -> Result<DressedLevels> {
    let h = build_hamiltonian(p)?;
    let eig = hermitian_eig(&h)?;
    let d = p.truncation;
    let labels = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let bare: Vec<usize> = labels.iter().map(|&(a, b)| bare_index(d, a, b, 0)).collect();

    let vecs = eig.vectors.entries();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (li, &b) in bare.iter().enumerate() {
        for k in 0..vecs.ncols() {
            let ov = vecs[(b, k)].norm_sqr();
            candidates.push((ov, li, k));
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut assigned: [Option<(usize, f64)>; 4] = [None; 4];
    let mut taken = vec![false; vecs.ncols()];
    for &(ov, li, k) in &candidates {
        if assigned[li].is_none() && !taken[k] {
            assigned[li] = Some((k, ov));
            taken[k] = true;
        }
    }

    let mut energies = [0.0; 4];
    let mut min_overlap: f64 = 1.0;
    for (li, slot) in assigned.iter().enumerate() {
        let (k, ov) = slot.expect("four labels always receive a state");
        if ov <= 0.5 {
            let (a, b) = labels[li];
            // the competing states, best first
            let mut rivals: Vec<(f64, usize)> = (0..vecs.ncols())
                .map(|j| (vecs[(bare[li], j)].norm_sqr(), j))
                .collect();
            rivals.sort_by(|x, y| y.0.total_cmp(&x.0));
            return Err(Error::Ambiguous(format!(
                "bare |{a}{b}0> has best overlap {:.3} (state {}) vs {:.3} (state {}); \
                 at omega_c/2pi = {:.4} GHz",
                rivals[0].0,
                rivals[0].1,
                rivals[1].0,
                rivals[1].1,
                to_ghz(p.omega_c)
            )));
        }
        energies[li] = eig.values[k];
        min_overlap = min_overlap.min(ov);
    }
    Ok(DressedLevels {
        e00: energies[0],
        e01: energies[1],
        e10: energies[2],
        e11: energies[3],
        min_overlap,
    })
}

/// J = E₁₁ + E₀₀ − E₁₀ − E₀₁ from exact diagonalization.
pub fn zz_numeric(p: &DeviceParams) -> Result<ZZResult> {
    if p.g1c == 0.0 || p.g2c == 0.0 {
        // H is diagonal in the bare basis; J vanishes identically
        p.validate()?;
        return Ok(ZZResult::new(0.0, ZZMethod::Numeric));
    }
    let lv = dressed_levels(p)?;
    let j = (lv.e11 - lv.e10) - (lv.e01 - lv.e00);
    if !j.is_finite() {
        return Err(Error::NonFinite {
            what: "numeric ZZ coupling",
            t: 0.0,
        });
    }
    Ok(ZZResult::new(j, ZZMethod::Numeric))
}

/// Denominator factors smaller than this make the closed form meaningless.
pub const RESONANCE_GUARD: f64 = std::f64::consts::TAU * 1e6;

/// The fourth-order closed form, evaluated exactly as printed with
/// Δᵢ = ω_c − ωᵢ:
///
/// 2 g₁² g₂² [α₁α₂(Δ₁+Δ₂)² + α₂α_cΔ₁² + α₁Δ₁²(Δ₁+Δ₂) + α₂Δ₂²(Δ₁+Δ₂)
///            + α_c(Δ₁+Δ₂)(Δ₁−Δ₂)²]
/// / [Δ₁²Δ₂²(Δ₁+Δ₂+α_c)(Δ₂−Δ₁−α₂)(Δ₁−Δ₂−α₁)]
///
/// Compared with exact diagonalization this expression equals −J (that is,
/// the weight w) throughout the dispersive regime; see [`zz_perturbative`].
pub fn printed_zz_expression(p: &DeviceParams) -> Result<f64> {
    p.validate()?;
    let (d1, d2) = (p.delta1(), p.delta2());
    let (a1, a2, ac) = (p.alpha1, p.alpha2, p.alpha_c);
    let prefactor = 2.0 * p.g1c * p.g1c * p.g2c * p.g2c;
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    let factors: [(&'static str, f64); 5] = [
        ("Delta1", d1),
        ("Delta2", d2),
        ("Delta1 + Delta2 + alpha_c", d1 + d2 + ac),
        ("Delta2 - Delta1 - alpha2", d2 - d1 - a2),
        ("Delta1 - Delta2 - alpha1", d1 - d2 - a1),
    ];
    for &(factor, value) in &factors {
        if value.abs() < RESONANCE_GUARD {
            return Err(Error::NearResonant { factor, value });
        }
    }
    let s = d1 + d2;
    let numerator = a1 * a2 * s * s
        + a2 * ac * d1 * d1
        + a1 * d1 * d1 * s
        + a2 * d2 * d2 * s
        + ac * s * (d1 - d2) * (d1 - d2);
    let denominator = d1 * d1 * d2 * d2 * (s + ac) * (d2 - d1 - a2) * (d1 - d2 - a1);
    Ok(prefactor * numerator / denominator)
}

/// Fourth-order perturbative J in the same convention as [`zz_numeric`]
/// (`H_int = J |11⟩⟨11|`). The printed closed form carries the opposite
/// overall sign, so J = −[`printed_zz_expression`].
pub fn zz_perturbative(p: &DeviceParams) -> Result<ZZResult> {
    let w = printed_zz_expression(p)?;
    Ok(ZZResult::new(-w, ZZMethod::Perturbative))
}

/// One sweep value, or the reason it could not be computed.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepValue {
    Value(f64),
    Invalid(String),
}

impl SweepValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            SweepValue::Value(v) => Some(*v),
            SweepValue::Invalid(_) => None,
        }
    }

    fn from_result(r: Result<ZZResult>) -> Self {
        match r {
            Ok(z) => SweepValue::Value(z.j),
            Err(e) => SweepValue::Invalid(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub omega_c: f64,
    pub j_numeric: SweepValue,
    pub j_perturbative: SweepValue,
    /// Whether min(|Δ₁|, |Δ₂|) > 3·max(g) at this point.
    pub dispersive: bool,
}

/// J from both methods over a grid of coupler frequencies. Per-point failures
/// become [`SweepValue::Invalid`] rows; points outside the dispersive window
/// are still computed but flagged, since dressed-state tracking is unreliable
/// there.
pub fn coupler_sweep(p: &DeviceParams, omega_c_grid: &[f64]) -> Result<Vec<SweepRow>> {
    p.validate()?;
    if omega_c_grid.is_empty() {
        return Err(Error::Parameter("coupler grid is empty".into()));
    }
    if omega_c_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("coupler grid must be strictly ascending".into()));
    }
    let rows = omega_c_grid
        .par_iter()
        .map(|&wc| {
            let q = p.with_coupler(wc);
            SweepRow {
                omega_c: wc,
                j_numeric: SweepValue::from_result(zz_numeric(&q)),
                j_perturbative: SweepValue::from_result(zz_perturbative(&q)),
                dispersive: q.is_dispersive(3.0),
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoupled_hamiltonian_is_diagonal() {
        let p = DeviceParams {
            g1c: 0.0,
            g2c: 0.0,
            truncation: 3,
            ..DeviceParams::default()
        };
        let h = build_hamiltonian(&p).unwrap();
        let m = h.entries();
        let d = 3;
        for n1 in 0..d {
            for n2 in 0..d {
                for nc in 0..d {
                    let k = bare_index(d, n1, n2, nc);
                    let e = |w: f64, a: f64, n: usize| w * n as f64 + a * (n * n.saturating_sub(1)) as f64 / 2.0;
                    let expected = e(p.omega1, p.alpha1, n1) + e(p.omega2, p.alpha2, n2) + e(p.omega_c, p.alpha_c, nc);
                    assert!((m[(k, k)].re - expected).abs() <= 1e-6 * expected.abs().max(1.0));
                }
            }
        }
        let off: f64 = (0..27)
            .flat_map(|i| (0..27).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[(i, j)].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = build_hamiltonian(&DeviceParams::default()).unwrap();
        assert!(h.hermiticity_error() <= 1e-12);
        assert_eq!(h.dims(), &[4, 4, 4]);
    }

    #[test]
    fn truncation_below_three_rejected() {
        let p = DeviceParams {
            truncation: 2,
            ..DeviceParams::default()
        };
        assert!(matches!(build_hamiltonian(&p), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_coupling_gives_zero_j() {
        for (g1, g2) in [(0.0, mhz(116.0)), (mhz(142.0), 0.0), (0.0, 0.0)] {
            let p = DeviceParams {
                g1c: g1,
                g2c: g2,
                ..DeviceParams::default()
            };
            assert_eq!(zz_numeric(&p).unwrap().j, 0.0);
            assert_eq!(zz_perturbative(&p).unwrap().j, 0.0);
        }
    }

    #[test]
    fn weight_is_minus_j() {
        let p = DeviceParams::default().with_coupler(ghz(7.0));
        for z in [zz_numeric(&p).unwrap(), zz_perturbative(&p).unwrap()] {
            assert_eq!(z.weight, -z.j);
        }
    }

    #[test]
    fn printed_expression_matches_high_precision_evaluation() {
        // 50-digit evaluation of the closed form at ω_c/2π = 7.0 GHz
        let p = DeviceParams::default().with_coupler(ghz(7.0));
        let v = printed_zz_expression(&p).unwrap();
        let oracle = 1_972_943.054_470_691;
        assert!((v - oracle).abs() <= 1e-9 * oracle);
        assert_eq!(zz_perturbative(&p).unwrap().j, -v);
    }

    #[test]
    fn perturbative_scales_quartically() {
        let p = DeviceParams::default().with_coupler(ghz(7.3));
        let j = zz_perturbative(&p).unwrap().j;
        for s in [0.5, 1.7, 3.0] {
            let q = DeviceParams {
                g1c: p.g1c * s,
                g2c: p.g2c * s,
                ..p.clone()
            };
            let js = zz_perturbative(&q).unwrap().j;
            assert!((js / j - s.powi(4)).abs() <= 1e-10 * s.powi(4));
        }
    }

    #[test]
    fn near_resonance_is_reported() {
        // Δ₁ + Δ₂ + α_c = 0 at ω_c = (ω₁ + ω₂ − α_c)/2
        let p = DeviceParams::default();
        let wc = 0.5 * (p.omega1 + p.omega2 - p.alpha_c);
        match zz_perturbative(&p.with_coupler(wc)) {
            Err(Error::NearResonant { factor, .. }) => assert_eq!(factor, "Delta1 + Delta2 + alpha_c"),
            other => panic!("expected near-resonance error, got {other:?}"),
        }
    }

    #[test]
    fn device_file_round_trip() {
        let p = DeviceParams::default();
        let text = p.to_toml().unwrap();
        assert!(text.contains("omega1_ghz"));
        let q = DeviceParams::from_toml(&text).unwrap();
        assert!((q.omega1 - p.omega1).abs() < 1e-3);
        assert!((q.g2c - p.g2c).abs() < 1e-6);
        let partial = DeviceParams::from_toml("truncation = 5\n").unwrap();
        assert_eq!(partial.truncation, 5);
        assert!(DeviceParams::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn sweep_validates_grid() {
        let p = DeviceParams::default();
        assert!(coupler_sweep(&p, &[]).is_err());
        assert!(coupler_sweep(&p, &[ghz(7.0), ghz(6.9)]).is_err());
    }
}
