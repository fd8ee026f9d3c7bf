//! Two-surface diabatic model on the periodic torsion grid: cosine-series
//! potentials V11(φ), V22(φ), constant electronic coupling V12, constant
//! transition dipole μ12 and the rotor kinetic term −(ħ²/2I)∂²/∂φ², plus the
//! two-component wavepackets the Hamiltonian acts on.
//!
//! All stored quantities are in atomic units; the model file declares the
//! units it was written in and conversion happens at load.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{build_grid, PeriodicGrid};
use crate::units::{self, Unit};

/// Truncated Fourier cosine series Σ_m c_m cos(mφ); 2π-periodic by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries(pub Vec<f64>);

impl CosineSeries {
    pub fn eval(&self, phi: f64) -> f64 {
        self.0.iter().enumerate().map(|(m, c)| c * (m as f64 * phi).cos()).sum()
    }
}

/// Field-free two-surface Hamiltonian parameters, in atomic units.
#[derive(Debug, Clone)]
pub struct DiabaticModel {
    pub v11: CosineSeries,
    pub v22: CosineSeries,
    /// Constant diabatic coupling (hartree).
    pub v12: f64,
    /// Moment of inertia of the torsion (ħ²/hartree).
    pub inertia: f64,
    /// Transition dipole magnitude (e·a₀); diagonal dipole elements vanish.
    pub mu12: f64,
}

impl DiabaticModel {
    /// Construct without well-shape validation. Intended for synthetic
    /// setups (free rotor, uncoupled surfaces) used by tests and oracles.
    pub fn bare(v11: CosineSeries, v22: CosineSeries, v12: f64, inertia: f64, mu12: f64) -> Self {
        DiabaticModel { v11, v22, v12, inertia, mu12 }
    }

    /// Construct and validate: positive coupling, dipole and inertia, V11
    /// minimal at φ = 0 and V22 minimal at φ = π (checked numerically on a
    /// reference grid).
    pub fn new(v11: CosineSeries, v22: CosineSeries, v12: f64, inertia: f64, mu12: f64) -> Result<Self> {
        let model = Self::bare(v11, v22, v12, inertia, mu12);
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if !(self.v12 > 0.0) {
            return Err(Error::InvalidModel(format!("v12 must be positive, got {}", self.v12)));
        }
        if !(self.mu12 > 0.0) {
            return Err(Error::InvalidModel(format!("mu12 must be positive, got {}", self.mu12)));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::InvalidModel(format!("inertia must be positive, got {}", self.inertia)));
        }
        let grid = build_grid(1024).expect("reference grid");
        let (v11, v22, _) = evaluate_potentials(self, &grid);
        let scale = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
        let min11 = v11.iter().copied().fold(f64::INFINITY, f64::min);
        if v11[0] > min11 + 1e-12 * scale(&v11) {
            return Err(Error::InvalidModel(
                "V11 does not attain its global minimum at phi = 0".into(),
            ));
        }
        let min22 = v22.iter().copied().fold(f64::INFINITY, f64::min);
        if v22[grid.n_points() / 2] > min22 + 1e-12 * scale(&v22) {
            return Err(Error::InvalidModel(
                "V22 does not attain its global minimum at phi = pi".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        file.into_model()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    potential: PotentialSection,
    coupling: CouplingSection,
    kinetic: KineticSection,
    dipole: DipoleSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSection {
    v11: CoefficientList,
    v22: CoefficientList,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientList {
    unit: String,
    coefficients: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingSection {
    unit: String,
    v12: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KineticSection {
    unit: String,
    inertia: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DipoleSection {
    unit: String,
    mu12: f64,
}

fn energy_unit(name: &str) -> Result<Unit> {
    match name {
        "hartree" => Ok(Unit::Hartree),
        "ev" | "eV" => Ok(Unit::ElectronVolt),
        "cm-1" => Ok(Unit::Wavenumber),
        other => Err(Error::InvalidConfig(format!("unknown energy unit '{other}'"))),
    }
}

impl ModelFile {
    fn into_model(self) -> Result<DiabaticModel> {
        let to_hartree = |list: &CoefficientList| -> Result<Vec<f64>> {
            let u = energy_unit(&list.unit)?;
            list.coefficients
                .iter()
                .map(|&c| units::convert(c, u, Unit::Hartree))
                .collect()
        };
        let v11 = CosineSeries(to_hartree(&self.potential.v11)?);
        let v22 = CosineSeries(to_hartree(&self.potential.v22)?);
        let v12 = units::convert(self.coupling.v12, energy_unit(&self.coupling.unit)?, Unit::Hartree)?;
        if self.kinetic.unit != "atomic" {
            return Err(Error::InvalidConfig(format!(
                "inertia must be given in 'atomic' units (hbar^2/hartree), got '{}'",
                self.kinetic.unit
            )));
        }
        let mu12 = match self.dipole.unit.as_str() {
            "debye" => units::debye_to_au(self.dipole.mu12),
            "atomic" => self.dipole.mu12,
            other => return Err(Error::InvalidConfig(format!("unknown dipole unit '{other}'"))),
        };
        DiabaticModel::new(v11, v22, v12, self.kinetic.inertia, mu12)
    }
}

/// Sample both diagonal potentials on the grid; the coupling is constant.
pub fn evaluate_potentials(model: &DiabaticModel, grid: &PeriodicGrid) -> (Vec<f64>, Vec<f64>, f64) {
    let v11 = grid.phi_values().iter().map(|&p| model.v11.eval(p)).collect();
    let v22 = grid.phi_values().iter().map(|&p| model.v22.eval(p)).collect();
    (v11, v22, model.v12)
}

/// Kinetic energies ħ²k²/(2I) in FFT wavenumber order.
pub fn kinetic_spectrum(model: &DiabaticModel, grid: &PeriodicGrid) -> Vec<f64> {
    grid.k_values()
        .iter()
        .map(|&k| {
            let kk = k as f64;
            kk * kk / (2.0 * model.inertia)
        })
        .collect()
}

/// Two-component complex amplitude vector on the periodic grid, one
/// component per diabatic surface. Inner products carry the dφ quadrature
/// weight.
#[derive(Debug, Clone)]
pub struct WavePacket {
    grid: Arc<PeriodicGrid>,
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
}

impl WavePacket {
    pub fn zeros(grid: Arc<PeriodicGrid>) -> Self {
        let n = grid.n_points();
        WavePacket { grid, psi1: vec![C64::default(); n], psi2: vec![C64::default(); n] }
    }

    pub fn from_components(grid: Arc<PeriodicGrid>, psi1: Vec<C64>, psi2: Vec<C64>) -> Result<Self> {
        if psi1.len() != grid.n_points() || psi2.len() != grid.n_points() {
            return Err(Error::GridMismatch(psi1.len(), grid.n_points()));
        }
        Ok(WavePacket { grid, psi1, psi2 })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn norm2(&self) -> f64 {
        let s: f64 = self
            .psi1
            .iter()
            .chain(self.psi2.iter())
            .map(|c| c.norm_sqr())
            .sum();
        s * self.grid.dphi()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for c in self.psi1.iter_mut().chain(self.psi2.iter_mut()) {
                *c *= inv;
            }
        }
    }

    /// Population on each diabatic surface: P_s = Σ_j |ψ_s(φ_j)|² dφ.
    pub fn populations(&self) -> (f64, f64) {
        let dphi = self.grid.dphi();
        let p1: f64 = self.psi1.iter().map(|c| c.norm_sqr()).sum::<f64>() * dphi;
        let p2: f64 = self.psi2.iter().map(|c| c.norm_sqr()).sum::<f64>() * dphi;
        (p1, p2)
    }

    /// dφ-weighted inner product ⟨self|other⟩ summed over both components.
    pub fn inner(&self, other: &WavePacket) -> Result<C64> {
        if self.grid.n_points() != other.grid.n_points() {
            return Err(Error::GridMismatch(self.grid.n_points(), other.grid.n_points()));
        }
        let mut acc = C64::default();
        for (a, b) in self.psi1.iter().zip(&other.psi1) {
            acc += a.conj() * b;
        }
        for (a, b) in self.psi2.iter().zip(&other.psi2) {
            acc += a.conj() * b;
        }
        Ok(acc * self.grid.dphi())
    }

    /// ⟨self|μ|other⟩ for the purely off-diagonal dipole, divided by μ12
    /// (the caller multiplies the constant back in).
    pub fn dipole_overlap(&self, other: &WavePacket) -> Result<C64> {
        if self.grid.n_points() != other.grid.n_points() {
            return Err(Error::GridMismatch(self.grid.n_points(), other.grid.n_points()));
        }
        let mut acc = C64::default();
        for ((a1, a2), (b1, b2)) in self
            .psi1
            .iter()
            .zip(&self.psi2)
            .zip(other.psi1.iter().zip(&other.psi2))
        {
            acc += a1.conj() * b2 + a2.conj() * b1;
        }
        Ok(acc * self.grid.dphi())
    }

    /// self += c · other
    pub fn add_scaled(&mut self, c: C64, other: &WavePacket) {
        for (a, b) in self.psi1.iter_mut().zip(&other.psi1) {
            *a += c * b;
        }
        for (a, b) in self.psi2.iter_mut().zip(&other.psi2) {
            *a += c * b;
        }
    }

    pub fn conjugate_in_place(&mut self) {
        for c in self.psi1.iter_mut().chain(self.psi2.iter_mut()) {
            *c = c.conj();
        }
    }
}

/// Apply the field-free Hamiltonian H₀ = T + V: spectral kinetic term per
/// component plus the 2×2 potential action (V11ψ₁ + V12ψ₂, V12ψ₁ + V22ψ₂).
pub fn apply_h0(model: &DiabaticModel, grid: &Arc<PeriodicGrid>, psi: &WavePacket) -> Result<WavePacket> {
    if psi.grid().n_points() != grid.n_points() {
        return Err(Error::GridMismatch(psi.grid().n_points(), grid.n_points()));
    }
    let n = grid.n_points();
    let spectrum = kinetic_spectrum(model, grid);
    let (v11, v22, v12) = evaluate_potentials(model, grid);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let norm = 1.0 / n as f64;

    let kinetic = |amps: &[C64]| -> Vec<C64> {
        let mut buf = amps.to_vec();
        fft.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&spectrum) {
            *b *= t * norm;
        }
        ifft.process(&mut buf);
        buf
    };

    let mut out = WavePacket::zeros(Arc::clone(grid));
    let t1 = kinetic(&psi.psi1);
    let t2 = kinetic(&psi.psi2);
    for j in 0..n {
        out.psi1[j] = t1[j] + v11[j] * psi.psi1[j] + v12 * psi.psi2[j];
        out.psi2[j] = t2[j] + v12 * psi.psi1[j] + v22[j] * psi.psi2[j];
    }
    Ok(out)
}

/// ⟨ψ|H₀|ψ⟩ for a normalized packet (tolerance 1e-6 on the norm).
pub fn expectation_energy(model: &DiabaticModel, grid: &Arc<PeriodicGrid>, psi: &WavePacket) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm, tol: 1e-6 });
    }
    let h_psi = apply_h0(model, grid, psi)?;
    let e = psi.inner(&h_psi)?;
    debug_assert!(e.im.abs() <= 1e-12 * e.re.abs().max(1e-300));
    Ok(e.re)
}

/// Ground-state-like Gaussian seed centered at `phi0`, placed on `surface`
/// (1 or 2). Used for synthetic initial conditions; eigensolver output is
/// preferred for physical runs.
pub fn gaussian_packet(grid: &Arc<PeriodicGrid>, surface: u8, phi0: f64, sigma: f64) -> WavePacket {
    let mut wp = WavePacket::zeros(Arc::clone(grid));
    let comp = match surface {
        1 => &mut wp.psi1,
        _ => &mut wp.psi2,
    };
    for (j, &phi) in grid.phi_values().iter().enumerate() {
        // nearest periodic image of (phi - phi0)
        let mut d = phi - phi0;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        comp[j] = C64::new((-d * d / (4.0 * sigma * sigma)).exp(), 0.0);
    }
    wp.normalize();
    wp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_model() -> DiabaticModel {
        DiabaticModel::bare(CosineSeries(vec![]), CosineSeries(vec![]), 0.0, 1.0, 1.0)
    }

    fn random_packet(grid: &Arc<PeriodicGrid>, seed: u64) -> WavePacket {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n_points();
        let mut wp = WavePacket::zeros(Arc::clone(grid));
        for j in 0..n {
            wp.psi1[j] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            wp.psi2[j] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        wp.normalize();
        wp
    }

    #[test]
    fn zero_series_evaluates_to_zero() {
        let m = flat_model();
        let grid = build_grid(64).unwrap();
        let (v11, v22, _) = evaluate_potentials(&m, &grid);
        assert!(v11.iter().all(|&v| v == 0.0));
        assert!(v22.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_cosine_term() {
        let a = 0.3;
        let s = CosineSeries(vec![0.0, a]);
        assert_relative_eq!(s.eval(0.0), a);
        assert_relative_eq!(s.eval(PI), -a, epsilon = 1e-15);
    }

    #[test]
    fn series_is_periodic() {
        let s = CosineSeries(vec![0.1, -0.2, 0.05, 0.3]);
        let grid = build_grid(32).unwrap();
        for &phi in grid.phi_values() {
            assert_relative_eq!(s.eval(phi), s.eval(phi + 2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn kinetic_spectrum_values() {
        let m = flat_model();
        let grid = build_grid(16).unwrap();
        let spec = kinetic_spectrum(&m, &grid);
        // k = 0 entry
        assert_eq!(spec[0], 0.0);
        // k = 1 with I = 1: 0.5 hartree
        assert_relative_eq!(spec[1], 0.5);
        // parity: k and -k agree
        for (i, &k) in grid.k_values().iter().enumerate() {
            if k != -8 {
                let j = grid.k_values().iter().position(|&q| q == -k).unwrap();
                assert_relative_eq!(spec[i], spec[j]);
            }
            assert!(spec[i] >= 0.0);
        }
    }

    #[test]
    fn constant_packet_annihilated_by_free_h0() {
        let m = flat_model();
        let grid = build_grid(64).unwrap();
        let mut psi = WavePacket::zeros(Arc::clone(&grid));
        for c in psi.psi1.iter_mut() {
            *c = C64::new(1.0, 0.0);
        }
        psi.normalize();
        let h = apply_h0(&m, &grid, &psi).unwrap();
        assert!(h.norm() < 1e-12);
    }

    #[test]
    fn off_diagonal_coupling_acts() {
        let m = DiabaticModel::bare(CosineSeries(vec![]), CosineSeries(vec![]), 0.02, 1.0, 1.0);
        let grid = build_grid(64).unwrap();
        let psi = gaussian_packet(&grid, 2, PI, 0.3);
        let h = apply_h0(&m, &grid, &psi).unwrap();
        let p1: f64 = h.psi1.iter().map(|c| c.norm_sqr()).sum();
        assert!(p1 > 0.0, "coupling must populate the other component");
    }

    #[test]
    fn apply_h0_is_linear() {
        let m = DiabaticModel::bare(
            CosineSeries(vec![0.05, -0.04]),
            CosineSeries(vec![0.08, 0.02]),
            0.01,
            100.0,
            1.0,
        );
        let grid = build_grid(64).unwrap();
        let psi = random_packet(&grid, 7);
        let phi = random_packet(&grid, 8);
        let (a, b) = (C64::new(0.3, -0.7), C64::new(-1.1, 0.2));
        let mut combo = WavePacket::zeros(Arc::clone(&grid));
        combo.add_scaled(a, &psi);
        combo.add_scaled(b, &phi);
        let lhs = apply_h0(&m, &grid, &combo).unwrap();
        let mut rhs = WavePacket::zeros(Arc::clone(&grid));
        rhs.add_scaled(a, &apply_h0(&m, &grid, &psi).unwrap());
        rhs.add_scaled(b, &apply_h0(&m, &grid, &phi).unwrap());
        let mut diff = lhs.clone();
        diff.add_scaled(C64::new(-1.0, 0.0), &rhs);
        assert!(diff.norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn apply_h0_is_hermitian() {
        let m = DiabaticModel::bare(
            CosineSeries(vec![0.05, -0.04, 0.01]),
            CosineSeries(vec![0.08, 0.02]),
            0.013,
            250.0,
            1.0,
        );
        let grid = build_grid(128).unwrap();
        for seed in 0..4 {
            let psi = random_packet(&grid, 100 + seed);
            let phi = random_packet(&grid, 200 + seed);
            let lhs = phi.inner(&apply_h0(&m, &grid, &psi).unwrap()).unwrap();
            let rhs = psi.inner(&apply_h0(&m, &grid, &phi).unwrap()).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn expectation_energy_rejects_unnormalized() {
        let m = flat_model();
        let grid = build_grid(64).unwrap();
        let mut psi = gaussian_packet(&grid, 1, 0.0, 0.3);
        for c in psi.psi1.iter_mut() {
            *c *= 2.0;
        }
        assert!(matches!(
            expectation_energy(&m, &grid, &psi),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn model_file_round_trip_and_validation() {
        let text = r#"
[potential.v11]
unit = "hartree"
coefficients = [0.0733, -0.0661]

[potential.v22]
unit = "hartree"
coefficients = [0.0835, 0.0200]

[coupling]
unit = "hartree"
v12 = 0.01

[kinetic]
unit = "atomic"
inertia = 56221.87

[dipole]
unit = "debye"
mu12 = 1.0
"#;
        let m = DiabaticModel::from_toml_str(text, "inline").unwrap();
        assert_relative_eq!(m.v12, 0.01);
        assert_relative_eq!(m.mu12, units::debye_to_au(1.0));
        // wells in the right places
        let grid = build_grid(256).unwrap();
        let (v11, v22, _) = evaluate_potentials(&m, &grid);
        let min11 = v11.iter().copied().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(v11[0], min11);
        let min22 = v22.iter().copied().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(v22[128], min22);
    }

    #[test]
    fn model_file_rejects_missing_units() {
        let text = r#"
[potential.v11]
coefficients = [0.0733, -0.0661]

[potential.v22]
unit = "hartree"
coefficients = [0.0835, 0.0200]

[coupling]
unit = "hartree"
v12 = 0.01

[kinetic]
unit = "atomic"
inertia = 56221.87

[dipole]
unit = "debye"
mu12 = 1.0
"#;
        assert!(DiabaticModel::from_toml_str(text, "inline").is_err());
    }

    #[test]
    fn wrong_well_orientation_rejected() {
        // V11 with a minimum at pi instead of 0
        let bad = DiabaticModel::new(
            CosineSeries(vec![0.0733, 0.0661]),
            CosineSeries(vec![0.0835, 0.0200]),
            0.01,
            56221.87,
            units::debye_to_au(1.0),
        );
        assert!(bad.is_err());
    }
}
