//! Chirped Gaussian trial fields, field superposition and the sin² switching
//! envelope.
//!
//! A chirp is evaluated literally as
//!
//! ```text
//! E(t) = E_max exp(-(t-t_m)²/2σ²) cos[ω(t)(t-t_m) + φ],   ω(t) = ω₀ + c(t-t_m)
//! ```
//!
//! so the phase derivative (the effective instantaneous frequency) is
//! ω₀ + 2c(t-t_m); tests probe exactly that law.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::propagator::PropagationSettings;
use crate::units;

/// Parameters of one chirped Gaussian pulse, in the units they are usually
/// quoted in: peak field in V·m⁻¹, times in fs, carrier ħω₀ in cm⁻¹, chirp
/// rate ħc in cm⁻¹/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpSpec {
    pub e_max_v_per_m: f64,
    pub t_center_fs: f64,
    pub sigma_fs: f64,
    pub carrier_cm1: f64,
    pub chirp_rate_cm1_per_ps: f64,
    pub phase_rad: f64,
}

impl ChirpSpec {
    fn validate(&self) -> Result<()> {
        if !(self.sigma_fs > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma_fs)));
        }
        if self.e_max_v_per_m < 0.0 {
            return Err(Error::InvalidConfig(format!("peak field must be >= 0, got {}", self.e_max_v_per_m)));
        }
        if !(self.carrier_cm1 > 0.0) {
            return Err(Error::InvalidConfig(format!("carrier must be positive, got {}", self.carrier_cm1)));
        }
        Ok(())
    }

    /// E(t) at a time given in atomic units, returned in atomic field units.
    pub fn eval_au(&self, t_au: f64) -> f64 {
        let e_max = units::v_per_m_to_au(self.e_max_v_per_m);
        let tm = units::fs_to_au(self.t_center_fs);
        let sigma = units::fs_to_au(self.sigma_fs);
        let omega0 = units::cm1_to_hartree(self.carrier_cm1);
        let rate = units::cm1_to_hartree(self.chirp_rate_cm1_per_ps) / units::fs_to_au(1000.0);
        let d = t_au - tm;
        let envelope = (-d * d / (2.0 * sigma * sigma)).exp();
        let omega_t = omega0 + rate * d;
        e_max * envelope * (omega_t * d + self.phase_rad).cos()
    }
}

/// Units a field file may declare its samples in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    VoltPerMeter,
    Atomic,
}

impl FieldUnit {
    pub fn label(self) -> &'static str {
        match self {
            FieldUnit::VoltPerMeter => "V/m",
            FieldUnit::Atomic => "atomic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "V/m" => Ok(FieldUnit::VoltPerMeter),
            "atomic" => Ok(FieldUnit::Atomic),
            other => Err(Error::InvalidConfig(format!("unknown field unit '{other}'"))),
        }
    }
}

/// Real control field sampled at step midpoints t_j = (j + 1/2)·dt.
/// Samples are held in atomic units; `declared_unit` records the unit used
/// at the file interface.
#[derive(Debug, Clone)]
pub struct ControlField {
    dt_fs: f64,
    samples_au: Vec<f64>,
    declared_unit: FieldUnit,
}

impl ControlField {
    pub fn from_samples_au(samples_au: Vec<f64>, dt_fs: f64) -> Self {
        ControlField { dt_fs, samples_au, declared_unit: FieldUnit::VoltPerMeter }
    }

    pub fn zeros(dt_fs: f64, n: usize) -> Self {
        Self::from_samples_au(vec![0.0; n], dt_fs)
    }

    pub fn constant_au(value_au: f64, dt_fs: f64, n: usize) -> Self {
        Self::from_samples_au(vec![value_au; n], dt_fs)
    }

    pub fn with_declared_unit(mut self, unit: FieldUnit) -> Self {
        self.declared_unit = unit;
        self
    }

    pub fn declared_unit(&self) -> FieldUnit {
        self.declared_unit
    }

    pub fn len(&self) -> usize {
        self.samples_au.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples_au.is_empty()
    }

    pub fn dt_fs(&self) -> f64 {
        self.dt_fs
    }

    pub fn t_f_fs(&self) -> f64 {
        self.dt_fs * self.len() as f64
    }

    pub fn samples_au(&self) -> &[f64] {
        &self.samples_au
    }

    pub fn samples_au_mut(&mut self) -> &mut [f64] {
        &mut self.samples_au
    }

    /// Midpoint time of sample `j` in fs.
    pub fn time_fs(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dt_fs
    }

    /// ∫E² dt in atomic units.
    pub fn fluence_au(&self) -> f64 {
        let dt = units::fs_to_au(self.dt_fs);
        self.samples_au.iter().map(|e| e * e).sum::<f64>() * dt
    }

    /// Linear interpolation onto a new midpoint sampling.
    pub fn resample(&self, dt_fs: f64, n: usize) -> ControlField {
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let t = (j as f64 + 0.5) * dt_fs;
            out.push(self.value_at_fs(t));
        }
        ControlField { dt_fs, samples_au: out, declared_unit: self.declared_unit }
    }

    /// Field value at an arbitrary time by linear interpolation between
    /// midpoint samples (constant extrapolation at the edges).
    pub fn value_at_fs(&self, t_fs: f64) -> f64 {
        if self.samples_au.is_empty() {
            return 0.0;
        }
        let x = t_fs / self.dt_fs - 0.5;
        if x <= 0.0 {
            return self.samples_au[0];
        }
        let last = self.samples_au.len() - 1;
        if x >= last as f64 {
            return self.samples_au[last];
        }
        let j = x.floor() as usize;
        let frac = x - j as f64;
        self.samples_au[j] * (1.0 - frac) + self.samples_au[j + 1] * frac
    }
}

/// Evaluate a chirp at the midpoint sampling times of `settings`.
pub fn synthesize_chirp(spec: &ChirpSpec, settings: &PropagationSettings) -> Result<ControlField> {
    spec.validate()?;
    let dt_au = settings.dt_au();
    let samples = (0..settings.n_steps())
        .map(|j| spec.eval_au((j as f64 + 0.5) * dt_au))
        .collect();
    Ok(ControlField {
        dt_fs: settings.dt_fs(),
        samples_au: samples,
        declared_unit: FieldUnit::VoltPerMeter,
    })
}

/// Pointwise sum of identically sampled fields.
pub fn superpose(fields: &[ControlField]) -> Result<ControlField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidConfig("superpose needs at least one field".into()))?;
    let mut out = first.clone();
    for f in &fields[1..] {
        if f.len() != out.len() || (f.dt_fs() - out.dt_fs()).abs() > 1e-9 * out.dt_fs() {
            return Err(Error::SamplingMismatch(format!(
                "cannot superpose fields sampled as {}x{} fs and {}x{} fs",
                out.len(),
                out.dt_fs(),
                f.len(),
                f.dt_fs()
            )));
        }
        for (a, b) in out.samples_au.iter_mut().zip(&f.samples_au) {
            *a += b;
        }
    }
    Ok(out)
}

/// Switching envelope s(t) = sin²(πt/t_f) on [0, t_f].
pub fn envelope(t: f64, t_f: f64) -> Result<f64> {
    if !(0.0..=t_f).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, {t_f}]")));
    }
    let s = (PI * t / t_f).sin();
    Ok(s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_chirp_short() -> ChirpSpec {
        ChirpSpec {
            e_max_v_per_m: 5.91e9,
            t_center_fs: 12.0,
            sigma_fs: 3.4,
            carrier_cm1: 21_945.0,
            chirp_rate_cm1_per_ps: 548.6,
            phase_rad: 0.0,
        }
    }

    fn table_chirp_long() -> ChirpSpec {
        ChirpSpec {
            e_max_v_per_m: 8.06e8,
            t_center_fs: 230.0,
            sigma_fs: 65.0,
            carrier_cm1: 13_123.0,
            chirp_rate_cm1_per_ps: 17.1,
            phase_rad: 0.0,
        }
    }

    #[test]
    fn peak_value_at_center() {
        for phase in [0.0, 0.4, -1.2] {
            let spec = ChirpSpec { phase_rad: phase, ..table_chirp_short() };
            let at_center = spec.eval_au(units::fs_to_au(spec.t_center_fs));
            let expected = units::v_per_m_to_au(spec.e_max_v_per_m) * phase.cos();
            assert_relative_eq!(at_center, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn sampled_values_match_pointwise_evaluation() {
        let settings = PropagationSettings::from_steps(0.024, 2000).unwrap();
        for spec in [table_chirp_short(), table_chirp_long()] {
            let f = synthesize_chirp(&spec, &settings).unwrap();
            assert_eq!(f.len(), 2000);
            for j in (0..2000).step_by(97) {
                let t_au = units::fs_to_au(f.time_fs(j));
                assert_relative_eq!(f.samples_au()[j], spec.eval_au(t_au), max_relative = 1e-12);
            }
            assert!(f.samples_au().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn short_chirp_peak_amplitude_in_internal_units() {
        // 5.91e9 V/m is about 0.0115 atomic units
        let e = units::v_per_m_to_au(5.91e9);
        assert_relative_eq!(e, 0.011493, max_relative = 1e-4);
    }

    #[test]
    fn superpose_identities() {
        let settings = PropagationSettings::from_steps(0.1, 512).unwrap();
        let f = synthesize_chirp(&table_chirp_short(), &settings).unwrap();
        let zero = ControlField::zeros(0.1, 512);
        let sum = superpose(&[f.clone(), zero]).unwrap();
        for (a, b) in sum.samples_au().iter().zip(f.samples_au()) {
            assert_eq!(a, b);
        }
        let mut neg = f.clone();
        for v in neg.samples_au_mut() {
            *v = -*v;
        }
        let cancelled = superpose(&[f.clone(), neg]).unwrap();
        assert!(cancelled.samples_au().iter().all(|&v| v == 0.0));
        let mismatched = ControlField::zeros(0.2, 512);
        assert!(superpose(&[f, mismatched]).is_err());
    }

    #[test]
    fn envelope_endpoints_and_extrema() {
        let tf = 500.0;
        assert_eq!(envelope(0.0, tf).unwrap(), 0.0);
        assert!(envelope(tf, tf).unwrap().abs() < 1e-30);
        assert_relative_eq!(envelope(tf / 2.0, tf).unwrap(), 1.0);
        assert_relative_eq!(envelope(tf / 4.0, tf).unwrap(), 0.5, epsilon = 1e-15);
        assert!(envelope(-1.0, tf).is_err());
        assert!(envelope(tf + 1.0, tf).is_err());
    }

    #[test]
    fn zero_chirp_reduces_to_windowed_cosine() {
        let spec = ChirpSpec { chirp_rate_cm1_per_ps: 0.0, ..table_chirp_long() };
        let omega0 = units::cm1_to_hartree(spec.carrier_cm1);
        let tm = units::fs_to_au(spec.t_center_fs);
        let emax = units::v_per_m_to_au(spec.e_max_v_per_m);
        let sigma = units::fs_to_au(spec.sigma_fs);
        for k in -5..=5 {
            let t = tm + k as f64 * 37.0;
            let d = t - tm;
            let expected = emax * (-d * d / (2.0 * sigma * sigma)).exp() * (omega0 * d).cos();
            assert_relative_eq!(spec.eval_au(t), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn instantaneous_frequency_follows_the_literal_phase_derivative() {
        // steep synthetic chirp so the sweep is resolvable; the analytic
        // signal's phase derivative is the independent oracle
        let spec = ChirpSpec {
            e_max_v_per_m: 1.0e9,
            t_center_fs: 250.0,
            sigma_fs: 60.0,
            carrier_cm1: 13_000.0,
            chirp_rate_cm1_per_ps: 8_000.0,
            phase_rad: 0.0,
        };
        let n = 1 << 15;
        let dt_fs = 500.0 / n as f64;
        let settings = PropagationSettings::from_steps(dt_fs, n).unwrap();
        let field = synthesize_chirp(&spec, &settings).unwrap();

        // analytic signal via FFT: zero out negative frequencies
        let mut buf: Vec<num_complex::Complex64> = field
            .samples_au()
            .iter()
            .map(|&v| num_complex::Complex64::new(v, 0.0))
            .collect();
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        for (i, c) in buf.iter_mut().enumerate() {
            if i == 0 || i == n / 2 {
                // leave DC and Nyquist
            } else if i < n / 2 {
                *c *= 2.0;
            } else {
                *c = num_complex::Complex64::default();
            }
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        for c in buf.iter_mut() {
            *c /= n as f64;
        }

        let dt_au = settings.dt_au();
        let tm = units::fs_to_au(spec.t_center_fs);
        let sigma = units::fs_to_au(spec.sigma_fs);
        let omega0 = units::cm1_to_hartree(spec.carrier_cm1);
        let rate = units::cm1_to_hartree(spec.chirp_rate_cm1_per_ps) / units::fs_to_au(1000.0);
        let mut checked = 0;
        for j in 1..n - 1 {
            let t = (j as f64 + 0.5) * dt_au;
            if (t - tm).abs() > sigma {
                continue;
            }
            let dphase = (buf[j + 1] * buf[j - 1].conj()).arg() / (2.0 * dt_au);
            let expected = omega0 + 2.0 * rate * (t - tm);
            assert!(
                (dphase - expected).abs() <= 0.02 * expected,
                "IF mismatch at t = {t}: {dphase} vs {expected}"
            );
            checked += 1;
        }
        assert!(checked > 100);
    }

    proptest::proptest! {
        #[test]
        fn resample_preserves_constant_fields(v in -1.0f64..1.0, n in 16usize..256) {
            let f = ControlField::constant_au(v, 0.25, n);
            let g = f.resample(0.1, 2 * n);
            for &s in g.samples_au() {
                proptest::prop_assert!((s - v).abs() < 1e-12);
            }
        }
    }
}
