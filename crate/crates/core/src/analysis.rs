//! Post-processing: diabatic populations and the windowed time-frequency
//! map of a control field,
//!
//! ```text
//! F(ω,t) = |∫ H(s-t, τ) E(s) e^{iωs} ds|²
//! ```
//!
//! with the Blackman window H(s,τ) = 0.08 cos(4πs/τ) + 0.5 cos(2πs/τ) + 0.42
//! on |s| ≤ τ/2 and zero elsewhere.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec;
use crate::model::WavePacket;
use crate::pulses::ControlField;
use crate::units;

/// Blackman window of resolution `tau`; `s` and `tau` in the same time unit.
pub fn blackman_window(s: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::OutOfRange(format!("window width must be positive, got {tau}")));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("window argument"));
    }
    let x = s / tau;
    if x.abs() > 0.5 {
        return Ok(0.0);
    }
    Ok(0.08 * (4.0 * PI * x).cos() + 0.5 * (2.0 * PI * x).cos() + 0.42)
}

/// Uniform frequency axis for spectrograms, in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub min_cm1: f64,
    pub max_cm1: f64,
    pub step_cm1: f64,
}

impl Default for FrequencyGrid {
    /// Covers both carriers used in gate-field analysis.
    fn default() -> Self {
        FrequencyGrid { min_cm1: 0.0, max_cm1: 25_000.0, step_cm1: 50.0 }
    }
}

impl FrequencyGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max_cm1 - self.min_cm1) / self.step_cm1).round() as usize + 1;
        (0..n).map(|i| self.min_cm1 + i as f64 * self.step_cm1).collect()
    }
}

/// Time-frequency magnitude map of a field. Rows index frequency, columns
/// index time.
#[derive(Debug, Clone)]
pub struct GaborSpectrogram {
    pub times_fs: Vec<f64>,
    pub freqs_cm1: Vec<f64>,
    /// Row-major `[freq][time]` magnitudes, all non-negative.
    pub magnitude: Vec<f64>,
    pub tau_fs: f64,
}

impl GaborSpectrogram {
    pub fn n_freqs(&self) -> usize {
        self.freqs_cm1.len()
    }

    pub fn n_times(&self) -> usize {
        self.times_fs.len()
    }

    pub fn value(&self, freq_index: usize, time_index: usize) -> f64 {
        self.magnitude[freq_index * self.n_times() + time_index]
    }

    /// Frequency of the strongest bin at a given time column.
    pub fn ridge_at(&self, time_index: usize) -> f64 {
        let nt = self.n_times();
        let mut best = (0usize, f64::NEG_INFINITY);
        for f in 0..self.n_freqs() {
            let v = self.magnitude[f * nt + time_index];
            if v > best.1 {
                best = (f, v);
            }
        }
        self.freqs_cm1[best.0]
    }
}

struct WindowPlan {
    /// Per output time: first field-sample index in the window support and
    /// the window weights from there on.
    spans: Vec<(usize, Vec<f64>)>,
}

fn plan_windows(field: &ControlField, times_fs: &[f64], tau_fs: f64) -> Result<WindowPlan> {
    let n = field.len();
    let mut spans = Vec::with_capacity(times_fs.len());
    for &t in times_fs {
        let lo = ((t - tau_fs / 2.0) / field.dt_fs() - 0.5).ceil().max(0.0) as usize;
        let hi = (((t + tau_fs / 2.0) / field.dt_fs() - 0.5).floor() as isize).min(n as isize - 1);
        let mut weights = Vec::new();
        if hi >= lo as isize {
            for j in lo..=hi as usize {
                weights.push(blackman_window(field.time_fs(j) - t, tau_fs)?);
            }
        }
        spans.push((lo, weights));
    }
    Ok(WindowPlan { spans })
}

fn gabor_row(row: &mut [f64], omega_au: f64, field: &ControlField, plan: &WindowPlan, dt_au: f64) {
    // phase table e^{i omega s_j} over all samples of this row's frequency
    let phases: Vec<C64> = (0..field.len())
        .map(|j| C64::from_polar(1.0, omega_au * (j as f64 + 0.5) * dt_au))
        .collect();
    let samples = field.samples_au();
    for (cell, (lo, weights)) in row.iter_mut().zip(&plan.spans) {
        let mut acc = C64::default();
        for (k, w) in weights.iter().enumerate() {
            let j = lo + k;
            acc += w * samples[j] * phases[j];
        }
        acc *= dt_au;
        *cell = acc.norm_sqr();
    }
}

fn gabor_axes(field: &ControlField, tau_fs: f64, time_stride_fs: f64) -> Result<Vec<f64>> {
    if !(tau_fs > 0.0) {
        return Err(Error::OutOfRange(format!("window width must be positive, got {tau_fs}")));
    }
    if tau_fs < 4.0 * field.dt_fs() {
        return Err(Error::OutOfRange(format!(
            "window width {tau_fs} fs is below 4 samples of the dt = {} fs field",
            field.dt_fs()
        )));
    }
    if !(time_stride_fs > 0.0) {
        return Err(Error::OutOfRange("time stride must be positive".into()));
    }
    let n_t = (field.t_f_fs() / time_stride_fs).floor() as usize + 1;
    Ok((0..n_t).map(|i| i as f64 * time_stride_fs).collect())
}

/// Windowed discrete transform of `field` on the requested axes. Times run
/// over [0, t_f] with the given stride; values are the bare modulus squares
/// of the rectangle-rule integral (no normalization).
pub fn gabor(
    field: &ControlField,
    tau_fs: f64,
    freqs: &FrequencyGrid,
    time_stride_fs: f64,
) -> Result<GaborSpectrogram> {
    let times_fs = gabor_axes(field, tau_fs, time_stride_fs)?;
    let freqs_cm1 = freqs.values();
    let plan = plan_windows(field, &times_fs, tau_fs)?;
    let dt_au = units::fs_to_au(field.dt_fs());

    let mut magnitude = vec![0.0; freqs_cm1.len() * times_fs.len()];
    exec::for_each_row_mut(&mut magnitude, times_fs.len(), |fi, row| {
        let omega_au = units::cm1_to_hartree(freqs_cm1[fi]);
        gabor_row(row, omega_au, field, &plan, dt_au);
    });

    Ok(GaborSpectrogram { times_fs, freqs_cm1, magnitude, tau_fs })
}

/// Sequential twin of [`gabor`]; same numerics, one row at a time. Kept for
/// the bench suite.
pub fn gabor_serial(
    field: &ControlField,
    tau_fs: f64,
    freqs: &FrequencyGrid,
    time_stride_fs: f64,
) -> Result<GaborSpectrogram> {
    let times_fs = gabor_axes(field, tau_fs, time_stride_fs)?;
    let freqs_cm1 = freqs.values();
    let plan = plan_windows(field, &times_fs, tau_fs)?;
    let dt_au = units::fs_to_au(field.dt_fs());
    let mut magnitude = vec![0.0; freqs_cm1.len() * times_fs.len()];
    exec::for_each_row_mut_serial(&mut magnitude, times_fs.len(), |fi, row| {
        let omega_au = units::cm1_to_hartree(freqs_cm1[fi]);
        gabor_row(row, omega_au, field, &plan, dt_au);
    });
    Ok(GaborSpectrogram { times_fs, freqs_cm1, magnitude, tau_fs })
}

/// Diabatic populations of a wavepacket: P_s = Σ_j |ψ_s(φ_j)|² dφ.
pub fn populations(psi: &WavePacket) -> (f64, f64) {
    psi.populations()
}
