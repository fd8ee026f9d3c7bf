//! Uniform periodic grid over the torsion angle φ ∈ [0, 2π) together with the
//! integer spectral wavenumbers of its discrete Fourier transform.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Periodic angular grid. `n_points` is a power of two; point `n_points`
/// wraps back to 0. Spectral wavenumbers follow the standard DFT layout
/// (non-negative frequencies first, then negative).
#[derive(Debug, Clone)]
pub struct PeriodicGrid {
    n_points: usize,
    phi_values: Vec<f64>,
    dphi: f64,
    k_values: Vec<i64>,
}

impl PeriodicGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi_values
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }

    /// Integer wavenumbers in FFT storage order:
    /// `[0, 1, …, n/2-1, -n/2, …, -1]`.
    pub fn k_values(&self) -> &[i64] {
        &self.k_values
    }
}

/// Build a periodic grid with `n_points` (power of two, ≥ 8) samples of
/// φ_j = 2πj/n.
pub fn build_grid(n_points: usize) -> Result<Arc<PeriodicGrid>> {
    if n_points < 8 || !n_points.is_power_of_two() {
        return Err(Error::GridSize(n_points));
    }
    let dphi = TAU / n_points as f64;
    let phi_values = (0..n_points).map(|j| TAU * j as f64 / n_points as f64).collect();
    let half = (n_points / 2) as i64;
    let k_values = (0..n_points as i64).map(|k| if k < half { k } else { k - n_points as i64 }).collect();
    Ok(Arc::new(PeriodicGrid { n_points, phi_values, dphi, k_values }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rustfft::FftPlanner;
    use std::f64::consts::{FRAC_PI_4, TAU};

    #[test]
    fn grid_of_1024_points() {
        let g = build_grid(1024).unwrap();
        assert_eq!(g.n_points(), 1024);
        assert_relative_eq!(g.dphi(), TAU / 1024.0);
        assert_eq!(g.phi_values().len(), 1024);
    }

    #[test]
    fn eight_point_partition() {
        let g = build_grid(8).unwrap();
        let expected: Vec<f64> = (0..8).map(|j| j as f64 * FRAC_PI_4).collect();
        for (a, b) in g.phi_values().iter().zip(&expected) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_grid(1000).is_err());
        assert!(build_grid(4).is_err());
        assert!(build_grid(0).is_err());
    }

    #[test]
    fn dphi_sums_to_full_circle() {
        for n in [8usize, 64, 1024] {
            let g = build_grid(n).unwrap();
            let total: f64 = (0..g.n_points()).map(|_| g.dphi()).sum();
            assert!((total - TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn k_values_cover_symmetric_integer_range() {
        let g = build_grid(16).unwrap();
        let mut ks: Vec<i64> = g.k_values().to_vec();
        ks.sort_unstable();
        assert_eq!(ks, (-8..8).collect::<Vec<i64>>());
    }

    #[test]
    fn plane_wave_lands_on_single_bin() {
        let g = build_grid(256).unwrap();
        let m = 7i64;
        let mut buf: Vec<Complex64> = g
            .phi_values()
            .iter()
            .map(|&phi| Complex64::from_polar(1.0, m as f64 * phi))
            .collect();
        FftPlanner::new().plan_fft_forward(256).process(&mut buf);
        let peak = buf
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert_eq!(g.k_values()[peak.0], m);
        let peak_mag = peak.1.norm();
        for (i, v) in buf.iter().enumerate() {
            if g.k_values()[i] != m {
                assert!(v.norm() / peak_mag < 1e-10, "leakage at k={}", g.k_values()[i]);
            }
        }
    }
}
