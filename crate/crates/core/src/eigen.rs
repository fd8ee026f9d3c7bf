//! Fourier-grid diagonalization: (a) each single-surface well Hamiltonian on
//! the periodic grid, yielding the bit states and the well eigenbases, and
//! (b) the coupled two-surface H₀ in the well-product basis, yielding the
//! eigenbasis used by the dissipative dynamics.
//!
//! The kinetic matrix is the exact circulant generated by the spectral
//! operator the propagator applies, so eigenpairs of these dense matrices are
//! eigenpairs of the grid Hamiltonian to solver accuracy.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use crate::model::{evaluate_potentials, kinetic_spectrum, DiabaticModel, WavePacket};

/// Eigenpairs of one single-surface well Hamiltonian. Eigenvectors are
/// grid-sampled real functions, orthonormal under the dφ quadrature.
#[derive(Debug, Clone)]
pub struct WellBasis {
    pub surface: u8,
    grid: Arc<PeriodicGrid>,
    pub eigenvalues: Vec<f64>,
    /// One eigenvector per entry, each of length `n_points`, quadrature
    /// normalized: Σ_j χ_a(φ_j)² dφ = 1.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Indices `i` where ε_{i+1} − ε_i fell below the degeneracy tolerance;
    /// such pairs are kept in solver order rather than reordered.
    pub degenerate_pairs: Vec<usize>,
}

impl WellBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    /// Lift eigenstate `index` to a two-component wavepacket on its surface.
    pub fn packet(&self, index: usize) -> WavePacket {
        let mut wp = WavePacket::zeros(Arc::clone(&self.grid));
        let comp = if self.surface == 1 { &mut wp.psi1 } else { &mut wp.psi2 };
        for (c, &v) in comp.iter_mut().zip(&self.eigenvectors[index]) {
            *c = C64::new(v, 0.0);
        }
        wp
    }

    /// Coefficients ⟨χ_a|ψ_s⟩ dφ of the packet component living on this
    /// surface.
    pub fn project(&self, psi: &WavePacket) -> Result<Vec<C64>> {
        if psi.grid().n_points() != self.grid.n_points() {
            return Err(Error::GridMismatch(psi.grid().n_points(), self.grid.n_points()));
        }
        let comp = if self.surface == 1 { &psi.psi1 } else { &psi.psi2 };
        let dphi = self.grid.dphi();
        Ok(self
            .eigenvectors
            .iter()
            .map(|chi| {
                let mut acc = C64::default();
                for (&x, c) in chi.iter().zip(comp) {
                    acc += x * c;
                }
                acc * dphi
            })
            .collect())
    }
}

/// Eigenbasis of the coupled two-surface H₀ expressed in the
/// (N₁+N₂)-dimensional well-product basis.
#[derive(Debug, Clone)]
pub struct CoupledEigenbasis {
    pub eigenvalues: Vec<f64>,
    /// Orthogonal transformation; rows index the product basis (surface-1
    /// states first), columns index eigenstates, ascending in energy.
    pub transform: DMatrix<f64>,
    pub n1: usize,
    pub n2: usize,
}

impl CoupledEigenbasis {
    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Dense kinetic matrix of the spectral operator: the circulant with symbol
/// ħ²k²/(2I).
fn kinetic_circulant(model: &DiabaticModel, grid: &PeriodicGrid) -> Vec<f64> {
    let n = grid.n_points();
    let spectrum = kinetic_spectrum(model, grid);
    let mut row = vec![0.0; n];
    for (d, r) in row.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &k) in grid.k_values().iter().enumerate() {
            acc += spectrum[i] * (std::f64::consts::TAU * k as f64 * d as f64 / n as f64).cos();
        }
        *r = acc / n as f64;
    }
    row
}

/// Dense single-surface Hamiltonian T + V_ss on the grid.
pub fn dense_single_surface(model: &DiabaticModel, grid: &PeriodicGrid, surface: u8) -> DMatrix<f64> {
    let n = grid.n_points();
    let row = kinetic_circulant(model, grid);
    let (v11, v22, _) = evaluate_potentials(model, grid);
    let v = if surface == 1 { v11 } else { v22 };
    DMatrix::from_fn(n, n, |j, l| {
        let d = (j + n - l) % n;
        row[d] + if j == l { v[j] } else { 0.0 }
    })
}

/// Dense two-surface grid Hamiltonian (2n × 2n), surface-1 block first.
pub fn dense_two_surface(model: &DiabaticModel, grid: &PeriodicGrid) -> DMatrix<f64> {
    let n = grid.n_points();
    let row = kinetic_circulant(model, grid);
    let (v11, v22, v12) = evaluate_potentials(model, grid);
    DMatrix::from_fn(2 * n, 2 * n, |a, b| {
        let (sa, j) = (a / n, a % n);
        let (sb, l) = (b / n, b % n);
        if sa == sb {
            let d = (j + n - l) % n;
            let v = if sa == 0 { &v11 } else { &v22 };
            row[d] + if j == l { v[j] } else { 0.0 }
        } else if j == l {
            v12
        } else {
            0.0
        }
    })
}

fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        // deterministic sign: largest-magnitude component positive
        let lead = v.iter().cloned().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

fn flag_degeneracies(values: &[f64]) -> Vec<usize> {
    let scale = values.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() <= 1e-12 * scale)
        .map(|(i, _)| i)
        .collect()
}

/// Lowest `count` eigenpairs of the single-surface Hamiltonian
/// −ħ²/(2I)∂²/∂φ² + V_ss(φ) on the periodic grid.
pub fn solve_well(
    model: &DiabaticModel,
    grid: &Arc<PeriodicGrid>,
    surface: u8,
    count: usize,
) -> Result<WellBasis> {
    let n = grid.n_points();
    if count > n {
        return Err(Error::BasisTooLarge { requested: count, available: n });
    }
    if !(surface == 1 || surface == 2) {
        return Err(Error::InvalidConfig(format!("surface must be 1 or 2, got {surface}")));
    }
    let (values, vectors) = sorted_symmetric_eigen(dense_single_surface(model, grid, surface));
    let inv_sqrt_dphi = 1.0 / grid.dphi().sqrt();
    let eigenvalues: Vec<f64> = values[..count].to_vec();
    let eigenvectors: Vec<Vec<f64>> = (0..count)
        .map(|a| vectors.column(a).iter().map(|&x| x * inv_sqrt_dphi).collect())
        .collect();
    let degenerate_pairs = flag_degeneracies(&eigenvalues);
    Ok(WellBasis {
        surface,
        grid: Arc::clone(grid),
        eigenvalues,
        eigenvectors,
        degenerate_pairs,
    })
}

/// Diagonalize H₀ in the product of the two well bases: diagonal blocks hold
/// the well energies, the off-diagonal block holds V12 times the overlap of
/// well functions.
pub fn build_coupled_hamiltonian(
    model: &DiabaticModel,
    basis1: &WellBasis,
    basis2: &WellBasis,
) -> Result<CoupledEigenbasis> {
    if basis1.grid().n_points() != basis2.grid().n_points() {
        return Err(Error::BasisMismatch(format!(
            "well bases on different grids ({} vs {})",
            basis1.grid().n_points(),
            basis2.grid().n_points()
        )));
    }
    if basis1.surface == basis2.surface {
        return Err(Error::BasisMismatch("need one basis per surface".into()));
    }
    let (n1, n2) = (basis1.len(), basis2.len());
    let dphi = basis1.grid().dphi();
    let mut h = DMatrix::zeros(n1 + n2, n1 + n2);
    for a in 0..n1 {
        h[(a, a)] = basis1.eigenvalues[a];
    }
    for b in 0..n2 {
        h[(n1 + b, n1 + b)] = basis2.eigenvalues[b];
    }
    for a in 0..n1 {
        let chi_a = &basis1.eigenvectors[a];
        for b in 0..n2 {
            let overlap: f64 = chi_a
                .iter()
                .zip(&basis2.eigenvectors[b])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                * dphi;
            let v = model.v12 * overlap;
            h[(a, n1 + b)] = v;
            h[(n1 + b, a)] = v;
        }
    }
    let (eigenvalues, transform) = sorted_symmetric_eigen(h);
    Ok(CoupledEigenbasis { eigenvalues, transform, n1, n2 })
}

/// Lift coupled eigenstate `k` back to a grid wavepacket.
pub fn coupled_eigenstate_packet(
    coupled: &CoupledEigenbasis,
    basis1: &WellBasis,
    basis2: &WellBasis,
    k: usize,
) -> WavePacket {
    let mut wp = WavePacket::zeros(Arc::clone(basis1.grid()));
    for a in 0..coupled.n1 {
        let c = coupled.transform[(a, k)];
        for (p, &x) in wp.psi1.iter_mut().zip(&basis1.eigenvectors[a]) {
            *p += C64::new(c * x, 0.0);
        }
    }
    for b in 0..coupled.n2 {
        let c = coupled.transform[(coupled.n1 + b, k)];
        for (p, &x) in wp.psi2.iter_mut().zip(&basis2.eigenvectors[b]) {
            *p += C64::new(c * x, 0.0);
        }
    }
    wp
}
