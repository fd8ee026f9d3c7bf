//! Diagnostic: field-free motion of a Franck-Condon packet placed on
//! surface 2 at the cis geometry.

use isogate_core::eigen::solve_well;
use isogate_core::grid::build_grid;
use isogate_core::model::{DiabaticModel, WavePacket};
use isogate_core::propagator::{propagate, PropagationSettings};
use isogate_core::pulses::ControlField;

fn main() {
    let model = DiabaticModel::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../presets/retinal-1d-v12-0p010.toml"
    ))
    .unwrap();
    let grid = build_grid(1024).unwrap();
    let settings = PropagationSettings::from_steps(0.024, 20833).unwrap().with_store_stride(2000);
    let b1 = solve_well(&model, &grid, 1, 1).unwrap();
    // vertical promotion of the cis ground to surface 2
    let cis = b1.packet(0);
    let mut fc = WavePacket::zeros(grid.clone());
    fc.psi2.copy_from_slice(&cis.psi1);
    fc.normalize();
    let field = ControlField::zeros(settings.dt_fs(), settings.n_steps());
    let (traj, psi_tf) = propagate(&model, &grid, &fc, &field, &settings).unwrap();
    let dphi = grid.dphi();
    for k in 0..traj.times_fs.len() {
        println!(
            "t = {:7.2} fs  P1 = {:.4}  P2 = {:.4}  E = {:.5}",
            traj.times_fs[k], traj.p1[k], traj.p2[k], traj.energy_hartree[k]
        );
    }
    let mut blocks = [0.0f64; 8];
    for (j, &phi) in grid.phi_values().iter().enumerate() {
        let b = ((phi / (2.0 * std::f64::consts::PI)) * 8.0) as usize;
        blocks[b.min(7)] += (psi_tf.psi1[j].norm_sqr() + psi_tf.psi2[j].norm_sqr()) * dphi;
    }
    println!("angular distribution at t_f (octants): {blocks:.3?}");
}
