//! Diagnostic: full-horizon propagation under the two-chirp trial field with
//! projections onto the lowest trans-well states.

use isogate_core::eigen::solve_well;
use isogate_core::grid::build_grid;
use isogate_core::model::DiabaticModel;
use isogate_core::propagator::{propagate, PropagationSettings};
use isogate_core::pulses::{superpose, synthesize_chirp, ChirpSpec};

fn main() {
    let model = DiabaticModel::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../presets/retinal-1d-v12-0p010.toml"
    ))
    .unwrap();
    let grid = build_grid(1024).unwrap();
    let settings = PropagationSettings::from_steps(0.024, 20833).unwrap().with_store_stride(2000);
    let chirp1 = ChirpSpec {
        e_max_v_per_m: 5.91e9,
        t_center_fs: 12.0,
        sigma_fs: 3.4,
        carrier_cm1: 21_945.0,
        chirp_rate_cm1_per_ps: 548.6,
        phase_rad: 0.0,
    };
    let chirp2 = ChirpSpec {
        e_max_v_per_m: 8.06e8,
        t_center_fs: 230.0,
        sigma_fs: 65.0,
        carrier_cm1: 13_123.0,
        chirp_rate_cm1_per_ps: 17.1,
        phase_rad: 0.0,
    };
    let field = superpose(&[
        synthesize_chirp(&chirp1, &settings).unwrap(),
        synthesize_chirp(&chirp2, &settings).unwrap(),
    ])
    .unwrap();
    let b1 = solve_well(&model, &grid, 1, 1).unwrap();
    let b2 = solve_well(&model, &grid, 2, 8).unwrap();
    let (traj, psi_tf) = propagate(&model, &grid, &b1.packet(0), &field, &settings).unwrap();
    for k in 0..traj.times_fs.len() {
        println!(
            "t = {:7.2} fs  P1 = {:.4}  P2 = {:.4}  E = {:.5}",
            traj.times_fs[k], traj.p1[k], traj.p2[k], traj.energy_hartree[k]
        );
    }
    let proj = b2.project(&psi_tf).unwrap();
    for (a, c) in proj.iter().enumerate() {
        println!("|<trans_{a}|psi(tf)>|^2 = {:.3e}", c.norm_sqr());
    }
    // position distribution of the surface-2 component at t_f
    let dphi = grid.dphi();
    let mut blocks = [0.0f64; 8];
    for (j, &phi) in grid.phi_values().iter().enumerate() {
        let b = ((phi / (2.0 * std::f64::consts::PI)) * 8.0) as usize;
        blocks[b.min(7)] += psi_tf.psi2[j].norm_sqr() * dphi;
    }
    println!("surface-2 angular distribution (octants): {blocks:.3?}");
}
