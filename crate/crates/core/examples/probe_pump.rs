//! Diagnostic: populations along a propagation of the cis ground state
//! under configurable pulse parameters.
//!
//! Usage: probe_pump [e_max_v_per_m] [carrier_cm1] [sigma_fs] [t_center_fs]

use isogate_core::eigen::solve_well;
use isogate_core::grid::build_grid;
use isogate_core::model::DiabaticModel;
use isogate_core::propagator::{propagate, PropagationSettings};
use isogate_core::pulses::{synthesize_chirp, ChirpSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let e_max: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(5.91e9);
    let carrier: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(21_945.0);
    let sigma: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(3.4);
    let t_center: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(12.0);

    let model = DiabaticModel::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../presets/retinal-1d-v12-0p010.toml"
    ))
    .unwrap();
    let grid = build_grid(512).unwrap();
    let settings = PropagationSettings::from_steps(0.024, 4000).unwrap().with_store_stride(200);
    let spec = ChirpSpec {
        e_max_v_per_m: e_max,
        t_center_fs: t_center,
        sigma_fs: sigma,
        carrier_cm1: carrier,
        chirp_rate_cm1_per_ps: 0.0,
        phase_rad: 0.0,
    };
    let field = synthesize_chirp(&spec, &settings).unwrap();
    println!(
        "field peak {:.5} au; samples around peak: {:?}",
        field.samples_au().iter().cloned().fold(0.0f64, f64::max),
        &field.samples_au()[480..484]
    );
    let b1 = solve_well(&model, &grid, 1, 1).unwrap();
    let (traj, _) = propagate(&model, &grid, &b1.packet(0), &field, &settings).unwrap();
    for k in 0..traj.times_fs.len() {
        println!(
            "t = {:7.2} fs  P1 = {:.6}  P2 = {:.6}  E = {:.6}",
            traj.times_fs[k], traj.p1[k], traj.p2[k], traj.energy_hartree[k]
        );
    }
}
