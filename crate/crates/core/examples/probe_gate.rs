//! Quick command-line probe of the stage-1 optimization on the retinal
//! preset: seed index, per-iteration J, wall time.
//!
//! Usage: probe_gate [alpha] [iterations] [n_grid] [n_steps] [both]

use std::time::Instant;

use isogate_core::eigen::solve_well;
use isogate_core::grid::build_grid;
use isogate_core::model::DiabaticModel;
use isogate_core::oct::{optimize, GateSpec, MultiplierStorage, OCTProblem};
use isogate_core::propagator::PropagationSettings;
use isogate_core::pulses::{superpose, synthesize_chirp, ChirpSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(100.0);
    let iters: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(20);
    let n_grid: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1024);
    let n_steps: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(20833);
    let both: bool = args.get(5).map(|s| s == "both").unwrap_or(false);

    let model = DiabaticModel::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../presets/retinal-1d-v12-0p010.toml"
    ))
    .unwrap();
    let grid = build_grid(n_grid).unwrap();
    let settings = PropagationSettings::from_steps(0.024, n_steps).unwrap();

    let t = Instant::now();
    let b1 = solve_well(&model, &grid, 1, 1).unwrap();
    let b2 = solve_well(&model, &grid, 2, 1).unwrap();
    println!("well solves: {:?}; e0_cis = {:.6}, e0_trans = {:.6}", t.elapsed(), b1.eigenvalues[0], b2.eigenvalues[0]);

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
    let trial = superpose(&[
        synthesize_chirp(&chirp1, &settings).unwrap(),
        synthesize_chirp(&chirp2, &settings).unwrap(),
    ])
    .unwrap();

    let gate = if both {
        GateSpec::not_gate(b1.packet(0), b2.packet(0)).unwrap()
    } else {
        GateSpec::single(b1.packet(0), b2.packet(0)).unwrap()
    };
    let problem = OCTProblem {
        model,
        gate,
        alpha,
        settings,
        trial_field: trial,
        max_iterations: iters,
        j_tolerance: 0.0,
        divergence_drop: 0.05,
        update_clamp: Some(0.25),
        field_leak: 0.0,
        multiplier_storage: MultiplierStorage::Stored,
    };
    let problem = OCTProblem {
        trial_field: {
            let amp_problem = OCTProblem { alpha: 1e-3, max_iterations: 40, ..problem.clone() };
            let t = Instant::now();
            let amp = isogate_core::oct::amplify_seed(&amp_problem, 1e-3).unwrap();
            println!(
                "amplification: {} iterations to index {:.3e} ({:?})",
                amp.iterations.len() - 1,
                amp.indices.iter().sum::<f64>(),
                t.elapsed()
            );
            amp.field
        },
        ..problem
    };
    let t = Instant::now();
    match optimize(&problem) {
        Ok(result) => {
            for (k, rec) in result.iterations.iter().enumerate() {
                println!(
                    "iter {k:3}  J = {:+.15e}  idx = {:.3e}  fluence = {:.6e}",
                    rec.j, rec.indices.iter().sum::<f64>(), rec.fluence_au
                );
            }
            println!(
                "fidelity = {:.4}  ({} iterations, {:?})",
                result.fidelity,
                result.iterations.len() - 1,
                t.elapsed()
            );
        }
        Err(e) => println!("optimization failed: {e}"),
    }
}
