//! Probe of the complete two-stage gate construction.
//!
//! Usage: probe_workflow [alpha] [n_grid] [max_iter] [preset]

use std::time::Instant;

use isogate_core::eigen::solve_well;
use isogate_core::grid::build_grid;
use isogate_core::model::DiabaticModel;
use isogate_core::oct::{run_gate_workflow, GateWorkflow, MultiplierStorage};
use isogate_core::propagator::PropagationSettings;
use isogate_core::pulses::{superpose, synthesize_chirp, ChirpSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1e-4);
    let n_grid: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(512);
    let max_iter: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(80);
    let preset: String = args
        .get(4)
        .cloned()
        .unwrap_or_else(|| "retinal-1d-v12-0p010".into());

    let model = DiabaticModel::load(format!(
        "{}/../../presets/{preset}.toml",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let grid = build_grid(n_grid).unwrap();
    let settings = PropagationSettings::from_steps(0.024, 20833).unwrap();
    let b1 = solve_well(&model, &grid, 1, 1).unwrap();
    let b2 = solve_well(&model, &grid, 2, 1).unwrap();
    let chirps = [
        ChirpSpec {
            e_max_v_per_m: 5.91e9,
            t_center_fs: 12.0,
            sigma_fs: 3.4,
            carrier_cm1: 21_945.0,
            chirp_rate_cm1_per_ps: 548.6,
            phase_rad: 0.0,
        },
        ChirpSpec {
            e_max_v_per_m: 8.06e8,
            t_center_fs: 230.0,
            sigma_fs: 65.0,
            carrier_cm1: 13_123.0,
            chirp_rate_cm1_per_ps: 17.1,
            phase_rad: 0.0,
        },
    ];
    let trial = superpose(&[
        synthesize_chirp(&chirps[0], &settings).unwrap(),
        synthesize_chirp(&chirps[1], &settings).unwrap(),
    ])
    .unwrap();

    let workflow = GateWorkflow {
        model,
        bit0: b1.packet(0),
        bit1: b2.packet(0),
        trial_field: trial,
        alpha,
        settings,
        max_iterations: max_iter,
        j_tolerance: std::env::var("JTOL").map(|v| v.parse().unwrap()).unwrap_or(0.0),
        divergence_drop: std::env::var("DDROP").map(|v| v.parse().unwrap()).unwrap_or(0.05),
        update_clamp: Some(std::env::var("CLAMP").map(|v| v.parse().unwrap()).unwrap_or(0.25)),
        field_leak: std::env::var("LEAK").map(|v| v.parse().unwrap()).unwrap_or(0.0),
        multiplier_storage: MultiplierStorage::Stored,
        seed_target_index: 1e-3,
        amplify_alpha: 1e-3,
        amplify_max_iterations: 40,
    };
    let t = Instant::now();
    match run_gate_workflow(&workflow) {
        Ok(result) => {
            if let Some(amp) = &result.amplification {
                println!(
                    "amplification: {} iterations, index {:.3e}, fluence {:.3}",
                    amp.iterations.len() - 1,
                    amp.indices.iter().sum::<f64>(),
                    amp.fluence_au
                );
            }
            println!(
                "stage1: {} iterations, index {:.4}, fluence {:.3}",
                result.stage1.iterations.len() - 1,
                result.stage1.fidelity,
                result.stage1.fluence_au
            );
            for (k, rec) in result.stage2.iterations.iter().enumerate() {
                println!(
                    "stage2 iter {k:3}  J = {:+.6}  indices = {:?}  fluence = {:.3}",
                    rec.j, rec.indices, rec.fluence_au
                );
            }
            println!(
                "stage2 fidelity = {:.4} indices = {:?} ({:?} total)",
                result.stage2.fidelity,
                result.stage2.indices,
                t.elapsed()
            );
        }
        Err(e) => println!("workflow failed: {e}"),
    }
}
