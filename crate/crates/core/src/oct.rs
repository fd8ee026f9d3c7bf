//! Multi-target optimal control of the gate field.
//!
//! Each iteration first propagates the Lagrange multiplier of every gate
//! transformation backwards from its target under the current field, then
//! sweeps the inputs forward while updating the field immediately at every
//! time step,
//!
//! ```text
//! E_new(t_k) = E_old(t_k) - (s(t_k)/ħα) Im Σ_n ⟨ψᵢⁿ|ψfⁿ⟩⟨ψfⁿ|μ|ψᵢⁿ⟩
//! ```
//!
//! which is the monotonic immediate-update variant of the alternating
//! forward/backward scheme. The reported objective per iteration is
//! J = Σ_n |⟨ψᵢⁿ(t_f)|targetⁿ⟩|² − α∫E² dt.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{DiabaticModel, WavePacket};
use crate::propagator::{KernelScratch, PropagationSettings, StepKernel};
use crate::pulses::{envelope, ControlField};

/// Ordered input → target pairs driven by one shared field.
#[derive(Debug, Clone)]
pub struct GateSpec {
    transformations: Vec<(WavePacket, WavePacket)>,
}

impl GateSpec {
    pub fn new(transformations: Vec<(WavePacket, WavePacket)>) -> Result<Self> {
        if transformations.is_empty() {
            return Err(Error::InvalidConfig("a gate needs at least one transformation".into()));
        }
        let n = transformations[0].0.grid().n_points();
        for (input, target) in &transformations {
            for (label, wp) in [("input", input), ("target", target)] {
                if wp.grid().n_points() != n {
                    return Err(Error::GridMismatch(wp.grid().n_points(), n));
                }
                let norm = wp.norm();
                if (norm - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidConfig(format!(
                        "{label} state has norm {norm}, expected 1 to 1e-10"
                    )));
                }
            }
        }
        Ok(GateSpec { transformations })
    }

    /// Population flip between the two bit states: (|0⟩ → |1⟩, |1⟩ → |0⟩).
    pub fn not_gate(bit0: WavePacket, bit1: WavePacket) -> Result<Self> {
        Self::new(vec![(bit0.clone(), bit1.clone()), (bit1, bit0)])
    }

    /// A single state-to-state transformation.
    pub fn single(input: WavePacket, target: WavePacket) -> Result<Self> {
        Self::new(vec![(input, target)])
    }

    pub fn len(&self) -> usize {
        self.transformations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transformations.is_empty()
    }

    pub fn transformations(&self) -> &[(WavePacket, WavePacket)] {
        &self.transformations
    }
}

/// How backward-propagated multipliers reach the forward sweep: kept in
/// memory at every time step, or re-propagated forward under the frozen
/// previous field (one extra propagation per transformation, O(1) memory).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierStorage {
    #[default]
    Stored,
    Recompute,
}

#[derive(Debug, Clone)]
pub struct OCTProblem {
    pub model: DiabaticModel,
    pub gate: GateSpec,
    /// Positive fluence penalty weight (atomic units).
    pub alpha: f64,
    pub settings: PropagationSettings,
    pub trial_field: ControlField,
    pub max_iterations: usize,
    /// An iterate is accepted only if it improves J by at least this much;
    /// the first sub-threshold iterate is discarded and the run stops.
    pub j_tolerance: f64,
    /// Drops beyond this are genuine regressions; three in a row abort the
    /// run with diagnostics.
    pub divergence_drop: f64,
    /// Trust region: per-sample increments are clamped to this fraction of
    /// the field's current peak amplitude (floored at `UPDATE_CAP_FLOOR_AU`
    /// so a weak seed can still lift off). `None` disables clamping.
    pub update_clamp: Option<f64>,
    /// Fraction of the previous field leaked out per update,
    /// E_new = (1-leak)·E_old + ΔE: 0 is the pure increment, 1 the pure
    /// replacement; intermediate values bound the fluence the scheme can
    /// accumulate.
    pub field_leak: f64,
    pub multiplier_storage: MultiplierStorage,
}

/// Absolute floor of the trust-region cap, in atomic field units.
pub const UPDATE_CAP_FLOOR_AU: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// J = Σ indices − α·fluence after this iteration's update.
    pub j: f64,
    pub indices: Vec<f64>,
    pub fluence_au: f64,
}

#[derive(Debug, Clone)]
pub struct OCTResult {
    pub field: ControlField,
    /// Entry 0 characterizes the trial field (no update applied).
    pub iterations: Vec<IterationRecord>,
    pub indices: Vec<f64>,
    pub fidelity: f64,
    pub fluence_au: f64,
}

impl OCTResult {
    pub fn j(&self) -> f64 {
        self.iterations.last().map(|r| r.j).unwrap_or(f64::NAN)
    }
}

/// |⟨ψ(t_f)|target⟩|² with the dφ-weighted inner product.
pub fn performance_index(final_state: &WavePacket, target: &WavePacket) -> Result<f64> {
    Ok(final_state.inner(target)?.norm_sqr())
}

/// Field increment −(s/ħα) Im Σ_n ⟨ψᵢⁿ|ψfⁿ⟩⟨ψfⁿ|μ|ψᵢⁿ⟩ at one time point.
pub fn field_update(
    forward_states: &[WavePacket],
    backward_states: &[WavePacket],
    model: &DiabaticModel,
    alpha: f64,
    envelope_value: f64,
) -> Result<f64> {
    if forward_states.len() != backward_states.len() {
        return Err(Error::InvalidConfig(format!(
            "{} forward states vs {} multipliers",
            forward_states.len(),
            backward_states.len()
        )));
    }
    let mut sum = 0.0;
    for (psi_i, psi_f) in forward_states.iter().zip(backward_states) {
        let overlap = psi_i.inner(psi_f)?;
        let mu = model.mu12 * psi_f.dipole_overlap(psi_i)?;
        sum += (overlap * mu).im;
    }
    Ok(-envelope_value / alpha * sum)
}

// single-precision trajectory store: per step, interleaved
// (re psi1, im psi1, re psi2, im psi2) per grid point. Stored states only
// feed the update bracket, where single precision is ample.
struct TrajectoryStore {
    data: Vec<f32>,
    n_grid: usize,
}

impl TrajectoryStore {
    fn new(n_steps: usize, n_grid: usize) -> Self {
        TrajectoryStore { data: vec![0.0; (n_steps + 1) * 4 * n_grid], n_grid }
    }

    fn write(&mut self, step: usize, psi: &WavePacket) {
        let base = step * 4 * self.n_grid;
        for (k, (a, b)) in psi.psi1.iter().zip(&psi.psi2).enumerate() {
            self.data[base + 4 * k] = a.re as f32;
            self.data[base + 4 * k + 1] = a.im as f32;
            self.data[base + 4 * k + 2] = b.re as f32;
            self.data[base + 4 * k + 3] = b.im as f32;
        }
    }

    fn step_slice(&self, step: usize) -> &[f32] {
        &self.data[step * 4 * self.n_grid..(step + 1) * 4 * self.n_grid]
    }
}

// Im[ <psi_i|psi_f> * mu12 <psi_f|mu|psi_i> ] when one state is live and the
// other stored in the opposite (conjugate) frame: in both sweep directions
// the bracket reduces to Im[conj(U) V] with the conjugation-free sums
// U = sum x1 w1 + x2 w2 and V = sum x1 w2 + x2 w1.
fn bracket_im_mixed(live: &WavePacket, stored: &[f32], dphi: f64, mu12: f64) -> f64 {
    let mut u = C64::default();
    let mut v = C64::default();
    for (k, (x1, x2)) in live.psi1.iter().zip(&live.psi2).enumerate() {
        let w1 = C64::new(stored[4 * k] as f64, stored[4 * k + 1] as f64);
        let w2 = C64::new(stored[4 * k + 2] as f64, stored[4 * k + 3] as f64);
        u += x1 * w1 + x2 * w2;
        v += x1 * w2 + x2 * w1;
    }
    (u.conj() * v).im * dphi * dphi * mu12
}

// same bracket with both states live
fn bracket_im_live(psi_i: &WavePacket, psi_f: &WavePacket, dphi: f64, mu12: f64) -> f64 {
    let mut overlap = C64::default();
    let mut dip = C64::default();
    for ((a1, a2), (f1, f2)) in psi_i
        .psi1
        .iter()
        .zip(&psi_i.psi2)
        .zip(psi_f.psi1.iter().zip(&psi_f.psi2))
    {
        overlap += a1.conj() * f1 + a2.conj() * f2;
        dip += f1.conj() * a2 + f2.conj() * a1;
    }
    (overlap * dip).im * dphi * dphi * mu12
}

struct SweepTask {
    /// actively propagated state (conjugated during backward halves)
    active: WavePacket,
    /// partner replayed under the frozen field (recompute mode only)
    partner: Option<WavePacket>,
    scratch: KernelScratch,
}

// plain forward propagation of every input; returns indices and final states,
// optionally recording the trajectories
fn forward_only_indices(
    gate: &GateSpec,
    field: &ControlField,
    kernel: &StepKernel,
    mut stores: Option<&mut [TrajectoryStore]>,
) -> Result<(Vec<f64>, Vec<WavePacket>)> {
    let samples = field.samples_au();
    let mut tasks: Vec<(WavePacket, KernelScratch, Option<&mut TrajectoryStore>)> = match stores {
        Some(ref mut st) => gate
            .transformations()
            .iter()
            .zip(st.iter_mut())
            .map(|((input, _), store)| (input.clone(), kernel.scratch(), Some(store)))
            .collect(),
        None => gate
            .transformations()
            .iter()
            .map(|(input, _)| (input.clone(), kernel.scratch(), None))
            .collect(),
    };
    exec::for_each_mut(&mut tasks, |_, (psi, scratch, store)| {
        if let Some(store) = store.as_mut() {
            store.write(0, psi);
        }
        for (j, &e) in samples.iter().enumerate() {
            kernel.advance(psi, e, scratch);
            if let Some(store) = store.as_mut() {
                store.write(j + 1, psi);
            }
        }
    });
    let indices = gate
        .transformations()
        .iter()
        .zip(&tasks)
        .map(|((_, target), (psi, _, _))| performance_index(psi, target))
        .collect::<Result<Vec<f64>>>()?;
    let finals = tasks.into_iter().map(|(psi, _, _)| psi).collect();
    Ok((indices, finals))
}

// what the iteration engine does with each prospective iterate
enum IterationPolicy {
    /// Accept improvements, revert-and-stop at saturation, abort on three
    /// consecutive genuine regressions.
    Production,
    /// Accept everything; stop once the smallest transformation index
    /// reaches the target. Used to amplify a weak trial field into a
    /// workable one.
    Amplify { target_min_index: f64 },
}

/// Run the alternating optimization until `max_iterations`, until gains fall
/// below `j_tolerance`, or until the divergence guard trips.
pub fn optimize(problem: &OCTProblem) -> Result<OCTResult> {
    run_iterations(problem, IterationPolicy::Production)
}

/// Grow a trial field whose seed indices are too small for productive
/// optimization: iterate with every update accepted until the smallest
/// transformation index reaches `target_min_index`. Errors if the budget
/// runs out first.
pub fn amplify_seed(problem: &OCTProblem, target_min_index: f64) -> Result<OCTResult> {
    let result = run_iterations(problem, IterationPolicy::Amplify { target_min_index })?;
    let reached = result.indices.iter().cloned().fold(f64::INFINITY, f64::min);
    if reached < target_min_index {
        return Err(Error::Divergence {
            iteration: result.iterations.len() - 1,
            detail: format!(
                "seed amplification stalled at index {reached:.3e} \
                 (target {target_min_index:.3e}) within {} iterations",
                problem.max_iterations
            ),
        });
    }
    Ok(result)
}

fn run_iterations(problem: &OCTProblem, policy: IterationPolicy) -> Result<OCTResult> {
    let gate = &problem.gate;
    let settings = &problem.settings;
    if !(problem.alpha > 0.0) {
        return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", problem.alpha)));
    }
    if problem.trial_field.len() != settings.n_steps()
        || (problem.trial_field.dt_fs() - settings.dt_fs()).abs() > 1e-9 * settings.dt_fs()
    {
        return Err(Error::SamplingMismatch(format!(
            "trial field sampled as {} x {} fs but settings need {} x {} fs",
            problem.trial_field.len(),
            problem.trial_field.dt_fs(),
            settings.n_steps(),
            settings.dt_fs()
        )));
    }
    let grid = gate.transformations()[0].0.grid().clone();
    let kernel = StepKernel::new(&problem.model, &grid, settings.dt_au());
    let n_steps = settings.n_steps();
    let n_grid = grid.n_points();
    let dphi = grid.dphi();
    let mu12 = problem.model.mu12;
    let t_f_au = settings.t_f_au();
    let s_values: Vec<f64> = (0..n_steps)
        .map(|j| envelope(settings.midpoint_au(j), t_f_au).expect("midpoints lie inside [0, t_f]"))
        .collect();
    let n_transforms = gate.len();

    let mut field = problem.trial_field.clone();
    let mut iterations: Vec<IterationRecord> = Vec::new();

    // trajectory stores for each role (Stored mode), filled lazily
    let stored = problem.multiplier_storage == MultiplierStorage::Stored;
    let mut stores_i: Vec<TrajectoryStore> = Vec::new();
    let mut stores_f: Vec<TrajectoryStore> = Vec::new();
    if stored {
        for _ in 0..n_transforms {
            stores_i.push(TrajectoryStore::new(n_steps, n_grid));
            stores_f.push(TrajectoryStore::new(n_steps, n_grid));
        }
    }
    // recompute mode: endpoint states the partner replays start from
    let mut psi_i_final: Vec<WavePacket>;
    let mut psi_f_initial: Vec<WavePacket> = Vec::new();

    // iteration 0: characterize the trial field without updating it; this
    // also bootstraps the forward trajectories for the first backward half
    let (seed_indices, seed_finals) = forward_only_indices(
        gate,
        &field,
        &kernel,
        if stored { Some(&mut stores_i[..]) } else { None },
    )?;
    psi_i_final = seed_finals;
    let seed_fluence = field.fluence_au();
    iterations.push(IterationRecord {
        j: seed_indices.iter().sum::<f64>() - problem.alpha * seed_fluence,
        indices: seed_indices,
        fluence_au: seed_fluence,
    });

    let mut consecutive_drops = 0usize;
    for iteration in 0..problem.max_iterations {
        let previous_field = field.clone();
        let cap = problem.update_clamp.map(|fraction| {
            let peak = field.samples_au().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            (fraction * peak).max(UPDATE_CAP_FLOOR_AU)
        });

        // ---- backward half: propagate multipliers from the targets with
        // immediate updates, pairing with the previous forward trajectories.
        // Both the active multiplier and the replayed partner march in the
        // conjugate frame, which flips the sign of Im in the bracket.
        {
            let frozen = field.clone();
            let mut tasks: Vec<SweepTask> = gate
                .transformations()
                .iter()
                .enumerate()
                .map(|(n, (_, target))| {
                    let mut active = target.clone();
                    active.conjugate_in_place();
                    let partner = if stored {
                        None
                    } else {
                        let mut p = psi_i_final[n].clone();
                        p.conjugate_in_place();
                        Some(p)
                    };
                    SweepTask { active, partner, scratch: kernel.scratch() }
                })
                .collect();
            if stored {
                for (n, task) in tasks.iter().enumerate() {
                    stores_f[n].write(n_steps, &task.active);
                }
            }
            for m in 0..n_steps {
                let j = n_steps - 1 - m;
                // states currently sit at t_{j+1}
                let mut sum = 0.0;
                for (n, task) in tasks.iter().enumerate() {
                    sum += if stored {
                        bracket_im_mixed(&task.active, stores_i[n].step_slice(j + 1), dphi, mu12)
                    } else {
                        -bracket_im_live(
                            task.partner.as_ref().expect("replayed forward state"),
                            &task.active,
                            dphi,
                            mu12,
                        )
                    };
                }
                let mut delta = -s_values[j] / problem.alpha * sum;
                if let Some(cap) = cap {
                    delta = delta.clamp(-cap, cap);
                }
                let e_new = (1.0 - problem.field_leak * s_values[j]) * field.samples_au()[j] + delta;
                field.samples_au_mut()[j] = e_new;
                let e_frozen = frozen.samples_au()[j];
                exec::for_each_mut(&mut tasks, |_, task| {
                    kernel.advance(&mut task.active, e_new, &mut task.scratch);
                    if let Some(p) = task.partner.as_mut() {
                        kernel.advance(p, e_frozen, &mut task.scratch);
                    }
                });
                if stored {
                    for (n, task) in tasks.iter().enumerate() {
                        stores_f[n].write(j, &task.active);
                    }
                }
            }
            if !stored {
                psi_f_initial = tasks
                    .into_iter()
                    .map(|t| {
                        let mut p = t.active;
                        p.conjugate_in_place();
                        p
                    })
                    .collect();
            }
        }

        // ---- forward half: propagate the inputs with immediate updates,
        // pairing with the just-computed multiplier trajectories
        let indices: Vec<f64> = {
            let frozen = field.clone();
            let mut tasks: Vec<SweepTask> = gate
                .transformations()
                .iter()
                .enumerate()
                .map(|(n, (input, _))| SweepTask {
                    active: input.clone(),
                    partner: if stored { None } else { Some(psi_f_initial[n].clone()) },
                    scratch: kernel.scratch(),
                })
                .collect();
            if stored {
                for (n, task) in tasks.iter().enumerate() {
                    stores_i[n].write(0, &task.active);
                }
            }
            for j in 0..n_steps {
                let mut sum = 0.0;
                for (n, task) in tasks.iter().enumerate() {
                    sum += if stored {
                        bracket_im_mixed(&task.active, stores_f[n].step_slice(j), dphi, mu12)
                    } else {
                        bracket_im_live(
                            &task.active,
                            task.partner.as_ref().expect("replayed multiplier"),
                            dphi,
                            mu12,
                        )
                    };
                }
                let mut delta = -s_values[j] / problem.alpha * sum;
                if let Some(cap) = cap {
                    delta = delta.clamp(-cap, cap);
                }
                let e_new = (1.0 - problem.field_leak * s_values[j]) * field.samples_au()[j] + delta;
                field.samples_au_mut()[j] = e_new;
                let e_frozen = frozen.samples_au()[j];
                exec::for_each_mut(&mut tasks, |_, task| {
                    kernel.advance(&mut task.active, e_new, &mut task.scratch);
                    if let Some(p) = task.partner.as_mut() {
                        kernel.advance(p, e_frozen, &mut task.scratch);
                    }
                });
                if stored {
                    for (n, task) in tasks.iter().enumerate() {
                        stores_i[n].write(j + 1, &task.active);
                    }
                }
            }
            let indices = gate
                .transformations()
                .iter()
                .zip(&tasks)
                .map(|((_, target), task)| performance_index(&task.active, target))
                .collect::<Result<Vec<f64>>>()?;
            if !stored {
                psi_i_final = tasks.into_iter().map(|t| t.active).collect();
            }
            indices
        };

        let fluence = field.fluence_au();
        let index_sum = indices.iter().sum::<f64>();
        let j_value = index_sum - problem.alpha * fluence;
        let j_prev = iterations.last().map(|r| r.j).unwrap_or(f64::NEG_INFINITY);
        let gain = j_value - j_prev;
        let _ = iteration;

        match policy {
            IterationPolicy::Amplify { target_min_index } => {
                let min_index = indices.iter().cloned().fold(f64::INFINITY, f64::min);
                iterations.push(IterationRecord { j: j_value, indices, fluence_au: fluence });
                if min_index >= target_min_index {
                    break;
                }
            }
            IterationPolicy::Production => {
                if gain >= problem.j_tolerance {
                    iterations.push(IterationRecord { j: j_value, indices, fluence_au: fluence });
                    consecutive_drops = 0;
                } else if gain > -problem.divergence_drop {
                    // converged or saturated: discard the sub-threshold
                    // iterate so the recorded log and the returned field
                    // stay consistent
                    field = previous_field;
                    break;
                } else {
                    // genuine regression; record it and give the scheme two
                    // more chances before aborting
                    iterations.push(IterationRecord { j: j_value, indices, fluence_au: fluence });
                    consecutive_drops += 1;
                    if consecutive_drops >= 3 {
                        return Err(Error::Divergence {
                            iteration: iterations.len() - 1,
                            detail: format!(
                                "J fell by more than {} for three consecutive iterations \
                                 (last {j_prev} -> {j_value}, alpha = {})",
                                problem.divergence_drop, problem.alpha
                            ),
                        });
                    }
                }
            }
        }
    }

    let last = iterations.last().expect("at least the seed record");
    let indices = last.indices.clone();
    let fidelity = indices.iter().sum::<f64>() / indices.len() as f64;
    let fluence_au = last.fluence_au;
    Ok(OCTResult { field, iterations, indices, fidelity, fluence_au })
}

/// Inputs of the two-stage gate-field construction.
#[derive(Debug, Clone)]
pub struct GateWorkflow {
    pub model: DiabaticModel,
    pub bit0: WavePacket,
    pub bit1: WavePacket,
    pub trial_field: ControlField,
    pub alpha: f64,
    pub settings: PropagationSettings,
    pub max_iterations: usize,
    pub j_tolerance: f64,
    pub divergence_drop: f64,
    pub update_clamp: Option<f64>,
    pub field_leak: f64,
    pub multiplier_storage: MultiplierStorage,
    /// Seed amplification: the trial field is pre-iterated (every update
    /// accepted, penalty `amplify_alpha`) until the |0⟩ → |1⟩ index reaches
    /// this value, within `amplify_max_iterations`. Set to 0 to disable.
    pub seed_target_index: f64,
    pub amplify_alpha: f64,
    pub amplify_max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct GateWorkflowResult {
    /// Trial-field amplification record (empty log when disabled).
    pub amplification: Option<OCTResult>,
    /// Single-direction |0⟩ → |1⟩ optimization seeded with the (amplified)
    /// trial field.
    pub stage1: OCTResult,
    /// Full gate optimization seeded with the stage-1 field.
    pub stage2: OCTResult,
}

/// Two-stage construction: optimize the single |0⟩ → |1⟩ transformation from
/// the chirped trial field, then optimize the full gate using the stage-1
/// field as trial.
///
/// A chirped trial straight out of the pulse table typically scores a
/// performance index many orders of magnitude below one; the amplification
/// pre-stage grows it into the regime where every production iteration pays
/// for its own fluence, which keeps the production J logs monotone.
pub fn run_gate_workflow(workflow: &GateWorkflow) -> Result<GateWorkflowResult> {
    let stage1_gate = GateSpec::single(workflow.bit0.clone(), workflow.bit1.clone())
        .map_err(|e| e.in_stage("stage-1 single transformation"))?;

    let mut trial = workflow.trial_field.clone();
    let mut amplification = None;
    if workflow.seed_target_index > 0.0 {
        let seed_problem = OCTProblem {
            model: workflow.model.clone(),
            gate: stage1_gate.clone(),
            alpha: workflow.amplify_alpha,
            settings: workflow.settings.clone(),
            trial_field: trial.clone(),
            max_iterations: workflow.amplify_max_iterations,
            j_tolerance: workflow.j_tolerance,
            divergence_drop: workflow.divergence_drop,
            update_clamp: workflow.update_clamp,
            field_leak: 0.0,
            multiplier_storage: workflow.multiplier_storage,
        };
        let amplified = amplify_seed(&seed_problem, workflow.seed_target_index)
            .map_err(|e| e.in_stage("trial-field amplification"))?;
        trial = amplified.field.clone();
        amplification = Some(amplified);
    }

    let stage1_problem = OCTProblem {
        model: workflow.model.clone(),
        gate: stage1_gate,
        alpha: workflow.alpha,
        settings: workflow.settings.clone(),
        trial_field: trial,
        max_iterations: workflow.max_iterations,
        j_tolerance: workflow.j_tolerance,
        divergence_drop: workflow.divergence_drop,
        update_clamp: workflow.update_clamp,
        field_leak: workflow.field_leak,
        multiplier_storage: workflow.multiplier_storage,
    };
    let stage1 = optimize(&stage1_problem).map_err(|e| e.in_stage("stage-1 single transformation"))?;

    // the reverse transformation starts orders of magnitude weaker than the
    // optimized forward one, so the gate stage gets its own amplification
    let stage2_gate = GateSpec::not_gate(workflow.bit0.clone(), workflow.bit1.clone())
        .map_err(|e| e.in_stage("stage-2 gate"))?;
    let mut stage2_trial = stage1.field.clone();
    if workflow.seed_target_index > 0.0 {
        let seed_problem = OCTProblem {
            gate: stage2_gate.clone(),
            alpha: workflow.amplify_alpha,
            trial_field: stage2_trial.clone(),
            max_iterations: workflow.amplify_max_iterations,
            field_leak: 0.0,
            ..stage1_problem.clone()
        };
        let amplified = amplify_seed(&seed_problem, workflow.seed_target_index)
            .map_err(|e| e.in_stage("stage-2 trial amplification"))?;
        stage2_trial = amplified.field.clone();
    }
    let stage2_problem = OCTProblem {
        gate: stage2_gate,
        trial_field: stage2_trial,
        ..stage1_problem
    };
    let stage2 = optimize(&stage2_problem).map_err(|e| e.in_stage("stage-2 gate"))?;

    Ok(GateWorkflowResult { amplification, stage1, stage2 })
}

#[derive(Debug, Clone)]
pub struct AlphaCalibration {
    pub alpha: f64,
    pub achieved_index: f64,
    /// Every (alpha, achieved index) probe, in evaluation order.
    pub probes: Vec<(f64, f64)>,
}

/// Log-space bisection over α decades: find the largest α whose optimization
/// reaches `target_index` within the probe's iteration budget. Smaller α
/// means stronger updates, so quality is monotone-ish decreasing in α; the
/// returned calibration reports the best probe even when no α reaches the
/// target.
pub fn calibrate_alpha(
    base: &OCTProblem,
    alpha_low: f64,
    alpha_high: f64,
    target_index: f64,
    mut probe: impl FnMut(&OCTProblem) -> Result<f64>,
) -> Result<AlphaCalibration> {
    if !(alpha_low > 0.0 && alpha_high > alpha_low) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < alpha_low < alpha_high, got [{alpha_low}, {alpha_high}]"
        )));
    }
    let mut probes = Vec::new();
    let mut eval = |alpha: f64, probes: &mut Vec<(f64, f64)>| -> Result<f64> {
        let problem = OCTProblem { alpha, ..base.clone() };
        let idx = probe(&problem)?;
        probes.push((alpha, idx));
        Ok(idx)
    };

    let hi_idx = eval(alpha_high, &mut probes)?;
    if hi_idx >= target_index {
        return Ok(AlphaCalibration { alpha: alpha_high, achieved_index: hi_idx, probes });
    }
    let lo_idx = eval(alpha_low, &mut probes)?;
    if lo_idx < target_index {
        let (alpha, achieved_index) =
            if lo_idx >= hi_idx { (alpha_low, lo_idx) } else { (alpha_high, hi_idx) };
        return Ok(AlphaCalibration { alpha, achieved_index, probes });
    }
    let mut lo = alpha_low; // reaches the target
    let mut hi = alpha_high; // does not
    let mut best = (alpha_low, lo_idx);
    while hi / lo > 10f64.powf(0.25) {
        let mid = (lo * hi).sqrt();
        let idx = eval(mid, &mut probes)?;
        if idx >= target_index {
            lo = mid;
            best = (mid, idx);
        } else {
            hi = mid;
        }
    }
    Ok(AlphaCalibration { alpha: best.0, achieved_index: best.1, probes })
}
