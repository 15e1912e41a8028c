//! The `run` driver: time loop, monitors, CSV diagnostics and snapshots.

use std::path::PathBuf;

use serde::Serialize;

use super::snapshot::Snapshot;
use super::{Breach, Config, Diagnostics, SimState, Simulator, Stepper};
use crate::error::Result;
use crate::interface_dynamics::StabilityReport;

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub time: f64,
    pub reached_end: bool,
    pub breach: Option<Breach>,
    pub initial_stability: StabilityReport,
    pub warnings: Vec<String>,
    pub csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

impl RunSummary {
    /// 0 when `t_end` was reached, 2 on a monitor breach.
    pub fn exit_code(&self) -> i32 {
        if self.breach.is_some() {
            2
        } else {
            0
        }
    }
}

pub fn csv_header(sim: &Simulator) -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "step",
        "lambda",
        "lambda_x1",
        "lambda_x2",
        "energy",
        "energy_coercivity",
        "div_u",
        "div_f",
        "f_dot_n",
        "normal_jump",
        "mean_f",
        "max_abs_f",
        "sobolev_f",
        "max_velocity",
        "max_deformation",
        "mode_re",
        "mode_im",
        "mode_abs",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for side in sim.sides() {
        let s = side.name();
        h.push(format!("lid_omega3_{s}"));
        for j in 1..=3 {
            h.push(format!("lid_g3{j}_{s}"));
        }
        h.push(format!("residual_{s}"));
    }
    h
}

pub fn csv_row(step: usize, d: &Diagnostics, residual: Option<&[f64]>) -> Vec<String> {
    let e = |v: f64| format!("{v:.16e}");
    let mut r = vec![
        e(d.time),
        step.to_string(),
        e(d.stability.lambda),
        e(d.stability.argmin_x[0]),
        e(d.stability.argmin_x[1]),
        e(d.energy.total),
        e(d.energy.coercivity),
        e(d.div_u),
        e(d.div_f),
        e(d.f_dot_n),
        e(d.normal_jump),
        e(d.mean_f),
        e(d.max_abs_f),
        e(d.sobolev_f),
        e(d.max_velocity),
        e(d.max_deformation),
        e(d.mode[0]),
        e(d.mode[1]),
        e(d.mode[0].hypot(d.mode[1])),
    ];
    for (k, li) in d.lid.iter().enumerate() {
        r.push(e(li.vorticity));
        for g in li.deformation_curl {
            r.push(e(g));
        }
        r.push(residual.and_then(|v| v.get(k)).map(|v| e(*v)).unwrap_or_default());
    }
    r
}

fn advance(sim: &Simulator, state: &SimState, dt: f64) -> Result<SimState> {
    match sim.config().stepper {
        Stepper::Rk4 => sim.step(state, dt),
        Stepper::Picard => {
            let t = &sim.config().tolerances;
            Ok(sim.picard_solve(state, dt, t.picard, t.picard_max_iter)?.0)
        }
    }
}

/// Advances to `t_end` or the first monitor breach, writing
/// `diagnostics.csv` and snapshots into the output directory.
pub fn run(config: Config) -> Result<RunSummary> {
    let sim = Simulator::new(config)?;
    let cfg = sim.config().clone();
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (mut state, initial_stability) = sim.init()?;
    let mut warnings = Vec::new();
    if initial_stability.lambda < 2.0 * cfg.c0 {
        warnings.push(format!(
            "initial Lambda = {:.6} is below 2 c0 = {:.6} (instability study)",
            initial_stability.lambda,
            2.0 * cfg.c0
        ));
    }
    let csv_path = cfg.output_dir.join("diagnostics.csv");
    let mut csv = csv::Writer::from_path(&csv_path).map_err(|e| crate::Error::Config(e.to_string()))?;
    let csv_err = |e: csv::Error| crate::Error::Config(format!("writing diagnostics: {e}"));
    csv.write_record(csv_header(&sim)).map_err(csv_err)?;

    let nsteps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(0.0) as usize;
    let mut snapshots = Vec::new();
    let mut breach = None;
    let mut step = 0;
    let mut cfl_warned = false;
    loop {
        let at_end = step == nsteps;
        let checkpoint = at_end || (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0);
        let sample = at_end || step % cfg.sample_every.max(1) == 0 || checkpoint;
        if sample {
            let diag = sim.diagnostics(&state)?;
            let residual = if checkpoint && cfg.residual_at_checkpoints {
                Some(sim.momentum_residual(&state)?)
            } else {
                None
            };
            csv.write_record(csv_row(step, &diag, residual.as_deref()))
                .map_err(csv_err)?;
            breach = sim.check_monitors(&diag);
        }
        if checkpoint || breach.is_some() {
            let stem = cfg.output_dir.join(format!("snapshot_{step:06}"));
            snapshots.push(Snapshot::from_state(&sim, &state).write(&stem)?.0);
        }
        if at_end || breach.is_some() {
            break;
        }
        let dt = if step + 1 == nsteps {
            cfg.t_end - state.time
        } else {
            cfg.dt
        };
        if !cfl_warned {
            if let Some(limit) = sim.cfl_violation(&state, dt) {
                warnings.push(format!("dt = {dt:.3e} exceeds the CFL bound {limit:.3e}"));
                cfl_warned = true;
            }
        }
        state = advance(&sim, &state, dt)?;
        step += 1;
        // monitors are checked every step on the cheap quantities
        if state.interface.f.max_abs() > cfg.interface_limit() && breach.is_none() {
            let diag = sim.diagnostics(&state)?;
            csv.write_record(csv_row(step, &diag, None)).map_err(csv_err)?;
            breach = sim.check_monitors(&diag);
            let stem = cfg.output_dir.join(format!("snapshot_{step:06}"));
            snapshots.push(Snapshot::from_state(&sim, &state).write(&stem)?.0);
            break;
        }
    }
    csv.flush()?;
    Ok(RunSummary {
        steps: step,
        time: state.time,
        reached_end: breach.is_none(),
        breach,
        initial_stability,
        warnings,
        csv: csv_path,
        snapshots,
    })
}
