use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use elastosheet::interface_dynamics::{flat_state_spectrum, principal_symbol, stability_inputs, SideTraces};
use elastosheet::simulator::snapshot::Snapshot;
use elastosheet::simulator::{output, Config, Simulator};

/// `println!` that ignores a closed stdout (e.g. piping into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "elastosheet",
    version,
    about = "Interface solver for elastic vortex sheets and free surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a TOML configuration.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the configuration.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Stability functional, principal symbol and flat-state spectrum of the
    /// initial data.
    Stability {
        config: PathBuf,
        /// Largest wavenumber of the spectrum table.
        #[arg(long, default_value_t = 32)]
        kmax: i64,
    },
    /// Built-in oracle checks.
    Verify,
    /// Momentum residual of a snapshot (path to its .bin or .json file).
    Residual { snapshot: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> elastosheet::Result<u8> {
    match cmd {
        Command::Run { config, output_dir } => {
            let mut cfg = Config::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let summary = output::run(cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            out!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(b) = &summary.breach {
                eprintln!(
                    "monitor breach: {} = {:.6e} (limit {:.6e}) at t = {:.6}",
                    b.name, b.value, b.limit, summary.time
                );
            }
            Ok(summary.exit_code() as u8)
        }
        Command::Stability { config, kmax } => {
            let mut cfg = Config::load(&config)?;
            cfg.instability_study = true;
            let sim = Simulator::new(cfg.clone())?;
            let (state, report) = sim.init()?;
            out!("# stability functional");
            out!("lambda,x1,x2,phi1,phi2,hyperbolic");
            out!(
                "{:.12e},{:.6},{:.6},{:.6},{:.6},{}",
                report.lambda,
                report.argmin_x[0],
                report.argmin_x[1],
                report.argmin_phi[0],
                report.argmin_phi[1],
                report.hyperbolic
            );
            let geoms = sim.geometries(&state.interface.f)?;
            let traces: Vec<SideTraces> = geoms
                .iter()
                .zip(&state.sides)
                .map(|(g, fl)| SideTraces::from_fields(g, fl, None))
                .collect();
            let (fp, fm, v) = stability_inputs(&traces, cfg.rho(), cfg.mode);
            let p = report.argmin_point;
            let rho = if sim.sides().len() == 1 { [0.0, 1.0] } else { cfg.rho() };
            out!("# principal symbol at the minimizing point");
            out!("angle_deg,xi1,xi2,symbol");
            let steps = if cfg.d == 1 { 1 } else { 12 };
            for a in 0..steps {
                let ang = std::f64::consts::PI * a as f64 / steps as f64;
                let xi = [ang.cos(), ang.sin()];
                let sym = principal_symbol(xi, &fp[p], &fm[p], v[p], rho);
                out!("{:.1},{:.6},{:.6},{:.12e}", ang.to_degrees(), xi[0], xi[1], sym);
            }
            out!("# flat-state spectrum along the configured wavevector");
            out!("k,re1,im1,re2,im2");
            let w = cfg.initial.wavevector;
            let norm = ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt().max(1.0);
            let eq = sim.flat_equilibrium();
            for k in 1..=kmax {
                let kv = [k as f64 * w[0] as f64 / norm, k as f64 * w[1] as f64 / norm];
                let l = flat_state_spectrum(&eq, &[kv])[0];
                out!(
                    "{},{:.12e},{:.12e},{:.12e},{:.12e}",
                    k,
                    l[0].re,
                    l[0].im,
                    l[1].re,
                    l[1].im
                );
            }
            Ok(0)
        }
        Command::Verify => {
            let checks = elastosheet::verify::run_checks();
            let mut ok = true;
            for c in &checks {
                out!(
                    "{} {}: {:.3e} (tolerance {:.1e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
                ok &= c.passed;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Residual { snapshot } => {
            let snap = Snapshot::read(&snapshot)?;
            let cfg = snap.config()?;
            let sim = Simulator::new(cfg)?;
            let state = snap.into_state(&sim)?;
            let r = sim.momentum_residual(&state)?;
            out!("side,residual");
            for (side, v) in sim.sides().iter().zip(&r) {
                out!("{},{:.6e}", side.name(), v);
            }
            Ok(0)
        }
    }
}
