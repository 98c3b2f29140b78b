//! Batch experiment harness. Exit codes: 0 completed, 2 blow-up, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlwave::config::ExperimentConfig;
use nlwave::experiments::{
    self, RunReport, SweepParam, SweepReport, UcExperiment, UcReport,
};
use nlwave::stepper::Outcome;

#[derive(Parser)]
#[command(
    name = "nlwave",
    about = "Pseudo-spectral solvers for nonlocal shallow-water wave equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configured experiment.
    Run {
        /// Path to the experiment config file.
        config: PathBuf,
    },
    /// Repeat a run across parameter values and fit convergence orders.
    Sweep {
        config: PathBuf,
        /// Parameter to vary: n, dt, delta, or L.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values (at least 3).
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Unique-continuation experiments.
    Uc {
        config: PathBuf,
        /// Which experiment: consistency or burgers.
        #[arg(long)]
        experiment: String,
    },
    /// Run the built-in invariant suite and print pass/fail lines.
    Verify,
}

fn print_run_report(report: &RunReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "status: {}  t_final = {:.6}  steps = {}",
        report.status(),
        report.final_time,
        report.steps
    );
    if let Outcome::BlowUp { time, max_norm } = report.outcome {
        println!("blow-up at t = {time:.6} with max-norm {max_norm:.3e}");
    }
    if let Some(b) = report.boundary_magnitude {
        println!("truncated-line boundary magnitude: {b:.3e}");
    }
    println!("drift report (max |H(t) - H(0)| / max(1, |H(0)|)):");
    for d in &report.drifts {
        println!("  {:<24} initial = {:+.9e}  drift = {:.3e}", d.name, d.initial, d.max_drift);
    }
    println!("outputs in {}", report.output_dir.display());
}

fn print_sweep_report(report: &SweepReport) {
    println!("sweep over {}:", report.param.name());
    if let Some(r) = report.reference {
        println!("  reference ({} = {r}) excluded from the fit", report.param.name());
    }
    println!("  {:>14}  {:>14}  status", "value", "error");
    for row in &report.rows {
        let status = match row.outcome {
            Outcome::Completed => "completed",
            Outcome::MaxStepsExceeded => "max_steps",
            Outcome::BlowUp { .. } => "blow_up",
        };
        println!("  {:>14.6e}  {:>14.6e}  {status}", row.value, row.error);
    }
    match (report.param, report.fitted_order) {
        (SweepParam::HalfWidth, Some(rate)) => {
            println!("fitted exponential decay rate: {rate:.3} (exp(-{rate:.3} L))")
        }
        (_, Some(order)) => println!("fitted convergence order: {order:.3}"),
        (_, None) => println!("no order fit possible (errors at rounding level)"),
    }
    println!("table written to {}", report.output_dir.display());
}

fn exit_code_for(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::BlowUp { .. } => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, nlwave::Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = experiments::run(&cfg)?;
            print_run_report(&report);
            Ok(exit_code_for(report.outcome))
        }
        Command::Sweep {
            config,
            param,
            values,
        } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let param: SweepParam = param.parse()?;
            let report = experiments::sweep(&cfg, param, &values)?;
            print_sweep_report(&report);
            let blew_up = report.rows.iter().any(|r| matches!(r.outcome, Outcome::BlowUp { .. }));
            Ok(if blew_up { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Uc { config, experiment } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let which: UcExperiment = experiment.parse()?;
            match experiments::uc_experiment(&cfg, which)? {
                UcReport::Consistency(r) => {
                    println!(
                        "consistency experiment on [{:.6}, {:.6}] (vanishing threshold {:.3e})",
                        r.interval.0, r.interval.1, r.threshold
                    );
                    match r.first_nonvanishing_time {
                        Some(t) => println!(
                            "solution stops vanishing on the interval at t = {t:.6}; \
                             consistent with unique continuation: nonzero data does not stay zero on an open set"
                        ),
                        None => println!(
                            "solution vanished on the interval for the whole run; \
                             consistent with unique continuation of the zero solution"
                        ),
                    }
                    println!("max over interval at t_end: {:.3e}", r.max_on_interval_final);
                    for d in &r.drifts {
                        println!("  {:<24} drift = {:.3e}", d.name, d.max_drift);
                    }
                    Ok(exit_code_for(r.outcome))
                }
                UcReport::Burgers(r) => {
                    println!(
                        "zero-density reduction vs independent Burgers solve: \
                         max discrepancy {:.3e} over {} snapshots",
                        r.max_discrepancy, r.compared_snapshots
                    );
                    println!(
                        "consistent with the reduction of the coupled system to u_t + u u_x = 0"
                    );
                    Ok(exit_code_for(r.outcome))
                }
            }
        }
        Command::Verify => {
            let checks = experiments::verify_suite();
            let mut all = true;
            for c in &checks {
                let flag = if c.passed { "PASS" } else { "FAIL" };
                println!("{flag}  {:<28} {}", c.name, c.detail);
                all &= c.passed;
            }
            Ok(if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
