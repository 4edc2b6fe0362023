//! Command-line harness: run scenarios, check acceptance criteria, extract
//! plot data. Exit codes: 0 success, 1 acceptance failure, 2 integration
//! fault, 3 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imflux::acceptance::{self, AuxRun, CriterionInputs, Verdict};
use imflux::error::{Error, Result};
use imflux::scenario::{ObserverMode, ScenarioConfig};
use imflux::sim::{run_scenario, RunOutput};
use imflux::telemetry;

#[derive(Parser)]
#[command(
    name = "imflux",
    version = imflux::VERSION,
    about = "Induction-motor observer simulation and validation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Scenario config file (TOML); defaults to the canonical scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, as dotted.path=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set sim.duration=<seconds>.
    #[arg(long)]
    duration: Option<f64>,
    /// Shorthand for --set observer.mode=<mode>.
    #[arg(long, value_name = "ground-truth|certainty-equivalence")]
    mode: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        let mut overrides = self.set.clone();
        if let Some(d) = self.duration {
            overrides.push(format!("sim.duration={d}"));
        }
        if let Some(m) = &self.mode {
            overrides.push(format!("observer.mode={m}"));
        }
        cfg.apply_overrides(&overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write telemetry.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Telemetry CSV output path.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Run-summary JSON output path.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Print nothing but the fault/warning lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate the acceptance criteria.
    ///
    /// Without --telemetry this runs every needed scenario itself (canonical,
    /// rerun, step-halving pair, unexcited, certainty-equivalence). With
    /// --telemetry it evaluates a pre-recorded canonical run; criteria that
    /// need auxiliary runs are reported SKIP.
    Check {
        #[command(flatten)]
        config: ConfigArgs,
        /// Pre-recorded telemetry CSV to evaluate instead of running.
        #[arg(long)]
        telemetry: Option<PathBuf>,
        /// Comma-separated criterion ids to evaluate (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
        /// Machine-readable JSON report output path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Extract per-selector plot series from a telemetry file.
    PlotData {
        /// Telemetry CSV produced by `run`.
        #[arg(long)]
        telemetry: PathBuf,
        /// Series selector (column name or alias); repeatable.
        #[arg(long = "select", value_name = "SELECTOR")]
        select: Vec<String>,
        /// Output directory for the per-selector CSV files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Emit log10(|value|) instead of raw values.
        #[arg(long)]
        log10: bool,
    },
    /// Print the effective scenario config as TOML.
    PrintConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            output,
            summary,
            quiet,
        } => cmd_run(&config, output.as_deref(), summary.as_deref(), quiet),
        Command::Check {
            config,
            telemetry,
            criteria,
            report,
        } => cmd_check(&config, telemetry.as_deref(), &criteria, report.as_deref()),
        Command::PlotData {
            telemetry,
            select,
            out_dir,
            log10,
        } => cmd_plot_data(&telemetry, &select, &out_dir, log10),
        Command::PrintConfig { config } => {
            let cfg = config.load()?;
            print!("{}", cfg.to_toml_string()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_run(
    config: &ConfigArgs,
    output: Option<&Path>,
    summary_path: Option<&Path>,
    quiet: bool,
) -> Result<ExitCode> {
    let cfg = config.load()?;
    let out = run_scenario(&cfg)?;
    if let Some(path) = output {
        telemetry::write_csv_file(path, &out.records)?;
    }
    if let Some(path) = summary_path {
        let json = serde_json::to_string_pretty(&out.summary)
            .map_err(|e| Error::Telemetry(e.to_string()))?;
        std::fs::write(path, json)?;
    }
    if !quiet {
        print_summary(&out);
    }
    for w in &out.summary.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(f) = &out.summary.fault {
        eprintln!(
            "integration fault at t = {:.6} s: {} became non-finite; partial telemetry kept",
            f.t, f.what
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(out: &RunOutput) {
    let s = &out.summary;
    println!(
        "mode {:?}, {} steps at dt = {:.1e} s ({} s simulated in {:.2} s wall)",
        s.mode, s.steps, s.dt, s.duration, s.wall_seconds
    );
    println!(
        "final: |flux err| = {:.3e} Wb, Rr_hat = {:.6} (rel err {:.3e}), \
         TL_hat = {:.6e} (err {:.3e}), omega_hat = {:.4} (err {:.3e}, true {:.4})",
        s.final_flux_err_norm,
        s.final_rr_hat,
        s.final_rr_err_rel,
        s.final_tl_hat,
        s.final_tl_err,
        s.final_omega_hat,
        s.final_omega_err,
        s.final_omega
    );
    let fmt_conv = |v: Option<f64>| match v {
        Some(t) => format!("{t:.3} s"),
        None => "never".into(),
    };
    println!(
        "converged-and-stayed: flux {} | Rr {} | TL {} | omega {}",
        fmt_conv(s.conv_time_flux),
        fmt_conv(s.conv_time_rr),
        fmt_conv(s.conv_time_tl),
        fmt_conv(s.conv_time_omega)
    );
    println!(
        "excitation: int Delta_e^2 = {:.3e} ({}), int Delta_m^2 = {:.3e} ({})",
        s.int_delta_e_sq, s.excitation_e, s.int_delta_m_sq, s.excitation_m
    );
    if let Some(d) = &s.delta_m_steady {
        println!(
            "steady-state Delta_m: mean = {:.6e}, ripple = {:.3e}, predicted = {:.6e} \
             (mismatch {:.3e}), unscaled reference = {:.4}",
            d.mean, d.ripple_rel, d.predicted_abs, d.mismatch_rel, d.unscaled_reference
        );
    }
    println!("records: {}", out.records.len());
}

fn cmd_check(
    config: &ConfigArgs,
    telemetry_path: Option<&Path>,
    criteria: &[u32],
    report_path: Option<&Path>,
) -> Result<ExitCode> {
    let cfg = config.load()?;
    let ids: Vec<u32> = if criteria.is_empty() {
        acceptance::ALL_CRITERIA.to_vec()
    } else {
        let bad: Vec<String> = criteria
            .iter()
            .filter(|c| !acceptance::ALL_CRITERIA.contains(c))
            .map(|c| format!("unknown criterion id {c} (valid: 1..=10)"))
            .collect();
        if !bad.is_empty() {
            return Err(Error::config(bad));
        }
        criteria.to_vec()
    };

    let report = if let Some(path) = telemetry_path {
        let records = telemetry::read_csv_file(path)?;
        let inputs = CriterionInputs {
            cfg: &cfg,
            records: &records,
            wall_seconds: None,
            short_base: None,
            short_halved: None,
            rerun_pair: None,
            unexcited: None,
            ce: None,
        };
        acceptance::evaluate(&inputs, &ids)
    } else {
        check_self_run(&cfg, &ids)?
    };

    for c in &report.criteria {
        println!("{}", c.line());
    }
    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Telemetry(e.to_string()))?;
        std::fs::write(path, json)?;
    }
    let failed = report
        .criteria
        .iter()
        .filter(|c| c.verdict == Verdict::Fail)
        .count();
    let skipped = report
        .criteria
        .iter()
        .filter(|c| c.verdict == Verdict::Skipped)
        .count();
    println!(
        "{} evaluated: {} pass, {} fail, {} skipped",
        report.criteria.len(),
        report.criteria.len() - failed - skipped,
        failed,
        skipped
    );
    Ok(if failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

/// Run the canonical scenario plus whichever auxiliary runs the requested
/// criteria need, then evaluate.
fn check_self_run(cfg: &ScenarioConfig, ids: &[u32]) -> Result<acceptance::AcceptanceReport> {
    let fault_err = |label: &str, out: &RunOutput| -> Result<()> {
        if let Some(f) = &out.summary.fault {
            return Err(Error::Fault {
                t: f.t,
                what: format!("{} run: {}", label, f.what),
            });
        }
        Ok(())
    };

    eprintln!("check: running canonical scenario ({} s)...", cfg.sim.duration);
    let canonical = run_scenario(cfg)?;
    fault_err("canonical", &canonical)?;

    let need = |id: u32| ids.contains(&id);

    let rerun_bytes = if need(9) {
        eprintln!("check: rerunning canonical scenario for determinism...");
        let again = run_scenario(cfg)?;
        fault_err("rerun", &again)?;
        Some((
            telemetry::to_csv_bytes(&canonical.records)?,
            telemetry::to_csv_bytes(&again.records)?,
        ))
    } else {
        None
    };

    let short_pair = if need(9) {
        let t_short = (cfg.observer.enable_time + 5.0 / cfg.regression.a + 0.9)
            .max(acceptance::RES_SETTLE_TIME + 1.0)
            .min(cfg.sim.duration);
        let mut base_cfg = cfg.clone();
        base_cfg.sim.duration = t_short;
        let mut half_cfg = base_cfg.clone();
        half_cfg.sim.dt *= 0.5;
        eprintln!("check: running step-halving pair ({t_short} s at dt and dt/2)...");
        let base = run_scenario(&base_cfg)?;
        fault_err("step-halving base", &base)?;
        let half = run_scenario(&half_cfg)?;
        fault_err("step-halved", &half)?;
        Some(((base_cfg, base), (half_cfg, half)))
    } else {
        None
    };

    let unexcited = if need(8) {
        let mut un_cfg = cfg.clone();
        un_cfg.controller.enabled = false;
        un_cfg.motor.tl_true = 0.0;
        un_cfg.sim.duration = cfg.sim.duration.min(6.0);
        eprintln!(
            "check: running unexcited scenario ({} s, controller off)...",
            un_cfg.sim.duration
        );
        let out = run_scenario(&un_cfg)?;
        fault_err("unexcited", &out)?;
        Some((un_cfg, out))
    } else {
        None
    };

    let ce = if need(10) {
        let mut ce_cfg = cfg.clone();
        ce_cfg.observer.mode = ObserverMode::CertaintyEquivalence;
        eprintln!(
            "check: running certainty-equivalence scenario ({} s)...",
            ce_cfg.sim.duration
        );
        let out = run_scenario(&ce_cfg)?;
        fault_err("certainty-equivalence", &out)?;
        Some((ce_cfg, out))
    } else {
        None
    };

    let inputs = CriterionInputs {
        cfg,
        records: &canonical.records,
        wall_seconds: Some(canonical.summary.wall_seconds),
        short_base: short_pair.as_ref().map(|((c, o), _)| AuxRun {
            cfg: c,
            records: &o.records,
            summary: &o.summary,
        }),
        short_halved: short_pair.as_ref().map(|(_, (c, o))| AuxRun {
            cfg: c,
            records: &o.records,
            summary: &o.summary,
        }),
        rerun_pair: rerun_bytes
            .as_ref()
            .map(|(a, b)| (a.as_slice(), b.as_slice())),
        unexcited: unexcited.as_ref().map(|(c, o)| AuxRun {
            cfg: c,
            records: &o.records,
            summary: &o.summary,
        }),
        ce: ce.as_ref().map(|(c, o)| AuxRun {
            cfg: c,
            records: &o.records,
            summary: &o.summary,
        }),
    };
    Ok(acceptance::evaluate(&inputs, ids))
}

fn cmd_plot_data(
    telemetry_path: &Path,
    select: &[String],
    out_dir: &Path,
    log10: bool,
) -> Result<ExitCode> {
    let records = telemetry::read_csv_file(telemetry_path)?;
    let written = imflux::plotdata::emit_plot_data(&records, select, out_dir, log10)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
