use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quenchloc::indicator::LadderSpec;
use quenchloc::inversion::FitModel;
use quenchloc::oracle::{format_table, run_oracle, Suite};
use quenchloc::pipeline::{
    read_curves, read_records, run_indicator, run_invert, run_pipeline, run_simulate, run_triangulate, write_fit_overlay,
    LocalizationReport, StageOptions, REPORT_FILE,
};
use quenchloc::scenario::LoadedScenario;
use quenchloc::Error;

/// Quench localization from second-sound detector data.
#[derive(Parser, Debug)]
#[command(name = "quenchloc", version, about)]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (JSON, schema version 1).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Default)]
struct LadderArgs {
    /// Smallest tau of a linear ladder (1/m).
    #[arg(long, requires_all = ["tau_max", "tau_count"])]
    tau_min: Option<f64>,
    /// Largest tau of a linear ladder (1/m).
    #[arg(long, requires_all = ["tau_min", "tau_count"])]
    tau_max: Option<f64>,
    /// Number of ladder points.
    #[arg(long, requires_all = ["tau_min", "tau_max"])]
    tau_count: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ModelArg {
    /// Fit model: pure-slope or slope-log.
    #[arg(long, value_parser = parse_model)]
    model: Option<FitModel>,
}

fn parse_model(s: &str) -> Result<FitModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a measurement record per detector.
    Simulate(Common),
    /// Indicator curves from stored records.
    Indicator {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ladder: LadderArgs,
    },
    /// Distances, presence verdicts and size bounds from stored curves.
    Invert {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArg,
    },
    /// Mesh-constrained location from a stored report.
    Triangulate(Common),
    /// All stages.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ladder: LadderArgs,
        #[command(flatten)]
        model: ModelArg,
    },
    /// Brute-force oracle checks: potentials, asymptotics or all.
    Oracle {
        #[arg(value_parser = parse_suite)]
        which: Suite,
        /// Also write the table as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn options(ladder: &LadderArgs, model: &ModelArg) -> StageOptions {
    StageOptions {
        ladder: match (ladder.tau_min, ladder.tau_max, ladder.tau_count) {
            (Some(tau_min), Some(tau_max), Some(count)) => Some(LadderSpec::Linear { tau_min, tau_max, count }),
            _ => None,
        },
        model: model.model,
    }
}

fn write_overlays(curves: &[quenchloc::pipeline::DetectorCurves], report: &LocalizationReport, out: &Path) -> quenchloc::Result<()> {
    for (i, (c, d)) in curves.iter().zip(&report.detectors).enumerate() {
        if let Some(f) = &d.fit {
            write_fit_overlay(&c.measurement, f, &out.join(format!("det{i}_fit.csv")))?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> quenchloc::Result<bool> {
    let say = |s: &str| {
        if !cli.quiet {
            print!("{s}");
        }
    };
    match &cli.command {
        Command::Simulate(c) => {
            let sc = LoadedScenario::load(&c.scenario)?;
            let recs = run_simulate(&sc, &c.out)?;
            for (i, r) in recs.iter().enumerate() {
                let arrival = r.first_arrival().map_or("none".to_string(), |(_, t)| format!("{t:.5}"));
                say(&format!("detector {i}: {} nodes, T0 {:.5}, first arrival {arrival}\n", r.nodes.len(), r.t0()));
            }
        }
        Command::Indicator { common, ladder } => {
            let sc = LoadedScenario::load(&common.scenario)?;
            let recs = read_records(&sc, &common.out)?;
            let curves = run_indicator(&sc, &recs, &options(ladder, &ModelArg::default()), &common.out)?;
            for (i, c) in curves.iter().enumerate() {
                let flagged = c.measurement.flagged.iter().filter(|&&f| f).count();
                say(&format!("detector {i}: {} ladder points, {flagged} flagged\n", c.measurement.len()));
            }
        }
        Command::Invert { common, model } => {
            let sc = LoadedScenario::load(&common.scenario)?;
            let curves = read_curves(&sc, &common.out)?;
            let report = run_invert(&sc, &curves, &options(&LadderArgs::default(), model))?;
            write_overlays(&curves, &report, &common.out)?;
            report.write(&common.out)?;
            say(&report.summary());
        }
        Command::Triangulate(c) => {
            let sc = LoadedScenario::load(&c.scenario)?;
            let report = LocalizationReport::read(&c.out.join(REPORT_FILE))?;
            if report.scenario_hash != sc.hash {
                return Err(Error::invalid("stored report was produced from a different scenario file"));
            }
            let report = run_triangulate(&sc, report)?;
            report.write(&c.out)?;
            say(&report.summary());
        }
        Command::Pipeline { common, ladder, model } => {
            let sc = LoadedScenario::load(&common.scenario)?;
            let report = run_pipeline(&sc, &common.out, &options(ladder, model))?;
            say(&report.summary());
        }
        Command::Oracle { which, out } => {
            let rows = run_oracle(*which)?;
            say(&format_table(&rows));
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("oracle.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
            }
            return Ok(rows.iter().all(|r| r.pass));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: oracle checks failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
