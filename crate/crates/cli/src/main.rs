use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use recur_core::lab::{emit, registry, render_text, run_experiment, Experiment, Format, LabError, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "recur-lab", version, about = "Run return-time set experiments from scenario files")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and report its verdicts.
    Run {
        scenario: PathBuf,
        /// Report path prefix; overrides the scenario's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: Format,
        /// Worker threads for window scans (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also dump member lists of sets too large to inline.
        #[arg(long)]
        raw: bool,
    },
    /// List registered experiment kinds with their defaults.
    ListExperiments,
    /// Parse and check a scenario without running it.
    Validate { scenario: PathBuf },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn fail(e: LabError) -> ExitCode {
    eprintln!("recur-lab: {e}");
    exit(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::ListExperiments => {
            for k in registry() {
                let defaults = Experiment::default_for(k.kind).map(|e| serde_json::to_string(&e).unwrap_or_default());
                println!("{:<20} {}", k.kind, k.summary);
                if let Some(d) = defaults {
                    println!("{:<20} defaults: {d}", "");
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Validate { scenario } => match Scenario::load(&scenario) {
            Ok(s) => {
                println!("{}: ok ({})", s.name, s.experiment.kind());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Run { scenario, out, format, threads, seed, raw } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return fail(LabError::Invalid(format!("--threads {n}: {e}")));
                }
            }
            let s = match Scenario::load(&scenario) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let report = match run_experiment(&s, &RunOptions { seed }) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            for t in &report.timings {
                eprintln!("time {:>10.3}s  {}", t.elapsed.as_secs_f64(), t.phase);
            }
            print!("{}", render_text(&report));
            let prefix = out.or_else(|| s.output.as_ref().map(PathBuf::from));
            match prefix {
                Some(p) => match emit(&report, format, &p, raw) {
                    Ok(files) => {
                        for f in files {
                            eprintln!("wrote {}", f.display());
                        }
                    }
                    Err(e) => return fail(LabError::Io(e)),
                },
                None if format != Format::Text => {
                    return fail(LabError::Invalid("--format needs --out or an output prefix in the scenario".into()));
                }
                None => {}
            }
            exit(report.exit_code())
        }
    }
}
