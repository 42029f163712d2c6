use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gradtrack::experiment::{cmd_bounds, cmd_compare, cmd_run, cmd_scaling};
use gradtrack::{Error, ExperimentConfig};

#[derive(Parser)]
#[command(name = "gradtrack", version, about = "Gradient-tracking distributed optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate each configured algorithm and write one trajectory CSV per algorithm.
    Run(Common),
    /// Run several algorithms on shared inputs and write one merged error CSV.
    Compare(Common),
    /// Iterations to reach the target error over a list of network sizes.
    Scaling(Common),
    /// Evaluate the rate matrix, step rules and bounds without simulating.
    Bounds(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config. Omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Replace a seed, e.g. `graph_seed=7`. Repeatable.
    #[arg(long = "seed-override", value_name = "KEY=VALUE")]
    seed_override: Vec<String>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } => 3,
        Error::OracleFailure(_) | Error::DegenerateData(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Write via a sibling temp file and rename so readers never see a partial file.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, &target)
}

fn load(common: &Common) -> gradtrack::Result<(ExperimentConfig, PathBuf)> {
    let (mut cfg, base) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (ExperimentConfig::from_json(&text)?, base)
        }
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    for spec in &common.seed_override {
        cfg.apply_override(spec)?;
    }
    Ok((cfg, base))
}

fn execute(command: Command) -> gradtrack::Result<Vec<PathBuf>> {
    let (kind, common) = match &command {
        Command::Run(c) => ("run", c),
        Command::Compare(c) => ("compare", c),
        Command::Scaling(c) => ("scaling", c),
        Command::Bounds(c) => ("bounds", c),
    };
    let (cfg, base) = load(common)?;
    let out = &common.out;
    let mut files: Vec<(String, String)> = Vec::new();
    match kind {
        "run" => {
            let report = cmd_run(&cfg, &base)?;
            for r in &report.runs {
                files.push((format!("run_{}.csv", r.algorithm), r.csv.clone()));
            }
            files.push(("summary.json".into(), report.summary_json()?));
            files.push(("graph.txt".into(), report.graph_edges.clone()));
            files.push(("suite.json".into(), report.suite_json.clone()));
            // Same experiment, pinned to the written graph and suite.
            let mut replay = cfg.clone();
            replay.graph_file = Some("graph.txt".into());
            replay.suite_file = Some("suite.json".into());
            files.push(("replay.json".into(), replay.to_json()?));
        }
        "compare" => {
            let report = cmd_compare(&cfg, &base)?;
            files.push(("compare.csv".into(), report.csv));
            files.push(("summary.json".into(), serde_json::to_string_pretty(&report.summary)?));
        }
        "scaling" => {
            let report = cmd_scaling(&cfg, &base)?;
            files.push(("scaling.csv".into(), report.csv()));
            files.push(("scaling.json".into(), serde_json::to_string_pretty(&report)?));
        }
        _ => {
            let report = cmd_bounds(&cfg, &base)?;
            files.push(("bounds.json".into(), report.to_json()?));
        }
    }
    fs::create_dir_all(out)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in &files {
        write_atomic(out, name, contents)?;
        written.push(out.join(name));
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
