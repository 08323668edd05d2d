use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use scaffoldlab::{analyze, load_config, Error, Format};

#[derive(Parser)]
#[command(name = "scaffoldlab", version, about = "Ramification, normal-basis generators and Galois scaffolds of ASW extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one or more case files.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Canonical JSON output (default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable output.
    #[arg(long)]
    text: bool,
    /// Write one report per case into this directory instead of stdout.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Starting series precision, overriding the case file.
    #[arg(long, value_name = "N")]
    precision: Option<i64>,
    /// Verification window [LO, HI), overriding the case file.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    window: Option<Vec<i64>>,
}

fn run_one(path: &Path, args: &AnalyzeArgs, format: Format) -> Result<String, Error> {
    let mut case = load_config(path)?;
    if args.precision.is_some() || args.window.is_some() {
        let mut config = case.config.clone();
        if let Some(n) = args.precision {
            config.series_precision = Some(n);
        }
        if let Some(w) = &args.window {
            config.verify.window = Some([w[0], w[1]]);
        }
        case = config.validate()?;
    }
    Ok(analyze(&case)?.render(format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Analyze(args) = cli.command;
    let format = if args.text { Format::Text } else { Format::Json };
    if let Some(dir) = &args.out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("scaffoldlab: {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    let results: Vec<Result<String, Error>> = args.configs.par_iter().map(|p| run_one(p, &args, format)).collect();
    let mut code = 0;
    for (path, result) in args.configs.iter().zip(results) {
        match result {
            Ok(text) => match &args.out {
                Some(dir) => {
                    let ext = if args.text { "txt" } else { "json" };
                    let stem = path.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
                    let target = dir.join(format!("{stem}.{ext}"));
                    if let Err(e) = std::fs::write(&target, text) {
                        eprintln!("scaffoldlab: {}: {e}", target.display());
                        code = code.max(1);
                    }
                }
                None => print!("{text}"),
            },
            Err(e) => {
                eprintln!("scaffoldlab: {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code as u8)
}
