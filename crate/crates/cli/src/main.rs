mod cli;
mod commands;
mod config;
mod failure;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches};

use cli::{Cli, Command, ManifestAction};
use config::RunConfig;
use failure::Failure;
use output::{Outputs, RunManifest};

const DEFAULT_OUT: &str = "eneon-out";

fn main() -> ExitCode {
    let matches = Cli::command().after_help(config::keys_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Command::Manifest {
        action: ManifestAction::Verify { manifest },
    } = &cli.command
    {
        return commands::verify(manifest);
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(r) = cli.realizations {
        cfg.realizations = r;
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let start = Instant::now();
    let mut outputs = Outputs::new(&out_dir);
    let report = commands::execute(&cli.command, &cfg, &mut outputs)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let args = cli.command.to_args();
    let manifest = RunManifest {
        tool: "eneon".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg,
        inputs: report.inputs,
        outputs: outputs.files().to_vec(),
        timings_ms: BTreeMap::from([("total".to_string(), elapsed)]),
        command: args.clone(),
    };
    let manifest_path = out_dir.join(RunManifest::file_name(&args));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    output::write_atomic(&manifest_path, text.as_bytes())?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("manifest: {}", manifest_path.display());
    report.deferred.map_or(Ok(()), Err)
}
