mod fit;
mod rabi_split;
mod solve;
mod spectrum;
mod timedomain;

use std::path::Path;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::{sha256_hex, FileHash, Outputs, RunManifest};

#[derive(Debug, Default)]
pub struct Report {
    pub summary: Vec<String>,
    pub inputs: Vec<FileHash>,
    /// Failure to report after the outputs and manifest are written.
    pub deferred: Option<Failure>,
}

pub fn execute(command: &Command, cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    match command {
        Command::Solve { axis, vrg } => solve::run(*axis, *vrg, cfg, out),
        Command::SpectrumMap => spectrum::run(cfg, out),
        Command::RabiSplit => rabi_split::run(cfg, out),
        Command::Timedomain { kind } => timedomain::run(*kind, cfg, out),
        Command::Fit {
            file,
            model,
            kappa,
            exponent,
            f_r,
        } => fit::run(file, *model, *kappa, *exponent, *f_r, out),
        Command::Manifest { .. } => Err(Failure::Config("manifest commands cannot be nested".into())),
    }
}

pub fn verify(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut problems = Vec::new();
    for input in &manifest.inputs {
        match std::fs::read(&input.path) {
            Ok(bytes) if sha256_hex(&bytes) == input.sha256 => {}
            Ok(_) => problems.push(format!("input {} changed", input.path)),
            Err(e) => problems.push(format!("input {}: {e}", input.path)),
        }
    }
    let argv = std::iter::once("eneon".to_string()).chain(manifest.command.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure::Config(format!("recorded command: {e}")))?;
    let dir = tempfile::tempdir()?;
    let mut outputs = Outputs::new(dir.path());
    let report = execute(&cli.command, &manifest.config, &mut outputs);
    if let Err(e) = &report {
        problems.push(format!("re-run failed: {e}"));
    }
    let fresh = outputs.files();
    for expected in &manifest.outputs {
        match fresh.iter().find(|f| f.path == expected.path) {
            Some(f) if f.sha256 == expected.sha256 => println!("ok        {}", expected.path),
            Some(_) => {
                println!("MISMATCH  {}", expected.path);
                problems.push(format!("{} differs", expected.path));
            }
            None => {
                println!("MISSING   {}", expected.path);
                problems.push(format!("{} not produced", expected.path));
            }
        }
    }
    if problems.is_empty() {
        println!("verified {} outputs", manifest.outputs.len());
        Ok(())
    } else {
        Err(Failure::Verify(problems.join("; ")))
    }
}
