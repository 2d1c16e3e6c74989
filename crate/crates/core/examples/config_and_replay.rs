//! Loads a configuration with overrides, runs the small denoise-boundary
//! pipeline, then replays it from its manifest and compares digests.
//!
//! `cargo run --release --example config_and_replay -- [output dir]`

use std::path::PathBuf;

use tvls::expcli::{self, Experiment, ExperimentConfig, RunManifest, MANIFEST_NAME};

const CONFIG: &str = "\
# coarse grid, short solves
h = 1/8
max_iter = 400
check_every = 50
";

fn main() -> tvls::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tvls-config-and-replay"));
    let overrides = [("output_dir".to_string(), dir.display().to_string())];
    let cfg = ExperimentConfig::load(Experiment::DenoiseBoundary, CONFIG, &overrides)?;
    for (k, v) in cfg.entries().filter(|(k, _)| ["h", "alpha", "max_iter", "tol_mode"].contains(k)) {
        println!("{k} = {v}");
    }
    let m = expcli::run(&cfg)?;
    println!("\n{} files, l1(a, c) = {:.4}", m.files.len(), m.stat_f64("l1.a_c").unwrap_or(f64::NAN));

    let saved = RunManifest::parse(&std::fs::read_to_string(dir.join(MANIFEST_NAME))?)?;
    let again = expcli::run(&saved.replay_config(Some(&dir.join("replay")))?)?;
    let bad = saved.file_mismatches(&again);
    println!("replay: {} of {} files differ", bad.len(), again.files.len());
    Ok(())
}
