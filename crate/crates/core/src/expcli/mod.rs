//! Experiment pipelines, configuration, seeded noise and run manifests.
//!
//! Each pipeline reads an [`ExperimentConfig`], writes its artifacts below
//! the configured output directory and returns the [`RunManifest`] that
//! lists them. Runs are single threaded and every random draw is made from
//! seeds fixed before the first solve, so a manifest replays bit for bit.

mod boundary;
pub mod cli;
pub mod config;
mod deblur;
pub mod manifest;
pub mod noise;
mod radon;
mod sweep;

pub use boundary::{run_denoise_boundary, BoundaryParams};
pub use config::{parse_kv, schema_text, Experiment, ExperimentConfig, KeySpec, SCHEMA};
pub use deblur::{run_deblur, DeblurParams};
pub use manifest::{ManifestFile, OutputSink, RunManifest, MANIFEST_NAME};
pub use noise::{derive_seeds, gen_gaussian_noise, noise_with_norm, NOISE_GENERATOR};
pub use radon::{run_radon, sinogram_argmax_check, RadonParams, SinogramCheck};
pub use sweep::{run_convergence_sweep, SweepParams};

use crate::error::{Error, Result};
use crate::field::io::{field_to_csv, field_to_pgm, fmt_f64, mask_to_pgm};
use crate::field::ScalarField;
use crate::level::{extract_level_set, ConvergenceReport};
use crate::solver::{history_csv, SolveResult};

/// Parses the typed parameters of the configured experiment.
pub(crate) fn validate_experiment(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment() {
        Experiment::Deblur => DeblurParams::from_config(cfg).map(drop),
        Experiment::DenoiseBoundary => BoundaryParams::from_config(cfg).map(drop),
        Experiment::Radon => RadonParams::from_config(cfg).map(drop),
        Experiment::ConvergenceSweep => SweepParams::from_config(cfg).map(drop),
    }
}

/// Runs the configured experiment. On failure the manifest is still
/// written, with the files produced so far and a `diverged` or `failed`
/// status, and the error is returned.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let mut sink = OutputSink::new(cfg)?;
    let outcome = match cfg.experiment() {
        Experiment::Deblur => run_deblur(cfg, &mut sink),
        Experiment::DenoiseBoundary => run_denoise_boundary(cfg, &mut sink),
        Experiment::Radon => run_radon(cfg, &mut sink),
        Experiment::ConvergenceSweep => run_convergence_sweep(cfg, &mut sink),
    };
    match outcome {
        Ok(()) => sink.finish("ok"),
        Err(e) => {
            let status = match &e {
                Error::Divergence { .. } => format!("diverged: {e}"),
                _ => format!("failed: {e}"),
            };
            sink.finish(&status.replace('\n', " "))?;
            Err(e)
        }
    }
}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Field as CSV and PGM.
pub(crate) fn write_field(sink: &mut OutputSink, stem: &str, field: &ScalarField) -> Result<()> {
    sink.write(&format!("{stem}.csv"), &field_to_csv(field, &[]))?;
    sink.write(&format!("{stem}.pgm"), &field_to_pgm(field))
}

/// Reconstruction, its history and the per-solve statistics.
pub(crate) fn write_solve(sink: &mut OutputSink, stem: &str, res: &SolveResult) -> Result<()> {
    write_field(sink, stem, &res.u_alpha)?;
    sink.write(&format!("{stem}_history.csv"), &history_csv(&res.history))?;
    sink.stat_f64(format!("{stem}.alpha"), res.alpha);
    sink.stat(format!("{stem}.iterations"), res.iterations);
    sink.stat(format!("{stem}.converged"), res.converged);
    if let Some(rec) = res.final_record() {
        sink.stat_f64(format!("{stem}.energy"), rec.energy);
        sink.stat_f64(format!("{stem}.gap"), rec.gap);
        sink.stat_f64(format!("{stem}.feasibility"), rec.feasibility);
        sink.stat_f64(format!("{stem}.residual"), rec.residual);
    }
    Ok(())
}

/// Level-set masks of `u` as PGM, plus boundary point lists as plots.
pub(crate) fn write_levels(sink: &mut OutputSink, stem: &str, u: &ScalarField, thresholds: &[f64]) -> Result<()> {
    for &t in thresholds {
        let level = extract_level_set(u, t);
        sink.write(&format!("{stem}_level_t{t}.pgm"), &mask_to_pgm(level.mask()))?;
        if sink.emit_plots() {
            let g = u.grid();
            let mut text = String::from("x,y\n");
            for &k in level.boundary() {
                let (i, j) = g.coords(k);
                let [x, y] = g.position(i, j);
                text.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(y)));
            }
            sink.plot(&format!("{stem}_boundary_t{t}.csv"), &text)?;
        }
    }
    Ok(())
}

/// Thresholds must be finite; the zero level is allowed but never part of
/// trend summaries.
pub(crate) fn check_thresholds(ts: &[f64]) -> Result<()> {
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(config_error("thresholds must be finite"));
    }
    Ok(())
}

pub(crate) fn record_trends(sink: &mut OutputSink, report: &ConvergenceReport) {
    for s in &report.trends {
        let t = s.t;
        sink.stat(format!("trend.t{t}.hausdorff_decreasing"), s.hausdorff_strictly_decreasing);
        sink.stat(format!("trend.t{t}.sym_diff_decreasing"), s.sym_diff_strictly_decreasing);
        sink.stat_f64(format!("trend.t{t}.final_hausdorff"), s.final_hausdorff);
        sink.stat_f64(format!("trend.t{t}.final_sym_diff"), s.final_sym_diff);
        if let Some(slope) = s.slope {
            sink.stat_f64(format!("trend.t{t}.loglog_slope"), slope);
        }
    }
}
