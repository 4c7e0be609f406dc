//! End to end: load a run config, simulate the detuning sweep, fit the
//! fringe to the simulated counts and compare with the configured values.
//!
//! Run with `cargo run --release --example routing_experiment [config]`.

use std::path::PathBuf;

use spfl::config::RunConfig;
use spfl::detection::sweep_experiment;
use spfl::spectral::fit_fringe;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/measured.config").into());
    let cfg = RunConfig::load(&path)?;
    let spectral = cfg.spectral_config()?;
    let grid: Vec<f64> = (0..=32).map(|k| 4.0 + 0.5 * k as f64).collect();

    let curve = sweep_experiment(
        &spectral,
        &cfg.source_spec()?,
        &cfg.detectors()?,
        &grid,
        cfg.run.n_gates * 10,
        cfg.run.seed,
        cfg.run.averaged_routing,
    )?;
    for p in curve.points() {
        println!("{:>6.2} nm  same {:>7.2}  diff {:>7.2}", p.delta_lambda, p.c_t_same, p.c_t_diff);
    }

    let fit = fit_fringe(curve.points(), spectral.lambda_p0, spectral.params())?;
    println!(
        "fitted alpha {:.5} ps^2 (configured {}), xi {:.1} / {:.1} /s",
        fit.params.alpha, spectral.alpha, fit.params.xi_same, fit.params.xi_diff
    );
    Ok(())
}
