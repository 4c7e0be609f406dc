//! Coincidence fringe over detuning, pointwise and averaged over the filter
//! passbands. Writes CSV to stdout.
//!
//! Run with `cargo run --example fringe_sweep > fringe.csv`.

use std::io;

use spfl::spectral::{analytic_sweep, contrast_ratio, SpectralConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SpectralConfig::measured_setup();
    let grid: Vec<f64> = (0..=160).map(|k| 4.0 + 0.1 * k as f64).collect();

    let curve = analytic_sweep(&config, &grid, true)?;
    spfl::io::write_sweep_curve(io::stdout().lock(), &curve)?;

    for dl in [10.75, 15.2] {
        eprintln!(
            "contrast at {dl} nm: pointwise {:.0}, averaged {:.1}",
            contrast_ratio(&config, dl, false)?,
            contrast_ratio(&config, dl, true)?
        );
    }
    Ok(())
}
