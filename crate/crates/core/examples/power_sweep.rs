//! Coincidence rates against pump power at the split-routing detuning.
//!
//! Run with `cargo run --release --example power_sweep`.

use spfl::detection::{power_sweep, routing_at, DetectorSpec, SourceSpec};
use spfl::spectral::SpectralConfig;

fn main() -> spfl::Result<()> {
    let spectral = SpectralConfig::measured_setup();
    let source = SourceSpec::new(0.005, 0.23)?;
    let detectors = [DetectorSpec::new(0.1, 5e-5, 10.0)?; 3];
    let routing = routing_at(&spectral, 10.75, true)?;
    let powers = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4];

    let points = power_sweep(&source, &detectors, &routing, &powers, 31_000_000, 11)?;
    println!("{:>6} {:>10} {:>10} {:>8}", "mW", "ct_same", "ct_diff", "ratio");
    for p in &points {
        println!(
            "{:>6.2} {:>10.3} {:>10.2} {:>8.1}",
            p.power_mw,
            p.same.rate,
            p.diff.rate,
            p.diff.rate / p.same.rate
        );
    }
    let first = points.first().expect("powers are non-empty");
    let last = points.last().expect("powers are non-empty");
    let slope = (last.diff.rate / first.diff.rate).ln() / (last.power_mw / first.power_mw).ln();
    println!("log-log slope of the split channel: {slope:.3}");
    Ok(())
}
