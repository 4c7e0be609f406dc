//! Raw counts of the gated detectors for a fixed routing.
//!
//! Run with `cargo run --release --example detector_counts`.

use spfl::detection::{simulate_counts, true_coincidence, DetectorPair, DetectorSpec, SourceSpec};
use spfl::pairstate::RoutingProbabilities;

fn main() -> spfl::Result<()> {
    let source = SourceSpec::new(0.01, 0.23)?;
    let detectors = [DetectorSpec::new(0.1, 5e-5, 10.0)?; 3];
    let n_gates = 31_000_000;

    for p_diff in [0.0, 0.5, 1.0] {
        let routing = RoutingProbabilities {
            p_same: 1.0 - p_diff,
            p_diff,
        };
        let rec = simulate_counts(&source, &detectors, &routing, n_gates, 1)?;
        println!("p_diff = {p_diff}: singles {:?}", rec.singles);
        for pair in DetectorPair::ALL {
            let ct = true_coincidence(&rec, pair, source.gate_rate_hz)?;
            println!(
                "  {pair:?}: same gate {}, adjacent {}, true {:.2} +- {:.2} /s",
                rec.coinc_same_pulse[pair as usize],
                rec.coinc_adjacent_pulse[pair as usize],
                ct.rate,
                ct.error
            );
        }
    }
    Ok(())
}
