//! Two-photon output state of the loop and where the pairs leave.
//!
//! Run with `cargo run --example routing_state`.

use std::f64::consts::PI;

use spfl::pairstate::{
    output_state, routing_probabilities, single_counts_marginal, switching_detuning, Routing,
};

fn main() -> spfl::Result<()> {
    println!("{:>6} {:>8} {:>8} {:>8}", "phi/pi", "p_same", "p_diff", "P(s in a)");
    for k in 0..=8 {
        let phi = k as f64 * PI / 4.0;
        let state = output_state(phi);
        let r = routing_probabilities(&state)?;
        let m = single_counts_marginal(&state)?;
        println!("{:>6.2} {:>8.4} {:>8.4} {:>8.4}", phi / PI, r.p_same, r.p_diff, m.signal[0]);
    }

    println!();
    for n in 0..3 {
        let split = switching_detuning(-0.02175, 3.0, 1.0, n, Routing::Split)?;
        let same = switching_detuning(-0.02175, 3.0, 1.0, n, Routing::Same)?;
        println!("order {n}: split at {split:.3} rad/ps, same port at {same:.3} rad/ps");
    }
    Ok(())
}
