//! Designing a loop: pigtail imbalance for a wanted detuning, and the
//! switching table of an existing loop.
//!
//! Run with `cargo run --example switching_design`.

use spfl::design::{detuning_sensitivity, solve_length_difference, switching_table};
use spfl::pairstate::Routing;
use spfl::spectral::SpectralConfig;

fn main() -> spfl::Result<()> {
    let beta2 = -0.02175;
    let lambda_p0 = 1547.5;

    for dl in [5.0, 10.0, 20.0] {
        let s = solve_length_difference(beta2, dl, lambda_p0, 0, Routing::Split)?;
        println!("split pairs at {dl:>4} nm: |L2 - L1| = {:.3} m", s.magnitude);
    }

    let table = switching_table(beta2, 3.0, 1.0, lambda_p0, 4)?;
    println!("\n{:>2} {:>10} {:>10}", "n", "split_nm", "same_nm");
    for row in &table.rows {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!("{:>2} {:>10} {:>10}", row.n, fmt(row.delta_lambda_diff), fmt(row.delta_lambda_same));
    }

    let root = table.rows[0].delta_lambda_same.expect("order 0 is reachable");
    let s = detuning_sensitivity(&SpectralConfig::measured_setup(), root, 0.07)?;
    println!(
        "\ncontrast around {root:.3} nm: {:.1} / {:.1} / {:.1}",
        s.below, s.nominal, s.above
    );
    Ok(())
}
