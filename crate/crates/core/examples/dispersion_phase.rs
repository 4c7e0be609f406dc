//! Dispersion phase picked up by a pair in the loop's two pigtails.
//!
//! Run with `cargo run --example dispersion_phase`.

use spfl::dispersion::{
    detuning_to_omega, phi_d_approx, phi_d_exact, FiberSpec, FrequencyQuad,
};

fn main() -> spfl::Result<()> {
    let lambda_p0 = 1547.5;
    let beta2 = -0.02175;
    let smf1 = FiberSpec::new(3.0, lambda_p0, beta2)?;
    let smf2 = FiberSpec::new(1.0, lambda_p0, beta2)?;

    println!("{:>8} {:>10} {:>10} {:>10}", "dl_nm", "dw_rad/ps", "exact", "approx");
    for dl in [2.0, 5.0, 10.75, 15.2, 20.0] {
        let dw = detuning_to_omega(dl, lambda_p0)?;
        let quad = FrequencyQuad::non_degenerate(smf1.omega_ref(), dw)?;
        let exact = phi_d_exact(&smf1, &smf2, &quad)?;
        let approx = phi_d_approx(beta2, smf1.length, smf2.length, dw)?;
        println!("{dl:>8.2} {dw:>10.4} {exact:>10.4} {approx:>10.4}");
    }

    // third-order dispersion drops out for a symmetric pair
    let dw = detuning_to_omega(10.75, lambda_p0)?;
    let quad = FrequencyQuad::non_degenerate(smf1.omega_ref(), dw)?;
    let with_b3 = phi_d_exact(&smf1.with_beta3(1e-4), &smf2.with_beta3(1e-4), &quad)?;
    println!("with beta3 = 1e-4 ps^3/m at 10.75 nm: {with_b3:.6} rad");
    Ok(())
}
