//! Fits the two-branch fringe to a noisy synthetic sweep.
//!
//! Run with `cargo run --example fringe_fit`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use spfl::pairstate::Routing;
use spfl::spectral::{fit_fringe, fringe_model, FringeParams, SpectralConfig, SweepPoint};

fn main() -> spfl::Result<()> {
    let truth = SpectralConfig::measured_setup();
    let seconds = 60.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = |rate: f64| {
        let n = Poisson::new(rate * seconds).map_or(0.0, |p| p.sample(&mut rng));
        n / seconds
    };

    let points: Vec<SweepPoint> = (0..=32)
        .map(|k| {
            let dl = 4.0 + 0.5 * k as f64;
            let same = fringe_model(&truth, dl, Routing::Same)?;
            let diff = fringe_model(&truth, dl, Routing::Split)?;
            Ok(SweepPoint::new(dl, counts(same), counts(diff)))
        })
        .collect::<spfl::Result<_>>()?;

    let init = FringeParams {
        xi_same: 25.0,
        xi_diff: 25.0,
        alpha: 0.04,
    };
    let fit = fit_fringe(&points, truth.lambda_p0, init)?;
    let p = fit.params;
    println!("xi_same = {:.2} /s   (true {})", p.xi_same, truth.xi_same);
    println!("xi_diff = {:.2} /s   (true {})", p.xi_diff, truth.xi_diff);
    println!("alpha   = {:.5} ps^2 (true {})", p.alpha, truth.alpha);
    println!("residual {:.3} after {} iterations", fit.residual, fit.iterations);
    Ok(())
}
