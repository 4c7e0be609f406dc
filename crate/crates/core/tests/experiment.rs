use spfl::detection::{
    simulate_counts, sweep_experiment, true_coincidence, DetectorPair, DetectorSpec, SourceSpec,
};
use spfl::pairstate::RoutingProbabilities;
use spfl::spectral::{fringe_phase, SpectralConfig};

#[test]
fn singles_are_flat_across_the_sweep() {
    let cfg = SpectralConfig::measured_setup();
    let source = SourceSpec::new(0.01, 0.23).unwrap();
    let detectors = [DetectorSpec::ideal(); 3];
    let grid: Vec<f64> = (0..9).map(|k| 8.0 + k as f64).collect();
    let n_gates = 2_000_000;
    let curve = sweep_experiment(&cfg, &source, &detectors, &grid, n_gates, 3, true).unwrap();
    let to_counts = n_gates as f64 / source.gate_rate_hz;
    for spd in 0..3 {
        let counts: Vec<f64> = curve
            .points()
            .iter()
            .map(|p| p.singles.unwrap()[spd] * to_counts)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        for c in &counts {
            assert!((c - mean).abs() < 3.0 * mean.sqrt(), "SPD{}: {c} vs {mean}", spd + 1);
        }
    }
}

/// Exact expectation of the SPD2-SPD3 true coincidences per gate for ideal
/// detectors, from the independent Poisson pair classes.
fn split_channel_expectation(mu: f64, p_same: f64) -> f64 {
    let l_ab = mu * (1.0 - p_same) / 2.0;
    let l_a = mu * p_same / 2.0;
    let l_b = mu * p_same / 2.0;
    let both = 1.0 - (-(l_ab + l_a)).exp() - (-(l_ab + l_b)).exp() + (-(l_ab + l_a + l_b)).exp();
    let adjacent = (1.0 - (-(l_ab + l_a)).exp()) * (1.0 - (-(l_ab + l_b)).exp());
    both - adjacent
}

#[test]
fn seed_averaged_rate_matches_routing_model() {
    let cfg = SpectralConfig::measured_setup();
    let mu = 0.02;
    let source = SourceSpec::new(mu, 0.23).unwrap();
    let detectors = [DetectorSpec::ideal(); 3];
    let phi = fringe_phase(cfg.alpha, cfg.lambda_p0, 9.0).unwrap();
    let routing = RoutingProbabilities::from_mean_cos(phi.cos()).unwrap();
    let n_gates = 200_000;
    let rates: Vec<f64> = (0..30)
        .map(|seed| {
            let rec = simulate_counts(&source, &detectors, &routing, n_gates, seed).unwrap();
            true_coincidence(&rec, DetectorPair::SplitMode, 1.0).unwrap().rate
        })
        .collect();
    let mean = rates.iter().sum::<f64>() / 30.0;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 29.0;
    let se = (var / 30.0).sqrt();
    let expected = split_channel_expectation(mu, routing.p_same);
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
}
