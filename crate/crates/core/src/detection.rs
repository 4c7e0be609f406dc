//! Monte Carlo of the counting experiment.
//!
//! Every gate of the detectors sees one pump pulse. Per gate a Poisson number
//! of pairs is created, each pair is routed to the output ports according to
//! the two-photon state, and photons reaching a detector click it with the
//! detector's efficiency (filter losses folded in). Dark counts are ORed in.
//! A detector that clicked ignores the next `ceil(dead_time · gate_rate)`
//! gates.
//!
//! Detector layout:
//!
//! | detector | port | band   |
//! |----------|------|--------|
//! | SPD1     | a    | idler  |
//! | SPD2     | a    | signal |
//! | SPD3     | b    | idler  |
//!
//! SPD1–SPD2 coincidences witness same-port pairs, SPD2–SPD3 coincidences
//! witness split pairs. Accidentals are estimated from clicks of the first
//! detector in one gate and the partner in the next gate, and subtracted.
//!
//! Simulation is split into fixed-size batches. Batch `k` draws from the
//! ChaCha8 stream `k` of the run seed, so results depend only on the seed and
//! the batch size, never on how many threads execute the batches. Dead time
//! does not carry across batch boundaries; every batch starts with live
//! detectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::pairstate::{Routing, RoutingProbabilities};
use crate::spectral::{fringe_phase, mean_cos_phase, SpectralConfig, SweepCurve, SweepPoint};

/// Mean pairs per pulse above which multi-pair events make the model
/// questionable.
pub const MULTI_PAIR_WARNING_MU: f64 = 0.5;

/// One gated Geiger-mode single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// Detection probability of a photon reaching the detector, including
    /// filter transmission.
    pub efficiency: f64,
    /// Dark-count probability per gate.
    pub dark_prob: f64,
    /// ns
    pub gate_width_ns: f64,
    /// µs
    pub dead_time_us: f64,
}

impl DetectorSpec {
    pub fn new(efficiency: f64, dark_prob: f64, dead_time_us: f64) -> Result<Self> {
        let d = Self {
            efficiency,
            dark_prob,
            gate_width_ns: 2.5,
            dead_time_us,
        };
        d.validate()?;
        Ok(d)
    }

    /// Unit efficiency, no dark counts, no dead time.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_prob: 0.0,
            gate_width_ns: 2.5,
            dead_time_us: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("efficiency", self.efficiency),
            ("dark_prob", self.dark_prob),
            ("gate_width_ns", self.gate_width_ns),
            ("dead_time_us", self.dead_time_us),
        ] {
            ensure_finite(name, v)?;
        }
        if !(0.0..=1.0).contains(&self.efficiency) || !(0.0..=1.0).contains(&self.dark_prob) {
            return Err(Error::InvalidArgument(format!(
                "efficiency and dark probability must lie in [0, 1], got {} and {}",
                self.efficiency, self.dark_prob
            )));
        }
        if self.dead_time_us < 0.0 || self.gate_width_ns < 0.0 {
            return Err(Error::InvalidArgument(
                "dead time and gate width must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Gates skipped after a click.
    pub fn dead_gates(&self, gate_rate_hz: f64) -> u64 {
        let gates = self.dead_time_us * 1e-6 * gate_rate_hz;
        // 10 µs at 3.1 MHz is 31 gates, not 31.000000000000004
        (gates - 1e-9).ceil().max(0.0) as u64
    }
}

/// The photon-pair source as seen by the gated detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// Mean pairs per gated pulse at `power_ref_mw`.
    pub mu: f64,
    /// mW
    pub pump_power_mw: f64,
    /// mW
    pub power_ref_mw: f64,
    /// Hz
    pub gate_rate_hz: f64,
    /// Pump pulses per gate.
    pub rep_divisor: u32,
}

impl SourceSpec {
    pub fn new(mu: f64, pump_power_mw: f64) -> Result<Self> {
        let s = Self {
            mu,
            pump_power_mw,
            power_ref_mw: 0.23,
            gate_rate_hz: 3.1e6,
            rep_divisor: 8,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu", self.mu),
            ("pump_power_mw", self.pump_power_mw),
            ("power_ref_mw", self.power_ref_mw),
            ("gate_rate_hz", self.gate_rate_hz),
        ] {
            ensure_finite(name, v)?;
        }
        if self.mu < 0.0 || self.pump_power_mw < 0.0 {
            return Err(Error::InvalidArgument("mu and pump power must be >= 0".into()));
        }
        if self.power_ref_mw <= 0.0 || self.gate_rate_hz <= 0.0 || self.rep_divisor == 0 {
            return Err(Error::InvalidArgument(
                "reference power, gate rate and repetition divisor must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_power(mut self, pump_power_mw: f64) -> Self {
        self.pump_power_mw = pump_power_mw;
        self
    }

    /// Mean pairs per gate at the current pump power. Two pump photons per
    /// pair make the rate quadratic in power.
    pub fn mu_eff(&self) -> f64 {
        let r = self.pump_power_mw / self.power_ref_mw;
        self.mu * r * r
    }

    /// Pump pulse repetition rate, Hz.
    pub fn pump_rep_rate_hz(&self) -> f64 {
        self.gate_rate_hz * self.rep_divisor as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spd {
    /// Idler in port a.
    Spd1 = 0,
    /// Signal in port a.
    Spd2 = 1,
    /// Idler in port b.
    Spd3 = 2,
}

/// The two coincidence channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorPair {
    /// SPD1–SPD2: both photons in port a.
    SameMode = 0,
    /// SPD2–SPD3: signal in a, idler in b.
    SplitMode = 1,
}

impl DetectorPair {
    pub const ALL: [DetectorPair; 2] = [DetectorPair::SameMode, DetectorPair::SplitMode];

    pub fn detectors(self) -> (Spd, Spd) {
        match self {
            DetectorPair::SameMode => (Spd::Spd1, Spd::Spd2),
            DetectorPair::SplitMode => (Spd::Spd2, Spd::Spd3),
        }
    }

    pub fn routing(self) -> Routing {
        match self {
            DetectorPair::SameMode => Routing::Same,
            DetectorPair::SplitMode => Routing::Split,
        }
    }
}

/// Raw counts of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountRecord {
    pub gates: u64,
    /// SPD1, SPD2, SPD3.
    pub singles: [u64; 3],
    /// Same-gate coincidences, indexed by [`DetectorPair`].
    pub coinc_same_pulse: [u64; 2],
    /// First detector in gate `t`, partner in gate `t + 1`.
    pub coinc_adjacent_pulse: [u64; 2],
    /// Mean pairs per gate exceeded [`MULTI_PAIR_WARNING_MU`].
    pub multi_pair_warning: bool,
}

impl CountRecord {
    fn merge(mut self, other: &CountRecord) -> Self {
        self.gates += other.gates;
        for k in 0..3 {
            self.singles[k] += other.singles[k];
        }
        for k in 0..2 {
            self.coinc_same_pulse[k] += other.coinc_same_pulse[k];
            self.coinc_adjacent_pulse[k] += other.coinc_adjacent_pulse[k];
        }
        self.multi_pair_warning |= other.multi_pair_warning;
        self
    }

    pub fn singles_rate(&self, spd: Spd, gate_rate_hz: f64) -> f64 {
        self.singles[spd as usize] as f64 * gate_rate_hz / self.gates as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Gates per independently seeded batch.
    pub batch_size: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            batch_size: 1 << 20,
        }
    }
}

/// Independent child seed for item `index` of a run (grid point, power...).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn simulate_counts(
    source: &SourceSpec,
    detectors: &[DetectorSpec; 3],
    routing: &RoutingProbabilities,
    n_gates: u64,
    seed: u64,
) -> Result<CountRecord> {
    simulate_counts_with(source, detectors, routing, n_gates, seed, &SimOptions::default())
}

pub fn simulate_counts_with(
    source: &SourceSpec,
    detectors: &[DetectorSpec; 3],
    routing: &RoutingProbabilities,
    n_gates: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<CountRecord> {
    if n_gates == 0 {
        return Err(Error::InvalidArgument("n_gates must be > 0".into()));
    }
    if options.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be > 0".into()));
    }
    source.validate()?;
    routing.validate()?;
    for d in detectors {
        d.validate()?;
    }
    let mu = source.mu_eff();
    let pairs = if mu > 0.0 {
        Some(Poisson::new(mu).map_err(|e| Error::InvalidArgument(format!("pair rate: {e}")))?)
    } else {
        None
    };
    let kernel = GateKernel {
        pairs,
        p_same: routing.p_same,
        efficiency: detectors.map(|d| d.efficiency),
        dark: detectors.map(|d| d.dark_prob),
        dead_gates: detectors.map(|d| d.dead_gates(source.gate_rate_hz)),
    };
    let n_batches = n_gates.div_ceil(options.batch_size);
    let record = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let start = b * options.batch_size;
            let len = options.batch_size.min(n_gates - start);
            kernel.run_batch(seed, b, len)
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(CountRecord::default(), CountRecord::merge);
    Ok(CountRecord {
        multi_pair_warning: mu > MULTI_PAIR_WARNING_MU,
        ..record
    })
}

struct GateKernel {
    pairs: Option<Poisson<f64>>,
    p_same: f64,
    efficiency: [f64; 3],
    dark: [f64; 3],
    dead_gates: [u64; 3],
}

impl GateKernel {
    fn run_batch(&self, seed: u64, batch: u64, gates: u64) -> CountRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);

        let half_same = 0.5 * self.p_same;
        let split_sa = self.p_same + 0.5 * (1.0 - self.p_same);
        let (s1, s2, s3) = (Spd::Spd1 as usize, Spd::Spd2 as usize, Spd::Spd3 as usize);

        let mut rec = CountRecord {
            gates,
            ..CountRecord::default()
        };
        let mut live_from = [0u64; 3];
        let mut prev = [false; 3];
        for g in 0..gates {
            let mut hit = [false; 3];
            let n_pairs = match &self.pairs {
                Some(p) => p.sample(&mut rng) as u64,
                None => 0,
            };
            for _ in 0..n_pairs {
                let r: f64 = rng.random();
                // (idler detector, signal detector); None where the port
                // has no detector for that band
                let (idler, signal) = if r < half_same {
                    (Some(s1), Some(s2))
                } else if r < self.p_same {
                    (Some(s3), None)
                } else if r < split_sa {
                    (Some(s3), Some(s2))
                } else {
                    (Some(s1), None)
                };
                for k in [idler, signal].into_iter().flatten() {
                    if !hit[k] && rng.random::<f64>() < self.efficiency[k] {
                        hit[k] = true;
                    }
                }
            }
            let mut click = [false; 3];
            for k in 0..3 {
                if g < live_from[k] {
                    continue;
                }
                let dark = self.dark[k] > 0.0 && rng.random::<f64>() < self.dark[k];
                if hit[k] || dark {
                    click[k] = true;
                    rec.singles[k] += 1;
                    live_from[k] = g + 1 + self.dead_gates[k];
                }
            }
            for pair in DetectorPair::ALL {
                let (a, b) = pair.detectors();
                let (a, b) = (a as usize, b as usize);
                if click[a] && click[b] {
                    rec.coinc_same_pulse[pair as usize] += 1;
                }
                if prev[a] && click[b] {
                    rec.coinc_adjacent_pulse[pair as usize] += 1;
                }
            }
            prev = click;
        }
        rec
    }
}

/// Accidental-subtracted coincidence rate with its Poisson error, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueCoincidence {
    pub rate: f64,
    pub error: f64,
}

/// `(C_same_pulse - C_adjacent_pulse) · gate_rate / gates`.
pub fn true_coincidence(
    record: &CountRecord,
    pair: DetectorPair,
    gate_rate_hz: f64,
) -> Result<TrueCoincidence> {
    if record.gates == 0 {
        return Err(Error::InvalidArgument("record has no gates".into()));
    }
    let same = record.coinc_same_pulse[pair as usize] as f64;
    let adjacent = record.coinc_adjacent_pulse[pair as usize] as f64;
    let scale = gate_rate_hz / record.gates as f64;
    Ok(TrueCoincidence {
        rate: (same - adjacent) * scale,
        error: (same + adjacent).sqrt() * scale,
    })
}

/// Routing probabilities at a detuning, from the pointwise fringe phase or
/// its passband average.
pub fn routing_at(
    config: &SpectralConfig,
    delta_lambda: f64,
    averaged: bool,
) -> Result<[RoutingProbabilities; 2]> {
    if averaged {
        Ok([
            RoutingProbabilities::from_mean_cos(mean_cos_phase(config, delta_lambda, Routing::Same)?)?,
            RoutingProbabilities::from_mean_cos(mean_cos_phase(config, delta_lambda, Routing::Split)?)?,
        ])
    } else {
        let phi = fringe_phase(config.alpha, config.lambda_p0, delta_lambda)?;
        let r = RoutingProbabilities::from_mean_cos(phi.cos())?;
        Ok([r, r])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub power_mw: f64,
    pub same: TrueCoincidence,
    pub diff: TrueCoincidence,
    /// Counts of the same-port channel run; carries the singles.
    pub record: CountRecord,
}

/// Counts for the two coincidence channels under their own routing. When
/// both channels share one routing a single run feeds both.
pub fn simulate_channels(
    source: &SourceSpec,
    detectors: &[DetectorSpec; 3],
    routing: &[RoutingProbabilities; 2],
    n_gates: u64,
    seed: u64,
) -> Result<[CountRecord; 2]> {
    let [same_routing, split_routing] = routing;
    let same = simulate_counts(source, detectors, same_routing, n_gates, seed)?;
    let split = if split_routing == same_routing {
        same
    } else {
        simulate_counts(source, detectors, split_routing, n_gates, seed)?
    };
    Ok([same, split])
}

/// Runs the experiment at each pump power with the pair rate scaled
/// quadratically. `routing` holds the same-port and split channel routing,
/// as returned by [`routing_at`]. Power `k` uses seed `derive_seed(seed, k)`.
pub fn power_sweep(
    source: &SourceSpec,
    detectors: &[DetectorSpec; 3],
    routing: &[RoutingProbabilities; 2],
    powers: &[f64],
    n_gates: u64,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    if let Some(p) = powers.iter().find(|p| !p.is_finite() || **p <= 0.0) {
        return Err(Error::InvalidArgument(format!("pump powers must be > 0, got {p}")));
    }
    if powers.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("pump powers must be sorted".into()));
    }
    powers
        .iter()
        .enumerate()
        .map(|(k, &power)| {
            let src = source.with_power(power);
            let [same_rec, split_rec] =
                simulate_channels(&src, detectors, routing, n_gates, derive_seed(seed, k as u64))?;
            Ok(PowerPoint {
                power_mw: power,
                same: true_coincidence(&same_rec, DetectorPair::SameMode, src.gate_rate_hz)?,
                diff: true_coincidence(&split_rec, DetectorPair::SplitMode, src.gate_rate_hz)?,
                record: same_rec,
            })
        })
        .collect()
}

/// Simulated detuning sweep: at every grid point the routing follows the
/// fringe phase, both coincidence channels are accumulated and the true
/// coincidence rates and singles rates recorded. Grid point `k` uses seed
/// `derive_seed(seed, k)`.
///
/// With `averaged` the same-port channel is simulated with the routing
/// averaged over its own passbands and the split channel over its own, as the
/// two channels see different filters.
pub fn sweep_experiment(
    spectral: &SpectralConfig,
    source: &SourceSpec,
    detectors: &[DetectorSpec; 3],
    grid: &[f64],
    n_gates: u64,
    seed: u64,
    averaged: bool,
) -> Result<SweepCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("detuning grid is empty".into()));
    }
    if n_gates == 0 {
        return Err(Error::InvalidArgument("n_gates must be > 0".into()));
    }
    spectral.validate()?;
    let half = 0.5 * spectral.lambda_p0;
    if let Some(dl) = grid.iter().find(|&&dl| !(dl > 0.0 && dl < half)) {
        return Err(Error::InvalidArgument(format!(
            "grid detuning {dl} nm outside (0, {half}) nm"
        )));
    }
    let rate = source.gate_rate_hz;
    let points = grid
        .iter()
        .enumerate()
        .map(|(k, &dl)| {
            let routing = routing_at(spectral, dl, averaged)?;
            let [same_rec, split_rec] =
                simulate_channels(source, detectors, &routing, n_gates, derive_seed(seed, k as u64))?;
            let same = true_coincidence(&same_rec, DetectorPair::SameMode, rate)?;
            let diff = true_coincidence(&split_rec, DetectorPair::SplitMode, rate)?;
            let singles = [Spd::Spd1, Spd::Spd2, Spd::Spd3].map(|s| same_rec.singles_rate(s, rate));
            Ok(SweepPoint {
                delta_lambda: dl,
                c_t_same: same.rate,
                c_t_diff: diff.rate,
                err_same: Some(same.error),
                err_diff: Some(diff.error),
                singles: Some(singles),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepCurve::new(points)
}
