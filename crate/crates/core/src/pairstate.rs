//! Two-photon output state of the loop and its routing statistics.
//!
//! After recombination the pair is in `cos(φ/2)|ψ₁⟩ + sin(φ/2)|ψ₂⟩` where
//! `|ψ₁⟩` puts signal and idler together in port a or port b and `|ψ₂⟩`
//! splits them across the ports.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::dispersion::{phi_d_approx, LoopConfig};
use crate::error::{ensure_finite, Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Which port pattern a pair takes, also used to label the two coincidence
/// branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routing {
    /// Signal and idler leave through the same port.
    Same,
    /// Signal and idler leave through different ports.
    Split,
}

impl Routing {
    /// Phase realizing this routing at order `n`: `(2n+1)π` for split,
    /// `2(n+1)π` for same. The trivial `φ = 0` is skipped since it needs zero
    /// detuning.
    pub fn target_phase(self, n: u32) -> f64 {
        let n = n as f64;
        match self {
            Routing::Split => (2.0 * n + 1.0) * PI,
            Routing::Same => 2.0 * (n + 1.0) * PI,
        }
    }

    /// `+1` for the same-port branch, `-1` for the split branch, as it
    /// multiplies `cos φ` in the fringe.
    pub fn sign(self) -> f64 {
        match self {
            Routing::Same => 1.0,
            Routing::Split => -1.0,
        }
    }
}

/// Real amplitudes of the four port outcomes of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    /// Signal and idler both in port a.
    pub amp_same_a: f64,
    /// Signal and idler both in port b.
    pub amp_same_b: f64,
    /// Signal in a, idler in b.
    pub amp_split_sa_ib: f64,
    /// Idler in a, signal in b.
    pub amp_split_ia_sb: f64,
    /// Total phase the state was built from.
    pub phi: f64,
}

impl TwoPhotonState {
    pub fn norm_sqr(&self) -> f64 {
        self.amp_same_a * self.amp_same_a
            + self.amp_same_b * self.amp_same_b
            + self.amp_split_sa_ib * self.amp_split_sa_ib
            + self.amp_split_ia_sb * self.amp_split_ia_sb
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm² is {n}, expected 1"
            )));
        }
        Ok(())
    }
}

pub fn output_state(phi: f64) -> TwoPhotonState {
    let (s, c) = (0.5 * phi).sin_cos();
    TwoPhotonState {
        amp_same_a: c * FRAC_1_SQRT_2,
        amp_same_b: c * FRAC_1_SQRT_2,
        amp_split_sa_ib: s * FRAC_1_SQRT_2,
        amp_split_ia_sb: s * FRAC_1_SQRT_2,
        phi,
    }
}

/// `φ = φ_p1 + φ_p2 + φ_d`; exactly `φ_d` when the loop is a pump
/// high-reflector.
pub fn total_phase(loop_cfg: &LoopConfig, phi_d: f64) -> f64 {
    if loop_cfg.hr_condition() {
        phi_d
    } else {
        loop_cfg.phi_p1 + loop_cfg.phi_p2 + phi_d
    }
}

/// Probabilities of the two routing outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingProbabilities {
    pub p_same: f64,
    pub p_diff: f64,
}

impl RoutingProbabilities {
    /// From the (possibly passband-averaged) value of `cos φ`.
    pub fn from_mean_cos(mean_cos: f64) -> Result<Self> {
        ensure_finite("mean_cos", mean_cos)?;
        if mean_cos.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!(
                "mean of cos φ must lie in [-1, 1], got {mean_cos}"
            )));
        }
        let c = mean_cos.clamp(-1.0, 1.0);
        Ok(Self {
            p_same: 0.5 * (1.0 + c),
            p_diff: 0.5 * (1.0 - c),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_same)
            && (0.0..=1.0).contains(&self.p_diff)
            && (self.p_same + self.p_diff - 1.0).abs() <= 1e-12;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "routing probabilities ({}, {}) are not a distribution",
                self.p_same, self.p_diff
            )))
        }
    }

    pub fn get(&self, routing: Routing) -> f64 {
        match routing {
            Routing::Same => self.p_same,
            Routing::Split => self.p_diff,
        }
    }
}

pub fn routing_probabilities(state: &TwoPhotonState) -> Result<RoutingProbabilities> {
    state.check_normalized()?;
    let p_same =
        state.amp_same_a * state.amp_same_a + state.amp_same_b * state.amp_same_b;
    let p_diff = state.amp_split_sa_ib * state.amp_split_sa_ib
        + state.amp_split_ia_sb * state.amp_split_ia_sb;
    // renormalize away the rounding in the squares
    let total = p_same + p_diff;
    Ok(RoutingProbabilities {
        p_same: p_same / total,
        p_diff: p_diff / total,
    })
}

/// Probability of finding each photon in port a and port b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortMarginals {
    /// `[P(signal in a), P(signal in b)]`
    pub signal: [f64; 2],
    /// `[P(idler in a), P(idler in b)]`
    pub idler: [f64; 2],
}

pub fn single_counts_marginal(state: &TwoPhotonState) -> Result<PortMarginals> {
    state.check_normalized()?;
    let sq = |x: f64| x * x;
    let same_a = sq(state.amp_same_a);
    let same_b = sq(state.amp_same_b);
    let sa_ib = sq(state.amp_split_sa_ib);
    let ia_sb = sq(state.amp_split_ia_sb);
    Ok(PortMarginals {
        signal: [same_a + sa_ib, same_b + ia_sb],
        idler: [same_a + ia_sb, same_b + sa_ib],
    })
}

/// Angular detuning (rad/ps) at which `|φ_d|` from the short dispersion form
/// reaches the phase of `target` at order `n`:
/// `ΔΩ = sqrt(|target_phase / (beta2·(L2 - L1))|)`.
pub fn switching_detuning(beta2: f64, l1: f64, l2: f64, n: u32, target: Routing) -> Result<f64> {
    for (name, v) in [("beta2", beta2), ("l1", l1), ("l2", l2)] {
        ensure_finite(name, v)?;
    }
    let alpha = beta2 * (l2 - l1);
    if alpha == 0.0 {
        return Err(Error::NoSwitching(format!(
            "beta2·(L2 - L1) is zero (beta2 = {beta2}, L1 = {l1}, L2 = {l2})"
        )));
    }
    let omega = (target.target_phase(n) / alpha.abs()).sqrt();
    debug_assert!(
        (phi_d_approx(beta2, l1, l2, omega).unwrap().abs() - target.target_phase(n)).abs()
            < 1e-9 * target.target_phase(n)
    );
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::FiberSpec;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn amps(s: &TwoPhotonState) -> [f64; 4] {
        [s.amp_same_a, s.amp_same_b, s.amp_split_sa_ib, s.amp_split_ia_sb]
    }

    fn close(a: [f64; 4], b: [f64; 4]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn output_state_at_special_phases() {
        let h = FRAC_1_SQRT_2;
        assert!(close(amps(&output_state(0.0)), [h, h, 0.0, 0.0]));
        assert!(close(amps(&output_state(PI)), [0.0, 0.0, h, h]));
        assert!(close(amps(&output_state(PI / 2.0)), [0.5; 4]));
    }

    #[test]
    fn total_phase_examples() {
        let f = FiberSpec::new(1.0, 1547.5, -0.02175).unwrap();
        let lc = LoopConfig::new(f, f, f).unwrap();
        assert_eq!(total_phase(&lc, PI), PI);
        assert_eq!(total_phase(&lc.with_pump_phases(0.3, -0.3), 1.0), 1.0);
        let flipped = total_phase(&lc.with_pump_phases(PI / 2.0, PI / 2.0), 0.0);
        assert_eq!(flipped, PI);
        let p = routing_probabilities(&output_state(flipped)).unwrap();
        assert!((p.p_diff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn routing_examples() {
        let p = routing_probabilities(&output_state(0.0)).unwrap();
        assert_eq!((p.p_same, p.p_diff), (1.0, 0.0));
        let p = routing_probabilities(&output_state(PI)).unwrap();
        assert!(p.p_same < 1e-30 && (p.p_diff - 1.0).abs() < 1e-15);
        let p = routing_probabilities(&output_state(3.154)).unwrap();
        assert!((p.p_diff - 0.5 * (1.0 - 3.154f64.cos())).abs() < 1e-15);
        assert!((p.p_diff - 0.99996).abs() < 1e-5);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let mut s = output_state(0.4);
        s.amp_same_a *= 1.1;
        assert!(matches!(routing_probabilities(&s), Err(Error::InvalidState(_))));
        assert!(single_counts_marginal(&s).is_err());
    }

    #[test]
    fn marginals_are_flat() {
        for i in 0..1000 {
            let phi = -10.0 + 20.0 * i as f64 / 999.0;
            let s = output_state(phi);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(s.amp_same_a * SQRT_2, (0.5 * phi).cos() * FRAC_1_SQRT_2 * SQRT_2);
            let m = single_counts_marginal(&s).unwrap();
            for p in m.signal.iter().chain(&m.idler) {
                assert!((p - 0.5).abs() < 1e-12, "phi={phi}: {p}");
            }
            let r = routing_probabilities(&s).unwrap();
            assert!((r.p_same + r.p_diff - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn switching_detuning_examples() {
        let d = switching_detuning(-0.02175, 3.0, 1.0, 0, Routing::Split).unwrap();
        assert!((d - (PI / 0.0435).sqrt()).abs() < 1e-12);
        assert!((d - 8.499).abs() < 1e-3);
        let s = switching_detuning(-0.02175, 3.0, 1.0, 0, Routing::Same).unwrap();
        assert!((s - 12.02).abs() < 5e-3, "{s}");
        assert!(matches!(
            switching_detuning(-0.02175, 2.0, 2.0, 0, Routing::Split),
            Err(Error::NoSwitching(_))
        ));
        assert!(switching_detuning(0.0, 3.0, 1.0, 0, Routing::Split).is_err());
    }

    #[test]
    fn switching_detunings_interleave_and_scale() {
        let d = |n, r| switching_detuning(-0.02175, 3.0, 1.0, n, r).unwrap();
        let d0 = d(0, Routing::Split);
        for n in 0..20 {
            assert!(d(n, Routing::Split) < d(n, Routing::Same));
            assert!(d(n, Routing::Same) < d(n + 1, Routing::Split));
            let ratio = d(n, Routing::Split) / d0;
            assert!((ratio - (2.0 * n as f64 + 1.0).sqrt()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn routing_is_periodic_and_complementary(phi in -50.0f64..50.0) {
            let p = routing_probabilities(&output_state(phi)).unwrap();
            let q = routing_probabilities(&output_state(phi + 2.0 * PI)).unwrap();
            let r = routing_probabilities(&output_state(phi + PI)).unwrap();
            prop_assert!((p.p_same - q.p_same).abs() < 1e-12);
            prop_assert!((p.p_same - r.p_diff).abs() < 1e-12);
            prop_assert!((p.p_same - 0.5 * (1.0 + phi.cos())).abs() < 1e-12);
        }

        #[test]
        fn switching_round_trip(
            beta2 in -0.05f64..-1e-4,
            l1 in 0.0f64..10.0,
            dl in 0.1f64..10.0,
            n in 0u32..10,
        ) {
            let l2 = l1 + dl;
            let w = switching_detuning(beta2, l1, l2, n, Routing::Split).unwrap();
            let phi = phi_d_approx(beta2, l1, l2, w).unwrap();
            prop_assert!((phi.abs() - (2.0 * n as f64 + 1.0) * PI).abs() < 1e-12 * (1.0 + phi.abs()));
        }
    }
}
