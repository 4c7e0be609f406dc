//! Inverse design: which length imbalance or detuning realizes a routing
//! target, and how quickly the contrast degrades away from it.

use serde::{Deserialize, Serialize};

use crate::dispersion::{detuning_to_omega, omega_to_detuning};
use crate::error::{ensure_finite, Error, Result};
use crate::pairstate::Routing;
use crate::spectral::{contrast_ratio, fringe_argument_root, SpectralConfig};

/// What to solve for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignUnknown {
    /// Given a detuning (nm), find `L2 - L1`.
    LengthDifference { delta_lambda: f64 },
    /// Given `L2 - L1` (m), find the detuning.
    Detuning { length_difference: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTarget {
    pub routing: Routing,
    pub order: u32,
    pub unknown: DesignUnknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthSolution {
    /// `|L2 - L1|`, m.
    pub magnitude: f64,
    /// Phase the imbalance produces at the requested detuning, rad.
    pub target_phase: f64,
}

impl LengthSolution {
    /// Both signs of `L2 - L1` work since only `cos φ_d` is observed.
    pub fn solutions(&self) -> [f64; 2] {
        [self.magnitude, -self.magnitude]
    }
}

/// `|L2 - L1| = target_phase / (|beta2| · ΔΩ²)`.
pub fn solve_length_difference(
    beta2: f64,
    delta_lambda: f64,
    lambda_p0: f64,
    n: u32,
    target: Routing,
) -> Result<LengthSolution> {
    ensure_finite("beta2", beta2)?;
    if beta2 == 0.0 {
        return Err(Error::NoSolution("beta2 is zero, dispersion cannot set the phase".into()));
    }
    if delta_lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "detuning must be > 0, got {delta_lambda}"
        )));
    }
    let w = detuning_to_omega(delta_lambda, lambda_p0)?;
    let target_phase = target.target_phase(n);
    Ok(LengthSolution {
        magnitude: target_phase / (beta2.abs() * w * w),
        target_phase,
    })
}

/// Resolves a [`DesignTarget`] for pigtails sharing `beta2`. Returns the
/// unknown: `|L2 - L1|` in m or the detuning in nm.
pub fn solve(beta2: f64, lambda_p0: f64, target: &DesignTarget) -> Result<f64> {
    match target.unknown {
        DesignUnknown::LengthDifference { delta_lambda } => Ok(solve_length_difference(
            beta2,
            delta_lambda,
            lambda_p0,
            target.order,
            target.routing,
        )?
        .magnitude),
        DesignUnknown::Detuning { length_difference } => {
            let w = crate::pairstate::switching_detuning(
                beta2,
                0.0,
                length_difference,
                target.order,
                target.routing,
            )?;
            omega_to_detuning(w, lambda_p0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingRow {
    pub n: u32,
    /// Detuning (nm) routing pairs to different ports, `None` if unreachable.
    pub delta_lambda_diff: Option<f64>,
    /// Detuning (nm) routing pairs to the same port, `None` if unreachable.
    pub delta_lambda_same: Option<f64>,
    pub phase_diff: f64,
    pub phase_same: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwitchingTable {
    pub rows: Vec<SwitchingRow>,
}

/// Switching detunings for orders `0..=n_max`.
///
/// Each detuning is seeded from the closed form `ΔΩ = sqrt(φ/|α|)` and
/// refined by root finding on the fringe phase with the exact `λ_i0`
/// dependence. Rows beyond `λ_p0 / 2` are kept with `None` entries.
pub fn switching_table(
    beta2: f64,
    l1: f64,
    l2: f64,
    lambda_p0: f64,
    n_max: u32,
) -> Result<SwitchingTable> {
    for (name, v) in [("beta2", beta2), ("l1", l1), ("l2", l2), ("lambda_p0", lambda_p0)] {
        ensure_finite(name, v)?;
    }
    if lambda_p0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pump wavelength must be > 0, got {lambda_p0}"
        )));
    }
    let alpha = beta2 * (l2 - l1);
    let config = SpectralConfig {
        lambda_p0,
        alpha,
        ..SpectralConfig::measured_setup()
    };
    let limit = 0.5 * lambda_p0;
    let locate = |phase: f64| -> Result<Option<f64>> {
        if alpha == 0.0 {
            return Ok(None);
        }
        let seed = omega_to_detuning((phase / alpha.abs()).sqrt(), lambda_p0)?;
        if seed >= limit {
            return Ok(None);
        }
        let lo = 0.9 * seed;
        let hi = (1.1 * seed).min(limit * (1.0 - 1e-12));
        Ok(Some(fringe_argument_root(&config, phase, (lo, hi))?))
    };
    let rows = (0..=n_max)
        .map(|n| {
            let phase_diff = Routing::Split.target_phase(n);
            let phase_same = Routing::Same.target_phase(n);
            Ok(SwitchingRow {
                n,
                delta_lambda_diff: locate(phase_diff)?,
                delta_lambda_same: locate(phase_same)?,
                phase_diff,
                phase_same,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SwitchingTable { rows })
}

/// Averaged contrast just below, at and just above a nominal detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastSensitivity {
    pub below: f64,
    pub nominal: f64,
    pub above: f64,
}

pub fn detuning_sensitivity(
    config: &SpectralConfig,
    delta_lambda_nominal: f64,
    delta: f64,
) -> Result<ContrastSensitivity> {
    ensure_finite("delta", delta)?;
    Ok(ContrastSensitivity {
        below: contrast_ratio(config, delta_lambda_nominal - delta, true)?,
        nominal: contrast_ratio(config, delta_lambda_nominal, true)?,
        above: contrast_ratio(config, delta_lambda_nominal + delta, true)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairstate::switching_detuning;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const BETA2: f64 = -0.02175;
    const LP0: f64 = 1547.5;

    #[test]
    fn length_difference_examples() {
        let s = solve_length_difference(BETA2, 10.75, LP0, 0, Routing::Split).unwrap();
        let w = detuning_to_omega(10.75, LP0).unwrap();
        assert!((s.magnitude - PI / (0.02175 * w * w)).abs() < 1e-12);
        assert!((s.magnitude - 1.99).abs() < 0.01, "{}", s.magnitude);
        assert_eq!(s.solutions(), [s.magnitude, -s.magnitude]);
        // doubling the target phase doubles the imbalance
        let s2 = solve_length_difference(BETA2, 10.75, LP0, 0, Routing::Same).unwrap();
        assert!((s2.magnitude / s.magnitude - 2.0).abs() < 1e-12);
        assert!(matches!(
            solve_length_difference(0.0, 10.75, LP0, 0, Routing::Split),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn table_for_measured_loop() {
        let t = switching_table(BETA2, 3.0, 1.0, LP0, 2).unwrap();
        assert_eq!(t.rows.len(), 3);
        let r0 = t.rows[0];
        assert!((r0.delta_lambda_diff.unwrap() - 10.73).abs() < 5e-3);
        assert!((r0.delta_lambda_same.unwrap() - 15.13).abs() < 5e-3);
        let ratio = r0.delta_lambda_same.unwrap() / r0.delta_lambda_diff.unwrap();
        assert!((1.40..=1.42).contains(&ratio), "{ratio}");
        let r1 = t.rows[1].delta_lambda_diff.unwrap();
        assert!(r1 < r0.delta_lambda_diff.unwrap() * 3f64.sqrt());
        assert!((r1 - 18.5).abs() < 0.05, "{r1}");
        for w in t.rows.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(a.delta_lambda_diff < a.delta_lambda_same);
            assert!(a.delta_lambda_same < b.delta_lambda_diff);
        }
    }

    #[test]
    fn balanced_loop_is_unreachable() {
        let t = switching_table(BETA2, 2.0, 2.0, LP0, 3).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(t
            .rows
            .iter()
            .all(|r| r.delta_lambda_diff.is_none() && r.delta_lambda_same.is_none()));
    }

    #[test]
    fn far_orders_are_marked_unreachable() {
        // tiny imbalance pushes high orders past λ_p0/2
        let t = switching_table(BETA2, 1.0, 1.0001, LP0, 40).unwrap();
        assert!(t.rows[0].delta_lambda_diff.is_some());
        assert!(t.rows.last().unwrap().delta_lambda_same.is_none());
        assert_eq!(t.rows.len(), 41);
    }

    #[test]
    fn solve_dispatches_both_unknowns() {
        let lt = DesignTarget {
            routing: Routing::Split,
            order: 0,
            unknown: DesignUnknown::LengthDifference { delta_lambda: 10.75 },
        };
        let dl = solve(BETA2, LP0, &lt).unwrap();
        let back = DesignTarget {
            unknown: DesignUnknown::Detuning { length_difference: dl },
            ..lt
        };
        assert!((solve(BETA2, LP0, &back).unwrap() - 10.75).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_examples() {
        let c = SpectralConfig::measured_setup();
        let s = detuning_sensitivity(&c, 12.0, 0.0).unwrap();
        assert_eq!(s.below, s.nominal);
        assert_eq!(s.above, s.nominal);

        let root = switching_table(BETA2, 3.0, 1.0, LP0, 0).unwrap().rows[0]
            .delta_lambda_same
            .unwrap();
        let at_root = contrast_ratio(&c, root, true).unwrap();
        let offset = contrast_ratio(&c, 15.2, true).unwrap();
        assert!(offset < at_root, "{offset} vs {at_root}");

        let s = detuning_sensitivity(&c, root, 15.2 - root).unwrap();
        assert_eq!(s.above, offset);
        assert!(s.above < s.nominal);
    }

    proptest! {
        #[test]
        fn design_round_trip(dl in 2.0f64..40.0, n in 0u32..5, same in any::<bool>()) {
            let target = if same { Routing::Same } else { Routing::Split };
            let s = solve_length_difference(BETA2, dl, LP0, n, target).unwrap();
            let w = switching_detuning(BETA2, 0.0, s.magnitude, n, target).unwrap();
            let back = omega_to_detuning(w, LP0).unwrap();
            prop_assert!((back / dl - 1.0).abs() < 1e-9);
        }
    }
}
