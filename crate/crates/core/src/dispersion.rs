//! Fiber dispersion: wave vectors, the dispersion-induced phase difference
//! between the two propagation directions of the loop, and detuning units.
//!
//! Wave vectors are truncated Taylor expansions around a per-fiber reference
//! wavelength. The constant `k0` term is dropped: it cancels in every
//! four-wave combination `k_p1 + k_p2 - k_s - k_i` because energy is
//! conserved.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::SPEED_OF_LIGHT_NM_PER_PS;

/// Relative tolerance on `omega_p1 + omega_p2 = omega_s + omega_i`.
pub const ENERGY_CONSERVATION_RTOL: f64 = 1e-12;

/// Angular frequency (rad/ps) of light at `lambda_nm`.
pub fn wavelength_to_omega(lambda_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT_NM_PER_PS / lambda_nm
}

/// Converts a small wavelength interval around `center_nm` to angular
/// frequency width (rad/ps).
pub fn bandwidth_to_omega(width_nm: f64, center_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT_NM_PER_PS * width_nm / (center_nm * center_nm)
}

/// One fiber segment described by its length and Taylor dispersion
/// coefficients at `lambda_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Length in m.
    pub length: f64,
    /// Expansion wavelength in nm.
    pub lambda_ref: f64,
    /// Inverse group velocity offset, ps/m.
    pub beta1: f64,
    /// Group-velocity dispersion, ps²/m.
    pub beta2: f64,
    /// Third-order dispersion, ps³/m.
    pub beta3: f64,
}

impl FiberSpec {
    pub fn new(length: f64, lambda_ref: f64, beta2: f64) -> Result<Self> {
        let fiber = Self {
            length,
            lambda_ref,
            beta1: 0.0,
            beta2,
            beta3: 0.0,
        };
        fiber.validate()?;
        Ok(fiber)
    }

    pub fn with_beta1(mut self, beta1: f64) -> Self {
        self.beta1 = beta1;
        self
    }

    pub fn with_beta3(mut self, beta3: f64) -> Self {
        self.beta3 = beta3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("lambda_ref", self.lambda_ref),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
        ] {
            ensure_finite(name, v)?;
        }
        if self.length < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "fiber length must be >= 0, got {}",
                self.length
            )));
        }
        if self.lambda_ref <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "reference wavelength must be > 0, got {}",
                self.lambda_ref
            )));
        }
        Ok(())
    }

    /// Expansion point in rad/ps.
    pub fn omega_ref(&self) -> f64 {
        wavelength_to_omega(self.lambda_ref)
    }
}

/// Pump, signal and idler angular frequencies (rad/ps) of one scattering
/// event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyQuad {
    pub omega_p1: f64,
    pub omega_p2: f64,
    pub omega_s: f64,
    pub omega_i: f64,
}

impl FrequencyQuad {
    pub fn new(omega_p1: f64, omega_p2: f64, omega_s: f64, omega_i: f64) -> Result<Self> {
        let quad = Self {
            omega_p1,
            omega_p2,
            omega_s,
            omega_i,
        };
        quad.check_energy_conservation()?;
        Ok(quad)
    }

    /// Single pump at `omega_p`, signal and idler at `omega_p ± delta_omega`.
    pub fn non_degenerate(omega_p: f64, delta_omega: f64) -> Result<Self> {
        Self::new(
            omega_p,
            omega_p,
            omega_p + delta_omega,
            omega_p - delta_omega,
        )
    }

    /// Two pumps at `omega_si ∓ delta_omega` creating degenerate photons at
    /// `omega_si`.
    pub fn degenerate(omega_si: f64, delta_omega: f64) -> Result<Self> {
        Self::new(
            omega_si - delta_omega,
            omega_si + delta_omega,
            omega_si,
            omega_si,
        )
    }

    pub fn check_energy_conservation(&self) -> Result<()> {
        for (name, v) in [
            ("omega_p1", self.omega_p1),
            ("omega_p2", self.omega_p2),
            ("omega_s", self.omega_s),
            ("omega_i", self.omega_i),
        ] {
            ensure_finite(name, v)?;
        }
        let pump = self.omega_p1 + self.omega_p2;
        let pair = self.omega_s + self.omega_i;
        let scale = pump.abs().max(pair.abs()).max(f64::MIN_POSITIVE);
        if (pump - pair).abs() > ENERGY_CONSERVATION_RTOL * scale {
            return Err(Error::InvalidArgument(format!(
                "energy not conserved: pumps sum to {pump} rad/ps, pair sums to {pair} rad/ps"
            )));
        }
        Ok(())
    }

    /// Pair detuning from the pump: `omega_s - omega_p` for one pump,
    /// `omega_si - omega_p1` for two pumps. Always returned as a magnitude.
    pub fn detuning(&self) -> f64 {
        let half_pair_split = 0.5 * (self.omega_s - self.omega_i);
        let half_pump_split = 0.5 * (self.omega_p2 - self.omega_p1);
        half_pair_split.abs().max(half_pump_split.abs())
    }
}

/// Wave vector relative to `k0` (rad/m) at angular frequency `omega`.
pub fn wavevector(fiber: &FiberSpec, omega: f64) -> Result<f64> {
    ensure_finite("omega", omega)?;
    if omega <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "angular frequency must be > 0, got {omega}"
        )));
    }
    fiber.validate()?;
    let dw = omega - fiber.omega_ref();
    Ok(dw * (fiber.beta1 + dw * (0.5 * fiber.beta2 + dw * fiber.beta3 / 6.0)))
}

/// `k_p1 + k_p2 - k_s - k_i` in one fiber, rad/m.
pub fn phase_mismatch(fiber: &FiberSpec, freqs: &FrequencyQuad) -> Result<f64> {
    freqs.check_energy_conservation()?;
    let k = |w| wavevector(fiber, w);
    Ok(k(freqs.omega_p1)? + k(freqs.omega_p2)? - k(freqs.omega_s)? - k(freqs.omega_i)?)
}

/// Dispersion-induced phase difference between the two directions, from the
/// four-wave mismatch accumulated in each pigtail:
/// `Δk(smf2)·L2 - Δk(smf1)·L1`.
///
/// For equal-dispersion pigtails this equals `-beta2·ΔΩ²·(L2 - L1)`, the
/// opposite sign of [`phi_d_approx`]. Every observable depends on `cos phi_d`
/// so both signs predict the same counts.
pub fn phi_d_exact(smf1: &FiberSpec, smf2: &FiberSpec, freqs: &FrequencyQuad) -> Result<f64> {
    Ok(phase_mismatch(smf2, freqs)? * smf2.length - phase_mismatch(smf1, freqs)? * smf1.length)
}

/// Short form `-ΔΩ²·beta2·(L1 - L2)` for pigtails sharing one `beta2`.
pub fn phi_d_approx(beta2: f64, l1: f64, l2: f64, delta_omega: f64) -> Result<f64> {
    for (name, v) in [("beta2", beta2), ("l1", l1), ("l2", l2), ("delta_omega", delta_omega)] {
        ensure_finite(name, v)?;
    }
    Ok(-delta_omega * delta_omega * beta2 * (l1 - l2))
}

/// Angular detuning `ΔΩ = 2πc·Δλ / (λ_p0·λ_i0)` with `λ_i0 = λ_p0 - Δλ`.
pub fn detuning_to_omega(delta_lambda: f64, lambda_p0: f64) -> Result<f64> {
    ensure_finite("delta_lambda", delta_lambda)?;
    ensure_finite("lambda_p0", lambda_p0)?;
    if lambda_p0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pump wavelength must be > 0, got {lambda_p0}"
        )));
    }
    if !(0.0..lambda_p0).contains(&delta_lambda) {
        return Err(Error::InvalidArgument(format!(
            "detuning must lie in [0, {lambda_p0}) nm, got {delta_lambda}"
        )));
    }
    let lambda_i0 = lambda_p0 - delta_lambda;
    Ok(TAU * SPEED_OF_LIGHT_NM_PER_PS * delta_lambda / (lambda_p0 * lambda_i0))
}

/// Inverse of [`detuning_to_omega`].
pub fn omega_to_detuning(delta_omega: f64, lambda_p0: f64) -> Result<f64> {
    ensure_finite("delta_omega", delta_omega)?;
    ensure_finite("lambda_p0", lambda_p0)?;
    if lambda_p0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "pump wavelength must be > 0, got {lambda_p0}"
        )));
    }
    if delta_omega < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "angular detuning must be >= 0, got {delta_omega}"
        )));
    }
    let two_pi_c = TAU * SPEED_OF_LIGHT_NM_PER_PS;
    Ok(delta_omega * lambda_p0 * lambda_p0 / (two_pi_c + delta_omega * lambda_p0))
}

/// Fraction of pump power the loop reflects, `cos²(phi_p / 2)`.
pub fn pump_reflectivity(phi_p: f64) -> f64 {
    let c = (0.5 * phi_p).cos();
    c * c
}

/// The whole loop: nonlinear fiber, the two dispersive pigtails, the coupler
/// and the pump phases set by the polarization controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    /// Pair-generating fiber. Carried as metadata; it adds no dispersive
    /// phase.
    pub nlf: FiberSpec,
    pub smf1: FiberSpec,
    pub smf2: FiberSpec,
    pub coupler_ratio: f64,
    pub phi_p1: f64,
    pub phi_p2: f64,
}

impl LoopConfig {
    pub const COUPLER_RATIO: f64 = 0.5;

    pub fn new(nlf: FiberSpec, smf1: FiberSpec, smf2: FiberSpec) -> Result<Self> {
        let cfg = Self {
            nlf,
            smf1,
            smf2,
            coupler_ratio: Self::COUPLER_RATIO,
            phi_p1: 0.0,
            phi_p2: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_pump_phases(mut self, phi_p1: f64, phi_p2: f64) -> Self {
        self.phi_p1 = phi_p1;
        self.phi_p2 = phi_p2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.nlf.validate()?;
        self.smf1.validate()?;
        self.smf2.validate()?;
        ensure_finite("phi_p1", self.phi_p1)?;
        ensure_finite("phi_p2", self.phi_p2)?;
        if self.coupler_ratio != Self::COUPLER_RATIO {
            return Err(Error::InvalidArgument(format!(
                "coupler ratio must be exactly 0.5, got {}",
                self.coupler_ratio
            )));
        }
        Ok(())
    }

    /// True when the pump phases cancel modulo 2π, i.e. the loop fully
    /// reflects the pump and the pair phase reduces to `phi_d`.
    pub fn hr_condition(&self) -> bool {
        let r = (self.phi_p1 + self.phi_p2).rem_euclid(TAU);
        r.min(TAU - r) <= 1e-12
    }

    /// `beta2'·L2 - beta2·L1` in ps². Equals `beta2·(L2 - L1)` for identical
    /// pigtails.
    pub fn effective_alpha(&self) -> f64 {
        self.smf2.beta2 * self.smf2.length - self.smf1.beta2 * self.smf1.length
    }

    pub fn phi_d(&self, freqs: &FrequencyQuad) -> Result<f64> {
        phi_d_exact(&self.smf1, &self.smf2, freqs)
    }
}
