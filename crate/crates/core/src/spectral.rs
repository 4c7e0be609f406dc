//! Wavelength-domain model of the coincidence fringes.
//!
//! With `α = beta2·(L2 - L1)` and wavelength detuning `Δλ = λ_p0 - λ_i0`,
//! the true coincidence rate of the two branches is
//!
//! ```text
//! C_T = ξ · [1 ± cos(α · ΔΩ²)],   ΔΩ = 2πc·Δλ / (λ_i0 · λ_p0)
//! ```
//!
//! with `+` for signal and idler leaving through the same port and `-` for
//! split ports. [`bandwidth_averaged_fringe`] replaces `cos` by its average
//! over the filter passbands and the pump spectrum.

use serde::{Deserialize, Serialize};

use crate::dispersion::{bandwidth_to_omega, detuning_to_omega, wavelength_to_omega};
use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{brent, gauss_legendre, solve_dense};
use crate::pairstate::Routing;

/// Gaussian passbands are truncated at this many FWHM from their center.
const GAUSSIAN_SUPPORT_FWHM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    #[default]
    Rectangular,
    Gaussian,
}

/// A band-pass filter.
///
/// For the signal and idler filters only `fwhm` and `shape` enter the model:
/// they are retuned to the nominal signal and idler wavelengths of every
/// detuning, as in a sweep where both filters track the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Center wavelength, nm.
    pub center: f64,
    /// Full width at half maximum, nm.
    pub fwhm: f64,
    pub shape: FilterShape,
}

impl FilterSpec {
    pub fn new(center: f64, fwhm: f64, shape: FilterShape) -> Result<Self> {
        let f = Self { center, fwhm, shape };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("filter center", self.center)?;
        ensure_finite("filter fwhm", self.fwhm)?;
        if self.center <= 0.0 || self.fwhm <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "filter center and fwhm must be > 0, got center {} nm, fwhm {} nm",
                self.center, self.fwhm
            )));
        }
        Ok(())
    }
}

/// Everything the wavelength-domain fringe model needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Pump center wavelength, nm.
    pub lambda_p0: f64,
    pub pump_filter: FilterSpec,
    /// Signal band of the dual-band filter in port a.
    pub signal_filter: FilterSpec,
    /// Idler band of the dual-band filter in port a.
    pub idler_filter: FilterSpec,
    /// Idler filter in port b, used by the split-port branch.
    pub split_idler_filter: FilterSpec,
    /// `beta2·(L2 - L1)`, ps².
    pub alpha: f64,
    /// Fringe amplitude of the same-port branch, 1/s.
    pub xi_same: f64,
    /// Fringe amplitude of the split-port branch, 1/s.
    pub xi_diff: f64,
    /// Gauss-Legendre points per integration dimension.
    pub quadrature_order: usize,
}

impl SpectralConfig {
    pub const DEFAULT_QUADRATURE_ORDER: usize = 16;

    /// The measured setup: 1547.5 nm pump behind a 0.9 nm filter, 0.7 nm
    /// dual-band filter in port a, 1.3 nm idler filter in port b,
    /// `α = 0.0435 ps²`, `ξ = 29.5 / 32.3 s⁻¹`.
    pub fn measured_setup() -> Self {
        let lambda_p0 = 1547.5;
        let band = |center, fwhm| FilterSpec {
            center,
            fwhm,
            shape: FilterShape::Rectangular,
        };
        Self {
            lambda_p0,
            pump_filter: band(lambda_p0, 0.9),
            signal_filter: band(lambda_p0 + 10.75, 0.7),
            idler_filter: band(lambda_p0 - 10.75, 0.7),
            split_idler_filter: band(lambda_p0 - 10.75, 1.3),
            alpha: 0.0435,
            xi_same: 29.5,
            xi_diff: 32.3,
            quadrature_order: Self::DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("lambda_p0", self.lambda_p0)?;
        if self.lambda_p0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda_p0 must be > 0, got {}",
                self.lambda_p0
            )));
        }
        for f in [
            &self.pump_filter,
            &self.signal_filter,
            &self.idler_filter,
            &self.split_idler_filter,
        ] {
            f.validate()?;
        }
        ensure_finite("alpha", self.alpha)?;
        for (name, xi) in [("xi_same", self.xi_same), ("xi_diff", self.xi_diff)] {
            ensure_finite(name, xi)?;
            if xi < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {xi}")));
            }
        }
        if self.quadrature_order < 2 {
            return Err(Error::InvalidConfig(format!(
                "quadrature order must be >= 2, got {}",
                self.quadrature_order
            )));
        }
        Ok(())
    }

    pub fn xi(&self, branch: Routing) -> f64 {
        match branch {
            Routing::Same => self.xi_same,
            Routing::Split => self.xi_diff,
        }
    }

    pub fn params(&self) -> FringeParams {
        FringeParams {
            xi_same: self.xi_same,
            xi_diff: self.xi_diff,
            alpha: self.alpha,
        }
    }

    fn branch_filters(&self, branch: Routing) -> (&FilterSpec, &FilterSpec) {
        match branch {
            Routing::Same => (&self.signal_filter, &self.idler_filter),
            Routing::Split => (&self.signal_filter, &self.split_idler_filter),
        }
    }
}

fn check_detuning(lambda_p0: f64, delta_lambda: f64) -> Result<()> {
    ensure_finite("delta_lambda", delta_lambda)?;
    if delta_lambda <= 0.0 || delta_lambda >= lambda_p0 {
        return Err(Error::InvalidArgument(format!(
            "detuning must lie in (0, {lambda_p0}) nm, got {delta_lambda}"
        )));
    }
    Ok(())
}

/// Fringe phase `|α|·ΔΩ²` at the filter centers. The sign of the cosine
/// argument is dropped since the fringe depends on it only through `cos`.
pub fn fringe_phase(alpha: f64, lambda_p0: f64, delta_lambda: f64) -> Result<f64> {
    let w = detuning_to_omega(delta_lambda, lambda_p0)?;
    Ok(alpha.abs() * w * w)
}

/// Pointwise fringe `ξ[1 ± cos φ]` at the center detuning.
pub fn fringe_model(config: &SpectralConfig, delta_lambda: f64, branch: Routing) -> Result<f64> {
    check_detuning(config.lambda_p0, delta_lambda)?;
    let phi = fringe_phase(config.alpha, config.lambda_p0, delta_lambda)?;
    Ok(config.xi(branch) * (1.0 + branch.sign() * phi.cos()))
}

/// Detuning (nm) inside `bracket` where the fringe phase equals
/// `target_phase`, to 1e-10 rad.
pub fn fringe_argument_root(
    config: &SpectralConfig,
    target_phase: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    ensure_finite("target_phase", target_phase)?;
    let (lo, hi) = bracket;
    check_detuning(config.lambda_p0, lo)?;
    check_detuning(config.lambda_p0, hi)?;
    if lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "bracket must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let residual = |dl: f64| {
        fringe_phase(config.alpha, config.lambda_p0, dl)
            .map(|p| p - target_phase)
            .unwrap_or(f64::NAN)
    };
    let root = brent(residual, lo, hi, 1e-12, 200)?;
    if residual(root).abs() >= 1e-10 {
        return Err(Error::NoSolution(format!(
            "root refinement stalled at {root} nm (residual {})",
            residual(root)
        )));
    }
    Ok(root)
}

/// One passband in angular frequency offset (rad/ps) from its center.
#[derive(Debug, Clone, Copy)]
struct Passband {
    half_support: f64,
    fwhm: f64,
    shape: FilterShape,
}

impl Passband {
    fn new(filter: &FilterSpec, center_nm: f64) -> Self {
        let fwhm = bandwidth_to_omega(filter.fwhm, center_nm);
        let half_support = match filter.shape {
            FilterShape::Rectangular => 0.5 * fwhm,
            FilterShape::Gaussian => GAUSSIAN_SUPPORT_FWHM * fwhm,
        };
        Self {
            half_support,
            fwhm,
            shape: filter.shape,
        }
    }

    fn weight(&self, x: f64) -> f64 {
        match self.shape {
            FilterShape::Rectangular => 1.0,
            FilterShape::Gaussian => {
                let r = x / self.fwhm;
                (-4.0 * std::f64::consts::LN_2 * r * r).exp()
            }
        }
    }
}

/// Average of `cos φ` over the pairs a coincidence measurement accepts.
///
/// The idler sits at offset `u` inside its passband, the pair's center
/// frequency at offset `δ` from the pump center with weight equal to the pump
/// filter squared (two pump photons), and the signal at `2δ - u` inside its
/// passband by energy conservation. The phase of such a pair is
/// `α·(ΔΩ + δ - u)²`. The region cut out by the three supports is a polygon;
/// the outer `u` integral is split at its corners so every piece is smooth
/// and Gauss-Legendre converges geometrically.
pub fn mean_cos_phase(config: &SpectralConfig, delta_lambda: f64, branch: Routing) -> Result<f64> {
    config.validate()?;
    check_detuning(config.lambda_p0, delta_lambda)?;
    let (nodes, weights) = gauss_legendre(config.quadrature_order)?;

    let lambda_p0 = config.lambda_p0;
    let lambda_i0 = lambda_p0 - delta_lambda;
    let omega_p0 = wavelength_to_omega(lambda_p0);
    let omega_i0 = wavelength_to_omega(lambda_i0);
    let lambda_s0 = wavelength_to_omega(1.0) / (2.0 * omega_p0 - omega_i0);
    let center = detuning_to_omega(delta_lambda, lambda_p0)?;

    let (signal_filter, idler_filter) = config.branch_filters(branch);
    let pump = Passband::new(&config.pump_filter, lambda_p0);
    let signal = Passband::new(signal_filter, lambda_s0);
    let idler = Passband::new(idler_filter, lambda_i0);
    let (hp, hs, hi) = (pump.half_support, signal.half_support, idler.half_support);

    let mut breaks = vec![-hi, hi];
    for b in [-2.0 * hp - hs, hs - 2.0 * hp, 2.0 * hp - hs, 2.0 * hp + hs] {
        if b > -hi && b < hi {
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let gl = |a: f64, b: f64, f: &mut dyn FnMut(f64, f64)| {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in nodes.iter().zip(&weights) {
            f(mid + half * x, half * w);
        }
    };

    let mut num = 0.0;
    let mut den = 0.0;
    for seg in breaks.windows(2) {
        gl(seg[0], seg[1], &mut |u, wu| {
            let lo = (-hp).max(0.5 * (u - hs));
            let hi_d = hp.min(0.5 * (u + hs));
            if hi_d <= lo {
                return;
            }
            let wi = idler.weight(u);
            gl(lo, hi_d, &mut |d, wd| {
                let wp = pump.weight(d);
                let w = wu * wd * wi * wp * wp * signal.weight(2.0 * d - u);
                let dw = center + d - u;
                num += w * (config.alpha * dw * dw).cos();
                den += w;
            });
        });
    }
    if den <= 0.0 {
        return Err(Error::InvalidConfig(
            "filter passbands do not overlap with the pump spectrum".into(),
        ));
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Fringe `ξ[1 ± ⟨cos φ⟩]` with `⟨·⟩` the passband average of
/// [`mean_cos_phase`].
pub fn bandwidth_averaged_fringe(
    config: &SpectralConfig,
    delta_lambda: f64,
    branch: Routing,
) -> Result<f64> {
    let c = mean_cos_phase(config, delta_lambda, branch)?;
    Ok(config.xi(branch) * (1.0 + branch.sign() * c))
}

/// Favored over suppressed branch rate. `f64::INFINITY` when the suppressed
/// branch vanishes.
pub fn contrast_ratio(config: &SpectralConfig, delta_lambda: f64, averaged: bool) -> Result<f64> {
    let eval = |b| {
        if averaged {
            bandwidth_averaged_fringe(config, delta_lambda, b)
        } else {
            fringe_model(config, delta_lambda, b)
        }
    };
    let same = eval(Routing::Same)?;
    let diff = eval(Routing::Split)?;
    let (hi, lo) = if same >= diff { (same, diff) } else { (diff, same) };
    if lo <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(hi / lo)
    }
}

/// One detuning of a coincidence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepPoint {
    /// nm
    pub delta_lambda: f64,
    /// 1/s
    pub c_t_same: f64,
    /// 1/s
    pub c_t_diff: f64,
    pub err_same: Option<f64>,
    pub err_diff: Option<f64>,
    /// Single-count rates of SPD1..SPD3 (1/s), present for simulated sweeps.
    pub singles: Option<[f64; 3]>,
}

impl SweepPoint {
    pub fn new(delta_lambda: f64, c_t_same: f64, c_t_diff: f64) -> Self {
        Self {
            delta_lambda,
            c_t_same,
            c_t_diff,
            ..Self::default()
        }
    }

    pub fn get(&self, branch: Routing) -> f64 {
        match branch {
            Routing::Same => self.c_t_same,
            Routing::Split => self.c_t_diff,
        }
    }
}

/// Sweep points with strictly increasing detuning.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepCurve {
    points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn new(points: Vec<SweepPoint>) -> Result<Self> {
        for p in &points {
            ensure_finite("delta_lambda", p.delta_lambda)?;
        }
        if let Some(w) = points.windows(2).find(|w| w[1].delta_lambda <= w[0].delta_lambda) {
            return Err(Error::InvalidArgument(format!(
                "sweep detunings must be strictly increasing ({} nm followed by {} nm)",
                w[0].delta_lambda, w[1].delta_lambda
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<SweepPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Analytic sweep over `grid`, pointwise or passband-averaged.
pub fn analytic_sweep(config: &SpectralConfig, grid: &[f64], averaged: bool) -> Result<SweepCurve> {
    let points = grid
        .iter()
        .map(|&dl| {
            let eval = |b| {
                if averaged {
                    bandwidth_averaged_fringe(config, dl, b)
                } else {
                    fringe_model(config, dl, b)
                }
            };
            Ok(SweepPoint::new(dl, eval(Routing::Same)?, eval(Routing::Split)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepCurve::new(points)
}

/// Parameters of the two-branch fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeParams {
    pub xi_same: f64,
    pub xi_diff: f64,
    /// ps², reported as a magnitude.
    pub alpha: f64,
}

impl FringeParams {
    fn to_array(self) -> [f64; 3] {
        [self.xi_same, self.xi_diff, self.alpha]
    }

    fn from_array(p: [f64; 3]) -> Self {
        Self {
            xi_same: p[0],
            xi_diff: p[1],
            alpha: p[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FringeParams,
    /// Sum of squared residuals over both branches.
    pub residual: f64,
    pub iterations: usize,
}

/// Damped least-squares settings for [`fit_fringe`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged when every relative parameter step is below this.
    pub step_tolerance: f64,
    /// Number of log-spaced `α` values in the initial scan over
    /// `[α₀/2, 2α₀]`. Zero disables the scan.
    pub alpha_scan_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            alpha_scan_points: 2001,
        }
    }
}

struct FitData {
    /// `ΔΩ²` per point.
    w2: Vec<f64>,
    same: Vec<f64>,
    diff: Vec<f64>,
}

impl FitData {
    fn chi2(&self, p: &[f64; 3]) -> f64 {
        let mut chi2 = 0.0;
        for k in 0..self.w2.len() {
            let c = (p[2] * self.w2[k]).cos();
            let rs = self.same[k] - p[0] * (1.0 + c);
            let rd = self.diff[k] - p[1] * (1.0 - c);
            chi2 += rs * rs + rd * rd;
        }
        chi2
    }

    /// Returns `(JᵀJ, Jᵀr, χ²)` for the residuals `r = data - model`.
    fn normal_equations(&self, p: &[f64; 3]) -> ([[f64; 3]; 3], [f64; 3], f64) {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        let mut chi2 = 0.0;
        for k in 0..self.w2.len() {
            let (s, c) = (p[2] * self.w2[k]).sin_cos();
            let rows = [
                ([1.0 + c, 0.0, -p[0] * s * self.w2[k]], self.same[k] - p[0] * (1.0 + c)),
                ([0.0, 1.0 - c, p[1] * s * self.w2[k]], self.diff[k] - p[1] * (1.0 - c)),
            ];
            for (j, r) in rows {
                chi2 += r * r;
                for a in 0..3 {
                    jtr[a] += j[a] * r;
                    for b in 0..3 {
                        jtj[a][b] += j[a] * j[b];
                    }
                }
            }
        }
        (jtj, jtr, chi2)
    }

    /// Best `ξ` for each branch at fixed `α` (linear least squares).
    fn project_xi(&self, alpha: f64) -> [f64; 3] {
        let (mut ss, mut sy, mut ds, mut dy) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..self.w2.len() {
            let c = (alpha * self.w2[k]).cos();
            ss += (1.0 + c) * (1.0 + c);
            sy += (1.0 + c) * self.same[k];
            ds += (1.0 - c) * (1.0 - c);
            dy += (1.0 - c) * self.diff[k];
        }
        let xs = if ss > 0.0 { sy / ss } else { 0.0 };
        let xd = if ds > 0.0 { dy / ds } else { 0.0 };
        [xs, xd, alpha]
    }
}

/// Joint least-squares fit of `(ξ_same, ξ_diff, α)` to both branches of a
/// sweep, with [`FitOptions::default`].
pub fn fit_fringe(points: &[SweepPoint], lambda_p0: f64, initial: FringeParams) -> Result<FitResult> {
    fit_fringe_with(points, lambda_p0, initial, &FitOptions::default())
}

/// Joint least-squares fit of `(ξ_same, ξ_diff, α)`.
///
/// A log-spaced scan over `α` (with `ξ` solved linearly at each step) picks
/// the starting point, since the residual has a local minimum every fringe
/// period. Levenberg-Marquardt then refines all three parameters. `α` is
/// kept positive. Points are sorted internally so the result does not depend
/// on their order.
pub fn fit_fringe_with(
    points: &[SweepPoint],
    lambda_p0: f64,
    initial: FringeParams,
    options: &FitOptions,
) -> Result<FitResult> {
    for v in initial.to_array() {
        ensure_finite("initial parameter", v)?;
    }
    if initial.alpha == 0.0 {
        return Err(Error::InvalidArgument("initial alpha must be non-zero".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.delta_lambda
            .total_cmp(&b.delta_lambda)
            .then(a.c_t_same.total_cmp(&b.c_t_same))
            .then(a.c_t_diff.total_cmp(&b.c_t_diff))
    });
    let distinct = sorted
        .windows(2)
        .filter(|w| w[1].delta_lambda != w[0].delta_lambda)
        .count()
        + usize::from(!sorted.is_empty());
    if sorted.len() < 4 || distinct < 2 {
        return Err(Error::FitDegenerate(format!(
            "need at least 4 points at 2 or more detunings, got {} points at {} detunings",
            sorted.len(),
            distinct
        )));
    }
    let mut data = FitData {
        w2: Vec::with_capacity(sorted.len()),
        same: Vec::with_capacity(sorted.len()),
        diff: Vec::with_capacity(sorted.len()),
    };
    for p in &sorted {
        ensure_finite("c_t_same", p.c_t_same)?;
        ensure_finite("c_t_diff", p.c_t_diff)?;
        let w = detuning_to_omega(p.delta_lambda, lambda_p0)?;
        data.w2.push(w * w);
        data.same.push(p.c_t_same);
        data.diff.push(p.c_t_diff);
    }

    let alpha0 = initial.alpha.abs();
    let mut params = [initial.xi_same, initial.xi_diff, alpha0];
    let mut chi2 = data.chi2(&params);
    if options.alpha_scan_points > 1 {
        let n = options.alpha_scan_points;
        for i in 0..n {
            let t = i as f64 / (n - 1) as f64;
            let alpha = alpha0 * 2f64.powf(2.0 * t - 1.0);
            let cand = data.project_xi(alpha);
            let c = data.chi2(&cand);
            if c < chi2 {
                chi2 = c;
                params = cand;
            }
        }
    }

    let mut lambda = 1e-3;
    for iteration in 1..=options.max_iterations {
        let (jtj, jtr, current) = data.normal_equations(&params);
        chi2 = current;
        let mut step = None;
        while lambda < 1e16 {
            let mut a = jtj;
            for (k, row) in a.iter_mut().enumerate() {
                row[k] += lambda * jtj[k][k].max(1e-300);
            }
            let Some(delta) = solve_dense(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [params[0] + delta[0], params[1] + delta[1], params[2] + delta[2]];
            if trial[2] > 0.0 {
                let trial_chi2 = data.chi2(&trial);
                if trial_chi2 <= chi2 {
                    step = Some((trial, delta, trial_chi2));
                    lambda = (lambda * 0.1).max(1e-12);
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((trial, delta, trial_chi2)) = step else {
            if jtj.iter().enumerate().any(|(k, row)| row[k] == 0.0) {
                return Err(Error::FitDegenerate(
                    "a parameter does not influence the residuals".into(),
                ));
            }
            // no downhill step at any damping: at the minimum
            return Ok(FitResult {
                params: FringeParams::from_array(params),
                residual: chi2,
                iterations: iteration,
            });
        };
        let rel_step = (0..3)
            .map(|k| delta[k].abs() / params[k].abs().max(1e-300))
            .fold(0.0, f64::max);
        params = trial;
        chi2 = trial_chi2;
        if rel_step < options.step_tolerance {
            return Ok(FitResult {
                params: FringeParams::from_array(params),
                residual: chi2,
                iterations: iteration,
            });
        }
    }
    Err(Error::MaxIterations {
        iterations: options.max_iterations,
        best: Box::new(FitResult {
            params: FringeParams::from_array(params),
            residual: chi2,
            iterations: options.max_iterations,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg() -> SpectralConfig {
        SpectralConfig::measured_setup()
    }

    fn narrow(mut c: SpectralConfig, fwhm: f64) -> SpectralConfig {
        c.pump_filter.fwhm = fwhm;
        c.signal_filter.fwhm = fwhm;
        c.idler_filter.fwhm = fwhm;
        c.split_idler_filter.fwhm = fwhm;
        c
    }

    #[test]
    fn fringe_model_at_first_split_point() {
        let c = cfg();
        let phi = fringe_phase(c.alpha, c.lambda_p0, 10.75).unwrap();
        let by_hand = 4.0 * PI * PI * 0.0435 * 10.75f64.powi(2) * 299_792.458f64.powi(2)
            / (1536.75f64 * 1547.5).powi(2);
        assert!((phi - by_hand).abs() < 1e-12);
        assert!((phi - 3.154).abs() < 1e-3, "{phi}");
        let diff = fringe_model(&c, 10.75, Routing::Split).unwrap() / c.xi_diff;
        let same = fringe_model(&c, 10.75, Routing::Same).unwrap() / c.xi_same;
        assert!((diff - (1.0 - by_hand.cos())).abs() < 1e-12);
        assert!((same - (1.0 + by_hand.cos())).abs() < 1e-12);
        // 1 - cos(3.15397) = 1.999923; the rounded 1.99996 / 4.2e-5 pair
        // corresponds to a phase 3 mrad closer to π
        assert!((diff - 1.99996).abs() < 1e-4, "{diff}");
        assert!(same > 0.0 && same < 1e-4, "{same}");
    }

    #[test]
    fn fringe_model_small_detuning_limit() {
        let c = cfg();
        let same = fringe_model(&c, 1e-6, Routing::Same).unwrap();
        let diff = fringe_model(&c, 1e-6, Routing::Split).unwrap();
        assert!((same - 2.0 * c.xi_same).abs() < 1e-12);
        assert!(diff.abs() < 1e-12);
        assert!(fringe_model(&c, 0.0, Routing::Same).is_err());
        assert!(fringe_model(&c, 2000.0, Routing::Same).is_err());
    }

    #[test]
    fn fringe_maximum_is_two_xi() {
        let c = cfg();
        let root = fringe_argument_root(&c, PI, (5.0, 14.0)).unwrap();
        let peak = fringe_model(&c, root, Routing::Split).unwrap();
        assert!((peak - 59.0 * 32.3 / 29.5).abs() < 1e-9);
        let c29 = SpectralConfig { xi_diff: 29.5, ..c };
        assert!((fringe_model(&c29, root, Routing::Split).unwrap() - 59.0).abs() < 1e-12);
    }

    #[test]
    fn equal_xi_total_is_flat() {
        let c = SpectralConfig {
            xi_same: 30.0,
            xi_diff: 30.0,
            ..cfg()
        };
        for i in 1..200 {
            let dl = 0.1 * i as f64;
            let total = fringe_model(&c, dl, Routing::Same).unwrap()
                + fringe_model(&c, dl, Routing::Split).unwrap();
            assert!((total - 60.0).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_match_closed_form() {
        let c = cfg();
        let r1 = fringe_argument_root(&c, PI, (5.0, 14.0)).unwrap();
        let r2 = fringe_argument_root(&c, 2.0 * PI, (12.0, 20.0)).unwrap();
        assert!((r1 - 10.73).abs() < 5e-3, "{r1}");
        assert!((r2 - 15.13).abs() < 5e-3, "{r2}");
        // independent route: invert ΔΩ = sqrt(φ/α) by hand
        let two_pi_c = 2.0 * PI * 299_792.458;
        for (r, phase) in [(r1, PI), (r2, 2.0 * PI)] {
            let w = (phase / 0.0435f64).sqrt();
            let dl = w * 1547.5 * 1547.5 / (two_pi_c + w * 1547.5);
            assert!((r - dl).abs() < 1e-9);
            let residual = fringe_phase(c.alpha, c.lambda_p0, r).unwrap() - phase;
            assert!(residual.abs() < 1e-10);
        }
        assert!(matches!(
            fringe_argument_root(&c, 0.0, (1.0, 20.0)),
            Err(Error::RootNotBracketed { .. })
        ));
    }

    #[test]
    fn fringe_phase_is_increasing() {
        let c = cfg();
        let mut prev = 0.0;
        for i in 1..2000 {
            let dl = i as f64 * c.lambda_p0 / 2.0 / 2000.0;
            let p = fringe_phase(c.alpha, c.lambda_p0, dl).unwrap();
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn narrowband_average_matches_pointwise() {
        let c = narrow(cfg(), 1e-6);
        for dl in [3.0, 8.0, 10.75, 13.0, 15.2, 19.0] {
            for b in [Routing::Same, Routing::Split] {
                let avg = bandwidth_averaged_fringe(&c, dl, b).unwrap();
                let point = fringe_model(&c, dl, b).unwrap();
                assert!(
                    (avg - point).abs() <= 1e-9 * point.abs().max(1e-300),
                    "{dl} {b:?}: {avg} vs {point}"
                );
            }
        }
    }

    #[test]
    fn average_error_shrinks_quadratically_with_bandwidth() {
        let dl = 12.0;
        let err = |w: f64| {
            let c = narrow(cfg(), w);
            (mean_cos_phase(&c, dl, Routing::Same).unwrap()
                - fringe_phase(c.alpha, c.lambda_p0, dl).unwrap().cos())
            .abs()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn quadrature_order_doubling_is_converged() {
        let c16 = cfg();
        let c32 = SpectralConfig {
            quadrature_order: 32,
            ..c16
        };
        for dl in [6.0, 10.75, 15.2, 18.0] {
            for b in [Routing::Same, Routing::Split] {
                let a = mean_cos_phase(&c16, dl, b).unwrap();
                let z = mean_cos_phase(&c32, dl, b).unwrap();
                assert!((a - z).abs() < 1e-8, "{dl} {b:?}: {a} vs {z}");
            }
        }
        let bad = SpectralConfig {
            quadrature_order: 1,
            ..c16
        };
        assert!(matches!(
            bandwidth_averaged_fringe(&bad, 10.0, Routing::Same),
            Err(Error::InvalidConfig(_))
        ));
    }

    /// Rejection-sampled average of cos φ over the same passband geometry.
    fn monte_carlo_mean_cos(c: &SpectralConfig, dl: f64, branch: Routing, n: usize) -> f64 {
        let lp = c.lambda_p0;
        let li = lp - dl;
        let two_pi_c = 2.0 * PI * 299_792.458;
        let wp = two_pi_c / lp;
        let wi = two_pi_c / li;
        let ls = two_pi_c / (2.0 * wp - wi);
        let half = |fwhm: f64, center: f64| 0.5 * two_pi_c * fwhm / (center * center);
        let idler_fwhm = match branch {
            Routing::Same => c.idler_filter.fwhm,
            Routing::Split => c.split_idler_filter.fwhm,
        };
        let (hp, hs, hi) = (
            half(c.pump_filter.fwhm, lp),
            half(c.signal_filter.fwhm, ls),
            half(idler_fwhm, li),
        );
        let center = wp - wi;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut sum, mut kept) = (0.0, 0usize);
        while kept < n {
            let u = rng.random_range(-hi..hi);
            let d = rng.random_range(-hp..hp);
            if (2.0 * d - u).abs() > hs {
                continue;
            }
            let dw = center + d - u;
            sum += (c.alpha * dw * dw).cos();
            kept += 1;
        }
        sum / n as f64
    }

    #[test]
    fn averaged_residual_matches_sampling() {
        let c = cfg();
        let root = fringe_argument_root(&c, PI, (5.0, 14.0)).unwrap();
        for b in [Routing::Same, Routing::Split] {
            let quad = 1.0 + mean_cos_phase(&c, root, b).unwrap();
            let mc = 1.0 + monte_carlo_mean_cos(&c, root, b, 1_000_000);
            assert!(quad > 0.0);
            assert!((quad - mc).abs() < 0.01 * quad, "{b:?}: {quad} vs {mc}");
        }
        // residual of the suppressed branch ≈ ⟨x²⟩/2 for a small phase spread
        let same = bandwidth_averaged_fringe(&c, root, Routing::Same).unwrap();
        assert!(same > 0.0 && same < 0.01 * c.xi_same);
    }

    #[test]
    fn averaged_fringe_is_bounded() {
        let c = cfg();
        for i in 1..120 {
            let dl = 0.2 * i as f64;
            for b in [Routing::Same, Routing::Split] {
                let v = bandwidth_averaged_fringe(&c, dl, b).unwrap();
                assert!(v >= 0.0 && v <= 2.0 * c.xi(b) + 1e-12);
            }
        }
    }

    #[test]
    fn contrast_examples() {
        let c = cfg();
        let root = fringe_argument_root(&c, PI, (5.0, 14.0)).unwrap();
        assert_eq!(contrast_ratio(&c, root, false).unwrap(), f64::INFINITY);
        let at_split = contrast_ratio(&c, 10.75, true).unwrap();
        let at_same = contrast_ratio(&c, 15.2, true).unwrap();
        assert!(at_split >= 100.0, "{at_split}");
        assert!(at_same.is_finite() && at_same < at_split, "{at_same} vs {at_split}");
    }

    #[test]
    fn gaussian_filters_are_supported() {
        let mut c = cfg();
        for f in [
            &mut c.pump_filter,
            &mut c.signal_filter,
            &mut c.idler_filter,
            &mut c.split_idler_filter,
        ] {
            f.shape = FilterShape::Gaussian;
        }
        let g = contrast_ratio(&c, 10.75, true).unwrap();
        assert!(g.is_finite() && g > 1.0);
    }

    fn synthetic(params: FringeParams) -> Vec<SweepPoint> {
        let c = SpectralConfig {
            xi_same: params.xi_same,
            xi_diff: params.xi_diff,
            alpha: params.alpha,
            ..cfg()
        };
        (0..33)
            .map(|i| {
                let dl = 4.0 + 0.5 * i as f64;
                SweepPoint::new(
                    dl,
                    fringe_model(&c, dl, Routing::Same).unwrap(),
                    fringe_model(&c, dl, Routing::Split).unwrap(),
                )
            })
            .collect()
    }

    const TRUE: FringeParams = FringeParams {
        xi_same: 29.5,
        xi_diff: 32.3,
        alpha: 0.0435,
    };

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let data = synthetic(TRUE);
        for (fs, fd, fa) in [(1.2, 0.8, 1.2), (0.8, 1.2, 0.8), (1.2, 1.2, 0.8), (0.8, 0.8, 1.2)] {
            let init = FringeParams {
                xi_same: 29.5 * fs,
                xi_diff: 32.3 * fd,
                alpha: 0.0435 * fa,
            };
            let fit = fit_fringe(&data, 1547.5, init).unwrap();
            for (got, want) in fit.params.to_array().iter().zip(TRUE.to_array()) {
                assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn fit_is_order_invariant() {
        let mut data = synthetic(TRUE);
        for (i, p) in data.iter_mut().enumerate() {
            p.c_t_same += 0.3 * ((i * 7 % 5) as f64 - 2.0);
        }
        let init = FringeParams {
            alpha: 0.05,
            ..TRUE
        };
        let a = fit_fringe(&data, 1547.5, init).unwrap();
        data.reverse();
        data.swap(3, 17);
        let b = fit_fringe(&data, 1547.5, init).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_rejects_degenerate_data() {
        let p = SweepPoint::new(10.0, 1.0, 2.0);
        assert!(matches!(
            fit_fringe(&[p, p], 1547.5, TRUE),
            Err(Error::FitDegenerate(_))
        ));
        assert!(matches!(
            fit_fringe(&[p; 6], 1547.5, TRUE),
            Err(Error::FitDegenerate(_))
        ));
        let init = FringeParams { alpha: 0.0, ..TRUE };
        assert!(fit_fringe(&synthetic(TRUE), 1547.5, init).is_err());
    }

    #[test]
    fn fit_reports_max_iterations_with_best() {
        let data = synthetic(TRUE);
        let opts = FitOptions {
            max_iterations: 1,
            alpha_scan_points: 0,
            ..FitOptions::default()
        };
        let init = FringeParams {
            xi_same: 20.0,
            xi_diff: 40.0,
            alpha: 0.044,
        };
        match fit_fringe_with(&data, 1547.5, init, &opts) {
            Err(Error::MaxIterations { iterations, best }) => {
                assert_eq!(iterations, 1);
                assert!(best.residual.is_finite());
            }
            other => panic!("expected MaxIterations, got {other:?}"),
        }
    }

    #[test]
    fn sweep_curve_requires_increasing_detuning() {
        let p = |dl| SweepPoint::new(dl, 0.0, 0.0);
        assert!(SweepCurve::new(vec![p(1.0), p(2.0)]).is_ok());
        assert!(SweepCurve::new(vec![p(1.0), p(1.0)]).is_err());
        assert!(SweepCurve::new(vec![p(2.0), p(1.0)]).is_err());
    }
}
