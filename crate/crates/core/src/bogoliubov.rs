//! Bogoliubov coefficients, squeeze parameter and the in-out effective action.

use crate::drive::DriveProfile;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};
use crate::magnus::MagnusTerms;
use crate::propagator::{self, Basis, EvolutionMatrix};
use std::f64::consts::PI;

/// Largest accepted relative violation of `|alpha|^2 - |beta|^2 = 1`.
pub const UNITARITY_LIMIT: f64 = 1e-6;

/// Where a propagator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Magnus(usize),
    Oracle,
    /// Supplied by the caller.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bogoliubov {
    pub alpha: C64,
    pub beta: C64,
    /// `arg eta~(2 omega0)`, set only when the transform is non-negligible.
    pub phi: Option<f64>,
    pub source: Source,
    /// `|alpha|^2 - |beta|^2 - 1`.
    pub unitarity_defect: f64,
}

impl Bogoliubov {
    /// `|beta|^2`, the number of created quanta.
    pub fn particle_number(&self) -> f64 {
        self.beta.norm_sqr()
    }

    pub fn with_source(self, source: Source) -> Self {
        Self { source, ..self }
    }

    /// Attach the phase of `eta~(2 omega0)` of the drive.
    pub fn with_phase_of(self, profile: &DriveProfile) -> Result<Self> {
        let e = profile.fourier_eta(2.0 * profile.omega0())?.value;
        Ok(Self { phi: (e.norm() > 1e-12).then(|| e.arg()), ..self })
    }
}

/// `alpha = conj([U_I]_22)`, `beta = [U_I]_21`.
pub fn extract_coefficients(u: &EvolutionMatrix) -> Result<Bogoliubov> {
    if u.basis != Basis::Interaction {
        return Err(Error::Contract("Bogoliubov coefficients need an interaction-picture propagator".into()));
    }
    let alpha = u.get(1, 1).conj();
    let beta = u.get(1, 0);
    let defect = alpha.norm_sqr() - beta.norm_sqr() - 1.0;
    if !defect.is_finite() || defect.abs() > UNITARITY_LIMIT * alpha.norm_sqr().max(1.0) {
        return Err(Error::InconsistentPropagator { violation: defect });
    }
    Ok(Bogoliubov { alpha, beta, phi: None, source: Source::External, unitarity_defect: defect })
}

/// Coefficients from the reference integrator.
pub fn oracle_coefficients(profile: &DriveProfile, tol: f64) -> Result<Bogoliubov> {
    let u = propagator::interaction_propagator(profile, tol)?;
    extract_coefficients(&u)?.with_source(Source::Oracle).with_phase_of(profile)
}

/// Coefficients from the truncated Magnus expansion.
pub fn magnus_coefficients(profile: &DriveProfile, order: usize) -> Result<Bogoliubov> {
    let w = profile.window();
    let u = MagnusTerms::compute(profile, order)?.propagator(w.t_min, w.t_max)?;
    extract_coefficients(&u)?.with_source(Source::Magnus(order)).with_phase_of(profile)
}

/// `z = i eta~(-2 omega0)`, the squeeze parameter of the first-order evolution.
pub fn squeeze_parameter(profile: &DriveProfile) -> Result<C64> {
    Ok(I * profile.fourier_eta(-2.0 * profile.omega0())?.value)
}

/// `|<0_out|0_in>|^2 = 1 / |alpha|`.
pub fn vacuum_persistence(b: &Bogoliubov) -> f64 {
    1.0 / b.alpha.norm()
}

/// `Im Gamma = 1/2 log |[U_I]_22|`.
pub fn inout_im_gamma(u: &EvolutionMatrix) -> Result<f64> {
    Ok(inout_action(u)?.im_gamma)
}

/// In-out effective action `Gamma = (i/2) log [U_I]_22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InOutAction {
    pub re_gamma: f64,
    pub im_gamma: f64,
    /// Number of `2 pi` turns of `arg [U_I]_22` added to the principal branch.
    pub winding: i64,
}

fn action_from(ratio: C64, phase: f64, winding: i64) -> Result<InOutAction> {
    if ratio.norm() == 0.0 || !ratio.is_finite() {
        return Err(Error::SingularPropagator);
    }
    Ok(InOutAction { re_gamma: -0.5 * phase, im_gamma: 0.5 * ratio.norm().ln(), winding })
}

/// Principal branch: `Re Gamma = -1/2 arg [U_I]_22` with `arg` in `(-pi, pi]`.
pub fn inout_action(u: &EvolutionMatrix) -> Result<InOutAction> {
    if u.basis != Basis::Interaction {
        return Err(Error::Contract("in-out action needs an interaction-picture propagator".into()));
    }
    let r = u.get(1, 1);
    action_from(r, r.arg(), 0)
}

/// Action with `Re Gamma` continued along `lambda eps`, `lambda` from 0 to 1,
/// starting from `Gamma = 0` at `lambda = 0`. `ratio` maps a profile to
/// `[U_I]_22` by any route.
pub fn inout_action_continued<F>(profile: &DriveProfile, ratio: F) -> Result<InOutAction>
where
    F: Fn(&DriveProfile) -> Result<C64>,
{
    inout_action_along(|lambda| ratio(&profile.scaled(lambda)?))
}

/// As [`inout_action_continued`], with `ratio_at(lambda)` giving `[U_I]_22`
/// for the drive `lambda eps` directly.
pub fn inout_action_along<F>(ratio_at: F) -> Result<InOutAction>
where
    F: Fn(f64) -> Result<C64>,
{
    let end = ratio_at(1.0)?;
    let phase = phase_increment(&ratio_at, 0.0, c(1.0, 0.0), 1.0, end, 0)?;
    let winding = ((phase - end.arg()) / (2.0 * PI)).round() as i64;
    action_from(end, phase, winding)
}

/// Continued action of a truncated Magnus expansion; rescaling the terms
/// avoids recomputing them along the path.
pub fn magnus_action(terms: &MagnusTerms) -> Result<InOutAction> {
    inout_action_along(|lambda| Ok(crate::magnus::exp_traceless(&terms.scaled(lambda).generator())?[(1, 1)]))
}

/// Unwrapped phase change of a nonvanishing path between two points, by
/// bisection until each step turns by less than an eighth of a turn.
pub(crate) fn phase_increment<F>(eval: &F, l0: f64, z0: C64, l1: f64, z1: C64, depth: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<C64>,
{
    let step = (z1 / z0).arg();
    if depth >= 3 && step.abs() < PI / 4.0 {
        return Ok(step);
    }
    if depth > 40 {
        return Err(Error::SingularPropagator);
    }
    let mid = 0.5 * (l0 + l1);
    let zm = eval(mid)?;
    if zm.norm() == 0.0 || !zm.is_finite() {
        return Err(Error::SingularPropagator);
    }
    Ok(phase_increment(eval, l0, z0, mid, zm, depth + 1)? + phase_increment(eval, mid, zm, l1, z1, depth + 1)?)
}
