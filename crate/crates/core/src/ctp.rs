//! Closed-time-path effective action and the causal equation-of-motion source.
//!
//! With first-order Magnus propagators on both time branches, the generalized
//! Bogoliubov coefficients depend on the drive only through `eta~(2 omega0)`
//! and `eta~(0)`, and
//! `Gamma_CTP = (i/2) log(alpha_- conj(alpha_+) - beta_- conj(beta_+))`.
//!
//! Functional derivatives are taken with respect to `eta = eps / (2 omega0)`;
//! derivatives with respect to `eps` carry an extra factor `1 / (2 omega0)`.

use crate::bogoliubov::{phase_increment, Bogoliubov, Source};
use crate::drive::DriveProfile;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat2, C64, I};
use crate::magnus::cosh_sinhc;
use crate::propagator;
use std::f64::consts::PI;

/// Largest accepted gap between the complex-log and explicit routes, per unit
/// of `|alpha_-| |alpha_+| + |beta_-| |beta_+|`.
pub const ROUTE_TOL: f64 = 1e-10;

/// Sign of `eta_eff^2 = |eta~(2 omega0)|^2 - |eta~(0)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `eta_eff^2 >= 0`: `cosh`/`sinh`.
    Hyperbolic,
    /// `eta_eff^2 < 0`: `cos`/`sin` of `|eta_eff|`.
    Trigonometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedEta {
    pub eta_2w0: C64,
    /// `int eta`, real for a real drive.
    pub eta_0: f64,
    /// Non-negative real, or `+i sqrt(|radicand|)` when the radicand is negative.
    pub eta_eff: C64,
}

impl GeneralizedEta {
    pub fn new(eta_2w0: C64, eta_0: f64) -> Self {
        let r = eta_2w0.norm_sqr() - eta_0 * eta_0;
        let eta_eff = if r >= 0.0 { c(r.sqrt(), 0.0) } else { c(0.0, (-r).sqrt()) };
        Self { eta_2w0, eta_0, eta_eff }
    }

    /// Full-window transforms of the drive.
    pub fn of_profile(profile: &DriveProfile) -> Result<Self> {
        let w0 = profile.omega0();
        Ok(Self::new(profile.fourier_eta(2.0 * w0)?.value, profile.fourier_eta(0.0)?.value.re))
    }

    /// Retarded transforms up to `t`.
    pub fn retarded(profile: &DriveProfile, t: f64) -> Result<Self> {
        let r2 = profile.retarded_fourier(2.0 * profile.omega0(), t)?.value;
        let r0 = profile.retarded_fourier(0.0, t)?.value.re;
        Ok(Self::new(r2, r0))
    }

    /// `eta_eff^2`, computed without the square root.
    pub fn radicand(&self) -> f64 {
        self.eta_2w0.norm_sqr() - self.eta_0 * self.eta_0
    }

    pub fn branch(&self) -> Branch {
        if self.radicand() >= 0.0 {
            Branch::Hyperbolic
        } else {
            Branch::Trigonometric
        }
    }

    /// Same transforms for the drive `lambda * eta`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(self.eta_2w0 * lambda, self.eta_0 * lambda)
    }

    /// `(cosh x, sinh x / x)` at `x = eta_eff`; both real and even in `x`.
    fn even_parts(&self) -> (f64, f64) {
        let (ch, sc) = cosh_sinhc(c(self.radicand(), 0.0));
        (ch.re, sc.re)
    }

    /// `(alpha, beta)` of `exp(A1)`.
    pub fn coefficients(&self) -> (C64, C64) {
        let (ch, sc) = self.even_parts();
        (c(ch, 0.0) - I * self.eta_0 * sc, I * self.eta_2w0 * sc)
    }
}

/// `alpha = cosh x - i eta~(0) sinh x / x`, `beta = i eta~(2 omega0) sinh x / x`
/// with `x = eta_eff`.
pub fn generalized_bogoliubov(profile: &DriveProfile) -> Result<Bogoliubov> {
    let g = GeneralizedEta::of_profile(profile)?;
    let (alpha, beta) = g.coefficients();
    Ok(Bogoliubov {
        alpha,
        beta,
        phi: (g.eta_2w0.norm() > 1e-12).then(|| g.eta_2w0.arg()),
        source: Source::Magnus(1),
        unitarity_defect: alpha.norm_sqr() - beta.norm_sqr() - 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtpResult {
    pub re_gamma: f64,
    pub im_gamma: f64,
    pub branch_plus: Branch,
    pub branch_minus: Branch,
    /// Turns of the log argument beyond the principal branch, tracked from
    /// the trivial drive along `lambda (eta_+, eta_-)`.
    pub winding: i64,
    /// Largest gap between the complex-log and explicit real routes.
    pub route_gap: f64,
    /// `|alpha_-| |alpha_+| + |beta_-| |beta_+|` (at least 1); the explicit
    /// route loses about this factor in relative precision.
    pub conditioning: f64,
}

/// `alpha_- conj(alpha_+) - beta_- conj(beta_+)`, written as
/// `1 + (alpha_- - alpha_+) conj(alpha_+) - (beta_- - beta_+) conj(beta_+)`
/// using `|alpha|^2 - |beta|^2 = 1`, which holds identically for the
/// first-order coefficients. This avoids cancelling `O(|alpha|^2)` terms
/// near the diagonal and gives exactly 1 on it.
fn log_argument(plus: &GeneralizedEta, minus: &GeneralizedEta) -> C64 {
    let (ap, bp) = plus.coefficients();
    let (am, bm) = minus.coefficients();
    c(1.0, 0.0) + (am - ap) * ap.conj() - (bm - bp) * bp.conj()
}

/// `|alpha_-| |alpha_+| + |beta_-| |beta_+|`, the size of the terms that
/// cancel in the log argument.
fn conditioning(plus: &GeneralizedEta, minus: &GeneralizedEta) -> f64 {
    let (ap, bp) = plus.coefficients();
    let (am, bm) = minus.coefficients();
    (am.norm() * ap.norm() + bm.norm() * bp.norm()).max(1.0)
}

/// Real and imaginary parts of the same argument, in real arithmetic.
fn log_argument_explicit(plus: &GeneralizedEta, minus: &GeneralizedEta) -> (f64, f64) {
    let (cp, sp) = plus.even_parts();
    let (cm, sm) = minus.even_parts();
    let (r0p, r0m) = (plus.eta_0, minus.eta_0);
    let cross = minus.eta_2w0 * plus.eta_2w0.conj();
    let re = cm * cp + sm * sp * (r0m * r0p - cross.re);
    let im = r0p * cm * sp - r0m * cp * sm - sm * sp * cross.im;
    (re, im)
}

/// `Gamma_CTP` from already computed transforms of both branches.
pub fn ctp_action_from(plus: &GeneralizedEta, minus: &GeneralizedEta) -> Result<CtpResult> {
    let z = log_argument(plus, minus);
    let scale = conditioning(plus, minus);
    if !z.is_finite() || z.norm() <= 1e-14 * scale {
        return Err(Error::DegeneratePair);
    }
    let eval = |lambda: f64| Ok(log_argument(&plus.scaled(lambda), &minus.scaled(lambda)));
    let phase = phase_increment(&eval, 0.0, c(1.0, 0.0), 1.0, z, 0)?;
    let winding = ((phase - z.arg()) / (2.0 * PI)).round() as i64;
    let (re_gamma, im_gamma) = (-0.5 * phase, 0.5 * z.norm().ln());

    let (zr, zi) = log_argument_explicit(plus, minus);
    let explicit_re = -0.5 * (zi.atan2(zr) + 2.0 * PI * winding as f64);
    let explicit_im = 0.5 * zr.hypot(zi).ln();
    let route_gap = (explicit_re - re_gamma).abs().max((explicit_im - im_gamma).abs());
    // The explicit route sums the cancelling terms directly, so its rounding
    // error grows with their size.
    let limit = ROUTE_TOL * scale;
    if route_gap > limit {
        return Err(Error::Consistency { drift: route_gap, limit });
    }
    Ok(CtpResult {
        re_gamma,
        im_gamma,
        branch_plus: plus.branch(),
        branch_minus: minus.branch(),
        winding,
        route_gap,
        conditioning: scale,
    })
}

/// `Gamma_CTP(eta_+, eta_-) = (i/2) log(alpha_- conj(alpha_+) - beta_- conj(beta_+))`.
pub fn ctp_action(plus: &DriveProfile, minus: &DriveProfile) -> Result<CtpResult> {
    if plus.omega0() != minus.omega0() || plus.window() != minus.window() {
        return Err(Error::Contract("CTP branches must share omega0 and window".into()));
    }
    ctp_action_from(&GeneralizedEta::of_profile(plus)?, &GeneralizedEta::of_profile(minus)?)
}

/// Equation-of-motion source at one time, with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomSample {
    pub t: f64,
    /// `delta Gamma_CTP / delta eta_+(t)` at `eta_+ = eta_-`.
    pub value: f64,
    /// Imaginary part of the same quantity evaluated in complex arithmetic.
    pub im_residue: f64,
    pub retarded: GeneralizedEta,
    pub branch: Branch,
}

/// `M(t) = H'_I(t) / eta(t) = [[1, u], [-conj u, -1]]`, `u = e^{2 i omega0 t}`.
fn unit_perturbation(omega0: f64, t: f64) -> CMat2 {
    let u = C64::from_polar(1.0, 2.0 * omega0 * t);
    CMat2::new(c(1.0, 0.0), u, -u.conj(), c(-1.0, 0.0))
}

/// `1/2 [U1^{-1} M(t) U1]_22` for the evolution `U1 = U_I(t, t_min)`.
///
/// Varying `eta_+` at `t` changes `U_+ = U2 U1` by `-i h U2 M U1`; the later
/// factor `U2` cancels against the `-` branch, which is what makes the
/// source causal.
fn variation_from_evolution(omega0: f64, t: f64, u1: &CMat2) -> C64 {
    let m = unit_perturbation(omega0, t);
    (linalg::inverse_unimodular(u1) * m * u1)[(1, 1)] * 0.5
}

/// Real closed form of [`variation_from_evolution`] for a pseudo-real
/// `U1 = [[a, conj b], [b, conj a]]`:
/// `-1/2 (|a|^2 + |b|^2) - Re(e^{2 i omega0 t} b conj(a))`.
fn variation_closed_form(omega0: f64, t: f64, a: C64, b: C64) -> f64 {
    let u = C64::from_polar(1.0, 2.0 * omega0 * t);
    -0.5 * (a.norm_sqr() + b.norm_sqr()) - (u * b * a.conj()).re
}

/// Causal source with diagnostics. `U1` is the first-order Magnus evolution
/// built from the retarded transforms `eta~_ret(2 omega0, t)` and
/// `eta~_ret(0, t)`, so only `eps` on `[t_min, t]` is read. For `eps = 0`
/// (and at `t = t_min`) the value is the drive-independent constant `-1/2`.
pub fn eom_sample(profile: &DriveProfile, t: f64) -> Result<EomSample> {
    if !profile.window().contains(t) {
        return Err(Error::Contract(format!("t = {t} lies outside the window")));
    }
    let w0 = profile.omega0();
    let g = GeneralizedEta::retarded(profile, t)?;
    let (ch, sc) = g.even_parts();
    // U1 = exp(A1_ret): U11 = cosh x - i R0 s, U21 = i R2 s.
    let a = c(ch, 0.0) - I * g.eta_0 * sc;
    let b = I * g.eta_2w0 * sc;
    let value = variation_closed_form(w0, t, a, b);
    let u1 = CMat2::new(a, b.conj(), b, a.conj());
    let complex = variation_from_evolution(w0, t, &u1);
    Ok(EomSample { t, value, im_residue: complex.im, retarded: g, branch: g.branch() })
}

/// `delta Gamma_CTP / delta eta_+(t)` at `eta_+ = eta_-`.
pub fn eom_source(profile: &DriveProfile, t: f64) -> Result<f64> {
    Ok(eom_sample(profile, t)?.value)
}

/// The same variation with `U1` taken from the reference integrator instead
/// of the first-order Magnus form.
pub fn eom_source_exact(profile: &DriveProfile, t: f64, tol: f64) -> Result<f64> {
    let w = profile.window();
    let u1 = propagator::interaction_propagator_between(profile, w.t_min, t, tol)?;
    Ok(variation_closed_form(profile.omega0(), t, u1.get(0, 0), u1.get(1, 0)))
}

/// Finite-difference estimate of a functional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationEstimate {
    pub value: f64,
    /// Size of the last Richardson correction.
    pub error: f64,
    /// Set when the error estimate exceeds [`VARIATION_WARN`].
    pub warning: bool,
    pub bump_width: f64,
}

/// Error estimate above which a variation estimate is flagged.
pub const VARIATION_WARN: f64 = 1e-6;

/// Raised-cosine bump of unit area on `[-w/2, w/2]`.
fn bump(x: f64, w: f64) -> f64 {
    if x.abs() >= 0.5 * w {
        0.0
    } else {
        (1.0 + (2.0 * PI * x / w).cos()) / w
    }
}

/// `Gamma_CTP(eta + area * bump_t, eta)` from the reference integrator.
///
/// With `U_+ = U2 B_+ U1` and `U_- = U2 B_- U1`, where `B` is the evolution
/// across the bump support, `U_-^{-1} U_+ = U1^{-1} B_-^{-1} B_+ U1`; the
/// later evolution `U2` cancels exactly.
fn bumped_action(
    profile: &DriveProfile,
    u1: &CMat2,
    b_minus_inv: &CMat2,
    t: f64,
    width: f64,
    area: f64,
    tol: f64,
) -> Result<C64> {
    let (lo, hi) = (t - 0.5 * width, t + 0.5 * width);
    let b_plus = propagator::interaction_propagator_perturbed(profile, |s| area * bump(s - t, width), lo, hi, tol)?;
    let z = (linalg::inverse_unimodular(u1) * b_minus_inv * b_plus.entries * u1)[(1, 1)];
    if z.norm() == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(I * 0.5 * z.ln())
}

/// Ground truth for [`eom_source`]: central differences in the bump area
/// `h`, with Richardson extrapolation in `h` and in the bump width.
pub fn causal_variation_oracle(profile: &DriveProfile, t: f64, h: f64) -> Result<VariationEstimate> {
    const TOL: f64 = 1e-13;
    let w0 = profile.omega0();
    let w = profile.window();
    let width = 0.05 / w0;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Contract(format!("bump area must be positive, got {h}")));
    }
    if t - width < w.t_min || t + width > w.t_max {
        return Err(Error::Contract(format!("t = {t} too close to the window edge for a bump of width {width}")));
    }
    let estimate = |width: f64| -> Result<(f64, f64)> {
        let (lo, hi) = (t - 0.5 * width, t + 0.5 * width);
        let u1 = propagator::interaction_propagator_between(profile, w.t_min, lo, TOL)?.entries;
        let b_minus = propagator::interaction_propagator_between(profile, lo, hi, TOL)?.entries;
        let b_inv = linalg::inverse_unimodular(&b_minus);
        let central = |h: f64| -> Result<f64> {
            let up = bumped_action(profile, &u1, &b_inv, t, width, h, TOL)?;
            let down = bumped_action(profile, &u1, &b_inv, t, width, -h, TOL)?;
            Ok(((up - down) / (2.0 * h)).re)
        };
        let (d1, d2) = (central(h)?, central(0.5 * h)?);
        let extrapolated = (4.0 * d2 - d1) / 3.0;
        Ok((extrapolated, (extrapolated - d2).abs()))
    };
    let (coarse, e1) = estimate(width)?;
    let (fine, e2) = estimate(0.5 * width)?;
    // Bump-width error is O(width^2) for a symmetric bump.
    let value = (4.0 * fine - coarse) / 3.0;
    let error = (value - fine).abs().max(e1).max(e2);
    Ok(VariationEstimate { value, error, warning: error > VARIATION_WARN, bump_width: width })
}

/// Tolerance for comparing [`eom_source`] with the exact variation: the
/// first-order truncation of `U1` contributes at most `4 L^2 e^{4 L}` with
/// `L = int_{t_min}^t |eta|`, on top of the finite-difference error.
pub fn eom_tolerance(profile: &DriveProfile, t: f64, fd_error: f64) -> Result<f64> {
    let w = profile.window();
    let abs_eta = |s: f64| c(profile.eta(s).abs(), 0.0);
    let opts = profile.quad_options();
    let l = crate::quad::integrate(abs_eta, w.t_min, t.min(w.t_max), profile.panel_width(0.0), &opts)?.value.re;
    Ok(4.0 * l * l * (4.0 * l).exp() + fd_error + 1e-9)
}

/// Variation of the first-order CTP action taken after the Magnus
/// approximation: the full-window transforms shift by `h e^{-i nu t}`, so the
/// result depends on the drive after `t`.
#[cfg(feature = "diagnostics")]
pub fn naive_eom_source(profile: &DriveProfile, t: f64) -> Result<C64> {
    let g = GeneralizedEta::of_profile(profile)?;
    let w0 = profile.omega0();
    let h = 1e-6;
    let shifted = |h: f64| GeneralizedEta::new(g.eta_2w0 + C64::from_polar(h, -2.0 * w0 * t), g.eta_0 + h);
    let gamma = |plus: &GeneralizedEta| -> Result<C64> {
        let z = log_argument(plus, &g);
        Ok(I * 0.5 * z.ln())
    };
    Ok((gamma(&shifted(h))? - gamma(&shifted(-h))?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::Window;

    fn pulse(amplitude: f64) -> DriveProfile {
        DriveProfile::enveloped_harmonic(1.0, Window::symmetric(30.0), amplitude, 2.0, 2.0).unwrap()
    }

    #[test]
    fn generalized_coefficients() {
        let (a, b) = GeneralizedEta::new(c(0.0, 0.0), 0.0).coefficients();
        assert_eq!((a, b), (c(1.0, 0.0), c(0.0, 0.0)));
        let (a, b) = GeneralizedEta::new(c(1.0, 0.0), 0.0).coefficients();
        assert!((a.re - 1f64.cosh()).abs() < 1e-15 && (b.norm() - 1f64.sinh()).abs() < 1e-15);
        let g = GeneralizedEta::new(c(0.0, 0.0), 0.5);
        assert_eq!(g.eta_eff, c(0.0, 0.5));
        assert_eq!(g.branch(), Branch::Trigonometric);
        let (a, b) = g.coefficients();
        assert!((a - C64::from_polar(1.0, -0.5)).norm() < 1e-15);
        assert_eq!(b, c(0.0, 0.0));
        assert!((a.norm_sqr() - b.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coefficients_continuous_across_branch_point() {
        let r0 = 0.7;
        let sample = |d: f64| GeneralizedEta::new(c(0.7 + d, 0.0), r0).coefficients();
        let (a0, b0) = sample(0.0);
        for d in [1e-9, -1e-9, 1e-6, -1e-6] {
            let (a, b) = sample(d);
            assert!((a - a0).norm() < 10.0 * d.abs() && (b - b0).norm() < 10.0 * d.abs());
        }
    }

    #[test]
    fn diagonal_vanishes() {
        for (r2, r0) in [(c(0.3, -1.1), 0.2), (c(0.1, 0.1), 0.9), (c(2.0, 0.5), -0.4)] {
            let g = GeneralizedEta::new(r2, r0);
            let r = ctp_action_from(&g, &g).unwrap();
            assert!(r.re_gamma.abs() < 1e-12 && r.im_gamma.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn diagonal_is_exact_for_strong_drives() {
        let g = GeneralizedEta::new(c(8.0, 3.0), 0.5);
        let r = ctp_action_from(&g, &g).unwrap();
        assert_eq!((r.re_gamma, r.im_gamma), (0.0, 0.0));
        assert!(r.conditioning > 1e7);
        let near = GeneralizedEta::new(c(8.0, 3.0 + 1e-6), 0.5);
        assert!(ctp_action_from(&near, &g).is_ok());
    }

    #[test]
    fn one_sided_branch_gives_inout_value() {
        let plus = GeneralizedEta::new(c(0.0, 1.0), 0.0);
        let minus = GeneralizedEta::new(c(0.0, 0.0), 0.0);
        let r = ctp_action_from(&plus, &minus).unwrap();
        assert!((r.im_gamma - 0.5 * 1f64.cosh().ln()).abs() < 1e-15);
        assert!(r.re_gamma.abs() < 1e-15);
    }

    #[test]
    fn winding_is_tracked() {
        // A large mean shift on one branch turns the argument several times.
        let plus = GeneralizedEta::new(c(0.0, 0.0), 10.0);
        let minus = GeneralizedEta::new(c(0.0, 0.0), 0.0);
        let r = ctp_action_from(&plus, &minus).unwrap();
        // alpha_+ = e^{-10 i}, so the argument is e^{10 i}.
        assert!((r.re_gamma + 5.0).abs() < 1e-12);
        assert_eq!(r.winding, 2);
    }

    #[test]
    fn eom_baseline_and_reality() {
        let free = DriveProfile::free(Window::symmetric(20.0), 1.0).unwrap();
        for t in [-10.0, -3.0, 0.0, 7.5] {
            assert_eq!(eom_source(&free, t).unwrap(), -0.5);
        }
        let p = pulse(0.1);
        assert_eq!(eom_source(&p, -15.0).unwrap(), -0.5);
        for t in [-2.0, 0.0, 1.3, 6.0] {
            let s = eom_sample(&p, t).unwrap();
            assert!(s.im_residue.abs() < 1e-10);
        }
    }

    #[test]
    fn eom_is_causal() {
        let w = Window::symmetric(30.0);
        let base = DriveProfile::gaussian_pulse(1.0, w, 0.1, -3.0, 1.5).unwrap();
        let later = DriveProfile::gaussian_pulse(1.0, w, 0.3, 4.0, 0.5).unwrap();
        let switched = base.switched_to(later.kind().clone(), 2.0).unwrap();
        for t in [-8.0, -3.0, 0.0, 1.99, 2.0] {
            assert_eq!(eom_source(&base, t).unwrap().to_bits(), eom_source(&switched, t).unwrap().to_bits());
        }
        assert_ne!(eom_source(&base, 6.0).unwrap(), eom_source(&switched, 6.0).unwrap());
    }

    #[test]
    fn eom_matches_finite_difference_oracle() {
        let p = DriveProfile::gaussian_pulse(1.0, Window::symmetric(30.0), 0.04, 0.0, 1.5).unwrap();
        for t in [-1.0, 0.5, 4.0] {
            let fd = causal_variation_oracle(&p, t, 1e-3).unwrap();
            assert!(!fd.warning, "{fd:?}");
            let exact = eom_source_exact(&p, t, 1e-13).unwrap();
            assert!((fd.value - exact).abs() < 1e-8, "t={t}: {} vs {}", fd.value, exact);
            let tol = eom_tolerance(&p, t, fd.error).unwrap();
            let m = eom_source(&p, t).unwrap();
            assert!((m - fd.value).abs() < tol, "t={t}: magnus {m} exact {} tol {tol}", fd.value);
        }
    }

    #[test]
    fn free_oracle_matches_baseline() {
        let free = DriveProfile::free(Window::symmetric(20.0), 1.0).unwrap();
        let fd = causal_variation_oracle(&free, 1.0, 1e-3).unwrap();
        assert!((fd.value + 0.5).abs() < 1e-8);
    }

    #[test]
    fn mismatched_branches_are_rejected() {
        let a = DriveProfile::free(Window::symmetric(20.0), 1.0).unwrap();
        let b = DriveProfile::free(Window::symmetric(10.0), 1.0).unwrap();
        assert!(ctp_action(&a, &b).is_err());
    }
}
