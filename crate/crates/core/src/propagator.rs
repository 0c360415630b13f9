//! Exact reference evolution of the phase-space system.
//!
//! With `a = (omega0 q + i p) / sqrt(2 omega0)` the oscillator equation becomes
//! `i dU/dt = H(t) U` for the 2x2 fundamental matrix in the `(a, a*)` basis,
//! where `H = omega0 diag(1, -1) + eta(t) [[1, 1], [-1, -1]]` and
//! `eta = eps / (2 omega0)`. `H` is traceless, so `det U = 1` along the flow;
//! the integrator does not enforce this and [`EvolutionMatrix::det_drift`]
//! exposes how well it is kept.

use crate::drive::DriveProfile;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat2, C64};
use crate::ode::{rk4_fixed, Dop853, Solution, State};
use nalgebra::Vector2;
use std::fmt::Write;

/// Default local tolerance of the reference integrator.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Schrodinger,
    Interaction,
}

/// Fundamental matrix `U(t_f, t_i)` in the `(a, a*)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionMatrix {
    pub entries: CMat2,
    pub basis: Basis,
    pub t_i: f64,
    pub t_f: f64,
}

impl EvolutionMatrix {
    pub fn identity(basis: Basis, t: f64) -> Self {
        Self { entries: linalg::identity(), basis, t_i: t, t_f: t }
    }

    pub fn det(&self) -> C64 {
        linalg::det(&self.entries)
    }

    /// `|det U - 1|`.
    pub fn det_drift(&self) -> f64 {
        (self.det() - c(1.0, 0.0)).norm()
    }

    /// Deviation from `[[a, conj b], [b, conj a]]`, the structure inherited
    /// from a real drive.
    pub fn pseudo_reality_defect(&self) -> f64 {
        linalg::pseudo_reality_defect(&self.entries)
    }

    /// Largest entry magnitude; grows exponentially under resonance.
    pub fn growth_factor(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    /// Divide by `sqrt(det)` to remove accumulated unimodularity drift.
    pub fn renormalized(&self) -> Self {
        let scale = self.det().sqrt();
        Self { entries: self.entries / scale, ..*self }
    }

    /// `self * earlier`, i.e. `U(t_f, t_m) U(t_m, t_i)`.
    pub fn compose(&self, earlier: &EvolutionMatrix) -> Result<Self> {
        if self.basis != earlier.basis {
            return Err(Error::Contract("cannot compose matrices in different bases".into()));
        }
        Ok(Self { entries: self.entries * earlier.entries, basis: self.basis, t_i: earlier.t_i, t_f: self.t_f })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }
}

/// `U^(0)(t) = exp(-i t H0) = diag(e^{-i omega0 t}, e^{i omega0 t})`.
pub fn free_evolution(omega0: f64, t: f64) -> CMat2 {
    let (sn, cs) = (omega0 * t).sin_cos();
    CMat2::new(c(cs, -sn), c(0.0, 0.0), c(0.0, 0.0), c(cs, sn))
}

fn hamiltonian_rhs(profile: &DriveProfile) -> impl Fn(f64, &State<2, 2>) -> State<2, 2> + '_ {
    hamiltonian_rhs_with(profile.omega0(), move |t| profile.eta(t))
}

fn hamiltonian_rhs_with(w0: f64, eta_of: impl Fn(f64) -> f64) -> impl Fn(f64, &State<2, 2>) -> State<2, 2> {
    move |t, u| {
        let eta = eta_of(t);
        // -i H U, written out row by row.
        let r0 = u.row(0) * c(w0 + eta, 0.0) + u.row(1) * c(eta, 0.0);
        let r1 = u.row(0) * c(-eta, 0.0) - u.row(1) * c(w0 + eta, 0.0);
        let mi = c(0.0, -1.0);
        CMat2::from_rows(&[r0 * mi, r1 * mi])
    }
}

fn solver(profile: &DriveProfile, tol: f64) -> Dop853 {
    Dop853::new(tol).with_h_max(4.0 * profile.panel_width(2.0 * profile.omega0()))
}

fn check_interval(t_i: f64, t_f: f64, tol: f64) -> Result<()> {
    if !(t_i.is_finite() && t_f.is_finite()) || t_f < t_i {
        return Err(Error::Contract(format!("need finite t_i <= t_f, got [{t_i}, {t_f}]")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Integrate `y' = f(t, y)` piecewise between the drive's breakpoints.
fn solve_piecewise<const R: usize, const C: usize, F>(
    profile: &DriveProfile,
    f: F,
    t_i: f64,
    t_f: f64,
    y0: State<R, C>,
    tol: f64,
) -> Result<Solution<R, C>>
where
    F: Fn(f64, &State<R, C>) -> State<R, C>,
{
    let ode = solver(profile, tol);
    let h0 = (0.01 / profile.omega0()).min(ode.h_max);
    let mut knots = vec![t_i];
    knots.extend(profile.breakpoints(t_i, t_f));
    knots.push(t_f);
    let mut out = Solution { times: vec![t_i], states: vec![y0], accepted: 0, rejected: 0 };
    let mut y = y0;
    for w in knots.windows(2) {
        let seg = ode.solve(&f, w[0], w[1], y, h0)?;
        y = seg.last().1;
        out.accepted += seg.accepted;
        out.rejected += seg.rejected;
        out.times.extend_from_slice(&seg.times[1..]);
        out.states.extend_from_slice(&seg.states[1..]);
    }
    Ok(out)
}

/// Accepted steps of the reference integrator, with dense evaluation.
#[derive(Debug, Clone)]
pub struct Trajectory<'a> {
    profile: &'a DriveProfile,
    tol: f64,
    solution: Solution<2, 2>,
}

impl<'a> Trajectory<'a> {
    pub fn t_i(&self) -> f64 {
        self.solution.times[0]
    }

    pub fn t_f(&self) -> f64 {
        self.solution.last().0
    }

    pub fn steps(&self) -> usize {
        self.solution.accepted
    }

    /// Largest `|det U - 1|` over the accepted steps.
    pub fn max_det_drift(&self) -> f64 {
        self.solution.states.iter().map(|u| (linalg::det(u) - c(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }

    /// `U(t, t_i)` for any `t` inside the integrated interval, obtained by a
    /// single sub-step from the last accepted point before `t`.
    pub fn at(&self, t: f64) -> Result<EvolutionMatrix> {
        let (t_i, t_f) = (self.t_i(), self.t_f());
        if !(t >= t_i && t <= t_f) {
            return Err(Error::Contract(format!("t = {t} outside integrated interval [{t_i}, {t_f}]")));
        }
        let times = &self.solution.times;
        let k = times.partition_point(|&x| x <= t).saturating_sub(1);
        let (t0, y0) = (times[k], self.solution.states[k]);
        let entries = if t == t0 {
            y0
        } else {
            let f = hamiltonian_rhs(self.profile);
            let k1 = f(t0, &y0);
            Dop853::step(&f, t0, &y0, &k1, t - t0).0
        };
        Ok(EvolutionMatrix { entries, basis: Basis::Schrodinger, t_i, t_f: t })
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// CSV rows `t, Re/Im` of the four entries at every accepted step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u11_re,u11_im,u12_re,u12_im,u21_re,u21_im,u22_re,u22_im\n");
        for (t, u) in self.solution.times.iter().zip(&self.solution.states) {
            let _ = write!(out, "{t}");
            for (r, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let _ = write!(out, ",{},{}", u[(r, col)].re, u[(r, col)].im);
            }
            out.push('\n');
        }
        out
    }
}

/// Reference trajectory `U(t, t_i)` for `t` in `[t_i, t_f]`.
pub fn integrate_trajectory(profile: &DriveProfile, t_i: f64, t_f: f64, tol: f64) -> Result<Trajectory<'_>> {
    check_interval(t_i, t_f, tol)?;
    let solution = solve_piecewise(profile, hamiltonian_rhs(profile), t_i, t_f, linalg::identity(), tol)?;
    Ok(Trajectory { profile, tol, solution })
}

/// `U(t_f, t_i)` solving `i dU/dt = H(t) U`, `U(t_i, t_i) = I`.
///
/// Fails with [`Error::Consistency`] when `|det U - 1|` exceeds `100 * tol`.
pub fn integrate_fundamental(profile: &DriveProfile, t_i: f64, t_f: f64, tol: f64) -> Result<EvolutionMatrix> {
    check_interval(t_i, t_f, tol)?;
    let solution = solve_piecewise(profile, hamiltonian_rhs(profile), t_i, t_f, linalg::identity(), tol)?;
    let u = EvolutionMatrix { entries: solution.last().1, basis: Basis::Schrodinger, t_i, t_f };
    let limit = 100.0 * tol * u.growth_factor().powi(2).max(1.0);
    if u.det_drift() > limit {
        return Err(Error::Consistency { drift: u.det_drift(), limit });
    }
    Ok(u)
}

/// Same matrix by fixed-step RK4, `steps` distributed over the breakpoint
/// segments in proportion to their length.
pub fn integrate_fundamental_rk4(profile: &DriveProfile, t_i: f64, t_f: f64, steps: usize) -> Result<EvolutionMatrix> {
    check_interval(t_i, t_f, 1.0)?;
    let mut knots = vec![t_i];
    knots.extend(profile.breakpoints(t_i, t_f));
    knots.push(t_f);
    let span = (t_f - t_i).max(f64::MIN_POSITIVE);
    let f = hamiltonian_rhs(profile);
    let mut y = linalg::identity();
    for w in knots.windows(2) {
        let n = (((w[1] - w[0]) / span) * steps as f64).ceil().max(1.0) as usize;
        y = rk4_fixed(&f, w[0], w[1], y, n);
    }
    Ok(EvolutionMatrix { entries: y, basis: Basis::Schrodinger, t_i, t_f })
}

/// `U_I(t_f, t_i) = [U^(0)(t_f)]^{-1} U U^(0)(t_i)`.
pub fn to_interaction_picture(u: &EvolutionMatrix, omega0: f64) -> Result<EvolutionMatrix> {
    if u.basis != Basis::Schrodinger {
        return Err(Error::Contract("to_interaction_picture expects a Schrodinger-picture matrix".into()));
    }
    let entries = free_evolution(omega0, -u.t_f) * u.entries * free_evolution(omega0, u.t_i);
    Ok(EvolutionMatrix { entries, basis: Basis::Interaction, ..*u })
}

/// Interaction-picture propagator `U_I(t_f, t_i)` from the reference integrator.
pub fn interaction_propagator_between(profile: &DriveProfile, t_i: f64, t_f: f64, tol: f64) -> Result<EvolutionMatrix> {
    to_interaction_picture(&integrate_fundamental(profile, t_i, t_f, tol)?, profile.omega0())
}

/// `U_I(t_f, t_i)` for the drive `eta(t) + extra(t)`.
///
/// `extra` must be smooth on `[t_i, t_f]` apart from the drive's own breakpoints.
pub fn interaction_propagator_perturbed<F>(
    profile: &DriveProfile,
    extra: F,
    t_i: f64,
    t_f: f64,
    tol: f64,
) -> Result<EvolutionMatrix>
where
    F: Fn(f64) -> f64,
{
    check_interval(t_i, t_f, tol)?;
    let rhs = hamiltonian_rhs_with(profile.omega0(), |t| profile.eta(t) + extra(t));
    let solution = solve_piecewise(profile, rhs, t_i, t_f, linalg::identity(), tol)?;
    let u = EvolutionMatrix { entries: solution.last().1, basis: Basis::Schrodinger, t_i, t_f };
    to_interaction_picture(&u, profile.omega0())
}

/// Full-window interaction-picture propagator.
pub fn interaction_propagator(profile: &DriveProfile, tol: f64) -> Result<EvolutionMatrix> {
    let w = profile.window();
    interaction_propagator_between(profile, w.t_min, w.t_max, tol)
}

/// Determinant ratio `det K / det K0 = [U_I]_22` over the full window.
pub fn gy_ratio(profile: &DriveProfile, tol: f64) -> Result<C64> {
    Ok(interaction_propagator(profile, tol)?.get(1, 1))
}

fn second_order_rhs(profile: &DriveProfile) -> impl Fn(f64, &State<2, 1>) -> State<2, 1> + '_ {
    move |t, y| Vector2::new(y[1], -y[0] * c(profile.omega_sq(t), 0.0))
}

/// Determinant ratio from the second-order equation `q'' + omega^2(t) q = 0`.
///
/// The boundary data `q(t_min) = 0, q'(t_min) = 1` evolved along the rotated
/// contour `T -> (1 - i0) infinity` keep only the `e^{i omega0 t}` component at
/// both ends. On a finite real window this limit is taken exactly by starting
/// from the pure mode `q = 1, q' = i omega0` and reading off the coefficient of
/// `e^{i omega0 t}` at `t_max`, normalized by the same quantity for `eps = 0`.
pub fn gy_ratio_second_order(profile: &DriveProfile, tol: f64) -> Result<C64> {
    let w = profile.window();
    let w0 = profile.omega0();
    check_interval(w.t_min, w.t_max, tol)?;
    let y0 = Vector2::new(c(1.0, 0.0), c(0.0, w0));
    let sol = solve_piecewise(profile, second_order_rhs(profile), w.t_min, w.t_max, y0, tol)?;
    let y = sol.last().1;
    let coeff = (y[0] * w0 - y[1] * c(0.0, 1.0)) / (2.0 * w0);
    let (sn, cs) = (w0 * w.length()).sin_cos();
    Ok(coeff * c(cs, -sn))
}

/// Literal real-window ratio `q(t_max) / q0(t_max)` with `q(t_min) = 0`,
/// `q'(t_min) = 1`. Oscillates with the window length and is singular when
/// `sin(omega0 T) = 0`; kept for comparison with the rotated-contour value.
pub fn gy_ratio_real_window(profile: &DriveProfile, tol: f64) -> Result<C64> {
    let w = profile.window();
    let w0 = profile.omega0();
    check_interval(w.t_min, w.t_max, tol)?;
    let y0 = Vector2::new(c(0.0, 0.0), c(1.0, 0.0));
    let sol = solve_piecewise(profile, second_order_rhs(profile), w.t_min, w.t_max, y0, tol)?;
    let q0 = (w0 * w.length()).sin() / w0;
    if q0 == 0.0 {
        return Err(Error::SingularPropagator);
    }
    Ok(sol.last().1[0] / q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::Window;

    fn resonant() -> DriveProfile {
        DriveProfile::harmonic(1.0, Window::symmetric(40.0), 0.05, 2.0, 0.0).unwrap()
    }

    #[test]
    fn free_evolution_matches_closed_form() {
        let p = DriveProfile::free(Window::symmetric(10.0), 1.3).unwrap();
        let u = integrate_fundamental(&p, -2.0, 3.5, 1e-12).unwrap();
        let expected = free_evolution(1.3, 5.5);
        assert!(linalg::max_abs(&(u.entries - expected)) < 1e-10);
        let ui = to_interaction_picture(&u, 1.3).unwrap();
        assert!(linalg::max_abs(&(ui.entries - linalg::identity())) < 1e-10);
    }

    #[test]
    fn zero_length_interval_is_identity() {
        let u = integrate_fundamental(&resonant(), 3.0, 3.0, 1e-10).unwrap();
        assert_eq!(u.entries, linalg::identity());
        let ui = to_interaction_picture(&u, 1.0).unwrap();
        assert!(linalg::max_abs(&(ui.entries - linalg::identity())) < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = resonant();
        assert!(matches!(integrate_fundamental(&p, 1.0, 0.0, 1e-10), Err(Error::Contract(_))));
        assert!(matches!(integrate_fundamental(&p, 0.0, 1.0, 0.0), Err(Error::Contract(_))));
        let ui = interaction_propagator(&p, 1e-10).unwrap();
        assert!(to_interaction_picture(&ui, 1.0).is_err());
    }

    #[test]
    fn resonant_propagator_structure() {
        let u = interaction_propagator(&resonant(), 1e-12).unwrap();
        assert!(u.det_drift() < 1e-10);
        assert!(u.pseudo_reality_defect() < 1e-10);
        assert!(u.growth_factor() > 1.0);
    }

    #[test]
    fn dense_output_agrees_with_direct_integration() {
        let p = resonant();
        let traj = integrate_trajectory(&p, -20.0, 20.0, 1e-12).unwrap();
        for t in [-20.0, -13.37, 0.0, 7.5, 20.0] {
            let dense = traj.at(t).unwrap().entries;
            let direct = integrate_fundamental(&p, -20.0, t, 1e-12).unwrap().entries;
            assert!(linalg::max_abs(&(dense - direct)) < 1e-9, "t={t}");
        }
        assert!(traj.at(21.0).is_err());
        assert!(traj.max_det_drift() < 1e-10);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,u11_re"));
        assert_eq!(csv.lines().count(), traj.steps() + 2);
    }

    #[test]
    fn renormalization_restores_unit_determinant() {
        let mut u = integrate_fundamental(&resonant(), -20.0, 20.0, 1e-6).unwrap();
        u.entries *= c(1.001, 0.0);
        assert!(u.renormalized().det_drift() < 1e-14);
    }

    #[test]
    fn gy_routes_agree_for_free_oscillator() {
        let p = DriveProfile::free(Window::symmetric(13.0), 0.7).unwrap();
        assert!((gy_ratio(&p, 1e-12).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!((gy_ratio_second_order(&p, 1e-12).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!((gy_ratio_real_window(&p, 1e-12).unwrap() - c(1.0, 0.0)).norm() < 1e-8);
    }
}
