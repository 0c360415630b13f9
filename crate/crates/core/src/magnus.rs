//! Magnus expansion of the interaction-picture propagator `U_I = exp(A)`,
//! `A = A1 + A2 + A3 + ...`, for the perturbation
//! `H'_I(t) = eta(t) [[1, e^{2 i omega0 t}], [-e^{-2 i omega0 t}, -1]]`.
//!
//! `A1` is assembled from the drive's Fourier transforms. `A2` and `A3` are
//! computed in the time domain as nested integrals over the ordered simplex
//! `t1 > t2 > t3`, using fixed 16-point Gauss-Legendre panels with cumulative
//! inner integrals. `A2` also has a frequency-domain route for cross-checks.

use crate::drive::DriveProfile;
use crate::error::{Error, Result};
use crate::linalg::{self, c, commutator, CMat2, CompensatedSum, C64, I};
use crate::propagator::{Basis, EvolutionMatrix};
use crate::quad::{gl16, integrate_n, panel_edges, QuadOptions};
use std::f64::consts::PI;

/// Relative tolerance accepted for the third-order term.
pub const A3_TOL: f64 = 1e-5;
/// Relative tolerance accepted for the second-order term.
pub const A2_TOL: f64 = 1e-9;

/// A drive frequency close enough to a parametric resonance that secular
/// growth with the window length is expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    /// `Omega` near `2 omega0`; rate linear in the amplitude.
    Primary,
    /// `Omega` near `omega0`; rate quadratic in the amplitude.
    Subleading,
}

/// Flags harmonic drives with `|Omega - 2 omega0|` or `|Omega - omega0|` below `1 / T`.
pub fn detect_resonance(profile: &DriveProfile) -> Option<Resonance> {
    let omega = profile.drive_freq()?.abs();
    let w0 = profile.omega0();
    let width = 1.0 / profile.window().length();
    if (omega - 2.0 * w0).abs() <= width {
        Some(Resonance::Primary)
    } else if (omega - w0).abs() <= width {
        Some(Resonance::Subleading)
    } else {
        None
    }
}

/// Truncated Magnus generator.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnusTerms {
    pub a1: CMat2,
    pub a2: Option<CMat2>,
    pub a3: Option<CMat2>,
    pub order: usize,
    pub omega0: f64,
    pub resonance: Option<Resonance>,
    /// Panel-halving error estimates of the nested integrals.
    pub a2_error: f64,
    pub a3_error: f64,
}

impl MagnusTerms {
    pub fn compute(profile: &DriveProfile, order: usize) -> Result<Self> {
        check_order(order)?;
        let a1 = magnus_a1(profile)?;
        let (a2, a2_error) = if order >= 2 {
            let (m, e) = nested_a2(profile)?;
            (Some(m), e)
        } else {
            (None, 0.0)
        };
        let (a3, a3_error) = if order >= 3 {
            let (m, e) = nested_a3(profile)?;
            (Some(m), e)
        } else {
            (None, 0.0)
        };
        Ok(Self {
            a1,
            a2,
            a3,
            order,
            omega0: profile.omega0(),
            resonance: detect_resonance(profile),
            a2_error,
            a3_error,
        })
    }

    /// `A1 + ... + A_order`.
    pub fn generator(&self) -> CMat2 {
        let mut a = self.a1;
        if let Some(a2) = self.a2 {
            a += a2;
        }
        if let Some(a3) = self.a3 {
            a += a3;
        }
        a
    }

    /// Terms of the drive `lambda * eps`: `A_k` scales as `lambda^k`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let l = c(lambda, 0.0);
        Self {
            a1: self.a1 * l,
            a2: self.a2.map(|m| m * l * l),
            a3: self.a3.map(|m| m * l * l * l),
            a2_error: self.a2_error * lambda * lambda,
            a3_error: self.a3_error * lambda.powi(3).abs(),
            ..self.clone()
        }
    }

    /// Same terms truncated at a lower order.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        check_order(order)?;
        if order > self.order {
            return Err(Error::Contract(format!("terms computed to order {} only", self.order)));
        }
        Ok(Self {
            a2: if order >= 2 { self.a2 } else { None },
            a3: if order >= 3 { self.a3 } else { None },
            order,
            ..self.clone()
        })
    }

    /// `exp(A1 + ... + A_order)` over the window `[t_i, t_f]`.
    pub fn propagator(&self, t_i: f64, t_f: f64) -> Result<EvolutionMatrix> {
        Ok(EvolutionMatrix { entries: exp_traceless(&self.generator())?, basis: Basis::Interaction, t_i, t_f })
    }
}

fn check_order(order: usize) -> Result<()> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(Error::Contract(format!("Magnus order must be 1, 2 or 3, got {order}")))
    }
}

/// `A1 = -i int H'_I dt = [[-i eta~(0), -i eta~(-2 w0)], [i eta~(2 w0), i eta~(0)]]`.
pub fn magnus_a1(profile: &DriveProfile) -> Result<CMat2> {
    let w0 = profile.omega0();
    let e0 = profile.fourier_eta(0.0)?.value;
    let ep = profile.fourier_eta(2.0 * w0)?.value;
    let em = profile.fourier_eta(-2.0 * w0)?.value;
    Ok(CMat2::new(-I * e0, -I * em, I * ep, I * e0))
}

/// `A2 = -1/2 int_{t1 > t2} [H'_I(t1), H'_I(t2)]`, time-domain nested quadrature.
pub fn magnus_a2(profile: &DriveProfile) -> Result<CMat2> {
    Ok(nested_a2(profile)?.0)
}

/// `A3 = i/6 int_{t1 > t2 > t3} ([H1, [H2, H3]] + [H3, [H2, H1]])`.
pub fn magnus_a3(profile: &DriveProfile) -> Result<CMat2> {
    Ok(nested_a3(profile)?.0)
}

/// `exp(A1 + ... + A_order)` as an interaction-picture propagator.
pub fn truncated_propagator(profile: &DriveProfile, order: usize) -> Result<EvolutionMatrix> {
    let w = profile.window();
    MagnusTerms::compute(profile, order)?.propagator(w.t_min, w.t_max)
}

/// `cosh(mu)` and `sinh(mu) / mu` as functions of `mu^2`; both are even in `mu`.
pub fn cosh_sinhc(mu_sq: C64) -> (C64, C64) {
    if mu_sq.norm() < 1e-6 {
        let m2 = mu_sq;
        let m4 = m2 * m2;
        (c(1.0, 0.0) + m2 / 2.0 + m4 / 24.0 + m4 * m2 / 720.0, c(1.0, 0.0) + m2 / 6.0 + m4 / 120.0 + m4 * m2 / 5040.0)
    } else {
        let mu = mu_sq.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    }
}

/// `exp(A) = cosh(mu) I + sinh(mu)/mu A` with `mu^2 = -det A`, for traceless `A`.
pub fn exp_traceless(a: &CMat2) -> Result<CMat2> {
    let tr = linalg::trace(a).norm();
    if tr > 1e-12 * linalg::max_abs(a).max(1.0) {
        return Err(Error::Contract(format!("exp_traceless needs a traceless matrix, |tr A| = {tr:e}")));
    }
    let (ch, sc) = cosh_sinhc(-linalg::det(a));
    Ok(CMat2::identity() * ch + a * sc)
}

/// Principal logarithm of a unimodular matrix near the identity; inverse of
/// [`exp_traceless`]. Returns a traceless matrix.
pub fn log_unimodular(u: &CMat2) -> CMat2 {
    let half_diff = (u[(0, 0)] - u[(1, 1)]) / 2.0;
    let ch = (u[(0, 0)] + u[(1, 1)]) / 2.0;
    // sinh^2(mu) = -det(U - cosh(mu) I), free of cancellation near I.
    let sh = (half_diff * half_diff + u[(0, 1)] * u[(1, 0)]).sqrt();
    let traceless = u - CMat2::identity() * ch;
    if sh.norm() < 1e-8 {
        let s2 = sh * sh;
        // mu / sinh(mu) expanded in sinh^2.
        return traceless * (c(1.0, 0.0) - s2 / 6.0 + s2 * s2 * (3.0 / 40.0));
    }
    let mu = sh.asinh();
    let mu = if (mu.cosh() - ch).norm() > (mu.cosh() + ch).norm() { c(PI, 0.0) * I - mu } else { mu };
    traceless * (mu / mu.sinh())
}

// Basis of H'_I: Z = diag(1, -1), N = E12, P = E21, with coefficients
// eta, eta u, -eta conj(u) for u = e^{2 i omega0 t}.
fn basis() -> [CMat2; 3] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    [CMat2::new(o, z, z, -o), CMat2::new(z, o, z, z), CMat2::new(z, z, o, z)]
}

struct Nested<'a> {
    profile: &'a DriveProfile,
    omega0: f64,
    edges: Vec<f64>,
}

type Vec3 = [C64; 3];
type Mat3 = [[C64; 3]; 3];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

impl<'a> Nested<'a> {
    fn new(profile: &'a DriveProfile, refine: usize) -> Self {
        let w = profile.window();
        let width = profile.panel_width(2.0 * profile.omega0()) / refine as f64;
        let mut knots = vec![w.t_min];
        knots.extend(profile.kinks(w.t_min, w.t_max));
        knots.push(w.t_max);
        let mut edges = vec![w.t_min];
        for k in knots.windows(2) {
            edges.extend_from_slice(&panel_edges(k[0], k[1], width)[1..]);
        }
        Self { profile, omega0: profile.omega0(), edges }
    }

    #[inline]
    fn coeffs(&self, t: f64) -> Vec3 {
        let eta = self.profile.eta(t);
        let (sn, cs) = (2.0 * self.omega0 * t).sin_cos();
        [c(eta, 0.0), c(eta * cs, eta * sn), c(-eta * cs, eta * sn)]
    }

    /// `F(t) = F(l) + int_l^t c`.
    fn cumulative1(&self, l: f64, t: f64, f_l: &Vec3) -> Vec3 {
        let (x, w) = gl16();
        let half = 0.5 * (t - l);
        let mid = 0.5 * (t + l);
        let mut acc = [CompensatedSum::new(); 3];
        for (xi, wi) in x.iter().zip(w) {
            let cf = self.coeffs(mid + half * xi);
            for k in 0..3 {
                acc[k].add(cf[k] * (wi * half));
            }
        }
        std::array::from_fn(|k| f_l[k] + acc[k].value())
    }

    /// `G_bc(t) = G_bc(l) + int_l^t c_b(s) F_c(s) ds`.
    fn cumulative2(&self, l: f64, t: f64, f_l: &Vec3, g_l: &Mat3) -> Mat3 {
        let (x, w) = gl16();
        let half = 0.5 * (t - l);
        let mid = 0.5 * (t + l);
        let mut acc = [[CompensatedSum::new(); 3]; 3];
        for (xi, wi) in x.iter().zip(w) {
            let s = mid + half * xi;
            let cf = self.coeffs(s);
            let f = self.cumulative1(l, s, f_l);
            for b in 0..3 {
                for cc in 0..3 {
                    acc[b][cc].add(cf[b] * f[cc] * (wi * half));
                }
            }
        }
        std::array::from_fn(|b| std::array::from_fn(|cc| g_l[b][cc] + acc[b][cc].value()))
    }

    /// `S_ab = int_{t1 > t2} c_a(t1) c_b(t2)` over the window.
    fn simplex2(&self) -> Mat3 {
        let (x, w) = gl16();
        let mut f_l: Vec3 = [ZERO; 3];
        let mut acc = [[CompensatedSum::new(); 3]; 3];
        for p in self.edges.windows(2) {
            let (l, r) = (p[0], p[1]);
            let half = 0.5 * (r - l);
            let mid = 0.5 * (r + l);
            for (xi, wi) in x.iter().zip(w) {
                let t = mid + half * xi;
                let cf = self.coeffs(t);
                let f = self.cumulative1(l, t, &f_l);
                for a in 0..3 {
                    for b in 0..3 {
                        acc[a][b].add(cf[a] * f[b] * (wi * half));
                    }
                }
            }
            f_l = self.cumulative1(l, r, &f_l);
        }
        std::array::from_fn(|a| std::array::from_fn(|b| acc[a][b].value()))
    }

    /// `S_abc = int_{t1 > t2 > t3} c_a(t1) c_b(t2) c_c(t3)` over the window.
    fn simplex3(&self) -> [Mat3; 3] {
        let (x, w) = gl16();
        let mut f_l: Vec3 = [ZERO; 3];
        let mut g_l: Mat3 = [[ZERO; 3]; 3];
        let mut acc = [[[CompensatedSum::new(); 3]; 3]; 3];
        for p in self.edges.windows(2) {
            let (l, r) = (p[0], p[1]);
            let half = 0.5 * (r - l);
            let mid = 0.5 * (r + l);
            for (xi, wi) in x.iter().zip(w) {
                let t = mid + half * xi;
                let cf = self.coeffs(t);
                let g = self.cumulative2(l, t, &f_l, &g_l);
                for a in 0..3 {
                    for b in 0..3 {
                        for cc in 0..3 {
                            acc[a][b][cc].add(cf[a] * g[b][cc] * (wi * half));
                        }
                    }
                }
            }
            g_l = self.cumulative2(l, r, &f_l, &g_l);
            f_l = self.cumulative1(l, r, &f_l);
        }
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|cc| acc[a][b][cc].value())))
    }

    /// `int |eta| dt`, used as a scale for absolute error floors.
    fn eta_l1(&self) -> f64 {
        let (x, w) = gl16();
        let mut s = 0.0;
        for p in self.edges.windows(2) {
            let half = 0.5 * (p[1] - p[0]);
            let mid = 0.5 * (p[1] + p[0]);
            for (xi, wi) in x.iter().zip(w) {
                s += wi * half * self.profile.eta(mid + half * xi).abs();
            }
        }
        s
    }
}

fn assemble_a2(s: &Mat3) -> CMat2 {
    let b = basis();
    let mut a2 = CMat2::zeros();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                a2 += commutator(&b[i], &b[j]) * s[i][j];
            }
        }
    }
    a2 * c(-0.5, 0.0)
}

fn assemble_a3(s: &[Mat3; 3]) -> CMat2 {
    let b = basis();
    let mut a3 = CMat2::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let m = commutator(&b[i], &commutator(&b[j], &b[k])) + commutator(&b[k], &commutator(&b[j], &b[i]));
                a3 += m * s[i][j][k];
            }
        }
    }
    a3 * (I / 6.0)
}

fn check_estimate(value: &CMat2, estimate: f64, tol: f64, floor: f64) -> Result<()> {
    let target = tol * linalg::max_abs(value).max(floor);
    if estimate > target {
        Err(Error::Accuracy { estimate, tolerance: target })
    } else {
        Ok(())
    }
}

fn nested_a2(profile: &DriveProfile) -> Result<(CMat2, f64)> {
    if profile.is_trivial() {
        return Ok((CMat2::zeros(), 0.0));
    }
    let coarse = Nested::new(profile, 1);
    let fine = Nested::new(profile, 2);
    let a = assemble_a2(&coarse.simplex2());
    let b = assemble_a2(&fine.simplex2());
    let est = linalg::max_abs(&(a - b));
    check_estimate(&b, est, A2_TOL, 1e-6 * fine.eta_l1().powi(2))?;
    Ok((b, est))
}

fn nested_a3(profile: &DriveProfile) -> Result<(CMat2, f64)> {
    if profile.is_trivial() {
        return Ok((CMat2::zeros(), 0.0));
    }
    let coarse = Nested::new(profile, 1);
    let fine = Nested::new(profile, 2);
    let a = assemble_a3(&coarse.simplex3());
    let b = assemble_a3(&fine.simplex3());
    let est = linalg::max_abs(&(a - b));
    check_estimate(&b, est, A3_TOL, 1e-6 * fine.eta_l1().powi(3))?;
    Ok((b, est))
}

/// `A2` from the drive spectrum.
///
/// With `theta~(nu) = -i / (nu - i0)` the ordered double integrals become
/// `S_ab = int dnu/2pi theta~(nu) c~_a(-nu) c~_b(nu)`. Only the antisymmetric
/// combination `S_ab - S_ba` enters `A2`; its integrand is odd in `nu`, so
/// the delta-function part cancels and the principal value reduces to
/// `(-i/pi) int_0^inf g_ab(nu) / nu dnu`, which is regular at `nu = 0`.
pub fn magnus_a2_frequency(profile: &DriveProfile) -> Result<CMat2> {
    if profile.is_trivial() {
        return Ok(CMat2::zeros());
    }
    let w0 = profile.omega0();
    let cutoff = profile.spectral_cutoff() + 2.0 * w0;
    let transform = |nu: f64| -> Result<(Vec3, Vec3)> {
        let e = profile.fourier_eta(nu)?.value;
        let em = profile.fourier_eta(nu - 2.0 * w0)?.value;
        let ep = profile.fourier_eta(nu + 2.0 * w0)?.value;
        // c~_a(nu) and c~_a(-nu), using eta~(-x) = conj(eta~(x)).
        Ok(([e, em, -ep], [e.conj(), ep.conj(), -em.conj()]))
    };
    let failure = std::cell::Cell::new(None);
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let integrand = |nu: f64| -> Vec3 {
        match transform(nu) {
            Ok((pos, neg)) => pairs.map(|(a, b)| (neg[a] * pos[b] - neg[b] * pos[a]) / nu),
            Err(e) => {
                failure.set(Some(e));
                [ZERO; 3]
            }
        }
    };
    let opts = QuadOptions { rel_tol: 1e-10, l1_floor: 1e-6, max_panels: 200_000 };
    let (vals, _, _) = integrate_n(integrand, 0.0, cutoff, profile.spectral_panel_width(), &opts)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let b = basis();
    let mut a2 = CMat2::zeros();
    for (k, (i, j)) in pairs.iter().enumerate() {
        let d = vals[k] * (-I / PI);
        a2 += commutator(&b[*i], &b[*j]) * d;
    }
    Ok(a2 * c(-0.5, 0.0))
}
