//! Second-order Euclidean effective action, a small-amplitude cross-check of
//! the Magnus results.

use crate::drive::DriveProfile;
use crate::error::Result;
use crate::linalg::c;
use crate::quad::{integrate, QuadOptions};
use std::f64::consts::PI;

const KERNEL_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Gamma2Result {
    /// Euclidean `Gamma^(2)`; never positive for a real drive.
    pub value: f64,
    /// `Im Gamma^(2)` of the real-time action, from the pole at `nu = 2 omega0`.
    pub im_realtime: f64,
    /// `(nu, kernel(nu))` on `[0, cutoff]`.
    pub kernel_samples: Vec<(f64, f64)>,
    /// Quadrature error estimate of `value`.
    pub error: f64,
}

/// `-1 / (2 omega0 (nu^2 + 4 omega0^2))`.
pub fn gamma2_kernel(nu: f64, omega0: f64) -> f64 {
    -1.0 / (2.0 * omega0 * (nu * nu + 4.0 * omega0 * omega0))
}

/// `1/4 x^2` with `x = |eps~(2 omega0)| / (2 omega0)`.
pub fn im_gamma2(scaled_transform: f64) -> f64 {
    0.25 * scaled_transform * scaled_transform
}

/// `Gamma^(2) = 1/2 int dnu/2pi kernel(nu) |eps~(nu)|^2`.
///
/// The first-order term is assumed to vanish (zero-mean drive). The spectral
/// integral is truncated at the drive's spectral cutoff.
pub fn gamma2(profile: &DriveProfile) -> Result<Gamma2Result> {
    let w0 = profile.omega0();
    let cutoff = profile.spectral_cutoff();
    let kernel_samples = (0..KERNEL_SAMPLES)
        .map(|k| cutoff * k as f64 / (KERNEL_SAMPLES - 1) as f64)
        .map(|nu| (nu, gamma2_kernel(nu, w0)))
        .collect();
    let im_realtime = im_gamma2(profile.fourier_eta(2.0 * w0)?.value.norm());
    if profile.is_trivial() {
        return Ok(Gamma2Result { value: 0.0, im_realtime, kernel_samples, error: 0.0 });
    }
    let failure = std::cell::Cell::new(None);
    let integrand = |nu: f64| match profile.fourier(nu) {
        Ok(f) => c(f.value.norm_sqr() * gamma2_kernel(nu, w0), 0.0),
        Err(e) => {
            failure.set(Some(e));
            c(0.0, 0.0)
        }
    };
    let opts = QuadOptions { rel_tol: 1e-11, ..QuadOptions::default() };
    let r = integrate(integrand, 0.0, cutoff, profile.spectral_panel_width(), &opts)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    // Even integrand: int_{-L}^{L} dnu / 2pi = int_0^L dnu / pi, times 1/2.
    let scale = 1.0 / (2.0 * PI);
    Ok(Gamma2Result { value: r.value.re * scale, im_realtime, kernel_samples, error: r.error * scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::Window;

    /// `-1/(16 w0^2) int int eps(t) eps(s) e^{-2 w0 |t - s|}` with `eps`
    /// linearly interpolated on a uniform grid; the inner convolution is a
    /// pair of exact exponential recursions.
    fn grid_gamma2(profile: &DriveProfile, n: usize) -> f64 {
        let w = profile.window();
        let h = w.length() / n as f64;
        let k = 2.0 * profile.omega0();
        let e: Vec<f64> = (0..=n).map(|i| profile.epsilon(w.t_min + h * i as f64)).collect();
        let d = (-k * h).exp();
        // Weights of a linear segment [0, h] against e^{-k(h - s)}: f(0) a + f(h) b.
        let b = (k * h - 1.0 + d) / (k * k * h);
        let a = (1.0 - d) / k - b;
        let mut left = vec![0.0; n + 1];
        for i in 1..=n {
            left[i] = d * left[i - 1] + a * e[i - 1] + b * e[i];
        }
        let mut right = vec![0.0; n + 1];
        for i in (0..n).rev() {
            right[i] = d * right[i + 1] + a * e[i + 1] + b * e[i];
        }
        let conv: Vec<f64> = (0..=n).map(|i| left[i] + right[i]).collect();
        let mut s = 0.0;
        for i in 0..=n {
            let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += wt * e[i] * conv[i];
        }
        -s * h / (16.0 * profile.omega0().powi(2))
    }

    #[test]
    fn kernel_values() {
        assert_eq!(gamma2_kernel(0.0, 1.0), -0.125);
        assert_eq!(gamma2_kernel(2.0, 1.0), -0.0625);
        assert_eq!(gamma2_kernel(-3.0, 1.3), gamma2_kernel(3.0, 1.3));
        assert!(gamma2_kernel(1e8, 1.0) < 0.0 && gamma2_kernel(1e8, 1.0) > -1e-15);
    }

    #[test]
    fn pole_formula() {
        assert!((im_gamma2(0.2) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn free_drive() {
        let p = DriveProfile::free(Window::symmetric(10.0), 1.0).unwrap();
        let g = gamma2(&p).unwrap();
        assert_eq!((g.value, g.im_realtime), (0.0, 0.0));
    }

    #[test]
    fn enveloped_drive_matches_time_domain_grid() {
        let p = DriveProfile::enveloped_harmonic(1.0, Window::symmetric(120.0), 0.02, 2.0, 10.0).unwrap();
        let g = gamma2(&p).unwrap();
        assert!(g.value < 0.0);
        assert_eq!(g.kernel_samples.len(), 64);
        // Second-order grid error removed by Richardson extrapolation.
        let (coarse, fine) = (grid_gamma2(&p, 24_000), grid_gamma2(&p, 48_000));
        let oracle = (4.0 * fine - coarse) / 3.0;
        assert!((g.value - oracle).abs() < 1e-8 * oracle.abs().max(1e-12), "{} vs {}", g.value, oracle);
    }
}
