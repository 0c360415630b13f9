//! Time-dependent frequency perturbations `eps(t)` with `omega^2(t) = omega0^2 + eps(t)`,
//! and their ordinary and retarded Fourier transforms.
//!
//! Transforms use the convention `F(nu) = int dt f(t) e^{-i nu t}` over the
//! profile window; `eps` is identically zero outside the window.

use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::quad::{integrate, QuadOptions};
use std::f64::consts::PI;

/// Gaussian tails beyond this many widths (relative mass erfc(6) ~ 2e-17) are
/// treated as zero when deciding whether a closed-form transform applies.
const GAUSS_COVERAGE: f64 = 6.0;

/// Interpolation used between tabulated samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Fritsch-Carlson monotone cubic; never overshoots the data.
    #[default]
    MonotoneCubic,
    Linear,
}

/// Tabulated samples `(t_k, eps_k)` with precomputed Hermite slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    interpolation: Interpolation,
}

impl Table {
    pub fn new(samples: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "tabulated drive needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let (times, values): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidProfile("tabulated samples must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("tabulated times must be strictly increasing".into()));
        }
        let slopes = match interpolation {
            Interpolation::MonotoneCubic => monotone_slopes(&times, &values),
            Interpolation::Linear => vec![0.0; times.len()],
        };
        Ok(Self { times, values, slopes, interpolation })
    }

    /// Parse two-column CSV `time,epsilon`. A leading non-numeric line is a header.
    pub fn from_csv_str(text: &str, interpolation: Interpolation) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cols.as_slice() {
                [t, e] => t.parse::<f64>().ok().zip(e.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(s) => samples.push(s),
                None if samples.is_empty() && lineno == 0 => continue,
                None => {
                    return Err(Error::InvalidProfile(format!(
                        "csv line {}: expected two numeric columns, got '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(samples, interpolation)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn min_spacing(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.span();
        if t < lo || t > hi {
            return 0.0;
        }
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            n if n >= self.times.len() => self.times.len() - 2,
            n => n - 1,
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        match self.interpolation {
            Interpolation::Linear => y0 + s * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
            }
        }
    }

    /// Samples multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            slopes: self.slopes.iter().map(|v| v * factor).collect(),
            interpolation: self.interpolation,
        }
    }
}

fn monotone_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (t[k + 1] - t[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { 0.5 * (delta[k - 1] + delta[k]) };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// Shape of `eps(t)` before windowing.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveKind {
    /// `amplitude * cos(drive_freq * t + phase)`
    Harmonic { amplitude: f64, drive_freq: f64, phase: f64 },
    /// `amplitude * exp(-t^2 / envelope_width^2) * cos(drive_freq * t)`
    EnvelopedHarmonic { amplitude: f64, drive_freq: f64, envelope_width: f64 },
    /// `amplitude * exp(-(t - center)^2 / width^2)`
    GaussianPulse { amplitude: f64, center: f64, width: f64 },
    /// Interpolated samples; zero outside the sampled span.
    Tabulated(Table),
    /// `before(t)` for `t <= at`, `after(t)` for `t > at`.
    Switched { before: Box<DriveKind>, after: Box<DriveKind>, at: f64 },
}

impl DriveKind {
    fn eval(&self, t: f64) -> f64 {
        match self {
            DriveKind::Harmonic { amplitude, drive_freq, phase } => amplitude * (drive_freq * t + phase).cos(),
            DriveKind::EnvelopedHarmonic { amplitude, drive_freq, envelope_width } => {
                let x = t / envelope_width;
                amplitude * (-x * x).exp() * (drive_freq * t).cos()
            }
            DriveKind::GaussianPulse { amplitude, center, width } => {
                let x = (t - center) / width;
                amplitude * (-x * x).exp()
            }
            DriveKind::Tabulated(table) => table.eval(t),
            DriveKind::Switched { before, after, at } => {
                if t <= *at {
                    before.eval(t)
                } else {
                    after.eval(t)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidProfile(format!("{name} must be finite and positive, got {x}")))
            }
        };
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidProfile(format!("{name} must be finite, got {x}")))
            }
        };
        match self {
            DriveKind::Harmonic { amplitude, drive_freq, phase } => {
                finite("amplitude", *amplitude)?;
                finite("drive_freq", *drive_freq)?;
                finite("phase", *phase)
            }
            DriveKind::EnvelopedHarmonic { amplitude, drive_freq, envelope_width } => {
                finite("amplitude", *amplitude)?;
                finite("drive_freq", *drive_freq)?;
                positive("envelope_width", *envelope_width)
            }
            DriveKind::GaussianPulse { amplitude, center, width } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                positive("width", *width)
            }
            DriveKind::Tabulated(_) => Ok(()),
            DriveKind::Switched { before, after, at } => {
                finite("switch time", *at)?;
                before.validate()?;
                after.validate()
            }
        }
    }

    /// Upper bound on `|eps|`.
    fn sup_abs(&self) -> f64 {
        match self {
            DriveKind::Harmonic { amplitude, .. }
            | DriveKind::EnvelopedHarmonic { amplitude, .. }
            | DriveKind::GaussianPulse { amplitude, .. } => amplitude.abs(),
            DriveKind::Tabulated(table) => table.values.iter().fold(0.0, |m, v| m.max(v.abs())),
            DriveKind::Switched { before, after, .. } => before.sup_abs().max(after.sup_abs()),
        }
    }

    /// Largest angular frequency carried by the shape, and the shortest time
    /// scale of its envelope.
    fn resolution(&self) -> (f64, f64) {
        match self {
            DriveKind::Harmonic { drive_freq, .. } => (drive_freq.abs(), f64::INFINITY),
            DriveKind::EnvelopedHarmonic { drive_freq, envelope_width, .. } => {
                (drive_freq.abs() + 6.0 / envelope_width, *envelope_width)
            }
            DriveKind::GaussianPulse { width, .. } => (6.0 / width, *width),
            DriveKind::Tabulated(table) => {
                let dt = table.min_spacing();
                (PI / dt, dt)
            }
            DriveKind::Switched { before, after, .. } => {
                let (f1, s1) = before.resolution();
                let (f2, s2) = after.resolution();
                (f1.max(f2), s1.min(s2))
            }
        }
    }

    fn panel_width(&self, nu: f64) -> f64 {
        let (freq, scale) = self.resolution();
        let period = 2.0 * PI / (freq + nu.abs()).max(1e-300);
        (period / 8.0).min(scale / 2.0)
    }

    fn switch_times(&self, out: &mut Vec<f64>) {
        if let DriveKind::Switched { before, after, at } = self {
            out.push(*at);
            before.switch_times(out);
            after.switch_times(out);
        }
    }

    fn knots(&self, out: &mut Vec<f64>) {
        match self {
            DriveKind::Tabulated(table) => out.extend_from_slice(&table.times),
            DriveKind::Switched { before, after, .. } => {
                before.knots(out);
                after.knots(out);
            }
            _ => {}
        }
    }

    /// Frequency beyond which `|eps~|^2` is negligible (Gaussian shapes) or
    /// decays only algebraically (hard edges, tabulated data).
    fn spectral_cutoff(&self, omega0: f64) -> f64 {
        // exp(-nu^2 tau^2 / 2) = 1e-16
        const GAUSS_DECAY: f64 = 8.6;
        match self {
            DriveKind::Harmonic { drive_freq, .. } => 50.0 * (drive_freq.abs() + 2.0 * omega0),
            DriveKind::EnvelopedHarmonic { drive_freq, envelope_width, .. } => {
                drive_freq.abs() + GAUSS_DECAY / envelope_width
            }
            DriveKind::GaussianPulse { width, .. } => GAUSS_DECAY / width,
            DriveKind::Tabulated(table) => 4.0 * PI / table.min_spacing(),
            DriveKind::Switched { before, after, .. } => {
                50.0 * before.spectral_cutoff(omega0).max(after.spectral_cutoff(omega0))
            }
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            DriveKind::Harmonic { amplitude, drive_freq, phase } => {
                DriveKind::Harmonic { amplitude: amplitude * factor, drive_freq: *drive_freq, phase: *phase }
            }
            DriveKind::EnvelopedHarmonic { amplitude, drive_freq, envelope_width } => DriveKind::EnvelopedHarmonic {
                amplitude: amplitude * factor,
                drive_freq: *drive_freq,
                envelope_width: *envelope_width,
            },
            DriveKind::GaussianPulse { amplitude, center, width } => {
                DriveKind::GaussianPulse { amplitude: amplitude * factor, center: *center, width: *width }
            }
            DriveKind::Tabulated(table) => DriveKind::Tabulated(table.scaled(factor)),
            DriveKind::Switched { before, after, at } => DriveKind::Switched {
                before: Box::new(before.scaled(factor)),
                after: Box::new(after.scaled(factor)),
                at: *at,
            },
        }
    }

    /// `int_a^b eps(t) e^{-i nu t} dt` for `a <= b`, ignoring any window.
    fn segment(&self, nu: f64, a: f64, b: f64, opts: &QuadOptions) -> Result<(C64, f64)> {
        if b <= a {
            return Ok((c(0.0, 0.0), 0.0));
        }
        match self {
            DriveKind::Harmonic { amplitude, drive_freq, phase } => {
                let up = c(phase.cos(), phase.sin()) * exp_segment(drive_freq - nu, a, b);
                let down = c(phase.cos(), -phase.sin()) * exp_segment(-drive_freq - nu, a, b);
                Ok(((up + down) * (0.5 * amplitude), 0.0))
            }
            DriveKind::EnvelopedHarmonic { amplitude, drive_freq, envelope_width }
                if a <= -GAUSS_COVERAGE * envelope_width && b >= GAUSS_COVERAGE * envelope_width =>
            {
                let g = |w: f64| (-(w * envelope_width).powi(2) / 4.0).exp();
                let v = 0.5 * amplitude * envelope_width * PI.sqrt() * (g(nu - drive_freq) + g(nu + drive_freq));
                Ok((c(v, 0.0), 0.0))
            }
            DriveKind::GaussianPulse { amplitude, center, width }
                if a <= center - GAUSS_COVERAGE * width && b >= center + GAUSS_COVERAGE * width =>
            {
                let mag = amplitude * width * PI.sqrt() * (-(nu * width).powi(2) / 4.0).exp();
                Ok((c((nu * center).cos(), -(nu * center).sin()) * mag, 0.0))
            }
            DriveKind::Tabulated(table) => {
                let (lo, hi) = table.span();
                let (a, b) = (a.max(lo), b.min(hi));
                if b <= a {
                    return Ok((c(0.0, 0.0), 0.0));
                }
                let width = self.panel_width(nu);
                let mut total = crate::linalg::CompensatedSum::new();
                let mut err = 0.0;
                let start = table.times.partition_point(|&x| x <= a).saturating_sub(1);
                for w in table.times[start..].windows(2) {
                    let (l, r) = (w[0].max(a), w[1].min(b));
                    if l >= b {
                        break;
                    }
                    if r <= l {
                        continue;
                    }
                    let q = integrate(|t| table.eval(t) * phase_factor(nu, t), l, r, width, opts)?;
                    total.add(q.value);
                    err += q.error;
                }
                Ok((total.value(), err))
            }
            DriveKind::Switched { before, after, at } => {
                if b <= *at {
                    before.segment(nu, a, b, opts)
                } else if a >= *at {
                    after.segment(nu, a, b, opts)
                } else {
                    let (v1, e1) = before.segment(nu, a, *at, opts)?;
                    let (v2, e2) = after.segment(nu, *at, b, opts)?;
                    Ok((v1 + v2, e1 + e2))
                }
            }
            _ => {
                let q = integrate(|t| self.eval(t) * phase_factor(nu, t), a, b, self.panel_width(nu), opts)?;
                Ok((q.value, q.error))
            }
        }
    }
}

#[inline]
fn phase_factor(nu: f64, t: f64) -> C64 {
    let x = nu * t;
    c(x.cos(), -x.sin())
}

/// `int_a^b e^{i k t} dt`, stable as `k -> 0`.
fn exp_segment(k: f64, a: f64, b: f64) -> C64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let x = k * half;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    c((k * mid).cos(), (k * mid).sin()) * (2.0 * half * sinc)
}

/// Observation window `[t_min, t_max]`; `eps` vanishes outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Self { t_min, t_max }
    }

    /// Window `[-length/2, length/2]`.
    pub fn symmetric(length: f64) -> Self {
        Self { t_min: -0.5 * length, t_max: 0.5 * length }
    }

    pub fn length(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

/// A transform sample `F(nu)` together with its quadrature error estimate
/// (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub nu: f64,
    pub value: C64,
    pub error: f64,
}

/// A windowed perturbation `eps(t)` on top of the reference frequency `omega0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveProfile {
    kind: DriveKind,
    window: Window,
    omega0: f64,
    quad_tol: f64,
}

impl DriveProfile {
    /// Default relative quadrature tolerance for transforms.
    pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

    pub fn new(kind: DriveKind, window: Window, omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidProfile(format!("omega0 must be positive, got {omega0}")));
        }
        if !(window.t_min.is_finite() && window.t_max.is_finite() && window.t_min < window.t_max) {
            return Err(Error::InvalidProfile(format!(
                "window must be finite with t_min < t_max, got [{}, {}]",
                window.t_min, window.t_max
            )));
        }
        kind.validate()?;
        let sup = kind.sup_abs();
        if sup >= omega0 * omega0 {
            return Err(Error::InvalidProfile(format!(
                "sup |eps| = {sup} must stay below omega0^2 = {}",
                omega0 * omega0
            )));
        }
        Ok(Self { kind, window, omega0, quad_tol: Self::DEFAULT_QUAD_TOL })
    }

    /// The unperturbed oscillator, `eps = 0`.
    pub fn free(window: Window, omega0: f64) -> Result<Self> {
        Self::new(DriveKind::Harmonic { amplitude: 0.0, drive_freq: 0.0, phase: 0.0 }, window, omega0)
    }

    pub fn harmonic(omega0: f64, window: Window, amplitude: f64, drive_freq: f64, phase: f64) -> Result<Self> {
        Self::new(DriveKind::Harmonic { amplitude, drive_freq, phase }, window, omega0)
    }

    pub fn enveloped_harmonic(
        omega0: f64,
        window: Window,
        amplitude: f64,
        drive_freq: f64,
        envelope_width: f64,
    ) -> Result<Self> {
        Self::new(DriveKind::EnvelopedHarmonic { amplitude, drive_freq, envelope_width }, window, omega0)
    }

    pub fn gaussian_pulse(omega0: f64, window: Window, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        Self::new(DriveKind::GaussianPulse { amplitude, center, width }, window, omega0)
    }

    pub fn tabulated(omega0: f64, window: Window, table: Table) -> Result<Self> {
        Self::new(DriveKind::Tabulated(table), window, omega0)
    }

    /// Replace the drive by `after` for all times later than `at`.
    pub fn switched_to(&self, after: DriveKind, at: f64) -> Result<Self> {
        let mut p = Self::new(
            DriveKind::Switched { before: Box::new(self.kind.clone()), after: Box::new(after), at },
            self.window,
            self.omega0,
        )?;
        p.quad_tol = self.quad_tol;
        Ok(p)
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn with_window(&self, window: Window) -> Result<Self> {
        Ok(Self::new(self.kind.clone(), window, self.omega0)?.with_quad_tol(self.quad_tol))
    }

    /// Same shape with `eps` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Ok(Self::new(self.kind.scaled(factor), self.window, self.omega0)?.with_quad_tol(self.quad_tol))
    }

    pub fn kind(&self) -> &DriveKind {
        &self.kind
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions::with_rel_tol(self.quad_tol)
    }

    /// Bound on `|eps(t)|`.
    pub fn sup_abs(&self) -> f64 {
        self.kind.sup_abs()
    }

    /// Whether `eps` is identically zero.
    pub fn is_trivial(&self) -> bool {
        self.sup_abs() == 0.0
    }

    /// Largest angular frequency in `eps`, used for oscillation-aware panels.
    pub fn bandwidth(&self) -> f64 {
        self.kind.resolution().0
    }

    /// Panel width resolving `eps(t) e^{-i nu t}`.
    pub fn panel_width(&self, nu: f64) -> f64 {
        self.kind.panel_width(nu)
    }

    /// Times in `(a, b)` where `eps` may jump: window edges and switch times.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![self.window.t_min, self.window.t_max];
        self.kind.switch_times(&mut pts);
        pts.retain(|&t| t > a && t < b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Breakpoints plus tabulation knots in `(a, b)`: the points where `eps`
    /// is not smooth.
    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = self.breakpoints(a, b);
        self.kind.knots(&mut pts);
        pts.retain(|&t| t > a && t < b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Frequency beyond which the spectrum of `eps` is treated as negligible.
    pub fn spectral_cutoff(&self) -> f64 {
        self.kind.spectral_cutoff(self.omega0)
    }

    /// Drive frequency `Omega` for harmonic kinds.
    pub fn drive_freq(&self) -> Option<f64> {
        match &self.kind {
            DriveKind::Harmonic { drive_freq, .. } | DriveKind::EnvelopedHarmonic { drive_freq, .. } => {
                Some(*drive_freq)
            }
            _ => None,
        }
    }

    /// Panel width in frequency that resolves oscillations of `eps~(nu)`,
    /// whose rate is set by the largest `|t|` in the window.
    pub fn spectral_panel_width(&self) -> f64 {
        let extent = self.window.t_min.abs().max(self.window.t_max.abs()).max(1e-300);
        2.0 * PI / (8.0 * extent)
    }

    /// `eps(t)`; exactly zero outside the window.
    pub fn epsilon(&self, t: f64) -> f64 {
        if self.window.contains(t) {
            self.kind.eval(t)
        } else {
            0.0
        }
    }

    /// `eta(t) = eps(t) / (2 omega0)`.
    pub fn eta(&self, t: f64) -> f64 {
        self.epsilon(t) / (2.0 * self.omega0)
    }

    /// `omega^2(t)`.
    pub fn omega_sq(&self, t: f64) -> f64 {
        self.omega0 * self.omega0 + self.epsilon(t)
    }

    /// `eps~(nu) = int_window eps(t) e^{-i nu t} dt`.
    pub fn fourier(&self, nu: f64) -> Result<FourierValue> {
        let (value, error) = self.kind.segment(nu, self.window.t_min, self.window.t_max, &self.quad_options())?;
        Ok(FourierValue { nu, value, error })
    }

    /// `eta~(nu) = eps~(nu) / (2 omega0)`.
    pub fn fourier_eta(&self, nu: f64) -> Result<FourierValue> {
        let f = self.fourier(nu)?;
        let s = 1.0 / (2.0 * self.omega0);
        Ok(FourierValue { nu, value: f.value * s, error: f.error * s })
    }

    /// Retarded transform `int_{t_min}^{t} eta(tau) e^{-i nu tau} d tau`.
    ///
    /// Only values of `eps` on `[t_min, t]` are read, so the result is
    /// unchanged by any modification of the drive after `t`.
    pub fn retarded_fourier(&self, nu: f64, t: f64) -> Result<FourierValue> {
        let upper = t.min(self.window.t_max);
        if upper <= self.window.t_min {
            return Ok(FourierValue { nu, value: c(0.0, 0.0), error: 0.0 });
        }
        let (value, error) = self.kind.segment(nu, self.window.t_min, upper, &self.quad_options())?;
        let s = 1.0 / (2.0 * self.omega0);
        Ok(FourierValue { nu, value: value * s, error: error * s })
    }

    /// `int eps dt` over the window.
    pub fn mean_integral(&self) -> Result<f64> {
        Ok(self.fourier(0.0)?.value.re)
    }

    /// Advisory zero-mean check: `|int eps dt| <= tol * int |eps| dt`.
    pub fn is_zero_mean(&self, tol: f64) -> Result<bool> {
        let w = self.window;
        let l1 = integrate(
            |t| c(self.epsilon(t).abs(), 0.0),
            w.t_min,
            w.t_max,
            self.panel_width(0.0),
            &self.quad_options(),
        )?
        .value
        .re;
        Ok(self.mean_integral()?.abs() <= tol * l1.max(f64::MIN_POSITIVE))
    }
}
