//! Quadrature kernels: adaptive Gauss-Kronrod 10/21 for complex integrands and
//! fixed Gauss-Legendre panels.
//!
//! Both routines partition the interval into panels no wider than a caller
//! supplied width so that oscillatory integrands are resolved from the start.
//! Panel contributions are accumulated left to right with compensated
//! summation, which makes results independent of refinement order.

// Published coefficient tables keep their full printed digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, C64};
use std::sync::OnceLock;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525765330,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], .., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Relative tolerance on the integral.
    pub rel_tol: f64,
    /// Fraction of the L1 norm of the integrand used as an absolute floor,
    /// so that integrals that cancel to (near) zero still terminate.
    pub l1_floor: f64,
    /// Hard cap on the number of panels.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, l1_floor: 1e-3, max_panels: 200_000 }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    /// Sum of per-panel |K21 - G10| estimates.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [C64; N],
    abs: f64,
    error: f64,
}

#[inline]
fn axpy<const N: usize>(acc: &mut [C64; N], w: f64, x: &[C64; N]) {
    for (a, x) in acc.iter_mut().zip(x) {
        *a += *x * w;
    }
}

#[inline]
fn l1_norm<const N: usize>(x: &[C64; N]) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}

fn gk21<const N: usize, F: Fn(f64) -> [C64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let zero = [C64::new(0.0, 0.0); N];
    let mut kronrod = zero;
    let mut gauss = zero;
    axpy(&mut kronrod, WGK[10], &fc);
    let mut abs = l1_norm(&fc) * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let mut pair = f1;
        axpy(&mut pair, 1.0, &f2);
        axpy(&mut kronrod, WGK[j], &pair);
        abs += (l1_norm(&f1) + l1_norm(&f2)) * WGK[j];
        if j % 2 == 1 {
            axpy(&mut gauss, WG[j / 2], &pair);
        }
    }
    let mut error = 0.0;
    let mut value = zero;
    for k in 0..N {
        value[k] = kronrod[k] * half;
        error += ((kronrod[k] - gauss[k]) * half).norm();
    }
    Panel { a, b, value, abs: abs * half.abs(), error }
}

/// Split `[a, b]` into equal panels no wider than `max_width`.
pub fn panel_edges(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let len = b - a;
    let n = if max_width.is_finite() && max_width > 0.0 { ((len / max_width).ceil() as usize).max(1) } else { 1 };
    let mut edges: Vec<f64> = (0..=n).map(|k| a + len * (k as f64) / (n as f64)).collect();
    edges[n] = b;
    edges
}

/// Adaptive Gauss-Kronrod integration of a complex integrand over `[a, b]`.
///
/// The interval is first cut into panels of width at most `initial_width`;
/// the panel with the largest error estimate is bisected until the summed
/// estimate drops below `rel_tol * max(|I|, l1_floor * ||f||_1)`.
pub fn integrate<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    initial_width: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let (value, error, panels) = integrate_n(|t| [f(t)], a, b, initial_width, opts)?;
    Ok(QuadResult { value: value[0], error, panels })
}

/// Vector-valued variant of [`integrate`]; all components share one panel
/// refinement and the error target applies to their summed magnitudes.
pub fn integrate_n<const N: usize, F: Fn(f64) -> [C64; N]>(
    f: F,
    a: f64,
    b: f64,
    initial_width: f64,
    opts: &QuadOptions,
) -> Result<([C64; N], f64, usize)> {
    let zero = [C64::new(0.0, 0.0); N];
    if a == b {
        return Ok((zero, 0.0, 0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let edges = panel_edges(lo, hi, initial_width);
    let mut panels: Vec<Panel<N>> = edges.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();

    loop {
        let mut sums = [CompensatedSum::new(); N];
        for p in &panels {
            for (s, v) in sums.iter_mut().zip(&p.value) {
                s.add(*v);
            }
        }
        let mut value = zero;
        for (v, s) in value.iter_mut().zip(&sums) {
            *v = s.value() * sign;
        }
        let l1: f64 = panels.iter().map(|p| p.abs).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = opts.rel_tol * l1_norm(&value).max(opts.l1_floor * l1);
        if error <= target || error == 0.0 {
            return Ok((value, error, panels.len()));
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Accuracy { estimate: error, tolerance: target });
        }
        // Bisect the worst panel; ties resolve to the leftmost one.
        let mut worst = 0;
        for (k, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error {
                worst = k;
            }
        }
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Accuracy { estimate: error, tolerance: target });
        }
        panels[worst] = gk21(&f, p.a, mid);
        panels.insert(worst + 1, gk21(&f, mid, p.b));
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Cached 16-point rule used by the nested (simplex) integrals.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Fixed Gauss-Legendre sum over `[a, b]` with the cached 16-point rule.
pub fn gl_fixed<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> C64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = CompensatedSum::new();
    for (xi, wi) in x.iter().zip(w) {
        acc.add(f(mid + half * xi) * *wi);
    }
    acc.value() * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((s - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_oscillatory_integral() {
        // int_0^10 e^{-3it} dt = (1 - e^{-30i}) / (3i)
        let r = integrate(|t| C64::new(0.0, -3.0 * t).exp(), 0.0, 10.0, 0.25, &QuadOptions::default()).unwrap();
        let exact = (C64::new(1.0, 0.0) - C64::new(0.0, -30.0).exp()) / C64::new(0.0, 3.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn adaptive_refines_near_kink() {
        let r = integrate(|t| C64::new(t.abs().sqrt(), 0.0), -1.0, 1.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value.re - 4.0 / 3.0).abs() < 1e-9);
        assert!(r.panels > 1);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let f = |t: f64| C64::new(t * t, t);
        let o = QuadOptions::default();
        let fwd = integrate(f, 0.0, 2.0, 1.0, &o).unwrap().value;
        let bwd = integrate(f, 2.0, 0.0, 1.0, &o).unwrap().value;
        assert_eq!(fwd, -bwd);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let o = QuadOptions { rel_tol: 1e-15, l1_floor: 0.0, max_panels: 3 };
        let err = integrate(|t| C64::new(1.0 / t.abs().sqrt(), 0.0), -1.0, 1.0, 2.0, &o).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }
}
