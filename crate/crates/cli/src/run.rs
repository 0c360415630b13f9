//! Single runs, sweeps and EOM traces.

use crate::config::{RunConfig, SweepParam};
use crate::csv::{num, CsvTable};
use parametric_core::bogoliubov::{
    self, extract_coefficients, inout_action_continued, magnus_action, vacuum_persistence,
};
use parametric_core::magnus::{MagnusTerms, Resonance};
use parametric_core::propagator::interaction_propagator;
use parametric_core::{ctp, perturbation, Bogoliubov, DriveProfile, InOutAction, Window};
use rayon::prelude::*;
use std::fmt::Write;

/// Outcome of a verb: CSV text, a human-readable summary, and whether some
/// rows failed.
#[derive(Debug)]
pub struct Output {
    pub csv: String,
    pub summary: String,
    pub failed_rows: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Numerical { context: String, source: parametric_core::Error },
    #[error("{0}")]
    Validation(String),
}

fn numerical(context: impl Into<String>) -> impl FnOnce(parametric_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Numerical { context, source }
}

const RECORD_COLUMNS: &[&str] = &[
    "omega0[1/time]",
    "window_length[time]",
    "order[1]",
    "alpha_re[1]",
    "alpha_im[1]",
    "beta_re[1]",
    "beta_im[1]",
    "beta_sq[quanta]",
    "im_gamma[hbar]",
    "re_gamma[hbar]",
    "persistence[1]",
    "oracle_alpha_re[1]",
    "oracle_alpha_im[1]",
    "oracle_beta_re[1]",
    "oracle_beta_im[1]",
    "oracle_beta_sq[quanta]",
    "oracle_im_gamma[hbar]",
    "oracle_re_gamma[hbar]",
    "oracle_persistence[1]",
    "oracle_det_drift[1]",
    "gamma2_euclidean[hbar]",
    "gamma2_im_realtime[hbar]",
    "ctp_diag_re[hbar]",
    "ctp_diag_im[hbar]",
    "resonance",
    "status",
];

/// Everything computed for one profile.
#[derive(Debug, Clone)]
pub struct Record {
    pub window_length: f64,
    pub order: usize,
    pub magnus: Bogoliubov,
    pub magnus_action: InOutAction,
    pub oracle: Option<(Bogoliubov, InOutAction, f64)>,
    pub gamma2: perturbation::Gamma2Result,
    pub ctp_diag: (f64, f64),
    pub resonance: Option<Resonance>,
}

pub fn evaluate(profile: &DriveProfile, order: usize, oracle: bool, oracle_tol: f64) -> Result<Record, RunError> {
    let terms = MagnusTerms::compute(profile, order).map_err(numerical("Magnus terms"))?;
    let w = profile.window();
    let u = terms.propagator(w.t_min, w.t_max).map_err(numerical("Magnus propagator"))?;
    let magnus = extract_coefficients(&u)
        .map_err(numerical("Magnus coefficients"))?
        .with_source(bogoliubov::Source::Magnus(order));
    let magnus_action = magnus_action(&terms).map_err(numerical("Magnus action"))?;
    let oracle = if oracle {
        let u = interaction_propagator(profile, oracle_tol).map_err(numerical("oracle propagator"))?;
        let b =
            extract_coefficients(&u).map_err(numerical("oracle coefficients"))?.with_source(bogoliubov::Source::Oracle);
        let action = inout_action_continued(profile, |p| Ok(interaction_propagator(p, oracle_tol)?.get(1, 1)))
            .map_err(numerical("oracle action"))?;
        Some((b, action, u.det_drift()))
    } else {
        None
    };
    let gamma2 = perturbation::gamma2(profile).map_err(numerical("second-order action"))?;
    let diag = ctp::ctp_action(profile, profile).map_err(numerical("CTP diagonal"))?;
    Ok(Record {
        window_length: w.length(),
        order,
        magnus,
        magnus_action,
        oracle,
        gamma2,
        ctp_diag: (diag.re_gamma, diag.im_gamma),
        resonance: terms.resonance,
    })
}

fn record_fields(omega0: f64, r: &Record) -> Vec<String> {
    let b = &r.magnus;
    let mut row = vec![
        num(omega0),
        num(r.window_length),
        r.order.to_string(),
        num(b.alpha.re),
        num(b.alpha.im),
        num(b.beta.re),
        num(b.beta.im),
        num(b.particle_number()),
        num(r.magnus_action.im_gamma),
        num(r.magnus_action.re_gamma),
        num(vacuum_persistence(b)),
    ];
    match &r.oracle {
        Some((o, a, drift)) => row.extend([
            num(o.alpha.re),
            num(o.alpha.im),
            num(o.beta.re),
            num(o.beta.im),
            num(o.particle_number()),
            num(a.im_gamma),
            num(a.re_gamma),
            num(vacuum_persistence(o)),
            num(*drift),
        ]),
        None => row.extend(std::iter::repeat_n(String::new(), 9)),
    }
    row.extend([num(r.gamma2.value), num(r.gamma2.im_realtime), num(r.ctp_diag.0), num(r.ctp_diag.1)]);
    row.push(
        match r.resonance {
            Some(Resonance::Primary) => "primary",
            Some(Resonance::Subleading) => "subleading",
            None => "none",
        }
        .into(),
    );
    row.push("ok".into());
    row
}

fn failed_fields(omega0: f64, window_length: f64, order: usize, err: &RunError) -> Vec<String> {
    let mut row = vec![num(omega0), num(window_length), order.to_string()];
    row.extend(std::iter::repeat_n(String::new(), RECORD_COLUMNS.len() - 4));
    row.push(format!("error: {err}"));
    row
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}

pub fn run_single(config: &RunConfig) -> Result<Output, RunError> {
    let profile = config.build_profile(&config.profile, config.window).map_err(numerical("profile"))?;
    let r = evaluate(&profile, config.order, config.oracle, config.oracle_tol)?;
    let mut table = CsvTable::new("run", RECORD_COLUMNS);
    table.push(record_fields(config.omega0, &r));
    let mut s = String::new();
    let b = &r.magnus;
    let _ = writeln!(s, "Magnus order {}: alpha = {:.9}, beta = {:.9}", r.order, b.alpha, b.beta);
    let _ = writeln!(
        s,
        "  |beta|^2 = {:.6e}, Im Gamma = {:.9}, persistence = {:.9}",
        b.particle_number(),
        r.magnus_action.im_gamma,
        vacuum_persistence(b)
    );
    if let Some((o, a, drift)) = &r.oracle {
        let _ = writeln!(s, "oracle: alpha = {:.9}, beta = {:.9}, |det U - 1| = {drift:.1e}", o.alpha, o.beta);
        let _ = writeln!(
            s,
            "  Im Gamma = {:.9}, gap to Magnus = {:.2e}",
            a.im_gamma,
            (a.im_gamma - r.magnus_action.im_gamma).abs()
        );
    }
    let _ = writeln!(s, "second order: Euclidean {:.6e}, Im {:.6e}", r.gamma2.value, r.gamma2.im_realtime);
    let _ = writeln!(s, "CTP diagonal: ({:.1e}, {:.1e})", r.ctp_diag.0, r.ctp_diag.1);
    Ok(Output { csv: table.render(), summary: s, failed_rows: 0 })
}

/// A local maximum of `|beta|^2` over the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub at: f64,
    pub height: f64,
    /// Full width at half maximum, when both half-height crossings are inside the sweep.
    pub width: Option<f64>,
}

pub fn find_peaks(xs: &[f64], ys: &[f64]) -> Vec<Peak> {
    let floor = 1e-12 * ys.iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if !(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > floor) {
            continue;
        }
        let half = 0.5 * ys[i];
        let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| {
            for j in range {
                let k = (j as isize + step) as usize;
                if ys[k] <= half {
                    let f = (ys[j] - half) / (ys[j] - ys[k]);
                    return Some(xs[j] + f * (xs[k] - xs[j]));
                }
            }
            None
        };
        let left = crossing(&mut (1..=i).rev(), -1);
        let right = crossing(&mut (i..ys.len() - 1), 1);
        peaks.push(Peak { at: xs[i], height: ys[i], width: left.zip(right).map(|(l, r)| r - l) });
    }
    peaks
}

/// Exponent `s` of the first-order law `P = 1 / cosh(s T)`, from a
/// least-squares fit of `acosh(1 / P)` against `T` through the origin.
pub fn cosh_exponent(lengths: &[f64], persistence: &[f64]) -> f64 {
    let sxy: f64 = lengths.iter().zip(persistence).map(|(t, p)| t * (1.0 / p).acosh()).sum();
    let sxx: f64 = lengths.iter().map(|t| t * t).sum();
    sxy / sxx
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run_sweep(config: &RunConfig) -> Result<Output, RunError> {
    let sweep = config.sweep.as_ref().ok_or_else(|| RunError::Validation("config has no sweep.param".into()))?;
    let values = sweep.values();
    let evaluate_point = |x: f64| -> (f64, usize, Result<Record, RunError>) {
        let mut spec = config.profile.clone();
        let mut window = config.window;
        let mut order = config.order;
        match sweep.param {
            SweepParam::Amplitude => spec.amplitude = x,
            SweepParam::DriveFreq => spec.drive_freq = x,
            SweepParam::WindowLength => window = Window::symmetric(x),
            SweepParam::Order => order = x as usize,
        }
        let result = config
            .build_profile(&spec, window)
            .map_err(numerical(format!("profile at {x}")))
            .and_then(|p| evaluate(&p, order, config.oracle, config.oracle_tol));
        (window.length(), order, result)
    };
    let results: Vec<_> = pool(config.workers).install(|| values.par_iter().map(|&x| evaluate_point(x)).collect());

    let mut columns = vec![sweep.param.column()];
    columns.extend_from_slice(RECORD_COLUMNS);
    let mut table = CsvTable::new("sweep", &columns);
    let mut failed = 0;
    let (mut xs, mut beta_sq, mut log_persistence, mut oracle_log_persistence) = (vec![], vec![], vec![], vec![]);
    for (&x, (length, order, result)) in values.iter().zip(&results) {
        let mut row = vec![num(x)];
        match result {
            Ok(r) => {
                row.extend(record_fields(config.omega0, r));
                xs.push(x);
                beta_sq.push(r.magnus.particle_number());
                log_persistence.push(vacuum_persistence(&r.magnus).ln());
                if let Some((o, _, _)) = &r.oracle {
                    oracle_log_persistence.push(vacuum_persistence(o).ln());
                }
            }
            Err(e) => {
                failed += 1;
                row.extend(failed_fields(config.omega0, *length, *order, e));
            }
        }
        table.push(row);
    }

    let mut s = String::new();
    let _ = writeln!(s, "sweep over {}: {} points, {} failed", sweep.param.column(), values.len(), failed);
    let peaks = find_peaks(&xs, &beta_sq);
    if peaks.is_empty() {
        let _ = writeln!(s, "no interior local maxima of |beta|^2");
    }
    for p in &peaks {
        let width = p.width.map_or("open".to_string(), |w| format!("{w:.6}"));
        let _ = writeln!(s, "peak of |beta|^2 at {:.6}: height {:.6e}, FWHM {width}", p.at, p.height);
    }
    if sweep.param == SweepParam::WindowLength && xs.len() >= 2 {
        let persistence: Vec<f64> = log_persistence.iter().map(|l| l.exp()).collect();
        let _ = writeln!(s, "slope of log persistence vs T: Magnus {:.6e}", fitted_slope(&xs, &log_persistence));
        let _ = writeln!(s, "decay exponent of 1/cosh(sT) fit: Magnus {:.6e}", cosh_exponent(&xs, &persistence));
        if oracle_log_persistence.len() == xs.len() {
            let persistence: Vec<f64> = oracle_log_persistence.iter().map(|l| l.exp()).collect();
            let _ =
                writeln!(s, "slope of log persistence vs T: oracle {:.6e}", fitted_slope(&xs, &oracle_log_persistence));
            let _ = writeln!(s, "decay exponent of 1/cosh(sT) fit: oracle {:.6e}", cosh_exponent(&xs, &persistence));
        }
    }
    for (&x, (_, _, result)) in values.iter().zip(&results) {
        if let Err(e) = result {
            let _ = writeln!(s, "point {x}: {e}");
        }
    }
    Ok(Output { csv: table.render(), summary: s, failed_rows: failed })
}

const EOM_COLUMNS: &[&str] = &[
    "t[time]",
    "eom_source[1/eta]",
    "im_residue[1/eta]",
    "eta_ret_2w0_re[1]",
    "eta_ret_2w0_im[1]",
    "eta_ret_0[1]",
    "branch",
    "eom_exact[1/eta]",
];

pub fn emit_eom_trace(config: &RunConfig) -> Result<Output, RunError> {
    let profile = config.build_profile(&config.profile, config.window).map_err(numerical("profile"))?;
    let grid = config.eom.grid();
    let rows: Vec<Result<Vec<String>, RunError>> = pool(config.workers).install(|| {
        grid.par_iter()
            .map(|&t| {
                let s = ctp::eom_sample(&profile, t).map_err(numerical(format!("eom at t = {t}")))?;
                let exact = if config.oracle {
                    num(ctp::eom_source_exact(&profile, t, config.oracle_tol)
                        .map_err(numerical(format!("exact eom at t = {t}")))?)
                } else {
                    String::new()
                };
                let g = s.retarded;
                Ok(vec![
                    num(t),
                    num(s.value),
                    num(s.im_residue),
                    num(g.eta_2w0.re),
                    num(g.eta_2w0.im),
                    num(g.eta_0),
                    format!("{:?}", s.branch).to_lowercase(),
                    exact,
                ])
            })
            .collect()
    });
    let mut table = CsvTable::new("eom", EOM_COLUMNS);
    for row in rows {
        table.push(row?);
    }

    let mut s = format!("EOM trace: {} times on [{}, {}]\n", grid.len(), config.eom.t_min, config.eom.t_max);
    if config.oracle && config.eom.checks > 0 {
        let margin = 0.05 / config.omega0;
        let w = config.window;
        let interior: Vec<f64> =
            grid.iter().copied().filter(|t| t - margin >= w.t_min && t + margin <= w.t_max).collect();
        let picks: Vec<f64> = if interior.is_empty() {
            vec![]
        } else {
            let n = config.eom.checks.min(interior.len());
            (0..n).map(|k| interior[(k * (interior.len() - 1)) / (n - 1).max(1)]).collect()
        };
        let mut failures = Vec::new();
        for t in picks {
            let fd = ctp::causal_variation_oracle(&profile, t, 1e-3)
                .map_err(numerical(format!("variation oracle at t = {t}")))?;
            let value = ctp::eom_source(&profile, t).map_err(numerical("eom"))?;
            let tol = ctp::eom_tolerance(&profile, t, fd.error).map_err(numerical("eom tolerance"))?;
            let gap = (value - fd.value).abs();
            let verdict = if gap <= tol { "ok" } else { "MISMATCH" };
            let _ = writeln!(
                s,
                "check t = {t}: source {value:.9}, finite difference {:.9}, gap {gap:.2e} <= {tol:.2e} {verdict}",
                fd.value
            );
            if gap > tol {
                failures.push(t);
            }
        }
        if !failures.is_empty() {
            return Err(RunError::Validation(format!(
                "{s}EOM source disagrees with the variation oracle at t = {failures:?}"
            )));
        }
    }
    Ok(Output { csv: table.render(), summary: s, failed_rows: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_and_widths() {
        let xs: Vec<f64> = (0..41).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / (1.0 + ((x - 2.0) / 0.3).powi(2))).collect();
        let p = find_peaks(&xs, &ys);
        assert_eq!(p.len(), 1);
        assert!((p[0].at - 2.0).abs() < 1e-12);
        assert!((p[0].width.unwrap() - 0.6).abs() < 0.05);
        assert!(find_peaks(&xs, &xs).is_empty());
    }

    #[test]
    fn slope_of_line() {
        assert!((fitted_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-15);
    }
}
