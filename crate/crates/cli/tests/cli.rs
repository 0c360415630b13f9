use std::path::Path;
use std::process::{Command, Output};

fn parametric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parametric")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Data rows as `column -> field` maps.
fn rows(csv: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn field(row: &[(String, String)], name: &str) -> f64 {
    row.iter().find(|(k, _)| k == name).unwrap().1.parse().unwrap()
}

const RESONANT: &str =
    "omega0 = 1\nwindow.length = 40\nprofile.kind = harmonic\nprofile.amplitude = 0.1\nprofile.drive_freq = 2\n";

#[test]
fn zero_amplitude_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.cfg",
        "window.length = 40\nprofile.kind = harmonic\nprofile.amplitude = 0\nprofile.drive_freq = 2\n",
    );
    let out = parametric(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let r = &rows(&String::from_utf8(out.stdout).unwrap())[0];
    assert_eq!(field(r, "alpha_re[1]"), 1.0);
    assert_eq!(field(r, "beta_sq[quanta]"), 0.0);
    assert_eq!(field(r, "im_gamma[hbar]"), 0.0);
    assert_eq!(field(r, "persistence[1]"), 1.0);
}

#[test]
fn resonant_run_matches_first_order_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "res.cfg", RESONANT);
    let out = parametric(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let r = &rows(&String::from_utf8(out.stdout).unwrap())[0];
    // |eta~(2 omega0)| = 1 + sin(80)/80 on the symmetric window; the nonzero
    // mean eta~(0) = 0.05 sin(40) enters at second order.
    let x = 1.0 + 80f64.sin() / 80.0;
    let im = field(r, "im_gamma[hbar]");
    assert!((im - 0.5 * x.cosh().ln()).abs() < 1e-3, "{im}");
    let oracle = field(r, "oracle_im_gamma[hbar]");
    assert!((oracle - im).abs() < 1e-3);
    assert!(field(r, "ctp_diag_im[hbar]").abs() < 1e-12);
}

#[test]
fn no_oracle_leaves_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "res.cfg", RESONANT);
    let out = parametric(&["run", "--config", &cfg, "--no-oracle", "--order", "2"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let r = &rows(&csv)[0];
    assert!(r.iter().find(|(k, _)| k == "oracle_alpha_re[1]").unwrap().1.is_empty());
    assert_eq!(field(r, "order[1]"), 2.0);
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.cfg",
        &format!("{RESONANT}sweep.param = drive_freq\nsweep.min = 1.5\nsweep.max = 2.5\nsweep.steps = 21\n"),
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        parametric(&["sweep", "--config", &cfg, "--workers", "1", "--out", a.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let out = parametric(&["sweep", "--config", &cfg, "--workers", "4", "--out", b.to_str().unwrap()]);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("peak of |beta|^2 at 2.000000"), "{summary}");
    let rows = rows(&String::from_utf8(a).unwrap());
    assert_eq!(rows.len(), 21);
    let best = rows.iter().max_by(|x, y| field(x, "beta_sq[quanta]").total_cmp(&field(y, "beta_sq[quanta]"))).unwrap();
    assert_eq!(field(best, "drive_freq[1/time]"), 2.0);
}

#[test]
fn window_sweep_reports_decay_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.cfg",
        "window.length = 40\nprofile.kind = harmonic\nprofile.amplitude = 0.05\nprofile.drive_freq = 2\nsweep.param = window_length\nsweep.min = 100\nsweep.max = 200\nsweep.steps = 6\n",
    );
    let out = parametric(&["sweep", "--config", &cfg, "--no-oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let summary = String::from_utf8(out.stderr).unwrap();
    let value = |prefix: &str| -> f64 {
        let line = summary.lines().find(|l| l.starts_with(prefix)).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    // eps0 / (4 omega0); the plain log slope is still bent by cosh at these lengths.
    let s = value("decay exponent of 1/cosh(sT) fit: Magnus");
    assert!((s - 0.0125).abs() < 0.0125 * 0.03, "{summary}");
    let slope = value("slope of log persistence vs T: Magnus");
    assert!(slope < 0.0 && slope > -0.0125);
}

#[test]
fn partial_sweep_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Amplitudes above omega0^2 are rejected per row.
    let cfg = write(
        dir.path(),
        "bad.cfg",
        &format!("{RESONANT}sweep.param = amplitude\nsweep.min = 0.4\nsweep.max = 1.2\nsweep.steps = 3\n"),
    );
    let out = parametric(&["sweep", "--config", &cfg, "--no-oracle"]);
    assert_eq!(out.status.code(), Some(4));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",ok")).count(), 2);
    assert!(csv.contains("error: profile at 1.2"));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "window.length = 40\nprofile.kind = harmonic\nprofile.amplitude = 0.1\n");
    let out = parametric(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing required key `profile.drive_freq`"));
    let out = parametric(&["validate-config", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let good = write(dir.path(), "good.cfg", RESONANT);
    let out = parametric(&["validate-config", "--config", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("profile.kind = harmonic"));
}

#[test]
fn csv_header_carries_conventions_hash() {
    let conv = String::from_utf8(parametric(&["conventions"]).stdout).unwrap();
    let hash = conv.lines().next().unwrap().trim_start_matches("# sha256:").to_string();
    assert!(conv.contains("Gamma_CTP"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "res.cfg", RESONANT);
    let csv = String::from_utf8(parametric(&["run", "--config", &cfg, "--no-oracle"]).stdout).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), format!("# conventions sha256:{hash}"));
}

#[test]
fn eom_trace_is_causal_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let common: String = (0..=20)
        .map(|k| format!("{},{}\n", k as f64 - 10.0, 0.05 * (-(k as f64 - 10.0).powi(2) / 8.0).exp()))
        .collect();
    let later: String = (0..=20)
        .map(|k| {
            let t = k as f64 - 10.0;
            let v = if t <= 2.0 { 0.05 * (-(t * t) / 8.0).exp() } else { 0.02 * t.sin() };
            format!("{t},{v}\n")
        })
        .collect();
    write(dir.path(), "a.csv", &format!("t,eps\n{common}"));
    write(dir.path(), "b.csv", &format!("t,eps\n{later}"));
    let base = "window.length = 20\nprofile.kind = tabulated\nprofile.interpolation = linear\neom.t_min = -9\neom.t_max = 9\neom.steps = 19\n";
    let ca = write(dir.path(), "a.cfg", &format!("{base}profile.csv = a.csv\n"));
    let cb = write(dir.path(), "b.cfg", &format!("{base}profile.csv = b.csv\n"));
    let oa = parametric(&["eom", "--config", &ca]);
    let ob = parametric(&["eom", "--config", &cb]);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    let summary = String::from_utf8(oa.stderr).unwrap();
    assert_eq!(summary.matches(" ok").count(), 5, "{summary}");
    let (ra, rb) = (String::from_utf8(oa.stdout).unwrap(), String::from_utf8(ob.stdout).unwrap());
    let (ra, rb): (Vec<&str>, Vec<&str>) = (ra.lines().skip(3).collect(), rb.lines().skip(3).collect());
    for (a, b) in ra.iter().zip(&rb) {
        let t: f64 = a.split(',').next().unwrap().parse().unwrap();
        if t <= 2.0 {
            assert_eq!(a, b);
        }
    }
    assert_ne!(ra.last(), rb.last());
}
