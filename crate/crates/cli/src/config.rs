//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Keys are dotted
//! (`profile.kind`, `sweep.param`). Unknown and repeated keys are errors.

use parametric_core::{DriveKind, DriveProfile, Interpolation, Table, Window};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{key} (line {line}): {message}")]
    Value { key: String, line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

const KEYS: &[&str] = &[
    "omega0",
    "window.length",
    "window.t_min",
    "window.t_max",
    "profile.kind",
    "profile.amplitude",
    "profile.drive_freq",
    "profile.phase",
    "profile.envelope_width",
    "profile.center",
    "profile.width",
    "profile.csv",
    "profile.interpolation",
    "magnus.order",
    "oracle.enabled",
    "oracle.tol",
    "sweep.param",
    "sweep.min",
    "sweep.max",
    "sweep.steps",
    "sweep.scale",
    "eom.t_min",
    "eom.t_max",
    "eom.steps",
    "eom.checks",
    "output.path",
    "workers",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKindSpec {
    Free,
    Harmonic,
    Enveloped,
    Gaussian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKindSpec,
    pub amplitude: f64,
    pub drive_freq: f64,
    pub phase: f64,
    pub envelope_width: f64,
    pub center: f64,
    pub width: f64,
    /// Samples already parsed from `profile.csv`.
    pub table: Option<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Amplitude,
    DriveFreq,
    WindowLength,
    Order,
}

impl SweepParam {
    pub fn column(&self) -> &'static str {
        match self {
            SweepParam::Amplitude => "amplitude[omega^2]",
            SweepParam::DriveFreq => "drive_freq[1/time]",
            SweepParam::WindowLength => "window_length[time]",
            SweepParam::Order => "order[1]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl SweepSpec {
    /// Sweep values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.param == SweepParam::Order {
            return (self.min as usize..=self.max as usize).map(|k| k as f64).collect();
        }
        if self.steps == 1 {
            return vec![self.min];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                let f = k as f64 / n;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EomSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    /// Grid times compared against the finite-difference oracle.
    pub checks: usize,
}

impl EomSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.t_min];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.t_min + (self.t_max - self.t_min) * k as f64 / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0: f64,
    pub window: Window,
    pub profile: ProfileSpec,
    pub order: usize,
    pub oracle: bool,
    pub oracle_tol: f64,
    pub sweep: Option<SweepSpec>,
    pub eom: EomSpec,
    pub output: Option<PathBuf>,
    pub workers: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text, path.parent())
    }

    /// Parse config text; relative `profile.csv` paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let entries = Entries::parse(text)?;
        let omega0 = entries.float("omega0")?.unwrap_or(1.0);
        let window =
            match (entries.float("window.length")?, entries.float("window.t_min")?, entries.float("window.t_max")?) {
                (Some(len), None, None) => Window::symmetric(len),
                (None, Some(a), Some(b)) => Window::new(a, b),
                (None, None, None) => return Err(ConfigError::Missing("window.length".into())),
                _ => {
                    return Err(ConfigError::Invalid(
                        "give either window.length or both window.t_min and window.t_max".into(),
                    ))
                }
            };
        let kind = match entries.get("profile.kind") {
            None => return Err(ConfigError::Missing("profile.kind".into())),
            Some((v, line)) => match v {
                "free" => ProfileKindSpec::Free,
                "harmonic" => ProfileKindSpec::Harmonic,
                "enveloped" => ProfileKindSpec::Enveloped,
                "gaussian" => ProfileKindSpec::Gaussian,
                "tabulated" => ProfileKindSpec::Tabulated,
                _ => {
                    return Err(entries.bad(
                        "profile.kind",
                        line,
                        "expected free, harmonic, enveloped, gaussian or tabulated",
                    ))
                }
            },
        };
        let need = |key: &str| -> Result<f64, ConfigError> {
            entries.float(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
        };
        let interpolation = match entries.get("profile.interpolation") {
            None | Some(("cubic", _)) => Interpolation::MonotoneCubic,
            Some(("linear", _)) => Interpolation::Linear,
            Some((_, line)) => return Err(entries.bad("profile.interpolation", line, "expected cubic or linear")),
        };
        let mut profile = ProfileSpec {
            kind,
            amplitude: 0.0,
            drive_freq: 0.0,
            phase: entries.float("profile.phase")?.unwrap_or(0.0),
            envelope_width: 0.0,
            center: entries.float("profile.center")?.unwrap_or(0.0),
            width: 0.0,
            table: None,
        };
        match kind {
            ProfileKindSpec::Free => {}
            ProfileKindSpec::Harmonic => {
                profile.amplitude = need("profile.amplitude")?;
                profile.drive_freq = need("profile.drive_freq")?;
            }
            ProfileKindSpec::Enveloped => {
                profile.amplitude = need("profile.amplitude")?;
                profile.drive_freq = need("profile.drive_freq")?;
                profile.envelope_width = need("profile.envelope_width")?;
            }
            ProfileKindSpec::Gaussian => {
                profile.amplitude = need("profile.amplitude")?;
                profile.width = need("profile.width")?;
            }
            ProfileKindSpec::Tabulated => {
                let (file, line) =
                    entries.get("profile.csv").ok_or_else(|| ConfigError::Missing("profile.csv".into()))?;
                let path = match base {
                    Some(dir) if Path::new(file).is_relative() => dir.join(file),
                    _ => PathBuf::from(file),
                };
                let text =
                    std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                let table = Table::from_csv_str(&text, interpolation)
                    .map_err(|e| entries.bad("profile.csv", line, &format!("{}: {e}", path.display())))?;
                profile.amplitude = entries.float("profile.amplitude")?.unwrap_or(1.0);
                profile.table = Some(table);
            }
        }

        let order = match entries.int("magnus.order")? {
            None => 1,
            Some((k @ 1..=3, _)) => k,
            Some((_, line)) => return Err(entries.bad("magnus.order", line, "must be 1, 2 or 3")),
        };
        let oracle = entries.boolean("oracle.enabled")?.unwrap_or(true);
        let oracle_tol = entries.float("oracle.tol")?.unwrap_or(1e-12);
        if !(oracle_tol > 0.0 && oracle_tol <= 1e-2) {
            let line = entries.get("oracle.tol").map_or(0, |e| e.1);
            return Err(entries.bad("oracle.tol", line, "must lie in (0, 1e-2]"));
        }

        let sweep = match entries.get("sweep.param") {
            None => None,
            Some((name, line)) => {
                let param = match name {
                    "amplitude" => SweepParam::Amplitude,
                    "drive_freq" => SweepParam::DriveFreq,
                    "window_length" => SweepParam::WindowLength,
                    "order" => SweepParam::Order,
                    _ => {
                        return Err(entries.bad(
                            "sweep.param",
                            line,
                            "expected amplitude, drive_freq, window_length or order",
                        ))
                    }
                };
                let scale = match entries.get("sweep.scale") {
                    None | Some(("linear", _)) => Scale::Linear,
                    Some(("log", _)) => Scale::Log,
                    Some((_, line)) => return Err(entries.bad("sweep.scale", line, "expected linear or log")),
                };
                let (min, max) = (need("sweep.min")?, need("sweep.max")?);
                let steps = entries.int("sweep.steps")?.map_or(1, |s| s.0);
                let spec = SweepSpec { param, min, max, steps, scale };
                validate_sweep(&spec, &entries)?;
                Some(spec)
            }
        };

        let eom = EomSpec {
            t_min: entries.float("eom.t_min")?.unwrap_or(window.t_min),
            t_max: entries.float("eom.t_max")?.unwrap_or(window.t_max),
            steps: entries.int("eom.steps")?.map_or(101, |s| s.0),
            checks: entries.int("eom.checks")?.map_or(5, |s| s.0),
        };
        if eom.steps == 0 || eom.t_min > eom.t_max || !window.contains(eom.t_min) || !window.contains(eom.t_max) {
            return Err(ConfigError::Invalid(format!(
                "eom grid [{}, {}] with {} steps must lie inside the window [{}, {}]",
                eom.t_min, eom.t_max, eom.steps, window.t_min, window.t_max
            )));
        }

        let workers = match entries.int("workers")? {
            None => 1,
            Some((0, line)) => return Err(entries.bad("workers", line, "must be at least 1")),
            Some((n, _)) => n,
        };
        let output = entries.get("output.path").map(|(p, _)| PathBuf::from(p));
        let config = RunConfig { omega0, window, profile, order, oracle, oracle_tol, sweep, eom, output, workers };
        // Build once so physical constraints surface as config errors.
        config.build_profile(&config.profile, config.window).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }

    /// The drive described by `spec` on `window`.
    pub fn build_profile(&self, spec: &ProfileSpec, window: Window) -> parametric_core::Result<DriveProfile> {
        let w0 = self.omega0;
        match spec.kind {
            ProfileKindSpec::Free => DriveProfile::free(window, w0),
            ProfileKindSpec::Harmonic => {
                DriveProfile::harmonic(w0, window, spec.amplitude, spec.drive_freq, spec.phase)
            }
            ProfileKindSpec::Enveloped => {
                DriveProfile::enveloped_harmonic(w0, window, spec.amplitude, spec.drive_freq, spec.envelope_width)
            }
            ProfileKindSpec::Gaussian => {
                DriveProfile::gaussian_pulse(w0, window, spec.amplitude, spec.center, spec.width)
            }
            ProfileKindSpec::Tabulated => {
                let table = spec.table.clone().expect("tabulated spec carries its table");
                DriveProfile::new(DriveKind::Tabulated(table.scaled(spec.amplitude)), window, w0)
            }
        }
    }
}

fn validate_sweep(spec: &SweepSpec, entries: &Entries) -> Result<(), ConfigError> {
    let line = entries.get("sweep.param").map_or(0, |e| e.1);
    let fail = |m: &str| Err(entries.bad("sweep.param", line, m));
    if !(spec.min.is_finite() && spec.max.is_finite()) || spec.min > spec.max {
        return fail("sweep bounds must be finite with min <= max");
    }
    if spec.steps == 0 {
        return fail("sweep.steps must be at least 1");
    }
    if spec.scale == Scale::Log && spec.min <= 0.0 {
        return fail("log sweep needs positive bounds");
    }
    if spec.param == SweepParam::Order
        && !(spec.min >= 1.0 && spec.max <= 3.0 && spec.min.fract() == 0.0 && spec.max.fract() == 0.0)
    {
        return fail("order sweep bounds must be integers in 1..=3");
    }
    if spec.param == SweepParam::WindowLength && spec.min <= 0.0 {
        return fail("window lengths must be positive");
    }
    Ok(())
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::Syntax { line, message: format!("unknown key `{key}`") });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax { line, message: format!("empty value for `{key}`") });
            }
            if let Some((_, first)) = map.insert(key.to_string(), (value.to_string(), line)) {
                return Err(ConfigError::Syntax { line, message: format!("`{key}` already set on line {first}") });
            }
        }
        Ok(Self { map })
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.map.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn bad(&self, key: &str, line: usize, message: &str) -> ConfigError {
        ConfigError::Value { key: key.into(), line, message: message.into() }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.bad(key, line, &format!("expected a finite number, got `{v}`"))),
            },
        }
    }

    fn int(&self, key: &str) -> Result<Option<(usize, usize)>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<usize>()
                .map(|n| Some((n, line)))
                .map_err(|_| self.bad(key, line, &format!("expected a non-negative integer, got `{v}`"))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(("true", _)) => Ok(Some(true)),
            Some(("false", _)) => Ok(Some(false)),
            Some((v, line)) => Err(self.bad(key, line, &format!("expected true or false, got `{v}`"))),
        }
    }
}

impl fmt::Display for RunConfig {
    /// Normalized form, parseable again (except `profile.csv`, shown as a sample count).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.profile;
        writeln!(f, "omega0 = {:?}", self.omega0)?;
        writeln!(f, "window.t_min = {:?}", self.window.t_min)?;
        writeln!(f, "window.t_max = {:?}", self.window.t_max)?;
        let kind = match p.kind {
            ProfileKindSpec::Free => "free",
            ProfileKindSpec::Harmonic => "harmonic",
            ProfileKindSpec::Enveloped => "enveloped",
            ProfileKindSpec::Gaussian => "gaussian",
            ProfileKindSpec::Tabulated => "tabulated",
        };
        writeln!(f, "profile.kind = {kind}")?;
        match p.kind {
            ProfileKindSpec::Free => {}
            ProfileKindSpec::Harmonic => writeln!(
                f,
                "profile.amplitude = {:?}\nprofile.drive_freq = {:?}\nprofile.phase = {:?}",
                p.amplitude, p.drive_freq, p.phase
            )?,
            ProfileKindSpec::Enveloped => writeln!(
                f,
                "profile.amplitude = {:?}\nprofile.drive_freq = {:?}\nprofile.envelope_width = {:?}",
                p.amplitude, p.drive_freq, p.envelope_width
            )?,
            ProfileKindSpec::Gaussian => writeln!(
                f,
                "profile.amplitude = {:?}\nprofile.center = {:?}\nprofile.width = {:?}",
                p.amplitude, p.center, p.width
            )?,
            ProfileKindSpec::Tabulated => {
                let n = p.table.as_ref().map_or(0, |t| t.samples().count());
                writeln!(f, "profile.amplitude = {:?}\n# profile.csv: {n} samples", p.amplitude)?
            }
        }
        writeln!(f, "magnus.order = {}", self.order)?;
        writeln!(f, "oracle.enabled = {}", self.oracle)?;
        writeln!(f, "oracle.tol = {:?}", self.oracle_tol)?;
        if let Some(s) = &self.sweep {
            let param = match s.param {
                SweepParam::Amplitude => "amplitude",
                SweepParam::DriveFreq => "drive_freq",
                SweepParam::WindowLength => "window_length",
                SweepParam::Order => "order",
            };
            let scale = if s.scale == Scale::Log { "log" } else { "linear" };
            writeln!(
                f,
                "sweep.param = {param}\nsweep.min = {:?}\nsweep.max = {:?}\nsweep.steps = {}\nsweep.scale = {scale}",
                s.min, s.max, s.steps
            )?;
        }
        writeln!(
            f,
            "eom.t_min = {:?}\neom.t_max = {:?}\neom.steps = {}\neom.checks = {}",
            self.eom.t_min, self.eom.t_max, self.eom.steps, self.eom.checks
        )?;
        if let Some(out) = &self.output {
            writeln!(f, "output.path = {}", out.display())?;
        }
        write!(f, "workers = {}", self.workers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RESONANT: &str = "\
# resonant drive
omega0 = 1
window.length = 40
profile.kind = harmonic
profile.amplitude = 0.1
profile.drive_freq = 2   # at 2 omega0
";

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::parse(RESONANT, None).unwrap();
        assert_eq!(c.window, Window::symmetric(40.0));
        assert_eq!(c.order, 1);
        assert!(c.oracle && c.sweep.is_none());
        assert_eq!(c.eom.grid().len(), 101);
    }

    #[test]
    fn normalized_form_round_trips() {
        let text = format!("{RESONANT}sweep.param = drive_freq\nsweep.min = 1.5\nsweep.max = 2.5\nsweep.steps = 11\nmagnus.order = 2\n");
        let c = RunConfig::parse(&text, None).unwrap();
        assert_eq!(RunConfig::parse(&c.to_string(), None).unwrap(), c);
        assert_eq!(c.sweep.unwrap().values()[5], 2.0);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let err = RunConfig::parse(&format!("{RESONANT}magnus.order = 4\n"), None).unwrap_err();
        assert_eq!(err.to_string(), "magnus.order (line 7): must be 1, 2 or 3");
        let err = RunConfig::parse("omega0 = 1\nwindw.length = 3\n", None).unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown key `windw.length`");
        let err = RunConfig::parse(&format!("{RESONANT}omega0 = 2\n"), None).unwrap_err();
        assert!(err.to_string().contains("already set on line 2"));
        let err = RunConfig::parse("window.length = 10\n", None).unwrap_err();
        assert_eq!(err.to_string(), "missing required key `profile.kind`");
        let err =
            RunConfig::parse("window.length = 10\nprofile.kind = harmonic\nprofile.amplitude = x\n", None).unwrap_err();
        assert!(err.to_string().starts_with("profile.amplitude (line 3)"));
    }

    #[test]
    fn physical_constraints_are_config_errors() {
        let err = RunConfig::parse(
            "window.length = 10\nprofile.kind = harmonic\nprofile.amplitude = 2\nprofile.drive_freq = 1\n",
            None,
        );
        assert!(matches!(err, Err(ConfigError::Invalid(_))));
        let err = RunConfig::parse(&format!("{RESONANT}oracle.tol = 0.5\n"), None);
        assert!(err.is_err());
    }

    #[test]
    fn log_sweep_values() {
        let s = SweepSpec { param: SweepParam::Amplitude, min: 1e-3, max: 1e-1, steps: 3, scale: Scale::Log };
        let v = s.values();
        assert!((v[1] - 1e-2).abs() < 1e-15);
    }
}
