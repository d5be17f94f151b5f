//! Experiment configuration: TOML file, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::Interferometer;
use crate::error::Error;
use crate::noise::{sample_multi_peak, NoiseDistribution, TabulatedDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NoonFi,
    ScanLambda,
    ScanTau,
    ScanN,
    NoiseHistogram,
    QfiCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::NoonFi,
        Self::ScanLambda,
        Self::ScanTau,
        Self::ScanN,
        Self::NoiseHistogram,
        Self::QfiCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NoonFi => "noon-fi",
            Self::ScanLambda => "scan-lambda",
            Self::ScanTau => "scan-tau",
            Self::ScanN => "scan-n",
            Self::NoiseHistogram => "noise-histogram",
            Self::QfiCheck => "qfi-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// A phase-noise density written as "delta", "flat", a von Mises width,
/// "multi:M:sigma:seed" or "file:path".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Width(f64),
    Token(String),
}

impl NoiseSpec {
    pub fn resolve(&self) -> Result<NoiseDistribution, String> {
        match self {
            NoiseSpec::Width(s) => NoiseDistribution::von_mises(*s).map_err(|e| e.to_string()),
            NoiseSpec::Token(t) => parse_noise_token(t),
        }
    }

    /// Value written in CSV columns: the width, 0 for delta, inf for flat,
    /// NaN for anything else.
    pub fn numeric(&self) -> f64 {
        match self {
            NoiseSpec::Width(s) => *s,
            NoiseSpec::Token(t) => match t.trim().to_ascii_lowercase().as_str() {
                "delta" => 0.0,
                "flat" => f64::INFINITY,
                other => other.parse().unwrap_or(f64::NAN),
            },
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::Width(s) => write!(f, "{s}"),
            NoiseSpec::Token(t) => f.write_str(t),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let spec = match s.trim().parse::<f64>() {
            Ok(x) => NoiseSpec::Width(x),
            Err(_) => NoiseSpec::Token(s.trim().to_string()),
        };
        spec.resolve()?;
        Ok(spec)
    }
}

fn parse_noise_token(token: &str) -> Result<NoiseDistribution, String> {
    let t = token.trim();
    if let Some(rest) = t.strip_prefix("multi:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{t}': expected multi:M:sigma:seed"));
        }
        let m: usize = parts[0].parse().map_err(|_| format!("'{t}': bad peak count"))?;
        let sigma: f64 = parts[1].parse().map_err(|_| format!("'{t}': bad width"))?;
        let seed: u64 = parts[2].parse().map_err(|_| format!("'{t}': bad seed"))?;
        return sample_multi_peak(m, sigma, seed).map_err(|e| e.to_string());
    }
    if let Some(path) = t.strip_prefix("file:") {
        return TabulatedDensity::from_file(Path::new(path))
            .map(NoiseDistribution::Tabulated)
            .map_err(|e| e.to_string());
    }
    NoiseDistribution::from_token(t).map_err(|e| e.to_string())
}

/// Sweep values: an explicit list or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, points, log } => {
                let p = *points;
                if p == 0 {
                    return Vec::new();
                }
                if p == 1 {
                    return vec![*start];
                }
                (0..p)
                    .map(|i| {
                        let t = i as f64 / (p - 1) as f64;
                        if *log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }

    fn check(&self, field: &str, issues: &mut Vec<String>) {
        match self {
            Grid::List(v) if v.is_empty() => issues.push(format!("{field}: grid is empty")),
            Grid::Range { points: 0, .. } => issues.push(format!("{field}: grid is empty")),
            Grid::Range { start, stop, log: true, .. } if !(*start > 0.0 && *stop > 0.0) => {
                issues.push(format!("{field}: log grid needs positive bounds"))
            }
            _ => {}
        }
        if self.values().iter().any(|x| !x.is_finite()) {
            issues.push(format!("{field}: grid values must be finite"));
        }
    }
}

/// Probe family for scan-n and qfi-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProbeKind {
    TwinFock,
    Coherent,
    Noon,
    /// Ground state at a fixed Lambda.
    Adiabatic(f64),
    /// Diabatic probe at a fixed tau.
    Diabatic(f64),
    /// Ground state at the Lambda maximizing F, searched over the lambda grid.
    AdiabaticOpt,
    /// Diabatic probe at the tau maximizing F, searched over the tau grid.
    DiabaticOpt,
}

impl FromStr for ProbeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        let param = |rest: &str| rest.parse::<f64>().map_err(|_| format!("bad probe parameter in '{s}'"));
        Ok(match s.as_str() {
            "twin-fock" => Self::TwinFock,
            "coherent" => Self::Coherent,
            "noon" => Self::Noon,
            "adiabatic-opt" => Self::AdiabaticOpt,
            "diabatic-opt" => Self::DiabaticOpt,
            other => {
                if let Some(rest) = other.strip_prefix("adiabatic:") {
                    Self::Adiabatic(param(rest)?)
                } else if let Some(rest) = other.strip_prefix("diabatic:") {
                    Self::Diabatic(param(rest)?)
                } else {
                    return Err(format!("unknown probe '{s}'"));
                }
            }
        })
    }
}

impl TryFrom<String> for ProbeKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ProbeKind> for String {
    fn from(p: ProbeKind) -> String {
        p.to_string()
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwinFock => f.write_str("twin-fock"),
            Self::Coherent => f.write_str("coherent"),
            Self::Noon => f.write_str("noon"),
            Self::Adiabatic(l) => write!(f, "adiabatic:{l}"),
            Self::Diabatic(t) => write!(f, "diabatic:{t}"),
            Self::AdiabaticOpt => f.write_str("adiabatic-opt"),
            Self::DiabaticOpt => f.write_str("diabatic-opt"),
        }
    }
}

/// Every knob of every experiment; unused fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    /// Particle numbers per interferometer.
    pub n: Vec<usize>,
    pub sigma_plus: Vec<NoiseSpec>,
    pub sigma_minus: Vec<NoiseSpec>,
    pub lambda: Grid,
    pub tau: Grid,
    pub probes: Vec<ProbeKind>,
    pub interferometer: Interferometer,
    /// Repetitions m for the phase-uncertainty column.
    pub repetitions: u64,
    pub seed: u64,
    pub output: PathBuf,
    /// Coarse theta grid points per period.
    pub theta_points: usize,
    /// Golden-section tolerance for theta, as a fraction of the period.
    pub theta_tolerance: f64,
    /// Relative tolerance of the Lambda / tau refinement (in log space).
    pub param_tolerance: f64,
    /// Peak counts M for noise-histogram.
    pub peaks: Vec<usize>,
    /// Peak width for noise-histogram; defaults to 2 pi / N.
    pub peak_sigma: Option<f64>,
    pub trials: usize,
    pub bins: usize,
    /// Fit only the largest `fit_tail` particle numbers.
    pub fit_tail: Option<usize>,
    /// Random pure probes per N in qfi-check.
    pub random_probes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            n: vec![100],
            sigma_plus: vec![NoiseSpec::Token("flat".into())],
            sigma_minus: vec![NoiseSpec::Token("delta".into())],
            lambda: Grid::Range {
                start: 1.0,
                stop: 1e4,
                points: 25,
                log: true,
            },
            tau: Grid::Range {
                start: 1e-3,
                stop: 1.0,
                points: 25,
                log: true,
            },
            probes: vec![ProbeKind::TwinFock],
            interferometer: Interferometer::MachZehnderY,
            repetitions: 1,
            seed: 0,
            output: PathBuf::from("out"),
            theta_points: 512,
            theta_tolerance: 1e-7,
            param_tolerance: 1e-3,
            peaks: vec![5, 20],
            peak_sigma: None,
            trials: 500,
            bins: 50,
            fit_tail: None,
            random_probes: 4,
        }
    }
}

/// Field-level validation failures.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for issue in &self.0 {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(vec![e.to_string()])
    }
}

/// Largest N accepted by qfi-check (dense (N+1)^2 x (N+1)^2 matrices).
pub const QFI_CHECK_MAX_N: usize = crate::dfs::DEFAULT_QFI_MAX_N;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(vec![format!("parse error: {}", e.message())]))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn kind(&self) -> Result<ExperimentKind, ConfigError> {
        self.experiment
            .ok_or_else(|| ConfigError(vec!["experiment: not set".into()]))
    }

    /// Structural checks without side effects; every problem is reported.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let kind = self.experiment;
        if kind.is_none() {
            issues.push("experiment: not set".into());
        }
        if self.n.is_empty() {
            issues.push("n: list is empty".into());
        }
        for &n in &self.n {
            if n == 0 || n % 2 != 0 {
                issues.push(format!("n: particle number must be even and positive, got {n}"));
            }
        }
        for (field, list) in [("sigma_plus", &self.sigma_plus), ("sigma_minus", &self.sigma_minus)] {
            if list.is_empty() {
                issues.push(format!("{field}: list is empty"));
            }
            for s in list {
                if let Err(e) = s.resolve() {
                    issues.push(format!("{field}: {e}"));
                }
            }
        }
        self.lambda.check("lambda", &mut issues);
        self.tau.check("tau", &mut issues);
        if self.lambda.values().iter().any(|&l| l < 0.0) {
            issues.push("lambda: values must be >= 0".into());
        }
        if self.tau.values().iter().any(|&t| t < 0.0) {
            issues.push("tau: values must be >= 0".into());
        }
        if self.repetitions == 0 {
            issues.push("repetitions: must be >= 1".into());
        }
        if self.theta_points < 3 {
            issues.push("theta_points: must be >= 3".into());
        }
        if !(self.theta_tolerance > 0.0 && self.theta_tolerance < 1.0) {
            issues.push("theta_tolerance: must lie in (0, 1)".into());
        }
        if !(self.param_tolerance > 0.0 && self.param_tolerance < 1.0) {
            issues.push("param_tolerance: must lie in (0, 1)".into());
        }
        if self.probes.is_empty() {
            issues.push("probes: list is empty".into());
        }
        match kind {
            Some(ExperimentKind::ScanN) => {
                if self.n.len() < 3 {
                    issues.push("n: scan-n needs at least 3 particle numbers for the fit".into());
                }
                if let Some(t) = self.fit_tail {
                    if t < 3 {
                        issues.push("fit_tail: must be >= 3".into());
                    }
                }
            }
            Some(ExperimentKind::NoiseHistogram) => {
                if self.peaks.is_empty() || self.peaks.contains(&0) {
                    issues.push("peaks: need a nonempty list of positive peak counts".into());
                }
                if self.trials == 0 {
                    issues.push("trials: must be >= 1".into());
                }
                if let Some(s) = self.peak_sigma {
                    if !(s > 0.0 && s.is_finite()) {
                        issues.push("peak_sigma: must be positive".into());
                    }
                }
            }
            Some(ExperimentKind::QfiCheck) => {
                if let Some(&n) = self.n.iter().find(|&&n| n > QFI_CHECK_MAX_N) {
                    issues.push(format!("n: qfi-check is limited to N <= {QFI_CHECK_MAX_N}, got {n}"));
                }
            }
            Some(ExperimentKind::ScanLambda | ExperimentKind::ScanTau) => {
                if self.sigma_minus.iter().any(|s| s.numeric() != 0.0) {
                    issues.push("sigma_minus: spectral scans require delta relative noise".into());
                }
            }
            _ => {}
        }
        if matches!(kind, Some(ExperimentKind::ScanN)) {
            for p in &self.probes {
                if matches!(p, ProbeKind::Diabatic(t) if !(*t >= 0.0)) {
                    issues.push("probes: diabatic tau must be >= 0".into());
                }
            }
            if self.sigma_minus.iter().any(|s| s.numeric() != 0.0) {
                issues.push("sigma_minus: spectral scans require delta relative noise".into());
            }
        }
        issues.dedup();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_noise_lists_and_grids() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            experiment = "scan-lambda"
            n = [100]
            sigma_plus = ["delta", 0.01, 0.1, "flat"]
            lambda = { start = 1.0, stop = 1000.0, points = 4, log = true }
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sigma_plus.len(), 4);
        let l = cfg.lambda.values();
        assert!((l[1] - 10.0).abs() < 1e-12 && (l[3] - 1000.0).abs() < 1e-9);
        assert_eq!(cfg.sigma_plus[3].numeric(), f64::INFINITY);
    }

    #[test]
    fn odd_n_is_named() {
        let cfg = ExperimentConfig {
            experiment: Some(ExperimentKind::NoonFi),
            n: vec![101],
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.0.iter().any(|m| m.contains("even")), "{err}");
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = ExperimentConfig {
            experiment: Some(ExperimentKind::ScanLambda),
            lambda: Grid::List(vec![]),
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.0.iter().any(|m| m.starts_with("lambda")));
    }

    #[test]
    fn unknown_fields_and_bad_noise_rejected() {
        assert!(ExperimentConfig::from_toml_str("experiment = \"noon-fi\"\nbogus = 1").is_err());
        let cfg = ExperimentConfig::from_toml_str("experiment = \"noon-fi\"\nsigma_plus = [\"wide\"]").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn probe_tokens_round_trip() {
        for s in ["twin-fock", "coherent", "noon", "adiabatic:100", "diabatic:0.3", "adiabatic-opt", "diabatic-opt"] {
            let p: ProbeKind = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<ProbeKind>().unwrap(), p);
        }
        assert!("squeezed".parse::<ProbeKind>().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig {
            experiment: Some(ExperimentKind::ScanN),
            n: vec![10, 20, 40],
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
