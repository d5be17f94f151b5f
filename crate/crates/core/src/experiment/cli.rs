//! Command-line surface. Flags override values read from `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{ConfigError, ExperimentConfig, ExperimentKind, Grid, NoiseSpec, ProbeKind};
use crate::engine::Interferometer;

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "DIFFINT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "diffint", version, about = "Phase sensitivity of differential interferometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// max_theta F of product NOON probes over noise widths.
    NoonFi(Overrides),
    /// F of adiabatic ground states over the interaction strength Lambda.
    ScanLambda(Overrides),
    /// F of diabatic (twisted and rotated) probes over the twisting time tau.
    ScanTau(Overrides),
    /// F against particle number, with power-law fits.
    ScanN(Overrides),
    /// Histogram of F / N^2 for NOON probes under random multi-peak noise.
    NoiseHistogram(Overrides),
    /// Classical vs quantum Fisher information and block bounds at small N.
    QfiCheck(Overrides),
    /// Check a configuration without running it.
    Validate(Overrides),
}

impl Command {
    pub fn parts(&self) -> (Option<ExperimentKind>, &Overrides) {
        match self {
            Command::NoonFi(o) => (Some(ExperimentKind::NoonFi), o),
            Command::ScanLambda(o) => (Some(ExperimentKind::ScanLambda), o),
            Command::ScanTau(o) => (Some(ExperimentKind::ScanTau), o),
            Command::ScanN(o) => (Some(ExperimentKind::ScanN), o),
            Command::NoiseHistogram(o) => (Some(ExperimentKind::NoiseHistogram), o),
            Command::QfiCheck(o) => (Some(ExperimentKind::QfiCheck), o),
            Command::Validate(o) => (None, o),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Particle numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Total-noise widths: "delta", "flat", a number, "multi:M:sigma:seed" or "file:path".
    #[arg(long, value_delimiter = ',')]
    pub sigma_plus: Option<Vec<NoiseSpec>>,
    /// Relative-noise widths, same syntax as --sigma-plus.
    #[arg(long, value_delimiter = ',')]
    pub sigma_minus: Option<Vec<NoiseSpec>>,
    /// Lambda values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Twisting times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Probe families, e.g. twin-fock,coherent,adiabatic-opt.
    #[arg(long, value_delimiter = ',')]
    pub probes: Option<Vec<ProbeKind>>,
    /// mz-y or bs-z.
    #[arg(long)]
    pub interferometer: Option<Interferometer>,
    #[arg(long)]
    pub repetitions: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub theta_points: Option<usize>,
    #[arg(long)]
    pub theta_tolerance: Option<f64>,
    #[arg(long)]
    pub param_tolerance: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub peaks: Option<Vec<usize>>,
    #[arg(long)]
    pub peak_sigma: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub fit_tail: Option<usize>,
    #[arg(long)]
    pub random_probes: Option<usize>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl Overrides {
    /// Defaults, then the config file, then flags. A subcommand that names
    /// an experiment must agree with the file's `experiment`, if set.
    pub fn resolve(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(k) = kind {
            if let Some(file_kind) = cfg.experiment {
                if file_kind != k {
                    return Err(ConfigError(vec![format!(
                        "experiment: config file says '{file_kind}' but the command is '{k}'"
                    )]));
                }
            }
            cfg.experiment = Some(k);
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(n, sigma_plus, sigma_minus, probes, interferometer, repetitions, seed, output);
        set!(theta_points, theta_tolerance, param_tolerance, peaks, trials, bins, random_probes);
        if let Some(v) = &self.lambda {
            cfg.lambda = Grid::List(v.clone());
        }
        if let Some(v) = &self.tau {
            cfg.tau = Grid::List(v.clone());
        }
        if self.peak_sigma.is_some() {
            cfg.peak_sigma = self.peak_sigma;
        }
        if self.fit_tail.is_some() {
            cfg.fit_tail = self.fit_tail;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "experiment = \"scan-n\"\nn = [10, 20, 40]\nseed = 3\n").unwrap();
        let cli = Cli::try_parse_from([
            "diffint",
            "scan-n",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "--sigma-plus",
            "flat,0.1",
        ])
        .unwrap();
        let (kind, o) = cli.command.parts();
        let cfg = o.resolve(kind).unwrap();
        assert_eq!(cfg.n, vec![10, 20, 40]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sigma_plus.len(), 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn mismatched_experiment_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "experiment = \"noon-fi\"\n").unwrap();
        let o = Overrides {
            config: Some(path),
            ..Default::default()
        };
        assert!(o.resolve(Some(ExperimentKind::ScanN)).is_err());
        assert_eq!(o.resolve(None).unwrap().experiment, Some(ExperimentKind::NoonFi));
    }

    #[test]
    fn bad_noise_flag_fails_parsing() {
        assert!(Cli::try_parse_from(["diffint", "noon-fi", "--sigma-plus", "wide"]).is_err());
    }
}
