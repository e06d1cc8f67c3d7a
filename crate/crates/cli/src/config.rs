//! Run configuration: a JSON file, with command-line flags layered on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sbm_core::grid::logspace;
use sbm_core::heatkernel::EnvelopeConfig;
use sbm_core::{Error, LaplaceExponentSpec, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PhiTable,
    Scaling,
    Tails,
    Kernel,
    Verify,
    Green,
    Blowup,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::PhiTable => "phi-table",
            Command::Scaling => "scaling",
            Command::Tails => "tails",
            Command::Kernel => "kernel",
            Command::Verify => "verify",
            Command::Green => "green",
            Command::Blowup => "blowup",
        }
    }
}

/// `count` log-spaced values between `min` and `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LogRange {
    pub const fn new(min: f64, max: f64, count: usize) -> Self {
        LogRange { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        logspace(self.min, self.max, self.count)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("{name}.count={} must be >= 2", self.count)));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::Config(format!(
                "{name} range [{}, {}] must satisfy 0 < min < max",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeOverrides {
    #[serde(rename = "a_L")]
    pub a_l: Option<f64>,
    #[serde(rename = "a_U")]
    pub a_u: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub kappa: Option<f64>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
}

impl EnvelopeOverrides {
    pub fn apply(&self) -> EnvelopeConfig {
        let mut cfg = EnvelopeConfig::default();
        cfg.a_l = self.a_l.unwrap_or(cfg.a_l);
        cfg.a_u = self.a_u.unwrap_or(cfg.a_u);
        cfg.c = self.c.unwrap_or(cfg.c);
        cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
        cfg.eta = self.eta.unwrap_or(cfg.eta);
        cfg.theta = self.theta.unwrap_or(cfg.theta);
        cfg
    }
}

/// The file as written; everything but `spec` may be omitted.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spec: LaplaceExponentSpec,
    pub command: Option<Command>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub t_grid: Option<LogRange>,
    pub r_grid: Option<LogRange>,
    pub lambda_grid: Option<LogRange>,
    /// Prepend r = 0 to the kernel radii.
    pub include_origin: Option<bool>,
    /// Explicit radii for `blowup`.
    pub radii: Option<Vec<f64>>,
    pub envelope: Option<EnvelopeOverrides>,
    pub samples: Option<usize>,
    pub monte_carlo: Option<bool>,
    pub epsilon: Option<f64>,
    pub interval_l: Option<f64>,
}

/// Values taken from the command line; each one present overrides the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A validated run with every default filled in.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub spec: LaplaceExponentSpec,
    pub command: Command,
    pub d: usize,
    pub seed: u64,
    /// Left out of the recorded config so artifacts do not depend on where they are written.
    #[serde(skip)]
    pub out: PathBuf,
    pub t_grid: LogRange,
    pub r_grid: LogRange,
    pub lambda_grid: LogRange,
    pub include_origin: bool,
    pub radii: Vec<f64>,
    pub envelope: EnvelopeOverrides,
    pub samples: usize,
    pub monte_carlo: bool,
    pub epsilon: f64,
    pub interval_l: f64,
}

pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_SAMPLES: usize = 20_000;
pub const DEFAULT_BLOWUP_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn default_t_grid(cmd: Command) -> LogRange {
    match cmd {
        Command::Tails => LogRange::new(1e-3, 1e-1, 6),
        _ => LogRange::new(1e-3, 1.0, 12),
    }
}

fn default_r_grid(cmd: Command) -> LogRange {
    match cmd {
        Command::Green => LogRange::new(1e-3, 1e-1, 9),
        Command::Tails => LogRange::new(1.0, 1e3, 7),
        _ => LogRange::new(1e-2, 10.0, 12),
    }
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Self> {
        let command = flags
            .command
            .or(file.command)
            .ok_or_else(|| Error::Config("no command given on the command line or in the file".into()))?;
        let default_d = match command {
            Command::Green | Command::Blowup => 3,
            _ => 1,
        };
        let cfg = RunConfig {
            command,
            d: flags.d.or(file.d).unwrap_or(default_d),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            t_grid: file.t_grid.unwrap_or(default_t_grid(command)),
            r_grid: file.r_grid.unwrap_or(default_r_grid(command)),
            lambda_grid: file.lambda_grid.unwrap_or(LogRange::new(1e-4, 1e8, 49)),
            include_origin: file.include_origin.unwrap_or(false),
            radii: file.radii.unwrap_or_else(|| DEFAULT_BLOWUP_RADII.to_vec()),
            envelope: file.envelope.unwrap_or_default(),
            samples: file.samples.unwrap_or(DEFAULT_SAMPLES),
            monte_carlo: file.monte_carlo.unwrap_or(false),
            epsilon: file.epsilon.unwrap_or(0.05),
            interval_l: file.interval_l.unwrap_or(sbm_core::subordinator::DEFAULT_INTERVAL_L),
            spec: file.spec,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be >= 1".into()));
        }
        self.t_grid.validate("t_grid")?;
        self.r_grid.validate("r_grid")?;
        self.lambda_grid.validate("lambda_grid")?;
        if self.radii.len() < 2 || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Config("radii needs at least two positive values".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon={} outside (0,1)", self.epsilon)));
        }
        if !(self.interval_l > 1.0) {
            return Err(Error::Config(format!("interval_l={} must exceed 1", self.interval_l)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        self.envelope.apply().validate()
    }

    pub fn envelope_config(&self) -> EnvelopeConfig {
        self.envelope.apply()
    }
}

pub fn parse_config(text: &str, flags: &Overrides) -> Result<RunConfig> {
    // spec validation errors arrive through serde already carrying the prefix
    let file: FileConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(e.to_string().replace("configuration error: ", "")))?;
    RunConfig::resolve(file, flags)
}

pub fn load_config(path: &Path, flags: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, flags).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
