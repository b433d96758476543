//! JSON run configurations, one file per run.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use structmc::diagnostics::TestFunction;
use structmc::ensembles::{LawTag, Method};
use structmc::kernels::KernelSpec;
use structmc::nomc::OptNomcConfig;
use structmc::swd::DistClass;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    BuildNomc,
    Coherence,
    BenchKernel,
    BenchSwd,
    Diagnose,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::BuildNomc => "build-nomc",
            Command::Coherence => "coherence",
            Command::BenchKernel => "bench-kernel",
            Command::BenchSwd => "bench-swd",
            Command::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

fn default_methods() -> Vec<Method> {
    vec![Method::Mc, Method::Qmc, Method::Bomc, Method::OptNomc, Method::AlgNomc]
}

fn default_multipliers() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}

fn default_trials() -> usize {
    450
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub law: LawTag,
    pub d: usize,
    pub s: usize,
    pub seed: u64,
    #[serde(default = "default_method_mc")]
    pub method: Method,
    /// Optimizer settings when `method` is `opt-nomc`.
    #[serde(default)]
    pub opt: Option<OptNomcConfig>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_method_mc() -> Method {
    Method::Mc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildNomcConfig {
    /// `opt-nomc` or `alg-nomc`.
    pub method: Method,
    pub seed: u64,
    /// Dimension: required for `opt-nomc`; for `alg-nomc` it selects `p = d/2`.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub r: Option<u32>,
    #[serde(default)]
    pub selected_count: Option<usize>,
    #[serde(default)]
    pub opt: Option<OptNomcConfig>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceConfig {
    /// Ensemble file to measure.
    pub input: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

/// Where kernel evaluation pairs come from. Pairs are fixed once per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairSource {
    /// Independent `N(0, scale² I)` points; `scale` defaults to `1/√d`.
    Synthetic {
        #[serde(default = "default_pair_count")]
        count: usize,
        #[serde(default)]
        scale: Option<f64>,
    },
    /// Rows of a headerless CSV, divided by the fiftieth-neighbour scale.
    Dataset {
        path: PathBuf,
        #[serde(default = "default_pair_count")]
        count: usize,
        #[serde(default = "default_scale_sample")]
        scale_sample: usize,
    },
}

fn default_pair_count() -> usize {
    100
}

fn default_scale_sample() -> usize {
    structmc::kernels::DEFAULT_SCALE_SAMPLE
}

impl Default for PairSource {
    fn default() -> Self {
        PairSource::Synthetic { count: default_pair_count(), scale: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchKernelConfig {
    pub kernel: KernelSpec,
    pub d: usize,
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_multipliers")]
    pub multipliers: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub pairs: PairSource,
    #[serde(default)]
    pub opt: Option<OptNomcConfig>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_points() -> usize {
    10_000
}

fn default_p() -> f64 {
    2.0
}

fn default_reference_directions() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSwdConfig {
    pub distribution: DistClass,
    pub d: usize,
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_multipliers")]
    pub multipliers: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Points per cloud.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Directions of the reference estimate the benchmark compares against.
    #[serde(default = "default_reference_directions")]
    pub reference_directions: usize,
    #[serde(default)]
    pub opt: Option<OptNomcConfig>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Nd,
    Mgf,
    MseOrdering,
    Tail,
    Sweep,
}

impl Claim {
    pub fn as_str(&self) -> &'static str {
        match self {
            Claim::Nd => "nd",
            Claim::Mgf => "mgf",
            Claim::MseOrdering => "mse-ordering",
            Claim::Tail => "tail",
            Claim::Sweep => "sweep",
        }
    }
}

/// Parameters of one diagnostic; unset fields take per-claim defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub claim: Claim,
    pub d: usize,
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
    /// Unit direction; defaults to `e₁`.
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub f: Option<TestFunction>,
    #[serde(default)]
    pub multipliers: Option<Vec<usize>>,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub grid_radius: Option<f64>,
    #[serde(default)]
    pub s_values: Option<Vec<usize>>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub opt: Option<OptNomcConfig>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Sample(SampleConfig),
    BuildNomc(BuildNomcConfig),
    Coherence(CoherenceConfig),
    BenchKernel(BenchKernelConfig),
    BenchSwd(BenchSwdConfig),
    Diagnose(DiagnoseConfig),
}

impl RunConfig {
    pub fn command(&self) -> Command {
        match self {
            RunConfig::Sample(_) => Command::Sample,
            RunConfig::BuildNomc(_) => Command::BuildNomc,
            RunConfig::Coherence(_) => Command::Coherence,
            RunConfig::BenchKernel(_) => Command::BenchKernel,
            RunConfig::BenchSwd(_) => Command::BenchSwd,
            RunConfig::Diagnose(_) => Command::Diagnose,
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            RunConfig::Sample(c) => &c.out,
            RunConfig::BuildNomc(c) => &c.out,
            RunConfig::Coherence(c) => &c.out,
            RunConfig::BenchKernel(c) => &c.out,
            RunConfig::BenchSwd(c) => &c.out,
            RunConfig::Diagnose(c) => &c.out,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            RunConfig::Sample(c) => c.out = out,
            RunConfig::BuildNomc(c) => c.out = out,
            RunConfig::Coherence(c) => c.out = out,
            RunConfig::BenchKernel(c) => c.out = out,
            RunConfig::BenchSwd(c) => c.out = out,
            RunConfig::Diagnose(c) => c.out = out,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |path: &str, v: usize| {
            if v == 0 {
                Err(CliError::config(path, "must be positive"))
            } else {
                Ok(())
            }
        };
        let positive_list = |path: &str, v: &[usize]| {
            if v.is_empty() || v.contains(&0) {
                Err(CliError::config(path, "must be a non-empty list of positive integers"))
            } else {
                Ok(())
            }
        };
        match self {
            RunConfig::Sample(c) => {
                positive("d", c.d)?;
                positive("s", c.s)
            }
            RunConfig::BuildNomc(c) => match c.method {
                Method::OptNomc => {
                    if c.p.is_some() || c.r.is_some() || c.selected_count.is_some() {
                        return Err(CliError::config("p", "p, r and selected_count apply to alg-nomc only"));
                    }
                    positive("d", c.d.ok_or_else(|| CliError::config("d", "required for opt-nomc"))?)?;
                    positive("s", c.s.ok_or_else(|| CliError::config("s", "required for opt-nomc"))?)
                }
                Method::AlgNomc => {
                    if c.s.is_some() || c.opt.is_some() {
                        return Err(CliError::config("s", "alg-nomc takes p, r and selected_count; use selected_count to subsample"));
                    }
                    if c.p.is_none() && c.d.is_none() {
                        return Err(CliError::config("p", "alg-nomc needs p (or d = 2p)"));
                    }
                    c.r.ok_or_else(|| CliError::config("r", "required for alg-nomc"))?;
                    Ok(())
                }
                other => Err(CliError::config("method", format!("build-nomc builds opt-nomc or alg-nomc, not {other}"))),
            },
            RunConfig::Coherence(_) => Ok(()),
            RunConfig::BenchKernel(c) => {
                positive("d", c.d)?;
                positive("trials", c.trials)?;
                positive_list("multipliers", &c.multipliers)?;
                if c.methods.is_empty() {
                    return Err(CliError::config("methods", "must not be empty"));
                }
                match &c.pairs {
                    PairSource::Synthetic { count, .. } | PairSource::Dataset { count, .. } => positive("pairs.count", *count),
                }
            }
            RunConfig::BenchSwd(c) => {
                positive("d", c.d)?;
                positive("trials", c.trials)?;
                positive("points", c.points)?;
                positive("reference_directions", c.reference_directions)?;
                positive_list("multipliers", &c.multipliers)?;
                if c.methods.is_empty() {
                    return Err(CliError::config("methods", "must not be empty"));
                }
                Ok(())
            }
            RunConfig::Diagnose(c) => {
                positive("d", c.d)?;
                if let Some(t) = c.trials {
                    positive("trials", t)?;
                }
                if let Some(m) = &c.multipliers {
                    positive_list("multipliers", m)?;
                }
                if let Some(s) = &c.s_values {
                    positive_list("s_values", s)?;
                }
                Ok(())
            }
        }
    }
}

fn section<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(&path, e.into_inner().to_string())
    })
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::config(".", e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| CliError::config(".", "configuration must be a JSON object"))?;
    let command = obj.remove("command").ok_or_else(|| CliError::config("command", "missing required key"))?;
    let command: Command = section(command).map_err(|e| match e {
        CliError::Config { msg, .. } => CliError::config("command", msg),
        other => other,
    })?;
    let cfg = match command {
        Command::Sample => RunConfig::Sample(section(value)?),
        Command::BuildNomc => RunConfig::BuildNomc(section(value)?),
        Command::Coherence => RunConfig::Coherence(section(value)?),
        Command::BenchKernel => RunConfig::BenchKernel(section(value)?),
        Command::BenchSwd => RunConfig::BenchSwd(section(value)?),
        Command::Diagnose => RunConfig::Diagnose(section(value)?),
    };
    cfg.validate()?;
    Ok(cfg)
}
