//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` are comments. Unknown keys are errors. Values
//! given later (command-line overrides) replace earlier ones.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::coupling::{
    DescriptorScaling, Init, Mode, NormKind, OptimizerConfig, Parametrization, PartialWeights, Weights,
};
use crate::error::{Error, Result};
use crate::io::Indexing;
use crate::laplacian::PointCloudOptions;
use crate::spectral::{HksNormalization, HksOptions, Landmarks, TimeRange, DEFAULT_K};

/// Environment variable that overrides `cache_dir`.
pub const CACHE_ENV: &str = "COUPLED_EMBED_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorChoice {
    Hks,
    Gt,
}

impl DescriptorChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hks => "hks",
            Self::Gt => "gt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dataset_root: PathBuf,
    pub pairs: Vec<(String, String)>,
    pub k: usize,
    pub descriptor: DescriptorChoice,
    pub hks: HksOptions,
    pub gt_landmarks: Landmarks,
    pub weights: Weights,
    pub partial_weights: PartialWeights,
    pub optimizer: OptimizerConfig,
    pub mode: Mode,
    pub parametrization: Parametrization,
    pub norm: NormKind,
    pub descriptor_scaling: DescriptorScaling,
    pub indexing: Indexing,
    pub normalize: bool,
    pub cloud: PointCloudOptions,
    pub clusters: usize,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_root: PathBuf::from("."),
            pairs: Vec::new(),
            k: DEFAULT_K,
            descriptor: DescriptorChoice::Hks,
            hks: HksOptions::default(),
            gt_landmarks: Landmarks::All,
            weights: Weights::default(),
            partial_weights: PartialWeights::default(),
            optimizer: OptimizerConfig::default(),
            mode: Mode::FullFull,
            parametrization: Parametrization::Subspace,
            norm: NormKind::Frobenius,
            descriptor_scaling: DescriptorScaling::MassNormalized,
            indexing: Indexing::ZeroBased,
            normalize: true,
            cloud: PointCloudOptions::default(),
            clusters: 6,
            cache_dir: PathBuf::from("cache"),
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidConfig(format!("invalid value '{value}' for '{key}'"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn nonneg(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value))
    }
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v = nonneg(key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, value))
    }
}

fn parse_pairs(value: &str) -> Result<Vec<(String, String)>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once(':') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.trim().to_string(), b.trim().to_string())),
            _ => Err(bad("pairs", p)),
        })
        .collect()
}

impl PipelineConfig {
    /// Defaults, then `path` if given, then `CACHE_ENV`, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", p.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Ok(dir) = std::env::var(CACHE_ENV) {
            if !dir.is_empty() {
                cfg.cache_dir = PathBuf::from(dir);
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected 'key = value'", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset_root" => self.dataset_root = PathBuf::from(value),
            "pairs" => self.pairs = parse_pairs(value)?,
            "k" => self.k = num(key, value)?,
            "descriptor" => {
                self.descriptor = match value {
                    "hks" => DescriptorChoice::Hks,
                    "gt" => DescriptorChoice::Gt,
                    _ => return Err(bad(key, value)),
                }
            }
            "hks_dim" => self.hks.dim = num(key, value)?,
            "hks_time_range" => {
                self.hks.time_range = if value == "auto" {
                    TimeRange::Auto
                } else {
                    let (a, b) = value.split_once("..").ok_or_else(|| bad(key, value))?;
                    let t_min = positive(key, a.trim())?;
                    let t_max = positive(key, b.trim())?;
                    if t_min > t_max {
                        return Err(bad(key, value));
                    }
                    TimeRange::Explicit { t_min, t_max }
                }
            }
            "hks_normalization" => {
                self.hks.normalization = match value {
                    "none" => HksNormalization::None,
                    "per_timestep" => HksNormalization::PerTimestep,
                    _ => return Err(bad(key, value)),
                }
            }
            "hks_log" => self.hks.log_scale = num(key, value)?,
            "gt_landmarks" => {
                self.gt_landmarks = if value == "all" {
                    Landmarks::All
                } else {
                    let q = value.strip_prefix("fps:").ok_or_else(|| bad(key, value))?;
                    Landmarks::Fps(num(key, q)?)
                }
            }
            "mu_off" => self.weights.off = nonneg(key, value)?,
            "mu_o" => self.weights.ortho = nonneg(key, value)?,
            "mu_c" => self.weights.coupling = nonneg(key, value)?,
            "mu_off_partial" => self.partial_weights.off_partial = nonneg(key, value)?,
            "mu_off_full" => self.partial_weights.off_full = nonneg(key, value)?,
            "mu_o_full" => self.partial_weights.ortho_full = nonneg(key, value)?,
            "mu_c_partial" => self.partial_weights.coupling = nonneg(key, value)?,
            "max_iters" => self.optimizer.max_iters = num(key, value)?,
            "learning_rate" => self.optimizer.learning_rate = positive(key, value)?,
            "beta1" => self.optimizer.beta1 = nonneg(key, value)?,
            "beta2" => self.optimizer.beta2 = nonneg(key, value)?,
            "epsilon" => self.optimizer.epsilon = positive(key, value)?,
            "grad_tol" => self.optimizer.grad_tol = positive(key, value)?,
            "init" => {
                self.optimizer.init = match value {
                    "eigenbasis" => Init::Eigenbasis,
                    "random" => Init::Random,
                    _ => return Err(bad(key, value)),
                }
            }
            "mode" => {
                self.mode = match value {
                    "full_full" => Mode::FullFull,
                    "full_partial" => Mode::FullPartial,
                    _ => return Err(bad(key, value)),
                }
            }
            "parametrization" => {
                self.parametrization = match value {
                    "subspace" => Parametrization::Subspace,
                    "free" => Parametrization::Free,
                    _ => return Err(bad(key, value)),
                }
            }
            "norm" => {
                self.norm = match value {
                    "frobenius" => NormKind::Frobenius,
                    "squared" => NormKind::SquaredFrobenius,
                    _ => return Err(bad(key, value)),
                }
            }
            "descriptor_scaling" => {
                self.descriptor_scaling = match value {
                    "mass_normalized" => DescriptorScaling::MassNormalized,
                    "none" => DescriptorScaling::None,
                    _ => return Err(bad(key, value)),
                }
            }
            "indexing" => self.indexing = value.parse()?,
            "normalize" => self.normalize = num(key, value)?,
            "k_nn" => self.cloud.k_nn = num(key, value)?,
            "bandwidth" => self.cloud.bandwidth = value.parse()?,
            "clusters" => self.clusters = num(key, value)?,
            "cache_dir" => self.cache_dir = PathBuf::from(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.k < 1 {
            return fail("k must be >= 1");
        }
        if self.hks.dim < 1 {
            return fail("hks_dim must be >= 1");
        }
        if self.clusters < 1 {
            return fail("clusters must be >= 1");
        }
        if self.cloud.k_nn < 2 {
            return fail("k_nn must be >= 2");
        }
        if matches!(self.gt_landmarks, Landmarks::Fps(0)) {
            return fail("gt_landmarks fps count must be >= 1");
        }
        self.optimizer_config()
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Optimizer settings with the run seed.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            ..self.optimizer.clone()
        }
    }

    /// Every key with its resolved value; parsing this text reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset_root", self.dataset_root.display().to_string());
        put(
            "pairs",
            self.pairs.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(","),
        );
        put("k", self.k.to_string());
        put("descriptor", self.descriptor.as_str().into());
        put("hks_dim", self.hks.dim.to_string());
        put(
            "hks_time_range",
            match self.hks.time_range {
                TimeRange::Auto => "auto".into(),
                TimeRange::Explicit { t_min, t_max } => format!("{t_min:?}..{t_max:?}"),
            },
        );
        put(
            "hks_normalization",
            match self.hks.normalization {
                HksNormalization::None => "none",
                HksNormalization::PerTimestep => "per_timestep",
            }
            .into(),
        );
        put("hks_log", self.hks.log_scale.to_string());
        put(
            "gt_landmarks",
            match self.gt_landmarks {
                Landmarks::All => "all".into(),
                Landmarks::Fps(q) => format!("fps:{q}"),
            },
        );
        put("mu_off", format!("{:?}", self.weights.off));
        put("mu_o", format!("{:?}", self.weights.ortho));
        put("mu_c", format!("{:?}", self.weights.coupling));
        put("mu_off_partial", format!("{:?}", self.partial_weights.off_partial));
        put("mu_off_full", format!("{:?}", self.partial_weights.off_full));
        put("mu_o_full", format!("{:?}", self.partial_weights.ortho_full));
        put("mu_c_partial", format!("{:?}", self.partial_weights.coupling));
        let o = &self.optimizer;
        put("max_iters", o.max_iters.to_string());
        put("learning_rate", format!("{:?}", o.learning_rate));
        put("beta1", format!("{:?}", o.beta1));
        put("beta2", format!("{:?}", o.beta2));
        put("epsilon", format!("{:?}", o.epsilon));
        put("grad_tol", format!("{:?}", o.grad_tol));
        put(
            "init",
            match o.init {
                Init::Eigenbasis => "eigenbasis",
                Init::Random => "random",
            }
            .into(),
        );
        put(
            "mode",
            match self.mode {
                Mode::FullFull => "full_full",
                Mode::FullPartial => "full_partial",
            }
            .into(),
        );
        put(
            "parametrization",
            match self.parametrization {
                Parametrization::Subspace => "subspace",
                Parametrization::Free => "free",
            }
            .into(),
        );
        put(
            "norm",
            match self.norm {
                NormKind::Frobenius => "frobenius",
                NormKind::SquaredFrobenius => "squared",
            }
            .into(),
        );
        put(
            "descriptor_scaling",
            match self.descriptor_scaling {
                DescriptorScaling::MassNormalized => "mass_normalized",
                DescriptorScaling::None => "none",
            }
            .into(),
        );
        put(
            "indexing",
            match self.indexing {
                Indexing::ZeroBased => "zero_based",
                Indexing::OneBased => "one_based",
            }
            .into(),
        );
        put("normalize", self.normalize.to_string());
        put("k_nn", self.cloud.k_nn.to_string());
        put("bandwidth", self.cloud.bandwidth.to_string());
        put("clusters", self.clusters.to_string());
        put("cache_dir", self.cache_dir.display().to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("seed", self.seed.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_and_sizes() {
        let c = PipelineConfig::default();
        assert_eq!((c.weights.off, c.weights.ortho, c.weights.coupling), (1.0, 50.0, 1000.0));
        let p = c.partial_weights;
        assert_eq!((p.off_partial, p.off_full, p.ortho_full, p.coupling), (1.0, 1.0, 5000.0, 5000.0));
        assert_eq!((c.k, c.hks.dim), (50, 512));
    }

    #[test]
    fn text_round_trip() {
        let mut c = PipelineConfig::default();
        c.set("pairs", "a:b, c:d").unwrap();
        c.set("hks_time_range", "0.5..20").unwrap();
        c.set("gt_landmarks", "fps:40").unwrap();
        c.set("mode", "full_partial").unwrap();
        c.set("bandwidth", "0.25").unwrap();
        c.set("learning_rate", "0.003").unwrap();
        assert_eq!(PipelineConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(PipelineConfig::parse("colour = red"), Err(Error::InvalidConfig(_))));
        assert!(matches!(PipelineConfig::parse("k = -3"), Err(Error::InvalidConfig(_))));
        assert!(matches!(PipelineConfig::parse("just words"), Err(Error::InvalidConfig(_))));
        assert!(matches!(PipelineConfig::parse("max_iters = 0"), Err(Error::InvalidConfig(_))));
        let c = PipelineConfig::parse("# comment\nk = 30  # trailing\n\nseed=7").unwrap();
        assert_eq!((c.k, c.seed), (30, 7));
    }
}
