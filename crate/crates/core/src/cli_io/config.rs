use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::convergence::check_scale_list;
use crate::cover::DEFAULT_RHO;
use crate::metric_space::load::{read_to_string, LoadError};
use crate::partition::BumpKernel;

/// Which points make up `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubsetSelector {
    /// `"all"` or a path to a file of indices.
    Named(String),
    Indices(Vec<usize>),
}

impl Default for SubsetSelector {
    fn default() -> Self {
        SubsetSelector::Named(String::from("all"))
    }
}

/// Function family: inline specs or a path to a JSON/CSV family file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySource {
    Path(PathBuf),
    Inline(Vec<Value>),
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_trials() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub cloud: Option<PathBuf>,
    /// Kind name or path to a metric file.
    #[serde(default)]
    pub metric: Option<String>,
    #[serde(default)]
    pub family: Option<FamilySource>,
    pub k_list: Vec<u32>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "kernel_default")]
    pub kernel: BumpKernel,
    #[serde(default, rename = "T")]
    pub subset: SubsetSelector,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_trials")]
    pub trial_count: usize,
}

fn kernel_default() -> BumpKernel {
    BumpKernel::Hat
}

impl RunConfig {
    pub fn new(k_list: Vec<u32>) -> Self {
        Self {
            cloud: None,
            metric: None,
            family: None,
            k_list,
            rho: DEFAULT_RHO,
            kernel: BumpKernel::Hat,
            subset: SubsetSelector::default(),
            out: None,
            seed: 0,
            strict: false,
            oracle: false,
            trial_count: default_trials(),
        }
    }

    /// Read a JSON config; relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = read_to_string(path)?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| LoadError::new(path.display().to_string(), Some(e.line()), e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = config.cloud.as_mut() {
            rebase(p);
        }
        if let Some(FamilySource::Path(p)) = config.family.as_mut() {
            rebase(p);
        }
        if let Some(m) = config.metric.as_mut() {
            if Path::new(m.as_str()).extension().is_some() && Path::new(m.as_str()).is_relative() {
                *m = base.join(&*m).display().to_string();
            }
        }
        if let SubsetSelector::Named(name) = &mut config.subset {
            if name != "all" && Path::new(name.as_str()).is_relative() {
                *name = base.join(&*name).display().to_string();
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_scale_list(&self.k_list).map_err(CliError::input)?;
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(CliError::Input(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if self.strict && self.rho == 1.0 {
            return Err(CliError::Input(String::from(
                "rho = 1 gives open-support-only bumps; rejected under --strict",
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_config_shape() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"k_list":[1,2,4], "rho":0.99, "kernel":"hat", "family":[{"preset":"constant","c":1}], "T":"all"}"#,
        )
        .unwrap();
        assert_eq!(cfg.k_list, vec![1, 2, 4]);
        assert_eq!(cfg.subset, SubsetSelector::Named("all".into()));
        assert!(matches!(cfg.family, Some(FamilySource::Inline(ref v)) if v.len() == 1));
        cfg.validate().unwrap();
        let cfg: RunConfig = serde_json::from_str(r#"{"k_list":[1], "T":[0,3], "kernel":"wendland"}"#).unwrap();
        assert_eq!(cfg.subset, SubsetSelector::Indices(vec![0, 3]));
        assert_eq!(cfg.kernel, BumpKernel::WendlandC2);
    }

    #[test]
    fn validation() {
        assert!(RunConfig::new(vec![]).validate().is_err());
        assert!(RunConfig::new(vec![2, 1]).validate().is_err());
        let mut cfg = RunConfig::new(vec![1]);
        cfg.rho = 1.0;
        cfg.validate().unwrap();
        cfg.strict = true;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }
}
