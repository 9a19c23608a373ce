//! Strict TOML run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use smcmc_core::baselines::SmcConfig;
use smcmc_core::gp::GpConfig;
use smcmc_core::mixture::{MixtureHyper, MixtureInit, MixtureParams};
use smcmc_core::ScheduleConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Smcmc,
    Mcmc,
    Smc,
    Verify,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Smcmc => "smcmc",
            Algorithm::Mcmc => "mcmc",
            Algorithm::Smc => "smc",
            Algorithm::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mixture,
    Gp,
}

/// Column layout of an input CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    /// One column `y`.
    Mixture,
    /// Columns `x1..xd` and a 0/1 column `y`.
    Gp,
    /// Columns `sbp`, `obesity`, `age`; y = I(sbp > 139), x = (obesity, age).
    Heart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub path: PathBuf,
    pub schema: Schema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub n: usize,
    pub seed: u64,
    /// Mixture truth; the four-component benchmark when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<MixtureParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSection {
    #[serde(default)]
    pub hyper: MixtureHyper,
    #[serde(default)]
    pub init: MixtureInit,
}

/// Prediction grid over the first two covariates, in data units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictGrid {
    /// Steps after which predictions are written.
    pub steps: Vec<usize>,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    /// Points per axis.
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    #[serde(default)]
    pub sampler: GpConfig,
    /// Standardize covariates to mean 0, variance 1 before sampling.
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predict: Option<PredictGrid>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    /// Full-data sweeps per chain.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub suite: String,
    pub instances: usize,
}

/// A complete run description. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    pub seed: u64,
    /// Chains L (or particles N for SMC).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    pub output: PathBuf,
    /// Free-form tag carried into table rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<Synthetic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gp: Option<GpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcmc: Option<McmcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smc: Option<SmcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
}

impl RunConfig {
    pub fn model(&self) -> ModelKind {
        self.model.expect("validated config has a model")
    }

    pub fn chains(&self) -> usize {
        self.chains.expect("validated config has chains")
    }

    pub fn schedule(&self) -> ScheduleConfig {
        self.schedule.clone().unwrap_or_default()
    }

    pub fn mixture_section(&self) -> MixtureSection {
        self.mixture.clone().unwrap_or(MixtureSection {
            hyper: MixtureHyper::default(),
            init: MixtureInit::default(),
        })
    }

    pub fn gp_section(&self) -> GpSection {
        self.gp.clone().unwrap_or(GpSection {
            sampler: GpConfig::default(),
            standardize: true,
            predict: None,
        })
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.algorithm.name().to_string())
    }

    /// Resolve relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if self.output.is_relative() {
            self.output = base.join(&self.output);
        }
        if let Some(d) = &mut self.data {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
            // absolute so a manifest rerun works from any directory
            if let Ok(p) = std::fs::canonicalize(&d.path) {
                d.path = p;
            }
        }
    }

    /// Check every invariant that can be checked before running.
    pub fn validate(&self) -> Result<()> {
        let needs = |key: &str| format!("`{key}` is required for algorithm {}", self.algorithm.name());
        if self.algorithm == Algorithm::Verify {
            let Some(v) = &self.verify else {
                bail!(needs("verify"))
            };
            if v.instances == 0 {
                bail!("verify.instances must be at least 1");
            }
            return Ok(());
        }
        let Some(model) = self.model else {
            bail!(needs("model"))
        };
        let Some(chains) = self.chains else {
            bail!(needs("chains"))
        };
        if chains < 2 {
            bail!("chains must be at least 2, got {chains}");
        }
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => bail!("exactly one of `data` and `synthetic` may be given"),
            (None, None) => bail!("one of `data` or `synthetic` is required"),
            _ => {}
        }
        if let Some(d) = &self.data {
            if !d.path.is_file() {
                bail!("data.path {} does not exist", d.path.display());
            }
            let ok = matches!(
                (model, d.schema),
                (ModelKind::Mixture, Schema::Mixture) | (ModelKind::Gp, Schema::Gp | Schema::Heart)
            );
            if !ok {
                bail!("data.schema {:?} does not fit model {:?}", d.schema, model);
            }
        }
        if let Some(s) = &self.synthetic {
            if s.n == 0 {
                bail!("synthetic.n must be at least 1");
            }
            if let Some(t) = &s.truth {
                if model != ModelKind::Mixture {
                    bail!("synthetic.truth only applies to the mixture model");
                }
                t.validate().context("synthetic.truth")?;
            }
        }
        if matches!(self.algorithm, Algorithm::Smcmc | Algorithm::Smc) {
            let Some(s) = &self.schedule else {
                bail!(needs("schedule"))
            };
            s.validate().context("schedule")?;
        }
        match model {
            ModelKind::Mixture => {
                if self.gp.is_some() {
                    bail!("`gp` section given for the mixture model");
                }
                let m = self.mixture_section();
                m.hyper.validate().context("mixture.hyper")?;
                smcmc_core::mixture::MixtureModel::new(m.hyper, m.init).context("mixture.init")?;
            }
            ModelKind::Gp => {
                if self.mixture.is_some() {
                    bail!("`mixture` section given for the gp model");
                }
                let g = self.gp_section();
                g.sampler.validate().context("gp.sampler")?;
                smcmc_core::gp::build_grid(&g.sampler.grid).context("gp.sampler.grid")?;
                if let Some(p) = &g.predict {
                    if p.resolution < 2 {
                        bail!("gp.predict.resolution must be at least 2");
                    }
                }
            }
        }
        match self.algorithm {
            Algorithm::Mcmc => {
                let Some(m) = &self.mcmc else { bail!(needs("mcmc")) };
                if m.iterations == 0 {
                    bail!("mcmc.iterations must be at least 1");
                }
            }
            Algorithm::Smc => {
                if model != ModelKind::Mixture {
                    bail!("algorithm smc supports only the mixture model");
                }
                if let Some(s) = &self.smc {
                    s.validate().context("smc")?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// Parse and validate a config, resolving relative paths against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    cfg.validate()
        .with_context(|| format!("in config {}", path.display()))?;
    Ok(cfg)
}

/// Parse without resolving paths or validating.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_csv, Observations};

    const MINIMAL: &str = r#"
algorithm = "smcmc"
model = "mixture"
seed = 1
chains = 10
output = "out"

[schedule]
epsilon = 0.5
m_cap = 100
m_min = 2
diag_stride = 1
batch_sizes = [1]

[synthetic]
n = 20
seed = 3
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.chains(), 10);
    }

    #[test]
    fn round_trip() {
        let cfg = parse_config(MINIMAL).unwrap();
        let back = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn bad_epsilon_names_the_key() {
        let cfg = parse_config(&MINIMAL.replace("epsilon = 0.5", "epsilon = 1.5")).unwrap();
        let msg = format!("{:#}", cfg.validate().unwrap_err());
        assert!(msg.contains("epsilon"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&MINIMAL.replace("seed = 1", "seed = 1\nsede = 2")).unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
        let err = parse_config(&MINIMAL.replace("m_cap = 100", "m_cap = 100\nm_max = 3")).unwrap_err();
        assert!(err.to_string().contains("m_max"), "{err}");
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_config(&MINIMAL.replace("m_min = 2\n", "")).unwrap_err();
        assert!(err.to_string().contains("m_min"), "{err}");
    }

    #[test]
    fn type_mismatch_is_reported() {
        let err = parse_config(&MINIMAL.replace("chains = 10", "chains = \"ten\"")).unwrap_err();
        assert!(err.to_string().contains("invalid type"), "{err}");
    }

    #[test]
    fn data_and_synthetic_are_exclusive() {
        let text = format!("{MINIMAL}\n[data]\npath = \"y.csv\"\nschema = \"mixture\"\n");
        let cfg = parse_config(&text).unwrap();
        assert!(cfg.validate().is_err());
    }

    fn configs_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
    }

    #[test]
    fn shipped_configs_validate() {
        let mut seen = 0;
        for entry in std::fs::read_dir(configs_dir()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_none_or(|e| e != "toml") || path.ends_with("gp_heart.toml") {
                continue;
            }
            load_config(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            seen += 1;
        }
        assert_eq!(seen, 5);
    }

    #[test]
    fn heart_config_reads_a_heart_csv() {
        let root = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(root.path().join("configs")).unwrap();
        std::fs::create_dir_all(root.path().join("data")).unwrap();
        let cfg_path = root.path().join("configs/gp_heart.toml");
        std::fs::copy(configs_dir().join("gp_heart.toml"), &cfg_path).unwrap();
        std::fs::write(
            root.path().join("data/heart.csv"),
            "row.names,sbp,tobacco,obesity,age,chd\n1,160,12,25.3,52,1\n2,139,0.01,28.87,63,1\n3,118,0.08,29.14,46,0\n",
        )
        .unwrap();
        let cfg = load_config(&cfg_path).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Smcmc);
        let data = cfg.data.as_ref().unwrap();
        let Observations::Gp(obs) = load_csv(&data.path, data.schema).unwrap() else {
            panic!("heart schema yields gp observations");
        };
        assert_eq!(obs.iter().map(|o| o.y).collect::<Vec<_>>(), [true, false, false]);
        assert_eq!(obs[0].x, [25.3, 52.0]);
    }
}
