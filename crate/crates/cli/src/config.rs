//! Run configuration: a TOML file whose paths resolve against the file's
//! own directory, overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subsearch::engine::BackendKind;
use subsearch::evolve::{EvolveConfig, FitnessWeights, GAConfig};
use subsearch::filter::DEFAULT_CLASSIFIER_THRESHOLD;
use subsearch::metrics::DiscountMode;
use subsearch::patterns::{PatternBlend, DEFAULT_TOP_K};
use subsearch::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub q0: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub authority: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub labeled: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub stem_rules: Option<PathBuf>,
    /// Not part of the run snapshot; a run may be written anywhere.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextSettings {
    /// Make every synonym entry hold in both directions.
    pub symmetric_synonyms: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSettings {
    pub classifier_threshold: f64,
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings {
            classifier_threshold: DEFAULT_CLASSIFIER_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternSettings {
    pub top_k: usize,
    /// Extra weighted ranking emitted next to the four single-pattern ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blend: Option<PatternBlend>,
}

impl Default for PatternSettings {
    fn default() -> Self {
        PatternSettings {
            top_k: DEFAULT_TOP_K,
            blend: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSettings {
    pub discount: DiscountMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub backend: BackendKind,
    pub paths: Paths,
    pub text: TextSettings,
    pub ga: GAConfig,
    pub weights: FitnessWeights,
    pub filter: FilterSettings,
    pub patterns: PatternSettings,
    pub metrics: MetricSettings,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let raw: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("{source}: {}", e.message())))?;
        // one seed per run, stated once
        if raw.get("ga").and_then(|g| g.get("seed")).is_some() {
            return Err(Error::Config(format!("{source}: set `seed` at the top level, not under [ga]")));
        }
        let mut cfg: RunConfig = raw
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{source}: {}", e.message())))?;
        if let Some(seed) = cfg.seed {
            cfg.ga.seed = seed;
        }
        Ok(cfg)
    }

    /// Reads `path`; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve_against(base);
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.ga.seed = seed;
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            ga: self.ga.clone(),
            weights: self.weights.clone(),
            top_k: self.patterns.top_k,
        }
    }

    /// Checks what `evolve` needs: a seed, the inputs it reads, and sane
    /// settings.
    pub fn validate_for_evolve(&self) -> Result<()> {
        if self.seed.is_none() {
            return Err(Error::Config("`seed` is required for evolve".into()));
        }
        for (name, p) in [("corpus", &self.paths.corpus), ("q0", &self.paths.q0)] {
            if p.is_none() {
                return Err(Error::Config(format!("paths.{name} is required for evolve")));
            }
        }
        if self.paths.out_dir.is_none() {
            return Err(Error::Config("paths.out_dir (or --out) is required for evolve".into()));
        }
        self.paths.check_exist()?;
        let t = self.filter.classifier_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("filter.classifier_threshold {t} outside [0, 1]")));
        }
        self.evolve_config().validate()
    }
}

impl Paths {
    fn inputs(&self) -> [(&'static str, &Option<PathBuf>); 9] {
        [
            ("corpus", &self.corpus),
            ("q0", &self.q0),
            ("qrels", &self.qrels),
            ("synonyms", &self.synonyms),
            ("authority", &self.authority),
            ("rules", &self.rules),
            ("labeled", &self.labeled),
            ("stopwords", &self.stopwords),
            ("stem_rules", &self.stem_rules),
        ]
    }

    fn resolve_against(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.q0,
            &mut self.qrels,
            &mut self.synonyms,
            &mut self.authority,
            &mut self.rules,
            &mut self.labeled,
            &mut self.stopwords,
            &mut self.stem_rules,
            &mut self.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn check_exist(&self) -> Result<()> {
        for (name, p) in self.inputs() {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::Config(format!("paths.{name}: {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}
