//! Run configuration: flat `key = value` files overridden by CLI flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use phrasal::ilp::{GenerationConfig, Mode};
use phrasal::pipeline::{PipelineConfig, DEFAULT_JACCARD_THRESHOLD};
use phrasal::salience::{SalienceConfig, Stopwords};
use phrasal::solver::SolverLimits;

/// Everything a `summarize` run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub b: f64,
    pub rho: f64,
    pub use_ne: bool,
    pub jaccard_threshold: f64,
    pub length_budget: usize,
    pub max_sentences: usize,
    pub min_sentence_len: usize,
    pub mode: Mode,
    pub topic_dir: PathBuf,
    pub out_dir: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub max_nodes: Option<u64>,
    pub time_limit_secs: Option<u64>,
    pub dump_matrices: bool,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b: 6.0,
            rho: 0.5,
            use_ne: true,
            jaccard_threshold: DEFAULT_JACCARD_THRESHOLD,
            length_budget: 100,
            max_sentences: 10,
            min_sentence_len: 10,
            mode: Mode::Abstractive,
            topic_dir: PathBuf::new(),
            out_dir: PathBuf::from("out"),
            stopwords: None,
            max_nodes: None,
            time_limit_secs: None,
            dump_matrices: false,
            jobs: 4,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Applies `key = value` pairs from a config file. Flags win over file
    /// values, so this runs before flag overrides.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut pairs = BTreeMap::new();
        for (line_no, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", path.display(), line_no + 1))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in pairs {
            self.set(&key, &value)
                .with_context(|| format!("{}: bad value for {key}", path.display()))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "B" => self.b = value.parse()?,
            "rho" => self.rho = value.parse()?,
            "use_ne" => self.use_ne = value.parse()?,
            "jaccard_threshold" => self.jaccard_threshold = value.parse()?,
            "L" => self.length_budget = value.parse()?,
            "K" => self.max_sentences = value.parse()?,
            "M" => self.min_sentence_len = value.parse()?,
            "mode" => self.mode = value.parse().map_err(anyhow::Error::msg)?,
            "topic_dir" => self.topic_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "stopwords" => self.stopwords = Some(PathBuf::from(value)),
            "max_nodes" => self.max_nodes = Some(value.parse()?),
            "time_limit_secs" => self.time_limit_secs = Some(value.parse()?),
            "dump_matrices" => self.dump_matrices = value.parse()?,
            "jobs" => self.jobs = value.parse()?,
            "seed" => self.seed = value.parse()?,
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let salience = SalienceConfig::new(self.b, self.rho, self.use_ne)
            .map_err(|e| anyhow::anyhow!("bad salience parameters: {e}"))?;
        if !(self.jaccard_threshold > 0.0 && self.jaccard_threshold <= 1.0) {
            bail!("jaccard threshold must lie in (0, 1]");
        }
        Ok(PipelineConfig {
            salience,
            generation: GenerationConfig {
                length_budget: self.length_budget.max(1),
                max_sentences: self.max_sentences.max(1),
                min_sentence_len: self.min_sentence_len,
                mode: self.mode,
            },
            jaccard_threshold: self.jaccard_threshold,
            limits: SolverLimits {
                max_nodes: self.max_nodes,
                time_limit: self.time_limit_secs.map(Duration::from_secs),
            },
        })
    }

    pub fn load_stopwords(&self) -> Result<Stopwords> {
        match &self.stopwords {
            Some(path) => Stopwords::from_path(path)
                .with_context(|| format!("cannot read stopword file {}", path.display())),
            None => Ok(Stopwords::builtin()),
        }
    }
}
