//! `phrasal` — summarize pre-parsed document topics by phrase selection and
//! merging, and score the results with ROUGE.

mod config;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phrasal::pipeline::{self, solver_check, summarize_topic, write_artifacts, write_matrix_dumps};
use phrasal::rouge::{normalize_text, rouge2, rouge_su4, RougeScore};
use phrasal::salience::build_concept_table;
use phrasal::treebank::load_topic;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "phrasal", version, about = "Phrase-merging multi-document summarizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// Flat `key = value` config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First-paragraph concept weight.
    #[arg(long = "B")]
    b: Option<f64>,
    /// Paragraph weight decay in (0,1).
    #[arg(long)]
    rho: Option<f64>,
    /// Include named-entity concepts.
    #[arg(long)]
    use_ne: Option<bool>,
    /// Similarity threshold for alternative VPs (strict >).
    #[arg(long)]
    jaccard_threshold: Option<f64>,
    /// Summary word budget.
    #[arg(long = "L")]
    length_budget: Option<usize>,
    /// Maximum summary sentence count.
    #[arg(long = "K")]
    max_sentences: Option<usize>,
    /// Minimum source-sentence length for VP selection.
    #[arg(long = "M")]
    min_sentence_len: Option<usize>,
    /// abstractive | compressive | extractive.
    #[arg(long)]
    mode: Option<String>,
    /// Stopword list, one token per line (bundled list by default).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Branch-and-bound node limit.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Solver wall-clock limit in seconds.
    #[arg(long)]
    time_limit_secs: Option<u64>,
    /// Worker threads for multi-topic runs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonOpts {
    fn build(&self, topic_dir: Option<&Path>, out_dir: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            };
        }
        take!(b);
        take!(rho);
        take!(use_ne);
        take!(jaccard_threshold);
        take!(length_budget);
        take!(max_sentences);
        take!(min_sentence_len);
        take!(jobs);
        take!(seed);
        if let Some(path) = &self.stopwords {
            cfg.stopwords = Some(path.clone());
        }
        if let Some(mode) = &self.mode {
            cfg.mode = mode.parse().map_err(anyhow::Error::msg)?;
        }
        if let Some(n) = self.max_nodes {
            cfg.max_nodes = Some(n);
        }
        if let Some(t) = self.time_limit_secs {
            cfg.time_limit_secs = Some(t);
        }
        if let Some(dir) = topic_dir {
            cfg.topic_dir = dir.to_path_buf();
        }
        if let Some(dir) = out_dir {
            cfg.out_dir = dir.to_path_buf();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write summary artifacts per topic.
    Summarize {
        /// A topic directory, or a directory of topic subdirectories.
        #[arg(long)]
        topic_dir: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Also write Γ/Γ̃ and similarity matrix dumps.
        #[arg(long)]
        dump_matrices: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Score summaries against model summaries (ROUGE-2 and ROUGE-SU4).
    Eval {
        /// Directory of `<topic>.summary.txt` files (or plain `<topic>.txt`).
        #[arg(long)]
        summaries: PathBuf,
        /// Directory of `<topic>.<writer>.txt` model summaries.
        #[arg(long)]
        references: PathBuf,
    },
    /// Verify the exact solver against the exhaustive oracle.
    SolverCheck {
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Maximum variables per instance (oracle cap 25).
        #[arg(long, default_value_t = 18)]
        size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print extracted phrases for a topic, one per line.
    DumpPhrases {
        #[arg(long)]
        topic_dir: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the weighted concept table for a topic.
    DumpConcepts {
        #[arg(long)]
        topic_dir: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Summarize { topic_dir, out_dir, dump_matrices, common } => {
            let mut cfg = common.build(Some(&topic_dir), Some(&out_dir))?;
            cfg.dump_matrices = dump_matrices;
            cmd_summarize(&cfg)
        }
        Command::Eval { summaries, references } => cmd_eval(&summaries, &references),
        Command::SolverCheck { count, size, seed } => cmd_solver_check(count, size, seed),
        Command::DumpPhrases { topic_dir, common } => {
            let cfg = common.build(Some(&topic_dir), None)?;
            cmd_dump_phrases(&cfg)
        }
        Command::DumpConcepts { topic_dir, common } => {
            let cfg = common.build(Some(&topic_dir), None)?;
            cmd_dump_concepts(&cfg)
        }
    }
}

/// Topic directories to process: the directory itself when it holds
/// documents, otherwise each subdirectory that does.
fn topic_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let has_docs = |dir: &Path| -> bool {
        std::fs::read_dir(dir)
            .map(|entries| {
                entries
                    .filter_map(|e| e.ok())
                    .any(|e| e.path().extension().map(|x| x == "doc").unwrap_or(false))
            })
            .unwrap_or(false)
    };
    if has_docs(root) {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .with_context(|| format!("cannot read {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && has_docs(p))
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        bail!("{} contains no topic documents", root.display());
    }
    Ok(dirs)
}

fn cmd_summarize(cfg: &RunConfig) -> Result<()> {
    let stopwords = cfg.load_stopwords()?;
    let pipeline_cfg = cfg.pipeline_config()?;
    let dirs = topic_dirs(&cfg.topic_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .context("cannot build worker pool")?;
    let results: Vec<Result<String>> = pool.install(|| {
        use rayon::prelude::*;
        dirs.par_iter()
            .map(|dir| -> Result<String> {
                let topic = load_topic(dir)?;
                let artifacts = summarize_topic(&topic, &pipeline_cfg, &stopwords)?;
                write_artifacts(&cfg.out_dir, &topic.topic_id, &artifacts)?;
                if cfg.dump_matrices {
                    write_matrix_dumps(&cfg.out_dir, &topic.topic_id, &artifacts)?;
                }
                let mut log = format!(
                    "{}: {} sentences, {} words, objective {}",
                    topic.topic_id,
                    artifacts.summary.sentences.len(),
                    artifacts.summary.word_count,
                    artifacts.solution.objective_value
                );
                for warning in &artifacts.warnings {
                    log.push_str(&format!("\n  warning: {warning}"));
                }
                Ok(log)
            })
            .collect()
    });

    let mut failed = false;
    for result in results {
        match result {
            Ok(log) => println!("{log}"),
            Err(err) => {
                eprintln!("error: {err:#}");
                failed = true;
            }
        }
    }
    if failed {
        bail!("one or more topics failed");
    }
    Ok(())
}

fn read_tokens(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(normalize_text(&text))
}

fn cmd_eval(summaries: &Path, references: &Path) -> Result<()> {
    // Reference files are `<topic>.<writer>.txt`.
    let mut refs_by_topic: std::collections::BTreeMap<String, Vec<Vec<String>>> =
        std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(references)
        .with_context(|| format!("cannot read {}", references.display()))?
    {
        let path = entry?.path();
        if path.extension().map(|e| e == "txt").unwrap_or(false) {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            if let Some((topic, _writer)) = stem.split_once('.') {
                refs_by_topic
                    .entry(topic.to_string())
                    .or_default()
                    .push(read_tokens(&path)?);
            }
        }
    }

    let mut candidates: Vec<(String, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(summaries)
        .with_context(|| format!("cannot read {}", summaries.display()))?
    {
        let path = entry?.path();
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if let Some(topic) = name.strip_suffix(".summary.txt") {
            candidates.push((topic.to_string(), path.clone()));
        } else if let Some(stem) = name.strip_suffix(".txt") {
            if !stem.contains('.') {
                candidates.push((stem.to_string(), path.clone()));
            }
        }
    }
    candidates.sort();
    if candidates.is_empty() {
        bail!("no summary files in {}", summaries.display());
    }

    println!("# recall = sum over references of clipped unit overlap / total reference units");
    println!("# precision = the same overlap sum / (candidate units x reference count); F1 = 2PR/(P+R)");
    println!("topic\tmetric\tP\tR\tF1");
    let mut totals: Vec<(String, RougeScore)> = Vec::new();
    for (topic, path) in candidates {
        let Some(refs) = refs_by_topic.get(&topic) else {
            eprintln!("warning: {topic}: no reference summaries, skipped");
            continue;
        };
        let tokens = read_tokens(&path)?;
        for (metric, score) in [
            ("ROUGE-2", rouge2(&tokens, refs)),
            ("ROUGE-SU4", rouge_su4(&tokens, refs)),
        ] {
            match score {
                Ok(score) => {
                    println!(
                        "{topic}\t{metric}\t{:.5}\t{:.5}\t{:.5}",
                        score.precision, score.recall, score.f1
                    );
                    totals.push((metric.to_string(), score));
                }
                Err(err) => eprintln!("warning: {topic}: {err}"),
            }
        }
    }
    for metric in ["ROUGE-2", "ROUGE-SU4"] {
        let scores: Vec<&RougeScore> =
            totals.iter().filter(|(m, _)| m == metric).map(|(_, s)| s).collect();
        if !scores.is_empty() {
            let n = scores.len() as f64;
            let avg = |f: fn(&RougeScore) -> f64| scores.iter().map(|s| f(s)).sum::<f64>() / n;
            println!(
                "AVERAGE\t{metric}\t{:.5}\t{:.5}\t{:.5}",
                avg(|s| s.precision),
                avg(|s| s.recall),
                avg(|s| s.f1)
            );
        }
    }
    Ok(())
}

fn cmd_solver_check(count: usize, size: usize, seed: u64) -> Result<()> {
    match solver_check(count, size, seed) {
        Ok(report) => {
            print!("{report}");
            Ok(())
        }
        Err(pipeline::SolverCheckFailure::Mismatch { instance, detail, problem_text }) => {
            let path = std::env::temp_dir().join(format!("solver-check-counterexample-{instance}.lp"));
            std::fs::write(&path, &problem_text)?;
            bail!("instance {instance} mismatch ({detail}); counterexample written to {}", path.display());
        }
        Err(other) => Err(other.into()),
    }
}

fn cmd_dump_phrases(cfg: &RunConfig) -> Result<()> {
    let stopwords = cfg.load_stopwords()?;
    let pipeline_cfg = cfg.pipeline_config()?;
    for dir in topic_dirs(&cfg.topic_dir)? {
        let topic = load_topic(&dir)?;
        let (mut phrases, warnings) = phrasal::phrase::extract_phrases(&topic);
        let table = build_concept_table(&topic, &pipeline_cfg.salience, &stopwords)?;
        phrasal::salience::score_phrases(
            &mut phrases,
            &topic,
            &table,
            &stopwords,
            pipeline_cfg.salience.use_ne,
        );
        print!("{}", phrases.dump());
        for w in warnings {
            eprintln!("warning: {}:{}: {}", w.doc_id, w.sent_idx, w.reason);
        }
    }
    Ok(())
}

fn cmd_dump_concepts(cfg: &RunConfig) -> Result<()> {
    let stopwords = cfg.load_stopwords()?;
    let pipeline_cfg = cfg.pipeline_config()?;
    for dir in topic_dirs(&cfg.topic_dir)? {
        let topic = load_topic(&dir)?;
        let table = build_concept_table(&topic, &pipeline_cfg.salience, &stopwords)?;
        print!("{}", table.dump_tsv());
    }
    Ok(())
}
