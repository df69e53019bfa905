//! Black-box tests of the `phrasal` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phrasal"))
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/amish")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn summarize_writes_all_artifacts() {
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out.path())
        .output()
        .unwrap();
    assert!(result.status.success(), "stderr: {}", stderr(&result));
    for name in [
        "amish.summary.txt",
        "amish.provenance.txt",
        "amish.problem.lp",
        "amish.solution.tsv",
    ] {
        let path = out.path().join(name);
        assert!(path.exists(), "{name} missing");
        assert!(std::fs::metadata(&path).unwrap().len() > 0, "{name} empty");
    }
    let summary = std::fs::read_to_string(out.path().join("amish.summary.txt")).unwrap();
    let words = summary
        .split_whitespace()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .count();
    assert!(words <= 100, "{words} words over the default budget");
    assert!(summary.lines().count() >= 1);
    let provenance = std::fs::read_to_string(out.path().join("amish.provenance.txt")).unwrap();
    assert!(phrasal::generate::parse_provenance(&provenance).is_some());
}

#[test]
fn summarize_is_byte_deterministic() {
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for out in [&out_a, &out_b] {
        let result = bin()
            .args(["summarize", "--topic-dir"])
            .arg(corpus_dir())
            .arg("--out-dir")
            .arg(out.path())
            .args(["--M", "4"])
            .output()
            .unwrap();
        assert!(result.status.success(), "stderr: {}", stderr(&result));
    }
    for name in [
        "amish.summary.txt",
        "amish.provenance.txt",
        "amish.problem.lp",
        "amish.solution.tsv",
    ] {
        let a = std::fs::read(out_a.path().join(name)).unwrap();
        let b = std::fs::read(out_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across identical runs");
    }
}

#[test]
fn missing_stopword_file_fails_with_path_in_message() {
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out.path())
        .args(["--stopwords", "/nonexistent/stopwords.txt"])
        .output()
        .unwrap();
    assert!(!result.status.success());
    assert!(
        stderr(&result).contains("/nonexistent/stopwords.txt"),
        "message must name the missing path: {}",
        stderr(&result)
    );
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.conf");
    std::fs::write(&config_path, "L = 50\nM = 4\nmode = extractive\n").unwrap();

    // Config alone: extractive, budget 50.
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out.path())
        .arg("--config")
        .arg(&config_path)
        .output()
        .unwrap();
    assert!(result.status.success(), "stderr: {}", stderr(&result));
    let summary = std::fs::read_to_string(out.path().join("amish.summary.txt")).unwrap();
    let words = |text: &str| {
        text.split_whitespace()
            .filter(|t| t.chars().any(char::is_alphanumeric))
            .count()
    };
    assert!(words(&summary) <= 50);

    // A flag overrides the file's budget.
    let out2 = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out2.path())
        .arg("--config")
        .arg(&config_path)
        .args(["--L", "20"])
        .output()
        .unwrap();
    assert!(result.status.success());
    let smaller = std::fs::read_to_string(out2.path().join("amish.summary.txt")).unwrap();
    assert!(words(&smaller) <= 20, "flag budget must win: {smaller}");
}

#[test]
fn eval_scores_identity_and_multireference() {
    let summaries = tempfile::tempdir().unwrap();
    let references = tempfile::tempdir().unwrap();
    std::fs::write(summaries.path().join("t1.summary.txt"), "the gunman died\n").unwrap();
    std::fs::write(references.path().join("t1.A.txt"), "the gunman died\n").unwrap();
    // Second topic: candidate "a b c" vs references "a b" and "b c d";
    // micro-averaged bigram scores are P = 1/2, R = 2/3.
    std::fs::write(summaries.path().join("t2.summary.txt"), "a b c\n").unwrap();
    std::fs::write(references.path().join("t2.A.txt"), "a b\n").unwrap();
    std::fs::write(references.path().join("t2.B.txt"), "b c d\n").unwrap();

    let result = bin()
        .arg("eval")
        .arg("--summaries")
        .arg(summaries.path())
        .arg("--references")
        .arg(references.path())
        .output()
        .unwrap();
    assert!(result.status.success(), "stderr: {}", stderr(&result));
    let report = stdout(&result);
    assert!(report.starts_with("# recall"), "{report}");
    assert!(report.contains("topic\tmetric\tP\tR\tF1\n"), "{report}");
    assert!(report.contains("t1\tROUGE-2\t1.00000\t1.00000\t1.00000"), "{report}");
    assert!(report.contains("t1\tROUGE-SU4\t1.00000\t1.00000\t1.00000"), "{report}");
    assert!(report.contains("t2\tROUGE-2\t0.50000\t0.66667\t0.57143"), "{report}");
    assert!(report.contains("AVERAGE\tROUGE-2"), "{report}");
}

#[test]
fn eval_empty_candidate_scores_zero() {
    let summaries = tempfile::tempdir().unwrap();
    let references = tempfile::tempdir().unwrap();
    std::fs::write(summaries.path().join("t1.summary.txt"), "\n").unwrap();
    std::fs::write(references.path().join("t1.A.txt"), "the gunman died\n").unwrap();
    let result = bin()
        .arg("eval")
        .arg("--summaries")
        .arg(summaries.path())
        .arg("--references")
        .arg(references.path())
        .output()
        .unwrap();
    assert!(result.status.success());
    assert!(stdout(&result).contains("t1\tROUGE-2\t0.00000\t0.00000\t0.00000"));
}

#[test]
fn solver_check_is_deterministic_and_caps_size() {
    let run = || {
        bin()
            .args(["solver-check", "--count", "25", "--size", "16", "--seed", "42"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b), "reports must be byte-identical per seed");
    assert!(stdout(&a).contains("25/25 instances matched the oracle"));

    let too_big = bin()
        .args(["solver-check", "--count", "1", "--size", "30"])
        .output()
        .unwrap();
    assert!(!too_big.status.success());
    assert!(stderr(&too_big).contains("cap"));
}

#[test]
fn dump_phrases_uses_documented_format() {
    let result = bin()
        .args(["dump-phrases", "--topic-dir"])
        .arg(corpus_dir())
        .output()
        .unwrap();
    assert!(result.status.success());
    let text = stdout(&result);
    let first = text.lines().next().unwrap();
    let fields: Vec<&str> = first.split('\t').collect();
    assert_eq!(fields.len(), 5, "id, kind, level, coordinates, text: {first}");
    assert!(fields[0].starts_with('p'));
    assert!(fields[1] == "NP" || fields[1] == "VP");
    assert!(fields[3].contains(':') && fields[3].contains('-'));
}

#[test]
fn dump_concepts_is_sorted_by_weight() {
    let result = bin()
        .args(["dump-concepts", "--topic-dir"])
        .arg(corpus_dir())
        .output()
        .unwrap();
    assert!(result.status.success());
    let text = stdout(&result);
    let weights: Vec<f64> = text
        .lines()
        .map(|l| l.rsplit('\t').next().unwrap().parse().unwrap())
        .collect();
    assert!(!weights.is_empty());
    for pair in weights.windows(2) {
        assert!(pair[0] >= pair[1], "weights must be non-increasing");
    }
}

#[test]
fn multi_topic_directory_processes_each_subdirectory() {
    let root = tempfile::tempdir().unwrap();
    for name in ["t1", "t2"] {
        let dir = root.path().join(name);
        std::fs::create_dir(&dir).unwrap();
        std::fs::write(
            dir.join("a.doc"),
            "#id a\n#timestamp 2006-10-02T14:00:00Z\n(S (NP (NNP Roberts)) (VP (VBD stormed) (NP (DT the) (NN building))) (. .))\n",
        )
        .unwrap();
    }
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(root.path())
        .arg("--out-dir")
        .arg(out.path())
        .args(["--M", "0", "--jobs", "2"])
        .output()
        .unwrap();
    assert!(result.status.success(), "stderr: {}", stderr(&result));
    assert!(out.path().join("t1.summary.txt").exists());
    assert!(out.path().join("t2.summary.txt").exists());
}

#[test]
fn extractive_mode_outputs_source_sentences() {
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out.path())
        .args(["--mode", "extractive", "--M", "4"])
        .output()
        .unwrap();
    assert!(result.status.success());
    let summary = std::fs::read_to_string(out.path().join("amish.summary.txt")).unwrap();
    let topic = phrasal::treebank::load_topic(&corpus_dir()).unwrap();
    let sources: Vec<String> = topic
        .sentences()
        .map(|s| phrasal::generate::detokenize(&s.tokens))
        .collect();
    for line in summary.lines() {
        assert!(
            sources.iter().any(|s| s == line),
            "not a verbatim source sentence: {line}"
        );
    }
}

#[test]
fn dump_matrices_writes_audit_files(){
    let out = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["summarize", "--topic-dir"])
        .arg(corpus_dir())
        .arg("--out-dir")
        .arg(out.path())
        .args(["--dump-matrices", "--K", "2"])
        .output()
        .unwrap();
    assert!(result.status.success());
    for name in ["amish.gamma.tsv", "amish.gamma_tilde.tsv", "amish.r_np.tsv", "amish.r_vp.tsv"] {
        assert!(out.path().join(name).exists(), "{name} missing");
    }
    // Expansion only adds entries.
    let gamma = std::fs::read_to_string(out.path().join("amish.gamma.tsv")).unwrap();
    let tilde = std::fs::read_to_string(out.path().join("amish.gamma_tilde.tsv")).unwrap();
    let set: std::collections::BTreeSet<&str> = tilde.lines().collect();
    for line in gamma.lines() {
        assert!(set.contains(line), "gamma entry missing from gamma_tilde: {line}");
    }
    assert!(tilde.lines().count() >= gamma.lines().count());
}
