use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use phrasal::compat::{build_compatibility, build_similarity};
use phrasal::ilp::{build_problem, GenerationConfig, Mode};
use phrasal::phrase::extract_phrases;
use phrasal::pipeline::{summarize_topic, PipelineConfig};
use phrasal::rouge::{normalize_text, rouge_su4};
use phrasal::salience::{build_concept_table, score_phrases, SalienceConfig, Stopwords};
use phrasal_bench::{amish, amish_pair};

fn bench_stages(c: &mut Criterion) {
    let topic = amish();
    let stop = Stopwords::builtin();
    let salience_cfg = SalienceConfig::default();

    let mut group = c.benchmark_group("stages");
    group.bench_function("extract_phrases", |b| {
        b.iter(|| extract_phrases(black_box(&topic)))
    });
    group.bench_function("concept_table", |b| {
        b.iter(|| build_concept_table(black_box(&topic), &salience_cfg, &stop).unwrap())
    });

    let table = build_concept_table(&topic, &salience_cfg, &stop).unwrap();
    let (mut phrases, _) = extract_phrases(&topic);
    let sets = score_phrases(&mut phrases, &topic, &table, &stop, true);
    group.bench_function("compatibility", |b| {
        b.iter(|| build_compatibility(black_box(&topic), &phrases, &sets, 0.75))
    });
    let (compat, clusters, _) = build_compatibility(&topic, &phrases, &sets, 0.75);
    let sims = build_similarity(&phrases, &clusters, &sets, 0.75);
    group.bench_function("build_problem", |b| {
        b.iter(|| build_problem(&phrases, &compat, &sims, &GenerationConfig::default()).unwrap())
    });
    group.finish();
}

fn bench_end_to_end(c: &mut Criterion) {
    let topic = amish_pair();
    let stop = Stopwords::builtin();
    let cfg = PipelineConfig {
        generation: GenerationConfig {
            min_sentence_len: 4,
            mode: Mode::Abstractive,
            ..GenerationConfig::default()
        },
        ..PipelineConfig::default()
    };
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    group.bench_function("summarize_two_docs", |b| {
        b.iter(|| summarize_topic(black_box(&topic), &cfg, &stop).unwrap())
    });
    group.finish();
}

fn bench_rouge(c: &mut Criterion) {
    let candidate = normalize_text(
        "An armed man walked into an Amish school, sent the boys outside and tied up \
         and shot the girls, killing three of them. Police could offer no explanation.",
    );
    let reference = normalize_text(
        "A gunman entered the West Nickel Mines Amish School and shot ten girls, \
         killing five of them before killing himself as police stormed the building.",
    );
    c.bench_function("rouge_su4", |b| {
        b.iter(|| rouge_su4(black_box(&candidate), std::slice::from_ref(&reference)).unwrap())
    });
}

criterion_group!(benches, bench_stages, bench_end_to_end, bench_rouge);
criterion_main!(benches);
