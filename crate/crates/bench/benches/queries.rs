use std::collections::HashSet;

use criterion::{criterion_group, criterion_main, Criterion};
use embias::analogy::{generate_analogies, GenerateOptions};
use embias::eval::{evaluate_analogy, evaluate_similarity};
use embias::synthetic::{planted_bias, PlantedBiasConfig};
use embias::{bias_direction, io, Format};

fn queries(c: &mut Criterion) {
    let planted = planted_bias(&PlantedBiasConfig::default());
    let emb = &planted.embedding;
    let dir = bias_direction(emb, &planted.anchors.0, &planted.anchors.1).unwrap();

    let mut group = c.benchmark_group("analogies");
    group.sample_size(10);
    for limit in [500, 2000] {
        let opts = GenerateOptions {
            vocab_limit: limit,
            top_k: 100,
            ..Default::default()
        };
        group.bench_function(format!("generate/{limit}"), |b| {
            b.iter(|| generate_analogies(emb, &dir, &opts).unwrap())
        });
    }
    group.finish();

    let query = emb.vector(&planted.seeds[0]).unwrap().to_vec();
    let exclude = HashSet::new();
    c.bench_function("nearest_neighbors/10", |b| {
        b.iter(|| emb.nearest_neighbors(&query, 10, &exclude).unwrap())
    });

    let sim = planted.similarity_dataset(300, 0.05, 7);
    c.bench_function("evaluate_similarity/300", |b| b.iter(|| evaluate_similarity(emb, &sim).unwrap()));
    let ana = planted.analogy_dataset();
    let mut group = c.benchmark_group("evaluate_analogy");
    group.sample_size(10);
    group.bench_function(format!("{}", ana.questions.len()), |b| {
        b.iter(|| evaluate_analogy(emb, &ana).unwrap())
    });
    group.finish();

    let bytes = io::encode_embedding(emb, Format::Word2VecBinary).unwrap();
    c.bench_function("read_word2vec_binary", |b| {
        b.iter(|| io::read_embedding(&bytes, Format::Word2VecBinary).unwrap())
    });
    let text = io::encode_embedding(emb, Format::Word2VecText).unwrap();
    c.bench_function("read_word2vec_text", |b| {
        b.iter(|| io::read_embedding(&text, Format::Word2VecText).unwrap())
    });
}

criterion_group!(benches, queries);
criterion_main!(benches);
