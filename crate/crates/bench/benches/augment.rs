use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dialogaug_bench::{corpus, identity_rewriter, resources};
use dialogaug_core::assemble::{augment_corpus, stats, AugmentPlan};
use dialogaug_core::evalf1::{EvalCounts, KbValues, SlotDetector};
use dialogaug_core::wordaug::{synonym_substitute, tokenize_and_protect};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_protect(c: &mut Criterion) {
    let corpus = corpus(50);
    let res = resources(&corpus);
    c.bench_function("tokenize_and_protect/50 dialogues", |b| {
        b.iter(|| {
            for d in &corpus.dialogues {
                for t in &d.turns {
                    black_box(tokenize_and_protect(&t.user, t, &corpus.ontology, &res.poslex));
                }
            }
        })
    });
}

fn bench_synonym(c: &mut Criterion) {
    let corpus = corpus(1);
    let res = resources(&corpus);
    let t = &corpus.dialogues[0].turns[0];
    let tu = tokenize_and_protect(&t.user, t, &corpus.ontology, &res.poslex);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("synonym_substitute", |b| {
        b.iter(|| black_box(synonym_substitute(&tu, &res.synonyms, &mut rng, 1)))
    });
}

fn bench_assemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("augment_corpus");
    group.sample_size(10);
    for n in [50usize, 200] {
        let corpus = corpus(n);
        let res = resources(&corpus);
        let rw = identity_rewriter();
        let plan = AugmentPlan::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| black_box(augment_corpus(&corpus, &plan, &res, Some(&rw)).unwrap()))
        });
    }
    group.finish();

    let corpus = corpus(200);
    let res = resources(&corpus);
    let out = augment_corpus(&corpus, &AugmentPlan::default(), &res, Some(&identity_rewriter())).unwrap();
    c.bench_function("stats/2800 dialogues", |b| b.iter(|| black_box(stats(&out))));
}

fn bench_eval(c: &mut Criterion) {
    let corpus = corpus(200);
    let detector = SlotDetector::new(&corpus.ontology, &KbValues::new());
    c.bench_function("detect_answered/200 dialogues", |b| {
        b.iter(|| {
            for d in &corpus.dialogues {
                for t in &d.turns {
                    black_box(detector.detect(&t.machine));
                }
            }
        })
    });
    c.bench_function("score counts", |b| {
        b.iter(|| black_box(EvalCounts::new(black_box(422), 55, 115).result()))
    });
}

criterion_group!(benches, bench_protect, bench_synonym, bench_assemble, bench_eval);
criterion_main!(benches);
