use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::{DMatrix, DVector};

use probe_forge::corpus::Corpus;
use probe_forge::embed::{make_mock_bundle, variant_texts, FeaturePlan};
use probe_forge::probe::{logreg_sgd_fit, ridge_fit, SgdConfig};
use probe_forge::semantics::dfg::extract_dfg;
use probe_forge::semantics::scope::build_scope_tree;
use probe_forge::syntax::parse;
use probe_forge::taskgen::{generate_all, Task};

fn corpus(n: usize) -> Corpus {
    Corpus::from_sources(probe_forge::synth::java_methods(n, 1), None)
}

fn front_end(c: &mut Criterion) {
    let corpus = corpus(50);
    c.bench_function("parse 50 snippets", |b| {
        b.iter(|| {
            corpus
                .snippets
                .iter()
                .map(|s| parse(&s.text).unwrap().nodes().len())
                .sum::<usize>()
        })
    });
    let trees: Vec<_> = corpus
        .snippets
        .iter()
        .map(|s| parse(&s.text).unwrap())
        .collect();
    c.bench_function("scopes + dfg 50 snippets", |b| {
        b.iter(|| {
            trees
                .iter()
                .map(|t| extract_dfg(t, &build_scope_tree(t)).len())
                .sum::<usize>()
        })
    });
    c.bench_function("generate_all 50 snippets", |b| {
        b.iter(|| generate_all(&corpus, 7).unwrap())
    });
}

fn features(c: &mut Criterion) {
    let corpus = corpus(100);
    let g = generate_all(&corpus, 7).unwrap();
    let bundle = make_mock_bundle(&g.variants, 32, 1, 0).unwrap();
    let texts = variant_texts(&g.variants);
    let layer = bundle.layer(1).unwrap();
    let examples = &g.datasets[&Task::EdgePrediction];
    c.bench_function("plan + features, edges, 100 snippets", |b| {
        b.iter(|| {
            FeaturePlan::build(Task::EdgePrediction, examples, &bundle, &texts)
                .features(&layer)
                .len()
        })
    });
}

fn probes(c: &mut Criterion) {
    let (n, p) = (2000, 32);
    let x = DMatrix::from_fn(n, p, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5);
    let w = DVector::from_fn(p, |j, _| j as f64 / p as f64);
    let y = &x * &w;
    c.bench_function("ridge_fit 2000x32", |b| {
        b.iter(|| ridge_fit(&x, &y, &[0.1, 1.0, 10.0]).unwrap())
    });
    let labels: Vec<usize> = y.iter().map(|v| (*v > y.mean()) as usize).collect();
    c.bench_function("logreg_sgd_fit 2000x32", |b| {
        b.iter_batched(
            SgdConfig::default,
            |cfg| logreg_sgd_fit(&x, &labels, 2, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = front_end, features, probes
}
criterion_main!(benches);
