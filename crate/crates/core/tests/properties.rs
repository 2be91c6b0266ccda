use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use probe_forge::corpus::{preprocess, Corpus};
use probe_forge::embed::{align, make_mock_bundle, variant_texts, FeaturePlan, SPECIAL};
use probe_forge::probe::{
    ridge_fit, row_splits, run_probe, simple_bounds, targets, ProbeConfig, Targets,
};
use probe_forge::syntax::parse;
use probe_forge::taskgen::{corrupted_count, mask_name, PLACEHOLDER};
use probe_forge::taskgen::{generate_all, Task};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corrupted_count_rounds_half_up(b in 1usize..5000) {
        prop_assert_eq!(corrupted_count(b, 0.3), ((3 * b + 5) / 10).max(1));
    }

    #[test]
    fn align_picks_overlapping_pieces(cuts in prop::collection::btree_set(1usize..200, 1..30), s in 0usize..210, len in 0usize..40) {
        let mut bounds: Vec<usize> = vec![0];
        bounds.extend(cuts);
        let mut offsets = vec![SPECIAL];
        offsets.extend(bounds.windows(2).map(|w| [w[0] as i64, w[1] as i64]));
        offsets.push(SPECIAL);
        let span = [s, s + len];
        let got = align(span, &offsets);
        let want: Vec<usize> = (0..offsets.len())
            .filter(|&i| {
                let o = offsets[i];
                o != SPECIAL && (o[0]..o[1]).any(|b| (span[0] as i64..span[1] as i64).contains(&b))
            })
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ridge_satisfies_normal_equations(n in 3usize..60, p in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rand::Rng::random_range(&mut rng, -3.0..3.0));
        let y = DVector::from_fn(n, |_, _| rand::Rng::random_range(&mut rng, -10.0..10.0));
        let m = ridge_fit(&x, &y, &[0.1, 1.0, 10.0]).unwrap();
        prop_assert!(m.normal_equation_residual(&x, &y) <= 1e-8);
    }

    #[test]
    fn preprocess_is_idempotent(i in 0usize..60) {
        let (_, raw) = probe_forge::synth::java_methods(60, 21).swap_remove(i);
        let once = preprocess(&raw).unwrap();
        prop_assert_eq!(preprocess(&once).unwrap(), once.clone());
        prop_assert!(!once.contains("  ") && !once.contains('\n'));
    }
}

#[test]
fn masking_replaces_every_identifier_occurrence() {
    let corpus = Corpus::from_sources(probe_forge::synth::java_methods(80, 2), None);
    for s in &corpus.snippets {
        let tree = parse(&s.text).unwrap();
        for name in ["i", "result", "count"] {
            let occurrences = tree
                .leaves()
                .into_iter()
                .filter(|&l| tree.node(l).kind == "identifier" && tree.node_text(l) == name)
                .count();
            let (text, spans) = mask_name(&tree, name, PLACEHOLDER);
            assert_eq!(spans.len(), occurrences);
            assert!(spans.iter().all(|r| &text[r.clone()] == PLACEHOLDER));
            let masked = parse(&text).unwrap();
            assert!(!masked
                .leaves()
                .into_iter()
                .any(|l| masked.node(l).kind == "identifier" && masked.node_text(l) == name));
        }
    }
}

#[test]
fn splits_keep_snippets_together() {
    let corpus = Corpus::from_sources(probe_forge::synth::java_methods(60, 8), None);
    let g = generate_all(&corpus, 1).unwrap();
    let bundle = make_mock_bundle(&g.variants, 2, 1, 0).unwrap();
    let texts = variant_texts(&g.variants);
    for seed in 0..5 {
        for frac in [0.3, 0.7, 0.9] {
            let cfg = ProbeConfig {
                seed,
                train_fraction: frac,
                ..ProbeConfig::default()
            };
            for task in Task::ALL {
                let plan = FeaturePlan::build(task, &g.datasets[&task], &bundle, &texts);
                for s in row_splits(&plan, &cfg).unwrap() {
                    let side = |rows: &[usize]| -> BTreeSet<String> {
                        rows.iter()
                            .map(|&r| bundle.records()[plan.rows[r].record()].snippet_id.clone())
                            .collect()
                    };
                    assert!(
                        side(&s.train).is_disjoint(&side(&s.test)),
                        "{task} seed {seed}"
                    );
                }
            }
        }
    }
}

/// Shuffling labels over mock features never gets a classifier
/// significantly below the Simple Bound.
#[test]
fn permuted_labels_do_not_beat_the_bound() {
    let corpus = Corpus::from_sources(probe_forge::synth::java_methods(150, 12), None);
    let g = generate_all(&corpus, 3).unwrap();
    let bundle = make_mock_bundle(&g.variants, 8, 1, 4).unwrap();
    let texts = variant_texts(&g.variants);
    let layer = bundle.layer(1).unwrap();
    for task in [
        Task::BracketMisused,
        Task::IsVariableDeclared,
        Task::EdgePrediction,
    ] {
        let base = FeaturePlan::build(task, &g.datasets[&task], &bundle, &texts);
        for seed in 0..10u64 {
            let mut plan = base.clone();
            let mut labels: Vec<_> = plan.rows.iter().map(|r| r.label.clone()).collect();
            labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            for (r, l) in plan.rows.iter_mut().zip(labels) {
                r.label = l;
            }
            let cfg = ProbeConfig {
                seed,
                ..ProbeConfig::default()
            };
            let t = targets(&plan).unwrap();
            assert!(matches!(t, Targets::Classes { .. }));
            let splits = row_splits(&plan, &cfg).unwrap();
            let (global, _) = simple_bounds(&plan, &t, &splits);
            let run = run_probe(&plan, &t, &splits, &layer, &cfg).unwrap();
            for ((err, sb), s) in run.per_split.iter().zip(&global).zip(&splits) {
                let sd = (sb * (1.0 - sb) / s.test.len() as f64).sqrt();
                assert!(*err >= sb - 3.0 * sd, "{task} seed {seed}: {err} vs {sb}");
            }
        }
    }
}
