use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{per_snippet, Analysis, ProbingExample, Task, Variant};
use crate::corpus::{snippet_seed, Corpus};
use crate::syntax::{bracket_leaves, BRACKETS};

pub const BRACKET_RATE: f64 = 0.30;

pub const VARIANT: &str = "bracket";

/// Number of brackets to corrupt out of `total`: `rate * total` rounded half
/// up, at least one when any bracket exists.
pub fn corrupted_count(total: usize, rate: f64) -> usize {
    if total == 0 {
        return 0;
    }
    // The epsilon keeps exact halves such as 0.3 * 5 from rounding down.
    let k = (rate * total as f64 + 0.5 + 1e-9).floor() as usize;
    k.clamp(1, total)
}

/// One variant per snippet with brackets; one example per bracket, labeled 1
/// where the bracket was replaced.
pub fn gen_bracket_misused(
    corpus: &Corpus,
    analyses: &[Analysis],
    rate: f64,
    seed: u64,
) -> (Vec<Variant>, Vec<ProbingExample>) {
    let per: Vec<(Variant, Vec<ProbingExample>)> = per_snippet(corpus, analyses, |_, s, a| {
        let brackets = bracket_leaves(&a.tree);
        if brackets.is_empty() {
            return vec![];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(snippet_seed(seed, &s.id, "bracket"));
        let k = corrupted_count(brackets.len(), rate);
        let mut chosen = index::sample(&mut rng, brackets.len(), k).into_vec();
        chosen.sort_unstable();

        let mut bytes = s.text.clone().into_bytes();
        let mut misused = vec![false; brackets.len()];
        for i in chosen {
            let pos = a.tree.node(brackets[i]).span.start;
            let others: Vec<u8> = BRACKETS
                .iter()
                .copied()
                .filter(|&b| b != bytes[pos])
                .collect();
            bytes[pos] = others[rng.random_range(0..others.len())];
            misused[i] = true;
        }
        let text = String::from_utf8(bytes).expect("ASCII replaced by ASCII");
        let examples = brackets
            .iter()
            .zip(misused)
            .map(|(&b, m)| {
                ProbingExample::new(
                    Task::BracketMisused,
                    &s.id,
                    VARIANT,
                    [a.tree.node(b).span.clone()],
                    m.into(),
                )
            })
            .collect();
        vec![(
            Variant {
                snippet_id: s.id.clone(),
                variant_id: VARIANT.into(),
                text,
            },
            examples,
        )]
    });
    let mut variants = Vec::new();
    let mut examples = Vec::new();
    for (v, e) in per {
        variants.push(v);
        examples.extend(e);
    }
    (variants, examples)
}
