//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use spanparse::scorer::SpanScores;
use spanparse::treebank::{Bracketing, Span, Tree};

/// Every span set over `len` tokens: the root plus any pairwise non-crossing
/// family of spans with length in `2..len`.
pub fn all_span_sets(len: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let mut candidates = Vec::new();
    for b in 0..len {
        for e in b + 2..=len {
            if (b, e) != (0, len) {
                candidates.push((b, e));
            }
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    extend(&candidates, 0, &mut chosen, &mut out);
    for set in &mut out {
        set.insert((0, len));
    }
    out
}

fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 < b.0 && b.0 < a.1 && a.1 < b.1) || (b.0 < a.0 && a.0 < b.1 && b.1 < a.1)
}

fn extend(
    candidates: &[(usize, usize)],
    next: usize,
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<BTreeSet<(usize, usize)>>,
) {
    if next == candidates.len() {
        out.push(chosen.iter().copied().collect());
        return;
    }
    extend(candidates, next + 1, chosen, out);
    let c = candidates[next];
    if chosen.iter().all(|&s| !crosses(s, c)) {
        chosen.push(c);
        extend(candidates, next + 1, chosen, out);
        chosen.pop();
    }
}

pub fn to_bracketing(len: usize, set: &BTreeSet<(usize, usize)>) -> Bracketing {
    Bracketing::new(len, set.iter().map(|&(b, e)| Span::new(b, e))).unwrap()
}

pub fn spans_of(b: &Bracketing) -> BTreeSet<(usize, usize)> {
    b.spans().map(|s| (s.begin, s.end)).collect()
}

/// Sum of cell scores over the set; single-token roots included.
pub fn set_score(scores: &SpanScores, set: &BTreeSet<(usize, usize)>) -> f64 {
    set.iter().map(|&(b, e)| scores.get(Span::new(b, e))).sum()
}

/// Non-root spans of length ≥ 2 in exactly one of the two sets.
pub fn set_hamming(len: usize, a: &BTreeSet<(usize, usize)>, b: &BTreeSet<(usize, usize)>) -> usize {
    a.symmetric_difference(b)
        .filter(|&&(x, y)| (x, y) != (0, len) && y - x >= 2)
        .count()
}

pub fn random_scores<R: Rng>(len: usize, rng: &mut R) -> SpanScores {
    SpanScores::from_fn(len, |_| rng.gen_range(-3.0..3.0))
}

/// A random valid bracketing, built by random binary splits with random
/// node collapses.
pub fn random_bracketing<R: Rng>(len: usize, rng: &mut R) -> Bracketing {
    let mut spans = Vec::new();
    let mut stack = vec![(0, len)];
    while let Some((b, e)) = stack.pop() {
        if e - b < 2 {
            continue;
        }
        if rng.gen_bool(0.6) {
            spans.push(Span::new(b, e));
        }
        let k = rng.gen_range(b + 1..e);
        stack.push((b, k));
        stack.push((k, e));
    }
    Bracketing::new(len, spans).unwrap()
}

/// Plain P/R/F1 over two span sets.
pub fn prf(g: &BTreeSet<(usize, usize)>, p: &BTreeSet<(usize, usize)>) -> (f64, f64, f64) {
    let m = g.intersection(p).count() as f64;
    let precision = if p.is_empty() { 0.0 } else { 100.0 * m / p.len() as f64 };
    let recall = if g.is_empty() { 0.0 } else { 100.0 * m / g.len() as f64 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

pub fn tree(s: &str) -> Tree {
    Tree::from_bracketed(s).unwrap()
}

pub mod grad {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use spanparse::scorer::{EncoderKind, ScorerConfig, ScorerModel, SpanScores};
    use spanparse::treebank::{build_vocabulary_from_sentences, Sentence, Span};

    pub const STEP: f64 = 1e-5;
    pub const TOLERANCE: f64 = 1e-4;
    const FLOOR: f64 = 1e-6;

    #[derive(Debug, Default)]
    pub struct ProbeStats {
        pub checked: usize,
        /// Probes dropped because a ReLU kink lies within the step.
        pub kinks: usize,
        pub max_relative_error: f64,
        /// Probes whose analytic gradient is non-zero.
        pub nonzero: usize,
    }

    pub fn sentences() -> Vec<Sentence> {
        [
            "the old dog saw a cat",
            "it rained",
            "several kittens were born in the shelter",
            "a cat is drinking milk",
        ]
        .iter()
        .map(|s| Sentence::from_raw_line(s).unwrap())
        .collect()
    }

    pub fn model(encoder: EncoderKind, seed: u64) -> ScorerModel {
        let s = sentences();
        let vocab = build_vocabulary_from_sentences(s.iter(), 100).unwrap();
        let config = ScorerConfig {
            encoder,
            embedding_dim: 6,
            hidden_dim: 6,
            ff_dim: 5,
            dropout: 0.0,
            max_positions: 16,
            seed,
        };
        let mut m = ScorerModel::init(config, vocab, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m.params().len();
        for i in 0..n {
            m.params_mut().set(i, rng.gen_range(-0.6..0.6));
        }
        m
    }

    fn span_score(m: &ScorerModel, ids: &[u32], span: Span) -> f64 {
        m.score_spans(ids).unwrap().get(span)
    }

    /// Compares backprop against central differences on random
    /// (parameter, span) pairs until `probes` pairs with a non-zero analytic
    /// gradient have been checked. Zero-gradient pairs are checked as well.
    pub fn check(encoder: EncoderKind, probes: usize, seed: u64) -> ProbeStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
        let base = model(encoder, seed);
        let sents = sentences();
        let mut stats = ProbeStats::default();
        let emb_len = base.params().embeddings.len();
        let dim = base.config().embedding_dim;
        let total = base.params().len();
        while stats.nonzero < probes {
            assert!(stats.checked < 100 * probes, "too few parameters reach the span scores");
            let sentence = &sents[rng.gen_range(0..sents.len())];
            let ids = base.encode(sentence);
            let len = ids.len();
            let b = rng.gen_range(0..len);
            let e = rng.gen_range(b + 1..=len);
            let span = Span::new(b, e);
            // some probes hit embedding rows the sentence uses
            let index = if rng.gen_bool(0.3) {
                let row = ids[rng.gen_range(0..len)] as usize;
                row * dim + rng.gen_range(0..dim)
            } else {
                rng.gen_range(emb_len..total)
            };
            let (_, tape) = base
                .score_spans_train(&ids, &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap();
            let mut weights = SpanScores::zeros(len);
            weights.set(span, 1.0);
            let analytic = base.backprop(&tape, &weights).unwrap().get(base.params(), index);

            let original = base.params().get(index);
            let mut plus = base.clone();
            plus.params_mut().set(index, original + STEP);
            let mut minus = base.clone();
            minus.params_mut().set(index, original - STEP);
            let f0 = span_score(&base, &ids, span);
            let fp = span_score(&plus, &ids, span);
            let fm = span_score(&minus, &ids, span);
            let right = (fp - f0) / STEP;
            let left = (f0 - fm) / STEP;
            if (right - left).abs() > 1e-3 * (1.0 + right.abs().max(left.abs())) {
                stats.kinks += 1;
                continue;
            }
            let numeric = (fp - fm) / (2.0 * STEP);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
            stats.max_relative_error = stats.max_relative_error.max(rel);
            stats.checked += 1;
            if analytic != 0.0 {
                stats.nonzero += 1;
            }
        }
        stats
    }
}

pub mod golden {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use spanparse::eval::{score_pair, EvalConfig};
    use spanparse::treebank::{Bracketing, Sentence, Span, Tree};

    /// (gold, predicted, exclude trivial, P, R, F1), computed by hand.
    pub const CASES: &[(&str, &str, bool, f64, f64, f64)] = &[
        ("(NT (NT a cat) (NT is drinking milk))", "(NT a (NT cat (NT is (NT drinking milk))))", false, 50.0, 66.67, 57.14),
        ("(NT (NT a b) c)", "(NT (NT a b) c)", false, 100.0, 100.0, 100.0),
        ("(NT (NT a b) (NT c d))", "(NT a b c d)", false, 100.0, 33.33, 50.0),
        ("(NT a b c)", "(NT (NT a b) c)", false, 50.0, 100.0, 66.67),
        ("(NT a b)", "(NT a b)", false, 100.0, 100.0, 100.0),
        ("(NT a)", "(NT a)", false, 100.0, 100.0, 100.0),
        ("(NT (NT a cat) (NT sleeps .))", "(NT (NT a cat) sleeps .)", false, 100.0, 100.0, 100.0),
        ("(NT (NT the dog) (NT barks loudly) .)", "(NT the (NT dog barks) (NT loudly .))", false, 50.0, 33.33, 40.0),
        ("(NT (NT John , (NT my friend) ,) (NT left early))", "(NT John (NT , my) (NT friend , left) early)", false, 50.0, 25.0, 33.33),
        ("(NT (NT (NT a b) c) d)", "(NT a (NT b (NT c d)))", false, 33.33, 33.33, 33.33),
        ("(NT (NT a b) (NT c d) (NT e f))", "(NT (NT (NT a b) (NT c d)) (NT e f))", false, 80.0, 100.0, 88.89),
        ("(NT (NT a b c) (NT d e))", "(NT (NT a b) (NT c d e))", false, 33.33, 33.33, 33.33),
        ("(NT `` (NT hello there) '')", "(NT `` hello there '')", false, 100.0, 100.0, 100.0),
        ("(S (NP (DT the) (NN cat)) (VP (VBD sat)) (. .))", "(NT the (NT cat sat .))", false, 50.0, 50.0, 50.0),
        ("(S (NP (NNP Mr.) (NNP Smith)) (VP (VBD left) (NP (NN town))) (. .))", "(NT (NT Mr. Smith left) town .)", false, 50.0, 33.33, 40.0),
        ("(NT a (NT b (NT c d)))", "(NT a (NT b c d))", false, 100.0, 66.67, 80.0),
        ("(NT (NT a (NT b c)) (NT d (NT e f)))", "(NT (NT a b) (NT c d) (NT e f))", false, 50.0, 40.0, 44.44),
        ("(NT (NT we came) ; (NT we saw))", "(NT we (NT came ;) (NT we saw))", false, 100.0, 66.67, 80.0),
        ("(NT (NT the film) (NT -LRB- (NT 1999 version) -RRB-))", "(NT the (NT film -LRB- 1999) version -RRB-)", false, 50.0, 33.33, 40.0),
        ("(NT (NT a cat) (NT is drinking milk))", "(NT a (NT cat (NT is (NT drinking milk))))", true, 33.33, 50.0, 40.0),
        ("(NT (NT it works) -- (NT mostly fine))", "(NT (NT it works --) (NT mostly fine))", false, 100.0, 100.0, 100.0),
        ("(NT (NT a b) c)", "(NT a b c)", true, 0.0, 0.0, 0.0),
    ];

    /// Runs every case; returns the failures.
    pub fn failures() -> Vec<String> {
        let mut out = Vec::new();
        for (i, &(g, p, trivial, ep, er, ef)) in CASES.iter().enumerate() {
            let gold = Tree::from_bracketed(g).unwrap();
            let pred = Tree::from_bracketed(p).unwrap();
            let config = EvalConfig {
                exclude_trivial: trivial,
                ..Default::default()
            };
            let c = score_pair(&gold, &pred, &config).unwrap().unwrap();
            let got = (c.precision(), c.recall(), c.f1());
            if (got.0 - ep).abs() > 0.1 || (got.1 - er).abs() > 0.1 || (got.2 - ef).abs() > 0.1 {
                out.push(format!("case {i}: expected ({ep}, {er}, {ef}), got {got:?}"));
            }
        }
        out
    }

    fn random_tree<R: Rng>(rng: &mut R, len: usize) -> Bracketing {
        super::random_bracketing(len, rng)
    }

    /// Inserts punctuation tokens at random positions of both trees; a new
    /// token joins the smallest span that strictly contains its position.
    fn insert_punct<R: Rng>(
        rng: &mut R,
        tokens: &[String],
        trees: [&Bracketing; 2],
    ) -> (Vec<String>, [Bracketing; 2]) {
        let mut toks = tokens.to_vec();
        let mut spans: [Vec<Span>; 2] = [trees[0].spans().collect(), trees[1].spans().collect()];
        let marks = [".", ",", ":", "``", "''", "-LRB-", "-RRB-"];
        for _ in 0..rng.gen_range(1..4) {
            let p = rng.gen_range(0..=toks.len());
            toks.insert(p, marks[rng.gen_range(0..marks.len())].to_string());
            let root = (0, toks.len() - 1);
            for set in spans.iter_mut() {
                for s in set.iter_mut() {
                    if (s.begin, s.end) == root {
                        s.end += 1;
                    } else if p <= s.begin {
                        s.begin += 1;
                        s.end += 1;
                    } else if p < s.end {
                        s.end += 1;
                    }
                }
            }
        }
        let len = toks.len();
        let build = |v: &Vec<Span>| Bracketing::new(len, v.iter().copied()).unwrap();
        (toks, [build(&spans[0]), build(&spans[1])])
    }

    /// Symmetry, self-comparison and punctuation invariance on `n` random
    /// pairs; returns the first violation.
    pub fn properties(n: usize, seed: u64) -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = EvalConfig::default();
        for i in 0..n {
            let len = rng.gen_range(1..12);
            let tokens: Vec<String> = (0..len).map(|k| format!("w{k}")).collect();
            let sentence = Sentence::new(tokens.clone()).unwrap();
            let a = random_tree(&mut rng, len);
            let b = random_tree(&mut rng, len);
            let ta = Tree::new(sentence.clone(), a.clone()).unwrap();
            let tb = Tree::new(sentence, b.clone()).unwrap();
            let ab = score_pair(&ta, &tb, &config).unwrap().unwrap();
            let ba = score_pair(&tb, &ta, &config).unwrap().unwrap();
            if ab.precision() != ba.recall() || ab.recall() != ba.precision() || ab.f1() != ba.f1() {
                return Err(format!("pair {i}: symmetry violated"));
            }
            if score_pair(&ta, &ta, &config).unwrap().unwrap().f1() != 100.0 {
                return Err(format!("pair {i}: self-comparison below 100"));
            }
            let (toks, [pa, pb]) = insert_punct(&mut rng, &tokens, [&a, &b]);
            let s = Sentence::new(toks).unwrap();
            let qa = Tree::new(s.clone(), pa).unwrap();
            let qb = Tree::new(s, pb).unwrap();
            let with = score_pair(&qa, &qb, &config).unwrap().unwrap();
            if with != ab {
                return Err(format!("pair {i}: punctuation changed counts {ab:?} -> {with:?}"));
            }
        }
        Ok(())
    }
}
