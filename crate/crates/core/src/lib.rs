//! Few-shot constituency parsing.
//!
//! A span-based parser scores every span of a sentence, and label-aware CKY
//! recovers the best unlabeled tree. Training is max-margin against a Hamming
//! loss on spans. Two ways of stretching a handful of labeled trees are
//! included: subtree substitution ([`augment`]) and iterative self-training
//! ([`selftrain`]). [`eval`] scores output the way `evalb` does for
//! unlabeled brackets.
//!
//! The runnable programs under `examples/` walk through each piece; the
//! `spanparse` binary wires them into a command-line pipeline.

pub mod augment;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod scorer;
pub mod selftrain;
pub mod synthetic;
pub mod trainer;
pub mod treebank;

pub use error::{Error, Result};
pub use scorer::{ScorerConfig, ScorerModel, SpanScores};
pub use treebank::{Bracketing, Corpus, Sentence, Span, Tree, Vocabulary};

/// SplitMix64 step, used to derive independent seeds from one base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
