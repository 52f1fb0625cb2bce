//! Shared inputs for the criterion benchmarks.

use std::time::Duration;

use dialogaug_core::assemble::Resources;
use dialogaug_core::sentaug::{MockBackend, Rewriter};
use dialogaug_core::synthetic;
use dialogaug_core::Corpus;

pub fn corpus(dialogues: usize) -> Corpus {
    synthetic::camrest_like(dialogues, 7)
}

pub fn resources(corpus: &Corpus) -> Resources {
    Resources::bundled(&corpus.ontology).expect("bundled resources load")
}

pub fn identity_rewriter() -> Rewriter {
    Rewriter::new(MockBackend::identity(), 0, Duration::ZERO)
}
