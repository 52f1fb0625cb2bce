//! Slot-preserving data augmentation for task-oriented dialogue corpora and
//! Success F1 evaluation of dialogue responses.
//!
//! User (or machine) utterances are rewritten by four methods: synonym
//! substitution and stop-word deletion at the word level, back-translation
//! and paraphrasing at the sentence level through a pluggable rewrite
//! backend. Slot values are never touched.

pub mod assemble;
pub mod corpus;
pub mod error;
pub mod evalf1;
pub mod lexres;
pub mod seed;
pub mod sentaug;
pub mod synthetic;
pub mod text;
pub mod wordaug;

pub use assemble::{augment_corpus, stats, AugmentPlan, Resources, StatsReport, Target};
pub use corpus::{emit, ingest, Corpus, Dialogue, Method, Ontology, SlotValue, SourceFormat, Turn};
pub use error::{Error, Result};
pub use evalf1::{score_corpus, EvalCounts, EvalResult};
pub use lexres::{PosLexicon, PosTag, StopList, SynonymLexicon};
pub use sentaug::{BackendConfig, MockBackend, MockMode, PivotSet, Rewriter};
