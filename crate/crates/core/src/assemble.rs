//! Corpus-level orchestration: every method makes whole-dialogue copies,
//! which are appended to the original corpus with provenance attached.
//!
//! Default multiplicities: 4 synonym copies, 1 stop-word copy, one
//! back-translation copy per pivot language (4 by default) and 4
//! paraphrase copies, so the full assembly is 14 times the input.
//! Fallbacks keep every copy in place, so the count is unconditional.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{Corpus, Derivation, Dialogue, Method, Ontology, Provenance, SourceFormat, Speaker};
use crate::error::{Error, Result};
use crate::lexres::{PosLexicon, StopList, SynonymLexicon};
use crate::seed::sub_seed;
use crate::sentaug::{PivotSet, Rewriter, Sampling};
use crate::text;
use crate::wordaug::{self, TokenizedUtterance};

/// Which side of the conversation gets rewritten. Rewriting machine
/// utterances is supported for ablations; it is known to hurt downstream
/// models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    UserOnly,
    MachineOnly,
    UserAndMachine,
}

impl Target {
    pub fn speakers(self) -> &'static [Speaker] {
        match self {
            Target::UserOnly => &[Speaker::User],
            Target::MachineOnly => &[Speaker::Machine],
            Target::UserAndMachine => &[Speaker::User, Speaker::Machine],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Target::UserOnly => "user_only",
            Target::MachineOnly => "machine_only",
            Target::UserAndMachine => "user_and_machine",
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "user_only" | "user" => Ok(Target::UserOnly),
            "machine_only" | "machine" => Ok(Target::MachineOnly),
            "user_and_machine" | "both" => Ok(Target::UserAndMachine),
            other => Err(Error::Argument(format!("unknown target {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentPlan {
    /// Applied in canonical order regardless of how they are listed.
    pub methods: Vec<Method>,
    pub target: Target,
    pub seed: u64,
    pub pivots: PivotSet,
    pub k_synonym: u32,
    pub k_paraphrase: u32,
    /// Greedy paraphrase decoding repeats one request; otherwise each copy
    /// samples with its own seed.
    pub paraphrase_greedy: bool,
    pub temperature: f64,
}

impl Default for AugmentPlan {
    fn default() -> Self {
        AugmentPlan {
            methods: Method::ALL.to_vec(),
            target: Target::UserOnly,
            seed: 0,
            pivots: PivotSet::default(),
            k_synonym: 4,
            k_paraphrase: 4,
            paraphrase_greedy: false,
            temperature: 1.0,
        }
    }
}

impl AugmentPlan {
    pub fn with_methods(methods: &[Method]) -> Self {
        AugmentPlan {
            methods: methods.to_vec(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Argument("no augmentation method selected".into()));
        }
        if self.k_synonym == 0 || self.k_paraphrase == 0 {
            return Err(Error::Argument("copy counts must be at least 1".into()));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return Err(Error::Argument("temperature must be positive".into()));
        }
        Ok(())
    }

    /// Selected methods, deduplicated, in canonical order.
    pub fn ordered_methods(&self) -> Vec<Method> {
        let chosen: BTreeSet<Method> = self.methods.iter().copied().collect();
        Method::ALL.into_iter().filter(|m| chosen.contains(m)).collect()
    }

    /// Copies made of each dialogue by `method`.
    pub fn copies(&self, method: Method) -> u32 {
        match method {
            Method::Synonym => self.k_synonym,
            Method::Stopword => 1,
            Method::Backtranslate => self.pivots.len() as u32,
            Method::Paraphrase => self.k_paraphrase,
        }
    }

    /// Output size for an input of `dialogues` dialogues.
    pub fn expected_size(&self, dialogues: usize) -> usize {
        let extra: u32 = self.ordered_methods().into_iter().map(|m| self.copies(m)).sum();
        dialogues * (1 + extra as usize)
    }

    /// True when a selected method calls the rewrite backend.
    pub fn needs_backend(&self) -> bool {
        self.methods
            .iter()
            .any(|m| matches!(m, Method::Backtranslate | Method::Paraphrase))
    }
}

pub struct Resources {
    pub poslex: PosLexicon,
    pub synonyms: SynonymLexicon,
    pub stoplist: StopList,
}

impl Resources {
    /// The lexicons shipped with the crate; the stop list is filtered
    /// against `ontology`.
    pub fn bundled(ontology: &Ontology) -> Result<Self> {
        Ok(Resources {
            poslex: PosLexicon::bundled(),
            synonyms: SynonymLexicon::bundled(),
            stoplist: StopList::bundled(ontology)?,
        })
    }
}

/// Appends the plan's copies of every dialogue to the corpus. Dialogues
/// come out grouped by base dialogue: the original first, then its copies
/// by method and variant. Copy ids are `{base_id}#{method}{variant}`.
pub fn augment_corpus(
    corpus: &Corpus,
    plan: &AugmentPlan,
    resources: &Resources,
    rewriter: Option<&Rewriter>,
) -> Result<Corpus> {
    plan.validate()?;
    if plan.needs_backend() && rewriter.is_none() {
        return Err(Error::Argument(
            "back-translation and paraphrasing need a rewrite backend".into(),
        ));
    }
    let methods = plan.ordered_methods();
    let groups: Vec<Vec<Dialogue>> = corpus
        .dialogues
        .par_iter()
        .map(|d| augment_dialogue(d, &corpus.ontology, plan, &methods, resources, rewriter))
        .collect();

    Ok(Corpus {
        ontology: corpus.ontology.clone(),
        dialogues: groups.into_iter().flatten().collect(),
        source: SourceFormat::Normalized,
    })
}

fn augment_dialogue(
    d: &Dialogue,
    ontology: &Ontology,
    plan: &AugmentPlan,
    methods: &[Method],
    res: &Resources,
    rewriter: Option<&Rewriter>,
) -> Vec<Dialogue> {
    let speakers = plan.target.speakers();
    let tokenized: Vec<Vec<(Speaker, TokenizedUtterance)>> = d
        .turns
        .iter()
        .map(|t| {
            speakers
                .iter()
                .map(|&s| (s, wordaug::tokenize_and_protect(t.text(s), t, ontology, &res.poslex)))
                .collect()
        })
        .collect();

    let mut out = Vec::with_capacity(plan.expected_size(1));
    let mut original = d.clone();
    original.provenance = Some(Provenance::original());
    out.push(original);

    for &method in methods {
        for variant in 1..=plan.copies(method) {
            let mut copy = d.clone();
            copy.id = format!("{}#{}{}", d.id, method, variant);
            let mut fallbacks = 0u64;
            let mut unchanged = 0u64;

            for (ti, utterances) in tokenized.iter().enumerate() {
                let seed = sub_seed(plan.seed, &d.id, ti, method, variant);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for (speaker, tu) in utterances {
                    let rewritten = match method {
                        Method::Synonym => {
                            wordaug::synonym_substitute(tu, &res.synonyms, &mut rng, variant)
                                .map(|v| v.text)
                        }
                        Method::Stopword => wordaug::stopword_variant(tu, &res.stoplist).map(|v| v.text),
                        Method::Backtranslate => {
                            let rw = rewriter.expect("checked before dispatch");
                            let pivot = &plan.pivots.langs()[variant as usize - 1];
                            let v = rw.backtranslate(tu, pivot, seed, variant);
                            if v.meta.contains_key("fallback") {
                                fallbacks += 1;
                            }
                            Some(v.text)
                        }
                        Method::Paraphrase => {
                            let rw = rewriter.expect("checked before dispatch");
                            let base = sub_seed(plan.seed, &d.id, ti, method, 0);
                            let sampling = Sampling {
                                greedy: plan.paraphrase_greedy,
                                temperature: plan.temperature,
                                seed: if plan.paraphrase_greedy {
                                    base
                                } else {
                                    base + u64::from(variant - 1)
                                },
                            };
                            let v = rw.paraphrase_one(tu, sampling, variant);
                            if v.meta.contains_key("fallback") {
                                fallbacks += 1;
                            }
                            Some(v.text)
                        }
                    };
                    match rewritten {
                        Some(text) => *copy.turns[ti].text_mut(*speaker) = text,
                        None => unchanged += 1,
                    }
                }
            }

            let mut meta = BTreeMap::new();
            meta.insert("target".to_string(), Value::from(plan.target.as_str()));
            meta.insert("fallbacks".to_string(), Value::from(fallbacks));
            meta.insert("unchanged".to_string(), Value::from(unchanged));
            if method == Method::Backtranslate {
                let pivot = &plan.pivots.langs()[variant as usize - 1];
                meta.insert("pivot".to_string(), Value::from(pivot.as_str()));
            }
            copy.provenance = Some(Provenance {
                method: Derivation::Augmented(method),
                variant,
                meta,
            });
            out.push(copy);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub dialogues: usize,
    /// Rewritten utterances (turns times targeted speakers).
    pub utterances: usize,
    /// Sentence-level rewrites that fell back to the original.
    pub fallbacks: u64,
    /// Utterances a word-level method could not change.
    pub unchanged: u64,
    /// Utterances identical (in tokenized form) to their source.
    pub duplicates: usize,
    pub duplicate_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub dialogues: usize,
    /// Dialogue count per origin: `original` and each method.
    pub counts: BTreeMap<String, usize>,
    pub methods: BTreeMap<String, MethodStats>,
    pub vocab_before: usize,
    pub vocab_after: usize,
    pub mean_utterance_len_before: f64,
    pub mean_utterance_len_after: f64,
}

fn meta_u64(p: &Provenance, key: &str) -> u64 {
    p.meta.get(key).and_then(Value::as_u64).unwrap_or(0)
}

/// Summarizes an (augmented) corpus. "Before" figures cover the original
/// dialogues only, "after" figures the whole corpus.
pub fn stats(corpus: &Corpus) -> StatsReport {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    counts.insert("original".into(), 0);
    let mut methods: BTreeMap<String, MethodStats> = Method::ALL
        .iter()
        .map(|m| (m.as_str().to_string(), MethodStats::default()))
        .collect();
    for m in Method::ALL {
        counts.insert(m.as_str().into(), 0);
    }

    let originals: HashMap<&str, &Dialogue> = corpus
        .dialogues
        .iter()
        .filter(|d| d.derivation() == Derivation::Original)
        .map(|d| (d.id.as_str(), d))
        .collect();

    let mut vocab_before = BTreeSet::new();
    let mut vocab_after = BTreeSet::new();
    let (mut len_before, mut n_before, mut len_after, mut n_after) = (0usize, 0usize, 0usize, 0usize);

    for d in &corpus.dialogues {
        let derivation = d.derivation();
        let is_original = derivation == Derivation::Original;
        for t in &d.turns {
            for s in [Speaker::User, Speaker::Machine] {
                let toks = text::tokenize(t.text(s));
                len_after += toks.len();
                n_after += 1;
                if is_original {
                    len_before += toks.len();
                    n_before += 1;
                    vocab_before.extend(toks.iter().cloned());
                }
                vocab_after.extend(toks);
            }
        }

        let Derivation::Augmented(method) = derivation else {
            *counts.get_mut("original").expect("seeded") += 1;
            continue;
        };
        *counts.get_mut(method.as_str()).expect("seeded") += 1;
        let entry = methods.get_mut(method.as_str()).expect("seeded");
        entry.dialogues += 1;
        let prov = d.provenance.as_ref().expect("augmented dialogues carry provenance");
        entry.fallbacks += meta_u64(prov, "fallbacks");
        entry.unchanged += meta_u64(prov, "unchanged");

        let target = prov
            .meta
            .get("target")
            .and_then(Value::as_str)
            .and_then(|s| s.parse::<Target>().ok())
            .unwrap_or_default();
        let base = originals.get(d.base_id());
        for (ti, t) in d.turns.iter().enumerate() {
            for &s in target.speakers() {
                entry.utterances += 1;
                let same = base
                    .and_then(|b| b.turns.get(ti))
                    .is_some_and(|bt| text::normalize(bt.text(s)) == text::normalize(t.text(s)));
                if same {
                    entry.duplicates += 1;
                }
            }
        }
    }
    for m in methods.values_mut() {
        m.duplicate_rate = if m.utterances == 0 {
            0.0
        } else {
            m.duplicates as f64 / m.utterances as f64
        };
    }

    let mean = |total: usize, n: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    StatsReport {
        dialogues: corpus.dialogues.len(),
        counts,
        methods,
        vocab_before: vocab_before.len(),
        vocab_after: vocab_after.len(),
        mean_utterance_len_before: mean(len_before, n_before),
        mean_utterance_len_after: mean(len_after, n_after),
    }
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dialogues: {}", self.dialogues);
        let _ = writeln!(out, "original: {}", self.counts.get("original").copied().unwrap_or(0));
        let _ = writeln!(
            out,
            "{:<14} {:>9} {:>10} {:>9} {:>9} {:>10}",
            "method", "dialogues", "utterances", "fallbacks", "unchanged", "duplicate%"
        );
        for m in Method::ALL {
            let s = &self.methods[m.as_str()];
            let _ = writeln!(
                out,
                "{:<14} {:>9} {:>10} {:>9} {:>9} {:>9.1}%",
                m.as_str(),
                s.dialogues,
                s.utterances,
                s.fallbacks,
                s.unchanged,
                100.0 * s.duplicate_rate
            );
        }
        let _ = writeln!(out, "vocabulary: {} -> {}", self.vocab_before, self.vocab_after);
        let _ = writeln!(
            out,
            "mean utterance length: {:.2} -> {:.2}",
            self.mean_utterance_len_before, self.mean_utterance_len_after
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::fixture;
    use crate::sentaug::MockBackend;
    use std::time::Duration;

    fn resources(c: &Corpus) -> Resources {
        Resources::bundled(&c.ontology).unwrap()
    }

    fn identity() -> Rewriter {
        Rewriter::new(MockBackend::identity(), 0, Duration::ZERO)
    }

    #[test]
    fn default_plan_is_fourteen_fold() {
        let plan = AugmentPlan::default();
        assert_eq!(plan.expected_size(676), 9464);
        assert_eq!(AugmentPlan::with_methods(&[Method::Synonym]).expected_size(676), 3380);
        assert_eq!(AugmentPlan::with_methods(&[Method::Stopword]).expected_size(676), 1352);
        assert_eq!(AugmentPlan::with_methods(&[Method::Backtranslate]).expected_size(676), 3380);
        assert_eq!(AugmentPlan::with_methods(&[Method::Paraphrase]).expected_size(676), 3380);
    }

    #[test]
    fn original_only_stats() {
        let mut c = fixture();
        for d in &mut c.dialogues {
            d.provenance = Some(Provenance::original());
        }
        let s = stats(&c);
        assert_eq!(s.counts["original"], 2);
        for m in Method::ALL {
            assert_eq!(s.counts[m.as_str()], 0);
            assert_eq!(s.methods[m.as_str()], MethodStats::default());
        }
        assert_eq!(s.vocab_before, s.vocab_after);
    }

    #[test]
    fn two_dialogue_assembly_counts() {
        let c = fixture();
        let rw = identity();
        let out = augment_corpus(&c, &AugmentPlan::default(), &resources(&c), Some(&rw)).unwrap();
        assert_eq!(out.dialogues.len(), 28);
        let s = stats(&out);
        let expected = [("original", 2), ("synonym", 8), ("stopword", 2), ("backtranslate", 8), ("paraphrase", 8)];
        for (k, n) in expected {
            assert_eq!(s.counts[k], n, "{k}");
        }
        // identity backend reproduces every utterance
        assert_eq!(s.methods["backtranslate"].duplicate_rate, 1.0);
        assert_eq!(s.methods["paraphrase"].duplicate_rate, 1.0);
        assert!(s.methods["stopword"].duplicate_rate < 1.0);
        assert!(s.to_text().contains("backtranslate"));
    }

    #[test]
    fn ids_and_order() {
        let c = fixture();
        let plan = AugmentPlan {
            methods: vec![Method::Stopword, Method::Synonym],
            k_synonym: 2,
            ..Default::default()
        };
        let out = augment_corpus(&c, &plan, &resources(&c), None).unwrap();
        let ids: Vec<&str> = out.dialogues.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(
            ids,
            ["d0", "d0#synonym1", "d0#synonym2", "d0#stopword1", "d1", "d1#synonym1", "d1#synonym2", "d1#stopword1"]
        );
        out.validate().unwrap();
    }

    #[test]
    fn annotations_and_machine_side_untouched() {
        let c = fixture();
        let out = augment_corpus(&c, &AugmentPlan::with_methods(&[Method::Synonym, Method::Stopword]), &resources(&c), None)
            .unwrap();
        for d in &out.dialogues {
            let base = c.dialogues.iter().find(|b| b.id == d.base_id()).unwrap();
            for (t, bt) in d.turns.iter().zip(&base.turns) {
                assert_eq!(t.machine, bt.machine);
                assert_eq!(t.constraints, bt.constraints);
                assert_eq!(t.requested, bt.requested);
            }
        }
    }

    #[test]
    fn machine_only_leaves_users_alone() {
        let c = fixture();
        let plan = AugmentPlan {
            methods: vec![Method::Stopword],
            target: Target::MachineOnly,
            ..Default::default()
        };
        let out = augment_corpus(&c, &plan, &resources(&c), None).unwrap();
        let changed = out.dialogues.iter().filter(|d| d.id.contains('#')).any(|d| {
            let base = c.dialogues.iter().find(|b| b.id == d.base_id()).unwrap();
            d.turns.iter().zip(&base.turns).any(|(t, b)| t.machine != b.machine)
        });
        assert!(changed);
        for d in &out.dialogues {
            let base = c.dialogues.iter().find(|b| b.id == d.base_id()).unwrap();
            assert!(d.turns.iter().zip(&base.turns).all(|(t, b)| t.user == b.user));
        }
    }

    #[test]
    fn sentence_methods_need_backend() {
        let c = fixture();
        let err = augment_corpus(&c, &AugmentPlan::default(), &resources(&c), None).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
        let bad = AugmentPlan { methods: vec![], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = crate::synthetic::camrest_like(40, 3);
        let res = resources(&c);
        let plan = AugmentPlan { seed: 11, ..Default::default() };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let rw = identity();
            pool.install(|| augment_corpus(&c, &plan, &res, Some(&rw)).unwrap()).to_json().unwrap()
        };
        assert_eq!(run(1), run(4));
    }
}
