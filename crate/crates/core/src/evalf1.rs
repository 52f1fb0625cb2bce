//! Success F1 over requested slots.
//!
//! A requested slot counts as a true positive when both the generated and
//! the reference response answer it, a false positive when only the
//! generated response does, and a false negative when only the reference
//! does. Counts are summed over all turns before precision, recall and F1
//! are derived.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Ontology};
use crate::error::{Error, Result};
use crate::text;

/// Slot -> known surface values (from a knowledge base).
pub type KbValues = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl EvalCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        EvalCounts { tp, fp, fn_ }
    }

    pub fn result(self) -> EvalResult {
        EvalResult::from(self)
    }
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: EvalCounts) {
        *self = *self + o;
    }
}

impl Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(flatten)]
    pub counts: EvalCounts,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl From<EvalCounts> for EvalResult {
    /// Empty denominators give 0 rather than an error.
    fn from(c: EvalCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalResult {
            precision,
            recall,
            f1,
            counts: c,
        }
    }
}

impl EvalResult {
    /// Table with the columns Success F1, Precision, Recall, TP, FP, FN.
    pub fn table(&self, label: &str) -> String {
        let width = label.len().max(8);
        format!(
            "{:<width$}  {:>10}  {:>9}  {:>6}  {:>6}  {:>6}  {:>6}\n\
             {:<width$}  {:>10.3}  {:>9.3}  {:>6.3}  {:>6}  {:>6}  {:>6}\n",
            "",
            "Success F1",
            "Precision",
            "Recall",
            "TP",
            "FP",
            "FN",
            label,
            self.f1,
            self.precision,
            self.recall,
            self.counts.tp,
            self.counts.fp,
            self.counts.fn_,
        )
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table("result"))
    }
}

/// Finds which requestable slots a response answers, either with a
/// delexicalized `<slot>` token or with a known value of the slot.
#[derive(Debug, Clone)]
pub struct SlotDetector {
    patterns: Vec<Vec<String>>,
    owners: Vec<String>,
}

impl SlotDetector {
    pub fn new(ontology: &Ontology, kb_values: &KbValues) -> Self {
        let mut pairs: BTreeSet<(Vec<String>, String)> = BTreeSet::new();
        for slot in &ontology.requestable {
            pairs.insert((text::tokenize(&format!("<{slot}>")), slot.clone()));
            for v in kb_values.get(slot).into_iter().flatten() {
                let toks = text::tokenize(&v.to_lowercase());
                if !toks.is_empty() {
                    pairs.insert((toks, slot.clone()));
                }
            }
        }
        let (patterns, owners) = pairs.into_iter().unzip();
        SlotDetector { patterns, owners }
    }

    pub fn detect(&self, response: &str) -> BTreeSet<String> {
        let tokens = text::tokenize(&response.to_lowercase());
        text::match_spans(&tokens, &self.patterns)
            .into_iter()
            .map(|(_, _, i)| self.owners[i].clone())
            .collect()
    }
}

pub fn detect_answered(response: &str, ontology: &Ontology, kb_values: &KbValues) -> BTreeSet<String> {
    SlotDetector::new(ontology, kb_values).detect(response)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnJudgement {
    pub dialogue_id: String,
    pub turn: usize,
    pub requested: Vec<String>,
    pub answered_in_hyp: BTreeSet<String>,
    pub answered_in_ref: BTreeSet<String>,
}

impl TurnJudgement {
    pub fn counts(&self) -> EvalCounts {
        let mut c = EvalCounts::default();
        for s in &self.requested {
            match (self.answered_in_hyp.contains(s), self.answered_in_ref.contains(s)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
        c
    }
}

fn check_requested(requested: &[String], ontology: &Ontology) -> Result<()> {
    let unknown: Vec<String> = requested
        .iter()
        .filter(|s| !ontology.is_requestable(s))
        .cloned()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::UnknownSlots { slots: unknown })
    }
}

pub fn score_turn(
    hyp: &str,
    reference: &str,
    requested: &[String],
    ontology: &Ontology,
    kb_values: &KbValues,
) -> Result<EvalCounts> {
    check_requested(requested, ontology)?;
    let detector = SlotDetector::new(ontology, kb_values);
    let judgement = TurnJudgement {
        dialogue_id: String::new(),
        turn: 0,
        requested: requested.to_vec(),
        answered_in_hyp: detector.detect(hyp),
        answered_in_ref: detector.detect(reference),
    };
    Ok(judgement.counts())
}

/// Micro-averaged result over judgements.
pub fn score_judgements(judgements: &[TurnJudgement]) -> EvalResult {
    judgements.iter().map(TurnJudgement::counts).sum::<EvalCounts>().result()
}

/// One line of a hypothesis file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub dialogue_id: String,
    pub turn: usize,
    pub response: String,
}

/// Reads JSON lines `{"dialogue_id", "turn", "response"}`; blank lines are
/// skipped.
pub fn read_hypotheses(path: &Path) -> Result<Vec<Hypothesis>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, format!("line {}", n + 1), e)))
        .collect()
}

pub fn read_kb(path: &Path) -> Result<KbValues> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::parse(path, "kb", e))
}

/// Judges every turn of `reference` against the matching hypothesis.
pub fn judge_corpus(
    hyps: &[Hypothesis],
    reference: &Corpus,
    ontology: &Ontology,
    kb_values: &KbValues,
) -> Result<Vec<TurnJudgement>> {
    let mut by_turn: HashMap<(&str, usize), &str> = HashMap::with_capacity(hyps.len());
    let mut duplicates = Vec::new();
    for h in hyps {
        if by_turn.insert((h.dialogue_id.as_str(), h.turn), &h.response).is_some() {
            duplicates.push(format!("duplicate hypothesis for ({}, {})", h.dialogue_id, h.turn));
        }
    }
    if !duplicates.is_empty() {
        return Err(Error::Invalid { problems: duplicates });
    }

    let mut missing = Vec::new();
    let mut unknown = BTreeSet::new();
    for d in &reference.dialogues {
        for t in &d.turns {
            if !by_turn.contains_key(&(d.id.as_str(), t.index)) {
                missing.push((d.id.clone(), t.index));
            }
            unknown.extend(t.requested.iter().filter(|s| !ontology.is_requestable(s)).cloned());
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingTurns { missing });
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownSlots { slots: unknown.into_iter().collect() });
    }

    let detector = SlotDetector::new(ontology, kb_values);
    let mut out = Vec::new();
    for d in &reference.dialogues {
        for t in &d.turns {
            let hyp = by_turn[&(d.id.as_str(), t.index)];
            out.push(TurnJudgement {
                dialogue_id: d.id.clone(),
                turn: t.index,
                requested: t.requested.clone(),
                answered_in_hyp: detector.detect(hyp),
                answered_in_ref: detector.detect(&t.machine),
            });
        }
    }
    Ok(out)
}

pub fn score_corpus(
    hyps: &[Hypothesis],
    reference: &Corpus,
    ontology: &Ontology,
    kb_values: &KbValues,
) -> Result<EvalResult> {
    Ok(score_judgements(&judge_corpus(hyps, reference, ontology, kb_values)?))
}
