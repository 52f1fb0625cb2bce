//! Normalized dialogue data model with readers and writers.

mod camrest;
mod kvret;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotValue {
    pub slot: String,
    pub value: String,
}

impl SlotValue {
    pub fn new(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Machine,
}

/// One exchange: a user utterance, the machine response, and the
/// annotations that hold at this point of the dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub user: String,
    pub machine: String,
    /// Belief state at this turn.
    #[serde(default)]
    pub constraints: Vec<SlotValue>,
    /// Requestable slots the user asks for in this turn.
    #[serde(default)]
    pub requested: Vec<String>,
}

impl Turn {
    pub fn text(&self, speaker: Speaker) -> &str {
        match speaker {
            Speaker::User => &self.user,
            Speaker::Machine => &self.machine,
        }
    }

    pub fn text_mut(&mut self, speaker: Speaker) -> &mut String {
        match speaker {
            Speaker::User => &mut self.user,
            Speaker::Machine => &mut self.machine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Synonym,
    Stopword,
    Backtranslate,
    Paraphrase,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Synonym,
        Method::Stopword,
        Method::Backtranslate,
        Method::Paraphrase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Synonym => "synonym",
            Method::Stopword => "stopword",
            Method::Backtranslate => "backtranslate",
            Method::Paraphrase => "paraphrase",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "synonym" => Ok(Method::Synonym),
            "stopword" => Ok(Method::Stopword),
            "backtranslate" | "translation" => Ok(Method::Backtranslate),
            "paraphrase" => Ok(Method::Paraphrase),
            other => Err(Error::Argument(format!("unknown method {other:?}"))),
        }
    }
}

/// Where a dialogue in an augmented corpus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Derivation {
    Original,
    Augmented(Method),
}

impl From<Derivation> for String {
    fn from(d: Derivation) -> String {
        match d {
            Derivation::Original => "original".to_string(),
            Derivation::Augmented(m) => m.as_str().to_string(),
        }
    }
}

impl TryFrom<String> for Derivation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        if s == "original" {
            Ok(Derivation::Original)
        } else {
            s.parse().map(Derivation::Augmented)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Derivation,
    pub variant: u32,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl Provenance {
    pub fn original() -> Self {
        Self {
            method: Derivation::Original,
            variant: 0,
            meta: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub domain: String,
    pub turns: Vec<Turn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Dialogue {
    /// Id of the dialogue this one was derived from.
    pub fn base_id(&self) -> &str {
        self.id.split('#').next().unwrap_or(&self.id)
    }

    pub fn derivation(&self) -> Derivation {
        self.provenance
            .as_ref()
            .map_or(Derivation::Original, |p| p.method)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ontology {
    #[serde(default)]
    pub informable: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub requestable: Vec<String>,
}

impl Ontology {
    pub fn is_requestable(&self, slot: &str) -> bool {
        self.requestable.iter().any(|s| s == slot)
    }

    pub fn is_informable(&self, slot: &str) -> bool {
        self.informable.contains_key(slot)
    }

    /// Every informable value, paired with its slot.
    pub fn informable_values(&self) -> impl Iterator<Item = (&str, &str)> {
        self.informable
            .iter()
            .flat_map(|(s, vs)| vs.iter().map(move |v| (s.as_str(), v.as_str())))
    }

    fn normalize(&mut self) {
        for values in self.informable.values_mut() {
            for v in values.iter_mut() {
                *v = clean(v);
            }
        }
        for s in self.requestable.iter_mut() {
            *s = s.trim().to_string();
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut ontology: Ontology =
            serde_json::from_str(&raw).map_err(|e| Error::parse(path, "ontology", e))?;
        ontology.normalize();
        Ok(ontology)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Camrest676,
    Kvret,
    #[default]
    Normalized,
}

impl FromStr for SourceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "camrest676" | "camrest" => Ok(SourceFormat::Camrest676),
            "kvret" => Ok(SourceFormat::Kvret),
            "normalized" => Ok(SourceFormat::Normalized),
            other => Err(Error::Argument(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// A normalized corpus. Equality ignores `source`, so a corpus read from a
/// dataset file compares equal to its re-ingested normalized form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub ontology: Ontology,
    pub dialogues: Vec<Dialogue>,
    #[serde(skip)]
    pub source: SourceFormat,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.ontology == other.ontology && self.dialogues == other.dialogues
    }
}

impl Corpus {
    /// Checks every type invariant. Structural problems are reported before
    /// unknown slots.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();

        let mut seen = BTreeSet::new();
        for slot in &self.ontology.requestable {
            if !seen.insert(slot.as_str()) {
                problems.push(format!("duplicate requestable slot {slot:?}"));
            }
        }
        for (slot, values) in &self.ontology.informable {
            if slot.trim().is_empty() {
                problems.push("empty informable slot name".to_string());
            }
            if let Some(v) = values.iter().find(|v| v.to_lowercase() != **v) {
                problems.push(format!("ontology value {v:?} of {slot} is not lowercase"));
            }
        }

        let mut ids = BTreeSet::new();
        let mut unknown = BTreeSet::new();
        for d in &self.dialogues {
            if !ids.insert(d.id.as_str()) {
                problems.push(format!("duplicate dialogue id {:?}", d.id));
            }
            if d.turns.is_empty() {
                problems.push(format!("dialogue {:?} has no turns", d.id));
            }
            for (i, t) in d.turns.iter().enumerate() {
                let at = format!("dialogue {:?} turn {i}", d.id);
                if t.index != i {
                    problems.push(format!("{at}: index {} out of sequence", t.index));
                }
                if t.user.trim().is_empty() {
                    problems.push(format!("{at}: empty user utterance"));
                }
                if t.machine.trim().is_empty() {
                    problems.push(format!("{at}: empty machine utterance"));
                }
                for c in &t.constraints {
                    if c.slot.is_empty() || c.value.is_empty() || c.value.trim() != c.value {
                        problems.push(format!("{at}: bad slot value {c:?}"));
                    }
                    if !self.ontology.is_informable(&c.slot) {
                        unknown.insert(c.slot.clone());
                    }
                }
                for r in &t.requested {
                    if !self.ontology.is_requestable(r) {
                        unknown.insert(r.clone());
                    }
                }
            }
        }

        if !problems.is_empty() {
            return Err(Error::Invalid { problems });
        }
        if !unknown.is_empty() {
            return Err(Error::UnknownSlots {
                slots: unknown.into_iter().collect(),
            });
        }
        Ok(())
    }

    /// Lowercases and trims all text, the normalization applied at ingestion.
    pub(crate) fn normalize_text(&mut self) {
        self.ontology.normalize();
        for d in &mut self.dialogues {
            d.domain = clean(&d.domain);
            for t in &mut d.turns {
                t.user = clean(&t.user);
                t.machine = clean(&t.machine);
                for c in &mut t.constraints {
                    c.slot = c.slot.trim().to_string();
                    c.value = clean(&c.value);
                }
                for r in &mut t.requested {
                    *r = r.trim().to_string();
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        // serde_json's default map is ordered, so converting through `Value`
        // sorts every object's keys.
        let value = serde_json::to_value(self).expect("corpus is always representable as JSON");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(raw: &str, path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Envelope {
            #[serde(default)]
            ontology: Option<Ontology>,
            #[serde(default)]
            dialogues: Option<Vec<Value>>,
        }

        let env: Envelope =
            serde_json::from_str(raw).map_err(|e| Error::parse(path, "document", e))?;
        let ontology = env
            .ontology
            .ok_or_else(|| Error::parse(path, "document", "missing \"ontology\""))?;
        let raw_dialogues = env
            .dialogues
            .ok_or_else(|| Error::parse(path, "document", "missing \"dialogues\""))?;

        let mut dialogues = Vec::with_capacity(raw_dialogues.len());
        for (i, v) in raw_dialogues.into_iter().enumerate() {
            let label = record_label(i, &v, "id");
            let d: Dialogue = serde_json::from_value(v).map_err(|e| Error::parse(path, label, e))?;
            dialogues.push(d);
        }
        Ok(Corpus {
            ontology,
            dialogues,
            source: SourceFormat::Normalized,
        })
    }
}

pub(crate) fn record_label(i: usize, v: &Value, id_key: &str) -> String {
    match v.get(id_key) {
        Some(Value::String(s)) => format!("#{i} (id {s:?})"),
        Some(Value::Number(n)) => format!("#{i} (id {n})"),
        _ => format!("#{i}"),
    }
}

pub(crate) fn clean(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Reads a dataset file into a validated normalized corpus.
///
/// CamRest676 files pick up a sibling `CamRestOTGY.json` when present;
/// otherwise (and for KVRET) the ontology is collected from the annotations.
pub fn ingest(path: &Path, format: SourceFormat) -> Result<Corpus> {
    ingest_with_ontology(path, format, None)
}

/// Like [`ingest`] with an explicit ontology file that overrides whatever the
/// dataset provides.
pub fn ingest_with_ontology(
    path: &Path,
    format: SourceFormat,
    ontology: Option<&Path>,
) -> Result<Corpus> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = match format {
        SourceFormat::Normalized => Corpus::from_json(&raw, path)?,
        SourceFormat::Camrest676 => camrest::parse(&raw, path)?,
        SourceFormat::Kvret => kvret::parse(&raw, path)?,
    };
    if let Some(p) = ontology {
        corpus.ontology = Ontology::read(p)?;
    }
    corpus.source = format;
    corpus.normalize_text();
    corpus.validate()?;
    Ok(corpus)
}

/// Writes the normalized JSON form of `corpus`.
pub fn emit(corpus: &Corpus, path: &Path) -> Result<()> {
    let json = corpus.to_json()?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn fixture() -> Corpus {
        let mut informable = BTreeMap::new();
        informable.insert("area".to_string(), vec!["north".into(), "centre".into()]);
        informable.insert("food".to_string(), vec!["asian oriental".into(), "thai".into()]);
        informable.insert("pricerange".to_string(), vec!["cheap".into()]);
        Corpus {
            ontology: Ontology {
                informable,
                requestable: vec!["address".into(), "phone".into()],
            },
            dialogues: vec![
                Dialogue {
                    id: "d0".into(),
                    domain: "restaurant".into(),
                    turns: vec![Turn {
                        index: 0,
                        user: "i want cheap food".into(),
                        machine: "what area?".into(),
                        constraints: vec![SlotValue::new("pricerange", "cheap")],
                        requested: vec![],
                    }],
                    provenance: None,
                },
                Dialogue {
                    id: "d1".into(),
                    domain: "restaurant".into(),
                    turns: vec![
                        Turn {
                            index: 0,
                            user: "how about asian oriental food?".into(),
                            machine: "dojo noodle bar serves asian oriental food.".into(),
                            constraints: vec![SlotValue::new("food", "asian oriental")],
                            requested: vec![],
                        },
                        Turn {
                            index: 1,
                            user: "what is the address and phone number?".into(),
                            machine: "it is at <address>, phone <phone>.".into(),
                            constraints: vec![SlotValue::new("food", "asian oriental")],
                            requested: vec!["address".into(), "phone".into()],
                        },
                    ],
                    provenance: None,
                },
            ],
            source: SourceFormat::Normalized,
        }
    }

    #[test]
    fn emitted_fixture_round_trips_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.json");
        let second = dir.path().join("b.json");
        let c = fixture();
        emit(&c, &first).unwrap();
        let back = ingest(&first, SourceFormat::Normalized).unwrap();
        assert_eq!(back, c);
        emit(&back, &second).unwrap();
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    }

    #[test]
    fn emit_is_deterministic_and_sorted() {
        let c = fixture();
        let a = c.to_json().unwrap();
        assert_eq!(a, c.to_json().unwrap());
        // "dialogues" sorts before "ontology", "constraints" before "index".
        assert!(a.find("\"dialogues\"").unwrap() < a.find("\"ontology\"").unwrap());
        assert!(a.find("\"constraints\"").unwrap() < a.find("\"index\"").unwrap());
    }

    #[test]
    fn empty_corpus_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.json");
        fs::write(&p, r#"{"ontology": {"informable": {}, "requestable": []}, "dialogues": []}"#)
            .unwrap();
        let c = ingest(&p, SourceFormat::Normalized).unwrap();
        assert!(c.dialogues.is_empty());
        emit(&c, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"dialogues\": []"));
    }

    #[test]
    fn ingestion_lowercases() {
        let mut c = fixture();
        c.dialogues[0].turns[0].user = "  I Want CHEAP Food ".into();
        c.dialogues[0].turns[0].constraints[0].value = "Cheap".into();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, serde_json::to_string(&c).unwrap()).unwrap();
        let back = ingest(&p, SourceFormat::Normalized).unwrap();
        assert_eq!(back, fixture());
    }

    #[test]
    fn unknown_slot_is_reported_by_name() {
        let mut c = fixture();
        c.dialogues[1].turns[1].requested.push("postcode".into());
        c.dialogues[0].turns[0].constraints.push(SlotValue::new("stars", "4"));
        match c.validate() {
            Err(Error::UnknownSlots { slots }) => assert_eq!(slots, vec!["postcode", "stars"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_record_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(
            &p,
            r#"{"ontology": {"informable": {}, "requestable": []},
                "dialogues": [{"id": "ok", "domain": "x", "turns": []},
                              {"id": "broken", "domain": "x", "turns": 3}]}"#,
        )
        .unwrap();
        let err = ingest(&p, SourceFormat::Normalized).unwrap_err();
        assert!(err.to_string().contains("broken"), "{err}");
        assert!(!err.is_io());
    }

    #[test]
    fn structural_invariants() {
        let mut c = fixture();
        c.dialogues[1].turns[1].index = 5;
        c.dialogues[0].id = "d1".into();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("out of sequence"));
        assert!(err.contains("duplicate dialogue id"));
    }

    #[test]
    fn missing_file_is_io() {
        let err = ingest(Path::new("/nonexistent/corpus.json"), SourceFormat::Normalized)
            .unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn provenance_round_trips() {
        let mut c = fixture();
        let mut p = Provenance::original();
        p.method = Derivation::Augmented(Method::Backtranslate);
        p.variant = 2;
        p.meta.insert("pivot".into(), Value::String("ja".into()));
        c.dialogues[0].provenance = Some(p);
        c.dialogues[0].id = "d0#backtranslate2".into();
        let json = c.to_json().unwrap();
        let back = Corpus::from_json(&json, Path::new("mem")).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.dialogues[0].base_id(), "d0");
        assert!(json.contains("\"method\": \"backtranslate\""));
    }
}
