//! CamRest676 adapter (`CamRest676.json` with an optional sibling
//! `CamRestOTGY.json`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{clean, record_label, Corpus, Dialogue, Ontology, SlotValue, SourceFormat, Turn};
use crate::error::{Error, Result};

const ONTOLOGY_FILE: &str = "CamRestOTGY.json";

#[derive(Deserialize)]
struct RawDialogue {
    dial: Vec<RawTurn>,
    #[serde(default)]
    dialogue_id: Option<Value>,
}

#[derive(Deserialize)]
struct RawTurn {
    usr: RawUser,
    sys: RawSys,
}

#[derive(Deserialize)]
struct RawUser {
    transcript: String,
    #[serde(default)]
    slu: Vec<RawAct>,
}

#[derive(Deserialize)]
struct RawSys {
    sent: String,
}

#[derive(Deserialize)]
struct RawAct {
    act: String,
    #[serde(default)]
    slots: Vec<(String, String)>,
}

pub(super) fn parse(raw: &str, path: &Path) -> Result<Corpus> {
    let records: Vec<Value> =
        serde_json::from_str(raw).map_err(|e| Error::parse(path, "document", e))?;

    let mut dialogues = Vec::with_capacity(records.len());
    let mut seen_informable: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut seen_requestable = BTreeSet::new();

    for (i, v) in records.into_iter().enumerate() {
        let label = record_label(i, &v, "dialogue_id");
        let d: RawDialogue = serde_json::from_value(v).map_err(|e| Error::parse(path, label, e))?;
        let id = match d.dialogue_id {
            Some(Value::String(s)) => s,
            Some(Value::Number(n)) => n.to_string(),
            _ => i.to_string(),
        };

        // The belief state accumulates informs; a later inform of the same
        // slot replaces the earlier value.
        let mut belief: BTreeMap<String, String> = BTreeMap::new();
        let mut turns = Vec::with_capacity(d.dial.len());
        for (index, t) in d.dial.into_iter().enumerate() {
            let mut requested = Vec::new();
            for act in &t.usr.slu {
                for (slot, value) in &act.slots {
                    match act.act.as_str() {
                        "inform" => {
                            let (slot, value) = (slot.trim().to_string(), clean(value));
                            seen_informable
                                .entry(slot.clone())
                                .or_default()
                                .insert(value.clone());
                            belief.insert(slot, value);
                        }
                        "request" => {
                            // requests look like ["slot", "phone"]
                            let name = value.trim().to_string();
                            seen_requestable.insert(name.clone());
                            if !requested.contains(&name) {
                                requested.push(name);
                            }
                        }
                        _ => {}
                    }
                }
            }
            turns.push(Turn {
                index,
                user: t.usr.transcript,
                machine: t.sys.sent,
                constraints: belief
                    .iter()
                    .map(|(s, v)| SlotValue::new(s.clone(), v.clone()))
                    .collect(),
                requested,
            });
        }
        dialogues.push(Dialogue {
            id,
            domain: "restaurant".to_string(),
            turns,
            provenance: None,
        });
    }

    let sibling = path.parent().map(|p| p.join(ONTOLOGY_FILE));
    let ontology = match sibling {
        Some(p) if p.is_file() => Ontology::read(&p)?,
        _ => Ontology {
            informable: seen_informable
                .into_iter()
                .map(|(s, vs)| (s, vs.into_iter().collect()))
                .collect(),
            requestable: seen_requestable.into_iter().collect(),
        },
    };

    Ok(Corpus {
        ontology,
        dialogues,
        source: SourceFormat::Camrest676,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{ingest, SourceFormat};
    use std::fs;

    const SAMPLE: &str = r#"[
      {"dialogue_id": 0, "finished": true, "goal": {},
       "dial": [
        {"turn": 0,
         "usr": {"transcript": "I would like a CHEAP restaurant in the north",
                 "slu": [{"act": "inform", "slots": [["pricerange", "cheap"]]},
                         {"act": "inform", "slots": [["area", "north"]]}]},
         "sys": {"sent": "Da Vinci Pizzeria is a cheap restaurant.", "DA": []}},
        {"turn": 1,
         "usr": {"transcript": "What is the phone number?",
                 "slu": [{"act": "request", "slots": [["slot", "phone"]]}]},
         "sys": {"sent": "Their phone number is 01223 351707.", "DA": ["phone"]}}
       ]}
    ]"#;

    #[test]
    fn derives_ontology_and_belief_state() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("CamRest676.json");
        fs::write(&p, SAMPLE).unwrap();
        let c = ingest(&p, SourceFormat::Camrest676).unwrap();
        assert_eq!(c.dialogues.len(), 1);
        let d = &c.dialogues[0];
        assert_eq!(d.id, "0");
        assert_eq!(d.domain, "restaurant");
        assert_eq!(d.turns[0].user, "i would like a cheap restaurant in the north");
        assert_eq!(d.turns[1].constraints.len(), 2, "belief carries over");
        assert_eq!(d.turns[1].requested, vec!["phone"]);
        assert_eq!(c.ontology.requestable, vec!["phone"]);
        assert_eq!(c.ontology.informable["area"], vec!["north"]);
    }

    #[test]
    fn sibling_ontology_is_used() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("CamRest676.json");
        fs::write(&p, SAMPLE).unwrap();
        fs::write(
            dir.path().join("CamRestOTGY.json"),
            r#"{"informable": {"area": ["north"], "pricerange": ["cheap"]},
                "requestable": ["address", "phone"]}"#,
        )
        .unwrap();
        let c = ingest(&p, SourceFormat::Camrest676).unwrap();
        assert_eq!(c.ontology.requestable, vec!["address", "phone"]);
    }

    #[test]
    fn malformed_dialogue_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("CamRest676.json");
        fs::write(&p, r#"[{"dialogue_id": 7, "dial": [{"usr": {}}]}]"#).unwrap();
        let err = ingest(&p, SourceFormat::Camrest676).unwrap_err();
        assert!(err.to_string().contains("id 7"), "{err}");
    }
}
