//! KVRET adapter (`kvret_{train,dev,test}_public.json`).
//!
//! Driver and assistant messages alternate; each driver message is paired
//! with the assistant reply that follows it, and the reply's `slots` and
//! `requested` annotations become the turn's constraints and requests.
//! Consecutive messages from the same side are joined. A trailing driver
//! message with no reply is dropped, as are dialogues left with no turns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{clean, Corpus, Dialogue, Ontology, SlotValue, SourceFormat, Turn};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawDialogue {
    dialogue: Vec<RawMessage>,
    #[serde(default)]
    scenario: Option<RawScenario>,
}

#[derive(Deserialize)]
struct RawMessage {
    turn: String,
    data: RawData,
}

#[derive(Deserialize)]
struct RawData {
    utterance: String,
    #[serde(default)]
    requested: BTreeMap<String, bool>,
    #[serde(default)]
    slots: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawScenario {
    #[serde(default)]
    uuid: Option<String>,
    #[serde(default)]
    task: Option<RawTask>,
}

#[derive(Deserialize)]
struct RawTask {
    #[serde(default)]
    intent: Option<String>,
}

pub(super) fn parse(raw: &str, path: &Path) -> Result<Corpus> {
    let records: Vec<Value> =
        serde_json::from_str(raw).map_err(|e| Error::parse(path, "document", e))?;

    let mut dialogues = Vec::new();
    let mut informable: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut requestable = BTreeSet::new();

    for (i, v) in records.into_iter().enumerate() {
        let uuid = v
            .pointer("/scenario/uuid")
            .and_then(Value::as_str)
            .map(str::to_string);
        let label = match &uuid {
            Some(u) => format!("#{i} (uuid {u:?})"),
            None => format!("#{i}"),
        };
        let d: RawDialogue = serde_json::from_value(v).map_err(|e| Error::parse(path, label, e))?;
        let (id, domain) = match d.scenario {
            Some(s) => (
                s.uuid.unwrap_or_else(|| i.to_string()),
                s.task.and_then(|t| t.intent).unwrap_or_else(|| "unknown".into()),
            ),
            None => (i.to_string(), "unknown".to_string()),
        };

        let mut turns: Vec<Turn> = Vec::new();
        let mut pending_user: Option<String> = None;
        let mut last_was_machine = false;
        for m in d.dialogue {
            let text = m.data.utterance.trim().to_string();
            match m.turn.as_str() {
                "driver" => {
                    last_was_machine = false;
                    pending_user = Some(match pending_user.take() {
                        Some(prev) => format!("{prev} {text}"),
                        None => text,
                    });
                }
                "assistant" => {
                    for key in m.data.requested.keys() {
                        requestable.insert(key.clone());
                    }
                    for (slot, value) in &m.data.slots {
                        informable.entry(slot.clone()).or_default().insert(clean(value));
                    }
                    if let Some(user) = pending_user.take() {
                        turns.push(Turn {
                            index: turns.len(),
                            user,
                            machine: text,
                            constraints: m
                                .data
                                .slots
                                .iter()
                                .map(|(s, v)| SlotValue::new(s.clone(), clean(v)))
                                .collect(),
                            requested: m
                                .data
                                .requested
                                .iter()
                                .filter(|(_, &asked)| asked)
                                .map(|(s, _)| s.clone())
                                .collect(),
                        });
                        last_was_machine = true;
                    } else if last_was_machine {
                        if let Some(t) = turns.last_mut() {
                            t.machine = format!("{} {text}", t.machine);
                        }
                    }
                }
                other => {
                    return Err(Error::parse(
                        path,
                        format!("#{i}"),
                        format!("unknown speaker {other:?}"),
                    ))
                }
            }
        }
        if pending_user.is_some() {
            log::debug!("kvret dialogue {id}: dropping unanswered driver message");
        }
        if turns.is_empty() {
            log::warn!("kvret dialogue {id}: no complete turns, skipped");
            continue;
        }
        dialogues.push(Dialogue {
            id,
            domain,
            turns,
            provenance: None,
        });
    }

    Ok(Corpus {
        ontology: Ontology {
            informable: informable
                .into_iter()
                .map(|(s, vs)| (s, vs.into_iter().collect()))
                .collect(),
            requestable: requestable.into_iter().collect(),
        },
        dialogues,
        source: SourceFormat::Kvret,
    })
}
