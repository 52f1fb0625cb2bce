//! Lexical resources: part-of-speech lexicon, synonym lexicon, stop list.

mod stoplist;
mod synonyms;
mod wordnet;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stoplist::{load_stoplist, StopList};
pub use synonyms::{load_synonyms, SynonymFormat, SynonymLexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Propn,
    Verb,
    Modal,
    Adj,
    Adv,
    Pron,
    Det,
    Stop,
    Other,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Propn => "PROPN",
            PosTag::Verb => "VERB",
            PosTag::Modal => "MODAL",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Stop => "STOP",
            PosTag::Other => "OTHER",
        }
    }

    /// Tags whose word lists take priority over the open-class map.
    pub fn is_closed_class(self) -> bool {
        matches!(self, PosTag::Det | PosTag::Pron | PosTag::Modal | PosTag::Propn)
    }

    /// Open classes a synonym lexicon may hold.
    pub fn has_synonyms(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Verb | PosTag::Adj | PosTag::Adv)
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.trim() {
            "NOUN" => PosTag::Noun,
            "PROPN" => PosTag::Propn,
            "VERB" => PosTag::Verb,
            "MODAL" => PosTag::Modal,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "PRON" => PosTag::Pron,
            "DET" => PosTag::Det,
            "STOP" => PosTag::Stop,
            "OTHER" => PosTag::Other,
            other => return Err(format!("unknown part-of-speech tag {other:?}")),
        })
    }
}

const BUNDLED_POSLEX: &str = include_str!("../../resources/poslex.tsv");

/// Word-class lexicon: closed-class lists plus an open-class word map.
#[derive(Debug, Clone, Default)]
pub struct PosLexicon {
    tags: HashMap<String, PosTag>,
    closed_class: BTreeMap<PosTag, BTreeSet<String>>,
}

impl PosLexicon {
    /// Builds a lexicon from `(word, tag)` pairs. Closed-class tags go to
    /// their lists; a word may sit in only one closed-class list.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, PosTag)>,
        S: AsRef<str>,
    {
        let mut lex = PosLexicon::default();
        for (word, tag) in entries {
            let word = word.as_ref().trim().to_lowercase();
            if tag.is_closed_class() {
                if let Some((other, _)) = lex
                    .closed_class
                    .iter()
                    .find(|(t, ws)| **t != tag && ws.contains(&word))
                {
                    return Err(Error::Resource(format!(
                        "{word:?} is listed as both {other} and {tag}"
                    )));
                }
                lex.closed_class.entry(tag).or_default().insert(word);
            } else {
                lex.tags.insert(word, tag);
            }
        }
        Ok(lex)
    }

    pub fn parse_tsv(raw: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(word), Some(tag)) = (cols.next(), cols.next()) else {
                return Err(Error::parse(origin, format!("line {}", n + 1), "expected word<TAB>tag"));
            };
            let tag: PosTag = tag
                .parse()
                .map_err(|e| Error::parse(origin, format!("line {}", n + 1), e))?;
            entries.push((word.to_string(), tag));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&raw, path)
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse_tsv(BUNDLED_POSLEX, Path::new("<bundled poslex.tsv>"))
            .expect("bundled part-of-speech lexicon is well formed")
    }

    pub fn lookup(&self, word: &str) -> PosTag {
        if let Some((tag, _)) = self.closed_class.iter().find(|(_, ws)| ws.contains(word)) {
            return *tag;
        }
        self.tags.get(word).copied().unwrap_or(PosTag::Other)
    }

    pub fn closed_class(&self, tag: PosTag) -> impl Iterator<Item = &str> {
        self.closed_class
            .get(&tag)
            .into_iter()
            .flat_map(|ws| ws.iter().map(String::as_str))
    }
}

/// One tag per token; closed-class membership wins over the word map and
/// unknown words are `OTHER`.
pub fn tag<S: AsRef<str>>(tokens: &[S], poslex: &PosLexicon) -> Vec<PosTag> {
    tokens.iter().map(|t| poslex.lookup(t.as_ref())).collect()
}
