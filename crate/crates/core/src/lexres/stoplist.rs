use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::corpus::Ontology;
use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");

#[derive(Debug, Clone)]
pub struct StopList {
    words: BTreeSet<String>,
    excluded: Vec<String>,
}

impl StopList {
    /// Builds a stop list from one-word-per-line text. Words equal to an
    /// informable ontology value are dropped and remembered in
    /// [`StopList::excluded`].
    pub fn parse(raw: &str, ontology: &Ontology) -> Result<Self> {
        let listed: BTreeSet<String> = raw
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if listed.is_empty() {
            return Err(Error::Resource("stop list is empty".into()));
        }

        let values: BTreeSet<&str> = ontology.informable_values().map(|(_, v)| v).collect();
        let (excluded, words): (BTreeSet<String>, BTreeSet<String>) =
            listed.into_iter().partition(|w| values.contains(w.as_str()));
        for w in &excluded {
            log::warn!("stop word {w:?} is an ontology value; not deleting it");
        }
        if words.is_empty() {
            return Err(Error::Resource(
                "every stop word collides with an ontology value".into(),
            ));
        }
        Ok(StopList {
            words,
            excluded: excluded.into_iter().collect(),
        })
    }

    pub fn bundled(ontology: &Ontology) -> Result<Self> {
        Self::parse(BUNDLED_STOPWORDS, ontology)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn load_stoplist(path: &Path, ontology: &Ontology) -> Result<StopList> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    StopList::parse(&raw, ontology)
}
