use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{wordnet, PosTag};
use crate::error::{Error, Result};

const BUNDLED_SYNONYMS: &str = include_str!("../../resources/synonyms.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynonymFormat {
    /// `lemma<TAB>pos<TAB>syn1|syn2|...`
    Tsv,
    /// A WordNet database directory (`index.noun`, `data.noun`, ...).
    WordnetDb,
}

impl FromStr for SynonymFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(SynonymFormat::Tsv),
            "wordnet_db" | "wordnet" => Ok(SynonymFormat::WordnetDb),
            other => Err(Error::Argument(format!("unknown synonym format {other:?}"))),
        }
    }
}

/// `(lemma, pos) -> synonyms`. A lemma is never its own synonym and no
/// synonym set is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<(String, PosTag), BTreeSet<String>>,
}

impl SynonymLexicon {
    /// Collects entries, dropping self-synonyms, empty sets and parts of
    /// speech outside NOUN/VERB/ADJ/ADV. Fails if nothing is left.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, PosTag, Vec<String>)>,
    {
        let mut map: BTreeMap<(String, PosTag), BTreeSet<String>> = BTreeMap::new();
        for (lemma, pos, syns) in entries {
            if !pos.has_synonyms() {
                log::debug!("synonyms for {lemma}/{pos} ignored");
                continue;
            }
            let lemma = lemma.trim().to_lowercase();
            let set: BTreeSet<String> = syns
                .into_iter()
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && *s != lemma)
                .collect();
            if set.is_empty() {
                continue;
            }
            map.entry((lemma, pos)).or_default().extend(set);
        }
        if map.is_empty() {
            return Err(Error::Resource("synonym lexicon is empty".into()));
        }
        Ok(SynonymLexicon { entries: map })
    }

    pub fn parse_tsv(raw: &str, origin: &Path) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in raw.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let record = format!("line {}", n + 1);
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(origin, record, "expected lemma<TAB>pos<TAB>synonyms"));
            }
            let pos: PosTag = cols[1]
                .trim()
                .to_uppercase()
                .parse()
                .map_err(|e| Error::parse(origin, record, e))?;
            rows.push((
                cols[0].to_string(),
                pos,
                cols[2].split('|').map(str::to_string).collect(),
            ));
        }
        Self::from_entries(rows)
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse_tsv(BUNDLED_SYNONYMS, Path::new("<bundled synonyms.tsv>"))
            .expect("bundled synonym lexicon is well formed")
    }

    pub fn synonyms(&self, lemma: &str, pos: PosTag) -> Option<&BTreeSet<String>> {
        // BTreeMap<(String, _)> cannot be probed with (&str, _), so build the key.
        self.entries.get(&(lemma.to_string(), pos))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, PosTag, &BTreeSet<String>)> {
        self.entries
            .iter()
            .map(|((l, p), s)| (l.as_str(), *p, s))
    }
}

pub fn load_synonyms(path: &Path, format: SynonymFormat) -> Result<SynonymLexicon> {
    match format {
        SynonymFormat::Tsv => {
            let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            SynonymLexicon::parse_tsv(&raw, path)
        }
        SynonymFormat::WordnetDb => SynonymLexicon::from_entries(wordnet::read_dir(path)?),
    }
}
