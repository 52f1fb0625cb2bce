//! Reader for the WordNet database layout: `index.{noun,verb,adj,adv}` and
//! the matching `data.*` files. Every index lemma maps to the union of the
//! words of all its synsets of that part of speech.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::PosTag;
use crate::error::{Error, Result};

const PARTS: [(&str, PosTag); 4] = [
    ("noun", PosTag::Noun),
    ("verb", PosTag::Verb),
    ("adj", PosTag::Adj),
    ("adv", PosTag::Adv),
];

pub(super) fn read_dir(dir: &Path) -> Result<Vec<(String, PosTag, Vec<String>)>> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a WordNet directory"),
        ));
    }
    let mut out = Vec::new();
    let mut found = false;
    for (suffix, pos) in PARTS {
        let index = dir.join(format!("index.{suffix}"));
        let data = dir.join(format!("data.{suffix}"));
        if !index.is_file() || !data.is_file() {
            continue;
        }
        found = true;
        let synsets = read_data(&data)?;
        let raw = fs::read_to_string(&index).map_err(|e| Error::io(&index, e))?;
        for (n, line) in raw.lines().enumerate() {
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::parse(&index, format!("line {}", n + 1), msg);
            if fields.len() < 4 {
                return Err(bad("truncated index entry"));
            }
            let lemma = fields[0].replace('_', " ");
            let count: usize = fields[2].parse().map_err(|_| bad("bad synset_cnt"))?;
            if fields.len() < 4 + count {
                return Err(bad("fewer offsets than synset_cnt"));
            }
            let mut words = Vec::new();
            for off in &fields[fields.len() - count..] {
                let off: u64 = off.parse().map_err(|_| bad("bad synset offset"))?;
                match synsets.get(&off) {
                    Some(ws) => words.extend(ws.iter().cloned()),
                    None => return Err(bad(&format!("offset {off} not in {}", data.display()))),
                }
            }
            out.push((lemma, pos, words));
        }
    }
    if !found {
        return Err(Error::Resource(format!(
            "{} holds no index/data file pair",
            dir.display()
        )));
    }
    Ok(out)
}

/// Synset offset -> member words (lowercase, spaces for underscores,
/// adjective position markers removed).
fn read_data(path: &Path) -> Result<HashMap<u64, Vec<String>>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut synsets = HashMap::new();
    for (n, line) in raw.lines().enumerate() {
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::parse(path, format!("line {}", n + 1), msg);
        let body = line.split(" | ").next().unwrap_or(line);
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(bad("truncated synset"));
        }
        let offset: u64 = fields[0].parse().map_err(|_| bad("bad synset offset"))?;
        let w_cnt = usize::from_str_radix(fields[3], 16).map_err(|_| bad("bad w_cnt"))?;
        if fields.len() < 4 + 2 * w_cnt {
            return Err(bad("fewer words than w_cnt"));
        }
        let words = (0..w_cnt)
            .map(|i| {
                let w = fields[4 + 2 * i];
                let w = w.split('(').next().unwrap_or(w);
                w.replace('_', " ").to_lowercase()
            })
            .collect();
        synsets.insert(offset, words);
    }
    Ok(synsets)
}
