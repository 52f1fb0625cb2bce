//! Word-level augmentation: slot protection, synonym substitution and
//! stop-word deletion.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rand::Rng;
use serde_json::Value;

use crate::corpus::{Method, Ontology, SlotValue, Turn};
use crate::error::{Error, Result};
use crate::lexres::{self, PosLexicon, PosTag, StopList, SynonymLexicon};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: PosTag,
    /// Inside a slot-value span; never modified or deleted.
    pub protected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedUtterance {
    pub tokens: Vec<TaggedToken>,
    pub source_text: String,
    /// Protected spans as token ranges, left to right.
    pub spans: Vec<Range<usize>>,
    /// Constraint values of the turn that do not occur in the text.
    pub unmatched: Vec<SlotValue>,
}

impl TokenizedUtterance {
    /// Tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.surfaces().collect::<Vec<_>>().join(" ")
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// Surface text of every protected span.
    pub fn protected_surfaces(&self) -> Vec<String> {
        self.spans
            .iter()
            .map(|r| {
                self.tokens[r.clone()]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub text: String,
    pub method: Method,
    pub variant_index: u32,
    pub meta: BTreeMap<String, Value>,
}

/// Tokenizes `text` and marks every token covered by a slot value: the
/// turn's constraint values plus any informable ontology value found in the
/// text. Longer values are matched first and matches never overlap.
pub fn tokenize_and_protect(
    text: &str,
    turn: &Turn,
    ontology: &Ontology,
    poslex: &PosLexicon,
) -> TokenizedUtterance {
    let surfaces = text::tokenize(text);
    let present: BTreeSet<&str> = surfaces.iter().map(String::as_str).collect();

    let mut values: BTreeSet<&str> = turn.constraints.iter().map(|c| c.value.as_str()).collect();
    values.extend(ontology.informable_values().map(|(_, v)| v));
    let patterns: Vec<Vec<String>> = values
        .into_iter()
        .map(text::tokenize)
        .filter(|p| p.first().is_some_and(|t| present.contains(t.as_str())))
        .collect();

    let matches = text::match_spans(&surfaces, &patterns);
    let mut protected = vec![false; surfaces.len()];
    let mut spans = Vec::with_capacity(matches.len());
    for (start, end, _) in matches {
        protected[start..end].iter_mut().for_each(|p| *p = true);
        spans.push(start..end);
    }

    let unmatched: Vec<SlotValue> = turn
        .constraints
        .iter()
        .filter(|c| {
            let pat = text::tokenize(&c.value);
            !surfaces.windows(pat.len().max(1)).any(|w| w == pat.as_slice())
        })
        .cloned()
        .collect();
    if !unmatched.is_empty() {
        log::trace!("constraint values not in {text:?}: {unmatched:?}");
    }

    let tags = lexres::tag(&surfaces, poslex);
    let tokens = surfaces
        .into_iter()
        .zip(tags)
        .zip(protected)
        .map(|((surface, pos), protected)| TaggedToken {
            surface,
            pos,
            protected,
        })
        .collect();

    TokenizedUtterance {
        tokens,
        source_text: text.to_string(),
        spans,
        unmatched,
    }
}

/// Word classes synonym substitution may touch.
pub fn substitutable(pos: PosTag) -> bool {
    matches!(pos, PosTag::Verb | PosTag::Adj | PosTag::Noun)
}

/// Every `(token position, synonyms)` pair a substitution may draw from.
pub fn eligible_substitutions<'a>(
    tu: &TokenizedUtterance,
    lex: &'a SynonymLexicon,
) -> Vec<(usize, &'a BTreeSet<String>)> {
    tu.tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.protected && substitutable(t.pos))
        .filter_map(|(i, t)| match lex.synonyms(&t.surface, t.pos) {
            Some(syns) => Some((i, syns)),
            None => {
                log::trace!("no {} synonyms for {:?}", t.pos, t.surface);
                None
            }
        })
        .collect()
}

/// Replaces one randomly chosen eligible token by a random same-class
/// synonym. `None` when the utterance has no eligible token.
pub fn synonym_substitute<R: Rng + ?Sized>(
    tu: &TokenizedUtterance,
    lex: &SynonymLexicon,
    rng: &mut R,
    variant_index: u32,
) -> Option<Variant> {
    let eligible = eligible_substitutions(tu, lex);
    if eligible.is_empty() {
        return None;
    }
    let (pos, syns) = eligible[rng.random_range(0..eligible.len())];
    let replacement = syns
        .iter()
        .nth(rng.random_range(0..syns.len()))
        .expect("synonym sets are non-empty");

    let mut words: Vec<&str> = tu.surfaces().collect();
    let replaced = words[pos];
    words[pos] = replacement;

    let mut meta = BTreeMap::new();
    meta.insert("position".into(), Value::from(pos));
    meta.insert("replaced".into(), Value::from(replaced));
    meta.insert("replacement".into(), Value::from(replacement.as_str()));
    Some(Variant {
        text: words.join(" "),
        method: Method::Synonym,
        variant_index,
        meta,
    })
}

/// `k` independent substitutions drawn from one random stream; duplicates
/// are kept. Empty when no token is eligible.
pub fn synonym_variants<R: Rng + ?Sized>(
    tu: &TokenizedUtterance,
    lex: &SynonymLexicon,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Variant>> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        match synonym_substitute(tu, lex, rng, i as u32) {
            Some(v) => out.push(v),
            None => {
                log::debug!("no substitutable word in {:?}", tu.source_text);
                return Ok(Vec::new());
            }
        }
    }
    Ok(out)
}

/// Drops unprotected stop words. `None` when nothing would be deleted or
/// nothing would remain.
pub fn stopword_variant(tu: &TokenizedUtterance, stop: &StopList) -> Option<Variant> {
    let kept: Vec<&str> = tu
        .tokens
        .iter()
        .filter(|t| t.protected || !stop.contains(&t.surface))
        .map(|t| t.surface.as_str())
        .collect();
    let deleted = tu.tokens.len() - kept.len();
    if deleted == 0 || kept.is_empty() {
        return None;
    }
    let mut meta = BTreeMap::new();
    meta.insert("deleted".into(), Value::from(deleted));
    Some(Variant {
        text: kept.join(" "),
        method: Method::Stopword,
        variant_index: 1,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SlotValue;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poslex() -> PosLexicon {
        PosLexicon::from_entries([
            ("i", PosTag::Pron),
            ("want", PosTag::Verb),
            ("like", PosTag::Verb),
            ("cheap", PosTag::Adj),
            ("food", PosTag::Noun),
            ("restaurant", PosTag::Noun),
            ("would", PosTag::Modal),
            ("a", PosTag::Det),
            ("the", PosTag::Det),
            ("oriental", PosTag::Adj),
            ("quickly", PosTag::Adv),
        ])
        .unwrap()
    }

    fn ontology() -> Ontology {
        let mut o = Ontology::default();
        o.informable.insert("pricerange".into(), vec!["cheap".into()]);
        o.informable
            .insert("food".into(), vec!["asian oriental".into(), "thai".into()]);
        o
    }

    fn turn(constraints: &[(&str, &str)]) -> Turn {
        Turn {
            index: 0,
            user: String::new(),
            machine: String::new(),
            constraints: constraints.iter().map(|(s, v)| SlotValue::new(*s, *v)).collect(),
            requested: vec![],
        }
    }

    fn protect(text: &str, constraints: &[(&str, &str)]) -> TokenizedUtterance {
        tokenize_and_protect(text, &turn(constraints), &ontology(), &poslex())
    }

    fn lexicon(rows: &[(&str, PosTag, &[&str])]) -> SynonymLexicon {
        SynonymLexicon::from_entries(rows.iter().map(|(l, p, s)| {
            (l.to_string(), *p, s.iter().map(|x| x.to_string()).collect())
        }))
        .unwrap()
    }

    #[test]
    fn constraint_value_is_protected() {
        let tu = protect("i want cheap food", &[("pricerange", "cheap")]);
        let flags: Vec<bool> = tu.tokens.iter().map(|t| t.protected).collect();
        assert_eq!(flags, [false, false, true, false]);
        assert_eq!(tu.spans, vec![2..3]);
    }

    #[test]
    fn no_constraints_no_values_nothing_protected() {
        let mut o = Ontology::default();
        o.requestable.push("phone".into());
        let tu = tokenize_and_protect("i want food", &turn(&[]), &o, &poslex());
        assert!(tu.tokens.iter().all(|t| !t.protected));
    }

    #[test]
    fn multiword_value_is_one_span() {
        let tu = protect("how about asian oriental food?", &[("food", "asian oriental")]);
        assert_eq!(tu.spans, vec![2..4]);
        assert_eq!(tu.protected_surfaces(), vec!["asian oriental"]);
        // "oriental" alone is an ADJ but protected, so never substitutable
        let lex = lexicon(&[("oriental", PosTag::Adj, &["eastern"])]);
        assert!(eligible_substitutions(&tu, &lex).is_empty());
    }

    #[test]
    fn missing_constraint_is_reported_not_fatal() {
        let tu = protect("i want food", &[("food", "thai")]);
        assert_eq!(tu.unmatched, vec![SlotValue::new("food", "thai")]);
    }

    #[test]
    fn would_like_becomes_would_want() {
        let tu = protect("i would like a restaurant", &[]);
        let lex = lexicon(&[("like", PosTag::Verb, &["want"])]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vs = synonym_variants(&tu, &lex, 1, &mut rng).unwrap();
        assert_eq!(vs[0].text, "i would want a restaurant");
    }

    #[test]
    fn all_determiners_yield_nothing() {
        let tu = protect("the the the", &[]);
        let lex = lexicon(&[("the", PosTag::Noun, &["thee"])]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(synonym_variants(&tu, &lex, 4, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn zero_k_is_argument_error() {
        let tu = protect("i want food", &[]);
        let lex = lexicon(&[("want", PosTag::Verb, &["need"])]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            synonym_variants(&tu, &lex, 0, &mut rng),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn adverbs_and_mismatched_tags_are_not_substituted() {
        let tu = protect("i want food quickly", &[]);
        // quickly is ADV; food has only a VERB entry, so only `want` qualifies
        let lex = lexicon(&[
            ("quickly", PosTag::Adv, &["fast"]),
            ("food", PosTag::Verb, &["feed"]),
            ("want", PosTag::Verb, &["need"]),
        ]);
        let eligible = eligible_substitutions(&tu, &lex);
        assert_eq!(eligible.len(), 1);
        assert_eq!(eligible[0].0, 1);
    }

    /// Every rule-conformant single substitution, built without reference
    /// to `eligible_substitutions`.
    fn exhaustive(tu: &TokenizedUtterance, lex: &SynonymLexicon) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (i, tok) in tu.tokens.iter().enumerate() {
            if tok.protected {
                continue;
            }
            for (lemma, pos, syns) in lex.iter() {
                let pos_ok = matches!(pos, PosTag::Noun | PosTag::Verb | PosTag::Adj);
                if lemma == tok.surface && pos == tok.pos && pos_ok {
                    for s in syns {
                        let mut words: Vec<String> = tu.surfaces().map(str::to_string).collect();
                        words[i] = s.clone();
                        out.insert(words.join(" "));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn four_variants_all_in_oracle() {
        let tu = protect("i want cheap food", &[("pricerange", "cheap")]);
        let lex = lexicon(&[
            ("want", PosTag::Verb, &["need", "desire"]),
            ("food", PosTag::Noun, &["fare"]),
            ("cheap", PosTag::Adj, &["inexpensive"]),
        ]);
        let oracle = exhaustive(&tu, &lex);
        assert_eq!(oracle.len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let vs = synonym_variants(&tu, &lex, 4, &mut rng).unwrap();
        assert_eq!(vs.len(), 4);
        for (i, v) in vs.iter().enumerate() {
            assert!(oracle.contains(&v.text), "{}", v.text);
            assert_eq!(v.variant_index, i as u32 + 1);
        }
    }

    #[test]
    fn stopword_deletion() {
        let stop = StopList::parse("what\nis\nthe\nof\n", &Ontology::default()).unwrap();
        let tu = protect("what is the address of the restaurant", &[]);
        assert_eq!(stopword_variant(&tu, &stop).unwrap().text, "address restaurant");
        assert!(stopword_variant(&protect("thai food", &[]), &stop).is_none());
        assert!(stopword_variant(&protect("of the", &[]), &stop).is_none());
    }

    #[test]
    fn stopword_inside_slot_survives() {
        let mut o = ontology();
        o.informable.insert("name".into(), vec!["the golden house".into()]);
        let stop = StopList::parse("the\nis\n", &Ontology::default()).unwrap();
        let tu = tokenize_and_protect("the golden house is good", &turn(&[]), &o, &poslex());
        assert_eq!(stopword_variant(&tu, &stop).unwrap().text, "the golden house good");
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "i", "want", "like", "cheap", "food", "restaurant", "would", "a", "the", "thai",
            "asian", "oriental", "quickly", "of", "is", "?",
        ])
        .prop_map(str::to_string)
    }

    proptest! {
        #[test]
        fn substitution_is_single_edit_and_preserves_slots(
            words in prop::collection::vec(word(), 1..10),
            seed in any::<u64>(),
        ) {
            let text = words.join(" ");
            let tu = protect(&text, &[("pricerange", "cheap")]);
            let lex = lexicon(&[
                ("want", PosTag::Verb, &["need", "desire"]),
                ("like", PosTag::Verb, &["want"]),
                ("food", PosTag::Noun, &["fare", "nutrient"]),
                ("restaurant", PosTag::Noun, &["eatery", "eating house"]),
                ("cheap", PosTag::Adj, &["inexpensive"]),
                ("quickly", PosTag::Adv, &["fast"]),
            ]);
            let oracle = exhaustive(&tu, &lex);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vs = synonym_variants(&tu, &lex, 4, &mut rng).unwrap();
            prop_assert_eq!(vs.is_empty(), oracle.is_empty());
            for v in &vs {
                prop_assert!(oracle.contains(&v.text));
                let pos = v.meta["position"].as_u64().unwrap() as usize;
                prop_assert!(!tu.tokens[pos].protected);
            }
            let mut again = ChaCha8Rng::seed_from_u64(seed);
            prop_assert_eq!(&vs, &synonym_variants(&tu, &lex, 4, &mut again).unwrap());
        }

        #[test]
        fn stopword_output_is_strict_subsequence(words in prop::collection::vec(word(), 1..10)) {
            let stop = StopList::parse("the\na\nof\nis\ni\nwould\n", &Ontology::default()).unwrap();
            let tu = protect(&words.join(" "), &[("pricerange", "cheap")]);
            if let Some(v) = stopword_variant(&tu, &stop) {
                let out: Vec<&str> = v.text.split(' ').collect();
                prop_assert!(out.len() < tu.tokens.len() && !out.is_empty());
                let mut it = tu.surfaces();
                prop_assert!(out.iter().all(|w| it.any(|s| s == *w)));
                for t in tu.tokens.iter().filter(|t| t.protected) {
                    let in_source = tu.tokens.iter().filter(|x| x.protected && x.surface == t.surface).count();
                    prop_assert!(out.iter().filter(|w| **w == t.surface).count() >= in_source);
                }
            }
        }
    }
}
