#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dialogaug_core::{Corpus, Dialogue, Ontology, SourceFormat, Turn};

pub fn dialogaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialogaug"))
        .args(args)
        .env_remove("DIALOGAUG_BACKEND_URL")
        .output()
        .expect("spawn dialogaug")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

pub fn write_corpus(dir: &Path, name: &str, corpus: &Corpus) -> PathBuf {
    let path = dir.join(name);
    dialogaug_core::emit(corpus, &path).expect("write corpus");
    path
}

pub fn read_corpus(path: &Path) -> Corpus {
    dialogaug_core::ingest(path, SourceFormat::Normalized).expect("read corpus")
}

/// A reference corpus and hypothesis file whose Success F1 counts are
/// exactly (`tp`, `fp`, `fn_`): one single-turn dialogue per counted slot.
pub fn engineered_eval(dir: &Path, tp: usize, fp: usize, fn_: usize) -> (PathBuf, PathBuf) {
    let mut dialogues = Vec::new();
    let mut hyps = String::new();
    let cases = [("<phone>", "<phone>", tp), ("sorry, no idea.", "<phone>", fp), ("<phone>", "sorry.", fn_)];
    for (reference, hyp, n) in cases {
        for _ in 0..n {
            let id = format!("e{}", dialogues.len());
            dialogues.push(Dialogue {
                id: id.clone(),
                domain: "restaurant".into(),
                turns: vec![Turn {
                    index: 0,
                    user: "what is the phone number?".into(),
                    machine: format!("the number is {reference}"),
                    constraints: vec![],
                    requested: vec!["phone".into()],
                }],
                provenance: None,
            });
            hyps.push_str(&serde_json::json!({"dialogue_id": id, "turn": 0, "response": hyp}).to_string());
            hyps.push('\n');
        }
    }
    let corpus = Corpus {
        ontology: Ontology {
            informable: BTreeMap::new(),
            requestable: vec!["address".into(), "phone".into()],
        },
        dialogues,
        source: SourceFormat::Normalized,
    };
    let reference = write_corpus(dir, "ref.json", &corpus);
    let hyp = dir.join("hyp.jsonl");
    fs::write(&hyp, hyps).unwrap();
    (hyp, reference)
}

/// Every file under `root`, relative path to bytes.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}
