//! Deterministic in-process stand-in for translation and paraphrase
//! services.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BackendError, RewriteBackend, RewriteMode, RewriteRequest, RewriteResponse, PLACEHOLDER};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockMode {
    /// Echo the request text.
    Identity,
    /// Rewrite words through the word map on the leg that returns to the
    /// corpus language (and on paraphrase requests).
    MapOnReturnLeg,
    /// Append a marker derived from the sampling seed.
    EchoSeed,
    /// Delete every placeholder; for exercising the fallback path.
    DropPlaceholders,
}

impl FromStr for MockMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.replace('-', "_").as_str() {
            "identity" => Ok(MockMode::Identity),
            "map" | "map_on_return_leg" => Ok(MockMode::MapOnReturnLeg),
            "echo_seed" => Ok(MockMode::EchoSeed),
            "drop_placeholders" => Ok(MockMode::DropPlaceholders),
            other => Err(Error::Argument(format!("unknown mock mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    mode: MockMode,
    word_map: BTreeMap<String, String>,
    home_lang: String,
}

pub fn mock_backend(word_map: BTreeMap<String, String>, mode: MockMode) -> MockBackend {
    MockBackend {
        mode,
        word_map,
        home_lang: "en".to_string(),
    }
}

impl MockBackend {
    pub fn identity() -> Self {
        mock_backend(BTreeMap::new(), MockMode::Identity)
    }

    pub fn mode(&self) -> MockMode {
        self.mode
    }

    fn map_words(&self, text: &str) -> String {
        text.split_whitespace()
            .map(|w| {
                if PLACEHOLDER.is_match(w) {
                    w
                } else {
                    self.word_map.get(w).map_or(w, String::as_str)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl RewriteBackend for MockBackend {
    fn rewrite(&self, req: &RewriteRequest) -> Result<RewriteResponse, BackendError> {
        let text = match self.mode {
            MockMode::Identity => req.text.clone(),
            MockMode::MapOnReturnLeg => {
                let returning = req.mode == RewriteMode::Paraphrase || req.target_lang == self.home_lang;
                if returning {
                    self.map_words(&req.text)
                } else {
                    req.text.clone()
                }
            }
            MockMode::EchoSeed => format!("{} seed{}", req.text, req.sampling.seed),
            MockMode::DropPlaceholders => {
                let kept = req
                    .text
                    .split_whitespace()
                    .filter(|w| !PLACEHOLDER.is_match(w))
                    .collect::<Vec<_>>()
                    .join(" ");
                // the backend contract forbids empty responses
                if kept.is_empty() {
                    "ok".to_string()
                } else {
                    kept
                }
            }
        };
        Ok(RewriteResponse { text })
    }
}
