//! The `augment` subcommand and its config-file resolution.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::Args;
use dialogaug_core::corpus::{self, SourceFormat};
use dialogaug_core::lexres::{load_stoplist, load_synonyms, SynonymFormat};
use dialogaug_core::sentaug::{mock_backend, CachedBackend, HttpBackend, RewriteCache};
use dialogaug_core::{
    assemble, AugmentPlan, BackendConfig, Error, Method, MockMode, PivotSet, PosLexicon, Resources,
    Rewriter, StopList, SynonymLexicon, Target,
};
use serde::{Deserialize, Serialize};

const BACKEND_ENV: &str = "DIALOGAUG_BACKEND_URL";

#[derive(Args, Default)]
pub struct AugmentArgs {
    /// Corpus to augment. May come from --config instead.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Format of --input (default normalized).
    #[arg(long)]
    format: Option<SourceFormat>,
    /// Comma-separated: synonym, stopword, backtranslate, paraphrase.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// user_only, machine_only or user_and_machine.
    #[arg(long)]
    target: Option<Target>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated pivot languages for back-translation.
    #[arg(long)]
    pivots: Option<PivotSet>,
    #[arg(long)]
    k_synonym: Option<u32>,
    #[arg(long)]
    k_paraphrase: Option<u32>,
    /// Decode paraphrases greedily (all copies share one request).
    #[arg(long)]
    paraphrase_greedy: bool,
    #[arg(long)]
    temperature: Option<f64>,

    /// Rewrite service base URL. Falls back to $DIALOGAUG_BACKEND_URL.
    #[arg(long, conflicts_with = "mock_backend")]
    backend_url: Option<String>,
    /// Use the in-process mock: identity, map, echo_seed or drop_placeholders.
    #[arg(long, num_args = 0..=1, default_missing_value = "identity")]
    mock_backend: Option<MockMode>,
    /// JSON object of word replacements for the `map` mock.
    #[arg(long)]
    mock_map: Option<PathBuf>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    max_inflight: Option<usize>,
    #[arg(long)]
    backoff_ms: Option<u64>,
    /// Rewrite cache file (default: rewrite_cache.json in the output
    /// directory when a real backend is used).
    #[arg(long)]
    cache: Option<PathBuf>,

    #[arg(long)]
    synonyms: Option<PathBuf>,
    /// tsv or wordnet_db.
    #[arg(long)]
    synonyms_format: Option<SynonymFormat>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    poslex: Option<PathBuf>,

    #[arg(long)]
    output_dir: PathBuf,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON file with any of the settings above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Backend selection as stored in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendChoice {
    Mock {
        mode: MockMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<PathBuf>,
    },
    Http {
        url: String,
        timeout_ms: u64,
        max_retries: u32,
        max_inflight: usize,
        backoff_ms: u64,
        cache: PathBuf,
    },
}

/// Every setting that influences the output. Serialized into the output
/// directory as `config.json`, which `--config` accepts back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: SourceFormat,
    pub plan: AugmentPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonyms: Option<PathBuf>,
    pub synonyms_format: SynonymFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poslex: Option<PathBuf>,
}

/// The config file: a partial `RunConfig`, with the plan flattened so
/// hand-written files can say `"seed": 3` directly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    input: Option<PathBuf>,
    format: Option<SourceFormat>,
    plan: Option<PlanFile>,
    #[serde(flatten)]
    top: PlanFile,
    backend: Option<BackendFile>,
    synonyms: Option<PathBuf>,
    synonyms_format: Option<SynonymFormat>,
    stopwords: Option<PathBuf>,
    poslex: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    methods: Option<Vec<Method>>,
    target: Option<Target>,
    seed: Option<u64>,
    pivots: Option<PivotSet>,
    k_synonym: Option<u32>,
    k_paraphrase: Option<u32>,
    paraphrase_greedy: Option<bool>,
    temperature: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackendFile {
    kind: Option<String>,
    mode: Option<MockMode>,
    map: Option<PathBuf>,
    url: Option<String>,
    timeout_ms: Option<u64>,
    max_retries: Option<u32>,
    max_inflight: Option<usize>,
    backoff_ms: Option<u64>,
    cache: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ConfigFile, Error> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        record: "config".into(),
        message: e.to_string(),
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl AugmentArgs {
    /// Merges flags over the config file over defaults. `env_url` is the
    /// value of the backend environment variable, consulted last.
    pub fn resolve(&self, env_url: Option<String>) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let nested = file.plan.unwrap_or_default();
        let top = file.top;
        let defaults = AugmentPlan::default();

        macro_rules! pick {
            ($flag:expr, $field:ident) => {
                $flag
                    .clone()
                    .or(top.$field.clone())
                    .or(nested.$field.clone())
                    .unwrap_or(defaults.$field.clone())
            };
        }
        let plan = AugmentPlan {
            methods: pick!(self.methods, methods),
            target: pick!(self.target, target),
            seed: pick!(self.seed, seed),
            pivots: pick!(self.pivots, pivots),
            k_synonym: pick!(self.k_synonym, k_synonym),
            k_paraphrase: pick!(self.k_paraphrase, k_paraphrase),
            paraphrase_greedy: pick!(self.paraphrase_greedy.then_some(true), paraphrase_greedy),
            temperature: pick!(self.temperature, temperature),
        };
        plan.validate()?;

        let input = self
            .input
            .clone()
            .or(file.input)
            .ok_or_else(|| Error::Argument("--input is required".into()))?;

        let fb = file.backend.unwrap_or_default();
        let backend = if let Some(mode) = self.mock_backend {
            Some(BackendChoice::Mock {
                mode,
                map: self.mock_map.clone().or(fb.map),
            })
        } else if let Some(url) = self.backend_url.clone() {
            Some(self.http_choice(url, &fb))
        } else if fb.kind.as_deref() == Some("mock") || fb.mode.is_some() {
            Some(BackendChoice::Mock {
                mode: fb.mode.unwrap_or(MockMode::Identity),
                map: self.mock_map.clone().or(fb.map),
            })
        } else {
            fb.url.clone().or(env_url).map(|url| self.http_choice(url, &fb))
        };
        if backend.is_none() && plan.needs_backend() {
            return Err(Error::Argument(format!(
                "back-translation and paraphrasing need --backend-url, ${BACKEND_ENV} or --mock-backend"
            )));
        }

        Ok(RunConfig {
            input,
            format: self.format.or(file.format).unwrap_or(SourceFormat::Normalized),
            plan,
            backend,
            synonyms: self.synonyms.clone().or(file.synonyms),
            synonyms_format: self
                .synonyms_format
                .or(file.synonyms_format)
                .unwrap_or(SynonymFormat::Tsv),
            stopwords: self.stopwords.clone().or(file.stopwords),
            poslex: self.poslex.clone().or(file.poslex),
        })
    }

    fn http_choice(&self, url: String, fb: &BackendFile) -> BackendChoice {
        let d = BackendConfig::default();
        BackendChoice::Http {
            url,
            timeout_ms: self
                .timeout_ms
                .or(fb.timeout_ms)
                .unwrap_or(d.timeout.as_millis() as u64),
            max_retries: self.max_retries.or(fb.max_retries).unwrap_or(d.max_retries),
            max_inflight: self.max_inflight.or(fb.max_inflight).unwrap_or(d.max_inflight),
            backoff_ms: self
                .backoff_ms
                .or(fb.backoff_ms)
                .unwrap_or(d.backoff_base.as_millis() as u64),
            cache: self
                .cache
                .clone()
                .or(fb.cache.clone())
                .unwrap_or_else(|| self.output_dir.join("rewrite_cache.json")),
        }
    }
}

pub fn run(args: AugmentArgs) -> Result<(), Error> {
    let env_url = std::env::var(BACKEND_ENV).ok().filter(|s| !s.is_empty());
    let config = args.resolve(env_url)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Argument(format!("--jobs: {e}")))?;
    pool.install(|| execute(&config, &args.output_dir))
}

fn execute(config: &RunConfig, out: &Path) -> Result<(), Error> {
    let input = corpus::ingest(&config.input, config.format)?;
    let resources = load_resources(config, &input.ontology)?;

    let mut cache = None;
    let rewriter = match &config.backend {
        None => None,
        Some(BackendChoice::Mock { mode, map }) => {
            let words = match map {
                Some(p) => read_word_map(p)?,
                None => BTreeMap::new(),
            };
            Some(Rewriter::new(mock_backend(words, *mode), 0, Duration::ZERO))
        }
        Some(BackendChoice::Http {
            url,
            timeout_ms,
            max_retries,
            max_inflight,
            backoff_ms,
            cache: cache_path,
        }) => {
            let endpoint = url
                .parse()
                .map_err(|e| Error::Argument(format!("backend url {url:?}: {e}")))?;
            let bc = BackendConfig {
                endpoint,
                timeout: Duration::from_millis(*timeout_ms),
                max_retries: *max_retries,
                max_inflight: *max_inflight,
                backoff_base: Duration::from_millis(*backoff_ms),
            };
            bc.validate()?;
            let store = Arc::new(RewriteCache::load(cache_path)?);
            cache = Some((store.clone(), cache_path.clone()));
            let backend = CachedBackend::new(HttpBackend::new(&bc)?, store);
            Some(Rewriter::with_config(backend, &bc))
        }
    };

    let augmented = assemble::augment_corpus(&input, &config.plan, &resources, rewriter.as_ref())?;
    if let Some((store, path)) = &cache {
        store.save(path)?;
    }
    if let Some(rw) = &rewriter {
        if rw.fallbacks() > 0 {
            log::warn!(
                "{} of {} rewrites fell back to the original utterance",
                rw.fallbacks(),
                rw.requests()
            );
        }
    }

    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    corpus::emit(&augmented, &out.join("corpus.json"))?;
    let report = assemble::stats(&augmented);
    write(&out.join("stats.json"), &to_json(&report))?;
    write(&out.join("stats.txt"), &report.to_text())?;
    write(&out.join("config.json"), &to_json(config))?;

    println!(
        "{} -> {} dialogues in {}",
        input.dialogues.len(),
        augmented.dialogues.len(),
        out.display()
    );
    Ok(())
}

fn load_resources(config: &RunConfig, ontology: &corpus::Ontology) -> Result<Resources, Error> {
    Ok(Resources {
        poslex: match &config.poslex {
            Some(p) => PosLexicon::load(p)?,
            None => PosLexicon::bundled(),
        },
        synonyms: match &config.synonyms {
            Some(p) => load_synonyms(p, config.synonyms_format)?,
            None => SynonymLexicon::bundled(),
        },
        stoplist: match &config.stopwords {
            Some(p) => load_stoplist(p, ontology)?,
            None => StopList::bundled(ontology)?,
        },
    })
}

fn read_word_map(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        record: "word map".into(),
        message: e.to_string(),
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}
