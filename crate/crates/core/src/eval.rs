//! Multiple-choice evaluation with optional causal-graph grounding.
//!
//! Each item is turned into a prompt holding the transition's feature
//! evidence, the retrieved causal context (when grounding is on), the question
//! and its four options. The prompt goes to an [`AnswerModel`], the reply is
//! parsed to an option letter, and results are tallied per question category.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::retrieval::{self, Centrality, RetrievalConfig};

pub const OPTION_COUNT: usize = 4;
pub const OPTION_LETTERS: [char; OPTION_COUNT] = ['A', 'B', 'C', 'D'];
pub const MASK_TOKEN: &str = "[MASKED]";
pub const CONTEXT_HEADER: &str = "CAUSAL CONTEXT:";
pub const ANSWER_INSTRUCTION: &str = "Answer with a single letter A-D.";
pub const DEFAULT_MAX_RETRIES: usize = 2;
pub const DEFAULT_TOKEN_ENV: &str = "CKG_API_TOKEN";

/// Feature names treated as visual; every other feature is audio/music.
pub const VISUAL_FEATURES: &[&str] = &["motion", "brightness", "contrast", "saturation", "tvi", "object_count"];

pub fn is_audio_feature(name: &str) -> bool {
    !VISUAL_FEATURES.contains(&name.to_ascii_lowercase().as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    EvidenceReasoning,
    Prediction,
    Counterfactual,
}

impl Category {
    pub const ALL: [Category; 3] = [
        Category::EvidenceReasoning,
        Category::Prediction,
        Category::Counterfactual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::EvidenceReasoning => "evidence_reasoning",
            Category::Prediction => "prediction",
            Category::Counterfactual => "counterfactual",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    /// Case-insensitive; spaces and hyphens count as underscores.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let folded: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == folded)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct McqItem {
    pub item_id: String,
    pub transition_id: String,
    pub category: Category,
    pub question: String,
    pub options: [String; OPTION_COUNT],
    pub correct_index: usize,
}

#[derive(Deserialize)]
struct RawMcq {
    item_id: String,
    transition_id: String,
    category: String,
    question: String,
    options: Vec<String>,
    correct_index: i64,
}

impl TryFrom<RawMcq> for McqItem {
    type Error = String;

    fn try_from(raw: RawMcq) -> std::result::Result<Self, String> {
        let category = raw.category.parse()?;
        let count = raw.options.len();
        let options: [String; OPTION_COUNT] = raw
            .options
            .try_into()
            .map_err(|_| format!("expected {OPTION_COUNT} options, found {count}"))?;
        if !(0..OPTION_COUNT as i64).contains(&raw.correct_index) {
            return Err(format!("correct_index {} outside 0..=3", raw.correct_index));
        }
        Ok(McqItem {
            item_id: raw.item_id,
            transition_id: raw.transition_id,
            category,
            question: raw.question,
            options,
            correct_index: raw.correct_index as usize,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, Default)]
pub struct McqLoad {
    pub items: Vec<McqItem>,
    pub rejected: Vec<RowError>,
}

/// Parse JSON-lines MCQ rows. Invalid rows are collected with their line
/// number and skipped.
pub fn parse_mcq_jsonl<R: BufRead>(reader: R) -> Result<McqLoad> {
    let mut load = McqLoad::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawMcq>(&line)
            .map_err(|e| e.to_string())
            .and_then(McqItem::try_from);
        match parsed {
            Ok(item) => load.items.push(item),
            Err(reason) => load.rejected.push(RowError { line: idx + 1, reason }),
        }
    }
    Ok(load)
}

pub fn load_mcq(path: &Path) -> Result<McqLoad> {
    parse_mcq_jsonl(BufReader::new(File::open(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvidence {
    pub transition_id: String,
    #[serde(rename = "scene_a")]
    pub scene_a_features: BTreeMap<String, f64>,
    #[serde(rename = "scene_b")]
    pub scene_b_features: BTreeMap<String, f64>,
    #[serde(default)]
    pub deltas: BTreeMap<String, f64>,
}

impl TransitionEvidence {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for key in self.deltas.keys() {
            if !self.scene_a_features.contains_key(key) && !self.scene_b_features.contains_key(key) {
                return Err(format!("delta `{key}` has no matching scene feature"));
            }
        }
        Ok(())
    }
}

pub type EvidenceStore = HashMap<String, TransitionEvidence>;

pub fn parse_evidence_jsonl<R: BufRead>(reader: R, source: &str) -> Result<EvidenceStore> {
    let mut store = EvidenceStore::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let location = format!("{source} line {}", idx + 1);
        let ev: TransitionEvidence =
            serde_json::from_str(&line).map_err(|e| Error::schema(&location, e.to_string()))?;
        ev.validate().map_err(|r| Error::schema(&location, r))?;
        if store.contains_key(&ev.transition_id) {
            return Err(Error::schema(
                &location,
                format!("duplicate transition `{}`", ev.transition_id),
            ));
        }
        store.insert(ev.transition_id.clone(), ev);
    }
    Ok(store)
}

pub fn load_evidence(path: &Path) -> Result<EvidenceStore> {
    parse_evidence_jsonl(BufReader::new(File::open(path)?), &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptTemplate {
    Default,
    ZeroShotCot,
}

impl PromptTemplate {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "default" => Ok(PromptTemplate::Default),
            "zero_shot_cot" => Ok(PromptTemplate::ZeroShotCot),
            other => Err(Error::UnknownTemplate(other.to_string())),
        }
    }

    fn instruction(self) -> &'static str {
        match self {
            PromptTemplate::Default => {
                "You are given feature measurements for two consecutive scenes of a music video. \
                 Use them to answer the multiple-choice question about how the visual change relates to the music."
            }
            PromptTemplate::ZeroShotCot => {
                "You are given feature measurements for two consecutive scenes of a music video. \
                 Think step by step: identify what changed visually, reason about how that change drives the music, \
                 then choose the best option."
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub use_ckg: bool,
    pub retrieval: RetrievalConfig,
    /// Applies to prediction items only.
    pub mask_scene_b_audio: bool,
    pub prompt_template_id: String,
    pub seed: u64,
    pub max_retries: usize,
    /// Parallel client calls; does not affect results.
    pub jobs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            use_ckg: false,
            retrieval: RetrievalConfig::vlm(),
            mask_scene_b_audio: true,
            prompt_template_id: "default".into(),
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            jobs: 1,
        }
    }
}

pub fn format_feature_value(v: f64) -> String {
    format!("{v:.4}")
}

fn push_features(out: &mut String, heading: &str, features: &BTreeMap<String, f64>, mask_audio: bool) {
    out.push_str(heading);
    out.push('\n');
    for (name, value) in features {
        let rendered = if mask_audio && is_audio_feature(name) {
            MASK_TOKEN.to_string()
        } else {
            format_feature_value(*value)
        };
        out.push_str(&format!("  {name}: {rendered}\n"));
    }
}

/// Deterministic prompt for one item. The causal context block appears only
/// when grounding is enabled.
pub fn build_prompt(
    item: &McqItem,
    evidence: &TransitionEvidence,
    context: Option<&str>,
    config: &EvalConfig,
) -> Result<String> {
    let template = PromptTemplate::from_id(&config.prompt_template_id)?;
    let context = match (config.use_ckg, context) {
        (true, None) => return Err(Error::MissingContext(item.item_id.clone())),
        (true, Some(c)) => Some(c),
        (false, _) => None,
    };
    let mask = config.mask_scene_b_audio && item.category == Category::Prediction;

    let mut out = String::new();
    out.push_str(template.instruction());
    out.push_str("\n\n");
    out.push_str(&format!("TRANSITION EVIDENCE ({}):\n", evidence.transition_id));
    push_features(&mut out, "Scene A:", &evidence.scene_a_features, false);
    push_features(&mut out, "Scene B:", &evidence.scene_b_features, mask);
    // an audio delta together with scene A would reveal scene B
    push_features(&mut out, "Change (B - A):", &evidence.deltas, mask);
    out.push('\n');
    if let Some(ctx) = context {
        out.push_str(CONTEXT_HEADER);
        out.push('\n');
        out.push_str(ctx.trim_end());
        out.push_str("\n\n");
    }
    out.push_str(&format!("QUESTION: {}\n\n", item.question.trim()));
    out.push_str("OPTIONS:\n");
    for (letter, option) in OPTION_LETTERS.iter().zip(&item.options) {
        out.push_str(&format!("{letter}. {}\n", option.trim()));
    }
    out.push('\n');
    out.push_str(ANSWER_INSTRUCTION);
    out.push('\n');
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParsedAnswer {
    Choice(usize),
    Unparseable,
}

static ANSWER_PATTERN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\banswer\s*(?:is\s*)?[:\-]?\s*\(?\s*([a-d])\b").expect("valid regex"));
static PAREN_PATTERN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\(\s*([a-d])\s*\)").expect("valid regex"));
static LETTER_PATTERN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b([a-d])\b").expect("valid regex"));

/// `Answer: X` / `answer is X` wins, then `(X)`, then the first standalone
/// option letter.
pub fn parse_answer(model_output: &str) -> ParsedAnswer {
    let found = [&*ANSWER_PATTERN, &*PAREN_PATTERN, &*LETTER_PATTERN]
        .iter()
        .find_map(|re| re.captures(model_output));
    match found {
        Some(caps) => {
            let letter = caps[1].chars().next().unwrap_or('?').to_ascii_uppercase();
            match OPTION_LETTERS.iter().position(|&l| l == letter) {
                Some(idx) => ParsedAnswer::Choice(idx),
                None => ParsedAnswer::Unparseable,
            }
        }
        None => ParsedAnswer::Unparseable,
    }
}

/// What a client sees for one item.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub item_id: &'a str,
    pub prompt: &'a str,
}

pub trait AnswerModel: Send + Sync {
    fn name(&self) -> String;

    /// Failures must be reported as [`Error::ClientFailure`].
    fn answer(&self, query: &Query<'_>) -> Result<String>;
}

/// Answers from the hidden key. For calibration only.
pub struct PerfectOracle {
    key: HashMap<String, usize>,
}

impl PerfectOracle {
    pub fn new(items: &[McqItem]) -> Self {
        Self {
            key: items.iter().map(|i| (i.item_id.clone(), i.correct_index)).collect(),
        }
    }
}

impl AnswerModel for PerfectOracle {
    fn name(&self) -> String {
        "perfect".into()
    }

    fn answer(&self, query: &Query<'_>) -> Result<String> {
        self.key
            .get(query.item_id)
            .map(|&i| format!("Answer: {}", OPTION_LETTERS[i]))
            .ok_or_else(|| Error::ClientFailure(format!("no key for item {}", query.item_id)))
    }
}

/// Uniform over the four letters. Each item gets its own stream derived from
/// (seed, item_id), so answers do not depend on call order.
pub struct UniformRandom {
    seed: u64,
}

impl UniformRandom {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl AnswerModel for UniformRandom {
    fn name(&self) -> String {
        format!("random(seed={})", self.seed)
    }

    fn answer(&self, query: &Query<'_>) -> Result<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(query.item_id.as_bytes()));
        Ok(OPTION_LETTERS[rng.gen_range(0..OPTION_COUNT)].to_string())
    }
}

pub struct FixedLetter {
    index: usize,
}

impl FixedLetter {
    pub fn new(letter: char) -> Result<Self> {
        OPTION_LETTERS
            .iter()
            .position(|&l| l == letter.to_ascii_uppercase())
            .map(|index| Self { index })
            .ok_or_else(|| Error::InvalidConfig(format!("fixed letter must be one of A-D, got `{letter}`")))
    }
}

impl AnswerModel for FixedLetter {
    fn name(&self) -> String {
        format!("fixed:{}", OPTION_LETTERS[self.index])
    }

    fn answer(&self, _query: &Query<'_>) -> Result<String> {
        Ok(OPTION_LETTERS[self.index].to_string())
    }
}

/// Chat-completions style endpoint: `POST {base_url}/chat/completions`.
pub struct RemoteHttp {
    base_url: String,
    model: String,
    token: Option<String>,
    seed: u64,
    client: reqwest::blocking::Client,
}

impl RemoteHttp {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        token: Option<String>,
        seed: u64,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::ClientFailure(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            token,
            seed,
            client,
        })
    }

    /// Reads the bearer token from `token_env` when set.
    pub fn from_env(base_url: impl Into<String>, model: impl Into<String>, token_env: &str, seed: u64) -> Result<Self> {
        Self::new(base_url, model, std::env::var(token_env).ok(), seed)
    }

    pub fn request_body(&self, prompt: &str) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
            "seed": self.seed,
        })
    }
}

/// Pull `choices[0].message.content` out of a chat-completions response.
pub fn extract_completion_text(response: &serde_json::Value) -> Result<String> {
    response
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::ClientFailure("response has no choices[0].message.content".into()))
}

impl AnswerModel for RemoteHttp {
    fn name(&self) -> String {
        format!("http:{}", self.model)
    }

    fn answer(&self, query: &Query<'_>) -> Result<String> {
        let mut req = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .json(&self.request_body(query.prompt));
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let response = req
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| Error::ClientFailure(e.to_string()))?;
        let body: serde_json::Value = response.json().map_err(|e| Error::ClientFailure(e.to_string()))?;
        extract_completion_text(&body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Ok,
    Unparseable,
    ClientFailure,
}

impl ParseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseStatus::Ok => "ok",
            ParseStatus::Unparseable => "unparseable",
            ParseStatus::ClientFailure => "client_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemOutcome {
    pub item_id: String,
    pub category: Category,
    pub chosen: Option<usize>,
    pub correct: usize,
    pub is_correct: bool,
    pub status: ParseStatus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryTally {
    pub asked: usize,
    /// Items for which the client returned a response.
    pub answered: usize,
    pub correct: usize,
    /// `correct / asked`; null when nothing was asked.
    pub accuracy: Option<f64>,
}

impl CategoryTally {
    fn record(&mut self, outcome: &ItemOutcome) {
        self.asked += 1;
        if outcome.status != ParseStatus::ClientFailure {
            self.answered += 1;
        }
        if outcome.is_correct {
            self.correct += 1;
        }
    }

    fn finish(&mut self) {
        self.accuracy = (self.asked > 0).then(|| self.correct as f64 / self.asked as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub client: String,
    pub use_ckg: bool,
    pub k: Option<usize>,
    pub boost_factor: Option<f64>,
    pub centrality: Option<Centrality>,
    pub mask_scene_b_audio: bool,
    pub prompt_template_id: String,
    pub seed: u64,
    pub max_retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<Category, CategoryTally>,
    pub overall: CategoryTally,
    pub unparseable: usize,
    pub client_failures: usize,
    pub config: ConfigEcho,
}

impl EvalReport {
    pub fn from_outcomes(outcomes: &[ItemOutcome], config: ConfigEcho) -> Self {
        let mut per_category: BTreeMap<Category, CategoryTally> =
            Category::ALL.iter().map(|&c| (c, CategoryTally::default())).collect();
        let mut overall = CategoryTally::default();
        let mut unparseable = 0;
        let mut client_failures = 0;
        for o in outcomes {
            per_category.entry(o.category).or_default().record(o);
            overall.record(o);
            match o.status {
                ParseStatus::Unparseable => unparseable += 1,
                ParseStatus::ClientFailure => client_failures += 1,
                ParseStatus::Ok => {}
            }
        }
        per_category.values_mut().for_each(CategoryTally::finish);
        overall.finish();
        Self {
            per_category,
            overall,
            unparseable,
            client_failures,
            config,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub outcomes: Vec<ItemOutcome>,
    pub prompts: Vec<String>,
}

fn query_with_retries(client: &dyn AnswerModel, query: &Query<'_>, max_retries: usize) -> Option<String> {
    (0..=max_retries).find_map(|_| client.answer(query).ok())
}

fn evaluate_item(
    item: &McqItem,
    evidence: &EvidenceStore,
    client: &dyn AnswerModel,
    graph: Option<&CausalGraph>,
    config: &EvalConfig,
) -> Result<(ItemOutcome, String)> {
    let ev = evidence
        .get(&item.transition_id)
        .ok_or_else(|| Error::MissingEvidence(item.transition_id.clone()))?;
    let context = match (config.use_ckg, graph) {
        (true, Some(g)) => Some(retrieval::render_context(&retrieval::retrieve(
            g,
            &item.question,
            &config.retrieval,
        )?)),
        (true, None) => return Err(Error::MissingGraph),
        (false, _) => None,
    };
    let prompt = build_prompt(item, ev, context.as_deref(), config)?;
    let query = Query {
        item_id: &item.item_id,
        prompt: &prompt,
    };
    let (chosen, status) = match query_with_retries(client, &query, config.max_retries) {
        None => (None, ParseStatus::ClientFailure),
        Some(text) => match parse_answer(&text) {
            ParsedAnswer::Choice(i) => (Some(i), ParseStatus::Ok),
            ParsedAnswer::Unparseable => (None, ParseStatus::Unparseable),
        },
    };
    let outcome = ItemOutcome {
        item_id: item.item_id.clone(),
        category: item.category,
        chosen,
        correct: item.correct_index,
        is_correct: chosen == Some(item.correct_index),
        status,
    };
    Ok((outcome, prompt))
}

/// Run every item through the client and tally the results. Items are
/// processed with up to `config.jobs` parallel calls; outcomes keep item order.
pub fn evaluate(
    items: &[McqItem],
    evidence: &EvidenceStore,
    client: &dyn AnswerModel,
    graph: Option<&CausalGraph>,
    config: &EvalConfig,
) -> Result<Evaluation> {
    PromptTemplate::from_id(&config.prompt_template_id)?;
    if config.use_ckg {
        if graph.is_none() {
            return Err(Error::MissingGraph);
        }
        config.retrieval.validate()?;
    }
    if let Some(missing) = items.iter().find(|i| !evidence.contains_key(&i.transition_id)) {
        return Err(Error::MissingEvidence(missing.transition_id.clone()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let results: Vec<(ItemOutcome, String)> = pool.install(|| {
        items
            .par_iter()
            .map(|item| evaluate_item(item, evidence, client, graph, config))
            .collect::<Result<_>>()
    })?;
    let (outcomes, prompts): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let echo = ConfigEcho {
        client: client.name(),
        use_ckg: config.use_ckg,
        k: config.use_ckg.then_some(config.retrieval.k),
        boost_factor: config.use_ckg.then_some(config.retrieval.boost_factor),
        centrality: config.use_ckg.then_some(config.retrieval.centrality),
        mask_scene_b_audio: config.mask_scene_b_audio,
        prompt_template_id: config.prompt_template_id.clone(),
        seed: config.seed,
        max_retries: config.max_retries,
    };
    Ok(Evaluation {
        report: EvalReport::from_outcomes(&outcomes, echo),
        outcomes,
        prompts,
    })
}

/// Per-item audit log: `item_id,category,chosen,correct,is_correct,parse_status`.
pub fn write_audit_csv<W: Write>(outcomes: &[ItemOutcome], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["item_id", "category", "chosen", "correct", "is_correct", "parse_status"])?;
    for o in outcomes {
        w.write_record([
            o.item_id.clone(),
            o.category.to_string(),
            o.chosen.map(|i| OPTION_LETTERS[i].to_string()).unwrap_or_default(),
            OPTION_LETTERS[o.correct].to_string(),
            o.is_correct.to_string(),
            o.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_audit_file(outcomes: &[ItemOutcome], path: &Path) -> Result<()> {
    write_audit_csv(outcomes, BufWriter::new(File::create(path)?))
}
