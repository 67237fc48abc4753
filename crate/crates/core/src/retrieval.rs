//! One-hop forward retrieval of causal facts for a question.
//!
//! Keywords pulled from the question select anchor nodes; every edge leaving an
//! anchor is a candidate. A candidate scores the anchor's degree centrality,
//! multiplied by `boost_factor` when its relation uses change-denoting
//! ("kinetic") vocabulary. The top `k` candidates are rendered as a context
//! block for prompt injection.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, EdgeRecord};

pub const DEFAULT_VLM_K: usize = 25;
pub const DEFAULT_THINKING_LLM_K: usize = 3;
pub const DEFAULT_BOOST_FACTOR: f64 = 1.5;
pub const NO_FACTS_SENTINEL: &str = "no causal facts retrieved";

pub const DEFAULT_KINETIC_LEXICON: &[&str] = &[
    "increase",
    "increased",
    "decrease",
    "decreased",
    "shift",
    "shifted",
    "change",
    "changed",
    "rise",
    "drop",
    "faster",
    "slower",
    "louder",
    "quieter",
    // inflections the matcher would otherwise miss under whole-token matching
    "increases",
    "increasing",
    "decreases",
    "decreasing",
    "shifts",
    "shifting",
    "changes",
    "changing",
    "rises",
    "rising",
    "rose",
    "drops",
    "dropping",
    "dropped",
];

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "and", "any", "are", "because", "been", "before", "being", "between", "both",
    "but", "can", "could", "did", "does", "doing", "during", "each", "for", "from", "had", "has", "have", "how",
    "into", "its", "may", "might", "more", "most", "not", "of", "off", "one", "only", "other", "over", "same",
    "should", "some", "such", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this",
    "those", "through", "under", "very", "was", "were", "what", "when", "where", "which", "while", "who", "why",
    "will", "with", "would", "you", "your",
];

/// Which degree feeds the centrality base weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centrality {
    #[default]
    Total,
    OutDegree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub k: usize,
    pub kinetic_lexicon: BTreeSet<String>,
    pub boost_factor: f64,
    pub stopwords: BTreeSet<String>,
    pub min_keyword_length: usize,
    #[serde(default)]
    pub centrality: Centrality,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self::vlm()
    }
}

fn lowercase_set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_lowercase()).collect()
}

impl RetrievalConfig {
    pub fn vlm() -> Self {
        Self {
            k: DEFAULT_VLM_K,
            kinetic_lexicon: lowercase_set(DEFAULT_KINETIC_LEXICON),
            boost_factor: DEFAULT_BOOST_FACTOR,
            stopwords: lowercase_set(DEFAULT_STOPWORDS),
            min_keyword_length: 3,
            centrality: Centrality::Total,
        }
    }

    pub fn thinking_llm() -> Self {
        Self {
            k: DEFAULT_THINKING_LLM_K,
            ..Self::vlm()
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// Add terms to the kinetic lexicon. Blank terms are ignored.
    pub fn extend_lexicon<I, S>(&mut self, terms: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for term in terms {
            let term = term.as_ref().trim().to_lowercase();
            if !term.is_empty() {
                self.kinetic_lexicon.insert(term);
            }
        }
    }

    /// Extend the lexicon from a file with one term per line; `#` starts a comment line.
    pub fn extend_lexicon_from_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.extend_lexicon(text.lines().filter(|l| !l.trim_start().starts_with('#')));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.boost_factor > 0.0 && self.boost_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "boost factor must be positive, got {}",
                self.boost_factor
            )));
        }
        if self
            .kinetic_lexicon
            .iter()
            .chain(&self.stopwords)
            .any(|w| w.trim().is_empty())
        {
            return Err(Error::InvalidConfig(
                "lexicon and stopwords must not contain empty terms".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFact {
    pub edge_id: usize,
    pub anchor_node_id: usize,
    pub source_label: String,
    pub relation: String,
    pub target_label: String,
    pub base_weight: f64,
    pub boosted: bool,
    pub score: f64,
}

/// Lowercase alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && haystack.windows(phrase.len()).any(|w| w == phrase)
}

/// Filtered unigrams (first occurrence kept) followed by the bigrams of
/// consecutive surviving unigrams.
pub fn extract_keywords(question: &str, config: &RetrievalConfig) -> Vec<String> {
    let mut seen = HashSet::new();
    let unigrams: Vec<String> = tokenize(question)
        .into_iter()
        .filter(|t| t.chars().count() >= config.min_keyword_length && !config.stopwords.contains(t))
        .filter(|t| seen.insert(t.clone()))
        .collect();
    let mut keywords = unigrams.clone();
    for pair in unigrams.windows(2) {
        let bigram = format!("{} {}", pair[0], pair[1]);
        if seen.insert(bigram.clone()) {
            keywords.push(bigram);
        }
    }
    keywords
}

/// Nodes whose label contains some keyword as a whole-token phrase.
pub fn match_anchors(graph: &CausalGraph, keywords: &[String]) -> BTreeSet<usize> {
    let phrases: Vec<Vec<String>> = keywords.iter().map(|k| tokenize(k)).filter(|p| !p.is_empty()).collect();
    if phrases.is_empty() {
        return BTreeSet::new();
    }
    graph
        .nodes()
        .iter()
        .filter(|node| {
            let label_tokens = tokenize(&node.label);
            phrases.iter().any(|p| contains_phrase(&label_tokens, p))
        })
        .map(|node| node.id)
        .collect()
}

pub fn is_kinetic(relation: &str, config: &RetrievalConfig) -> bool {
    let tokens = tokenize(relation);
    config
        .kinetic_lexicon
        .iter()
        .any(|term| contains_phrase(&tokens, &tokenize(term)))
}

pub fn degree_centrality(graph: &CausalGraph, node_id: usize, mode: Centrality) -> Result<f64> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::DegenerateGraph(format!(
            "degree centrality needs at least 2 nodes, got {n}"
        )));
    }
    graph.node(node_id)?;
    let degree = match mode {
        Centrality::Total => graph.total_degree(node_id),
        Centrality::OutDegree => graph.out_degree(node_id),
    };
    Ok(degree as f64 / (n as f64 - 1.0))
}

pub fn score_fact(
    graph: &CausalGraph,
    anchor_id: usize,
    edge: &EdgeRecord,
    config: &RetrievalConfig,
) -> Result<RankedFact> {
    if edge.from != anchor_id {
        return Err(Error::InvalidConfig(format!(
            "edge {} does not leave anchor {anchor_id}",
            edge.id
        )));
    }
    let base_weight = degree_centrality(graph, anchor_id, config.centrality)?;
    let boosted = is_kinetic(&edge.relation, config);
    let score = if boosted {
        base_weight * config.boost_factor
    } else {
        base_weight
    };
    Ok(RankedFact {
        edge_id: edge.id,
        anchor_node_id: anchor_id,
        source_label: graph.label(edge.from).to_string(),
        relation: edge.relation.clone(),
        target_label: graph.label(edge.to).to_string(),
        base_weight,
        boosted,
        score,
    })
}

/// Total order used to rank facts: score descending, then anchor label, target
/// label and edge id ascending.
pub fn rank_order(a: &RankedFact, b: &RankedFact) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.source_label.cmp(&b.source_label))
        .then_with(|| a.target_label.cmp(&b.target_label))
        .then_with(|| a.edge_id.cmp(&b.edge_id))
}

pub fn retrieve(graph: &CausalGraph, question: &str, config: &RetrievalConfig) -> Result<Vec<RankedFact>> {
    config.validate()?;
    let anchors = match_anchors(graph, &extract_keywords(question, config));
    let mut best: Vec<RankedFact> = Vec::new();
    let mut slot_of_edge = std::collections::HashMap::new();
    for &anchor in &anchors {
        for edge in graph.out_edges(anchor)? {
            let fact = score_fact(graph, anchor, edge, config)?;
            match slot_of_edge.get(&edge.id) {
                Some(&slot) => {
                    let kept: &mut RankedFact = &mut best[slot];
                    if fact.score > kept.score {
                        *kept = fact;
                    }
                }
                None => {
                    slot_of_edge.insert(edge.id, best.len());
                    best.push(fact);
                }
            }
        }
    }
    best.sort_by(rank_order);
    best.truncate(config.k);
    Ok(best)
}

pub fn render_fact(fact: &RankedFact) -> String {
    format!(
        "- [score={:.4}] {} --({})--> {}",
        fact.score, fact.source_label, fact.relation, fact.target_label
    )
}

/// One line per fact in rank order, or the sentinel line when empty.
pub fn render_context(facts: &[RankedFact]) -> String {
    if facts.is_empty() {
        return NO_FACTS_SENTINEL.to_string();
    }
    facts.iter().map(render_fact).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ingest_triplets, TripletRecord};

    fn cfg_with_stopwords(words: &[&str]) -> RetrievalConfig {
        RetrievalConfig {
            stopwords: lowercase_set(words),
            ..RetrievalConfig::vlm()
        }
    }

    fn graph(edges: &[(&str, &str, &str)]) -> CausalGraph {
        ingest_triplets(edges.iter().map(|(s, r, t)| TripletRecord::new(*s, *r, *t))).0
    }

    #[test]
    fn keywords_from_question() {
        let cfg = cfg_with_stopwords(&["how", "does", "the"]);
        assert_eq!(
            extract_keywords("How does the tempo change?", &cfg),
            vec!["tempo", "change", "tempo change"]
        );
        assert!(extract_keywords("", &cfg).is_empty());
        let kw = extract_keywords("Will the GENRE shift to Pop?", &RetrievalConfig::vlm());
        for expected in ["genre", "shift", "pop"] {
            assert!(kw.contains(&expected.to_string()), "{kw:?}");
        }
        assert!(!kw.contains(&"to".to_string()));
    }

    #[test]
    fn keywords_deduplicate() {
        let cfg = cfg_with_stopwords(&[]);
        assert_eq!(extract_keywords("pop pop rock", &cfg), vec!["pop", "rock", "pop rock"]);
    }

    #[test]
    fn anchors_respect_token_boundaries() {
        let g = graph(&[("genre: pop", "r", "popular ballad")]);
        let anchors = match_anchors(&g, &["pop".to_string()]);
        assert_eq!(anchors, BTreeSet::from([0]));
        let anchors = match_anchors(&g, &["genre pop".to_string()]);
        assert_eq!(anchors, BTreeSet::from([0]));
    }

    #[test]
    fn anchors_on_synthetic_graph() {
        let g = graph(&[
            ("Motion: increased", "fast cuts drive energy", "Tempo: faster"),
            ("Brightness: decreased", "darker mood", "Mood: sad"),
            ("Tempo: faster", "momentum builds", "Loudness: increased"),
            ("Saturation: increased", "vivid colours", "Genre: Pop"),
            ("Contrast: shifted", "tension", "Key: minor"),
            ("Scene: crowd", "crowd noise", "Instruments: changed"),
        ]);
        // labels: motion: increased, tempo: faster, brightness: decreased, mood: sad,
        // loudness: increased, saturation: increased, genre: pop, contrast: shifted,
        // key: minor, scene: crowd, instruments: changed
        assert_eq!(g.node_count(), 11);
        let cfg = cfg_with_stopwords(&["how", "does", "the", "when"]);
        let kw = extract_keywords("How does the tempo change when motion increased?", &cfg);
        let anchors = match_anchors(&g, &kw);
        let expected: BTreeSet<usize> = [
            "motion: increased",
            "tempo: faster",
            "loudness: increased",
            "saturation: increased",
        ]
        .iter()
        .map(|l| g.node_id(l).unwrap())
        .collect();
        assert_eq!(anchors, expected);
    }

    #[test]
    fn score_fact_examples() {
        // anchor "a" has total degree 4 in a 5-node graph
        let g = graph(&[
            ("a", "holds steady", "b"),
            ("a", "loudness increases sharply", "c"),
            ("d", "r", "a"),
            ("e", "r", "a"),
        ]);
        assert_eq!(g.node_count(), 5);
        let a = g.node_id("a").unwrap();
        let cfg = RetrievalConfig::vlm();
        let edges = g.out_edges(a).unwrap();
        let plain = score_fact(&g, a, edges[0], &cfg).unwrap();
        assert_eq!((plain.base_weight, plain.score, plain.boosted), (1.0, 1.0, false));
        let boosted = score_fact(&g, a, edges[1], &cfg).unwrap();
        assert_eq!((boosted.base_weight, boosted.score, boosted.boosted), (1.0, 1.5, true));

        let d = g.node_id("d").unwrap();
        assert!(score_fact(&g, d, edges[0], &cfg).is_err());

        let out_only = RetrievalConfig {
            centrality: Centrality::OutDegree,
            ..cfg
        };
        assert_eq!(score_fact(&g, a, edges[0], &out_only).unwrap().base_weight, 0.5);
    }

    #[test]
    fn kinetic_terms_match_whole_tokens() {
        let cfg = RetrievalConfig::vlm();
        assert!(is_kinetic("Tempo SHIFTED upward", &cfg));
        assert!(!is_kinetic("a shiftless groove", &cfg));
        assert!(!is_kinetic("", &cfg));
    }

    #[test]
    fn retrieve_no_match_is_empty() {
        let g = graph(&[("a", "r", "b")]);
        assert!(retrieve(&g, "nothing relevant here", &RetrievalConfig::vlm())
            .unwrap()
            .is_empty());
        assert!(retrieve(&g, "", &RetrievalConfig::vlm()).unwrap().is_empty());
    }

    #[test]
    fn retrieve_tie_break_and_truncation() {
        let g = graph(&[
            ("tempo", "r1", "zeta"),
            ("tempo", "r2", "alpha"),
            ("tempo", "r3", "mid"),
        ]);
        let cfg = RetrievalConfig::vlm().with_k(2);
        let facts = retrieve(&g, "tempo", &cfg).unwrap();
        assert_eq!(facts.len(), 2);
        assert_eq!(facts[0].target_label, "alpha");
        assert_eq!(facts[1].target_label, "mid");
    }

    #[test]
    fn retrieve_is_forward_only() {
        let g = graph(&[("cause", "r", "tempo"), ("tempo", "r", "effect")]);
        let facts = retrieve(&g, "tempo", &RetrievalConfig::vlm()).unwrap();
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].source_label, "tempo");
    }

    #[test]
    fn invalid_config_rejected() {
        let g = graph(&[("a", "r", "b")]);
        assert!(retrieve(&g, "a", &RetrievalConfig::vlm().with_k(0)).is_err());
        let cfg = RetrievalConfig {
            boost_factor: 0.0,
            ..RetrievalConfig::vlm()
        };
        assert!(retrieve(&g, "a", &cfg).is_err());
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_context(&[]), "no causal facts retrieved");
        let fact = RankedFact {
            edge_id: 0,
            anchor_node_id: 0,
            source_label: "a".into(),
            relation: "shift up".into(),
            target_label: "b".into(),
            base_weight: 1.0,
            boosted: true,
            score: 1.5,
        };
        assert_eq!(
            render_context(std::slice::from_ref(&fact)),
            "- [score=1.5000] a --(shift up)--> b"
        );
        let facts = vec![
            fact.clone(),
            RankedFact {
                score: 1.0,
                ..fact.clone()
            },
            RankedFact { score: 0.5, ..fact },
        ];
        let text = render_context(&facts);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("- [score=0.5000]"));
    }
}
