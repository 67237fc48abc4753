//! Fixtures and brute-force oracles shared by the integration suites. Oracles
//! here deliberately avoid the crate's own helpers (tokenizer, degree
//! counters, component search) so that they check the implementation rather
//! than mirror it.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use ckg_core::graph::{CausalGraph, EdgeSpec};
use ckg_core::RetrievalConfig;
use rand::seq::SliceRandom;
use rand::Rng;

pub const FEATURE_WORDS: &[&str] = &[
    "genre",
    "pop",
    "rock",
    "tempo",
    "faster",
    "slower",
    "mood",
    "sad",
    "happy",
    "motion",
    "brightness",
    "contrast",
    "saturation",
    "loudness",
    "key",
    "minor",
    "major",
    "instruments",
    "guitar",
    "piano",
    "vocals",
    "energy",
];

pub const RELATIONS: &[&str] = &[
    "cuts accelerate so tempo increases",
    "darker lighting shifts the mood",
    "crowd appears",
    "camera holds still",
    "colour palette changed abruptly",
    "scene brightens and music gets louder",
    "steady framing",
    "energy drop after the chorus",
    "vocal line enters",
    "sustained harmony",
];

/// Random graph with up to `max_nodes` nodes and `max_edges` distinct edges.
/// Labels are one or two feature words joined like "tempo: faster".
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, max_edges: usize) -> CausalGraph {
    let n = rng.gen_range(2..=max_nodes);
    let mut labels = BTreeSet::new();
    while labels.len() < n {
        let a = FEATURE_WORDS.choose(rng).unwrap();
        let label = if rng.gen_bool(0.7) {
            format!("{a}: {}", FEATURE_WORDS.choose(rng).unwrap())
        } else {
            format!("{a} {}", rng.gen_range(0..50))
        };
        labels.insert(label);
    }
    let mut labels: Vec<String> = labels.into_iter().collect();
    labels.shuffle(rng);

    let m = rng.gen_range(0..=max_edges);
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for _ in 0..m {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        let relation = RELATIONS.choose(rng).unwrap().to_string();
        if seen.insert((from, relation.clone(), to)) {
            edges.push(EdgeSpec {
                from,
                to,
                relation,
                multiplicity: rng.gen_range(1..4),
            });
        }
    }
    CausalGraph::from_parts(labels, edges).expect("valid random graph")
}

/// Arbitrary graph over anonymous labels, used where label text is irrelevant.
pub fn random_plain_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> (usize, Vec<(usize, usize)>, CausalGraph) {
    let n = rng.gen_range(1..=max_nodes);
    let m = rng.gen_range(0..=n * 2);
    let pairs: Vec<(usize, usize)> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(from, to))| EdgeSpec {
            from,
            to,
            relation: format!("r{i}"),
            multiplicity: 1,
        })
        .collect();
    let labels = (0..n).map(|i| format!("n{i}")).collect();
    (n, pairs, CausalGraph::from_parts(labels, edges).unwrap())
}

pub fn random_question<R: Rng>(rng: &mut R) -> String {
    let fillers = ["how", "does", "the", "will", "when", "what", "happen", "to", "if"];
    let len = rng.gen_range(0..8);
    let mut words: Vec<String> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.6) {
                FEATURE_WORDS.choose(rng).unwrap().to_string()
            } else {
                fillers.choose(rng).unwrap().to_string()
            }
        })
        .collect();
    if rng.gen_bool(0.3) {
        words.iter_mut().for_each(|w| *w = w.to_uppercase());
    }
    format!("{}?", words.join(" "))
}

// ---------------------------------------------------------------------------
// Retrieval oracle
// ---------------------------------------------------------------------------

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// " a b c " style padding makes whole-token containment a plain substring test.
fn padded(tokens: &[String]) -> String {
    format!(" {} ", tokens.join(" "))
}

pub fn oracle_keywords(question: &str, cfg: &RetrievalConfig) -> Vec<String> {
    let mut kept: Vec<String> = Vec::new();
    for w in words(question) {
        if w.chars().count() >= cfg.min_keyword_length && !cfg.stopwords.contains(&w) && !kept.contains(&w) {
            kept.push(w);
        }
    }
    let mut all = kept.clone();
    for i in 1..kept.len() {
        let bigram = format!("{} {}", kept[i - 1], kept[i]);
        if !all.contains(&bigram) {
            all.push(bigram);
        }
    }
    all
}

pub fn oracle_anchors(graph: &CausalGraph, question: &str, cfg: &RetrievalConfig) -> BTreeSet<usize> {
    let keywords = oracle_keywords(question, cfg);
    graph
        .nodes()
        .iter()
        .filter(|n| {
            let hay = padded(&words(&n.label));
            keywords.iter().any(|k| hay.contains(&padded(&words(k))))
        })
        .map(|n| n.id)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFact {
    pub edge_id: usize,
    pub anchor: usize,
    pub base_weight: f64,
    pub boosted: bool,
    pub score: f64,
}

/// Score every out-edge of every anchor, sort by the documented key, truncate.
pub fn oracle_retrieve(graph: &CausalGraph, question: &str, cfg: &RetrievalConfig) -> Vec<OracleFact> {
    let anchors = oracle_anchors(graph, question, cfg);
    let n = graph.node_count() as f64;
    let degree = |v: usize| {
        graph.edges().iter().filter(|e| e.from == v).count() + graph.edges().iter().filter(|e| e.to == v).count()
    };
    let mut facts: Vec<OracleFact> = graph
        .edges()
        .iter()
        .filter(|e| anchors.contains(&e.from))
        .map(|e| {
            let base = degree(e.from) as f64 / (n - 1.0);
            let rel = padded(&words(&e.relation));
            let boosted = cfg.kinetic_lexicon.iter().any(|t| rel.contains(&padded(&words(t))));
            OracleFact {
                edge_id: e.id,
                anchor: e.from,
                base_weight: base,
                boosted,
                score: if boosted { base * cfg.boost_factor } else { base },
            }
        })
        .collect();
    facts.sort_by_key(|f| {
        let e = &graph.edges()[f.edge_id];
        (
            Reverse(ordered(f.score)),
            graph.nodes()[e.from].label.clone(),
            graph.nodes()[e.to].label.clone(),
            f.edge_id,
        )
    });
    facts.truncate(cfg.k);
    facts
}

/// Order-preserving map from non-negative finite f64 to u64.
fn ordered(x: f64) -> u64 {
    assert!(x >= 0.0 && x.is_finite());
    x.to_bits()
}

// ---------------------------------------------------------------------------
// Union-find oracle
// ---------------------------------------------------------------------------

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components in the documented order: size descending, then smallest member.
pub fn oracle_components(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for &(a, b) in pairs {
        uf.union(a, b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = uf.find(v);
        groups.entry(r).or_default().push(v);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by_key(|c| (Reverse(c.len()), c[0]));
    comps
}

// ---------------------------------------------------------------------------
// Evaluation fixtures
// ---------------------------------------------------------------------------

use ckg_core::eval::{Category, EvidenceStore, McqItem, TransitionEvidence};

pub const AUDIO_NAMES: &[&str] = &["loudness", "tempo", "arousal", "valence"];
pub const VISUAL_NAMES: &[&str] = &["motion", "brightness", "contrast", "saturation", "tvi"];

/// One transition per item. Scene-B audio values sit in [7000, 8000) so their
/// rendered form cannot collide with any other number in a prompt.
pub fn eval_fixture<R: Rng>(rng: &mut R, n: usize, category: Option<Category>) -> (Vec<McqItem>, EvidenceStore) {
    let mut items = Vec::with_capacity(n);
    let mut store = EvidenceStore::new();
    for i in 0..n {
        let transition_id = format!("t{i}");
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        let mut d = BTreeMap::new();
        for name in VISUAL_NAMES {
            let (va, vb): (f64, f64) = (rng.gen(), rng.gen());
            a.insert(name.to_string(), va);
            b.insert(name.to_string(), vb);
            d.insert(name.to_string(), vb - va);
        }
        for name in AUDIO_NAMES {
            let va = rng.gen_range(0.0..90.0);
            let vb = rng.gen_range(7000.0..8000.0);
            a.insert(name.to_string(), va);
            b.insert(name.to_string(), vb);
            d.insert(name.to_string(), vb - va);
        }
        store.insert(
            transition_id.clone(),
            TransitionEvidence {
                transition_id: transition_id.clone(),
                scene_a_features: a,
                scene_b_features: b,
                deltas: d,
            },
        );
        let category = category.unwrap_or(Category::ALL[i % 3]);
        items.push(McqItem {
            item_id: format!("q{i:05}"),
            transition_id,
            category,
            question: format!("How does the tempo change as motion rises in transition {i}?"),
            options: [
                "Tempo rises with the visual energy".into(),
                "Tempo falls".into(),
                "Genre shifts to rock".into(),
                "No audible change".into(),
            ],
            correct_index: rng.gen_range(0..4),
        });
    }
    (items, store)
}
