//! Directed causal knowledge graph built from (source, relation, target)
//! triplets.
//!
//! Both the visual-change source descriptions and the music-state target
//! descriptions become nodes. Identical `(source, relation, target)` facts are
//! merged into one edge whose `multiplicity` counts the repeats. Self-loops are
//! kept. Once built or loaded the graph is immutable.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENTITY_FILE: &str = "entities.csv";
pub const RELATIONSHIP_FILE: &str = "relationships.csv";
pub const INGEST_REPORT_FILE: &str = "ingest_report.json";

const ENTITY_HEADER: [&str; 2] = ["id", "label"];
const RELATIONSHIP_HEADER: [&str; 5] = ["id", "from_id", "to_id", "relation", "multiplicity"];

/// One causal fact as it arrives on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub source: String,
    #[serde(default)]
    pub relation: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl TripletRecord {
    pub fn new(source: impl Into<String>, relation: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            relation: relation.into(),
            target: target.into(),
            provenance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: usize,
    pub label: String,
    /// Original surface forms merged into this node. Only the canonical label
    /// survives serialization.
    pub raw_labels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub relation: String,
    pub multiplicity: u64,
}

/// Why a triplet was not ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number for JSON-lines input, 0-based record index otherwise.
    pub position: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub merged_duplicates: usize,
    pub rejected: usize,
    pub rejections: Vec<Rejection>,
}

/// Trim, case-fold and collapse internal whitespace runs to a single space.
pub fn canonicalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Relations keep their case; only whitespace is normalized.
fn normalize_relation(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// An edge given by explicit node ids, as stored in the relationship table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub relation: String,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Default)]
pub struct CausalGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    out_adjacency: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
    out_degree: Vec<usize>,
    label_index: HashMap<String, usize>,
    edge_index: HashMap<(usize, String, usize), usize>,
}

impl CausalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a graph from canonical labels (node id = position) and edges
    /// (edge id = position). Labels must be canonical and unique, edges must
    /// reference existing nodes, and `(from, relation, to)` tuples must be unique.
    pub fn from_parts(labels: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut graph = CausalGraph::new();
        for (id, label) in labels.into_iter().enumerate() {
            if label.is_empty() || canonicalize_label(&label) != label {
                return Err(Error::schema(
                    format!("node {id}"),
                    format!("label `{label}` is not canonical"),
                ));
            }
            if graph.label_index.contains_key(&label) {
                return Err(Error::schema(
                    format!("node {id}"),
                    format!("duplicate label `{label}`"),
                ));
            }
            let raw = label.clone();
            graph.intern_node(label, &raw);
        }
        for (id, edge) in edges.into_iter().enumerate() {
            let location = format!("edge {id}");
            for endpoint in [edge.from, edge.to] {
                if endpoint >= graph.node_count() {
                    return Err(Error::schema(&location, format!("unknown node id {endpoint}")));
                }
            }
            if edge.multiplicity == 0 {
                return Err(Error::schema(&location, "multiplicity must be at least 1"));
            }
            if !graph.add_edge(edge.from, edge.relation, edge.to, edge.multiplicity) {
                return Err(Error::schema(
                    &location,
                    "duplicates an earlier (from, relation, to) tuple",
                ));
            }
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> Result<&NodeRecord> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn edge(&self, id: usize) -> Option<&EdgeRecord> {
        self.edges.get(id)
    }

    pub fn label(&self, id: usize) -> &str {
        &self.nodes[id].label
    }

    /// Looks up a node by any surface form of its label.
    pub fn node_id(&self, label: &str) -> Option<usize> {
        self.label_index.get(&canonicalize_label(label)).copied()
    }

    pub fn in_degree(&self, id: usize) -> usize {
        self.in_degree[id]
    }

    pub fn out_degree(&self, id: usize) -> usize {
        self.out_degree[id]
    }

    pub fn total_degree(&self, id: usize) -> usize {
        self.in_degree[id] + self.out_degree[id]
    }

    /// Edges leaving `node_id`, in insertion order.
    pub fn out_edges(&self, node_id: usize) -> Result<Vec<&EdgeRecord>> {
        let ids = self.out_adjacency.get(node_id).ok_or(Error::UnknownNode(node_id))?;
        Ok(ids.iter().map(|&e| &self.edges[e]).collect())
    }

    fn intern_node(&mut self, canonical: String, raw: &str) -> usize {
        if let Some(&id) = self.label_index.get(&canonical) {
            self.nodes[id].raw_labels.insert(raw.to_string());
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(NodeRecord {
            id,
            label: canonical.clone(),
            raw_labels: BTreeSet::from([raw.to_string()]),
        });
        self.out_adjacency.push(Vec::new());
        self.in_degree.push(0);
        self.out_degree.push(0);
        self.label_index.insert(canonical, id);
        id
    }

    /// Returns true when a new edge was created, false when an existing edge
    /// absorbed the fact.
    fn add_edge(&mut self, from: usize, relation: String, to: usize, multiplicity: u64) -> bool {
        let key = (from, relation, to);
        if let Some(&e) = self.edge_index.get(&key) {
            self.edges[e].multiplicity += multiplicity;
            return false;
        }
        let id = self.edges.len();
        self.edges.push(EdgeRecord {
            id,
            from,
            to,
            relation: key.1.clone(),
            multiplicity,
        });
        self.edge_index.insert(key, id);
        self.out_adjacency[from].push(id);
        self.out_degree[from] += 1;
        self.in_degree[to] += 1;
        true
    }

    /// Ingest one record, returning whether it merged into an existing edge.
    pub fn ingest(&mut self, record: &TripletRecord) -> std::result::Result<bool, String> {
        let source = canonicalize_label(&record.source);
        let target = canonicalize_label(&record.target);
        if source.is_empty() {
            return Err("empty source".into());
        }
        if target.is_empty() {
            return Err("empty target".into());
        }
        let from = self.intern_node(source, record.source.trim());
        let to = self.intern_node(target, record.target.trim());
        Ok(!self.add_edge(from, normalize_relation(&record.relation), to, 1))
    }
}

/// Build a graph from a stream of triplets. Malformed records are recorded in
/// the report and skipped.
pub fn ingest_triplets<I>(records: I) -> (CausalGraph, IngestReport)
where
    I: IntoIterator<Item = TripletRecord>,
{
    let mut graph = CausalGraph::new();
    let mut report = IngestReport::default();
    for (position, record) in records.into_iter().enumerate() {
        match graph.ingest(&record) {
            Ok(merged) => {
                report.accepted += 1;
                if merged {
                    report.merged_duplicates += 1;
                }
            }
            Err(reason) => {
                report.rejected += 1;
                report.rejections.push(Rejection { position, reason });
            }
        }
    }
    (graph, report)
}

/// Ingest JSON-lines triplets. Lines that fail to parse are rejected with their
/// 1-based line number; blank lines are skipped.
pub fn ingest_jsonl<R: BufRead>(reader: R) -> Result<(CausalGraph, IngestReport)> {
    let mut graph = CausalGraph::new();
    let mut report = IngestReport::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let position = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str::<TripletRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|rec| graph.ingest(&rec));
        match outcome {
            Ok(merged) => {
                report.accepted += 1;
                if merged {
                    report.merged_duplicates += 1;
                }
            }
            Err(reason) => {
                report.rejected += 1;
                report.rejections.push(Rejection { position, reason });
            }
        }
    }
    Ok((graph, report))
}

pub fn ingest_jsonl_file(path: &Path) -> Result<(CausalGraph, IngestReport)> {
    ingest_jsonl(BufReader::new(File::open(path)?))
}

/// Write the entity and relationship tables.
pub fn write_tables<W1: Write, W2: Write>(graph: &CausalGraph, entities: W1, relationships: W2) -> Result<()> {
    let mut ent = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(entities);
    ent.write_record(ENTITY_HEADER)?;
    for node in &graph.nodes {
        ent.write_record([node.id.to_string().as_str(), node.label.as_str()])?;
    }
    ent.flush()?;

    let mut rel = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(relationships);
    rel.write_record(RELATIONSHIP_HEADER)?;
    for edge in &graph.edges {
        rel.write_record([
            edge.id.to_string().as_str(),
            edge.from.to_string().as_str(),
            edge.to.to_string().as_str(),
            edge.relation.as_str(),
            edge.multiplicity.to_string().as_str(),
        ])?;
    }
    rel.flush()?;
    Ok(())
}

/// Serialize into `dir`, returning the entity and relationship table paths.
pub fn serialize_graph(graph: &CausalGraph, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let ent_path = dir.join(ENTITY_FILE);
    let rel_path = dir.join(RELATIONSHIP_FILE);
    write_tables(
        graph,
        BufWriter::new(File::create(&ent_path)?),
        BufWriter::new(File::create(&rel_path)?),
    )?;
    Ok((ent_path, rel_path))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str], table: &str) -> Result<()> {
    let header = rdr.headers()?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::schema(
            table,
            format!("expected header {:?}, found {:?}", expected, got),
        ));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(value: &str, location: &str, column: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::schema(location, format!("column `{column}`: cannot parse `{value}`")))
}

/// Rebuild a graph from its two tables. Ids must be dense and every edge must
/// reference existing nodes.
pub fn read_tables<R1: Read, R2: Read>(entities: R1, relationships: R2) -> Result<CausalGraph> {
    let mut ent = csv::ReaderBuilder::new().flexible(false).from_reader(entities);
    check_header(&mut ent, &ENTITY_HEADER, "entity table")?;
    let mut labels: Vec<Option<String>> = Vec::new();
    for (row, rec) in ent.records().enumerate() {
        let rec = rec?;
        let location = format!("entity table row {}", row + 2);
        let id: usize = parse_field(&rec[0], &location, "id")?;
        if id >= labels.len() {
            labels.resize(id + 1, None);
        }
        if labels[id].replace(rec[1].to_string()).is_some() {
            return Err(Error::schema(&location, format!("duplicate node id {id}")));
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(id, l)| l.ok_or_else(|| Error::schema("entity table", format!("node ids not dense: {id} missing"))))
        .collect::<Result<Vec<_>>>()?;

    let mut rel = csv::ReaderBuilder::new().flexible(false).from_reader(relationships);
    check_header(&mut rel, &RELATIONSHIP_HEADER, "relationship table")?;
    let mut rows: Vec<Option<EdgeSpec>> = Vec::new();
    for (row, rec) in rel.records().enumerate() {
        let rec = rec?;
        let location = format!("relationship table row {}", row + 2);
        let id: usize = parse_field(&rec[0], &location, "id")?;
        let spec = EdgeSpec {
            from: parse_field(&rec[1], &location, "from_id")?,
            to: parse_field(&rec[2], &location, "to_id")?,
            relation: rec[3].to_string(),
            multiplicity: parse_field(&rec[4], &location, "multiplicity")?,
        };
        if id >= rows.len() {
            rows.resize(id + 1, None);
        }
        if rows[id].replace(spec).is_some() {
            return Err(Error::schema(&location, format!("duplicate edge id {id}")));
        }
    }
    let edges = rows
        .into_iter()
        .enumerate()
        .map(|(id, r)| {
            r.ok_or_else(|| Error::schema("relationship table", format!("edge ids not dense: {id} missing")))
        })
        .collect::<Result<Vec<_>>>()?;

    CausalGraph::from_parts(labels, edges)
}

pub fn load_graph(entity_table: &Path, relationship_table: &Path) -> Result<CausalGraph> {
    read_tables(
        BufReader::new(File::open(entity_table)?),
        BufReader::new(File::open(relationship_table)?),
    )
}

/// Load from a directory holding `entities.csv` and `relationships.csv`.
pub fn load_graph_dir(dir: &Path) -> Result<CausalGraph> {
    load_graph(&dir.join(ENTITY_FILE), &dir.join(RELATIONSHIP_FILE))
}
