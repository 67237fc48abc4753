//! Topology statistics over a [`CausalGraph`].
//!
//! All ratios use the directed convention: every edge record (self-loops
//! included) counts once toward E.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Initiator {
    pub label: String,
    pub out_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub average_degree: f64,
    pub root_node_count: usize,
    pub root_node_fraction: f64,
    pub community_count: usize,
    pub largest_community_size: usize,
    pub largest_community_fraction: f64,
    pub top_initiators: Vec<Initiator>,
}

/// E / (N·(N−1)).
pub fn density(graph: &CausalGraph) -> Result<f64> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::DegenerateGraph(format!(
            "density needs at least 2 nodes, got {n}"
        )));
    }
    Ok(graph.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// E / N.
pub fn average_degree(graph: &CausalGraph) -> Result<f64> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::DegenerateGraph("average degree of an empty graph".into()));
    }
    Ok(graph.edge_count() as f64 / n as f64)
}

/// Nodes with zero in-degree. A node fed only by its own self-loop is not a root.
pub fn root_node_census(graph: &CausalGraph) -> Result<(usize, f64)> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::DegenerateGraph("root census of an empty graph".into()));
    }
    let count = (0..n).filter(|&id| graph.in_degree(id) == 0).count();
    Ok((count, count as f64 / n as f64))
}

/// Nodes ranked by out-degree descending, ties by label ascending.
pub fn top_initiators(graph: &CausalGraph, n: usize) -> Vec<Initiator> {
    let mut ranked: Vec<usize> = (0..graph.node_count()).collect();
    ranked.sort_by(|&a, &b| {
        graph
            .out_degree(b)
            .cmp(&graph.out_degree(a))
            .then_with(|| graph.label(a).cmp(graph.label(b)))
    });
    ranked
        .into_iter()
        .take(n)
        .map(|id| Initiator {
            label: graph.label(id).to_string(),
            out_degree: graph.out_degree(id),
        })
        .collect()
}

/// Weakly connected components, largest first; equal sizes ordered by their
/// smallest member id. Members within a component are sorted ascending.
pub fn communities(graph: &CausalGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
    for edge in graph.edges() {
        undirected[edge.from].push(edge.to);
        undirected[edge.to].push(edge.from);
    }

    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v);
            for &w in &undirected[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    // discovery order already follows the smallest member, so a stable sort by
    // size keeps the secondary order
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));
    components
}

pub fn graph_summary(graph: &CausalGraph, top_n: usize) -> Result<GraphSummary> {
    let density = density(graph)?;
    let average_degree = average_degree(graph)?;
    let (root_node_count, root_node_fraction) = root_node_census(graph)?;
    let comps = communities(graph);
    let largest = comps.first().map_or(0, Vec::len);
    let n = graph.node_count();
    Ok(GraphSummary {
        node_count: n,
        edge_count: graph.edge_count(),
        density,
        average_degree,
        root_node_count,
        root_node_fraction,
        community_count: comps.len(),
        largest_community_size: largest,
        largest_community_fraction: largest as f64 / n as f64,
        top_initiators: top_initiators(graph, top_n),
    })
}
