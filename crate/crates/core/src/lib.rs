//! Causal knowledge graph engine for audio-visual reasoning.
//!
//! Visual-change → music-change triplets are ingested into a directed graph
//! ([`graph`]), summarized topologically ([`analytics`]), and queried one hop
//! forward to ground multiple-choice questions ([`retrieval`], [`eval`]).
//! [`features`] and [`stats`] compute the per-scene visual measurements and
//! the cross-modal rank correlations.

pub mod analytics;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod retrieval;
pub mod stats;

pub use analytics::{graph_summary, GraphSummary};
pub use error::{Error, Result};
pub use eval::{evaluate, AnswerModel, EvalConfig, EvalReport, McqItem, TransitionEvidence};
pub use features::{Frame, SceneVisualFeatures};
pub use graph::{ingest_triplets, CausalGraph, EdgeRecord, EdgeSpec, NodeRecord, TripletRecord};
pub use retrieval::{retrieve, RankedFact, RetrievalConfig};
pub use stats::{CorrelationMatrix, FeatureTable};
