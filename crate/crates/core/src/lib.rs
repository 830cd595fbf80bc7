//! Shapley-value explanations for graph classifiers under structural
//! externalities.
//!
//! Nodes of the input graph are players of a partition-function-form game.
//! For a coalition `S` embedded in a coalition structure `P`, the graph is
//! cut along the blocks of `P`, `S` splits into connected components, and
//! the coalition is worth the summed model score of those components. Node
//! importance is the externality-aware Shapley value of that game, computed
//! exactly for small graphs ([`game::exact_shapley`]) or estimated with an
//! unbiased two-permutation sampler ([`sampler::estimate_shapley`]).

pub mod datasets;
pub mod error;
pub mod eval;
pub mod explainer;
pub mod game;
pub mod gnn;
pub mod graph;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use explainer::{
    explain_graph, explain_link, explain_node, top_k_mask, ExplainConfig, ExplanationTask,
    ImportanceReport, TaskKind,
};
pub use game::{exact_shapley, network_value, transfer, GnnValueOracle, TableOracle, ValueOracle};
pub use gnn::{forward_class_score, init_model, ArchSpec, ModelSpec, Prediction, Scale};
pub use graph::{CoalitionStructure, Graph, NodeSet};
pub use sampler::{enumerate_sampler_expectation, estimate_shapley, SampleConfig, ShapleyEstimate};
