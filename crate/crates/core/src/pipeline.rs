// SPDX-License-Identifier: Apache-2.0

//! End-to-end orchestration: merge, simplify, build the hypergraph, rank
//! phases and lay out the map.

use serde::Serialize;

use crate::analysis::{suspicion_ranking, SuspicionReport};
use crate::diff_merge::{merge_candidates, MergedIr};
use crate::graph_simplify::{merge_equivalent_nodes, remove_dead_nodes};
use crate::hypergraph::{
    extract_hypergraph, merge_same_name_hyperedges, merge_stations_by_opcode, validate_hypergraph,
};
use crate::ingest::DumpBundle;
use crate::ir_model::{validate_ir_graph, Hypergraph, IrGraph};
use crate::layout::{layout_map, validate_metro_map, LayoutError, MetroMap};
use crate::scalar::Scalar;

/// Which simplification passes run. All are on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub dead_removal: bool,
    pub node_merge: bool,
    pub hyperedge_merge: bool,
    pub station_merge: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            dead_removal: true,
            node_merge: true,
            hyperedge_merge: true,
            station_merge: true,
        }
    }
}

/// Sizes after one stage. `edges` is absent once the graph has become a
/// hypergraph; `hyperedges` is absent before.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub stage: &'static str,
    pub nodes: usize,
    pub edges: Option<usize>,
    pub hyperedges: Option<usize>,
}

impl StageSummary {
    fn graph(stage: &'static str, g: &IrGraph) -> Self {
        Self {
            stage,
            nodes: g.node_count(),
            edges: Some(g.edge_count()),
            hyperedges: None,
        }
    }

    fn hypergraph(stage: &'static str, h: &Hypergraph) -> Self {
        Self {
            stage,
            nodes: h.nodes.len(),
            edges: None,
            hyperedges: Some(h.hyperedges.len()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("stage {stage} produced an invalid result: {}", .violations.join("; "))]
    Invalid {
        stage: &'static str,
        violations: Vec<String>,
    },
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Clone)]
pub struct PipelineOutput<T> {
    pub merged: MergedIr,
    pub simplified: IrGraph,
    /// Hypergraph before any hypergraph reduction.
    pub extracted: Hypergraph,
    pub hypergraph: Hypergraph,
    pub report: SuspicionReport<T>,
    pub map: MetroMap<T>,
    pub stages: Vec<StageSummary>,
}

fn check(stage: &'static str, violations: Vec<String>) -> Result<(), PipelineError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::Invalid { stage, violations })
    }
}

pub fn run_pipeline<T: Scalar>(
    bundle: &DumpBundle,
    options: &PipelineOptions,
) -> Result<PipelineOutput<T>, PipelineError> {
    let mut stages = vec![StageSummary::graph("original", &bundle.original)];

    let merged = merge_candidates(&bundle.original, &bundle.variants);
    check("merge", validate_ir_graph(&merged.graph))?;
    stages.push(StageSummary::graph("merged", &merged.graph));

    let mut graph = merged.graph.clone();
    if options.dead_removal {
        graph = remove_dead_nodes(&graph);
        check("dead-node removal", validate_ir_graph(&graph))?;
        stages.push(StageSummary::graph("dead nodes removed", &graph));
    }
    if options.node_merge {
        graph = merge_equivalent_nodes(&graph);
        check("node merge", validate_ir_graph(&graph))?;
        stages.push(StageSummary::graph("nodes merged", &graph));
    }

    let extracted = extract_hypergraph(&graph);
    check(
        "hypergraph extraction",
        validate_hypergraph(&extracted, false),
    )?;
    stages.push(StageSummary::hypergraph("hypergraph", &extracted));

    let mut hypergraph = extracted.clone();
    if options.hyperedge_merge {
        hypergraph = merge_same_name_hyperedges(&hypergraph);
        check("hyperedge merge", validate_hypergraph(&hypergraph, true))?;
        stages.push(StageSummary::hypergraph("hyperedges merged", &hypergraph));
    }
    if options.station_merge {
        hypergraph = merge_stations_by_opcode(&hypergraph);
        check(
            "station merge",
            validate_hypergraph(&hypergraph, options.hyperedge_merge),
        )?;
        stages.push(StageSummary::hypergraph("stations merged", &hypergraph));
    }

    let report = suspicion_ranking(&hypergraph, &merged.diffs);
    let map = layout_map(&hypergraph, &report)?;
    check("layout", validate_metro_map(&map))?;

    Ok(PipelineOutput {
        merged,
        simplified: graph,
        extracted,
        hypergraph,
        report,
        map,
        stages,
    })
}

/// Renders stage summaries as an aligned text table.
pub fn stage_table(stages: &[StageSummary]) -> String {
    let dash = || "-".to_owned();
    let mut out = format!(
        "{:<20}  {:>6}  {:>6}  {:>10}\n",
        "stage", "nodes", "edges", "hyperedges"
    );
    for s in stages {
        out.push_str(&format!(
            "{:<20}  {:>6}  {:>6}  {:>10}\n",
            s.stage,
            s.nodes,
            s.edges.map_or_else(dash, |e| e.to_string()),
            s.hyperedges.map_or_else(dash, |e| e.to_string()),
        ));
    }
    out
}
