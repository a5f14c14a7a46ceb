// SPDX-License-Identifier: Apache-2.0

//! Reading and writing IR dump files.
//!
//! A dump holds a whole variant family in one JSON document:
//!
//! ```json
//! { "metadata": {"program": "poc.js"},
//!   "graphs": [ { "ir_id": 0,
//!                 "phase_sequence": [{"name": "Inlining", "exec_ordinal": 0}],
//!                 "nodes": [{"node_id": 1, "address": "0x1f", "opcode": "add",
//!                            "generated_in": 0, "optimized_in": []},
//!                           {"node_id": 2, "address": "0x27", "opcode": "phi",
//!                            "generated_in": 0, "optimized_in": []}],
//!                 "edges": [[1, 2]] } ] }
//! ```
//!
//! `generated_in` and `optimized_in` refer to `exec_ordinal` values of the
//! same graph's `phase_sequence`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ir_model::{
    edge_key, validate_ir_graph, IrGraph, IrId, IrNode, NodeId, PhaseExecution,
    HYPEREDGE_ID_DELIMITER, ORIGINAL_IR,
};

/// The original IR plus its variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpBundle {
    pub original: IrGraph,
    pub variants: Vec<IrGraph>,
    pub metadata: BTreeMap<String, String>,
}

impl DumpBundle {
    pub fn graphs(&self) -> impl Iterator<Item = &IrGraph> {
        std::iter::once(&self.original).chain(&self.variants)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid dump: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("cannot write dump: {0}")]
    Unwritable(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct DumpDoc {
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    graphs: Vec<GraphDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    ir_id: IrId,
    phase_sequence: Vec<PhaseExecution>,
    nodes: Vec<NodeDoc>,
    edges: Vec<[u32; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    node_id: u32,
    address: String,
    opcode: String,
    generated_in: u32,
    optimized_in: Vec<u32>,
}

/// Parses and validates a dump. Every returned graph passes
/// [`validate_ir_graph`].
pub fn parse_dump(bytes: &[u8]) -> Result<DumpBundle, DumpError> {
    let doc: DumpDoc = serde_json::from_slice(bytes).map_err(|e| DumpError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut violations = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for g in &doc.graphs {
        if !seen_ids.insert(g.ir_id) {
            violations.push(format!("duplicate ir_id {}", g.ir_id));
        }
    }
    let originals = doc.graphs.iter().filter(|g| g.ir_id == ORIGINAL_IR).count();
    if originals == 0 {
        violations.push("no graph with ir_id 0".to_owned());
    }

    let mut graphs = Vec::with_capacity(doc.graphs.len());
    for g in doc.graphs {
        if let Some(graph) = build_graph(g, &mut violations) {
            graphs.push(graph);
        }
    }
    if !violations.is_empty() {
        return Err(DumpError::Validation(violations));
    }

    let pos = graphs
        .iter()
        .position(|g| g.ir_id == ORIGINAL_IR)
        .expect("checked above");
    let original = graphs.remove(pos);
    Ok(DumpBundle {
        original,
        variants: graphs,
        metadata: doc.metadata,
    })
}

fn build_graph(doc: GraphDoc, violations: &mut Vec<String>) -> Option<IrGraph> {
    let before = violations.len();
    let ir = doc.ir_id;

    let mut by_ordinal: BTreeMap<u32, PhaseExecution> = BTreeMap::new();
    for phase in &doc.phase_sequence {
        if phase.name.contains(HYPEREDGE_ID_DELIMITER) {
            violations.push(format!(
                "graph {ir}: phase name {:?} contains reserved character '{HYPEREDGE_ID_DELIMITER}'",
                phase.name
            ));
        }
        // duplicates are reported by validate_ir_graph below
        by_ordinal
            .entry(phase.exec_ordinal)
            .or_insert_with(|| phase.clone());
    }

    let mut graph = IrGraph::new(ir, doc.phase_sequence);
    let lookup = |ord: u32, node: u32, violations: &mut Vec<String>| {
        let found = by_ordinal.get(&ord).cloned();
        if found.is_none() {
            violations.push(format!(
                "graph {ir}: node {node} references unknown phase ordinal {ord}"
            ));
        }
        found
    };
    for n in doc.nodes {
        let generated = lookup(n.generated_in, n.node_id, violations);
        let optimized: Vec<PhaseExecution> = n
            .optimized_in
            .iter()
            .filter_map(|&ord| lookup(ord, n.node_id, violations))
            .collect();
        let id = NodeId(n.node_id);
        if graph.nodes.contains_key(&id) {
            violations.push(format!("graph {ir}: duplicate node_id {id}"));
            continue;
        }
        if let Some(generated) = generated {
            graph
                .add_node(IrNode::new(id, n.address, n.opcode, ir, generated).optimized(optimized));
        }
    }

    for [a, b] in doc.edges {
        let (a, b) = (NodeId(a), NodeId(b));
        for end in [a, b] {
            if !graph.nodes.contains_key(&end) {
                violations.push(format!(
                    "graph {ir}: edge ({a}, {b}) references absent node {end}"
                ));
            }
        }
        if !graph.add_edge(a, b) {
            violations.push(format!("graph {ir}: duplicate edge ({a}, {b})"));
        }
    }

    violations.extend(
        validate_ir_graph(&graph)
            .into_iter()
            .filter(|v| !v.contains("absent node"))
            .map(|v| format!("graph {ir}: {v}")),
    );
    (violations.len() == before).then_some(graph)
}

/// Serializes a bundle to the dump format. The original graph is written
/// first.
pub fn write_dump(bundle: &DumpBundle) -> Result<Vec<u8>, DumpError> {
    let graphs = bundle
        .graphs()
        .map(graph_doc)
        .collect::<Result<Vec<_>, _>>()?;
    let doc = DumpDoc {
        metadata: bundle.metadata.clone(),
        graphs,
    };
    let mut out =
        serde_json::to_vec_pretty(&doc).map_err(|e| DumpError::Unwritable(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn graph_doc(g: &IrGraph) -> Result<GraphDoc, DumpError> {
    let ir = g.ir_id;
    if let Some(p) = g
        .phase_sequence
        .iter()
        .find(|p| p.name.contains(HYPEREDGE_ID_DELIMITER))
    {
        return Err(DumpError::Unwritable(format!(
            "graph {ir}: phase name {:?} contains reserved character '{HYPEREDGE_ID_DELIMITER}'",
            p.name
        )));
    }
    let nodes = g
        .nodes
        .values()
        .map(|n| {
            if n.multiplicity != 1 || n.ir_id != ir {
                return Err(DumpError::Unwritable(format!(
                    "graph {ir}: node {} is a merged or foreign node",
                    n.node_id
                )));
            }
            Ok(NodeDoc {
                node_id: n.node_id.0,
                address: n.address.clone(),
                opcode: n.opcode.clone(),
                generated_in: n.generated_in.exec_ordinal,
                optimized_in: n.optimized_in.iter().map(|p| p.exec_ordinal).collect(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let edges = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let (a, b) = edge_key(a, b);
            [a.0, b.0]
        })
        .collect();
    Ok(GraphDoc {
        ir_id: ir,
        phase_sequence: g.phase_sequence.clone(),
        nodes,
        edges,
    })
}
