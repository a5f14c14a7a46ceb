// SPDX-License-Identifier: Apache-2.0

//! Structural comparison of variant IRs against the original and merging of
//! the differing nodes into one annotated IR.
//!
//! Nodes are compared by [`NodeSignature`], which ignores node ids and
//! addresses. Phases are compared by name, not by execution ordinal, since
//! ordinals shift between variants whenever the number of phase runs
//! differs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ir_model::{IrGraph, IrId, NodeId, PhaseExecution, ORIGINAL_IR};

/// Structural identity of a node: opcode, generating phase name and the
/// sorted multiset of neighbor opcodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeSignature {
    pub opcode: String,
    pub phase: String,
    pub neighbor_opcodes: Vec<String>,
}

/// How one phase of a variant differs from the same phase in the original.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseDiff {
    pub phase_name: String,
    pub variant_ir_id: IrId,
    /// Variant node ids with no counterpart in the original's phase.
    pub added_nodes: BTreeSet<NodeId>,
    /// Signatures present in the original's phase but not in the variant's,
    /// repeated once per missing node.
    pub missing_signatures: Vec<NodeSignature>,
}

/// Where a node of the merged IR came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub ir_id: IrId,
    pub node_id: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedIr {
    pub graph: IrGraph,
    pub diffs: Vec<PhaseDiff>,
    pub provenance: BTreeMap<NodeId, Provenance>,
}

pub fn node_signature(node: NodeId, g: &IrGraph) -> NodeSignature {
    let n = &g.nodes[&node];
    let mut neighbor_opcodes: Vec<String> = g
        .neighbors(node)
        .into_iter()
        .map(|m| g.nodes[&m].opcode.clone())
        .collect();
    neighbor_opcodes.sort();
    NodeSignature {
        opcode: n.opcode.clone(),
        phase: n.generated_in.name.clone(),
        neighbor_opcodes,
    }
}

/// Signatures of every node, computed from one adjacency pass.
fn all_signatures(g: &IrGraph) -> BTreeMap<NodeId, NodeSignature> {
    g.adjacency()
        .into_iter()
        .map(|(id, nbrs)| {
            let n = &g.nodes[&id];
            let mut neighbor_opcodes: Vec<String> =
                nbrs.iter().map(|m| g.nodes[m].opcode.clone()).collect();
            neighbor_opcodes.sort();
            let sig = NodeSignature {
                opcode: n.opcode.clone(),
                phase: n.generated_in.name.clone(),
                neighbor_opcodes,
            };
            (id, sig)
        })
        .collect()
}

/// Members of phase `name`, grouped by signature, ids ascending.
fn phase_groups<'a>(
    g: &IrGraph,
    sigs: &'a BTreeMap<NodeId, NodeSignature>,
    name: &str,
) -> BTreeMap<&'a NodeSignature, Vec<NodeId>> {
    let mut groups: BTreeMap<&NodeSignature, Vec<NodeId>> = BTreeMap::new();
    for (id, node) in &g.nodes {
        if node.belongs_to_phase(name) {
            groups.entry(&sigs[id]).or_default().push(*id);
        }
    }
    groups
}

fn all_phase_names<'a>(r0: &'a IrGraph, ri: &'a IrGraph) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    let referenced = |g: &'a IrGraph| {
        g.nodes.values().flat_map(|n| {
            std::iter::once(n.generated_in.name.as_str())
                .chain(n.optimized_in.iter().map(|p| p.name.as_str()))
        })
    };
    for name in r0
        .phase_names()
        .into_iter()
        .chain(ri.phase_names())
        .chain(referenced(r0))
        .chain(referenced(ri))
    {
        if seen.insert(name) {
            names.push(name);
        }
    }
    names
}

/// Compares each phase of `ri` with the same-named phase of `r0`. Phases
/// whose signature multisets agree produce no entry.
pub fn diff_variant(r0: &IrGraph, ri: &IrGraph) -> Vec<PhaseDiff> {
    let sigs0 = all_signatures(r0);
    let sigsi = all_signatures(ri);
    let mut diffs = Vec::new();
    for name in all_phase_names(r0, ri) {
        let groups0 = phase_groups(r0, &sigs0, name);
        let groupsi = phase_groups(ri, &sigsi, name);

        let mut added_nodes = BTreeSet::new();
        for (sig, ids) in &groupsi {
            let matched = groups0.get(sig).map_or(0, Vec::len);
            added_nodes.extend(ids.iter().skip(matched));
        }
        let mut missing_signatures = Vec::new();
        for (sig, ids) in &groups0 {
            let present = groupsi.get(sig).map_or(0, Vec::len);
            for _ in present..ids.len() {
                missing_signatures.push((*sig).clone());
            }
        }

        if !added_nodes.is_empty() || !missing_signatures.is_empty() {
            diffs.push(PhaseDiff {
                phase_name: name.to_owned(),
                variant_ir_id: ri.ir_id,
                added_nodes,
                missing_signatures,
            });
        }
    }
    diffs
}

/// Greedy whole-graph matching of `ri` nodes onto `r0` nodes with equal
/// signatures; within a signature the k-th smallest ids are paired.
pub fn match_by_signature(r0: &IrGraph, ri: &IrGraph) -> BTreeMap<NodeId, NodeId> {
    let mut pool: BTreeMap<NodeSignature, Vec<NodeId>> = BTreeMap::new();
    for (id, sig) in all_signatures(r0) {
        pool.entry(sig).or_default().push(id);
    }
    let mut taken: BTreeMap<NodeSignature, usize> = BTreeMap::new();
    let mut matching = BTreeMap::new();
    for (id, sig) in all_signatures(ri) {
        let Some(candidates) = pool.get(&sig) else {
            continue;
        };
        let next = taken.entry(sig).or_insert(0);
        if let Some(&target) = candidates.get(*next) {
            matching.insert(id, target);
            *next += 1;
        }
    }
    matching
}

/// Maps a variant's phase executions onto the merged graph's phase sequence:
/// the k-th run of a phase name maps to the k-th run of that name in the
/// merged sequence, and runs the merged sequence lacks are appended.
struct PhaseRemap {
    appended: BTreeMap<(String, usize), PhaseExecution>,
}

impl PhaseRemap {
    fn new() -> Self {
        Self {
            appended: BTreeMap::new(),
        }
    }

    fn map(
        &mut self,
        merged: &mut Vec<PhaseExecution>,
        variant_seq: &[PhaseExecution],
        phase: &PhaseExecution,
    ) -> PhaseExecution {
        let k = variant_seq
            .iter()
            .filter(|p| p.name == phase.name && p.exec_ordinal < phase.exec_ordinal)
            .count();
        let key = (phase.name.clone(), k);
        if let Some(p) = self.appended.get(&key) {
            return p.clone();
        }
        let mut runs: Vec<&PhaseExecution> =
            merged.iter().filter(|p| p.name == phase.name).collect();
        runs.sort_by_key(|p| p.exec_ordinal);
        if let Some(p) = runs.get(k) {
            return (*p).clone();
        }
        let next = merged.iter().map(|p| p.exec_ordinal + 1).max().unwrap_or(0);
        let fresh = PhaseExecution::new(phase.name.clone(), next);
        merged.push(fresh.clone());
        self.appended.insert(key, fresh.clone());
        fresh
    }
}

/// Merges every variant's differing nodes into a copy of `r0`.
///
/// Variants are applied in ascending `ir_id`. Added nodes get fresh ids and
/// keep their source `ir_id`. An added node is connected to the added nodes
/// of the same variant it was adjacent to, and to the `r0` node matched to
/// each of its other neighbors; adjacencies to unmatched neighbors are
/// dropped.
pub fn merge_candidates(r0: &IrGraph, variants: &[IrGraph]) -> MergedIr {
    let mut graph = r0.clone();
    let mut provenance: BTreeMap<NodeId, Provenance> = r0
        .nodes
        .keys()
        .map(|&id| {
            (
                id,
                Provenance {
                    ir_id: ORIGINAL_IR,
                    node_id: id,
                },
            )
        })
        .collect();
    let mut diffs = Vec::new();
    let mut remap = PhaseRemap::new();

    let mut ordered: Vec<&IrGraph> = variants.iter().collect();
    ordered.sort_by_key(|g| g.ir_id);

    for ri in ordered {
        let variant_diffs = diff_variant(r0, ri);
        if variant_diffs.is_empty() {
            continue;
        }
        let added: BTreeSet<NodeId> = variant_diffs
            .iter()
            .flat_map(|d| d.added_nodes.iter().copied())
            .collect();
        let matching = match_by_signature(r0, ri);

        let mut fresh: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for &old in &added {
            let mut node = ri.nodes[&old].clone();
            let new_id = graph.next_node_id();
            node.node_id = new_id;
            node.generated_in = remap.map(
                &mut graph.phase_sequence,
                &ri.phase_sequence,
                &node.generated_in,
            );
            node.optimized_in = node
                .optimized_in
                .iter()
                .map(|p| remap.map(&mut graph.phase_sequence, &ri.phase_sequence, p))
                .collect();
            graph.add_node(node);
            provenance.insert(
                new_id,
                Provenance {
                    ir_id: ri.ir_id,
                    node_id: old,
                },
            );
            fresh.insert(old, new_id);
        }

        for &(a, b) in &ri.edges {
            let endpoint = |x: NodeId| fresh.get(&x).or_else(|| matching.get(&x)).copied();
            if !(fresh.contains_key(&a) || fresh.contains_key(&b)) {
                continue;
            }
            if let (Some(x), Some(y)) = (endpoint(a), endpoint(b)) {
                graph.add_edge(x, y);
            }
        }
        diffs.extend(variant_diffs);
    }

    MergedIr {
        graph,
        diffs,
        provenance,
    }
}
