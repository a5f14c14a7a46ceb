// SPDX-License-Identifier: Apache-2.0

//! Display simplification of a merged IR: dead-node removal and twin merging.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir_model::{IrGraph, IrId, IrNode, NodeId};

/// Drops every node with no incident edge.
pub fn remove_dead_nodes(g: &IrGraph) -> IrGraph {
    let live: BTreeSet<NodeId> = g.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut out = g.clone();
    out.nodes.retain(|id, _| live.contains(id));
    out
}

/// Opcode, generating phase name, optimizing phase names and source IR.
/// Ordinals are deliberately absent: they differ between merged variants.
type MergeKey<'a> = (&'a str, &'a str, BTreeSet<&'a str>, IrId);

fn merge_key(n: &IrNode) -> MergeKey<'_> {
    (
        n.opcode.as_str(),
        n.generated_in.name.as_str(),
        n.optimized_names(),
        n.ir_id,
    )
}

/// Whether `a` and `b` may be folded into one node.
pub fn mergeable(a: NodeId, b: NodeId, g: &IrGraph) -> bool {
    let (Some(na), Some(nb)) = (g.node(a), g.node(b)) else {
        return false;
    };
    if a == b || merge_key(na) != merge_key(nb) {
        return false;
    }
    let mut left = g.neighbors(a);
    let mut right = g.neighbors(b);
    left.remove(&b);
    right.remove(&a);
    left == right
}

/// Merges mergeable pairs until none remain. The survivor of each merge is
/// the smaller id; it accumulates the absorbed node's multiplicity and
/// identity.
///
/// Mergeable nodes are twins: equal open neighborhoods when non-adjacent,
/// equal closed neighborhoods when adjacent. Each round buckets nodes by
/// both neighborhoods and folds every bucket into its minimum; folding one
/// bucket never splits another, and folding can expose new twins, so rounds
/// repeat until nothing changes.
pub fn merge_equivalent_nodes(g: &IrGraph) -> IrGraph {
    let mut out = g.clone();
    loop {
        let adj = out.adjacency();
        let mut open: BTreeMap<(MergeKey<'_>, &BTreeSet<NodeId>), Vec<NodeId>> = BTreeMap::new();
        let mut closed: BTreeMap<(MergeKey<'_>, BTreeSet<NodeId>), Vec<NodeId>> = BTreeMap::new();
        for (id, node) in &out.nodes {
            let nbrs = &adj[id];
            open.entry((merge_key(node), nbrs)).or_default().push(*id);
            let mut with_self = nbrs.clone();
            with_self.insert(*id);
            closed
                .entry((merge_key(node), with_self))
                .or_default()
                .push(*id);
        }

        let mut absorbed_into: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for bucket in open.into_values().chain(closed.into_values()) {
            if let Some((&survivor, rest)) = bucket.split_first() {
                for &other in rest {
                    absorbed_into.insert(other, survivor);
                }
            }
        }
        if absorbed_into.is_empty() {
            return out;
        }

        for (&gone, &survivor) in &absorbed_into {
            let node = out.nodes.remove(&gone).expect("bucketed node exists");
            out.nodes
                .get_mut(&survivor)
                .expect("survivor is never absorbed")
                .absorb(node);
        }
        out.edges
            .retain(|(a, b)| !absorbed_into.contains_key(a) && !absorbed_into.contains_key(b));
    }
}
