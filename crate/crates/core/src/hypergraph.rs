// SPDX-License-Identifier: Apache-2.0

//! Conversion of a simplified IR into an optimization-phase hypergraph and
//! the two hypergraph reductions: same-name hyperedge merging and
//! station merging.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir_model::{Hyperedge, HyperedgeId, Hypergraph, IrGraph, IrId, IrNode, NodeId};

/// One hyperedge per phase execution referenced by a node. A node belongs to
/// its generating execution and to each optimizing execution.
pub fn extract_hypergraph(g: &IrGraph) -> Hypergraph {
    let mut by_ordinal: BTreeMap<u32, Hyperedge> = BTreeMap::new();
    for (id, node) in &g.nodes {
        for phase in std::iter::once(&node.generated_in).chain(&node.optimized_in) {
            by_ordinal
                .entry(phase.exec_ordinal)
                .or_insert_with(|| Hyperedge {
                    id: HyperedgeId::single(phase.exec_ordinal),
                    name: phase.name.clone(),
                    members: BTreeSet::new(),
                })
                .members
                .insert(*id);
        }
    }
    Hypergraph {
        nodes: g.nodes.clone(),
        hyperedges: by_ordinal.into_values().collect(),
    }
}

/// Collapses hyperedges sharing a name. The merged id lists every source
/// ordinal ascending, joined by `@`; output order follows each name's first
/// ordinal.
pub fn merge_same_name_hyperedges(h: &Hypergraph) -> Hypergraph {
    let mut groups: BTreeMap<&str, (Vec<u32>, BTreeSet<NodeId>)> = BTreeMap::new();
    for edge in &h.hyperedges {
        let (ordinals, members) = groups.entry(edge.name.as_str()).or_default();
        ordinals.extend_from_slice(edge.id.ordinals());
        members.extend(&edge.members);
    }
    let mut hyperedges: Vec<Hyperedge> = groups
        .into_iter()
        .map(|(name, (ordinals, members))| Hyperedge {
            id: HyperedgeId::from_ordinals(ordinals),
            name: name.to_owned(),
            members,
        })
        .collect();
    hyperedges.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.name.cmp(&b.name)));
    Hypergraph {
        nodes: h.nodes.clone(),
        hyperedges,
    }
}

type StationKey<'a> = (&'a str, IrId, &'a str, BTreeSet<&'a str>);

fn station_key(n: &IrNode) -> StationKey<'_> {
    (
        n.opcode.as_str(),
        n.ir_id,
        n.generated_in.name.as_str(),
        n.optimized_names(),
    )
}

/// Folds stations with equal opcode, source IR, generating phase name and
/// optimizing phase names into the smallest id among them.
pub fn merge_stations_by_opcode(h: &Hypergraph) -> Hypergraph {
    let mut groups: BTreeMap<StationKey<'_>, Vec<NodeId>> = BTreeMap::new();
    for (id, node) in &h.nodes {
        groups.entry(station_key(node)).or_default().push(*id);
    }

    let mut nodes = BTreeMap::new();
    let mut absorbed = BTreeSet::new();
    for ids in groups.into_values() {
        let (first, rest) = ids.split_first().expect("groups are nonempty");
        let mut survivor = h.nodes[first].clone();
        for id in rest {
            survivor.absorb(h.nodes[id].clone());
            absorbed.insert(*id);
        }
        nodes.insert(*first, survivor);
    }

    let hyperedges = h
        .hyperedges
        .iter()
        .map(|edge| Hyperedge {
            id: edge.id.clone(),
            name: edge.name.clone(),
            members: edge.members.difference(&absorbed).copied().collect(),
        })
        .collect();
    Hypergraph { nodes, hyperedges }
}

/// Checks the hypergraph invariants; an empty result means `h` is valid.
/// `merged` additionally requires unique names and full membership by name.
pub fn validate_hypergraph(h: &Hypergraph, merged: bool) -> Vec<String> {
    let mut violations = Vec::new();
    let mut names = BTreeSet::new();
    for edge in &h.hyperedges {
        if edge.members.is_empty() {
            violations.push(format!("hyperedge {} ({}) is empty", edge.name, edge.id));
        }
        for m in &edge.members {
            if !h.nodes.contains_key(m) {
                violations.push(format!("hyperedge {} lists absent station {m}", edge.name));
            }
        }
        if !names.insert(edge.name.as_str()) && merged {
            violations.push(format!("hyperedge name {} is not unique", edge.name));
        }
    }
    for (id, node) in &h.nodes {
        let lines = h.lines_of(*id);
        if lines.is_empty() {
            violations.push(format!("station {id} is on no line"));
        }
        if merged {
            let expected = node.phase_names();
            let actual: BTreeSet<&str> = lines.into_iter().collect();
            if expected != actual {
                violations.push(format!(
                    "station {id} is on lines {actual:?} but belongs to phases {expected:?}"
                ));
            }
        }
    }
    violations
}
