// SPDX-License-Identifier: Apache-2.0

//! Core IR types: phase executions, sea-of-nodes vertices, per-variant IR
//! graphs and the optimization-phase hypergraph built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Identifies the program variant an IR came from. `0` is the original
/// program; variants are numbered from `1`.
pub type IrId = u32;

/// The IR id reserved for the original (unmodified) program.
pub const ORIGINAL_IR: IrId = 0;

/// Delimiter joining execution ordinals of merged same-name hyperedges.
pub const HYPEREDGE_ID_DELIMITER: char = '@';

/// Node identifier, scoped to a single [`IrGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One run of an optimization phase within a compilation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseExecution {
    pub name: String,
    /// Position in the compiler's phase execution sequence.
    pub exec_ordinal: u32,
}

impl PhaseExecution {
    pub fn new(name: impl Into<String>, exec_ordinal: u32) -> Self {
        Self {
            name: name.into(),
            exec_ordinal,
        }
    }
}

impl fmt::Display for PhaseExecution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.exec_ordinal)
    }
}

/// Identity of a node that was folded into another during simplification.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AbsorbedNode {
    pub ir_id: IrId,
    pub node_id: NodeId,
    pub address: String,
}

/// A sea-of-nodes vertex with its basic and optimization attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrNode {
    pub node_id: NodeId,
    /// Lowercase hex machine address. Display only.
    pub address: String,
    pub opcode: String,
    pub ir_id: IrId,
    pub generated_in: PhaseExecution,
    pub optimized_in: Vec<PhaseExecution>,
    pub merged_from: Vec<AbsorbedNode>,
    pub multiplicity: u32,
}

impl IrNode {
    pub fn new(
        node_id: NodeId,
        address: impl Into<String>,
        opcode: impl Into<String>,
        ir_id: IrId,
        generated_in: PhaseExecution,
    ) -> Self {
        Self {
            node_id,
            address: address.into(),
            opcode: opcode.into(),
            ir_id,
            generated_in,
            optimized_in: Vec::new(),
            merged_from: Vec::new(),
            multiplicity: 1,
        }
    }

    pub fn optimized(mut self, phases: impl IntoIterator<Item = PhaseExecution>) -> Self {
        self.optimized_in.extend(phases);
        self
    }

    /// Names of every phase this node belongs to (generating and optimizing).
    pub fn phase_names(&self) -> BTreeSet<&str> {
        std::iter::once(self.generated_in.name.as_str())
            .chain(self.optimized_in.iter().map(|p| p.name.as_str()))
            .collect()
    }

    pub fn optimized_names(&self) -> BTreeSet<&str> {
        self.optimized_in.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn belongs_to_phase(&self, name: &str) -> bool {
        self.generated_in.name == name || self.optimized_in.iter().any(|p| p.name == name)
    }

    /// This node's own identity, as recorded when another node absorbs it.
    pub fn identity(&self) -> AbsorbedNode {
        AbsorbedNode {
            ir_id: self.ir_id,
            node_id: self.node_id,
            address: self.address.clone(),
        }
    }

    /// Folds `other` into `self`, keeping `self`'s attributes.
    pub(crate) fn absorb(&mut self, other: IrNode) {
        self.multiplicity += other.multiplicity;
        self.merged_from.push(other.identity());
        self.merged_from.extend(other.merged_from);
        self.merged_from.sort();
    }
}

/// Normalized undirected edge key: smaller endpoint first.
pub fn edge_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A simple undirected IR graph for one program variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrGraph {
    pub ir_id: IrId,
    pub nodes: BTreeMap<NodeId, IrNode>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
    pub phase_sequence: Vec<PhaseExecution>,
}

impl IrGraph {
    pub fn new(ir_id: IrId, phase_sequence: Vec<PhaseExecution>) -> Self {
        Self {
            ir_id,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            phase_sequence,
        }
    }

    pub fn add_node(&mut self, node: IrNode) {
        self.nodes.insert(node.node_id, node);
    }

    /// Inserts the undirected edge `a`–`b`. Returns false if it was present.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        self.edges.insert(edge_key(a, b))
    }

    pub fn node(&self, id: NodeId) -> Option<&IrNode> {
        self.nodes.get(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn next_node_id(&self) -> NodeId {
        self.nodes
            .keys()
            .next_back()
            .map_or(NodeId(0), |id| NodeId(id.0 + 1))
    }

    /// Adjacency sets for every node (isolated nodes map to an empty set).
    pub fn adjacency(&self) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
        let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> =
            self.nodes.keys().map(|&id| (id, BTreeSet::new())).collect();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    pub fn neighbors(&self, id: NodeId) -> BTreeSet<NodeId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == id {
                    Some(b)
                } else if b == id {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Distinct phase names in first-execution order.
    pub fn phase_names(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.phase_sequence
            .iter()
            .filter(|p| seen.insert(p.name.as_str()))
            .map(|p| p.name.as_str())
            .collect()
    }

    pub fn phase_by_ordinal(&self, ordinal: u32) -> Option<&PhaseExecution> {
        self.phase_sequence
            .iter()
            .find(|p| p.exec_ordinal == ordinal)
    }

    /// Total multiplicity over all nodes.
    pub fn mass(&self) -> u64 {
        self.nodes.values().map(|n| u64::from(n.multiplicity)).sum()
    }
}

/// Checks every graph and node invariant. An empty result means `g` is valid.
pub fn validate_ir_graph(g: &IrGraph) -> Vec<String> {
    let mut violations = Vec::new();

    let mut ordinals = BTreeSet::new();
    for phase in &g.phase_sequence {
        if phase.name.is_empty() {
            violations.push(format!(
                "phase execution {} has an empty name",
                phase.exec_ordinal
            ));
        }
        if !ordinals.insert(phase.exec_ordinal) {
            violations.push(format!(
                "duplicate exec_ordinal {} in phase_sequence",
                phase.exec_ordinal
            ));
        }
    }
    let known: BTreeSet<&PhaseExecution> = g.phase_sequence.iter().collect();

    for (&key, node) in &g.nodes {
        let id = node.node_id;
        if key != id {
            violations.push(format!("node {id} is stored under key {key}"));
        }
        if !known.contains(&node.generated_in) {
            violations.push(format!(
                "node {id} generated in {} which is not in phase_sequence",
                node.generated_in
            ));
        }
        let mut seen = BTreeSet::new();
        for phase in &node.optimized_in {
            if !seen.insert(phase) {
                violations.push(format!("node {id} lists optimizing phase {phase} twice"));
            }
            if *phase == node.generated_in {
                violations.push(format!(
                    "node {id} lists its generating phase {phase} as an optimizing phase"
                ));
            }
            if !known.contains(phase) {
                violations.push(format!(
                    "node {id} optimized in {phase} which is not in phase_sequence"
                ));
            }
        }
        if node.multiplicity as usize != 1 + node.merged_from.len() {
            violations.push(format!(
                "node {id} has multiplicity {} but absorbed {} nodes",
                node.multiplicity,
                node.merged_from.len()
            ));
        }
    }

    for &(a, b) in &g.edges {
        if a == b {
            violations.push(format!("self-loop at node {a}"));
            continue;
        }
        if b < a {
            violations.push(format!("edge ({a}, {b}) is not normalized"));
        }
        for end in [a, b] {
            if !g.nodes.contains_key(&end) {
                violations.push(format!("edge ({a}, {b}) references absent node {end}"));
            }
        }
    }
    violations
}

/// Hyperedge identifier: one execution ordinal, or several joined by `@`
/// in ascending order after same-name merging.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperedgeId(Vec<u32>);

impl HyperedgeId {
    pub fn single(ordinal: u32) -> Self {
        Self(vec![ordinal])
    }

    /// Builds an id from any ordinals; they are sorted ascending.
    pub fn from_ordinals(ordinals: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = ordinals.into_iter().collect();
        v.sort_unstable();
        Self(v)
    }

    pub fn ordinals(&self) -> &[u32] {
        &self.0
    }

    pub fn first_ordinal(&self) -> u32 {
        self.0.first().copied().unwrap_or(u32::MAX)
    }
}

impl fmt::Display for HyperedgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ord) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "{HYPEREDGE_ID_DELIMITER}")?;
            }
            write!(f, "{ord}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperedgeIdError {
    #[error("empty hyperedge id")]
    Empty,
    #[error("invalid ordinal {0:?} in hyperedge id")]
    BadOrdinal(String),
    #[error("ordinals in hyperedge id {0:?} are not strictly increasing")]
    NotIncreasing(String),
}

impl FromStr for HyperedgeId {
    type Err = HyperedgeIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(HyperedgeIdError::Empty);
        }
        let mut ordinals = Vec::new();
        for part in s.split(HYPEREDGE_ID_DELIMITER) {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(HyperedgeIdError::BadOrdinal(part.to_owned()));
            }
            let ord = part
                .parse::<u32>()
                .map_err(|_| HyperedgeIdError::BadOrdinal(part.to_owned()))?;
            if ordinals.last().is_some_and(|&prev| prev >= ord) {
                return Err(HyperedgeIdError::NotIncreasing(s.to_owned()));
            }
            ordinals.push(ord);
        }
        Ok(Self(ordinals))
    }
}

impl Serialize for HyperedgeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HyperedgeId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An optimization phase viewed as a set of stations (a metro line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub id: HyperedgeId,
    pub name: String,
    pub members: BTreeSet<NodeId>,
}

/// `H = (V, S)`: stations plus phase hyperedges.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Hypergraph {
    pub nodes: BTreeMap<NodeId, IrNode>,
    pub hyperedges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn is_empty(&self) -> bool {
        self.hyperedges.is_empty()
    }

    pub fn hyperedge(&self, name: &str) -> Option<&Hyperedge> {
        self.hyperedges.iter().find(|h| h.name == name)
    }

    /// Names of the hyperedges containing `station`, in hyperedge order.
    pub fn lines_of(&self, station: NodeId) -> Vec<&str> {
        self.hyperedges
            .iter()
            .filter(|h| h.members.contains(&station))
            .map(|h| h.name.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases() -> Vec<PhaseExecution> {
        vec![
            PhaseExecution::new("BytecodeGraphBuilder", 0),
            PhaseExecution::new("Inlining", 1),
            PhaseExecution::new("EarlyOptimization", 2),
        ]
    }

    fn fixture() -> IrGraph {
        let p = phases();
        let mut g = IrGraph::new(0, p.clone());
        g.add_node(IrNode::new(NodeId(1), "0x10", "parameter", 0, p[0].clone()));
        g.add_node(IrNode::new(NodeId(2), "0x18", "const", 0, p[0].clone()));
        g.add_node(
            IrNode::new(NodeId(3), "0x20", "add", 0, p[1].clone()).optimized([p[2].clone()]),
        );
        g.add_node(IrNode::new(NodeId(4), "0x28", "return", 0, p[0].clone()));
        g.add_edge(NodeId(1), NodeId(3));
        g.add_edge(NodeId(2), NodeId(3));
        g.add_edge(NodeId(3), NodeId(4));
        g
    }

    #[test]
    fn well_formed_fixture_has_no_violations() {
        assert_eq!(validate_ir_graph(&fixture()), Vec::<String>::new());
    }

    #[test]
    fn self_loop_is_reported() {
        let mut g = fixture();
        g.add_edge(NodeId(3), NodeId(3));
        assert_eq!(
            validate_ir_graph(&g),
            vec!["self-loop at node 3".to_owned()]
        );
    }

    #[test]
    fn generating_phase_listed_as_optimizing() {
        let mut g = fixture();
        let gen = g.nodes[&NodeId(2)].generated_in.clone();
        g.nodes.get_mut(&NodeId(2)).unwrap().optimized_in.push(gen);
        let v = validate_ir_graph(&g);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("node 2"));
    }

    #[test]
    fn unknown_phase_and_dangling_edge() {
        let mut g = fixture();
        g.nodes.get_mut(&NodeId(4)).unwrap().generated_in = PhaseExecution::new("Inlining", 7);
        g.add_edge(NodeId(1), NodeId(99));
        let v = validate_ir_graph(&g);
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v.iter().any(|s| s.contains("absent node 99")));
        assert!(v.iter().any(|s| s.contains("node 4")));
    }

    #[test]
    fn multiplicity_must_match_absorbed_count() {
        let mut g = fixture();
        g.nodes.get_mut(&NodeId(1)).unwrap().multiplicity = 2;
        assert_eq!(validate_ir_graph(&g).len(), 1);
    }

    #[test]
    fn hyperedge_id_round_trip_and_rejects() {
        let id: HyperedgeId = "1@3@12".parse().unwrap();
        assert_eq!(id.ordinals(), &[1, 3, 12]);
        assert_eq!(id.to_string(), "1@3@12");
        assert_eq!(HyperedgeId::single(7).to_string(), "7");
        assert!("3@1".parse::<HyperedgeId>().is_err());
        assert!("3@3".parse::<HyperedgeId>().is_err());
        assert!("".parse::<HyperedgeId>().is_err());
        assert!("1@@2".parse::<HyperedgeId>().is_err());
        assert!("+1".parse::<HyperedgeId>().is_err());
    }

    #[test]
    fn edges_are_normalized() {
        let mut g = fixture();
        assert!(!g.add_edge(NodeId(3), NodeId(1)));
        assert_eq!(
            g.neighbors(NodeId(3)),
            [NodeId(1), NodeId(2), NodeId(4)].into()
        );
    }
}
