// SPDX-License-Identifier: Apache-2.0

//! Test-only fixtures and brute-force oracles. Nothing here calls the
//! library routine it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use irviz_core::ingest::DumpBundle;
use irviz_core::ir_model::{
    Hyperedge, HyperedgeId, Hypergraph, IrGraph, IrId, IrNode, NodeId, PhaseExecution,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn phases(names: &[&str]) -> Vec<PhaseExecution> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| PhaseExecution::new(*n, i as u32))
        .collect()
}

/// Random valid IR with up to `max_nodes` nodes drawn from small alphabets.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    opcodes: &[&str],
    phase_names: &[&str],
    ir_ids: &[IrId],
) -> IrGraph {
    let runs = rng.gen_range(1..=phase_names.len() + 2);
    let seq: Vec<PhaseExecution> = (0..runs)
        .map(|i| PhaseExecution::new(*phase_names.choose(rng).unwrap(), i as u32))
        .collect();
    let mut g = IrGraph::new(0, seq.clone());
    let n = rng.gen_range(0..=max_nodes);
    let mut ids: Vec<u32> = (0..(2 * n as u32 + 1)).collect();
    ids.shuffle(rng);
    ids.truncate(n);
    for &id in &ids {
        let gen = rng.gen_range(0..seq.len());
        let optimized: Vec<PhaseExecution> = (0..seq.len())
            .filter(|&k| k != gen && rng.gen_bool(0.3))
            .map(|k| seq[k].clone())
            .collect();
        let node = IrNode::new(
            NodeId(id),
            format!("0x{:x}", 0x1000 + id * 8),
            *opcodes.choose(rng).unwrap(),
            *ir_ids.choose(rng).unwrap(),
            seq[gen].clone(),
        )
        .optimized(optimized);
        g.add_node(node);
    }
    let density: f64 = rng.gen_range(0.0..0.5);
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            if rng.gen_bool(density) {
                g.add_edge(NodeId(ids[i]), NodeId(ids[j]));
            }
        }
    }
    g
}

fn neighbor_set(g: &IrGraph, v: NodeId) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    for &(a, b) in &g.edges {
        if a == v {
            out.insert(b);
        }
        if b == v {
            out.insert(a);
        }
    }
    out
}

pub fn oracle_mergeable(g: &IrGraph, a: NodeId, b: NodeId) -> bool {
    let (x, y) = (&g.nodes[&a], &g.nodes[&b]);
    let opt = |n: &IrNode| {
        n.optimized_in
            .iter()
            .map(|p| p.name.clone())
            .collect::<BTreeSet<_>>()
    };
    if x.opcode != y.opcode
        || x.generated_in.name != y.generated_in.name
        || opt(x) != opt(y)
        || x.ir_id != y.ir_id
    {
        return false;
    }
    let mut na = neighbor_set(g, a);
    let mut nb = neighbor_set(g, b);
    na.remove(&b);
    nb.remove(&a);
    na == nb
}

fn fold(g: &mut IrGraph, survivor: NodeId, gone: NodeId) {
    let absorbed = g.nodes.remove(&gone).unwrap();
    let s = g.nodes.get_mut(&survivor).unwrap();
    s.multiplicity += absorbed.multiplicity;
    s.merged_from.push(absorbed.identity());
    s.merged_from.extend(absorbed.merged_from);
    s.merged_from.sort();
    let edges: Vec<(NodeId, NodeId)> = g.edges.iter().copied().collect();
    g.edges.clear();
    for (a, b) in edges {
        let a = if a == gone { survivor } else { a };
        let b = if b == gone { survivor } else { b };
        if a != b {
            g.add_edge(a, b);
        }
    }
}

/// Literal scan: merge the first mergeable pair in ascending `(a, b)` order,
/// keep the smaller id, repeat.
pub fn oracle_merge_scan(g: &IrGraph) -> IrGraph {
    let mut g = g.clone();
    'outer: loop {
        let ids: Vec<NodeId> = g.nodes.keys().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if oracle_mergeable(&g, a, b) {
                    fold(&mut g, a, b);
                    continue 'outer;
                }
            }
        }
        return g;
    }
}

pub type AttrMultiset = Vec<(String, String, BTreeSet<String>, IrId, u32)>;

pub fn attr_multiset(g: &IrGraph) -> AttrMultiset {
    let mut v: AttrMultiset = g
        .nodes
        .values()
        .map(|n| {
            (
                n.opcode.clone(),
                n.generated_in.name.clone(),
                n.optimized_in.iter().map(|p| p.name.clone()).collect(),
                n.ir_id,
                n.multiplicity,
            )
        })
        .collect();
    v.sort();
    v
}

type GraphKey = (Vec<(NodeId, u32)>, Vec<(NodeId, NodeId)>);

/// Every fixpoint reachable by some order of pairwise merges.
pub fn all_merge_outcomes(g: &IrGraph) -> BTreeSet<AttrMultiset> {
    fn walk(g: &IrGraph, seen: &mut BTreeSet<GraphKey>, out: &mut BTreeSet<AttrMultiset>) {
        let key = (
            g.nodes
                .values()
                .map(|n| (n.node_id, n.multiplicity))
                .collect(),
            g.edges.iter().copied().collect(),
        );
        if !seen.insert(key) {
            return;
        }
        let ids: Vec<NodeId> = g.nodes.keys().copied().collect();
        let mut terminal = true;
        for &a in &ids {
            for &b in &ids {
                if a != b && oracle_mergeable(g, a, b) {
                    terminal = false;
                    let mut next = g.clone();
                    fold(&mut next, a, b);
                    walk(&next, seen, out);
                }
            }
        }
        if terminal {
            out.insert(attr_multiset(g));
        }
    }
    let mut out = BTreeSet::new();
    walk(g, &mut BTreeSet::new(), &mut out);
    out
}

/// Membership straight from the definition: a node is on the hyperedge of
/// its generating run and of every optimizing run.
pub fn brute_membership(g: &IrGraph) -> BTreeMap<u32, (String, BTreeSet<NodeId>)> {
    let mut out: BTreeMap<u32, (String, BTreeSet<NodeId>)> = BTreeMap::new();
    for run in &g.phase_sequence {
        let members: BTreeSet<NodeId> = g
            .nodes
            .values()
            .filter(|n| n.generated_in == *run || n.optimized_in.contains(run))
            .map(|n| n.node_id)
            .collect();
        if !members.is_empty() {
            out.insert(run.exec_ordinal, (run.name.clone(), members));
        }
    }
    out
}

/// Group-by-name with ids as sorted ordinals joined by '@'.
pub fn brute_group_by_name(h: &Hypergraph) -> BTreeMap<String, (String, BTreeSet<NodeId>)> {
    let mut ords: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut members: BTreeMap<String, BTreeSet<NodeId>> = BTreeMap::new();
    for e in &h.hyperedges {
        ords.entry(e.name.clone()).or_default().extend(
            e.id.to_string()
                .split('@')
                .map(|s| s.parse::<u32>().unwrap()),
        );
        members
            .entry(e.name.clone())
            .or_default()
            .extend(&e.members);
    }
    ords.into_iter()
        .map(|(name, mut o)| {
            o.sort();
            let id = o.iter().map(u32::to_string).collect::<Vec<_>>().join("@");
            let m = members.remove(&name).unwrap();
            (name, (id, m))
        })
        .collect()
}

pub fn brute_intersections(h: &Hypergraph) -> Vec<Vec<u64>> {
    h.hyperedges
        .iter()
        .map(|a| {
            h.hyperedges
                .iter()
                .map(|b| a.members.intersection(&b.members).count() as u64)
                .collect()
        })
        .collect()
}

/// Max by weighted count; among equals the smallest first ordinal.
pub fn brute_most_active(h: &Hypergraph) -> Option<(String, u64)> {
    let mut best: Option<(u64, u32, String)> = None;
    for e in &h.hyperedges {
        let count: u64 = e
            .members
            .iter()
            .map(|m| h.nodes[m].multiplicity as u64)
            .sum();
        let first = e.id.ordinals()[0];
        let better = match &best {
            None => true,
            Some((c, f, _)) => count > *c || (count == *c && first < *f),
        };
        if better {
            best = Some((count, first, e.name.clone()));
        }
    }
    best.map(|(c, _, n)| (n, c))
}

/// Random merged-style hypergraph: up to `max_lines` uniquely named lines
/// over up to `max_stations` stations, some foreign and some pre-merged.
pub fn random_hypergraph(rng: &mut ChaCha8Rng, max_lines: usize, max_stations: u32) -> Hypergraph {
    let lines = rng.gen_range(1..=max_lines);
    let stations = rng.gen_range(1..=max_stations);
    let mut ordinals: Vec<u32> = (0..(lines as u32 * 3)).collect();
    ordinals.shuffle(rng);
    let mut nodes = BTreeMap::new();
    for s in 0..stations {
        let mult = if rng.gen_bool(0.2) {
            rng.gen_range(2..4)
        } else {
            1
        };
        let ir = if rng.gen_bool(0.3) {
            rng.gen_range(1..5)
        } else {
            0
        };
        let mut n = IrNode::new(
            NodeId(s),
            format!("0x{s:x}"),
            "op",
            ir,
            PhaseExecution::new("P", rng.gen_range(0..50)),
        );
        n.multiplicity = mult;
        n.merged_from = (1..mult)
            .map(|k| {
                let mut id = n.identity();
                id.node_id = NodeId(1000 + s * 10 + k);
                id
            })
            .collect();
        nodes.insert(NodeId(s), n);
    }
    let hyperedges = (0..lines)
        .map(|i| {
            let members: BTreeSet<NodeId> = (0..stations)
                .filter(|_| rng.gen_bool(0.3))
                .map(NodeId)
                .collect();
            let mut ords = vec![ordinals[i * 2], ordinals[i * 2 + 1]];
            ords.truncate(rng.gen_range(1..=2));
            Hyperedge {
                id: HyperedgeId::from_ordinals(ords),
                name: format!("Phase{i}"),
                members,
            }
        })
        .collect();
    Hypergraph { nodes, hyperedges }
}

pub const CASE_PHASES: [&str; 5] = [
    "BytecodeGraphBuilder",
    "Inlining",
    "LoadElimination",
    "EarlyOptimization",
    "Scheduling",
];

/// Small original IR: `Phi` (2) feeds a `CheckBounds` (3) created by
/// LoadElimination; EarlyOptimization created `LoadField` (4) and
/// `StoreField` (5).
pub fn case_original() -> IrGraph {
    let p = phases(&CASE_PHASES);
    let mut g = IrGraph::new(0, p.clone());
    let spec: [(u32, &str, usize, &[usize]); 7] = [
        (0, "Start", 0, &[]),
        (1, "Parameter", 0, &[]),
        (2, "Phi", 1, &[]),
        (3, "CheckBounds", 2, &[]),
        (4, "LoadField", 3, &[]),
        (5, "StoreField", 3, &[]),
        (6, "Return", 0, &[4]),
    ];
    for (id, op, gen, opt) in spec {
        g.add_node(
            IrNode::new(NodeId(id), format!("0x5000{id:02x}"), op, 0, p[gen].clone())
                .optimized(opt.iter().map(|&k| p[k].clone())),
        );
    }
    for (a, b) in [(0, 1), (1, 2), (2, 3), (2, 4), (4, 5), (5, 6), (0, 6)] {
        g.add_edge(NodeId(a), NodeId(b));
    }
    g
}

/// Copy of [`case_original`] under reversed ids and new addresses. When
/// `buggy`, the `CheckBounds` node is created by EarlyOptimization instead
/// of LoadElimination.
pub fn case_variant(ir_id: IrId, buggy: bool) -> IrGraph {
    let r0 = case_original();
    let flip = |id: NodeId| NodeId(100 - id.0);
    let mut g = IrGraph::new(ir_id, r0.phase_sequence.clone());
    for n in r0.nodes.values() {
        let mut c = n.clone();
        c.node_id = flip(n.node_id);
        c.ir_id = ir_id;
        c.address = format!("0x{:x}", 0x9000 + ir_id * 0x100 + c.node_id.0);
        if buggy && n.opcode == "CheckBounds" {
            c.generated_in = r0.phase_sequence[3].clone();
        }
        g.add_node(c);
    }
    for &(a, b) in &r0.edges {
        g.add_edge(flip(a), flip(b));
    }
    g
}

/// Original plus 19 variants, nine of them buggy.
pub fn nine_of_eleven_bundle() -> DumpBundle {
    let buggy: BTreeSet<IrId> = [2, 3, 5, 7, 8, 11, 13, 17, 19].into();
    DumpBundle {
        original: case_original(),
        variants: (1..=19)
            .map(|i| case_variant(i, buggy.contains(&i)))
            .collect(),
        metadata: BTreeMap::from([("program".to_owned(), "case-study".to_owned())]),
    }
}

/// (opcode, generating phase name, sorted neighbor opcodes).
pub type SignatureTuple = (String, String, Vec<String>);

/// Signature multiset per phase name, computed by scanning the edge list.
pub fn brute_signature_counts(g: &IrGraph) -> BTreeMap<String, BTreeMap<SignatureTuple, usize>> {
    let mut out: BTreeMap<String, BTreeMap<SignatureTuple, usize>> = BTreeMap::new();
    for n in g.nodes.values() {
        let mut nbr: Vec<String> = neighbor_set(g, n.node_id)
            .into_iter()
            .map(|m| g.nodes[&m].opcode.clone())
            .collect();
        nbr.sort();
        let sig = (n.opcode.clone(), n.generated_in.name.clone(), nbr);
        let names: BTreeSet<String> = std::iter::once(n.generated_in.name.clone())
            .chain(n.optimized_in.iter().map(|p| p.name.clone()))
            .collect();
        for name in names {
            *out.entry(name).or_default().entry(sig.clone()).or_default() += 1;
        }
    }
    out
}

type OwnedStationKey = (String, IrId, String, BTreeSet<String>);

fn owned_station_key(n: &IrNode) -> OwnedStationKey {
    (
        n.opcode.clone(),
        n.ir_id,
        n.generated_in.name.clone(),
        n.optimized_in.iter().map(|p| p.name.clone()).collect(),
    )
}

/// Station merging by pairwise comparison: every station maps to the
/// smallest id sharing its key and each line is the image of its members.
pub fn brute_station_merge(h: &Hypergraph) -> Hypergraph {
    let survivor = |s: NodeId| {
        let key = owned_station_key(&h.nodes[&s]);
        *h.nodes
            .keys()
            .find(|t| owned_station_key(&h.nodes[t]) == key)
            .unwrap()
    };
    let mut nodes: BTreeMap<NodeId, IrNode> = BTreeMap::new();
    for &s in h.nodes.keys() {
        let t = survivor(s);
        if t == s {
            nodes.insert(s, h.nodes[&s].clone());
        }
    }
    for &s in h.nodes.keys() {
        let t = survivor(s);
        if t != s {
            let src = &h.nodes[&s];
            let dst = nodes.get_mut(&t).unwrap();
            dst.multiplicity += src.multiplicity;
            dst.merged_from.push(src.identity());
            dst.merged_from.extend(src.merged_from.iter().cloned());
        }
    }
    nodes.values_mut().for_each(|n| n.merged_from.sort());
    let hyperedges = h
        .hyperedges
        .iter()
        .map(|e| Hyperedge {
            id: e.id.clone(),
            name: e.name.clone(),
            members: e.members.iter().map(|&m| survivor(m)).collect(),
        })
        .collect();
    Hypergraph { nodes, hyperedges }
}

pub const NAME_PATTERNS: [[&str; 3]; 5] = [
    ["A", "A", "A"],
    ["A", "A", "B"],
    ["A", "B", "A"],
    ["A", "B", "B"],
    ["A", "B", "C"],
];

/// Node labels over three runs: a generating run plus a subset of the
/// other runs as optimizing runs.
fn run_labels() -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for gen in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != gen).collect();
        for mask in 0..4u32 {
            let opt = others
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &k)| k)
                .collect();
            out.push((gen, opt));
        }
    }
    out
}

fn multisets(
    n_labels: usize,
    size: usize,
    from: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for l in from..n_labels {
        cur.push(l);
        multisets(n_labels, size, l, cur, out);
        cur.pop();
    }
}

/// Every IR with at most `max_nodes` nodes over three phase runs (in each
/// of the five name patterns up to renaming), every multiset of run labels,
/// and opcodes assigned round-robin from a three-letter alphabet. Nodes
/// form a path; edges do not affect phase membership.
pub fn small_graph_family(max_nodes: usize) -> Vec<IrGraph> {
    let labels = run_labels();
    let mut combos = Vec::new();
    for size in 0..=max_nodes {
        multisets(labels.len(), size, 0, &mut Vec::new(), &mut combos);
    }
    let mut out = Vec::new();
    for pattern in NAME_PATTERNS {
        let seq = phases(&pattern);
        for combo in &combos {
            let mut g = IrGraph::new(0, seq.clone());
            for (i, &l) in combo.iter().enumerate() {
                let (gen, opt) = &labels[l];
                g.add_node(
                    IrNode::new(
                        NodeId(i as u32),
                        format!("0x{:x}", 0x100 + i),
                        ["a", "b", "c"][i % 3],
                        0,
                        seq[*gen].clone(),
                    )
                    .optimized(opt.iter().map(|&k| seq[k].clone())),
                );
                if i > 0 {
                    g.add_edge(NodeId(i as u32 - 1), NodeId(i as u32));
                }
            }
            out.push(g);
        }
    }
    out
}

/// Per line name: (weighted non-original count, weighted member count).
pub fn brute_suspicion(h: &Hypergraph) -> BTreeMap<String, (u64, u64)> {
    let mut out = BTreeMap::new();
    for e in &h.hyperedges {
        let mut foreign = 0;
        let mut total = 0;
        for m in &e.members {
            let n = &h.nodes[m];
            total += n.multiplicity as u64;
            if n.ir_id != 0 {
                foreign += n.multiplicity as u64;
            }
        }
        out.insert(e.name.clone(), (foreign, total));
    }
    out
}
