// SPDX-License-Identifier: Apache-2.0

//! Seeded generator of variant families with known injected differences.
//!
//! The original IR is a random connected sea-of-nodes graph. Clean variants
//! are copies with fresh node ids and addresses; buggy variants also gain
//! (or lose) a few nodes in one chosen phase. The returned [`GroundTruth`]
//! records exactly which nodes were injected.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::DumpBundle;
use crate::ir_model::{IrGraph, IrId, IrNode, NodeId, PhaseExecution, ORIGINAL_IR};

/// Phase names in pipeline order.
pub const PHASE_NAMES: &[&str] = &[
    "BytecodeGraphBuilder",
    "Inlining",
    "EarlyGraphTrimming",
    "Typer",
    "TypedLowering",
    "LoopPeeling",
    "LoadElimination",
    "EscapeAnalysis",
    "TypeAssertions",
    "SimplifiedLowering",
    "GenericLowering",
    "EarlyOptimization",
    "EffectLinearization",
    "DeadCodeElimination",
    "StoreStoreElimination",
    "ControlFlowOptimization",
    "MemoryOptimization",
    "LateOptimization",
    "MachineOperatorOptimization",
    "DecompressionOptimization",
    "LateGraphTrimming",
    "Scheduling",
];

/// Phases that may run more than once in one compilation.
const REPEATABLE_PHASES: &[&str] = &[
    "EarlyGraphTrimming",
    "TypedLowering",
    "LoadElimination",
    "DeadCodeElimination",
    "ControlFlowOptimization",
    "MemoryOptimization",
];

pub const OPCODES: &[&str] = &[
    "Start",
    "End",
    "Parameter",
    "Return",
    "NumberConstant",
    "HeapConstant",
    "Int32Constant",
    "Int32Add",
    "Int32Sub",
    "Float64Add",
    "NumberAdd",
    "SpeculativeNumberAdd",
    "Phi",
    "EffectPhi",
    "Merge",
    "Loop",
    "Branch",
    "IfTrue",
    "IfFalse",
    "LoadField",
    "StoreField",
    "LoadElement",
    "StoreElement",
    "CheckBounds",
    "CheckMaps",
    "Call",
    "FrameState",
];

const INJECTED_OPCODES: &[&str] = &[
    "CheckBounds",
    "CheckMaps",
    "CheckSmi",
    "CheckedTaggedToInt32",
    "LoadElement",
    "StoreElement",
];

/// Share of nodes created by the first (graph building) phase.
const BUILDER_SHARE: f64 = 0.4;
/// Probability that a node is touched by any later phase.
const OPTIMIZED_PROBABILITY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Injection {
    Added,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_variants: u32,
    pub min_nodes: u32,
    pub max_nodes: u32,
    pub min_phases: u32,
    pub max_phases: u32,
    pub buggy_phase: String,
    pub n_buggy_variants: u32,
    pub injection: Injection,
}

impl SynthSpec {
    /// Twenty graphs of 300–500 nodes with 30–40 phase runs, nine of the 19
    /// variants gaining nodes in `EarlyOptimization`.
    pub fn full_scale() -> Self {
        Self {
            n_variants: 19,
            min_nodes: 300,
            max_nodes: 500,
            min_phases: 30,
            max_phases: 40,
            buggy_phase: "EarlyOptimization".to_owned(),
            n_buggy_variants: 9,
            injection: Injection::Added,
        }
    }

    fn check(&self) -> Result<(), SynthError> {
        let in_range = |v: u32| (1..=10_000).contains(&v);
        if !(in_range(self.min_nodes)
            && in_range(self.max_nodes)
            && self.min_nodes <= self.max_nodes)
        {
            return Err(SynthError::InvalidSpec(format!(
                "node range {}..={} must lie within 1..=10000",
                self.min_nodes, self.max_nodes
            )));
        }
        if !(in_range(self.min_phases)
            && in_range(self.max_phases)
            && self.min_phases <= self.max_phases)
        {
            return Err(SynthError::InvalidSpec(format!(
                "phase range {}..={} must lie within 1..=10000",
                self.min_phases, self.max_phases
            )));
        }
        if self.n_variants > 10_000 {
            return Err(SynthError::InvalidSpec("at most 10000 variants".into()));
        }
        if self.n_buggy_variants > self.n_variants {
            return Err(SynthError::InvalidSpec(format!(
                "{} buggy variants requested but only {} variants",
                self.n_buggy_variants, self.n_variants
            )));
        }
        if !PHASE_NAMES.contains(&self.buggy_phase.as_str()) {
            return Err(SynthError::InvalidSpec(format!(
                "unknown phase {:?}; expected one of {}",
                self.buggy_phase,
                PHASE_NAMES.join(", ")
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error("phase {0} has no node to remove")]
    NothingToRemove(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub buggy_phase: String,
    pub injection: Injection,
    pub buggy_variants: Vec<IrId>,
    /// Added injection: new node ids in the variant. Removed injection: ids
    /// of the original-IR nodes left out of the variant.
    pub injected: BTreeMap<IrId, BTreeSet<NodeId>>,
}

pub fn generate_bundle(
    seed: u64,
    spec: &SynthSpec,
) -> Result<(DumpBundle, GroundTruth), SynthError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let phase_count = rng.gen_range(spec.min_phases..=spec.max_phases) as usize;
    let phases = phase_sequence(&mut rng, phase_count, &spec.buggy_phase);
    let node_count = rng.gen_range(spec.min_nodes..=spec.max_nodes);
    let original = original_ir(&mut rng, node_count, &phases);
    let buggy_run = phases
        .iter()
        .find(|p| p.name == spec.buggy_phase)
        .cloned()
        .expect("buggy phase is always scheduled");

    let mut variant_ids: Vec<IrId> = (1..=spec.n_variants).collect();
    variant_ids.shuffle(&mut rng);
    let mut buggy_variants: Vec<IrId> = variant_ids[..spec.n_buggy_variants as usize].to_vec();
    buggy_variants.sort_unstable();

    let mut variants = Vec::with_capacity(spec.n_variants as usize);
    let mut injected = BTreeMap::new();
    for ir_id in 1..=spec.n_variants {
        let buggy = buggy_variants.binary_search(&ir_id).is_ok();
        let removed = if buggy && spec.injection == Injection::Removed {
            let chosen = removal_targets(&mut rng, &original, &spec.buggy_phase)?;
            injected.insert(ir_id, chosen.clone());
            chosen
        } else {
            BTreeSet::new()
        };
        let mut variant = relabel(&mut rng, &original, ir_id, &removed);
        if buggy && spec.injection == Injection::Added {
            let added = inject_nodes(&mut rng, &mut variant, &buggy_run);
            injected.insert(ir_id, added);
        }
        variants.push(variant);
    }

    let metadata = BTreeMap::from([
        ("generator".to_owned(), "irviz-synth".to_owned()),
        ("seed".to_owned(), seed.to_string()),
    ]);
    let truth = GroundTruth {
        seed,
        buggy_phase: spec.buggy_phase.clone(),
        injection: spec.injection,
        buggy_variants,
        injected,
    };
    Ok((
        DumpBundle {
            original,
            variants,
            metadata,
        },
        truth,
    ))
}

fn phase_sequence(rng: &mut ChaCha8Rng, len: usize, required: &str) -> Vec<PhaseExecution> {
    let mut names: Vec<&str> = if len >= PHASE_NAMES.len() {
        PHASE_NAMES.to_vec()
    } else {
        // keep the required phase and the builder, sample the rest
        let mut optional: Vec<usize> = (1..PHASE_NAMES.len())
            .filter(|&i| PHASE_NAMES[i] != required)
            .collect();
        optional.shuffle(rng);
        let mut keep = BTreeSet::new();
        if let Some(i) = PHASE_NAMES.iter().position(|&n| n == required) {
            keep.insert(i);
        }
        if keep.len() < len {
            keep.insert(0);
        }
        for i in optional {
            if keep.len() >= len {
                break;
            }
            keep.insert(i);
        }
        keep.into_iter().map(|i| PHASE_NAMES[i]).collect()
    };
    while names.len() < len {
        let name = REPEATABLE_PHASES[rng.gen_range(0..REPEATABLE_PHASES.len())];
        let first = names.iter().position(|&n| n == name).unwrap_or(0);
        let at = rng.gen_range(first + 1..=names.len());
        names.insert(at, name);
    }
    names
        .into_iter()
        .enumerate()
        .map(|(i, name)| PhaseExecution::new(name, i as u32))
        .collect()
}

fn address(base: u64, index: u32) -> String {
    format!("0x{:x}", base + u64::from(index) * 0x20)
}

fn address_base(rng: &mut ChaCha8Rng) -> u64 {
    rng.gen_range(0x1000_0000u64..0x7000_0000) & !0xfff
}

fn original_ir(rng: &mut ChaCha8Rng, node_count: u32, phases: &[PhaseExecution]) -> IrGraph {
    let mut g = IrGraph::new(ORIGINAL_IR, phases.to_vec());
    let base = address_base(rng);
    for i in 0..node_count {
        let gen_index = if i == 0 || rng.gen_bool(BUILDER_SHARE) {
            0
        } else {
            rng.gen_range(0..phases.len())
        };
        let later = phases.len() - gen_index - 1;
        let mut optimized = BTreeSet::new();
        if later > 0 && rng.gen_bool(OPTIMIZED_PROBABILITY) {
            let runs = if rng.gen_bool(0.8) { 1 } else { 2 };
            for _ in 0..runs {
                optimized.insert(rng.gen_range(gen_index + 1..phases.len()));
            }
        }
        let opcode = if i == 0 {
            "Start"
        } else {
            OPCODES[rng.gen_range(0..OPCODES.len())]
        };
        g.add_node(
            IrNode::new(
                NodeId(i),
                address(base, i),
                opcode,
                ORIGINAL_IR,
                phases[gen_index].clone(),
            )
            .optimized(optimized.into_iter().map(|k| phases[k].clone())),
        );
        if i > 0 {
            let degree = rng.gen_range(1..=3u32.min(i));
            let mut targets = BTreeSet::new();
            while targets.len() < degree as usize {
                targets.insert(rng.gen_range(0..i));
            }
            for t in targets {
                g.add_edge(NodeId(t), NodeId(i));
            }
        }
    }
    g
}

fn removal_targets(
    rng: &mut ChaCha8Rng,
    original: &IrGraph,
    phase: &str,
) -> Result<BTreeSet<NodeId>, SynthError> {
    let mut candidates: Vec<NodeId> = original
        .nodes
        .values()
        .filter(|n| n.generated_in.name == phase)
        .map(|n| n.node_id)
        .collect();
    if candidates.is_empty() {
        candidates = original
            .nodes
            .values()
            .filter(|n| n.belongs_to_phase(phase))
            .map(|n| n.node_id)
            .collect();
    }
    if candidates.is_empty() {
        return Err(SynthError::NothingToRemove(phase.to_owned()));
    }
    candidates.shuffle(rng);
    let k = rng.gen_range(1..=3usize).min(candidates.len());
    Ok(candidates[..k].iter().copied().collect())
}

/// Copies `original` under fresh node ids and addresses, leaving out
/// `removed`.
fn relabel(
    rng: &mut ChaCha8Rng,
    original: &IrGraph,
    ir_id: IrId,
    removed: &BTreeSet<NodeId>,
) -> IrGraph {
    let mut fresh: Vec<u32> = (0..original.node_count() as u32).collect();
    fresh.shuffle(rng);
    let base = address_base(rng);
    let mapping: BTreeMap<NodeId, NodeId> = original
        .nodes
        .keys()
        .zip(&fresh)
        .map(|(&old, &new)| (old, NodeId(new)))
        .collect();

    let mut g = IrGraph::new(ir_id, original.phase_sequence.clone());
    for node in original.nodes.values() {
        if removed.contains(&node.node_id) {
            continue;
        }
        let mut copy = node.clone();
        copy.node_id = mapping[&node.node_id];
        copy.address = address(base, copy.node_id.0);
        copy.ir_id = ir_id;
        g.add_node(copy);
    }
    for &(a, b) in &original.edges {
        if removed.contains(&a) || removed.contains(&b) {
            continue;
        }
        g.add_edge(mapping[&a], mapping[&b]);
    }
    g
}

/// Appends a path of 2–3 new nodes generated in `phase`. The new nodes touch
/// no existing node, so every pre-existing node keeps its signature.
fn inject_nodes(rng: &mut ChaCha8Rng, g: &mut IrGraph, phase: &PhaseExecution) -> BTreeSet<NodeId> {
    let k = rng.gen_range(2..=3u32);
    let first = g.next_node_id().0;
    let base = address_base(rng);
    let mut added = BTreeSet::new();
    for i in 0..k {
        let id = NodeId(first + i);
        let opcode = INJECTED_OPCODES[rng.gen_range(0..INJECTED_OPCODES.len())];
        g.add_node(IrNode::new(
            id,
            address(base, id.0),
            opcode,
            g.ir_id,
            phase.clone(),
        ));
        if i > 0 {
            g.add_edge(NodeId(first + i - 1), id);
        }
        added.insert(id);
    }
    added
}
