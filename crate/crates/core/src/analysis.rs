// SPDX-License-Identifier: Apache-2.0

//! Queries over the phase hypergraph: phase activity, phase overlap,
//! per-station phase attribution and bug-suspicion ranking.
//!
//! Counts are weighted by station multiplicity, so merging stations for
//! display never changes a reported count or ratio.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::diff_merge::{NodeSignature, PhaseDiff};
use crate::ir_model::{Hyperedge, HyperedgeId, Hypergraph, IrId, NodeId, ORIGINAL_IR};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("no phases")]
    NoPhases,
    #[error("unknown station {0}")]
    UnknownStation(NodeId),
}

/// Multiplicity-weighted member count of a line.
pub fn weighted_size(h: &Hypergraph, edge: &Hyperedge) -> u64 {
    edge.members
        .iter()
        .map(|m| h.nodes.get(m).map_or(1, |n| u64::from(n.multiplicity)))
        .sum()
}

fn weighted_foreign(h: &Hypergraph, edge: &Hyperedge) -> u64 {
    edge.members
        .iter()
        .filter_map(|m| h.nodes.get(m))
        .filter(|n| n.ir_id != ORIGINAL_IR)
        .map(|n| u64::from(n.multiplicity))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseActivity {
    pub name: String,
    pub id: HyperedgeId,
    pub member_count: u64,
}

/// The line with the most (weighted) members; ties go to the line that
/// ran first.
pub fn most_active_phase(h: &Hypergraph) -> Result<PhaseActivity, AnalysisError> {
    h.hyperedges
        .iter()
        .map(|e| (e, weighted_size(h, e)))
        .max_by(|(a, na), (b, nb)| {
            na.cmp(nb)
                .then_with(|| b.id.first_ordinal().cmp(&a.id.first_ordinal()))
        })
        .map(|(e, count)| PhaseActivity {
            name: e.name.clone(),
            id: e.id.clone(),
            member_count: count,
        })
        .ok_or(AnalysisError::NoPhases)
}

/// Pairwise station overlap between lines, indexed in hyperedge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationshipMatrix {
    pub names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl RelationshipMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<u64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.counts[i][j])
    }
}

/// Entry `(i, j)` is the number of stations shared by lines `i` and `j`; the
/// diagonal holds each line's station count.
pub fn phase_relationships(h: &Hypergraph) -> RelationshipMatrix {
    let n = h.hyperedges.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (i, ei) in h.hyperedges.iter().enumerate() {
        counts[i][i] = ei.members.len() as u64;
        for (j, ej) in h.hyperedges.iter().enumerate().skip(i + 1) {
            let (a, b) = (&ei.members, &ej.members);
            let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
            let shared = small.iter().filter(|m| large.contains(m)).count() as u64;
            counts[i][j] = shared;
            counts[j][i] = shared;
        }
    }
    RelationshipMatrix {
        names: h.hyperedges.iter().map(|e| e.name.clone()).collect(),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodePhases {
    pub generated: String,
    /// Optimizing phase names in execution order, each listed once.
    pub optimized: Vec<String>,
}

pub fn phases_of_node(h: &Hypergraph, station: NodeId) -> Result<NodePhases, AnalysisError> {
    let node = h
        .nodes
        .get(&station)
        .ok_or(AnalysisError::UnknownStation(station))?;
    let mut runs: Vec<_> = node.optimized_in.iter().collect();
    runs.sort_by_key(|p| p.exec_ordinal);
    let mut optimized: Vec<String> = Vec::new();
    for run in runs {
        if !optimized.contains(&run.name) {
            optimized.push(run.name.clone());
        }
    }
    Ok(NodePhases {
        generated: node.generated_in.name.clone(),
        optimized,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuspicionRecord<T> {
    pub name: String,
    pub id: HyperedgeId,
    pub member_count: u64,
    pub non_original_count: u64,
    /// `non_original_count / member_count`, in `[0, 1]`.
    pub suspicion: T,
}

impl<T: Scalar> Serialize for SuspicionRecord<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SuspicionRecord", 5)?;
        s.serialize_field("name", &self.name)?;
        s.serialize_field("id", &self.id)?;
        s.serialize_field("member_count", &self.member_count)?;
        s.serialize_field("non_original_count", &self.non_original_count)?;
        s.serialize_field("suspicion", &self.suspicion.to_f64_lossy())?;
        s.end()
    }
}

/// Original-IR signatures absent from one phase of one variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MissingOptimization {
    pub phase_name: String,
    pub variant_ir_id: IrId,
    pub signatures: Vec<NodeSignature>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SuspicionReport<T> {
    /// Sorted by suspicion, highest first; ties by name.
    pub records: Vec<SuspicionRecord<T>>,
    pub missing: Vec<MissingOptimization>,
}

impl<T: Scalar> SuspicionReport<T> {
    pub fn top(&self) -> Option<&SuspicionRecord<T>> {
        self.records.first()
    }

    pub fn record(&self, name: &str) -> Option<&SuspicionRecord<T>> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Fixed-width text table, one row per line.
    pub fn to_table(&self) -> String {
        let width = self
            .records
            .iter()
            .map(|r| r.name.len())
            .chain(["phase".len()])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<12}  {:>7}  {:>12}  {:>9}",
            "phase", "id", "members", "non-original", "suspicion"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:<width$}  {:<12}  {:>7}  {:>12}  {:>9.3}",
                r.name,
                r.id.to_string(),
                r.member_count,
                r.non_original_count,
                r.suspicion.to_f64_lossy()
            );
        }
        if !self.missing.is_empty() {
            let _ = writeln!(out, "\nmissing optimizations:");
            for m in &self.missing {
                let _ = writeln!(
                    out,
                    "  {} in variant {}: {} node(s) absent",
                    m.phase_name,
                    m.variant_ir_id,
                    m.signatures.len()
                );
            }
        }
        out
    }
}

/// Ranks lines by the weighted share of their members that come from
/// non-original IRs.
pub fn suspicion_ranking<T: Scalar>(h: &Hypergraph, diffs: &[PhaseDiff]) -> SuspicionReport<T> {
    let mut records: Vec<SuspicionRecord<T>> = h
        .hyperedges
        .iter()
        .map(|e| {
            let member_count = weighted_size(h, e);
            let non_original_count = weighted_foreign(h, e);
            SuspicionRecord {
                name: e.name.clone(),
                id: e.id.clone(),
                member_count,
                non_original_count,
                suspicion: T::ratio(non_original_count, member_count),
            }
        })
        .collect();
    records.sort_by(|a, b| {
        b.suspicion
            .partial_cmp(&a.suspicion)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    let missing = diffs
        .iter()
        .filter(|d| !d.missing_signatures.is_empty())
        .map(|d| MissingOptimization {
            phase_name: d.phase_name.clone(),
            variant_ir_id: d.variant_ir_id,
            signatures: d.missing_signatures.clone(),
        })
        .collect();
    SuspicionReport { records, missing }
}
