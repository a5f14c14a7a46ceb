// SPDX-License-Identifier: Apache-2.0

//! Deterministic schematic metro-map layout and the JSON payload handed to
//! the viewer.
//!
//! Lines get home rows in execution order, stations are spread along x in
//! generation-timeline order, and a station shared by several lines sits at
//! the median of their home rows.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::SuspicionReport;
use crate::ir_model::{AbsorbedNode, HyperedgeId, Hypergraph, IrId, IrNode, NodeId};
use crate::scalar::Scalar;

/// Grid units between adjacent line rows and adjacent station columns.
pub const GRID_STEP: i64 = 2;

/// Hover attributes of a station.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationAttributes {
    /// Name of the generating phase.
    pub phase: String,
    pub opcode: String,
    pub address: String,
    pub graph_id: IrId,
    /// Execution ordinal of the generating phase.
    pub phase_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Station {
    pub station_id: NodeId,
    pub x: i64,
    pub y: i64,
    pub label: String,
    pub attributes: StationAttributes,
    pub multiplicity: u32,
    pub merged_from: Vec<AbsorbedNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub id: HyperedgeId,
    pub color_index: u32,
    pub polyline: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct MetroMap<T> {
    pub stations: Vec<Station>,
    pub lines: Vec<Line>,
    pub report: SuspicionReport<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("cannot lay out an empty hypergraph")]
    Empty,
}

/// Sorts stations into generation-timeline order: generating execution
/// ordinal, then node id.
pub fn order_stations(
    nodes: &BTreeMap<NodeId, IrNode>,
    members: impl IntoIterator<Item = NodeId>,
) -> Vec<NodeId> {
    let mut ordered: Vec<NodeId> = members.into_iter().collect();
    ordered.sort_by_key(|id| {
        let ordinal = nodes
            .get(id)
            .map_or(u32::MAX, |n| n.generated_in.exec_ordinal);
        (ordinal, *id)
    });
    ordered
}

pub fn layout_map<T: Scalar>(
    h: &Hypergraph,
    report: &SuspicionReport<T>,
) -> Result<MetroMap<T>, LayoutError> {
    if h.hyperedges.is_empty() {
        return Err(LayoutError::Empty);
    }
    let mut line_order: Vec<usize> = (0..h.hyperedges.len()).collect();
    line_order.sort_by_key(|&i| h.hyperedges[i].id.first_ordinal());

    let mut rows_of: BTreeMap<NodeId, Vec<i64>> = BTreeMap::new();
    for (index, &i) in line_order.iter().enumerate() {
        let home = index as i64 * GRID_STEP;
        for m in &h.hyperedges[i].members {
            rows_of.entry(*m).or_default().push(home);
        }
    }

    let timeline = order_stations(&h.nodes, rows_of.keys().copied());
    let mut occupied = BTreeSet::new();
    let mut stations = Vec::with_capacity(timeline.len());
    for (rank, id) in timeline.iter().enumerate() {
        let node = &h.nodes[id];
        let mut rows = rows_of[id].clone();
        rows.sort_unstable();
        let x = rank as i64 * GRID_STEP;
        let mut y = rows[(rows.len() - 1) / 2];
        while !occupied.insert((x, y)) {
            y += 1;
        }
        stations.push(Station {
            station_id: *id,
            x,
            y,
            label: id.to_string(),
            attributes: StationAttributes {
                phase: node.generated_in.name.clone(),
                opcode: node.opcode.clone(),
                address: node.address.clone(),
                graph_id: node.ir_id,
                phase_id: node.generated_in.exec_ordinal,
            },
            multiplicity: node.multiplicity,
            merged_from: node.merged_from.clone(),
        });
    }

    let lines = line_order
        .iter()
        .enumerate()
        .map(|(index, &i)| {
            let edge = &h.hyperedges[i];
            Line {
                name: edge.name.clone(),
                id: edge.id.clone(),
                color_index: index as u32,
                polyline: order_stations(&h.nodes, edge.members.iter().copied()),
            }
        })
        .collect();

    Ok(MetroMap {
        stations,
        lines,
        report: report.clone(),
    })
}

impl<T: Scalar> MetroMap<T> {
    /// Replaces line colors with `palette[line index % palette.len()]`.
    pub fn recolor(&mut self, palette: &[u32]) {
        if palette.is_empty() {
            return;
        }
        for (i, line) in self.lines.iter_mut().enumerate() {
            line.color_index = palette[i % palette.len()];
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map serializes");
        s.push('\n');
        s
    }
}

/// Checks the payload invariants the viewer relies on.
pub fn validate_metro_map<T>(map: &MetroMap<T>) -> Vec<String> {
    let mut violations = Vec::new();
    let mut positions = BTreeSet::new();
    let mut ids = BTreeSet::new();
    for s in &map.stations {
        if !positions.insert((s.x, s.y)) {
            violations.push(format!(
                "station {} shares position ({}, {})",
                s.station_id, s.x, s.y
            ));
        }
        ids.insert(s.station_id);
    }
    let mut on_line = BTreeSet::new();
    for line in &map.lines {
        let visited: BTreeSet<NodeId> = line.polyline.iter().copied().collect();
        if visited.len() != line.polyline.len() {
            violations.push(format!("line {} visits a station twice", line.name));
        }
        for id in &line.polyline {
            if !ids.contains(id) {
                violations.push(format!("line {} visits unknown station {id}", line.name));
            }
        }
        on_line.extend(visited);
    }
    for id in ids.difference(&on_line) {
        violations.push(format!("station {id} is on no line"));
    }
    violations
}
