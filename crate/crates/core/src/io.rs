//! File formats: network and result JSON, trace JSON lines, sweep CSV and
//! SVG figures.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{build_udg, Network, NetworkError, NodeClass};
use crate::protocol::{verify_localization, LocalizationResult, Message};
use crate::trilateration::SweepStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
    #[error("{0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub schema_version: u32,
    pub r: f64,
    pub nodes: Vec<NodeRecord>,
}

impl NetworkFile {
    pub fn from_network(net: &Network) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            r: net.r(),
            nodes: net.nodes().map(|(id, p)| NodeRecord { id, x: p.x, y: p.y }).collect(),
        }
    }

    pub fn to_network(&self) -> Result<Network, IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::Schema(self.schema_version));
        }
        let nodes: Vec<(u64, crate::Point)> = self
            .nodes
            .iter()
            .map(|n| (n.id, crate::Point::new(n.x, n.y)))
            .collect();
        Ok(build_udg(&nodes, self.r)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network files serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn load_network(text: &str) -> Result<Network, IoError> {
    NetworkFile::from_json(text)?.to_network()
}

pub fn save_network(net: &Network) -> String {
    NetworkFile::from_network(net).to_json()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultNode {
    pub id: u64,
    pub class: NodeClass,
    pub localized: bool,
    pub pos: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultStats {
    pub class_counts: BTreeMap<String, usize>,
    pub localized_per_class: BTreeMap<String, usize>,
    pub messages: BTreeMap<String, usize>,
    pub rounds: usize,
    pub leader: Option<u64>,
    pub faults: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub schema_version: u32,
    pub nodes: Vec<ResultNode>,
    pub stats: ResultStats,
}

impl ResultFile {
    pub fn from_run(net: &Network, result: &LocalizationResult) -> Self {
        let nodes: Vec<ResultNode> = (0..net.len())
            .map(|v| ResultNode {
                id: net.id(v),
                class: result.classes[v],
                localized: result.is_localized(v),
                pos: result.positions[v].map(|p| [p.x, p.y]),
            })
            .collect();
        let mut class_counts: BTreeMap<String, usize> =
            NodeClass::ALL.iter().map(|c| (c.as_str().to_string(), 0)).collect();
        let mut localized_per_class = class_counts.clone();
        for n in &nodes {
            *class_counts.get_mut(n.class.as_str()).unwrap() += 1;
            if n.localized {
                *localized_per_class.get_mut(n.class.as_str()).unwrap() += 1;
            }
        }
        let messages = Message::KINDS
            .iter()
            .map(|k| (k.to_string(), result.trace.count(k)))
            .collect();
        let alignment_residual = if result.localized_count() >= 3 {
            verify_localization(result, net).max_residual
        } else {
            None
        };
        Self {
            schema_version: SCHEMA_VERSION,
            nodes,
            stats: ResultStats {
                class_counts,
                localized_per_class,
                messages,
                rounds: result.trace.rounds,
                leader: result.leader.map(|v| net.id(v)),
                faults: result.faults.len(),
                alignment_residual,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result files serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let file: Self = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(IoError::Schema(file.schema_version));
        }
        Ok(file)
    }
}

/// One row per seed triangle, ids joined by `-`.
pub fn sweep_csv(net: &Network, stats: &SweepStats) -> String {
    let mut out = String::from("seed_triangle,localized_count\n");
    for &([a, b, c], count) in &stats.per_seed {
        writeln!(out, "{}-{}-{},{count}", net.id(a), net.id(b), net.id(c)).unwrap();
    }
    out
}

pub const SVG_PIXELS_PER_R: f64 = 40.0;

/// Figure of the network: pale disks of radius `r/2`, then nodes colored by
/// class (red boundary, green weakly interior, blue strongly interior), or
/// when `result` is given, blue localized and black unlocalized.
pub fn render_svg(net: &Network, classes: &[NodeClass], result: Option<&ResultFile>) -> Result<String, IoError> {
    let localized: Option<BTreeMap<u64, bool>> = match result {
        Some(file) => {
            let map: BTreeMap<u64, bool> = file.nodes.iter().map(|n| (n.id, n.localized)).collect();
            if map.len() != net.len() || net.ids().iter().any(|id| !map.contains_key(id)) {
                return Err(IoError::Mismatch("result ids do not match the network".into()));
            }
            Some(map)
        }
        None => None,
    };
    let r = net.r();
    let scale = SVG_PIXELS_PER_R / r;
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in net.positions() {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let pad = r;
    let width = (max_x - min_x + 2.0 * pad) * scale;
    let height = (max_y - min_y + 2.0 * pad) * scale;
    let sx = |x: f64| (x - min_x + pad) * scale;
    let sy = |y: f64| (max_y - y + pad) * scale;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for p in net.positions() {
        writeln!(
            svg,
            r##"<circle class="zone" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#cfe6ff" fill-opacity="0.5"/>"##,
            sx(p.x),
            sy(p.y),
            r / 2.0 * scale
        )
        .unwrap();
    }
    for v in 0..net.len() {
        for &(u, _) in net.neighbors(v) {
            if u > v {
                let (a, b) = (net.position(v), net.position(u));
                writeln!(
                    svg,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                    sx(a.x),
                    sy(a.y),
                    sx(b.x),
                    sy(b.y)
                )
                .unwrap();
            }
        }
    }
    for (v, (id, p)) in net.nodes().enumerate() {
        let (class, fill) = match &localized {
            Some(map) if map[&id] => ("localized", "blue"),
            Some(_) => ("unlocalized", "black"),
            None => match classes[v] {
                NodeClass::Boundary => ("boundary", "red"),
                NodeClass::StronglyInterior => ("strong", "blue"),
                _ => ("weak", "green"),
            },
        };
        writeln!(
            svg,
            r#"<circle class="node {class}" data-id="{id}" cx="{:.2}" cy="{:.2}" r="3" fill="{fill}"/>"#,
            sx(p.x),
            sy(p.y)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
