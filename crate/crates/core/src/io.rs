//! Text formats: graphs, measures, point clouds, edge weights and matrices.
//!
//! Graph files hold a `nodes N` header followed by one `u v w` record per edge;
//! blank lines and `#` comments are ignored. Measures files are JSON documents
//! `{"measures": [{"label": "...", "entries": [{"node": 0, "mass": 1.0}]}]}`.
//! Floats are written in Rust's shortest round-trip form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::builders::PointCloud;
use crate::error::{Result, UstError};
use crate::graph::{NodeId, PhysicalGraph};
use crate::measure::DiscreteMeasure;

fn parse_err(line: usize, message: impl Into<String>) -> UstError {
    UstError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("cannot parse {s:?}")))
}

pub fn parse_graph(text: &str) -> Result<PhysicalGraph> {
    let mut it = records(text);
    let (line, header) = it.next().ok_or_else(|| parse_err(0, "missing `nodes N` header"))?;
    if header.len() != 2 || header[0] != "nodes" {
        return Err(parse_err(line, "expected `nodes N` header"));
    }
    let n: usize = num(line, header[1])?;
    let mut edges = Vec::new();
    for (line, f) in it {
        if f.len() != 3 {
            return Err(parse_err(line, format!("expected `u v w`, got {} fields", f.len())));
        }
        edges.push((
            num::<NodeId>(line, f[0])?,
            num::<NodeId>(line, f[1])?,
            num::<f64>(line, f[2])?,
        ));
    }
    PhysicalGraph::new(n, &edges)
}

pub fn write_graph(g: &PhysicalGraph) -> String {
    let mut out = format!("nodes {}\n", g.node_count());
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.length).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub node: NodeId,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub entries: Vec<MassEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuresFile {
    pub measures: Vec<MeasureRecord>,
}

/// Labelled measures read from a measures document.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMeasures {
    pub labels: Vec<Option<String>>,
    pub measures: Vec<DiscreteMeasure>,
}

pub fn parse_measures(text: &str) -> Result<LabeledMeasures> {
    let file: MeasuresFile = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let mut labels = Vec::with_capacity(file.measures.len());
    let mut measures = Vec::with_capacity(file.measures.len());
    for rec in file.measures {
        measures.push(DiscreteMeasure::new(rec.entries.iter().map(|e| (e.node, e.mass)))?);
        labels.push(rec.label);
    }
    Ok(LabeledMeasures { labels, measures })
}

pub fn write_measures(ms: &[DiscreteMeasure], labels: &[Option<String>]) -> String {
    let file = MeasuresFile {
        measures: ms
            .iter()
            .enumerate()
            .map(|(i, m)| MeasureRecord {
                label: labels.get(i).cloned().flatten(),
                entries: m
                    .entries()
                    .iter()
                    .map(|&(node, mass)| MassEntry { node, mass })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("measures serialize")
}

/// One value per line, in edge-id order.
pub fn parse_edge_weights(text: &str) -> Result<Vec<f64>> {
    records(text)
        .map(|(line, f)| {
            if f.len() != 1 {
                return Err(parse_err(line, "expected one value per line"));
            }
            num(line, f[0])
        })
        .collect()
}

/// Whitespace-separated coordinates, one point per line.
pub fn parse_points(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line, f) in records(text) {
        points.push(f.iter().map(|s| num::<f64>(line, s)).collect::<Result<Vec<f64>>>()?);
    }
    PointCloud::new(points)
}

pub fn matrix_to_csv(m: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in m {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_json(m: &[Vec<f64>]) -> String {
    serde_json::to_string(m).expect("matrix serialize")
}
