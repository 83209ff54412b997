//! CSV forms of embeddings, densities, clusterings and diagrams.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::density::DensityField;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::knn::NeighborhoodGraph;
use crate::tomato::{fmt_real, DiagramPoint, PersistenceDiagram};

/// `node_id,x,y` with 17 significant digits.
pub fn embedding_csv(emb: &Embedding, ids: &[String]) -> String {
    let mut out = String::from("node_id,x,y\n");
    for (id, p) in ids.iter().zip(&emb.coords) {
        let _ = writeln!(out, "{id},{},{}", fmt_real(p[0]), fmt_real(p[1]));
    }
    out
}

pub fn density_csv(d: &DensityField, ids: &[String]) -> String {
    let mut out = String::from("node_id,rho\n");
    for (id, r) in ids.iter().zip(&d.rho) {
        let _ = writeln!(out, "{id},{}", fmt_real(*r));
    }
    out
}

/// `node_id,cluster`.
pub fn labels_csv(labels: &[usize], ids: &[String]) -> String {
    let mut out = String::from("node_id,cluster\n");
    for (id, l) in ids.iter().zip(labels) {
        let _ = writeln!(out, "{id},{l}");
    }
    out
}

/// Canonical `u v` edge list of a neighborhood graph, written with external ids.
pub fn neighborhood_edge_list(ng: &NeighborhoodGraph, ids: &[String]) -> String {
    let mut out = String::new();
    for (a, b) in ng.edges() {
        let _ = writeln!(out, "{} {}", ids[a], ids[b]);
    }
    out
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)> + 'a> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{header}`"),
            })
        }
    }
    Ok(lines.map(|(i, l)| (i + 1, l.trim().split(',').collect())))
}

fn real(cell: &str, line: usize) -> Result<f64> {
    match cell {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => cell.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("{cell:?} is not a number"),
        }),
    }
}

fn expect_width(cells: &[&str], width: usize, line: usize) -> Result<()> {
    if cells.len() != width {
        return Err(Error::Parse {
            line,
            msg: format!("expected {width} columns, found {}", cells.len()),
        });
    }
    Ok(())
}

/// Reads `node_id,x,y`; returns ids in file order and the coordinates.
pub fn read_embedding_csv(text: &str) -> Result<(Vec<String>, Vec<[f64; 2]>)> {
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (line, cells) in rows(text, "node_id,x,y")? {
        expect_width(&cells, 3, line)?;
        ids.push(cells[0].to_string());
        coords.push([real(cells[1], line)?, real(cells[2], line)?]);
    }
    Ok((ids, coords))
}

/// Reads `node_id,cluster`.
pub fn read_labels_csv(text: &str) -> Result<(Vec<String>, Vec<usize>)> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (line, cells) in rows(text, "node_id,cluster")? {
        expect_width(&cells, 2, line)?;
        ids.push(cells[0].to_string());
        labels.push(cells[1].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("cluster {:?} is not a non-negative integer", cells[1]),
        })?);
    }
    Ok((ids, labels))
}

/// Reads `mode_node,birth,death`, resolving mode ids against `ids`.
pub fn read_diagram_csv(text: &str, ids: &[String]) -> Result<PersistenceDiagram> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut points = Vec::new();
    for (line, cells) in rows(text, "mode_node,birth,death")? {
        expect_width(&cells, 3, line)?;
        let mode = *index.get(cells[0]).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown node {}", cells[0]),
        })?;
        points.push(DiagramPoint {
            mode,
            birth: real(cells[1], line)?,
            death: real(cells[2], line)?,
        });
    }
    Ok(PersistenceDiagram { points })
}

/// Reorders `labels` given for `from_ids` so they follow `to_ids`.
pub fn align_labels(from_ids: &[String], labels: &[usize], to_ids: &[String]) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = from_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    to_ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|&i| labels[i])
                .ok_or_else(|| Error::Input(format!("node {id} has no label")))
        })
        .collect()
}
