//! JSON file formats.
//!
//! ```text
//! image:    {"dim": n, "adjacency": ADJ, "points": [[x1, ..., xn], ...]}
//! ADJ:      {"type": "c_u", "u": k}
//!           {"type": "explicit", "edges": [[p, q], ...]}
//!           {"type": "np_u", "u": k, "arities": [n1, ...], "factors": [ADJ, ...]}
//! map:      {"pairs": [[[x...], [y...]], ...]}
//! metric:   {"type": "l_p", "p": 1 | 2 | ... | "inf"}
//!           {"type": "table", "entries": [[q, ...], ...]}
//! sequence: {"terms": [[x...], ...], "cap": n}
//! ```
//!
//! Rationals are JSON integers, decimals, or strings such as `"2/3"`.
//! Image files for product carriers also carry a top-level `"arities"` field.

use std::path::Path;
use std::sync::Arc;

use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational};
use crate::image::{AdjacencyKind, AdjacencyRelation, DigitalImage, Point};
use crate::maps::DigitalMap;
use crate::metric::{LpExponent, Metric, PointSequence};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageFile {
    dim: usize,
    adjacency: AdjacencyFile,
    points: Vec<Vec<i64>>,
    #[serde(default)]
    arities: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum AdjacencyFile {
    #[serde(rename = "c_u")]
    Cu { u: usize },
    #[serde(rename = "explicit")]
    Explicit { edges: Vec<(Vec<i64>, Vec<i64>)> },
    #[serde(rename = "np_u")]
    Npu {
        u: usize,
        arities: Vec<usize>,
        factors: Vec<AdjacencyFile>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    pairs: Vec<(Vec<i64>, Vec<i64>)>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum MetricFile {
    #[serde(rename = "l_p")]
    Lp { p: Scalar },
    #[serde(rename = "table")]
    Table { entries: Vec<Vec<Scalar>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    terms: Vec<Vec<i64>>,
    #[serde(default)]
    cap: Option<usize>,
}

fn semantic(path: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            path: path.to_string(),
            message: other.to_string(),
        },
    }
}

/// Deserializes with the JSON path and line/column of the first problem.
fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path: if path == "." { "<root>".into() } else { path },
            message: inner.to_string(),
        }
    })?;
    Ok(value)
}

fn point(coords: Vec<i64>, path: &str) -> Result<Point> {
    Point::new(coords).map_err(|e| semantic(path, e))
}

fn scalar_to_rational(s: &Scalar, path: &str) -> Result<BigRational> {
    let parsed = match s {
        Scalar::Int(n) => Ok(BigRational::from_integer((*n).into())),
        Scalar::Float(f) => parse_rational(&f.to_string()),
        Scalar::Text(t) => parse_rational(t),
    };
    parsed.map_err(|e| semantic(path, e))
}

fn adjacency_from_file(a: AdjacencyFile, dim: usize, path: &str) -> Result<AdjacencyRelation> {
    match a {
        AdjacencyFile::Cu { u } => AdjacencyRelation::cu(u, dim).map_err(|e| semantic(path, e)),
        AdjacencyFile::Explicit { edges } => {
            let edges = edges
                .into_iter()
                .enumerate()
                .map(|(i, (p, q))| {
                    let at = format!("{path}.edges[{i}]");
                    Ok((point(p, &at)?, point(q, &at)?))
                })
                .collect::<Result<Vec<_>>>()?;
            AdjacencyRelation::explicit(dim, edges).map_err(|e| semantic(path, e))
        }
        AdjacencyFile::Npu { u, arities, factors } => {
            if arities.len() != factors.len() {
                return Err(semantic(path, Error::invalid("arities and factors differ in length")));
            }
            if arities.iter().sum::<usize>() != dim {
                return Err(semantic(path, Error::invalid(format!("arities do not sum to dim = {dim}"))));
            }
            let factors = factors
                .into_iter()
                .zip(arities)
                .enumerate()
                .map(|(i, (f, n))| adjacency_from_file(f, n, &format!("{path}.factors[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            AdjacencyRelation::npu(u, factors).map_err(|e| semantic(path, e))
        }
    }
}

fn adjacency_to_json(a: &AdjacencyRelation) -> Value {
    match a.kind() {
        AdjacencyKind::Cu { u } => json!({"type": "c_u", "u": u}),
        AdjacencyKind::Explicit { edges } => {
            let edges: Vec<Value> = edges.iter().map(|(p, q)| json!([p, q])).collect();
            json!({"type": "explicit", "edges": edges})
        }
        AdjacencyKind::Npu { u, factors } => {
            let fs: Vec<Value> = factors.iter().map(adjacency_to_json).collect();
            json!({"type": "np_u", "u": u, "arities": a.arities(), "factors": fs})
        }
    }
}

pub fn parse_image(text: &str) -> Result<DigitalImage> {
    let f: ImageFile = parse(text)?;
    if let Some(ar) = &f.arities {
        if ar.iter().sum::<usize>() != f.dim {
            return Err(semantic("arities", Error::invalid(format!("arities do not sum to dim = {}", f.dim))));
        }
    }
    let adjacency = adjacency_from_file(f.adjacency, f.dim, "adjacency")?;
    if let Some(ar) = &f.arities {
        if *ar != adjacency.arities() {
            return Err(semantic("arities", Error::invalid("arities disagree with the adjacency")));
        }
    }
    let points = f
        .points
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let at = format!("points[{i}]");
            let p = point(c, &at)?;
            if p.dim() != f.dim {
                return Err(semantic(&at, Error::DimensionMismatch { expected: f.dim, found: p.dim() }));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    DigitalImage::new(points, adjacency).map_err(|e| semantic("points", e))
}

pub fn image_to_json(img: &DigitalImage) -> Value {
    let mut v = json!({
        "dim": img.dim(),
        "adjacency": adjacency_to_json(img.adjacency()),
        "points": img.points(),
    });
    if matches!(img.adjacency().kind(), AdjacencyKind::Npu { .. }) {
        v["arities"] = json!(img.adjacency().arities());
    }
    v
}

/// Parses a total map table between two already-loaded images.
pub fn parse_map(text: &str, domain: &Arc<DigitalImage>, codomain: &Arc<DigitalImage>) -> Result<DigitalMap> {
    let f: MapFile = parse(text)?;
    let pairs = f
        .pairs
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let at = format!("pairs[{i}]");
            Ok((point(x, &at)?, point(y, &at)?))
        })
        .collect::<Result<Vec<_>>>()?;
    DigitalMap::new(domain.clone(), codomain.clone(), pairs).map_err(|e| semantic("pairs", e))
}

pub fn map_to_json(f: &DigitalMap) -> Value {
    let pairs: Vec<Value> = f.pairs().map(|(x, y)| json!([x, y])).collect();
    json!({ "pairs": pairs })
}

pub fn parse_metric(text: &str) -> Result<Metric> {
    match parse::<MetricFile>(text)? {
        MetricFile::Lp { p } => match &p {
            Scalar::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(Metric::l_inf()),
            Scalar::Int(n) if *n >= 1 && *n <= u32::MAX as i64 => Metric::lp(*n as u32),
            _ => Err(semantic("p", Error::invalid("p must be a positive integer or \"inf\""))),
        },
        MetricFile::Table { entries } => {
            let rows = entries
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, s)| scalar_to_rational(s, &format!("entries[{i}][{j}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Metric::Table(rows))
        }
    }
}

fn rational_to_json(q: &BigRational) -> Value {
    match (q.is_integer(), i64::try_from(q.numer())) {
        (true, Ok(n)) => json!(n),
        _ => json!(format_rational(q)),
    }
}

pub fn metric_to_json(m: &Metric) -> Value {
    match m {
        Metric::Lp(LpExponent::Finite(p)) => json!({"type": "l_p", "p": p}),
        Metric::Lp(LpExponent::Infinity) => json!({"type": "l_p", "p": "inf"}),
        Metric::Table(rows) => {
            let rows: Vec<Vec<Value>> = rows.iter().map(|r| r.iter().map(rational_to_json).collect()).collect();
            json!({"type": "table", "entries": rows})
        }
    }
}

pub fn parse_sequence(text: &str) -> Result<PointSequence> {
    let f: SequenceFile = parse(text)?;
    let terms = f
        .terms
        .into_iter()
        .enumerate()
        .map(|(i, c)| point(c, &format!("terms[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = terms.first() {
        if let Some((i, p)) = terms.iter().enumerate().find(|(_, p)| p.dim() != first.dim()) {
            return Err(semantic(
                &format!("terms[{i}]"),
                Error::DimensionMismatch { expected: first.dim(), found: p.dim() },
            ));
        }
    }
    Ok(PointSequence { terms, cap: f.cap })
}

pub fn sequence_to_json(s: &PointSequence) -> Value {
    let mut v = json!({ "terms": s.terms });
    if let Some(cap) = s.cap {
        v["cap"] = json!(cap);
    }
    v
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Prefixes a parse error's path with the file it came from.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { path: p, message } => Error::Parse {
            path: format!("{}: {p}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn load_image(path: &Path) -> Result<DigitalImage> {
    in_file(path, parse_image(&read(path)?))
}

pub fn load_map(path: &Path, domain: &Arc<DigitalImage>, codomain: &Arc<DigitalImage>) -> Result<DigitalMap> {
    in_file(path, parse_map(&read(path)?, domain, codomain))
}

pub fn load_metric(path: &Path) -> Result<Metric> {
    in_file(path, parse_metric(&read(path)?))
}

pub fn load_sequence(path: &Path) -> Result<PointSequence> {
    in_file(path, parse_sequence(&read(path)?))
}

pub fn save(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_pretty(v) + "\n").map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// A serializable view used when a value needs to travel inside a report.
#[derive(Debug, Clone, Serialize)]
pub struct MapTable {
    pub pairs: Vec<(Point, Point)>,
}

impl From<&DigitalMap> for MapTable {
    fn from(f: &DigitalMap) -> Self {
        MapTable {
            pairs: f.pairs().map(|(x, y)| (x.clone(), y.clone())).collect(),
        }
    }
}
