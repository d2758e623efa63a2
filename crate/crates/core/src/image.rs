//! Lattice points, adjacency relations and finite digital images.
//!
//! A digital image is a finite set of points of `Z^n` together with an
//! adjacency relation, i.e. a finite simple graph whose vertices happen to be
//! lattice points. Points are always kept in lexicographic order so that every
//! search in this crate visits them in the same sequence.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^n`, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Concatenates coordinates; the flattened form of a product tuple.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Point>) -> Point {
        Point(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    /// Splits the coordinates into consecutive blocks of the given lengths.
    pub fn split(&self, arities: &[usize]) -> Vec<Point> {
        let mut out = Vec::with_capacity(arities.len());
        let mut start = 0;
        for &len in arities {
            out.push(Point(self.0[start..start + len].to_vec()));
            start += len;
        }
        out
    }
}

impl From<Vec<i64>> for Point {
    /// Panics on an empty vector; use [`Point::new`] for untrusted input.
    fn from(coords: Vec<i64>) -> Self {
        Point::new(coords).expect("point with no coordinates")
    }
}

impl<const N: usize> From<[i64; N]> for Point {
    fn from(coords: [i64; N]) -> Self {
        Point::from(coords.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Accepts `(1,2,3)`, `1,2,3` or `[1, 2, 3]`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        let coords = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::invalid(format!("bad coordinate {c:?} in {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Point::new(coords)
    }
}

/// The three shapes an adjacency relation can take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdjacencyKind {
    /// `c_u`: at most `u` coordinates differ, each by exactly one.
    Cu { u: usize },
    /// Normal product `NP_u` over factor relations; a point is the
    /// concatenation of one factor point per relation.
    Npu {
        u: usize,
        factors: Vec<AdjacencyRelation>,
    },
    /// An arbitrary simple graph, stored as ordered pairs `(a, b)` with `a < b`.
    Explicit { edges: BTreeSet<(Point, Point)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyRelation {
    kind: AdjacencyKind,
    dim: usize,
}

impl AdjacencyRelation {
    pub fn cu(u: usize, dim: usize) -> Result<Self> {
        if dim == 0 || u == 0 || u > dim {
            return Err(Error::invalid(format!(
                "c_u adjacency needs 1 <= u <= n, got u = {u}, n = {dim}"
            )));
        }
        Ok(Self {
            kind: AdjacencyKind::Cu { u },
            dim,
        })
    }

    pub fn npu(u: usize, factors: Vec<AdjacencyRelation>) -> Result<Self> {
        let v = factors.len();
        if v == 0 || u == 0 || u > v {
            return Err(Error::invalid(format!(
                "NP_u adjacency needs 1 <= u <= v, got u = {u}, v = {v}"
            )));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        Ok(Self {
            kind: AdjacencyKind::Npu { u, factors },
            dim,
        })
    }

    /// Builds an explicit relation; edges are undirected and self-loops are rejected.
    pub fn explicit(dim: usize, edges: impl IntoIterator<Item = (Point, Point)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for p in [&a, &b] {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    });
                }
            }
            match a.cmp(&b) {
                std::cmp::Ordering::Less => set.insert((a, b)),
                std::cmp::Ordering::Greater => set.insert((b, a)),
                std::cmp::Ordering::Equal => {
                    return Err(Error::invalid(format!("self-loop at {a}")));
                }
            };
        }
        Ok(Self {
            kind: AdjacencyKind::Explicit { edges: set },
            dim,
        })
    }

    pub fn kind(&self) -> &AdjacencyKind {
        &self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Coordinate block lengths of an `NP_u` relation; `[n]` otherwise.
    pub fn arities(&self) -> Vec<usize> {
        match &self.kind {
            AdjacencyKind::Npu { factors, .. } => factors.iter().map(|f| f.dim).collect(),
            _ => vec![self.dim],
        }
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        Ok(())
    }

    /// Adjacency without the dimension check; callers guarantee matching dimensions.
    pub(crate) fn adjacent_unchecked(&self, a: &[i64], b: &[i64]) -> bool {
        match &self.kind {
            AdjacencyKind::Cu { u } => {
                let mut moved = 0;
                for (x, y) in a.iter().zip(b) {
                    match (x - y).abs() {
                        0 => {}
                        1 => moved += 1,
                        _ => return false,
                    }
                }
                moved >= 1 && moved <= *u
            }
            AdjacencyKind::Npu { u, factors } => {
                let mut moved = 0;
                let mut start = 0;
                for factor in factors {
                    let end = start + factor.dim;
                    let (fa, fb) = (&a[start..end], &b[start..end]);
                    if fa != fb {
                        if !factor.adjacent_unchecked(fa, fb) {
                            return false;
                        }
                        moved += 1;
                    }
                    start = end;
                }
                moved >= 1 && moved <= *u
            }
            AdjacencyKind::Explicit { edges } => {
                let (pa, pb) = (Point(a.to_vec()), Point(b.to_vec()));
                match pa.cmp(&pb) {
                    std::cmp::Ordering::Less => edges.contains(&(pa, pb)),
                    std::cmp::Ordering::Greater => edges.contains(&(pb, pa)),
                    std::cmp::Ordering::Equal => false,
                }
            }
        }
    }
}

/// `a ↔ b` under `rel`. Never true for `a == b`.
pub fn adjacent(a: &Point, b: &Point, rel: &AdjacencyRelation) -> Result<bool> {
    rel.check_dim(a)?;
    rel.check_dim(b)?;
    Ok(rel.adjacent_unchecked(&a.0, &b.0))
}

/// `a ↔ b` or `a == b`.
pub fn adjacent_or_equal(a: &Point, b: &Point, rel: &AdjacencyRelation) -> Result<bool> {
    rel.check_dim(a)?;
    rel.check_dim(b)?;
    Ok(a == b || rel.adjacent_unchecked(&a.0, &b.0))
}

/// A finite digital image `(X, κ)`.
///
/// Equality compares the point sets and the induced graphs, so two images with
/// the same points and edges are equal even when one carries an explicit
/// relation and the other a `c_u` relation.
#[derive(Debug, Clone)]
pub struct DigitalImage {
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    adjacency: AdjacencyRelation,
    neighbors: Vec<Vec<usize>>,
}

impl DigitalImage {
    /// Points may be given in any order; duplicates and mixed dimensions are rejected.
    pub fn new(points: impl IntoIterator<Item = Point>, adjacency: AdjacencyRelation) -> Result<Self> {
        let mut points: Vec<Point> = points.into_iter().collect();
        if points.is_empty() {
            return Err(Error::EmptyImage);
        }
        for p in &points {
            adjacency.check_dim(p)?;
        }
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate point {}", w[0])));
        }
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let n = points.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if adjacency.adjacent_unchecked(&points[i].0, &points[j].0) {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        Ok(Self {
            points,
            index,
            adjacency,
            neighbors,
        })
    }

    /// The digital interval `([a, b]_Z, c_1)`.
    pub fn interval(a: i64, b: i64) -> Result<Self> {
        if a > b {
            return Err(Error::invalid(format!("empty interval [{a}, {b}]")));
        }
        Self::new((a..=b).map(|z| Point(vec![z])), AdjacencyRelation::cu(1, 1)?)
    }

    /// The box `[0, w) x [0, h)` in `Z^2` under `c_u`.
    pub fn grid(width: i64, height: i64, u: usize) -> Result<Self> {
        let pts = (0..width).flat_map(|x| (0..height).map(move |y| Point(vec![x, y])));
        Self::new(pts, AdjacencyRelation::cu(u, 2)?)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.adjacency.ambient_dim()
    }

    pub fn adjacency(&self) -> &AdjacencyRelation {
        &self.adjacency
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn index_of(&self, p: &Point) -> Result<usize> {
        self.index
            .get(p)
            .copied()
            .ok_or_else(|| Error::PointNotInImage(p.clone()))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.index.contains_key(p)
    }

    /// Sorted neighbor indices of point `i`.
    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `i` together with its neighbors, sorted.
    pub fn closed_neighborhood(&self, i: usize) -> Vec<usize> {
        let nb = &self.neighbors[i];
        let pos = nb.partition_point(|&j| j < i);
        let mut out = Vec::with_capacity(nb.len() + 1);
        out.extend_from_slice(&nb[..pos]);
        out.push(i);
        out.extend_from_slice(&nb[pos..]);
        out
    }

    pub fn adjacent_idx(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn adjacent_or_equal_idx(&self, i: usize, j: usize) -> bool {
        i == j || self.adjacent_idx(i, j)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Adjacent index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Whether the points with the given indices induce a connected subgraph.
    /// The empty set counts as connected.
    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return true;
        };
        let mut inside = vec![false; self.len()];
        for &m in members {
            inside[m] = true;
        }
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut reached = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        let distinct = members.iter().collect::<BTreeSet<_>>().len();
        reached == distinct
    }
}

impl PartialEq for DigitalImage {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.neighbors == other.neighbors
    }
}

impl Eq for DigitalImage {}

/// Neighbors of `x` in `img`, in lexicographic order.
pub fn neighbors(x: &Point, img: &DigitalImage) -> Result<Vec<Point>> {
    let i = img.index_of(x)?;
    Ok(img.neighbors[i].iter().map(|&j| img.points[j].clone()).collect())
}

/// Whether every pair of points is joined by a path of adjacent points.
pub fn is_connected(img: &DigitalImage) -> bool {
    let all: Vec<usize> = (0..img.len()).collect();
    img.is_connected_subset(&all)
}

/// Whether every point of `img` is in `d_set` or adjacent to a member of it.
pub fn is_dominating<'a>(d_set: impl IntoIterator<Item = &'a Point>, img: &DigitalImage) -> Result<bool> {
    let mut covered = vec![false; img.len()];
    for p in d_set {
        let i = img.index_of(p)?;
        covered[i] = true;
        for &j in &img.neighbors[i] {
            covered[j] = true;
        }
    }
    Ok(covered.into_iter().all(|c| c))
}
