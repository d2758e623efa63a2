//! Digital maps between images and the exhaustive searches built on them.
//!
//! The central engine is a backtracking enumerator of continuous maps. It
//! assigns `f(x)` vertex by vertex in lexicographic order of the domain and
//! tries codomain values in lexicographic order, discarding a value as soon
//! as it breaks adjacency-or-equality with an already assigned neighbor. The
//! resulting stream is therefore sorted by table, which makes every witness
//! reported by this module reproducible.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{BudgetExceeded, BudgetLimit, Error, Result};
use crate::image::{DigitalImage, Point};
use crate::Verdict;

/// Largest domain accepted by [`is_continuous_by_connectivity`].
pub const MAX_SUBSET_DOMAIN: usize = 15;

/// A total function between two digital images, stored as a table of codomain
/// indices in domain order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalMap {
    domain: Arc<DigitalImage>,
    codomain: Arc<DigitalImage>,
    table: Vec<usize>,
}

impl DigitalMap {
    /// Builds a map from `(x, f(x))` pairs; every domain point must appear exactly once.
    pub fn new(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        pairs: impl IntoIterator<Item = (Point, Point)>,
    ) -> Result<Self> {
        let mut table = vec![None; domain.len()];
        for (x, y) in pairs {
            let i = domain.index_of(&x)?;
            let j = codomain.index_of(&y)?;
            if table[i].replace(j).is_some() {
                return Err(Error::invalid(format!("point {x} is mapped twice")));
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, j)| j.ok_or_else(|| Error::invalid(format!("no value for {}", domain.point(i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { domain, codomain, table })
    }

    pub fn from_fn(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        f: impl Fn(&Point) -> Point,
    ) -> Result<Self> {
        let table = domain
            .points()
            .iter()
            .map(|x| codomain.index_of(&f(x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { domain, codomain, table })
    }

    pub fn from_indices(domain: Arc<DigitalImage>, codomain: Arc<DigitalImage>, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain.len() {
            return Err(Error::invalid(format!(
                "table has {} entries for a domain of {} points",
                table.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&j| j >= codomain.len()) {
            return Err(Error::invalid(format!("codomain index {bad} out of range")));
        }
        Ok(Self { domain, codomain, table })
    }

    pub fn identity(img: &Arc<DigitalImage>) -> Self {
        Self {
            domain: img.clone(),
            codomain: img.clone(),
            table: (0..img.len()).collect(),
        }
    }

    pub fn constant(domain: &Arc<DigitalImage>, codomain: &Arc<DigitalImage>, value: &Point) -> Result<Self> {
        let j = codomain.index_of(value)?;
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            table: vec![j; domain.len()],
        })
    }

    pub fn domain(&self) -> &Arc<DigitalImage> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<DigitalImage> {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: &Point) -> Result<&Point> {
        let i = self.domain.index_of(x)?;
        Ok(self.codomain.point(self.table[i]))
    }

    pub fn apply_idx(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Point, &Point)> + '_ {
        self.domain
            .points()
            .iter()
            .zip(&self.table)
            .map(|(x, &j)| (x, self.codomain.point(j)))
    }

    pub fn is_self_map(&self) -> bool {
        Arc::ptr_eq(&self.domain, &self.codomain) || self.domain == self.codomain
    }

    fn require_self_map(&self) -> Result<()> {
        if self.is_self_map() {
            Ok(())
        } else {
            Err(Error::invalid("expected a self-map (domain and codomain differ)"))
        }
    }

    /// Sorted distinct codomain indices hit by the map.
    pub fn image_indices(&self) -> Vec<usize> {
        self.table.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn image_points(&self) -> Vec<Point> {
        self.image_indices().into_iter().map(|j| self.codomain.point(j).clone()).collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.len() == self.codomain.len() && self.image_indices().len() == self.table.len()
    }

    pub fn inverse(&self) -> Option<DigitalMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.table.len()];
        for (i, &j) in self.table.iter().enumerate() {
            inv[j] = i;
        }
        Some(Self {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            table: inv,
        })
    }

    /// Whether the map is a constant function.
    pub fn is_constant(&self) -> bool {
        self.table.windows(2).all(|w| w[0] == w[1])
    }

    /// Re-labels the map onto another (equal) pair of images.
    pub fn rehome(&self, domain: &Arc<DigitalImage>, codomain: &Arc<DigitalImage>) -> Result<Self> {
        if **domain != *self.domain || **codomain != *self.codomain {
            return Err(Error::invalid("rehome target images differ"));
        }
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            table: self.table.clone(),
        })
    }
}

/// Caps on an exhaustive search. Exceeding either cap yields a budget error
/// rather than a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_maps: u64,
    max_nodes: u64,
}

impl EnumerationBudget {
    pub fn new(max_maps: u64, max_nodes: u64) -> Result<Self> {
        if max_maps == 0 || max_nodes == 0 {
            return Err(Error::invalid("budget caps must be at least 1"));
        }
        Ok(Self { max_maps, max_nodes })
    }

    pub fn max_maps(&self) -> u64 {
        self.max_maps
    }

    pub fn max_nodes(&self) -> u64 {
        self.max_nodes
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_maps: 10_000_000,
            max_nodes: 100_000_000,
        }
    }
}

/// Shared node and map counters; several workers may charge one meter.
struct Meter {
    budget: EnumerationBudget,
    nodes: AtomicU64,
    maps: AtomicU64,
}

impl Meter {
    fn new(budget: EnumerationBudget) -> Self {
        Self {
            budget,
            nodes: AtomicU64::new(0),
            maps: AtomicU64::new(0),
        }
    }

    fn exceeded(&self, limit: BudgetLimit) -> Error {
        Error::Budget(BudgetExceeded {
            limit,
            maps: self.maps.load(Ordering::Relaxed).min(self.budget.max_maps),
            nodes: self.nodes.load(Ordering::Relaxed).min(self.budget.max_nodes),
        })
    }

    fn charge_node(&self) -> Result<()> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget.max_nodes {
            return Err(self.exceeded(BudgetLimit::Nodes(self.budget.max_nodes)));
        }
        Ok(())
    }

    fn charge_map(&self) -> Result<()> {
        if self.maps.fetch_add(1, Ordering::Relaxed) >= self.budget.max_maps {
            return Err(self.exceeded(BudgetLimit::Maps(self.budget.max_maps)));
        }
        Ok(())
    }
}

/// Iterative depth-first search over continuous tables, optionally restricted
/// by a per-vertex filter on admissible values.
struct Backtracker<F> {
    domain: Arc<DigitalImage>,
    codomain: Arc<DigitalImage>,
    earlier: Vec<Vec<usize>>,
    allowed: F,
    table: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    pos: Vec<usize>,
    depth: usize,
    started: bool,
    done: bool,
    meter: Arc<Meter>,
}

impl<F: Fn(usize, usize) -> bool> Backtracker<F> {
    fn new(domain: &Arc<DigitalImage>, codomain: &Arc<DigitalImage>, meter: Arc<Meter>, allowed: F) -> Self {
        let n = domain.len();
        let earlier = (0..n)
            .map(|v| domain.neighbor_indices(v).iter().copied().filter(|&w| w < v).collect())
            .collect();
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            earlier,
            allowed,
            table: vec![0; n],
            candidates: vec![Vec::new(); n],
            pos: vec![0; n],
            depth: 0,
            started: false,
            done: false,
            meter,
        }
    }

    fn candidates_for(&self, v: usize) -> Vec<usize> {
        let earlier = &self.earlier[v];
        let base = match earlier.first() {
            Some(&w) => self.codomain.closed_neighborhood(self.table[w]),
            None => (0..self.codomain.len()).collect(),
        };
        base.into_iter()
            .filter(|&c| {
                earlier
                    .iter()
                    .all(|&w| self.codomain.adjacent_or_equal_idx(c, self.table[w]))
                    && (self.allowed)(v, c)
            })
            .collect()
    }

    fn next_table(&mut self) -> Result<Option<&[usize]>> {
        match self.advance() {
            Ok(true) => Ok(Some(&self.table)),
            Ok(false) => Ok(None),
            Err(e) => {
                self.done = true;
                Err(e)
            }
        }
    }

    fn advance(&mut self) -> Result<bool> {
        if self.done {
            return Ok(false);
        }
        let n = self.domain.len();
        if !self.started {
            self.started = true;
            self.candidates[0] = self.candidates_for(0);
            self.pos[0] = 0;
        }
        loop {
            let d = self.depth;
            if self.pos[d] < self.candidates[d].len() {
                self.table[d] = self.candidates[d][self.pos[d]];
                self.pos[d] += 1;
                self.meter.charge_node()?;
                if d + 1 == n {
                    self.meter.charge_map()?;
                    return Ok(true);
                }
                self.depth = d + 1;
                self.candidates[d + 1] = self.candidates_for(d + 1);
                self.pos[d + 1] = 0;
            } else if d == 0 {
                self.done = true;
                return Ok(false);
            } else {
                self.depth -= 1;
            }
        }
    }
}

/// Checks continuity through adjacent pairs. The witness is the first
/// adjacent pair `(x, y)` whose images are neither adjacent nor equal.
pub fn is_continuous(f: &DigitalMap) -> Verdict<(Point, Point)> {
    let (dom, cod) = (&f.domain, &f.codomain);
    for (i, j) in dom.edges() {
        if !cod.adjacent_or_equal_idx(f.table[i], f.table[j]) {
            return Verdict::no((dom.point(i).clone(), dom.point(j).clone()));
        }
    }
    Verdict::yes()
}

/// Checks continuity through the connected-subset definition: every connected
/// subset of the domain must have a connected image. Exponential in the
/// domain size, so domains above [`MAX_SUBSET_DOMAIN`] points are refused.
pub fn is_continuous_by_connectivity(f: &DigitalMap) -> Result<bool> {
    let n = f.domain.len();
    if n > MAX_SUBSET_DOMAIN {
        return Err(Error::Budget(BudgetExceeded {
            limit: BudgetLimit::Points(MAX_SUBSET_DOMAIN),
            maps: 0,
            nodes: 0,
        }));
    }
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        members.clear();
        members.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        if !f.domain.is_connected_subset(&members) {
            continue;
        }
        let image: Vec<usize> = members
            .iter()
            .map(|&i| f.table[i])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !f.codomain.is_connected_subset(&image) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `g ∘ f`.
pub fn compose(g: &DigitalMap, f: &DigitalMap) -> Result<DigitalMap> {
    if !Arc::ptr_eq(&f.codomain, &g.domain) && *f.codomain != *g.domain {
        return Err(Error::invalid("codomain of the inner map differs from domain of the outer map"));
    }
    Ok(DigitalMap {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        table: f.table.iter().map(|&j| g.table[j]).collect(),
    })
}

pub fn fixed_points(f: &DigitalMap) -> Result<Vec<Point>> {
    f.require_self_map()?;
    Ok((0..f.table.len())
        .filter(|&i| f.table[i] == i)
        .map(|i| f.domain.point(i).clone())
        .collect())
}

/// Points `x` with `f(x)` adjacent to or equal to `x`.
pub fn approximate_fixed_points(f: &DigitalMap) -> Result<Vec<Point>> {
    f.require_self_map()?;
    Ok((0..f.table.len())
        .filter(|&i| f.domain.adjacent_or_equal_idx(f.table[i], i))
        .map(|i| f.domain.point(i).clone())
        .collect())
}

/// Points `x` with `f(x)` strictly adjacent to `x`.
pub fn strictly_adjacent_points(f: &DigitalMap) -> Result<Vec<Point>> {
    f.require_self_map()?;
    Ok((0..f.table.len())
        .filter(|&i| f.domain.adjacent_idx(f.table[i], i))
        .map(|i| f.domain.point(i).clone())
        .collect())
}

/// Lazy stream of every continuous map `X -> Y` in lexicographic table order.
/// After a budget error the stream ends.
pub struct ContinuousMaps {
    bt: Backtracker<fn(usize, usize) -> bool>,
}

impl Iterator for ContinuousMaps {
    type Item = Result<DigitalMap>;

    fn next(&mut self) -> Option<Self::Item> {
        let table = self.bt.next_table().map(|t| t.map(<[usize]>::to_vec)).transpose()?;
        Some(table.map(|table| DigitalMap {
            domain: self.bt.domain.clone(),
            codomain: self.bt.codomain.clone(),
            table,
        }))
    }
}

pub fn enumerate_continuous(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: EnumerationBudget,
) -> ContinuousMaps {
    let allow_all: fn(usize, usize) -> bool = |_, _| true;
    ContinuousMaps {
        bt: Backtracker::new(x, y, Arc::new(Meter::new(budget)), allow_all),
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Runs one backtracking worker per value of the first domain point and
/// returns the per-branch results in branch order.
fn per_branch<T: Send>(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: EnumerationBudget,
    threads: usize,
    work: impl Fn(&mut dyn FnMut() -> Result<Option<Vec<usize>>>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let meter = Arc::new(Meter::new(budget));
    let pool = thread_pool(threads)?;
    let branches: Vec<Result<T>> = pool.install(|| {
        (0..y.len())
            .into_par_iter()
            .map(|first| {
                let mut bt = Backtracker::new(x, y, meter.clone(), move |v, c| v != 0 || c == first);
                let mut next = || bt.next_table().map(|t| t.map(<[usize]>::to_vec));
                work(&mut next)
            })
            .collect()
    });
    branches.into_iter().collect()
}

/// Counts continuous maps `X -> Y`, splitting the search across `threads` workers.
pub fn count_continuous(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: EnumerationBudget,
    threads: usize,
) -> Result<u64> {
    let counts = per_branch(x, y, budget, threads, |next| {
        let mut k = 0u64;
        while next()?.is_some() {
            k += 1;
        }
        Ok(k)
    })?;
    Ok(counts.into_iter().sum())
}

/// Collects every continuous map in canonical order using `threads` workers.
pub fn collect_continuous(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: EnumerationBudget,
    threads: usize,
) -> Result<Vec<DigitalMap>> {
    let branches = per_branch(x, y, budget, threads, |next| {
        let mut out = Vec::new();
        while let Some(t) = next()? {
            out.push(t);
        }
        Ok(out)
    })?;
    Ok(branches
        .into_iter()
        .flatten()
        .map(|table| DigitalMap {
            domain: x.clone(),
            codomain: y.clone(),
            table,
        })
        .collect())
}

fn require_continuous(f: &DigitalMap) -> Result<()> {
    match is_continuous(f).witness {
        None => Ok(()),
        Some((a, b)) => Err(Error::invalid(format!(
            "map is not continuous: {a} and {b} are adjacent but their images are not"
        ))),
    }
}

/// Whether every continuous `g != f` meets `f` at a point where `f(x)` and
/// `g(x)` are strictly adjacent.
///
/// On failure the counterexample is the violating `g` that coincides with `f`
/// at the fewest points, ties broken by table order; when `f` is an identity
/// this is a map moving as many points as possible.
pub fn is_universal(f: &DigitalMap, budget: EnumerationBudget) -> Result<Verdict<DigitalMap>> {
    require_continuous(f)?;
    let cod = &*f.codomain;
    let mut bt = Backtracker::new(&f.domain, &f.codomain, Arc::new(Meter::new(budget)), |_, _| true);
    let mut best: Option<(usize, Vec<usize>)> = None;
    while let Some(g) = bt.next_table()? {
        if g == f.table.as_slice() {
            continue;
        }
        let touches = g.iter().zip(&f.table).any(|(&a, &b)| cod.adjacent_idx(a, b));
        if touches {
            continue;
        }
        let coincidences = g.iter().zip(&f.table).filter(|(a, b)| a == b).count();
        if best.as_ref().is_none_or(|(c, _)| coincidences < *c) {
            best = Some((coincidences, g.to_vec()));
            if coincidences == 0 {
                break;
            }
        }
    }
    Ok(match best {
        None => Verdict::yes(),
        Some((_, table)) => Verdict::no(DigitalMap {
            domain: f.domain.clone(),
            codomain: f.codomain.clone(),
            table,
        }),
    })
}

/// Whether every continuous `g != f` has a point where `f(x)` and `g(x)` are
/// adjacent or equal. The counterexample is the first violating `g`.
pub fn is_weakly_universal(f: &DigitalMap, budget: EnumerationBudget) -> Result<Verdict<DigitalMap>> {
    require_continuous(f)?;
    let cod = &*f.codomain;
    let mut bt = Backtracker::new(&f.domain, &f.codomain, Arc::new(Meter::new(budget)), |_, _| true);
    while let Some(g) = bt.next_table()? {
        if g == f.table.as_slice() {
            continue;
        }
        let meets = g
            .iter()
            .zip(&f.table)
            .any(|(&a, &b)| cod.adjacent_or_equal_idx(a, b));
        if !meets {
            return Ok(Verdict::no(DigitalMap {
                domain: f.domain.clone(),
                codomain: f.codomain.clone(),
                table: g.to_vec(),
            }));
        }
    }
    Ok(Verdict::yes())
}

/// Approximate fixed point property: every continuous self-map has a point
/// `x` with `f(x)` adjacent to or equal to `x`.
///
/// Searches directly for a continuous map with no approximate fixed point by
/// excluding the closed neighborhood of each vertex from its candidates.
pub fn has_afpp(x: &Arc<DigitalImage>, budget: EnumerationBudget) -> Result<Verdict<DigitalMap>> {
    let img = x.clone();
    let mut bt = Backtracker::new(x, x, Arc::new(Meter::new(budget)), move |v, c| {
        !img.adjacent_or_equal_idx(v, c)
    });
    Ok(match bt.next_table()? {
        Some(t) => Verdict::no(DigitalMap {
            domain: x.clone(),
            codomain: x.clone(),
            table: t.to_vec(),
        }),
        None => Verdict::yes(),
    })
}

/// [`has_afpp`] cross-checked against weak universality of the identity; the
/// two routes must agree on both the verdict and the witness.
pub fn has_afpp_cross_checked(x: &Arc<DigitalImage>, budget: EnumerationBudget) -> Result<Verdict<DigitalMap>> {
    let direct = has_afpp(x, budget)?;
    let via_identity = is_weakly_universal(&DigitalMap::identity(x), budget)?;
    if direct != via_identity {
        return Err(Error::Contradiction(format!(
            "AFPP search says {} but weak universality of the identity says {}",
            direct.holds, via_identity.holds
        )));
    }
    Ok(direct)
}

/// A bijection whose inverse is also continuous, i.e. a graph isomorphism.
pub fn is_isomorphism(f: &DigitalMap) -> bool {
    if !f.is_bijective() {
        return false;
    }
    let n = f.table.len();
    (0..n).all(|i| {
        ((i + 1)..n).all(|j| f.domain.adjacent_idx(i, j) == f.codomain.adjacent_idx(f.table[i], f.table[j]))
    })
}

/// Backtracking search for an isomorphism `X -> Y`; the first in table order.
pub fn find_isomorphism(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: EnumerationBudget,
) -> Result<Option<DigitalMap>> {
    if x.len() != y.len() || x.edge_count() != y.edge_count() {
        return Ok(None);
    }
    let meter = Meter::new(budget);
    let n = x.len();
    let mut table = vec![0; n];
    let mut used = vec![false; n];

    fn extend(
        v: usize,
        x: &DigitalImage,
        y: &DigitalImage,
        table: &mut [usize],
        used: &mut [bool],
        meter: &Meter,
    ) -> Result<bool> {
        if v == x.len() {
            return Ok(true);
        }
        for c in 0..y.len() {
            if used[c] || x.neighbor_indices(v).len() != y.neighbor_indices(c).len() {
                continue;
            }
            if !(0..v).all(|w| x.adjacent_idx(v, w) == y.adjacent_idx(c, table[w])) {
                continue;
            }
            meter.charge_node()?;
            table[v] = c;
            used[c] = true;
            if extend(v + 1, x, y, table, used, meter)? {
                return Ok(true);
            }
            used[c] = false;
        }
        Ok(false)
    }

    if extend(0, x, y, &mut table, &mut used, &meter)? {
        Ok(Some(DigitalMap {
            domain: x.clone(),
            codomain: y.clone(),
            table,
        }))
    } else {
        Ok(None)
    }
}

/// Every function `X -> Y` (continuous or not) in table order.
pub fn all_maps(x: &Arc<DigitalImage>, y: &Arc<DigitalImage>) -> impl Iterator<Item = DigitalMap> {
    let (x, y) = (x.clone(), y.clone());
    let (n, m) = (x.len(), y.len());
    let mut next = Some(vec![0usize; n]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for d in (0..n).rev() {
            succ[d] += 1;
            if succ[d] < m {
                next = Some(succ);
                break;
            }
            succ[d] = 0;
        }
        Some(DigitalMap {
            domain: x.clone(),
            codomain: y.clone(),
            table: current,
        })
    })
}

/// Every bijection of `X` onto itself, in lexicographic order of tables.
pub fn all_bijections(x: &Arc<DigitalImage>) -> impl Iterator<Item = DigitalMap> {
    let x = x.clone();
    let mut next = Some((0..x.len()).collect::<Vec<usize>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut p = current.clone();
        // next permutation
        if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
            let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
            p.swap(i - 1, j);
            p[i..].reverse();
            next = Some(p);
        }
        Some(DigitalMap {
            domain: x.clone(),
            codomain: x.clone(),
            table: current,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::AdjacencyRelation;

    fn p<const N: usize>(c: [i64; N]) -> Point {
        Point::from(c)
    }

    fn interval(a: i64, b: i64) -> Arc<DigitalImage> {
        Arc::new(DigitalImage::interval(a, b).unwrap())
    }

    fn negation(img: &Arc<DigitalImage>) -> DigitalMap {
        DigitalMap::from_fn(img.clone(), img.clone(), |z| p([-z.coords()[0]])).unwrap()
    }

    fn tri_z3() -> Arc<DigitalImage> {
        Arc::new(
            DigitalImage::new(
                vec![p([0, 0, 0]), p([1, 1, 1]), p([2, 0, 0])],
                AdjacencyRelation::cu(3, 3).unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn map_construction_errors() {
        let x = interval(0, 1);
        assert!(DigitalMap::new(x.clone(), x.clone(), vec![(p([0]), p([1]))]).is_err());
        assert!(DigitalMap::new(
            x.clone(),
            x.clone(),
            vec![(p([0]), p([1])), (p([0]), p([0])), (p([1]), p([1]))]
        )
        .is_err());
        assert!(DigitalMap::new(x.clone(), x.clone(), vec![(p([0]), p([5])), (p([1]), p([1]))]).is_err());
        assert!(DigitalMap::from_indices(x.clone(), x.clone(), vec![0, 2]).is_err());
        assert!(EnumerationBudget::new(0, 1).is_err());
    }

    #[test]
    fn continuity_examples() {
        let x = interval(-1, 1);
        assert!(is_continuous(&negation(&x)).holds);
        assert!(is_continuous(&DigitalMap::identity(&x)).holds);

        let img = tri_z3();
        let (p0, p1, p2) = (p([0, 0, 0]), p([1, 1, 1]), p([2, 0, 0]));
        let t = DigitalMap::new(
            img.clone(),
            img.clone(),
            vec![(p0.clone(), p2.clone()), (p1.clone(), p0.clone()), (p2.clone(), p2.clone())],
        )
        .unwrap();
        let v = is_continuous(&t);
        assert!(!v.holds);
        assert_eq!(v.witness, Some((p0, p1)));
        assert!(!is_continuous_by_connectivity(&t).unwrap());
        assert!(is_continuous_by_connectivity(&negation(&x)).unwrap());
        assert!(is_continuous_by_connectivity(&DigitalMap::identity(&interval(0, 2))).unwrap());
    }

    #[test]
    fn connectivity_definition_refuses_large_domains() {
        let x = interval(0, 15);
        let err = is_continuous_by_connectivity(&DigitalMap::identity(&x)).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn composition_examples() {
        let x = interval(-1, 1);
        let f = negation(&x);
        let id = DigitalMap::identity(&x);
        assert_eq!(compose(&id, &f).unwrap(), f);
        assert_eq!(compose(&f, &f).unwrap(), id);
        let y = interval(0, 3);
        assert!(compose(&DigitalMap::identity(&y), &f).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let x = interval(0, 2);
        let id = DigitalMap::identity(&x);
        assert_eq!(fixed_points(&id).unwrap(), x.points());
        assert_eq!(approximate_fixed_points(&id).unwrap(), x.points());

        let y = interval(-1, 1);
        let f = negation(&y);
        assert_eq!(fixed_points(&f).unwrap(), vec![p([0])]);
        assert_eq!(approximate_fixed_points(&f).unwrap(), vec![p([0])]);
        assert!(strictly_adjacent_points(&f).unwrap().is_empty());

        let c = DigitalMap::constant(&x, &x, &p([2])).unwrap();
        assert_eq!(fixed_points(&c).unwrap(), vec![p([2])]);

        let not_self = DigitalMap::constant(&x, &y, &p([0])).unwrap();
        assert!(fixed_points(&not_self).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let b = EnumerationBudget::default();
        let path = interval(0, 2);
        assert_eq!(enumerate_continuous(&path, &path, b).count(), 17);
        let dot = interval(4, 4);
        assert_eq!(enumerate_continuous(&dot, &dot, b).count(), 1);
        let pair = interval(0, 1);
        let apart = Arc::new(
            DigitalImage::new(vec![p([0]), p([2])], AdjacencyRelation::cu(1, 1).unwrap()).unwrap(),
        );
        let maps: Vec<_> = enumerate_continuous(&pair, &apart, b).map(Result::unwrap).collect();
        assert_eq!(maps.len(), 2);
        assert!(maps.iter().all(DigitalMap::is_constant));
    }

    #[test]
    fn enumeration_is_sorted_and_parallel_agrees() {
        let b = EnumerationBudget::default();
        let sq = Arc::new(DigitalImage::grid(2, 3, 1).unwrap());
        let seq: Vec<DigitalMap> = enumerate_continuous(&sq, &sq, b).map(Result::unwrap).collect();
        assert!(seq.windows(2).all(|w| w[0].table() < w[1].table()));
        for threads in [1, 3] {
            assert_eq!(count_continuous(&sq, &sq, b, threads).unwrap(), seq.len() as u64);
            assert_eq!(collect_continuous(&sq, &sq, b, threads).unwrap(), seq);
        }
    }

    #[test]
    fn budget_errors_carry_partial_counts() {
        let path = interval(0, 2);
        let b = EnumerationBudget::new(5, 1_000).unwrap();
        let results: Vec<_> = enumerate_continuous(&path, &path, b).collect();
        assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 5);
        match results.last().unwrap() {
            Err(Error::Budget(e)) => {
                assert_eq!(e.limit, BudgetLimit::Maps(5));
                assert_eq!(e.maps, 5);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        let tiny = EnumerationBudget::new(1_000, 2).unwrap();
        assert!(is_weakly_universal(&DigitalMap::identity(&path), tiny).unwrap_err().is_budget());
        assert!(count_continuous(&path, &path, tiny, 2).unwrap_err().is_budget());
    }

    #[test]
    fn universality_on_the_negation_interval() {
        let b = EnumerationBudget::default();
        let x = interval(-1, 1);
        let id = DigitalMap::identity(&x);
        let u = is_universal(&id, b).unwrap();
        assert!(!u.holds);
        assert_eq!(u.witness.unwrap(), negation(&x));
        assert!(is_weakly_universal(&id, b).unwrap().holds);
    }

    #[test]
    fn universality_trivial_and_small_cases() {
        let b = EnumerationBudget::default();
        let dot = interval(0, 0);
        assert!(is_universal(&DigitalMap::identity(&dot), b).unwrap().holds);
        assert!(is_weakly_universal(&DigitalMap::identity(&dot), b).unwrap().holds);

        // [0,1]: continuous self-maps are the two constants, the identity and
        // the swap; each meets the identity at a strictly adjacent point.
        let pair = interval(0, 1);
        let id = DigitalMap::identity(&pair);
        let oracle = all_maps(&pair, &pair)
            .filter(|g| is_continuous(g).holds && *g != id)
            .all(|g| (0..2).any(|i| pair.adjacent_idx(i, g.apply_idx(i))));
        assert!(oracle);
        assert_eq!(is_universal(&id, b).unwrap().holds, oracle);

        let not_cont = DigitalMap::from_indices(interval(0, 2), interval(0, 2), vec![0, 2, 0]).unwrap();
        assert!(is_universal(&not_cont, b).is_err());
        assert!(is_weakly_universal(&not_cont, b).is_err());
    }

    #[test]
    fn square_has_no_afpp() {
        let b = EnumerationBudget::default();
        let sq = Arc::new(DigitalImage::grid(2, 2, 1).unwrap());
        let antipodal = DigitalMap::from_fn(sq.clone(), sq.clone(), |q| {
            p([1 - q.coords()[0], 1 - q.coords()[1]])
        })
        .unwrap();
        let v = has_afpp(&sq, b).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.as_ref(), Some(&antipodal));
        let w = is_weakly_universal(&DigitalMap::identity(&sq), b).unwrap();
        assert_eq!(w.witness, Some(antipodal));
        assert!(!has_afpp_cross_checked(&sq, b).unwrap().holds);
    }

    #[test]
    fn intervals_have_afpp() {
        let b = EnumerationBudget::default();
        for n in 0..=5 {
            let x = interval(0, n);
            assert!(has_afpp_cross_checked(&x, b).unwrap().holds, "[0,{n}]");
        }
        assert!(has_afpp(&interval(7, 7), b).unwrap().holds);
    }

    #[test]
    fn isomorphism_examples() {
        let b = EnumerationBudget::default();
        let x = interval(-1, 1);
        assert!(is_isomorphism(&DigitalMap::identity(&x)));
        assert!(is_isomorphism(&negation(&x)));
        let constant = DigitalMap::constant(&x, &x, &p([0])).unwrap();
        assert!(!is_isomorphism(&constant));
        assert!(find_isomorphism(&interval(0, 2), &Arc::new(DigitalImage::grid(2, 2, 1).unwrap()), b)
            .unwrap()
            .is_none());
        let shifted = interval(5, 7);
        let iso = find_isomorphism(&x, &shifted, b).unwrap().unwrap();
        assert!(is_isomorphism(&iso));
        let c4 = Arc::new(DigitalImage::grid(2, 2, 1).unwrap());
        let k4 = Arc::new(DigitalImage::grid(2, 2, 2).unwrap());
        assert!(find_isomorphism(&c4, &k4, b).unwrap().is_none());
    }

    #[test]
    fn brute_force_iterators() {
        let x = interval(0, 2);
        assert_eq!(all_maps(&x, &x).count(), 27);
        let bij: Vec<_> = all_bijections(&x).collect();
        assert_eq!(bij.len(), 6);
        assert!(bij.iter().all(DigitalMap::is_bijective));
        assert!(bij.windows(2).all(|w| w[0].table() < w[1].table()));
    }
}
