//! Digital metric spaces `(X, d, κ)`: a digital image paired with an `ℓ_p`
//! metric or an explicit distance table, plus the finite-prefix analysis of
//! sequences (eventual constancy and thresholded Cauchy behavior).

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Distance;
use crate::image::{DigitalImage, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpExponent {
    Finite(u32),
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Lp(LpExponent),
    /// Distances between image points, indexed in the image's point order.
    Table(Vec<Vec<BigRational>>),
}

impl Metric {
    pub fn lp(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("l_p needs p >= 1"));
        }
        Ok(Metric::Lp(LpExponent::Finite(p)))
    }

    pub fn l_inf() -> Self {
        Metric::Lp(LpExponent::Infinity)
    }
}

/// `ℓ_p` distance between two points of the same dimension.
pub fn lp_distance(a: &Point, b: &Point, exp: LpExponent) -> Result<Distance> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diffs = a.coords().iter().zip(b.coords()).map(|(x, y)| BigInt::from(*x) - BigInt::from(*y));
    Ok(match exp {
        LpExponent::Infinity => {
            let m = diffs.map(|d| d.abs()).max().unwrap_or_default();
            Distance::from_rational(BigRational::from_integer(m))
        }
        LpExponent::Finite(p) => {
            let sum: BigInt = diffs.map(|d| num_traits::pow(d.abs(), p as usize)).sum();
            Distance::root(BigRational::from_integer(sum), p)
        }
    })
}

/// A finite digital metric space.
#[derive(Debug, Clone)]
pub struct DigitalMetricSpace {
    image: Arc<DigitalImage>,
    metric: Metric,
}

impl DigitalMetricSpace {
    /// Table metrics are checked against every metric axiom.
    pub fn new(image: Arc<DigitalImage>, metric: Metric) -> Result<Self> {
        if let Metric::Table(rows) = &metric {
            validate_table(rows, image.len())?;
        }
        Ok(Self { image, metric })
    }

    pub fn image(&self) -> &Arc<DigitalImage> {
        &self.image
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn distance_idx(&self, i: usize, j: usize) -> Distance {
        match &self.metric {
            Metric::Lp(exp) => {
                lp_distance(self.image.point(i), self.image.point(j), *exp).expect("image points share a dimension")
            }
            Metric::Table(rows) => Distance::from_rational(rows[i][j].clone()),
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    fn extremum(&self, pairs: impl Iterator<Item = (usize, usize)>, want_max: bool) -> Option<Extremum> {
        let mut best: Option<(Distance, usize, usize)> = None;
        for (i, j) in pairs {
            let d = self.distance_idx(i, j);
            let better = match &best {
                None => true,
                Some((b, _, _)) => {
                    if want_max {
                        d > *b
                    } else {
                        d < *b
                    }
                }
            };
            if better {
                best = Some((d, i, j));
            }
        }
        best.map(|(value, i, j)| Extremum {
            value,
            pair: (self.image.point(i).clone(), self.image.point(j).clone()),
        })
    }
}

#[allow(clippy::needless_range_loop)]
fn validate_table(rows: &[Vec<BigRational>], n: usize) -> Result<()> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid(format!("distance table must be {n} x {n}")));
    }
    for i in 0..n {
        if !rows[i][i].is_zero() {
            return Err(Error::invalid(format!("d(x_{i}, x_{i}) must be 0")));
        }
        for j in 0..n {
            if rows[i][j].is_negative() {
                return Err(Error::invalid(format!("negative distance at ({i}, {j})")));
            }
            if i != j && rows[i][j].is_zero() {
                return Err(Error::invalid(format!("distinct points {i} and {j} at distance 0")));
            }
            if rows[i][j] != rows[j][i] {
                return Err(Error::invalid(format!("table is not symmetric at ({i}, {j})")));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if rows[i][k] > &rows[i][j] + &rows[j][k] {
                    return Err(Error::invalid(format!(
                        "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn distance(s: &DigitalMetricSpace, x: &Point, y: &Point) -> Result<Distance> {
    let i = s.image.index_of(x)?;
    let j = s.image.index_of(y)?;
    Ok(s.distance_idx(i, j))
}

/// An extreme distance together with the first pair attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extremum {
    pub value: Distance,
    pub pair: (Point, Point),
}

/// Smallest distance between distinct points.
pub fn min_gap(s: &DigitalMetricSpace) -> Result<Extremum> {
    s.extremum(s.pairs(), false)
        .ok_or_else(|| Error::invalid("min gap needs at least two points"))
}

/// Largest distance between points; zero on a singleton.
pub fn diameter(s: &DigitalMetricSpace) -> Extremum {
    s.extremum(s.pairs(), true).unwrap_or_else(|| {
        let p = s.image.point(0).clone();
        Extremum {
            value: Distance::zero(),
            pair: (p.clone(), p),
        }
    })
}

/// Smallest and largest distance over adjacent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjacencyGaps {
    pub d0: Extremum,
    pub d1: Extremum,
}

pub fn adjacency_gap_stats(s: &DigitalMetricSpace) -> Result<AdjacencyGaps> {
    let d0 = s
        .extremum(s.image.edges(), false)
        .ok_or_else(|| Error::invalid("image has no adjacent pair"))?;
    let d1 = s.extremum(s.image.edges(), true).expect("edge set is non-empty");
    Ok(AdjacencyGaps { d0, d1 })
}

/// A finite prefix of a sequence of points, e.g. an orbit generated by a solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointSequence {
    pub terms: Vec<Point>,
    /// The generation bound used to produce the prefix, if any.
    pub cap: Option<usize>,
}

impl PointSequence {
    pub fn new(terms: Vec<Point>) -> Self {
        Self { terms, cap: None }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub eventually_constant: bool,
    /// Least index from which the prefix is constant.
    pub index: Option<usize>,
}

/// Eventual constancy as observed on a finite prefix.
///
/// The prefix counts as eventually constant when its final constant run is
/// longer than everything before it, i.e. it stabilizes strictly before the
/// midpoint. A prefix whose last value only just appeared (such as the
/// period-4 pattern `0,0,1,1`) is therefore not eventually constant.
pub fn is_eventually_constant(seq: &PointSequence) -> Result<Stabilization> {
    let terms = &seq.terms;
    let last = terms.last().ok_or_else(|| Error::invalid("empty sequence"))?;
    let run = terms.iter().rev().take_while(|t| *t == last).count();
    let start = terms.len() - run;
    Ok(if 2 * run > terms.len() {
        Stabilization {
            eventually_constant: true,
            index: Some(start),
        }
    } else {
        Stabilization {
            eventually_constant: false,
            index: None,
        }
    })
}

/// Thresholded Cauchy analysis of a finite prefix.
#[derive(Debug, Clone, Serialize)]
pub struct CauchyReport {
    /// `tail_sups[n]` is the largest distance between two terms at index `>= n`.
    pub tail_sups: Vec<Distance>,
    /// Largest `d(y_{2n}, y_{2n+1})`; `None` for a single term.
    pub max_even_odd_gap: Option<Distance>,
    pub threshold: Option<Distance>,
    /// Least `n` in the first half of the prefix whose tail has all pairwise
    /// distances below the threshold.
    pub cauchy_tail_start: Option<usize>,
    pub cauchy_at_threshold: Option<bool>,
    pub min_gap: Option<Distance>,
    pub stabilization: Stabilization,
    /// "threshold <= min gap and Cauchy at threshold ⇒ eventually constant";
    /// `None` when no threshold or min gap is available.
    pub proposition_holds: Option<bool>,
}

/// Analyses `seq` inside `s`. Without an explicit threshold the space's min
/// gap is used (when `|X| >= 2`).
pub fn cauchy_modulus(
    seq: &PointSequence,
    s: &DigitalMetricSpace,
    threshold: Option<Distance>,
) -> Result<CauchyReport> {
    let idx = seq
        .terms
        .iter()
        .map(|t| s.image.index_of(t))
        .collect::<Result<Vec<_>>>()?;
    let stabilization = is_eventually_constant(seq)?;
    let len = idx.len();

    let mut tail_sups = vec![Distance::zero(); len];
    for n in (0..len.saturating_sub(1)).rev() {
        let mut sup = tail_sups[n + 1].clone();
        for &j in &idx[n + 1..] {
            let d = s.distance_idx(idx[n], j);
            if d > sup {
                sup = d;
            }
        }
        tail_sups[n] = sup;
    }

    let max_even_odd_gap = (0..len / 2).map(|n| s.distance_idx(idx[2 * n], idx[2 * n + 1])).max();

    let gap = min_gap(s).ok().map(|e| e.value);
    let threshold = threshold.or_else(|| gap.clone());
    let cauchy_tail_start = threshold
        .as_ref()
        .and_then(|a| (0..len).take_while(|n| 2 * n < len).find(|&n| tail_sups[n] < *a));
    let cauchy_at_threshold = threshold.as_ref().map(|_| cauchy_tail_start.is_some());
    let proposition_holds = match (&threshold, &gap) {
        (Some(a), Some(g)) => {
            let premise = a <= g && cauchy_tail_start.is_some();
            Some(!premise || stabilization.eventually_constant)
        }
        _ => None,
    };

    Ok(CauchyReport {
        tail_sups,
        max_even_odd_gap,
        threshold,
        cauchy_tail_start,
        cauchy_at_threshold,
        min_gap: gap,
        stabilization,
        proposition_holds,
    })
}
