//! Hypothesis validators and constructive solvers for fixed-point theorems on
//! digital metric spaces. Every solver returns a [`TheoremReport`]; its
//! conclusion is only filled in when every hypothesis holds, and a conclusion
//! that fails to verify is reported as [`Error::Contradiction`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{BudgetExceeded, BudgetLimit, Error, Result};
use crate::exact::{format_rational, Distance, RadicalSum};
use crate::image::{is_connected, Point};
use crate::maps::{self, DigitalMap};
use crate::metric::{adjacency_gap_stats, diameter, min_gap, DigitalMetricSpace, PointSequence};
use crate::Verdict;

/// Spaces up to this size get an exhaustive-scan cross-check attached.
pub const ORACLE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { point: Point },
    Pair { x: Point, y: Point },
    Note { text: String },
}

impl Witness {
    fn pair(x: &Point, y: &Point) -> Self {
        Witness::Pair {
            x: x.clone(),
            y: y.clone(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Point { point } => write!(f, "{point}"),
            Witness::Pair { x, y } => write!(f, "({x}, {y})"),
            Witness::Note { text } => f.write_str(text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conclusion {
    pub statement: String,
    /// Points the conclusion is about, e.g. the fixed points found.
    pub points: Vec<Point>,
    /// False when a hypothesis could only be checked on samples.
    pub certified: bool,
}

/// Exhaustive-scan cross-check of a solver's answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub description: String,
    pub expected: Vec<Point>,
    pub found: Vec<Point>,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: Option<Conclusion>,
    pub quantities: BTreeMap<String, String>,
    pub details: Vec<String>,
    pub flags: Vec<String>,
    pub orbit: Option<PointSequence>,
    pub oracle: Option<OracleCheck>,
}

impl TheoremReport {
    fn new(theorem: &str) -> Self {
        Self {
            theorem: theorem.to_string(),
            hypotheses: Vec::new(),
            conclusion: None,
            quantities: BTreeMap::new(),
            details: Vec::new(),
            flags: Vec::new(),
            orbit: None,
            oracle: None,
        }
    }

    fn hypothesis(&mut self, name: &str, holds: bool, witness: Option<Witness>) {
        self.hypotheses.push(Hypothesis {
            name: name.to_string(),
            holds,
            witness,
        });
    }

    fn verdict<W>(&mut self, name: &str, v: Verdict<W>, to_witness: impl FnOnce(W) -> Witness) {
        let w = v.witness.map(to_witness);
        self.hypothesis(name, v.holds, w);
    }

    fn quantity(&mut self, name: &str, value: impl fmt::Display) {
        self.quantities.insert(name.to_string(), value.to_string());
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }

    fn conclude(&mut self, statement: &str, points: Vec<Point>) {
        assert!(self.hypotheses_hold(), "conclusion asserted with a failed hypothesis");
        self.conclusion = Some(Conclusion {
            statement: statement.to_string(),
            points,
            certified: self.flags.is_empty(),
        });
    }

    fn attach_oracle(&mut self, description: &str, expected: Vec<Point>, found: Vec<Point>) -> Result<()> {
        let agrees = expected == found;
        self.oracle = Some(OracleCheck {
            description: description.to_string(),
            expected,
            found,
            agrees,
        });
        if agrees {
            Ok(())
        } else {
            Err(Error::Contradiction(format!("{}: solver disagrees with exhaustive scan", self.theorem)))
        }
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem: {}", self.theorem)?;
        for h in &self.hypotheses {
            let mark = if h.holds { "holds" } else { "FAILS" };
            match &h.witness {
                Some(w) => writeln!(f, "  {:<40} {mark}  [{w}]", h.name)?,
                None => writeln!(f, "  {:<40} {mark}", h.name)?,
            }
        }
        for (k, v) in &self.quantities {
            writeln!(f, "  {k} = {v}")?;
        }
        for d in &self.details {
            writeln!(f, "  {d}")?;
        }
        for flag in &self.flags {
            writeln!(f, "  flag: {flag}")?;
        }
        if let Some(orbit) = &self.orbit {
            let terms: Vec<String> = orbit.terms.iter().map(|p| p.to_string()).collect();
            writeln!(f, "  orbit: {}", terms.join(" -> "))?;
        }
        match &self.conclusion {
            Some(c) => {
                let pts: Vec<String> = c.points.iter().map(|p| p.to_string()).collect();
                let cert = if c.certified { "" } else { " (uncertified)" };
                writeln!(f, "conclusion{cert}: {} {{{}}}", c.statement, pts.join(", "))?;
            }
            None => writeln!(f, "conclusion: not asserted")?,
        }
        if let Some(o) = &self.oracle {
            let mark = if o.agrees { "agrees" } else { "DISAGREES" };
            writeln!(f, "oracle: {} {mark}", o.description)?;
        }
        Ok(())
    }
}

fn require_self_map(s: &DigitalMetricSpace, t: &DigitalMap, name: &str) -> Result<()> {
    if **t.domain() != **s.image() || **t.codomain() != **s.image() {
        return Err(Error::invalid(format!("{name} is not a self-map of the space's image")));
    }
    Ok(())
}

fn unordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

fn pt(s: &DigitalMetricSpace, i: usize) -> &Point {
    s.image().point(i)
}

/// `d(T x, T y) >= k d(x, y)` on every pair; the witness is the first
/// violating pair.
pub fn is_expansive(s: &DigitalMetricSpace, t: &DigitalMap, k: &BigRational) -> Result<Verdict<(Point, Point)>> {
    require_self_map(s, t, "T")?;
    if *k <= BigRational::one() {
        return Err(Error::invalid(format!("expansion factor must exceed 1, got {}", format_rational(k))));
    }
    for (i, j) in unordered_pairs(s.len()) {
        if s.distance_idx(t.apply_idx(i), t.apply_idx(j)) < s.distance_idx(i, j).scale(k) {
            return Ok(Verdict::no((pt(s, i).clone(), pt(s, j).clone())));
        }
    }
    Ok(Verdict::yes())
}

/// Largest `k` with `d(T x, T y) >= k d(x, y)` on all distinct pairs, i.e. the
/// minimum distance ratio. Needs at least two points.
pub fn max_feasible_expansion(s: &DigitalMetricSpace, t: &DigitalMap) -> Result<Distance> {
    require_self_map(s, t, "T")?;
    unordered_pairs(s.len())
        .map(|(i, j)| {
            s.distance_idx(t.apply_idx(i), t.apply_idx(j))
                .ratio(&s.distance_idx(i, j))
                .expect("distinct points are at positive distance")
        })
        .min()
        .ok_or_else(|| Error::invalid("expansion factor needs at least two points"))
}

/// No onto self-map of a finite space is expansive: every bijection's maximal
/// feasible expansion factor is at most 1.
pub fn expansive_onto_impossibility(s: &DigitalMetricSpace) -> Result<TheoremReport> {
    if s.len() < 2 {
        return Err(Error::invalid("impossibility check needs at least two points"));
    }
    let mut r = TheoremReport::new("expansive_onto_impossibility");
    r.hypothesis("finite space with at least two points", true, None);
    let gap = min_gap(s)?;
    let diam = diameter(s);
    r.quantity("min_gap", &gap.value);
    r.quantity("diameter", &diam.value);
    r.quantity("diameter_pair", Witness::pair(&diam.pair.0, &diam.pair.1));

    let one = Distance::from_integer(1);
    let mut best: Option<Distance> = None;
    let mut count = 0u64;
    for t in maps::all_bijections(s.image()) {
        let k = max_feasible_expansion(s, &t)?;
        let images: Vec<String> = t.pairs().map(|(_, y)| y.to_string()).collect();
        r.details.push(format!("bijection [{}]: max feasible k = {k}", images.join(", ")));
        if k > one {
            return Err(Error::Contradiction(format!(
                "bijection [{}] is expansive with k = {k}",
                images.join(", ")
            )));
        }
        if best.as_ref().is_none_or(|b| k > *b) {
            best = Some(k);
        }
        count += 1;
    }
    r.quantity("bijections", count);
    r.quantity("max_feasible_k", best.expect("at least one bijection"));
    r.conclude("no onto self-map is expansive", Vec::new());
    Ok(r)
}

/// Checks `d(T x, T y) >= k [d(x, T x) + d(y, T y)]` on all pairs (distinct
/// pairs first, then the diagonal) and, when it holds, that `T` is the
/// identity.
pub fn sum_expansive_identity_check(s: &DigitalMetricSpace, t: &DigitalMap, k: &BigRational) -> Result<TheoremReport> {
    require_self_map(s, t, "T")?;
    if *k < BigRational::new(1.into(), 2.into()) {
        return Err(Error::invalid(format!("k must be at least 1/2, got {}", format_rational(k))));
    }
    let n = s.len();
    let moved: Vec<Distance> = (0..n).map(|i| s.distance_idx(i, t.apply_idx(i))).collect();
    let violated = unordered_pairs(n).chain((0..n).map(|i| (i, i))).find(|&(i, j)| {
        let lhs = s.distance_idx(t.apply_idx(i), t.apply_idx(j));
        RadicalSum::new()
            .plus_distance(&lhs)
            .minus(k.clone(), &moved[i])
            .minus(k.clone(), &moved[j])
            .signum()
            .is_lt()
    });
    let mut r = TheoremReport::new("sum_expansive_identity");
    r.quantity("k", format_rational(k));
    r.hypothesis(
        "d(Tx,Ty) >= k[d(x,Tx) + d(y,Ty)]",
        violated.is_none(),
        violated.map(|(i, j)| Witness::pair(pt(s, i), pt(s, j))),
    );
    if r.hypotheses_hold() {
        let fixed = maps::fixed_points(t)?;
        if fixed.len() != n {
            return Err(Error::Contradiction("sum-expansive map is not the identity".into()));
        }
        r.conclude("T is the identity; fixed points", fixed);
    }
    Ok(r)
}

/// Candidate forms of `μ(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuChoice {
    /// `d(x, y)`
    Plain,
    /// `(d(x, Tx) + d(y, Ty)) / 2`
    HalfSumSelf,
    /// `(d(x, Ty) + d(y, Tx)) / 2`; representable but not admitted by the theorem.
    HalfSumCross,
}

impl std::str::FromStr for MuChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" => Ok(MuChoice::Plain),
            "halfsum" | "half_sum" | "half_sum_self" => Ok(MuChoice::HalfSumSelf),
            "halfsum_cross" | "half_sum_cross" => Ok(MuChoice::HalfSumCross),
            other => Err(Error::invalid(format!("unknown mu choice `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansiveParams {
    pub k: BigRational,
    pub mu_choices: Vec<MuChoice>,
}

impl ExpansiveParams {
    pub fn new(k: BigRational, mu_choices: Vec<MuChoice>) -> Result<Self> {
        if !k.is_positive() {
            return Err(Error::invalid("k must be positive"));
        }
        if mu_choices.is_empty() {
            return Err(Error::invalid("at least one mu choice is required"));
        }
        Ok(Self { k, mu_choices })
    }
}

/// `d(Tx,Ty) - k μ(x,y)` as an exact sum.
fn expansion_slack(s: &DigitalMetricSpace, t: &DigitalMap, k: &BigRational, mu: MuChoice, i: usize, j: usize) -> RadicalSum {
    let lhs = RadicalSum::new().plus_distance(&s.distance_idx(t.apply_idx(i), t.apply_idx(j)));
    let half = k / BigRational::from_integer(2.into());
    match mu {
        MuChoice::Plain => lhs.minus(k.clone(), &s.distance_idx(i, j)),
        MuChoice::HalfSumSelf => lhs
            .minus(half.clone(), &s.distance_idx(i, t.apply_idx(i)))
            .minus(half, &s.distance_idx(j, t.apply_idx(j))),
        MuChoice::HalfSumCross => lhs
            .minus(half.clone(), &s.distance_idx(i, t.apply_idx(j)))
            .minus(half, &s.distance_idx(j, t.apply_idx(i))),
    }
}

fn mu_value(s: &DigitalMetricSpace, t: &DigitalMap, mu: MuChoice, i: usize, j: usize) -> String {
    let d = |a, b| s.distance_idx(a, b);
    match mu {
        MuChoice::Plain => d(i, j).to_string(),
        MuChoice::HalfSumSelf => format!("({} + {})/2", d(i, t.apply_idx(i)), d(j, t.apply_idx(j))),
        MuChoice::HalfSumCross => format!("({} + {})/2", d(i, t.apply_idx(j)), d(j, t.apply_idx(i))),
    }
}

/// Onto `T` with `d(Tx, Ty) >= k μ(x, y)` for every pair and some selected
/// `μ`, where `1 < k < 2`, has a fixed point.
pub fn generalized_expansive_fixed_point(
    s: &DigitalMetricSpace,
    t: &DigitalMap,
    params: &ExpansiveParams,
) -> Result<TheoremReport> {
    require_self_map(s, t, "T")?;
    let k = &params.k;
    let (one, two) = (BigRational::one(), BigRational::from_integer(2.into()));
    if *k <= one || *k >= two {
        return Err(Error::invalid(format!("k must lie in (1, 2), got {}", format_rational(k))));
    }
    if params.mu_choices.is_empty() {
        return Err(Error::invalid("at least one mu choice is required"));
    }
    if params.mu_choices.contains(&MuChoice::HalfSumCross) {
        return Err(Error::invalid("the cross half-sum is not an admissible mu for this theorem"));
    }
    let n = s.len();
    let mut r = TheoremReport::new("generalized_expansive_fixed_point");
    r.quantity("k", format_rational(k));

    let image = t.image_indices();
    let missed = (0..n).find(|i| image.binary_search(i).is_err());
    r.hypothesis("T onto", missed.is_none(), missed.map(|i| Witness::Point { point: pt(s, i).clone() }));

    let violated = unordered_pairs(n).chain((0..n).map(|i| (i, i))).find(|&(i, j)| {
        params
            .mu_choices
            .iter()
            .all(|&mu| expansion_slack(s, t, k, mu, i, j).signum().is_lt())
    });
    r.hypothesis(
        "d(Tx,Ty) >= k mu(x,y) for some admitted mu",
        violated.is_none(),
        violated.map(|(i, j)| Witness::pair(pt(s, i), pt(s, j))),
    );

    if n >= 2 {
        let gap = min_gap(s)?;
        r.quantity("m", &gap.value);
        r.quantity("k*m", gap.value.scale(k));
        r.quantity("(x0,y0)", Witness::pair(&gap.pair.0, &gap.pair.1));
        if missed.is_none() {
            // Preimages used by the contradiction argument.
            let pre = |p: &Point| t.pairs().find(|(_, y)| *y == p).map(|(x, _)| x.clone()).expect("T is onto");
            let (xp, yp) = (pre(&gap.pair.0), pre(&gap.pair.1));
            let (a, b) = (s.image().index_of(&xp)?, s.image().index_of(&yp)?);
            for &mu in &params.mu_choices {
                r.quantity(&format!("mu_{}(x',y')", mu_name(mu)), mu_value(s, t, mu, a, b));
            }
            r.quantity("(x',y')", Witness::pair(&xp, &yp));
        }
    }

    if r.hypotheses_hold() {
        let fixed = maps::fixed_points(t)?;
        if fixed.is_empty() {
            return Err(Error::Contradiction(
                "hypotheses hold but T has no fixed point (m >= k m with k > 1)".into(),
            ));
        }
        r.conclude("T has a fixed point; fixed points", fixed);
    }
    Ok(r)
}

fn mu_name(mu: MuChoice) -> &'static str {
    match mu {
        MuChoice::Plain => "plain",
        MuChoice::HalfSumSelf => "half_sum_self",
        MuChoice::HalfSumCross => "half_sum_cross",
    }
}

/// A nondecreasing `ψ : [0, ∞) → [0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    /// `ψ(t) = c t` with `0 < c < 1`; summability of the iterates is certified.
    Linear(BigRational),
    /// Sampled values `(t, ψ(t))`; evaluation needs an exact grid match and
    /// summability is not certified.
    Table(Vec<(BigRational, BigRational)>),
}

impl Psi {
    fn validate(&self) -> Result<()> {
        match self {
            Psi::Linear(c) => {
                if !c.is_positive() || *c >= BigRational::one() {
                    return Err(Error::invalid(format!("linear psi needs 0 < c < 1, got {}", format_rational(c))));
                }
            }
            Psi::Table(rows) => {
                if rows.is_empty() {
                    return Err(Error::invalid("psi table is empty"));
                }
                for (t, v) in rows {
                    if t.is_negative() || v.is_negative() {
                        return Err(Error::invalid("psi table entries must be nonnegative"));
                    }
                }
                for w in rows.windows(2) {
                    if w[0].0 >= w[1].0 {
                        return Err(Error::invalid("psi table arguments must be strictly increasing"));
                    }
                    if w[0].1 > w[1].1 {
                        return Err(Error::invalid("psi must be nondecreasing"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: &Distance) -> Result<Distance> {
        match self {
            Psi::Linear(c) => Ok(t.scale(c)),
            Psi::Table(rows) => {
                let q = t
                    .as_rational()
                    .ok_or_else(|| Error::invalid(format!("psi table has no entry for {t}")))?;
                rows.iter()
                    .find(|(x, _)| x == q)
                    .map(|(_, v)| Distance::from_rational(v.clone()))
                    .ok_or_else(|| Error::invalid(format!("psi table has no entry for {t}")))
            }
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Psi::Linear(_))
    }
}

/// `α` as a table over the image's points plus `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPsi {
    pub alpha: Vec<Vec<BigRational>>,
    pub psi: Psi,
}

impl AlphaPsi {
    pub fn new(alpha: Vec<Vec<BigRational>>, psi: Psi) -> Result<Self> {
        psi.validate()?;
        if alpha.iter().flatten().any(|a| a.is_negative()) {
            return Err(Error::invalid("alpha must be nonnegative"));
        }
        Ok(Self { alpha, psi })
    }

    /// `α(x, y) = 1` when `x = y`, else 0.
    pub fn diagonal_alpha(n: usize) -> Vec<Vec<BigRational>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect()
    }

    fn check_shape(&self, n: usize) -> Result<()> {
        if self.alpha.len() != n || self.alpha.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("alpha table must be {n} x {n}")));
        }
        Ok(())
    }

    fn at_least_one(&self, i: usize, j: usize) -> bool {
        self.alpha[i][j] >= BigRational::one()
    }
}

/// Checks the α–ψ expansion inequality, α-admissibility of `T⁻¹` and the
/// existence of a starting point.
pub fn alpha_psi_validate(s: &DigitalMetricSpace, t: &DigitalMap, ap: &AlphaPsi) -> Result<TheoremReport> {
    require_self_map(s, t, "T")?;
    let inv = t.inverse().ok_or_else(|| Error::invalid("T must be bijective"))?;
    ap.psi.validate()?;
    let n = s.len();
    ap.check_shape(n)?;
    let mut r = TheoremReport::new("alpha_psi_fixed_point");
    if !ap.psi.is_certified() {
        r.flags.push("psi certificate missing: summability of iterates not verified".into());
    }

    let mut violated = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let lhs = ap.psi.eval(&s.distance_idx(t.apply_idx(i), t.apply_idx(j)))?;
            if lhs < s.distance_idx(i, j).scale(&ap.alpha[i][j]) {
                violated = Some((i, j));
                break 'outer;
            }
        }
    }
    r.hypothesis(
        "psi(d(Tx,Ty)) >= alpha(x,y) d(x,y)",
        violated.is_none(),
        violated.map(|(i, j)| Witness::pair(pt(s, i), pt(s, j))),
    );

    let not_admissible = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| ap.at_least_one(i, j) && !ap.at_least_one(inv.apply_idx(i), inv.apply_idx(j)));
    r.hypothesis(
        "T^-1 alpha-admissible",
        not_admissible.is_none(),
        not_admissible.map(|(i, j)| Witness::pair(pt(s, i), pt(s, j))),
    );

    let start = (0..n).find(|&i| ap.at_least_one(i, inv.apply_idx(i)));
    r.hypothesis(
        "exists x0 with alpha(x0, T^-1 x0) >= 1",
        start.is_some(),
        start.map(|i| Witness::Point { point: pt(s, i).clone() }),
    );
    Ok(r)
}

/// Iterates `x_{n+1} = T⁻¹(x_n)` from `x0` until two consecutive terms agree.
/// `cap` bounds the number of terms examined (default `|X| + 1`).
pub fn alpha_psi_fixed_point(
    s: &DigitalMetricSpace,
    t: &DigitalMap,
    ap: &AlphaPsi,
    x0: &Point,
    cap: Option<usize>,
) -> Result<TheoremReport> {
    let mut r = alpha_psi_validate(s, t, ap)?;
    let inv = t.inverse().expect("validated as bijective");
    let start = s.image().index_of(x0)?;
    let cap = cap.unwrap_or(s.len() + 1).max(1);
    r.hypothesis(
        "alpha(x0, T^-1 x0) >= 1",
        ap.at_least_one(start, inv.apply_idx(start)),
        Some(Witness::Point { point: x0.clone() }),
    );

    let orbit = iterate_until_stable(start, cap, |i| Some(inv.apply_idx(i)))?;
    let terms = orbit.terms.iter().map(|&i| pt(s, i).clone()).collect();
    r.orbit = Some(PointSequence { terms, cap: Some(cap) });
    if !r.hypotheses_hold() {
        return Ok(r);
    }
    let Some(m) = orbit.stable_at else {
        return Err(Error::Budget(BudgetExceeded {
            limit: BudgetLimit::Steps(cap),
            maps: 0,
            nodes: cap as u64,
        }));
    };
    let p = orbit.terms[m + 1];
    if t.apply_idx(p) != p {
        return Err(Error::Contradiction("stable T^-1 orbit ended off a fixed point".into()));
    }
    r.quantity("stabilization_index", m);
    r.conclude("T has a fixed point", vec![pt(s, p).clone()]);
    if s.len() <= ORACLE_LIMIT {
        let fixed = maps::fixed_points(t)?;
        let found = pt(s, p).clone();
        let expected = if fixed.contains(&found) { vec![found.clone()] } else { fixed };
        r.attach_oracle("solver point lies in fixed_points(T)", expected, vec![found])?;
    }
    Ok(r)
}

struct IndexOrbit {
    terms: Vec<usize>,
    /// Least `m` with `terms[m] == terms[m + 1]`.
    stable_at: Option<usize>,
}

/// Runs `step` until two consecutive terms coincide or `cap` terms exist,
/// then keeps iterating a stable orbit until its constant tail covers more
/// than half of the prefix.
fn iterate_until_stable(start: usize, cap: usize, mut step: impl FnMut(usize) -> Option<usize>) -> Result<IndexOrbit> {
    let mut terms = vec![start];
    let mut stable_at = None;
    while terms.len() < cap {
        let last = *terms.last().expect("non-empty");
        let next = step(last).ok_or_else(|| Error::Contradiction("orbit step has no successor".into()))?;
        terms.push(next);
        if next == last {
            stable_at = Some(terms.len() - 2);
            break;
        }
    }
    if let Some(m) = stable_at {
        let value = terms[m];
        while 2 * (terms.len() - m) <= terms.len() + 1 {
            let next = step(value).expect("stable value has a successor");
            debug_assert_eq!(next, value);
            terms.push(next);
        }
    }
    Ok(IndexOrbit { terms, stable_at })
}

/// `d(S(T x), T(S x)) <= d(S x, T x)` for every `x`.
pub fn is_weakly_commuting(s: &DigitalMetricSpace, sm: &DigitalMap, t: &DigitalMap) -> Result<Verdict<Point>> {
    require_self_map(s, sm, "S")?;
    require_self_map(s, t, "T")?;
    for i in 0..s.len() {
        let st = sm.apply_idx(t.apply_idx(i));
        let ts = t.apply_idx(sm.apply_idx(i));
        if s.distance_idx(st, ts) > s.distance_idx(sm.apply_idx(i), t.apply_idx(i)) {
            return Ok(Verdict::no(pt(s, i).clone()));
        }
    }
    Ok(Verdict::yes())
}

/// `S` and `T` commute at every coincidence point.
pub fn is_weakly_compatible(sm: &DigitalMap, t: &DigitalMap) -> Result<Verdict<Point>> {
    let img = sm.domain();
    if **sm.codomain() != **img || **t.domain() != **img || **t.codomain() != **img {
        return Err(Error::invalid("S and T must be self-maps of one image"));
    }
    for i in 0..img.len() {
        if sm.apply_idx(i) == t.apply_idx(i) && sm.apply_idx(t.apply_idx(i)) != t.apply_idx(sm.apply_idx(i)) {
            return Ok(Verdict::no(img.point(i).clone()));
        }
    }
    Ok(Verdict::yes())
}

/// Outcome of checking `T(X) ⊆ S(X)` and `d(Tx,Ty) <= α d(Sx,Sy)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionCheck {
    /// Witness: a value of `T` outside `S(X)`.
    pub inclusion: Verdict<Point>,
    /// Witness: the first pair violating the contraction inequality.
    pub contraction: Verdict<(Point, Point)>,
}

impl ContractionCheck {
    pub fn holds(&self) -> bool {
        self.inclusion.holds && self.contraction.holds
    }
}

fn check_alpha_in_unit_interval(alpha: &BigRational) -> Result<()> {
    if !alpha.is_positive() || *alpha >= BigRational::one() {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", format_rational(alpha))));
    }
    Ok(())
}

fn first_contraction_violation(s: &DigitalMetricSpace, sm: &DigitalMap, t: &DigitalMap, alpha: &BigRational) -> Option<(usize, usize)> {
    unordered_pairs(s.len()).find(|&(i, j)| {
        s.distance_idx(t.apply_idx(i), t.apply_idx(j)) > s.distance_idx(sm.apply_idx(i), sm.apply_idx(j)).scale(alpha)
    })
}

pub fn contraction_pair_check(
    s: &DigitalMetricSpace,
    sm: &DigitalMap,
    t: &DigitalMap,
    alpha: &BigRational,
) -> Result<ContractionCheck> {
    require_self_map(s, sm, "S")?;
    require_self_map(s, t, "T")?;
    check_alpha_in_unit_interval(alpha)?;
    let s_image = sm.image_indices();
    let inclusion = match t.image_indices().into_iter().find(|v| s_image.binary_search(v).is_err()) {
        Some(v) => Verdict::no(pt(s, v).clone()),
        None => Verdict::yes(),
    };
    let contraction = match first_contraction_violation(s, sm, t, alpha) {
        Some((i, j)) => Verdict::no((pt(s, i).clone(), pt(s, j).clone())),
        None => Verdict::yes(),
    };
    Ok(ContractionCheck { inclusion, contraction })
}

/// Smallest `α` for which `d(Tx,Ty) <= α d(Sx,Sy)` holds on every pair, or
/// `None` when some pair has `S x = S y` but `T x != T y`.
pub fn contraction_ratio(s: &DigitalMetricSpace, sm: &DigitalMap, t: &DigitalMap) -> Result<Option<Distance>> {
    require_self_map(s, sm, "S")?;
    require_self_map(s, t, "T")?;
    let mut worst = Distance::zero();
    for (i, j) in unordered_pairs(s.len()) {
        let dt = s.distance_idx(t.apply_idx(i), t.apply_idx(j));
        let ds = s.distance_idx(sm.apply_idx(i), sm.apply_idx(j));
        match dt.ratio(&ds) {
            Some(q) => worst = worst.max(q),
            None if dt.is_zero() => {}
            None => return Ok(None),
        }
    }
    Ok(Some(worst))
}

/// All `x` with `S x = T x = x`.
pub fn common_fixed_points(sm: &DigitalMap, t: &DigitalMap) -> Vec<Point> {
    (0..sm.domain().len())
        .filter(|&i| sm.apply_idx(i) == i && t.apply_idx(i) == i)
        .map(|i| sm.domain().point(i).clone())
        .collect()
}

/// Builds the orbit `S(x_{n+1}) = T(x_n)` (lexicographically least preimage)
/// and returns the unique common fixed point `T(z)`.
pub fn weakly_commuting_common_fixed_point(
    s: &DigitalMetricSpace,
    sm: &DigitalMap,
    t: &DigitalMap,
    alpha: &BigRational,
    x0: &Point,
    cap: Option<usize>,
) -> Result<TheoremReport> {
    let check = contraction_pair_check(s, sm, t, alpha)?;
    let start = s.image().index_of(x0)?;
    let cap = cap.unwrap_or(s.len() + 1).max(1);
    let mut r = TheoremReport::new("weakly_commuting_common_fixed_point");
    r.quantity("alpha", format_rational(alpha));
    r.verdict("T(X) subset of S(X)", check.inclusion, |p| Witness::Point { point: p });
    r.verdict("d(Tx,Ty) <= alpha d(Sx,Sy)", check.contraction, |(x, y)| Witness::Pair { x, y });
    r.verdict("S and T weakly commuting", is_weakly_commuting(s, sm, t)?, |p| Witness::Point {
        point: p,
    });
    if !r.hypotheses_hold() {
        return Ok(r);
    }

    // Points are sorted, so the first preimage is the lexicographically least.
    let n = s.len();
    let mut least_preimage = vec![None; n];
    for i in (0..n).rev() {
        least_preimage[sm.apply_idx(i)] = Some(i);
    }
    let orbit = iterate_until_stable(start, cap, |i| least_preimage[t.apply_idx(i)])?;
    let terms = orbit.terms.iter().map(|&i| pt(s, i).clone()).collect();
    r.orbit = Some(PointSequence { terms, cap: Some(cap) });
    let Some(m) = orbit.stable_at else {
        return Err(Error::Budget(BudgetExceeded {
            limit: BudgetLimit::Steps(cap),
            maps: 0,
            nodes: cap as u64,
        }));
    };
    let x1 = orbit.terms[1.min(orbit.terms.len() - 1)];
    r.quantity(
        "d(S x0, S x1)",
        s.distance_idx(sm.apply_idx(start), sm.apply_idx(x1)),
    );
    r.quantity("stabilization_index", m);
    let z = sm.apply_idx(orbit.terms[m]);
    let w = t.apply_idx(z);
    r.quantity("z", pt(s, z));
    r.quantity("T(z)", pt(s, w));
    if sm.apply_idx(z) != t.apply_idx(z) {
        return Err(Error::Contradiction("S(z) != T(z) at the orbit limit".into()));
    }
    if sm.apply_idx(w) != w || t.apply_idx(w) != w {
        return Err(Error::Contradiction("T(z) is not a common fixed point".into()));
    }
    r.conclude("unique common fixed point", vec![pt(s, w).clone()]);
    if n <= ORACLE_LIMIT {
        let all = common_fixed_points(sm, t);
        for (a, b) in unordered_pairs(all.len()) {
            let (ia, ib) = (s.image().index_of(&all[a])?, s.image().index_of(&all[b])?);
            let d = s.distance_idx(ia, ib);
            if d > d.scale(alpha) {
                r.details.push(format!("common fixed points {} and {} violate d <= alpha d", all[a], all[b]));
            }
        }
        r.attach_oracle("exhaustive scan of {x | S x = T x = x}", all, vec![pt(s, w).clone()])?;
    }
    Ok(r)
}

/// On a connected image with continuous `S` and `0 < α < d0/d1`, the
/// contraction inequality forces `T` to be constant.
pub fn constant_map_criterion(
    s: &DigitalMetricSpace,
    sm: &DigitalMap,
    t: &DigitalMap,
    alpha: &BigRational,
) -> Result<TheoremReport> {
    require_self_map(s, sm, "S")?;
    require_self_map(s, t, "T")?;
    if !alpha.is_positive() {
        return Err(Error::invalid("alpha must be positive"));
    }
    let mut r = TheoremReport::new("constant_map_criterion");
    r.quantity("alpha", format_rational(alpha));
    r.hypothesis("image connected", is_connected(s.image()), None);
    r.verdict("S continuous", maps::is_continuous(sm), |(x, y)| Witness::Pair { x, y });
    let violated = first_contraction_violation(s, sm, t, alpha);
    r.hypothesis(
        "d(Tx,Ty) <= alpha d(Sx,Sy)",
        violated.is_none(),
        violated.map(|(i, j)| Witness::pair(pt(s, i), pt(s, j))),
    );
    let a = Distance::from_rational(alpha.clone());
    let below = |r: &mut TheoremReport, name: &str, threshold: &Distance| {
        let ok = a < *threshold;
        r.hypothesis(
            name,
            ok,
            (!ok).then(|| Witness::Note {
                text: format!("{} >= {threshold}", format_rational(alpha)),
            }),
        );
    };
    match adjacency_gap_stats(s) {
        Ok(g) => {
            let stated = g.d0.value.ratio(&g.d1.value).expect("d1 > 0");
            r.quantity("d0", &g.d0.value);
            r.quantity("d1", &g.d1.value);
            r.quantity("d0/d1", &stated);
            below(&mut r, "alpha < d0/d1", &stated);
            // d(Tx,Tx') < d0 forces Tx = Tx' only when no two distinct points
            // are closer than d0, so the minimum gap over all pairs is used.
            let m = min_gap(s)?.value;
            let repaired = m.ratio(&g.d1.value).expect("d1 > 0");
            r.quantity("m", &m);
            r.quantity("m/d1", &repaired);
            below(&mut r, "alpha < m/d1 (m = min gap)", &repaired);
        }
        Err(_) => r.hypothesis(
            "image has an adjacent pair",
            false,
            Some(Witness::Note {
                text: "d0 and d1 are undefined".into(),
            }),
        ),
    }
    let stated_hold = r.hypotheses.iter().filter(|h| !h.name.starts_with("alpha < m/d1")).all(|h| h.holds);
    if stated_hold && !t.is_constant() {
        let (i, j) = s
            .image()
            .edges()
            .find(|&(i, j)| t.apply_idx(i) != t.apply_idx(j))
            .expect("a non-constant map on a connected image separates some edge");
        r.quantity("stated_threshold_counterexample", Witness::pair(pt(s, i), pt(s, j)));
        r.details.push(format!(
            "alpha < d0/d1 alone does not force T constant: {} and {} are adjacent but T sends them to {} and {}",
            pt(s, i),
            pt(s, j),
            pt(s, t.apply_idx(i)),
            pt(s, t.apply_idx(j)),
        ));
    }
    if r.hypotheses_hold() {
        if !t.is_constant() {
            return Err(Error::Contradiction("hypotheses hold but T is not constant".into()));
        }
        r.conclude("T is constant with value", vec![t.apply_idx(0)].into_iter().map(|i| pt(s, i).clone()).collect());
    }
    Ok(r)
}

/// The three-point space in `Z^3` under `c_3` and `ℓ_1`, with the maps
/// `S = 1_X` and `T(p0) = T(p2) = p2`, `T(p1) = p0`.
pub fn tri_z3_example() -> (DigitalMetricSpace, DigitalMap, DigitalMap) {
    use crate::image::{AdjacencyRelation, DigitalImage};
    use crate::metric::Metric;
    let p = |c: [i64; 3]| Point::from(c);
    let img = Arc::new(
        DigitalImage::new(
            vec![p([0, 0, 0]), p([1, 1, 1]), p([2, 0, 0])],
            AdjacencyRelation::cu(3, 3).expect("valid"),
        )
        .expect("valid"),
    );
    let s = DigitalMetricSpace::new(img.clone(), Metric::lp(1).expect("valid")).expect("valid");
    let t = DigitalMap::new(
        img.clone(),
        img.clone(),
        vec![(p([0, 0, 0]), p([2, 0, 0])), (p([1, 1, 1]), p([0, 0, 0])), (p([2, 0, 0]), p([2, 0, 0]))],
    )
    .expect("valid");
    (s, DigitalMap::identity(&img), t)
}
