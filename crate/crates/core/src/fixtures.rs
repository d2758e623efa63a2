//! Named example corpus. Each fixture is a JSON bundle of images, metrics,
//! maps and sequences plus a list of expected results; [`replay`] recomputes
//! every expectation from scratch.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact::{parse_rational, Distance};
use crate::format;
use crate::image::{DigitalImage, Point};
use crate::maps::{self, DigitalMap, EnumerationBudget};
use crate::metric::{self, DigitalMetricSpace, Metric, PointSequence};
use crate::theoremlab;

const SOURCES: &[(&str, &str)] = &[
    ("neg_interval", include_str!("../fixtures/neg_interval.json")),
    ("tri_z3", include_str!("../fixtures/tri_z3.json")),
    ("mod4_seq", include_str!("../fixtures/mod4_seq.json")),
    ("interval_afpp", include_str!("../fixtures/interval_afpp.json")),
    ("square_c1_no_afpp", include_str!("../fixtures/square_c1_no_afpp.json")),
    ("identity_reduction", include_str!("../fixtures/identity_reduction.json")),
];

/// Names of all registered fixtures.
pub fn registry() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a fixture.
pub fn source(name: &str) -> Result<&'static str> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::invalid(format!("unknown fixture `{name}`; known: {}", registry().join(", "))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub op: String,
    #[serde(default)]
    pub args: BTreeMap<String, String>,
    pub expect: Map<String, Value>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub images: BTreeMap<String, Arc<DigitalImage>>,
    pub metrics: BTreeMap<String, Metric>,
    pub maps: BTreeMap<String, DigitalMap>,
    pub sequences: BTreeMap<String, PointSequence>,
    pub expected: Vec<Expectation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    name: String,
    description: String,
    #[serde(default)]
    images: BTreeMap<String, Value>,
    #[serde(default)]
    metrics: BTreeMap<String, Value>,
    #[serde(default)]
    maps: BTreeMap<String, Value>,
    #[serde(default)]
    sequences: BTreeMap<String, Value>,
    expected: Vec<Expectation>,
}

fn nested<T>(prefix: String, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { path, message } => Error::Parse {
            path: format!("{prefix}.{path}"),
            message,
        },
        other => Error::Parse {
            path: prefix,
            message: other.to_string(),
        },
    })
}

/// Parses a fixture bundle.
pub fn parse(text: &str) -> Result<Fixture> {
    let f: FixtureFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "<root>".into(),
        message: e.to_string(),
    })?;
    let mut images = BTreeMap::new();
    for (k, v) in f.images {
        let img = nested(format!("images.{k}"), format::parse_image(&v.to_string()))?;
        images.insert(k, Arc::new(img));
    }
    let mut metrics = BTreeMap::new();
    for (k, v) in f.metrics {
        metrics.insert(k.clone(), nested(format!("metrics.{k}"), format::parse_metric(&v.to_string()))?);
    }
    let mut maps = BTreeMap::new();
    for (k, mut v) in f.maps {
        let prefix = format!("maps.{k}");
        let obj = v.as_object_mut().ok_or_else(|| Error::Parse {
            path: prefix.clone(),
            message: "expected an object".into(),
        })?;
        let mut side = |key: &str| -> Result<Arc<DigitalImage>> {
            let name = obj.remove(key).and_then(|n| n.as_str().map(str::to_string)).ok_or_else(|| Error::Parse {
                path: format!("{prefix}.{key}"),
                message: "expected an image name".into(),
            })?;
            images.get(&name).cloned().ok_or_else(|| Error::Parse {
                path: format!("{prefix}.{key}"),
                message: format!("unknown image `{name}`"),
            })
        };
        let (dom, cod) = (side("domain")?, side("codomain")?);
        maps.insert(k.clone(), nested(prefix, format::parse_map(&v.to_string(), &dom, &cod))?);
    }
    let mut sequences = BTreeMap::new();
    for (k, v) in f.sequences {
        sequences.insert(k.clone(), nested(format!("sequences.{k}"), format::parse_sequence(&v.to_string()))?);
    }
    Ok(Fixture {
        name: f.name,
        description: f.description,
        images,
        metrics,
        maps,
        sequences,
        expected: f.expected,
    })
}

pub fn load(name: &str) -> Result<Fixture> {
    parse(source(name)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayOutcome {
    pub fixture: String,
    pub op: String,
    pub args: BTreeMap<String, String>,
    pub passed: bool,
    pub expected: Map<String, Value>,
    pub actual: Value,
}

/// Recomputes every expectation of `fx`. A failing computation makes the
/// outcome fail with the error recorded under `"error"`.
pub fn replay(fx: &Fixture, budget: EnumerationBudget) -> Vec<ReplayOutcome> {
    fx.expected
        .iter()
        .map(|e| {
            let actual = evaluate(fx, e, budget).unwrap_or_else(|err| json!({ "error": err.to_string() }));
            let passed = e.expect.iter().all(|(k, v)| actual.get(k) == Some(v));
            ReplayOutcome {
                fixture: fx.name.clone(),
                op: e.op.clone(),
                args: e.args.clone(),
                passed,
                expected: e.expect.clone(),
                actual,
            }
        })
        .collect()
}

struct Args<'a> {
    fx: &'a Fixture,
    raw: &'a BTreeMap<String, String>,
}

impl Args<'_> {
    fn get(&self, key: &str) -> Result<&str> {
        self.raw
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::invalid(format!("missing argument `{key}`")))
    }

    fn lookup<'v, T>(&self, table: &'v BTreeMap<String, T>, key: &str) -> Result<&'v T> {
        let name = self.get(key)?;
        table
            .get(name)
            .ok_or_else(|| Error::invalid(format!("unknown {key} `{name}`")))
    }

    fn image(&self, key: &str) -> Result<&Arc<DigitalImage>> {
        self.lookup(&self.fx.images, key)
    }

    fn map(&self, key: &str) -> Result<&DigitalMap> {
        self.lookup(&self.fx.maps, key)
    }

    fn rational(&self, key: &str) -> Result<BigRational> {
        parse_rational(self.get(key)?)
    }

    fn space(&self) -> Result<DigitalMetricSpace> {
        let metric = self.lookup(&self.fx.metrics, "metric")?.clone();
        DigitalMetricSpace::new(self.image("image")?.clone(), metric)
    }

    /// A map re-homed onto the space's image, which may be a separate but
    /// equal `Arc`.
    fn space_map(&self, key: &str, s: &DigitalMetricSpace) -> Result<DigitalMap> {
        self.map(key)?.rehome(s.image(), s.image())
    }
}

fn map_json(f: &DigitalMap) -> Value {
    format::map_to_json(f)["pairs"].clone()
}

fn evaluate(fx: &Fixture, e: &Expectation, budget: EnumerationBudget) -> Result<Value> {
    let a = Args { fx, raw: &e.args };
    Ok(match e.op.as_str() {
        "is_continuous" => {
            let v = maps::is_continuous(a.map("map")?);
            json!({ "holds": v.holds, "witness": v.witness.map(|(x, y)| json!([x, y])) })
        }
        "fixed_points" => json!({ "points": maps::fixed_points(a.map("map")?)? }),
        "approximate_fixed_points" => json!({ "points": maps::approximate_fixed_points(a.map("map")?)? }),
        "strictly_adjacent_points" => json!({ "points": maps::strictly_adjacent_points(a.map("map")?)? }),
        "is_universal" => {
            let v = maps::is_universal(a.map("map")?, budget)?;
            json!({ "holds": v.holds, "witness": v.witness.as_ref().map(map_json) })
        }
        "is_weakly_universal" => {
            let v = maps::is_weakly_universal(a.map("map")?, budget)?;
            json!({ "holds": v.holds, "witness": v.witness.as_ref().map(map_json) })
        }
        "has_afpp" => {
            let img = a.image("image")?;
            let v = maps::has_afpp(img, budget)?;
            let cross = maps::is_weakly_universal(&DigitalMap::identity(img), budget)?.holds == v.holds;
            let witness_valid = v.witness.as_ref().map(|w| {
                maps::is_continuous(w).holds && maps::approximate_fixed_points(w).is_ok_and(|p| p.is_empty())
            });
            json!({
                "holds": v.holds,
                "cross_checked": cross,
                "witness": v.witness.as_ref().map(map_json),
                "witness_valid": witness_valid,
            })
        }
        "count_continuous" => {
            let n = maps::count_continuous(a.image("domain")?, a.image("codomain")?, budget, 1)?;
            json!({ "count": n })
        }
        "contraction_pair_check" => {
            let s = a.space()?;
            let c = theoremlab::contraction_pair_check(&s, &a.space_map("s", &s)?, &a.space_map("t", &s)?, &a.rational("alpha")?)?;
            json!({
                "holds": c.holds(),
                "inclusion": c.inclusion.holds,
                "inclusion_witness": c.inclusion.witness,
                "contraction": c.contraction.holds,
                "contraction_witness": c.contraction.witness.map(|(x, y)| json!([x, y])),
            })
        }
        "contraction_ratio" => {
            let s = a.space()?;
            let r = theoremlab::contraction_ratio(&s, &a.space_map("s", &s)?, &a.space_map("t", &s)?)?;
            json!({ "ratio": r.map(|d| d.to_string()) })
        }
        "is_weakly_commuting" => {
            let s = a.space()?;
            let v = theoremlab::is_weakly_commuting(&s, &a.space_map("s", &s)?, &a.space_map("t", &s)?)?;
            json!({ "holds": v.holds, "witness": v.witness })
        }
        "common_fixed_point" => {
            let s = a.space()?;
            let x0: Point = a.get("x0")?.parse()?;
            let r = theoremlab::weakly_commuting_common_fixed_point(
                &s,
                &a.space_map("s", &s)?,
                &a.space_map("t", &s)?,
                &a.rational("alpha")?,
                &x0,
                None,
            )?;
            json!({
                "hypotheses_hold": r.hypotheses_hold(),
                "points": r.conclusion.map(|c| c.points),
                "oracle_agrees": r.oracle.map(|o| o.agrees),
            })
        }
        "adjacency_gaps" => {
            let g = metric::adjacency_gap_stats(&a.space()?)?;
            json!({ "d0": g.d0.value.to_string(), "d1": g.d1.value.to_string() })
        }
        "sequence_analysis" => {
            let s = a.space()?;
            let seq = a.lookup(&fx.sequences, "sequence")?;
            let threshold = Distance::from_rational(a.rational("threshold")?);
            let r = metric::cauchy_modulus(seq, &s, Some(threshold))?;
            json!({
                "max_even_odd_gap": r.max_even_odd_gap.map(|d| d.to_string()),
                "eventually_constant": r.stabilization.eventually_constant,
                "cauchy_at_threshold": r.cauchy_at_threshold,
                "tail_sup": r.tail_sups.first().map(|d| d.to_string()),
                "proposition_holds": r.proposition_holds,
            })
        }
        "sum_expansive_sweep" => {
            let s = a.space()?;
            let k = a.rational("k")?;
            let mut satisfying = Vec::new();
            for t in maps::all_maps(s.image(), s.image()) {
                if theoremlab::sum_expansive_identity_check(&s, &t, &k)?.hypotheses_hold() {
                    satisfying.push(t);
                }
            }
            let identity = DigitalMap::identity(s.image());
            json!({
                "satisfying": satisfying.len(),
                "identity_only": satisfying == [identity],
            })
        }
        "sum_expansive_identity" => {
            let s = a.space()?;
            let r = theoremlab::sum_expansive_identity_check(&s, &a.space_map("map", &s)?, &a.rational("k")?)?;
            json!({ "hypotheses_hold": r.hypotheses_hold(), "conclusion": r.conclusion.map(|c| c.points) })
        }
        other => return Err(Error::invalid(format!("unknown fixture operation `{other}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_replays_cleanly() {
        for name in registry() {
            let fx = load(name).unwrap();
            assert_eq!(fx.name, name);
            assert!(!fx.expected.is_empty());
            for o in replay(&fx, EnumerationBudget::default()) {
                assert!(o.passed, "{name}/{}: expected {:?}, got {}", o.op, o.expected, o.actual);
            }
        }
    }

    #[test]
    fn unknown_names_and_broken_bundles_are_rejected() {
        assert!(matches!(load("nope"), Err(Error::InvalidInput(_))));
        let broken = r#"{"name": "b", "description": "", "images": {"X": {"dim": 1, "adjacency": {"type": "c_u", "u": 1}, "points": [[0, 1]]}}, "expected": []}"#;
        match parse(broken) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "images.X.points[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn a_wrong_expectation_fails_instead_of_passing() {
        let mut fx = load("neg_interval").unwrap();
        fx.expected[0].expect.insert("holds".into(), json!(false));
        fx.expected.push(Expectation {
            op: "no_such_op".into(),
            args: BTreeMap::new(),
            expect: Map::new(),
        });
        let out = replay(&fx, EnumerationBudget::default());
        assert!(!out[0].passed);
        assert!(out.last().unwrap().actual.get("error").is_some());
    }

    #[test]
    fn fixture_payloads_match_their_descriptions() {
        let fx = load("mod4_seq").unwrap();
        let y = &fx.sequences["y"];
        assert_eq!(y.len(), 64);
        for (n, t) in y.terms.iter().enumerate() {
            assert_eq!(t.coords()[0], if n % 4 < 2 { 0 } else { 1 });
        }
        let tri = load("tri_z3").unwrap();
        let (s, _, t) = theoremlab::tri_z3_example();
        assert_eq!(*tri.images["X"], **s.image());
        assert_eq!(tri.maps["T"].table(), t.table());
    }
}
