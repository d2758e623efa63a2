use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use digitop::exact::rational;
use digitop::maps::{self, DigitalMap, EnumerationBudget};
use digitop::metric::{self, DigitalMetricSpace, Metric, PointSequence};
use digitop::product::{build_product, check_product_afpp};
use digitop::theoremlab::{self, ExpansiveParams, MuChoice};
use digitop::{AdjacencyRelation, DigitalImage, Distance, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AFPP_INTERVAL_LIMIT: Duration = Duration::from_secs(10);
const ENUMERATION_LIMIT: Duration = Duration::from_secs(1);
const SEQUENCE_LENGTH: usize = 64;
const RANDOM_MAPS: usize = 500;
const RANDOM_SEED: u64 = 0x5eed_d161;
const MAX_RANDOM_POINTS: usize = 7;
const FLOAT_ORACLE_TOLERANCE: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn p(c: &[i64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn interval(a: i64, b: i64) -> Arc<DigitalImage> {
    Arc::new(DigitalImage::interval(a, b).unwrap())
}

fn image(points: &[&[i64]], u: usize) -> Arc<DigitalImage> {
    let dim = points[0].len();
    Arc::new(DigitalImage::new(points.iter().map(|c| p(c)), AdjacencyRelation::cu(u, dim).unwrap()).unwrap())
}

fn space(img: Arc<DigitalImage>, metric: Metric) -> DigitalMetricSpace {
    DigitalMetricSpace::new(img, metric).unwrap()
}

fn l1() -> Metric {
    Metric::lp(1).unwrap()
}

/// Every function `X -> X` as an index table, in lexicographic order.
fn all_tables(n: usize) -> Vec<Vec<usize>> {
    let total = n.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut t = vec![0; n];
            for slot in t.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            t
        })
        .collect()
}

/// `c_u` adjacency recomputed from coordinates.
fn cu_adjacent(a: &Point, b: &Point, u: usize) -> bool {
    let diffs: Vec<i64> = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).collect();
    let moved = diffs.iter().filter(|&&d| d != 0).count();
    diffs.iter().all(|&d| d <= 1) && moved >= 1 && moved <= u
}

/// Edge-by-edge continuity for a self-map of a `c_u` image.
fn brute_continuous(pts: &[Point], table: &[usize], u: usize) -> bool {
    (0..pts.len()).all(|i| {
        (0..pts.len()).all(|j| {
            !cu_adjacent(&pts[i], &pts[j], u)
                || table[i] == table[j]
                || cu_adjacent(&pts[table[i]], &pts[table[j]], u)
        })
    })
}

fn brute_has_afp(pts: &[Point], table: &[usize], u: usize) -> bool {
    (0..pts.len()).any(|i| table[i] == i || cu_adjacent(&pts[i], &pts[table[i]], u))
}

fn l1_int(a: &Point, b: &Point) -> i64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).sum()
}

fn c1_afpp_intervals() -> Outcome {
    let mut times = Vec::new();
    for n in 1..=5i64 {
        let x = interval(0, n);
        let start = Instant::now();
        let v = ok(maps::has_afpp_cross_checked(&x, EnumerationBudget::default()))?;
        let elapsed = start.elapsed();
        ensure!(v.holds, "[0,{n}] reported without AFPP");
        ensure!(elapsed < AFPP_INTERVAL_LIMIT, "[0,{n}] took {elapsed:?}");
        let plain = ok(maps::has_afpp(&x, EnumerationBudget::default()))?;
        let wu = ok(maps::is_weakly_universal(&DigitalMap::identity(&x), EnumerationBudget::default()))?;
        ensure!(plain.holds == wu.holds, "[0,{n}]: has_afpp {} vs weakly universal identity {}", plain.holds, wu.holds);
        let pts = x.points();
        let oracle = all_tables(pts.len())
            .iter()
            .filter(|t| brute_continuous(pts, t, 1))
            .all(|t| brute_has_afp(pts, t, 1));
        ensure!(oracle, "brute force finds a map of [0,{n}] without approximate fixed point");
        times.push(format!("{}ms", elapsed.as_millis()));
    }
    Ok(format!("n=1..5 all true; times {}", times.join(",")))
}

fn universal_split() -> Outcome {
    let x = interval(-1, 1);
    let id = DigitalMap::identity(&x);
    let u = ok(maps::is_universal(&id, EnumerationBudget::default()))?;
    ensure!(!u.holds, "identity of [-1,1] reported universal");
    let g = u.witness.ok_or("no counterexample returned")?;
    for z in -1..=1 {
        let img = ok(g.apply(&p(&[z])))?;
        ensure!(*img == p(&[-z]), "counterexample sends ({z}) to {img}, expected ({})", -z);
    }
    let wu = ok(maps::is_weakly_universal(&id, EnumerationBudget::default()))?;
    ensure!(wu.holds, "identity of [-1,1] not weakly universal");
    let afp = ok(maps::approximate_fixed_points(&g))?;
    ensure!(afp == vec![p(&[0])], "approximate fixed points {afp:?}");
    let strict = ok(maps::strictly_adjacent_points(&g))?;
    ensure!(strict.is_empty(), "strictly adjacent points {strict:?}");
    Ok("universal=false (g=-z), weakly_universal=true, afp={(0)}, strict={}".into())
}

fn enumeration_count() -> Outcome {
    let x = interval(0, 2);
    let start = Instant::now();
    let count = ok(maps::count_continuous(&x, &x, EnumerationBudget::default(), 1))?;
    let listed = ok(maps::collect_continuous(&x, &x, EnumerationBudget::default(), 2))?;
    let elapsed = start.elapsed();
    let tables = all_tables(3);
    ensure!(tables.len() == 27, "expected 27 functions");
    let oracle: Vec<Vec<usize>> = tables.into_iter().filter(|t| brute_continuous(x.points(), t, 1)).collect();
    ensure!(count == 17, "count {count}");
    ensure!(oracle.len() == 17, "filter found {}", oracle.len());
    let got: Vec<Vec<usize>> = listed.iter().map(|m| m.table().to_vec()).collect();
    ensure!(got == oracle, "enumerated set differs from the filter");
    ensure!(elapsed < ENUMERATION_LIMIT, "took {elapsed:?}");
    Ok(format!("17 maps, equal to the 27-function filter, {}ms", elapsed.as_millis()))
}

fn square_counterexample() -> Outcome {
    let sq = Arc::new(ok(DigitalImage::grid(2, 2, 1))?);
    let v = ok(maps::has_afpp(&sq, EnumerationBudget::default()))?;
    ensure!(!v.holds, "square reported with AFPP");
    let w = v.witness.ok_or("no witness")?;
    ensure!(maps::is_continuous(&w).holds, "witness not continuous");
    ensure!(ok(maps::approximate_fixed_points(&w))?.is_empty(), "witness has an approximate fixed point");
    let pts = sq.points();
    let continuous: Vec<Vec<usize>> = all_tables(4).into_iter().filter(|t| brute_continuous(pts, t, 1)).collect();
    ensure!(continuous.iter().any(|t| t == w.table()), "witness missing from exhaustive enumeration");
    let lib = ok(maps::collect_continuous(&sq, &sq, EnumerationBudget::default(), 1))?;
    ensure!(lib.len() == continuous.len(), "library enumerates {} maps, brute force {}", lib.len(), continuous.len());
    let free = continuous.iter().filter(|t| !brute_has_afp(pts, t, 1)).count();
    ensure!(free > 0, "brute force finds no fixed-point-free map");
    Ok(format!("has_afpp=false, witness {:?} verified among {} continuous maps ({free} without AFP)", w.table(), continuous.len()))
}

fn tri_z3_refutation() -> Outcome {
    let (s, sm, t) = theoremlab::tri_z3_example();
    let pass = ok(theoremlab::contraction_pair_check(&s, &sm, &t, &rational(2, 3)))?;
    ensure!(pass.holds(), "contraction fails at alpha = 2/3");
    for (n, d) in [(1, 100), (1, 2), (3, 5), (665, 1000), (199_999, 300_000)] {
        let alpha = rational(n, d);
        let c = ok(theoremlab::contraction_pair_check(&s, &sm, &t, &alpha))?;
        ensure!(!c.holds(), "contraction holds at alpha = {n}/{d}");
    }
    let ratio = ok(theoremlab::contraction_ratio(&s, &sm, &t))?.ok_or("ratio undefined")?;
    ensure!(ratio == Distance::from_rational(rational(2, 3)), "ratio {ratio}");
    let cont = maps::is_continuous(&t);
    ensure!(!cont.holds, "T reported continuous");
    let (a, b) = cont.witness.ok_or("no continuity witness")?;
    ensure!((a.clone(), b.clone()) == (p(&[0, 0, 0]), p(&[1, 1, 1])), "witness ({a}, {b})");
    Ok("alpha=2/3 passes, alpha<2/3 fails, ratio=2/3, T discontinuous at (p0,p1)".into())
}

fn non_cauchy_sequence() -> Outcome {
    let s = space(interval(0, 1), l1());
    let terms: Vec<Point> = (0..SEQUENCE_LENGTH).map(|n| p(&[((n / 2) % 2) as i64])).collect();
    for n in 0..SEQUENCE_LENGTH / 2 {
        ensure!(terms[2 * n] == terms[2 * n + 1], "y_{} != y_{}", 2 * n, 2 * n + 1);
    }
    let seq = PointSequence::new(terms);
    let st = ok(metric::is_eventually_constant(&seq))?;
    ensure!(!st.eventually_constant, "reported eventually constant");
    let report = ok(metric::cauchy_modulus(&seq, &s, Some(Distance::from_integer(1))))?;
    ensure!(report.max_even_odd_gap == Some(Distance::zero()), "even/odd gap {:?}", report.max_even_odd_gap);
    ensure!(report.cauchy_at_threshold == Some(false), "Cauchy at threshold 1: {:?}", report.cauchy_at_threshold);
    Ok(format!("length {SEQUENCE_LENGTH}: even/odd gaps 0, not eventually constant, not Cauchy at 1"))
}

fn z2_suite() -> Vec<Vec<&'static [i64]>> {
    vec![
        vec![&[0, 0], &[1, 0]],
        vec![&[0, 0], &[1, 1]],
        vec![&[0, 0], &[3, -2]],
        vec![&[0, 0], &[1, 0], &[2, 0]],
        vec![&[0, 0], &[1, 0], &[0, 1]],
        vec![&[0, 0], &[2, 1], &[-1, 3]],
        vec![&[0, 0], &[1, 0], &[0, 1], &[1, 1]],
        vec![&[0, 0], &[1, 0], &[2, 0], &[3, 0]],
        vec![&[0, 0], &[2, 0], &[1, 1], &[1, -3]],
        vec![&[-2, 1], &[0, 0], &[3, 3], &[1, 5]],
    ]
}

fn float_dist(a: &Point, b: &Point, inf: bool) -> f64 {
    let d = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs() as f64);
    if inf {
        d.fold(0.0, f64::max)
    } else {
        d.sum()
    }
}

fn expansive_impossibility() -> Outcome {
    let mut spaces = 0;
    let mut bijections = 0;
    let one = Distance::from_integer(1);
    for pts in z2_suite() {
        for (inf, metric) in [(false, l1()), (true, Metric::l_inf())] {
            let img = image(&pts, 2);
            let s = space(img.clone(), metric);
            spaces += 1;
            for b in maps::all_bijections(&img) {
                bijections += 1;
                let k = ok(theoremlab::max_feasible_expansion(&s, &b))?;
                ensure!(k.cmp(&one).is_le(), "bijection {:?} expands by {k}", b.table());
                let q = img.points();
                let min_ratio = (0..q.len())
                    .flat_map(|i| (i + 1..q.len()).map(move |j| (i, j)))
                    .map(|(i, j)| float_dist(&q[b.apply_idx(i)], &q[b.apply_idx(j)], inf) / float_dist(&q[i], &q[j], inf))
                    .fold(f64::INFINITY, f64::min);
                ensure!((min_ratio - k.to_f64()).abs() <= FLOAT_ORACLE_TOLERANCE, "float oracle {min_ratio} vs {k}");
            }
            let r = ok(theoremlab::expansive_onto_impossibility(&s))?;
            ensure!(r.hypotheses_hold() && r.conclusion.is_some(), "impossibility report not concluded");
        }
    }
    ensure!(spaces == 20, "suite has {spaces} spaces");
    Ok(format!("{spaces} spaces, {bijections} bijections, zero counterexamples"))
}

fn three_point_l1_spaces() -> Vec<DigitalMetricSpace> {
    vec![
        space(image(&[&[0], &[1], &[2]], 1), l1()),
        space(image(&[&[0, 0], &[1, 0], &[1, 1]], 2), l1()),
        space(image(&[&[0, 0], &[0, 2], &[3, 1]], 2), l1()),
    ]
}

fn sum_expansive_triviality() -> Outcome {
    let k = rational(1, 2);
    for s in three_point_l1_spaces() {
        let pts = s.image().points().to_vec();
        let mut satisfying = Vec::new();
        for table in all_tables(3) {
            let t = ok(DigitalMap::from_indices(s.image().clone(), s.image().clone(), table.clone()))?;
            let r = ok(theoremlab::sum_expansive_identity_check(&s, &t, &k))?;
            let oracle = (0..3).all(|i| {
                (0..3).all(|j| {
                    2 * l1_int(&pts[table[i]], &pts[table[j]])
                        >= l1_int(&pts[i], &pts[table[i]]) + l1_int(&pts[j], &pts[table[j]])
                })
            });
            ensure!(r.hypotheses_hold() == oracle, "map {table:?}: library {} vs oracle {oracle}", r.hypotheses_hold());
            if r.hypotheses_hold() {
                satisfying.push(table);
            }
        }
        ensure!(satisfying == vec![vec![0, 1, 2]], "satisfying set {satisfying:?}");
    }
    Ok("3 spaces x 27 maps: satisfying set = {identity} each time".into())
}

fn generalized_expansive() -> Outcome {
    let spaces = vec![
        space(image(&[&[0], &[1], &[2]], 1), l1()),
        space(image(&[&[0, 0], &[0, 2], &[3, 1]], 2), l1()),
        space(image(&[&[0], &[1], &[2], &[3]], 1), l1()),
        space(image(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]], 2), Metric::l_inf()),
    ];
    let mut passing = 0;
    let mut checked = 0;
    for s in &spaces {
        let n = s.len();
        for (num, den) in [(5, 4), (3, 2), (7, 4)] {
            let params = ok(ExpansiveParams::new(rational(num, den), vec![MuChoice::Plain, MuChoice::HalfSumSelf]))?;
            for table in all_tables(n) {
                let t = ok(DigitalMap::from_indices(s.image().clone(), s.image().clone(), table.clone()))?;
                let r = ok(theoremlab::generalized_expansive_fixed_point(s, &t, &params))?;
                checked += 1;
                if r.hypotheses_hold() {
                    passing += 1;
                    let fixed: Vec<usize> = (0..n).filter(|&i| table[i] == i).collect();
                    ensure!(!fixed.is_empty(), "map {table:?} at k={num}/{den} passes without a fixed point");
                    let reported = r.conclusion.as_ref().map(|c| c.points.len()).unwrap_or(0);
                    ensure!(reported == fixed.len(), "map {table:?}: reported {reported} fixed points, scan {}", fixed.len());
                }
            }
        }
    }
    ensure!(passing > 0, "no map passed the hypotheses");
    Ok(format!("{checked} (map, k) cases, {passing} passing, every one with a fixed point"))
}

fn common_fixed_point_solver() -> Outcome {
    let alpha = rational(1, 2);
    let mut spaces = three_point_l1_spaces();
    spaces.push(theoremlab::tri_z3_example().0);
    let mut solved = 0;
    for s in &spaces {
        let n = s.len();
        let all: Vec<DigitalMap> = all_tables(n)
            .into_iter()
            .map(|t| DigitalMap::from_indices(s.image().clone(), s.image().clone(), t).unwrap())
            .collect();
        for sm in &all {
            for t in &all {
                if !ok(theoremlab::contraction_pair_check(s, sm, t, &alpha))?.holds()
                    || !ok(theoremlab::is_weakly_commuting(s, sm, t))?.holds
                {
                    continue;
                }
                let common: Vec<usize> = (0..n).filter(|&i| sm.apply_idx(i) == i && t.apply_idx(i) == i).collect();
                ensure!(common.len() == 1, "S={:?} T={:?}: {} common fixed points", sm.table(), t.table(), common.len());
                let expected = s.image().point(common[0]).clone();
                for x0 in s.image().points() {
                    let r = ok(theoremlab::weakly_commuting_common_fixed_point(s, sm, t, &alpha, x0, None))?;
                    let got = r.conclusion.as_ref().ok_or("no conclusion")?.points.clone();
                    ensure!(got == vec![expected.clone()], "S={:?} T={:?} x0={x0}: got {got:?}", sm.table(), t.table());
                    let idx: usize = r.quantities["stabilization_index"].parse().map_err(|_| "bad index")?;
                    ensure!(idx <= n + 1, "stabilized after {idx} steps");
                    solved += 1;
                }
            }
        }
    }
    ensure!(solved > 0, "no admissible pair");
    Ok(format!("{solved} (S,T,x0) runs match the exhaustive scan"))
}

fn product_implication() -> Outcome {
    let discrete = image(&[&[0], &[2]], 1);
    let factors = [("[0,1]", interval(0, 1)), ("[0,2]", interval(0, 2)), ("discrete2", discrete)];
    let mut lacking = 0;
    let mut cases = 0;
    for (i, (na, a)) in factors.iter().enumerate() {
        for (nb, b) in factors.iter().skip(i) {
            let prod = ok(build_product(&[a.clone(), b.clone()], 2))?;
            let check = ok(check_product_afpp(&prod, EnumerationBudget::default()))?;
            cases += 1;
            ensure!(check.applies, "u = v not recognised");
            ensure!(check.implication_holds, "{na} x {nb}: carrier has AFPP but a factor lacks it");
            if !check.carrier.holds {
                lacking += 1;
                let w = check.carrier.witness.as_ref().ok_or("no carrier witness")?;
                ensure!(ok(maps::approximate_fixed_points(w))?.is_empty(), "carrier witness has an approximate fixed point");
            }
            for (f, v) in check.factors.iter().enumerate() {
                if !v.holds {
                    ensure!(!check.carrier.holds, "{na} x {nb}: factor {f} lacks AFPP but carrier has it");
                }
            }
        }
    }
    ensure!(lacking > 0, "contrapositive not exercised");
    Ok(format!("{cases} carriers, implication holds, {lacking} carriers lack AFPP"))
}

fn random_image(rng: &mut ChaCha8Rng) -> Arc<DigitalImage> {
    let dim = rng.gen_range(1..=2usize);
    let side = if dim == 1 { 9 } else { 3 };
    let size = rng.gen_range(1..=MAX_RANDOM_POINTS);
    let mut pts: Vec<Point> = Vec::new();
    while pts.len() < size {
        let c: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..side)).collect();
        let q = Point::new(c).unwrap();
        if !pts.contains(&q) {
            pts.push(q);
        }
    }
    let u = rng.gen_range(1..=dim);
    Arc::new(DigitalImage::new(pts, AdjacencyRelation::cu(u, dim).unwrap()).unwrap())
}

fn continuity_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut continuous = 0;
    for case in 0..RANDOM_MAPS {
        let x = random_image(&mut rng);
        let y = if rng.gen_bool(0.5) { x.clone() } else { random_image(&mut rng) };
        let bias = rng.gen_bool(0.5);
        let mut table: Vec<usize> = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            // Half the maps follow a neighbour of the previous value so that
            // continuous maps are well represented.
            let v = match (bias, i.checked_sub(1).map(|j| table[j])) {
                (true, Some(prev)) => {
                    let nb = y.closed_neighborhood(prev);
                    nb[rng.gen_range(0..nb.len())]
                }
                _ => rng.gen_range(0..y.len()),
            };
            table.push(v);
        }
        let f = ok(DigitalMap::from_indices(x.clone(), y.clone(), table))?;
        let by_edges = maps::is_continuous(&f).holds;
        let by_connectivity = ok(maps::is_continuous_by_connectivity(&f))?;
        ensure!(by_edges == by_connectivity, "case {case}: edges {by_edges}, connectivity {by_connectivity}");
        continuous += usize::from(by_edges);
    }
    Ok(format!("{RANDOM_MAPS} maps (seed {RANDOM_SEED:#x}), {continuous} continuous, zero disagreements"))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("c1 intervals have AFPP", c1_afpp_intervals),
        ("universal vs weakly universal on [-1,1]", universal_split),
        ("continuous self-maps of [0,2] number 17", enumeration_count),
        ("2x2 square under c_1 lacks AFPP", square_counterexample),
        ("three-point c_3 pair: contraction without continuity", tri_z3_refutation),
        ("0,0,1,1,... is not Cauchy", non_cauchy_sequence),
        ("onto self-maps are never expansive", expansive_impossibility),
        ("k = 1/2 sum-expansive maps are the identity", sum_expansive_triviality),
        ("generalized expansive maps have fixed points", generalized_expansive),
        ("weakly commuting solver matches exhaustive scan", common_fixed_point_solver),
        ("product AFPP passes to factors", product_implication),
        ("edge and connectivity continuity agree", continuity_equivalence),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
