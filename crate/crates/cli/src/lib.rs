//! Command dispatch for the `digitop` binary.
//!
//! Exit codes: 0 when a verdict was decided (true or false), 1 when a fixture
//! replay fails or an internal contradiction is hit, 2 on input and parse
//! errors, 3 when a search exceeds its budget.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use digitop::exact::{format_rational, parse_rational};
use digitop::fixtures;
use digitop::format;
use digitop::maps::{self, DigitalMap, EnumerationBudget};
use digitop::metric::{self, DigitalMetricSpace, Metric};
use digitop::product::{build_product, check_product_afpp};
use digitop::theoremlab::{self, ExpansiveParams, MuChoice, TheoremReport};
use digitop::{DigitalImage, Distance, Error, Point};

pub const SCHEMA_VERSION: u32 = 1;

/// Bijection sweeps for the impossibility check stop at this many points.
const IMPOSSIBILITY_MAX_POINTS: usize = 7;

#[derive(Debug, Parser)]
#[command(name = "digitop", version, about = "Exhaustive checks for digital images, maps and digital metric spaces")]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the report here instead of standard output. For `product` this
    /// receives the carrier image and the report stays on standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stop an enumeration after this many complete maps.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    max_maps: u64,
    /// Stop an enumeration after this many search nodes.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    max_nodes: u64,
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a map sends adjacent points to adjacent or equal points.
    CheckContinuity {
        #[arg(long)]
        domain: PathBuf,
        /// Defaults to the domain.
        #[arg(long)]
        codomain: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
    },
    /// Enumerate or count continuous maps between two images.
    Enumerate {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        codomain: PathBuf,
        #[arg(long)]
        count_only: bool,
    },
    /// Decide the approximate fixed point property.
    Afpp {
        #[arg(long)]
        image: PathBuf,
    },
    /// Decide whether a continuous self-map is universal and weakly universal.
    Universal {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Build a normal product of images under NP_u adjacency.
    Product {
        #[arg(long, num_args = 2.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        u: usize,
        /// Also check that AFPP of the carrier implies AFPP of each factor.
        #[arg(long)]
        check_afpp: bool,
    },
    /// Analyse a pair of self-maps S, T on a digital metric space.
    AnalyzePair {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        t: PathBuf,
        /// Contraction constant, e.g. 2/3.
        #[arg(long)]
        alpha: String,
        /// Orbit start, e.g. "(0,0,0)"; defaults to the least point.
        #[arg(long)]
        x0: Option<String>,
    },
    /// Check expansive-type conditions for a self-map.
    Expansive {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Expansion factor, e.g. 3/2.
        #[arg(long)]
        k: String,
        /// Admitted mu forms: plain, halfsum.
        #[arg(long, value_delimiter = ',', default_value = "plain,halfsum")]
        mu: Vec<String>,
    },
    /// Replay or list the built-in example corpus.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Analyse a finite sequence prefix in a digital metric space.
    Sequence {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        sequence: PathBuf,
        /// Cauchy threshold; defaults to the space's minimum gap.
        #[arg(long)]
        threshold: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SpaceArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    metric: PathBuf,
}

#[derive(Debug, Subcommand)]
enum FixtureAction {
    /// Recompute the expected results of one fixture or all of them.
    Run { name: Option<String> },
    /// List fixture names and descriptions.
    List,
}

/// The machine-readable result of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    /// Input file path to SHA-256 digest.
    pub inputs: BTreeMap<String, String>,
    pub verdicts: Map<String, Value>,
    pub witnesses: Map<String, Value>,
    pub timing_ms: u64,
    #[serde(skip)]
    sections: Vec<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            verdicts: Map::new(),
            witnesses: Map::new(),
            timing_ms: 0,
            sections: Vec::new(),
        }
    }

    fn verdict(&mut self, key: &str, v: impl Serialize) {
        self.verdicts.insert(key.into(), to_value(v));
    }

    fn witness(&mut self, key: &str, v: impl Serialize) {
        self.witnesses.insert(key.into(), to_value(v));
    }

    fn theorem(&mut self, key: &str, r: &TheoremReport) {
        self.verdict(key, r);
        self.sections.push(r.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        for (path, digest) in &self.inputs {
            s += &format!("input: {path} sha256:{digest}\n");
        }
        for (k, v) in &self.verdicts {
            let rendered_elsewhere = (v.is_object() && v.get("theorem").is_some())
                || v.as_array().is_some_and(|a| a.iter().any(Value::is_object));
            if rendered_elsewhere {
                continue;
            }
            s += &format!("{k}: {}\n", compact(v));
        }
        for (k, v) in &self.witnesses {
            if !v.is_null() {
                s += &format!("witness {k}: {}\n", compact(v));
            }
        }
        for section in &self.sections {
            s += "\n";
            s += section;
        }
        s += &format!("time: {} ms\n", self.timing_ms);
        s
    }

    pub fn to_structured(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Points as `(a,b)` tuples, everything else as compact JSON.
fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if !items.is_empty() && items.iter().all(|i| i.as_i64().is_some()) => {
            let c: Vec<String> = items.iter().map(|i| i.to_string()).collect();
            format!("({})", c.join(","))
        }
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(compact).collect();
            format!("[{}]", inner.join(", "))
        }
        Value::Object(m) => {
            let inner: Vec<String> = m.iter().map(|(k, v)| format!("{k}: {}", compact(v))).collect();
            format!("{{{}}}", inner.join(", "))
        }
        other => other.to_string(),
    }
}

/// Captured process output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) => 3,
        Error::Contradiction(_) => 1,
        _ => 2,
    }
}

struct Context {
    budget: EnumerationBudget,
    threads: usize,
    carrier_out: Option<PathBuf>,
    report: RunReport,
}

impl Context {
    fn read(&mut self, path: &Path) -> Result<String, Error> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.report
            .inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    fn image(&mut self, path: &Path) -> Result<Arc<DigitalImage>, Error> {
        let text = self.read(path)?;
        in_file(path, format::parse_image(&text)).map(Arc::new)
    }

    fn map(&mut self, path: &Path, dom: &Arc<DigitalImage>, cod: &Arc<DigitalImage>) -> Result<DigitalMap, Error> {
        let text = self.read(path)?;
        in_file(path, format::parse_map(&text, dom, cod))
    }

    fn metric(&mut self, path: &Path) -> Result<Metric, Error> {
        let text = self.read(path)?;
        in_file(path, format::parse_metric(&text))
    }

    fn space(&mut self, image: &Path, metric: &Path) -> Result<DigitalMetricSpace, Error> {
        let img = self.image(image)?;
        let m = self.metric(metric)?;
        in_file(metric, DigitalMetricSpace::new(img, m))
    }
}

fn in_file<T>(path: &Path, r: Result<T, Error>) -> Result<T, Error> {
    r.map_err(|e| match e {
        Error::Parse { path: p, message } => Error::Parse {
            path: format!("{}: {p}", path.display()),
            message,
        },
        Error::Budget(_) | Error::Contradiction(_) => e,
        other => Error::Parse {
            path: path.display().to_string(),
            message: other.to_string(),
        },
    })
}

fn rational_arg(name: &str, s: &str) -> Result<BigRational, Error> {
    parse_rational(s).map_err(|e| Error::Parse {
        path: format!("--{name}"),
        message: e.to_string(),
    })
}

/// Runs one command line and captures what the binary would print.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: rendered }
            } else {
                Outcome { code, stdout: rendered, stderr: String::new() }
            };
        }
    };
    let format = cli.format;
    let command = command_name(&cli.command);
    let budget = match EnumerationBudget::new(cli.max_maps, cli.max_nodes) {
        Ok(b) => b,
        Err(e) => return failure(format, command, &e),
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let (report_out, carrier_out) = match cli.command {
        Command::Product { .. } => (None, cli.out.clone()),
        _ => (cli.out.clone(), None),
    };
    let mut ctx = Context {
        budget,
        threads,
        carrier_out,
        report: RunReport::new(command),
    };
    let start = Instant::now();
    let mut code = 0;
    if let Err(e) = run(&mut ctx, cli.command, &mut code) {
        return failure(format, command, &e);
    }
    ctx.report.timing_ms = start.elapsed().as_millis() as u64;
    let rendered = match format {
        OutputFormat::Text => ctx.report.to_text(),
        OutputFormat::Structured => ctx.report.to_structured(),
    };
    match report_out {
        Some(path) => match std::fs::write(&path, &rendered) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => failure(
                format,
                command,
                &Error::Parse { path: path.display().to_string(), message: e.to_string() },
            ),
        },
        None => Outcome { code, stdout: rendered, stderr: String::new() },
    }
}

fn failure(format: OutputFormat, command: &str, e: &Error) -> Outcome {
    let code = exit_code(e);
    let kind = match code {
        3 => "budget",
        1 => "internal",
        _ => "input",
    };
    let stdout = match format {
        OutputFormat::Structured => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": command,
                "error": { "kind": kind, "message": e.to_string() },
            });
            serde_json::to_string_pretty(&v).expect("serializes") + "\n"
        }
        OutputFormat::Text => String::new(),
    };
    Outcome {
        code,
        stdout,
        stderr: format!("error ({kind}): {e}\n"),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckContinuity { .. } => "check-continuity",
        Command::Enumerate { .. } => "enumerate",
        Command::Afpp { .. } => "afpp",
        Command::Universal { .. } => "universal",
        Command::Product { .. } => "product",
        Command::AnalyzePair { .. } => "analyze-pair",
        Command::Expansive { .. } => "expansive",
        Command::Fixtures { .. } => "fixtures",
        Command::Sequence { .. } => "sequence",
    }
}

fn pairs(f: &DigitalMap) -> Value {
    format::map_to_json(f)["pairs"].clone()
}

fn run(ctx: &mut Context, command: Command, code: &mut u8) -> Result<(), Error> {
    match command {
        Command::CheckContinuity { domain, codomain, map } => {
            let dom = ctx.image(&domain)?;
            let cod = match &codomain {
                Some(p) => ctx.image(p)?,
                None => dom.clone(),
            };
            let f = ctx.map(&map, &dom, &cod)?;
            let v = maps::is_continuous(&f);
            ctx.report.verdict("continuous", v.holds);
            match maps::is_continuous_by_connectivity(&f) {
                Ok(by_conn) => {
                    if by_conn != v.holds {
                        return Err(Error::Contradiction("the two continuity characterizations disagree".into()));
                    }
                    ctx.report.verdict("continuous_by_connectivity", by_conn);
                }
                Err(e) if e.is_budget() => ctx.report.verdict("continuous_by_connectivity", Value::Null),
                Err(e) => return Err(e),
            }
            ctx.report.witness("continuity", v.witness.map(|(x, y)| json!([x, y])));
        }
        Command::Enumerate { domain, codomain, count_only } => {
            let dom = ctx.image(&domain)?;
            let cod = ctx.image(&codomain)?;
            if count_only {
                let n = maps::count_continuous(&dom, &cod, ctx.budget, ctx.threads)?;
                ctx.report.verdict("count", n);
            } else {
                let all = maps::collect_continuous(&dom, &cod, ctx.budget, ctx.threads)?;
                ctx.report.verdict("count", all.len());
                ctx.report.witness("maps", all.iter().map(pairs).collect::<Vec<_>>());
            }
        }
        Command::Afpp { image } => {
            let img = ctx.image(&image)?;
            let v = maps::has_afpp(&img, ctx.budget)?;
            let wu = maps::is_weakly_universal(&DigitalMap::identity(&img), ctx.budget)?;
            if wu.holds != v.holds {
                return Err(Error::Contradiction("AFPP disagrees with weak universality of the identity".into()));
            }
            ctx.report.verdict("afpp", v.holds);
            ctx.report.verdict("identity_weakly_universal", wu.holds);
            ctx.report.witness("afpp", v.witness.as_ref().map(pairs));
        }
        Command::Universal { image, map } => {
            let img = ctx.image(&image)?;
            let f = ctx.map(&map, &img, &img)?;
            let u = maps::is_universal(&f, ctx.budget)?;
            let w = maps::is_weakly_universal(&f, ctx.budget)?;
            ctx.report.verdict("universal", u.holds);
            ctx.report.verdict("weakly_universal", w.holds);
            ctx.report.witness("universal", u.witness.as_ref().map(pairs));
            ctx.report.witness("weakly_universal", w.witness.as_ref().map(pairs));
        }
        Command::Product { images, u, check_afpp } => {
            let factors = images.iter().map(|p| ctx.image(p)).collect::<Result<Vec<_>, _>>()?;
            let prod = build_product(&factors, u).map_err(|e| Error::Parse {
                path: "--u".into(),
                message: e.to_string(),
            })?;
            let carrier = prod.carrier();
            ctx.report.verdict("points", carrier.len());
            ctx.report.verdict("edges", carrier.edge_count());
            ctx.report.verdict("arities", prod.arities());
            if check_afpp {
                let c = check_product_afpp(&prod, ctx.budget)?;
                ctx.report.verdict("theorem_applies", c.applies);
                ctx.report.verdict("carrier_afpp", c.carrier.holds);
                ctx.report.verdict("factor_afpp", c.factors.iter().map(|v| v.holds).collect::<Vec<_>>());
                ctx.report.verdict("implication_holds", c.implication_holds);
                ctx.report.witness("carrier_afpp", c.carrier.witness.as_ref().map(pairs));
                let lifted: Vec<Value> = c
                    .lifted_witnesses
                    .iter()
                    .map(|(i, f)| json!({ "factor": i, "map": pairs(f) }))
                    .collect();
                ctx.report.witness("lifted_factor_witnesses", lifted);
            }
            if let Some(path) = &ctx.carrier_out {
                format::save(path, &format::image_to_json(carrier))?;
            } else {
                ctx.report.witness("carrier", format::image_to_json(carrier));
            }
        }
        Command::AnalyzePair { image, metric, s, t, alpha, x0 } => {
            let space = ctx.space(&image, &metric)?;
            let img = space.image().clone();
            let sm = ctx.map(&s, &img, &img)?;
            let tm = ctx.map(&t, &img, &img)?;
            let alpha = rational_arg("alpha", &alpha)?;
            let x0: Point = match &x0 {
                Some(text) => text.parse().map_err(|e: Error| Error::Parse {
                    path: "--x0".into(),
                    message: e.to_string(),
                })?,
                None => img.point(0).clone(),
            };
            let check = theoremlab::contraction_pair_check(&space, &sm, &tm, &alpha).map_err(|e| Error::Parse {
                path: "--alpha".into(),
                message: e.to_string(),
            })?;
            let cs = maps::is_continuous(&sm);
            let ct = maps::is_continuous(&tm);
            let wc = theoremlab::is_weakly_commuting(&space, &sm, &tm)?;
            let wk = theoremlab::is_weakly_compatible(&sm, &tm)?;
            let ratio = theoremlab::contraction_ratio(&space, &sm, &tm)?;
            ctx.report.verdict("inclusion", check.inclusion.holds);
            ctx.report.verdict("contraction", check.contraction.holds);
            ctx.report.verdict("contraction_ratio", ratio.map(|d| d.to_string()));
            ctx.report.verdict("s_continuous", cs.holds);
            ctx.report.verdict("t_continuous", ct.holds);
            ctx.report.verdict("weakly_commuting", wc.holds);
            ctx.report.verdict("weakly_compatible", wk.holds);
            ctx.report.witness("inclusion", &check.inclusion.witness);
            ctx.report.witness("contraction", check.contraction.witness.map(|(a, b)| json!([a, b])));
            ctx.report.witness("s_continuity", cs.witness.map(|(a, b)| json!([a, b])));
            ctx.report.witness("t_continuity", ct.witness.map(|(a, b)| json!([a, b])));
            ctx.report.witness("weakly_commuting", &wc.witness);
            ctx.report.witness("weakly_compatible", &wk.witness);
            let cfp = theoremlab::weakly_commuting_common_fixed_point(&space, &sm, &tm, &alpha, &x0, None)?;
            ctx.report.verdict("common_fixed_point", cfp.conclusion.as_ref().map(|c| c.points.clone()));
            ctx.report.theorem("common_fixed_point_report", &cfp);
            let cm = theoremlab::constant_map_criterion(&space, &sm, &tm, &alpha)?;
            ctx.report.theorem("constant_map_report", &cm);
        }
        Command::Expansive { image, metric, map, k, mu } => {
            let space = ctx.space(&image, &metric)?;
            let img = space.image().clone();
            let t = ctx.map(&map, &img, &img)?;
            let k = rational_arg("k", &k)?;
            let mu = mu
                .iter()
                .map(|m| m.parse::<MuChoice>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { path: "--mu".into(), message: e.to_string() })?;
            let one = parse_rational("1").expect("literal");
            let half = parse_rational("1/2").expect("literal");
            let two = parse_rational("2").expect("literal");
            ctx.report.verdict("k", format_rational(&k));
            if k > one {
                let v = theoremlab::is_expansive(&space, &t, &k)?;
                ctx.report.verdict("expansive", v.holds);
                ctx.report.witness("expansive", v.witness.map(|(a, b)| json!([a, b])));
            } else {
                ctx.report.verdict("expansive", "skipped: needs k > 1");
            }
            if k >= half {
                let r = theoremlab::sum_expansive_identity_check(&space, &t, &k)?;
                ctx.report.verdict("sum_expansive", r.hypotheses_hold());
                ctx.report.theorem("sum_expansive_report", &r);
            } else {
                ctx.report.verdict("sum_expansive", "skipped: needs k >= 1/2");
            }
            if k > one && k < two {
                let params = ExpansiveParams::new(k.clone(), mu).map_err(|e| Error::Parse {
                    path: "--mu".into(),
                    message: e.to_string(),
                })?;
                let r = theoremlab::generalized_expansive_fixed_point(&space, &t, &params).map_err(|e| match e {
                    Error::InvalidInput(m) => Error::Parse { path: "--mu".into(), message: m },
                    other => other,
                })?;
                ctx.report.verdict("generalized_expansive", r.hypotheses_hold());
                ctx.report.theorem("generalized_expansive_report", &r);
            } else {
                ctx.report.verdict("generalized_expansive", "skipped: needs 1 < k < 2");
            }
            if (2..=IMPOSSIBILITY_MAX_POINTS).contains(&space.len()) {
                let r = theoremlab::expansive_onto_impossibility(&space)?;
                ctx.report.verdict("onto_expansive_exists", false);
                ctx.report.theorem("impossibility_report", &r);
            }
        }
        Command::Fixtures { action } => match action {
            FixtureAction::List => {
                let mut rows = Vec::new();
                for name in fixtures::registry() {
                    let fx = fixtures::load(name)?;
                    rows.push(json!({ "name": name, "description": fx.description, "checks": fx.expected.len() }));
                    ctx.report.sections.push(format!("{name:<20} {}\n", fx.description));
                }
                ctx.report.verdict("fixtures", rows);
            }
            FixtureAction::Run { name } => {
                let names: Vec<String> = match name {
                    Some(n) => {
                        fixtures::source(&n)?;
                        vec![n]
                    }
                    None => fixtures::registry().into_iter().map(String::from).collect(),
                };
                let mut outcomes = Vec::new();
                let mut table = String::new();
                for n in &names {
                    let fx = fixtures::load(n)?;
                    for o in fixtures::replay(&fx, ctx.budget) {
                        let args: Vec<String> = o.args.iter().map(|(k, v)| format!("{k}={v}")).collect();
                        let mark = if o.passed { "PASS" } else { "FAIL" };
                        table += &format!("{mark}  {:<20} {:<26} {}\n", o.fixture, o.op, args.join(" "));
                        if !o.passed {
                            table += &format!("      expected {}\n      actual   {}\n", compact(&Value::Object(o.expected.clone())), compact(&o.actual));
                        }
                        outcomes.push(o);
                    }
                }
                let failed = outcomes.iter().filter(|o| !o.passed).count();
                ctx.report.verdict("passed", outcomes.len() - failed);
                ctx.report.verdict("failed", failed);
                ctx.report.verdict("outcomes", &outcomes);
                ctx.report.sections.push(table);
                if failed > 0 {
                    *code = 1;
                }
            }
        },
        Command::Sequence { space, sequence, threshold } => {
            let s = ctx.space(&space.image, &space.metric)?;
            let text = ctx.read(&sequence)?;
            let seq = in_file(&sequence, format::parse_sequence(&text))?;
            let threshold = match &threshold {
                Some(t) => Some(Distance::from_rational(rational_arg("threshold", t).and_then(|q| {
                    if q < parse_rational("0").expect("literal") {
                        Err(Error::Parse { path: "--threshold".into(), message: "must be nonnegative".into() })
                    } else {
                        Ok(q)
                    }
                })?)),
                None => None,
            };
            let r = in_file(&sequence, metric::cauchy_modulus(&seq, &s, threshold))?;
            ctx.report.verdict("length", seq.len());
            ctx.report.verdict("eventually_constant", r.stabilization.eventually_constant);
            ctx.report.verdict("stabilization_index", r.stabilization.index);
            ctx.report.verdict("threshold", r.threshold.as_ref().map(|d| d.to_string()));
            ctx.report.verdict("cauchy_at_threshold", r.cauchy_at_threshold);
            ctx.report.verdict("cauchy_tail_start", r.cauchy_tail_start);
            ctx.report.verdict("tail_sup", r.tail_sups.first().map(|d| d.to_string()));
            ctx.report.verdict("max_even_odd_gap", r.max_even_odd_gap.as_ref().map(|d| d.to_string()));
            ctx.report.verdict("min_gap", r.min_gap.as_ref().map(|d| d.to_string()));
            ctx.report.verdict("proposition_holds", r.proposition_holds);
        }
    }
    Ok(())
}
