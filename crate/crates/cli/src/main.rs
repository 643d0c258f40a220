//! `taut`: command-line access to the tautring library. Every command
//! writes one JSON document to standard output; diagnostics and optional
//! coefficient tables go to standard error.
//!
//! Exit status: 0 on success, 1 for unreadable input, 2 when a budget or
//! timeout is exceeded, 3 when a mathematical precondition fails.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;
use tautring::covers::{degree_delta, degree_delta_bruteforce};
use tautring::error::Error;
use tautring::ggraph::{self, enumerate_generic_a_structures, excess_factors, GGraph, DEFAULT_BUDGET};
use tautring::graph::{self, RawGraph, StableGraph};
use tautring::hurwitz::{
    self, diagonal_class, pairing_vector, pullback_class, pullpush_delta_via, solve_by_pairing, solve_cycle, CycleDb,
    CycleRecord, HurwitzCycleRef, RawRecord, Route,
};
use tautring::rational::{fmt_q, Q};
use tautring::taut::{KunnethClass, TautClass};
use tautring::witten;

#[derive(Parser)]
#[command(name = "taut", version, about = "Exact intersection theory on moduli of stable curves and admissible cover cycles")]
struct Cli {
    #[command(flatten)]
    opts: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Directory of cycle records read on top of the built-in seeds
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    /// Candidate cap for enumerations
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Wall-clock limit in seconds
    #[arg(long, global = true)]
    timeout: Option<u64>,
    /// Number of worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for the cache of intersection numbers
    #[arg(long, global = true, env = "TAUT_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Write coefficients of normalized strata [Γ] = ξ_Γ*(…)/|Aut Γ|
    #[arg(long, global = true)]
    normalized: bool,
    /// Compute local cycle classes missing from the database by pairing
    #[arg(long, global = true)]
    solve_missing: bool,
    /// Print an aligned coefficient table on standard error
    #[arg(long, global = true)]
    table: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a stable graph, class, Künneth class, G-graph or cycle record
    Validate(ValidateArgs),
    /// Stable graphs of genus g with n legs, up to isomorphism
    EnumGraphs {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        /// Largest number of edges
        #[arg(long)]
        edges: Option<usize>,
    },
    /// Order of the automorphism group of a stable graph
    Aut {
        #[arg(long)]
        graph: String,
    },
    /// Intersection product of two classes
    Product {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Pull a class back along a forgetful or gluing map, or pull a cycle
    /// back to a boundary stratum
    #[command(group(ArgGroup::new("what").required(true).args(["class", "cycle"])))]
    Pullback {
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        cycle: Option<String>,
        /// Leg added by the forgetful map
        #[arg(long)]
        forget: Option<u32>,
        /// Stable graph of the gluing map
        #[arg(long)]
        graph: Option<String>,
    },
    /// Push a class forward along a forgetful map, or a Künneth class
    /// along its gluing map
    #[command(group(ArgGroup::new("what").required(true).args(["class", "kunneth"])))]
    Pushforward {
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        forget: Option<u32>,
        #[arg(long)]
        kunneth: Option<String>,
    },
    /// Integral of a top-degree class
    Integral {
        #[arg(long)]
        class: String,
    },
    /// Degree of the target map of a Hurwitz space
    DegDelta {
        /// `cyclic:<m>`, `Z<m>` or `table:<json file>`
        #[arg(long)]
        group: String,
        #[arg(long)]
        gprime: u32,
        /// Monodromy, e.g. `1,1,1,1,1,1` or `1^6`
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        /// Count homomorphisms by brute force instead of the formula
        #[arg(long)]
        bruteforce: bool,
    },
    /// Generic A-structures of admissible G-graphs over a stable graph
    EnumGstructures {
        #[arg(long)]
        cycle: String,
        /// Stable graph with legs labeled by the kept markings 1..n
        #[arg(long)]
        graph: String,
    },
    /// δ_* φ^* of a class on the Hurwitz space of a cycle
    Pullpush {
        #[arg(long)]
        cycle: String,
        #[arg(long)]
        class: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
        route: RouteArg,
    },
    /// Intersection numbers of a cycle with strata of complementary degree
    Pair {
        #[arg(long)]
        cycle: String,
        /// JSON array of classes, or an object with a `strata` array
        #[arg(long)]
        strata: String,
    },
    /// Express a cycle in decorated strata by the pairing method
    SolveCycle {
        #[arg(long)]
        cycle: String,
        #[arg(long)]
        degree: u32,
        #[arg(long, requires = "complementary")]
        generators: Option<String>,
        #[arg(long, requires = "generators")]
        complementary: Option<String>,
        /// Add the solution to the database directory given by --db
        #[arg(long)]
        store: bool,
    },
    /// Künneth decomposition of the small diagonal in a product of M̄_{g,n}
    Diagonal {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        copies: usize,
    },
    /// Inspect and edit the cycle database
    Db {
        #[command(subcommand)]
        cmd: DbCommand,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).multiple(false).args(["graph", "class", "kunneth", "ggraph", "record"])))]
struct ValidateArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    kunneth: Option<String>,
    #[arg(long)]
    ggraph: Option<String>,
    #[arg(long)]
    record: Option<String>,
}

#[derive(Subcommand)]
enum DbCommand {
    /// Every record with its provenance
    List,
    /// One record in full
    Show {
        #[arg(long)]
        cycle: String,
    },
    /// Add records from JSON files and write the database directory
    Import { files: Vec<PathBuf> },
    /// Write every record to a directory
    Export {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Direct,
    Forgetful,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Budget(_) => 2,
            Failure::Precondition(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Budget(m) => write!(f, "budget exceeded: {m}"),
            Failure::Precondition(m) => write!(f, "precondition failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Failure::Input(m),
            Error::Budget(m) => Failure::Budget(m),
            other => Failure::Precondition(other.to_string()),
        }
    }
}

type Out = Result<Value, Failure>;

fn read_json(arg: &str) -> Result<Value, Failure> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{arg}: {e}")))
}

fn read_graph(arg: &str) -> Result<StableGraph, Failure> {
    let raw: RawGraph = serde_json::from_value(read_json(arg)?).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(StableGraph::from_raw(&raw)?)
}

fn read_class(arg: &str) -> Result<TautClass, Failure> {
    Ok(TautClass::from_json(&read_json(arg)?)?)
}

fn read_classes(arg: &str) -> Result<Vec<TautClass>, Failure> {
    let v = read_json(arg)?;
    let list = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) => match o.get("strata") {
            Some(Value::Array(a)) => a.clone(),
            _ => return Err(Failure::Input(format!("{arg}: expected a `strata` array"))),
        },
        _ => return Err(Failure::Input(format!("{arg}: expected an array of classes"))),
    };
    list.iter().map(|x| Ok(TautClass::from_json(x)?)).collect()
}

fn parse_cycle(s: &str) -> Result<HurwitzCycleRef, Failure> {
    Ok(HurwitzCycleRef::parse(s)?)
}

fn coefficient_table(rows: Vec<(String, String)>) -> String {
    let w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (c, d) in rows {
        s.push_str(&format!("{c:>w$}  {d}\n"));
    }
    s
}

fn class_table(x: &TautClass) -> String {
    let rows = x
        .pretty()
        .lines()
        .map(|l| match l.split_once(" · ") {
            Some((c, d)) => (c.to_string(), d.to_string()),
            None => (l.to_string(), String::new()),
        })
        .collect();
    coefficient_table(rows)
}

struct Ctx {
    opts: Global,
    db: CycleDb,
}

impl Ctx {
    fn class(&self, x: &TautClass) -> Value {
        if self.opts.table {
            eprint!("{}", class_table(x));
        }
        x.to_json(self.opts.normalized)
    }

    fn kunneth(&self, k: &KunnethClass) -> Value {
        if self.opts.table {
            let rows = k.terms().map(|(_, c)| (fmt_q(c), String::new())).collect();
            eprint!("{}", coefficient_table(rows));
        }
        k.to_json()
    }

    fn db_dir(&self) -> Result<&Path, Failure> {
        self.opts.db.as_deref().ok_or_else(|| Failure::Input("this command needs --db <dir>".into()))
    }
}

fn validate(a: &ValidateArgs) -> Out {
    let (kind, violations): (&str, Vec<String>) = if let Some(s) = &a.graph {
        let raw: RawGraph = serde_json::from_value(read_json(s)?).map_err(|e| Failure::Input(e.to_string()))?;
        match StableGraph::from_raw(&raw) {
            Ok(_) => ("graph", vec![]),
            Err(Error::InvalidGraph(v)) => ("graph", v),
            Err(e) => ("graph", vec![e.to_string()]),
        }
    } else if let Some(s) = &a.class {
        ("class", TautClass::from_json(&read_json(s)?).err().map(|e| e.to_string()).into_iter().collect())
    } else if let Some(s) = &a.kunneth {
        ("kunneth", KunnethClass::from_json(&read_json(s)?).err().map(|e| e.to_string()).into_iter().collect())
    } else if let Some(s) = &a.ggraph {
        let raw = serde_json::from_value(read_json(s)?).map_err(|e| Failure::Input(e.to_string()))?;
        match GGraph::from_raw(&raw) {
            Ok(gg) => ("ggraph", gg.violations()),
            Err(Error::InvalidGraph(v)) => ("ggraph", v),
            Err(e) => ("ggraph", vec![e.to_string()]),
        }
    } else if let Some(s) = &a.record {
        let raw: RawRecord = serde_json::from_value(read_json(s)?).map_err(|e| Failure::Input(e.to_string()))?;
        ("record", CycleRecord::from_raw(&raw).err().map(|e| e.to_string()).into_iter().collect())
    } else {
        unreachable!("clap requires one input")
    };
    if violations.is_empty() {
        Ok(json!({ "kind": kind, "valid": true }))
    } else {
        emit(&json!({ "kind": kind, "valid": false, "violations": violations }));
        Err(Failure::Precondition(violations.join("; ")))
    }
}

fn run(ctx: &Ctx, cmd: &Command) -> Out {
    match cmd {
        Command::Validate(a) => validate(a),
        Command::EnumGraphs { g, n, edges } => {
            let max = edges.unwrap_or((3 * *g as i64 - 3 + *n as i64).max(0) as usize);
            let graphs = graph::enumerate_graphs(*g, *n, max)?;
            let raw: Vec<RawGraph> = graphs.iter().map(|x| x.to_raw()).collect();
            Ok(json!({ "count": raw.len(), "graphs": raw }))
        }
        Command::Aut { graph } => Ok(json!({ "automorphisms": graph::automorphism_count(&read_graph(graph)?) })),
        Command::Product { a, b } => Ok(ctx.class(&read_class(a)?.product(&read_class(b)?)?)),
        Command::Pullback { class, cycle, forget, graph } => match (class, cycle, forget, graph) {
            (Some(x), None, Some(l), None) => Ok(ctx.class(&read_class(x)?.pullback_forgetful(*l)?)),
            (Some(x), None, None, Some(a)) => Ok(ctx.kunneth(&read_class(x)?.pullback_boundary(&read_graph(a)?)?)),
            (None, Some(c), None, Some(a)) => Ok(ctx.kunneth(&pullback_class(&parse_cycle(c)?, &read_graph(a)?, &ctx.db)?)),
            _ => Err(Failure::Input("give --class with one of --forget/--graph, or --cycle with --graph".into())),
        },
        Command::Pushforward { class, forget, kunneth } => match (class, forget, kunneth) {
            (Some(x), Some(l), None) => Ok(ctx.class(&read_class(x)?.pushforward_forgetful(*l)?)),
            (None, None, Some(k)) => Ok(ctx.class(&KunnethClass::from_json(&read_json(k)?)?.pushforward())),
            _ => Err(Failure::Input("give --class with --forget, or --kunneth".into())),
        },
        Command::Integral { class } => Ok(json!({ "value": fmt_q(&read_class(class)?.evaluate()?) })),
        Command::DegDelta { group, gprime, xi, bruteforce } => {
            let gr = hurwitz::parse_group(group)?;
            let xi = hurwitz::parse_xi(&gr, xi)?;
            let d: Q = if *bruteforce {
                degree_delta_bruteforce(*gprime, &gr, &xi, ctx.opts.budget.unwrap_or(DEFAULT_BUDGET))?
            } else {
                degree_delta(*gprime, &gr, &xi)?
            };
            Ok(json!({ "degree": fmt_q(&d) }))
        }
        Command::EnumGstructures { cycle, graph } => {
            let c = parse_cycle(cycle)?;
            let a = c.marking_graph(&read_graph(graph)?)?;
            let en = enumerate_generic_a_structures(&c.spec, &a)?;
            let items: Vec<Value> = en
                .representatives()
                .into_iter()
                .map(|(h, mult)| {
                    let quotient = h.gg.quotient().map(|q| q.graph.to_raw());
                    Ok(json!({
                        "ggraph": h.gg.to_raw(),
                        "quotient": quotient?,
                        "degree": fmt_q(&h.degree),
                        "multiplicity": mult.to_string(),
                        "excess": excess_factors(&h.gg, &h.f),
                    }))
                })
                .collect::<Result<_, Error>>()?;
            Ok(json!({ "count": en.count().to_string(), "classes": items }))
        }
        Command::Pullpush { cycle, class, route } => {
            let r = match route {
                RouteArg::Direct => Route::Direct,
                RouteArg::Forgetful => Route::Forgetful,
            };
            Ok(ctx.class(&pullpush_delta_via(&parse_cycle(cycle)?, &read_class(class)?, r)?))
        }
        Command::Pair { cycle, strata } => {
            let v = pairing_vector(&parse_cycle(cycle)?, &read_classes(strata)?)?;
            Ok(json!({ "values": v.iter().map(fmt_q).collect::<Vec<_>>() }))
        }
        Command::SolveCycle { cycle, degree, generators, complementary, store } => {
            let c = parse_cycle(cycle)?;
            let s = match (generators, complementary) {
                (Some(g), Some(k)) => solve_by_pairing(&c, *degree, &read_classes(g)?, &read_classes(k)?)?,
                _ => solve_cycle(&c, *degree)?,
            };
            if *store {
                if !s.is_unique() {
                    return Err(Failure::Precondition("the solution is not unique, nothing stored".into()));
                }
                let dir = ctx.db_dir()?;
                ctx.db.insert(CycleRecord::new(c.clone(), s.class.clone(), "solved by pairing against decorated strata")?);
                ctx.db.save_dir(dir)?;
            }
            Ok(json!({
                "cycle": c.to_string(),
                "class": ctx.class(&s.class),
                "coefficients": s.coefficients.iter().map(fmt_q).collect::<Vec<_>>(),
                "unique": s.is_unique(),
                "kernel": s.kernel.iter().map(|k| k.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "generators": s.generators.len(),
                "complementary": s.complementary.len(),
            }))
        }
        Command::Diagonal { g, n, copies } => Ok(ctx.kunneth(&diagonal_class(*g, *n, *copies)?)),
        Command::Db { cmd } => match cmd {
            DbCommand::List => {
                let mut records = ctx.db.records();
                records.sort_by_key(|r| r.cycle.to_string());
                let items: Vec<Value> = records
                    .iter()
                    .map(|r| json!({ "cycle": r.cycle.to_string(), "codim": r.cycle.codim(), "provenance": r.provenance }))
                    .collect();
                Ok(json!({ "records": items }))
            }
            DbCommand::Show { cycle } => {
                let c = parse_cycle(cycle)?;
                let r = ctx.db.find(&c).ok_or_else(|| Failure::Precondition(format!("no record for {c}")))?;
                if ctx.opts.table {
                    eprint!("{}", class_table(&r.class));
                }
                serde_json::to_value(r.to_raw()).map_err(|e| Failure::Input(e.to_string()))
            }
            DbCommand::Import { files } => {
                let dir = ctx.db_dir()?;
                for f in files {
                    let v = read_json(&f.to_string_lossy())?;
                    let raw: RawRecord = serde_json::from_value(v).map_err(|e| Failure::Input(format!("{}: {e}", f.display())))?;
                    ctx.db.insert(CycleRecord::from_raw(&raw)?);
                }
                let written = ctx.db.save_dir(dir)?;
                Ok(json!({ "imported": files.len(), "written": written }))
            }
            DbCommand::Export { out } => Ok(json!({ "written": ctx.db.save_dir(out)? })),
        },
    }
}

fn setup(opts: &Global) -> Result<CycleDb, Failure> {
    if let Some(j) = opts.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global().map_err(|e| Failure::Input(e.to_string()))?;
    }
    if let Some(b) = opts.budget {
        ggraph::set_budget(b);
    }
    if let Some(t) = opts.timeout {
        std::thread::spawn(move || {
            std::thread::sleep(Duration::from_secs(t));
            eprintln!("budget exceeded: timeout of {t} s");
            std::process::exit(2);
        });
    }
    if let Some(dir) = &opts.cache_dir {
        let f = dir.join("witten.json");
        if f.exists() {
            witten::load_cache(&f)?;
        }
    }
    let db = CycleDb::seeded();
    db.set_solve_missing(opts.solve_missing);
    if let Some(dir) = &opts.db {
        if dir.is_dir() {
            db.load_dir(dir)?;
        }
    }
    Ok(db)
}

fn finish(opts: &Global) -> Result<(), Failure> {
    if let Some(dir) = &opts.cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        witten::save_cache(&dir.join("witten.json"))?;
    }
    Ok(())
}

fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = setup(&cli.opts).and_then(|db| {
        let ctx = Ctx { opts: cli.opts, db };
        let v = run(&ctx, &cli.cmd)?;
        finish(&ctx.opts)?;
        Ok(v)
    });
    match result {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
