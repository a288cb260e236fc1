//! Batch interface: one job per invocation, deterministic JSON or text on
//! stdout (or `--out`), a JSON error object on stderr.
//!
//! Exit codes: 0 success, 1 error, 2 a result could not be confirmed
//! within the bound.

use crate::base_kernel::{categories_isomorphic, FiniteCategory, GlobularSet};
use crate::coequaliser::{
    algebra_coequaliser, fast_path_coequaliser, lift_tuple, mset_algebra, presentation_pair, pushforward,
    t_cross_splitting, AlgebraPresentation, LiftOptions, MonadMap,
};
use crate::contractibility::contractible_check;
use crate::enriched_graph::{Graph, Morphism, Value};
use crate::formats::{self, Input};
use crate::graph_monad::{
    algebra_category, category_algebra, check_monad_laws, check_pathlike, free_category_monad, free_ncat, ncat_monad,
    Algebra, FreeCommMonoid, FreeMonoid, Gamma, Identity, Mn, Monad,
};
use crate::multitensor::{
    check_axioms, small_sets, summand_sizes, t_cross, Bar, DistComposite, Mt, OneCell, OperadMultitensor, Product,
};
use crate::operad::{check_cartesian, enlarged_fibre_collection, Collection, FiniteMonoid, MonoidOperad, Operad, TableOperad};
use crate::term::{atom, Term};
use crate::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const DEFAULT_BOUND: u64 = 3;
pub const DEFAULT_SEED: u64 = 0;
/// Largest estimated `T(T(T(X)))` that `law` enumerates.
pub const LAW_BUDGET: usize = 200_000;

#[derive(Parser, Debug, Clone)]
#[command(name = "multicat", version, about = "Bounded computations with multitensors, graph monads and globular sets")]
pub struct Cli {
    /// Rank or size bound for truncated enumerations.
    #[arg(long, global = true, env = "MULTICAT_BOUND", default_value_t = DEFAULT_BOUND,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Json,
    Text,
    Graph,
    Presheaf,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Cells of the free strict n-category on an n-globular set.
    FreeNcat { n: usize, file: PathBuf },
    /// Apply the monad built from a multitensor to a graph.
    Gamma {
        #[arg(long)]
        multitensor: String,
        file: PathBuf,
    },
    /// Evaluate the multitensor recovered from a monad, on sets of the
    /// given sizes or on the given files.
    Bar {
        #[arg(long)]
        monad: String,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        files: Vec<PathBuf>,
    },
    /// Evaluate the composite of two multitensors with its summand sizes.
    Compose {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Lift a multitensor to the algebras of its unary part and evaluate
    /// it on the given algebras (categories or monoid-sets).
    Lift {
        #[arg(long)]
        multitensor: String,
        files: Vec<PathBuf>,
    },
    /// Quotient of a free monoid by a presentation.
    Coequalise { file: PathBuf },
    /// Push a set forward along the unit of a monad on sets.
    Pushforward {
        /// `unit:<monad>`.
        #[arg(long)]
        map: String,
        file: PathBuf,
    },
    /// Check the monad laws on a value.
    Law {
        #[arg(long)]
        monad: String,
        file: PathBuf,
    },
    /// Check the unit and associativity axioms of a multitensor on samples.
    CheckAxioms {
        #[arg(long)]
        multitensor: String,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
    /// Check that a monad decomposes over object sequences.
    CheckPathlike {
        #[arg(long)]
        monad: String,
        file: PathBuf,
    },
    /// Check that a collection's naturality squares are pullbacks on
    /// sampled maps of sets.
    CheckCartesian {
        #[arg(long)]
        collection: String,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
    /// Decide contractibility of a collection up to the bound.
    CheckContractible {
        #[arg(long)]
        collection: String,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
    /// Convert an input file to another form.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Json)]
        to: Target,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FreeNcat { .. } => "free-ncat",
            Command::Gamma { .. } => "gamma",
            Command::Bar { .. } => "bar",
            Command::Compose { .. } => "compose",
            Command::Lift { .. } => "lift",
            Command::Coequalise { .. } => "coequalise",
            Command::Pushforward { .. } => "pushforward",
            Command::Law { .. } => "law",
            Command::CheckAxioms { .. } => "check-axioms",
            Command::CheckPathlike { .. } => "check-pathlike",
            Command::CheckCartesian { .. } => "check-cartesian",
            Command::CheckContractible { .. } => "check-contractible",
            Command::Convert { .. } => "convert",
        }
    }
}

/// A parsed invocation.
#[derive(Debug, Clone)]
pub struct Job {
    pub command: Command,
    pub bound: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl From<Cli> for Job {
    fn from(c: Cli) -> Job {
        Job { command: c.command, bound: c.bound as usize, seed: c.seed, format: c.format, out: c.out }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

// ---------------------------------------------------------------------------
// Builtin specifications

/// `cyclicN` or `idempotent`, with a trailing `+` for the positive operad.
fn monoid_operad(spec: &str) -> Result<MonoidOperad> {
    let (name, positive) = match spec.strip_suffix('+') {
        Some(s) => (s, true),
        None => (spec, false),
    };
    let monoid = if name == "idempotent" {
        FiniteMonoid::idempotent()
    } else if let Some(n) = name.strip_prefix("cyclic").and_then(|n| n.parse::<usize>().ok()).filter(|n| *n > 0) {
        FiniteMonoid::cyclic(n)
    } else {
        return Err(invalid(format!("unknown monoid {name}; expected cyclicN or idempotent")));
    };
    Ok(MonoidOperad { monoid: Arc::new(monoid), positive })
}

fn operad_file(path: &str) -> Result<TableOperad> {
    match formats::parse_file(Path::new(path))? {
        Input::Operad(o) => Ok(o),
        other => Err(invalid(format!("{path} holds a {}, not an operad", other.kind()))),
    }
}

/// Operads: `two-binary`, `monoid:<cyclicN|idempotent>[+]`, `file:PATH`.
pub fn operad_spec(spec: &str) -> Result<Arc<dyn Operad>> {
    if spec == "two-binary" {
        Ok(Arc::new(TableOperad::two_binary()))
    } else if let Some(m) = spec.strip_prefix("monoid:") {
        Ok(Arc::new(monoid_operad(m)?))
    } else if let Some(p) = spec.strip_prefix("file:") {
        Ok(Arc::new(operad_file(p)?))
    } else {
        Err(invalid(format!("unknown operad {spec}")))
    }
}

/// Monads: `identity[:L]`, `free-category`, `ncat:N`, `free-monoid`,
/// `free-comm-monoid`.
pub fn monad_spec(spec: &str) -> Result<Mn> {
    let level = |s: &str| s.parse::<usize>().map_err(|_| invalid(format!("bad level in {spec}")));
    match spec {
        "identity" => Ok(Arc::new(Identity { level: 1 })),
        "free-category" => Ok(free_category_monad()),
        "free-monoid" => Ok(Arc::new(FreeMonoid)),
        "free-comm-monoid" => Ok(Arc::new(FreeCommMonoid)),
        _ => {
            if let Some(l) = spec.strip_prefix("identity:") {
                Ok(Arc::new(Identity { level: level(l)? }))
            } else if let Some(n) = spec.strip_prefix("ncat:") {
                let n = level(n)?;
                if n == 0 {
                    return Err(invalid("ncat:N needs N ≥ 1"));
                }
                Ok(ncat_monad(n))
            } else {
                Err(invalid(format!("unknown monad {spec}")))
            }
        }
    }
}

/// Multitensors: `product[:L]`, `tcross:<monad>`, `operad:<operad>`.
pub fn multitensor_spec(spec: &str) -> Result<Mt> {
    if spec == "product" {
        Ok(Arc::new(Product { level: 0 }))
    } else if let Some(l) = spec.strip_prefix("product:") {
        let level = l.parse().map_err(|_| invalid(format!("bad level in {spec}")))?;
        Ok(Arc::new(Product { level }))
    } else if let Some(m) = spec.strip_prefix("tcross:") {
        let t = monad_spec(m)?;
        if t.level() == 0 {
            return Err(invalid(format!("{m} acts on sets; tcross needs a monad on graphs")));
        }
        Ok(Arc::new(t_cross(t)))
    } else if let Some(o) = spec.strip_prefix("operad:") {
        Ok(Arc::new(OperadMultitensor { operad: operad_spec(o)?, level: 0 }))
    } else {
        Err(invalid(format!("unknown multitensor {spec}")))
    }
}

/// Collections: `identity:<multitensor>`, `operad:<operad>`,
/// `enlarged-fibre`.
pub fn collection_spec(spec: &str) -> Result<Collection> {
    if spec == "enlarged-fibre" {
        Ok(enlarged_fibre_collection())
    } else if let Some(m) = spec.strip_prefix("identity:") {
        Ok(Collection::identity(multitensor_spec(m)?))
    } else if let Some(o) = spec.strip_prefix("operad:") {
        Ok(Collection::of_operad(operad_spec(o)?))
    } else {
        Err(invalid(format!("unknown collection {spec}")))
    }
}

// ---------------------------------------------------------------------------
// Inputs

fn read(path: &Path) -> Result<Input> {
    formats::parse_file(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

/// The value an input denotes at the given level.
fn as_value(x: Input, level: usize) -> Result<Value> {
    let v = match x {
        Input::Graph(v) | Input::Set(v) => v,
        Input::Globular(g) => g.to_graph(),
        Input::Category(c) => c.underlying_graph(),
        Input::MSet(m) => Value::set(m.elements),
        other => return Err(invalid(format!("a {} does not denote a graph", other.kind()))),
    };
    if v.level() != level {
        return Err(invalid(format!("expected a value of level {level}, got level {}", v.level())));
    }
    Ok(v)
}

/// Number of strings of at most `bound` composable top-level cells of
/// `v` (words, for a set): the size of the free category on `v`, and a
/// lower estimate for the monads above it.
fn sequence_estimate(v: &Value, bound: usize) -> f64 {
    let objs = v.objects();
    if v.level() == 0 {
        let n = objs.len() as f64;
        return (0..=bound).map(|k| n.powi(k as i32)).sum();
    }
    let w: Vec<Vec<f64>> =
        objs.iter().map(|a| objs.iter().map(|b| v.hom(a, b).objects().len() as f64).collect()).collect();
    let mut layer: Vec<Vec<f64>> = (0..objs.len()).map(|i| (0..objs.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut total: f64 = objs.len() as f64;
    for _ in 0..bound {
        layer = (0..objs.len())
            .map(|i| (0..objs.len()).map(|j| (0..objs.len()).map(|k| layer[i][k] * w[k][j]).sum()).collect())
            .collect();
        total += layer.iter().flatten().sum::<f64>();
    }
    total
}

fn sized_set(n: usize) -> Value {
    Value::set((0..n).map(|i| atom(&format!("x{i}"))))
}

fn j<T: serde::Serialize>(x: &T) -> Json {
    serde_json::to_value(x).expect("serialisable")
}

fn value_json(v: &Value) -> Json {
    json!({"counts": v.counts(), "size": v.size(), "value": j(v)})
}

/// Sample values for axiom checks: the small sets, or small seeded graphs.
fn samples(level: usize, seed: u64) -> Vec<Value> {
    if level == 0 {
        return small_sets();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..3)
        .map(|_| {
            let mut g = Graph::new(level);
            let objs: Vec<Term> = (0..rng.gen_range(1..=2)).map(|i| atom(&format!("o{i}"))).collect();
            for o in &objs {
                g.add_object(o.clone());
            }
            for a in &objs {
                for b in &objs {
                    if rng.gen_bool(0.5) {
                        g.set_hom(a.clone(), b.clone(), Value::terminal(level - 1));
                    }
                }
            }
            Value::Graph(g)
        })
        .collect()
}

/// Seeded maps between the small sets.
fn sample_maps(seed: u64) -> Vec<(Value, Value, Morphism)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = small_sets();
    let mut out = Vec::new();
    for x in &sets {
        for y in sets.iter().filter(|y| !y.objects().is_empty() || x.objects().is_empty()) {
            let ys = y.objects();
            let table = x.objects().into_iter().map(|e| (e, ys[rng.gen_range(0..ys.len())].clone())).collect();
            out.push((x.clone(), y.clone(), Morphism::set_table(table)));
        }
    }
    out
}

fn category_json(c: &FiniteCategory) -> Json {
    formats::to_json(&Input::Category(c.clone()))
}

// ---------------------------------------------------------------------------
// Commands

/// Runs a job and returns its result object (without the envelope).
pub fn execute(job: &Job) -> Result<Json> {
    let bound = job.bound;
    if bound == 0 {
        return Err(invalid("the bound must be positive"));
    }
    match &job.command {
        Command::FreeNcat { n, file } => {
            if *n == 0 {
                return Err(invalid("free-ncat needs n ≥ 1"));
            }
            let x = as_value(read(file)?, *n)?;
            let r = free_ncat(*n, &x, bound)?;
            let mut out = j(&r);
            for (c, rec) in out["cells"].as_array_mut().into_iter().flatten().zip(&r.cells) {
                c["display"] = json!(rec.cell.to_string());
                if let (Some(a), Some(b)) = (&rec.source, &rec.target) {
                    c["source_display"] = json!(a.to_string());
                    c["target_display"] = json!(b.to_string());
                }
            }
            Ok(out)
        }
        Command::Gamma { multitensor, file } => {
            let e = multitensor_spec(multitensor)?;
            let x = as_value(read(file)?, e.level() + 1)?;
            let v = Gamma::new(e.clone()).apply(&x, bound);
            Ok(json!({"multitensor": e.name(), "result": value_json(&v)}))
        }
        Command::Bar { monad, sizes, files } => {
            let t = monad_spec(monad)?;
            let b = Bar::new(t.clone())?;
            let args: Vec<Value> = if files.is_empty() {
                if t.level() != 1 {
                    return Err(invalid("--sizes gives sets; monads above graphs of sets need input files"));
                }
                sizes.iter().map(|&n| sized_set(n)).collect()
            } else {
                files.iter().map(|f| as_value(read(f)?, t.level() - 1)).collect::<Result<_>>()?
            };
            let v = b.apply(&args, bound);
            Ok(json!({"monad": t.name(), "arity": args.len(), "result": value_json(&v)}))
        }
        Command::Compose { left, right, sizes } => {
            let (l, r) = (multitensor_spec(left)?, multitensor_spec(right)?);
            if l.level() != 0 {
                return Err(invalid("compose evaluates on sets; use multitensors on sets"));
            }
            let lc: Arc<dyn OneCell> = l;
            let c = DistComposite::new(lc, r)?;
            let args: Vec<Value> = sizes.iter().map(|&n| sized_set(n)).collect();
            let v = c.apply(&args, bound);
            let summands: Vec<Json> =
                summand_sizes(&c, &args, bound).into_iter().map(|(shape, n)| json!({"shape": shape, "size": n})).collect();
            Ok(json!({"composite": c.name(), "result": value_json(&v), "summands": summands}))
        }
        Command::Lift { multitensor, files } => lift(multitensor, files, bound),
        Command::Coequalise { file } => coequalise(file, bound),
        Command::Pushforward { map, file } => {
            let m = map.strip_prefix("unit:").ok_or_else(|| invalid(format!("unknown map {map}; expected unit:<monad>")))?;
            let t = monad_spec(m)?;
            if t.level() != 0 {
                return Err(invalid("pushforward works with monads on sets"));
            }
            let z = as_value(read(file)?, 0)?;
            let phi = MonadMap::from_identity(t.clone());
            let x = AlgebraPresentation::finite(phi.from.clone(), z, Morphism::Id);
            let c = pushforward(&phi, &x, bound)?.coequaliser.require_certified()?;
            Ok(json!({
                "monad": t.name(),
                "size": c.len(),
                "elements": c.carrier.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                "certificate": j(&c.certificate),
            }))
        }
        Command::Law { monad, file } => {
            let t = monad_spec(monad)?;
            let x = as_value(read(file)?, t.level())?;
            let ttx = t.apply(&t.apply(&x, bound), bound);
            let estimate = sequence_estimate(&ttx, bound);
            if estimate > LAW_BUDGET as f64 {
                return Err(Error::BoundExhausted(format!(
                    "about {estimate:.0} cells of T(T(T(X))) at bound {bound}, above the budget of {LAW_BUDGET}; lower the bound"
                )));
            }
            let r = check_monad_laws(t.as_ref(), &x, bound);
            Ok(json!({"monad": t.name(), "passed": r.passed(), "checks": j(&r.checks)}))
        }
        Command::CheckAxioms { multitensor, max_arity } => {
            let e = multitensor_spec(multitensor)?;
            let r = check_axioms(e.as_ref(), &samples(e.level(), job.seed), *max_arity, bound, job.seed);
            Ok(json!({"multitensor": e.name(), "passed": r.passed(), "checks": j(&r.checks)}))
        }
        Command::CheckPathlike { monad, file } => {
            let t = monad_spec(monad)?;
            if t.level() == 0 {
                return Err(invalid("path-likeness concerns monads on graphs"));
            }
            let x = as_value(read(file)?, t.level())?;
            let (r, _) = check_pathlike(t.as_ref(), &x, bound);
            Ok(json!({"monad": t.name(), "report": j(&r)}))
        }
        Command::CheckCartesian { collection, max_arity } => {
            let c = collection_spec(collection)?;
            if c.reference.level() != 0 {
                return Err(invalid("check-cartesian samples maps of sets; use a collection on sets"));
            }
            let r = check_cartesian(&c, &sample_maps(job.seed), *max_arity, bound);
            Ok(json!({"collection": c.carrier.name(), "passed": r.passed(), "checks": j(&r.checks)}))
        }
        Command::CheckContractible { collection, max_arity } => {
            let c = collection_spec(collection)?;
            let r = contractible_check(&c, *max_arity, bound);
            Ok(j(&r))
        }
        Command::Convert { file, to } => {
            let x = read(file)?;
            Ok(match to {
                Target::Json => formats::to_json(&x),
                Target::Text => json!({"kind": x.kind(), "text": formats::to_text(&x)?}),
                Target::Graph => {
                    let v = match x {
                        Input::Globular(g) => g.to_graph(),
                        Input::Category(c) => c.underlying_graph(),
                        Input::Graph(v) | Input::Set(v) => v,
                        other => return Err(invalid(format!("a {} has no graph form", other.kind()))),
                    };
                    formats::to_json(&Input::Graph(v))
                }
                Target::Presheaf => {
                    let g = match x {
                        Input::Globular(g) => g,
                        Input::Graph(v) => GlobularSet::from_graph(&v),
                        other => return Err(invalid(format!("a {} has no presheaf form", other.kind()))),
                    };
                    presheaf_json(&g)
                }
            })
        }
    }
}

fn presheaf_json(g: &GlobularSet) -> Json {
    let p = g.to_presheaf();
    json!({
        "kind": "presheaf",
        "base": category_json(&p.base),
        "fibres": p.fibres.iter().map(|(o, xs)| json!([j(o), j(xs)])).collect::<Vec<_>>(),
        "action": p.action.iter().map(|((f, x), y)| json!([j(f), j(x), j(y)])).collect::<Vec<_>>(),
    })
}

fn lift(spec: &str, files: &[PathBuf], bound: usize) -> Result<Json> {
    let e = multitensor_spec(spec)?;
    let inputs: Vec<Input> = files.iter().map(|f| read(f)).collect::<Result<_>>()?;
    let mut opts = LiftOptions::default();
    let tcross = spec.strip_prefix("tcross:");
    let (algs, cats) = if let Some(m) = tcross {
        if m != "free-category" {
            return Err(invalid("lift with tcross reads category files and needs tcross:free-category"));
        }
        opts.splitting = Some(t_cross_splitting(free_category_monad()));
        let cats: Vec<FiniteCategory> = inputs
            .into_iter()
            .map(|x| match x {
                Input::Category(c) => Ok(c),
                other => Err(invalid(format!("expected a category, got a {}", other.kind()))),
            })
            .collect::<Result<_>>()?;
        (cats.iter().map(|c| unary_algebra(&category_algebra(c))).collect::<Vec<_>>(), Some(cats))
    } else if spec.starts_with("operad:") {
        let algs = inputs
            .into_iter()
            .map(|x| match x {
                Input::MSet(m) => Ok(mset_algebra(&m.elements, &m.act)),
                Input::Set(v) => Ok(mset_algebra(&v.objects(), &Default::default())),
                other => Err(invalid(format!("expected a monoid-set, got a {}", other.kind()))),
            })
            .collect::<Result<_>>()?;
        (algs, None)
    } else {
        return Err(invalid("lift supports tcross:free-category and operad:… multitensors"));
    };
    let lv = lift_tuple(e.as_ref(), &algs, bound, &opts);
    if !lv.certificate.certified() {
        return Err(Error::BoundExhausted(lv.certificate.detail.clone()));
    }
    let mut out = json!({
        "multitensor": e.name(),
        "arity": lv.arity,
        "path": j(&lv.path),
        "counts": lv.carrier.counts(),
        "certificate": j(&lv.certificate),
    });
    if let Some(cats) = cats {
        let a = lv.algebra();
        let c = algebra_category(&Algebra { carrier: a.carrier, action: Morphism::compose(&a.action, &Morphism::wrap()) })?;
        let expected = cats.iter().skip(1).fold(cats.first().cloned().unwrap_or_else(unit_category), |acc, d| acc.product(d));
        out["category"] = category_json(&c);
        out["isomorphic_to_product"] = json!(categories_isomorphic(&c, &expected));
    } else {
        let s = lv.summary();
        out["elements"] = j(&s.carrier);
        out["action"] = j(&s.action);
    }
    Ok(out)
}

/// A free-category algebra as an algebra for the unary part of `T^×`,
/// whose cells are one-element tuples of paths.
pub fn unary_algebra(a: &Algebra) -> Algebra {
    Algebra { carrier: a.carrier.clone(), action: Morphism::compose(&a.action, &Morphism::unwrap()) }
}

/// The terminal category, the empty product.
fn unit_category() -> FiniteCategory {
    let mut c = FiniteCategory::empty();
    let (o, i) = (atom("*"), atom("id_*"));
    c.objects.push(o.clone());
    c.arrows.push(crate::base_kernel::Arrow { id: i.clone(), source: o.clone(), target: o.clone() });
    c.identities.insert(o, i.clone());
    c.compose.insert((i.clone(), i.clone()), i);
    c
}

fn coequalise(file: &Path, bound: usize) -> Result<Json> {
    let p = match read(file)? {
        Input::Presentation(p) => p,
        other => return Err(invalid(format!("expected a presentation, got a {}", other.kind()))),
    };
    let pair = presentation_pair(&p.generators, &p.relations);
    let c = algebra_coequaliser(&pair, None, bound)?.require_certified()?;
    let fast = fast_path_coequaliser(&pair, bound);
    let show = |t: &Term| {
        let s = crate::enriched_graph::components(t).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        if s.is_empty() {
            "ε".to_string()
        } else {
            s
        }
    };
    let mut mul = Vec::new();
    for a in &c.carrier {
        for b in &c.carrier {
            let w = crate::term::seq(vec![a.clone(), b.clone()]);
            if let Some(r) = c.action.get(&w) {
                mul.push(json!([show(a), show(b), show(r)]));
            }
        }
    }
    Ok(json!({
        "generators": p.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "size": c.len(),
        "elements": c.carrier.iter().map(show).collect::<Vec<_>>(),
        "multiplication": mul,
        "certificate": j(&c.certificate),
        "fast_path": fast.as_ref().map(|f| f.carrier == c.carrier && f.quotient == c.quotient),
    }))
}

// ---------------------------------------------------------------------------
// Output

/// Wraps a result in the output envelope.
pub fn envelope(job: &Job, result: Json) -> Json {
    json!({"command": job.command.name(), "bound": job.bound, "seed": job.seed, "result": result})
}

/// Plain-text rendering: one `path: value` line per scalar leaf, with
/// dedicated layouts for cell lists, verdicts and converted files.
pub fn render_text(job: &Job, result: &Json) -> String {
    match &job.command {
        Command::Convert { to: Target::Text, .. } => return result["text"].as_str().unwrap_or_default().to_string(),
        Command::FreeNcat { .. } => {
            let mut s = format!("counts: {}\ntruncated: {}\n", result["counts"], result["truncated"]);
            for c in result["cells"].as_array().into_iter().flatten() {
                let cell = term_text(&c["display"]);
                match (&c["source"], &c["target"]) {
                    (Json::Null, _) => s += &format!("{} {cell}\n", c["dimension"]),
                    _ => s += &format!("{} {cell} : {} -> {}\n", c["dimension"], term_text(&c["source_display"]), term_text(&c["target_display"])),
                }
            }
            return s;
        }
        Command::CheckContractible { .. } => {
            let mut s = format!("{}\n", result["verdict"].as_str().unwrap_or_default());
            for e in result["entries"].as_array().into_iter().flatten() {
                s += &format!("arity {}: {}\n", e["arity"], e["verdict"].as_str().unwrap_or_default());
            }
            return s;
        }
        Command::Coequalise { .. } => {
            let c = &result["certificate"];
            let mut s = format!("size: {}\nelements: {}\n", result["size"], words_text(&result["elements"]));
            for m in result["multiplication"].as_array().into_iter().flatten() {
                s += &format!("{} * {} = {}\n", term_text(&m[0]), term_text(&m[1]), term_text(&m[2]));
            }
            s += &format!("certificate: {} at stage {} ({})\n", term_text(&c["kind"]), c["stage"], term_text(&c["detail"]));
            return s;
        }
        _ => {}
    }
    if let Some(checks) = result.get("checks").and_then(Json::as_array) {
        let mut s = String::new();
        for (k, v) in result.as_object().into_iter().flatten().filter(|(k, _)| *k != "checks") {
            s += &format!("{k}: {}\n", term_text(v));
        }
        let failed: Vec<&Json> = checks.iter().filter(|c| c["passed"] == json!(false)).collect();
        s += &format!("checks: {} run, {} failed\n", checks.len(), failed.len());
        for c in failed {
            s += &format!("FAIL {} [{}]: {}\n", term_text(&c["axiom"]), term_text(&c["instance"]), term_text(&c["witness"]));
        }
        return s;
    }
    let mut lines = Vec::new();
    flatten("", result, &mut lines);
    lines.join("\n") + "\n"
}

fn words_text(j: &Json) -> String {
    j.as_array().into_iter().flatten().map(term_text).collect::<Vec<_>>().join(", ")
}

fn term_text(j: &Json) -> String {
    match j {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, j: &Json, out: &mut Vec<String>) {
    match j {
        Json::Object(m) => {
            for (k, v) in m {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, v, out);
            }
        }
        Json::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, v) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push(format!("{prefix}: {}", term_text(other))),
    }
}

pub fn error_json(e: &Error) -> Json {
    let kind = match e {
        Error::Invalid(_) => "invalid",
        Error::Parse { .. } => "parse",
        Error::BoundExhausted(_) => "bound-exhausted",
        Error::Io(_) => "io",
    };
    let mut j = json!({"error": kind, "message": e.to_string()});
    if let Error::Parse { line, column, .. } = e {
        j["line"] = json!(line);
        j["column"] = json!(column);
    }
    j
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BoundExhausted(_) => 2,
        _ => 1,
    }
}

/// Runs a job end to end and returns `(exit code, stdout, stderr)`.
pub fn run_job(job: &Job) -> (i32, String, String) {
    let result = execute(job).and_then(|r| {
        let text = match job.format {
            Format::Json => serde_json::to_string_pretty(&envelope(job, r)).expect("serialisable") + "\n",
            Format::Text => render_text(job, &r),
        };
        match &job.out {
            Some(p) => {
                std::fs::write(p, &text)?;
                Ok(String::new())
            }
            None => Ok(text),
        }
    });
    match result {
        Ok(s) => (0, s, String::new()),
        Err(e) => (exit_code(&e), String::new(), serde_json::to_string(&error_json(&e)).unwrap() + "\n"),
    }
}

/// Parses arguments and runs; usage errors exit 1 with an error object,
/// `--help` and `--version` exit 0.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_job(&cli.into()),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => (0, e.to_string(), String::new()),
            _ => {
                let j = json!({"error": "usage", "message": e.to_string().trim_end()});
                (1, String::new(), serde_json::to_string(&j).unwrap() + "\n")
            }
        },
    }
}
