//! Multitensors as executable data: n-ary operations on base values with
//! unit and substitution, E-categories, lax monoidal functors, composition
//! of one-cells in Dist, and the bar construction from monads over Set.

use crate::enriched_graph::{components, sequence_graph, subsequence_inclusion, tuples, Morphism, Value};
use crate::graph_monad::Monad;
use crate::operad::Operad;
use crate::term::{int, op, seq, Term};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// A family of n-ary functors on level-`level` values. `bound` truncates
/// infinite results (it is forwarded to any monad used inside).
pub trait OneCell: Send + Sync {
    fn name(&self) -> String;
    fn level(&self) -> usize;
    fn apply(&self, args: &[Value], bound: usize) -> Value;
    fn fmap(&self, fs: &[Morphism]) -> Morphism;
}

/// A one-cell with unit `u: Z → E₁Z` and substitution
/// `σ: E_k(E_{n_1}(…), …, E_{n_k}(…)) → E_{Σn}(…)` for the given shape.
pub trait Multitensor: OneCell {
    fn unit(&self) -> Morphism;
    fn subst(&self, shape: &[usize]) -> Morphism;
}

pub type Mt = Arc<dyn Multitensor>;

/// Cartesian product: `u` wraps, `σ` flattens.
#[derive(Clone, Copy, Debug)]
pub struct Product {
    pub level: usize,
}

impl OneCell for Product {
    fn name(&self) -> String {
        format!("product[{}]", self.level)
    }
    fn level(&self) -> usize {
        self.level
    }
    fn apply(&self, args: &[Value], _bound: usize) -> Value {
        Value::product(self.level, args)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        Morphism::product(fs.to_vec())
    }
}

impl Multitensor for Product {
    fn unit(&self) -> Morphism {
        Morphism::wrap()
    }
    fn subst(&self, _shape: &[usize]) -> Morphism {
        Morphism::flatten()
    }
}

/// `p(x_1, …, x_n) ↦ p(f_1 x_1, …, f_n x_n)` at every level.
pub fn op_tuple(fs: Vec<Morphism>) -> Morphism {
    if fs.iter().all(|f| f.is_id()) {
        return Morphism::Id;
    }
    let fs = Arc::new(fs);
    let f2 = fs.clone();
    Morphism::new(
        move |t| match t {
            Term::Op(p, xs) => op((**p).clone(), xs.iter().zip(fs.iter()).map(|(x, f)| f.obj(x)).collect()),
            other => panic!("expected an operation cell, got {other}"),
        },
        move |a, b| match (a, b) {
            (Term::Op(_, xs), Term::Op(_, ys)) => {
                op_tuple(f2.iter().enumerate().map(|(i, f)| f.hom(&xs[i], &ys[i])).collect())
            }
            _ => panic!("expected operation cells"),
        },
    )
}

/// `(X_1, …, X_n) ↦ E_n · (X_1 × … × X_n)` for a Set-operad, with cells
/// `p(x_1, …, x_n)`.
#[derive(Clone)]
pub struct OperadMultitensor {
    pub operad: Arc<dyn Operad>,
    pub level: usize,
}

impl OneCell for OperadMultitensor {
    fn name(&self) -> String {
        format!("operad[{}]", self.operad.name())
    }
    fn level(&self) -> usize {
        self.level
    }
    fn apply(&self, args: &[Value], _bound: usize) -> Value {
        let prod = Value::product(self.level, args);
        let parts: Vec<Value> = self
            .operad
            .ops(args.len())
            .into_iter()
            .map(|p| Morphism::uniform(move |t| op(p.clone(), components(t).to_vec())).image(&prod))
            .collect();
        Value::union(self.level, &parts)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        op_tuple(fs.to_vec())
    }
}

impl Multitensor for OperadMultitensor {
    fn unit(&self) -> Morphism {
        let e = self.operad.unit();
        Morphism::uniform(move |t| op(e.clone(), vec![t.clone()]))
    }
    fn subst(&self, _shape: &[usize]) -> Morphism {
        let o = self.operad.clone();
        Morphism::uniform(move |t| match t {
            Term::Op(q, inner) => {
                let mut ps = Vec::with_capacity(inner.len());
                let mut xs = Vec::new();
                for c in inner.iter() {
                    match c {
                        Term::Op(p, ys) => {
                            ps.push((**p).clone());
                            xs.extend(ys.iter().cloned());
                        }
                        other => panic!("expected an operation cell, got {other}"),
                    }
                }
                op(o.compose(q, &ps), xs)
            }
            other => panic!("expected an operation cell, got {other}"),
        })
    }
}

/// Opmonoidal coherence `T E_n → E_n T` for each arity.
pub type Coherence = Arc<dyn Fn(usize) -> Morphism + Send + Sync>;

/// `ET_n(X) = E_n(TX_1, …, TX_n)` with unit `u∘η` and substitution
/// `E_N(μ) ∘ σ ∘ E_k(τ)` for an opmonoidal `τ: T E_n → E_n T`.
#[derive(Clone)]
pub struct ET {
    pub e: Mt,
    pub t: Arc<dyn Monad>,
    pub tau: Coherence,
}

impl OneCell for ET {
    fn name(&self) -> String {
        format!("ET[{}, {}]", self.e.name(), self.t.name())
    }
    fn level(&self) -> usize {
        self.e.level()
    }
    fn apply(&self, args: &[Value], bound: usize) -> Value {
        let ts: Vec<Value> = args.iter().map(|x| self.t.apply(x, bound)).collect();
        self.e.apply(&ts, bound)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        self.e.fmap(&fs.iter().map(|f| self.t.fmap(f)).collect::<Vec<_>>())
    }
}

impl Multitensor for ET {
    fn unit(&self) -> Morphism {
        Morphism::compose(&self.e.unit(), &self.t.eta())
    }
    fn subst(&self, shape: &[usize]) -> Morphism {
        let n: usize = shape.iter().sum();
        let taus: Vec<Morphism> = shape.iter().map(|&m| (self.tau)(m)).collect();
        Morphism::chain(&[
            self.e.fmap(&taus),
            self.e.subst(shape),
            self.e.fmap(&vec![self.t.mu(); n]),
        ])
    }
}

/// Monoidal coherence `E_k T → T E_k`.
/// `TE_n(X) = T E_n(X)` with unit `η∘u` and substitution `T(σ)∘μ∘T(τ)`.
#[derive(Clone)]
pub struct TE {
    pub e: Mt,
    pub t: Arc<dyn Monad>,
    pub tau: Coherence,
}

impl OneCell for TE {
    fn name(&self) -> String {
        format!("TE[{}, {}]", self.t.name(), self.e.name())
    }
    fn level(&self) -> usize {
        self.e.level()
    }
    fn apply(&self, args: &[Value], bound: usize) -> Value {
        self.t.apply(&self.e.apply(args, bound), bound)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        self.t.fmap(&self.e.fmap(fs))
    }
}

impl Multitensor for TE {
    fn unit(&self) -> Morphism {
        Morphism::compose(&self.t.eta(), &self.e.unit())
    }
    fn subst(&self, shape: &[usize]) -> Morphism {
        Morphism::chain(&[
            self.t.fmap(&(self.tau)(shape.len())),
            self.t.mu(),
            self.t.fmap(&self.e.subst(shape)),
        ])
    }
}

/// The obstruction `T(∏X_j) → ∏ T(X_j)` with components `T(π_j)`.
pub fn product_obstruction(t: Arc<dyn Monad>) -> Coherence {
    Arc::new(move |n| Morphism::fanout((0..n).map(|j| t.fmap(&Morphism::proj(j))).collect()))
}

/// `T^×(X_1, …, X_n) = ∏ T(X_i)`.
pub fn t_cross(t: Arc<dyn Monad>) -> ET {
    let level = t.level();
    ET { e: Arc::new(Product { level }), t: t.clone(), tau: product_obstruction(t) }
}

/// The unit one-cell of Dist: identity in arity one, initial elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct UnitCell {
    pub level: usize,
}

impl OneCell for UnitCell {
    fn name(&self) -> String {
        "unit".into()
    }
    fn level(&self) -> usize {
        self.level
    }
    fn apply(&self, args: &[Value], _bound: usize) -> Value {
        if args.len() == 1 {
            args[0].clone()
        } else {
            Value::initial(self.level)
        }
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        if fs.len() == 1 {
            fs[0].clone()
        } else {
            Morphism::Id
        }
    }
}

/// Compositions of `n` into `k` blocks, empty blocks allowed.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `(E∘F)(X_1..X_n) = ∐_{n_1+…+n_k=n} E_k(F_{n_1}(…), …, F_{n_k}(…))`,
/// summands tagged `shape(x)` with `shape` the block sizes. The number of
/// blocks is capped at `bound` since empty blocks make the sum infinite.
#[derive(Clone)]
pub struct DistComposite {
    pub e: Arc<dyn OneCell>,
    pub f: Arc<dyn OneCell>,
}

impl DistComposite {
    pub fn new(e: Arc<dyn OneCell>, f: Arc<dyn OneCell>) -> Result<DistComposite> {
        if e.level() != f.level() {
            return Err(Error::Invalid(format!("cannot compose {} with {}: base mismatch", e.name(), f.name())));
        }
        Ok(DistComposite { e, f })
    }

    fn shape_tag(shape: &[usize]) -> Term {
        seq(shape.iter().map(|&n| int(n as i64)).collect())
    }

    pub fn summand(&self, args: &[Value], shape: &[usize], bound: usize) -> Value {
        let mut inner = Vec::new();
        let mut at = 0;
        for &m in shape {
            inner.push(self.f.apply(&args[at..at + m], bound));
            at += m;
        }
        let tag = Self::shape_tag(shape);
        Morphism::uniform(move |t| op(tag.clone(), vec![t.clone()])).image(&self.e.apply(&inner, bound))
    }
}

impl OneCell for DistComposite {
    fn name(&self) -> String {
        format!("{}∘{}", self.e.name(), self.f.name())
    }
    fn level(&self) -> usize {
        self.e.level()
    }
    fn apply(&self, args: &[Value], bound: usize) -> Value {
        let n = args.len();
        let parts: Vec<Value> = (0..=bound.max(n))
            .flat_map(|k| compositions(n, k))
            .map(|shape| self.summand(args, &shape, bound))
            .collect();
        Value::union(self.level(), &parts)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        let (e, f, fs) = (self.e.clone(), self.f.clone(), fs.to_vec());
        let per = move |t: &Term| -> Morphism {
            let Term::Op(tag, _) = t else { panic!("expected a tagged summand, got {t}") };
            let shape: Vec<usize> = components(tag).iter().map(|x| x.as_int().unwrap() as usize).collect();
            let mut inner = Vec::new();
            let mut at = 0;
            for &m in &shape {
                inner.push(f.fmap(&fs[at..at + m]));
                at += m;
            }
            op_tuple(vec![e.fmap(&inner)])
        };
        Morphism::by_source(per)
    }
}

/// The bar construction `T̄_n(Z) = T(Z_1, …, Z_n)(0, n)` of a monad over
/// Set, with unit the `(0,1)` hom of `η` and substitution
/// `μ_{0,N} ∘ T(τ̃)_{0,k}` where `τ̃` re-embeds each block.
#[derive(Clone)]
pub struct Bar {
    pub t: Arc<dyn Monad>,
}

impl Bar {
    pub fn new(t: Arc<dyn Monad>) -> Result<Bar> {
        if t.level() == 0 {
            return Err(Error::Invalid(format!("{} acts on sets, not on enriched graphs", t.name())));
        }
        Ok(Bar { t })
    }

    /// The map of sequence graphs sending object `i` to `s_i` and block `i`
    /// into the concatenated sequence graph.
    fn reembed(&self, shape: &[usize]) -> Morphism {
        let mut starts = vec![0usize];
        for &m in shape {
            starts.push(starts.last().unwrap() + m);
        }
        let t = self.t.clone();
        let shape = shape.to_vec();
        let s2 = starts.clone();
        Morphism::new(
            move |o| int(starts[o.as_int().expect("sequence object") as usize] as i64),
            move |a, b| {
                let (a, b) = (a.as_int().unwrap() as usize, b.as_int().unwrap() as usize);
                if b == a + 1 {
                    t.fmap(&subsequence_inclusion(s2[a])).hom(&int(0), &int(shape[a] as i64))
                } else {
                    Morphism::Id
                }
            },
        )
    }
}

impl OneCell for Bar {
    fn name(&self) -> String {
        format!("bar[{}]", self.t.name())
    }
    fn level(&self) -> usize {
        self.t.level() - 1
    }
    fn apply(&self, args: &[Value], bound: usize) -> Value {
        let sg = sequence_graph(self.level(), args);
        self.t.apply(&sg.graph, bound).hom(&sg.start, &sg.end)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        let fs = Arc::new(fs.to_vec());
        let n = fs.len();
        let seqmap = Morphism::object_fixing(move |a, b| {
            let (a, b) = (a.as_int().unwrap() as usize, b.as_int().unwrap() as usize);
            if b == a + 1 {
                fs[a].clone()
            } else {
                Morphism::Id
            }
        });
        self.t.fmap(&seqmap).hom(&int(0), &int(n as i64))
    }
}

impl Multitensor for Bar {
    fn unit(&self) -> Morphism {
        self.t.eta().hom(&int(0), &int(1))
    }
    fn subst(&self, shape: &[usize]) -> Morphism {
        let total: usize = shape.iter().sum();
        let k = shape.len();
        Morphism::compose(
            &self.t.mu().hom(&int(0), &int(total as i64)),
            &self.t.fmap(&self.reembed(shape)).hom(&int(0), &int(k as i64)),
        )
    }
}

/// Result of one axiom instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub instance: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn push(&mut self, axiom: &str, instance: String, witness: Option<String>) {
        self.checks.push(AxiomCheck { axiom: axiom.into(), passed: witness.is_none(), instance, witness });
    }

    pub fn extend(&mut self, other: AxiomReport) {
        self.checks.extend(other.checks);
    }
}

/// First cell of `dom` where `f` and `g` disagree, rendered for reports.
pub fn disagreement(f: &Morphism, g: &Morphism, dom: &Value) -> Option<String> {
    dom.cells().into_iter().find_map(|a| {
        let (x, y) = (f.map_address(&a), g.map_address(&a));
        (x != y).then(|| format!("{} ↦ {} vs {}", show(&a), show(&x), show(&y)))
    })
}

pub fn show(addr: &[Term]) -> String {
    addr.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

fn shape_label(args: &[Value]) -> String {
    let sizes: Vec<String> = args.iter().map(|a| a.size().to_string()).collect();
    format!("sizes ({})", sizes.join(","))
}

/// Applies a multitensor along a nesting shape `[[n_ij]]`: returns
/// `E_k(E_{m_1}(E_{n_11}(X..), ..), ..)` and the flat argument list used.
fn nested3(e: &dyn Multitensor, shape: &[Vec<usize>], args: &[Value], bound: usize) -> Value {
    let mut at = 0;
    let mut mid = Vec::new();
    for block in shape {
        let mut inner = Vec::new();
        for &n in block {
            inner.push(e.apply(&args[at..at + n], bound));
            at += n;
        }
        mid.push(e.apply(&inner, bound));
    }
    e.apply(&mid, bound)
}

/// Checks the unit and associativity axioms of `e` on tuples drawn from
/// `samples`: all tuples up to `max_arity` for the unit laws, and shapes
/// of depth three with total arity at most `max_arity` for associativity.
/// Arguments for associativity are drawn with a seeded generator.
pub fn check_axioms(e: &dyn Multitensor, samples: &[Value], max_arity: usize, bound: usize, seed: u64) -> AxiomReport {
    let mut report = AxiomReport::default();
    if samples.is_empty() {
        return report;
    }
    let idx: Vec<Term> = (0..samples.len()).map(|i| int(i as i64)).collect();
    for n in 0..=max_arity {
        for pick in tuples(&vec![idx.clone(); n]) {
            let args: Vec<Value> = pick.iter().map(|i| samples[i.as_int().unwrap() as usize].clone()).collect();
            let en = e.apply(&args, bound);
            // σ∘u_{E_n} = 1
            let left = Morphism::compose(&e.subst(&[n]), &e.unit());
            report.push("left unit", shape_label(&args), disagreement(&left, &Morphism::Id, &en));
            // σ∘E_n(u, …, u) = 1
            let right = Morphism::compose(&e.subst(&vec![1; n]), &e.fmap(&vec![e.unit(); n]));
            report.push("right unit", shape_label(&args), disagreement(&right, &Morphism::Id, &en));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for shape in assoc_shapes(max_arity) {
        let total: usize = shape.iter().flatten().sum();
        let args: Vec<Value> = (0..total).map(|_| samples.choose(&mut rng).unwrap().clone()).collect();
        let dom = nested3(e, &shape, &args, bound);
        let mids: Vec<usize> = shape.iter().map(|b| b.len()).collect();
        let outer: Vec<usize> = shape.iter().map(|b| b.iter().sum()).collect();
        let flat: Vec<usize> = shape.iter().flatten().copied().collect();
        let inner_first = Morphism::compose(
            &e.subst(&outer),
            &e.fmap(&shape.iter().map(|b| e.subst(b)).collect::<Vec<_>>()),
        );
        let outer_first = Morphism::compose(&e.subst(&flat), &e.subst(&mids));
        report.push(
            "associativity",
            format!("shape {shape:?}, {}", shape_label(&args)),
            disagreement(&inner_first, &outer_first, &dom),
        );
    }
    report
}

/// Nesting shapes `[[n_ij]]` with at most two blocks of at most two entries
/// and total arity at most `max_arity`.
pub fn assoc_shapes(max_arity: usize) -> Vec<Vec<Vec<usize>>> {
    let mut blocks: Vec<Vec<usize>> = vec![vec![]];
    for len in 1..=2 {
        for b in tuples(&vec![(0..=2).map(int).collect(); len]) {
            blocks.push(b.iter().map(|t| t.as_int().unwrap() as usize).collect());
        }
    }
    let mut out = Vec::new();
    for k in 0..=2 {
        let choice: Vec<Term> = (0..blocks.len()).map(|i| int(i as i64)).collect();
        for pick in tuples(&vec![choice; k]) {
            let shape: Vec<Vec<usize>> = pick.iter().map(|i| blocks[i.as_int().unwrap() as usize].clone()).collect();
            if shape.iter().flatten().sum::<usize>() <= max_arity {
                out.push(shape);
            }
        }
    }
    out
}

/// Checks that `E_n` preserves binary coproducts in each variable: the
/// comparison `E(…, A, …) + E(…, B, …) → E(…, A+B, …)` is a bijection on
/// cells, for every position and tuple drawn from `samples`.
pub fn check_distributive(e: &dyn Multitensor, samples: &[Value], max_arity: usize, bound: usize) -> AxiomReport {
    let mut report = AxiomReport::default();
    let idx: Vec<Term> = (0..samples.len()).map(|i| int(i as i64)).collect();
    for n in 1..=max_arity {
        for pick in tuples(&vec![idx.clone(); n + 1]) {
            let vals: Vec<Value> = pick.iter().map(|i| samples[i.as_int().unwrap() as usize].clone()).collect();
            let (a, b) = (&vals[0], &vals[1]);
            let (sum, _) = Value::coproduct(e.level(), &[a.clone(), b.clone()]);
            for pos in 0..n {
                let rest = &vals[2..];
                let build = |x: &Value| -> Vec<Value> {
                    let mut args: Vec<Value> = rest.iter().take(n - 1).cloned().collect();
                    while args.len() < n - 1 {
                        args.push(samples[0].clone());
                    }
                    args.insert(pos, x.clone());
                    args
                };
                let whole = e.apply(&build(&sum), bound);
                let mut seen: BTreeSet<Vec<Term>> = BTreeSet::new();
                let mut witness = None;
                for (i, part) in [a, b].into_iter().enumerate() {
                    let mut fs = vec![Morphism::Id; n];
                    fs[pos] = Morphism::injection(i);
                    let inj = e.fmap(&fs);
                    for c in e.apply(&build(part), bound).cells() {
                        let img = inj.map_address(&c);
                        if !whole.contains(&img) {
                            witness.get_or_insert(format!("{} leaves the sum", show(&img)));
                        } else if !seen.insert(img.clone()) {
                            witness.get_or_insert(format!("{} is hit twice", show(&img)));
                        }
                    }
                }
                if witness.is_none() {
                    if let Some(c) = whole.cells().into_iter().find(|c| !seen.contains(c)) {
                        witness = Some(format!("{} is not hit", show(&c)));
                    }
                }
                report.push("distributivity", format!("arity {n}, position {pos}"), witness);
            }
        }
    }
    report
}

/// Composition of an E-category: `kappa(xs)` maps `E_n(X(x0,x1), …)` into
/// `X(x0, xn)`.
#[derive(Clone)]
pub struct ECategory {
    pub graph: Value,
    pub kappa: Arc<dyn Fn(&[Term]) -> Morphism + Send + Sync>,
}

/// All object sequences of length `1..=max_len + 1` in a graph.
pub fn object_sequences(x: &Value, max_len: usize) -> Vec<Vec<Term>> {
    let objs = x.objects();
    let mut out = Vec::new();
    for n in 0..=max_len {
        out.extend(tuples(&vec![objs.clone(); n + 1]));
    }
    out
}

/// Checks `κ∘u = 1` on every hom and `κ∘σ = κ∘E_k(κ, …, κ)` on every
/// object sequence split into at most two blocks, for sequences of length
/// at most `max_len`.
pub fn check_ecategory(e: &dyn Multitensor, c: &ECategory, max_len: usize, bound: usize) -> AxiomReport {
    let mut report = AxiomReport::default();
    let homs = |xs: &[Term]| -> Vec<Value> { xs.windows(2).map(|w| c.graph.hom(&w[0], &w[1])).collect() };
    for xs in object_sequences(&c.graph, 1) {
        if xs.len() != 2 {
            continue;
        }
        let m = Morphism::compose(&(c.kappa)(&xs), &e.unit());
        let dom = c.graph.hom(&xs[0], &xs[1]);
        report.push("unit", show(&xs), disagreement(&m, &Morphism::Id, &dom));
    }
    for xs in object_sequences(&c.graph, max_len) {
        let n = xs.len() - 1;
        // split points: blocks [0..i], [i..n] as object index ranges
        for k in 1..=2usize {
            let cuts: Vec<Vec<usize>> = if k == 1 { vec![vec![0, n]] } else { (0..=n).map(|i| vec![0, i, n]).collect() };
            for cut in cuts {
                let shape: Vec<usize> = cut.windows(2).map(|w| w[1] - w[0]).collect();
                let inner: Vec<Value> = cut.windows(2).map(|w| e.apply(&homs(&xs[w[0]..=w[1]]), bound)).collect();
                let dom = e.apply(&inner, bound);
                let ends: Vec<Term> = cut.iter().map(|&i| xs[i].clone()).collect();
                let lhs = Morphism::compose(&(c.kappa)(&xs), &e.subst(&shape));
                let kappas: Vec<Morphism> = cut.windows(2).map(|w| (c.kappa)(&xs[w[0]..=w[1]])).collect();
                let rhs = Morphism::compose(&(c.kappa)(&ends), &e.fmap(&kappas));
                report.push("associativity", format!("{} split {:?}", show(&xs), shape), disagreement(&lhs, &rhs, &dom));
            }
        }
    }
    report
}

/// A functor between bases given on values and morphisms.
pub trait Functor: Send + Sync {
    fn apply(&self, x: &Value) -> Value;
    fn fmap(&self, f: &Morphism) -> Morphism;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityFunctor;

impl Functor for IdentityFunctor {
    fn apply(&self, x: &Value) -> Value {
        x.clone()
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        f.clone()
    }
}

/// A lax monoidal functor `(H, ψ): (W, F) → (V, E)` with coherence
/// `ψ_n: F_n(HX_1, …, HX_n) → H E_n(X_1, …, X_n)`.
#[derive(Clone)]
pub struct LaxMonoidalFunctor {
    pub from: Mt,
    pub to: Mt,
    pub h: Arc<dyn Functor>,
    pub psi: Coherence,
}

impl LaxMonoidalFunctor {
    /// Identity coherence on a multitensor.
    pub fn identity(e: Mt) -> LaxMonoidalFunctor {
        LaxMonoidalFunctor { from: e.clone(), to: e, h: Arc::new(IdentityFunctor), psi: Arc::new(|_| Morphism::Id) }
    }

    /// Checks `ψ∘u = H(u)` and `ψ∘σ = H(σ)∘ψ∘F_k(ψ, …, ψ)` on tuples drawn
    /// from `samples`.
    pub fn check(&self, samples: &[Value], max_arity: usize, bound: usize) -> AxiomReport {
        let mut report = AxiomReport::default();
        let h = &self.h;
        for x in samples {
            let lhs = Morphism::compose(&(self.psi)(1), &self.from.unit());
            let rhs = h.fmap(&self.to.unit());
            report.push("unit", format!("size {}", x.size()), disagreement(&lhs, &rhs, &h.apply(x)));
        }
        for shape in assoc_shapes(max_arity).into_iter().filter(|s| !s.is_empty()) {
            let shape: Vec<usize> = shape.iter().map(|b| b.iter().sum()).collect();
            let total: usize = shape.iter().sum();
            let args: Vec<Value> = (0..total).map(|i| samples[i % samples.len()].clone()).collect();
            let mut at = 0;
            let mut inner = Vec::new();
            for &m in &shape {
                let hs: Vec<Value> = args[at..at + m].iter().map(|x| h.apply(x)).collect();
                inner.push(self.from.apply(&hs, bound));
                at += m;
            }
            let dom = self.from.apply(&inner, bound);
            let lhs = Morphism::compose(&(self.psi)(total), &self.from.subst(&shape));
            let psis: Vec<Morphism> = shape.iter().map(|&m| (self.psi)(m)).collect();
            let rhs = Morphism::chain(&[self.from.fmap(&psis), (self.psi)(shape.len()), h.fmap(&self.to.subst(&shape))]);
            report.push("substitution", format!("shape {shape:?}"), disagreement(&lhs, &rhs, &dom));
        }
        report
    }
}

/// `ε: E → ∏` for an operad multitensor: forgets the operation label.
pub fn forget_labels(e: Mt) -> LaxMonoidalFunctor {
    let level = e.level();
    LaxMonoidalFunctor {
        from: e,
        to: Arc::new(Product { level }),
        h: Arc::new(IdentityFunctor),
        psi: Arc::new(|_| {
            Morphism::uniform(|t| match t {
                Term::Op(_, xs) => seq(xs.to_vec()),
                other => panic!("expected an operation cell, got {other}"),
            })
        }),
    }
}

/// The small finite sets `{}`, `{a}`, `{a, b}` used as sampling defaults.
pub fn small_sets() -> Vec<Value> {
    vec![
        Value::set([]),
        Value::set([crate::term::atom("a")]),
        Value::set([crate::term::atom("a"), crate::term::atom("b")]),
    ]
}

/// Sizes of the summands of a Dist composite, keyed by block shape.
pub fn summand_sizes(c: &DistComposite, args: &[Value], bound: usize) -> BTreeMap<Vec<usize>, usize> {
    let n = args.len();
    (0..=bound.max(n))
        .flat_map(|k| compositions(n, k))
        .map(|shape| {
            let s = c.summand(args, &shape, bound).size();
            (shape, s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::atom;

    fn set(n: usize) -> Value {
        Value::set((0..n).map(|i| atom(&format!("x{i}"))))
    }

    #[test]
    fn product_of_sets_and_axioms() {
        let p = Product { level: 0 };
        assert_eq!(p.apply(&[set(2), set(3)], 0).size(), 6);
        assert_eq!(p.apply(&[], 0).size(), 1);
        let r = check_axioms(&p, &small_sets(), 3, 0, 7);
        assert!(r.passed(), "{:?}", r.failures());
        assert!(check_distributive(&p, &small_sets(), 2, 0).passed());
    }

    #[test]
    fn unit_one_cell_composite_is_the_multitensor() {
        let e: Arc<dyn OneCell> = Arc::new(Product { level: 0 });
        let c = DistComposite::new(e.clone(), Arc::new(UnitCell { level: 0 })).unwrap();
        let args = [set(2), set(2), set(1)];
        let sizes = summand_sizes(&c, &args, 3);
        let nonzero: Vec<_> = sizes.iter().filter(|(_, s)| **s > 0).collect();
        assert_eq!(nonzero, vec![(&vec![1, 1, 1], &4)]);
        assert_eq!(c.apply(&args, 3).size(), e.apply(&args, 3).size());
    }

    #[test]
    fn nullary_composite_has_one_summand_per_block_count() {
        let p: Arc<dyn OneCell> = Arc::new(Product { level: 0 });
        let c = DistComposite::new(p.clone(), p).unwrap();
        let sizes = summand_sizes(&c, &[], 3);
        // compositions of 0: one per k, each E_k(F_0, …, F_0) = 1
        let oracle: BTreeMap<Vec<usize>, usize> = (0..=3).map(|k| (vec![0; k], 1)).collect();
        assert_eq!(sizes, oracle);
    }

    #[test]
    fn product_composite_on_two_sets() {
        let p: Arc<dyn OneCell> = Arc::new(Product { level: 0 });
        let c = DistComposite::new(p.clone(), p).unwrap();
        let sizes = summand_sizes(&c, &[set(2), set(3)], 2);
        let nonempty_blocks: Vec<_> = sizes.iter().filter(|(s, _)| s.iter().all(|&m| m > 0)).collect();
        assert_eq!(nonempty_blocks, vec![(&vec![1, 1], &6), (&vec![2], &6)]);
    }

    #[test]
    fn corrupted_substitution_fails_associativity() {
        struct Swapped(Product);
        impl OneCell for Swapped {
            fn name(&self) -> String {
                "swapped".into()
            }
            fn level(&self) -> usize {
                0
            }
            fn apply(&self, args: &[Value], b: usize) -> Value {
                self.0.apply(args, b)
            }
            fn fmap(&self, fs: &[Morphism]) -> Morphism {
                self.0.fmap(fs)
            }
        }
        impl Multitensor for Swapped {
            fn unit(&self) -> Morphism {
                Morphism::wrap()
            }
            fn subst(&self, _: &[usize]) -> Morphism {
                Morphism::uniform(|t| {
                    let mut xs: Vec<Term> = components(t).iter().flat_map(|x| components(x).to_vec()).collect();
                    if components(t).len() == 2 {
                        xs.reverse();
                    }
                    seq(xs)
                })
            }
        }
        let r = check_axioms(&Swapped(Product { level: 0 }), &small_sets(), 3, 0, 1);
        assert!(r.failures().iter().any(|f| f.axiom == "associativity"));
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(0, 0), vec![Vec::<usize>::new()]);
        assert!(compositions(1, 0).is_empty());
    }
}
