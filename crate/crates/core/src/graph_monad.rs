//! Monads on enriched graphs (and on finite sets) as bounded cell
//! enumerators: the Γ construction, the strict n-category tower,
//! path-likeness, the counit `ΓT̄ → T`, the algebra / enriched-category
//! translation, Γ on lax monoidal functors, and distributive laws.

use crate::base_kernel::{address_table_morphism, FiniteCategory};
use crate::enriched_graph::{components, fiber_map, tuples, Graph, Morphism, Value};
use crate::multitensor::{
    disagreement, show, t_cross, AxiomReport, Bar, ECategory, Functor, LaxMonoidalFunctor, Mt, Product,
};
use crate::operad::FiniteMonoid;
use crate::term::{atom, cell, int, seq, Term};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

/// A monad on level-`level` values. Components are uniform morphisms; on
/// graphs they fix objects. `bound` truncates infinite values by rank (for
/// graph monads) or by term size (for monads on sets).
pub trait Monad: Send + Sync {
    fn name(&self) -> String;
    fn level(&self) -> usize;
    fn apply(&self, x: &Value, bound: usize) -> Value;
    fn fmap(&self, f: &Morphism) -> Morphism;
    fn eta(&self) -> Morphism;
    fn mu(&self) -> Morphism;
}

pub type Mn = Arc<dyn Monad>;

#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub level: usize,
}

impl Monad for Identity {
    fn name(&self) -> String {
        "id".into()
    }
    fn level(&self) -> usize {
        self.level
    }
    fn apply(&self, x: &Value, _bound: usize) -> Value {
        x.clone()
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        f.clone()
    }
    fn eta(&self) -> Morphism {
        Morphism::Id
    }
    fn mu(&self) -> Morphism {
        Morphism::Id
    }
}

/// `TX(a, b) = {*}` for all objects: not path-like.
#[derive(Clone, Copy, Debug)]
pub struct TerminalHom;

impl Monad for TerminalHom {
    fn name(&self) -> String {
        "terminal-hom".into()
    }
    fn level(&self) -> usize {
        1
    }
    fn apply(&self, x: &Value, _bound: usize) -> Value {
        let mut g = Graph::new(1);
        for a in x.objects() {
            for b in x.objects() {
                g.set_hom(a.clone(), b, Value::set([atom("*")]));
            }
        }
        Value::Graph(g)
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        let f = f.clone();
        Morphism::new(move |t| f.obj(t), |_, _| Morphism::Id)
    }
    fn eta(&self) -> Morphism {
        Morphism::object_fixing(|_, _| Morphism::func(|_| atom("*")))
    }
    fn mu(&self) -> Morphism {
        Morphism::Id
    }
}

/// Words over `X` of total size at most `bound`; the empty word has size 1.
fn words(x: &Value, bound: usize) -> Vec<Vec<Term>> {
    let elems: Vec<(Term, usize)> = x.objects().into_iter().map(|t| {
        let s = t.size();
        (t, s)
    }).collect();
    let mut out = Vec::new();
    if bound == 0 {
        return out;
    }
    let mut stack: Vec<(Vec<Term>, usize)> = vec![(vec![], 0)];
    while let Some((w, s)) = stack.pop() {
        for (e, es) in &elems {
            if s + es <= bound {
                let mut w2 = w.clone();
                w2.push(e.clone());
                stack.push((w2, s + es));
            }
        }
        out.push(w);
    }
    out.sort();
    out
}

/// The free monoid monad on sets: words, unit wraps, multiplication
/// concatenates.
#[derive(Clone, Copy, Debug)]
pub struct FreeMonoid;

impl Monad for FreeMonoid {
    fn name(&self) -> String {
        "free-monoid".into()
    }
    fn level(&self) -> usize {
        0
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        Value::set(words(x, bound).into_iter().map(seq))
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        let f = f.clone();
        Morphism::func(move |w| seq(components(w).iter().map(|x| f.obj(x)).collect()))
    }
    fn eta(&self) -> Morphism {
        Morphism::wrap()
    }
    fn mu(&self) -> Morphism {
        Morphism::flatten()
    }
}

fn sorted(mut xs: Vec<Term>) -> Term {
    xs.sort();
    seq(xs)
}

/// The free commutative monoid monad: sorted words.
#[derive(Clone, Copy, Debug)]
pub struct FreeCommMonoid;

impl Monad for FreeCommMonoid {
    fn name(&self) -> String {
        "free-comm-monoid".into()
    }
    fn level(&self) -> usize {
        0
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        Value::set(words(x, bound).into_iter().map(sorted))
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        let f = f.clone();
        Morphism::func(move |w| sorted(components(w).iter().map(|x| f.obj(x)).collect()))
    }
    fn eta(&self) -> Morphism {
        Morphism::wrap()
    }
    fn mu(&self) -> Morphism {
        Morphism::func(|w| sorted(components(w).iter().flat_map(|x| components(x).to_vec()).collect()))
    }
}

/// The writer monad `M × −` of a finite monoid, elements `[m, x]`.
#[derive(Clone, Debug)]
pub struct Writer {
    pub monoid: Arc<FiniteMonoid>,
}

impl Monad for Writer {
    fn name(&self) -> String {
        "writer".into()
    }
    fn level(&self) -> usize {
        0
    }
    fn apply(&self, x: &Value, _bound: usize) -> Value {
        let m = Value::set(self.monoid.elements.iter().cloned());
        Value::product(0, &[m, x.clone()])
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        let f = f.clone();
        Morphism::func(move |t| {
            let c = components(t);
            seq(vec![c[0].clone(), f.obj(&c[1])])
        })
    }
    fn eta(&self) -> Morphism {
        let e = self.monoid.unit.clone();
        Morphism::func(move |x| seq(vec![e.clone(), x.clone()]))
    }
    fn mu(&self) -> Morphism {
        let m = self.monoid.clone();
        Morphism::func(move |t| {
            let c = components(t);
            let inner = components(&c[1]);
            seq(vec![m.mul(&c[0], &inner[0]), inner[1].clone()])
        })
    }
}

/// `ΓE X(a, b) = ∐_{a = x_0, …, x_n = b} E_n(X(x_0, x_1), …, X(x_{n-1}, x_n))`
/// with cells `<x_0..x_n|e>` tagged at every level. Requires a distributive
/// `E`: sequences through initial homs contribute nothing and are skipped.
#[derive(Clone)]
pub struct Gamma {
    pub e: Mt,
}

impl Gamma {
    pub fn new(e: Mt) -> Gamma {
        Gamma { e }
    }

    /// Object sequences starting at `a` of at most `max_len` steps along
    /// non-initial homs.
    pub fn sequences(x: &Graph, a: &Term, max_len: usize) -> Vec<Vec<Term>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![a.clone()]];
        while let Some(xs) = stack.pop() {
            if xs.len() <= max_len {
                let last = xs.last().unwrap();
                for ((p, q), _) in x.homs.iter().filter(|((p, _), _)| p == last) {
                    let _ = p;
                    let mut ys = xs.clone();
                    ys.push(q.clone());
                    stack.push(ys);
                }
            }
            out.push(xs);
        }
        out.sort();
        out
    }

    /// Object sequences of the variables of a cell of `E_n(ΓE X(…), …)`,
    /// read off by mapping recorders over it.
    fn summand(e: &dyn crate::multitensor::Multitensor, body: &Term, n: usize) -> Vec<Vec<Term>> {
        let slots: Arc<Mutex<Vec<Option<Vec<Term>>>>> = Arc::new(Mutex::new(vec![None; n]));
        let recs: Vec<Morphism> = (0..n)
            .map(|i| {
                let s = slots.clone();
                Morphism::uniform(move |c| {
                    if let Some((xs, _)) = c.as_cell() {
                        s.lock().unwrap()[i].get_or_insert_with(|| xs.to_vec());
                    }
                    c.clone()
                })
            })
            .collect();
        e.fmap(&recs).obj(body);
        let slots = slots.lock().unwrap();
        slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.clone().unwrap_or_else(|| panic!("variable {i} of {body} has no summand: the multitensor is not distributive"))
            })
            .collect()
    }
}

fn rank_filter(v: &Value, bound: usize) -> Value {
    v.filter(&|a: &[Term]| a.last().unwrap().rank() <= bound)
}

impl Monad for Gamma {
    fn name(&self) -> String {
        format!("Γ[{}]", self.e.name())
    }
    fn level(&self) -> usize {
        self.e.level() + 1
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        let level = self.level();
        let g = x.as_graph().expect("Γ acts on graphs");
        let mut parts: BTreeMap<(Term, Term), Vec<Value>> = BTreeMap::new();
        for a in &g.objects {
            for xs in Gamma::sequences(g, a, bound) {
                let homs: Vec<Value> = xs.windows(2).map(|w| g.hom(&w[0], &w[1])).collect();
                let ev = self.e.apply(&homs, bound.saturating_sub(1));
                if ev.is_initial() {
                    continue;
                }
                let tagged = rank_filter(&Morphism::tag(xs.clone()).image(&ev), bound);
                if !tagged.is_initial() {
                    parts.entry((xs[0].clone(), xs.last().unwrap().clone())).or_default().push(tagged);
                }
            }
        }
        let mut out = Graph::new(level);
        for o in &g.objects {
            out.add_object(o.clone());
        }
        for ((a, b), ps) in parts {
            out.set_hom(a, b, Value::union(level - 1, &ps));
        }
        Value::Graph(out)
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        if f.is_id() {
            return Morphism::Id;
        }
        let (e, f1, f2) = (self.e.clone(), f.clone(), f.clone());
        Morphism::new(
            move |t| f1.obj(t),
            move |_, _| {
                let (e, f) = (e.clone(), f2.clone());
                Morphism::by_source(move |t| {
                    let (xs, _) = t.as_cell().unwrap_or_else(|| panic!("expected a Γ cell, got {t}"));
                    let fxs: Vec<Term> = xs.iter().map(|x| f.obj(x)).collect();
                    let fs: Vec<Morphism> = xs.windows(2).map(|w| f.hom(&w[0], &w[1])).collect();
                    Morphism::chain(&[Morphism::untag(), e.fmap(&fs), Morphism::tag(fxs)])
                })
            },
        )
    }
    fn eta(&self) -> Morphism {
        let e = self.e.clone();
        Morphism::object_fixing(move |a, b| Morphism::compose(&Morphism::tag(vec![a.clone(), b.clone()]), &e.unit()))
    }
    fn mu(&self) -> Morphism {
        let e = self.e.clone();
        Morphism::object_fixing(move |_, _| {
            let e = e.clone();
            Morphism::by_source(move |t| {
                let (xs, body) = t.as_cell().unwrap_or_else(|| panic!("expected a Γ cell, got {t}"));
                let n = xs.len() - 1;
                let ys = Gamma::summand(e.as_ref(), body, n);
                let shape: Vec<usize> = ys.iter().map(|y| y.len() - 1).collect();
                let mut joined = vec![xs[0].clone()];
                for y in &ys {
                    joined.extend(y[1..].iter().cloned());
                }
                Morphism::chain(&[
                    Morphism::untag(),
                    e.fmap(&vec![Morphism::untag(); n]),
                    e.subst(&shape),
                    Morphism::tag(joined),
                ])
            })
        })
    }
}

/// `𝒢T`: applies a monad on level-`d` values to every hom of a level-`d+1`
/// graph, including initial homs.
#[derive(Clone)]
pub struct HomWise {
    pub t: Mn,
}

impl Monad for HomWise {
    fn name(&self) -> String {
        format!("𝒢[{}]", self.t.name())
    }
    fn level(&self) -> usize {
        self.t.level() + 1
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        let g = x.as_graph().expect("𝒢T acts on graphs");
        let mut out = Graph::new(g.level);
        for a in &g.objects {
            out.add_object(a.clone());
            for b in &g.objects {
                out.set_hom(a.clone(), b.clone(), self.t.apply(&g.hom(a, b), bound));
            }
        }
        Value::Graph(out)
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        if f.is_id() {
            return Morphism::Id;
        }
        let (t, f1, f2) = (self.t.clone(), f.clone(), f.clone());
        Morphism::new(move |o| f1.obj(o), move |a, b| t.fmap(&f2.hom(a, b)))
    }
    fn eta(&self) -> Morphism {
        let t = self.t.clone();
        Morphism::object_fixing(move |_, _| t.eta())
    }
    fn mu(&self) -> Morphism {
        let t = self.t.clone();
        Morphism::object_fixing(move |_, _| t.mu())
    }
}

/// The composite `ST` of monads along a distributive law `λ: TS → ST`.
#[derive(Clone)]
pub struct CompositeMonad {
    pub s: Mn,
    pub t: Mn,
    pub lambda: Morphism,
}

impl Monad for CompositeMonad {
    fn name(&self) -> String {
        format!("{}∘{}", self.s.name(), self.t.name())
    }
    fn level(&self) -> usize {
        self.s.level()
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        self.s.apply(&self.t.apply(x, bound), bound)
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        self.s.fmap(&self.t.fmap(f))
    }
    fn eta(&self) -> Morphism {
        Morphism::compose(&self.s.eta(), &self.t.eta())
    }
    fn mu(&self) -> Morphism {
        Morphism::chain(&[self.s.fmap(&self.lambda), self.s.mu(), self.s.fmap(&self.t.mu())])
    }
}

/// The strict `n`-category monad: `T≤0` is the identity and
/// `T≤k+1 = Γ(T≤k^×)`.
pub fn ncat_monad(n: usize) -> Mn {
    let mut t: Mn = Arc::new(Identity { level: 0 });
    for _ in 0..n {
        t = Arc::new(Gamma::new(Arc::new(t_cross(t))));
    }
    t
}

/// The free category monad on Set-graphs, `Γ(∏)`.
pub fn free_category_monad() -> Mn {
    Arc::new(Gamma::new(Arc::new(Product { level: 0 })))
}

/// Checks both unit laws on `TX` and associativity on `TTTX`.
pub fn check_monad_laws(t: &dyn Monad, x: &Value, bound: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    let tx = t.apply(x, bound);
    let left = Morphism::compose(&t.mu(), &t.eta());
    r.push("left unit", format!("{} cells", tx.size()), disagreement(&left, &Morphism::Id, &tx));
    let right = Morphism::compose(&t.mu(), &t.fmap(&t.eta()));
    r.push("right unit", format!("{} cells", tx.size()), disagreement(&right, &Morphism::Id, &tx));
    let tttx = t.apply(&t.apply(&tx, bound), bound);
    let a = Morphism::compose(&t.mu(), &t.mu());
    let b = Morphism::compose(&t.mu(), &t.fmap(&t.mu()));
    r.push("associativity", format!("{} cells", tttx.size()), disagreement(&a, &b, &tttx));
    r
}

/// Where each cell of `TX(a, b)` comes from: its object sequence and its
/// address in `T(x*X)(0, n)`.
pub type Decomposition = BTreeMap<(Term, Term), BTreeMap<Vec<Term>, (Vec<Term>, Vec<Term>)>>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PathlikeReport {
    pub passed: bool,
    pub cells: usize,
    pub sequences: usize,
    /// Cells of `TX` hit by two sequences.
    pub collisions: Vec<String>,
    /// Cells of `TX` hit by no sequence.
    pub missing: Vec<String>,
}

/// Checks that the maps `T(x̄)_{0,n}` are jointly bijective onto `TX(a, b)`
/// for all object sequences of at most `bound` steps.
pub fn check_pathlike(t: &dyn Monad, x: &Value, bound: usize) -> (PathlikeReport, Decomposition) {
    let tx = t.apply(x, bound);
    let objs = x.objects();
    let mut dec: Decomposition = BTreeMap::new();
    let mut report = PathlikeReport::default();
    for n in 0..=bound {
        for xs in tuples(&vec![objs.clone(); n + 1]) {
            report.sequences += 1;
            let (sg, xbar) = fiber_map(x, &xs).expect("sequence of objects");
            let dom = t.apply(&sg.graph, bound).hom(&sg.start, &sg.end);
            let map = t.fmap(&xbar).hom(&sg.start, &sg.end);
            let key = (xs[0].clone(), xs[n].clone());
            let entry = dec.entry(key).or_default();
            for c in dom.cells() {
                let img = map.map_address(&c);
                if let Some((ys, _)) = entry.get(&img) {
                    report.collisions.push(format!("{} from {} and {}", show(&img), show(ys), show(&xs)));
                } else {
                    entry.insert(img, (xs.clone(), c));
                }
            }
        }
    }
    for a in &objs {
        for b in &objs {
            let hit = dec.get(&(a.clone(), b.clone()));
            for c in tx.hom(a, b).cells() {
                report.cells += 1;
                if !hit.is_some_and(|h| h.contains_key(&c)) {
                    report.missing.push(format!("{a}→{b}: {}", show(&c)));
                }
            }
        }
    }
    report.passed = report.collisions.is_empty() && report.missing.is_empty();
    (report, dec)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CounitReport {
    pub injective: bool,
    pub surjective: bool,
    pub domain_cells: usize,
    pub target_cells: usize,
    pub witness: Option<String>,
}

impl CounitReport {
    pub fn invertible(&self) -> bool {
        self.injective && self.surjective
    }
}

/// The counit `ε: ΓT̄X → TX`, induced by the hom maps of `T(x̄)`.
pub fn counit_eps(t: Mn, x: &Value) -> Morphism {
    let x = Arc::new(x.clone());
    Morphism::object_fixing(move |_, _| {
        let (t, x) = (t.clone(), x.clone());
        Morphism::by_source(move |c| {
            let (xs, _) = c.as_cell().unwrap_or_else(|| panic!("expected a Γ cell, got {c}"));
            let (sg, xbar) = fiber_map(&x, xs).expect("sequence of objects");
            Morphism::compose(&t.fmap(&xbar).hom(&sg.start, &sg.end), &Morphism::untag())
        })
    })
}

/// Checks whether `ε` is invertible on cells of `TX` up to `bound`.
pub fn check_counit(t: Mn, x: &Value, bound: usize) -> Result<CounitReport> {
    let gb = Gamma::new(Arc::new(Bar::new(t.clone())?));
    let dom = gb.apply(x, bound + 1);
    let target = t.apply(x, bound);
    let eps = counit_eps(t, x);
    let mut r = CounitReport { injective: true, surjective: true, ..Default::default() };
    let mut seen: BTreeMap<Vec<Term>, Vec<Term>> = BTreeMap::new();
    for c in dom.cells() {
        if c.len() == 1 {
            continue;
        }
        r.domain_cells += 1;
        let img = eps.map_address(&c);
        if !target.contains(&img) {
            r.surjective = false;
            r.witness.get_or_insert(format!("{} leaves the bounded target", show(&img)));
        }
        if let Some(prev) = seen.insert(img.clone(), c.clone()) {
            r.injective = false;
            r.witness.get_or_insert(format!("{} and {} both map to {}", show(&prev), show(&c), show(&img)));
        }
    }
    for c in target.cells() {
        if c.len() == 1 {
            continue;
        }
        r.target_cells += 1;
        if !seen.contains_key(&c) {
            r.surjective = false;
            r.witness.get_or_insert(format!("{} is not hit", show(&c)));
        }
    }
    Ok(r)
}

/// An algebra `(X, a: TX → X)` with `a` the identity on objects.
#[derive(Clone)]
pub struct Algebra {
    pub carrier: Value,
    pub action: Morphism,
}

/// The algebra of a finite category for the free category monad: a path
/// acts by its composite, the empty path by the identity.
pub fn category_algebra(c: &FiniteCategory) -> Algebra {
    let cat = Arc::new(c.clone());
    let action = Morphism::object_fixing(move |_, _| {
        let cat = cat.clone();
        Morphism::func(move |p| {
            let (xs, body) = p.as_cell().unwrap_or_else(|| panic!("expected a path, got {p}"));
            components(body)
                .iter()
                .fold(cat.identities[&xs[0]].clone(), |acc, f| cat.comp(f, &acc).expect("composable").clone())
        })
    });
    Algebra { carrier: c.underlying_graph(), action }
}

/// Reads a free-category algebra on a graph of sets back as a finite
/// category: identities are the images of empty paths and `g∘f` is the
/// image of the path `f, g`. Arrows keep their names when these are unique
/// across homs and are renamed `[a, b, f]` otherwise.
pub fn algebra_category(alg: &Algebra) -> Result<FiniteCategory> {
    let g = alg.carrier.as_graph().filter(|g| g.level == 1).ok_or_else(|| Error::Invalid("expected a graph of sets".into()))?;
    let objs = alg.carrier.objects();
    let mut homs: BTreeMap<(Term, Term), Vec<Term>> = BTreeMap::new();
    for a in &objs {
        for b in &objs {
            homs.insert((a.clone(), b.clone()), g.hom(a, b).objects());
        }
    }
    let mut seen = BTreeSet::new();
    let unique = homs.values().flatten().all(|f| seen.insert(f.clone()));
    let name = |a: &Term, b: &Term, f: &Term| if unique { f.clone() } else { seq(vec![a.clone(), b.clone(), f.clone()]) };
    let act = |xs: Vec<Term>, edges: Vec<Term>| -> Term {
        let (a, b) = (xs[0].clone(), xs[xs.len() - 1].clone());
        let img = alg.action.map_address(&[a, b, path_cell(xs, edges)]);
        img[img.len() - 1].clone()
    };
    let mut c = FiniteCategory::empty();
    c.objects = objs.clone();
    for ((a, b), fs) in &homs {
        for f in fs {
            c.arrows.push(crate::base_kernel::Arrow { id: name(a, b, f), source: a.clone(), target: b.clone() });
        }
    }
    for a in &objs {
        let i = act(vec![a.clone()], vec![]);
        c.identities.insert(a.clone(), name(a, a, &i));
    }
    for ((a, b), fs) in &homs {
        for cc in &objs {
            for f in fs {
                for h in &homs[&(b.clone(), cc.clone())] {
                    let k = act(vec![a.clone(), b.clone(), cc.clone()], vec![f.clone(), h.clone()]);
                    c.compose.insert((name(b, cc, h), name(a, b, f)), name(a, cc, &k));
                }
            }
        }
    }
    c.validate()?;
    Ok(c)
}

/// Checks `a∘η = 1` on `X` and `a∘μ = a∘T(a)` on `TTX`, and that `a` fixes
/// objects.
pub fn check_algebra(t: &dyn Monad, alg: &Algebra, bound: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    let x = &alg.carrier;
    let moved = x.objects().into_iter().find(|o| alg.action.obj(o) != *o);
    r.push("identity on objects", String::new(), moved.map(|o| format!("{o} moves")));
    let unit = Morphism::compose(&alg.action, &t.eta());
    r.push("unit", format!("{} cells", x.size()), disagreement(&unit, &Morphism::Id, x));
    let ttx = t.apply(&t.apply(x, bound), bound);
    let lhs = Morphism::compose(&alg.action, &t.mu());
    let rhs = Morphism::compose(&alg.action, &t.fmap(&alg.action));
    r.push("associativity", format!("{} cells", ttx.size()), disagreement(&lhs, &rhs, &ttx));
    r
}

/// Algebra to `T̄`-category: `κ_xs = a_{x_0, x_n} ∘ T(x̄)_{0, n}`.
pub fn algebra_to_ecat(t: Mn, alg: &Algebra) -> ECategory {
    let graph = alg.carrier.clone();
    let x = Arc::new(graph.clone());
    let a = alg.action.clone();
    ECategory {
        graph,
        kappa: Arc::new(move |xs: &[Term]| {
            let (sg, xbar) = fiber_map(&x, xs).expect("sequence of objects");
            Morphism::compose(&a.hom(&xs[0], &xs[xs.len() - 1]), &t.fmap(&xbar).hom(&sg.start, &sg.end))
        }),
    }
}

/// `T̄`-category to algebra, through the path-like decomposition of `TX`.
pub fn ecat_to_algebra(t: Mn, c: &ECategory, bound: usize) -> Result<Algebra> {
    let (report, dec) = check_pathlike(t.as_ref(), &c.graph, bound);
    if !report.passed {
        return Err(Error::Invalid(format!("{} is not path-like on this graph", t.name())));
    }
    let tx = t.apply(&c.graph, bound);
    let mut homs = BTreeMap::new();
    for ((a, b), cells) in &dec {
        let hom = tx.hom(a, b);
        if hom.is_initial() {
            continue;
        }
        let table: BTreeMap<Vec<Term>, Vec<Term>> = cells
            .iter()
            .map(|(img, (xs, addr))| (img.clone(), (c.kappa)(xs).map_address(addr)))
            .collect();
        homs.insert((a.clone(), b.clone()), address_table_morphism(&hom, &table));
    }
    let objs = c.graph.objects().into_iter().map(|o| (o.clone(), o)).collect();
    Ok(Algebra { carrier: c.graph.clone(), action: Morphism::table(objs, homs) })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundTrip {
    pub algebra_round_trip: bool,
    pub ecat_round_trip: bool,
    pub witness: Option<String>,
}

/// Translates an algebra to an enriched category and back, and that
/// category to an algebra and back, comparing cell by cell.
pub fn algebra_ecat_round_trip(t: Mn, alg: &Algebra, bound: usize) -> Result<RoundTrip> {
    let ecat = algebra_to_ecat(t.clone(), alg);
    let back = ecat_to_algebra(t.clone(), &ecat, bound)?;
    let tx = t.apply(&alg.carrier, bound);
    let mut r = RoundTrip { algebra_round_trip: true, ecat_round_trip: true, witness: None };
    if let Some(w) = disagreement(&alg.action, &back.action, &tx) {
        r.algebra_round_trip = false;
        r.witness = Some(w);
    }
    let again = algebra_to_ecat(t.clone(), &back);
    let bar = Bar::new(t.clone())?;
    for xs in crate::multitensor::object_sequences(&alg.carrier, bound) {
        let homs: Vec<Value> = xs.windows(2).map(|w| alg.carrier.hom(&w[0], &w[1])).collect();
        let dom = crate::multitensor::OneCell::apply(&bar, &homs, bound);
        if let Some(w) = disagreement(&(ecat.kappa)(&xs), &(again.kappa)(&xs), &dom) {
            r.ecat_round_trip = false;
            r.witness.get_or_insert(format!("κ at {}: {w}", show(&xs)));
        }
    }
    Ok(r)
}

/// `Γψ: ΓF∘𝒢H → 𝒢H∘ΓE`, summandwise `H(tag) ∘ ψ_n`.
pub fn gamma_lax_functor(l: &LaxMonoidalFunctor) -> Morphism {
    let (h, psi) = (l.h.clone(), l.psi.clone());
    Morphism::object_fixing(move |_, _| {
        let (h, psi) = (h.clone(), psi.clone());
        Morphism::by_source(move |c| {
            let (xs, _) = c.as_cell().unwrap_or_else(|| panic!("expected a Γ cell, got {c}"));
            Morphism::chain(&[Morphism::untag(), psi(xs.len() - 1), h.fmap(&Morphism::tag(xs.to_vec()))])
        })
    })
}

/// `𝒢H` on graphs.
#[derive(Clone)]
pub struct GraphFunctor(pub Arc<dyn Functor>);

impl GraphFunctor {
    pub fn apply(&self, x: &Value) -> Value {
        let g = x.as_graph().expect("graph");
        let mut out = Graph::new(g.level);
        for a in &g.objects {
            out.add_object(a.clone());
            for b in &g.objects {
                out.set_hom(a.clone(), b.clone(), self.0.apply(&g.hom(a, b)));
            }
        }
        Value::Graph(out)
    }

    pub fn fmap(&self, f: &Morphism) -> Morphism {
        let (h, f1, f2) = (self.0.clone(), f.clone(), f.clone());
        Morphism::new(move |o| f1.obj(o), move |a, b| h.fmap(&f2.hom(a, b)))
    }
}

/// Monad functor axioms for `(𝒢H, Γψ)` on a graph `X`:
/// `Γψ ∘ η = 𝒢H(η)` and `Γψ ∘ μ = 𝒢H(μ) ∘ Γψ ∘ ΓF(Γψ)`.
pub fn check_gamma_lax(l: &LaxMonoidalFunctor, x: &Value, bound: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    let gf = Gamma::new(l.from.clone());
    let ge = Gamma::new(l.to.clone());
    let gh = GraphFunctor(l.h.clone());
    let gpsi = gamma_lax_functor(l);
    let hx = gh.apply(x);
    let lhs = Morphism::compose(&gpsi, &gf.eta());
    let rhs = gh.fmap(&ge.eta());
    r.push("unit", format!("{} cells", hx.size()), disagreement(&lhs, &rhs, &hx));
    let dom = gf.apply(&gf.apply(&hx, bound), bound);
    let lhs = Morphism::compose(&gpsi, &gf.mu());
    let rhs = Morphism::chain(&[gf.fmap(&gpsi), gpsi.clone(), gh.fmap(&ge.mu())]);
    r.push("multiplication", format!("{} cells", dom.size()), disagreement(&lhs, &rhs, &dom));
    r
}

/// A distributive law `λ: TS → ST` with its composite monad.
#[derive(Clone)]
pub struct DistributiveLaw {
    pub s: Mn,
    pub t: Mn,
    pub lambda: Morphism,
}

impl DistributiveLaw {
    /// The law `𝒢(T)Γ(∏) → Γ(∏)𝒢(T)` of a coproduct-preserving `T` on
    /// level-`d` values: summandwise `tag ∘ τ ∘ T(untag)` with `τ` the
    /// product obstruction.
    pub fn product_gamma(t: Mn) -> DistributiveLaw {
        let level = t.level();
        let s: Mn = Arc::new(Gamma::new(Arc::new(Product { level })));
        let tt = t.clone();
        let lambda = Morphism::object_fixing(move |_, _| {
            let t = tt.clone();
            Morphism::by_source(move |o| {
                let (xs, _) = o.as_cell().unwrap_or_else(|| panic!("expected a Γ cell, got {o}"));
                let n = xs.len() - 1;
                let tau = Morphism::fanout((0..n).map(|j| t.fmap(&Morphism::proj(j))).collect());
                Morphism::chain(&[t.fmap(&Morphism::untag()), tau, Morphism::tag(xs.to_vec())])
            })
        });
        DistributiveLaw { s, t: Arc::new(HomWise { t }), lambda }
    }

    /// The identity law for `T` the identity monad.
    pub fn trivial(s: Mn) -> DistributiveLaw {
        let level = s.level();
        DistributiveLaw { s, t: Arc::new(Identity { level }), lambda: Morphism::Id }
    }

    pub fn composite(&self) -> CompositeMonad {
        CompositeMonad { s: self.s.clone(), t: self.t.clone(), lambda: self.lambda.clone() }
    }

    /// The four distributive-law squares on the relevant values built from
    /// `x`.
    pub fn check(&self, x: &Value, bound: usize) -> AxiomReport {
        let (s, t, l) = (&self.s, &self.t, &self.lambda);
        let mut r = AxiomReport::default();
        let sx = s.apply(x, bound);
        let tx = t.apply(x, bound);
        // λ ∘ η^T_S = S(η^T)
        let lhs = Morphism::compose(l, &t.eta());
        r.push("unit of T", format!("{} cells", sx.size()), disagreement(&lhs, &s.fmap(&t.eta()), &sx));
        // λ ∘ T(η^S) = η^S_T
        let lhs = Morphism::compose(l, &t.fmap(&s.eta()));
        r.push("unit of S", format!("{} cells", tx.size()), disagreement(&lhs, &s.eta(), &tx));
        // λ ∘ μ^T_S = S(μ^T) ∘ λ_T ∘ T(λ)
        let ttsx = t.apply(&t.apply(&sx, bound), bound);
        let lhs = Morphism::compose(l, &t.mu());
        let rhs = Morphism::chain(&[t.fmap(l), l.clone(), s.fmap(&t.mu())]);
        r.push("multiplication of T", format!("{} cells", ttsx.size()), disagreement(&lhs, &rhs, &ttsx));
        // λ ∘ T(μ^S) = μ^S_T ∘ S(λ) ∘ λ_S
        let tssx = t.apply(&s.apply(&sx, bound), bound);
        let lhs = Morphism::compose(l, &t.fmap(&s.mu()));
        let rhs = Morphism::chain(&[l.clone(), s.fmap(l), s.mu()]);
        r.push("multiplication of S", format!("{} cells", tssx.size()), disagreement(&lhs, &rhs, &tssx));
        r
    }
}

/// One cell of a free strict n-category, for output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellRecord {
    pub dimension: usize,
    pub source: Option<Term>,
    pub target: Option<Term>,
    pub cell: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeNcat {
    pub n: usize,
    pub bound: usize,
    pub counts: Vec<usize>,
    /// Cells of rank `bound + 1`, which the truncation leaves out.
    pub truncated: usize,
    pub cells: Vec<CellRecord>,
}

/// The free strict `n`-category on an `n`-globular set, truncated at rank
/// `bound`, together with the number of cells one rank step beyond.
pub fn free_ncat(n: usize, x: &Value, bound: usize) -> Result<FreeNcat> {
    if x.level() != n {
        return Err(Error::Invalid(format!("expected a {n}-globular set, got level {}", x.level())));
    }
    let t = ncat_monad(n);
    let v = t.apply(x, bound);
    let beyond = t.apply(x, bound + 1).size() - v.size();
    let cells = v
        .cells()
        .into_iter()
        .map(|a| {
            let k = (a.len() - 1) / 2;
            let (source, target) = if k == 0 { (None, None) } else { (Some(a[2 * k - 2].clone()), Some(a[2 * k - 1].clone())) };
            CellRecord { dimension: k, source, target, cell: a[a.len() - 1].clone() }
        })
        .collect();
    Ok(FreeNcat { n, bound, counts: v.counts(), truncated: beyond, cells })
}

/// All cells of `TX(a, b)` grouped by rank, for rank listings.
pub fn rank_histogram(v: &Value) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for a in v.cells() {
        *h.entry(a.last().unwrap().rank()).or_default() += 1;
    }
    h
}

/// Paths `a → b` in a Set-graph as `Γ(∏)` cells, for tests and CLI text.
pub fn path_cell(xs: Vec<Term>, edges: Vec<Term>) -> Term {
    cell(xs, seq(edges))
}

/// A `Γ`-cell as `(object sequence, body)` when it is one.
pub fn split_cell(t: &Term) -> Option<(Vec<Term>, Term)> {
    t.as_cell().map(|(xs, b)| (xs.to_vec(), b.clone()))
}

#[allow(dead_code)]
fn distinct(xs: &[Term]) -> bool {
    xs.iter().collect::<BTreeSet<_>>().len() == xs.len()
}

#[allow(dead_code)]
fn ints(n: usize) -> Vec<Term> {
    (0..n).map(|i| int(i as i64)).collect()
}
