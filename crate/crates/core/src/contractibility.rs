//! Trivial fibrations of finite globular sets against the globe generator
//! classes, and contractibility of collections and lax monoidal maps.
//!
//! Lifting problems are decided by exhaustive search over globular maps;
//! an independent recursive check (surjective on objects, hom maps in the
//! smaller class) is provided for classes built by the plus construction.

use crate::base_kernel::{GlobMap, GlobularSet};
use crate::enriched_graph::{Morphism, Value};
use crate::graph_monad::{gamma_lax_functor, Gamma, Monad};
use crate::multitensor::{show, LaxMonoidalFunctor, Mt, OneCell};
use crate::operad::Collection;
use crate::term::{atom, int, op, seq, Term};
use crate::unionfind::Partition;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// `I_n` (globe inclusions up to `n`) or `I≤n` (those plus `∂(n+1) → n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Plain,
    Truncated,
}

impl ClassKind {
    pub fn label(self, n: usize) -> String {
        match self {
            ClassKind::Plain => format!("I_{n}"),
            ClassKind::Truncated => format!("I<={n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub source: GlobularSet,
    pub target: GlobularSet,
    pub map: GlobMap,
    pub connected_codomain: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorClass {
    pub name: String,
    /// Ambient dimension of every source and target.
    pub dim: usize,
    pub generators: Vec<Generator>,
    /// Generators that do not fit the ambient dimension; they can never be
    /// part of a lifting problem there.
    pub omitted: Vec<String>,
}

fn generator(name: String, source: GlobularSet, target: GlobularSet, map: GlobMap) -> Generator {
    let connected_codomain = connected(&target);
    Generator { name, source, target, map, connected_codomain }
}

fn inclusion(dim: usize, k: usize) -> Generator {
    let source = GlobularSet::boundary(dim, k);
    let map = GlobMap::identity(&source);
    let mut map = map;
    map.maps.resize(dim + 1, BTreeMap::new());
    generator(format!("boundary {k} -> {k}"), source, GlobularSet::globe(dim, k), map)
}

/// `∂(n+1) → n`, folding the two parallel `n`-cells onto the top cell.
fn fold(n: usize) -> Generator {
    let source = GlobularSet::boundary(n, n + 1);
    let mut map = GlobMap::identity(&source);
    let top = atom(&format!("c{n}"));
    for c in &source.cells[n] {
        map.maps[n].insert(c.clone(), top.clone());
    }
    generator(format!("boundary {} -> {n}", n + 1), source, GlobularSet::globe(n, n), map)
}

/// The class `kind` at level `n`, realised in ambient dimension `ambient`
/// (which must be at least `n` for the truncated classes).
pub fn generators(n: usize, kind: ClassKind, ambient: usize) -> GeneratorClass {
    let dim = match kind {
        ClassKind::Plain => ambient,
        ClassKind::Truncated => ambient.max(n),
    };
    let mut gens = Vec::new();
    let mut omitted = Vec::new();
    for k in 0..=n {
        if k <= dim {
            gens.push(inclusion(dim, k));
        } else {
            omitted.push(format!("boundary {k} -> {k}"));
        }
    }
    if kind == ClassKind::Truncated {
        let mut g = fold(n);
        if dim > n {
            g = promote_generator(&g, dim);
        }
        gens.push(g);
    }
    GeneratorClass { name: kind.label(n), dim, generators: gens, omitted }
}

fn promote(x: &GlobularSet, dim: usize) -> GlobularSet {
    let mut y = x.clone();
    while y.dim < dim {
        y.dim += 1;
        y.cells.push(vec![]);
        y.src.push(BTreeMap::new());
        y.tgt.push(BTreeMap::new());
    }
    y
}

fn promote_map(f: &GlobMap, dim: usize) -> GlobMap {
    let mut g = f.clone();
    g.maps.resize(dim + 1, BTreeMap::new());
    g
}

fn promote_generator(g: &Generator, dim: usize) -> Generator {
    Generator {
        name: g.name.clone(),
        source: promote(&g.source, dim),
        target: promote(&g.target, dim),
        map: promote_map(&g.map, dim),
        connected_codomain: g.connected_codomain,
    }
}

/// Nonempty with all objects joined by 1-cells.
pub fn connected(x: &GlobularSet) -> bool {
    if x.cells[0].is_empty() {
        return false;
    }
    let mut p = Partition::from_keys(x.cells[0].iter().cloned());
    if x.dim >= 1 {
        for c in &x.cells[1] {
            p.union(&x.src[1][c], &x.tgt[1][c]);
        }
    }
    p.num_classes() == 1
}

/// The graph with objects `o0`, `o1` and the single nontrivial hom `X`.
pub fn suspend(x: &GlobularSet) -> GlobularSet {
    let mut y = GlobularSet::empty(x.dim + 1);
    let (lo, hi) = (atom("o0"), atom("o1"));
    y.add(0, lo.clone(), None, None);
    y.add(0, hi.clone(), None, None);
    for k in 0..=x.dim {
        for c in &x.cells[k] {
            if k == 0 {
                y.add(1, c.clone(), Some(lo.clone()), Some(hi.clone()));
            } else {
                y.add(k + 1, c.clone(), Some(x.src[k][c].clone()), Some(x.tgt[k][c].clone()));
            }
        }
    }
    y
}

pub fn suspend_map(f: &GlobMap) -> GlobMap {
    let mut maps = vec![[(atom("o0"), atom("o0")), (atom("o1"), atom("o1"))].into_iter().collect()];
    maps.extend(f.maps.iter().cloned());
    GlobMap { maps }
}

/// `I⁺`: `∅ → 0` together with the suspension of every member of `I`.
pub fn plus(class: &GeneratorClass) -> GeneratorClass {
    let dim = class.dim + 1;
    let point = GlobularSet::globe(dim, 0);
    let mut gens = vec![generator("empty -> point".into(), GlobularSet::empty(dim), point, GlobMap { maps: vec![BTreeMap::new(); dim + 1] })];
    for g in &class.generators {
        gens.push(generator(format!("suspension of {}", g.name), suspend(&g.source), suspend(&g.target), suspend_map(&g.map)));
    }
    GeneratorClass { name: format!("({})+", class.name), dim, generators: gens, omitted: class.omitted.clone() }
}

/// Visits every globular map `dom → cod` whose values satisfy `allowed`;
/// stops when `visit` returns true and reports whether it did.
pub fn search_maps(
    dom: &GlobularSet,
    cod: &GlobularSet,
    allowed: &dyn Fn(usize, &Term, &Term) -> bool,
    visit: &mut dyn FnMut(&GlobMap) -> bool,
) -> bool {
    let order: Vec<(usize, Term)> = (0..=dom.dim).flat_map(|k| dom.cells[k].iter().map(move |c| (k, c.clone()))).collect();
    let mut cur = GlobMap { maps: vec![BTreeMap::new(); dom.dim + 1] };
    fn go(
        i: usize,
        order: &[(usize, Term)],
        dom: &GlobularSet,
        cod: &GlobularSet,
        allowed: &dyn Fn(usize, &Term, &Term) -> bool,
        cur: &mut GlobMap,
        visit: &mut dyn FnMut(&GlobMap) -> bool,
    ) -> bool {
        let Some((k, c)) = order.get(i) else { return visit(cur) };
        let k = *k;
        if k > cod.dim {
            return false;
        }
        for d in &cod.cells[k] {
            if k > 0 && (cod.src[k][d] != cur.maps[k - 1][&dom.src[k][c]] || cod.tgt[k][d] != cur.maps[k - 1][&dom.tgt[k][c]]) {
                continue;
            }
            if !allowed(k, c, d) {
                continue;
            }
            cur.maps[k].insert(c.clone(), d.clone());
            if go(i + 1, order, dom, cod, allowed, cur, visit) {
                return true;
            }
        }
        cur.maps[k].remove(c);
        false
    }
    go(0, &order, dom, cod, allowed, &mut cur, visit)
}

pub fn all_maps(dom: &GlobularSet, cod: &GlobularSet) -> Vec<GlobMap> {
    let mut out = Vec::new();
    search_maps(dom, cod, &|_, _, _| true, &mut |m| {
        out.push(m.clone());
        false
    });
    out
}

/// Bijective globular maps `a → b`.
pub fn isomorphisms(a: &GlobularSet, b: &GlobularSet) -> Vec<GlobMap> {
    if a.dim != b.dim || a.counts() != b.counts() {
        return vec![];
    }
    all_maps(a, b)
        .into_iter()
        .filter(|m| m.maps.iter().all(|mk| mk.values().collect::<std::collections::BTreeSet<_>>().len() == mk.len()))
        .collect()
}

/// Whether `g, h` are isomorphic as arrows: `v∘g = h∘u` for isomorphisms
/// `u` of sources and `v` of targets.
pub fn generators_isomorphic(g: &Generator, h: &Generator) -> bool {
    let us = isomorphisms(&g.source, &h.source);
    if us.is_empty() {
        return false;
    }
    isomorphisms(&g.target, &h.target).iter().any(|v| {
        us.iter().any(|u| {
            (0..=g.source.dim).all(|k| g.source.cells[k].iter().all(|c| v.maps[k][&g.map.maps[k][c]] == h.map.maps[k][&u.maps[k][c]]))
        })
    })
}

/// Elementwise isomorphism of two classes, in any order.
pub fn classes_isomorphic(a: &GeneratorClass, b: &GeneratorClass) -> bool {
    if a.generators.len() != b.generators.len() {
        return false;
    }
    let mut used = vec![false; b.generators.len()];
    a.generators.iter().all(|g| {
        match (0..b.generators.len()).find(|&j| !used[j] && generators_isomorphic(g, &b.generators[j])) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Filler {
    pub generator: String,
    pub top: GlobMap,
    pub bottom: GlobMap,
    pub filler: GlobMap,
}

#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    pub generator: String,
    pub top: GlobMap,
    pub bottom: GlobMap,
    /// The cells of the target where the bottom map sends the generator's
    /// cells that are missing from its source.
    pub cells: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationReport {
    pub class: String,
    pub passed: bool,
    pub problems: usize,
    pub fillers: Vec<Filler>,
    pub obstruction: Option<Obstruction>,
    pub omitted: Vec<String>,
}

/// Decides the right lifting property of `f: X → Y` against every member
/// of `class` by enumerating all commuting squares and searching for a
/// diagonal filler. Stops at the first unsolvable square.
pub fn trivial_fibration_check(f: &GlobMap, x: &GlobularSet, y: &GlobularSet, class: &GeneratorClass) -> FibrationReport {
    let dim = x.dim.max(y.dim).max(class.dim);
    let (x, y, f) = (promote(x, dim), promote(y, dim), promote_map(f, dim));
    let mut report =
        FibrationReport { class: class.name.clone(), passed: true, problems: 0, fillers: vec![], obstruction: None, omitted: class.omitted.clone() };
    for g in &class.generators {
        let g = promote_generator(g, dim);
        let (s, b, i) = (&g.source, &g.target, &g.map);
        for beta in all_maps(b, &y) {
            let mut tops = Vec::new();
            search_maps(s, &x, &|k, c, d| f.maps[k][d] == beta.maps[k][&i.maps[k][c]], &mut |alpha| {
                tops.push(alpha.clone());
                false
            });
            for alpha in tops {
                report.problems += 1;
                let mut found = None;
                search_maps(
                    b,
                    &x,
                    &|k, c, d| f.maps[k][d] == beta.maps[k][c],
                    &mut |gamma| {
                        let ok = (0..=s.dim).all(|k| s.cells[k].iter().all(|c| gamma.maps[k][&i.maps[k][c]] == alpha.maps[k][c]));
                        if ok {
                            found = Some(gamma.clone());
                        }
                        ok
                    },
                );
                match found {
                    Some(gamma) => report.fillers.push(Filler { generator: g.name.clone(), top: alpha, bottom: beta.clone(), filler: gamma }),
                    None => {
                        let image: Vec<&Term> = (0..=s.dim).flat_map(|k| i.maps[k].values()).collect();
                        let cells = (0..=b.dim)
                            .flat_map(|k| b.cells[k].iter().filter(|c| !image.contains(c)).map(move |c| (k, c)))
                            .map(|(k, c)| beta.maps[k][c].to_string())
                            .collect();
                        report.passed = false;
                        report.obstruction = Some(Obstruction { generator: g.name.clone(), top: alpha, bottom: beta, cells });
                        return report;
                    }
                }
            }
        }
    }
    report
}

/// The hom globular set `X(a, b)`, one dimension lower.
pub fn hom(x: &GlobularSet, a: &Term, b: &Term) -> GlobularSet {
    let dim = x.dim.saturating_sub(1);
    let mut h = GlobularSet::empty(dim);
    if x.dim == 0 {
        return h;
    }
    for k in 1..=x.dim {
        for c in &x.cells[k] {
            let mut e = c.clone();
            for j in (2..=k).rev() {
                e = x.src[j][&e].clone();
            }
            if x.src[1][&e] != *a || x.tgt[1][&e] != *b {
                continue;
            }
            if k == 1 {
                h.add(0, c.clone(), None, None);
            } else {
                h.add(k - 1, c.clone(), Some(x.src[k][c].clone()), Some(x.tgt[k][c].clone()));
            }
        }
    }
    h
}

pub fn hom_map(f: &GlobMap, x: &GlobularSet) -> GlobMap {
    let dim = x.dim.saturating_sub(1);
    GlobMap { maps: (0..=dim).map(|k| f.maps.get(k + 1).cloned().unwrap_or_default()).collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursiveReport {
    pub passed: bool,
    pub witness: Option<String>,
}

/// Trivial fibration check for `I_n` (`kind = Plain`, with `I_{-1}` empty)
/// or `I≤n` by the recursion: surjective on objects (bijective at the
/// bottom of the truncated tower) and every hom map in the class one level
/// down.
pub fn recursive_check(f: &GlobMap, x: &GlobularSet, y: &GlobularSet, kind: ClassKind, n: usize) -> RecursiveReport {
    match recurse(f, x, y, kind, n as i64, &mut Vec::new()) {
        None => RecursiveReport { passed: true, witness: None },
        Some(w) => RecursiveReport { passed: false, witness: Some(w) },
    }
}

fn recurse(f: &GlobMap, x: &GlobularSet, y: &GlobularSet, kind: ClassKind, n: i64, path: &mut Vec<String>) -> Option<String> {
    if n < 0 {
        return None;
    }
    let at = || if path.is_empty() { String::new() } else { format!(" in hom {}", path.join(" > ")) };
    let image: Vec<&Term> = x.cells[0].iter().map(|c| &f.maps[0][c]).collect();
    if let Some(miss) = y.cells[0].iter().find(|c| !image.contains(c)) {
        return Some(format!("object {miss} is not hit{}", at()));
    }
    if kind == ClassKind::Truncated && n == 0 {
        for (i, a) in x.cells[0].iter().enumerate() {
            if let Some(b) = x.cells[0][i + 1..].iter().find(|b| f.maps[0][*b] == f.maps[0][a]) {
                return Some(format!("objects {a} and {b} have the same image{}", at()));
            }
        }
        return None;
    }
    let inner = hom_map(f, x);
    for a in &x.cells[0] {
        for b in &x.cells[0] {
            let (fa, fb) = (&f.maps[0][a], &f.maps[0][b]);
            path.push(format!("({a},{b})"));
            let r = recurse(&inner, &hom(x, a, b), &hom(y, fa, fb), kind, n - 1, path);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Constructions on globular maps used by the closure properties.

fn pair(a: &Term, b: &Term) -> Term {
    seq(vec![a.clone(), b.clone()])
}

pub fn product_map(f: &GlobMap, g: &GlobMap, x: &GlobularSet, y: &GlobularSet) -> GlobMap {
    GlobMap {
        maps: (0..=x.dim)
            .map(|k| {
                x.cells[k]
                    .iter()
                    .flat_map(|a| y.cells[k].iter().map(move |b| (pair(a, b), pair(&f.maps[k][a], &g.maps[k][b]))))
                    .collect()
            })
            .collect(),
    }
}

pub fn coproduct_map(fs: &[(GlobMap, GlobularSet)]) -> GlobMap {
    let dim = fs.iter().map(|(_, x)| x.dim).max().unwrap_or(0);
    let tag = |i: usize, t: &Term| seq(vec![int(i as i64), t.clone()]);
    let mut maps = vec![BTreeMap::new(); dim + 1];
    for (i, (f, x)) in fs.iter().enumerate() {
        for k in 0..=x.dim {
            for c in &x.cells[k] {
                maps[k].insert(tag(i, c), tag(i, &f.maps[k][c]));
            }
        }
    }
    GlobMap { maps }
}

/// `X ×_Z Y` with its two projections.
pub fn pullback(f: &GlobMap, x: &GlobularSet, g: &GlobMap, y: &GlobularSet) -> (GlobularSet, GlobMap, GlobMap) {
    let mut p = GlobularSet::empty(x.dim);
    let mut p1 = GlobMap { maps: vec![BTreeMap::new(); x.dim + 1] };
    let mut p2 = p1.clone();
    for k in 0..=x.dim {
        for a in &x.cells[k] {
            for b in &y.cells[k] {
                if f.maps[k][a] != g.maps[k][b] {
                    continue;
                }
                let c = pair(a, b);
                if k == 0 {
                    p.add(0, c.clone(), None, None);
                } else {
                    p.add(k, c.clone(), Some(pair(&x.src[k][a], &y.src[k][b])), Some(pair(&x.tgt[k][a], &y.tgt[k][b])));
                }
                p1.maps[k].insert(c.clone(), a.clone());
                p2.maps[k].insert(c, b.clone());
            }
        }
    }
    (p, p1, p2)
}

pub fn random_globular<R: Rng>(rng: &mut R, dim: usize, max_per_dim: usize) -> GlobularSet {
    let mut g = GlobularSet::empty(dim);
    for k in 0..=dim {
        let n = rng.gen_range(if k == 0 { 1 } else { 0 }..=max_per_dim);
        for i in 0..n {
            let name = match k {
                0..=2 => atom(&format!("{}{i}", ["x", "e", "a"][k])),
                _ => atom(&format!("c{k}_{i}")),
            };
            if k == 0 {
                g.add(0, name, None, None);
                continue;
            }
            let s = g.cells[k - 1].choose(rng).cloned();
            let Some(s) = s else { break };
            let parallel: Vec<Term> = g.cells[k - 1]
                .iter()
                .filter(|t| k == 1 || (g.src[k - 1][*t] == g.src[k - 1][&s] && g.tgt[k - 1][*t] == g.tgt[k - 1][&s]))
                .cloned()
                .collect();
            let t = parallel.choose(rng).unwrap().clone();
            g.add(k, name, Some(s), Some(t));
        }
    }
    g
}

/// A globular set over `z` with up to `max_copies` copies of each cell,
/// boundaries chosen at random among the copies of the boundary.
pub fn random_fattening<R: Rng>(rng: &mut R, z: &GlobularSet, max_copies: usize) -> (GlobularSet, GlobMap) {
    let mut x = GlobularSet::empty(z.dim);
    let mut f = GlobMap { maps: vec![BTreeMap::new(); z.dim + 1] };
    let mut copies: Vec<BTreeMap<Term, Vec<Term>>> = vec![BTreeMap::new(); z.dim + 1];
    for k in 0..=z.dim {
        for c in &z.cells[k] {
            let n = rng.gen_range(1..=max_copies);
            for i in 0..n {
                let name = pair(c, &int(i as i64));
                if k == 0 {
                    x.add(0, name.clone(), None, None);
                } else {
                    let srcs = copies[k - 1].get(&z.src[k][c]).cloned().unwrap_or_default();
                    let Some(s) = srcs.choose(rng).cloned() else { continue };
                    let tgts: Vec<Term> = copies[k - 1]
                        .get(&z.tgt[k][c])
                        .cloned()
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|t| k == 1 || (x.src[k - 1][t] == x.src[k - 1][&s] && x.tgt[k - 1][t] == x.tgt[k - 1][&s]))
                        .collect();
                    let Some(t) = tgts.choose(rng).cloned() else { continue };
                    x.add(k, name.clone(), Some(s), Some(t));
                }
                f.maps[k].insert(name.clone(), c.clone());
                copies[k].entry(c.clone()).or_default().push(name);
            }
        }
    }
    (x, f)
}

// ---------------------------------------------------------------------------
// Graph-form values as globular sets.

fn cell_name(addr: &[Term]) -> Term {
    if addr.len() == 1 {
        addr[0].clone()
    } else {
        seq(addr.to_vec())
    }
}

/// A graph-form value as a globular set; higher cells are named by their
/// full address.
pub fn to_globular(v: &Value) -> GlobularSet {
    let mut g = GlobularSet::empty(v.level());
    let mut cells = v.cells();
    cells.sort_by_key(|a| a.len());
    for a in cells {
        let k = (a.len() - 1) / 2;
        if k == 0 {
            g.add(0, a[0].clone(), None, None);
        } else {
            let mut s = a[..2 * k - 2].to_vec();
            s.push(a[2 * k - 2].clone());
            let mut t = a[..2 * k - 2].to_vec();
            t.push(a[2 * k - 1].clone());
            g.add(k, cell_name(&a), Some(cell_name(&s)), Some(cell_name(&t)));
        }
    }
    g
}

/// A morphism of graph-form values tabulated on `dom`, in the naming of
/// [`to_globular`].
pub fn to_glob_map(m: &Morphism, dom: &Value) -> GlobMap {
    let mut maps = vec![BTreeMap::new(); dom.level() + 1];
    for a in dom.cells() {
        maps[(a.len() - 1) / 2].insert(cell_name(&a), cell_name(&m.map_address(&a)));
    }
    GlobMap { maps }
}

// ---------------------------------------------------------------------------
// Contractibility of collections.

/// A collection over `reference` whose top-dimensional cells are replaced
/// by `fibre(arity, shape)` tagged copies, where `shape` is the image of the
/// cell at the terminal tuple. Lower cells are unchanged, so the structure
/// map is cartesian.
#[derive(Clone)]
pub struct FibredCollection {
    pub reference: Mt,
    pub fibre: Arc<dyn Fn(usize, &[Term]) -> usize + Send + Sync>,
}

fn fibred(g: Morphism, depth: usize) -> Morphism {
    if depth == 0 {
        return Morphism::func(move |t| match t {
            Term::Op(l, xs) if **l == atom("fib") => op(atom("fib"), vec![g.obj(&xs[0]), xs[1].clone()]),
            other => panic!("expected a fibre cell, got {other}"),
        });
    }
    let g2 = g.clone();
    Morphism::new(move |a| g.obj(a), move |a, b| fibred(g2.hom(a, b), depth - 1))
}

fn strip(depth: usize) -> Morphism {
    if depth == 0 {
        return Morphism::func(|t| match t {
            Term::Op(l, xs) if **l == atom("fib") => xs[0].clone(),
            other => panic!("expected a fibre cell, got {other}"),
        });
    }
    Morphism::object_fixing(move |_, _| strip(depth - 1))
}

impl OneCell for FibredCollection {
    fn name(&self) -> String {
        format!("fibred[{}]", self.reference.name())
    }
    fn level(&self) -> usize {
        self.reference.level()
    }
    fn apply(&self, args: &[Value], bound: usize) -> Value {
        let level = self.level();
        let r = self.reference.apply(args, bound);
        let bang = self.reference.fmap(&vec![Morphism::uniform(|_| atom("*")); args.len()]);
        let top = 2 * level + 1;
        let mut addrs = Vec::new();
        for a in r.cells() {
            if a.len() < top {
                addrs.push(a);
                continue;
            }
            let shape = bang.map_address(&a);
            for z in 0..(self.fibre)(args.len(), &shape) {
                let mut b = a.clone();
                let last = b.pop().unwrap();
                b.push(op(atom("fib"), vec![last, int(z as i64)]));
                addrs.push(b);
            }
        }
        Value::from_cells(level, addrs.iter().map(|a| a.as_slice()))
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        fibred(self.reference.fmap(fs), self.level())
    }
}

impl FibredCollection {
    pub fn collection(self) -> Collection {
        let level = self.level();
        let reference = self.reference.clone();
        Collection { carrier: Arc::new(self), reference, alpha: Arc::new(move |_| strip(level)) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractibilityEntry {
    pub arity: usize,
    pub generator: Option<String>,
    pub cell: Option<String>,
    pub verdict: String,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractibilityReport {
    pub class: String,
    pub bound: usize,
    pub max_arity: usize,
    pub contractible: bool,
    pub verdict: String,
    /// The reference cells grow past the bound, so the verdict is bounded.
    pub truncated: bool,
    /// The exhaustive search and the recursive check agreed at every arity.
    pub methods_agree: bool,
    pub entries: Vec<ContractibilityEntry>,
}

/// Checks that the structure map of a cartesian collection is a trivial
/// `I≤n`-fibration (`n` the level) at the terminal tuples of every arity up
/// to `max_arity`, with reference cells enumerated to `bound`.
pub fn contractible_check(c: &Collection, max_arity: usize, bound: usize) -> ContractibilityReport {
    let level = c.reference.level();
    let class = generators(level, ClassKind::Truncated, level);
    let mut entries = Vec::new();
    let mut truncated = false;
    let mut methods_agree = true;
    for k in 0..=max_arity {
        let ones = vec![Value::terminal(level); k];
        let a = c.carrier.apply(&ones, bound);
        let r = c.reference.apply(&ones, bound);
        truncated |= c.reference.apply(&ones, bound + 1).size() != r.size();
        let (x, y) = (to_globular(&a), to_globular(&r));
        let f = to_glob_map(&(c.alpha)(k), &a);
        let report = trivial_fibration_check(&f, &x, &y, &class);
        let rec = recursive_check(&f, &x, &y, ClassKind::Truncated, level);
        methods_agree &= rec.passed == report.passed;
        let entry = match report.obstruction {
            None => ContractibilityEntry { arity: k, generator: None, cell: None, verdict: "pass".into(), witness: None },
            Some(o) => ContractibilityEntry {
                arity: k,
                generator: Some(o.generator.clone()),
                cell: o.cells.first().cloned(),
                verdict: "fail".into(),
                witness: rec.witness.or(Some(format!("no filler for {}", o.generator))),
            },
        };
        entries.push(entry);
    }
    let contractible = entries.iter().all(|e| e.verdict == "pass");
    let verdict = if contractible {
        format!("contractible up to bound {bound}")
    } else {
        let e = entries.iter().find(|e| e.verdict == "fail").unwrap();
        let gen = e.generator.clone().unwrap_or_default();
        match (&e.cell, &e.witness) {
            (Some(c), _) => format!("not contractible: arity {} fails {gen} at {c}", e.arity),
            (None, Some(w)) => format!("not contractible: arity {} fails {gen}: {w}", e.arity),
            (None, None) => format!("not contractible: arity {} fails {gen}", e.arity),
        }
    };
    ContractibilityReport { class: class.name, bound, max_arity, contractible, verdict, truncated, methods_agree, entries }
}

/// Both sides of the equivalence between `ψ` being a trivial fibration
/// componentwise and `Γψ` being one against the plus class, each decided
/// by exhaustive lifting search on the given samples.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub class: String,
    pub componentwise: bool,
    pub gamma: bool,
    pub componentwise_witness: Option<String>,
    pub gamma_witness: Option<String>,
}

impl ComparisonReport {
    pub fn agree(&self) -> bool {
        self.componentwise == self.gamma
    }
}

/// `ψ: F → E` between multitensors on sets (identity on the base).
pub fn compare_gamma_fibration(
    l: &LaxMonoidalFunctor,
    kind: ClassKind,
    sets: &[Value],
    max_arity: usize,
    graphs: &[Value],
    bound: usize,
) -> ComparisonReport {
    let class = generators(0, kind, 0);
    let mut out = ComparisonReport { class: class.name.clone(), componentwise: true, gamma: true, componentwise_witness: None, gamma_witness: None };
    'outer: for n in 0..=max_arity {
        for tuple in crate::enriched_graph::tuples(&vec![(0..sets.len()).map(|i| int(i as i64)).collect::<Vec<_>>(); n]) {
            let args: Vec<Value> = tuple.iter().map(|i| sets[i.as_int().unwrap() as usize].clone()).collect();
            let dom = l.from.apply(&args, bound);
            let cod = l.to.apply(&args, bound);
            let f = to_glob_map(&(l.psi)(n), &dom);
            let r = trivial_fibration_check(&f, &to_globular(&dom), &to_globular(&cod), &class);
            if !r.passed {
                out.componentwise = false;
                out.componentwise_witness =
                    Some(format!("arity {n} at sizes {:?}: {}", args.iter().map(|a| a.size()).collect::<Vec<_>>(), r.obstruction.unwrap().generator));
                break 'outer;
            }
        }
    }
    let plus_class = plus(&class);
    let (gf, ge) = (Gamma::new(l.from.clone()), Gamma::new(l.to.clone()));
    let gpsi = gamma_lax_functor(l);
    for g in graphs {
        let dom = gf.apply(g, bound);
        let cod = ge.apply(g, bound);
        let f = to_glob_map(&gpsi, &dom);
        let r = trivial_fibration_check(&f, &to_globular(&dom), &to_globular(&cod), &plus_class);
        if !r.passed {
            out.gamma = false;
            let o = r.obstruction.unwrap();
            out.gamma_witness = Some(format!("{} over {}", o.generator, o.cells.join(", ")));
            break;
        }
    }
    out
}

pub fn describe_cell(addr: &[Term]) -> String {
    show(addr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_zero_class() {
        let c = generators(0, ClassKind::Truncated, 0);
        assert_eq!(c.generators.len(), 2);
        assert_eq!(c.generators[0].source.size(), 0);
        assert_eq!(c.generators[1].source.counts(), vec![2]);
        assert_eq!(c.generators[1].target.counts(), vec![1]);
    }

    #[test]
    fn plus_of_truncated_zero_is_truncated_one() {
        let a = plus(&generators(0, ClassKind::Truncated, 0));
        let b = generators(1, ClassKind::Truncated, 1);
        assert!(classes_isomorphic(&a, &b));
        let c = plus(&generators(0, ClassKind::Plain, 0));
        assert!(classes_isomorphic(&c, &generators(1, ClassKind::Plain, 1)));
        assert!(!classes_isomorphic(&a, &c));
    }

    fn parallel_collapse() -> (GlobularSet, GlobularSet, GlobMap) {
        let mut x = GlobularSet::empty(1);
        x.add(0, atom("a"), None, None);
        x.add(0, atom("b"), None, None);
        x.add(1, atom("f"), Some(atom("a")), Some(atom("b")));
        x.add(1, atom("g"), Some(atom("a")), Some(atom("b")));
        let y = GlobularSet::globe(1, 1);
        let m = GlobMap {
            maps: vec![
                [(atom("a"), atom("s0")), (atom("b"), atom("t0"))].into_iter().collect(),
                [(atom("f"), atom("c1")), (atom("g"), atom("c1"))].into_iter().collect(),
            ],
        };
        (x, y, m)
    }

    #[test]
    fn parallel_edges_collapse() {
        let (x, y, f) = parallel_collapse();
        f.validate(&x, &y).unwrap();
        assert!(trivial_fibration_check(&f, &x, &y, &generators(1, ClassKind::Plain, 1)).passed);
        let r = trivial_fibration_check(&f, &x, &y, &generators(1, ClassKind::Truncated, 1));
        assert!(!r.passed);
        assert_eq!(r.obstruction.unwrap().generator, "boundary 2 -> 1");
        assert!(!recursive_check(&f, &x, &y, ClassKind::Truncated, 1).passed);
        assert!(recursive_check(&f, &x, &y, ClassKind::Plain, 1).passed);
    }

    #[test]
    fn identities_lift_everything() {
        let g = GlobularSet::globe(2, 2);
        let id = GlobMap::identity(&g);
        for kind in [ClassKind::Plain, ClassKind::Truncated] {
            assert!(trivial_fibration_check(&id, &g, &g, &generators(2, kind, 2)).passed);
        }
    }

    #[test]
    fn fibred_collection_fibres() {
        let reference: Mt = Arc::new(crate::multitensor::Product { level: 0 });
        let c = FibredCollection { reference, fibre: Arc::new(|n, _| if n == 2 { 2 } else { 1 }) }.collection();
        let r = contractible_check(&c, 3, 2);
        assert!(!r.contractible);
        assert!(r.methods_agree);
        assert_eq!(r.entries[2].verdict, "fail");
        assert_eq!(r.entries[2].generator.as_deref(), Some("boundary 1 -> 0"));
    }
}
