//! Enriched graphs over iterated bases, morphisms between them, and the
//! colimit and limit toolkit the free constructions consume.
//!
//! A level-0 value is a finite set; a level-`d` value is a graph whose homs
//! are level-`d-1` values, so level `d` values are `d`-globular sets. A hom
//! that is absent from the table is the initial value.

use crate::term::{int, seq, Term};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Set(BTreeSet<Term>),
    Graph(Graph),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Graph {
    pub level: usize,
    pub objects: BTreeSet<Term>,
    /// Only non-initial homs are stored.
    pub homs: BTreeMap<(Term, Term), Value>,
}

impl Graph {
    pub fn new(level: usize) -> Graph {
        assert!(level >= 1, "graphs live at level 1 and above");
        Graph { level, objects: BTreeSet::new(), homs: BTreeMap::new() }
    }

    pub fn add_object(&mut self, o: Term) {
        self.objects.insert(o);
    }

    /// Sets a hom, dropping it when initial. Endpoints are added as objects.
    pub fn set_hom(&mut self, a: Term, b: Term, v: Value) {
        debug_assert_eq!(v.level() + 1, self.level);
        self.objects.insert(a.clone());
        self.objects.insert(b.clone());
        if v.is_initial() {
            self.homs.remove(&(a, b));
        } else {
            self.homs.insert((a, b), v);
        }
    }

    pub fn hom_ref(&self, a: &Term, b: &Term) -> Option<&Value> {
        self.homs.get(&(a.clone(), b.clone()))
    }

    pub fn hom(&self, a: &Term, b: &Term) -> Value {
        self.hom_ref(a, b).cloned().unwrap_or_else(|| Value::initial(self.level - 1))
    }
}

impl Value {
    pub fn set<I: IntoIterator<Item = Term>>(it: I) -> Value {
        Value::Set(it.into_iter().collect())
    }

    pub fn initial(level: usize) -> Value {
        if level == 0 {
            Value::Set(BTreeSet::new())
        } else {
            Value::Graph(Graph::new(level))
        }
    }

    /// One cell in every dimension, named `*`.
    pub fn terminal(level: usize) -> Value {
        let star = crate::term::atom("*");
        if level == 0 {
            return Value::set([star]);
        }
        let mut g = Graph::new(level);
        g.set_hom(star.clone(), star, Value::terminal(level - 1));
        Value::Graph(g)
    }

    pub fn level(&self) -> usize {
        match self {
            Value::Set(_) => 0,
            Value::Graph(g) => g.level,
        }
    }

    pub fn is_initial(&self) -> bool {
        match self {
            Value::Set(s) => s.is_empty(),
            Value::Graph(g) => g.objects.is_empty(),
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Term>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_graph(&self) -> Option<&Graph> {
        match self {
            Value::Graph(g) => Some(g),
            _ => None,
        }
    }

    /// Elements of a set, or objects of a graph.
    pub fn objects(&self) -> Vec<Term> {
        match self {
            Value::Set(s) => s.iter().cloned().collect(),
            Value::Graph(g) => g.objects.iter().cloned().collect(),
        }
    }

    pub fn hom(&self, a: &Term, b: &Term) -> Value {
        match self {
            Value::Set(_) => panic!("sets have no homs"),
            Value::Graph(g) => g.hom(a, b),
        }
    }

    /// Cell addresses: `[x]` for an element or object, and
    /// `[a, b, ..address inside hom(a,b)]` for higher cells.
    pub fn cells(&self) -> Vec<Vec<Term>> {
        let mut out = Vec::new();
        self.collect_cells(&mut Vec::new(), &mut out);
        out
    }

    fn collect_cells(&self, prefix: &mut Vec<Term>, out: &mut Vec<Vec<Term>>) {
        match self {
            Value::Set(s) => {
                for x in s {
                    let mut a = prefix.clone();
                    a.push(x.clone());
                    out.push(a);
                }
            }
            Value::Graph(g) => {
                for o in &g.objects {
                    let mut a = prefix.clone();
                    a.push(o.clone());
                    out.push(a);
                }
                for ((a, b), h) in &g.homs {
                    prefix.push(a.clone());
                    prefix.push(b.clone());
                    h.collect_cells(prefix, out);
                    prefix.pop();
                    prefix.pop();
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Value::Set(s) => s.len(),
            Value::Graph(g) => g.objects.len() + g.homs.values().map(|h| h.size()).sum::<usize>(),
        }
    }

    /// Number of cells in each dimension `0..=level`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.level() + 1];
        for a in self.cells() {
            c[(a.len() - 1) / 2] += 1;
        }
        c
    }

    pub fn contains(&self, addr: &[Term]) -> bool {
        match (self, addr.len()) {
            (Value::Set(s), 1) => s.contains(&addr[0]),
            (Value::Graph(g), 1) => g.objects.contains(&addr[0]),
            (Value::Graph(g), n) if n >= 3 => {
                g.hom_ref(&addr[0], &addr[1]).is_some_and(|h| h.contains(&addr[2..]))
            }
            _ => false,
        }
    }

    /// Builds a value from cell addresses; endpoints of higher cells are
    /// added as objects.
    pub fn from_cells<'a, I: IntoIterator<Item = &'a [Term]>>(level: usize, addrs: I) -> Value {
        if level == 0 {
            return Value::set(addrs.into_iter().map(|a| {
                assert_eq!(a.len(), 1, "set elements have one-term addresses");
                a[0].clone()
            }));
        }
        let mut g = Graph::new(level);
        let mut inner: BTreeMap<(Term, Term), Vec<&[Term]>> = BTreeMap::new();
        for a in addrs {
            if a.len() == 1 {
                g.objects.insert(a[0].clone());
            } else {
                g.objects.insert(a[0].clone());
                g.objects.insert(a[1].clone());
                inner.entry((a[0].clone(), a[1].clone())).or_default().push(&a[2..]);
            }
        }
        for ((a, b), rest) in inner {
            g.set_hom(a, b, Value::from_cells(level - 1, rest));
        }
        Value::Graph(g)
    }

    /// Union of values whose cells are already disjointly named.
    pub fn union(level: usize, parts: &[Value]) -> Value {
        let cells: Vec<Vec<Term>> = parts.iter().flat_map(|p| p.cells()).collect();
        Value::from_cells(level, cells.iter().map(|c| c.as_slice()))
    }

    /// Keeps the cells whose address satisfies `keep`, closing under
    /// endpoints so the result is a sub-value.
    pub fn filter(&self, keep: &dyn Fn(&[Term]) -> bool) -> Value {
        let kept: Vec<Vec<Term>> = self.cells().into_iter().filter(|a| keep(a)).collect();
        Value::from_cells(self.level(), kept.iter().map(|c| c.as_slice()))
    }

    /// Tagged coproduct: the `i`-th summand's cells are wrapped as `[i, t]`.
    pub fn coproduct(level: usize, parts: &[Value]) -> (Value, Vec<Morphism>) {
        let injs: Vec<Morphism> = (0..parts.len()).map(Morphism::injection).collect();
        let images: Vec<Value> = parts.iter().zip(&injs).map(|(p, m)| m.image(p)).collect();
        (Value::union(level, &images), injs)
    }

    /// Cartesian product with tuple-named cells.
    pub fn product(level: usize, parts: &[Value]) -> Value {
        if level == 0 {
            let sets: Vec<Vec<Term>> = parts.iter().map(|p| p.objects()).collect();
            return Value::set(tuples(&sets).into_iter().map(seq));
        }
        let objs: Vec<Vec<Term>> = parts.iter().map(|p| p.objects()).collect();
        let all = tuples(&objs);
        let mut g = Graph::new(level);
        for o in &all {
            g.add_object(seq(o.clone()));
        }
        // only pairs of tuples joined by non-initial homs in every component
        let mut out_edges: Vec<BTreeMap<&Term, Vec<(&Term, &Value)>>> = vec![BTreeMap::new(); parts.len()];
        for (i, p) in parts.iter().enumerate() {
            let pg = p.as_graph().expect("product of graphs");
            for ((x, y), h) in &pg.homs {
                out_edges[i].entry(x).or_default().push((y, h));
            }
        }
        for a in &all {
            let mut partial: Vec<(Vec<Term>, Vec<Value>)> = vec![(vec![], vec![])];
            for (i, x) in a.iter().enumerate() {
                let Some(next) = out_edges[i].get(x) else {
                    partial.clear();
                    break;
                };
                partial = partial
                    .iter()
                    .flat_map(|(bs, hs)| {
                        next.iter().map(move |(y, h)| {
                            let (mut bs, mut hs) = (bs.clone(), hs.clone());
                            bs.push((*y).clone());
                            hs.push((*h).clone());
                            (bs, hs)
                        })
                    })
                    .collect();
            }
            for (b, homs) in partial {
                g.set_hom(seq(a.clone()), seq(b), Value::product(level - 1, &homs));
            }
        }
        Value::Graph(g)
    }

    /// Pullback of `f: x -> z` and `g: y -> z`, with cells named `[xc, yc]`.
    pub fn pullback(f: &Morphism, x: &Value, g: &Morphism, y: &Value) -> Value {
        match (x, y) {
            (Value::Set(xs), Value::Set(ys)) => Value::set(xs.iter().flat_map(|a| {
                let fa = f.obj(a);
                ys.iter().filter(move |b| g.obj(b) == fa).map(move |b| seq(vec![a.clone(), b.clone()]))
            })),
            (Value::Graph(xg), Value::Graph(yg)) => {
                let mut out = Graph::new(xg.level);
                let pairs: Vec<(Term, Term)> = xg
                    .objects
                    .iter()
                    .flat_map(|a| {
                        let fa = f.obj(a);
                        yg.objects.iter().filter(move |c| g.obj(c) == fa).map(move |c| (a.clone(), c.clone()))
                    })
                    .collect();
                for (a, c) in &pairs {
                    out.add_object(seq(vec![a.clone(), c.clone()]));
                }
                for (a1, c1) in &pairs {
                    for (a2, c2) in &pairs {
                        let (hx, hy) = (xg.hom(a1, a2), yg.hom(c1, c2));
                        if hx.is_initial() || hy.is_initial() {
                            continue;
                        }
                        let h = Value::pullback(&f.hom(a1, a2), &hx, &g.hom(c1, c2), &hy);
                        out.set_hom(seq(vec![a1.clone(), c1.clone()]), seq(vec![a2.clone(), c2.clone()]), h);
                    }
                }
                Value::Graph(out)
            }
            _ => panic!("pullback of values at different levels"),
        }
    }
}

/// All tuples picking one entry from each list.
pub fn tuples(lists: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for t in &out {
            for x in l {
                let mut u = t.clone();
                u.push(x.clone());
                next.push(u);
            }
        }
        out = next;
    }
    out
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct HomEntry<'a> {
            source: &'a Term,
            target: &'a Term,
            value: &'a Value,
        }
        #[derive(Serialize)]
        struct GraphOut<'a> {
            level: usize,
            objects: Vec<&'a Term>,
            homs: Vec<HomEntry<'a>>,
        }
        match self {
            Value::Set(xs) => s.collect_seq(xs.iter()),
            Value::Graph(g) => GraphOut {
                level: g.level,
                objects: g.objects.iter().collect(),
                homs: g
                    .homs
                    .iter()
                    .map(|((a, b), v)| HomEntry { source: a, target: b, value: v })
                    .collect(),
            }
            .serialize(s),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Set(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            Value::Graph(g) => {
                write!(f, "graph(")?;
                for (i, o) in g.objects.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{o}")?;
                }
                for ((a, b), h) in &g.homs {
                    write!(f, "; {a}->{b}: {h}")?;
                }
                write!(f, ")")
            }
        }
    }
}

type ObjFn = dyn Fn(&Term) -> Term + Send + Sync;
type HomFn = dyn Fn(&Term, &Term) -> Morphism + Send + Sync;

/// A morphism of values at any level, given by its action on objects and,
/// for each pair of objects, the induced morphism of homs. Natural
/// transformations whose components do not depend on the object are single
/// morphisms in this representation.
#[derive(Clone)]
pub enum Morphism {
    Id,
    Map { obj: Arc<ObjFn>, hom: Arc<HomFn> },
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Morphism::Id => write!(f, "Id"),
            Morphism::Map { .. } => write!(f, "Map"),
        }
    }
}

impl Morphism {
    pub fn new(
        obj: impl Fn(&Term) -> Term + Send + Sync + 'static,
        hom: impl Fn(&Term, &Term) -> Morphism + Send + Sync + 'static,
    ) -> Morphism {
        Morphism::Map { obj: Arc::new(obj), hom: Arc::new(hom) }
    }

    /// A function of sets; its hom part is never consulted.
    pub fn func(obj: impl Fn(&Term) -> Term + Send + Sync + 'static) -> Morphism {
        Morphism::new(obj, |_, _| Morphism::Id)
    }

    /// The same term function in every dimension.
    pub fn uniform(f: impl Fn(&Term) -> Term + Send + Sync + 'static) -> Morphism {
        fn build(f: Arc<ObjFn>) -> Morphism {
            let g = f.clone();
            Morphism::Map { obj: f, hom: Arc::new(move |_, _| build(g.clone())) }
        }
        build(Arc::new(f))
    }

    /// Object function plus a hom function that does not look at the hom's
    /// endpoints; convenient for object-fixing constructions.
    pub fn object_fixing(hom: impl Fn(&Term, &Term) -> Morphism + Send + Sync + 'static) -> Morphism {
        Morphism::new(|t| t.clone(), hom)
    }

    pub fn obj(&self, t: &Term) -> Term {
        match self {
            Morphism::Id => t.clone(),
            Morphism::Map { obj, .. } => obj(t),
        }
    }

    pub fn hom(&self, a: &Term, b: &Term) -> Morphism {
        match self {
            Morphism::Id => Morphism::Id,
            Morphism::Map { hom, .. } => hom(a, b),
        }
    }

    pub fn is_id(&self) -> bool {
        matches!(self, Morphism::Id)
    }

    /// `g ∘ f`.
    pub fn compose(g: &Morphism, f: &Morphism) -> Morphism {
        match (g, f) {
            (Morphism::Id, _) => f.clone(),
            (_, Morphism::Id) => g.clone(),
            _ => {
                let (g1, f1, g2, f2) = (g.clone(), f.clone(), g.clone(), f.clone());
                Morphism::new(
                    move |t| g1.obj(&f1.obj(t)),
                    move |a, b| Morphism::compose(&g2.hom(&f2.obj(a), &f2.obj(b)), &f2.hom(a, b)),
                )
            }
        }
    }

    /// Composite of a chain applied left to right.
    pub fn chain(ms: &[Morphism]) -> Morphism {
        ms.iter().fold(Morphism::Id, |acc, m| Morphism::compose(m, &acc))
    }

    pub fn then(&self, g: &Morphism) -> Morphism {
        Morphism::compose(g, self)
    }

    /// Tuple-valued map: output component `k` is `parts[k].1` applied to
    /// input component `parts[k].0`.
    pub fn tuple(parts: Vec<(usize, Morphism)>) -> Morphism {
        let parts = Arc::new(parts);
        let p2 = parts.clone();
        Morphism::new(
            move |t| {
                let xs = components(t);
                seq(parts.iter().map(|(i, m)| m.obj(&xs[*i])).collect())
            },
            move |a, b| {
                let (xa, xb) = (components(a), components(b));
                Morphism::tuple(p2.iter().map(|(i, m)| (*i, m.hom(&xa[*i], &xb[*i]))).collect())
            },
        )
    }

    /// `t ↦ [m_0(t), …, m_k(t)]`.
    pub fn fanout(ms: Vec<Morphism>) -> Morphism {
        let ms = Arc::new(ms);
        let m2 = ms.clone();
        Morphism::new(
            move |t| seq(ms.iter().map(|m| m.obj(t)).collect()),
            move |a, b| Morphism::fanout(m2.iter().map(|m| m.hom(a, b)).collect()),
        )
    }

    /// A morphism chosen per cell from the cell itself, with hom maps chosen
    /// from the source cell. Used for maps defined summand by summand.
    pub fn by_source(pick: impl Fn(&Term) -> Morphism + Send + Sync + 'static) -> Morphism {
        let pick = Arc::new(pick);
        let p2 = pick.clone();
        Morphism::new(move |t| pick(t).obj(t), move |a, b| p2(a).hom(a, b))
    }

    /// Componentwise product of morphisms on tuples.
    pub fn product(fs: Vec<Morphism>) -> Morphism {
        if fs.iter().all(|f| f.is_id()) {
            return Morphism::Id;
        }
        Morphism::tuple(fs.into_iter().enumerate().collect())
    }

    pub fn proj(j: usize) -> Morphism {
        Morphism::uniform(move |t| components(t)[j].clone())
    }

    /// `x ↦ [x]`.
    pub fn wrap() -> Morphism {
        Morphism::uniform(|t| seq(vec![t.clone()]))
    }

    /// `[x] ↦ x`.
    pub fn unwrap() -> Morphism {
        Morphism::uniform(|t| {
            let xs = components(t);
            assert_eq!(xs.len(), 1, "unwrap expects a singleton tuple, got {t}");
            xs[0].clone()
        })
    }

    /// Tuple of tuples to the concatenated tuple.
    pub fn flatten() -> Morphism {
        Morphism::uniform(|t| seq(components(t).iter().flat_map(|x| components(x).to_vec()).collect()))
    }

    /// Coproduct injection `t ↦ [i, t]`.
    pub fn injection(i: usize) -> Morphism {
        Morphism::uniform(move |t| seq(vec![int(i as i64), t.clone()]))
    }

    /// `t ↦ <xs|t>`.
    pub fn tag(xs: Vec<Term>) -> Morphism {
        Morphism::uniform(move |t| crate::term::cell(xs.clone(), t.clone()))
    }

    /// `<xs|t> ↦ t`.
    pub fn untag() -> Morphism {
        Morphism::uniform(|t| match t {
            Term::Cell(_, body) => (**body).clone(),
            other => panic!("untag expects a tagged cell, got {other}"),
        })
    }

    /// A map given by explicit tables. Missing objects are a programming
    /// error; missing homs are treated as maps out of the initial value.
    pub fn table(objs: BTreeMap<Term, Term>, homs: BTreeMap<(Term, Term), Morphism>) -> Morphism {
        let objs = Arc::new(objs);
        let homs = Arc::new(homs);
        Morphism::new(
            move |t| objs.get(t).cloned().unwrap_or_else(|| panic!("no table entry for {t}")),
            move |a, b| homs.get(&(a.clone(), b.clone())).cloned().unwrap_or(Morphism::Id),
        )
    }

    /// A map of sets given by a table.
    pub fn set_table(objs: BTreeMap<Term, Term>) -> Morphism {
        Morphism::table(objs, BTreeMap::new())
    }

    /// Image of a cell address.
    pub fn map_address(&self, addr: &[Term]) -> Vec<Term> {
        if addr.len() == 1 {
            return vec![self.obj(&addr[0])];
        }
        let (a, b) = (&addr[0], &addr[1]);
        let mut out = vec![self.obj(a), self.obj(b)];
        out.extend(self.hom(a, b).map_address(&addr[2..]));
        out
    }

    /// Image of every cell of `v`.
    pub fn image(&self, v: &Value) -> Value {
        let cells: Vec<Vec<Term>> = v.cells().iter().map(|a| self.map_address(a)).collect();
        Value::from_cells(v.level(), cells.iter().map(|c| c.as_slice()))
    }

    /// Tabulates this morphism on the cells of `v`, producing an equivalent
    /// finite map.
    pub fn tabulate(&self, v: &Value) -> Morphism {
        match v {
            Value::Set(xs) => Morphism::set_table(xs.iter().map(|x| (x.clone(), self.obj(x))).collect()),
            Value::Graph(g) => {
                let objs = g.objects.iter().map(|o| (o.clone(), self.obj(o))).collect();
                let homs = g
                    .homs
                    .iter()
                    .map(|((a, b), h)| ((a.clone(), b.clone()), self.hom(a, b).tabulate(h)))
                    .collect();
                Morphism::table(objs, homs)
            }
        }
    }
}

/// Components of a tuple term.
pub fn components(t: &Term) -> &[Term] {
    t.as_seq().unwrap_or_else(|| panic!("expected a tuple, got {t}"))
}

/// First cell of `dom` at which `f` and `g` differ.
pub fn morphisms_disagree(f: &Morphism, g: &Morphism, dom: &Value) -> Option<Vec<Term>> {
    dom.cells().into_iter().find(|a| f.map_address(a) != g.map_address(a))
}

/// Checks that `f` sends every cell of `dom` into `cod` and preserves
/// endpoints (the latter is automatic for address-based images).
pub fn maps_into(f: &Morphism, dom: &Value, cod: &Value) -> bool {
    dom.cells().iter().all(|a| cod.contains(&f.map_address(a)))
}

/// A graph with two chosen objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipointed {
    pub graph: Value,
    pub start: Term,
    pub end: Term,
}

/// The sequence graph `(Z1..Zn)`: objects `0..=n`, hom `(i-1,i)` is `Zi`,
/// bipointed at `(0, n)`. `level` is the level of the `Zi`.
pub fn sequence_graph(level: usize, zs: &[Value]) -> Bipointed {
    let mut g = Graph::new(level + 1);
    g.add_object(int(0));
    for (i, z) in zs.iter().enumerate() {
        assert_eq!(z.level(), level);
        g.set_hom(int(i as i64), int(i as i64 + 1), z.clone());
    }
    Bipointed { graph: Value::Graph(g), start: int(0), end: int(zs.len() as i64) }
}

/// Inclusion of the sequence graph of `zs[a..b]` into that of `zs`.
pub fn subsequence_inclusion(a: usize) -> Morphism {
    Morphism::new(move |t| int(t.as_int().expect("sequence object") + a as i64), |_, _| Morphism::Id)
}

/// Iterated pushout under the one-object graph with initial hom, gluing the
/// end of each summand to the start of the next. Objects are renumbered
/// `0..` in summand order; a glued object's self-hom is the tagged
/// coproduct of the two self-homs when both are present.
pub fn join(ps: &[Bipointed]) -> Bipointed {
    assert!(!ps.is_empty(), "join of an empty list");
    let level = ps[0].graph.level();
    let mut names: Vec<BTreeMap<Term, Term>> = Vec::new();
    let mut next = 0i64;
    let mut glued_prev: Option<Term> = None;
    for p in ps {
        let mut m = BTreeMap::new();
        if let Some(g) = glued_prev.take() {
            m.insert(p.start.clone(), g);
        }
        for o in p.graph.objects() {
            if !m.contains_key(&o) {
                m.insert(o.clone(), int(next));
                next += 1;
            }
        }
        glued_prev = Some(m[&p.end].clone());
        names.push(m);
    }
    // homs of the glued graph, collecting the two contributions at glue points
    let mut homs: BTreeMap<(Term, Term), Vec<(usize, &Value)>> = BTreeMap::new();
    for (i, p) in ps.iter().enumerate() {
        let g = p.graph.as_graph().expect("join of graphs");
        for ((a, b), h) in &g.homs {
            let key = (names[i][a].clone(), names[i][b].clone());
            homs.entry(key).or_default().push((i, h));
        }
    }
    let mut out = Graph::new(level);
    for m in &names {
        for o in m.values() {
            out.add_object(o.clone());
        }
    }
    for ((a, b), parts) in homs {
        // only glued self-homs receive two contributions; those are tagged
        let v = if parts.len() == 1 {
            parts[0].1.clone()
        } else {
            let tagged: Vec<Value> = parts.iter().map(|(i, h)| Morphism::injection(*i).image(h)).collect();
            Value::union(level - 1, &tagged)
        };
        out.set_hom(a, b, v);
    }
    let start = names[0][&ps[0].start].clone();
    let end = names[ps.len() - 1][&ps[ps.len() - 1].end].clone();
    Bipointed { graph: Value::Graph(out), start, end }
}

/// `x*X = (X(x0,x1), …, X(x_{n-1},x_n))` together with the map
/// `x̄: x*X → X` sending `i ↦ x_i` with identity hom maps.
pub fn fiber_map(x: &Value, xs: &[Term]) -> Result<(Bipointed, Morphism), crate::Error> {
    let g = x.as_graph().ok_or_else(|| crate::Error::Invalid("fiber_map needs a graph".into()))?;
    if xs.is_empty() {
        return Err(crate::Error::Invalid("fiber_map needs a non-empty object sequence".into()));
    }
    for o in xs {
        if !g.objects.contains(o) {
            return Err(crate::Error::Invalid(format!("{o} is not an object")));
        }
    }
    let homs: Vec<Value> = xs.windows(2).map(|w| g.hom(&w[0], &w[1])).collect();
    let sg = sequence_graph(g.level - 1, &homs);
    let xs2 = xs.to_vec();
    let bar = Morphism::new(
        move |t| xs2[t.as_int().expect("sequence object") as usize].clone(),
        |_, _| Morphism::Id,
    );
    Ok((sg, bar))
}

/// Partition of objects into connected components, joining `a` and `b`
/// whenever `X(a,b)` is not initial.
pub fn connected_components(x: &Value) -> Vec<Vec<Term>> {
    let g = x.as_graph().expect("components of a graph");
    let objs: Vec<Term> = g.objects.iter().cloned().collect();
    let index: BTreeMap<&Term, usize> = objs.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let mut uf = crate::unionfind::UnionFind::new(objs.len());
    for (a, b) in g.homs.keys() {
        uf.union(index[a], index[b]);
    }
    let mut blocks: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
    for (i, o) in objs.iter().enumerate() {
        blocks.entry(uf.find(i)).or_default().push(o.clone());
    }
    let mut out: Vec<Vec<Term>> = blocks.into_values().collect();
    out.sort();
    out
}

/// Whether two finite values are isomorphic, by backtracking over object
/// bijections that respect hom isomorphism classes.
pub fn isomorphic(x: &Value, y: &Value) -> bool {
    find_iso(x, y).is_some()
}

/// An isomorphism `x → y` as a tabulated morphism, if one exists.
pub fn find_iso(x: &Value, y: &Value) -> Option<Morphism> {
    if x.level() != y.level() || x.counts() != y.counts() {
        return None;
    }
    match (x, y) {
        (Value::Set(a), Value::Set(b)) => {
            Some(Morphism::set_table(a.iter().cloned().zip(b.iter().cloned()).collect()))
        }
        (Value::Graph(gx), Value::Graph(gy)) => {
            let xo: Vec<Term> = gx.objects.iter().cloned().collect();
            let yo: Vec<Term> = gy.objects.iter().cloned().collect();
            let sig = |g: &Graph, o: &Term| -> (Vec<usize>, Vec<usize>, Vec<usize>) {
                let mut outs: Vec<usize> = Vec::new();
                let mut ins: Vec<usize> = Vec::new();
                let mut lp = Vec::new();
                for ((a, b), h) in &g.homs {
                    if a == o && b == o {
                        lp.push(h.size());
                    } else if a == o {
                        outs.push(h.size());
                    } else if b == o {
                        ins.push(h.size());
                    }
                }
                outs.sort();
                ins.sort();
                (outs, ins, lp)
            };
            let xs: Vec<_> = xo.iter().map(|o| sig(gx, o)).collect();
            let ys: Vec<_> = yo.iter().map(|o| sig(gy, o)).collect();
            let mut assign: Vec<Option<usize>> = vec![None; xo.len()];
            let mut used = vec![false; yo.len()];
            fn go(
                i: usize,
                xo: &[Term],
                yo: &[Term],
                xs: &[(Vec<usize>, Vec<usize>, Vec<usize>)],
                ys: &[(Vec<usize>, Vec<usize>, Vec<usize>)],
                gx: &Graph,
                gy: &Graph,
                assign: &mut Vec<Option<usize>>,
                used: &mut Vec<bool>,
            ) -> bool {
                if i == xo.len() {
                    return true;
                }
                for j in 0..yo.len() {
                    if used[j] || xs[i] != ys[j] {
                        continue;
                    }
                    // homs between i and already assigned objects must match
                    let ok = (0..=i).all(|k| {
                        let jk = if k == i { j } else { assign[k].unwrap() };
                        isomorphic(&gx.hom(&xo[i], &xo[k]), &gy.hom(&yo[j], &yo[jk]))
                            && isomorphic(&gx.hom(&xo[k], &xo[i]), &gy.hom(&yo[jk], &yo[j]))
                    });
                    if !ok {
                        continue;
                    }
                    assign[i] = Some(j);
                    used[j] = true;
                    if go(i + 1, xo, yo, xs, ys, gx, gy, assign, used) {
                        return true;
                    }
                    assign[i] = None;
                    used[j] = false;
                }
                false
            }
            if !go(0, &xo, &yo, &xs, &ys, gx, gy, &mut assign, &mut used) {
                return None;
            }
            let objs: BTreeMap<Term, Term> =
                xo.iter().enumerate().map(|(i, o)| (o.clone(), yo[assign[i].unwrap()].clone())).collect();
            let mut homs = BTreeMap::new();
            for ((a, b), h) in &gx.homs {
                let iso = find_iso(h, &gy.hom(&objs[a], &objs[b]))?;
                homs.insert((a.clone(), b.clone()), iso);
            }
            Some(Morphism::table(objs, homs))
        }
        _ => None,
    }
}

/// The base categories enriched graphs are built over: finite sets and,
/// recursively, enriched graphs over a base.
pub trait Base {
    fn level(&self) -> usize;

    fn initial(&self) -> Value {
        Value::initial(self.level())
    }

    fn terminal(&self) -> Value {
        Value::terminal(self.level())
    }

    fn is_initial(&self, v: &Value) -> bool {
        v.is_initial()
    }

    fn coproduct(&self, parts: &[Value]) -> (Value, Vec<Morphism>) {
        Value::coproduct(self.level(), parts)
    }

    /// Pullback object with its two projections.
    fn pullback(&self, f: &Morphism, x: &Value, g: &Morphism, y: &Value) -> (Value, Morphism, Morphism) {
        (Value::pullback(f, x, g, y), Morphism::proj(0), Morphism::proj(1))
    }
}

/// `𝒢ⁿSet`: finite sets for `n = 0`, `n`-globular sets in graph form above.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlobularBase(pub usize);

impl Base for GlobularBase {
    fn level(&self) -> usize {
        self.0
    }
}
