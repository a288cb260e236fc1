//! Finite categories, finite presheaves, the plus construction, and
//! globular sets in presheaf and graph form.

use crate::enriched_graph::{Graph, Value};
use crate::term::{atom, seq, Term};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arrow {
    pub id: Term,
    pub source: Term,
    pub target: Term,
}

/// Composition is stored as `(g, f) ↦ g∘f` for `f: a → b`, `g: b → c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    pub objects: Vec<Term>,
    pub arrows: Vec<Arrow>,
    pub compose: BTreeMap<(Term, Term), Term>,
    pub identities: BTreeMap<Term, Term>,
}

impl FiniteCategory {
    pub fn empty() -> FiniteCategory {
        FiniteCategory { objects: vec![], arrows: vec![], compose: BTreeMap::new(), identities: BTreeMap::new() }
    }

    pub fn arrow(&self, f: &Term) -> Option<&Arrow> {
        self.arrows.iter().find(|a| &a.id == f)
    }

    pub fn source(&self, f: &Term) -> &Term {
        &self.arrow(f).expect("known arrow").source
    }

    pub fn target(&self, f: &Term) -> &Term {
        &self.arrow(f).expect("known arrow").target
    }

    pub fn hom(&self, a: &Term, b: &Term) -> Vec<Term> {
        self.arrows.iter().filter(|x| &x.source == a && &x.target == b).map(|x| x.id.clone()).collect()
    }

    /// `g∘f`.
    pub fn comp(&self, g: &Term, f: &Term) -> Option<&Term> {
        self.compose.get(&(g.clone(), f.clone()))
    }

    /// Checks endpoints, identities, totality, unit and associativity.
    pub fn validate(&self) -> Result<()> {
        let objs: BTreeSet<&Term> = self.objects.iter().collect();
        let mut ids = BTreeSet::new();
        for a in &self.arrows {
            if !objs.contains(&a.source) || !objs.contains(&a.target) {
                return Err(Error::Invalid(format!("arrow {} has an unknown endpoint", a.id)));
            }
            if !ids.insert(&a.id) {
                return Err(Error::Invalid(format!("arrow {} is declared twice", a.id)));
            }
        }
        for o in &self.objects {
            let i = self.identities.get(o).ok_or_else(|| Error::Invalid(format!("object {o} has no identity")))?;
            let a = self.arrow(i).ok_or_else(|| Error::Invalid(format!("identity {i} is not an arrow")))?;
            if &a.source != o || &a.target != o {
                return Err(Error::Invalid(format!("identity {i} is not a loop on {o}")));
            }
        }
        for f in &self.arrows {
            for g in &self.arrows {
                if f.target != g.source {
                    continue;
                }
                let h = self
                    .comp(&g.id, &f.id)
                    .ok_or_else(|| Error::Invalid(format!("composite {}∘{} is missing", g.id, f.id)))?;
                let ha = self.arrow(h).ok_or_else(|| Error::Invalid(format!("composite {h} is not an arrow")))?;
                if ha.source != f.source || ha.target != g.target {
                    return Err(Error::Invalid(format!("composite {}∘{} = {h} has wrong endpoints", g.id, f.id)));
                }
            }
        }
        for f in &self.arrows {
            let (ia, ib) = (&self.identities[&f.source], &self.identities[&f.target]);
            if self.comp(&f.id, ia) != Some(&f.id) || self.comp(ib, &f.id) != Some(&f.id) {
                return Err(Error::Invalid(format!("identity laws fail at {}", f.id)));
            }
        }
        for f in &self.arrows {
            for g in self.arrows.iter().filter(|g| g.source == f.target) {
                for h in self.arrows.iter().filter(|h| h.source == g.target) {
                    let l = self.comp(&h.id, self.comp(&g.id, &f.id).unwrap());
                    let r = self.comp(self.comp(&h.id, &g.id).unwrap(), &f.id);
                    if l != r {
                        return Err(Error::Invalid(format!("associativity fails at {}, {}, {}", h.id, g.id, f.id)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Underlying graph: one edge per arrow, identities included.
    pub fn underlying_graph(&self) -> Value {
        let mut g = Graph::new(1);
        for o in &self.objects {
            g.add_object(o.clone());
        }
        let mut homs: BTreeMap<(Term, Term), BTreeSet<Term>> = BTreeMap::new();
        for a in &self.arrows {
            homs.entry((a.source.clone(), a.target.clone())).or_default().insert(a.id.clone());
        }
        for ((a, b), es) in homs {
            g.set_hom(a, b, Value::Set(es));
        }
        Value::Graph(g)
    }

    /// Cartesian product with objects and arrows named by pairs.
    pub fn product(&self, other: &FiniteCategory) -> FiniteCategory {
        let pair = |a: &Term, b: &Term| seq(vec![a.clone(), b.clone()]);
        let mut c = FiniteCategory::empty();
        for a in &self.objects {
            for b in &other.objects {
                c.objects.push(pair(a, b));
                c.identities.insert(pair(a, b), pair(&self.identities[a], &other.identities[b]));
            }
        }
        for f in &self.arrows {
            for g in &other.arrows {
                c.arrows.push(Arrow {
                    id: pair(&f.id, &g.id),
                    source: pair(&f.source, &g.source),
                    target: pair(&f.target, &g.target),
                });
            }
        }
        for ((f2, f1), f) in &self.compose {
            for ((g2, g1), g) in &other.compose {
                c.compose.insert((pair(f2, g2), pair(f1, g1)), pair(f, g));
            }
        }
        c
    }
}

/// Isomorphism of finite categories by backtracking over object and arrow
/// bijections, pruned by arrow invariants and composition consistency.
pub fn categories_isomorphic(x: &FiniteCategory, y: &FiniteCategory) -> bool {
    if x.objects.len() != y.objects.len() || x.arrows.len() != y.arrows.len() {
        return false;
    }
    fn sig(c: &FiniteCategory, f: &Arrow) -> (bool, bool, bool, usize, usize, usize) {
        let is_id = c.identities.get(&f.source) == Some(&f.id);
        let endo = f.source == f.target;
        let idem = endo && c.comp(&f.id, &f.id) == Some(&f.id);
        let factor = c.compose.values().filter(|h| **h == f.id).count();
        (is_id, endo, idem, factor, c.hom(&f.source, &f.target).len(), c.hom(&f.target, &f.source).len())
    }
    let xs: Vec<_> = x.arrows.iter().map(|f| sig(x, f)).collect();
    let ys: Vec<_> = y.arrows.iter().map(|f| sig(y, f)).collect();
    let mut a = xs.clone();
    let mut b = ys.clone();
    a.sort();
    b.sort();
    if a != b {
        return false;
    }
    // order arrows so identities and constrained arrows come first
    let mut order: Vec<usize> = (0..x.arrows.len()).collect();
    order.sort_by_key(|&i| (!xs[i].0, std::cmp::Reverse(xs[i].3)));
    struct St<'a> {
        x: &'a FiniteCategory,
        y: &'a FiniteCategory,
        xs: Vec<(bool, bool, bool, usize, usize, usize)>,
        ys: Vec<(bool, bool, bool, usize, usize, usize)>,
        order: Vec<usize>,
        amap: BTreeMap<Term, Term>,
        used: BTreeSet<Term>,
        omap: BTreeMap<Term, Term>,
        oused: BTreeSet<Term>,
    }
    fn consistent(st: &St) -> bool {
        for ((g, f), h) in &st.x.compose {
            if let (Some(g2), Some(f2), Some(h2)) = (st.amap.get(g), st.amap.get(f), st.amap.get(h)) {
                if st.y.comp(g2, f2) != Some(h2) {
                    return false;
                }
            } else if let (Some(g2), Some(f2)) = (st.amap.get(g), st.amap.get(f)) {
                let h2 = st.y.comp(g2, f2).unwrap();
                if st.used.contains(h2) && st.amap.get(h) != Some(h2) {
                    return false;
                }
            }
        }
        true
    }
    fn go(st: &mut St, k: usize) -> bool {
        if k == st.order.len() {
            return true;
        }
        let i = st.order[k];
        let f = st.x.arrows[i].clone();
        for j in 0..st.y.arrows.len() {
            let g = st.y.arrows[j].clone();
            if st.used.contains(&g.id) || st.xs[i] != st.ys[j] {
                continue;
            }
            let mut added = Vec::new();
            let mut ok = true;
            for (p, q) in [(&f.source, &g.source), (&f.target, &g.target)] {
                match st.omap.get(p) {
                    Some(q2) if q2 != q => ok = false,
                    Some(_) => {}
                    None => {
                        if st.oused.contains(q) {
                            ok = false;
                        } else {
                            st.omap.insert(p.clone(), q.clone());
                            st.oused.insert(q.clone());
                            added.push(p.clone());
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                st.amap.insert(f.id.clone(), g.id.clone());
                st.used.insert(g.id.clone());
                if consistent(st) && go(st, k + 1) {
                    return true;
                }
                st.amap.remove(&f.id);
                st.used.remove(&g.id);
            }
            for p in added {
                let q = st.omap.remove(&p).unwrap();
                st.oused.remove(&q);
            }
        }
        false
    }
    let mut st = St {
        x,
        y,
        xs,
        ys,
        order,
        amap: BTreeMap::new(),
        used: BTreeSet::new(),
        omap: BTreeMap::new(),
        oused: BTreeSet::new(),
    };
    // isolated objects (only the identity) are covered by identity arrows
    go(&mut st, 0)
}

/// Adjoins a new initial-side object `0` with two arrows `s[c]`, `t[c]`
/// into each old object `c+`, and renames old arrows `f` to `f+`.
pub fn plus_construction(c: &FiniteCategory) -> FiniteCategory {
    let plus = |t: &Term| atom(&format!("{t}+"));
    let zero = atom("0");
    let id0 = atom("1_0");
    let s = |o: &Term| atom(&format!("s[{o}]"));
    let t = |o: &Term| atom(&format!("t[{o}]"));
    let mut out = FiniteCategory::empty();
    out.objects.push(zero.clone());
    out.arrows.push(Arrow { id: id0.clone(), source: zero.clone(), target: zero.clone() });
    out.identities.insert(zero.clone(), id0.clone());
    out.compose.insert((id0.clone(), id0.clone()), id0.clone());
    for o in &c.objects {
        out.objects.push(plus(o));
        out.identities.insert(plus(o), plus(&c.identities[o]));
        for g in [s(o), t(o)] {
            out.arrows.push(Arrow { id: g.clone(), source: zero.clone(), target: plus(o) });
            out.compose.insert((g.clone(), id0.clone()), g.clone());
        }
    }
    for f in &c.arrows {
        out.arrows.push(Arrow { id: plus(&f.id), source: plus(&f.source), target: plus(&f.target) });
        out.compose.insert((plus(&f.id), s(&f.source)), s(&f.target));
        out.compose.insert((plus(&f.id), t(&f.source)), t(&f.target));
    }
    for ((g, f), h) in &c.compose {
        out.compose.insert((plus(g), plus(f)), plus(h));
    }
    out
}

/// The globe category `𝔾≤n`: objects `0..n`, identities `1_k`, and for
/// `j < k` two arrows `s{j}_{k}`, `t{j}_{k}` acting on presheaves as the
/// iterated source and target from dimension `k` down to `j`.
pub fn globe_category(n: usize) -> FiniteCategory {
    let o = |k: usize| atom(&k.to_string());
    let id = |k: usize| atom(&format!("1_{k}"));
    let st = |c: char, j: usize, k: usize| atom(&format!("{c}{j}_{k}"));
    let mut c = FiniteCategory::empty();
    for k in 0..=n {
        c.objects.push(o(k));
        c.arrows.push(Arrow { id: id(k), source: o(k), target: o(k) });
        c.identities.insert(o(k), id(k));
        c.compose.insert((id(k), id(k)), id(k));
    }
    for j in 0..=n {
        for k in j + 1..=n {
            for ch in ['s', 't'] {
                let a = st(ch, j, k);
                c.arrows.push(Arrow { id: a.clone(), source: o(j), target: o(k) });
                c.compose.insert((a.clone(), id(j)), a.clone());
                c.compose.insert((id(k), a.clone()), a.clone());
                for l in k + 1..=n {
                    for ch2 in ['s', 't'] {
                        c.compose.insert((st(ch2, k, l), a.clone()), st(ch, j, l));
                    }
                }
            }
        }
    }
    c
}

/// A presheaf on a finite category: `action[(f, x)]` is `X(f)(x)` for
/// `f: c → d` and `x ∈ X(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePresheaf {
    pub base: FiniteCategory,
    pub fibres: BTreeMap<Term, Vec<Term>>,
    pub action: BTreeMap<(Term, Term), Term>,
}

impl FinitePresheaf {
    pub fn validate(&self) -> Result<()> {
        for f in &self.base.arrows {
            for x in &self.fibres[&f.target] {
                let y = self
                    .action
                    .get(&(f.id.clone(), x.clone()))
                    .ok_or_else(|| Error::Invalid(format!("action of {} on {x} is missing", f.id)))?;
                if !self.fibres[&f.source].contains(y) {
                    return Err(Error::Invalid(format!("action of {} on {x} leaves the fibre", f.id)));
                }
            }
        }
        for (o, i) in &self.base.identities {
            for x in &self.fibres[o] {
                if self.action[&(i.clone(), x.clone())] != *x {
                    return Err(Error::Invalid(format!("identity {i} moves {x}")));
                }
            }
        }
        for ((g, f), h) in &self.base.compose {
            for x in &self.fibres[self.base.target(g)] {
                let lhs = &self.action[&(h.clone(), x.clone())];
                let rhs = &self.action[&(f.clone(), self.action[&(g.clone(), x.clone())].clone())];
                if lhs != rhs {
                    return Err(Error::Invalid(format!("functoriality fails for {g}∘{f} at {x}")));
                }
            }
        }
        Ok(())
    }
}

/// An `n`-globular set in presheaf form: cells per dimension with source
/// and target maps (`src[k]` sends `k`-cells to `(k-1)`-cells).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobularSet {
    pub dim: usize,
    pub cells: Vec<Vec<Term>>,
    pub src: Vec<BTreeMap<Term, Term>>,
    pub tgt: Vec<BTreeMap<Term, Term>>,
}

impl GlobularSet {
    pub fn empty(dim: usize) -> GlobularSet {
        GlobularSet { dim, cells: vec![vec![]; dim + 1], src: vec![BTreeMap::new(); dim + 1], tgt: vec![BTreeMap::new(); dim + 1] }
    }

    pub fn add(&mut self, k: usize, c: Term, s: Option<Term>, t: Option<Term>) {
        self.cells[k].push(c.clone());
        if k > 0 {
            self.src[k].insert(c.clone(), s.expect("source of a positive-dimensional cell"));
            self.tgt[k].insert(c, t.expect("target of a positive-dimensional cell"));
        }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.len()).collect()
    }

    pub fn size(&self) -> usize {
        self.cells.iter().map(|c| c.len()).sum()
    }

    /// Checks endpoint membership, name uniqueness, and `ss = st`, `ts = tt`.
    pub fn validate(&self) -> Result<()> {
        for k in 0..=self.dim {
            let mut seen = BTreeSet::new();
            for c in &self.cells[k] {
                if !seen.insert(c) {
                    return Err(Error::Invalid(format!("{k}-cell {c} is declared twice")));
                }
                if k == 0 {
                    continue;
                }
                for (m, what) in [(&self.src[k], "source"), (&self.tgt[k], "target")] {
                    let e = m.get(c).ok_or_else(|| Error::Invalid(format!("{k}-cell {c} has no {what}")))?;
                    if !self.cells[k - 1].contains(e) {
                        return Err(Error::Invalid(format!("{what} {e} of {k}-cell {c} is not a {}-cell", k - 1)));
                    }
                }
                if k >= 2 {
                    let (s, t) = (&self.src[k][c], &self.tgt[k][c]);
                    if self.src[k - 1][s] != self.src[k - 1][t] {
                        return Err(Error::Invalid(format!("cell {c} violates ss=st")));
                    }
                    if self.tgt[k - 1][s] != self.tgt[k - 1][t] {
                        return Err(Error::Invalid(format!("cell {c} violates ts=tt")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Graph-form address of a `k`-cell.
    pub fn address(&self, k: usize, c: &Term) -> Vec<Term> {
        let mut out = vec![c.clone()];
        let mut cur = c.clone();
        for j in (1..=k).rev() {
            let (s, t) = (self.src[j][&cur].clone(), self.tgt[j][&cur].clone());
            out.push(t.clone());
            out.push(s.clone());
            cur = s;
        }
        out.reverse();
        out
    }

    /// Graph form: a level-`dim` value with the same cell names.
    pub fn to_graph(&self) -> Value {
        let addrs: Vec<Vec<Term>> =
            (0..=self.dim).flat_map(|k| self.cells[k].iter().map(move |c| self.address(k, c))).collect();
        Value::from_cells(self.dim, addrs.iter().map(|a| a.as_slice()))
    }

    /// Presheaf form of a graph-form value. Cell names are kept when they
    /// are unique in their dimension and replaced by the full address
    /// otherwise.
    pub fn from_graph(v: &Value) -> GlobularSet {
        let dim = v.level();
        let addrs = v.cells();
        let mut by_dim: Vec<Vec<Vec<Term>>> = vec![vec![]; dim + 1];
        for a in addrs {
            by_dim[(a.len() - 1) / 2].push(a);
        }
        let mut names: BTreeMap<Vec<Term>, Term> = BTreeMap::new();
        for cells in &by_dim {
            let mut count: BTreeMap<&Term, usize> = BTreeMap::new();
            for a in cells {
                *count.entry(a.last().unwrap()).or_default() += 1;
            }
            for a in cells {
                let last = a.last().unwrap();
                let name = if count[last] == 1 { last.clone() } else { seq(a.clone()) };
                names.insert(a.clone(), name);
            }
        }
        let mut g = GlobularSet::empty(dim);
        for (k, cells) in by_dim.iter().enumerate() {
            for a in cells {
                let name = names[a].clone();
                if k == 0 {
                    g.add(0, name, None, None);
                } else {
                    // the source and target are the (k-1)-cells whose
                    // addresses share the prefix and end at a[2k-2], a[2k-1]
                    let prefix = &a[..2 * k - 2];
                    let mut sa = prefix.to_vec();
                    sa.push(a[2 * k - 2].clone());
                    let mut ta = prefix.to_vec();
                    ta.push(a[2 * k - 1].clone());
                    g.add(k, name, Some(names[&sa].clone()), Some(names[&ta].clone()));
                }
            }
        }
        g
    }

    /// Presheaf on the globe category.
    pub fn to_presheaf(&self) -> FinitePresheaf {
        let base = globe_category(self.dim);
        let mut fibres = BTreeMap::new();
        let mut action = BTreeMap::new();
        for k in 0..=self.dim {
            fibres.insert(atom(&k.to_string()), self.cells[k].clone());
            for c in &self.cells[k] {
                action.insert((atom(&format!("1_{k}")), c.clone()), c.clone());
                for j in 0..k {
                    // iterated face: one step of the named kind, then sources
                    for (ch, first) in [('s', &self.src), ('t', &self.tgt)] {
                        let mut cur = c.clone();
                        for step in (j + 1..=k).rev() {
                            cur = if step == j + 1 { first[step][&cur].clone() } else { self.src[step][&cur].clone() };
                        }
                        action.insert((atom(&format!("{ch}{j}_{k}")), c.clone()), cur);
                    }
                }
            }
        }
        FinitePresheaf { base, fibres, action }
    }

    /// Reads back a presheaf on `𝔾≤n`.
    pub fn from_presheaf(p: &FinitePresheaf) -> Result<GlobularSet> {
        p.validate()?;
        let dim = p.base.objects.len().checked_sub(1).ok_or_else(|| Error::Invalid("empty base".into()))?;
        let mut g = GlobularSet::empty(dim);
        for k in 0..=dim {
            for c in &p.fibres[&atom(&k.to_string())] {
                if k == 0 {
                    g.add(0, c.clone(), None, None);
                } else {
                    let s = p.action[&(atom(&format!("s{}_{k}", k - 1)), c.clone())].clone();
                    let t = p.action[&(atom(&format!("t{}_{k}", k - 1)), c.clone())].clone();
                    g.add(k, c.clone(), Some(s), Some(t));
                }
            }
        }
        g.validate()?;
        Ok(g)
    }

    /// The representable `k`-globe in an ambient dimension `dim ≥ k`:
    /// cells `s{j}`, `t{j}` below `k` and `c{k}` on top.
    pub fn globe(dim: usize, k: usize) -> GlobularSet {
        let mut g = GlobularSet::boundary(dim, k);
        let top = atom(&format!("c{k}"));
        if k == 0 {
            g.add(0, top, None, None);
        } else {
            g.add(k, top, Some(atom(&format!("s{}", k - 1))), Some(atom(&format!("t{}", k - 1))));
        }
        g
    }

    /// The globe with its top cell removed.
    pub fn boundary(dim: usize, k: usize) -> GlobularSet {
        let mut g = GlobularSet::empty(dim);
        for j in 0..k {
            for ch in ['s', 't'] {
                let c = atom(&format!("{ch}{j}"));
                if j == 0 {
                    g.add(0, c, None, None);
                } else {
                    g.add(j, c, Some(atom(&format!("s{}", j - 1))), Some(atom(&format!("t{}", j - 1))));
                }
            }
        }
        g
    }

    /// Disjoint union with cells tagged by summand index.
    pub fn coproduct(parts: &[GlobularSet]) -> GlobularSet {
        let dim = parts.iter().map(|p| p.dim).max().unwrap_or(0);
        let tag = |i: usize, t: &Term| seq(vec![crate::term::int(i as i64), t.clone()]);
        let mut g = GlobularSet::empty(dim);
        for (i, p) in parts.iter().enumerate() {
            for k in 0..=p.dim {
                for c in &p.cells[k] {
                    if k == 0 {
                        g.add(0, tag(i, c), None, None);
                    } else {
                        g.add(k, tag(i, c), Some(tag(i, &p.src[k][c])), Some(tag(i, &p.tgt[k][c])));
                    }
                }
            }
        }
        g
    }

    /// Dimensionwise product with pair-named cells.
    pub fn product(a: &GlobularSet, b: &GlobularSet) -> GlobularSet {
        assert_eq!(a.dim, b.dim);
        let mut g = GlobularSet::empty(a.dim);
        for k in 0..=a.dim {
            for x in &a.cells[k] {
                for y in &b.cells[k] {
                    let c = seq(vec![x.clone(), y.clone()]);
                    if k == 0 {
                        g.add(0, c, None, None);
                    } else {
                        let s = seq(vec![a.src[k][x].clone(), b.src[k][y].clone()]);
                        let t = seq(vec![a.tgt[k][x].clone(), b.tgt[k][y].clone()]);
                        g.add(k, c, Some(s), Some(t));
                    }
                }
            }
        }
        g
    }
}

/// A map of globular sets given dimensionwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobMap {
    pub maps: Vec<BTreeMap<Term, Term>>,
}

impl GlobMap {
    pub fn identity(x: &GlobularSet) -> GlobMap {
        GlobMap { maps: x.cells.iter().map(|cs| cs.iter().map(|c| (c.clone(), c.clone())).collect()).collect() }
    }

    pub fn apply(&self, k: usize, c: &Term) -> &Term {
        &self.maps[k][c]
    }

    pub fn compose(g: &GlobMap, f: &GlobMap) -> GlobMap {
        GlobMap {
            maps: f
                .maps
                .iter()
                .enumerate()
                .map(|(k, m)| m.iter().map(|(c, d)| (c.clone(), g.maps[k][d].clone())).collect())
                .collect(),
        }
    }

    /// Checks totality and compatibility with sources and targets.
    pub fn validate(&self, dom: &GlobularSet, cod: &GlobularSet) -> Result<()> {
        for k in 0..=dom.dim {
            for c in &dom.cells[k] {
                let d = self.maps[k].get(c).ok_or_else(|| Error::Invalid(format!("{k}-cell {c} is unmapped")))?;
                if !cod.cells[k].contains(d) {
                    return Err(Error::Invalid(format!("image {d} of {c} is not a {k}-cell")));
                }
                if k > 0 && (cod.src[k][d] != self.maps[k - 1][&dom.src[k][c]] || cod.tgt[k][d] != self.maps[k - 1][&dom.tgt[k][c]]) {
                    return Err(Error::Invalid(format!("map does not preserve the boundary of {c}")));
                }
            }
        }
        Ok(())
    }

    /// The same map as a graph-form morphism.
    pub fn to_morphism(&self, dom: &GlobularSet) -> crate::Morphism {
        let v = dom.to_graph();
        let table: BTreeMap<Vec<Term>, Vec<Term>> = (0..=dom.dim)
            .flat_map(|k| dom.cells[k].iter().map(move |c| (k, c)))
            .map(|(k, c)| {
                let a = dom.address(k, c);
                let img: Vec<Term> = a
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let dimi = if i + 1 == a.len() { k } else { i / 2 };
                        self.maps[dimi][t].clone()
                    })
                    .collect();
                (a, img)
            })
            .collect();
        address_table_morphism(&v, &table)
    }
}

/// Morphism from a table of cell-address images.
pub fn address_table_morphism(dom: &Value, table: &BTreeMap<Vec<Term>, Vec<Term>>) -> crate::Morphism {
    fn build(v: &Value, prefix: &[Term], table: &BTreeMap<Vec<Term>, Vec<Term>>) -> crate::Morphism {
        match v {
            Value::Set(xs) => {
                let m = xs
                    .iter()
                    .map(|x| {
                        let mut a = prefix.to_vec();
                        a.push(x.clone());
                        (x.clone(), table[&a].last().unwrap().clone())
                    })
                    .collect();
                crate::Morphism::set_table(m)
            }
            Value::Graph(g) => {
                let objs = g
                    .objects
                    .iter()
                    .map(|o| {
                        let mut a = prefix.to_vec();
                        a.push(o.clone());
                        (o.clone(), table[&a].last().unwrap().clone())
                    })
                    .collect();
                let homs = g
                    .homs
                    .iter()
                    .map(|((a, b), h)| {
                        let mut p = prefix.to_vec();
                        p.push(a.clone());
                        p.push(b.clone());
                        ((a.clone(), b.clone()), build(h, &p, table))
                    })
                    .collect();
                crate::Morphism::table(objs, homs)
            }
        }
    }
    build(dom, &[], table)
}

/// Presheaf form to graph form.
pub fn globular_convert_to_graph(x: &GlobularSet) -> Result<Value> {
    x.validate()?;
    Ok(x.to_graph())
}

/// Graph form to presheaf form.
pub fn globular_convert_to_presheaf(v: &Value) -> GlobularSet {
    GlobularSet::from_graph(v)
}
