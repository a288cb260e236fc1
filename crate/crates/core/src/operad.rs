//! Finite monoids, Set-operads, collections over a reference multitensor,
//! cartesianness checks, and the operad ↔ multitensor translations.

use crate::enriched_graph::{components, tuples, Morphism, Value};
use crate::graph_monad::{check_pathlike, Gamma};
use crate::multitensor::{
    show, AxiomReport, Coherence, Multitensor, Mt, OneCell, OperadMultitensor, Product,
};
use crate::term::{atom, int, op, seq, Term};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A finite monoid given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMonoid {
    pub elements: Vec<Term>,
    pub unit: Term,
    pub table: BTreeMap<(Term, Term), Term>,
}

impl FiniteMonoid {
    pub fn from_fn(elements: Vec<Term>, unit: Term, mul: impl Fn(&Term, &Term) -> Term) -> FiniteMonoid {
        let mut table = BTreeMap::new();
        for a in &elements {
            for b in &elements {
                table.insert((a.clone(), b.clone()), mul(a, b));
            }
        }
        FiniteMonoid { elements, unit, table }
    }

    /// `ℤ/n` on the integers `0..n`.
    pub fn cyclic(n: usize) -> FiniteMonoid {
        let els = (0..n as i64).map(int).collect();
        FiniteMonoid::from_fn(els, int(0), |a, b| int((a.as_int().unwrap() + b.as_int().unwrap()) % n as i64))
    }

    /// `{1, e}` with `e·e = e`.
    pub fn idempotent() -> FiniteMonoid {
        let (one, e) = (atom("1"), atom("e"));
        FiniteMonoid::from_fn(vec![one.clone(), e.clone()], one.clone(), move |a, b| {
            if *a == one {
                b.clone()
            } else {
                e.clone()
            }
        })
    }

    pub fn mul(&self, a: &Term, b: &Term) -> Term {
        self.table
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(|| panic!("{a}·{b} is not in the monoid table"))
    }

    pub fn product(&self, xs: &[Term]) -> Term {
        xs.iter().fold(self.unit.clone(), |acc, x| self.mul(&acc, x))
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.elements {
            for b in &self.elements {
                let ab = self
                    .table
                    .get(&(a.clone(), b.clone()))
                    .ok_or_else(|| Error::Invalid(format!("{a}·{b} is missing")))?;
                if !self.elements.contains(ab) {
                    return Err(Error::Invalid(format!("{a}·{b} = {ab} is not an element")));
                }
                for c in &self.elements {
                    if self.mul(ab, c) != self.mul(a, &self.mul(b, c)) {
                        return Err(Error::Invalid(format!("associativity fails at {a}, {b}, {c}")));
                    }
                }
            }
            if self.mul(&self.unit, a) != *a || self.mul(a, &self.unit) != *a {
                return Err(Error::Invalid(format!("unit law fails at {a}")));
            }
        }
        Ok(())
    }
}

/// A non-symmetric Set-operad: `n`-ary operations, a unit, and
/// substitution `q(p_1, …, p_k)`.
pub trait Operad: Send + Sync {
    fn name(&self) -> String;
    fn ops(&self, n: usize) -> Vec<Term>;
    fn unit(&self) -> Term;
    fn compose(&self, q: &Term, ps: &[Term]) -> Term;
}

/// The operad with `E_n = M` for every `n` (every `n ≥ 1` when `positive`)
/// and substitution the product `q·p_1·…·p_k`. Its unary part is `M`.
#[derive(Clone, Debug)]
pub struct MonoidOperad {
    pub monoid: Arc<FiniteMonoid>,
    pub positive: bool,
}

impl Operad for MonoidOperad {
    fn name(&self) -> String {
        "monoid".into()
    }
    fn ops(&self, n: usize) -> Vec<Term> {
        if n == 0 && self.positive {
            return vec![];
        }
        self.monoid.elements.clone()
    }
    fn unit(&self) -> Term {
        self.monoid.unit.clone()
    }
    fn compose(&self, q: &Term, ps: &[Term]) -> Term {
        let mut all = vec![q.clone()];
        all.extend(ps.iter().cloned());
        self.monoid.product(&all)
    }
}

/// An operad given by tables up to `ops.len() - 1`, with a single operation
/// `[*, n]` in each arity `n` above that. Substitutions whose result lies
/// above the table are the tail operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableOperad {
    pub name: String,
    pub ops: Vec<Vec<Term>>,
    pub unit: Term,
    pub table: BTreeMap<(Term, Vec<Term>), Term>,
    pub tail: bool,
}

pub fn tail_op(n: usize) -> Term {
    seq(vec![atom("*"), int(n as i64)])
}

impl TableOperad {
    pub fn max_arity(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn arity(&self, p: &Term) -> Option<usize> {
        if let Some(n) = self.ops.iter().position(|os| os.contains(p)) {
            return Some(n);
        }
        match p.as_seq() {
            Some([s, n]) if *s == atom("*") && self.tail => n.as_int().map(|n| n as usize).filter(|&n| n > self.max_arity()),
            _ => None,
        }
    }

    /// The operad with `E_0 = ∅`, `E_1 = {1}`, `E_2 = {α, β}` and one
    /// operation in each higher arity.
    pub fn two_binary() -> TableOperad {
        let (one, a, b) = (atom("1"), atom("α"), atom("β"));
        let mut table = BTreeMap::new();
        for p in [&one, &a, &b] {
            table.insert((one.clone(), vec![p.clone()]), p.clone());
        }
        for q in [&a, &b] {
            table.insert((q.clone(), vec![one.clone(), one.clone()]), q.clone());
        }
        TableOperad { name: "two-binary".into(), ops: vec![vec![], vec![one.clone()], vec![a, b]], unit: one, table, tail: true }
    }

    /// Checks closure, unit and associativity for all substitutions whose
    /// total arity is at most `max`.
    pub fn validate(&self, max: usize) -> Result<()> {
        let ar = |p: &Term| self.arity(p).ok_or_else(|| Error::Invalid(format!("{p} is not an operation")));
        let ops_upto = |n: usize| -> Vec<(Term, usize)> {
            (0..=n).flat_map(|k| self.ops(k).into_iter().map(move |p| (p, k))).collect()
        };
        for (p, n) in ops_upto(max) {
            if self.compose(&self.unit, std::slice::from_ref(&p)) != p {
                return Err(Error::Invalid(format!("left unit fails at {p}")));
            }
            if self.compose(&p, &vec![self.unit.clone(); n]) != p {
                return Err(Error::Invalid(format!("right unit fails at {p}")));
            }
        }
        // q(p_i(r_ij)) = (q(p_i))(r_ij)
        for (q, k) in ops_upto(max.min(3)) {
            let inner = ops_upto(max);
            let idx: Vec<Term> = (0..inner.len()).map(|i| int(i as i64)).collect();
            for pick in tuples(&vec![idx.clone(); k]) {
                let ps: Vec<&(Term, usize)> = pick.iter().map(|i| &inner[i.as_int().unwrap() as usize]).collect();
                let mid: usize = ps.iter().map(|(_, n)| n).sum();
                if mid > max {
                    continue;
                }
                let rs_choices: Vec<Vec<Term>> = (0..mid).map(|_| self.ops(1)).collect();
                for rs in tuples(&rs_choices).into_iter().take(8) {
                    let mut at = 0;
                    let mut inner_done = Vec::new();
                    for (p, n) in &ps {
                        inner_done.push(self.compose(p, &rs[at..at + n]));
                        at += n;
                    }
                    let lhs = self.compose(&q, &inner_done);
                    let qp = self.compose(&q, &ps.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>());
                    let rhs = self.compose(&qp, &rs);
                    if lhs != rhs {
                        return Err(Error::Invalid(format!("associativity fails at {q}")));
                    }
                    ar(&lhs)?;
                }
            }
        }
        Ok(())
    }
}

impl Operad for TableOperad {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn ops(&self, n: usize) -> Vec<Term> {
        if n <= self.max_arity() {
            self.ops[n].clone()
        } else if self.tail {
            vec![tail_op(n)]
        } else {
            vec![]
        }
    }
    fn unit(&self) -> Term {
        self.unit.clone()
    }
    fn compose(&self, q: &Term, ps: &[Term]) -> Term {
        let n: usize = ps.iter().map(|p| self.arity(p).unwrap_or_else(|| panic!("{p} is not an operation"))).sum();
        if n > self.max_arity() {
            assert!(self.tail, "substitution above the table");
            return tail_op(n);
        }
        self.table
            .get(&(q.clone(), ps.to_vec()))
            .cloned()
            .unwrap_or_else(|| panic!("no table entry for {q}({})", show(ps)))
    }
}

/// A collection: a carrier one-cell with a transformation `α: A → E` into a
/// reference multitensor, given per arity.
#[derive(Clone)]
pub struct Collection {
    pub carrier: Arc<dyn OneCell>,
    pub reference: Mt,
    pub alpha: Coherence,
}

impl Collection {
    pub fn identity(e: Mt) -> Collection {
        Collection { carrier: e.clone(), reference: e, alpha: Arc::new(|_| Morphism::Id) }
    }

    /// An operad multitensor over `∏` via the label-forgetting map.
    pub fn of_operad(o: Arc<dyn Operad>) -> Collection {
        Collection {
            carrier: Arc::new(OperadMultitensor { operad: o, level: 0 }),
            reference: Arc::new(Product { level: 0 }),
            alpha: Arc::new(|_| {
                Morphism::uniform(|t| match t {
                    Term::Op(_, xs) => seq(xs.to_vec()),
                    other => panic!("expected an operation cell, got {other}"),
                })
            }),
        }
    }

    /// The fibre of `α_n` over each reference cell of `E_n(args)`.
    pub fn fibres(&self, args: &[Value], bound: usize) -> BTreeMap<Vec<Term>, Vec<Vec<Term>>> {
        let a = self.carrier.apply(args, bound);
        let alpha = (self.alpha)(args.len());
        let mut out: BTreeMap<Vec<Term>, Vec<Vec<Term>>> =
            self.reference.apply(args, bound).cells().into_iter().map(|c| (c, vec![])).collect();
        for c in a.cells() {
            out.entry(alpha.map_address(&c)).or_default().push(c);
        }
        out
    }
}

/// `A_1(X) = X + X×X` over the identity with the first projection. Its
/// naturality squares are pullbacks only along bijections.
pub struct EnlargedFibre;

impl OneCell for EnlargedFibre {
    fn name(&self) -> String {
        "enlarged-fibre".into()
    }
    fn level(&self) -> usize {
        0
    }
    fn apply(&self, args: &[Value], _bound: usize) -> Value {
        if args.len() != 1 {
            return Value::initial(0);
        }
        let xs = args[0].objects();
        let mut out: Vec<Term> = xs.iter().map(|x| seq(vec![int(0), x.clone()])).collect();
        for x in &xs {
            for y in &xs {
                out.push(seq(vec![int(1), seq(vec![x.clone(), y.clone()])]));
            }
        }
        Value::set(out)
    }
    fn fmap(&self, fs: &[Morphism]) -> Morphism {
        let f = fs.first().cloned().unwrap_or(Morphism::Id);
        Morphism::func(move |t| {
            let c = components(t);
            if c[0] == int(0) {
                seq(vec![int(0), f.obj(&c[1])])
            } else {
                let p = components(&c[1]);
                seq(vec![int(1), seq(vec![f.obj(&p[0]), f.obj(&p[1])])])
            }
        })
    }
}

pub fn enlarged_fibre_collection() -> Collection {
    Collection {
        carrier: Arc::new(EnlargedFibre),
        reference: Arc::new(Product { level: 0 }),
        alpha: Arc::new(|_| {
            Morphism::func(|t| {
                let c = components(t);
                if c[0] == int(0) {
                    seq(vec![c[1].clone()])
                } else {
                    seq(vec![components(&c[1])[0].clone()])
                }
            })
        }),
    }
}

/// Checks that the naturality square of `α_n` at `(f_1, …, f_n)` is a
/// pullback: `A(X) → E(X) ×_{E(Y)} A(Y)` is a bijection on cells.
pub fn check_cartesian(c: &Collection, maps: &[(Value, Value, Morphism)], max_arity: usize, bound: usize) -> AxiomReport {
    let mut r = AxiomReport::default();
    let idx: Vec<Term> = (0..maps.len()).map(|i| int(i as i64)).collect();
    for n in 0..=max_arity {
        for pick in tuples(&vec![idx.clone(); n]) {
            let chosen: Vec<&(Value, Value, Morphism)> = pick.iter().map(|i| &maps[i.as_int().unwrap() as usize]).collect();
            let xs: Vec<Value> = chosen.iter().map(|m| m.0.clone()).collect();
            let ys: Vec<Value> = chosen.iter().map(|m| m.1.clone()).collect();
            let fs: Vec<Morphism> = chosen.iter().map(|m| m.2.clone()).collect();
            let ax = c.carrier.apply(&xs, bound);
            if ax.is_initial() && c.reference.apply(&xs, bound).is_initial() {
                continue;
            }
            let ay = c.carrier.apply(&ys, bound);
            let ex = c.reference.apply(&xs, bound);
            let alpha = (c.alpha)(n);
            let (af, ef) = (c.carrier.fmap(&fs), c.reference.fmap(&fs));
            // pullback cells: pairs (e in E(X), a in A(Y)) with E(f)(e) = α(a)
            let mut pb: BTreeMap<(Vec<Term>, Vec<Term>), usize> = BTreeMap::new();
            for e in ex.cells() {
                let fe = ef.map_address(&e);
                for a in ay.cells() {
                    if alpha.map_address(&a) == fe {
                        pb.insert((e.clone(), a), 0);
                    }
                }
            }
            let mut witness = None;
            for a in ax.cells() {
                let key = (alpha.map_address(&a), af.map_address(&a));
                match pb.get_mut(&key) {
                    Some(k) => {
                        *k += 1;
                        if *k > 1 {
                            witness.get_or_insert(format!("two cells over {}", show(&key.0)));
                        }
                    }
                    None => {
                        witness.get_or_insert(format!("{} lands outside the pullback", show(&a)));
                    }
                }
            }
            if let Some(((e, a), _)) = pb.iter().find(|(_, k)| **k == 0) {
                witness.get_or_insert(format!("pullback cell ({}, {}) is not hit", show(e), show(a)));
            }
            r.push("pullback", format!("arity {n}, maps {:?}", pick.iter().map(|t| t.to_string()).collect::<Vec<_>>()), witness);
        }
    }
    r
}

/// The underlying non-symmetric operad of a collection over `∏`:
/// `E_n = A_n(1, …, 1)`, with unit `u(*)` and substitution recovered
/// through the cartesian naturality squares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtractedOperad {
    pub ops: Vec<Vec<Term>>,
    pub unit: Term,
    pub table: Vec<(Term, Vec<Term>, Term)>,
}

fn label(t: &Term) -> Term {
    match t {
        Term::Op(p, _) => (**p).clone(),
        other => other.clone(),
    }
}

/// Extracts operations up to arity `max` and all substitutions landing at
/// arity at most `max`.
pub fn extract_operad(a: &dyn Multitensor, max: usize, bound: usize) -> Result<ExtractedOperad> {
    let one = Value::terminal(a.level());
    let star = atom("*");
    let ops: Vec<Vec<Term>> = (0..=max).map(|n| a.apply(&vec![one.clone(); n], bound).objects()).collect();
    let unit = a.unit().obj(&star);
    let mut table = Vec::new();
    for k in 0..=max {
        for q in &ops[k] {
            let arities: Vec<Term> = (0..=max).map(|n| int(n as i64)).collect();
            for shape in tuples(&vec![arities; k]) {
                let shape: Vec<usize> = shape.iter().map(|t| t.as_int().unwrap() as usize).collect();
                if shape.iter().sum::<usize>() > max {
                    continue;
                }
                let inner: Vec<Value> = shape.iter().map(|&n| a.apply(&vec![one.clone(); n], bound)).collect();
                let nested = a.apply(&inner, bound);
                let bang = a.fmap(&vec![Morphism::func(|_| atom("*")); k]);
                let choices: Vec<Vec<Term>> = shape.iter().map(|&n| ops[n].clone()).collect();
                for ps in tuples(&choices) {
                    // the unique nested cell over q with inner operations ps
                    let hits: Vec<Term> = nested
                        .objects()
                        .into_iter()
                        .filter(|w| bang.obj(w) == *q && inner_ops(w) == ps)
                        .collect();
                    if hits.len() != 1 {
                        return Err(Error::Invalid(format!(
                            "{} cells over {q}({}); the collection is not cartesian",
                            hits.len(),
                            show(&ps)
                        )));
                    }
                    let r = a.subst(&shape).obj(&hits[0]);
                    table.push((label(q), ps.iter().map(label).collect(), label(&r)));
                }
            }
        }
    }
    Ok(ExtractedOperad { ops: ops.iter().map(|os| os.iter().map(label).collect()).collect(), unit: label(&unit), table })
}

fn inner_ops(w: &Term) -> Vec<Term> {
    match w {
        Term::Op(_, xs) => xs.to_vec(),
        Term::Seq(xs) => xs.to_vec(),
        other => panic!("unexpected nested cell {other}"),
    }
}

/// The same data read directly from an operad, for comparisons.
pub fn tabulate_operad(o: &dyn Operad, max: usize) -> ExtractedOperad {
    let ops: Vec<Vec<Term>> = (0..=max).map(|n| o.ops(n)).collect();
    let mut table = Vec::new();
    for k in 0..=max {
        for q in &ops[k] {
            let arities: Vec<Term> = (0..=max).map(|n| int(n as i64)).collect();
            for shape in tuples(&vec![arities; k]) {
                let shape: Vec<usize> = shape.iter().map(|t| t.as_int().unwrap() as usize).collect();
                if shape.iter().sum::<usize>() > max {
                    continue;
                }
                let choices: Vec<Vec<Term>> = shape.iter().map(|&n| ops[n].clone()).collect();
                for ps in tuples(&choices) {
                    table.push((q.clone(), ps.clone(), o.compose(q, &ps)));
                }
            }
        }
    }
    ExtractedOperad { ops, unit: o.unit(), table }
}

/// An operad from an extraction, with the tail convention above `max`.
pub fn operad_from_extraction(x: &ExtractedOperad, name: &str) -> TableOperad {
    TableOperad {
        name: name.into(),
        ops: x.ops.clone(),
        unit: x.unit.clone(),
        table: x.table.iter().map(|(q, ps, r)| ((q.clone(), ps.clone()), r.clone())).collect(),
        tail: true,
    }
}

/// Checks that the carrier of a cartesian collection over a distributive,
/// path-like reference is again distributive, and its Γ path-like on
/// `graphs`.
pub fn check_transfer(carrier: Mt, samples: &[Value], graphs: &[Value], bound: usize) -> AxiomReport {
    let mut r = crate::multitensor::check_distributive(carrier.as_ref(), samples, 2, bound);
    let g = Gamma::new(carrier);
    for x in graphs {
        let (p, _) = check_pathlike(&g, x, bound);
        let witness = p.collisions.first().or(p.missing.first()).cloned();
        r.push("path-like", format!("{} cells", x.size()), if p.passed { None } else { witness.or(Some("failed".into())) });
    }
    r
}

/// Helper for fibre summaries in reports: `p(x, …)` cells counted by label.
pub fn label_counts(v: &Value) -> BTreeMap<Term, usize> {
    let mut m = BTreeMap::new();
    for t in v.objects() {
        *m.entry(label(&t)).or_default() += 1;
    }
    m
}

/// `p(x_1..x_n)` as a term.
pub fn op_cell(p: Term, xs: Vec<Term>) -> Term {
    op(p, xs)
}
