//! Coequalisers of monad algebras by the iterated quotient sequence, the
//! pushforward of algebras along a monad map with its induced monad, and
//! the lift of a multitensor to the algebras of its unary part.
//!
//! Every quotient is a union-find closure over cells enumerated up to a
//! bound. Results carry a certificate saying how they were confirmed:
//! `split` (an explicit splitting makes the coequaliser absolute),
//! `stable` (the sequence stopped changing and a rerun one step larger
//! agrees) or `exhausted` (no confirmation within the bound).

use crate::enriched_graph::{components, Morphism, Value};
use crate::graph_monad::{check_algebra, Algebra, Mn, Monad};
use crate::multitensor::{compositions, show, AxiomReport, LaxMonoidalFunctor, Mt, Multitensor};
use crate::term::{atom, seq, Term};
use crate::unionfind::Partition;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Placeholder image for elements outside a truncated table; it never
/// belongs to an enumerated carrier, so relations touching it are dropped.
fn missing() -> Term {
    atom("⊥")
}

fn lookup(table: Arc<BTreeMap<Term, Term>>) -> Morphism {
    Morphism::func(move |t| table.get(t).cloned().unwrap_or_else(missing))
}

/// Address-keyed table as a morphism; unknown cells go to the placeholder.
fn address_lookup(table: Arc<BTreeMap<Vec<Term>, Vec<Term>>>, prefix: Vec<Term>) -> Morphism {
    let (t1, p1) = (table.clone(), prefix.clone());
    Morphism::new(
        move |x| {
            let mut a = p1.clone();
            a.push(x.clone());
            t1.get(&a).and_then(|img| img.last().cloned()).unwrap_or_else(missing)
        },
        move |a, b| {
            let mut p = prefix.clone();
            p.push(a.clone());
            p.push(b.clone());
            address_lookup(table.clone(), p)
        },
    )
}

pub type CarrierFn = Arc<dyn Fn(usize) -> Value + Send + Sync>;

/// An algebra for a monad on sets whose carrier may be graded:
/// `carrier(bound)` lists the elements up to `bound`.
#[derive(Clone)]
pub struct AlgebraPresentation {
    pub monad: Mn,
    pub carrier: CarrierFn,
    pub action: Morphism,
}

impl AlgebraPresentation {
    pub fn finite(monad: Mn, carrier: Value, action: Morphism) -> AlgebraPresentation {
        AlgebraPresentation { monad, carrier: Arc::new(move |_| carrier.clone()), action }
    }

    /// The free algebra `(TZ, μ)`.
    pub fn free(monad: Mn, generators: Value) -> AlgebraPresentation {
        let t = monad.clone();
        let mu = monad.mu();
        AlgebraPresentation { monad, carrier: Arc::new(move |b| t.apply(&generators, b)), action: mu }
    }

    pub fn at(&self, bound: usize) -> Algebra {
        Algebra { carrier: (self.carrier)(bound), action: self.action.clone() }
    }

    pub fn check(&self, bound: usize) -> AxiomReport {
        check_algebra(self.monad.as_ref(), &self.at(bound), bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Split,
    Stable,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizationCertificate {
    pub stage: usize,
    pub kind: CertificateKind,
    /// True when the answer was read off after the first quotient.
    pub fast_path: bool,
    /// The connecting maps at the stabilisation stage and their inverses,
    /// as pair lists.
    pub connecting: Vec<Vec<(Term, Term)>>,
    pub inverses: Vec<Vec<(Term, Term)>>,
    pub detail: String,
}

impl StabilizationCertificate {
    fn new(stage: usize, kind: CertificateKind, fast_path: bool, detail: impl Into<String>) -> Self {
        StabilizationCertificate { stage, kind, fast_path, connecting: vec![], inverses: vec![], detail: detail.into() }
    }

    pub fn certified(&self) -> bool {
        self.kind != CertificateKind::Exhausted
    }

    /// Each recorded inverse composes with its connecting map to the
    /// identity on both sides.
    pub fn inverses_compose_to_identity(&self) -> bool {
        self.connecting.len() == self.inverses.len()
            && self.connecting.iter().zip(&self.inverses).all(|(f, g)| {
                let f: BTreeMap<&Term, &Term> = f.iter().map(|(a, b)| (a, b)).collect();
                let g: BTreeMap<&Term, &Term> = g.iter().map(|(a, b)| (a, b)).collect();
                f.iter().all(|(a, b)| g.get(b) == Some(a)) && g.iter().all(|(b, a)| f.get(a) == Some(b))
            })
    }
}

/// A coequaliser of algebras over a monad on sets.
#[derive(Clone, Debug, Serialize)]
pub struct Coequaliser {
    pub carrier: Vec<Term>,
    /// The action on `T(carrier)` up to the bound.
    pub action: BTreeMap<Term, Term>,
    /// The quotient map from the codomain algebra.
    pub quotient: BTreeMap<Term, Term>,
    pub certificate: StabilizationCertificate,
}

impl Coequaliser {
    pub fn algebra(&self) -> Algebra {
        Algebra { carrier: Value::set(self.carrier.iter().cloned()), action: lookup(Arc::new(self.action.clone())) }
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn require_certified(self) -> Result<Coequaliser> {
        if self.certificate.certified() {
            Ok(self)
        } else {
            Err(Error::BoundExhausted(self.certificate.detail.clone()))
        }
    }
}

/// A parallel pair `f, g: (A, a) → (B, b)` of algebra maps.
#[derive(Clone)]
pub struct ParallelPair {
    pub domain: AlgebraPresentation,
    pub codomain: AlgebraPresentation,
    pub f: Morphism,
    pub g: Morphism,
}

impl ParallelPair {
    fn monad(&self) -> &dyn Monad {
        self.codomain.monad.as_ref()
    }
}

/// Set coequaliser of `f, g` on the truncated carriers, classes named by
/// their smallest member. Pairs leaving the codomain carrier are dropped.
fn set_coequaliser(p: &ParallelPair, bound: usize) -> (Vec<Term>, BTreeMap<Term, Term>) {
    let b = (p.codomain.carrier)(bound).objects();
    let mut part = Partition::from_keys(b.iter().cloned());
    for x in (p.domain.carrier)(bound).objects() {
        part.union(&p.f.obj(&x), &p.g.obj(&x));
    }
    let names = name_classes(&mut part, &|_| None);
    let mut q = BTreeMap::new();
    for y in &b {
        q.insert(y.clone(), names[&part.class(y).unwrap()].clone());
    }
    let mut carrier: Vec<Term> = q.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    carrier.sort();
    (carrier, q)
}

/// Names every class: the smallest `preferred` name among its members if
/// any, else its smallest member.
fn name_classes(part: &mut Partition<Term>, preferred: &dyn Fn(&Term) -> Option<Term>) -> BTreeMap<usize, Term> {
    let mut best: BTreeMap<usize, (bool, Term)> = BTreeMap::new();
    for k in part.keys().to_vec() {
        let c = part.class(&k).unwrap();
        let cand = match preferred(&k) {
            Some(r) => (false, r),
            None => (true, k.clone()),
        };
        match best.get(&c) {
            Some((fallback, cur)) if (*fallback, cur.size(), cur) <= (cand.0, cand.1.size(), &cand.1) => {}
            _ => {
                best.insert(c, cand);
            }
        }
    }
    best.into_iter().map(|(c, (_, t))| (c, t)).collect()
}

/// The one-step quotient `(Q_1, w)` with `w∘T(q_0) = q_0∘b`, returned
/// when `w` is well defined on all of `T(Q_1)` and is an algebra.
pub fn fast_path_coequaliser(p: &ParallelPair, bound: usize) -> Option<Coequaliser> {
    let (carrier, q) = set_coequaliser(p, bound);
    let cert = StabilizationCertificate::new(1, CertificateKind::Stable, true, "one-step quotient is an algebra");
    one_step(p, bound, carrier, q, cert)
}

fn one_step(
    p: &ParallelPair,
    bound: usize,
    carrier: Vec<Term>,
    q: BTreeMap<Term, Term>,
    cert: StabilizationCertificate,
) -> Option<Coequaliser> {
    let t = p.monad();
    let b = (p.codomain.carrier)(bound);
    let tq0 = t.fmap(&lookup(Arc::new(q.clone())));
    let mut w: BTreeMap<Term, Term> = BTreeMap::new();
    for u in t.apply(&b, bound).objects() {
        let Some(val) = q.get(&p.codomain.action.obj(&u)) else { continue };
        match w.insert(tq0.obj(&u), val.clone()) {
            Some(prev) if prev != *val => return None,
            _ => {}
        }
    }
    let qv = Value::set(carrier.iter().cloned());
    let tq = t.apply(&qv, bound);
    if tq.objects().iter().any(|c| !w.contains_key(c)) {
        return None;
    }
    // Algebra laws wherever both sides stay inside the truncation.
    let eta = t.eta();
    if carrier.iter().any(|r| w.get(&eta.obj(r)) != Some(r)) {
        return None;
    }
    let act = lookup(Arc::new(w.clone()));
    let (mu, tw) = (t.mu(), t.fmap(&act));
    for big in t.apply(&tq, bound).objects() {
        let (Some(a), Some(b)) = (w.get(&mu.obj(&big)), w.get(&tw.obj(&big))) else { continue };
        if a != b {
            return None;
        }
    }
    Some(Coequaliser { carrier, action: w, quotient: q, certificate: cert })
}

/// The split case: given `s: B → A` with `f∘s = 1`, the fork is split by
/// `r ↦ g(s(r))` when that is constant on classes, so the one-step
/// quotient is the coequaliser for every monad.
pub fn split_coequaliser(p: &ParallelPair, section: &Morphism, bound: usize) -> Option<Coequaliser> {
    let (carrier, q) = set_coequaliser(p, bound);
    let b = (p.codomain.carrier)(bound).objects();
    let mut split: BTreeMap<Term, Term> = BTreeMap::new();
    for y in &b {
        let s = section.obj(y);
        if p.f.obj(&s) != *y {
            return None;
        }
        let gs = p.g.obj(&s);
        if q.get(&gs) != Some(&q[y]) {
            return None;
        }
        match split.insert(q[y].clone(), gs.clone()) {
            Some(prev) if prev != gs => return None,
            _ => {}
        }
    }
    let cert = StabilizationCertificate::new(1, CertificateKind::Split, true, "split fork");
    one_step(p, bound, carrier, q, cert)
}

struct Run {
    stage: usize,
    carrier: Vec<Term>,
    action: BTreeMap<Term, Term>,
    quotient: BTreeMap<Term, Term>,
    connecting: Vec<BTreeMap<Term, Term>>,
    stable: bool,
    skipped: usize,
}

fn bijective(q: &BTreeMap<Term, Term>, target: &[Term]) -> bool {
    let image: BTreeSet<&Term> = q.values().collect();
    image.len() == q.len() && image.len() == target.len() && q.values().all(|v| *v != missing())
}

/// The iterated sequence `Q_0 = B`, `Q_{n+2} = T(Q_{n+1})/∼` with `∼`
/// generated by `T(q_n)∘μ ∼ T(v_n)` on `T²Q_n`, stopping when two
/// consecutive connecting maps are bijective.
fn iterate(p: &ParallelPair, bound: usize, max_stages: usize) -> Run {
    let t = p.monad();
    let b_carrier = (p.codomain.carrier)(bound);
    let b_elems = b_carrier.objects();
    let (q1, q0) = set_coequaliser(p, bound);
    let mut skipped = 0;
    // v_0 = q_0∘b on T(B).
    let tb = t.apply(&b_carrier, bound);
    let mut v0 = BTreeMap::new();
    for u in tb.objects() {
        match q0.get(&p.codomain.action.obj(&u)) {
            Some(c) => {
                v0.insert(u, c.clone());
            }
            None => skipped += 1,
        }
    }
    let mut elems: Vec<Vec<Term>> = vec![b_elems, q1];
    let mut qs: Vec<BTreeMap<Term, Term>> = vec![q0];
    let mut vs: Vec<BTreeMap<Term, Term>> = vec![v0];
    let mut tqs: Vec<Value> = vec![tb];
    let finish = |n: usize, elems: &[Vec<Term>], qs: &[BTreeMap<Term, Term>], vs: &[BTreeMap<Term, Term>], stable: bool, skipped: usize| {
        let inv: BTreeMap<&Term, &Term> = qs[n].iter().map(|(a, b)| (b, a)).collect();
        let action = vs[n]
            .iter()
            .filter_map(|(w, c)| inv.get(c).map(|r| (w.clone(), (*r).clone())))
            .collect();
        let quotient = elems[0]
            .iter()
            .map(|x| (x.clone(), qs[..n].iter().fold(x.clone(), |acc, q| q.get(&acc).cloned().unwrap_or_else(missing))))
            .collect();
        Run {
            stage: n,
            carrier: elems[n].clone(),
            action,
            quotient,
            connecting: qs[n..(n + 2).min(qs.len())].to_vec(),
            stable,
            skipped,
        }
    };
    if bijective(&qs[0], &elems[1]) {
        return finish(0, &elems, &qs, &vs, true, skipped);
    }
    for n in 0..max_stages {
        let next = Value::set(elems[n + 1].iter().cloned());
        let tq_next = t.apply(&next, bound);
        let mut part = Partition::from_keys(tq_next.objects());
        let ttq = t.apply(&tqs[n], bound);
        let lhs = Morphism::compose(&t.fmap(&lookup(Arc::new(qs[n].clone()))), &t.mu());
        let rhs = t.fmap(&lookup(Arc::new(vs[n].clone())));
        for w in ttq.objects() {
            if part.union(&lhs.obj(&w), &rhs.obj(&w)).is_none() {
                skipped += 1;
            }
        }
        let eta = t.eta();
        let units: BTreeMap<Term, Term> = elems[n + 1].iter().map(|r| (eta.obj(r), r.clone())).collect();
        let names = name_classes(&mut part, &|m| units.get(m).cloned());
        let v_next: BTreeMap<Term, Term> =
            part.keys().to_vec().into_iter().map(|w| {
                let c = part.class(&w).unwrap();
                (w, names[&c].clone())
            }).collect();
        let q_next: BTreeMap<Term, Term> = elems[n + 1]
            .iter()
            .map(|r| (r.clone(), v_next.get(&eta.obj(r)).cloned().unwrap_or_else(missing)))
            .collect();
        let mut carrier: Vec<Term> = names.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        carrier.sort();
        elems.push(carrier);
        qs.push(q_next);
        vs.push(v_next);
        tqs.push(tq_next);
        if bijective(&qs[n], &elems[n + 1]) && bijective(&qs[n + 1], &elems[n + 2]) {
            return finish(n, &elems, &qs, &vs, true, skipped);
        }
    }
    let last = elems.len() - 2;
    finish(last, &elems, &qs, &vs, false, skipped)
}

/// Same partition of the codomain's elements up to renaming.
fn same_quotient(a: &BTreeMap<Term, Term>, b: &BTreeMap<Term, Term>) -> bool {
    let mut fwd: BTreeMap<&Term, &Term> = BTreeMap::new();
    let mut bwd: BTreeMap<&Term, &Term> = BTreeMap::new();
    for (x, qa) in a {
        let Some(qb) = b.get(x) else { return false };
        if *fwd.entry(qa).or_insert(qb) != qb || *bwd.entry(qb).or_insert(qa) != qa {
            return false;
        }
    }
    true
}

/// The coequaliser computed by the iterated sequence alone. A stabilised
/// answer is certified `stable` when the run at `bound + 1` stabilises at
/// the same stage and induces the same partition of the smaller codomain.
pub fn iterated_coequaliser(p: &ParallelPair, bound: usize, max_stages: usize) -> Coequaliser {
    let run = iterate(p, bound, max_stages);
    let mut kind = CertificateKind::Exhausted;
    let mut detail = format!("no stabilisation within {max_stages} stages");
    if run.stable {
        let check = iterate(p, bound + 1, max_stages);
        if check.stable && check.stage == run.stage && same_quotient(&run.quotient, &check.quotient) {
            kind = CertificateKind::Stable;
            detail = format!("stabilised at stage {} and unchanged at bound {}", run.stage, bound + 1);
        } else {
            detail = format!("stabilised at stage {} but the run at bound {} differs", run.stage, bound + 1);
        }
    }
    if run.skipped > 0 {
        detail.push_str(&format!("; {} relations left the truncation", run.skipped));
    }
    let mut cert = StabilizationCertificate::new(run.stage, kind, false, detail);
    cert.connecting = run.connecting.iter().map(|q| q.iter().map(|(a, b)| (a.clone(), b.clone())).collect()).collect();
    cert.inverses = run.connecting.iter().map(|q| q.iter().map(|(a, b)| (b.clone(), a.clone())).collect()).collect();
    Coequaliser { carrier: run.carrier, action: run.action, quotient: run.quotient, certificate: cert }
}

/// Coequaliser of algebras over a monad on sets. Tries the supplied
/// splitting, then the one-step fast path, then the iterated sequence.
/// An uncertified result has certificate kind `exhausted`.
pub fn algebra_coequaliser(p: &ParallelPair, section: Option<&Morphism>, bound: usize) -> Result<Coequaliser> {
    if p.monad().level() != 0 {
        return Err(Error::Invalid(format!("{} is not a monad on sets", p.monad().name())));
    }
    if let Some(s) = section {
        if let Some(c) = split_coequaliser(p, s, bound) {
            return Ok(c);
        }
    }
    if let Some(c) = fast_path_coequaliser(p, bound) {
        return Ok(c);
    }
    Ok(iterated_coequaliser(p, bound, 8))
}

/// The pair `F(R) ⇉ F(G)` over the free monoid monad presenting the monoid
/// with generators `gens` and one relation `lhs = rhs` per entry: the i-th
/// relation letter `r{i}` goes to each side.
pub fn presentation_pair(gens: &[Term], relations: &[(Vec<Term>, Vec<Term>)]) -> ParallelPair {
    let t: Mn = Arc::new(crate::graph_monad::FreeMonoid);
    let letters: Vec<Term> = (0..relations.len()).map(|i| atom(&format!("r{i}"))).collect();
    let side = |pick: fn(&(Vec<Term>, Vec<Term>)) -> &Vec<Term>| -> Morphism {
        let m: Arc<BTreeMap<Term, Vec<Term>>> =
            Arc::new(letters.iter().zip(relations).map(|(r, rel)| (r.clone(), pick(rel).clone())).collect());
        Morphism::func(move |w| seq(components(w).iter().flat_map(|x| m[x].clone()).collect()))
    };
    ParallelPair {
        domain: AlgebraPresentation::free(t.clone(), Value::set(letters.clone())),
        codomain: AlgebraPresentation::free(t, Value::set(gens.iter().cloned())),
        f: side(|r| &r.0),
        g: side(|r| &r.1),
    }
}

/// A set with a monoid action as an algebra for the unary part of an
/// operad multitensor: `m(x) ↦ act[(m, x)]`, with unlisted pairs fixed.
pub fn mset_algebra(elements: &[Term], act: &BTreeMap<(Term, Term), Term>) -> Algebra {
    let act = Arc::new(act.clone());
    Algebra {
        carrier: Value::set(elements.iter().cloned()),
        action: Morphism::func(move |c| match c {
            Term::Op(m, xs) if xs.len() == 1 => act.get(&((**m).clone(), xs[0].clone())).cloned().unwrap_or_else(|| xs[0].clone()),
            other => panic!("expected a unary operation cell, got {other}"),
        }),
    }
}

/// A monad morphism `φ: M → S` between monads on sets.
#[derive(Clone)]
pub struct MonadMap {
    pub from: Mn,
    pub to: Mn,
    pub phi: Morphism,
}

impl MonadMap {
    pub fn identity(t: Mn) -> MonadMap {
        MonadMap { from: t.clone(), to: t, phi: Morphism::Id }
    }

    /// `η^S`, the map from the identity monad.
    pub fn from_identity(s: Mn) -> MonadMap {
        let eta = s.eta();
        MonadMap { from: Arc::new(crate::graph_monad::Identity { level: s.level() }), to: s, phi: eta }
    }

    /// Checks `φ∘η^M = η^S` and `φ∘μ^M = μ^S∘S(φ)∘φ` on `x`.
    pub fn check(&self, x: &Value, bound: usize) -> AxiomReport {
        let mut r = AxiomReport::default();
        let lhs = Morphism::compose(&self.phi, &self.from.eta());
        r.push("unit", String::new(), crate::multitensor::disagreement(&lhs, &self.to.eta(), x));
        let mmx = self.from.apply(&self.from.apply(x, bound), bound);
        let lhs = Morphism::compose(&self.phi, &self.from.mu());
        let rhs = Morphism::chain(&[self.from.fmap(&self.phi), self.phi.clone(), self.to.mu()]);
        r.push("multiplication", format!("{} cells", mmx.size()), crate::multitensor::disagreement(&lhs, &rhs, &mmx));
        r
    }
}

/// `φ_!(X, x)` as the coequaliser of `μ^S∘S(φ_X), S(x): SMX ⇉ SX`.
#[derive(Clone, Debug, Serialize)]
pub struct Pushforward {
    pub coequaliser: Coequaliser,
}

pub fn pushforward_pair(phi: &MonadMap, x: &AlgebraPresentation) -> ParallelPair {
    let (m, s) = (phi.from.clone(), phi.to.clone());
    let xc = x.carrier.clone();
    let (m2, s2, xc2) = (m.clone(), s.clone(), xc.clone());
    let domain = AlgebraPresentation {
        monad: s.clone(),
        carrier: Arc::new(move |b| s2.apply(&m2.apply(&xc2(b), b), b)),
        action: s.mu(),
    };
    let s3 = s.clone();
    let codomain = AlgebraPresentation { monad: s.clone(), carrier: Arc::new(move |b| s3.apply(&xc(b), b)), action: s.mu() };
    let f = Morphism::compose(&s.mu(), &s.fmap(&phi.phi));
    let g = s.fmap(&x.action);
    ParallelPair { domain, codomain, f, g }
}

pub fn pushforward(phi: &MonadMap, x: &AlgebraPresentation, bound: usize) -> Result<Pushforward> {
    let pair = pushforward_pair(phi, x);
    Ok(Pushforward { coequaliser: algebra_coequaliser(&pair, None, bound)? })
}

/// The monad `φ^*φ_!` on `M`-algebras.
#[derive(Clone)]
pub struct InducedMonad {
    pub phi: MonadMap,
    pub bound: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedMonadReport {
    pub carrier_size: usize,
    pub unit_then_multiplication: bool,
    pub functor_unit_then_multiplication: bool,
    pub witness: Option<String>,
}

impl InducedMonad {
    /// `φ^*φ_!(X, x)`: the pushforward with its action restricted along `φ`.
    pub fn apply(&self, x: &AlgebraPresentation) -> Result<(Coequaliser, AlgebraPresentation)> {
        let c = pushforward(&self.phi, x, self.bound)?.coequaliser.require_certified()?;
        let restricted = Morphism::compose(&lookup(Arc::new(c.action.clone())), &self.phi.phi);
        let alg = AlgebraPresentation::finite(self.phi.from.clone(), Value::set(c.carrier.iter().cloned()), restricted);
        Ok((c, alg))
    }

    /// `η^T_X = q∘η^S_X: X → φ_!X`.
    pub fn unit(&self, c: &Coequaliser, x: &Value) -> BTreeMap<Term, Term> {
        let eta = self.phi.to.eta();
        x.objects().into_iter().map(|e| (e.clone(), c.quotient.get(&eta.obj(&e)).cloned().unwrap_or_else(missing))).collect()
    }

    /// Checks `μ∘η_T = 1` and `μ∘T(η) = 1` at `x`, with `μ` the counit of
    /// the pushforward at `φ_!X` read off from its action.
    pub fn check(&self, x: &AlgebraPresentation) -> Result<InducedMonadReport> {
        let s = self.phi.to.clone();
        let (c, tx) = self.apply(x)?;
        let (c2, _) = self.apply(&tx)?;
        let mut report = InducedMonadReport {
            carrier_size: c.len(),
            unit_then_multiplication: true,
            functor_unit_then_multiplication: true,
            witness: None,
        };
        let act = lookup(Arc::new(c.action.clone()));
        // μ on φ_!φ^*φ_!X: the class of w ∈ S(φ_!X) goes to its action.
        let mut mu: BTreeMap<Term, Term> = BTreeMap::new();
        for (w, cls) in &c2.quotient {
            let v = act.obj(w);
            if let Some(prev) = mu.insert(cls.clone(), v.clone()) {
                if prev != v {
                    report.unit_then_multiplication = false;
                    report.witness = Some(format!("multiplication is not well defined at {cls}"));
                }
            }
        }
        for (y, z) in self.unit(&c2, &Value::set(c.carrier.iter().cloned())) {
            if mu.get(&z) != Some(&y) {
                report.unit_then_multiplication = false;
                report.witness.get_or_insert(format!("μ∘η fails at {y}"));
            }
        }
        let eta_x = lookup(Arc::new(self.unit(&c, &(x.carrier)(self.bound))));
        let s_eta = s.fmap(&eta_x);
        for (w, cls) in &c.quotient {
            let lifted = s_eta.obj(w);
            let Some(image) = c2.quotient.get(&lifted) else { continue };
            if mu.get(image) != Some(cls) {
                report.functor_unit_then_multiplication = false;
                report.witness.get_or_insert(format!("μ∘T(η) fails at {w}"));
            }
        }
        Ok(report)
    }
}

// ---------------------------------------------------------------------------
// Lifting multitensors

/// The unary part `E_1` of a multitensor as a monad.
#[derive(Clone)]
pub struct UnaryPart {
    pub e: Mt,
}

impl Monad for UnaryPart {
    fn name(&self) -> String {
        format!("{}_1", self.e.name())
    }
    fn level(&self) -> usize {
        self.e.level()
    }
    fn apply(&self, x: &Value, bound: usize) -> Value {
        self.e.apply(std::slice::from_ref(x), bound)
    }
    fn fmap(&self, f: &Morphism) -> Morphism {
        self.e.fmap(std::slice::from_ref(f))
    }
    fn eta(&self) -> Morphism {
        self.e.unit()
    }
    fn mu(&self) -> Morphism {
        self.e.subst(&[1])
    }
}

/// A split fork `E_n(E_1X) ⇉ E_n(X) → Q`: `retraction∘section = 1`,
/// `σ∘lift = 1` and `E_n(x)∘lift = section∘retraction`.
#[derive(Clone)]
pub struct SplitFork {
    pub quotient: Value,
    pub retraction: Morphism,
    pub section: Morphism,
    pub lift: Morphism,
}

pub type Splitting = Arc<dyn Fn(&[Algebra]) -> SplitFork + Send + Sync>;

/// The splitting of the basic coequaliser of `T^×` by units: the quotient
/// is the product of the carriers.
pub fn t_cross_splitting(t: Mn) -> Splitting {
    Arc::new(move |algs: &[Algebra]| {
        let n = algs.len();
        let carriers: Vec<Value> = algs.iter().map(|a| a.carrier.clone()).collect();
        let retraction =
            Morphism::tuple(algs.iter().enumerate().map(|(i, a)| (i, Morphism::compose(&a.action, &Morphism::wrap()))).collect());
        SplitFork {
            quotient: Value::product(t.level(), &carriers),
            retraction,
            section: Morphism::product(vec![t.eta(); n]),
            lift: Morphism::product(vec![Morphism::compose(&t.eta(), &Morphism::wrap()); n]),
        }
    })
}

#[derive(Clone)]
pub struct LiftOptions {
    pub splitting: Option<Splitting>,
    /// Emit `E′_0 = (E_0, σ)` and `E′_1(X, x) = (X, x)` without iterating.
    pub force_small: bool,
    pub max_rounds: usize,
    /// Cap on the number of blocks in a decomposition when `E_0` is not
    /// empty; defaults to the bound.
    pub max_blocks: Option<usize>,
    /// Confirm truncated closures by a rerun one step larger.
    pub certify: bool,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { splitting: None, force_small: true, max_rounds: 16, max_blocks: None, certify: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftPath {
    Forced,
    Split,
    Congruence,
}

/// The lifted tensor of one tuple of `E_1`-algebras.
#[derive(Clone)]
pub struct LiftedValue {
    pub arity: usize,
    pub path: LiftPath,
    /// `E_n(X_1, …, X_n)` up to the bound.
    pub presentation: Value,
    pub carrier: Value,
    /// The `E_1`-action on the carrier.
    pub action: Morphism,
    /// Cells of `E_1(carrier)` on which the action is known.
    pub action_domain: Value,
    pub class_of: BTreeMap<Vec<Term>, Vec<Term>>,
    pub section: BTreeMap<Vec<Term>, Vec<Term>>,
    pub certificate: StabilizationCertificate,
}

impl LiftedValue {
    pub fn algebra(&self) -> Algebra {
        Algebra { carrier: self.carrier.clone(), action: self.action.clone() }
    }

    pub fn quotient_map(&self) -> Morphism {
        address_lookup(Arc::new(self.class_of.clone()), vec![])
    }

    pub fn section_map(&self) -> Morphism {
        address_lookup(Arc::new(self.section.clone()), vec![])
    }

    /// Carrier elements and action pairs for reports.
    pub fn summary(&self) -> LiftSummary {
        let action = self
            .action_domain
            .cells()
            .into_iter()
            .map(|a| (show(&a), show(&self.action.map_address(&a))))
            .collect();
        LiftSummary {
            arity: self.arity,
            path: self.path,
            carrier: self.carrier.cells().iter().map(|a| show(a)).collect(),
            counts: self.carrier.counts(),
            action,
            certificate: self.certificate.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftSummary {
    pub arity: usize,
    pub path: LiftPath,
    pub carrier: Vec<String>,
    pub counts: Vec<usize>,
    pub action: Vec<(String, String)>,
    pub certificate: StabilizationCertificate,
}

fn identity_table(v: &Value) -> BTreeMap<Vec<Term>, Vec<Term>> {
    v.cells().into_iter().map(|a| (a.clone(), a)).collect()
}

fn boundary_cell(r: &[Term], p: usize) -> Vec<Term> {
    let mut c = r[..p - p % 2].to_vec();
    c.push(r[p].clone());
    c
}

/// Image addresses of the cells of `univ` in its quotient by `part`. A
/// class is named by the last component of its representative unless two
/// classes in the same hom would share that name, in which case the
/// representative address itself is the name.
fn quotient_table(univ: &Value, part: &mut Partition<Vec<Term>>) -> BTreeMap<Vec<Term>, Vec<Term>> {
    let mut by_len: BTreeMap<usize, Vec<Vec<Term>>> = BTreeMap::new();
    for a in univ.cells() {
        by_len.entry(a.len()).or_default().push(a);
    }
    let mut names: BTreeMap<usize, Term> = BTreeMap::new();
    let mut image = BTreeMap::new();
    for (len, cells) in by_len {
        let mut prefix_of: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
        let mut slots: BTreeMap<(Vec<Term>, Term), Vec<usize>> = BTreeMap::new();
        for c in &cells {
            let id = part.class(c).expect("cell in partition");
            if prefix_of.contains_key(&id) {
                continue;
            }
            let rep = part.keys()[id].clone();
            let prefix: Vec<Term> = (0..len - 1)
                .map(|p| names[&part.class(&boundary_cell(&rep, p)).expect("boundary in partition")].clone())
                .collect();
            slots.entry((prefix.clone(), rep[len - 1].clone())).or_default().push(id);
            prefix_of.insert(id, prefix);
        }
        for ((_, name), ids) in slots {
            for id in &ids {
                let n = if ids.len() == 1 { name.clone() } else { seq(part.keys()[*id].clone()) };
                names.insert(*id, n);
            }
        }
        for c in cells {
            let id = part.class(&c).unwrap();
            let mut img = prefix_of[&id].clone();
            img.push(names[&id].clone());
            image.insert(c, img);
        }
    }
    image
}

/// Union-find closure of the free `ΓE`-algebra on the sequence graph of
/// the tuple: one partition per interval `(i, j)` of `E_{j-i}(X_{i+1..j})`.
struct Congruence<'a> {
    e: &'a dyn Multitensor,
    algs: &'a [Algebra],
    bound: usize,
    max_blocks: usize,
    nullary: bool,
    universes: BTreeMap<(usize, usize), Value>,
    parts: BTreeMap<(usize, usize), Partition<Vec<Term>>>,
    skipped: usize,
}

impl<'a> Congruence<'a> {
    fn new(e: &'a dyn Multitensor, algs: &'a [Algebra], bound: usize, max_blocks: usize) -> Self {
        let n = algs.len();
        let carriers: Vec<Value> = algs.iter().map(|a| a.carrier.clone()).collect();
        let mut universes = BTreeMap::new();
        let mut parts = BTreeMap::new();
        for i in 0..=n {
            for j in i..=n {
                let u = e.apply(&carriers[i..j], bound);
                parts.insert((i, j), Partition::from_keys(u.cells()));
                universes.insert((i, j), u);
            }
        }
        let nullary = universes[&(0, 0)].size() > 0;
        Congruence { e, algs, bound, max_blocks, nullary, universes, parts, skipped: 0 }
    }

    /// `σ(t) ∼ E(x_{i+1}, …, x_j)(t)` on `E_{j-i}(E_1X_{i+1}, …)`.
    fn seed(&mut self) {
        let n = self.algs.len();
        for i in 0..n {
            for j in i + 1..=n {
                let e1x: Vec<Value> =
                    self.algs[i..j].iter().map(|a| self.e.apply(std::slice::from_ref(&a.carrier), self.bound)).collect();
                let dom = self.e.apply(&e1x, self.bound);
                let sigma = self.e.subst(&vec![1; j - i]);
                let act = self.e.fmap(&self.algs[i..j].iter().map(|a| a.action.clone()).collect::<Vec<_>>());
                let part = self.parts.get_mut(&(i, j)).unwrap();
                for t in dom.cells() {
                    if part.union(&sigma.map_address(&t), &act.map_address(&t)).is_none() {
                        self.skipped += 1;
                    }
                }
            }
        }
    }

    fn class_maps(&mut self) -> BTreeMap<(usize, usize), Morphism> {
        let keys: Vec<(usize, usize)> = self.parts.keys().cloned().collect();
        keys.into_iter()
            .map(|k| {
                let table = quotient_table(&self.universes[&k], self.parts.get_mut(&k).unwrap());
                (k, address_lookup(Arc::new(table), vec![]))
            })
            .collect()
    }

    /// Decompositions of `(i, j)` into consecutive blocks.
    fn shapes(&self, i: usize, j: usize) -> Vec<Vec<usize>> {
        let len = j - i;
        let kmax = if self.nullary { len.max(self.max_blocks) } else { len };
        (1..=kmax)
            .flat_map(|k| compositions(len, k))
            .filter(|s| self.nullary || s.iter().all(|&b| b > 0))
            .collect()
    }

    /// One pass of `E_k(q_{blocks})(w) = E_k(q_{blocks})(w') ⟹ σ(w) ∼ σ(w')`
    /// over every interval and decomposition; returns the number of merges.
    fn round(&mut self) -> usize {
        let maps = self.class_maps();
        let mut merges = 0;
        let intervals: Vec<(usize, usize)> = self.parts.keys().cloned().collect();
        for (i, j) in intervals {
            for shape in self.shapes(i, j) {
                let mut at = i;
                let mut args = Vec::new();
                let mut qs = Vec::new();
                for &b in &shape {
                    args.push(self.universes[&(at, at + b)].clone());
                    qs.push(maps[&(at, at + b)].clone());
                    at += b;
                }
                let dom = self.e.apply(&args, self.bound);
                let key = self.e.fmap(&qs);
                let sigma = self.e.subst(&shape);
                let part = self.parts.get_mut(&(i, j)).unwrap();
                let mut first: BTreeMap<Vec<Term>, Vec<Term>> = BTreeMap::new();
                for w in dom.cells() {
                    let s = sigma.map_address(&w);
                    if !part.contains(&s) {
                        self.skipped += 1;
                        continue;
                    }
                    let k = key.map_address(&w);
                    match first.get(&k) {
                        Some(prev) => {
                            if part.union(prev, &s) == Some(true) {
                                merges += 1;
                            }
                        }
                        None => {
                            first.insert(k, s);
                        }
                    }
                }
            }
        }
        merges
    }
}

fn congruence_lift(e: &dyn Multitensor, algs: &[Algebra], bound: usize, opts: &LiftOptions) -> (LiftedValue, bool) {
    let n = algs.len();
    let mut c = Congruence::new(e, algs, bound, opts.max_blocks.unwrap_or(bound));
    c.seed();
    let mut merging_rounds = 0;
    let mut closed = false;
    for _ in 0..opts.max_rounds {
        if c.round() == 0 {
            closed = true;
            break;
        }
        merging_rounds += 1;
    }
    let univ = c.universes[&(0, n)].clone();
    let part = c.parts.get_mut(&(0, n)).unwrap();
    let class_of = quotient_table(&univ, part);
    let carrier = Value::from_cells(univ.level(), class_of.values().map(|a| a.as_slice()));
    let mut section = BTreeMap::new();
    for (a, img) in &class_of {
        section.entry(img.clone()).or_insert_with(|| a.clone());
    }
    // a∘E_1(q) = q∘σ on E_1(E_n X).
    let q = address_lookup(Arc::new(class_of.clone()), vec![]);
    let e1q = e.fmap(std::slice::from_ref(&q));
    let sigma = e.subst(&[n]);
    let mut action_table = BTreeMap::new();
    for w in e.apply(std::slice::from_ref(&univ), bound).cells() {
        if let Some(img) = class_of.get(&sigma.map_address(&w)) {
            action_table.entry(e1q.map_address(&w)).or_insert_with(|| img.clone());
        }
    }
    let action_domain = Value::from_cells(univ.level(), action_table.keys().map(|a| a.as_slice()));
    let complete = !c.nullary && c.universes.iter().all(|((i, j), u)| {
        let carriers: Vec<Value> = algs[*i..*j].iter().map(|a| a.carrier.clone()).collect();
        e.apply(&carriers, bound + 1).size() == u.size()
    });
    let stage = merging_rounds + 1;
    let (kind, detail) = if !closed {
        (CertificateKind::Exhausted, format!("closure still merging after {} rounds", opts.max_rounds))
    } else if complete {
        (CertificateKind::Stable, format!("closure stopped after {stage} rounds on complete universes"))
    } else {
        (CertificateKind::Exhausted, "closure stopped on truncated universes".to_string())
    };
    let mut cert = StabilizationCertificate::new(stage, kind, stage == 1, detail);
    if c.skipped > 0 {
        cert.detail.push_str(&format!("; {} relations left the truncation", c.skipped));
    }
    let lv = LiftedValue {
        arity: n,
        path: LiftPath::Congruence,
        presentation: univ,
        carrier,
        action: address_lookup(Arc::new(action_table), vec![]),
        action_domain,
        class_of,
        section,
        certificate: cert,
    };
    (lv, closed && complete)
}

/// Same partition of `dom`'s cells under two class maps.
fn same_partition(dom: &Value, a: &BTreeMap<Vec<Term>, Vec<Term>>, b: &BTreeMap<Vec<Term>, Vec<Term>>) -> bool {
    let mut fwd: BTreeMap<&Vec<Term>, &Vec<Term>> = BTreeMap::new();
    let mut bwd: BTreeMap<&Vec<Term>, &Vec<Term>> = BTreeMap::new();
    for c in dom.cells() {
        let (Some(x), Some(y)) = (a.get(&c), b.get(&c)) else { return false };
        if *fwd.entry(x).or_insert(y) != y || *bwd.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

fn split_lift(e: &dyn Multitensor, algs: &[Algebra], bound: usize, fork: SplitFork) -> Option<LiftedValue> {
    let n = algs.len();
    let carriers: Vec<Value> = algs.iter().map(|a| a.carrier.clone()).collect();
    let enx = e.apply(&carriers, bound);
    let q = &fork.quotient;
    let (r, s, t) = (&fork.retraction, &fork.section, &fork.lift);
    let sigma = e.subst(&vec![1; n]);
    let ex = e.fmap(&algs.iter().map(|a| a.action.clone()).collect::<Vec<_>>());
    if q.cells().iter().any(|a| r.map_address(&s.map_address(a)) != *a) {
        return None;
    }
    for a in enx.cells() {
        let lifted = t.map_address(&a);
        if sigma.map_address(&lifted) != a || ex.map_address(&lifted) != s.map_address(&r.map_address(&a)) {
            return None;
        }
    }
    let class_of: BTreeMap<Vec<Term>, Vec<Term>> = enx.cells().into_iter().map(|a| {
        let img = r.map_address(&a);
        (a, img)
    }).collect();
    if class_of.values().any(|img| !q.contains(img)) {
        return None;
    }
    let section = q.cells().into_iter().map(|a| {
        let img = s.map_address(&a);
        (a, img)
    }).collect();
    let action = Morphism::chain(&[e.fmap(std::slice::from_ref(s)), e.subst(&[n]), r.clone()]);
    Some(LiftedValue {
        arity: n,
        path: LiftPath::Split,
        presentation: enx,
        carrier: q.clone(),
        action,
        action_domain: e.apply(std::slice::from_ref(q), bound),
        class_of,
        section,
        certificate: StabilizationCertificate::new(1, CertificateKind::Split, true, "basic coequaliser is a split fork"),
    })
}

fn forced_lift(e: &dyn Multitensor, algs: &[Algebra], bound: usize) -> LiftedValue {
    let (carrier, action) = match algs {
        [] => (e.apply(&[], bound), e.subst(&[0])),
        [a] => (a.carrier.clone(), a.action.clone()),
        _ => unreachable!("forced values exist in arities 0 and 1"),
    };
    LiftedValue {
        arity: algs.len(),
        path: LiftPath::Forced,
        presentation: carrier.clone(),
        action_domain: e.apply(std::slice::from_ref(&carrier), bound),
        class_of: identity_table(&carrier),
        section: identity_table(&carrier),
        carrier,
        action,
        certificate: StabilizationCertificate::new(
            1,
            CertificateKind::Split,
            true,
            "basic coequaliser is absolute in arities 0 and 1",
        ),
    }
}

/// `E′(X_1, …, X_n)` for one tuple of `E_1`-algebras.
pub fn lift_tuple(e: &dyn Multitensor, algs: &[Algebra], bound: usize, opts: &LiftOptions) -> LiftedValue {
    if opts.force_small && algs.len() <= 1 {
        return forced_lift(e, algs, bound);
    }
    if let Some(split) = &opts.splitting {
        if let Some(lv) = split_lift(e, algs, bound, split(algs)) {
            return lv;
        }
    }
    let (mut lv, certified) = congruence_lift(e, algs, bound, opts);
    if !certified && opts.certify && lv.certificate.detail.starts_with("closure stopped on truncated") {
        let (check, _) = congruence_lift(e, algs, bound + 1, &LiftOptions { certify: false, ..opts.clone() });
        if same_partition(&lv.presentation, &lv.class_of, &check.class_of) {
            lv.certificate.kind = CertificateKind::Stable;
            lv.certificate.detail = format!("closure unchanged at bound {}", bound + 1);
        }
    }
    lv
}

/// A lifted multitensor evaluated on a list of tuples.
#[derive(Clone)]
pub struct LiftedMultitensor {
    pub e: Mt,
    pub bound: usize,
    pub options: LiftOptions,
    pub values: Vec<LiftedValue>,
}

pub fn lift_multitensor(e: Mt, tuples: &[Vec<Algebra>], bound: usize, options: LiftOptions) -> LiftedMultitensor {
    let values = tuples.iter().map(|algs| lift_tuple(e.as_ref(), algs, bound, &options)).collect();
    LiftedMultitensor { e, bound, options, values }
}

/// `σ′` for one block decomposition, as a table from cells of the outer
/// lifted value to cells of the lifted value of the concatenation.
#[derive(Clone)]
pub struct Substitution {
    pub outer: LiftedValue,
    pub inner: Vec<LiftedValue>,
    pub total: LiftedValue,
    pub table: BTreeMap<Vec<Term>, Vec<Term>>,
    pub well_defined: bool,
    pub witness: Option<String>,
}

impl LiftedMultitensor {
    pub fn unary(&self) -> UnaryPart {
        UnaryPart { e: self.e.clone() }
    }

    pub fn certified(&self) -> bool {
        self.values.iter().all(|v| v.certificate.certified())
    }

    /// `σ′(E′_k(E′(block_1), …))`: lift every cell of the outer presentation
    /// through the inner sections, substitute, and take the class.
    pub fn substitution(&self, blocks: &[Vec<Algebra>]) -> Substitution {
        let e = self.e.as_ref();
        let inner: Vec<LiftedValue> = blocks.iter().map(|b| lift_tuple(e, b, self.bound, &self.options)).collect();
        let inner_algs: Vec<Algebra> = inner.iter().map(|l| l.algebra()).collect();
        let outer = lift_tuple(e, &inner_algs, self.bound, &self.options);
        let all: Vec<Algebra> = blocks.iter().flatten().cloned().collect();
        let total = lift_tuple(e, &all, self.bound, &self.options);
        let sections: Vec<Morphism> = inner.iter().map(|l| l.section_map()).collect();
        let up = e.fmap(&sections);
        let sigma = e.subst(&blocks.iter().map(|b| b.len()).collect::<Vec<_>>());
        let mut table = BTreeMap::new();
        let mut witness = None;
        for w in outer.presentation.cells() {
            let Some(target) = total.class_of.get(&sigma.map_address(&up.map_address(&w))) else { continue };
            let src = outer.class_of[&w].clone();
            match table.get(&src) {
                Some(prev) if prev != target => {
                    witness.get_or_insert(format!("{} has two images", show(&src)));
                }
                Some(_) => {}
                None => {
                    table.insert(src, target.clone());
                }
            }
        }
        Substitution { well_defined: witness.is_none(), witness, outer, inner, total, table }
    }
}

/// The lift of a lax monoidal functor `ψ: F → E` (identity on the base) at
/// a tuple of `E_1`-algebras: `[w] ↦ [ψ(w)]` from `F′` at the algebras
/// pulled back along `ψ_1` to `E′`.
#[derive(Clone)]
pub struct Functoriality {
    pub source: LiftedValue,
    pub target: LiftedValue,
    pub table: BTreeMap<Vec<Term>, Vec<Term>>,
    pub well_defined: bool,
    pub surjective: bool,
    pub witness: Option<String>,
}

pub fn lift_functoriality(
    l: &LaxMonoidalFunctor,
    algs: &[Algebra],
    bound: usize,
    from_options: &LiftOptions,
    to_options: &LiftOptions,
) -> Functoriality {
    let psi1 = (l.psi)(1);
    let pulled: Vec<Algebra> = algs
        .iter()
        .map(|a| Algebra { carrier: a.carrier.clone(), action: Morphism::compose(&a.action, &psi1) })
        .collect();
    let source = lift_tuple(l.from.as_ref(), &pulled, bound, from_options);
    let target = lift_tuple(l.to.as_ref(), algs, bound, to_options);
    let psi = (l.psi)(algs.len());
    let mut table = BTreeMap::new();
    let mut witness = None;
    for w in source.presentation.cells() {
        let Some(img) = target.class_of.get(&psi.map_address(&w)) else { continue };
        let src = source.class_of[&w].clone();
        match table.get(&src) {
            Some(prev) if prev != img => {
                witness.get_or_insert(format!("{} has two images", show(&src)));
            }
            Some(_) => {}
            None => {
                table.insert(src, img.clone());
            }
        }
    }
    let hit: BTreeSet<&Vec<Term>> = table.values().collect();
    let surjective = target.carrier.cells().iter().all(|c| hit.contains(c));
    Functoriality { well_defined: witness.is_none(), witness, source, target, table, surjective }
}
