//! Line-oriented text formats and JSON forms for the CLI's inputs.
//!
//! Every text format is a list of sections. A section starts with an
//! upper-case keyword on its own line (optionally followed by arguments)
//! and `#` starts a comment. Names are atoms, or integers when numeric.
//!
//! ```text
//! # finite category              # globular set
//! OBJECTS                        DIM 2
//! a b                            CELLS
//! ARROWS                         0 : a b
//! f : a -> b                     1 : f g
//! COMPOSE                        2 : alpha
//! IDENTITIES                     SOURCE
//! a = 1a                         f = a
//!                                alpha = f
//! # graph of sets                TARGET
//! OBJECTS                        f = b
//! a b                            alpha = g
//! HOM a b = {f, g}
//! ```
//!
//! Identities not listed are named `id_<object>`, and composites with
//! identities are filled in. `COMPOSE` lines read `g . f = h` for `g∘f`.
//! Further formats: `ELEMENTS`/`ACT` (a set with a monoid action),
//! `ELEMENTS`/`UNIT`/`MUL` (a finite monoid), `GENERATORS`/`RELATIONS`
//! (a monoid presentation, `ε` for the empty word) and `OPERAD` with
//! `UNIT`, `TAIL yes|no`, `ARITY n : ops` and `COMPOSE q p1 … pk = r`.

use crate::base_kernel::{Arrow, FiniteCategory, GlobularSet};
use crate::enriched_graph::{Graph, Value};
use crate::operad::{FiniteMonoid, TableOperad};
use crate::term::{atom, int, op, seq, Term};
use crate::{Error, Result};
use serde_json::{json, Map, Value as Json};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

fn perr(t: &Token, message: impl Into<String>) -> Error {
    Error::Parse { line: t.line, column: t.column, message: message.into() }
}

const PUNCT: [&str; 7] = ["->", ":", "=", ",", "{", "}", "."];

fn tokenize_line(line: &str, lineno: usize) -> Vec<Token> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    let col = |i: usize| line[..chars.get(i).map(|c| c.0).unwrap_or(line.len())].chars().count() + 1;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest = &line[chars[i].0..];
        if let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) {
            // a dot inside a name stays part of it
            if *p != "." || rest.len() == 1 || rest[1..].starts_with(char::is_whitespace) {
                out.push(Token { text: p.to_string(), line: lineno, column: col(i) });
                i += p.chars().count();
                continue;
            }
        }
        let start = i;
        while i < chars.len() {
            let r = &line[chars[i].0..];
            if chars[i].1.is_whitespace() || ["->", ":", "=", ",", "{", "}"].iter().any(|p| r.starts_with(p)) {
                break;
            }
            i += 1;
        }
        let end = chars.get(i).map(|c| c.0).unwrap_or(line.len());
        out.push(Token { text: line[chars[start].0..end].to_string(), line: lineno, column: col(start) });
    }
    out
}

fn name(t: &Token) -> Result<Term> {
    if PUNCT.contains(&t.text.as_str()) {
        return Err(perr(t, format!("expected a name, found '{}'", t.text)));
    }
    Ok(match t.text.parse::<i64>() {
        Ok(i) => int(i),
        Err(_) => atom(&t.text),
    })
}

fn is_keyword(t: &Token) -> bool {
    t.text.len() > 1 && t.text.chars().all(|c| c.is_ascii_uppercase())
}

/// A section: its header tokens and the token lines under it.
struct Section {
    header: Vec<Token>,
    lines: Vec<Vec<Token>>,
}

fn sections(src: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let toks = tokenize_line(line, i + 1);
        if toks.is_empty() {
            continue;
        }
        if is_keyword(&toks[0]) {
            out.push(Section { header: toks, lines: vec![] });
        } else {
            match out.last_mut() {
                Some(s) => s.lines.push(toks),
                None => return Err(perr(&toks[0], "content before the first section")),
            }
        }
    }
    Ok(out)
}

fn keyword(s: &Section) -> &str {
    &s.header[0].text
}

fn expect(toks: &[Token], i: usize, what: &str, fallback: &Token) -> Result<()> {
    match toks.get(i) {
        Some(t) if t.text == what => Ok(()),
        Some(t) => Err(perr(t, format!("expected '{what}', found '{}'", t.text))),
        None => Err(perr(fallback, format!("expected '{what}' at end of line"))),
    }
}

fn names(toks: &[Token]) -> Result<Vec<Term>> {
    toks.iter().filter(|t| t.text != ",").map(name).collect()
}

fn at<'a>(toks: &'a [Token], i: usize, fallback: &Token) -> Result<&'a Token> {
    toks.get(i).ok_or_else(|| perr(fallback, "line ends early"))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

/// Any parsed input.
#[derive(Clone, Debug)]
pub enum Input {
    Category(FiniteCategory),
    Globular(GlobularSet),
    Graph(Value),
    Operad(TableOperad),
    MSet(MSet),
    Monoid(FiniteMonoid),
    Presentation(Presentation),
    Set(Value),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Category(_) => "category",
            Input::Globular(_) => "globular",
            Input::Graph(_) => "graph",
            Input::Operad(_) => "operad",
            Input::MSet(_) => "mset",
            Input::Monoid(_) => "monoid",
            Input::Presentation(_) => "presentation",
            Input::Set(_) => "set",
        }
    }
}

/// A set with an action of monoid labels: `act[(m, x)] = m·x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MSet {
    pub elements: Vec<Term>,
    pub act: BTreeMap<(Term, Term), Term>,
}

/// Generators and relations `lhs = rhs` between words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub generators: Vec<Term>,
    pub relations: Vec<(Vec<Term>, Vec<Term>)>,
}

/// Parses any text format, detecting it from the section keywords, or
/// the JSON form when the text starts with `{`.
pub fn parse(src: &str) -> Result<Input> {
    if src.trim_start().starts_with('{') {
        let j: Json = serde_json::from_str(src)
            .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        return from_json(&j);
    }
    let secs = sections(src)?;
    let has = |k: &str| secs.iter().any(|s| keyword(s) == k);
    if has("OPERAD") {
        parse_operad(&secs).map(Input::Operad)
    } else if has("CELLS") || has("DIM") {
        parse_globular(&secs).map(Input::Globular)
    } else if has("ARROWS") {
        parse_category(&secs).map(Input::Category)
    } else if has("OBJECTS") {
        parse_graph(&secs).map(Input::Graph)
    } else if has("GENERATORS") {
        parse_presentation(&secs).map(Input::Presentation)
    } else if has("ACT") {
        parse_mset(&secs).map(Input::MSet)
    } else if has("MUL") || has("UNIT") {
        parse_monoid(&secs).map(Input::Monoid)
    } else if has("ELEMENTS") {
        let els = element_list(&secs)?;
        Ok(Input::Set(Value::set(els)))
    } else {
        Err(Error::Parse { line: 1, column: 1, message: "no recognised section".into() })
    }
}

pub fn parse_file(path: &std::path::Path) -> Result<Input> {
    let src = std::fs::read_to_string(path)?;
    parse(&src)
}

fn check_sections(secs: &[Section], allowed: &[&str]) -> Result<()> {
    for s in secs {
        if !allowed.contains(&keyword(s)) {
            return Err(perr(&s.header[0], format!("unexpected section {}", keyword(s))));
        }
    }
    Ok(())
}

fn section_lines<'a>(secs: &'a [Section], k: &str) -> impl Iterator<Item = &'a Vec<Token>> + 'a {
    let k = k.to_string();
    secs.iter().filter(move |s| keyword(s) == k).flat_map(|s| s.lines.iter())
}

fn element_list(secs: &[Section]) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for s in secs.iter().filter(|s| keyword(s) == "ELEMENTS" || keyword(s) == "OBJECTS") {
        out.extend(names(&s.header[1..])?);
        for l in &s.lines {
            out.extend(names(l)?);
        }
    }
    Ok(out)
}

fn parse_category(secs: &[Section]) -> Result<FiniteCategory> {
    check_sections(secs, &["OBJECTS", "ARROWS", "COMPOSE", "IDENTITIES"])?;
    let mut c = FiniteCategory::empty();
    c.objects = element_list(secs)?;
    for l in section_lines(secs, "IDENTITIES") {
        expect(l, 1, "=", &l[0])?;
        let (o, i) = (name(&l[0])?, name(at(l, 2, &l[0])?)?);
        c.identities.insert(o.clone(), i.clone());
        c.arrows.push(Arrow { id: i, source: o.clone(), target: o });
    }
    for o in c.objects.clone() {
        if !c.identities.contains_key(&o) {
            let i = atom(&format!("id_{o}"));
            c.identities.insert(o.clone(), i.clone());
            c.arrows.push(Arrow { id: i, source: o.clone(), target: o });
        }
    }
    for l in section_lines(secs, "ARROWS") {
        expect(l, 1, ":", &l[0])?;
        expect(l, 3, "->", &l[0])?;
        let a = Arrow { id: name(&l[0])?, source: name(at(l, 2, &l[0])?)?, target: name(at(l, 4, &l[0])?)? };
        if let Some(extra) = l.get(5) {
            return Err(perr(extra, "unexpected token after the target"));
        }
        c.arrows.push(a);
    }
    for l in section_lines(secs, "COMPOSE") {
        let (g, dot_at) = (name(&l[0])?, 1);
        let f = if at(l, dot_at, &l[0])?.text == "." || at(l, dot_at, &l[0])?.text == "∘" { name(at(l, 2, &l[0])?)? } else {
            return Err(perr(&l[1], "expected '.' between the composed arrows"));
        };
        expect(l, 3, "=", &l[0])?;
        let h = name(at(l, 4, &l[0])?)?;
        c.compose.insert((g, f), h);
    }
    fill_identity_composites(&mut c);
    c.validate()?;
    Ok(c)
}

fn fill_identity_composites(c: &mut FiniteCategory) {
    for f in c.arrows.clone() {
        let (ia, ib) = (c.identities.get(&f.source).cloned(), c.identities.get(&f.target).cloned());
        if let Some(ia) = ia {
            c.compose.entry((f.id.clone(), ia)).or_insert(f.id.clone());
        }
        if let Some(ib) = ib {
            c.compose.entry((ib, f.id.clone())).or_insert(f.id.clone());
        }
    }
}

fn parse_globular(secs: &[Section]) -> Result<GlobularSet> {
    check_sections(secs, &["DIM", "CELLS", "SOURCE", "TARGET"])?;
    let mut declared: Vec<(usize, Term, Token)> = Vec::new();
    for l in section_lines(secs, "CELLS") {
        expect(l, 1, ":", &l[0])?;
        let k: usize = l[0].text.parse().map_err(|_| perr(&l[0], "expected a dimension"))?;
        for t in l[2..].iter().filter(|t| t.text != ",") {
            declared.push((k, name(t)?, t.clone()));
        }
    }
    let mut dim = declared.iter().map(|d| d.0).max().unwrap_or(0);
    if let Some(s) = secs.iter().find(|s| keyword(s) == "DIM") {
        let t = at(&s.header, 1, &s.header[0])?;
        let d: usize = t.text.parse().map_err(|_| perr(t, "expected a dimension"))?;
        if d < dim {
            return Err(perr(t, format!("a {dim}-cell is declared above dimension {d}")));
        }
        dim = d;
    }
    let mut seen = BTreeMap::new();
    for (k, c, t) in &declared {
        if seen.insert(c.clone(), *k).is_some() {
            return Err(perr(t, format!("cell {c} is declared twice")));
        }
    }
    let ends = |k: &str| -> Result<BTreeMap<Term, (Term, Token)>> {
        let mut m = BTreeMap::new();
        for l in section_lines(secs, k) {
            expect(l, 1, "=", &l[0])?;
            let c = name(&l[0])?;
            if !seen.contains_key(&c) {
                return Err(perr(&l[0], format!("unknown cell {c}")));
            }
            m.insert(c, (name(at(l, 2, &l[0])?)?, l[0].clone()));
        }
        Ok(m)
    };
    let (src, tgt) = (ends("SOURCE")?, ends("TARGET")?);
    let mut g = GlobularSet::empty(dim);
    for k in 0..=dim {
        for (kk, c, t) in &declared {
            if *kk != k {
                continue;
            }
            if k == 0 {
                g.add(0, c.clone(), None, None);
                continue;
            }
            let s = src.get(c).map(|x| x.0.clone()).ok_or_else(|| perr(t, format!("{k}-cell {c} has no source")))?;
            let tt = tgt.get(c).map(|x| x.0.clone()).ok_or_else(|| perr(t, format!("{k}-cell {c} has no target")))?;
            g.add(k, c.clone(), Some(s), Some(tt));
        }
    }
    g.validate()?;
    Ok(g)
}

fn parse_graph(secs: &[Section]) -> Result<Value> {
    check_sections(secs, &["OBJECTS", "HOM"])?;
    let mut g = Graph::new(1);
    for o in element_list(secs)? {
        g.add_object(o);
    }
    for s in secs.iter().filter(|s| keyword(s) == "HOM") {
        let h = &s.header;
        let (a, b) = (name(at(h, 1, &h[0])?)?, name(at(h, 2, &h[0])?)?);
        expect(h, 3, "=", &h[0])?;
        expect(h, 4, "{", &h[0])?;
        let close = h.iter().position(|t| t.text == "}").ok_or_else(|| perr(h.last().unwrap(), "missing '}'"))?;
        let els = names(&h[5..close])?;
        for o in [&a, &b] {
            if !g.objects.contains(o) {
                return Err(perr(&h[1], format!("unknown object {o}")));
            }
        }
        g.set_hom(a, b, Value::set(els));
    }
    Ok(Value::Graph(g))
}

fn parse_mset(secs: &[Section]) -> Result<MSet> {
    check_sections(secs, &["ELEMENTS", "ACT"])?;
    let elements = element_list(secs)?;
    let mut act = BTreeMap::new();
    for l in section_lines(secs, "ACT") {
        expect(l, 2, "=", &l[0])?;
        let (m, x, y) = (name(&l[0])?, name(at(l, 1, &l[0])?)?, name(at(l, 3, &l[0])?)?);
        for e in [&x, &y] {
            if !elements.contains(e) {
                return Err(perr(&l[1], format!("unknown element {e}")));
            }
        }
        act.insert((m, x), y);
    }
    Ok(MSet { elements, act })
}

fn parse_monoid(secs: &[Section]) -> Result<FiniteMonoid> {
    check_sections(secs, &["ELEMENTS", "UNIT", "MUL"])?;
    let elements = element_list(secs)?;
    let u = secs.iter().find(|s| keyword(s) == "UNIT").ok_or_else(|| invalid("monoid without UNIT"))?;
    let unit = name(at(&u.header, 1, &u.header[0])?)?;
    let mut table = BTreeMap::new();
    for l in section_lines(secs, "MUL") {
        expect(l, 2, "=", &l[0])?;
        table.insert((name(&l[0])?, name(at(l, 1, &l[0])?)?), name(at(l, 3, &l[0])?)?);
    }
    for a in &elements {
        for b in &elements {
            if a == &unit {
                table.entry((a.clone(), b.clone())).or_insert(b.clone());
            } else if b == &unit {
                table.entry((a.clone(), b.clone())).or_insert(a.clone());
            } else if !table.contains_key(&(a.clone(), b.clone())) {
                return Err(invalid(format!("product {a} {b} is missing")));
            }
        }
    }
    let m = FiniteMonoid::from_fn(elements, unit, |a, b| table[&(a.clone(), b.clone())].clone());
    m.validate()?;
    Ok(m)
}

fn word(toks: &[Token]) -> Result<Vec<Term>> {
    if toks.len() == 1 && (toks[0].text == "ε" || toks[0].text == "1") {
        return Ok(vec![]);
    }
    names(toks)
}

fn parse_presentation(secs: &[Section]) -> Result<Presentation> {
    check_sections(secs, &["GENERATORS", "RELATIONS"])?;
    let mut generators = Vec::new();
    for s in secs.iter().filter(|s| keyword(s) == "GENERATORS") {
        generators.extend(names(&s.header[1..])?);
        for l in &s.lines {
            generators.extend(names(l)?);
        }
    }
    if let Some(bad) = generators.iter().find(|g| **g == atom("ε") || **g == int(1)) {
        return Err(invalid(format!("{bad} denotes the empty word and cannot be a generator")));
    }
    let mut relations = Vec::new();
    for l in section_lines(secs, "RELATIONS") {
        let eq = l.iter().position(|t| t.text == "=").ok_or_else(|| perr(&l[0], "relation without '='"))?;
        let (lhs, rhs) = (word(&l[..eq])?, word(&l[eq + 1..])?);
        for x in lhs.iter().chain(&rhs) {
            if !generators.contains(x) {
                return Err(perr(&l[0], format!("unknown generator {x}")));
            }
        }
        relations.push((lhs, rhs));
    }
    Ok(Presentation { generators, relations })
}

fn parse_operad(secs: &[Section]) -> Result<TableOperad> {
    check_sections(secs, &["OPERAD", "UNIT", "TAIL", "ARITY", "COMPOSE"])?;
    let header = secs.iter().find(|s| keyword(s) == "OPERAD").unwrap();
    let op_name = header.header.get(1).map(|t| t.text.clone()).unwrap_or_else(|| "table".into());
    let u = secs.iter().find(|s| keyword(s) == "UNIT").ok_or_else(|| invalid("operad without UNIT"))?;
    let unit = name(at(&u.header, 1, &u.header[0])?)?;
    let tail = match secs.iter().find(|s| keyword(s) == "TAIL") {
        None => false,
        Some(s) => match at(&s.header, 1, &s.header[0])?.text.as_str() {
            "yes" => true,
            "no" => false,
            _ => return Err(perr(&s.header[1], "expected yes or no")),
        },
    };
    let mut ops: Vec<Vec<Term>> = Vec::new();
    for s in secs.iter().filter(|s| keyword(s) == "ARITY") {
        let h = &s.header;
        let t = at(h, 1, &h[0])?;
        let n: usize = t.text.parse().map_err(|_| perr(t, "expected an arity"))?;
        expect(h, 2, ":", &h[0])?;
        if ops.len() <= n {
            ops.resize(n + 1, vec![]);
        }
        ops[n].extend(names(&h[3..])?);
    }
    if ops.len() < 2 {
        ops.resize(2, vec![]);
    }
    if !ops[1].contains(&unit) {
        ops[1].insert(0, unit.clone());
    }
    let mut table = BTreeMap::new();
    for s in secs.iter().filter(|s| keyword(s) == "COMPOSE") {
        let h = &s.header;
        let eq = h.iter().position(|t| t.text == "=").ok_or_else(|| perr(&h[0], "composition without '='"))?;
        let lhs = names(&h[1..eq])?;
        let r = name(at(h, eq + 1, &h[0])?)?;
        let (q, ps) = lhs.split_first().ok_or_else(|| perr(&h[0], "missing operation"))?;
        table.insert((q.clone(), ps.to_vec()), r);
    }
    let max = ops.len() - 1;
    for (n, os) in ops.iter().enumerate() {
        for p in os {
            table.entry((unit.clone(), vec![p.clone()])).or_insert(p.clone());
            table.entry((p.clone(), vec![unit.clone(); n])).or_insert(p.clone());
        }
    }
    let o = TableOperad { name: op_name, ops, unit, table, tail };
    o.validate(max)?;
    Ok(o)
}

// ---------------------------------------------------------------------------
// JSON

pub fn term_from_json(j: &Json) -> Result<Term> {
    match j {
        Json::String(s) => Ok(atom(s)),
        Json::Number(n) => n.as_i64().map(int).ok_or_else(|| invalid(format!("{n} is not an integer"))),
        Json::Array(xs) => Ok(seq(xs.iter().map(term_from_json).collect::<Result<_>>()?)),
        Json::Object(m) if m.contains_key("op") => {
            let l = term_from_json(&m["op"])?;
            let args = match m.get("args") {
                Some(Json::Array(xs)) => xs.iter().map(term_from_json).collect::<Result<_>>()?,
                _ => vec![],
            };
            Ok(op(l, args))
        }
        other => Err(invalid(format!("cannot read a name from {other}"))),
    }
}

fn terms(j: Option<&Json>, what: &str) -> Result<Vec<Term>> {
    match j {
        Some(Json::Array(xs)) => xs.iter().map(term_from_json).collect(),
        None => Ok(vec![]),
        _ => Err(invalid(format!("{what} must be an array"))),
    }
}

pub fn value_from_json(j: &Json) -> Result<Value> {
    match j {
        Json::Array(_) => Ok(Value::set(terms(Some(j), "set")?)),
        Json::Object(m) => {
            let level = m.get("level").and_then(Json::as_u64).ok_or_else(|| invalid("graph without level"))? as usize;
            let mut g = Graph::new(level);
            for o in terms(m.get("objects"), "objects")? {
                g.add_object(o);
            }
            if let Some(Json::Array(homs)) = m.get("homs") {
                for h in homs {
                    let get = |k: &str| h.get(k).ok_or_else(|| invalid(format!("hom entry without {k}")));
                    let (a, b) = (term_from_json(get("source")?)?, term_from_json(get("target")?)?);
                    let v = value_from_json(get("value")?)?;
                    if v.level() + 1 != level.max(1) || (level == 0) {
                        return Err(invalid(format!("hom {a} {b} has the wrong level")));
                    }
                    g.set_hom(a, b, v);
                }
            }
            Ok(Value::Graph(g))
        }
        other => Err(invalid(format!("cannot read a value from {other}"))),
    }
}

fn pairs_from_json(j: Option<&Json>, what: &str) -> Result<Vec<Vec<Term>>> {
    match j {
        Some(Json::Array(xs)) => xs.iter().map(|x| terms(Some(x), what)).collect(),
        None => Ok(vec![]),
        _ => Err(invalid(format!("{what} must be an array of arrays"))),
    }
}

/// Reads the `kind`-tagged JSON written by [`to_json`].
pub fn from_json(j: &Json) -> Result<Input> {
    let kind = j.get("kind").and_then(Json::as_str).ok_or_else(|| invalid("JSON input without kind"))?;
    match kind {
        "category" => {
            let mut c = FiniteCategory::empty();
            c.objects = terms(j.get("objects"), "objects")?;
            if let Some(Json::Array(arrows)) = j.get("arrows") {
                for a in arrows {
                    let get = |k: &str| a.get(k).ok_or_else(|| invalid(format!("arrow without {k}"))).and_then(term_from_json);
                    c.arrows.push(Arrow { id: get("id")?, source: get("source")?, target: get("target")? });
                }
            }
            for p in pairs_from_json(j.get("identities"), "identities")? {
                if let [o, i] = p.as_slice() {
                    c.identities.insert(o.clone(), i.clone());
                } else {
                    return Err(invalid("identity entries are [object, arrow]"));
                }
            }
            for t in pairs_from_json(j.get("compose"), "compose")? {
                if let [g, f, h] = t.as_slice() {
                    c.compose.insert((g.clone(), f.clone()), h.clone());
                } else {
                    return Err(invalid("compose entries are [g, f, g∘f]"));
                }
            }
            fill_identity_composites(&mut c);
            c.validate()?;
            Ok(Input::Category(c))
        }
        "globular" => {
            let dim = j.get("dim").and_then(Json::as_u64).unwrap_or(0) as usize;
            let cells = pairs_from_json(j.get("cells"), "cells")?;
            let ends = |k: &str| -> Result<BTreeMap<Term, Term>> {
                pairs_from_json(j.get(k), k)?
                    .into_iter()
                    .map(|p| match p.as_slice() {
                        [c, e] => Ok((c.clone(), e.clone())),
                        _ => Err(invalid(format!("{k} entries are [cell, end]"))),
                    })
                    .collect()
            };
            let (src, tgt) = (ends("source")?, ends("target")?);
            let mut g = GlobularSet::empty(dim.max(cells.len().saturating_sub(1)));
            for (k, cs) in cells.iter().enumerate() {
                for c in cs {
                    if k == 0 {
                        g.add(0, c.clone(), None, None);
                    } else {
                        let s = src.get(c).cloned().ok_or_else(|| invalid(format!("{k}-cell {c} has no source")))?;
                        let t = tgt.get(c).cloned().ok_or_else(|| invalid(format!("{k}-cell {c} has no target")))?;
                        g.add(k, c.clone(), Some(s), Some(t));
                    }
                }
            }
            g.validate()?;
            Ok(Input::Globular(g))
        }
        "graph" => Ok(Input::Graph(value_from_json(j.get("value").ok_or_else(|| invalid("graph without value"))?)?)),
        "set" => Ok(Input::Set(Value::set(terms(j.get("elements"), "elements")?))),
        other => Err(invalid(format!("JSON inputs of kind {other} are not supported; use the text format"))),
    }
}

fn jt(t: &Term) -> Json {
    serde_json::to_value(t).expect("terms serialise")
}

/// JSON form of an input; categories, globular sets, graphs and sets read
/// back through [`from_json`].
pub fn to_json(x: &Input) -> Json {
    match x {
        Input::Category(c) => json!({
            "kind": "category",
            "objects": c.objects.iter().map(jt).collect::<Vec<_>>(),
            "arrows": c.arrows.iter().map(|a| json!({"id": jt(&a.id), "source": jt(&a.source), "target": jt(&a.target)})).collect::<Vec<_>>(),
            "identities": c.identities.iter().map(|(o, i)| json!([jt(o), jt(i)])).collect::<Vec<_>>(),
            "compose": c.compose.iter().map(|((g, f), h)| json!([jt(g), jt(f), jt(h)])).collect::<Vec<_>>(),
        }),
        Input::Globular(g) => {
            let ends = |m: &[BTreeMap<Term, Term>]| m.iter().flat_map(|mk| mk.iter().map(|(c, e)| json!([jt(c), jt(e)]))).collect::<Vec<_>>();
            json!({
                "kind": "globular",
                "dim": g.dim,
                "cells": g.cells.iter().map(|cs| cs.iter().map(jt).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "source": ends(&g.src),
                "target": ends(&g.tgt),
            })
        }
        Input::Graph(v) => json!({"kind": "graph", "value": serde_json::to_value(v).unwrap()}),
        Input::Set(v) => json!({"kind": "set", "elements": v.objects().iter().map(jt).collect::<Vec<_>>()}),
        Input::Operad(o) => {
            let mut table: Vec<Json> = o.table.iter().map(|((q, ps), r)| json!({"outer": jt(q), "inner": ps.iter().map(jt).collect::<Vec<_>>(), "result": jt(r)})).collect();
            table.sort_by_key(|v| v.to_string());
            json!({
                "kind": "operad",
                "name": o.name,
                "unit": jt(&o.unit),
                "tail": o.tail,
                "ops": o.ops.iter().map(|os| os.iter().map(jt).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "compose": table,
            })
        }
        Input::MSet(m) => json!({
            "kind": "mset",
            "elements": m.elements.iter().map(jt).collect::<Vec<_>>(),
            "act": m.act.iter().map(|((a, x), y)| json!([jt(a), jt(x), jt(y)])).collect::<Vec<_>>(),
        }),
        Input::Monoid(m) => {
            let mut mul = Map::new();
            for a in &m.elements {
                for b in &m.elements {
                    mul.insert(format!("{a} {b}"), jt(&m.mul(a, b)));
                }
            }
            json!({"kind": "monoid", "elements": m.elements.iter().map(jt).collect::<Vec<_>>(), "unit": jt(&m.unit), "mul": mul})
        }
        Input::Presentation(p) => json!({
            "kind": "presentation",
            "generators": p.generators.iter().map(jt).collect::<Vec<_>>(),
            "relations": p.relations.iter().map(|(l, r)| json!([l.iter().map(jt).collect::<Vec<_>>(), r.iter().map(jt).collect::<Vec<_>>()])).collect::<Vec<_>>(),
        }),
    }
}

fn line(items: &[Term]) -> String {
    items.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

/// Whether `t` reads back as itself from the text grammar.
fn plain_name(t: &Term) -> bool {
    match t {
        Term::Int(_) => true,
        Term::Atom(a) => {
            !a.is_empty()
                && a.parse::<i64>().is_err()
                && &**a != "ε"
                && !a.ends_with('.')
                && !(a.len() > 1 && a.chars().all(|c| c.is_ascii_uppercase()))
                && !a.chars().any(|c| c.is_whitespace() || "#:=,{}".contains(c))
                && !a.contains("->")
        }
        _ => false,
    }
}

fn names_of(x: &Input) -> Vec<Term> {
    match x {
        Input::Category(c) => c.objects.iter().chain(c.arrows.iter().map(|a| &a.id)).cloned().collect(),
        Input::Globular(g) => g.cells.iter().flatten().cloned().collect(),
        Input::Graph(Value::Graph(g)) => g.objects.iter().cloned().chain(g.homs.values().flat_map(|v| v.objects())).collect(),
        Input::Graph(_) => vec![],
        Input::Set(v) => v.objects(),
        Input::MSet(m) => m.elements.iter().chain(m.act.keys().map(|(a, _)| a)).cloned().collect(),
        Input::Monoid(m) => m.elements.clone(),
        Input::Presentation(p) => p.generators.clone(),
        Input::Operad(o) => o.ops.iter().flatten().cloned().collect(),
    }
}

/// Text form of an input, in the grammar [`parse`] reads. Compound names,
/// such as the pairs naming objects of a product, only have a JSON form.
pub fn to_text(x: &Input) -> Result<String> {
    if let Some(t) = names_of(x).iter().find(|t| !plain_name(t)) {
        return Err(invalid(format!("{t} has no text form; use JSON")));
    }
    let mut s = String::new();
    match x {
        Input::Category(c) => {
            s += &format!("OBJECTS\n{}\n", line(&c.objects));
            let ids: BTreeSet<&Term> = c.identities.values().collect();
            s += "IDENTITIES\n";
            for (o, i) in &c.identities {
                s += &format!("{o} = {i}\n");
            }
            s += "ARROWS\n";
            for a in c.arrows.iter().filter(|a| !ids.contains(&a.id)) {
                s += &format!("{} : {} -> {}\n", a.id, a.source, a.target);
            }
            s += "COMPOSE\n";
            for ((g, f), h) in &c.compose {
                if !ids.contains(g) && !ids.contains(f) {
                    s += &format!("{g} . {f} = {h}\n");
                }
            }
        }
        Input::Globular(g) => {
            s += &format!("DIM {}\nCELLS\n", g.dim);
            for (k, cs) in g.cells.iter().enumerate() {
                s += &format!("{k} : {}\n", line(cs));
            }
            for (kw, m) in [("SOURCE", &g.src), ("TARGET", &g.tgt)] {
                s += &format!("{kw}\n");
                for (k, mk) in m.iter().enumerate() {
                    for c in &g.cells[k] {
                        if let Some(e) = mk.get(c) {
                            s += &format!("{c} = {e}\n");
                        }
                    }
                }
            }
        }
        Input::Graph(Value::Graph(g)) if g.level == 1 => {
            s += &format!("OBJECTS\n{}\n", line(&g.objects.iter().cloned().collect::<Vec<_>>()));
            for ((a, b), v) in &g.homs {
                let els: Vec<String> = v.objects().iter().map(|t| t.to_string()).collect();
                s += &format!("HOM {a} {b} = {{{}}}\n", els.join(", "));
            }
        }
        Input::Set(v) => s += &format!("ELEMENTS\n{}\n", line(&v.objects())),
        Input::MSet(m) => {
            s += &format!("ELEMENTS\n{}\nACT\n", line(&m.elements));
            for ((a, x), y) in &m.act {
                s += &format!("{a} {x} = {y}\n");
            }
        }
        Input::Monoid(m) => {
            s += &format!("ELEMENTS\n{}\nUNIT {}\nMUL\n", line(&m.elements), m.unit);
            for a in &m.elements {
                for b in &m.elements {
                    s += &format!("{a} {b} = {}\n", m.mul(a, b));
                }
            }
        }
        Input::Presentation(p) => {
            s += &format!("GENERATORS\n{}\nRELATIONS\n", line(&p.generators));
            let w = |xs: &[Term]| if xs.is_empty() { "ε".to_string() } else { line(xs) };
            for (l, r) in &p.relations {
                s += &format!("{} = {}\n", w(l), w(r));
            }
        }
        Input::Operad(o) => {
            s += &format!("OPERAD {}\nUNIT {}\nTAIL {}\n", o.name, o.unit, if o.tail { "yes" } else { "no" });
            for (n, os) in o.ops.iter().enumerate() {
                s += &format!("ARITY {n} : {}\n", line(os));
            }
            for ((q, ps), r) in &o.table {
                s += &format!("COMPOSE {q} {} = {r}\n", line(ps));
            }
        }
        Input::Graph(_) => return Err(invalid("only graphs of sets have a text form; use JSON")),
    }
    Ok(s)
}
