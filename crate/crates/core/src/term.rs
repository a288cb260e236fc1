//! Symbolic terms: the common currency for cells, elements and operations.

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

/// A finite tree. Cells of free constructions, elements of finite sets and
/// operad operations are all terms, so equality and ordering are structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(Arc<str>),
    Int(i64),
    /// Tuples and words.
    Seq(Arc<[Term]>),
    /// An operation label applied to arguments.
    Op(Arc<Term>, Arc<[Term]>),
    /// A cell tagged by the object sequence `x0..xn` it lies over.
    Cell(Arc<[Term]>, Arc<Term>),
}

pub fn atom(s: &str) -> Term {
    Term::Atom(Arc::from(s))
}

pub fn int(i: i64) -> Term {
    Term::Int(i)
}

pub fn seq(ts: Vec<Term>) -> Term {
    Term::Seq(ts.into())
}

pub fn op(label: Term, args: Vec<Term>) -> Term {
    Term::Op(Arc::new(label), args.into())
}

pub fn cell(objects: Vec<Term>, body: Term) -> Term {
    Term::Cell(objects.into(), Arc::new(body))
}

impl Term {
    pub fn as_seq(&self) -> Option<&[Term]> {
        match self {
            Term::Seq(ts) => Some(ts),
            _ => None,
        }
    }

    pub fn as_cell(&self) -> Option<(&[Term], &Term)> {
        match self {
            Term::Cell(xs, body) => Some((&xs[..], &**body)),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Direct subterms that count as children for ranking: sequence entries
    /// and operation arguments, but not operation labels.
    fn children(&self) -> Vec<&Term> {
        match self {
            Term::Seq(ts) => ts.iter().collect(),
            Term::Op(_, args) => args.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// Leaves reached from a cell body through tuples and operations.
    fn leaves<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Term::Seq(_) | Term::Op(..) => {
                for c in self.children() {
                    c.leaves(out);
                }
            }
            _ => out.push(self),
        }
    }

    /// Rank of a cell: `max(n, 1 + max child rank)` for a cell over a
    /// sequence of length `n + 1`, `n` when it has no children, and the
    /// maximum over children for tuples and operations.
    pub fn rank(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Int(_) => 0,
            Term::Seq(_) | Term::Op(..) => {
                self.children().iter().map(|c| c.rank()).max().unwrap_or(0)
            }
            Term::Cell(xs, body) => {
                let n = xs.len().saturating_sub(1);
                let mut ls = Vec::new();
                body.leaves(&mut ls);
                match ls.iter().map(|c| c.rank()).max() {
                    Some(r) => n.max(1 + r),
                    None => n,
                }
            }
        }
    }

    /// Structural size: atoms count one, empty words count one.
    pub fn size(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Int(_) => 1,
            Term::Seq(ts) => ts.iter().map(|t| t.size()).sum::<usize>().max(1),
            Term::Op(_, args) => 1 + args.iter().map(|t| t.size()).sum::<usize>(),
            Term::Cell(_, body) => body.size(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        }
        match self {
            Term::Atom(s) => write!(f, "{s}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Seq(ts) => {
                write!(f, "[")?;
                list(f, ts)?;
                write!(f, "]")
            }
            Term::Op(l, args) => {
                write!(f, "{l}(")?;
                list(f, args)?;
                write!(f, ")")
            }
            Term::Cell(xs, body) => {
                write!(f, "<")?;
                list(f, xs)?;
                write!(f, "|{body}>")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// JSON: atoms are strings, integers are numbers, tuples are arrays,
/// operations are `{op, args}` and cells are tree records
/// `{objects, children, rank}` (plus `label` when the body is an operation).
impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Term::Atom(a) => s.serialize_str(a),
            Term::Int(i) => s.serialize_i64(*i),
            Term::Seq(ts) => {
                let mut sq = s.serialize_seq(Some(ts.len()))?;
                for t in ts.iter() {
                    sq.serialize_element(t)?;
                }
                sq.end()
            }
            Term::Op(l, args) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("op", &**l)?;
                m.serialize_entry("args", &args[..])?;
                m.end()
            }
            Term::Cell(xs, body) => {
                let (label, children): (Option<&Term>, Vec<&Term>) = match body.as_ref() {
                    Term::Op(l, args) => (Some(&**l), args.iter().collect()),
                    Term::Seq(ts) => (None, ts.iter().collect()),
                    other => (None, vec![other]),
                };
                let mut m = s.serialize_map(None)?;
                m.serialize_entry("objects", &xs[..])?;
                if let Some(l) = label {
                    m.serialize_entry("label", l)?;
                }
                m.serialize_entry("children", &children)?;
                m.serialize_entry("rank", &self.rank())?;
                m.end()
            }
        }
    }
}
