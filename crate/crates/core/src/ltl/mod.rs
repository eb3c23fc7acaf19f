//! LTL without the next operator: formulas, parsing, normal forms, and exact
//! evaluation over lasso words.
//!
//! Formulas are interpreted over infinite words of *letters*, each letter the
//! set of atomic propositions (region names) observed at one instant. Because
//! the next operator is excluded, every formula in this fragment is
//! stutter-invariant, which is what makes the asynchronous-execution story of
//! the rest of the crate sound.
//!
//! [`eval_lasso`] is the reference semantics: it decides satisfaction of a
//! formula on an ultimately periodic word exactly, by a fixpoint computation
//! over the stem and one cycle period. The Büchi translation in [`crate::buchi`]
//! is tested against it, never the other way around.

mod eval;
mod parse;

pub use eval::{eval_lasso, LassoWord};
pub use parse::{parse_formula, ParseError};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Index of an interned proposition in a [`Props`] table.
pub type PropId = u8;

/// Maximum number of distinct propositions a [`Props`] table can hold.
pub const MAX_PROPS: usize = 64;

/// Interning table for atomic propositions.
///
/// Letters are represented as bitmasks ([`PropSet`]) relative to one of these
/// tables, so every automaton and word carries (a reference to) the table it
/// was built against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Props {
    names: Vec<String>,
}

impl Props {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from an iterator of names, interning in order.
    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        let mut p = Self::new();
        for n in names {
            p.intern(&n.into());
        }
        p
    }

    /// Interns `name`, returning its id. Panics if the table is full.
    pub fn intern(&mut self, name: &str) -> PropId {
        if let Some(id) = self.id(name) {
            return id;
        }
        assert!(self.names.len() < MAX_PROPS, "proposition table full");
        self.names.push(name.to_string());
        (self.names.len() - 1) as PropId
    }

    pub fn id(&self, name: &str) -> Option<PropId> {
        self.names.iter().position(|n| n == name).map(|i| i as PropId)
    }

    pub fn name(&self, id: PropId) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PropId, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i as PropId, n.as_str()))
    }

    /// The set of all propositions in the table.
    pub fn universe(&self) -> PropSet {
        let mut s = PropSet::empty();
        for i in 0..self.names.len() {
            s.insert(i as PropId);
        }
        s
    }
}

/// A set of propositions, used both as word letters and as halves of symbolic
/// edge labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PropSet(u64);

impl PropSet {
    pub const fn empty() -> Self {
        PropSet(0)
    }

    pub fn singleton(id: PropId) -> Self {
        let mut s = Self::empty();
        s.insert(id);
        s
    }

    pub fn insert(&mut self, id: PropId) {
        self.0 |= 1u64 << id;
    }

    pub fn remove(&mut self, id: PropId) {
        self.0 &= !(1u64 << id);
    }

    pub fn contains(self, id: PropId) -> bool {
        self.0 & (1u64 << id) != 0
    }

    pub fn union(self, other: PropSet) -> PropSet {
        PropSet(self.0 | other.0)
    }

    pub fn intersect(self, other: PropSet) -> PropSet {
        PropSet(self.0 & other.0)
    }

    pub fn minus(self, other: PropSet) -> PropSet {
        PropSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: PropSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint_from(self, other: PropSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = PropId> {
        (0..MAX_PROPS as u8).filter(move |&i| self.contains(i))
    }

    /// Renders the letter against a table, e.g. `{pi1, pi4}`.
    pub fn display(self, props: &Props) -> String {
        let names: Vec<&str> = self.iter().map(|i| props.name(i)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl FromIterator<PropId> for PropSet {
    fn from_iter<T: IntoIterator<Item = PropId>>(iter: T) -> Self {
        let mut s = Self::empty();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

/// An LTL₋ₓ formula.
///
/// `Release` is not part of the surface syntax; it only arises from
/// [`Formula::to_nnf`] pushing negations across `Until`. The unary temporal
/// operators are kept primitive (rather than desugared to untils) so that
/// translated automata stay small.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn prop(name: &str) -> Formula {
        Formula::Prop(name.to_string())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Prop(_) => 1,
            Not(a) | Eventually(a) | Always(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// The set of proposition names appearing in the formula.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        use Formula::*;
        match self {
            True | False => {}
            Prop(p) => {
                out.insert(p.clone());
            }
            Not(a) | Eventually(a) | Always(a) => a.collect_props(out),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    /// Negation normal form: negations pushed inward until they wrap only
    /// propositions. `Until`/`Release` are dual, as are `Always`/`Eventually`.
    pub fn to_nnf(&self) -> Formula {
        use Formula::*;
        match self {
            True | False | Prop(_) => self.clone(),
            And(a, b) => Formula::and(a.to_nnf(), b.to_nnf()),
            Or(a, b) => Formula::or(a.to_nnf(), b.to_nnf()),
            Until(a, b) => Formula::until(a.to_nnf(), b.to_nnf()),
            Release(a, b) => Formula::release(a.to_nnf(), b.to_nnf()),
            Eventually(a) => Formula::eventually(a.to_nnf()),
            Always(a) => Formula::always(a.to_nnf()),
            Not(inner) => match inner.as_ref() {
                True => False,
                False => True,
                Prop(_) => self.clone(),
                Not(a) => a.to_nnf(),
                And(a, b) => Formula::or(
                    Formula::not(a.as_ref().clone()).to_nnf(),
                    Formula::not(b.as_ref().clone()).to_nnf(),
                ),
                Or(a, b) => Formula::and(
                    Formula::not(a.as_ref().clone()).to_nnf(),
                    Formula::not(b.as_ref().clone()).to_nnf(),
                ),
                Until(a, b) => Formula::release(
                    Formula::not(a.as_ref().clone()).to_nnf(),
                    Formula::not(b.as_ref().clone()).to_nnf(),
                ),
                Release(a, b) => Formula::until(
                    Formula::not(a.as_ref().clone()).to_nnf(),
                    Formula::not(b.as_ref().clone()).to_nnf(),
                ),
                Eventually(a) => Formula::always(Formula::not(a.as_ref().clone()).to_nnf()),
                Always(a) => Formula::eventually(Formula::not(a.as_ref().clone()).to_nnf()),
            },
        }
    }

    /// True if the formula is in negation normal form.
    pub fn is_nnf(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Prop(_) => true,
            Not(a) => matches!(a.as_ref(), Prop(_)),
            Eventually(a) | Always(a) => a.is_nnf(),
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence levels: 0 = ->, 1 = ||, 2 = &&, 3 = U/R, 4 = unary/atom.
        fn go(fm: &Formula, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
            use Formula::*;
            let prec = match fm {
                True | False | Prop(_) | Not(_) | Eventually(_) | Always(_) => 4,
                Until(_, _) | Release(_, _) => 3,
                And(_, _) => 2,
                Or(_, _) => 1,
            };
            let paren = prec < parent;
            if paren {
                write!(f, "(")?;
            }
            match fm {
                True => write!(f, "true")?,
                False => write!(f, "false")?,
                Prop(p) => write!(f, "{p}")?,
                Not(a) => {
                    write!(f, "!")?;
                    go(a, f, 5)?;
                }
                Eventually(a) => {
                    write!(f, "F ")?;
                    go(a, f, 5)?;
                }
                Always(a) => {
                    write!(f, "G ")?;
                    go(a, f, 5)?;
                }
                Until(a, b) => {
                    go(a, f, 4)?;
                    write!(f, " U ")?;
                    go(b, f, 3)?;
                }
                Release(a, b) => {
                    go(a, f, 4)?;
                    write!(f, " R ")?;
                    go(b, f, 3)?;
                }
                And(a, b) => {
                    go(a, f, 2)?;
                    write!(f, " && ")?;
                    go(b, f, 2)?;
                }
                Or(a, b) => {
                    go(a, f, 1)?;
                    write!(f, " || ")?;
                    go(b, f, 1)?;
                }
            }
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, f, 0)
    }
}

/// Draws a random formula over `props` with at most `max_size` AST nodes.
///
/// Used to build randomized test corpora; the distribution leans on binary
/// and temporal operators so interesting automata come out.
pub fn random_formula<R: rand::Rng>(rng: &mut R, props: &Props, max_size: usize) -> Formula {
    assert!(!props.is_empty());
    let size = rng.gen_range(1..=max_size.max(1));
    random_formula_sized(rng, props, size)
}

fn random_formula_sized<R: rand::Rng>(rng: &mut R, props: &Props, size: usize) -> Formula {
    if size <= 1 {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => {
                let i = rng.gen_range(0..props.len());
                Formula::prop(props.name(i as PropId))
            }
        };
    }
    if size == 2 || rng.gen_bool(0.4) {
        let inner = random_formula_sized(rng, props, size - 1);
        return match rng.gen_range(0..3) {
            0 => Formula::not(inner),
            1 => Formula::eventually(inner),
            _ => Formula::always(inner),
        };
    }
    let left = rng.gen_range(1..size - 1);
    let a = random_formula_sized(rng, props, left);
    let b = random_formula_sized(rng, props, size - 1 - left);
    match rng.gen_range(0..3) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        _ => Formula::until(a, b),
    }
}

/// Draws a random lasso word with the given maximum stem/cycle lengths
/// (cycle at least 1).
pub fn random_lasso<R: rand::Rng>(
    rng: &mut R,
    props: &Props,
    max_stem: usize,
    max_cycle: usize,
) -> LassoWord {
    let stem_len = rng.gen_range(0..=max_stem);
    let cycle_len = rng.gen_range(1..=max_cycle.max(1));
    let letter = |rng: &mut R| {
        let mut s = PropSet::empty();
        for i in 0..props.len() {
            if rng.gen_bool(0.4) {
                s.insert(i as PropId);
            }
        }
        s
    };
    LassoWord {
        stem: (0..stem_len).map(|_| letter(rng)).collect(),
        cycle: (0..cycle_len).map(|_| letter(rng)).collect(),
    }
}
