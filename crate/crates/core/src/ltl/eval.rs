//! Exact LTL₋ₓ satisfaction on ultimately periodic words.

use super::{Formula, PropSet, Props};

/// An ultimately periodic word `stem · cycle^ω`. The stem may be empty; the
/// cycle never is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub stem: Vec<PropSet>,
    pub cycle: Vec<PropSet>,
}

impl LassoWord {
    pub fn new(stem: Vec<PropSet>, cycle: Vec<PropSet>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        Self { stem, cycle }
    }

    /// Total number of distinct positions (stem plus one cycle period).
    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at unrolled position `i` (positions beyond the stem wrap through
    /// the cycle).
    pub fn letter(&self, i: usize) -> PropSet {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Successor position within the finite stem+cycle representation.
    pub fn next_pos(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    /// Renders the word against a proposition table, for diagnostics.
    pub fn display(&self, props: &Props) -> String {
        let part = |v: &[PropSet]| {
            v.iter()
                .map(|l| l.display(props))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("{} ({})^w", part(&self.stem), part(&self.cycle))
    }
}

/// Decides whether `word` satisfies `f`.
///
/// Every subformula is valued at every position of the stem and one cycle
/// period; the temporal operators are solved by fixpoint iteration over the
/// cycle (least fixpoints for until/eventually, greatest for
/// release/always). Iteration count is bounded by the number of positions,
/// so the whole computation is `O(|f| · n²)` with `n = word.len()`. The
/// result is exact; this function is the reference semantics that automata
/// constructions are tested against.
pub fn eval_lasso(f: &Formula, word: &LassoWord, props: &Props) -> bool {
    Evaluator { word, props }.values(f)[0]
}

struct Evaluator<'a> {
    word: &'a LassoWord,
    props: &'a Props,
}

impl Evaluator<'_> {
    fn values(&self, f: &Formula) -> Vec<bool> {
        use Formula::*;
        let n = self.word.len();
        match f {
            True => vec![true; n],
            False => vec![false; n],
            Prop(name) => match self.props.id(name) {
                Some(id) => (0..n).map(|i| self.word.letter(i).contains(id)).collect(),
                // A proposition outside the alphabet never holds.
                None => vec![false; n],
            },
            Not(a) => self.values(a).into_iter().map(|v| !v).collect(),
            And(a, b) => zip_with(self.values(a), self.values(b), |x, y| x && y),
            Or(a, b) => zip_with(self.values(a), self.values(b), |x, y| x || y),
            Until(a, b) => {
                let va = self.values(a);
                let vb = self.values(b);
                self.lfp(|vals, i, next| vb[i] || (va[i] && vals[next]))
            }
            Release(a, b) => {
                let va = self.values(a);
                let vb = self.values(b);
                self.gfp(|vals, i, next| vb[i] && (va[i] || vals[next]))
            }
            Eventually(a) => {
                let va = self.values(a);
                self.lfp(|vals, i, next| va[i] || vals[next])
            }
            Always(a) => {
                let va = self.values(a);
                self.gfp(|vals, i, next| va[i] && vals[next])
            }
        }
    }

    /// Least fixpoint: start from all-false and grow until stable.
    fn lfp(&self, step: impl Fn(&[bool], usize, usize) -> bool) -> Vec<bool> {
        self.fixpoint(false, step)
    }

    /// Greatest fixpoint: start from all-true and shrink until stable.
    fn gfp(&self, step: impl Fn(&[bool], usize, usize) -> bool) -> Vec<bool> {
        self.fixpoint(true, step)
    }

    fn fixpoint(&self, init: bool, step: impl Fn(&[bool], usize, usize) -> bool) -> Vec<bool> {
        let n = self.word.len();
        let mut vals = vec![init; n];
        loop {
            let mut changed = false;
            // Backward sweep converges fast on the stem; the cycle needs the
            // outer loop to propagate around the wrap.
            for i in (0..n).rev() {
                let v = step(&vals, i, self.word.next_pos(i));
                if v != vals[i] {
                    vals[i] = v;
                    changed = true;
                }
            }
            if !changed {
                return vals;
            }
        }
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}
