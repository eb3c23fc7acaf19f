//! Tableau translation from LTL₋ₓ to generalized Büchi automata.
//!
//! The construction expands a graph of nodes, each holding the obligations
//! still to be decomposed (`new`), the ones already honored locally (`old`),
//! and the ones deferred to the successor (`next`). Nodes with identical
//! `old` and `next` merge. A fresh initial state is added in front; every
//! other state's edge labels are the literal constraints of its own `old`
//! set, shared by all of its incoming edges.
//!
//! One acceptance set is produced per until-like subformula `g = f U h` or
//! `g = F h`: it contains the states where `g` is not pending or `h` has
//! just been honored. Release and always never generate sets.

use super::{EdgeLabel, GeneralizedBuchi};
use crate::ltl::{Formula, PropId, PropSet, Props};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sub {
    True,
    False,
    Lit(PropId, bool),
    And(u32, u32),
    Or(u32, u32),
    Until(u32, u32),
    Release(u32, u32),
    Eventually(u32),
    Always(u32),
}

#[derive(Default)]
struct Arena {
    subs: Vec<Sub>,
    index: HashMap<Sub, u32>,
}

impl Arena {
    fn intern(&mut self, s: Sub) -> u32 {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = self.subs.len() as u32;
        self.subs.push(s);
        self.index.insert(s, id);
        id
    }

    /// Interns a normal-form formula bottom-up.
    fn of(&mut self, f: &Formula, props: &Props) -> u32 {
        let sub = match f {
            Formula::True => Sub::True,
            Formula::False => Sub::False,
            Formula::Prop(name) => Sub::Lit(prop_id(props, name), true),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Prop(name) => Sub::Lit(prop_id(props, name), false),
                _ => unreachable!("negation below NNF"),
            },
            Formula::And(a, b) => {
                let (a, b) = (self.of(a, props), self.of(b, props));
                Sub::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.of(a, props), self.of(b, props));
                Sub::Or(a, b)
            }
            Formula::Until(a, b) => {
                let (a, b) = (self.of(a, props), self.of(b, props));
                Sub::Until(a, b)
            }
            Formula::Release(a, b) => {
                let (a, b) = (self.of(a, props), self.of(b, props));
                Sub::Release(a, b)
            }
            Formula::Eventually(a) => {
                let a = self.of(a, props);
                Sub::Eventually(a)
            }
            Formula::Always(a) => {
                let a = self.of(a, props);
                Sub::Always(a)
            }
        };
        self.intern(sub)
    }
}

fn prop_id(props: &Props, name: &str) -> PropId {
    props
        .id(name)
        .unwrap_or_else(|| panic!("proposition {name:?} missing from table"))
}

/// Incoming marker for the virtual pre-initial node.
const INIT: usize = usize::MAX;

#[derive(Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<u32>,
    old: BTreeSet<u32>,
    next: BTreeSet<u32>,
}

struct DoneNode {
    old: BTreeSet<u32>,
    next: BTreeSet<u32>,
    incoming: BTreeSet<usize>,
}

/// Translates a formula into a generalized Büchi automaton over the given
/// proposition table. Every proposition of the formula must be present in
/// the table. The word read on a run starts at the edge leaving the initial
/// state.
pub fn translate(f: &Formula, props: &Props) -> GeneralizedBuchi {
    let nnf = f.to_nnf();
    let mut arena = Arena::default();
    let root = arena.of(&nnf, props);

    let mut done: Vec<DoneNode> = Vec::new();
    let mut work: Vec<Node> = vec![Node {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];

    while let Some(mut node) = work.pop() {
        let f = match node.new.iter().next().copied() {
            Some(f) => {
                node.new.remove(&f);
                f
            }
            None => {
                // Fully decomposed: merge or record, then seed the successor.
                if let Some(existing) = done
                    .iter_mut()
                    .find(|d| d.old == node.old && d.next == node.next)
                {
                    existing.incoming.extend(node.incoming.iter().copied());
                    continue;
                }
                let id = done.len();
                let successor = Node {
                    incoming: BTreeSet::from([id]),
                    new: node.next.clone(),
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                };
                done.push(DoneNode {
                    old: node.old,
                    next: node.next,
                    incoming: node.incoming,
                });
                work.push(successor);
                continue;
            }
        };
        if node.old.contains(&f) {
            work.push(node);
            continue;
        }
        let add_new = |node: &mut Node, g: u32| {
            if !node.old.contains(&g) {
                node.new.insert(g);
            }
        };
        match arena.subs[f as usize] {
            Sub::False => {} // contradiction, drop the node
            Sub::True => {
                node.old.insert(f);
                work.push(node);
            }
            Sub::Lit(p, positive) => {
                let negation = arena.intern(Sub::Lit(p, !positive));
                if node.old.contains(&negation) {
                    // contradiction, drop the node
                } else {
                    node.old.insert(f);
                    work.push(node);
                }
            }
            Sub::And(a, b) => {
                node.old.insert(f);
                add_new(&mut node, a);
                add_new(&mut node, b);
                work.push(node);
            }
            Sub::Or(a, b) => {
                node.old.insert(f);
                let mut right = node.clone();
                add_new(&mut node, a);
                add_new(&mut right, b);
                work.push(node);
                work.push(right);
            }
            Sub::Until(a, b) => {
                node.old.insert(f);
                let mut now = node.clone();
                add_new(&mut node, a);
                node.next.insert(f);
                add_new(&mut now, b);
                work.push(node);
                work.push(now);
            }
            Sub::Release(a, b) => {
                node.old.insert(f);
                let mut now = node.clone();
                add_new(&mut node, b);
                node.next.insert(f);
                add_new(&mut now, a);
                add_new(&mut now, b);
                work.push(node);
                work.push(now);
            }
            Sub::Eventually(b) => {
                node.old.insert(f);
                let mut now = node.clone();
                node.next.insert(f);
                add_new(&mut now, b);
                work.push(node);
                work.push(now);
            }
            Sub::Always(b) => {
                node.old.insert(f);
                add_new(&mut node, b);
                node.next.insert(f);
                work.push(node);
            }
        }
    }

    // Assemble: state 0 is the fresh initial state, done node i is state i+1.
    let n = done.len() + 1;
    let mut auto = GeneralizedBuchi::new(n);
    auto.names[0] = "init".to_string();
    auto.initial = vec![0];
    for (i, d) in done.iter().enumerate() {
        let mut required = PropSet::empty();
        let mut forbidden = PropSet::empty();
        for &g in &d.old {
            if let Sub::Lit(p, positive) = arena.subs[g as usize] {
                if positive {
                    required.insert(p);
                } else {
                    forbidden.insert(p);
                }
            }
        }
        let label = EdgeLabel::new(required, forbidden);
        for &src in &d.incoming {
            let from = if src == INIT { 0 } else { src + 1 };
            auto.edges[from].push((label, i + 1));
        }
    }
    for outs in &mut auto.edges {
        outs.sort_unstable_by_key(|&(label, to)| (to, label));
    }

    for (id, sub) in arena.subs.iter().enumerate() {
        let payload = match *sub {
            Sub::Until(_, b) => b,
            Sub::Eventually(b) => b,
            _ => continue,
        };
        let g = id as u32;
        let mut set = vec![0usize];
        for (i, d) in done.iter().enumerate() {
            if !d.old.contains(&g) || d.old.contains(&payload) {
                set.push(i + 1);
            }
        }
        auto.acceptance.push(set);
    }
    if auto.acceptance.is_empty() {
        // No until-like obligations: a single trivial set keeps the
        // automaton in the shape downstream consumers expect.
        auto.acceptance.push((0..n).collect());
    }

    auto
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buchi::degeneralize;
    use crate::ltl::{eval_lasso, parse_formula, random_formula, random_lasso, LassoWord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(formula: &str, props: &Props, word: &LassoWord) -> (bool, bool, bool) {
        let f = parse_formula(formula).unwrap();
        let g = translate(&f, props);
        let d = degeneralize(&g);
        (
            eval_lasso(&f, word, props),
            g.accepts_lasso(word),
            d.accepts_lasso(word),
        )
    }

    fn letters(props: &Props, seq: &[&[&str]]) -> Vec<PropSet> {
        seq.iter()
            .map(|names| names.iter().map(|n| props.id(n).unwrap()).collect())
            .collect()
    }

    #[test]
    fn propositional_and_simple_temporal() {
        let props = Props::from_names(["a", "b"]);
        let a = letters(&props, &[&["a"]])[0];
        let none = PropSet::empty();

        let now_a = LassoWord::new(vec![a], vec![none]);
        let never_a = LassoWord::new(vec![], vec![none]);
        for (formula, word, expect) in [
            ("a", &now_a, true),
            ("a", &never_a, false),
            ("true", &never_a, true),
            ("false", &now_a, false),
            ("F a", &never_a, false),
            ("G a", &now_a, false),
            ("a && !b", &now_a, true),
        ] {
            let (e, g, d) = check(formula, &props, word);
            assert_eq!(e, expect, "eval {formula}");
            assert_eq!(g, expect, "gba {formula}");
            assert_eq!(d, expect, "dba {formula}");
        }
    }

    #[test]
    fn until_needs_its_goal() {
        let props = Props::from_names(["a", "b"]);
        let ls = |seq: &[&[&str]]| letters(&props, seq);
        let good = LassoWord::new(ls(&[&["a"], &["a"], &["b"]]), ls(&[&[]]));
        let stuck = LassoWord::new(vec![], ls(&[&["a"]]));
        let f = "a U b";
        assert_eq!(check(f, &props, &good), (true, true, true));
        assert_eq!(check(f, &props, &stuck), (false, false, false));
    }

    #[test]
    fn acceptance_sets_match_until_count() {
        let props = Props::from_names(["a", "b", "c"]);
        let f = parse_formula("(a U b) && F c").unwrap();
        let g = translate(&f, &props);
        assert_eq!(g.acceptance.len(), 2);
        // Without untils a single trivial set covers every state.
        let f2 = parse_formula("G a").unwrap();
        let g2 = translate(&f2, &props);
        assert_eq!(g2.acceptance.len(), 1);
        assert_eq!(g2.acceptance[0].len(), g2.state_count());
    }

    #[test]
    fn unsatisfiable_formulas_give_empty_automata() {
        let props = Props::from_names(["a"]);
        for formula in ["a && !a", "false", "(G F a) && (F G !a)", "G a && F !a"] {
            let f = parse_formula(formula).unwrap();
            let g = translate(&f, &props);
            assert!(g.is_empty(), "{formula} should be empty");
            assert!(degeneralize(&g).is_empty(), "{formula} dba should be empty");
        }
    }

    #[test]
    fn witnesses_satisfy_their_formulas() {
        let props = Props::from_names(["a", "b"]);
        for formula in ["G F a", "F G a", "a U (b U a)", "G (a || F b)", "F (a && b)"] {
            let f = parse_formula(formula).unwrap();
            let g = translate(&f, &props);
            let w = g.find_accepting_lasso().expect(formula);
            assert!(g.accepts_lasso(&w.word()), "{formula} witness self-check");
            assert!(
                eval_lasso(&f, &w.word(), &props),
                "{formula} witness word fails evaluation: {:?}",
                w.word()
            );
        }
    }

    #[test]
    fn mission_shaped_formula_roundtrip() {
        let props = Props::from_names(["pi1", "pi2", "pi3", "pi4", "pi5", "pi6"]);
        let f = parse_formula(
            "G !pi3 && G F ((pi1 && pi4 && pi6) && F (pi2 && pi5))",
        )
        .unwrap();
        let g = translate(&f, &props);
        let d = degeneralize(&g);

        let w = g.find_accepting_lasso().expect("mission is satisfiable");
        assert!(eval_lasso(&f, &w.word(), &props));

        // A surveillance-style word: repeatedly visit {pi1,pi4,pi6} then
        // {pi2,pi5}, never pi3.
        let goals = letters(&props, &[&["pi1", "pi4", "pi6"], &[], &["pi2", "pi5"], &[]]);
        let word = LassoWord::new(vec![PropSet::empty()], goals.clone());
        assert!(eval_lasso(&f, &word, &props));
        assert!(g.accepts_lasso(&word));
        assert!(d.accepts_lasso(&word));

        // Injecting pi3 anywhere in the cycle breaks it.
        let mut bad = goals;
        let pi3 = props.id("pi3").unwrap();
        bad[1].insert(pi3);
        let bad_word = LassoWord::new(vec![PropSet::empty()], bad);
        assert!(!eval_lasso(&f, &bad_word, &props));
        assert!(!g.accepts_lasso(&bad_word));
        assert!(!d.accepts_lasso(&bad_word));
    }

    /// The load-bearing correctness test: translation, degeneralization and
    /// the evaluator must agree on random formulas and random words.
    #[test]
    fn random_cross_check_against_evaluator() {
        let props = Props::from_names(["a", "b", "c"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b0c1);
        let mut accepted = 0usize;
        for round in 0..120 {
            let f = random_formula(&mut rng, &props, 9);
            let g = translate(&f, &props);
            let d = degeneralize(&g);
            for w in 0..12 {
                let word = random_lasso(&mut rng, &props, 4, 3);
                let expect = eval_lasso(&f, &word, &props);
                accepted += expect as usize;
                assert_eq!(
                    g.accepts_lasso(&word),
                    expect,
                    "round {round} word {w}: GBA disagrees on {f} over {word:?}"
                );
                assert_eq!(
                    d.accepts_lasso(&word),
                    expect,
                    "round {round} word {w}: DBA disagrees on {f} over {word:?}"
                );
            }
            // Emptiness must agree with the existence of a witness, and a
            // witness must satisfy the formula.
            if let Some(witness) = g.find_accepting_lasso() {
                assert!(
                    eval_lasso(&f, &witness.word(), &props),
                    "round {round}: witness for {f} fails evaluation"
                );
            }
        }
        // Sanity: the corpus exercises both outcomes.
        assert!(accepted > 100, "suspiciously few accepted words: {accepted}");
    }

    #[test]
    fn fresh_initial_state_has_no_incoming_edges() {
        let props = Props::from_names(["a"]);
        let f = parse_formula("G F a").unwrap();
        let g = translate(&f, &props);
        assert_eq!(g.initial, vec![0]);
        for outs in &g.edges {
            for &(_, to) in outs {
                assert_ne!(to, 0, "initial state must stay source-only");
            }
        }
    }
}
