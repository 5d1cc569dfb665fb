//! Diagonal-free timed automata, their LU bounds and symbolic successors.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::dbm::{DbmError, DistanceGraph, Valuation};
use crate::weights::LuConstant;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("no initial state")]
    NoInitialState,
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("clock index {0} out of range")]
    UnknownClock(usize),
    #[error("duplicate clock name `{0}`")]
    DuplicateClock(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
}

/// Relation of a single-clock guard atom. Equality is expressed as a pair of
/// `Le`/`Ge` atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparison {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
            Comparison::Gt => ">",
        }
    }

    /// `x < c` and `x ≤ c` are upper-bound guards.
    pub fn is_upper(self) -> bool {
        matches!(self, Comparison::Lt | Comparison::Le)
    }
}

/// `clock ⋈ constant`, clock indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub clock: usize,
    pub comparison: Comparison,
    pub constant: u32,
}

impl Atom {
    pub fn new(clock: usize, comparison: Comparison, constant: u32) -> Self {
        Atom {
            clock,
            comparison,
            constant,
        }
    }

    pub fn holds(&self, v: &Valuation) -> bool {
        let value = v.get(self.clock);
        let c = num_rational::Rational64::from_integer(self.constant as i64);
        match self.comparison {
            Comparison::Lt => value < c,
            Comparison::Le => value <= c,
            Comparison::Ge => value >= c,
            Comparison::Gt => value > c,
        }
    }
}

/// A conjunction of atoms; the empty conjunction is `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Guard(Vec<Atom>);

impl Guard {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Guard(atoms)
    }

    /// Append `clock == constant` as `clock ≤ c ∧ clock ≥ c`.
    pub fn push_equal(&mut self, clock: usize, constant: u32) {
        self.0.push(Atom::new(clock, Comparison::Le, constant));
        self.0.push(Atom::new(clock, Comparison::Ge, constant));
    }

    pub fn push(&mut self, atom: Atom) {
        self.0.push(atom);
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn holds(&self, v: &Valuation) -> bool {
        self.0.iter().all(|a| a.holds(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: usize,
    pub guard: Guard,
    /// Sorted, deduplicated 1-based clock indices.
    pub resets: Vec<usize>,
    pub target: usize,
}

impl Transition {
    pub fn new(source: usize, guard: Guard, mut resets: Vec<usize>, target: usize) -> Self {
        resets.sort_unstable();
        resets.dedup();
        Transition {
            source,
            guard,
            resets,
            target,
        }
    }
}

/// `⟨Q, q0, X, T, Acc⟩` without invariants or action labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    states: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    clocks: Vec<String>,
    transitions: Vec<Transition>,
}

impl Automaton {
    pub fn new(
        states: Vec<String>,
        initial: usize,
        accepting: &[usize],
        clocks: Vec<String>,
        transitions: Vec<Transition>,
    ) -> Result<Self, AutomatonError> {
        if initial >= states.len() {
            return Err(if states.is_empty() {
                AutomatonError::NoInitialState
            } else {
                AutomatonError::UnknownState(initial)
            });
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        let mut seen = HashSet::new();
        for c in &clocks {
            if !seen.insert(c.as_str()) {
                return Err(AutomatonError::DuplicateClock(c.clone()));
            }
        }
        let mut acc = vec![false; states.len()];
        for &q in accepting {
            *acc.get_mut(q).ok_or(AutomatonError::UnknownState(q))? = true;
        }
        for t in &transitions {
            for q in [t.source, t.target] {
                if q >= states.len() {
                    return Err(AutomatonError::UnknownState(q));
                }
            }
            let bad_clock = t
                .guard
                .atoms()
                .iter()
                .map(|a| a.clock)
                .chain(t.resets.iter().copied())
                .find(|&c| c == 0 || c > clocks.len());
            if let Some(c) = bad_clock {
                return Err(AutomatonError::UnknownClock(c));
            }
        }
        Ok(Automaton {
            states,
            initial,
            accepting: acc,
            clocks,
            transitions,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter_map(|(q, a)| a.then_some(q))
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of transitions leaving `q`, in declaration order.
    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = (usize, &Transition)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.source == q)
    }

    /// Whole-automaton maxima of lower- and upper-bound guard constants.
    pub fn lu_bounds(&self) -> LuBounds {
        let mut lu = LuBounds::unbounded(self.clock_count());
        for t in &self.transitions {
            for a in t.guard.atoms() {
                let c = LuConstant::finite(a.constant as i64);
                let slot = if a.comparison.is_upper() {
                    &mut lu.upper[a.clock]
                } else {
                    &mut lu.lower[a.clock]
                };
                *slot = (*slot).max(c);
            }
        }
        lu
    }

    /// `(q0, elapse(0))`.
    pub fn initial_node(&self) -> (usize, DistanceGraph) {
        let zone = DistanceGraph::zero(self.clock_count())
            .time_elapse()
            .expect("the zero point is non-empty");
        (self.initial, zone)
    }

    /// `elapse(reset(Z ∧ g))`, or `None` if the guard cannot be met from `zone`.
    pub fn successor(
        &self,
        zone: &DistanceGraph,
        transition: &Transition,
    ) -> Result<Option<(usize, DistanceGraph)>, DbmError> {
        let guarded = zone.constrain(&transition.guard)?;
        if guarded.is_empty_marker() {
            return Ok(None);
        }
        let next = guarded.reset(&transition.resets)?.time_elapse()?;
        Ok(Some((transition.target, next)))
    }
}

/// Per-clock L and U maxima. Clock 0 carries `L₀ = U₀ = 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LuBounds {
    lower: Vec<LuConstant>,
    upper: Vec<LuConstant>,
}

impl LuBounds {
    /// Every clock at `−∞`.
    pub fn unbounded(clocks: usize) -> Self {
        let mut lower = vec![LuConstant::NegInfinity; clocks + 1];
        lower[0] = LuConstant::Finite(0);
        LuBounds {
            upper: lower.clone(),
            lower,
        }
    }

    /// Bounds for clocks `1..=n`, given in clock order.
    pub fn new(lower: Vec<LuConstant>, upper: Vec<LuConstant>) -> Self {
        assert_eq!(lower.len(), upper.len());
        let prefix = std::iter::once(LuConstant::Finite(0));
        LuBounds {
            lower: prefix.clone().chain(lower).collect(),
            upper: prefix.chain(upper).collect(),
        }
    }

    /// Finite bounds from plain integers, negative meaning `−∞`.
    pub fn from_ints(lower: &[i64], upper: &[i64]) -> Self {
        let conv = |v: &i64| {
            if *v < 0 {
                LuConstant::NegInfinity
            } else {
                LuConstant::Finite(*v)
            }
        };
        Self::new(lower.iter().map(conv).collect(), upper.iter().map(conv).collect())
    }

    pub fn clocks(&self) -> usize {
        self.lower.len() - 1
    }

    /// `L_x`; index 0 is the reference clock.
    #[inline]
    pub fn lower(&self, x: usize) -> LuConstant {
        self.lower[x]
    }

    /// `U_x`; index 0 is the reference clock.
    #[inline]
    pub fn upper(&self, x: usize) -> LuConstant {
        self.upper[x]
    }

    /// `max(L_x, U_x, 0)` for every clock, index 0 included.
    pub fn max_bounds(&self) -> Vec<i64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.or_zero().max(u.or_zero()))
            .collect()
    }
}

impl fmt::Debug for LuBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L=[")?;
        for (i, l) in self.lower.iter().skip(1).enumerate() {
            write!(f, "{}{l}", if i > 0 { "," } else { "" })?;
        }
        write!(f, "] U=[")?;
        for (i, u) in self.upper.iter().skip(1).enumerate() {
            write!(f, "{}{u}", if i > 0 { "," } else { "" })?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn one_transition(guard: Guard, resets: Vec<usize>, clocks: &[&str]) -> Automaton {
        Automaton::new(
            names(&["q0", "q1"]),
            0,
            &[1],
            names(clocks),
            vec![Transition::new(0, guard, resets, 1)],
        )
        .unwrap()
    }

    #[test]
    fn lu_bound_extraction() {
        let mut g = Guard::default();
        g.push(Atom::new(1, Comparison::Gt, 4));
        g.push(Atom::new(1, Comparison::Le, 3));
        let a = one_transition(g, vec![], &["x", "y"]);
        let lu = a.lu_bounds();
        assert_eq!(lu.lower(1), LuConstant::Finite(4));
        assert_eq!(lu.upper(1), LuConstant::Finite(3));
        assert_eq!(lu.lower(2), LuConstant::NegInfinity);
        assert_eq!(lu.upper(2), LuConstant::NegInfinity);
        assert_eq!(lu.lower(0), LuConstant::Finite(0));

        let mut g = Guard::default();
        g.push_equal(1, 2);
        g.push(Atom::new(1, Comparison::Lt, 5));
        let lu = one_transition(g, vec![], &["x"]).lu_bounds();
        assert_eq!(lu.lower(1), LuConstant::Finite(2));
        assert_eq!(lu.upper(1), LuConstant::Finite(5));
    }

    #[test]
    fn initial_nodes() {
        let a = one_transition(Guard::default(), vec![], &["x"]);
        let (q, z) = a.initial_node();
        assert_eq!(q, 0);
        assert_eq!(z, DistanceGraph::unconstrained(1));

        let a = one_transition(Guard::default(), vec![], &["x", "y"]);
        let (_, z) = a.initial_node();
        assert_eq!(z.get(1, 2), Weight::LE_ZERO);
        assert_eq!(z.get(2, 1), Weight::LE_ZERO);
        assert_eq!(z.get(0, 1), Weight::INFINITY);

        let empty =
            Automaton::new(names(&["q0"]), 0, &[], names(&["x"]), Vec::new()).unwrap();
        assert!(empty.initial_node().1.is_canonical());
    }

    #[test]
    fn successor_examples() {
        let g = Guard::new(vec![Atom::new(1, Comparison::Le, 3)]);
        let a = one_transition(g, vec![1], &["x"]);
        let (_, z) = a.initial_node();
        let (q, next) = a.successor(&z, &a.transitions()[0]).unwrap().unwrap();
        assert_eq!(q, 1);
        assert_eq!(next, DistanceGraph::unconstrained(1));

        // x > 4, reset y from the diagonal: x − y > 4 ∧ y ≥ 0
        let g = Guard::new(vec![Atom::new(1, Comparison::Gt, 4)]);
        let a = one_transition(g, vec![2], &["x", "y"]);
        let (_, z) = a.initial_node();
        let (_, next) = a.successor(&z, &a.transitions()[0]).unwrap().unwrap();
        assert_eq!(next.get(2, 1), Weight::INFINITY);
        assert_eq!(next.get(1, 2), Weight::strict(-4));
        assert_eq!(next.get(1, 0), Weight::strict(-4));
        assert_eq!(next.get(2, 0), Weight::LE_ZERO);

        let g = Guard::new(vec![Atom::new(1, Comparison::Lt, 1)]);
        let a = one_transition(g, vec![], &["x"]);
        let ge2 = DistanceGraph::from_edges(1, &[(1, 0, Weight::weak(-2))])
            .canonicalize()
            .unwrap();
        assert_eq!(a.successor(&ge2, &a.transitions()[0]).unwrap(), None);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            Automaton::new(vec![], 0, &[], vec![], vec![]),
            Err(AutomatonError::NoInitialState)
        );
        assert_eq!(
            Automaton::new(names(&["q"]), 0, &[], names(&["x", "x"]), vec![]),
            Err(AutomatonError::DuplicateClock("x".into()))
        );
        let t = Transition::new(0, Guard::default(), vec![2], 0);
        assert_eq!(
            Automaton::new(names(&["q"]), 0, &[], names(&["x"]), vec![t]),
            Err(AutomatonError::UnknownClock(2))
        );
    }
}
