//! Zones as distance graphs over the clocks plus the reference clock `0`.
//!
//! Entry `[i][j]` of a graph holds the weight of the edge `i → j`, the
//! constraint `value(j) − value(i) ⋖ c`. Row and column 0 therefore carry the
//! absolute bounds: `[0][x]` is the upper bound of `x` and `[x][0]` its
//! negated lower bound.

use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::automaton::{Comparison, Guard};
use crate::weights::{Relation, Weight, WeightError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DbmError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation requires a non-empty zone")]
    EmptyZone,
    #[error("clock index {0} out of range")]
    BadClock(usize),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// A clock valuation with exact rational coordinates. Clock `0` is implicit
/// and always has value 0; clocks are addressed by their 1-based index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Valuation(Vec<Rational64>);

impl Valuation {
    /// Panics on a negative coordinate.
    pub fn new(values: Vec<Rational64>) -> Self {
        assert!(
            values.iter().all(|v| *v >= Rational64::from_integer(0)),
            "clock values are non-negative"
        );
        Valuation(values)
    }

    pub fn from_integers(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| Rational64::from_integer(v)).collect())
    }

    /// Build from `(numerator, denominator)` pairs.
    pub fn from_fractions(values: &[(i64, i64)]) -> Self {
        Self::new(values.iter().map(|&(n, d)| Rational64::new(n, d)).collect())
    }

    pub fn zero(clocks: usize) -> Self {
        Valuation(vec![Rational64::from_integer(0); clocks])
    }

    pub fn clocks(&self) -> usize {
        self.0.len()
    }

    /// Value of clock `index`; index 0 is the reference clock.
    pub fn get(&self, index: usize) -> Rational64 {
        if index == 0 {
            Rational64::from_integer(0)
        } else {
            self.0[index - 1]
        }
    }

    pub fn values(&self) -> &[Rational64] {
        &self.0
    }

    pub fn delayed(&self, delay: Rational64) -> Valuation {
        Valuation(self.0.iter().map(|v| v + delay).collect())
    }

    pub fn reset(&self, clocks: &[usize]) -> Valuation {
        let mut values = self.0.clone();
        for &c in clocks {
            values[c - 1] = Rational64::from_integer(0);
        }
        Valuation(values)
    }

    /// Least common multiple of the coordinate denominators.
    pub fn common_denominator(&self) -> i64 {
        self.0
            .iter()
            .fold(1, |acc, v| num_integer::lcm(acc, *v.denom()))
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Whether `diff ⋖ bound` holds for an exact rational difference.
pub(crate) fn satisfies(diff: Rational64, bound: Weight) -> bool {
    match bound.constant() {
        None => true,
        Some(c) => {
            let c = Rational64::from_integer(c);
            match bound.relation() {
                Relation::Strict => diff < c,
                Relation::Weak => diff <= c,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Form {
    Raw,
    Canonical,
    Empty,
}

/// A zone over `dim − 1` clocks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DistanceGraph {
    dim: usize,
    weights: Vec<Weight>,
    form: Form,
}

impl DistanceGraph {
    /// All of `ℝ≥0ⁿ`.
    pub fn unconstrained(clocks: usize) -> Self {
        let dim = clocks + 1;
        Self::from_fn(dim, |i, j| {
            if i == j || j == 0 {
                Weight::LE_ZERO
            } else {
                Weight::INFINITY
            }
        })
        .with_form(Form::Canonical)
    }

    /// The single valuation with every clock at 0.
    pub fn zero(clocks: usize) -> Self {
        let dim = clocks + 1;
        DistanceGraph {
            dim,
            weights: vec![Weight::LE_ZERO; dim * dim],
            form: Form::Canonical,
        }
    }

    /// The canonical empty zone of the given dimension.
    pub fn empty(clocks: usize) -> Self {
        DistanceGraph {
            dim: clocks + 1,
            weights: Vec::new(),
            form: Form::Empty,
        }
    }

    /// A graph with arbitrary weights, not assumed canonical.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Weight) -> Self {
        assert!(dim >= 1);
        let mut weights = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                weights.push(f(i, j));
            }
        }
        DistanceGraph {
            dim,
            weights,
            form: Form::Raw,
        }
    }

    /// Start from the unconstrained zone and tighten the listed edges.
    pub fn from_edges(clocks: usize, edges: &[(usize, usize, Weight)]) -> Self {
        let mut g = Self::unconstrained(clocks).with_form(Form::Raw);
        for &(i, j, w) in edges {
            let k = g.idx(i, j);
            g.weights[k] = g.weights[k].min(w);
        }
        g
    }

    fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.dim + j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn is_canonical(&self) -> bool {
        self.form == Form::Canonical
    }

    /// True for the empty-zone marker produced by canonicalization. A raw
    /// graph may still denote the empty set; use [`DistanceGraph::is_empty`].
    pub fn is_empty_marker(&self) -> bool {
        self.form == Form::Empty
    }

    /// Weight of edge `i → j`. Panics on the empty-zone marker.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Weight {
        assert!(self.form != Form::Empty, "empty zone has no edges");
        self.weights[self.idx(i, j)]
    }

    /// A copy with edge `i → j` replaced, marked non-canonical.
    pub fn with_edge(&self, i: usize, j: usize, w: Weight) -> Self {
        assert!(self.form != Form::Empty, "empty zone has no edges");
        let mut g = self.clone();
        let k = g.idx(i, j);
        g.weights[k] = w;
        g.form = Form::Raw;
        g
    }

    /// Shortest-path closure by Floyd–Warshall. A negative cycle yields the
    /// empty-zone marker.
    pub fn canonicalize(&self) -> Result<DistanceGraph, DbmError> {
        if self.form != Form::Raw {
            return Ok(self.clone());
        }
        let n = self.dim;
        let mut w = self.weights.clone();
        for k in 0..n {
            for i in 0..n {
                let ik = w[i * n + k];
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let kj = w[k * n + j];
                    if kj.is_infinite() {
                        continue;
                    }
                    let via = ik.checked_add(kj)?;
                    if via < w[i * n + j] {
                        w[i * n + j] = via;
                    }
                }
                if w[i * n + i] < Weight::LE_ZERO {
                    return Ok(Self::empty(n - 1));
                }
            }
        }
        Ok(DistanceGraph {
            dim: n,
            weights: w,
            form: Form::Canonical,
        })
    }

    /// Whether the graph has a cycle of weight at most `(<, 0)`.
    pub fn is_empty(&self) -> Result<bool, DbmError> {
        match self.form {
            Form::Empty => Ok(true),
            Form::Canonical => Ok(false),
            Form::Raw => Ok(self.canonicalize()?.form == Form::Empty),
        }
    }

    fn check_dim(&self, other: &DistanceGraph) -> Result<(), DbmError> {
        if self.dim != other.dim {
            return Err(DbmError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// Entrywise minimum; denotes the intersection. Not canonical.
    pub fn intersect_min(&self, other: &DistanceGraph) -> Result<DistanceGraph, DbmError> {
        self.check_dim(other)?;
        if self.form == Form::Empty || other.form == Form::Empty {
            return Ok(Self::empty(self.dim - 1));
        }
        Ok(DistanceGraph {
            dim: self.dim,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| *a.min(b))
                .collect(),
            form: Form::Raw,
        })
    }

    /// Intersect with a guard; the result is canonical (or the empty marker).
    pub fn constrain(&self, guard: &Guard) -> Result<DistanceGraph, DbmError> {
        let mut g = self.canonicalize()?;
        for atom in guard.atoms() {
            if g.form == Form::Empty {
                break;
            }
            let x = atom.clock;
            if x == 0 || x >= self.dim {
                return Err(DbmError::BadClock(x));
            }
            let c = atom.constant as i64;
            match atom.comparison {
                Comparison::Lt => g.tighten(0, x, Weight::strict(c))?,
                Comparison::Le => g.tighten(0, x, Weight::weak(c))?,
                Comparison::Gt => g.tighten(x, 0, Weight::strict(-c))?,
                Comparison::Ge => g.tighten(x, 0, Weight::weak(-c))?,
            }
        }
        Ok(g)
    }

    /// Tighten edge `i → j` of a canonical graph to `w` and restore the
    /// closure in O(dim²).
    fn tighten(&mut self, i: usize, j: usize, w: Weight) -> Result<(), DbmError> {
        debug_assert_eq!(self.form, Form::Canonical);
        if w >= self.get(i, j) {
            return Ok(());
        }
        if w.checked_add(self.get(j, i))? < Weight::LE_ZERO {
            *self = Self::empty(self.dim - 1);
            return Ok(());
        }
        let n = self.dim;
        let col_i: Vec<Weight> = (0..n).map(|a| self.weights[a * n + i]).collect();
        let row_j: Vec<Weight> = (0..n).map(|b| self.weights[j * n + b]).collect();
        for (a, &ai) in col_i.iter().enumerate() {
            if ai.is_infinite() {
                continue;
            }
            let through = ai.checked_add(w)?;
            for (b, &jb) in row_j.iter().enumerate() {
                if jb.is_infinite() {
                    continue;
                }
                let via = through.checked_add(jb)?;
                if via < self.weights[a * n + b] {
                    self.weights[a * n + b] = via;
                }
            }
        }
        Ok(())
    }

    /// `{[R]v : v ∈ Z}`. The input is canonicalized first if needed.
    pub fn reset(&self, clocks: &[usize]) -> Result<DistanceGraph, DbmError> {
        let mut g = self.canonicalize()?;
        if g.form == Form::Empty {
            return Err(DbmError::EmptyZone);
        }
        let n = g.dim;
        for &x in clocks {
            if x == 0 || x >= n {
                return Err(DbmError::BadClock(x));
            }
            for j in 0..n {
                g.weights[x * n + j] = g.weights[j];
                g.weights[j * n + x] = g.weights[j * n];
            }
            g.weights[x * n + x] = Weight::LE_ZERO;
            g.weights[x * n] = Weight::LE_ZERO;
            g.weights[x] = Weight::LE_ZERO;
        }
        Ok(g)
    }

    /// Closure under time successors: drop all upper bounds.
    pub fn time_elapse(&self) -> Result<DistanceGraph, DbmError> {
        let mut g = self.canonicalize()?;
        if g.form == Form::Empty {
            return Err(DbmError::EmptyZone);
        }
        for x in 1..g.dim {
            g.weights[x] = Weight::INFINITY;
        }
        Ok(g)
    }

    /// `self ⊆ other` for canonical graphs.
    pub fn is_included_in(&self, other: &DistanceGraph) -> Result<bool, DbmError> {
        self.check_dim(other)?;
        let z = self.canonicalize()?;
        let zp = other.canonicalize()?;
        if z.form == Form::Empty {
            return Ok(true);
        }
        if zp.form == Form::Empty {
            return Ok(false);
        }
        Ok(z.weights.iter().zip(&zp.weights).all(|(a, b)| a <= b))
    }

    /// Exact membership of a valuation.
    pub fn contains(&self, v: &Valuation) -> bool {
        if self.form == Form::Empty {
            return false;
        }
        assert_eq!(v.clocks() + 1, self.dim, "valuation has wrong number of clocks");
        for i in 0..self.dim {
            let vi = v.get(i);
            for j in 0..self.dim {
                if !satisfies(v.get(j) - vi, self.get(i, j)) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether this zone is closed under time elapse.
    pub fn is_time_elapsed(&self) -> Result<bool, DbmError> {
        let z = self.canonicalize()?;
        if z.form == Form::Empty {
            return Ok(true);
        }
        Ok(z.time_elapse()? == z)
    }

    /// Every finite constant multiplied by `factor > 0`. Denotes the image of
    /// the zone under `v ↦ factor·v`.
    pub fn scaled(&self, factor: i64) -> Result<DistanceGraph, DbmError> {
        assert!(factor > 0);
        if self.form == Form::Empty {
            return Ok(self.clone());
        }
        let weights = self
            .weights
            .iter()
            .map(|w| match w.constant() {
                None => Ok(Weight::INFINITY),
                Some(c) => {
                    let c = c.checked_mul(factor).ok_or(WeightError::Overflow)?;
                    Weight::try_new(w.relation(), c)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DistanceGraph {
            dim: self.dim,
            weights,
            form: self.form,
        })
    }

    /// Weight matrix with a header row and column of clock names. Clock 0 is
    /// rendered as `0`.
    pub fn render(&self, names: &[&str]) -> String {
        assert_eq!(names.len() + 1, self.dim);
        if self.form == Form::Empty {
            return "empty".to_string();
        }
        let labels: Vec<&str> = std::iter::once("0").chain(names.iter().copied()).collect();
        let cells: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        let width = cells
            .iter()
            .map(String::len)
            .chain(labels.iter().map(|l| l.len()))
            .max()
            .unwrap_or(1);
        let mut out = format!("{:width$}", "");
        for l in &labels {
            out.push_str(&format!(" {l:>width$}"));
        }
        for i in 0..self.dim {
            out.push('\n');
            out.push_str(&format!("{:width$}", labels[i]));
            for j in 0..self.dim {
                out.push_str(&format!(" {:>width$}", cells[self.idx(i, j)]));
            }
        }
        out
    }
}

/// A zone with rational constants, stored as the integer zone `scale·Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledGraph {
    scale: i64,
    graph: DistanceGraph,
}

impl ScaledGraph {
    pub fn new(scale: i64, graph: DistanceGraph) -> Self {
        assert!(scale > 0);
        ScaledGraph { scale, graph }
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// The zone over scaled coordinates.
    pub fn graph(&self) -> &DistanceGraph {
        &self.graph
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        let k = Rational64::from_integer(self.scale);
        let scaled = Valuation::new(v.values().iter().map(|r| r * k).collect());
        self.graph.contains(&scaled)
    }

    /// Whether the zone shares a valuation with the integer zone `z`.
    pub fn intersects(&self, z: &DistanceGraph) -> Result<bool, DbmError> {
        let z = z.scaled(self.scale)?;
        Ok(!self.graph.intersect_min(&z)?.is_empty()?)
    }
}

impl fmt::Debug for DistanceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..self.dim).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        write!(f, "{}", self.render(&refs))
    }
}
