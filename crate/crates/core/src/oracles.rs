//! Brute-force references for the symbolic machinery: grid valuations, zone
//! corpora, a delay sweep over LU-regions, a region-graph reachability
//! checker and random automata.
//!
//! None of this is on the exploration path; it exists so that the library
//! can be checked against definitions rather than against itself.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alu::alu_includes;
use crate::automaton::{Atom, Automaton, Comparison, Guard, LuBounds, Transition};
use crate::dbm::{DbmError, DistanceGraph, Valuation};
use crate::regions::{region_of, rlu_contains, BoundFunction, RegionDescriptor, RegionError};
use crate::weights::{LuConstant, Relation, Weight};

const COMPARISONS: [Comparison; 4] = [Comparison::Lt, Comparison::Le, Comparison::Ge, Comparison::Gt];

/// One step in building a zone from the zero point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZoneOp {
    Constrain(Atom),
    Reset(Vec<usize>),
    Elapse,
}

impl ZoneOp {
    fn apply(&self, z: &DistanceGraph) -> Result<DistanceGraph, DbmError> {
        match self {
            ZoneOp::Constrain(a) => z.constrain(&Guard::new(vec![*a])),
            ZoneOp::Reset(r) => z.reset(r),
            ZoneOp::Elapse => z.time_elapse(),
        }
    }

    fn all(clocks: usize, max_constant: u32) -> Vec<ZoneOp> {
        let mut ops = vec![ZoneOp::Elapse];
        for mask in 1u32..(1 << clocks) {
            ops.push(ZoneOp::Reset(
                (1..=clocks).filter(|x| mask & (1 << (x - 1)) != 0).collect(),
            ));
        }
        for x in 1..=clocks {
            for cmp in COMPARISONS {
                for c in 0..=max_constant {
                    ops.push(ZoneOp::Constrain(Atom::new(x, cmp, c)));
                }
            }
        }
        ops
    }

    fn random(rng: &mut impl Rng, clocks: usize, max_constant: u32) -> ZoneOp {
        match rng.gen_range(0..5) {
            0 | 1 => ZoneOp::Elapse,
            2 => {
                let mut r: Vec<usize> = (1..=clocks).filter(|_| rng.gen_bool(0.5)).collect();
                if r.is_empty() {
                    r.push(rng.gen_range(1..=clocks));
                }
                ZoneOp::Reset(r)
            }
            _ => ZoneOp::Constrain(Atom::new(
                rng.gen_range(1..=clocks),
                *COMPARISONS.choose(rng).expect("non-empty"),
                rng.gen_range(0..=max_constant),
            )),
        }
    }
}

/// A seeded sequence of zone operations applied to the zero point. Steps
/// that would empty the zone are skipped, so every recipe yields a
/// non-empty zone of the kind reachable in an automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneRecipe {
    pub seed: u64,
    pub clocks: usize,
    pub ops: Vec<ZoneOp>,
}

impl ZoneRecipe {
    pub fn random(seed: u64, clocks: usize, max_constant: u32, max_len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(1..=max_len);
        let ops = (0..len).map(|_| ZoneOp::random(&mut rng, clocks, max_constant)).collect();
        ZoneRecipe { seed, clocks, ops }
    }

    pub fn build(&self) -> DistanceGraph {
        let mut z = DistanceGraph::zero(self.clocks);
        for op in &self.ops {
            let next = op.apply(&z).expect("recipe constants are small");
            if !next.is_empty_marker() {
                z = next;
            }
        }
        z
    }
}

/// Every distinct non-empty zone obtained from the zero point by at most
/// `depth` operations with constants up to `max_constant`, in breadth-first
/// order.
pub fn zone_closure(clocks: usize, max_constant: u32, depth: usize) -> Vec<DistanceGraph> {
    let ops = ZoneOp::all(clocks, max_constant);
    let start = DistanceGraph::zero(clocks);
    let mut seen: HashSet<DistanceGraph> = HashSet::from([start.clone()]);
    let mut out = vec![start];
    let mut frontier = 0..1;
    for _ in 0..depth {
        let end = out.len();
        for i in frontier.clone() {
            for op in &ops {
                let z = op.apply(&out[i]).expect("closure constants are small");
                if !z.is_empty_marker() && seen.insert(z.clone()) {
                    out.push(z);
                }
            }
        }
        frontier = end..out.len();
    }
    out
}

/// All LU maps with entries in `{−∞, 0, …, max_constant}`.
pub fn all_lu_maps(clocks: usize, max_constant: i64) -> Vec<LuBounds> {
    let values: Vec<LuConstant> = std::iter::once(LuConstant::NegInfinity)
        .chain((0..=max_constant).map(LuConstant::Finite))
        .collect();
    let k = values.len();
    let total = k.pow(2 * clocks as u32);
    (0..total)
        .map(|mut code| {
            let mut pick = |_| {
                let v = values[code % k];
                code /= k;
                v
            };
            let lower: Vec<LuConstant> = (0..clocks).map(&mut pick).collect();
            let upper: Vec<LuConstant> = (0..clocks).map(&mut pick).collect();
            LuBounds::new(lower, upper)
        })
        .collect()
}

pub fn random_lu(rng: &mut impl Rng, clocks: usize, max_constant: i64) -> LuBounds {
    let mut draw = || {
        let c = rng.gen_range(-1..=max_constant);
        if c < 0 {
            LuConstant::NegInfinity
        } else {
            LuConstant::Finite(c)
        }
    };
    let lower = (0..clocks).map(|_| draw()).collect();
    let upper = (0..clocks).map(|_| draw()).collect();
    LuBounds::new(lower, upper)
}

fn largest_constant(z: &DistanceGraph) -> i64 {
    let mut m = 0;
    for i in 0..z.dim() {
        for j in 0..z.dim() {
            if let Some(c) = z.get(i, j).constant() {
                m = m.max(c.abs());
            }
        }
    }
    m
}

/// Valuations with coordinates `k / denominator`, `0 ≤ k ≤ bound·denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub denominator: i64,
    pub bound: i64,
}

impl GridSpec {
    /// `n` clocks admit at most `n` distinct non-zero fractional parts, so
    /// steps of `1/(2(n+1))` separate them and still leave room in between.
    pub fn denominator_for(clocks: usize) -> i64 {
        2 * (clocks as i64 + 1)
    }

    /// A grid meeting every region of `z` at granularity `alpha_max` and
    /// every neighbourhood of `z` below that granularity.
    pub fn full(z: &DistanceGraph, alpha_max: i64) -> Self {
        let n = z.clocks() as i64;
        let m = largest_constant(z).max(alpha_max);
        GridSpec {
            denominator: Self::denominator_for(z.clocks()),
            bound: n.max(1) * (m + 1),
        }
    }

    /// Only values up to `alpha_max + 1`.
    pub fn coarse(clocks: usize, alpha_max: i64) -> Self {
        GridSpec {
            denominator: Self::denominator_for(clocks),
            bound: alpha_max + 1,
        }
    }
}

fn int_satisfies(diff: i64, w: Weight) -> bool {
    match w.constant() {
        None => true,
        Some(c) => match w.relation() {
            Relation::Strict => diff < c,
            Relation::Weak => diff <= c,
        },
    }
}

/// Grid points of a zone, as numerators over a common denominator.
#[derive(Debug, Clone)]
pub struct ZoneGrid {
    spec: GridSpec,
    points: Vec<Vec<i64>>,
}

impl ZoneGrid {
    pub fn new(z: &DistanceGraph, spec: GridSpec) -> Result<Self, DbmError> {
        let n = z.clocks();
        let mut points = Vec::new();
        if z.canonicalize()?.is_empty_marker() {
            return Ok(ZoneGrid { spec, points });
        }
        let zs = z.canonicalize()?.scaled(spec.denominator)?;
        let top = spec.bound * spec.denominator;
        // Per-clock ranges from the scaled bounds, then a full check.
        let ranges: Vec<(i64, i64)> = (1..=n)
            .map(|x| {
                let lo = zs.get(x, 0).constant().map_or(0, |c| (-c).max(0));
                let hi = zs.get(0, x).constant().map_or(top, |c| c.min(top));
                (lo, hi)
            })
            .collect();
        let mut k = vec![0i64; n];
        fn rec(
            x: usize,
            k: &mut Vec<i64>,
            ranges: &[(i64, i64)],
            zs: &DistanceGraph,
            out: &mut Vec<Vec<i64>>,
        ) {
            if x == k.len() {
                out.push(k.clone());
                return;
            }
            for value in ranges[x].0..=ranges[x].1 {
                k[x] = value;
                // Constraints between clock x+1 and the clocks fixed so far.
                let ok = (0..=x + 1).all(|i| {
                    let ki = if i == 0 { 0 } else { k[i - 1] };
                    int_satisfies(value - ki, zs.get(i, x + 1)) && int_satisfies(ki - value, zs.get(x + 1, i))
                });
                if ok {
                    rec(x + 1, k, ranges, zs, out);
                }
            }
        }
        rec(0, &mut k, &ranges, &zs, &mut points);
        Ok(ZoneGrid { spec, points })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn valuation(&self, k: &[i64]) -> Valuation {
        let d = self.spec.denominator;
        Valuation::new(k.iter().map(|&k| Rational64::new(k, d)).collect())
    }

    pub fn valuations(&self) -> Vec<Valuation> {
        self.points.iter().map(|k| self.valuation(k)).collect()
    }
}

/// Grid valuations of `z`.
pub fn grid_valuations(z: &DistanceGraph, spec: GridSpec) -> Result<Vec<Valuation>, DbmError> {
    Ok(ZoneGrid::new(z, spec)?.valuations())
}

/// Membership of grid points in `a≼LU(Z′)`: the up-set box of the point
/// meets `Z′`.
///
/// The box only bounds single clocks, so against a canonical `Z′` a negative
/// cycle of the intersection passes through clock 0 once and has the shape
/// `0 → x ⇝ y → 0`; that keeps the test quadratic.
#[derive(Debug, Clone)]
pub struct GridMembership {
    denominator: i64,
    zp: DistanceGraph,
}

impl GridMembership {
    pub fn new(zp: &DistanceGraph, denominator: i64) -> Result<Self, DbmError> {
        let zp = zp.canonicalize()?;
        if zp.is_empty_marker() {
            return Err(DbmError::EmptyZone);
        }
        Ok(GridMembership {
            denominator,
            zp: zp.scaled(denominator)?,
        })
    }

    /// Whether the grid point `k` lies in `a≼LU(Z′)`.
    pub fn contains(&self, lu: &LuBounds, k: &[i64]) -> bool {
        let d = self.denominator;
        self.meets_box(k.len(), |x| {
            let a = k[x - 1];
            let lower = match lu.lower(x).value() {
                None => Weight::LE_ZERO,
                Some(l) if a > l * d => Weight::strict(-l * d),
                Some(_) => Weight::weak(-a),
            };
            let upper = match lu.upper(x).value() {
                Some(u) if a <= u * d => Weight::weak(a),
                _ => Weight::INFINITY,
            };
            (lower, upper)
        })
    }

    /// Whether some point of `Z′` is simulated by the grid point `k`, that
    /// is, whether `Z′` meets the down-set `{v : v ≼LU k}`.
    pub fn meets_down_set(&self, lu: &LuBounds, k: &[i64]) -> bool {
        let d = self.denominator;
        self.meets_box(k.len(), |x| {
            let b = k[x - 1];
            let lower = match lu.upper(x).value() {
                None => Weight::LE_ZERO,
                Some(u) if u * d < b => Weight::strict(-u * d),
                Some(_) => Weight::weak(-b),
            };
            let upper = match lu.lower(x).value() {
                Some(l) if b <= l * d => Weight::weak(b),
                _ => Weight::INFINITY,
            };
            (lower, upper)
        })
    }

    /// Non-emptiness of `Z′` intersected with a box given per clock as the
    /// weights of the edges `x → 0` and `0 → x`.
    fn meets_box(&self, n: usize, bounds: impl Fn(usize) -> (Weight, Weight)) -> bool {
        const MAX_CLOCKS: usize = 16;
        assert!(n < MAX_CLOCKS);
        let mut out_of_zero = [Weight::LE_ZERO; MAX_CLOCKS];
        let mut into_zero = [Weight::LE_ZERO; MAX_CLOCKS];
        for x in 1..=n {
            let (lower, upper) = bounds(x);
            out_of_zero[x] = upper.min(self.zp.get(0, x));
            into_zero[x] = lower.min(self.zp.get(x, 0));
        }
        for (x, &out) in out_of_zero.iter().enumerate().take(n + 1) {
            for (y, &into) in into_zero.iter().enumerate().take(n + 1) {
                let path = if x == y { Weight::LE_ZERO } else { self.zp.get(x, y) };
                let cycle = out
                    .checked_add(path)
                    .and_then(|w| w.checked_add(into))
                    .expect("grid constants are small");
                if cycle < Weight::LE_ZERO {
                    return false;
                }
            }
        }
        true
    }
}

/// Checks `Z ⊆ a≼LU(Z′)` point by point on a grid; returns a grid valuation
/// of `Z` outside `a≼LU(Z′)` if there is one.
pub fn inclusion_counterexample(
    grid: &ZoneGrid,
    zp: &DistanceGraph,
    lu: &LuBounds,
) -> Result<Option<Valuation>, DbmError> {
    let member = GridMembership::new(zp, grid.spec().denominator)?;
    Ok(grid
        .points()
        .iter()
        .find(|k| !member.contains(lu, k))
        .map(|k| grid.valuation(k)))
}

/// Grid verdict for `Z ⊆ a≼LU(Z′)`, using the full grid of [`GridSpec::full`].
pub fn inclusion_oracle(z: &DistanceGraph, zp: &DistanceGraph, lu: &LuBounds) -> Result<bool, DbmError> {
    let alpha = BoundFunction::from_lu(lu).max();
    let grid = ZoneGrid::new(z, GridSpec::full(z, alpha))?;
    Ok(inclusion_counterexample(&grid, zp, lu)?.is_none())
}

/// `∃ δ ≥ 0: v′ + δ ∈ r_LU(v)`, by trying every delay at which some clock of
/// `v′` crosses an integer up to `α + 1`, the midpoints between them and one
/// delay beyond.
pub fn rlu_after_delay(v: &Valuation, vp: &Valuation, lu: &LuBounds) -> bool {
    let top = BoundFunction::from_lu(lu).max() + 1;
    let mut delays = vec![Rational64::from_integer(0)];
    for x in 1..=vp.clocks() {
        let value = vp.get(x);
        let mut k = value.ceil().to_integer();
        while k <= top {
            delays.push(Rational64::from_integer(k) - value);
            k += 1;
        }
    }
    delays.sort();
    delays.dedup();
    let mut candidates = delays.clone();
    for w in delays.windows(2) {
        candidates.push((w[0] + w[1]) / 2);
    }
    candidates.push(delays.last().copied().unwrap_or_default() + 1);
    candidates.iter().any(|&d| rlu_contains(v, &vp.delayed(d), lu))
}

/// Time successor of a region, computed on a representative: the least
/// delay that changes the region.
fn time_successor(v: &Valuation, alpha: &BoundFunction) -> Option<Valuation> {
    let bounded: Vec<usize> = (1..=v.clocks())
        .filter(|&x| v.get(x) <= Rational64::from_integer(alpha.get(x)))
        .collect();
    if bounded.is_empty() {
        return None;
    }
    let to_next: Option<Rational64> = bounded
        .iter()
        .map(|&x| v.get(x))
        .filter(|r| !r.is_integer())
        .map(|r| r.ceil() - r)
        .min();
    let has_integer = bounded.iter().any(|&x| v.get(x).is_integer());
    let delay = match (has_integer, to_next) {
        (true, Some(d)) => d / 2,
        (true, None) => Rational64::new(1, 2),
        (false, Some(d)) => d,
        (false, None) => unreachable!("a bounded clock is integral or not"),
    };
    Some(v.delayed(delay))
}

/// Reachability of an accepting state in the region graph built with one
/// maximal constant per clock (`α_x = max(L_x, U_x)`), explored on region
/// representatives. Fails when more than `limit` regions are visited.
pub fn region_graph_reachability(a: &Automaton, limit: usize) -> Result<bool, RegionError> {
    let alpha = BoundFunction::from_lu(&a.lu_bounds());
    let start = Valuation::zero(a.clock_count());
    let mut seen: HashSet<(usize, RegionDescriptor)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((a.initial(), region_of(&start, &alpha)));
    queue.push_back((a.initial(), start));
    while let Some((q, v)) = queue.pop_front() {
        if a.is_accepting(q) {
            return Ok(true);
        }
        let mut next: Vec<(usize, Valuation)> = Vec::new();
        if let Some(w) = time_successor(&v, &alpha) {
            next.push((q, w));
        }
        for (_, t) in a.outgoing(q) {
            if t.guard.holds(&v) {
                next.push((t.target, v.reset(&t.resets)));
            }
        }
        for (q2, w) in next {
            let r = region_of(&w, &alpha);
            if seen.insert((q2, r.clone())) {
                if seen.len() > limit {
                    return Err(RegionError::TooManyRegions {
                        count: seen.len() as u128,
                        limit: limit as u128,
                    });
                }
                queue.push_back((q2, r.representative()));
            }
        }
    }
    Ok(false)
}

/// Shape of a random automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutomatonShape {
    pub max_states: usize,
    pub clocks: usize,
    pub max_constant: u32,
    pub max_transitions: usize,
    pub max_atoms: usize,
}

impl Default for AutomatonShape {
    fn default() -> Self {
        AutomatonShape {
            max_states: 4,
            clocks: 2,
            max_constant: 3,
            max_transitions: 6,
            max_atoms: 2,
        }
    }
}

/// A random automaton with state 0 initial and the last state accepting.
pub fn random_automaton(seed: u64, shape: AutomatonShape) -> Automaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(2..=shape.max_states.max(2));
    let count = rng.gen_range(1..=shape.max_transitions.max(1));
    let transitions = (0..count)
        .map(|_| {
            let source = rng.gen_range(0..states);
            let target = rng.gen_range(0..states);
            let atoms = (0..rng.gen_range(0..=shape.max_atoms))
                .map(|_| {
                    Atom::new(
                        rng.gen_range(1..=shape.clocks),
                        *COMPARISONS.choose(&mut rng).expect("non-empty"),
                        rng.gen_range(0..=shape.max_constant),
                    )
                })
                .collect();
            let resets = (1..=shape.clocks).filter(|_| rng.gen_bool(0.4)).collect();
            Transition::new(source, Guard::new(atoms), resets, target)
        })
        .collect();
    let names = (0..states).map(|q| format!("q{q}")).collect();
    let clocks = (0..shape.clocks)
        .map(|x| match x {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("c{x}"),
        })
        .collect();
    Automaton::new(names, 0, &[states - 1], clocks, transitions).expect("generated automaton is well formed")
}

/// A zone pair on which the quadratic test and the grid disagree.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub z: DistanceGraph,
    pub zp: DistanceGraph,
    pub lu: LuBounds,
    pub quadratic: bool,
    /// A valuation of `Z` outside `a≼LU(Z′)`, when the grid found one.
    pub witness: Option<Valuation>,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lu: {:?}", self.lu)?;
        writeln!(f, "quadratic test: {}", if self.quadratic { "included" } else { "not included" })?;
        match &self.witness {
            Some(v) => writeln!(f, "grid witness: {v:?}")?,
            None => writeln!(f, "grid witness: none")?,
        }
        writeln!(f, "Z:\n{:?}", self.z)?;
        write!(f, "Z':\n{:?}", self.zp)
    }
}

/// Grid verdict, trying the coarse grid first and the full one only when
/// the coarse grid finds no counterexample but the quadratic test claims
/// one exists.
pub fn checked_pair(
    z: &DistanceGraph,
    zp: &DistanceGraph,
    lu: &LuBounds,
) -> Result<Option<Disagreement>, DbmError> {
    let quadratic = alu_includes(z, zp, lu)?;
    let alpha = BoundFunction::from_lu(lu).max();
    let coarse = ZoneGrid::new(z, GridSpec::coarse(z.clocks(), alpha))?;
    let mut witness = inclusion_counterexample(&coarse, zp, lu)?;
    if witness.is_none() && !quadratic {
        let full = ZoneGrid::new(z, GridSpec::full(z, alpha))?;
        witness = inclusion_counterexample(&full, zp, lu)?;
    }
    if quadratic == witness.is_none() {
        Ok(None)
    } else {
        Ok(Some(Disagreement {
            z: z.clone(),
            zp: zp.clone(),
            lu: lu.clone(),
            quadratic,
            witness,
        }))
    }
}

/// Compares the quadratic test with the grid on `iterations` random zone
/// pairs and LU maps; stops at the first disagreement.
pub fn oracle_check(seed: u64, clocks: usize, iterations: u64) -> Result<u64, Box<Disagreement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        let z = ZoneRecipe::random(rng.gen(), clocks, 3, 6).build();
        let zp = ZoneRecipe::random(rng.gen(), clocks, 3, 6).build();
        let lu = random_lu(&mut rng, clocks, 3);
        if let Some(d) = checked_pair(&z, &zp, &lu).expect("recipe zones are non-empty") {
            return Err(Box::new(d));
        }
    }
    Ok(iterations)
}
