//! Regions with respect to a bound function, the LU-preorder, LU-regions and
//! the guard sequences that characterise LU-simulation.

use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::automaton::{Atom, Comparison, Guard, LuBounds};
use crate::dbm::{DbmError, DistanceGraph, ScaledGraph, Valuation};
use crate::weights::{LuConstant, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region enumeration would produce {count} regions (limit {limit})")]
    TooManyRegions { count: u128, limit: u128 },
    #[error(transparent)]
    Dbm(#[from] DbmError),
}

/// Default cap for [`enumerate_regions`].
pub const DEFAULT_REGION_LIMIT: u128 = 1_000_000;

/// `α_x` per clock, index 0 being the reference clock with `α_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundFunction(Vec<i64>);

impl BoundFunction {
    /// Bounds for clocks `1..=n`.
    pub fn new(bounds: &[i64]) -> Self {
        assert!(bounds.iter().all(|b| *b >= 0), "region bounds are non-negative");
        BoundFunction(std::iter::once(0).chain(bounds.iter().copied()).collect())
    }

    /// `α_x = max(L_x, U_x)` with `−∞` read as 0.
    pub fn from_lu(lu: &LuBounds) -> Self {
        BoundFunction(lu.max_bounds())
    }

    pub fn clocks(&self) -> usize {
        self.0.len() - 1
    }

    #[inline]
    pub fn get(&self, x: usize) -> i64 {
        self.0[x]
    }

    pub fn max(&self) -> i64 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Position of one clock in a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntervalTag {
    /// `x = c`
    Exact(i64),
    /// `c − 1 < x < c`
    Open(i64),
    /// `x > α_x`
    Above,
}

/// A region: one interval tag per clock plus the order of fractional parts
/// among the clocks in open intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionDescriptor {
    alpha: BoundFunction,
    tags: Vec<IntervalTag>,
    /// Blocks of clocks with equal fractional parts, increasing.
    order: Vec<Vec<usize>>,
}

fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

impl RegionDescriptor {
    pub fn alpha(&self) -> &BoundFunction {
        &self.alpha
    }

    /// Tag of clock `x` (1-based).
    pub fn tag(&self, x: usize) -> IntervalTag {
        self.tags[x - 1]
    }

    pub fn fractional_order(&self) -> &[Vec<usize>] {
        &self.order
    }

    pub fn clocks(&self) -> usize {
        self.tags.len()
    }

    /// Upper-bound weight `c_{0x}` of clock `x` in the region.
    pub fn upper_weight(&self, x: usize) -> Weight {
        match self.tag(x) {
            IntervalTag::Exact(c) => Weight::weak(c),
            IntervalTag::Open(c) => Weight::strict(c),
            IntervalTag::Above => Weight::INFINITY,
        }
    }

    /// A valuation inside the region, with denominator `2(n+1)`.
    pub fn representative(&self) -> Valuation {
        let n = self.clocks();
        let denom = 2 * (n as i64 + 1);
        let mut values = vec![Rational64::from_integer(0); n];
        for (x, tag) in self.tags.iter().enumerate() {
            values[x] = match *tag {
                IntervalTag::Exact(c) => Rational64::from_integer(c),
                IntervalTag::Above => Rational64::new(2 * self.alpha.get(x + 1) + 1, 2),
                IntervalTag::Open(_) => continue,
            };
        }
        for (rank, block) in self.order.iter().enumerate() {
            let f = Rational64::new(2 * (rank as i64 + 1), denom);
            for &x in block {
                if let IntervalTag::Open(c) = self.tag(x) {
                    values[x - 1] = Rational64::from_integer(c - 1) + f;
                }
            }
        }
        Valuation::new(values)
    }

    pub fn render(&self, names: &[&str]) -> String {
        let mut parts = Vec::with_capacity(self.tags.len() + 1);
        for (x, tag) in self.tags.iter().enumerate() {
            let name = names[x];
            parts.push(match *tag {
                IntervalTag::Exact(c) => format!("{name}={c}"),
                IntervalTag::Open(c) => format!("{name} in ({},{c})", c - 1),
                IntervalTag::Above => format!("{name}>{}", self.alpha.get(x + 1)),
            });
        }
        let blocks: Vec<String> = self
            .order
            .iter()
            .map(|b| {
                let inner: Vec<&str> = b.iter().map(|&x| names[x - 1]).collect();
                format!("[{}]", inner.join(","))
            })
            .collect();
        let frac = if blocks.is_empty() {
            "-".to_string()
        } else {
            blocks.join(" < ")
        };
        parts.push(format!("frac: {frac}"));
        parts.join("; ")
    }
}

impl fmt::Display for RegionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.clocks()).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        write!(f, "{}", self.render(&refs))
    }
}

/// The region of `v` with respect to `alpha`.
pub fn region_of(v: &Valuation, alpha: &BoundFunction) -> RegionDescriptor {
    assert_eq!(v.clocks(), alpha.clocks());
    let mut tags = Vec::with_capacity(v.clocks());
    let mut open: Vec<(Rational64, usize)> = Vec::new();
    for x in 1..=v.clocks() {
        let value = v.get(x);
        let tag = if value > Rational64::from_integer(alpha.get(x)) {
            IntervalTag::Above
        } else if value.is_integer() {
            IntervalTag::Exact(value.to_integer())
        } else {
            open.push((frac(value), x));
            IntervalTag::Open(value.floor().to_integer() + 1)
        };
        tags.push(tag);
    }
    open.sort();
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for (f, x) in open {
        if last == Some(f) {
            order.last_mut().expect("block exists").push(x);
        } else {
            order.push(vec![x]);
            last = Some(f);
        }
    }
    RegionDescriptor {
        alpha: alpha.clone(),
        tags,
        order,
    }
}

/// Canonical distance graph of a region.
pub fn region_to_dbm(r: &RegionDescriptor) -> DistanceGraph {
    let n = r.clocks();
    let mut edges = Vec::new();
    for x in 1..=n {
        match r.tag(x) {
            IntervalTag::Exact(c) => {
                edges.push((0, x, Weight::weak(c)));
                edges.push((x, 0, Weight::weak(-c)));
            }
            IntervalTag::Open(c) => {
                edges.push((0, x, Weight::strict(c)));
                edges.push((x, 0, Weight::strict(-(c - 1))));
            }
            IntervalTag::Above => edges.push((x, 0, Weight::strict(-r.alpha.get(x)))),
        }
    }
    let int_part = |x: usize| match r.tag(x) {
        IntervalTag::Open(c) => c,
        _ => unreachable!("only open clocks are ordered"),
    };
    for (bi, block) in r.order.iter().enumerate() {
        for &x in block {
            let cx = int_part(x);
            for &y in block {
                if x != y {
                    // x − y = cx − cy
                    edges.push((y, x, Weight::weak(cx - int_part(y))));
                }
            }
            for later in &r.order[bi + 1..] {
                for &y in later {
                    // frac(x) < frac(y): x − y < cx − cy
                    edges.push((y, x, Weight::strict(cx - int_part(y))));
                }
            }
        }
    }
    let g = DistanceGraph::from_edges(n, &edges)
        .canonicalize()
        .expect("region constants are small");
    debug_assert!(!g.is_empty_marker(), "regions are non-empty");
    g
}

fn fubini(n: usize) -> u128 {
    // Ordered Bell numbers: a(n) = Σ_k C(n,k) a(n−k).
    let mut a = vec![1u128; n + 1];
    for m in 1..=n {
        let mut sum = 0u128;
        let mut binom = 1u128;
        for k in 1..=m {
            binom = binom * (m - k + 1) as u128 / k as u128;
            sum += binom * a[m - k];
        }
        a[m] = sum;
    }
    a[n]
}

/// Upper bound on the number of regions for `alpha`.
pub fn region_count_bound(alpha: &BoundFunction) -> u128 {
    let tags: u128 = (1..=alpha.clocks())
        .map(|x| 2 * alpha.get(x) as u128 + 2)
        .product();
    tags.saturating_mul(fubini(alpha.clocks()))
}

fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let n = items.len();
    // First block: every non-empty subset, by bitmask.
    for mask in 1u32..(1 << n) {
        let first: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| items[i]).collect();
        for tail in ordered_partitions(&rest) {
            let mut p = vec![first.clone()];
            p.extend(tail);
            out.push(p);
        }
    }
    out
}

/// Every region for `alpha`, in a fixed order.
pub fn enumerate_regions(
    alpha: &BoundFunction,
    limit: u128,
) -> Result<Vec<RegionDescriptor>, RegionError> {
    let count = region_count_bound(alpha);
    if count > limit {
        return Err(RegionError::TooManyRegions { count, limit });
    }
    let n = alpha.clocks();
    let choices: Vec<Vec<IntervalTag>> = (1..=n)
        .map(|x| {
            let a = alpha.get(x);
            let mut c: Vec<IntervalTag> = (0..=a).map(IntervalTag::Exact).collect();
            c.extend((1..=a).map(IntervalTag::Open));
            c.push(IntervalTag::Above);
            c
        })
        .collect();
    let mut out = Vec::new();
    let mut tags = vec![IntervalTag::Above; n];
    fn rec(
        x: usize,
        choices: &[Vec<IntervalTag>],
        tags: &mut Vec<IntervalTag>,
        alpha: &BoundFunction,
        out: &mut Vec<RegionDescriptor>,
    ) {
        if x == choices.len() {
            let open: Vec<usize> = (0..tags.len())
                .filter(|&i| matches!(tags[i], IntervalTag::Open(_)))
                .map(|i| i + 1)
                .collect();
            for order in ordered_partitions(&open) {
                out.push(RegionDescriptor {
                    alpha: alpha.clone(),
                    tags: tags.clone(),
                    order,
                });
            }
            return;
        }
        for &t in &choices[x] {
            tags[x] = t;
            rec(x + 1, choices, tags, alpha, out);
        }
    }
    rec(0, &choices, &mut tags, alpha, &mut out);
    Ok(out)
}

/// The regions whose intersection with `zone` is non-empty.
pub fn enumerate_regions_intersecting(
    zone: &DistanceGraph,
    alpha: &BoundFunction,
    limit: u128,
) -> Result<Vec<RegionDescriptor>, RegionError> {
    let mut out = Vec::new();
    for r in enumerate_regions(alpha, limit)? {
        if !region_to_dbm(&r).intersect_min(zone)?.is_empty()? {
            out.push(r);
        }
    }
    Ok(out)
}

fn below(value: Rational64, bound: LuConstant) -> bool {
    // value ≤ bound, with −∞ below everything
    match bound.value() {
        None => false,
        Some(b) => value <= Rational64::from_integer(b),
    }
}

fn above(value: Rational64, bound: LuConstant) -> bool {
    !below(value, bound)
}

/// `v ≼LU v′`.
pub fn lu_preorder(v: &Valuation, vp: &Valuation, lu: &LuBounds) -> bool {
    assert_eq!(v.clocks(), vp.clocks());
    (1..=v.clocks()).all(|x| {
        let (a, b) = (v.get(x), vp.get(x));
        (b >= a || above(b, lu.lower(x))) && (b <= a || above(a, lu.upper(x)))
    })
}

/// Per-clock bounds `(lower, upper)` of a box, each `None` when absent; the
/// boolean marks a strict bound.
type ClockBox = (Option<(Rational64, bool)>, Option<(Rational64, bool)>);

fn box_graph(bounds: &[ClockBox]) -> ScaledGraph {
    let scale = bounds
        .iter()
        .flat_map(|(lo, hi)| lo.iter().chain(hi.iter()))
        .fold(1, |acc, (r, _)| num_integer::lcm(acc, *r.denom()));
    let to_int = |r: Rational64| (r * scale).to_integer();
    let mut edges = Vec::new();
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        let x = i + 1;
        if let Some((r, strict)) = lo {
            let c = -to_int(*r);
            edges.push((x, 0, if *strict { Weight::strict(c) } else { Weight::weak(c) }));
        }
        if let Some((r, strict)) = hi {
            let c = to_int(*r);
            edges.push((0, x, if *strict { Weight::strict(c) } else { Weight::weak(c) }));
        }
    }
    ScaledGraph::new(scale, DistanceGraph::from_edges(bounds.len(), &edges))
}

/// `{v′ : v ≼LU v′}`, a box with rational corners.
pub fn up_set_box(v: &Valuation, lu: &LuBounds) -> ScaledGraph {
    let bounds: Vec<ClockBox> = (1..=v.clocks())
        .map(|x| {
            let a = v.get(x);
            let lower = if above(a, lu.lower(x)) {
                lu.lower(x).value().map(|l| (Rational64::from_integer(l), true))
            } else {
                Some((a, false))
            };
            let upper = if above(a, lu.upper(x)) {
                None
            } else {
                Some((a, false))
            };
            (lower, upper)
        })
        .collect();
    box_graph(&bounds)
}

/// `{v : v ≼LU v′}`, a box with rational corners.
pub fn down_set_box(vp: &Valuation, lu: &LuBounds) -> ScaledGraph {
    let bounds: Vec<ClockBox> = (1..=vp.clocks())
        .map(|x| {
            let b = vp.get(x);
            let lower = match lu.upper(x).value() {
                None => None,
                Some(u) if Rational64::from_integer(u) < b => Some((Rational64::from_integer(u), true)),
                Some(_) => Some((b, false)),
            };
            let upper = if above(b, lu.lower(x)) {
                None
            } else {
                Some((b, false))
            };
            (lower, upper)
        })
        .collect();
    box_graph(&bounds)
}

/// Whether `vp` satisfies every LU-guard that `v` satisfies.
fn satisfies_guards_of(v: &Valuation, vp: &Valuation, lu: &LuBounds) -> bool {
    (1..=v.clocks()).all(|x| {
        let (a, b) = (v.get(x), vp.get(x));
        let lower_ok = lu.lower(x).value().is_none_or(|l| {
            (0..=l).all(|c| {
                let c = Rational64::from_integer(c);
                (a <= c || b > c) && (a < c || b >= c)
            })
        });
        let upper_ok = lu.upper(x).value().is_none_or(|u| {
            (0..=u).all(|c| {
                let c = Rational64::from_integer(c);
                (a >= c || b < c) && (a > c || b <= c)
            })
        });
        lower_ok && upper_ok
    })
}

/// `v′ ∈ r_LU(v)`.
///
/// The guard condition is read as "`v′` satisfies every LU-guard that `v`
/// satisfies". Requiring agreement in both directions would exclude, for
/// instance, `v = (1)`, `v′ = (5)` with `L = 2, U = −∞`, although `v ≼LU v′`.
pub fn rlu_contains(v: &Valuation, vp: &Valuation, lu: &LuBounds) -> bool {
    assert_eq!(v.clocks(), vp.clocks());
    if !satisfies_guards_of(v, vp, lu) {
        return false;
    }
    let n = v.clocks();
    let same_int = |x: usize| v.get(x).floor() == vp.get(x).floor();
    for x in 1..=n {
        if !same_int(x) || !below(v.get(x), lu.upper(x)) {
            continue;
        }
        for y in 1..=n {
            if !same_int(y) || !below(v.get(y), lu.lower(y)) {
                continue;
            }
            let (fx, fy) = (frac(v.get(x)), frac(v.get(y)));
            let (gx, gy) = (frac(vp.get(x)), frac(vp.get(y)));
            if (fx < fy && gx >= gy) || (fx == fy && gx > gy) {
                return false;
            }
        }
    }
    true
}

/// Guards without resets, to be taken in order with delays in between.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GuardSequence(Vec<Guard>);

impl GuardSequence {
    pub fn new(guards: Vec<Guard>) -> Self {
        GuardSequence(guards)
    }

    pub fn guards(&self) -> &[Guard] {
        &self.0
    }
}

/// `seq(v)`: the tightest LU-guards satisfied by `v`, followed by guards
/// testing the order of fractional parts, clocks with larger fractional
/// parts first.
pub fn build_test_sequence(v: &Valuation, lu: &LuBounds) -> GuardSequence {
    let n = v.clocks();
    let int = |r: Rational64| r.floor().to_integer();
    let as_const = |c: i64| u32::try_from(c).expect("guard constant fits u32");

    let mut g_int = Guard::default();
    for x in 1..=n {
        let a = v.get(x);
        if let Some(l) = lu.lower(x).value() {
            if a > Rational64::from_integer(l) {
                g_int.push(Atom::new(x, Comparison::Gt, as_const(l)));
            } else if a.is_integer() {
                g_int.push(Atom::new(x, Comparison::Ge, as_const(int(a))));
            } else {
                g_int.push(Atom::new(x, Comparison::Gt, as_const(int(a))));
            }
        }
        if let Some(u) = lu.upper(x).value() {
            if a <= Rational64::from_integer(u) {
                if a.is_integer() {
                    g_int.push(Atom::new(x, Comparison::Le, as_const(int(a))));
                } else {
                    g_int.push(Atom::new(x, Comparison::Lt, as_const(int(a) + 1)));
                }
            }
        }
    }

    // Only clocks whose next integer is still an LU constant take part; the
    // others are pinned down by g_int already.
    let next = |x: usize| int(v.get(x)) + 1;
    let mut lower_clocks: Vec<usize> = (1..=n)
        .filter(|&y| lu.lower(y).value().is_some_and(|l| next(y) <= l))
        .collect();
    lower_clocks.sort_by_key(|&y| (std::cmp::Reverse(frac(v.get(y))), y));
    let upper_clocks: Vec<usize> = (1..=n)
        .filter(|&x| lu.upper(x).value().is_some_and(|u| next(x) <= u))
        .collect();

    let mut guards = vec![g_int];
    // Clocks with equal fractional parts reach their next integer together:
    // all weak tests of a class come before its strict ones.
    for class in lower_clocks.chunk_by(|a, b| frac(v.get(*a)) == frac(v.get(*b))) {
        let fy = frac(v.get(class[0]));
        for &y in class {
            let mut g = Guard::default();
            for &x in upper_clocks.iter().filter(|&&x| x != y && frac(v.get(x)) == fy) {
                g.push(Atom::new(x, Comparison::Le, as_const(next(x))));
            }
            if !g.is_true() {
                g.push(Atom::new(y, Comparison::Ge, as_const(next(y))));
                guards.push(g);
            }
        }
        for &y in class {
            let mut g = Guard::default();
            for &x in upper_clocks.iter().filter(|&&x| frac(v.get(x)) < fy) {
                g.push(Atom::new(x, Comparison::Lt, as_const(next(x))));
            }
            if !g.is_true() {
                g.push(Atom::new(y, Comparison::Gt, as_const(next(y))));
                guards.push(g);
            }
        }
    }
    GuardSequence(guards)
}

/// Delay endpoint: value plus whether the endpoint itself is excluded.
#[derive(Debug, Clone, Copy)]
struct Endpoint {
    value: Rational64,
    open: bool,
}

/// Whether delays `0 ≤ δ₀ ≤ δ₁ ≤ …` exist with `vp + δᵢ` satisfying the i-th
/// guard. Each step greedily keeps the least feasible delay.
pub fn executable_from(vp: &Valuation, seq: &GuardSequence) -> bool {
    let mut lo = Endpoint {
        value: Rational64::from_integer(0),
        open: false,
    };
    for guard in seq.guards() {
        let mut hi: Option<Endpoint> = None;
        for atom in guard.atoms() {
            let bound = Rational64::from_integer(atom.constant as i64) - vp.get(atom.clock);
            match atom.comparison {
                Comparison::Gt | Comparison::Ge => {
                    let open = atom.comparison == Comparison::Gt;
                    if bound > lo.value || (bound == lo.value && open) {
                        lo = Endpoint { value: bound, open };
                    }
                }
                Comparison::Lt | Comparison::Le => {
                    let open = atom.comparison == Comparison::Lt;
                    let tighter = match hi {
                        None => true,
                        Some(h) => bound < h.value || (bound == h.value && open),
                    };
                    if tighter {
                        hi = Some(Endpoint { value: bound, open });
                    }
                }
            }
        }
        if let Some(h) = hi {
            let feasible = lo.value < h.value || (lo.value == h.value && !lo.open && !h.open);
            if !feasible {
                return false;
            }
        }
    }
    true
}
