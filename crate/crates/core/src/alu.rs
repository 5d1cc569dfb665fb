//! The `a≼LU` abstraction: clock partition of a region, the distance graph of
//! `a≼LU⁻¹(R)`, and the quadratic inclusion test `Z ⊆ a≼LU(Z′)`.

use std::borrow::Cow;

use crate::automaton::LuBounds;
use crate::dbm::{DbmError, DistanceGraph, Valuation};
use crate::regions::{region_to_dbm, up_set_box, BoundFunction, RegionDescriptor};
use crate::weights::{LuConstant, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClockClass {
    /// Bounded by both `L` and `U`.
    B,
    /// Above `L`, bounded by `U`.
    L,
    /// Above `U`, bounded by `L`.
    U,
    /// Above both.
    M,
}

/// Class of each variable; index 0 is the reference clock, always in `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockPartition(Vec<ClockClass>);

impl ClockPartition {
    pub fn class(&self, x: usize) -> ClockClass {
        self.0[x]
    }

    pub fn members(&self, class: ClockClass) -> Vec<usize> {
        (0..self.0.len()).filter(|&x| self.0[x] == class).collect()
    }

    fn in_b_or_l(&self, x: usize) -> bool {
        matches!(self.0[x], ClockClass::B | ClockClass::L)
    }

    fn in_m_or_l(&self, x: usize) -> bool {
        matches!(self.0[x], ClockClass::M | ClockClass::L)
    }

    fn in_m_or_u(&self, x: usize) -> bool {
        matches!(self.0[x], ClockClass::M | ClockClass::U)
    }
}

/// `w ≤ (≤, c)`; nothing lies below `−∞`.
fn at_most(w: Weight, c: LuConstant) -> bool {
    c.value().is_some_and(|c| w <= Weight::weak(c))
}

fn partition_of_graph(g_r: &DistanceGraph, lu: &LuBounds) -> ClockPartition {
    let mut classes = vec![ClockClass::B];
    for x in 1..g_r.dim() {
        let c = g_r.get(0, x);
        let below_l = at_most(c, lu.lower(x));
        let below_u = at_most(c, lu.upper(x));
        classes.push(match (below_l, below_u) {
            (true, true) => ClockClass::B,
            (false, true) => ClockClass::L,
            (true, false) => ClockClass::U,
            (false, false) => ClockClass::M,
        });
    }
    ClockPartition(classes)
}

pub fn partition_clocks(r: &RegionDescriptor, lu: &LuBounds) -> ClockPartition {
    partition_of_graph(&region_to_dbm(r), lu)
}

fn inverse_graph(g_r: &DistanceGraph, p: &ClockPartition, lu: &LuBounds) -> DistanceGraph {
    DistanceGraph::from_fn(g_r.dim(), |i, j| {
        if p.in_m_or_u(j) || (p.in_m_or_l(i) && j != 0) {
            Weight::INFINITY
        } else if p.in_m_or_l(i) {
            match lu.lower(i).value() {
                Some(l) => Weight::strict(-l),
                None => Weight::INFINITY,
            }
        } else {
            g_r.get(i, j)
        }
    })
}

/// Distance graph of `a≼LU⁻¹(R)`, the valuations simulated by some point of
/// `R`. Not canonical in general.
pub fn alu_inverse_graph(r: &RegionDescriptor, lu: &LuBounds) -> DistanceGraph {
    let g_r = region_to_dbm(r);
    let p = partition_of_graph(&g_r, lu);
    inverse_graph(&g_r, &p, lu)
}

fn canonical(z: &DistanceGraph) -> Result<Cow<'_, DistanceGraph>, DbmError> {
    if z.is_canonical() {
        Ok(Cow::Borrowed(z))
    } else {
        Ok(Cow::Owned(z.canonicalize()?))
    }
}

fn nonempty_canonical(z: &DistanceGraph) -> Result<Cow<'_, DistanceGraph>, DbmError> {
    let z = canonical(z)?;
    if z.is_empty_marker() {
        return Err(DbmError::EmptyZone);
    }
    Ok(z)
}

/// `R ⊆ a≼LU(Z′)`, decided by looking for a negative cycle through at most
/// two clocks in `a≼LU⁻¹(R) ∩ Z′`.
pub fn region_in_alu(
    r: &RegionDescriptor,
    zp: &DistanceGraph,
    lu: &LuBounds,
) -> Result<bool, DbmError> {
    let zp = nonempty_canonical(zp)?;
    let g_r = region_to_dbm(r);
    if g_r.dim() != zp.dim() {
        return Err(DbmError::DimensionMismatch(g_r.dim(), zp.dim()));
    }
    let p = partition_of_graph(&g_r, lu);
    let n = zp.clocks();
    for x in (0..=n).filter(|&x| p.in_b_or_l(x)) {
        for y in (0..=n).filter(|&y| y != x) {
            let negative = if p.in_m_or_l(y) {
                match lu.lower(y).value() {
                    None => false,
                    Some(l) => g_r
                        .get(0, x)
                        .checked_add(zp.get(x, y))?
                        .checked_add(Weight::strict(-l))?
                        < Weight::LE_ZERO,
                }
            } else {
                zp.get(x, y).checked_add(g_r.get(y, x))? < Weight::LE_ZERO
            };
            if negative {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Least value of the region constraint `R_{yx}` over the `α`-regions `R`
/// meeting `Z`.
pub fn min_region_weight(
    z: &DistanceGraph,
    x: usize,
    y: usize,
    alpha: &BoundFunction,
) -> Result<Weight, DbmError> {
    let z = nonempty_canonical(z)?;
    let z_x0 = z.get(x, 0);
    if z_x0 < Weight::weak(-alpha.get(x)) {
        return Ok(Weight::INFINITY);
    }
    let from_diagonal = match z.get(x, y) {
        w if w.is_infinite() => None,
        w => Some(w.checked_neg()?.ceil()),
    };
    let from_lower = z_x0
        .checked_neg()?
        .ceil()
        .checked_add(Weight::strict(-alpha.get(y)))?;
    Ok(match from_diagonal {
        Some(d) => d.max(from_lower),
        None => from_lower,
    })
}

fn includes_counted(
    z: &DistanceGraph,
    zp: &DistanceGraph,
    lu: &LuBounds,
    comparisons: &mut u64,
) -> Result<bool, DbmError> {
    if z.dim() != zp.dim() {
        return Err(DbmError::DimensionMismatch(z.dim(), zp.dim()));
    }
    let z = nonempty_canonical(z)?;
    let zp = nonempty_canonical(zp)?;
    let n = z.clocks();
    for x in 0..=n {
        let Some(u_x) = lu.upper(x).value() else {
            continue;
        };
        let z_x0 = z.get(x, 0);
        for y in (0..=n).filter(|&y| y != x) {
            let zp_xy = zp.get(x, y);
            *comparisons += 1;
            if zp_xy >= z.get(x, y) {
                continue;
            }
            *comparisons += 1;
            if z_x0 < Weight::weak(-u_x) {
                continue;
            }
            let Some(l_y) = lu.lower(y).value() else {
                continue;
            };
            *comparisons += 1;
            if zp_xy.checked_add(Weight::strict(-l_y))? < z_x0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Z ⊆ a≼LU(Z′)` in `O(|X|²)`: fails exactly when some pair `x, y` has
/// `Z_{x0} ≥ (≤,−U_x)`, `Z′_{xy} < Z_{xy}` and `Z′_{xy} + (<,−L_y) < Z_{x0}`.
///
/// Both zones must be non-empty; canonical inputs are used as they are.
pub fn alu_includes(z: &DistanceGraph, zp: &DistanceGraph, lu: &LuBounds) -> Result<bool, DbmError> {
    includes_counted(z, zp, lu, &mut 0)
}

/// [`alu_includes`] together with the number of weight comparisons made.
pub fn alu_includes_counted(
    z: &DistanceGraph,
    zp: &DistanceGraph,
    lu: &LuBounds,
) -> Result<(bool, u64), DbmError> {
    let mut count = 0;
    let verdict = includes_counted(z, zp, lu, &mut count)?;
    Ok((verdict, count))
}

/// `v ∈ a≼LU(Z′)` straight from the definition: some point of `Z′` simulates
/// `v`.
pub fn alu_member_oracle(v: &Valuation, zp: &DistanceGraph, lu: &LuBounds) -> bool {
    up_set_box(v, lu)
        .intersects(zp)
        .expect("oracle constants stay small")
}
