//! Forward exploration of the zone graph with node subsumption.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::alu::alu_includes;
use crate::automaton::{Automaton, LuBounds};
use crate::dbm::{DbmError, DistanceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Inclusion {
    /// Only identical zones subsume each other.
    None,
    /// `Z ⊆ Z′`.
    Subset,
    /// `Z ⊆ a≼LU(Z′)`.
    #[default]
    Alu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SearchOrder {
    #[default]
    Bfs,
    Dfs,
}

/// Default cap on visited nodes.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub inclusion: Inclusion,
    pub search: SearchOrder,
    pub trace: bool,
    pub budget: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            inclusion: Inclusion::default(),
            search: SearchOrder::default(),
            trace: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Decides whether a stored zone makes a new zone of the same state
/// redundant.
pub trait Subsumption {
    fn subsumes(&self, z: &DistanceGraph, stored: &DistanceGraph) -> Result<bool, DbmError>;
}

pub struct Identical;

impl Subsumption for Identical {
    fn subsumes(&self, z: &DistanceGraph, stored: &DistanceGraph) -> Result<bool, DbmError> {
        Ok(z == stored)
    }
}

pub struct ZoneInclusion;

impl Subsumption for ZoneInclusion {
    fn subsumes(&self, z: &DistanceGraph, stored: &DistanceGraph) -> Result<bool, DbmError> {
        z.is_included_in(stored)
    }
}

pub struct AluInclusion(pub LuBounds);

impl Subsumption for AluInclusion {
    fn subsumes(&self, z: &DistanceGraph, stored: &DistanceGraph) -> Result<bool, DbmError> {
        alu_includes(z, stored, &self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExplorationStats {
    pub nodes_visited: u64,
    pub nodes_subsumed: u64,
    pub inclusion_tests: u64,
    pub max_waiting: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Reachable,
    Unreachable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Reachable => "REACHABLE",
            Verdict::Unreachable => "UNREACHABLE",
        })
    }
}

/// One transition of a trace; `transition` indexes
/// [`Automaton::transitions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub source: usize,
    pub transition: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityResult {
    pub verdict: Verdict,
    pub trace: Option<Vec<TraceStep>>,
    pub stats: ExplorationStats,
}

impl ReachabilityResult {
    /// `verdict=<R|U> visited=<n> subsumed=<n> tests=<n>`
    pub fn stats_line(&self) -> String {
        let v = match self.verdict {
            Verdict::Reachable => 'R',
            Verdict::Unreachable => 'U',
        };
        format!(
            "verdict={v} visited={} subsumed={} tests={}",
            self.stats.nodes_visited, self.stats.nodes_subsumed, self.stats.inclusion_tests
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("node budget of {budget} exhausted")]
    BudgetExceeded { budget: u64, stats: ExplorationStats },
    #[error(transparent)]
    Dbm(#[from] DbmError),
}

struct Node {
    state: usize,
    zone: DistanceGraph,
    parent: Option<(usize, usize)>,
}

pub fn reachability(a: &Automaton, options: &Options) -> Result<ReachabilityResult, ExploreError> {
    match options.inclusion {
        Inclusion::None => reachability_with(a, &Identical, options),
        Inclusion::Subset => reachability_with(a, &ZoneInclusion, options),
        Inclusion::Alu => reachability_with(a, &AluInclusion(a.lu_bounds()), options),
    }
}

/// The worklist loop with an arbitrary subsumption test; `options.inclusion`
/// is ignored.
pub fn reachability_with(
    a: &Automaton,
    subsumption: &dyn Subsumption,
    options: &Options,
) -> Result<ReachabilityResult, ExploreError> {
    let mut stats = ExplorationStats::default();
    let (q0, z0) = a.initial_node();
    let mut nodes = vec![Node {
        state: q0,
        zone: z0,
        parent: None,
    }];
    let mut passed: Vec<Vec<usize>> = vec![Vec::new(); a.states().len()];
    let mut waiting = VecDeque::from([0usize]);
    stats.max_waiting = 1;

    while let Some(id) = match options.search {
        SearchOrder::Bfs => waiting.pop_front(),
        SearchOrder::Dfs => waiting.pop_back(),
    } {
        if stats.nodes_visited == options.budget {
            return Err(ExploreError::BudgetExceeded {
                budget: options.budget,
                stats,
            });
        }
        stats.nodes_visited += 1;
        let q = nodes[id].state;
        if a.is_accepting(q) {
            let trace = options.trace.then(|| trace_to(&nodes, id));
            return Ok(ReachabilityResult {
                verdict: Verdict::Reachable,
                trace,
                stats,
            });
        }
        let mut subsumed = false;
        for &other in &passed[q] {
            stats.inclusion_tests += 1;
            if subsumption.subsumes(&nodes[id].zone, &nodes[other].zone)? {
                subsumed = true;
                break;
            }
        }
        if subsumed {
            stats.nodes_subsumed += 1;
            continue;
        }
        passed[q].push(id);
        for (k, t) in a.outgoing(q) {
            if let Some((target, zone)) = a.successor(&nodes[id].zone, t)? {
                debug_assert!(zone.is_canonical() && zone.is_time_elapsed()?);
                nodes.push(Node {
                    state: target,
                    zone,
                    parent: Some((id, k)),
                });
                waiting.push_back(nodes.len() - 1);
            }
        }
        stats.max_waiting = stats.max_waiting.max(waiting.len() as u64);
    }
    Ok(ReachabilityResult {
        verdict: Verdict::Unreachable,
        trace: None,
        stats,
    })
}

fn trace_to(nodes: &[Node], mut id: usize) -> Vec<TraceStep> {
    let mut steps = Vec::new();
    while let Some((parent, transition)) = nodes[id].parent {
        steps.push(TraceStep {
            source: nodes[parent].state,
            transition,
            target: nodes[id].state,
        });
        id = parent;
    }
    steps.reverse();
    steps
}

/// Replays a trace symbolically from the initial node; returns the final
/// state if every step is enabled.
pub fn replay(a: &Automaton, trace: &[TraceStep]) -> Result<Option<usize>, DbmError> {
    let (mut q, mut zone) = a.initial_node();
    for step in trace {
        let t = &a.transitions()[step.transition];
        if t.source != q || t.target != step.target {
            return Ok(None);
        }
        match a.successor(&zone, t)? {
            Some((next, z)) => {
                q = next;
                zone = z;
            }
            None => return Ok(None),
        }
    }
    Ok(Some(q))
}
