//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zonecheck::alu::{alu_includes, alu_includes_counted, alu_inverse_graph, min_region_weight};
use zonecheck::explorer::{reachability, ExploreError, Inclusion, Options, Verdict};
use zonecheck::model_io::parse_model;
use zonecheck::oracles::{
    all_lu_maps, checked_pair, random_automaton, random_lu, region_graph_reachability, rlu_after_delay,
    zone_closure, AutomatonShape, GridMembership, GridSpec, ZoneGrid, ZoneRecipe,
};
use zonecheck::regions::{
    build_test_sequence, enumerate_regions, enumerate_regions_intersecting, executable_from,
    region_of, region_to_dbm, rlu_contains, BoundFunction, RegionDescriptor, DEFAULT_REGION_LIMIT,
};
use zonecheck::{DistanceGraph, LuBounds, Valuation, Weight};

const SEED: u64 = 0x5eed_2012;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Tallies agreement between two deciders and keeps the first mismatch.
#[derive(Default)]
struct Tally {
    checked: u64,
    mismatches: u64,
    first: Option<String>,
}

impl Tally {
    fn record(&mut self, agree: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !agree {
            self.mismatches += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    fn summary(&self, what: &str) -> String {
        let mut s = format!("{} {what}, {} disagreements", self.checked, self.mismatches);
        if let Some(f) = &self.first {
            s.push_str(&format!("; first: {f}"));
        }
        s
    }
}

fn alpha_max(lu: &LuBounds) -> i64 {
    BoundFunction::from_lu(lu).max()
}

/// Full grids of each zone, built on demand per granularity.
struct GridCache<'a> {
    zones: &'a [DistanceGraph],
    grids: HashMap<(usize, i64), ZoneGrid>,
}

impl<'a> GridCache<'a> {
    fn new(zones: &'a [DistanceGraph]) -> Self {
        GridCache {
            zones,
            grids: HashMap::new(),
        }
    }

    fn get(&mut self, zi: usize, alpha: i64) -> &ZoneGrid {
        let z = &self.zones[zi];
        self.grids
            .entry((zi, alpha))
            .or_insert_with(|| ZoneGrid::new(z, GridSpec::full(z, alpha)).unwrap())
    }
}

fn theorem_equivalence() -> Outcome {
    let mut tally = Tally::default();
    for clocks in [1usize, 2] {
        let zones = zone_closure(clocks, 3, 4);
        let maps = all_lu_maps(clocks, 3);
        // One clock: every map for every pair. Two clocks: each pair meets
        // two maps, cycling through all of them.
        let per_pair = if clocks == 1 { maps.len() } else { 2 };
        let mut grids = GridCache::new(&zones);
        let d = GridSpec::denominator_for(clocks);
        for (pi, zp) in zones.iter().enumerate() {
            let member = GridMembership::new(zp, d).unwrap();
            for zi in 0..zones.len() {
                for r in 0..per_pair {
                    let lu = &maps[((zi * zones.len() + pi) * per_pair + r) % maps.len()];
                    let quadratic = alu_includes(&zones[zi], zp, lu).unwrap();
                    let grid = grids.get(zi, alpha_max(lu));
                    let oracle = grid.points().iter().all(|k| member.contains(lu, k));
                    tally.record(quadratic == oracle, || {
                        format!("{lu:?} quadratic={quadratic}\nZ:\n{:?}\nZ':\n{zp:?}", zones[zi])
                    });
                }
            }
        }
    }
    let exhaustive = tally.checked;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..100_000 {
        let z = ZoneRecipe::random(rng.gen(), 3, 3, 6).build();
        let zp = ZoneRecipe::random(rng.gen(), 3, 3, 6).build();
        let lu = random_lu(&mut rng, 3, 3);
        let d = checked_pair(&z, &zp, &lu).unwrap();
        tally.record(d.is_none(), || d.unwrap().to_string());
    }
    Outcome::new(
        tally.mismatches == 0 && exhaustive >= 10_000 && tally.checked - exhaustive >= 100_000,
        tally.summary(&format!("triples ({exhaustive} exhaustive at 1-2 clocks)")),
    )
}

/// Grid over the whole clock space with region ids for one bound function.
struct RegionGrid {
    grid: ZoneGrid,
    ids: Vec<usize>,
}

impl RegionGrid {
    fn new(clocks: usize, spec: GridSpec, alpha: &BoundFunction) -> Self {
        let grid = ZoneGrid::new(&DistanceGraph::unconstrained(clocks), spec).unwrap();
        let mut index: HashMap<RegionDescriptor, usize> = HashMap::new();
        let ids = grid
            .points()
            .iter()
            .map(|k| {
                let next = index.len();
                *index.entry(region_of(&grid.valuation(k), alpha)).or_insert(next)
            })
            .collect();
        RegionGrid { grid, ids }
    }
}

fn region_closedness() -> Outcome {
    let mut tally = Tally::default();
    for clocks in [1usize, 2] {
        let zones = zone_closure(clocks, 3, 4);
        let maps = all_lu_maps(clocks, 3);
        let per_zone = if clocks == 1 { maps.len() } else { 16 };
        let spec = zones
            .iter()
            .map(|z| GridSpec::full(z, 3))
            .max_by_key(|s| s.bound)
            .unwrap();
        let mut grids: HashMap<BoundFunction, RegionGrid> = HashMap::new();
        for (pi, zp) in zones.iter().enumerate() {
            let member = GridMembership::new(zp, spec.denominator).unwrap();
            for r in 0..per_zone {
                let lu = &maps[(pi * per_zone + r) % maps.len()];
                let alpha = BoundFunction::from_lu(lu);
                let rg = grids
                    .entry(alpha.clone())
                    .or_insert_with(|| RegionGrid::new(clocks, spec, &alpha));
                let mut verdict: HashMap<usize, (bool, usize)> = HashMap::new();
                let mut clash = None;
                for (i, k) in rg.grid.points().iter().enumerate() {
                    let m = member.contains(lu, k);
                    let (first, at) = *verdict.entry(rg.ids[i]).or_insert((m, i));
                    if first != m && clash.is_none() {
                        clash = Some((at, i));
                    }
                }
                tally.record(clash.is_none(), || {
                    let (a, b) = clash.unwrap();
                    format!(
                        "{lu:?} {:?} vs {:?}\nZ':\n{zp:?}",
                        rg.grid.valuation(&rg.grid.points()[a]),
                        rg.grid.valuation(&rg.grid.points()[b])
                    )
                });
            }
        }
    }
    Outcome::new(tally.mismatches == 0, tally.summary("(zone, LU map) combinations"))
}

/// One valuation per neighbourhood of the grid points of `z`.
fn neighbourhood_representatives(z: &DistanceGraph, spec: GridSpec) -> Vec<Valuation> {
    let grid = ZoneGrid::new(z, spec).unwrap();
    let fine = BoundFunction::new(&vec![spec.bound + 1; z.clocks()]);
    let mut seen = std::collections::HashSet::new();
    grid.valuations()
        .into_iter()
        .filter(|v| seen.insert(region_of(v, &fine)))
        .collect()
}

fn time_elapsed_coincidence() -> Outcome {
    let zones: Vec<DistanceGraph> = zone_closure(2, 2, 4)
        .into_iter()
        .filter(|z| z.is_time_elapsed().unwrap())
        .collect();
    let maps = all_lu_maps(2, 2);
    let per_zone = 8;
    let mut tally = Tally::default();
    for (pi, zp) in zones.iter().enumerate() {
        for r in 0..per_zone {
            let lu = &maps[(pi * per_zone + r) % maps.len()];
            let spec = GridSpec::full(zp, 2);
            let member = GridMembership::new(zp, spec.denominator).unwrap();
            let reps = neighbourhood_representatives(zp, spec);
            let grid = ZoneGrid::new(&DistanceGraph::unconstrained(2), GridSpec::coarse(2, 3)).unwrap();
            for k in grid.points() {
                let v = grid.valuation(k);
                let by_simulation = member.contains(lu, k);
                // Z′ is closed under delays, so ∃ w ∈ Z′, δ: w + δ ∈ r_LU(v)
                // reduces to ∃ w ∈ Z′: w ∈ r_LU(v).
                let by_regions = reps.iter().any(|w| rlu_contains(&v, w, lu));
                tally.record(by_simulation == by_regions, || {
                    format!("{lu:?} v={v:?} simulation={by_simulation}\nZ':\n{zp:?}")
                });
            }
        }
    }
    Outcome::new(
        tally.mismatches == 0,
        tally.summary(&format!("valuations over {} time-elapsed zones", zones.len())),
    )
}

fn test_sequence_characterisation() -> Outcome {
    let maps = all_lu_maps(2, 2);
    let mut tally = Tally::default();
    let mut positive = 0u64;
    for lu in maps.iter().step_by(8) {
        let spec = GridSpec::coarse(2, alpha_max(lu));
        let grid = ZoneGrid::new(&DistanceGraph::unconstrained(2), spec).unwrap();
        let vals = grid.valuations();
        for v in &vals {
            let seq = build_test_sequence(v, lu);
            for vp in &vals {
                let executable = executable_from(vp, &seq);
                let swept = rlu_after_delay(v, vp, lu);
                positive += executable as u64;
                tally.record(executable == swept, || {
                    format!("{lu:?} v={v:?} vp={vp:?} executable={executable}")
                });
            }
        }
    }
    Outcome::new(
        tally.mismatches == 0,
        format!("{} ({positive} executable)", tally.summary("valuation pairs")),
    )
}

fn least_region_weight() -> Outcome {
    let mut tally = Tally::default();
    let mut infinite_branch = 0u64;
    for clocks in [1usize, 2] {
        let zones = zone_closure(clocks, 2, 4);
        let alphas: Vec<BoundFunction> = if clocks == 1 {
            (0..=2).map(|a| BoundFunction::new(&[a])).collect()
        } else {
            (0..9).map(|i| BoundFunction::new(&[i / 3, i % 3])).collect()
        };
        for z in &zones {
            for alpha in &alphas {
                let regions: Vec<DistanceGraph> = enumerate_regions_intersecting(z, alpha, DEFAULT_REGION_LIMIT)
                    .unwrap()
                    .iter()
                    .map(region_to_dbm)
                    .collect();
                for x in 0..=clocks {
                    for y in (0..=clocks).filter(|&y| y != x) {
                        let formula = min_region_weight(z, x, y, alpha).unwrap();
                        let brute = regions.iter().map(|g| g.get(y, x)).min().unwrap();
                        if z.get(x, 0) < Weight::weak(-alpha.get(x)) {
                            infinite_branch += 1;
                        }
                        tally.record(formula == brute, || {
                            format!("{alpha:?} x={x} y={y} formula={formula} brute={brute}\nZ:\n{z:?}")
                        });
                    }
                }
            }
        }
    }
    Outcome::new(
        tally.mismatches == 0 && infinite_branch > 0,
        format!("{} ({infinite_branch} in the (<,inf) branch)", tally.summary("(zone, α, x, y) cases")),
    )
}

fn inverse_graph() -> Outcome {
    let mut tally = Tally::default();
    let mut regions_checked = 0u64;
    for lu in all_lu_maps(2, 2) {
        let alpha = BoundFunction::from_lu(&lu);
        let spec = GridSpec::coarse(2, alpha.max());
        let grid = ZoneGrid::new(&DistanceGraph::unconstrained(2), spec).unwrap();
        for r in enumerate_regions(&alpha, DEFAULT_REGION_LIMIT).unwrap() {
            regions_checked += 1;
            let inverse = alu_inverse_graph(&r, &lu).canonicalize().unwrap();
            let member = GridMembership::new(&region_to_dbm(&r), spec.denominator).unwrap();
            for k in grid.points() {
                let vp = grid.valuation(k);
                let by_graph = inverse.contains(&vp);
                let by_definition = member.meets_down_set(&lu, k);
                tally.record(by_graph == by_definition, || {
                    format!("{lu:?} region {r} vp={vp:?} graph={by_graph}")
                });
            }
        }
    }
    // The same question for a sample, answered with grid points of the
    // region and the preorder itself.
    let lu = LuBounds::from_ints(&[2, 1], &[1, 2]);
    let alpha = BoundFunction::from_lu(&lu);
    let spec = GridSpec::coarse(2, alpha.max());
    let all = ZoneGrid::new(&DistanceGraph::unconstrained(2), spec).unwrap().valuations();
    for r in enumerate_regions(&alpha, DEFAULT_REGION_LIMIT).unwrap() {
        // Witnesses may need to sit strictly between two points of the vp grid.
        let fine = GridSpec {
            denominator: 4 * spec.denominator,
            bound: spec.bound,
        };
        let inside = ZoneGrid::new(&region_to_dbm(&r), fine).unwrap().valuations();
        let inverse = alu_inverse_graph(&r, &lu).canonicalize().unwrap();
        for vp in &all {
            let by_graph = inverse.contains(vp);
            let by_points = inside.iter().any(|v| zonecheck::regions::lu_preorder(v, vp, &lu));
            tally.record(by_graph == by_points, || format!("{lu:?} region {r} vp={vp:?} graph={by_graph}"));
        }
    }
    Outcome::new(
        tally.mismatches == 0,
        format!("{} over {regions_checked} regions", tally.summary("(region, vp) pairs")),
    )
}

/// Results of criteria 7 and 8, computed once.
struct EndToEnd {
    automata: u64,
    reachable: u64,
    disagreements: Vec<String>,
    alu_budget_exhausted: u64,
    subset_budget_exhausted: u64,
    alu_not_better: Vec<String>,
    strictly_better: u64,
}

const SUBSET_BUDGET: u64 = 5_000;

fn end_to_end() -> &'static EndToEnd {
    static RESULT: std::sync::OnceLock<EndToEnd> = std::sync::OnceLock::new();
    RESULT.get_or_init(|| {
        let mut out = EndToEnd {
            automata: 0,
            reachable: 0,
            disagreements: Vec::new(),
            alu_budget_exhausted: 0,
            subset_budget_exhausted: 0,
            alu_not_better: Vec::new(),
            strictly_better: 0,
        };
        for seed in 0..500u64 {
            let a = random_automaton(SEED ^ seed, AutomatonShape::default());
            out.automata += 1;
            let expected = region_graph_reachability(&a, 1_000_000).unwrap();
            out.reachable += expected as u64;
            let run = |inclusion| {
                reachability(
                    &a,
                    &Options {
                        inclusion,
                        budget: SUBSET_BUDGET,
                        ..Options::default()
                    },
                )
            };
            let alu = run(Inclusion::Alu);
            let subset = run(Inclusion::Subset);
            let mut alu_visited = None;
            match alu {
                Ok(r) => {
                    alu_visited = Some(r.stats.nodes_visited);
                    if (r.verdict == Verdict::Reachable) != expected {
                        out.disagreements.push(format!("seed {seed}: alu says {}", r.verdict));
                    }
                }
                Err(ExploreError::BudgetExceeded { .. }) => out.alu_budget_exhausted += 1,
                Err(e) => out.disagreements.push(format!("seed {seed}: alu error {e}")),
            }
            let subset_visited = match subset {
                Ok(r) => {
                    if (r.verdict == Verdict::Reachable) != expected {
                        out.disagreements.push(format!("seed {seed}: subset says {}", r.verdict));
                    }
                    r.stats.nodes_visited
                }
                Err(ExploreError::BudgetExceeded { .. }) => {
                    out.subset_budget_exhausted += 1;
                    SUBSET_BUDGET
                }
                Err(e) => {
                    out.disagreements.push(format!("seed {seed}: subset error {e}"));
                    continue;
                }
            };
            if let Some(v) = alu_visited {
                if v > subset_visited {
                    out.alu_not_better.push(format!("seed {seed}: alu {v} > subset {subset_visited}"));
                } else if v < subset_visited {
                    out.strictly_better += 1;
                }
            }
        }
        out
    })
}

fn soundness_completeness() -> Outcome {
    let e = end_to_end();
    let mut detail = format!(
        "{} automata ({} reachable), {} disagreements, {} ALU budget exhaustions, {} SUBSET runs over {SUBSET_BUDGET} nodes",
        e.automata,
        e.reachable,
        e.disagreements.len(),
        e.alu_budget_exhausted,
        e.subset_budget_exhausted
    );
    if let Some(first) = e.disagreements.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Outcome::new(
        e.automata >= 500 && e.disagreements.is_empty() && e.alu_budget_exhausted == 0,
        detail,
    )
}

fn subsumption_strength() -> Outcome {
    let e = end_to_end();
    let model = |name: &str| {
        let path = format!("{}/models/{name}", env!("CARGO_MANIFEST_DIR"));
        parse_model(&std::fs::read_to_string(path).unwrap()).unwrap()
    };
    let visited = |a: &zonecheck::Automaton, inclusion| {
        reachability(
            a,
            &Options {
                inclusion,
                ..Options::default()
            },
        )
        .unwrap()
        .stats
        .nodes_visited
    };
    let bounded = model("diverge_bounded.ta");
    let golden = (visited(&bounded, Inclusion::Alu), visited(&bounded, Inclusion::Subset));
    let mut detail = format!(
        "ALU <= SUBSET on {}/{} automata ({} strictly fewer); diverge_bounded.ta visited alu={} subset={}",
        e.automata as usize - e.alu_not_better.len(),
        e.automata,
        e.strictly_better,
        golden.0,
        golden.1
    );
    if let Some(first) = e.alu_not_better.first() {
        detail.push_str(&format!("; first violation: {first}"));
    }
    Outcome::new(e.alu_not_better.is_empty() && golden == (2, 6), detail)
}

fn quadratic_cost() -> Outcome {
    let sizes = [2usize, 4, 8, 16, 32];
    let mut ratios = Vec::new();
    let mut timing = Duration::ZERO;
    for &n in &sizes {
        let lu = LuBounds::from_ints(&vec![3; n], &vec![3; n]);
        let mut worst = 0u64;
        // Included pairs force a full scan.
        for seed in 0..20 {
            let zp = ZoneRecipe::random(seed, n, 3, 3 * n).build();
            let z = zp
                .constrain(&zonecheck::Guard::new(vec![zonecheck::Atom::new(
                    1 + seed as usize % n,
                    zonecheck::Comparison::Ge,
                    1,
                )]))
                .unwrap();
            let z = if z.is_empty_marker() { zp.clone() } else { z };
            let (included, count) = alu_includes_counted(&z, &zp, &lu).unwrap();
            assert!(included);
            worst = worst.max(count);
            if n == 32 {
                let reps = 1000;
                let start = Instant::now();
                for _ in 0..reps {
                    std::hint::black_box(alu_includes(std::hint::black_box(&z), &zp, &lu).unwrap());
                }
                timing = timing.max(start.elapsed() / reps);
            }
        }
        ratios.push(worst as f64 / (n * n) as f64);
    }
    let c = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let spread = ratios.iter().map(|r| (r / c).max(c / r)).fold(1.0, f64::max);
    let counts: Vec<String> = sizes
        .iter()
        .zip(&ratios)
        .map(|(n, r)| format!("n={n}:{}", (r * (n * n) as f64).round()))
        .collect();
    Outcome::new(
        spread <= 1.3 && timing < Duration::from_millis(1),
        format!(
            "comparisons {}; fit c={c:.3}, worst deviation {spread:.3}x; n=32 test takes {timing:.1?}",
            counts.join(" ")
        ),
    )
}

fn canonical_golden() -> Outcome {
    // x − y ≥ 1, y < 2, x > 4
    let z = DistanceGraph::from_edges(
        2,
        &[
            (1, 2, Weight::weak(-1)),
            (0, 2, Weight::strict(2)),
            (1, 0, Weight::strict(-4)),
        ],
    )
    .canonicalize()
    .unwrap();
    let w = z.get(1, 2);
    Outcome::new(w == Weight::strict(-2), format!("entry[x][y] = {w}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("theorem equivalence", theorem_equivalence),
        ("region closedness", region_closedness),
        ("abstractions coincide on time-elapsed zones", time_elapsed_coincidence),
        ("test sequence characterises simulation", test_sequence_characterisation),
        ("least region weight", least_region_weight),
        ("inverse abstraction graph", inverse_graph),
        ("end-to-end soundness and completeness", soundness_completeness),
        ("subsumption strength", subsumption_strength),
        ("canonicalization golden case", canonical_golden),
        ("quadratic cost", quadratic_cost),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed: Duration = start.elapsed();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} [{:.1?}] {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            elapsed,
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
