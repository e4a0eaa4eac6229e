//! Feasibility of s-covers at a fixed bound.
//!
//! A cover exists iff the points can be split among the families so that in
//! every family `f` the connected components of the graph "distance below
//! `s[f]`" have diameter at most `D`. The components are then the sets of
//! the cover. The exact search assigns points to families with per-point
//! domains, unit propagation and fail-first branching; empty families with
//! equal demands are interchangeable, so only the first of them is tried.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SCover, SetFamily};
use crate::error::{Error, Result};
use crate::spaces::FiniteMetricSpace;

/// Largest space the exact search accepts.
pub const EXACT_POINT_CAP: usize = 2048;

/// Largest space the heuristic accepts.
pub const HEURISTIC_POINT_CAP: usize = 20_000;

const MAX_FAMILIES: usize = 64;

/// Above this many neighbour entries the search scans instead of storing lists.
const NEAR_ENTRY_CAP: usize = 20_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    #[default]
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Heuristic,
}

impl From<SolveMode> for Exactness {
    fn from(m: SolveMode) -> Self {
        match m {
            SolveMode::Exact => Exactness::Exact,
            SolveMode::Heuristic => Exactness::Heuristic,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Search nodes (exact) or greedy passes (heuristic).
    pub nodes: u64,
    pub budget_exhausted: bool,
    pub seed: u64,
    /// Wall time; kept out of serialized output so payloads are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub mode: SolveMode,
    /// Node budget of the exact search.
    pub budget_nodes: u64,
    pub seed: u64,
    /// Randomised greedy passes after the canonical one.
    pub restarts: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Exact,
            budget_nodes: 2_000_000,
            seed: 0,
            restarts: 64,
        }
    }
}

impl SolveOptions {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn heuristic() -> Self {
        SolveOptions {
            mode: SolveMode::Heuristic,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SCover>,
    pub search_stats: SearchStats,
    pub exactness: Exactness,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == SolveStatus::Unsat
    }
}

/// Decides whether `space` has an s-cover with bound `bound`.
pub fn solve_s_cover(space: &FiniteMetricSpace, s: &[u64], bound: u64, opts: &SolveOptions) -> Result<SolveResult> {
    if s.is_empty() {
        return Err(Error::InvalidInput("demand sequence is empty".into()));
    }
    if s.contains(&0) {
        return Err(Error::InvalidInput("demands must be at least 1".into()));
    }
    if s.len() > MAX_FAMILIES {
        return Err(Error::Resource {
            what: "families",
            count: s.len() as u128,
            cap: MAX_FAMILIES as u128,
        });
    }
    let cap = match opts.mode {
        SolveMode::Exact => EXACT_POINT_CAP,
        SolveMode::Heuristic => HEURISTIC_POINT_CAP,
    };
    if space.len() > cap {
        return Err(Error::Resource {
            what: "solver points",
            count: space.len() as u128,
            cap: cap as u128,
        });
    }
    let start = Instant::now();
    let mut model = Model::new(space, s, bound);
    let mut stats = SearchStats {
        seed: opts.seed,
        ..SearchStats::default()
    };
    let status = match opts.mode {
        SolveMode::Exact => model.exact(opts.budget_nodes, &mut stats),
        SolveMode::Heuristic => model.heuristic(opts.seed, opts.restarts, &mut stats),
    };
    stats.elapsed = start.elapsed();
    let witness = (status == SolveStatus::Sat).then(|| model.witness());
    Ok(SolveResult {
        status,
        witness,
        search_stats: stats,
        exactness: opts.mode.into(),
    })
}

/// Least number of families A needs against the demand prefix `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqDimension {
    /// Least feasible family count `k >= |r|`, if one was found and is certain.
    pub k: Option<usize>,
    /// `k - 1`.
    pub dimension: Option<usize>,
    /// Some solve inside the sweep ran out of budget.
    pub budget_exhausted: bool,
    pub exactness: Exactness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SCover>,
}

/// `r` extended to length `k` by repeating its last entry.
pub fn extend_demands(r: &[u64], k: usize) -> Vec<u64> {
    let mut s = r.to_vec();
    let last = *r.last().expect("nonempty demand prefix");
    s.resize(k.max(r.len()), last);
    s
}

/// Sweeps `k = |r|, ..., kcap` for the least family count with a cover.
pub fn seq_dimension(
    space: &FiniteMetricSpace,
    r: &[u64],
    bound: u64,
    kcap: usize,
    opts: &SolveOptions,
) -> Result<SeqDimension> {
    if r.is_empty() {
        return Err(Error::InvalidInput("demand prefix is empty".into()));
    }
    if r.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("demand prefix must be nondecreasing".into()));
    }
    let mut out = SeqDimension {
        k: None,
        dimension: None,
        budget_exhausted: false,
        exactness: opts.mode.into(),
        witness: None,
    };
    for k in r.len()..=kcap {
        let res = solve_s_cover(space, &extend_demands(r, k), bound, opts)?;
        match res.status {
            SolveStatus::Sat => {
                if !out.budget_exhausted {
                    out.k = Some(k);
                    out.dimension = Some(k - 1);
                    out.witness = res.witness;
                }
                return Ok(out);
            }
            SolveStatus::Unsat => {}
            SolveStatus::Unknown => {
                if opts.mode == SolveMode::Exact {
                    out.budget_exhausted = true;
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

enum Near {
    /// Per demand class, per point: points closer than the demand.
    Lists(Vec<Vec<Vec<u32>>>),
    Scan,
}

struct Model<'a> {
    space: &'a FiniteMetricSpace,
    s: Vec<u64>,
    bound: u64,
    /// Demand class of each family (index into `classes`).
    class_of: Vec<usize>,
    classes: Vec<u64>,
    near: Near,
    /// Position of each point in canonical order.
    rank: Vec<usize>,
    order: Vec<usize>,
    assign: Vec<Option<u8>>,
    count: Vec<usize>,
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<usize>,
}

impl<'a> Model<'a> {
    fn new(space: &'a FiniteMetricSpace, s: &[u64], bound: u64) -> Self {
        let mut classes: Vec<u64> = s.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let class_of = s.iter().map(|d| classes.binary_search(d).unwrap()).collect();
        let n = space.len();
        let order = space.canonical_order();
        let mut rank = vec![0; n];
        for (pos, &p) in order.iter().enumerate() {
            rank[p] = pos;
        }
        let near = build_near(space, &classes);
        Model {
            space,
            s: s.to_vec(),
            bound,
            class_of,
            classes,
            near,
            rank,
            order,
            assign: vec![None; n],
            count: vec![0; s.len()],
            stamp: vec![0; n],
            generation: 0,
            queue: Vec::new(),
        }
    }

    fn place(&mut self, p: usize, f: usize) {
        self.assign[p] = Some(f as u8);
        self.count[f] += 1;
    }

    fn unplace(&mut self, p: usize) {
        let f = self.assign[p].take().expect("placed point") as usize;
        self.count[f] -= 1;
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.generation
    }

    /// Would the component of `p` in family `f`, after adding `p`, stay
    /// within the bound?
    fn feasible(&mut self, p: usize, f: usize) -> bool {
        let gen = self.next_generation();
        let mut bfs = Bfs {
            space: self.space,
            assign: &self.assign,
            stamp: &mut self.stamp,
            queue: &mut self.queue,
            gen,
            fam: Some(f as u8),
            bound: self.bound,
        };
        bfs.run(&self.near, self.class_of[f], self.s[f], p)
    }

    /// Families a point may still enter: first empty family of each demand
    /// class only.
    fn eligible(&self) -> u64 {
        let mut mask = 0u64;
        let mut seen_empty = vec![false; self.classes.len()];
        for f in 0..self.s.len() {
            if self.count[f] > 0 {
                mask |= 1 << f;
            } else if !seen_empty[self.class_of[f]] {
                seen_empty[self.class_of[f]] = true;
                mask |= 1 << f;
            }
        }
        mask
    }

    fn exact(&mut self, budget: u64, stats: &mut SearchStats) -> SolveStatus {
        let n = self.space.len();
        let full = if self.s.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.s.len()) - 1
        };
        let mut dom = vec![full; n];
        let mut trail = Vec::with_capacity(n);
        match self.search(&mut dom, full, &mut trail, budget, stats) {
            Outcome::Sat => SolveStatus::Sat,
            Outcome::Unsat => SolveStatus::Unsat,
            Outcome::Budget => {
                stats.budget_exhausted = true;
                self.reset();
                SolveStatus::Unknown
            }
        }
    }

    fn reset(&mut self) {
        self.assign.fill(None);
        self.count.fill(0);
    }

    fn search(
        &mut self,
        dom: &mut [u64],
        dirty: u64,
        trail: &mut Vec<usize>,
        budget: u64,
        stats: &mut SearchStats,
    ) -> Outcome {
        stats.nodes += 1;
        if stats.nodes > budget {
            return Outcome::Budget;
        }
        let mark = trail.len();
        let mut dirty = dirty;
        let branch = loop {
            // drop values that became infeasible
            for (p, d) in dom.iter_mut().enumerate() {
                if self.assign[p].is_some() {
                    continue;
                }
                let mut bits = *d & dirty;
                while bits != 0 {
                    let f = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if self.count[f] > 0 && !self.feasible(p, f) {
                        *d &= !(1 << f);
                    }
                }
            }
            dirty = 0;
            let eligible = self.eligible();
            let mut best: Option<(u32, usize, usize)> = None;
            let mut unit = None;
            for (p, &d) in dom.iter().enumerate() {
                if self.assign[p].is_some() {
                    continue;
                }
                let eff = d & eligible;
                let size = eff.count_ones();
                if size == 0 {
                    self.undo(trail, mark);
                    return Outcome::Unsat;
                }
                if size == 1 {
                    unit = Some((p, eff.trailing_zeros() as usize));
                    break;
                }
                let key = (size, self.rank[p], p);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
            if let Some((p, f)) = unit {
                self.place(p, f);
                trail.push(p);
                dirty |= 1 << f;
                continue;
            }
            break best;
        };
        let Some((_, _, p)) = branch else {
            return Outcome::Sat;
        };
        let eff = dom[p] & self.eligible();
        let mut bits = eff;
        while bits != 0 {
            let f = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let mut child = dom.to_vec();
            self.place(p, f);
            trail.push(p);
            match self.search(&mut child, 1 << f, trail, budget, stats) {
                Outcome::Unsat => {
                    trail.pop();
                    self.unplace(p);
                }
                other => return other,
            }
        }
        self.undo(trail, mark);
        Outcome::Unsat
    }

    fn undo(&mut self, trail: &mut Vec<usize>, mark: usize) {
        while trail.len() > mark {
            let p = trail.pop().unwrap();
            self.unplace(p);
        }
    }

    fn heuristic(&mut self, seed: u64, restarts: u32, stats: &mut SearchStats) -> SolveStatus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = self.order.clone();
        for pass in 0..=restarts {
            if pass > 0 {
                order.shuffle(&mut rng);
            }
            stats.nodes += 1;
            self.reset();
            if self.greedy(&order) {
                return SolveStatus::Sat;
            }
        }
        self.reset();
        SolveStatus::Unknown
    }

    /// First-fit: each point goes to the lowest family that keeps its
    /// component bounded.
    fn greedy(&mut self, order: &[usize]) -> bool {
        for &p in order {
            let target = (0..self.s.len()).find(|&f| self.feasible(p, f));
            match target {
                Some(f) => self.place(p, f),
                None => return false,
            }
        }
        true
    }

    /// Components of the current complete assignment as a cover.
    fn witness(&mut self) -> SCover {
        let n = self.space.len();
        let mut families = vec![SetFamily::default(); self.s.len()];
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let f = self.assign[start].expect("complete assignment") as usize;
            let demand = self.s[f];
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let a = comp[head];
                head += 1;
                let neigh: Vec<usize> = match &self.near {
                    Near::Lists(l) => l[self.class_of[f]][a].iter().map(|&b| b as usize).collect(),
                    Near::Scan => (0..n).filter(|&b| b != a && self.space.dist(a, b) < demand).collect(),
                };
                for b in neigh {
                    if !seen[b] && self.assign[b] == Some(f as u8) {
                        seen[b] = true;
                        comp.push(b);
                    }
                }
            }
            families[f]
                .sets
                .push(comp.into_iter().map(|i| self.space.id(i)).collect());
        }
        SCover {
            space: self.space.label().to_string(),
            s: self.s.clone(),
            bound: self.bound,
            families,
        }
        .normalized()
    }
}

struct Bfs<'b> {
    space: &'b FiniteMetricSpace,
    assign: &'b [Option<u8>],
    stamp: &'b mut [u32],
    queue: &'b mut Vec<usize>,
    gen: u32,
    fam: Option<u8>,
    bound: u64,
}

impl Bfs<'_> {
    fn run(&mut self, near: &Near, class: usize, demand: u64, p: usize) -> bool {
        self.queue.clear();
        self.queue.push(p);
        self.stamp[p] = self.gen;
        let mut head = 0;
        while head < self.queue.len() {
            let a = self.queue[head];
            head += 1;
            let ok = match near {
                Near::Lists(lists) => lists[class][a].iter().all(|&b| self.visit(b as usize)),
                Near::Scan => (0..self.space.len()).all(|b| b == a || self.space.dist(a, b) >= demand || self.visit(b)),
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Adds `b` to the component if it belongs to the family; false when it
    /// is too far from a point already in the component.
    fn visit(&mut self, b: usize) -> bool {
        if self.stamp[b] == self.gen || self.assign[b] != self.fam {
            return true;
        }
        self.stamp[b] = self.gen;
        if self.queue.iter().any(|&c| self.space.dist(b, c) > self.bound) {
            return false;
        }
        self.queue.push(b);
        true
    }
}

enum Outcome {
    Sat,
    Unsat,
    Budget,
}

fn build_near(space: &FiniteMetricSpace, classes: &[u64]) -> Near {
    let n = space.len();
    let top = *classes.last().expect("nonempty demands");
    let mut lists = vec![vec![Vec::new(); n]; classes.len()];
    let mut entries = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            let d = space.dist(a, b);
            if d >= top {
                continue;
            }
            // d < classes[c] for every c from the first demand above d
            let first = classes.partition_point(|&c| c <= d);
            entries += 2 * (classes.len() - first);
            if entries > NEAR_ENTRY_CAP {
                return Near::Scan;
            }
            for list in &mut lists[first..] {
                list[a].push(b as u32);
                list[b].push(a as u32);
            }
        }
    }
    Near::Lists(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::check_s_cover;
    use crate::spaces::{build_grid_space, GridMetric, DEFAULT_POINT_CAP};

    fn line(s: u64) -> FiniteMetricSpace {
        build_grid_space(1, 1, s, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap()
    }

    fn exact(space: &FiniteMetricSpace, s: &[u64], d: u64) -> SolveResult {
        solve_s_cover(space, s, d, &SolveOptions::exact()).unwrap()
    }

    #[test]
    fn short_line_unsat() {
        assert_eq!(exact(&line(2), &[2], 2).status, SolveStatus::Unsat);
        assert_eq!(exact(&line(4), &[2], 4).status, SolveStatus::Unsat);
    }

    #[test]
    fn two_families_on_line() {
        let x = line(4);
        let res = exact(&x, &[2, 2], 3);
        assert_eq!(res.status, SolveStatus::Sat);
        let w = res.witness.unwrap();
        assert!(check_s_cover(&x, &w).unwrap().ok);
    }

    #[test]
    fn one_point() {
        let p = line(0);
        let res = exact(&p, &[7], 0);
        assert!(res.is_sat());
        assert_eq!(res.witness.unwrap().families[0].sets, vec![vec![p.id(0)]]);
    }

    #[test]
    fn heuristic_never_claims_unsat() {
        let x = line(2);
        let res = solve_s_cover(&x, &[2], 2, &SolveOptions::heuristic()).unwrap();
        assert_eq!(res.status, SolveStatus::Unknown);
        assert_eq!(res.exactness, Exactness::Heuristic);
        let ok = solve_s_cover(&line(8), &[2, 2], 2, &SolveOptions::heuristic()).unwrap();
        assert!(ok.is_sat());
        assert!(check_s_cover(&line(8), ok.witness.as_ref().unwrap()).unwrap().ok);
    }

    #[test]
    fn budget_gives_unknown() {
        let g = build_grid_space(2, 1, 3, GridMetric::Chebyshev, DEFAULT_POINT_CAP).unwrap();
        let opts = SolveOptions {
            budget_nodes: 1,
            ..SolveOptions::exact()
        };
        let res = solve_s_cover(&g, &[2, 2], 2, &opts).unwrap();
        assert_eq!(res.status, SolveStatus::Unknown);
        assert!(res.search_stats.budget_exhausted);
    }

    #[test]
    fn seq_dimension_line() {
        let x = line(8);
        let sd = seq_dimension(&x, &[2], 2, 4, &SolveOptions::exact()).unwrap();
        assert_eq!(sd.k, Some(2));
        assert_eq!(sd.dimension, Some(1));
        let p = line(0);
        let sd = seq_dimension(&p, &[5], 0, 4, &SolveOptions::exact()).unwrap();
        assert_eq!(sd.dimension, Some(0));
    }

    #[test]
    fn seq_dimension_plane_chebyshev() {
        let g = build_grid_space(2, 1, 4, GridMetric::Chebyshev, DEFAULT_POINT_CAP).unwrap();
        let sd = seq_dimension(&g, &[2], 2, 3, &SolveOptions::exact()).unwrap();
        assert_eq!(sd.dimension, Some(2));
        assert!(check_s_cover(&g, sd.witness.as_ref().unwrap()).unwrap().ok);
    }

    #[test]
    fn rejects_bad_demands() {
        assert!(solve_s_cover(&line(1), &[], 1, &SolveOptions::exact()).is_err());
        assert!(solve_s_cover(&line(1), &[0], 1, &SolveOptions::exact()).is_err());
    }

    #[test]
    fn serializes_status_upper_case() {
        let res = exact(&line(2), &[2], 2);
        let text = serde_json::to_string(&res).unwrap();
        assert!(text.contains(r#""status":"UNSAT""#));
        assert!(!text.contains("elapsed"));
    }
}
