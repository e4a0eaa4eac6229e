use std::collections::HashMap;

use serde::Serialize;

use super::{SCover, SetFamily};
use crate::error::{Error, Result};
use crate::spaces::{lattice_dist, FiniteMetricSpace, GridMetric, PointId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    /// Number of families differs from the demand sequence.
    Shape,
    EmptySet,
    UnknownPoint,
    Coverage,
    Disjointness,
    Diameter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverViolation {
    pub predicate: Predicate,
    pub family: Option<usize>,
    /// Offending set indices inside the family.
    pub sets: Vec<usize>,
    /// Offending points (a pair for distance predicates).
    pub points: Vec<PointId>,
    /// Measured value and the limit it broke, where meaningful.
    pub value: Option<u64>,
    pub limit: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub ok: bool,
    pub violation: Option<CoverViolation>,
}

impl CoverReport {
    fn pass() -> Self {
        CoverReport {
            ok: true,
            violation: None,
        }
    }

    fn fail(v: CoverViolation) -> Self {
        CoverReport {
            ok: false,
            violation: Some(v),
        }
    }
}

/// Checks every s-cover invariant: family count, known points, nonempty sets,
/// coverage, diameters and per-family disjointness. Reports the first
/// violation in that order.
pub fn check_s_cover(space: &FiniteMetricSpace, cover: &SCover) -> Result<CoverReport> {
    if cover.space != space.label() {
        return Err(Error::SpaceMismatch {
            expected: space.label().to_string(),
            found: cover.space.clone(),
        });
    }
    if cover.families.len() != cover.s.len() {
        return Ok(CoverReport::fail(CoverViolation {
            predicate: Predicate::Shape,
            family: None,
            sets: vec![],
            points: vec![],
            value: Some(cover.families.len() as u64),
            limit: Some(cover.s.len() as u64),
        }));
    }
    let mut indexed = Vec::with_capacity(cover.families.len());
    for (f, family) in cover.families.iter().enumerate() {
        match index_family(space, family) {
            Ok(sets) => indexed.push(sets),
            Err(mut v) => {
                v.family = Some(f);
                return Ok(CoverReport::fail(v));
            }
        }
    }
    let mut covered = vec![false; space.len()];
    for sets in &indexed {
        for &p in sets.iter().flatten() {
            covered[p] = true;
        }
    }
    if let Some(p) = covered.iter().position(|c| !c) {
        return Ok(CoverReport::fail(CoverViolation {
            predicate: Predicate::Coverage,
            family: None,
            sets: vec![],
            points: vec![space.id(p)],
            value: None,
            limit: None,
        }));
    }
    for (f, sets) in indexed.iter().enumerate() {
        if let Some(mut v) = family_violation(space, sets, cover.s[f], cover.bound) {
            v.family = Some(f);
            return Ok(CoverReport::fail(v));
        }
    }
    Ok(CoverReport::pass())
}

/// Checks a single family for being `r`-disjoint and `bound`-bounded.
pub fn check_set_family(space: &FiniteMetricSpace, family: &SetFamily, r: u64, bound: u64) -> CoverReport {
    let sets = match index_family(space, family) {
        Ok(s) => s,
        Err(v) => return CoverReport::fail(v),
    };
    match family_violation(space, &sets, r, bound) {
        Some(v) => CoverReport::fail(v),
        None => CoverReport::pass(),
    }
}

fn index_family(space: &FiniteMetricSpace, family: &SetFamily) -> std::result::Result<Vec<Vec<usize>>, CoverViolation> {
    let mut out = Vec::with_capacity(family.sets.len());
    for (si, set) in family.sets.iter().enumerate() {
        if set.is_empty() {
            return Err(CoverViolation {
                predicate: Predicate::EmptySet,
                family: None,
                sets: vec![si],
                points: vec![],
                value: None,
                limit: None,
            });
        }
        let mut idx = Vec::with_capacity(set.len());
        for &id in set {
            match space.index_of(id) {
                Some(i) => idx.push(i),
                None => {
                    return Err(CoverViolation {
                        predicate: Predicate::UnknownPoint,
                        family: None,
                        sets: vec![si],
                        points: vec![id],
                        value: None,
                        limit: None,
                    })
                }
            }
        }
        idx.sort_unstable();
        idx.dedup();
        out.push(idx);
    }
    Ok(out)
}

fn family_violation(space: &FiniteMetricSpace, sets: &[Vec<usize>], r: u64, bound: u64) -> Option<CoverViolation> {
    for (si, set) in sets.iter().enumerate() {
        let (diam, a, b) = set_diameter(space, set);
        if diam > bound {
            return Some(CoverViolation {
                predicate: Predicate::Diameter,
                family: None,
                sets: vec![si],
                points: vec![space.id(a), space.id(b)],
                value: Some(diam),
                limit: Some(bound),
            });
        }
    }
    if r == 0 {
        return None;
    }
    disjointness_violation(space, sets, r).map(|(sa, sb, a, b, d)| CoverViolation {
        predicate: Predicate::Disjointness,
        family: None,
        sets: vec![sa, sb],
        points: vec![space.id(a), space.id(b)],
        value: Some(d),
        limit: Some(r),
    })
}

/// Exact diameter with a witnessing pair. Large lattice sets use coordinate
/// extremes: for the taxicab metric the diameter is the widest spread of
/// `sign . x` over sign vectors, for Chebyshev the widest axis range.
fn set_diameter(space: &FiniteMetricSpace, set: &[usize]) -> (u64, usize, usize) {
    let first = set[0];
    let dim = space.dim();
    let use_extremes = match space.lattice_metric() {
        Some(GridMetric::Taxicab) => dim < 16 && (1usize << dim.saturating_sub(1)) * 4 < set.len(),
        Some(GridMetric::Chebyshev) => set.len() > 8,
        None => false,
    };
    if !use_extremes {
        let mut best = (0, first, first);
        for (k, &i) in set.iter().enumerate() {
            for &j in &set[k + 1..] {
                let d = space.dist(i, j);
                if d > best.0 {
                    best = (d, i, j);
                }
            }
        }
        return best;
    }
    let projections: Vec<Vec<i64>> = match space.lattice_metric() {
        Some(GridMetric::Taxicab) => (0..1usize << (dim - 1))
            .map(|mask| {
                (0..dim)
                    .map(|a| if a > 0 && mask >> (a - 1) & 1 == 1 { -1 } else { 1 })
                    .collect()
            })
            .collect(),
        _ => (0..dim)
            .map(|a| (0..dim).map(|b| i64::from(a == b)).collect())
            .collect(),
    };
    let mut best = (0, first, first);
    for sign in &projections {
        let mut hi = (i64::MIN, first);
        let mut lo = (i64::MAX, first);
        for &i in set {
            let c = space.coords(i).unwrap();
            let v: i64 = c.iter().zip(sign).map(|(x, s)| x * s).sum();
            if v > hi.0 {
                hi = (v, i);
            }
            if v < lo.0 {
                lo = (v, i);
            }
        }
        let spread = hi.0.abs_diff(lo.0);
        if spread > best.0 {
            best = (spread, lo.1, hi.1);
        }
    }
    best
}

const NONE: u32 = u32::MAX;

/// First pair of points from distinct sets closer than `r`:
/// `(set_a, set_b, point_a, point_b, distance)`.
fn disjointness_violation(
    space: &FiniteMetricSpace,
    sets: &[Vec<usize>],
    r: u64,
) -> Option<(usize, usize, usize, usize, u64)> {
    // a point listed in two sets is at distance 0 from itself
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<(usize, usize)> = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        for &p in set {
            if let Some(&prev) = owner.get(&p) {
                return Some((prev, si, p, p, 0));
            }
            owner.insert(p, si);
            members.push((p, si));
        }
    }
    let m = members.len() as u128;
    let pair_cost = m * m / 2;
    if let (Some(kind), true) = (space.lattice_metric(), pair_cost > 20_000_000) {
        if let Some(offsets) = half_ball(kind, space.dim(), r - 1, (pair_cost / m.max(1)) as usize) {
            return lattice_scan(space, kind, &members, &offsets);
        }
    }
    for (k, &(p, sp)) in members.iter().enumerate() {
        for &(q, sq) in &members[k + 1..] {
            if sp != sq {
                let d = space.dist(p, q);
                if d < r {
                    return Some((sp, sq, p, q, d));
                }
            }
        }
    }
    None
}

/// Nonzero integer vectors of norm at most `radius` whose first nonzero
/// entry is positive, or `None` when there are more than `limit` of them.
fn half_ball(kind: GridMetric, dim: usize, radius: u64, limit: usize) -> Option<Vec<Vec<i64>>> {
    let radius = radius as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    fn rec(
        kind: GridMetric,
        axis: usize,
        used: i64,
        radius: i64,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) -> bool {
        if axis == cur.len() {
            let first = cur.iter().find(|&&v| v != 0);
            if matches!(first, Some(&v) if v > 0) {
                out.push(cur.clone());
                if out.len() > limit {
                    return false;
                }
            }
            return true;
        }
        let room = match kind {
            GridMetric::Taxicab => radius - used,
            GridMetric::Chebyshev => radius,
        };
        for v in -room..=room {
            cur[axis] = v;
            let used = match kind {
                GridMetric::Taxicab => used + v.abs(),
                GridMetric::Chebyshev => 0,
            };
            if !rec(kind, axis + 1, used, radius, cur, out, limit) {
                return false;
            }
        }
        cur[axis] = 0;
        true
    }
    if rec(kind, 0, 0, radius, &mut cur, &mut out, limit) {
        Some(out)
    } else {
        None
    }
}

/// Probes every member's neighbourhood through a coordinate index.
fn lattice_scan(
    space: &FiniteMetricSpace,
    kind: GridMetric,
    members: &[(usize, usize)],
    offsets: &[Vec<i64>],
) -> Option<(usize, usize, usize, usize, u64)> {
    let dim = space.dim();
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for &(p, _) in members {
        for (a, &x) in space.coords(p).unwrap().iter().enumerate() {
            lo[a] = lo[a].min(x);
            hi[a] = hi[a].max(x);
        }
    }
    let extents: Vec<u128> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as u128).collect();
    let volume: u128 = extents.iter().product();
    let dense = volume <= 16 * members.len() as u128 + 4096;

    let slot_of = |c: &[i64]| -> Option<usize> {
        let mut slot = 0usize;
        for a in 0..dim {
            if c[a] < lo[a] || c[a] > hi[a] {
                return None;
            }
            slot = slot * extents[a] as usize + (c[a] - lo[a]) as usize;
        }
        Some(slot)
    };
    // set index and point index per occupied coordinate
    let mut grid: Vec<(u32, u32)> = Vec::new();
    let mut sparse: HashMap<Vec<i64>, (u32, u32)> = HashMap::new();
    if dense {
        grid = vec![(NONE, NONE); volume as usize];
        for &(p, s) in members {
            let slot = slot_of(space.coords(p).unwrap()).unwrap();
            grid[slot] = (s as u32, p as u32);
        }
    } else {
        for &(p, s) in members {
            sparse.insert(space.coords(p).unwrap().to_vec(), (s as u32, p as u32));
        }
    }
    let mut probe = vec![0i64; dim];
    for &(p, s) in members {
        let c = space.coords(p).unwrap();
        for off in offsets {
            for a in 0..dim {
                probe[a] = c[a] + off[a];
            }
            let hit = if dense {
                slot_of(&probe).map(|slot| grid[slot]).filter(|h| h.0 != NONE)
            } else {
                sparse.get(&probe).copied()
            };
            if let Some((t, q)) = hit {
                if t as usize != s {
                    let (q, t) = (q as usize, t as usize);
                    let d = lattice_dist(kind, c, space.coords(q).unwrap());
                    return Some((s.min(t), s.max(t), p, q, d));
                }
            }
        }
    }
    None
}
