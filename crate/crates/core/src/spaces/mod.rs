//! Finite metric spaces with exact integer metrics.
//!
//! A space is a sorted list of opaque point ids together with a metric that
//! is either an explicit distance matrix or a lattice metric (taxicab or
//! Chebyshev) evaluated on integer coordinates. All distances are `u64`.

mod control;
mod json;

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use control::{
    check_coarse_embedding, check_uniformly_expansive, CoarseMap, ControlFn, ControlPair, EmbeddingReport,
    EmbeddingViolation, LinearTail, ViolatedSide,
};
pub use json::{CoarseMapJson, MetricJson, SpaceJson};

pub type PointId = u32;

/// Default cap on the number of points a constructor may produce.
pub const DEFAULT_POINT_CAP: usize = 100_000;

/// Cap on spaces that store an explicit distance matrix.
pub const MATRIX_POINT_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMetric {
    /// Sum of coordinate differences.
    Taxicab,
    /// Maximum of coordinate differences.
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Row-major `n * n` distance table in index order.
    Matrix(Vec<u64>),
    Lattice(GridMetric),
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    label: String,
    ids: Vec<PointId>,
    dim: usize,
    coords: Option<Vec<i64>>,
    metric: Metric,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("label", &self.label)
            .field("points", &self.ids.len())
            .field("dim", &self.dim)
            .finish()
    }
}

impl FiniteMetricSpace {
    /// Builds a space from an explicit distance matrix. Ids may come in any
    /// order; they are sorted and the matrix permuted accordingly. The metric
    /// axioms are checked on every triple.
    pub fn from_matrix(label: impl Into<String>, ids: Vec<PointId>, rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = ids.len();
        if n > MATRIX_POINT_CAP {
            return Err(Error::Resource {
                what: "matrix points",
                count: n as u128,
                cap: MATRIX_POINT_CAP as u128,
            });
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("distance matrix must be {n}x{n}")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| ids[i]);
        let sorted_ids: Vec<PointId> = order.iter().map(|&i| ids[i]).collect();
        if sorted_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate point id".into()));
        }
        let mut table = vec![0u64; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                table[a * n + b] = rows[i][j];
            }
        }
        let space = FiniteMetricSpace {
            label: label.into(),
            ids: sorted_ids,
            dim: 0,
            coords: None,
            metric: Metric::Matrix(table),
        };
        space.validate_metric()?;
        Ok(space)
    }

    /// Builds a lattice-metric space; ids are assigned `0..n` in
    /// lexicographic coordinate order.
    pub fn from_coords(label: impl Into<String>, points: Vec<Vec<i64>>, metric: GridMetric) -> Result<Self> {
        let mut points = points;
        points.sort();
        let ids = (0..points.len() as PointId).collect();
        Self::from_coords_with_ids(label, ids, points, metric)
    }

    pub fn from_coords_with_ids(
        label: impl Into<String>,
        ids: Vec<PointId>,
        points: Vec<Vec<i64>>,
        metric: GridMetric,
    ) -> Result<Self> {
        if ids.len() != points.len() {
            return Err(Error::InvalidInput("one coordinate vector per point".into()));
        }
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput("coordinate dimensions differ".into()));
        }
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by_key(|&i| ids[i]);
        let sorted_ids: Vec<PointId> = order.iter().map(|&i| ids[i]).collect();
        if sorted_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate point id".into()));
        }
        let distinct: BTreeSet<&Vec<i64>> = points.iter().collect();
        if distinct.len() != points.len() {
            return Err(Error::Metric(
                "two points share coordinates (distance 0 between distinct points)".into(),
            ));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for &i in &order {
            flat.extend_from_slice(&points[i]);
        }
        Ok(FiniteMetricSpace {
            label: label.into(),
            ids: sorted_ids,
            dim,
            coords: Some(flat),
            metric: Metric::Lattice(metric),
        })
    }

    /// Lattice space from coordinates that are already sorted and distinct.
    fn from_sorted_coords(label: String, flat: Vec<i64>, dim: usize, metric: GridMetric) -> Self {
        let n = flat.len().checked_div(dim).unwrap_or(usize::from(!flat.is_empty()));
        FiniteMetricSpace {
            label,
            ids: (0..n as PointId).collect(),
            dim,
            coords: Some(flat),
            metric: Metric::Lattice(metric),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> PointId {
        self.ids[index]
    }

    pub fn index_of(&self, id: PointId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn require_index(&self, id: PointId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownPoint(id))
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn lattice_metric(&self) -> Option<GridMetric> {
        match self.metric {
            Metric::Lattice(m) => Some(m),
            Metric::Matrix(_) => None,
        }
    }

    /// Coordinate dimension, zero when the space carries no coordinates.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, index: usize) -> Option<&[i64]> {
        self.coords
            .as_ref()
            .map(|c| &c[index * self.dim..(index + 1) * self.dim])
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    /// Distance between the points at positions `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> u64 {
        match &self.metric {
            Metric::Matrix(t) => t[i * self.ids.len() + j],
            Metric::Lattice(kind) => {
                let c = self.coords.as_ref().expect("lattice metric needs coordinates");
                let a = &c[i * self.dim..(i + 1) * self.dim];
                let b = &c[j * self.dim..(j + 1) * self.dim];
                lattice_dist(*kind, a, b)
            }
        }
    }

    pub fn dist_ids(&self, a: PointId, b: PointId) -> Result<u64> {
        Ok(self.dist(self.require_index(a)?, self.require_index(b)?))
    }

    /// Largest pairwise distance; zero for spaces with fewer than two points.
    pub fn diameter(&self) -> u64 {
        let idx: Vec<usize> = (0..self.len()).collect();
        self.set_diameter(&idx)
    }

    pub fn set_diameter(&self, set: &[usize]) -> u64 {
        let mut best = 0;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Smallest distance between a point of `a` and a point of `b`.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> Option<u64> {
        a.iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .min()
    }

    /// Checks identity, symmetry and the triangle inequality on every triple.
    pub fn validate_metric(&self) -> Result<()> {
        match self.metric_violation() {
            None => Ok(()),
            Some(msg) => Err(Error::Metric(msg)),
        }
    }

    pub fn metric_violation(&self) -> Option<String> {
        let n = self.len();
        for i in 0..n {
            if self.dist(i, i) != 0 {
                return Some(format!("d({0},{0}) != 0", self.ids[i]));
            }
            for j in 0..n {
                let dij = self.dist(i, j);
                if i != j && dij == 0 {
                    return Some(format!("d({},{}) = 0", self.ids[i], self.ids[j]));
                }
                if dij != self.dist(j, i) {
                    return Some(format!("d({},{}) is not symmetric", self.ids[i], self.ids[j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist(i, j);
                for k in 0..n {
                    if self.dist(i, k) > dij + self.dist(j, k) {
                        return Some(format!(
                            "triangle inequality fails on ({}, {}, {})",
                            self.ids[i], self.ids[j], self.ids[k]
                        ));
                    }
                }
            }
        }
        None
    }

    /// Point indices in canonical scan order: lexicographic on coordinates
    /// when present, otherwise id order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        if self.coords.is_some() {
            order.sort_by(|&a, &b| self.coords(a).cmp(&self.coords(b)));
        }
        order
    }

    /// Restriction of the metric to `subset` (ids). Restricting to all points
    /// returns the space unchanged; otherwise the label is derived from the
    /// root label and the chosen ids, so nested restrictions to the same set
    /// agree.
    pub fn subspace(&self, subset: &[PointId]) -> Result<FiniteMetricSpace> {
        let chosen: BTreeSet<PointId> = subset.iter().copied().collect();
        if chosen.is_empty() {
            return Err(Error::InvalidInput("subspace of an empty subset".into()));
        }
        let mut idx = Vec::with_capacity(chosen.len());
        for &id in &chosen {
            idx.push(self.require_index(id)?);
        }
        if idx.len() == self.len() {
            return Ok(self.clone());
        }
        let ids: Vec<PointId> = chosen.into_iter().collect();
        let label = subspace_label(&self.label, &ids);
        Ok(self.restrict_indices(label, &idx))
    }

    /// Restriction to sorted, distinct indices; ids are preserved.
    pub(crate) fn restrict_indices(&self, label: String, idx: &[usize]) -> FiniteMetricSpace {
        let ids = idx.iter().map(|&i| self.ids[i]).collect();
        let coords = self.coords.as_ref().map(|c| {
            let mut out = Vec::with_capacity(idx.len() * self.dim);
            for &i in idx {
                out.extend_from_slice(&c[i * self.dim..(i + 1) * self.dim]);
            }
            out
        });
        let metric = match &self.metric {
            Metric::Matrix(t) => {
                let n = self.len();
                let mut sub = Vec::with_capacity(idx.len() * idx.len());
                for &i in idx {
                    for &j in idx {
                        sub.push(t[i * n + j]);
                    }
                }
                Metric::Matrix(sub)
            }
            Metric::Lattice(k) => Metric::Lattice(*k),
        };
        FiniteMetricSpace {
            label,
            ids,
            dim: self.dim,
            coords,
            metric,
        }
    }

    /// Same points, coordinates and distances; labels are ignored.
    pub fn same_points_and_metric(&self, other: &FiniteMetricSpace) -> bool {
        if self.ids != other.ids || self.coords != other.coords {
            return false;
        }
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.dist(i, j) == other.dist(i, j)))
    }
}

#[inline]
pub(crate) fn lattice_dist(kind: GridMetric, a: &[i64], b: &[i64]) -> u64 {
    let diffs = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y));
    match kind {
        GridMetric::Taxicab => diffs.sum(),
        GridMetric::Chebyshev => diffs.max().unwrap_or(0),
    }
}

/// Short stable digest of a list of ids.
pub(crate) fn ids_digest(ids: &[PointId]) -> String {
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.to_le_bytes());
    }
    let out = h.finalize();
    out[..4].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn subspace_label(label: &str, ids: &[PointId]) -> String {
    let root = label.split('|').next().unwrap_or(label);
    format!("{root}|sub-{}-{}", ids.len(), ids_digest(ids))
}

fn check_cap(what: &'static str, count: u128, cap: usize) -> Result<()> {
    if count > cap as u128 {
        return Err(Error::Resource {
            what,
            count,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// The points of `k Z^n` inside `[-s, s]^n` with a lattice metric.
pub fn build_grid_space(n: usize, k: u64, s: u64, metric: GridMetric, cap: usize) -> Result<FiniteMetricSpace> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("grid needs n >= 1 and k >= 1".into()));
    }
    let half = (s / k) as i64;
    let side = (2 * half + 1) as u128;
    let count = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(side));
    check_cap("grid points", count.unwrap_or(u128::MAX), cap)?;
    let k = k as i64;
    let axis: Vec<i64> = (-half..=half).map(|v| v * k).collect();
    let points = lattice_product(&vec![axis; n]);
    let tag = match metric {
        GridMetric::Taxicab => "grid",
        GridMetric::Chebyshev => "grid-cheb",
    };
    Ok(FiniteMetricSpace::from_sorted_coords(
        format!("{tag}(n={n},k={k},s={s})"),
        points,
        n,
        metric,
    ))
}

/// Flat lexicographic product of per-axis value lists.
fn lattice_product(axes: &[Vec<i64>]) -> Vec<i64> {
    let dim = axes.len();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total * dim);
    let mut digit = vec![0usize; dim];
    if axes.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        out.extend(digit.iter().zip(axes).map(|(&d, a)| a[d]));
        let mut pos = dim;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digit[pos] += 1;
            if digit[pos] < axes[pos].len() {
                break;
            }
            digit[pos] = 0;
        }
    }
}

/// Disjoint union of `parts` where a point `a` of part `i` and a point `b`
/// of part `j > i` are at distance `d_i(a, base_i) + (x_i + ... + x_j) +
/// d_j(base_j, b)`.
///
/// Points are relabelled consecutively part by part; the second return value
/// lists the new ids of each part.
pub fn build_asymptotic_sum_with_parts(
    parts: &[FiniteMetricSpace],
    basepoints: &[PointId],
    gaps: &[u64],
) -> Result<(FiniteMetricSpace, Vec<Vec<PointId>>)> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("asymptotic sum of no parts".into()));
    }
    if basepoints.len() != parts.len() {
        return Err(Error::InvalidInput("one basepoint per part".into()));
    }
    if gaps.len() < parts.len() {
        return Err(Error::InvalidInput("need at least one gap per part".into()));
    }
    if gaps[0] == 0 || gaps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "gaps must be strictly increasing positive integers".into(),
        ));
    }
    let bases = parts
        .iter()
        .zip(basepoints)
        .map(|(p, &b)| p.require_index(b))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        let ids = parts[0].ids().to_vec();
        return Ok((parts[0].clone(), vec![ids]));
    }
    let total: usize = parts.iter().map(FiniteMetricSpace::len).sum();
    check_cap("asymptotic sum points", total as u128, MATRIX_POINT_CAP)?;

    // (part, local index) for every global index
    let mut owner = Vec::with_capacity(total);
    let mut part_ids = Vec::with_capacity(parts.len());
    let mut next: PointId = 0;
    for (p, part) in parts.iter().enumerate() {
        let mut ids = Vec::with_capacity(part.len());
        for local in 0..part.len() {
            owner.push((p, local));
            ids.push(next);
            next += 1;
        }
        part_ids.push(ids);
    }
    let mut prefix = vec![0u64; gaps.len() + 1];
    for (i, g) in gaps.iter().enumerate() {
        prefix[i + 1] = prefix[i] + g;
    }
    let mut table = vec![0u64; total * total];
    for (g1, &(p1, l1)) in owner.iter().enumerate() {
        for (g2, &(p2, l2)) in owner.iter().enumerate() {
            let d = if p1 == p2 {
                parts[p1].dist(l1, l2)
            } else {
                let (i, a, j, b) = if p1 < p2 { (p1, l1, p2, l2) } else { (p2, l2, p1, l1) };
                parts[i].dist(a, bases[i]) + (prefix[j + 1] - prefix[i]) + parts[j].dist(bases[j], b)
            };
            table[g1 * total + g2] = d;
        }
    }
    let label = format!(
        "asum({})",
        parts.iter().map(|p| p.label()).collect::<Vec<_>>().join(",")
    );
    let space = FiniteMetricSpace {
        label,
        ids: (0..total as PointId).collect(),
        dim: 0,
        coords: None,
        metric: Metric::Matrix(table),
    };
    Ok((space, part_ids))
}

pub fn build_asymptotic_sum(
    parts: &[FiniteMetricSpace],
    basepoints: &[PointId],
    gaps: &[u64],
) -> Result<FiniteMetricSpace> {
    build_asymptotic_sum_with_parts(parts, basepoints, gaps).map(|(s, _)| s)
}

/// Truncation of the union of lattices `c_1 Z x ... x c_m Z x {0}^(n-m)`,
/// `m <= n`, to the box `[-box, box]^n`, with the taxicab metric.
pub fn build_cup_c_space(c: &[u64], n: usize, r#box: u64, cap: usize) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if c.len() < n {
        return Err(Error::InvalidInput(format!("need {n} lattice steps, got {}", c.len())));
    }
    if c[0] == 0 || c.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("c must be strictly increasing and positive".into()));
    }
    let axes: Vec<Vec<i64>> = c[..n]
        .iter()
        .map(|&step| {
            let half = (r#box / step) as i64;
            (-half..=half).map(|v| v * step as i64).collect()
        })
        .collect();
    let mut count: u128 = 0;
    for m in 1..=n {
        count += axes[..m].iter().map(|a| a.len() as u128).product::<u128>();
    }
    check_cap("cup-c points", count, cap)?;

    let mut points: BTreeSet<Vec<i64>> = BTreeSet::new();
    for m in 1..=n {
        let mut sub_axes = axes[..m].to_vec();
        sub_axes.extend(std::iter::repeat_n(vec![0], n - m));
        let flat = lattice_product(&sub_axes);
        points.extend(flat.chunks(n).map(<[i64]>::to_vec));
    }
    let flat: Vec<i64> = points.into_iter().flatten().collect();
    let label = format!(
        "cupc(c={};n={n};box={})",
        c[..n].iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        r#box
    );
    Ok(FiniteMetricSpace::from_sorted_coords(
        label,
        flat,
        n,
        GridMetric::Taxicab,
    ))
}

/// Greedy maximal `r`-separated subset, scanned in canonical order, with the
/// retraction onto it as a coarse map.
///
/// Every point lies within distance `< r` of its representative, so the
/// retraction has controls `p1(t) = max(t - 2r, 0)` and `p2(t) = t + 2r`.
pub fn greedy_r_net(space: &FiniteMetricSpace, r: u64) -> Result<(FiniteMetricSpace, CoarseMap)> {
    if r == 0 {
        return Err(Error::InvalidInput("net radius must be at least 1".into()));
    }
    let order = space.canonical_order();
    let mut chosen: Vec<usize> = Vec::new();
    for &p in &order {
        if chosen.iter().all(|&q| space.dist(p, q) >= r) {
            chosen.push(p);
        }
    }
    // representative: nearest chosen point, earliest in scan order on ties
    let rep: Vec<usize> = (0..space.len())
        .map(|p| {
            let mut best = 0;
            for (slot, &q) in chosen.iter().enumerate() {
                if space.dist(p, q) < space.dist(p, chosen[best]) {
                    best = slot;
                }
            }
            best
        })
        .collect();
    let mut sorted = chosen.clone();
    sorted.sort_unstable();
    let net = if sorted.len() == space.len() {
        space.clone()
    } else {
        let ids: Vec<PointId> = sorted.iter().map(|&i| space.id(i)).collect();
        space.restrict_indices(subspace_label(space.label(), &ids), &sorted)
    };
    let map = rep
        .iter()
        .map(|&slot| {
            let target_id = space.id(chosen[slot]);
            net.index_of(target_id).expect("representative is a net point")
        })
        .collect();
    let controls = ControlPair::new(ControlFn::shifted(2 * r), ControlFn::linear(1, 2 * r), 0)?;
    let witness = CoarseMap::new(
        std::sync::Arc::new(space.clone()),
        std::sync::Arc::new(net.clone()),
        map,
        controls,
    )?;
    Ok((net, witness))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: i64, hi: i64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(
            format!("Z[{lo},{hi}]"),
            (lo..=hi).map(|x| vec![x]).collect(),
            GridMetric::Taxicab,
        )
        .unwrap()
    }

    fn point_at(space: &FiniteMetricSpace, c: &[i64]) -> usize {
        (0..space.len()).find(|&i| space.coords(i) == Some(c)).unwrap()
    }

    #[test]
    fn grid_1d() {
        let g = build_grid_space(1, 1, 2, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.dist(point_at(&g, &[-2]), point_at(&g, &[2])), 4);
        assert!(g.metric_violation().is_none());
    }

    #[test]
    fn grid_2d_taxicab() {
        let g = build_grid_space(2, 1, 1, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.dist(point_at(&g, &[1, 1]), point_at(&g, &[-1, -1])), 4);
        assert!(g.metric_violation().is_none());
    }

    #[test]
    fn grid_with_step() {
        let g = build_grid_space(1, 2, 4, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        let xs: Vec<i64> = (0..g.len()).map(|i| g.coords(i).unwrap()[0]).collect();
        assert_eq!(xs, vec![-4, -2, 0, 2, 4]);
        // a 2-space: distinct points at least 2 apart
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j {
                    assert!(g.dist(i, j) >= 2);
                }
            }
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let err = build_grid_space(3, 1, 50, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn chebyshev_grid_distance() {
        let g = build_grid_space(2, 1, 2, GridMetric::Chebyshev, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(g.dist(point_at(&g, &[2, 1]), point_at(&g, &[-1, -2])), 3);
        assert!(g.metric_violation().is_none());
    }

    #[test]
    fn asymptotic_sum_two_singletons() {
        let a = line(0, 0);
        let b = line(0, 0);
        let s = build_asymptotic_sum(&[a, b], &[0, 0], &[1, 2]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), 3);
    }

    #[test]
    fn asymptotic_sum_one_part_is_identity() {
        let a = line(-2, 2);
        let s = build_asymptotic_sum(std::slice::from_ref(&a), &[0], &[5]).unwrap();
        assert_eq!(s, a);
    }

    #[test]
    fn asymptotic_sum_three_parts() {
        let part = line(0, 1);
        let parts = vec![part.clone(), part.clone(), part];
        // id 0 is coordinate 0 in each part
        let (s, ids) = build_asymptotic_sum_with_parts(&parts, &[0, 0, 0], &[2, 3, 5]).unwrap();
        let one_in_first = s.index_of(ids[0][1]).unwrap();
        let one_in_third = s.index_of(ids[2][1]).unwrap();
        assert_eq!(s.dist(one_in_first, one_in_third), 12);
        assert!(s.metric_violation().is_none());
        // basepoints of parts i < j are x_i + ... + x_j apart
        assert_eq!(s.dist_ids(ids[0][0], ids[1][0]).unwrap(), 5);
        assert_eq!(s.dist_ids(ids[1][0], ids[2][0]).unwrap(), 8);
        assert_eq!(s.dist_ids(ids[0][0], ids[2][0]).unwrap(), 10);
    }

    #[test]
    fn asymptotic_sum_rejects_bad_gaps() {
        let parts = vec![line(0, 1), line(0, 1)];
        assert!(build_asymptotic_sum(&parts, &[0, 0], &[3, 3]).is_err());
        assert!(build_asymptotic_sum(&parts, &[0, 0], &[3]).is_err());
        assert!(build_asymptotic_sum(&parts, &[0, 9], &[1, 2]).is_err());
    }

    #[test]
    fn cup_c_membership() {
        let s = build_cup_c_space(&[1, 2], 2, 2, DEFAULT_POINT_CAP).unwrap();
        let has = |c: &[i64]| (0..s.len()).any(|i| s.coords(i) == Some(c));
        assert!(has(&[0, 2]));
        assert!(!has(&[0, 1]));
        assert!(has(&[-2, 0]) && has(&[1, -2]));
        assert_eq!(s.len(), 15);
    }

    #[test]
    fn cup_c_depth_one() {
        let s = build_cup_c_space(&[2, 3], 1, 4, DEFAULT_POINT_CAP).unwrap();
        let xs: Vec<i64> = (0..s.len()).map(|i| s.coords(i).unwrap()[0]).collect();
        assert_eq!(xs, vec![-4, -2, 0, 2, 4]);
    }

    #[test]
    fn cup_c_matches_set_comprehension() {
        let c = [1u64, 2, 4];
        let s = build_cup_c_space(&c, 3, 4, DEFAULT_POINT_CAP).unwrap();
        // every vector in the box whose i-th entry is a multiple of c_i and
        // whose support is an initial segment of the axes
        let mut expected = BTreeSet::new();
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                for z in -4i64..=4 {
                    let v = [x, y, z];
                    let in_union =
                        (1..=3).any(|m| (0..3).all(|i| if i < m { v[i] % c[i] as i64 == 0 } else { v[i] == 0 }));
                    if in_union {
                        expected.insert(v.to_vec());
                    }
                }
            }
        }
        assert_eq!(s.len(), expected.len());
        let got: BTreeSet<Vec<i64>> = (0..s.len()).map(|i| s.coords(i).unwrap().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn net_of_interval() {
        let s = line(0, 5);
        let (net, witness) = greedy_r_net(&s, 2).unwrap();
        let xs: Vec<i64> = (0..net.len()).map(|i| net.coords(i).unwrap()[0]).collect();
        assert_eq!(xs, vec![0, 2, 4]);
        assert!(check_coarse_embedding(&witness).ok);
    }

    #[test]
    fn net_radius_one_is_whole_space() {
        let s = build_grid_space(2, 1, 2, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        let (net, _) = greedy_r_net(&s, 1).unwrap();
        assert_eq!(net, s);
    }

    #[test]
    fn net_of_square_is_separated_and_dense() {
        let s = build_grid_space(2, 1, 2, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap();
        let (net, witness) = greedy_r_net(&s, 3).unwrap();
        for i in 0..net.len() {
            for j in 0..net.len() {
                if i != j {
                    assert!(net.dist(i, j) >= 3);
                }
            }
        }
        for p in 0..s.len() {
            let near = net.ids().iter().map(|&id| s.dist(p, s.index_of(id).unwrap())).min();
            assert!(near.unwrap() <= 2);
        }
        assert!(check_coarse_embedding(&witness).ok);
        // idempotent
        let (again, _) = greedy_r_net(&net, 3).unwrap();
        assert!(again.same_points_and_metric(&net));
    }

    #[test]
    fn subspace_rules() {
        let s = line(-2, 2);
        assert_eq!(s.subspace(s.ids()).unwrap(), s);
        let single = s.subspace(&[2]).unwrap();
        assert_eq!(single.len(), 1);
        let sub = s.subspace(&[0, 2, 4]).unwrap();
        assert_eq!(sub.dist_ids(0, 4).unwrap(), 4);
        assert!(s.subspace(&[]).is_err());
        assert!(s.subspace(&[77]).is_err());
        // nested restrictions agree with the direct one
        let nested = sub.subspace(&[0, 4]).unwrap();
        assert_eq!(nested, s.subspace(&[0, 4]).unwrap());
    }

    #[test]
    fn matrix_spaces_are_validated() {
        let ok = FiniteMetricSpace::from_matrix("m", vec![5, 1], vec![vec![0, 2], vec![2, 0]]);
        let m = ok.unwrap();
        assert_eq!(m.ids(), &[1, 5]);
        let bad =
            FiniteMetricSpace::from_matrix("bad", vec![0, 1, 2], vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]);
        assert!(matches!(bad, Err(Error::Metric(_))));
        let asym = FiniteMetricSpace::from_matrix("asym", vec![0, 1], vec![vec![0, 1], vec![2, 0]]);
        assert!(asym.is_err());
    }
}
