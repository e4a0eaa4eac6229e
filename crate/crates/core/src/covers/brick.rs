//! Explicit `(n+1)`-family covers of `Z^n` boxes.
//!
//! With period `L = (2n+1) r`, let `δ_j` be the distance of `x_j` to `L Z`
//! and `δ_(1) <= ... <= δ_(n)` the sorted values. A point has level
//! `m = max { m : δ_(m) < m r }` (0 if none) and lies in family `m`. Its set
//! is fixed by the nearest multiples of `L` on its `m` closest coordinates
//! and by the period cells `floor(x_j / L)` on the others.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{SCover, SetFamily};
use crate::error::{Error, Result};
use crate::spaces::{build_grid_space, FiniteMetricSpace, GridMetric, PointId};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrickCover {
    pub n: usize,
    pub r: u64,
    /// Construction constant `c(n)` with `D <= c(n) r`.
    pub constant: u64,
    pub cover: SCover,
}

/// `c(n) = 2 n^2`.
pub fn brick_constant(n: usize) -> u64 {
    2 * (n as u64) * (n as u64)
}

/// Largest taxicab diameter of a brick set:
/// `max_m m (2 m r - 2) + (n - m)(2n - 2m - 1) r`.
pub fn brick_bound(n: usize, r: u64) -> u64 {
    let n = n as u64;
    (0..=n)
        .map(|m| {
            let pinned = m * (2 * m * r).saturating_sub(2);
            let free = if m == n { 0 } else { (n - m) * (2 * n - 2 * m - 1) * r };
            pinned + free
        })
        .max()
        .unwrap_or(0)
}

/// Brick cover of `[-box, box]^n ∩ Z^n` with demands `(r, ..., r)` of
/// length `n + 1`. Returns the grid together with the cover.
pub fn brick_cover(n: usize, r: u64, r#box: u64, cap: usize) -> Result<(FiniteMetricSpace, BrickCover)> {
    let space = build_grid_space(n, 1, r#box, GridMetric::Taxicab, cap)?;
    let cover = brick_cover_of(&space, r)?;
    Ok((space, cover))
}

/// Family index and per-axis (pinned, cell) pairs.
type BrickKey = (usize, Vec<(bool, i64)>);

/// The brick construction applied to any space with integer coordinates.
pub fn brick_cover_of(space: &FiniteMetricSpace, r: u64) -> Result<BrickCover> {
    if r == 0 {
        return Err(Error::InvalidInput("brick demand must be at least 1".into()));
    }
    if !space.has_coords() && !space.is_empty() {
        return Err(Error::InvalidInput("brick cover needs coordinates".into()));
    }
    let n = space.dim().max(1);
    let period = (2 * n as i64 + 1) * r as i64;
    let mut groups: HashMap<BrickKey, Vec<PointId>> = HashMap::new();
    let mut delta: Vec<(i64, usize)> = Vec::with_capacity(n);
    for i in 0..space.len() {
        let x = space.coords(i).expect("coordinates present");
        delta.clear();
        delta.extend(x.iter().enumerate().map(|(j, &v)| {
            let rem = v.rem_euclid(period);
            (rem.min(period - rem), j)
        }));
        delta.sort_unstable();
        let level = (1..=n)
            .rev()
            .find(|&m| delta[m - 1].0 < (m as i64) * r as i64)
            .unwrap_or(0);
        let mut key: Vec<(bool, i64)> = x.iter().map(|&v| (false, v.div_euclid(period))).collect();
        for &(_, j) in &delta[..level] {
            let cell = x[j].div_euclid(period);
            let rem = x[j].rem_euclid(period);
            key[j] = (true, if rem <= period - rem { cell } else { cell + 1 });
        }
        groups.entry((level, key)).or_default().push(space.id(i));
    }
    let mut families = vec![SetFamily::default(); n + 1];
    for ((level, _), set) in groups {
        families[level].sets.push(set);
    }
    let cover = SCover {
        space: space.label().to_string(),
        s: vec![r; n + 1],
        bound: brick_bound(n, r),
        families,
    }
    .normalized();
    Ok(BrickCover {
        n,
        r,
        constant: brick_constant(n),
        cover,
    })
}
