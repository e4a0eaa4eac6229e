//! Minimal cover sizes on truncated unions of lattices `c_1 Z ⊕ ... ⊕ c_n Z`.
//!
//! For each pair `r1 <= r2` and bound `D` the harness looks for the least
//! `k >= 2` such that the space has a cover with demands
//! `(r1, r2, r2, ...)` of length `k`. Upper bounds come from heuristic
//! witnesses and the brick construction, lower bounds from exact UNSAT on a
//! smaller box (a subspace). Both are then closed under the obvious
//! monotonicity: a cover for larger demands or a smaller bound is also a
//! cover for smaller demands or a larger bound.

use serde::{Deserialize, Serialize};

use crate::covers::{brick_cover_of, extend_demands, solve_s_cover, SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::spaces::{build_cup_c_space, FiniteMetricSpace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CupcConfig {
    pub c: Vec<u64>,
    /// Depth of the union; defaults to `|c|`.
    pub n: usize,
    #[serde(rename = "box")]
    pub r#box: u64,
    pub bounds: Vec<u64>,
    pub radii: Vec<u64>,
    pub kcap: usize,
    /// Box of the subspace used for exact lower bounds.
    pub lower_box: u64,
    pub budget_nodes: u64,
    pub seed: u64,
    pub point_cap: usize,
}

impl CupcConfig {
    pub fn new(c: Vec<u64>, r#box: u64) -> Self {
        CupcConfig {
            n: c.len(),
            c,
            r#box,
            bounds: vec![4, 8, 16],
            radii: vec![1, 2, 4],
            kcap: 6,
            lower_box: 4,
            budget_nodes: 20_000,
            seed: 0,
            point_cap: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.n == 0 {
            return Err(Error::InvalidConfig("c must be nonempty".into()));
        }
        if self.bounds.is_empty() || self.radii.is_empty() {
            return Err(Error::InvalidConfig("bounds and radii must be nonempty".into()));
        }
        if self.radii.contains(&0) {
            return Err(Error::InvalidConfig("radii must be at least 1".into()));
        }
        if self.kcap < 2 {
            return Err(Error::InvalidConfig("kcap must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSource {
    Heuristic,
    Brick,
    /// Inherited from a cell with larger demands or a smaller bound.
    Closure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CupcCell {
    pub r1: u64,
    pub r2: u64,
    #[serde(rename = "D")]
    pub bound: u64,
    /// Least `k` with a witness; `None` when no witness up to `kcap`.
    pub k_upper: Option<usize>,
    pub k_lower: usize,
    pub exact: bool,
    pub source: Option<BoundSource>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationNote {
    pub r1: u64,
    #[serde(rename = "D")]
    pub bound: u64,
    /// The second-round `k` is the same for every `r2 >= r1` in the grid.
    pub constant_in_r2: bool,
    /// All cells of the row are exact.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CupcReport {
    pub config: CupcConfig,
    pub space: String,
    pub points: usize,
    pub lower_points: usize,
    pub cells: Vec<CupcCell>,
    pub stabilization: Vec<StabilizationNote>,
}

fn least_witness_k(space: &FiniteMetricSpace, r: &[u64], bound: u64, cfg: &CupcConfig) -> Result<Option<usize>> {
    let opts = SolveOptions {
        seed: cfg.seed,
        ..SolveOptions::heuristic()
    };
    for k in r.len()..=cfg.kcap {
        if solve_s_cover(space, &extend_demands(r, k), bound, &opts)?.is_sat() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

pub fn run_cupc(cfg: &CupcConfig) -> Result<CupcReport> {
    cfg.validate()?;
    let space = build_cup_c_space(&cfg.c, cfg.n, cfg.r#box, cfg.point_cap)?;
    let small = build_cup_c_space(&cfg.c, cfg.n, cfg.lower_box.min(cfg.r#box), cfg.point_cap)?;
    let mut radii = cfg.radii.clone();
    radii.sort_unstable();
    radii.dedup();
    let mut bounds = cfg.bounds.clone();
    bounds.sort_unstable();
    bounds.dedup();

    let mut cells = Vec::new();
    for &bound in &bounds {
        for (i, &r1) in radii.iter().enumerate() {
            for &r2 in &radii[i..] {
                let mut k_upper = least_witness_k(&space, &[r1, r2], bound, cfg)?;
                let mut source = k_upper.map(|_| BoundSource::Heuristic);
                let brick = brick_cover_of(&space, r2)?;
                let brick_k = brick.cover.families.len().max(2);
                if brick.cover.bound <= bound && brick_k <= cfg.kcap && k_upper.is_none_or(|k| brick_k < k) {
                    k_upper = Some(brick_k);
                    source = Some(BoundSource::Brick);
                }
                cells.push(CupcCell {
                    r1,
                    r2,
                    bound,
                    k_upper,
                    k_lower: 2,
                    exact: false,
                    source,
                });
            }
        }
    }
    close_upper(&mut cells);
    let exact = SolveOptions {
        budget_nodes: cfg.budget_nodes,
        seed: cfg.seed,
        ..SolveOptions::exact()
    };
    for cell in &mut cells {
        let target = cell.k_upper.unwrap_or(cfg.kcap + 1);
        if target <= 2 {
            continue;
        }
        let res = solve_s_cover(
            &small,
            &extend_demands(&[cell.r1, cell.r2], target - 1),
            cell.bound,
            &exact,
        )?;
        if res.status == SolveStatus::Unsat {
            cell.k_lower = target;
        }
    }
    close_lower(&mut cells);
    for cell in &mut cells {
        cell.exact = cell.k_upper == Some(cell.k_lower);
    }

    let mut stabilization = Vec::new();
    for &bound in &bounds {
        for &r1 in &radii {
            let row: Vec<&CupcCell> = cells.iter().filter(|c| c.bound == bound && c.r1 == r1).collect();
            stabilization.push(StabilizationNote {
                r1,
                bound,
                constant_in_r2: row.windows(2).all(|w| w[0].k_upper == w[1].k_upper),
                exact: row.iter().all(|c| c.exact),
            });
        }
    }
    Ok(CupcReport {
        config: cfg.clone(),
        space: space.label().to_string(),
        points: space.len(),
        lower_points: small.len(),
        cells,
        stabilization,
    })
}

/// `a` is at least as hard as `b`: larger demands, smaller bound.
fn harder(a: &CupcCell, b: &CupcCell) -> bool {
    a.r1 >= b.r1 && a.r2 >= b.r2 && a.bound <= b.bound
}

fn close_upper(cells: &mut [CupcCell]) {
    let snapshot = cells.to_vec();
    for cell in cells.iter_mut() {
        for other in &snapshot {
            if let Some(k) = other.k_upper {
                if harder(other, cell) && cell.k_upper.is_none_or(|u| k < u) {
                    cell.k_upper = Some(k);
                    cell.source = Some(BoundSource::Closure);
                }
            }
        }
    }
}

fn close_lower(cells: &mut [CupcCell]) {
    let snapshot = cells.to_vec();
    for cell in cells.iter_mut() {
        for other in &snapshot {
            if harder(cell, other) {
                cell.k_lower = cell.k_lower.max(other.k_lower);
            }
        }
    }
}

/// Reported `k` is nonincreasing in `D` and nondecreasing in `r1` and `r2`
/// (`None` counts as above every value).
pub fn check_monotone(report: &CupcReport) -> bool {
    let key = |c: &CupcCell| c.k_upper.unwrap_or(usize::MAX);
    report
        .cells
        .iter()
        .all(|a| report.cells.iter().all(|b| !harder(a, b) || key(a) >= key(b)))
}

/// Plain-text table, one block per bound.
pub fn render_table(report: &CupcReport) -> String {
    let mut out = format!(
        "space {} ({} points, lower bounds on {} points)\n",
        report.space, report.points, report.lower_points
    );
    let mut bounds: Vec<u64> = report.cells.iter().map(|c| c.bound).collect();
    bounds.dedup();
    for bound in bounds {
        out.push_str(&format!("D = {bound}\n  r1  r2  k\n"));
        for c in report.cells.iter().filter(|c| c.bound == bound) {
            let k = match c.k_upper {
                Some(k) if c.exact => k.to_string(),
                Some(k) => format!("{}..{k}", c.k_lower),
                None => format!(">{}", report.config.kcap),
            };
            out.push_str(&format!("  {:>2}  {:>2}  {k}\n", c.r1, c.r2));
        }
    }
    for note in &report.stabilization {
        out.push_str(&format!(
            "r1 = {}, D = {}: second-round k {} in r2{}\n",
            note.r1,
            note.bound,
            if note.constant_in_r2 { "constant" } else { "varies" },
            if note.exact { "" } else { " (not all exact)" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_monotone() {
        let mut cfg = CupcConfig::new(vec![1, 2, 4], 6);
        cfg.bounds = vec![2, 4];
        cfg.radii = vec![1, 2, 3];
        cfg.lower_box = 3;
        let report = run_cupc(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2 * 6);
        assert!(check_monotone(&report));
        assert!(report.cells.iter().all(|c| c.k_upper.is_none_or(|k| k >= c.k_lower)));
        let text = render_table(&report);
        assert!(text.contains("D = 4"));
    }

    #[test]
    fn closure_fills_easier_cells() {
        let cell = |r1, r2, bound, k| CupcCell {
            r1,
            r2,
            bound,
            k_upper: k,
            k_lower: 2,
            exact: false,
            source: None,
        };
        let mut cells = vec![cell(1, 1, 8, None), cell(2, 2, 4, Some(3))];
        close_upper(&mut cells);
        assert_eq!(cells[0].k_upper, Some(3));
        assert_eq!(cells[0].source, Some(BoundSource::Closure));
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = CupcConfig::new(vec![1, 2], 4);
        cfg.radii = vec![0];
        assert!(run_cupc(&cfg).is_err());
    }
}
