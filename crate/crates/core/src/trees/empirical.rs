use serde::{Deserialize, Serialize};

use super::{rank_recursive, FinTree, Seq};
use crate::covers::{solve_s_cover, SolveMode, SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::spaces::FiniteMetricSpace;

/// Largest number of demand sequences an empirical tree may examine.
pub const SEQUENCE_CAP: u64 = 200_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Any,
    Nondecreasing,
    StrictlyIncreasing,
}

impl Variant {
    pub fn admits(self, s: &[u64]) -> bool {
        match self {
            Variant::Any => true,
            Variant::Nondecreasing => s.windows(2).all(|w| w[0] <= w[1]),
            Variant::StrictlyIncreasing => s.windows(2).all(|w| w[0] < w[1]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmpiricalTreeConfig {
    pub rmax: u64,
    #[serde(rename = "Lmax")]
    pub lmax: usize,
    #[serde(rename = "D")]
    pub bound: u64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub mode: SolveMode,
    #[serde(default = "default_budget")]
    pub budget_nodes: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> u64 {
    SolveOptions::default().budget_nodes
}

impl EmpiricalTreeConfig {
    pub fn new(rmax: u64, lmax: usize, bound: u64, variant: Variant) -> Self {
        EmpiricalTreeConfig {
            rmax,
            lmax,
            bound,
            variant,
            mode: SolveMode::Exact,
            budget_nodes: default_budget(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rmax == 0 || self.lmax == 0 {
            return Err(Error::InvalidConfig("rmax and Lmax must be at least 1".into()));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            mode: self.mode,
            budget_nodes: self.budget_nodes,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }
}

/// Tree JSON: the nodes, the configuration that produced them and the rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalTree {
    #[serde(flatten)]
    pub tree: FinTree,
    pub config: EmpiricalTreeConfig,
    pub rank: Option<u64>,
    /// Number of solver calls made.
    pub solves: u64,
}

/// The sequences `s` (entries in `1..=rmax`, length up to `Lmax`, admitted by
/// the variant) with no s-cover at bound `D`, together with the empty
/// sequence when the space is nonempty. Every admitted sequence is solved
/// and prefix closure is verified afterwards.
pub fn empirical_dim_tree(space: &FiniteMetricSpace, cfg: &EmpiricalTreeConfig) -> Result<EmpiricalTree> {
    cfg.validate()?;
    let total: u64 = (1..=cfg.lmax as u32)
        .map(|l| cfg.rmax.saturating_pow(l))
        .fold(0u64, u64::saturating_add);
    if total > SEQUENCE_CAP {
        return Err(Error::Resource {
            what: "demand sequences",
            count: total as u128,
            cap: SEQUENCE_CAP as u128,
        });
    }
    let opts = cfg.solve_options();
    let mut nodes = std::collections::BTreeSet::new();
    if !space.is_empty() {
        nodes.insert(Vec::new());
    }
    let mut solves = 0;
    let mut frontier: Vec<Seq> = vec![Vec::new()];
    for _ in 0..cfg.lmax {
        let mut next = Vec::new();
        for prefix in &frontier {
            for r in 1..=cfg.rmax {
                let mut s = prefix.clone();
                s.push(r);
                if !cfg.variant.admits(&s) {
                    continue;
                }
                solves += 1;
                let res = solve_s_cover(space, &s, cfg.bound, &opts)?;
                let infeasible = match res.status {
                    SolveStatus::Unsat => true,
                    SolveStatus::Sat => false,
                    SolveStatus::Unknown if cfg.mode == SolveMode::Exact => {
                        return Err(Error::Unknown(format!("solver budget exhausted on demands {s:?}")));
                    }
                    SolveStatus::Unknown => true,
                };
                if infeasible {
                    nodes.insert(s.clone());
                }
                next.push(s);
            }
        }
        frontier = next;
    }
    for s in &nodes {
        if let Some((_, parent)) = s.split_last() {
            if !nodes.contains(parent) {
                return Err(Error::Inconsistent(format!(
                    "{s:?} has no cover but its prefix {parent:?} does"
                )));
            }
        }
    }
    let tree = FinTree::new(nodes)?;
    let rank = rank_recursive(&tree);
    Ok(EmpiricalTree {
        tree,
        config: *cfg,
        rank,
        solves,
    })
}
