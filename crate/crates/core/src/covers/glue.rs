//! Gluing covers of finitely many subsets into a cover of their union.
//!
//! Each subset `b` comes with a finite candidate list `A_b` of covers
//! (provided, optionally extended by full enumeration on small subsets). A
//! backtracking search picks one candidate per subset so that the choices
//! agree on traces; the agreed choice yields the glued cover.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::transform::trace_on;
use super::{check_s_cover, SCover, SetFamily};
use crate::error::{Error, Result};
use crate::spaces::{FiniteMetricSpace, PointId};

/// Largest subset whose covers are enumerated.
pub const ENUMERATE_POINT_CAP: usize = 10;

/// Largest number of covers an enumeration may return.
pub const ENUMERATE_RESULT_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlueMode {
    /// Ascending chain `b_1 ⊂ ... ⊂ b_m`; consecutive choices must agree.
    #[default]
    Chain,
    /// Arbitrary subsets; every pair must agree on its intersection and the
    /// family-wise union is checked on the union.
    FiniteSums,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlueInput {
    pub chain: Vec<Vec<PointId>>,
    /// Provided candidates per subset, each on the subspace of that subset.
    pub covers: Vec<Vec<SCover>>,
    pub s: Vec<u64>,
    #[serde(rename = "D")]
    pub bound: u64,
    #[serde(default)]
    pub mode: GlueMode,
    /// Add every partition cover of subsets up to the enumeration cap.
    #[serde(default)]
    pub enumerate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueOutcome {
    /// Cover of the union, when a consistent selection exists.
    pub glued: Option<SCover>,
    /// Chosen candidate index per subset.
    pub selection: Vec<usize>,
    /// Candidate count per subset.
    pub candidates: Vec<usize>,
    pub nodes: u64,
}

fn families_eq(a: &SCover, b: &SCover) -> bool {
    a.families == b.families
}

pub fn glue_covers(space: &FiniteMetricSpace, input: &GlueInput) -> Result<GlueOutcome> {
    let m = input.chain.len();
    if m == 0 {
        return Err(Error::InvalidInput("nothing to glue".into()));
    }
    if input.covers.len() > m {
        return Err(Error::InvalidInput("more cover lists than subsets".into()));
    }
    let mut subs = Vec::with_capacity(m);
    for b in &input.chain {
        subs.push(space.subspace(b)?);
    }
    let sets: Vec<BTreeSet<PointId>> = subs.iter().map(|s| s.ids().iter().copied().collect()).collect();
    if input.mode == GlueMode::Chain {
        for i in 1..m {
            if !sets[i - 1].is_subset(&sets[i]) {
                return Err(Error::Inconsistent(format!("chain is not ascending at position {i}")));
            }
        }
    }
    let mut cands: Vec<Vec<SCover>> = Vec::with_capacity(m);
    for (i, sub) in subs.iter().enumerate() {
        let mut list = Vec::new();
        for c in input.covers.get(i).into_iter().flatten() {
            if c.s != input.s || c.bound != input.bound {
                return Err(Error::InvalidInput(format!("cover for subset {i} has other demands")));
            }
            let report = check_s_cover(sub, c)?;
            if !report.ok {
                return Err(Error::InvalidInput(format!(
                    "cover for subset {i} is invalid: {:?}",
                    report.violation
                )));
            }
            list.push(c.clone().normalized());
        }
        if input.enumerate && sub.len() <= ENUMERATE_POINT_CAP {
            list.extend(enumerate_covers(sub, &input.s, input.bound)?);
        }
        let mut seen = BTreeSet::new();
        list.retain(|c| seen.insert(c.families.clone()));
        cands.push(list);
    }
    let union_ids: Vec<PointId> = sets
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let union = space.subspace(&union_ids)?;
    let mut search = Search {
        input,
        subs: &subs,
        cands: &cands,
        union: &union,
        chosen: Vec::with_capacity(m),
        nodes: 0,
    };
    let glued = search.run()?;
    let selection = if glued.is_some() {
        search.chosen.clone()
    } else {
        Vec::new()
    };
    Ok(GlueOutcome {
        glued,
        selection,
        candidates: cands.iter().map(Vec::len).collect(),
        nodes: search.nodes,
    })
}

struct Search<'a> {
    input: &'a GlueInput,
    subs: &'a [FiniteMetricSpace],
    cands: &'a [Vec<SCover>],
    union: &'a FiniteMetricSpace,
    chosen: Vec<usize>,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self) -> Result<Option<SCover>> {
        let level = self.chosen.len();
        if level == self.cands.len() {
            return self.finish();
        }
        for c in 0..self.cands[level].len() {
            self.nodes += 1;
            if !self.consistent(level, c) {
                continue;
            }
            self.chosen.push(c);
            if let Some(found) = self.run()? {
                return Ok(Some(found));
            }
            self.chosen.pop();
        }
        Ok(None)
    }

    fn consistent(&self, level: usize, c: usize) -> bool {
        let cover = &self.cands[level][c];
        match self.input.mode {
            GlueMode::Chain => {
                level == 0 || {
                    let prev = &self.cands[level - 1][self.chosen[level - 1]];
                    let sub = &self.subs[level - 1];
                    families_eq(&trace_on(cover, sub.ids(), sub.label()), prev)
                }
            }
            GlueMode::FiniteSums => (0..level).all(|j| {
                let other = &self.cands[j][self.chosen[j]];
                let common: Vec<PointId> = self.subs[j]
                    .ids()
                    .iter()
                    .copied()
                    .filter(|p| self.subs[level].index_of(*p).is_some())
                    .collect();
                families_eq(&trace_on(cover, &common, ""), &trace_on(other, &common, ""))
            }),
        }
    }

    fn finish(&self) -> Result<Option<SCover>> {
        let last = self.cands.len() - 1;
        match self.input.mode {
            GlueMode::Chain => {
                let mut cover = self.cands[last][self.chosen[last]].clone();
                cover.space = self.union.label().to_string();
                Ok(Some(cover))
            }
            GlueMode::FiniteSums => {
                let picks: Vec<&SCover> = self
                    .chosen
                    .iter()
                    .enumerate()
                    .map(|(l, &c)| &self.cands[l][c])
                    .collect();
                let merged = merge_family_wise(self.union, &self.input.s, self.input.bound, &picks);
                Ok(check_s_cover(self.union, &merged)?.ok.then_some(merged))
            }
        }
    }
}

/// Family-wise union where sets sharing a point are fused.
fn merge_family_wise(union: &FiniteMetricSpace, s: &[u64], bound: u64, picks: &[&SCover]) -> SCover {
    let mut families = Vec::with_capacity(s.len());
    for f in 0..s.len() {
        let sets: Vec<&Vec<PointId>> = picks.iter().flat_map(|c| &c.families[f].sets).collect();
        let mut parent: Vec<usize> = (0..sets.len()).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        let mut owner: std::collections::HashMap<PointId, usize> = std::collections::HashMap::new();
        for (k, set) in sets.iter().enumerate() {
            for &p in set.iter() {
                if let Some(&o) = owner.get(&p) {
                    let (ra, rb) = (find(&mut parent, o), find(&mut parent, k));
                    parent[ra] = rb;
                } else {
                    owner.insert(p, k);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, BTreeSet<PointId>> = Default::default();
        for (k, set) in sets.iter().enumerate() {
            let root = find(&mut parent, k);
            groups.entry(root).or_default().extend(set.iter().copied());
        }
        families.push(SetFamily {
            sets: groups.into_values().map(|g| g.into_iter().collect()).collect(),
        });
    }
    SCover {
        space: union.label().to_string(),
        s: s.to_vec(),
        bound,
        families,
    }
    .normalized()
}

/// Every cover of `space` in which each point lies in exactly one set.
pub fn enumerate_covers(space: &FiniteMetricSpace, s: &[u64], bound: u64) -> Result<Vec<SCover>> {
    if space.len() > ENUMERATE_POINT_CAP {
        return Err(Error::Resource {
            what: "points to enumerate",
            count: space.len() as u128,
            cap: ENUMERATE_POINT_CAP as u128,
        });
    }
    if s.is_empty() {
        return Err(Error::InvalidInput("demand sequence is empty".into()));
    }
    let mut state = Enum {
        space,
        s,
        bound,
        sets: vec![Vec::new(); s.len()],
        out: Vec::new(),
    };
    state.go(0)?;
    Ok(state.out)
}

struct Enum<'a> {
    space: &'a FiniteMetricSpace,
    s: &'a [u64],
    bound: u64,
    /// Per family, sets of point indices.
    sets: Vec<Vec<Vec<usize>>>,
    out: Vec<SCover>,
}

impl Enum<'_> {
    fn go(&mut self, p: usize) -> Result<()> {
        if p == self.space.len() {
            if self.out.len() >= ENUMERATE_RESULT_CAP {
                return Err(Error::Resource {
                    what: "enumerated covers",
                    count: ENUMERATE_RESULT_CAP as u128 + 1,
                    cap: ENUMERATE_RESULT_CAP as u128,
                });
            }
            let families = self
                .sets
                .iter()
                .map(|fam| SetFamily {
                    sets: fam
                        .iter()
                        .map(|set| set.iter().map(|&i| self.space.id(i)).collect())
                        .collect(),
                })
                .collect();
            self.out.push(
                SCover {
                    space: self.space.label().to_string(),
                    s: self.s.to_vec(),
                    bound: self.bound,
                    families,
                }
                .normalized(),
            );
            return Ok(());
        }
        for f in 0..self.s.len() {
            for k in 0..=self.sets[f].len() {
                if !self.fits(p, f, k) {
                    continue;
                }
                if k == self.sets[f].len() {
                    self.sets[f].push(vec![p]);
                } else {
                    self.sets[f][k].push(p);
                }
                self.go(p + 1)?;
                if self.sets[f][k].len() == 1 {
                    self.sets[f].pop();
                } else {
                    self.sets[f][k].pop();
                }
            }
        }
        Ok(())
    }

    /// Can `p` join set `k` of family `f` (`k == len` opens a new set)?
    fn fits(&self, p: usize, f: usize, k: usize) -> bool {
        let fam = &self.sets[f];
        fam.iter().enumerate().all(|(j, set)| {
            set.iter().all(|&q| {
                let d = self.space.dist(p, q);
                if j == k {
                    d <= self.bound
                } else {
                    d >= self.s[f]
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{solve_s_cover, trace_cover, SolveOptions};
    use crate::spaces::{build_grid_space, GridMetric, DEFAULT_POINT_CAP};

    fn line(s: u64) -> FiniteMetricSpace {
        build_grid_space(1, 1, s, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap()
    }

    fn ids_in(space: &FiniteMetricSpace, lo: i64, hi: i64) -> Vec<PointId> {
        (0..space.len())
            .filter(|&i| (lo..=hi).contains(&space.coords(i).unwrap()[0]))
            .map(|i| space.id(i))
            .collect()
    }

    #[test]
    fn single_subset_unchanged() {
        let x = line(3);
        let cover = solve_s_cover(&x, &[2, 2], 2, &SolveOptions::exact())
            .unwrap()
            .witness
            .unwrap();
        let input = GlueInput {
            chain: vec![x.ids().to_vec()],
            covers: vec![vec![cover.clone()]],
            s: vec![2, 2],
            bound: 2,
            mode: GlueMode::Chain,
            enumerate: false,
        };
        let out = glue_covers(&x, &input).unwrap();
        assert_eq!(out.glued.unwrap(), cover);
    }

    #[test]
    fn trace_then_glue() {
        let x = line(2);
        let global = solve_s_cover(&x, &[2, 2], 2, &SolveOptions::exact())
            .unwrap()
            .witness
            .unwrap();
        let chain = vec![ids_in(&x, 0, 0), ids_in(&x, -1, 1), ids_in(&x, -2, 2)];
        let covers = chain
            .iter()
            .map(|b| vec![trace_cover(&x, &global, b).unwrap().1])
            .collect();
        let input = GlueInput {
            chain: chain.clone(),
            covers,
            s: vec![2, 2],
            bound: 2,
            mode: GlueMode::Chain,
            enumerate: true,
        };
        let out = glue_covers(&x, &input).unwrap();
        let glued = out.glued.unwrap();
        assert!(check_s_cover(&x, &glued).unwrap().ok);
        assert_eq!(out.selection.len(), chain.len());
        for b in &chain {
            let (sub, t) = trace_cover(&x, &glued, b).unwrap();
            assert!(check_s_cover(&sub, &t).unwrap().ok);
        }
    }

    #[test]
    fn incompatible_chain_fails() {
        let x = line(2);
        let b1 = ids_in(&x, 0, 0);
        let sub1 = x.subspace(&b1).unwrap();
        let c1 = enumerate_covers(&sub1, &[2], 2).unwrap();
        assert_eq!(c1.len(), 1);
        let input = GlueInput {
            chain: vec![b1, x.ids().to_vec()],
            covers: vec![c1.clone(), vec![]],
            s: vec![2],
            bound: 2,
            mode: GlueMode::Chain,
            enumerate: true,
        };
        let out = glue_covers(&x, &input).unwrap();
        assert!(out.glued.is_none());
        assert_eq!(out.candidates[1], 0);
    }

    #[test]
    fn rejects_non_ascending_chain() {
        let x = line(2);
        let input = GlueInput {
            chain: vec![ids_in(&x, -1, 1), ids_in(&x, 0, 0)],
            covers: vec![],
            s: vec![2],
            bound: 2,
            mode: GlueMode::Chain,
            enumerate: true,
        };
        assert!(matches!(glue_covers(&x, &input), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn finite_sums_mode() {
        let x = line(4);
        let global = solve_s_cover(&x, &[2, 2], 2, &SolveOptions::exact())
            .unwrap()
            .witness
            .unwrap();
        let chain = vec![ids_in(&x, -4, 0), ids_in(&x, -1, 4)];
        let covers = chain
            .iter()
            .map(|b| vec![trace_cover(&x, &global, b).unwrap().1])
            .collect();
        let input = GlueInput {
            chain,
            covers,
            s: vec![2, 2],
            bound: 2,
            mode: GlueMode::FiniteSums,
            enumerate: false,
        };
        let glued = glue_covers(&x, &input).unwrap().glued.unwrap();
        assert!(check_s_cover(&x, &glued).unwrap().ok);
    }

    #[test]
    fn enumeration_matches_solver() {
        let x = line(2);
        assert!(enumerate_covers(&x, &[2], 2).unwrap().is_empty());
        let all = enumerate_covers(&x, &[2, 2], 2).unwrap();
        assert!(!all.is_empty());
        for c in &all {
            assert!(check_s_cover(&x, c).unwrap().ok);
        }
    }
}
