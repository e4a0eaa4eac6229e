//! Operations that build new covers from old ones: transport along coarse
//! maps, traces on subsets, fibered composition, finite sums and uniform
//! solving over a list of spaces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_s_cover, solve_s_cover, SCover, SetFamily, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::spaces::{check_coarse_embedding, check_uniformly_expansive, CoarseMap, FiniteMetricSpace, PointId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportResult {
    /// Cover of the target; `s[i] = max(p1(s_in[i]) - 2N, 0)`, `D = p2(E) + 2N`.
    pub cover: SCover,
    /// Families whose declared disjointness is 0 and carry no claim.
    pub degenerate: Vec<usize>,
}

fn require_label(expected: &str, found: &str) -> Result<()> {
    if expected != found {
        return Err(Error::SpaceMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn require_valid(space: &FiniteMetricSpace, cover: &SCover, what: &str) -> Result<()> {
    let report = check_s_cover(space, cover)?;
    if !report.ok {
        return Err(Error::InvalidInput(format!(
            "{what} is not a valid cover: {:?}",
            report.violation
        )));
    }
    Ok(())
}

/// Pushes a cover of `X` (bounded by `e`) forward along `m`, replacing every
/// image set by its closed `N`-hull in the target.
pub fn transport_cover(cover: &SCover, m: &CoarseMap, e: u64) -> Result<TransportResult> {
    let x = m.source();
    let y = m.target();
    require_label(x.label(), &cover.space)?;
    let input = SCover {
        bound: e,
        ..cover.clone()
    };
    require_valid(x, &input, "input")?;
    let report = check_coarse_embedding(m);
    if let Some(v) = report.violation {
        return Err(Error::Control(format!("{v:?}")));
    }
    let c = m.controls();
    let n = c.n;
    let image: Vec<usize> = {
        let set: BTreeSet<usize> = (0..x.len()).map(|i| m.apply(i)).collect();
        set.into_iter().collect()
    };
    for q in 0..y.len() {
        if !image.iter().any(|&t| y.dist(q, t) <= n) {
            return Err(Error::HullCoverage {
                point: y.id(q),
                radius: n,
            });
        }
    }
    let mut families = Vec::with_capacity(cover.families.len());
    for family in &cover.families {
        let mut out = SetFamily::default();
        for set in &family.sets {
            let img: BTreeSet<usize> = set
                .iter()
                .map(|&id| x.require_index(id).map(|i| m.apply(i)))
                .collect::<Result<_>>()?;
            let hull: Vec<PointId> = (0..y.len())
                .filter(|&q| img.iter().any(|&t| y.dist(q, t) <= n))
                .map(|q| y.id(q))
                .collect();
            out.sets.push(hull);
        }
        families.push(out);
    }
    let s: Vec<u64> = cover.s.iter().map(|&r| c.p1.eval(r).saturating_sub(2 * n)).collect();
    let degenerate = s.iter().enumerate().filter(|(_, &v)| v == 0).map(|(i, _)| i).collect();
    Ok(TransportResult {
        cover: SCover {
            space: y.label().to_string(),
            s,
            bound: c.p2.eval(e) + 2 * n,
            families,
        }
        .normalized(),
        degenerate,
    })
}

/// Intersects every set with `subset`, dropping empty traces and keeping the
/// family order. Returns the subspace and the traced cover on it.
pub fn trace_cover(
    space: &FiniteMetricSpace,
    cover: &SCover,
    subset: &[PointId],
) -> Result<(FiniteMetricSpace, SCover)> {
    require_label(space.label(), &cover.space)?;
    let sub = space.subspace(subset)?;
    let traced = trace_on(cover, sub.ids(), sub.label());
    Ok((sub, traced))
}

/// Trace on a sorted id list, labelled `label`.
pub(crate) fn trace_on(cover: &SCover, ids: &[PointId], label: &str) -> SCover {
    let families = cover
        .families
        .iter()
        .map(|f| SetFamily {
            sets: f
                .sets
                .iter()
                .map(|set| {
                    set.iter()
                        .copied()
                        .filter(|p| ids.binary_search(p).is_ok())
                        .collect::<Vec<_>>()
                })
                .filter(|t| !t.is_empty())
                .collect(),
        })
        .collect();
    SCover {
        space: label.to_string(),
        s: cover.s.clone(),
        bound: cover.bound,
        families,
    }
    .normalized()
}

/// Cover of the preimage of one base set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Base family index.
    pub family: usize,
    /// Set index inside that family.
    pub set: usize,
    pub cover: SCover,
}

/// Combines a base cover of `Y` with covers of the preimages of its sets.
///
/// For base family `j` with demand `S_j` and declared radius `R_j`, the
/// precondition `p2(R_j) < S_j` makes preimages of distinct sets more than
/// `R_j` apart. Fibers over one base family must share their demands
/// `τ_j`; the merged family `i` of block `j` has demand `min(τ_j(i),
/// R_j + 1)`. Blocks are concatenated in base family order.
pub fn fiber_compose(f: &CoarseMap, base: &SCover, radii: &[u64], fibers: &[FiberSpec]) -> Result<SCover> {
    let x = f.source();
    let y = f.target();
    require_label(y.label(), &base.space)?;
    require_valid(y, base, "base cover")?;
    if radii.len() != base.s.len() {
        return Err(Error::InvalidInput("one radius per base family".into()));
    }
    let report = check_uniformly_expansive(f);
    if let Some(v) = report.violation {
        return Err(Error::Control(format!("{v:?}")));
    }
    let p2 = &f.controls().p2;
    for (j, (&r, &big_s)) in radii.iter().zip(&base.s).enumerate() {
        if p2.eval(r) >= big_s {
            return Err(Error::Control(format!(
                "base family {j}: p2({r}) = {} is not below {big_s}",
                p2.eval(r)
            )));
        }
    }
    // preimage of every base set
    let mut preimage: Vec<Vec<Vec<PointId>>> = base
        .families
        .iter()
        .map(|fam| vec![Vec::new(); fam.sets.len()])
        .collect();
    for (j, fam) in base.families.iter().enumerate() {
        for (k, set) in fam.sets.iter().enumerate() {
            let targets: BTreeSet<usize> = set.iter().map(|&id| y.require_index(id)).collect::<Result<_>>()?;
            preimage[j][k] = (0..x.len())
                .filter(|&i| targets.contains(&f.apply(i)))
                .map(|i| x.id(i))
                .collect();
        }
    }
    let mut chosen: Vec<Vec<Option<&SCover>>> = preimage.iter().map(|p| vec![None; p.len()]).collect();
    for spec in fibers {
        let slot = chosen
            .get_mut(spec.family)
            .and_then(|v| v.get_mut(spec.set))
            .ok_or_else(|| Error::InvalidInput(format!("no base set ({}, {})", spec.family, spec.set)))?;
        if slot.is_some() {
            return Err(Error::InvalidInput(format!(
                "two fibers for base set ({}, {})",
                spec.family, spec.set
            )));
        }
        *slot = Some(&spec.cover);
    }
    let mut s = Vec::new();
    let mut families = Vec::new();
    let mut bound = 0;
    for (j, fam_fibers) in chosen.iter().enumerate() {
        let mut tau: Option<&[u64]> = None;
        let mut merged: Vec<SetFamily> = Vec::new();
        for (k, fiber) in fam_fibers.iter().enumerate() {
            let pre = &preimage[j][k];
            let Some(cover) = fiber else {
                if pre.is_empty() {
                    continue;
                }
                return Err(Error::InvalidInput(format!("missing fiber for base set ({j}, {k})")));
            };
            if pre.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "base set ({j}, {k}) has an empty preimage"
                )));
            }
            let sub = x.subspace(pre)?;
            require_label(sub.label(), &cover.space)?;
            require_valid(&sub, cover, "fiber cover")?;
            match tau {
                None => {
                    tau = Some(&cover.s);
                    merged = vec![SetFamily::default(); cover.s.len()];
                }
                Some(t) if t != cover.s.as_slice() => {
                    return Err(Error::InvalidInput(format!(
                        "fibers over base family {j} have different demands"
                    )));
                }
                Some(_) => {}
            }
            bound = bound.max(cover.bound);
            for (i, fam) in cover.families.iter().enumerate() {
                merged[i].sets.extend(fam.sets.iter().cloned());
            }
        }
        if let Some(t) = tau {
            s.extend(t.iter().map(|&ti| ti.min(radii[j] + 1)));
            families.extend(merged);
        }
    }
    Ok(SCover {
        space: x.label().to_string(),
        s,
        bound,
        families,
    }
    .normalized())
}

/// One summand of a finite sum: a part space, the ids of its points in the
/// ambient space (in the part's index order) and a cover of the part.
#[derive(Clone, Copy, Debug)]
pub struct SumPart<'a> {
    pub space: &'a FiniteMetricSpace,
    pub ambient_ids: &'a [PointId],
    pub cover: &'a SCover,
}

/// Family-wise union of covers of well separated parts.
pub fn finite_sum_cover(ambient: &FiniteMetricSpace, parts: &[SumPart<'_>], separation: u64) -> Result<SCover> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("finite sum of no parts".into()))?;
    let (s, bound) = (&first.cover.s, first.cover.bound);
    for part in parts {
        if &part.cover.s != s || part.cover.bound != bound {
            return Err(Error::InvalidInput("parts must share demands and bound".into()));
        }
        if part.ambient_ids.len() != part.space.len() {
            return Err(Error::InvalidInput("one ambient id per part point".into()));
        }
        require_valid(part.space, part.cover, "part cover")?;
    }
    let top = s.iter().copied().max().unwrap_or(0);
    if separation < top {
        return Err(Error::InvalidInput(format!(
            "separation {separation} is below the largest demand {top}"
        )));
    }
    let idx: Vec<Vec<usize>> = parts
        .iter()
        .map(|p| p.ambient_ids.iter().map(|&id| ambient.require_index(id)).collect())
        .collect::<Result<_>>()?;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if let Some(d) = ambient.set_distance(&idx[a], &idx[b]) {
                if d < separation {
                    return Err(Error::Inconsistent(format!(
                        "parts {a} and {b} are {d} apart, below the declared separation {separation}"
                    )));
                }
            }
        }
    }
    let mut families = vec![SetFamily::default(); s.len()];
    for part in parts {
        for (i, fam) in part.cover.families.iter().enumerate() {
            for set in &fam.sets {
                let mapped = set
                    .iter()
                    .map(|&id| part.space.require_index(id).map(|k| part.ambient_ids[k]))
                    .collect::<Result<Vec<_>>>()?;
                families[i].sets.push(mapped);
            }
        }
    }
    Ok(SCover {
        space: ambient.label().to_string(),
        s: s.clone(),
        bound,
        families,
    }
    .normalized())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum UniformVerdict {
    UniformSat,
    Unsat { index: usize, space: String },
    Unknown { index: usize, space: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformResult {
    pub verdict: UniformVerdict,
    /// One result per space up to and including the deciding one.
    pub results: Vec<SolveResult>,
}

/// Asks for one bound `D` working for every space of the list.
pub fn family_solve_uniform(
    spaces: &[FiniteMetricSpace],
    s: &[u64],
    bound: u64,
    opts: &SolveOptions,
) -> Result<UniformResult> {
    let mut results = Vec::with_capacity(spaces.len());
    for (index, space) in spaces.iter().enumerate() {
        let res = solve_s_cover(space, s, bound, opts)?;
        let status = res.status;
        results.push(res);
        let label = space.label().to_string();
        match status {
            SolveStatus::Sat => {}
            SolveStatus::Unsat => {
                return Ok(UniformResult {
                    verdict: UniformVerdict::Unsat { index, space: label },
                    results,
                })
            }
            SolveStatus::Unknown => {
                return Ok(UniformResult {
                    verdict: UniformVerdict::Unknown { index, space: label },
                    results,
                })
            }
        }
    }
    Ok(UniformResult {
        verdict: UniformVerdict::UniformSat,
        results,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::spaces::{build_grid_space, ControlFn, ControlPair, GridMetric, DEFAULT_POINT_CAP};

    fn interval(lo: i64, hi: i64, step: i64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(
            format!("Z[{lo},{hi}]/{step}"),
            (lo..=hi).filter(|x| x.rem_euclid(step) == 0).map(|x| vec![x]).collect(),
            GridMetric::Taxicab,
        )
        .unwrap()
    }

    fn exact_witness(space: &FiniteMetricSpace, s: &[u64], d: u64) -> SCover {
        solve_s_cover(space, s, d, &SolveOptions::exact())
            .unwrap()
            .witness
            .unwrap()
    }

    #[test]
    fn transport_identity() {
        let x = Arc::new(interval(-4, 4, 1));
        let cover = exact_witness(&x, &[2, 2], 3);
        let m = CoarseMap::new(x.clone(), x.clone(), (0..x.len()).collect(), ControlPair::identity()).unwrap();
        let out = transport_cover(&cover, &m, 3).unwrap();
        assert_eq!(out.cover, cover);
        assert!(out.degenerate.is_empty());
    }

    #[test]
    fn transport_scaling() {
        let x = Arc::new(interval(-4, 4, 1));
        let y = Arc::new(interval(-8, 8, 2));
        let cover = exact_witness(&x, &[3, 3], 3);
        let controls = ControlPair::new(ControlFn::linear(2, 0), ControlFn::linear(2, 0), 0).unwrap();
        let pairs: Vec<_> = (0..x.len()).map(|i| (x.id(i), y.id(i))).collect();
        let m = CoarseMap::from_ids(x.clone(), y.clone(), &pairs, controls).unwrap();
        let out = transport_cover(&cover, &m, 3).unwrap();
        assert_eq!(out.cover.s, vec![6, 6]);
        assert_eq!(out.cover.bound, 6);
        assert!(check_s_cover(&y, &out.cover).unwrap().ok);
    }

    #[test]
    fn transport_codense_inclusion() {
        let x = Arc::new(interval(-4, 4, 2));
        let y = Arc::new(interval(-4, 4, 1));
        let cover = exact_witness(&x, &[4, 4], 2);
        let pairs: Vec<_> = (0..x.len())
            .map(|i| {
                let c = x.coords(i).unwrap()[0];
                (x.id(i), y.id((c + 4) as usize))
            })
            .collect();
        let controls = ControlPair::new(ControlFn::identity(), ControlFn::identity(), 1).unwrap();
        let m = CoarseMap::from_ids(x.clone(), y.clone(), &pairs, controls).unwrap();
        let out = transport_cover(&cover, &m, 2).unwrap();
        assert_eq!(out.cover.s, vec![2, 2]);
        assert_eq!(out.cover.bound, 4);
        assert!(check_s_cover(&y, &out.cover).unwrap().ok);
    }

    #[test]
    fn transport_rejects_uncovered_target() {
        let x = Arc::new(interval(0, 0, 1));
        let y = Arc::new(interval(0, 3, 1));
        let cover = exact_witness(&x, &[2], 0);
        let m = CoarseMap::new(x, y, vec![0], ControlPair::identity()).unwrap();
        assert!(matches!(
            transport_cover(&cover, &m, 0),
            Err(Error::HullCoverage { .. })
        ));
    }

    #[test]
    fn trace_examples() {
        let x = interval(-8, 8, 1);
        let cover = exact_witness(&x, &[2, 2], 3);
        let (same, t) = trace_cover(&x, &cover, x.ids()).unwrap();
        assert_eq!(same, x);
        assert_eq!(t, cover);
        let zero = x.id(8);
        let (sub, t) = trace_cover(&x, &cover, &[zero]).unwrap();
        assert_eq!(t.set_count(), 1);
        assert!(check_s_cover(&sub, &t).unwrap().ok);
        let f = cover
            .families
            .iter()
            .position(|f| f.points().any(|p| p == zero))
            .unwrap();
        assert_eq!(t.families[f].sets, vec![vec![zero]]);
    }

    #[test]
    fn fiber_single_point_base() {
        let x = Arc::new(interval(-2, 2, 1));
        let y = Arc::new(interval(0, 0, 1));
        let f = CoarseMap::new(x.clone(), y.clone(), vec![0; x.len()], ControlPair::identity()).unwrap();
        let base = exact_witness(&y, &[5], 0);
        let fiber = exact_witness(&x, &[2, 2], 2);
        let out = fiber_compose(
            &f,
            &base,
            &[4],
            &[FiberSpec {
                family: 0,
                set: 0,
                cover: fiber.clone(),
            }],
        )
        .unwrap();
        assert_eq!(out, fiber);
    }

    #[test]
    fn fiber_product_projection() {
        let x = Arc::new(build_grid_space(2, 1, 4, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap());
        let y = Arc::new(interval(-4, 4, 1));
        let map: Vec<usize> = (0..x.len()).map(|i| (x.coords(i).unwrap()[0] + 4) as usize).collect();
        let f = CoarseMap::new(
            x.clone(),
            y.clone(),
            map,
            ControlPair::new(ControlFn::shifted(1 << 20), ControlFn::identity(), 0).unwrap(),
        )
        .unwrap();
        let base = exact_witness(&y, &[3, 3], 2);
        let mut fibers = Vec::new();
        for (j, fam) in base.families.iter().enumerate() {
            for (k, set) in fam.sets.iter().enumerate() {
                let pre: Vec<PointId> = (0..x.len())
                    .filter(|&i| set.contains(&y.id(f.apply(i))))
                    .map(|i| x.id(i))
                    .collect();
                let sub = x.subspace(&pre).unwrap();
                let res = solve_s_cover(&sub, &[2, 2], 4, &SolveOptions::heuristic()).unwrap();
                fibers.push(FiberSpec {
                    family: j,
                    set: k,
                    cover: res.witness.unwrap(),
                });
            }
        }
        let out = fiber_compose(&f, &base, &[2, 2], &fibers).unwrap();
        assert_eq!(out.s, vec![2, 2, 2, 2]);
        assert!(check_s_cover(&x, &out).unwrap().ok);
        let err = fiber_compose(&f, &base, &[3, 2], &fibers).unwrap_err();
        assert!(matches!(err, Error::Control(_)));
    }

    #[test]
    fn finite_sum_two_copies() {
        let a = interval(-2, 2, 1);
        let ambient = FiniteMetricSpace::from_coords(
            "two-copies",
            (-2..=2).chain(12..=16).map(|x| vec![x]).collect(),
            GridMetric::Taxicab,
        )
        .unwrap();
        let cover = exact_witness(&a, &[2, 2], 3);
        let left: Vec<PointId> = ambient.ids()[..5].to_vec();
        let right: Vec<PointId> = ambient.ids()[5..].to_vec();
        let parts = [
            SumPart {
                space: &a,
                ambient_ids: &left,
                cover: &cover,
            },
            SumPart {
                space: &a,
                ambient_ids: &right,
                cover: &cover,
            },
        ];
        let out = finite_sum_cover(&ambient, &parts, 10).unwrap();
        assert!(check_s_cover(&ambient, &out).unwrap().ok);
        assert!(finite_sum_cover(&ambient, &parts, 1).is_err());
        let single = finite_sum_cover(&a, &parts[..1], 2).unwrap();
        assert_eq!(single, cover);
    }

    #[test]
    fn uniform_family() {
        let gamma: Vec<_> = (0..=12).map(|m| interval(0, m, 1)).collect();
        let wide = family_solve_uniform(&gamma, &[2], 20, &SolveOptions::exact()).unwrap();
        assert_eq!(wide.verdict, UniformVerdict::UniformSat);
        let tight = family_solve_uniform(&gamma, &[2], 4, &SolveOptions::exact()).unwrap();
        assert!(matches!(tight.verdict, UniformVerdict::Unsat { index: 5, .. }));
        let none = family_solve_uniform(&[], &[2], 4, &SolveOptions::exact()).unwrap();
        assert_eq!(none.verdict, UniformVerdict::UniformSat);
    }
}
