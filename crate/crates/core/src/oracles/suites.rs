use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use super::{
    exhaustive_cover_oracle, minimize, random_grid_subset, random_tree, run_trials, small_trees, Failure, OracleVerdict,
};
use crate::covers::{
    brick_cover_of, check_s_cover, family_solve_uniform, glue_covers, solve_s_cover, trace_cover, transport_cover,
    GlueInput, GlueMode, SCover, SolveOptions, SolveStatus, UniformVerdict,
};
use crate::error::Error;
use crate::game::{defeated_b_prefixes, GameConfig};
use crate::spaces::{
    build_grid_space, CoarseMap, ControlFn, ControlPair, FiniteMetricSpace, GridMetric, LinearTail, PointId, SpaceJson,
    DEFAULT_POINT_CAP,
};
use crate::trees::{
    canonical_increasing_embed, check_t_embedding, empirical_dim_tree, kb_compare, kb_sort, node_levels,
    node_ranks_recursive, ord_set, rank_kb, rank_levels, rank_recursive, ta_tree, tree_from_sequences,
    EmpiricalTreeConfig, FinTree, OrdSet, Seq, Variant,
};

type Outcome = (usize, Vec<Failure>);

fn space_json(space: &FiniteMetricSpace) -> Value {
    serde_json::to_value(SpaceJson::from(space)).unwrap_or(Value::Null)
}

fn error_value(e: &Error) -> Value {
    json!({ "error": e.to_string() })
}

fn drop_each_point(space: &FiniteMetricSpace) -> Vec<FiniteMetricSpace> {
    (0..space.len())
        .filter_map(|i| {
            let ids: Vec<PointId> = space.ids().iter().copied().filter(|&p| p != space.id(i)).collect();
            space.subspace(&ids).ok()
        })
        .collect()
}

fn drop_each_leaf(t: &FinTree) -> Vec<FinTree> {
    t.nodes()
        .iter()
        .filter(|s| t.is_leaf(s))
        .map(|leaf| {
            let mut nodes = t.nodes().clone();
            nodes.remove(leaf);
            FinTree::new(nodes).expect("removing a leaf keeps prefix closure")
        })
        .collect()
}

fn status_value(s: SolveStatus) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

/// Exact solver against the oracle on tiny instances.
pub(super) fn solver_vs_oracle(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        let space = random_grid_subset(rng, 1, 9, &format!("svo-{trial}"));
        let len = rng.gen_range(1..=2);
        let s: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=4)).collect();
        let bound = rng.gen_range(0..=4);
        let disagree = |x: &FiniteMetricSpace| -> Option<(Value, Value)> {
            let oracle = match exhaustive_cover_oracle(x, &s, bound) {
                Ok(o) => o.verdict,
                Err(e) => return Some((error_value(&e), Value::Null)),
            };
            let expected = json!(oracle);
            match solve_s_cover(x, &s, bound, &SolveOptions::exact()) {
                Err(e) => Some((expected, error_value(&e))),
                Ok(res) => {
                    let agrees = match (oracle, res.status) {
                        (OracleVerdict::Sat, SolveStatus::Sat) => res
                            .witness
                            .as_ref()
                            .is_some_and(|w| check_s_cover(x, w).is_ok_and(|r| r.ok)),
                        (OracleVerdict::Unsat, SolveStatus::Unsat) => true,
                        _ => false,
                    };
                    (!agrees).then(|| (expected, status_value(res.status)))
                }
            }
        };
        disagree(&space).map(|_| {
            let small = minimize(space.clone(), drop_each_point, |x| disagree(x).is_some());
            let (expected, got) = disagree(&small).unwrap_or_default();
            Failure::new(
                trial,
                json!({ "space": space_json(&small), "s": s, "D": bound }),
                expected,
                got,
            )
        })
    });
    (trials, failures)
}

fn rank_mismatch(t: &FinTree) -> Option<(Value, Value)> {
    let rec = node_ranks_recursive(t);
    let lev = node_levels(t);
    if rec != lev || rank_recursive(t) != rank_levels(t) || rank_kb(t) != rank_recursive(t) {
        let expected = json!({ "rank": rank_recursive(t), "nodes": rec.len() });
        let got = json!({ "rank_levels": rank_levels(t), "rank_kb": rank_kb(t), "nodes": lev.len() });
        return Some((expected, got));
    }
    None
}

fn tree_failure(trial: usize, t: &FinTree, check: impl Fn(&FinTree) -> Option<(Value, Value)>) -> Option<Failure> {
    check(t).map(|_| {
        let small = minimize(t.clone(), drop_each_leaf, |x| check(x).is_some());
        let (expected, got) = check(&small).unwrap_or_default();
        Failure::new(trial, json!({ "tree": small }), expected, got)
    })
}

/// Recursive rank, leaf-stripping levels and the Kleene-Brouwer pass agree,
/// node by node.
pub(super) fn rank_equivalence(seed: u64, trials: usize) -> Outcome {
    let exhaustive = small_trees(4, 3);
    let mut failures: Vec<Failure> = exhaustive
        .iter()
        .enumerate()
        .filter_map(|(i, t)| tree_failure(i, t, rank_mismatch))
        .collect();
    let offset = exhaustive.len();
    failures.extend(run_trials(seed, trials, |trial, rng| {
        let t = random_tree(rng, 4, 4);
        tree_failure(offset + trial, &t, rank_mismatch)
    }));
    (offset + trials, failures)
}

/// `Ord M` equals the root rank of the increasing tree of `M`.
pub(super) fn ord_vs_ta(seed: u64, trials: usize) -> Outcome {
    let ground: BTreeSet<u64> = (1..=5).collect();
    let failures = run_trials(seed, trials, |trial, rng| {
        let count = rng.gen_range(0..=8);
        let members: BTreeSet<BTreeSet<u64>> = (0..count)
            .map(|_| {
                let mask: u32 = rng.gen_range(1..32);
                (1..=5u64).filter(|i| mask & (1 << (i - 1)) != 0).collect()
            })
            .collect();
        let check = |members: &BTreeSet<BTreeSet<u64>>| -> Option<(Value, Value)> {
            let m = OrdSet::new(ground.clone(), members.clone()).ok()?;
            let ord = ord_set(&m);
            let rank = rank_recursive(&ta_tree(&m)).unwrap_or(0);
            (ord != rank).then(|| (json!(ord), json!(rank)))
        };
        check(&members).map(|_| {
            let shrink = |m: &BTreeSet<BTreeSet<u64>>| -> Vec<BTreeSet<BTreeSet<u64>>> {
                m.iter()
                    .map(|mu| {
                        let mut next = m.clone();
                        next.remove(mu);
                        next
                    })
                    .collect()
            };
            let small = minimize(members.clone(), shrink, |m| check(m).is_some());
            let (expected, got) = check(&small).unwrap_or_default();
            Failure::new(trial, json!({ "ground": ground, "members": small }), expected, got)
        })
    });
    (trials, failures)
}

fn kb_violation(t: &FinTree) -> Option<(Value, Value)> {
    let nodes: Vec<&Seq> = t.nodes().iter().collect();
    for &a in &nodes {
        if let Some((_, parent)) = a.split_last() {
            if kb_compare(a, parent) != std::cmp::Ordering::Less {
                return Some((
                    json!({ "child_before_parent": [a, parent] }),
                    json!(kb_compare(a, parent) as i8),
                ));
            }
        }
        for &b in &nodes {
            let ab = kb_compare(a, b);
            if ab != kb_compare(b, a).reverse() || (ab == std::cmp::Ordering::Equal) != (a == b) {
                return Some((json!({ "antisymmetric_total": [a, b] }), json!(ab as i8)));
            }
        }
    }
    let sorted = kb_sort(t.nodes().iter());
    // a sorted list that is strictly increasing pins down transitivity
    for w in sorted.windows(2) {
        if kb_compare(w[0], w[1]) != std::cmp::Ordering::Less {
            return Some((json!({ "sorted_increasing": [w[0], w[1]] }), json!(false)));
        }
    }
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            if kb_compare(a, b) != std::cmp::Ordering::Less {
                return Some((json!({ "transitive": [a, b] }), json!(false)));
            }
        }
    }
    None
}

/// Total-order axioms and child-before-parent for the Kleene-Brouwer order.
pub(super) fn kb_order(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        tree_failure(trial, &random_tree(rng, 4, 4), kb_violation)
    });
    (trials, failures)
}

fn embedding_violation(t: &FinTree) -> Option<(Value, Value)> {
    let f: BTreeMap<Seq, Seq> = t
        .nodes()
        .iter()
        .map(|s| (s.clone(), canonical_increasing_embed(s)))
        .collect();
    let image = tree_from_sequences(f.values().cloned());
    if !check_t_embedding(&f, t, &image) {
        return Some((json!("t-embedding"), json!("rejected")));
    }
    let (a, b) = (rank_recursive(t), rank_recursive(&image));
    (a > b).then(|| (json!({ "rank_at_most": b }), json!(a)))
}

/// The canonical increasing map is a t-embedding and does not lower rank.
pub(super) fn t_embedding(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        tree_failure(trial, &random_tree(rng, 4, 4), embedding_violation)
    });
    (trials, failures)
}

/// If `(s, D)` is infeasible then so is every `(s', D')` with `s' >= s`
/// pointwise and `D' <= D`; a witness for the harder pair is a witness for
/// the easier one.
pub(super) fn fraktal_monotone(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        let space = random_grid_subset(rng, 1, 12, &format!("fm-{trial}"));
        let len = rng.gen_range(1..=3);
        let s: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=4)).collect();
        let bound: u64 = rng.gen_range(0..=4);
        let harder: Vec<u64> = s.iter().map(|&v| v + rng.gen_range(0..=2)).collect();
        let harder_bound = bound.saturating_sub(rng.gen_range(0..=2));
        let check = |x: &FiniteMetricSpace| -> Option<(Value, Value)> {
            let opts = SolveOptions::exact();
            let easy = match solve_s_cover(x, &s, bound, &opts) {
                Ok(r) => r,
                Err(e) => return Some((Value::Null, error_value(&e))),
            };
            let hard = match solve_s_cover(x, &harder, harder_bound, &opts) {
                Ok(r) => r,
                Err(e) => return Some((Value::Null, error_value(&e))),
            };
            if easy.status == SolveStatus::Unknown || hard.status == SolveStatus::Unknown {
                return Some((json!("decided"), json!("UNKNOWN")));
            }
            if easy.is_unsat() && hard.is_sat() {
                return Some((json!("UNSAT"), json!("SAT")));
            }
            if let Some(w) = &hard.witness {
                let relaxed = SCover {
                    s: s.clone(),
                    bound,
                    ..w.clone()
                };
                if !check_s_cover(x, &relaxed).is_ok_and(|r| r.ok) {
                    return Some((json!("witness carries over"), json!("rejected")));
                }
            }
            None
        };
        check(&space).map(|_| {
            let small = minimize(space.clone(), drop_each_point, |x| check(x).is_some());
            let (expected, got) = check(&small).unwrap_or_default();
            Failure::new(
                trial,
                json!({ "space": space_json(&small), "s": s, "D": bound, "s_harder": harder, "D_harder": harder_bound }),
                expected,
                got,
            )
        })
    });
    (trials, failures)
}

/// The fixed spaces used by the game-against-tree comparison.
pub fn game_tree_spaces() -> Vec<FiniteMetricSpace> {
    let grid = |n, s, metric| build_grid_space(n, 1, s, metric, DEFAULT_POINT_CAP).expect("small grid");
    let scatter: Vec<Vec<i64>> = [
        (0, 0),
        (1, 0),
        (2, 0),
        (3, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (2, 2),
        (3, 3),
        (-2, 1),
        (-3, -1),
        (1, -2),
    ]
    .iter()
    .map(|&(x, y)| vec![x, y])
    .collect();
    vec![
        grid(1, 2, GridMetric::Taxicab),
        grid(1, 7, GridMetric::Taxicab),
        grid(2, 1, GridMetric::Chebyshev),
        grid(2, 1, GridMetric::Taxicab),
        FiniteMetricSpace::from_coords("scatter12", scatter, GridMetric::Taxicab).expect("distinct points"),
    ]
}

/// Prefixes on which B has defeated A so far coincide with the
/// nondecreasing empirical tree.
pub(super) fn game_equals_tree() -> Outcome {
    let mut failures = Vec::new();
    let mut trial = 0;
    for space in game_tree_spaces() {
        for bound in 1..=2 {
            for rmax in 1..=3u64 {
                for lmax in 1..=3usize {
                    let kcap = space.len().max(lmax);
                    let cfg = GameConfig::new(&space, bound, kcap, rmax);
                    let repro = json!({ "space": space.label(), "D": bound, "rmax": rmax, "Lmax": lmax, "kcap": kcap });
                    let game = defeated_b_prefixes(&space, &cfg, lmax);
                    let tree = empirical_dim_tree(
                        &space,
                        &EmpiricalTreeConfig::new(rmax, lmax, bound, Variant::Nondecreasing),
                    );
                    match (game, tree) {
                        (Ok(g), Ok(t)) if g == t.tree => {}
                        (Ok(g), Ok(t)) => failures.push(Failure::new(trial, repro, json!(t.tree), json!(g))),
                        (g, t) => failures.push(Failure::new(
                            trial,
                            repro,
                            json!(t.err().map(|e| e.to_string())),
                            json!(g.err().map(|e| e.to_string())),
                        )),
                    }
                    trial += 1;
                }
            }
        }
    }
    (trial, failures)
}

/// Traces of global covers on a chain of three subsets glue back to a valid
/// cover whose traces are the chosen candidates.
pub(super) fn glue_roundtrip(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        let label = format!("glue-{trial}");
        let space = loop {
            let x = random_grid_subset(rng, 3, 40, &label);
            if x.dim() == 2 {
                break x;
            }
        };
        let r = rng.gen_range(1..=3);
        let fail = |expected: Value, got: Value| {
            Some(Failure::new(
                trial,
                json!({ "space": space_json(&space), "r": r }),
                expected,
                got,
            ))
        };
        let brick = match brick_cover_of(&space, r) {
            Ok(b) => b.cover,
            Err(e) => return fail(json!("brick cover"), error_value(&e)),
        };
        let opts = SolveOptions {
            seed: trial as u64,
            ..SolveOptions::heuristic()
        };
        let mut globals = vec![brick.clone()];
        if let Ok(res) = solve_s_cover(&space, &brick.s, brick.bound, &opts) {
            if let Some(w) = res.witness {
                globals.push(w);
            }
        }
        let mut order: Vec<PointId> = space.ids().to_vec();
        order.shuffle(rng);
        let n = order.len();
        let a1 = rng.gen_range(1..=n - 2);
        let a2 = rng.gen_range(a1 + 1..=n - 1);
        let a3 = rng.gen_range(a2 + 1..=n);
        let chain: Vec<Vec<PointId>> = [a1, a2, a3]
            .iter()
            .map(|&k| {
                let mut v = order[..k].to_vec();
                v.sort_unstable();
                v
            })
            .collect();
        let mut covers = Vec::new();
        for sub in &chain {
            let mut list = Vec::new();
            for g in &globals {
                match trace_cover(&space, g, sub) {
                    Ok((_, c)) => list.push(c),
                    Err(e) => return fail(json!("trace"), error_value(&e)),
                }
            }
            list.reverse();
            covers.push(list);
        }
        let input = GlueInput {
            chain: chain.clone(),
            covers: covers.clone(),
            s: brick.s.clone(),
            bound: brick.bound,
            mode: GlueMode::Chain,
            enumerate: false,
        };
        let outcome = match glue_covers(&space, &input) {
            Ok(o) => o,
            Err(e) => return fail(json!("glued"), error_value(&e)),
        };
        let Some(glued) = outcome.glued else {
            return fail(json!("glued"), json!(null));
        };
        let union = match space.subspace(&chain[2]) {
            Ok(u) => u,
            Err(e) => return fail(json!("union"), error_value(&e)),
        };
        if !check_s_cover(&union, &glued).is_ok_and(|r| r.ok) {
            return fail(json!("valid glued cover"), json!(glued));
        }
        for (i, sub) in chain.iter().enumerate() {
            let chosen = &covers[i][outcome.selection[i]];
            match trace_cover(&union, &glued, sub) {
                Ok((_, t)) if t.families == chosen.families => {}
                _ => return fail(json!({ "trace_equals_choice": i }), json!(false)),
            }
        }
        None
    });
    (trials, failures)
}

/// `p1(t) = max(a t - w, 0)`.
fn lower_control(a: u64, w: u64) -> ControlFn {
    if w == 0 {
        return ControlFn::linear(a, 0);
    }
    ControlFn::new(
        vec![(0, 0)],
        LinearTail {
            from: 1,
            at: a - w,
            slope: a,
        },
    )
    .expect("valid control")
}

/// Covers transported along noisy dilations `x -> a x + e(x)` between
/// integer intervals are valid for the transported demands and bound.
pub(super) fn transport_lemma(seed: u64, trials: usize) -> Outcome {
    let failures = run_trials(seed, trials, |trial, rng| {
        let len: i64 = rng.gen_range(3..=20);
        let a: u64 = rng.gen_range(1..=3);
        let w: u64 = rng.gen_range(0..=1);
        let noise: Vec<i64> = (0..=len).map(|_| rng.gen_range(0..=w as i64)).collect();
        let top = a as i64 * len + w as i64;
        let interval = |name: String, hi: i64| {
            Arc::new(
                FiniteMetricSpace::from_coords(name, (0..=hi).map(|x| vec![x]).collect(), GridMetric::Taxicab)
                    .expect("interval"),
            )
        };
        let x = interval(format!("tl-src-{trial}"), len);
        let y = interval(format!("tl-dst-{trial}"), top);
        let map: Vec<usize> = (0..=len).map(|i| (a as i64 * i + noise[i as usize]) as usize).collect();
        let image: BTreeSet<i64> = map.iter().map(|&t| t as i64).collect();
        let n = (0..=top)
            .map(|q| image.iter().map(|&t| (q - t).unsigned_abs()).min().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let repro = json!({ "len": len, "a": a, "w": w, "noise": noise, "N": n });
        let fail = |expected: Value, got: Value| Some(Failure::new(trial, repro.clone(), expected, got));
        let controls = match ControlPair::new(lower_control(a, w), ControlFn::linear(a, w), n) {
            Ok(c) => c,
            Err(e) => return fail(json!("controls"), error_value(&e)),
        };
        let m = match CoarseMap::new(x.clone(), y.clone(), map, controls.clone()) {
            Ok(m) => m,
            Err(e) => return fail(json!("map"), error_value(&e)),
        };
        let cover = if trial % 2 == 0 {
            match brick_cover_of(&x, rng.gen_range(1..=5)) {
                Ok(b) => b.cover,
                Err(e) => return fail(json!("brick"), error_value(&e)),
            }
        } else {
            let k = rng.gen_range(1..=3);
            let s: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
            let top_s = *s.iter().max().unwrap();
            let e = rng.gen_range(top_s..=3 * top_s);
            match solve_s_cover(&x, &s, e, &SolveOptions::exact()) {
                Ok(res) if res.is_sat() => res.witness.unwrap(),
                _ => match brick_cover_of(&x, top_s) {
                    Ok(b) => b.cover,
                    Err(e) => return fail(json!("brick"), error_value(&e)),
                },
            }
        };
        let out = match transport_cover(&cover, &m, cover.bound) {
            Ok(o) => o,
            Err(e) => return fail(json!("transported"), error_value(&e)),
        };
        let want_s: Vec<u64> = cover
            .s
            .iter()
            .map(|&r| controls.p1.eval(r).saturating_sub(2 * n))
            .collect();
        let want_d = controls.p2.eval(cover.bound) + 2 * n;
        if out.cover.s != want_s || out.cover.bound != want_d {
            return fail(
                json!({ "s": want_s, "D": want_d }),
                json!({ "s": out.cover.s, "D": out.cover.bound }),
            );
        }
        match check_s_cover(&y, &out.cover) {
            Ok(r) if r.ok => None,
            Ok(r) => fail(json!("valid"), json!(r.violation)),
            Err(e) => fail(json!("valid"), error_value(&e)),
        }
    });
    (trials, failures)
}

/// `[0, m]` for `m <= 12` is coverable at `s = (2)` with `D = m` each, but
/// no single `D = 4` serves the whole list.
pub(super) fn uniform_separation() -> Outcome {
    let spaces: Vec<FiniteMetricSpace> = (0..=12i64)
        .map(|m| {
            FiniteMetricSpace::from_coords(
                format!("[0,{m}]"),
                (0..=m).map(|x| vec![x]).collect(),
                GridMetric::Taxicab,
            )
            .expect("interval")
        })
        .collect();
    let opts = SolveOptions::exact();
    let mut failures = Vec::new();
    for (m, space) in spaces.iter().enumerate() {
        match solve_s_cover(space, &[2], m as u64, &opts) {
            Ok(r) if r.is_sat() => {}
            Ok(r) => failures.push(Failure::new(
                m,
                json!({ "m": m, "s": [2], "D": m }),
                json!("SAT"),
                status_value(r.status),
            )),
            Err(e) => failures.push(Failure::new(m, json!({ "m": m }), json!("SAT"), error_value(&e))),
        }
    }
    match family_solve_uniform(&spaces, &[2], 4, &opts) {
        Ok(res) if matches!(res.verdict, UniformVerdict::Unsat { .. }) => {}
        Ok(res) => failures.push(Failure::new(
            13,
            json!({ "s": [2], "D": 4 }),
            json!("unsat"),
            json!(res.verdict),
        )),
        Err(e) => failures.push(Failure::new(
            13,
            json!({ "s": [2], "D": 4 }),
            json!("unsat"),
            error_value(&e),
        )),
    }
    (spaces.len() + 1, failures)
}
