//! The dimension game. Player B picks a nondecreasing sequence of demands
//! `r_1 <= r_2 <= ...`; in round `n` player A answers with a cover by `k_n`
//! families, family `i` being `r_i`-disjoint for `i <= n` and
//! `r_n`-disjoint beyond, all bounded by `D`. A wins in round `n` when
//! `k_n = n`. Here A is the solver and always plays the least feasible `k`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::covers::{check_s_cover, extend_demands, solve_s_cover, SCover, SolveMode, SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::spaces::FiniteMetricSpace;
use crate::trees::{FinTree, Seq};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Label of the space the game is played on.
    pub space: String,
    #[serde(rename = "D")]
    pub bound: u64,
    pub kcap: usize,
    pub rmax: u64,
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

impl GameConfig {
    pub fn new(space: &FiniteMetricSpace, bound: u64, kcap: usize, rmax: u64) -> Self {
        GameConfig {
            space: space.label().to_string(),
            bound,
            kcap,
            rmax,
            mode: SolveMode::Exact,
            budget_nodes: default_budget(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bound == 0 || self.kcap == 0 || self.rmax == 0 {
            return Err(Error::InvalidConfig("D, kcap and rmax must be at least 1".into()));
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameStatus {
    Ongoing,
    AWins,
    BWins,
    /// The solver ran out of budget inside a round.
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub r: u64,
    /// A's family count; absent while the round is pending or when A had no
    /// answer within `kcap`.
    pub k: Option<usize>,
    pub cover: Option<SCover>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub config: GameConfig,
    pub rounds: Vec<Round>,
    pub status: GameStatus,
    /// First round (1-based) whose least `k` does not depend on B's legal choice.
    pub stabilization_round: Option<usize>,
    pub stabilization_k: Option<usize>,
}

impl GameTranscript {
    pub fn demands(&self) -> Vec<u64> {
        self.rounds.iter().map(|r| r.r).collect()
    }

    pub fn pending(&self) -> bool {
        self.rounds.last().is_some_and(|r| r.k.is_none() && r.cover.is_none()) && self.status == GameStatus::Ongoing
    }

    pub fn is_over(&self) -> bool {
        self.status != GameStatus::Ongoing
    }
}

pub fn new_game(space: &FiniteMetricSpace, cfg: GameConfig) -> Result<GameTranscript> {
    cfg.validate()?;
    if cfg.space != space.label() {
        return Err(Error::SpaceMismatch {
            expected: cfg.space.clone(),
            found: space.label().to_string(),
        });
    }
    Ok(GameTranscript {
        config: cfg,
        rounds: Vec::new(),
        status: GameStatus::Ongoing,
        stabilization_round: None,
        stabilization_k: None,
    })
}

/// Opens a round with B's demand `r`.
pub fn b_move(g: &mut GameTranscript, r: u64) -> Result<()> {
    if g.is_over() {
        return Err(Error::Game(format!("game already ended ({:?})", g.status)));
    }
    if g.pending() {
        return Err(Error::Game("previous round still awaits A".into()));
    }
    if r == 0 {
        return Err(Error::Game("r must be at least 1".into()));
    }
    if r > g.config.rmax {
        return Err(Error::Game(format!("r = {r} exceeds rmax = {}", g.config.rmax)));
    }
    if let Some(prev) = g.rounds.last() {
        if r < prev.r {
            return Err(Error::Game(format!("r = {r} is below the previous choice {}", prev.r)));
        }
    }
    g.rounds.push(Round {
        r,
        k: None,
        cover: None,
    });
    Ok(())
}

/// Least `k` in `[|r|, kcap]` with an s-cover for `r` extended to length
/// `k`. `Ok(None)` when no `k` works, `Err(Error::Unknown)` on budget
/// exhaustion.
pub fn least_k(
    space: &FiniteMetricSpace,
    r: &[u64],
    bound: u64,
    kcap: usize,
    opts: &SolveOptions,
) -> Result<Option<(usize, SCover)>> {
    for k in r.len()..=kcap {
        let res = solve_s_cover(space, &extend_demands(r, k), bound, opts)?;
        match res.status {
            SolveStatus::Sat => return Ok(Some((k, res.witness.expect("SAT has a witness")))),
            SolveStatus::Unsat => {}
            SolveStatus::Unknown if opts.mode == SolveMode::Exact => {
                return Err(Error::Unknown(format!("budget exhausted at r = {r:?}, k = {k}")));
            }
            SolveStatus::Unknown => {}
        }
    }
    Ok(None)
}

/// A answers the pending round with the least feasible family count.
pub fn a_respond(g: &mut GameTranscript, space: &FiniteMetricSpace) -> Result<()> {
    if !g.pending() {
        return Err(Error::Game("no round awaits A".into()));
    }
    if space.label() != g.config.space {
        return Err(Error::SpaceMismatch {
            expected: g.config.space.clone(),
            found: space.label().to_string(),
        });
    }
    let r = g.demands();
    let n = r.len();
    let opts = g.config.solve_options();
    match least_k(space, &r, g.config.bound, g.config.kcap, &opts) {
        Ok(Some((k, cover))) => {
            let round = g.rounds.last_mut().unwrap();
            round.k = Some(k);
            round.cover = Some(cover);
            if k == n {
                g.status = GameStatus::AWins;
            }
        }
        Ok(None) => g.status = GameStatus::BWins,
        Err(Error::Unknown(_)) => {
            g.status = GameStatus::Aborted;
            return Ok(());
        }
        Err(e) => return Err(e),
    }
    if g.stabilization_round.is_none() {
        if let Some(k) = sweep_round(space, &g.config, &r[..n - 1])? {
            g.stabilization_round = Some(n);
            g.stabilization_k = k;
        }
    }
    Ok(())
}

/// B plays `r`, A answers.
pub fn play_round(g: &mut GameTranscript, space: &FiniteMetricSpace, r: u64) -> Result<()> {
    b_move(g, r)?;
    a_respond(g, space)
}

/// If A's least `k` is the same for every legal next choice after `prefix`,
/// returns that common value (`Some(None)` when no choice admits an answer).
fn sweep_round(space: &FiniteMetricSpace, cfg: &GameConfig, prefix: &[u64]) -> Result<Option<Option<usize>>> {
    let lo = prefix.last().copied().unwrap_or(1);
    let opts = cfg.solve_options();
    let mut common: Option<Option<usize>> = None;
    let mut r = prefix.to_vec();
    r.push(lo);
    for choice in lo..=cfg.rmax {
        *r.last_mut().unwrap() = choice;
        let k = match least_k(space, &r, cfg.bound, cfg.kcap, &opts) {
            Ok(v) => v.map(|(k, _)| k),
            Err(Error::Unknown(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match common {
            None => common = Some(k),
            Some(c) if c != k => return Ok(None),
            Some(_) => {}
        }
    }
    Ok(common)
}

/// First recorded round at which A's least `k` is invariant over B's legal
/// choices `r ∈ [r_{n-1}, rmax]` (`[1, rmax]` in round 1).
pub fn is_stabilized(g: &GameTranscript, space: &FiniteMetricSpace) -> Result<Option<usize>> {
    if g.status == GameStatus::Aborted {
        return Ok(None);
    }
    let r = g.demands();
    for n in 1..=r.len() {
        if sweep_round(space, &g.config, &r[..n - 1])?.is_some() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub ok: bool,
    /// 1-based round of the first violation.
    pub round: Option<usize>,
    pub violation: Option<String>,
}

impl TranscriptReport {
    fn fail(round: Option<usize>, msg: impl Into<String>) -> Self {
        TranscriptReport {
            ok: false,
            round,
            violation: Some(msg.into()),
        }
    }
}

/// Checks the rules on a transcript. With `space` the attached covers are
/// also checked.
pub fn validate_transcript(g: &GameTranscript, space: Option<&FiniteMetricSpace>) -> Result<TranscriptReport> {
    let cfg = &g.config;
    let mut prev = 0;
    let last = g.rounds.len();
    for (i, round) in g.rounds.iter().enumerate() {
        let n = i + 1;
        if round.r == 0 || round.r > cfg.rmax {
            return Ok(TranscriptReport::fail(
                Some(n),
                format!("r = {} outside [1, rmax]", round.r),
            ));
        }
        if round.r < prev {
            return Ok(TranscriptReport::fail(
                Some(n),
                format!("r decreases from {prev} to {}", round.r),
            ));
        }
        prev = round.r;
        let final_round = n == last;
        match (&round.k, &round.cover) {
            (Some(k), Some(cover)) => {
                let k = *k;
                if k < n || k > cfg.kcap {
                    return Ok(TranscriptReport::fail(Some(n), format!("k = {k} outside [{n}, kcap]")));
                }
                if cover.families.len() != k {
                    return Ok(TranscriptReport::fail(
                        Some(n),
                        format!("k = {k} but the cover has {} families", cover.families.len()),
                    ));
                }
                let r: Vec<u64> = g.rounds[..n].iter().map(|x| x.r).collect();
                if cover.s != extend_demands(&r, k) || cover.bound != cfg.bound {
                    return Ok(TranscriptReport::fail(Some(n), "cover demands do not match the round"));
                }
                if let Some(space) = space {
                    let report = check_s_cover(space, cover)?;
                    if !report.ok {
                        return Ok(TranscriptReport::fail(
                            Some(n),
                            format!("invalid cover: {:?}", report.violation),
                        ));
                    }
                }
                if k == n && !final_round {
                    return Ok(TranscriptReport::fail(Some(n), "play continued after A won"));
                }
                if k == n && g.status != GameStatus::AWins {
                    return Ok(TranscriptReport::fail(Some(n), "k = n but status is not a-wins"));
                }
                if final_round && g.status == GameStatus::AWins && k != n {
                    return Ok(TranscriptReport::fail(Some(n), "a-wins but final k differs from n"));
                }
            }
            (None, None) => {
                if !final_round {
                    return Ok(TranscriptReport::fail(Some(n), "unanswered round before the last"));
                }
                if !matches!(g.status, GameStatus::Ongoing | GameStatus::BWins | GameStatus::Aborted) {
                    return Ok(TranscriptReport::fail(
                        Some(n),
                        "unanswered final round with a decided status",
                    ));
                }
            }
            _ => return Ok(TranscriptReport::fail(Some(n), "k and cover must come together")),
        }
    }
    if g.status == GameStatus::AWins && g.rounds.last().and_then(|r| r.k) != Some(last) {
        return Ok(TranscriptReport::fail(None, "a-wins without a final k = n"));
    }
    if g.status == GameStatus::BWins && g.rounds.last().is_none_or(|r| r.k.is_some()) {
        return Ok(TranscriptReport::fail(None, "b-wins without an unanswerable round"));
    }
    Ok(TranscriptReport {
        ok: true,
        round: None,
        violation: None,
    })
}

/// Every B prefix of length at most `lmax` (nondecreasing, entries at most
/// `rmax`) after which A has not yet won, found by playing all games. The
/// empty prefix is included when the space is nonempty.
pub fn defeated_b_prefixes(space: &FiniteMetricSpace, cfg: &GameConfig, lmax: usize) -> Result<FinTree> {
    let mut nodes: BTreeSet<Seq> = BTreeSet::new();
    if space.is_empty() {
        return FinTree::new(nodes);
    }
    nodes.insert(Vec::new());
    let mut stack = vec![new_game(space, cfg.clone())?];
    while let Some(game) = stack.pop() {
        if game.rounds.len() == lmax {
            continue;
        }
        let lo = game.rounds.last().map_or(1, |r| r.r);
        for r in lo..=cfg.rmax {
            let mut next = game.clone();
            play_round(&mut next, space, r)?;
            match next.status {
                GameStatus::AWins => {}
                GameStatus::Aborted => {
                    return Err(Error::Unknown(format!("game aborted at {:?}", next.demands())));
                }
                GameStatus::Ongoing | GameStatus::BWins => {
                    nodes.insert(next.demands());
                    if next.status == GameStatus::Ongoing {
                        stack.push(next);
                    }
                }
            }
        }
    }
    FinTree::new(nodes)
}
