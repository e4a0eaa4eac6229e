//! Brute-force verifiers and seeded property suites.
//!
//! [`exhaustive_cover_oracle`] decides cover feasibility by listing every
//! partition of the points into sets and every way of distributing the sets
//! among families, checking each candidate only once it is complete.

mod gen;
mod suites;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canon::to_canonical_string;
use crate::covers::{SCover, SetFamily};
use crate::error::{Error, Result};
use crate::spaces::FiniteMetricSpace;

pub use gen::{random_grid_subset, random_tree, small_trees};

pub const ORACLE_POINT_CAP: usize = 10;
pub const ORACLE_FAMILY_CAP: usize = 2;
pub const ORACLE_BOUND_CAP: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    pub witness: Option<SCover>,
    /// Complete candidates examined.
    pub candidates: u64,
}

pub fn exhaustive_cover_oracle(space: &FiniteMetricSpace, s: &[u64], bound: u64) -> Result<OracleResult> {
    let n = space.len();
    if n > ORACLE_POINT_CAP {
        return Err(Error::Resource {
            what: "oracle points",
            count: n as u128,
            cap: ORACLE_POINT_CAP as u128,
        });
    }
    if s.len() > ORACLE_FAMILY_CAP {
        return Err(Error::Resource {
            what: "oracle families",
            count: s.len() as u128,
            cap: ORACLE_FAMILY_CAP as u128,
        });
    }
    if bound > ORACLE_BOUND_CAP {
        return Err(Error::Resource {
            what: "oracle bound",
            count: bound as u128,
            cap: ORACLE_BOUND_CAP as u128,
        });
    }
    let mut oracle = Oracle {
        space,
        s,
        bound,
        block: vec![0; n],
        candidates: 0,
    };
    let found = oracle.partitions(0, 0);
    let witness = found.map(|(blocks, colors)| {
        let mut families = vec![SetFamily::default(); s.len()];
        for (b, &c) in colors.iter().enumerate() {
            let set = (0..n).filter(|&i| blocks[i] == b).map(|i| space.id(i)).collect();
            families[c].sets.push(set);
        }
        SCover {
            space: space.label().to_string(),
            s: s.to_vec(),
            bound,
            families,
        }
        .normalized()
    });
    Ok(OracleResult {
        verdict: if witness.is_some() {
            OracleVerdict::Sat
        } else {
            OracleVerdict::Unsat
        },
        witness,
        candidates: oracle.candidates,
    })
}

struct Oracle<'a> {
    space: &'a FiniteMetricSpace,
    s: &'a [u64],
    bound: u64,
    /// Restricted growth string: block of each point.
    block: Vec<usize>,
    candidates: u64,
}

impl Oracle<'_> {
    fn partitions(&mut self, i: usize, blocks: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        if i == self.block.len() {
            return self.colorings(blocks);
        }
        for b in 0..=blocks {
            self.block[i] = b;
            let next = if b == blocks { blocks + 1 } else { blocks };
            if let Some(found) = self.partitions(i + 1, next) {
                return Some(found);
            }
        }
        None
    }

    fn colorings(&mut self, blocks: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let fams = self.s.len();
        let total = (fams as u64).pow(blocks as u32);
        let mut colors = vec![0; blocks];
        for code in 0..total {
            let mut c = code;
            for slot in colors.iter_mut() {
                *slot = (c % fams as u64) as usize;
                c /= fams as u64;
            }
            self.candidates += 1;
            if self.valid(&colors) {
                return Some((self.block.clone(), colors));
            }
        }
        None
    }

    fn valid(&self, colors: &[usize]) -> bool {
        let n = self.block.len();
        for i in 0..n {
            for j in i + 1..n {
                let (bi, bj) = (self.block[i], self.block[j]);
                let d = self.space.dist(i, j);
                if bi == bj {
                    if d > self.bound {
                        return false;
                    }
                } else if colors[bi] == colors[bj] && d < self.s[colors[bi]] {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SolverVsOracle,
    RankEquivalence,
    OrdVsTa,
    KbOrder,
    TEmbedding,
    FraktalMonotone,
    GameEqualsTree,
    GlueRoundtrip,
    TransportLemma,
    UniformSeparation,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::SolverVsOracle,
        Suite::RankEquivalence,
        Suite::OrdVsTa,
        Suite::KbOrder,
        Suite::TEmbedding,
        Suite::FraktalMonotone,
        Suite::GameEqualsTree,
        Suite::GlueRoundtrip,
        Suite::TransportLemma,
        Suite::UniformSeparation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SolverVsOracle => "solver-vs-oracle",
            Suite::RankEquivalence => "rank-equivalence",
            Suite::OrdVsTa => "ord-vs-ta",
            Suite::KbOrder => "kb-order",
            Suite::TEmbedding => "t-embedding",
            Suite::FraktalMonotone => "fraktal-monotone",
            Suite::GameEqualsTree => "game-equals-tree",
            Suite::GlueRoundtrip => "glue-roundtrip",
            Suite::TransportLemma => "transport-lemma",
            Suite::UniformSeparation => "uniform-separation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

/// Resolves `all` or a single suite name.
pub fn parse_suites(name: &str) -> Result<Vec<Suite>> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// First 16 hex digits of the SHA-256 of the canonical repro JSON.
    pub digest: String,
    pub trial: usize,
    pub expected: serde_json::Value,
    pub got: serde_json::Value,
    /// Smallest failing input found by greedy shrinking.
    pub repro: serde_json::Value,
}

impl Failure {
    pub fn new(trial: usize, repro: serde_json::Value, expected: serde_json::Value, got: serde_json::Value) -> Self {
        let text = to_canonical_string(&repro).unwrap_or_default();
        let hash = Sha256::digest(text.as_bytes());
        let digest = hash.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Failure {
            digest,
            trial,
            expected,
            got,
            repro,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    /// Checks actually run; fixed suites ignore the requested count.
    pub trials: usize,
    pub failures: Vec<Failure>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64, trials: usize, mut failures: Vec<Failure>) -> Self {
        failures.sort_by_key(|f| f.trial);
        SuiteReport {
            suite,
            seed,
            trials,
            pass: failures.is_empty(),
            failures,
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> SuiteReport {
    let (ran, failures) = match suite {
        Suite::SolverVsOracle => suites::solver_vs_oracle(seed, trials),
        Suite::RankEquivalence => suites::rank_equivalence(seed, trials),
        Suite::OrdVsTa => suites::ord_vs_ta(seed, trials),
        Suite::KbOrder => suites::kb_order(seed, trials),
        Suite::TEmbedding => suites::t_embedding(seed, trials),
        Suite::FraktalMonotone => suites::fraktal_monotone(seed, trials),
        Suite::GameEqualsTree => suites::game_equals_tree(),
        Suite::GlueRoundtrip => suites::glue_roundtrip(seed, trials),
        Suite::TransportLemma => suites::transport_lemma(seed, trials),
        Suite::UniformSeparation => suites::uniform_separation(),
    };
    SuiteReport::new(suite, seed, ran, failures)
}

pub fn run_suites(name: &str, seed: u64, trials: usize) -> Result<Vec<SuiteReport>> {
    Ok(parse_suites(name)?
        .into_iter()
        .map(|s| run_suite(s, seed, trials))
        .collect())
}

/// Independent stream per trial so trials can run in any order.
pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `f` for every trial index across threads; results are merged by index.
pub(crate) fn run_trials<F>(seed: u64, trials: usize, f: F) -> Vec<Failure>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Option<Failure> + Sync,
{
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .clamp(1, trials.max(1));
    let mut out: Vec<Failure> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                scope.spawn(move || {
                    (t..trials)
                        .step_by(threads)
                        .filter_map(|i| f(i, &mut trial_rng(seed, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("trial thread panicked"))
            .collect()
    });
    out.sort_by_key(|f| f.trial);
    out
}

/// Greedy shrinking: keeps taking the first smaller candidate that still fails.
pub(crate) fn minimize<T: Clone>(input: T, shrink: impl Fn(&T) -> Vec<T>, fails: impl Fn(&T) -> bool) -> T {
    let mut cur = input;
    'outer: loop {
        for cand in shrink(&cur) {
            if fails(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        return cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_grid_space, GridMetric, DEFAULT_POINT_CAP};

    fn line(s: u64) -> FiniteMetricSpace {
        build_grid_space(1, 1, s, GridMetric::Taxicab, DEFAULT_POINT_CAP).unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            exhaustive_cover_oracle(&line(2), &[2], 2).unwrap().verdict,
            OracleVerdict::Unsat
        );
        let sat = exhaustive_cover_oracle(&line(2), &[2, 2], 2).unwrap();
        assert_eq!(sat.verdict, OracleVerdict::Sat);
        assert!(
            crate::covers::check_s_cover(&line(2), sat.witness.as_ref().unwrap())
                .unwrap()
                .ok
        );
        assert_eq!(
            exhaustive_cover_oracle(&line(0), &[9], 0).unwrap().verdict,
            OracleVerdict::Sat
        );
        assert_eq!(
            exhaustive_cover_oracle(&line(4), &[2], 4).unwrap().verdict,
            OracleVerdict::Unsat
        );
    }

    #[test]
    fn oracle_caps() {
        assert!(matches!(
            exhaustive_cover_oracle(&line(5), &[1], 1),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(
            exhaustive_cover_oracle(&line(1), &[1, 1, 1], 1),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(
            exhaustive_cover_oracle(&line(1), &[1], 7),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn no_families_only_covers_nothing() {
        assert_eq!(
            exhaustive_cover_oracle(&line(1), &[], 3).unwrap().verdict,
            OracleVerdict::Unsat
        );
        let empty = FiniteMetricSpace::from_coords("empty", Vec::new(), GridMetric::Taxicab).unwrap();
        assert_eq!(
            exhaustive_cover_oracle(&empty, &[], 3).unwrap().verdict,
            OracleVerdict::Sat
        );
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), serde_json::json!(s.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!(parse_suites("all").unwrap().len(), 10);
    }

    #[test]
    fn minimize_shrinks() {
        let v = minimize(
            vec![5, 1, 9, 3],
            |v| {
                (0..v.len())
                    .map(|i| {
                        let mut w = v.clone();
                        w.remove(i);
                        w
                    })
                    .collect()
            },
            |v| v.contains(&9),
        );
        assert_eq!(v, vec![9]);
    }
}
