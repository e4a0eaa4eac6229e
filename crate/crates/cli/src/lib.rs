//! Command line front end and HTTP session service for `coarsebench-core`.
//!
//! [`run`] dispatches an argument vector and returns the exit code: 0 on
//! success (an UNSAT verdict is a success), 1 when a check or suite fails,
//! 2 on usage or input errors.

pub mod service;

use std::fs;
use std::io::{BufRead, Write};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use coarsebench_core::canon::{to_canonical_pretty, to_canonical_string};
use coarsebench_core::covers::{
    brick_cover, check_s_cover, glue_covers, solve_s_cover, trace_cover, transport_cover, BrickCover, GlueInput,
    SCover, SolveMode, SolveOptions,
};
use coarsebench_core::experiment::{check_monotone, render_table, run_cupc, CupcConfig};
use coarsebench_core::game::{
    a_respond, b_move, new_game, validate_transcript, GameConfig, GameStatus, GameTranscript,
};
use coarsebench_core::oracles::{exhaustive_cover_oracle, run_suites};
use coarsebench_core::spaces::{
    build_asymptotic_sum, build_cup_c_space, build_grid_space, greedy_r_net, CoarseMap, CoarseMapJson,
    FiniteMetricSpace, GridMetric, PointId, DEFAULT_POINT_CAP,
};
use coarsebench_core::trees::{
    empirical_dim_tree, kb_sort, ord_set, rank_kb, rank_levels, rank_recursive, subtree_matrix, ta_tree,
    EmpiricalTreeConfig, FinTree, OrdSet, Variant,
};
use coarsebench_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "coarsebench",
    version,
    about = "Finite shadows of transfinite asymptotic dimension"
)]
pub struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, inspect and validate spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Solve, check and transform covers.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Tree ranks, orders and empirical dimension trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Play the dimension game.
    #[command(subcommand)]
    Game(GameCmd),
    /// Brute-force oracle and property suites.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Experiment harnesses.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    Taxicab,
    Chebyshev,
}

impl From<MetricArg> for GridMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Taxicab => GridMetric::Taxicab,
            MetricArg::Chebyshev => GridMetric::Chebyshev,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Heuristic,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SolveMode::Exact,
            ModeArg::Heuristic => SolveMode::Heuristic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Any,
    Nondecreasing,
    StrictlyIncreasing,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Any => Variant::Any,
            VariantArg::Nondecreasing => Variant::Nondecreasing,
            VariantArg::StrictlyIncreasing => Variant::StrictlyIncreasing,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    /// `k Z^n` inside `[-box, box]^n`.
    Grid {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        scale: u64,
        #[arg(long = "box")]
        r#box: u64,
        #[arg(long, value_enum, default_value = "taxicab")]
        metric: MetricArg,
        #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
        cap: usize,
    },
    /// Truncated union of lattices `c_1 Z ⊕ ... ⊕ c_n Z`.
    Cupc {
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "box")]
        r#box: u64,
        #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
        cap: usize,
    },
    /// Asymptotic sum of the given spaces.
    Sum {
        #[arg(long, value_delimiter = ',', required = true)]
        parts: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        basepoints: Vec<PointId>,
        #[arg(long, value_delimiter = ',', required = true)]
        gaps: Vec<u64>,
    },
    /// Greedy r-net and its retraction.
    Net {
        #[arg(long)]
        space: String,
        #[arg(long)]
        r: u64,
    },
    /// Restriction to the listed point ids.
    Subspace {
        #[arg(long)]
        space: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<PointId>,
    },
    /// Point count, diameter and metric kind.
    Info {
        #[arg(long)]
        space: String,
    },
    /// Check the metric axioms.
    Validate {
        #[arg(long)]
        space: String,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = SolveOptions::default().budget_nodes)]
    pub budget_nodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            mode: self.mode.into(),
            budget_nodes: self.budget_nodes,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum CoverCmd {
    /// Decide whether an s-cover with bound D exists.
    Solve {
        #[arg(long)]
        space: String,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u64>,
        #[arg(long)]
        bound: u64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Check a cover against its declared demands and bound.
    Check {
        #[arg(long)]
        space: String,
        #[arg(long)]
        cover: String,
    },
    /// Push a cover forward along a coarse map.
    Transport {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        map: String,
        #[arg(long)]
        cover: String,
        /// Bound of the input cover; defaults to its declared D.
        #[arg(long)]
        e: Option<u64>,
    },
    /// Glue covers of subsets into a cover of their union.
    Glue {
        #[arg(long)]
        space: String,
        #[arg(long)]
        input: String,
    },
    /// Brick cover of a box in Z^n.
    Brick {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: u64,
        #[arg(long = "box")]
        r#box: u64,
        #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
        cap: usize,
    },
    /// Trace of a cover on a subset.
    Trace {
        #[arg(long)]
        space: String,
        #[arg(long)]
        cover: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<PointId>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TreeCmd {
    /// Rank of a tree computed three ways.
    Rank {
        #[arg(long)]
        tree: String,
    },
    /// Nodes in Kleene-Brouwer order.
    KbSort {
        #[arg(long)]
        tree: String,
    },
    /// Tree of sequences without a cover at the given caps.
    Empirical {
        #[arg(long)]
        space: String,
        #[arg(long)]
        rmax: u64,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        bound: u64,
        #[arg(long, value_enum, default_value = "any")]
        variant: VariantArg,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Subtree below a node.
    Matrix {
        #[arg(long)]
        tree: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        root: Vec<u64>,
    },
    /// `Ord` of a set system and the rank of its increasing tree.
    Ord {
        #[arg(long)]
        members: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum GameCmd {
    /// Play a game with the solver as player A.
    Play {
        #[arg(long)]
        space: String,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        kcap: usize,
        #[arg(long)]
        rmax: u64,
        /// B's choices, one per round.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "interactive",
            required_unless_present = "interactive"
        )]
        b_script: Vec<u64>,
        /// Read B's choices from standard input.
        #[arg(long)]
        interactive: bool,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Check a transcript against the rules.
    Validate {
        #[arg(long)]
        transcript: String,
        #[arg(long)]
        space: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Run one suite or `all`.
    Run {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
    /// Decide a tiny instance by exhaustive enumeration.
    Check {
        #[arg(long)]
        space: String,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u64>,
        #[arg(long)]
        bound: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Minimal cover sizes on a truncated union of lattices.
    Cupc {
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<u64>,
        #[arg(long = "box")]
        r#box: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        bound: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<u64>,
        #[arg(long)]
        kcap: Option<usize>,
        #[arg(long)]
        lower_box: Option<u64>,
        #[arg(long)]
        budget_nodes: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Extra space files to register.
    #[arg(long)]
    pub space: Vec<String>,
}

/// Failure kinds mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource { .. } | Error::Unknown(_) | Error::Inconsistent(_) => CliError::Failed(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Io<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    pretty: bool,
}

impl Io<'_> {
    fn read_text(&mut self, path: &str) -> CliResult<String> {
        if path == "-" {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut self.input, &mut s)
                .map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
            return Ok(s);
        }
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
    }

    fn read_json<T: DeserializeOwned>(&mut self, path: &str) -> CliResult<T> {
        let text = self.read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("parsing {path}: {e}")))
    }

    fn space(&mut self, path: &str) -> CliResult<FiniteMetricSpace> {
        self.read_json(path)
    }

    fn emit<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        let text = if self.pretty {
            to_canonical_pretty(value)
        } else {
            to_canonical_string(value)
        }
        .map_err(CliError::from)?;
        self.line(&text)
    }

    fn line(&mut self, text: &str) -> CliResult<()> {
        writeln!(self.out, "{text}").map_err(|e| CliError::Failed(format!("writing output: {e}")))
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
        let _ = self.err.flush();
    }
}

/// Runs the command line with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut io = Io {
        input,
        out,
        err,
        pretty: cli.pretty,
    };
    match dispatch(cli.command, &mut io) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Failed(msg)) = &e;
            io.note(&format!("error: {msg}"));
            e.code()
        }
    }
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        Command::Space(c) => space_cmd(c, io),
        Command::Cover(c) => cover_cmd(c, io),
        Command::Tree(c) => tree_cmd(c, io),
        Command::Game(c) => game_cmd(c, io),
        Command::Oracle(c) => oracle_cmd(c, io),
        Command::Experiment(c) => experiment_cmd(c, io),
        Command::Serve(a) => serve_cmd(a, io),
    }
}

fn space_cmd(cmd: SpaceCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        SpaceCmd::Grid {
            n,
            scale,
            r#box,
            metric,
            cap,
        } => io.emit(&build_grid_space(n, scale, r#box, metric.into(), cap)?),
        SpaceCmd::Cupc { c, n, r#box, cap } => io.emit(&build_cup_c_space(&c, n.unwrap_or(c.len()), r#box, cap)?),
        SpaceCmd::Sum {
            parts,
            basepoints,
            gaps,
        } => {
            let spaces = parts.iter().map(|p| io.space(p)).collect::<CliResult<Vec<_>>>()?;
            io.emit(&build_asymptotic_sum(&spaces, &basepoints, &gaps)?)
        }
        SpaceCmd::Net { space, r } => {
            let x = io.space(&space)?;
            let (net, map) = greedy_r_net(&x, r)?;
            io.emit(&serde_json::json!({ "net": net, "map": map.to_json() }))
        }
        SpaceCmd::Subspace { space, ids } => {
            let x = io.space(&space)?;
            io.emit(&x.subspace(&ids)?)
        }
        SpaceCmd::Info { space } => {
            let x = io.space(&space)?;
            let kind = match x.lattice_metric() {
                Some(GridMetric::Taxicab) => "taxicab",
                Some(GridMetric::Chebyshev) => "chebyshev",
                None => "matrix",
            };
            io.emit(&serde_json::json!({
                "label": x.label(),
                "points": x.len(),
                "dim": x.dim(),
                "diameter": x.diameter(),
                "metric": kind,
            }))
        }
        SpaceCmd::Validate { space } => {
            // parsing already validates; report rather than fail on a bad metric
            let text = io.read_text(&space)?;
            match serde_json::from_str::<FiniteMetricSpace>(&text) {
                Ok(x) => io.emit(&serde_json::json!({ "ok": true, "label": x.label(), "points": x.len() })),
                Err(e) => {
                    io.emit(&serde_json::json!({ "ok": false, "violation": e.to_string() }))?;
                    Err(CliError::Failed("space is invalid".into()))
                }
            }
        }
    }
}

#[derive(Serialize)]
struct BrickOut<'a> {
    #[serde(flatten)]
    brick: &'a BrickCover,
    points: usize,
    valid: bool,
}

fn cover_cmd(cmd: CoverCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        CoverCmd::Solve { space, s, bound, solve } => {
            let x = io.space(&space)?;
            io.emit(&solve_s_cover(&x, &s, bound, &solve.options())?)
        }
        CoverCmd::Check { space, cover } => {
            let x = io.space(&space)?;
            let c: SCover = io.read_json(&cover)?;
            let report = check_s_cover(&x, &c)?;
            io.emit(&report)?;
            if report.ok {
                Ok(())
            } else {
                Err(CliError::Failed("cover check failed".into()))
            }
        }
        CoverCmd::Transport {
            source,
            target,
            map,
            cover,
            e,
        } => {
            let x = Arc::new(io.space(&source)?);
            let y = Arc::new(io.space(&target)?);
            let mj: CoarseMapJson = io.read_json(&map)?;
            let m = CoarseMap::from_json(&mj, x, y)?;
            let c: SCover = io.read_json(&cover)?;
            let e = e.unwrap_or(c.bound);
            io.emit(&transport_cover(&c, &m, e)?)
        }
        CoverCmd::Glue { space, input } => {
            let x = io.space(&space)?;
            let g: GlueInput = io.read_json(&input)?;
            io.emit(&glue_covers(&x, &g)?)
        }
        CoverCmd::Brick { n, r, r#box, cap } => {
            let (x, brick) = brick_cover(n, r, r#box, cap)?;
            let valid = check_s_cover(&x, &brick.cover)?.ok;
            io.emit(&BrickOut {
                brick: &brick,
                points: x.len(),
                valid,
            })?;
            if valid {
                Ok(())
            } else {
                Err(CliError::Failed("brick cover failed its check".into()))
            }
        }
        CoverCmd::Trace { space, cover, ids } => {
            let x = io.space(&space)?;
            let c: SCover = io.read_json(&cover)?;
            let (sub, traced) = trace_cover(&x, &c, &ids)?;
            io.emit(&serde_json::json!({ "space": sub, "cover": traced }))
        }
    }
}

fn tree_cmd(cmd: TreeCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        TreeCmd::Rank { tree } => {
            let t: FinTree = io.read_json(&tree)?;
            io.emit(&serde_json::json!({
                "nodes": t.len(),
                "rank": rank_recursive(&t),
                "rank_levels": rank_levels(&t),
                "rank_kb": rank_kb(&t),
            }))
        }
        TreeCmd::KbSort { tree } => {
            let t: FinTree = io.read_json(&tree)?;
            io.emit(&serde_json::json!({ "order": kb_sort(t.nodes().iter()) }))
        }
        TreeCmd::Empirical {
            space,
            rmax,
            lmax,
            bound,
            variant,
            solve,
        } => {
            let x = io.space(&space)?;
            let mut cfg = EmpiricalTreeConfig::new(rmax, lmax, bound, variant.into());
            cfg.mode = solve.mode.into();
            cfg.budget_nodes = solve.budget_nodes;
            cfg.seed = solve.seed;
            io.emit(&empirical_dim_tree(&x, &cfg)?)
        }
        TreeCmd::Matrix { tree, root } => {
            let t: FinTree = io.read_json(&tree)?;
            io.emit(&subtree_matrix(&t, &root)?)
        }
        TreeCmd::Ord { members } => {
            let m: OrdSet = io.read_json(&members)?;
            let ta = ta_tree(&m);
            io.emit(&serde_json::json!({
                "ord": ord_set(&m),
                "ta_rank": rank_recursive(&ta),
                "ta_nodes": ta.len(),
            }))
        }
    }
}

fn game_config(space: &FiniteMetricSpace, bound: u64, kcap: usize, rmax: u64, solve: &SolveArgs) -> GameConfig {
    let mut cfg = GameConfig::new(space, bound, kcap, rmax);
    cfg.mode = solve.mode.into();
    cfg.budget_nodes = solve.budget_nodes;
    cfg.seed = solve.seed;
    cfg
}

fn round_note(g: &GameTranscript) -> String {
    let n = g.rounds.len();
    let round = &g.rounds[n - 1];
    let k = round.k.map_or("none".to_string(), |k| k.to_string());
    let status = match g.status {
        GameStatus::Ongoing => "ongoing",
        GameStatus::AWins => "A wins",
        GameStatus::BWins => "B wins",
        GameStatus::Aborted => "aborted",
    };
    format!("round {n}: r = {}, k = {k}, {status}", round.r)
}

fn game_cmd(cmd: GameCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        GameCmd::Play {
            space,
            bound,
            kcap,
            rmax,
            b_script,
            interactive,
            solve,
        } => {
            let x = io.space(&space)?;
            let mut g = new_game(&x, game_config(&x, bound, kcap, rmax, &solve))?;
            if interactive {
                loop {
                    if g.is_over() {
                        break;
                    }
                    let _ = write!(io.err, "round {}: r = ", g.rounds.len() + 1);
                    let _ = io.err.flush();
                    let mut line = String::new();
                    let read = io
                        .input
                        .read_line(&mut line)
                        .map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
                    let line = line.trim();
                    if read == 0 || line.is_empty() || line == "q" {
                        io.note("");
                        break;
                    }
                    let r = match line.parse::<u64>() {
                        Ok(r) => r,
                        Err(_) => {
                            io.note(&format!("not a number: {line}"));
                            continue;
                        }
                    };
                    if let Err(e) = b_move(&mut g, r) {
                        io.note(&e.to_string());
                        continue;
                    }
                    a_respond(&mut g, &x)?;
                    io.note(&round_note(&g));
                }
            } else {
                for (i, &r) in b_script.iter().enumerate() {
                    if g.is_over() {
                        io.note(&format!("game over after round {i}; ignoring {:?}", &b_script[i..]));
                        break;
                    }
                    b_move(&mut g, r)?;
                    a_respond(&mut g, &x)?;
                }
            }
            let report = validate_transcript(&g, Some(&x))?;
            io.emit(&g)?;
            if report.ok {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "engine transcript failed validation: {:?}",
                    report.violation
                )))
            }
        }
        GameCmd::Validate { transcript, space } => {
            let g: GameTranscript = io.read_json(&transcript)?;
            let x = space.map(|p| io.space(&p)).transpose()?;
            let report = validate_transcript(&g, x.as_ref())?;
            io.emit(&report)?;
            if report.ok {
                Ok(())
            } else {
                Err(CliError::Failed("transcript is invalid".into()))
            }
        }
    }
}

fn oracle_cmd(cmd: OracleCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        OracleCmd::Run {
            suite,
            seed,
            trials,
            json,
        } => {
            let reports = run_suites(&suite, seed, trials)?;
            if json {
                io.emit(&reports)?;
            } else {
                for r in &reports {
                    let verdict = if r.pass { "PASS" } else { "FAIL" };
                    io.line(&format!(
                        "{verdict} {} seed={} trials={} failures={}",
                        r.suite,
                        r.seed,
                        r.trials,
                        r.failures.len()
                    ))?;
                    for f in &r.failures {
                        io.line(&format!("  {} trial={} repro={}", f.digest, f.trial, f.repro))?;
                    }
                }
            }
            if reports.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(CliError::Failed("suite failures".into()))
            }
        }
        OracleCmd::Check { space, s, bound } => {
            let x = io.space(&space)?;
            io.emit(&exhaustive_cover_oracle(&x, &s, bound)?)
        }
    }
}

fn experiment_cmd(cmd: ExperimentCmd, io: &mut Io<'_>) -> CliResult<()> {
    match cmd {
        ExperimentCmd::Cupc {
            c,
            r#box,
            n,
            bound,
            r,
            kcap,
            lower_box,
            budget_nodes,
            seed,
            json,
        } => {
            let mut cfg = CupcConfig::new(c, r#box);
            if let Some(n) = n {
                cfg.n = n;
            }
            if !bound.is_empty() {
                cfg.bounds = bound;
            }
            if !r.is_empty() {
                cfg.radii = r;
            }
            if let Some(k) = kcap {
                cfg.kcap = k;
            }
            if let Some(b) = lower_box {
                cfg.lower_box = b;
            }
            if let Some(b) = budget_nodes {
                cfg.budget_nodes = b;
            }
            cfg.seed = seed;
            let report = run_cupc(&cfg)?;
            if json {
                io.emit(&report)?;
            } else {
                let table = render_table(&report);
                io.line(table.trim_end())?;
            }
            if check_monotone(&report) {
                Ok(())
            } else {
                Err(CliError::Failed("reported k is not monotone".into()))
            }
        }
    }
}

fn serve_cmd(args: ServeArgs, io: &mut Io<'_>) -> CliResult<()> {
    let state = service::AppState::with_builtin_spaces();
    for path in &args.space {
        let x = io.space(path)?;
        state
            .register(x)
            .map_err(|e| CliError::Usage(format!("{path}: {}", e.detail)))?;
    }
    let addr = format!("{}:{}", args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Failed(format!("runtime: {e}")))?;
    io.note(&format!("listening on http://{addr}"));
    runtime
        .block_on(service::serve(&addr, state))
        .map_err(|e| CliError::Failed(format!("serve: {e}")))
}
