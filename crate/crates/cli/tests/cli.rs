use std::path::PathBuf;

use serde_json::{json, Value};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Out {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn run_with(args: &[&str], stdin: &str) -> Out {
    let mut input = stdin.as_bytes();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["coarsebench"];
    argv.extend_from_slice(args);
    let code = coarsebench_cli::run(argv, &mut input, &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn run(args: &[&str]) -> Out {
    run_with(args, "")
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn line_file(name: &str, s: u64) -> String {
    let out = run(&["space", "grid", "--n", "1", "--box", &s.to_string()]);
    assert_eq!(out.code, 0);
    scratch(name, &out.stdout)
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["bogus"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("bogus"));
    assert_eq!(run(&["space", "grid", "--box", "2"]).code, 2);
    assert_eq!(
        run(&["cover", "solve", "--space", "/no/such/file", "--s", "2", "--bound", "2"]).code,
        2
    );
    assert_eq!(run_with(&["tree", "rank", "--tree", "-"], "not json").code, 2);
    assert_eq!(run(&["oracle", "run", "--suite", "nope"]).code, 2);
    let x = line_file("line2-usage.json", 2);
    assert_eq!(
        run(&[
            "game",
            "play",
            "--space",
            &x,
            "--bound",
            "2",
            "--kcap",
            "0",
            "--rmax",
            "6",
            "--b-script",
            "2"
        ])
        .code,
        2
    );
}

#[test]
fn help_and_version_exit_0() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("Usage"));
    assert_eq!(run(&["game", "play", "--help"]).code, 0);
}

#[test]
fn solve_sat_and_unsat_exit_0() {
    let x = line_file("line2-solve.json", 2);
    let out = run(&["cover", "solve", "--space", &x, "--s", "2", "--bound", "2"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["status"], "UNSAT");
    assert_eq!(out.json()["exactness"], "exact");

    let out = run(&["cover", "solve", "--space", &x, "--s", "2,2", "--bound", "2"]);
    assert_eq!(out.code, 0);
    let v = out.json();
    assert_eq!(v["status"], "SAT");
    let cover = scratch("line2-cover.json", &v["witness"].to_string());
    let out = run(&["cover", "check", "--space", &x, "--cover", &cover]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.json()["ok"], true);

    let mut bad = v["witness"].clone();
    bad["D"] = json!(0);
    let cover = scratch("line2-bad-cover.json", &bad.to_string());
    let out = run(&["cover", "check", "--space", &x, "--cover", &cover]);
    assert_eq!(out.code, 1);
    assert_eq!(out.json()["ok"], false);

    let out = run(&["oracle", "check", "--space", &x, "--s", "2", "--bound", "2"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["verdict"], "UNSAT");
}

#[test]
fn pretty_flag_changes_layout_only() {
    let compact = run(&["space", "grid", "--n", "1", "--box", "1"]);
    let pretty = run(&["--pretty", "space", "grid", "--n", "1", "--box", "1"]);
    assert_eq!(compact.stdout.lines().count(), 1);
    assert!(pretty.stdout.lines().count() > 1);
    assert_eq!(compact.json(), pretty.json());
}

#[test]
fn brick_command_validates() {
    let out = run(&["cover", "brick", "--n", "2", "--r", "2", "--box", "16"]);
    assert_eq!(out.code, 0);
    let v = out.json();
    assert_eq!(v["valid"], true);
    assert_eq!(v["cover"]["families"].as_array().unwrap().len(), 3);
    assert!(v["cover"]["D"].as_u64().unwrap() <= 8 * 2);
}

#[test]
fn tree_commands() {
    let tree = r#"{"nodes":[[],[1],[1,2],[3]]}"#;
    let out = run_with(&["tree", "rank", "--tree", "-"], tree);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.json(),
        json!({"nodes": 4, "rank": 2, "rank_kb": 2, "rank_levels": 2})
    );

    let out = run_with(&["tree", "kb-sort", "--tree", "-"], tree);
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["order"], json!([[1, 2], [1], [3], []]));

    let out = run_with(&["tree", "matrix", "--tree", "-", "--root", "1"], tree);
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["nodes"], json!([[], [2]]));

    let x = line_file("line2-tree.json", 2);
    let out = run(&[
        "tree",
        "empirical",
        "--space",
        &x,
        "--rmax",
        "3",
        "--lmax",
        "2",
        "--bound",
        "2",
    ]);
    assert_eq!(out.code, 0);
    let v = out.json();
    assert_eq!(v["rank"], 1);
    assert!(v["nodes"].as_array().unwrap().contains(&json!([2])));
}

#[test]
fn game_play_script_and_validate() {
    let x = line_file("line8-game.json", 8);
    let out = run(&[
        "game",
        "play",
        "--space",
        &x,
        "--bound",
        "2",
        "--kcap",
        "4",
        "--rmax",
        "6",
        "--b-script",
        "2,4,4",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let g = out.json();
    assert_eq!(g["rounds"][0]["k"], 2);
    assert_eq!(g["status"], "a-wins");
    assert_eq!(g["rounds"].as_array().unwrap().len(), 2);
    assert!(out.stderr.contains("ignoring"));

    let t = scratch("line8-transcript.json", &out.stdout);
    let out = run(&["game", "validate", "--transcript", &t, "--space", &x]);
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["ok"], true);

    let mut bad = g.clone();
    bad["rounds"][0]["k"] = json!(3);
    let out = run_with(&["game", "validate", "--transcript", "-"], &bad.to_string());
    assert_eq!(out.code, 1);
    assert_eq!(out.json()["ok"], false);
    assert_eq!(out.json()["round"], 1);

    let out = run(&[
        "game",
        "play",
        "--space",
        &x,
        "--bound",
        "2",
        "--kcap",
        "4",
        "--rmax",
        "6",
        "--b-script",
        "4,2",
    ]);
    assert_eq!(out.code, 2);
}

#[test]
fn game_play_interactive() {
    let x = line_file("line8-interactive.json", 8);
    let out = run_with(
        &[
            "game",
            "play",
            "--space",
            &x,
            "--bound",
            "2",
            "--kcap",
            "4",
            "--rmax",
            "6",
            "--interactive",
        ],
        "2\nfoo\n1\n3\n",
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let g = out.json();
    let rs: Vec<u64> = g["rounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["r"].as_u64().unwrap())
        .collect();
    assert_eq!(rs, vec![2, 3]);
    assert!(out.stderr.contains("round 1"));
    assert!(out.stderr.contains("not a number"));

    let out = run_with(
        &[
            "game",
            "play",
            "--space",
            &x,
            "--bound",
            "2",
            "--kcap",
            "4",
            "--rmax",
            "6",
            "--interactive",
        ],
        "",
    );
    assert_eq!(out.code, 0);
    assert_eq!(out.json()["rounds"], json!([]));
}

#[test]
fn oracle_run_output() {
    let out = run(&["oracle", "run", "--suite", "kb-order", "--seed", "7", "--trials", "30"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.trim(), "PASS kb-order seed=7 trials=30 failures=0");

    let out = run(&[
        "oracle",
        "run",
        "--suite",
        "solver-vs-oracle",
        "--trials",
        "20",
        "--json",
    ]);
    assert_eq!(out.code, 0);
    let v = out.json();
    assert_eq!(v[0]["suite"], "solver-vs-oracle");
    assert_eq!(v[0]["pass"], true);
    assert_eq!(v[0]["failures"], json!([]));
}

#[test]
fn experiment_cupc_small() {
    let out = run(&[
        "experiment",
        "cupc",
        "--c",
        "1,2",
        "--box",
        "6",
        "--bound",
        "2,4",
        "--r",
        "1,2",
        "--kcap",
        "4",
        "--json",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = out.json();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|c| c["r1"].as_u64() <= c["r2"].as_u64()));
    let text = run(&[
        "experiment",
        "cupc",
        "--c",
        "1,2",
        "--box",
        "6",
        "--bound",
        "2,4",
        "--r",
        "1,2",
        "--kcap",
        "4",
    ]);
    assert_eq!(text.code, 0);
    assert!(!text.stdout.is_empty());
}

#[test]
fn space_commands() {
    let x = line_file("line3-space.json", 3);
    let out = run(&["space", "info", "--space", &x]);
    assert_eq!(out.json()["points"], 7);
    assert_eq!(out.json()["diameter"], 6);
    assert_eq!(run(&["space", "validate", "--space", &x]).code, 0);
    let out = run(&["space", "subspace", "--space", &x, "--ids", "0,2,4"]);
    assert_eq!(out.code, 0);
    let sub = scratch("line3-sub.json", &out.stdout);
    assert_eq!(run(&["space", "info", "--space", &sub]).json()["points"], 3);
    let out = run(&["space", "net", "--space", &x, "--r", "2"]);
    assert_eq!(out.code, 0);
    let out = run(&["space", "cupc", "--c", "1,2", "--box", "4"]);
    assert_eq!(out.code, 0);
    assert!(out.json()["label"].is_string());
}
