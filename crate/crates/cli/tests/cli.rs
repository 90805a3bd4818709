use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crewroster::format::{parse_instance, parse_roster, roster_reported_objective, write_roster};
use crewroster::metrics::{metric_l, metric_p, parse_csv, round_l, round_p, Method, MEAN_ROW};
use crewroster::Activity;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crewroster")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = bin(args, dir);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const GEN: &[&str] = &[
    "gen", "--count", "3", "--days", "14", "--bases", "2", "--airports", "6", "--pairings", "24",
    "--flight-hours", "260", "--pilots", "14", "--min-days-off", "4", "--seed", "5",
];

fn gen(dir: &Path, out: &str) {
    let mut args = GEN.to_vec();
    args.extend(["--out", out]);
    ok(&args, dir);
}

fn bytes(dir: &Path, f: &str) -> Vec<u8> {
    fs::read(dir.join(f)).unwrap()
}

#[test]
fn repeated_commands_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "a");
    gen(d, "b");
    for i in 0..3 {
        let f = format!("scenario-{i:02}.json");
        assert_eq!(bytes(d, &format!("a/{f}")), bytes(d, &format!("b/{f}")));
    }
    ok(&["train", "--scenarios", "a", "--out", "p1.json", "--generations", "3", "--seed", "9"], d);
    ok(&["train", "--scenarios", "a", "--out", "p2.json", "--generations", "3", "--seed", "9"], d);
    assert_eq!(bytes(d, "p1.json"), bytes(d, "p2.json"));

    let inst = "a/scenario-01.json";
    let solves: &[&[&str]] = &[
        &["--method", "alg-basic"],
        &["--method", "alg-fast"],
        &["--method", "win-basic", "--window-len", "7", "--overlap", "2"],
        &["--method", "win-ml", "--window-len", "7", "--overlap", "2", "--policy", "p1.json"],
        &["--method", "seqasg", "--seed", "4"],
    ];
    for (i, extra) in solves.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = format!("r{i}_{rep}.json");
            let mut args = vec!["solve", "--instance", inst, "--out", &out];
            args.extend_from_slice(extra);
            ok(&args, d);
            outputs.push(bytes(d, &out));
        }
        assert_eq!(outputs[0], outputs[1], "{extra:?}");
    }
}

#[test]
fn reported_objective_matches_check() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "s");
    for method in ["alg-basic", "win-basic", "seqasg"] {
        let stdout = ok(&["solve", "--instance", "s/scenario-00.json", "--method", method, "--out", "r.json"], d);
        let s_solve = stdout.split_whitespace().find_map(|w| w.strip_prefix("S=")).unwrap().to_string();
        let report = ok(&["check", "--instance", "s/scenario-00.json", "--roster", "r.json"], d);
        assert!(report.contains("feasible"));
        let s_check = report.lines().find_map(|l| l.strip_prefix("S=")).unwrap();
        assert_eq!(s_solve, s_check, "{method}");
    }
}

#[test]
fn check_names_the_violation_of_a_corrupted_roster() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "s");
    ok(&["solve", "--instance", "s/scenario-00.json", "--method", "alg-basic", "--out", "r.json"], d);
    let inst = parse_instance(&fs::read_to_string(d.join("s/scenario-00.json")).unwrap()).unwrap();
    let text = fs::read_to_string(d.join("r.json")).unwrap();
    let mut roster = parse_roster(&text, &inst).unwrap();
    let (k, day) = roster
        .schedules
        .iter()
        .enumerate()
        .find_map(|(k, s)| {
            s.pairings().next().map(|w| (k, inst.pairing(w).unwrap().start_day()))
        })
        .expect("some pilot flies");
    roster.schedules[k].activities.push(Activity::DayOff(day));
    let reported = roster_reported_objective(&text).unwrap();
    fs::write(d.join("bad.json"), write_roster(&roster, reported.as_ref())).unwrap();

    let out = bin(&["check", "--instance", "s/scenario-00.json", "--roster", "bad.json"], d);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[overlapping_activities]"), "{stdout}");
    assert!(stdout.contains(&format!("day {day}")));
}

#[test]
fn bench_metrics_recompute_from_s_and_t() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "s");
    let table = ok(
        &[
            "bench", "--scenarios", "s", "--methods", "alg-basic,win-basic,win-ml", "--window-len", "7",
            "--overlap", "2", "--out", "bench.csv", "--jobs", "2",
        ],
        d,
    );
    assert!(table.lines().next().unwrap().starts_with("instance"));
    let text = fs::read_to_string(d.join("bench.csv")).unwrap();
    assert!(text.starts_with("# bench-csv v1\ninstance,method,S,t,L,p\n"));
    let rows = parse_csv(&text).unwrap();
    let (body, means): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.instance != MEAN_ROW);
    assert_eq!(body.len(), 9);
    assert_eq!(means.len(), 3);
    for r in &body {
        let base = body.iter().find(|b| b.instance == r.instance && b.method == Method::AlgBasic).unwrap();
        assert_eq!(r.l, metric_l(r.s, base.s).ok().map(round_l), "{r:?}");
        assert_eq!(r.p, metric_p(r.t, base.t).ok().map(round_p), "{r:?}");
    }
    for m in &means {
        let rs: Vec<_> = body.iter().filter(|r| r.method == m.method).collect();
        let s = rs.iter().map(|r| r.s).sum::<f64>() / rs.len() as f64;
        assert!((m.s - s).abs() < 1e-9);
        let ls: Vec<f64> = rs.iter().filter_map(|r| r.l).collect();
        if !ls.is_empty() {
            assert_eq!(m.l, Some(round_l(ls.iter().sum::<f64>() / ls.len() as f64)));
        }
        let ps: Vec<f64> = rs.iter().filter_map(|r| r.p).collect();
        assert_eq!(m.p, Some(round_p(ps.iter().sum::<f64>() / ps.len() as f64)));
    }
}

#[test]
fn usage_and_input_errors_have_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "s");
    let out = bin(&["solve", "--instance", "s/scenario-00.json", "--method", "alg-slow", "--out", "r.json"], d);
    assert_eq!(out.status.code(), Some(1));
    let out = bin(&["frobnicate"], d);
    assert_eq!(out.status.code(), Some(1));

    fs::write(d.join("broken.json"), "{\"format\": \"crewroster-instance\", \"version\": 1, \"horizon_days\": ").unwrap();
    let out = bin(&["solve", "--instance", "broken.json", "--method", "alg-basic", "--out", "r.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[parse]"));

    fs::write(d.join("params.json"), "{\"n_iter\": 0, \"m_iter\": 1.0}").unwrap();
    let out = bin(
        &["solve", "--instance", "s/scenario-00.json", "--method", "alg-basic", "--params", "params.json", "--out", "r.json"],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
}
