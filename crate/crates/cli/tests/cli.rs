use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn twufp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twufp"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = twufp(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.s(name)
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const TWO_TASKS: &str = r#"{"m":4,"capacities":[[1,4,2]],"tasks":[
 {"id":1,"demand":2,"weight_num":3,"weight_den":1,"length":2,"window_lo":1,"window_hi":4},
 {"id":2,"demand":2,"weight_num":3,"weight_den":1,"length":2,"window_lo":1,"window_hi":4}]}"#;

#[test]
fn gen_is_deterministic() {
    let d = Dir::new();
    for name in ["a.json", "b.json"] {
        ok(&["gen", "random", "--n", "5", "--m", "8", "--seed", "7", "-o", &d.s(name)]);
    }
    assert_eq!(fs::read(d.path("a.json")).unwrap(), fs::read(d.path("b.json")).unwrap());
    ok(&["gen", "random", "--n", "5", "--m", "8", "--seed", "8", "-o", &d.s("c.json")]);
    assert_ne!(fs::read(d.path("a.json")).unwrap(), fs::read(d.path("c.json")).unwrap());
}

#[test]
fn gen_random_requires_a_seed() {
    assert_eq!(code(&twufp(&["gen", "random"])), 2);
}

#[test]
fn gen_span_windows_cover_the_path() {
    let out = ok(&["gen", "span", "--n", "4"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = v["m"].as_u64().unwrap();
    let tasks = v["tasks"].as_array().unwrap();
    assert_eq!(tasks.len(), 4);
    for t in tasks {
        assert_eq!((t["window_lo"].as_u64(), t["window_hi"].as_u64()), (Some(1), Some(m)));
    }
}

#[test]
fn gen_from_single_hyperedge_has_eight_tasks() {
    let d = Dir::new();
    let k = d.write("k.json", r#"{"q":1,"hyperedges":[[1,1,1]],"k_bound":null}"#);
    let inst = d.s("i.json");
    ok(&["gen", "from-3dm", "--input", &k, "-o", &inst]);
    let via_reduce = ok(&["reduce", "instance", "-i", &k]);
    assert_eq!(fs::read(&inst).unwrap(), via_reduce.stdout);
    assert_eq!(json(Path::new(&inst))["tasks"].as_array().unwrap().len(), 8);
}

#[test]
fn solve_exact_two_tasks() {
    let d = Dir::new();
    let inst = d.write("i.json", TWO_TASKS);
    let (sched, report) = (d.s("s.json"), d.s("r.json"));
    ok(&["solve", "-i", &inst, "-a", "exact", "-o", &sched, "--report", &report]);
    let r = json(Path::new(&report));
    assert_eq!(r["objective"], "6");
    assert_eq!(r["ratio"], "1");
    assert_eq!(r["augmentation"], "1");
    let mut starts: Vec<u64> = json(Path::new(&sched))
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["start"].as_u64().unwrap())
        .collect();
    starts.sort();
    assert_eq!(starts, [1, 3]);
    ok(&["verify", "-i", &inst, "-s", &sched]);
}

#[test]
fn solve_approx_on_zero_capacity_is_empty() {
    let d = Dir::new();
    let inst = d.write(
        "i.json",
        r#"{"m":3,"capacities":[[1,3,0]],"tasks":[{"id":1,"demand":1,"weight_num":5,"weight_den":1,"length":1,"window_lo":1,"window_hi":3}]}"#,
    );
    let (sched, report) = (d.s("s.json"), d.s("r.json"));
    ok(&["solve", "-i", &inst, "-o", &sched, "--report", &report]);
    assert_eq!(fs::read_to_string(&sched).unwrap(), "[]\n");
    let r = json(Path::new(&report));
    assert_eq!(r["objective"], "0");
    assert_eq!(r["ratio"], Value::Null);
}

#[test]
fn solvers_respect_the_oracle() {
    let d = Dir::new();
    for seed in 0..8 {
        let inst = d.s("i.json");
        ok(&["gen", "random", "--n", "5", "--m", "6", "--seed", &seed.to_string(), "-o", &inst]);
        let objective = |algo: &str, eps: &str| {
            let report = d.s("r.json");
            let sched = d.s("s.json");
            ok(&["solve", "-i", &inst, "-a", algo, "-e", eps, "--oracle", "-o", &sched, "--report", &report]);
            let r = json(Path::new(&report));
            ok(&["verify", "-i", &inst, "-s", &sched, "-a", r["augmentation"].as_str().unwrap()]);
            let parse = |s: &str| -> f64 {
                match s.split_once('/') {
                    Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
                    None => s.parse().unwrap(),
                }
            };
            (parse(r["objective"].as_str().unwrap()), parse(r["oracle_objective"].as_str().unwrap()))
        };
        let (greedy, opt) = objective("greedy", "1/4");
        assert!(greedy <= opt);
        let (approx, opt) = objective("approx", "1/2");
        // 2 + 6 * (1/2) * log2(8)
        assert!(approx * 11.0 >= opt);
    }
}

#[test]
fn verify_reports_overload() {
    let d = Dir::new();
    let inst = d.write(
        "i.json",
        r#"{"m":2,"capacities":[[1,2,2]],"tasks":[{"id":1,"demand":3,"weight_num":1,"weight_den":1,"length":2,"window_lo":1,"window_hi":2}]}"#,
    );
    let sched = d.write("s.json", r#"[{"id":1,"start":1}]"#);
    let out = twufp(&["verify", "-i", &inst, "-s", &sched]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("feasible=false") && text.contains("worst_edge=1"), "{text}");
    ok(&["verify", "-i", &inst, "-s", &sched, "--augmentation", "3/2"]);
    let outside = d.write("o.json", r#"[{"id":1,"start":2}]"#);
    assert_eq!(code(&twufp(&["verify", "-i", &inst, "-s", &outside, "-a", "9"])), 1);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let d = Dir::new();
    let bad = d.write("bad.json", "{");
    assert_eq!(code(&twufp(&["solve", "-i", &bad])), 2);
    assert_eq!(code(&twufp(&["solve", "-i", &d.s("missing.json")])), 2);
    let inst = d.write("i.json", TWO_TASKS);
    assert_eq!(code(&twufp(&["solve", "-i", &inst, "-e", "2/3"])), 2);
    assert_eq!(code(&twufp(&["frobnicate"])), 2);
}

#[test]
fn exact_limits_exit_three() {
    let d = Dir::new();
    let inst = d.write("i.json", TWO_TASKS);
    assert_eq!(code(&twufp(&["solve", "-i", &inst, "-a", "exact", "--limits-n", "1"])), 3);
}

#[test]
fn environment_overrides_flags() {
    let d = Dir::new();
    let inst = d.write("i.json", TWO_TASKS);
    let report = d.s("r.json");
    let out = Command::new(env!("CARGO_BIN_EXE_twufp"))
        .args(["solve", "-o", &d.s("s.json")])
        .env_clear()
        .env("TWUFP_INPUT", &inst)
        .env("TWUFP_EPSILON", "1/3")
        .env("TWUFP_REPORT", &report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(Path::new(&report))["epsilon"], "1/3");
}

#[test]
fn trace_lines_go_to_stderr() {
    let d = Dir::new();
    let inst = d.write("i.json", TWO_TASKS);
    let out = ok(&["solve", "-i", &inst, "--trace", "-o", &d.s("s.json"), "--report", &d.s("r.json")]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().count() > 0);
    assert!(err.lines().all(|l| l.starts_with("candidate interval=[")), "{err}");
}

#[test]
fn reduce_maps_matchings_both_ways() {
    let d = Dir::new();
    let k = d.s("k.json");
    ok(&["gen", "three-dm", "--q", "3", "--edges", "5", "--seed", "4", "-o", &k]);
    let (inst, sched) = (d.s("i.json"), d.s("s.json"));
    ok(&["reduce", "instance", "-i", &k, "-o", &inst]);
    ok(&["reduce", "matching", "-i", &k, "-o", &sched]);
    ok(&["verify", "-i", &inst, "-s", &sched]);
    let back = ok(&["reduce", "schedule", "-i", &k, "-s", &sched]);
    let matching: Vec<usize> = serde_json::from_slice(&back.stdout).unwrap();
    assert!(!matching.is_empty());
    let chosen = d.write("m.json", &serde_json::to_string(&matching).unwrap());
    let again = d.s("s2.json");
    ok(&["reduce", "matching", "-i", &k, "--matching", &chosen, "-o", &again]);
    assert_eq!(fs::read(&sched).unwrap(), fs::read(&again).unwrap());
    let clash = d.write("bad.json", &serde_json::to_string(&[matching[0], matching[0]]).unwrap());
    assert_ne!(code(&twufp(&["reduce", "matching", "-i", &k, "--matching", &clash])), 0);
}

#[test]
fn bench_rows_follow_config_order() {
    let d = Dir::new();
    let config = d.write(
        "c.json",
        r#"{"families":[{"name":"small","kind":"random","n":6,"m":8,"count":20,"seed":100},
                        {"name":"span","kind":"span-padded","n":4,"m":4,"count":5}],
            "solvers":["exact","approx"],"epsilons":["1/2","1/4"],"oracle":true}"#,
    );
    let rows_path = d.s("rows.jsonl");
    let out = ok(&["bench", "-c", &config, "-o", &rows_path, "-j", "4"]);
    let rows: Vec<Value> = fs::read_to_string(&rows_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 25 * 3);
    let exact: Vec<&Value> = rows.iter().filter(|r| r["solver"] == "exact").collect();
    assert_eq!(exact.len(), 25);
    assert!(exact.iter().all(|r| r["ratio"] == "1"));
    assert!(rows
        .iter()
        .filter(|r| r["solver"] == "approx")
        .all(|r| r["within_bound"] == true));
    assert_eq!(rows[0]["family"], "small");
    assert_eq!(rows[0]["seed"], 100);
    assert_eq!(rows[3]["seed"], 101);
    assert_eq!(rows[74]["family"], "span");
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("worst oracle/objective ratio"));

    let serial = d.s("serial.jsonl");
    ok(&["bench", "-c", &config, "-o", &serial, "-j", "1"]);
    let strip = |p: &str| -> Vec<Value> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("wall_ms");
                v
            })
            .collect()
    };
    assert_eq!(strip(&rows_path), strip(&serial));
}

#[test]
fn bench_empty_config_is_empty() {
    let d = Dir::new();
    let config = d.write("c.json", "{}");
    let rows = d.s("rows.jsonl");
    ok(&["bench", "-c", &config, "-o", &rows]);
    assert_eq!(fs::read_to_string(&rows).unwrap(), "");
}

#[test]
fn bench_row_errors_do_not_stop_the_run() {
    let d = Dir::new();
    let config = d.write(
        "c.json",
        r#"{"families":[{"name":"big","kind":"random","n":6,"m":8,"count":2}],
            "solvers":["exact","greedy"],"limits":{"n":3,"m":256,"nodes":1000}}"#,
    );
    let rows = d.s("rows.jsonl");
    ok(&["bench", "-c", &config, "-o", &rows]);
    let rows: Vec<Value> = fs::read_to_string(&rows)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0]["error"].as_str().unwrap().contains("limit"));
    assert!(rows[1]["error"].is_null() && rows[1]["objective"].is_string());
}
