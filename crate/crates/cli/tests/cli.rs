use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn file(d: &Path, name: &str, text: &str) -> String {
    let p = d.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn ust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ust")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The error line on stderr, parsed.
fn error_line(o: &Output) -> Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let line = err.lines().find(|l| l.contains("\"error\"")).expect("an error line");
    serde_json::from_str(line).unwrap()
}

const P3: &str = "nodes 3\n0 1 1\n1 2 2\n";
const DIRACS: &str = r#"{"measures": [
  {"label": "one", "entries": [{"node": 1, "mass": 1.0}]},
  {"label": "two", "entries": [{"node": 2, "mass": 1.0}]}
]}"#;
const SQUARE: &str = "nodes 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n";

fn p3_inputs(name: &str) -> (String, String) {
    let d = dir(name);
    (file(&d, "g.txt", P3), file(&d, "m.json", DIRACS))
}

#[test]
fn dist_on_path_graph() {
    let (g, m) = p3_inputs("dist");
    let o = ust(&["dist", "--graph", &g, "--measures", &m]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0,2\n2,0\n");

    let o = ust(&[
        "dist",
        "--graph",
        &g,
        "--measures",
        &m,
        "--root",
        "0",
        "--p",
        "2",
        "--format",
        "json",
    ]);
    let v: Vec<Vec<f64>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0][1], std::f64::consts::SQRT_2);
}

#[test]
fn gram_on_path_graph() {
    let (g, m) = p3_inputs("gram");
    let o = ust(&["gram", "--graph", &g, "--measures", &m, "--t", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("0.3678794411714423"));
    assert_eq!(text.lines().next().unwrap().split(',').next().unwrap(), "1");
}

#[test]
fn out_file_matches_stdout() {
    let d = dir("outfile");
    let (g, m) = (file(&d, "g.txt", P3), file(&d, "m.json", DIRACS));
    let out = d.join("d.csv");
    let o = ust(&["dist", "--graph", &g, "--measures", &m, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out).unwrap(), "0,2\n2,0\n");
}

#[test]
fn validate_reports_ties_on_square() {
    let d = dir("validate");
    let g = file(&d, "sq.txt", SQUARE);
    let o = ust(&["validate", "--graph", &g]);
    assert!(o.status.success());
    let text = stdout(&o);
    let tied: usize = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert!(tied > 0);

    let o = ust(&["validate", "--graph", &g, "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["unique"], false);
    assert_eq!(v[0]["tied"][0], 2);
}

#[test]
fn oracle_outputs_json() {
    let (g, m) = p3_inputs("oracle");
    let o = ust(&["oracle", "--graph", &g, "--measures", &m, "--kind", "wasserstein"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 2.0);
    assert_eq!(v["plan_mass"], 1.0);
    assert_eq!(v["dual_gap"], 0.0);

    let o = ust(&[
        "oracle",
        "--graph",
        &g,
        "--measures",
        &m,
        "--root",
        "0",
        "--lambda",
        "1",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], 1.0);
}

#[test]
fn exit_codes_and_error_lines() {
    let d = dir("errors");
    let (g, m) = (file(&d, "g.txt", P3), file(&d, "m.json", DIRACS));
    let sq = file(&d, "sq.txt", SQUARE);
    let bad = file(&d, "bad.txt", "nodes 3\n0 1\n");
    let off = file(
        &d,
        "off.json",
        r#"{"measures": [{"entries": [{"node": 9, "mass": 1}]}]}"#,
    );

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["dist", "--graph", "/nonexistent", "--measures", &m], 2, "Io"),
        (vec!["dist", "--graph", &bad, "--measures", &m], 2, "Parse"),
        (vec!["dist", "--graph", &g, "--measures", &off], 2, "SupportOffGraph"),
        (
            vec!["dist", "--graph", &sq, "--measures", &m, "--root", "0"],
            3,
            "NonUniqueShortestPath",
        ),
        (vec!["dist", "--graph", &sq, "--measures", &m], 3, "NoValidRoot"),
        (
            vec!["dist", "--graph", &g, "--measures", &m, "--alpha", "5"],
            3,
            "InvalidParams",
        ),
        (
            vec!["gram", "--graph", &g, "--measures", &m, "--t", "0"],
            3,
            "NonPositiveT",
        ),
        (
            vec!["oracle", "--graph", &g, "--measures", &m, "--a1", "3"],
            3,
            "InvalidWeightSlope",
        ),
        (
            vec!["oracle", "--graph", &g, "--measures", &m, "--j", "7"],
            2,
            "MeasureIndex",
        ),
    ];
    for (args, code, kind) in cases {
        let o = ust(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let e = error_line(&o);
        assert_eq!(e["error"], kind, "{args:?}");
        assert_eq!(e["code"], code);
    }
    let o = ust(&["dist", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_is_deterministic() {
    let d = dir("pipeline");
    let mut pts = String::new();
    for k in 0..200 {
        let x = (k as f64 * 0.618_033_988_75).fract();
        let y = (k as f64 * 0.414_213_562_37).fract();
        pts.push_str(&format!("{x} {y}\n"));
    }
    let points = file(&d, "pts.txt", &pts);
    let graph = d.join("g.txt");
    let graph = graph.to_str().unwrap();
    let build = [
        "build-graph",
        "--m",
        "60",
        "--density",
        "log",
        "--seed",
        "4",
        "--points",
        &points,
        "--out",
        graph,
    ];
    assert!(ust(&build).status.success());
    let first = std::fs::read_to_string(graph).unwrap();
    assert!(ust(&build).status.success());
    assert_eq!(std::fs::read_to_string(graph).unwrap(), first);
    assert!(first.starts_with("nodes 60\n"));

    let entries: Vec<String> = (0..8)
        .map(|k| {
            format!(
                r#"{{"entries": [{{"node": {}, "mass": 0.5}}, {{"node": {}, "mass": 1.25}}]}}"#,
                k * 7,
                k * 3 + 1
            )
        })
        .collect();
    let m = file(&d, "m.json", &format!(r#"{{"measures": [{}]}}"#, entries.join(",")));
    let args = [
        "dist",
        "--graph",
        graph,
        "--measures",
        &m,
        "--slices",
        "5",
        "--seed",
        "11",
        "--p",
        "1.5",
    ];
    let a = ust(&args);
    let b = ust(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows: Vec<Vec<f64>> = stdout(&a)
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[i], 0.0);
        for (j, x) in row.iter().enumerate() {
            assert_eq!(*x, rows[j][i]);
        }
    }
    let g1 = ust(&[
        "gram",
        "--graph",
        graph,
        "--measures",
        &m,
        "--slices",
        "5",
        "--seed",
        "11",
        "--t",
        "0.3",
    ]);
    let g2 = ust(&[
        "gram",
        "--graph",
        graph,
        "--measures",
        &m,
        "--slices",
        "5",
        "--seed",
        "11",
        "--t",
        "0.3",
    ]);
    assert_eq!(g1.stdout, g2.stdout);
}

#[test]
fn bench_sweep_is_linear_in_touched_edges() {
    let d = dir("bench");
    let graph = d.join("g.txt");
    let graph = graph.to_str().unwrap();
    assert!(ust(&[
        "build-graph",
        "--m",
        "3000",
        "--density",
        "log",
        "--seed",
        "1",
        "--out",
        graph
    ])
    .status
    .success());
    let m = file(&d, "m.json", DIRACS);
    let o = ust(&[
        "bench",
        "--graph",
        graph,
        "--measures",
        &m,
        "--slices",
        "1",
        "--sweep",
        "12",
        "--oracle",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let metric = |name: &str| -> Vec<f64> {
        text.lines()
            .filter(|l| l.starts_with(name))
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    assert_eq!(metric("preprocess_ms").len(), 1);
    assert_eq!(metric("per_pair_us").len(), 1);
    assert_eq!(metric("oracle_ms").len(), 1);
    assert_eq!(metric("sweep_us,").len(), 12);
    let r2 = metric("sweep_r2")[0];
    assert!(r2 > 0.95, "R^2 = {r2}\n{text}");
}
