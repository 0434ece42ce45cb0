use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use cogmap::bitmap::{self, BLOCKED, ENDPOINT, PATH};
use cogmap::cli::{CSV_HEADER, EXIT_BLOCKED_ENDPOINT, EXIT_IO, EXIT_OK, EXIT_UNREACHABLE, EXIT_USAGE};
use cogmap::lut::LookupTable;
use cogmap::obstacles::voxelize_obstacles;
use cogmap::scenario::Scenario;
use cogmap::sonn::Network;
use tempfile::TempDir;

fn cogmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogmap")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Pillar network and table written once per test binary.
fn pillar_files() -> &'static (TempDir, PathBuf, PathBuf) {
    static FILES: OnceLock<(TempDir, PathBuf, PathBuf)> = OnceLock::new();
    FILES.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let net = dir.path().join("pillar.cgnw");
        let lut = dir.path().join("pillar.cglt");
        assert_eq!(code(&cogmap(&["train", "--out", s(&net)])), EXIT_OK);
        assert_eq!(
            code(&cogmap(&["build-lut", "--network", s(&net), "--out", s(&lut)])),
            EXIT_OK
        );
        (dir, net, lut)
    })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors() {
    assert_eq!(code(&cogmap(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&cogmap(&["plan"])), EXIT_USAGE);
    assert_eq!(code(&cogmap(&["--help"])), EXIT_OK);
    let (_, net, lut) = pillar_files();
    let out = cogmap(&["plan", "--network", s(net), "--lut", s(lut), "--start", "0.1"]);
    assert_eq!(code(&out), EXIT_USAGE);
}

#[test]
fn plan_reports_timing_statistics() {
    let (_, net, lut) = pillar_files();
    let out = cogmap(&["plan", "--network", s(net), "--lut", s(lut), "--repeat", "20"]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("algo=dijkstra neurons_on_path="));
    for (line, key) in lines[1..3].iter().zip(["plan_time_s", "smooth_time_s"]) {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f[0], key);
        let mean: f64 = f[1].strip_prefix("mean=").unwrap().parse().unwrap();
        let std: f64 = f[2].strip_prefix("std=").unwrap().parse().unwrap();
        assert!(mean > 0.0 && std >= 0.0);
    }
}

#[test]
fn plan_json_output() {
    let (dir, net, lut) = pillar_files();
    let json = dir.path().join("plan.json");
    let out = cogmap(&[
        "plan",
        "--network",
        s(net),
        "--lut",
        s(lut),
        "--algo",
        "wavefront",
        "--out",
        s(&json),
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert!(v["path"]["neuron_ids"].as_array().is_some_and(|p| p.len() > 2));
    assert!(v["trajectory"]["samples"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn blocked_and_unreachable_queries() {
    let (dir, net, lut) = pillar_files();
    // two walls along the x axis split the reachable poses in two
    let text = include_str!("../scenarios/pillar.toml").replace(
        "[[obstacles]]\nid = 1\nshape = \"box\"\ncenter = [1.4, 0.0]\nhalf_extents = [0.12, 0.22]",
        "[[obstacles]]\nid = 1\nshape = \"box\"\ncenter = [1.15, 0.0]\nhalf_extents = [0.75, 0.2]\n\n\
         [[obstacles]]\nid = 2\nshape = \"box\"\ncenter = [-1.15, 0.0]\nhalf_extents = [0.75, 0.2]",
    );
    assert!(text.contains("id = 2"));
    let split = dir.path().join("split.toml");
    std::fs::write(&split, text).unwrap();
    let out = cogmap(&["plan", "--network", s(net), "--lut", s(lut), "--scenario", s(&split)]);
    assert_eq!(code(&out), EXIT_UNREACHABLE, "{}", String::from_utf8_lossy(&out.stderr));

    let sc = Scenario::pillar();
    let n = Network::load(net).unwrap();
    let t = LookupTable::load_for(lut, &n).unwrap();
    let blocked = t
        .blocked_neurons(&voxelize_obstacles(&sc.obstacles, 0.0, &sc.grid))
        .unwrap();
    let inside = (0..n.len()).find(|&i| blocked.contains(i)).unwrap();
    let q: Vec<String> = n.weight(inside).iter().map(|v| v.to_string()).collect();
    let out = cogmap(&["plan", "--network", s(net), "--lut", s(lut), "--start", &q.join(",")]);
    assert_eq!(code(&out), EXIT_BLOCKED_ENDPOINT);
}

#[test]
fn io_and_fingerprint_errors() {
    let (dir, net, lut) = pillar_files();
    let missing = dir.path().join("nope.cgnw");
    assert_eq!(
        code(&cogmap(&["plan", "--network", s(&missing), "--lut", s(lut)])),
        EXIT_IO
    );

    let other = dir.path().join("other.cgnw");
    assert_eq!(code(&cogmap(&["train", "--out", s(&other), "--seed", "2"])), EXIT_OK);
    let out = cogmap(&["plan", "--network", s(&other), "--lut", s(lut)]);
    assert_eq!(code(&out), EXIT_IO);
    assert!(String::from_utf8_lossy(&out.stderr).contains("fingerprint"));

    let garbage = dir.path().join("garbage.cgnw");
    std::fs::write(&garbage, b"CGNW not really").unwrap();
    assert_eq!(
        code(&cogmap(&[
            "build-lut",
            "--network",
            s(&garbage),
            "--out",
            s(&dir.path().join("g.cglt"))
        ])),
        EXIT_IO
    );
    assert_eq!(code(&cogmap(&["plan", "--network", s(net), "--lut", s(net)])), EXIT_IO);
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.cgnw");
    let b = dir.path().join("b.cgnw");
    for p in [&a, &b] {
        assert_eq!(
            code(&cogmap(&[
                "train",
                "--out",
                s(p),
                "--iterations",
                "5000",
                "--neurons",
                "60"
            ])),
            EXIT_OK
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn som_grid_from_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("toy.txt");
    let out = cogmap(&["datagen", "--out", s(&data), "--trajectories", "20"]);
    assert_eq!(code(&out), EXIT_OK);
    let net = dir.path().join("som.cgnw");
    let out = cogmap(&[
        "train",
        "--out",
        s(&net),
        "--dataset",
        s(&data),
        "--kind",
        "som",
        "--neurons",
        "100",
        "--iterations",
        "3000",
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let n = Network::load(&net).unwrap();
    assert_eq!(n.len(), 100);
    // a 10x10 lattice has 2 * 10 * 9 edges
    assert_eq!(n.edges().len(), 180);
}

#[test]
fn bitmap_colours_match_counts() {
    let (dir, net, lut) = pillar_files();
    let png = dir.path().join("map.png");
    let out = cogmap(&[
        "bitmap",
        "--network",
        s(net),
        "--lut",
        s(lut),
        "--path",
        "--out",
        s(&png),
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let text = stdout(&out);
    let field = |k: &str| -> usize {
        text.split_whitespace()
            .find_map(|f| f.strip_prefix(&format!("{k}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    let img = image::open(&png).unwrap().to_rgb8();
    assert_eq!(bitmap::count(&img, BLOCKED), field("blocked"));
    assert_eq!(bitmap::count(&img, PATH) + bitmap::count(&img, ENDPOINT), field("path"));

    let sc = Scenario::pillar();
    let n = Network::load(net).unwrap();
    let t = LookupTable::load_for(lut, &n).unwrap();
    let blocked = t
        .blocked_neurons(&voxelize_obstacles(&sc.obstacles, 0.0, &sc.grid))
        .unwrap();
    assert_eq!(field("blocked"), blocked.len());
}

#[test]
fn bench_writes_csv() {
    let (dir, net, lut) = pillar_files();
    let csv = dir.path().join("bench.csv");
    let out = cogmap(&[
        "bench",
        "--network",
        s(net),
        "--lut",
        s(lut),
        "--runs",
        "2",
        "--planners",
        "gng-dijkstra,rrt-connect",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').count() == CSV_HEADER.split(',').count()));
    assert_eq!(
        code(&cogmap(&["bench", "--planners", "astar", "--runs", "1"])),
        EXIT_USAGE
    );
}

#[test]
fn headless_replay_log() {
    let (dir, net, lut) = pillar_files();
    let log = dir.path().join("events.jsonl");
    let out = cogmap(&[
        "replay",
        "--network",
        s(net),
        "--lut",
        s(lut),
        "--duration",
        "2",
        "--out",
        s(&log),
    ]);
    assert_eq!(code(&out), EXIT_OK);
    let text = std::fs::read_to_string(&log).unwrap();
    let times: Vec<f64> = text
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["time"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!(times.len() >= 7);
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    let out = cogmap(&[
        "serve",
        "--network",
        s(net),
        "--lut",
        s(lut),
        "--duration",
        "1",
        "--headless",
    ]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(stdout(&out).lines().count() >= 4);
}
