use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ckm_cli::format::{read_json, to_json, InstanceFile, Problem, SolutionFile};
use ckm_cli::render::render_trace;
use ckm_core::pipeline::round;
use ckm_core::stars::StarCase;
use ckm_core::trace::{build_trace, case_name};
use ckm_core::verify::verify_guarantees;
use ckm_core::{FractionalSolution, Instance, Matrix, PipelinePath};

fn ckm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckm"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const THREE: &str = r#"{"n": 3, "cost": [[0, 100, 1], [100, 0, 100], [1, 100, 0]],
                       "demand": [1, 1, 1], "capacity": 3, "k": 2}"#;

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = ckm(&["gen", "--n", "12", "--k", "4", "--seed", "1", "--out", s(p)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let file: InstanceFile = read_json(&a).unwrap();
    let Problem::Ckm(inst) = file.into_problem().unwrap() else {
        panic!("plain instance expected");
    };
    assert!(ckm_core::model::validate_instance(&inst).is_ok());

    let out = ckm(&[
        "gen",
        "--n",
        "6",
        "--geometry",
        "uniform-matrix",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let f: InstanceFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(f.n, 6);
}

#[test]
fn solve_round_trips_through_the_verifier() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("inst.json");
    assert_eq!(
        code(&ckm(&[
            "gen",
            "--n",
            "10",
            "--k",
            "3",
            "--seed",
            "5",
            "--out",
            s(&inst_path)
        ])),
        0
    );
    let sol_a = dir.path().join("a.json");
    let sol_b = dir.path().join("b.json");
    for p in [&sol_a, &sol_b] {
        let out = ckm(&["solve", s(&inst_path), "--alpha", "4", "--out", s(p)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let report = String::from_utf8(out.stdout).unwrap();
        for key in [
            "path:",
            "k:",
            "centers opened:",
            "max load ratio:",
            "cost:",
            "cost / C_LP:",
        ] {
            assert!(report.contains(key), "{report}");
        }
    }
    assert_eq!(
        std::fs::read(&sol_a).unwrap(),
        std::fs::read(&sol_b).unwrap()
    );

    let Problem::Ckm(inst) = read_json::<InstanceFile>(&inst_path)
        .unwrap()
        .into_problem()
        .unwrap()
    else {
        panic!("plain instance expected");
    };
    let file: SolutionFile = read_json(&sol_a).unwrap();
    let sol = file.to_integral(&inst).unwrap();
    assert_eq!(sol.cost, file.cost);
    assert_eq!(sol.max_load_ratio, file.max_load_ratio);
    assert!(verify_guarantees(&inst, file.lp_cost, &sol, file.alpha).all_ok());
}

#[test]
fn single_location_and_default_paths() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "one.json",
        r#"{"n":1,"cost":[[0]],"demand":[1],"capacity":1,"k":1}"#,
    );
    let out = ckm(&["solve", s(&p), "--trace"]);
    assert_eq!(code(&out), 0);
    let sol: SolutionFile = read_json(&dir.path().join("one.solution.json")).unwrap();
    assert_eq!(sol.open, vec![1]);
    assert_eq!(sol.cost, 0.0);
    assert_eq!(sol.path, "trivial-single");
    let doc = std::fs::read_to_string(dir.path().join("one.solution.trace.txt")).unwrap();
    assert_eq!(doc.lines().count(), 1);
}

#[test]
fn trace_of_three_locations_shows_two_cores() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "three.json", THREE);
    assert_eq!(code(&ckm(&["solve", s(&p), "--trace"])), 0);
    let doc = std::fs::read_to_string(dir.path().join("three.solution.trace.txt")).unwrap();
    let cores: Vec<&str> = doc
        .lines()
        .skip_while(|l| !l.trim_start().starts_with("core  members"))
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .collect();
    assert_eq!(cores.len(), 2, "{doc}");
    assert!(cores[0].trim_start().starts_with("0     {0, 2}"), "{doc}");
    assert!(cores[1].trim_start().starts_with("1     {1}"), "{doc}");
    assert!(doc.contains("== Easy case (Lemma 5) =="));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let three = write(dir.path(), "three.json", THREE);
    let out = ckm(&["solve", s(&three), "--alpha", "3"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must be ≥ 4"));

    assert_eq!(code(&ckm(&["frobnicate"])), 1);
    assert_eq!(code(&ckm(&["bench", "--alpha-list", ""])), 1);
    assert_eq!(code(&ckm(&["--help"])), 0);

    let garbled = write(dir.path(), "garbled.json", "{ not json");
    assert_eq!(code(&ckm(&["solve", s(&garbled)])), 2);
    let asym = write(
        dir.path(),
        "asym.json",
        r#"{"n":2,"cost":[[0,1],[2,0]],"demand":[1,1],"capacity":2,"k":1}"#,
    );
    assert_eq!(code(&ckm(&["solve", s(&asym)])), 2);
    let over = write(
        dir.path(),
        "over.json",
        r#"{"n":2,"cost":[[0,1],[1,0]],"demand":[2,2],"capacity":1,"k":1}"#,
    );
    assert_eq!(code(&ckm(&["solve", s(&over)])), 3);
    assert_eq!(
        code(&ckm(&["gen", "--n", "5", "--k", "1", "--capacity", "1"])),
        3
    );
    assert_eq!(code(&ckm(&["solve", s(&three), "--model", "ckl"])), 2);
}

#[test]
fn ckl_model() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "ckl.json",
        r#"{"n": 3, "facilities": 2,
            "cost": [[0, 4, 1, 3, 2], [4, 0, 3, 1, 2]],
            "demand": [1, 2, 1], "capacity": 3, "k": 2}"#,
    );
    let out = ckm(&["solve", s(&p), "--model", "ckl", "--trace"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sol: SolutionFile = read_json(&dir.path().join("ckl.solution.json")).unwrap();
    assert_eq!(sol.open.len(), 2);
    for j in 0..3 {
        let col: f64 = sol.assign.iter().filter(|e| e.1 == j).map(|e| e.2).sum();
        assert!((col - 1.0).abs() < 1e-9);
    }
    assert!(dir.path().join("ckl.solution.trace.txt").exists());
}

#[test]
fn generated_ckl_file_solves() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gen.json");
    let out = ckm(&[
        "gen",
        "--n",
        "7",
        "--facilities",
        "5",
        "--seed",
        "2",
        "--out",
        s(&p),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let file: InstanceFile = read_json(&p).unwrap();
    assert_eq!((file.n, file.facilities, file.cost.len()), (7, Some(5), 5));
    let out = ckm(&["solve", s(&p), "--model", "ckl"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_csv_is_ordered_and_reproducible() {
    let args = [
        "bench",
        "--count",
        "8",
        "--n-range",
        "5..9",
        "--alpha-list",
        "4,10,20",
        "--seed",
        "11",
    ];
    let a = ckm(&args);
    let b = ckm(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,n,alpha,C_LP,OPT?,rounded cost,ratio-vs-LP,centers,max-load-ratio,easy-case?"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 24);
    for (idx, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<u64>().unwrap(), 11 + (idx / 3) as u64);
        let alpha: f64 = r[2].parse().unwrap();
        let load: f64 = r[8].parse().unwrap();
        assert!(load <= 2.0 + 2.0 / alpha + 1e-9);
    }
}

/// Nine locations at mutual distance 1 rounded from the symmetric LP
/// optimum go through the star branch; the document lists the star.
#[test]
fn full_path_document_lists_stars() {
    let n = 9;
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; n], 9.0 / 8.0, 8).unwrap();
    let mut x = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = if i == j { 8.0 / 9.0 } else { 1.0 / 72.0 };
        }
    }
    let frac = FractionalSolution::with_costs(&inst, x, vec![8.0 / 9.0; n]);
    let out = round(&inst, frac, 4.0).unwrap();
    assert_eq!(out.path, PipelinePath::Full);
    let trace = build_trace(&inst, &out).unwrap();
    let doc = render_trace(&trace);
    assert!(doc.contains("== Step 3: redistribution =="));
    assert!(doc.contains("== Step 4: stars =="));
    assert!(!doc.contains("Lemma 5"));
    assert!(
        doc.contains(&format!("4 ({})", case_name(StarCase::OddLightRoot))),
        "{doc}"
    );
    assert!(doc.contains("isolated (opened as is) = {4, 5, 6, 7, 8}"));

    // The CLI writes the same document for the same solve.
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "nine.json",
        &to_json(&InstanceFile::from_instance(&inst)),
    );
    assert_eq!(code(&ckm(&["solve", s(&p), "--trace"])), 0);
}
