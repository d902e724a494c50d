use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidkit"))
        .args(args)
        .env_remove("RIGIDKIT_SEED")
        .output()
        .unwrap()
}

fn run_out(args: &[&str], out: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = out.to_str().unwrap();
    all.extend(["--out", out]);
    run(&all)
}

fn config(name: &str) -> String {
    data(&format!("configs/{name}.toml"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

#[test]
fn analyze_reports() {
    let o = run(&["analyze", &data("graphs/two_cycles.graph")]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("is_minimally_rigid true"));
    assert!(s.contains("is_redundantly_rigid false"));
    assert!(s.contains("is_generically_globally_rigid false"));
    let k4 = stdout(&run(&["analyze", &data("graphs/k4.graph")]));
    assert!(k4.contains("is_generically_globally_rigid true"));
    let fig = stdout(&run(&["analyze", &data("graphs/dangling.graph")]));
    assert!(fig.contains("is_infinitesimally_rigid false"));
}

#[test]
fn missing_or_malformed_input_exits_2() {
    assert_eq!(run(&["analyze", "/nonexistent/graph"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.graph");
    std::fs::write(&bad, "n 3\ne 1 9\n").unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn enumerate_counts_and_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "tri");
    assert!(run_out(&["enumerate", &config("enumerate_triangle")], &dir).status.success());
    assert!(read(&dir, "enumerate.txt").contains("count 2"));
    assert!(dir.join("framework_1.txt").exists() && dir.join("framework_2.txt").exists());

    let dir = out_dir(&tmp, "tc");
    assert!(run_out(&["enumerate", &config("enumerate_two_cycles"), "--svg"], &dir).status.success());
    let report = read(&dir, "enumerate.txt");
    assert!(report.contains("count 4"));
    assert!(report.contains("bound_satisfied true"));
    assert!(dir.join("framework_4.svg").exists());

    let o = run_out(&["enumerate", &config("enumerate_infeasible")], &out_dir(&tmp, "bad"));
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn simulate_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "lf");
    assert!(run_out(&["simulate", &config("simulate_leader_follower")], &dir).status.success());
    let csv = read(&dir, "trajectory.csv");
    assert!(csv.starts_with("t,x1_1,x1_2,x2_1,x2_2,e_1\n"));
    assert!(read(&dir, "simulate.txt").contains("termination Converged"));

    let dir = out_dir(&tmp, "eq");
    assert!(run_out(&["simulate", &config("simulate_at_equilibrium")], &dir).status.success());
    assert!(read(&dir, "simulate.txt").contains("termination Converged"));

    let o = run_out(&["simulate", &config("simulate_planted")], &out_dir(&tmp, "planted"));
    assert_eq!(o.status.code(), Some(6));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("u1"));
}

#[test]
fn linearize_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "tc");
    assert!(run_out(&["linearize", &config("linearize_two_cycles")], &dir).status.success());
    let spec = read(&dir, "spectrum.txt");
    assert!(spec.contains("zero_multiplicity_full 5"));
    assert!(spec.contains("formula_agrees false"));
    assert!(read(&dir, "eigenvalues.csv").starts_with("re,im,abs,which\n"));

    let dir = out_dir(&tmp, "neg");
    assert!(run_out(&["linearize", &config("linearize_negative_gain")], &dir).status.success());
    assert!(read(&dir, "spectrum.txt").contains("hurwitz_nonzero false"));
}

#[test]
fn henneberg_and_scope() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "h");
    assert!(run_out(&["henneberg", "6", "--seed", "2", "--vertex-add-only"], &dir).status.success());
    let seq = read(&dir, "sequence.txt");
    assert_eq!(seq.lines().filter(|l| l.starts_with("va")).count(), 4);
    let graph = read(&dir, "graph.txt");
    assert_eq!(graph.lines().filter(|l| l.starts_with('e')).count(), 9);
    assert_eq!(run_out(&["henneberg", "1"], &out_dir(&tmp, "one")).status.code(), Some(3));
}

#[test]
fn orbit_requires_two_cycles() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "tc");
    assert!(run_out(&["orbit", &config("orbit_two_cycles")], &dir).status.success());
    for k in 1..=4 {
        assert!(dir.join(format!("orbit_{k}.txt")).exists());
    }
    let o = run_out(&["orbit", &config("orbit_triangle")], &out_dir(&tmp, "tri"));
    assert_eq!(o.status.code(), Some(8));
}

#[test]
fn seed_env_changes_random_start() {
    let tmp = tempfile::tempdir().unwrap();
    let a = out_dir(&tmp, "a");
    let b = out_dir(&tmp, "b");
    let cfg = config("simulate_two_cycles");
    let with_seed = |dir: &Path, seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_rigidkit"))
            .args(["simulate", &cfg, "--out", dir.to_str().unwrap()])
            .env("RIGIDKIT_SEED", seed)
            .output()
            .unwrap()
    };
    assert!(with_seed(&a, "1").status.success());
    assert!(with_seed(&b, "2").status.success());
    assert_ne!(read(&a, "trajectory.csv"), read(&b, "trajectory.csv"));
    assert_eq!(with_seed(&b, "x").status.code(), Some(2));
}
