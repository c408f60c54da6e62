//! End-to-end tests of the binary: exit codes, file schemas, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE_CONFIG: &str = r#"
seed = 42

[model]
n_agents = 2
dim = 1
tau = 1.0
scheme = "classical"

[model.influence]
family = "constant"
level = 1.0

[integrator]
t_end = 40.0
steps_per_delay = 32

[history]
kind = "constant-per-agent"
positions = [[0.0], [1.0]]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hkdelay"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(subcmd: &str, config: &Path, out: &Path) -> Output {
    bin()
        .arg(subcmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_writes_trajectory_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), BASE_CONFIG);
    let out = tmp.path().join("out");
    let res = run("simulate", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{res:?}");
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,agent,coord,x,v\n"));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"final_diameter\""));
    assert!(summary.contains("\"consensus_time\""));
}

#[test]
fn bad_tau_exits_2_and_names_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &BASE_CONFIG.replace("tau = 1.0", "tau = -0.5"));
    let res = run("simulate", &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("tau"), "stderr: {msg}");
}

#[test]
fn unknown_key_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &format!("{BASE_CONFIG}\nextra_key = 1\n"));
    let res = run("simulate", &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_config_exits_2() {
    let tmp = TempDir::new().unwrap();
    let res = run("simulate", &tmp.path().join("nope.toml"), &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    let random_cfg = BASE_CONFIG
        .replace(
            "kind = \"constant-per-agent\"\npositions = [[0.0], [1.0]]",
            "kind = \"random-constant\"\nbox = [[0.0, 10.0]]",
        )
        .replace("n_agents = 2", "n_agents = 12");
    let cfg = write_config(tmp.path(), &random_cfg);
    let out1 = tmp.path().join("out1");
    let out2 = tmp.path().join("out2");
    assert_eq!(run("simulate", &cfg, &out1).status.code(), Some(0));
    assert_eq!(run("simulate", &cfg, &out2).status.code(), Some(0));
    for name in ["trajectory.csv", "summary.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn verify_two_agent_case_exits_0() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), BASE_CONFIG);
    let out = tmp.path().join("out");
    let res = run("verify", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{res:?}");
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass\n"));
    assert!(report.lines().skip(1).all(|l| l.ends_with("true")));
    let cert = std::fs::read_to_string(out.join("certificate.json")).unwrap();
    for field in [
        "\"psi_lower\"",
        "\"sigma\"",
        "\"gamma\"",
        "\"gamma_minus\"",
        "\"gamma_plus\"",
        "\"tau\"",
        "\"m\"",
        "\"M\"",
        "\"N\"",
    ] {
        assert!(cert.contains(field), "certificate missing {field}: {cert}");
    }
}

#[test]
fn verify_with_self_scheme_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &BASE_CONFIG.replace("scheme = \"classical\"", "scheme = \"normalized-with-self\""),
    );
    let res = run("verify", &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn verify_short_horizon_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &BASE_CONFIG.replace("t_end = 40.0", "t_end = 5.0"));
    let res = run("verify", &cfg, &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("horizon too short for k=1"), "stderr: {msg}");
}

#[test]
fn verify_random_twenty_agents_exits_0() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
seed = 4242

[model]
n_agents = 20
dim = 1
tau = 2.0
scheme = "classical"

[model.influence]
family = "power-law"
beta = 3.0

[integrator]
t_end = 400.0
steps_per_delay = 32

[history]
kind = "random-constant"
box = [[0.0, 4.0]]

[analysis]
eps_consensus = 1e-8
"#;
    let cfg = write_config(tmp.path(), text);
    let res = run("verify", &cfg, &tmp.path().join("out"));
    assert_eq!(
        res.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn sweep_degenerate_grid_matches_simulate_and_verify() {
    let tmp = TempDir::new().unwrap();
    let text = format!(
        "{}\n[sweep]\ntau = [1.0]\nbeta = [0.0]\nn_agents = [2]\nseeds = [42]\n",
        BASE_CONFIG.replace(
            "family = \"constant\"\nlevel = 1.0",
            "family = \"power-law\"\nbeta = 0.0"
        )
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = run("sweep", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{res:?}");
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau,beta,n_agents,seed,t_to_consensus,final_diameter,min_gamma_tilde,status"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(",ok"));
}

#[test]
fn sweep_multiple_seeds_distinct_rows() {
    let tmp = TempDir::new().unwrap();
    let random_base = BASE_CONFIG
        .replace(
            "kind = \"constant-per-agent\"\npositions = [[0.0], [1.0]]",
            "kind = \"random-constant\"\nbox = [[0.0, 5.0]]",
        )
        .replace(
            "family = \"constant\"\nlevel = 1.0",
            "family = \"power-law\"\nbeta = 1.0",
        )
        .replace("n_agents = 2", "n_agents = 5");
    let text = format!(
        "{random_base}\n[sweep]\ntau = [1.0]\nbeta = [1.0]\nn_agents = [5]\nseeds = [1, 2, 3]\n"
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = run("sweep", &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{res:?}");
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = sweep.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let seeds: Vec<&str> = rows
        .iter()
        .map(|r| r.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(seeds, vec!["1", "2", "3"]);
}

#[test]
fn meanfield_small_experiment_exits_0() {
    let tmp = TempDir::new().unwrap();
    let text = format!(
        "{}\n[meanfield]\nsource = \"uniform-box\"\nbox = [[0.0, 10.0]]\nn_values = [5, 10]\nseeds = [1]\nhorizon = 80.0\n",
        BASE_CONFIG.replace(
            "family = \"constant\"\nlevel = 1.0",
            "family = \"power-law\"\nbeta = 1.0"
        )
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let res = run("meanfield", &cfg, &out);
    assert_eq!(
        res.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let mf = std::fs::read_to_string(out.join("meanfield.csv")).unwrap();
    assert!(mf.starts_with("N,seed,t,diameter,w1_vs_ref\n"));
    // both runs appear
    assert!(mf.lines().any(|l| l.starts_with("5,1,")));
    assert!(mf.lines().any(|l| l.starts_with("10,1,")));
}

#[test]
fn config_round_trip_is_identity() {
    // parse -> serialize -> parse hits the same run: compare simulate output
    let tmp = TempDir::new().unwrap();
    let cfg_path = write_config(tmp.path(), BASE_CONFIG);
    let out1 = tmp.path().join("a");
    assert_eq!(run("simulate", &cfg_path, &out1).status.code(), Some(0));
    // hand-reserialized equivalent config (whitespace/order changes)
    let reordered = r#"
[model]
tau = 1.0
dim = 1
n_agents = 2
scheme = "classical"

[model.influence]
family = "constant"
level = 1.0

[history]
kind = "constant-per-agent"
positions = [[0.0], [1.0]]

[integrator]
steps_per_delay = 32
t_end = 40.0

seed = 42
"#;
    // `seed` must stay top-level: move it before the tables
    let reordered = format!("seed = 42\n{}", reordered.replace("\nseed = 42\n", ""));
    let cfg2 = write_config(&tmp.path().join("."), &reordered);
    let out2 = tmp.path().join("b");
    assert_eq!(run("simulate", &cfg2, &out2).status.code(), Some(0));
    assert_eq!(
        std::fs::read(out1.join("trajectory.csv")).unwrap(),
        std::fs::read(out2.join("trajectory.csv")).unwrap()
    );
}
