use std::process::{Command, Output};

use dssy::mesh::{theta_mesh, Mesh};

fn dssy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dssy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dssy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_reports_dofs() {
    let o = dssy(&["solve", "--n", "4", "--element", "np"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "dofs=24"), "{out}");
    assert!(out.contains("err_l2=5.4366e-02"), "{out}");
}

#[test]
fn solve_writes_csv_and_markdown() {
    let csv = tmp("solve.csv");
    let o = dssy(&["solve", "--problem", "stokes", "--n", "8", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dofs=287"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,dof,err_l2,ratio_l2,err_h1,ratio_h1"));
    assert!(lines.next().unwrap().starts_with("0.125,287,5.42"));

    let md = tmp("solve.md");
    let o = dssy(&[
        "solve", "--problem", "elasticity", "--lambda", "10", "--n", "4", "--format", "md", "--out",
        md.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&md).unwrap().contains("| 1/4 "));
}

#[test]
fn study_prints_table() {
    let o = dssy(&["study", "--problem", "poisson", "--mesh", "theta", "--theta", "0.7", "--element", "np", "--ctilde", "0", "--levels", "4,8,16"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "0.25,24,5.4366e-02,,8.2211e-01,");
    assert_eq!(lines[3], "0.0625,480,4.1452e-03,1.92,2.2134e-01,0.96");

    let o = dssy(&["study", "--element", "p", "--levels", "4,8", "--format", "md"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0.5284E-01"));
}

#[test]
fn mesh_round_trips_through_file() {
    let path = tmp("mesh.txt");
    let o = dssy(&["mesh", "--kind", "theta", "--n", "6", "--theta", "0.3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(Mesh::read(&path).unwrap(), theta_mesh(6, 0.3).unwrap());

    let o = dssy(&["mesh", "--kind", "random", "--n", "5", "--alpha", "0.25", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("quadmesh v1 36 25"));
}

#[test]
fn timing_and_verify() {
    let o = dssy(&["timing", "--levels", "4,8", "--runs", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("h,t_np,t_p,ratio"));
    assert_eq!(out.lines().count(), 3);

    let o = dssy(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn exit_codes() {
    assert_eq!(dssy(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(dssy(&["solve", "--element", "q"]).status.code(), Some(2));
    assert_eq!(dssy(&["solve", "--n", "5"]).status.code(), Some(2));
    assert_eq!(dssy(&["solve", "--element", "p", "--l", "3"]).status.code(), Some(2));
    assert_eq!(dssy(&["solve", "--problem", "elasticity", "--mu", "-1"]).status.code(), Some(2));
    assert_eq!(dssy(&["mesh", "--kind", "random", "--alpha", "0.7"]).status.code(), Some(2));
    assert_eq!(dssy(&[]).status.code(), Some(2));
    // one-point quadrature leaves the interior block singular
    assert_eq!(dssy(&["solve", "--element", "p", "--quad", "1", "--n", "4"]).status.code(), Some(1));
    assert_eq!(dssy(&["--help"]).status.code(), Some(0));
}
