use dssy::assembly::{self, AssemblyOptions};
use dssy::bench::study::{convergence_study, MeshFamily, StudyConfig};
use dssy::bench::{solve, ProblemSpec, SolveOptions};
use dssy::linsolve::solve_spd;
use dssy::mesh::theta_mesh;
use dssy::ElementKind;

/// Published `(L2, H1)` errors for h = 1/4, 1/8, 1/16, 1/32.
type Rows = [(f64, f64); 4];

fn check(theta: f64, kind: ElementKind, expected: &Rows, tol: f64) {
    let config = StudyConfig::new(ProblemSpec::poisson(), MeshFamily::Theta { theta }, kind).with_levels(&[4, 8, 16, 32]);
    let rows = convergence_study(&config).unwrap();
    for (r, &(l2, h1)) in rows.iter().zip(expected) {
        let (e0, e1) = ((r.err_l2 - l2).abs() / l2, (r.err_h1 - h1).abs() / h1);
        assert!(
            e0 <= tol && e1 <= tol,
            "θ={theta} {} h=1/{}: {:.4e}/{:.4e} vs {l2:.4e}/{h1:.4e}",
            kind.label(),
            r.n,
            r.err_l2,
            r.err_h1
        );
    }
}

#[test]
fn other_trapezoid_angles() {
    check(
        0.3,
        ElementKind::parametric(),
        &[(0.3365e-01, 0.7198), (0.9423e-02, 0.3732), (0.2511e-02, 0.1895), (0.6483e-03, 0.9533e-01)],
        0.005,
    );
    check(
        0.3,
        ElementKind::nonparametric(0.0),
        &[(0.3433e-01, 0.7306), (0.9427e-02, 0.3733), (0.2504e-02, 0.1889), (0.6479e-03, 0.9506e-01)],
        0.005,
    );
    check(
        0.5,
        ElementKind::parametric(),
        &[(0.4091e-01, 0.7742), (0.1206e-01, 0.4045), (0.3291e-02, 0.2066), (0.8618e-03, 0.1043)],
        0.005,
    );
    check(
        0.5,
        ElementKind::nonparametric(0.0),
        &[(0.4175e-01, 0.7690), (0.1205e-01, 0.3984), (0.3263e-02, 0.2039), (0.8577e-03, 0.1032)],
        0.005,
    );
}

#[test]
fn nonparametric_c1_at_theta_07() {
    check(
        0.7,
        ElementKind::nonparametric(1.0),
        &[(0.5840e-01, 0.8486), (0.1655e-01, 0.4452), (0.4229e-02, 0.2261), (0.1102e-02, 0.1145)],
        0.01,
    );
}

#[test]
fn cg_iterations_at_h16() {
    let mesh = theta_mesh(16, 0.7).unwrap();
    let problem = ProblemSpec::poisson();
    let f = |x| problem.forcing(x);
    let a = assembly::assemble(
        &mesh,
        ElementKind::nonparametric(0.0),
        problem.operator(),
        Some(&f),
        None,
        AssemblyOptions::default(),
    )
    .unwrap();
    let sol = solve_spd(&a.system.matrix, &a.system.rhs, 1e-12, 5000).unwrap();
    assert!(sol.residual <= 1e-12);
    assert_eq!(sol.iterations, 45);
}

#[test]
fn stokes_at_h8() {
    let mesh = theta_mesh(8, 0.7).unwrap();
    let problem = ProblemSpec::stokes();
    let sol = solve(&mesh, ElementKind::nonparametric(0.0), &problem, SolveOptions::default()).unwrap();
    let m = dssy::bench::study::measure(&mesh, &sol, &problem).unwrap();
    assert_eq!(m.dof, 287);
    assert!((m.primary - 0.5424e-02).abs() / 0.5424e-02 < 0.01, "{}", m.primary);
    assert!((m.secondary - 0.1898).abs() / 0.1898 < 0.01, "{}", m.secondary);
    let p = sol.pressure.unwrap();
    let areas: Vec<f64> = mesh.quads().map(|q| q.area()).collect();
    let mean: f64 = p.iter().zip(&areas).map(|(p, a)| p * a).sum();
    assert!(mean.abs() <= 1e-12);
}
