//! Solving on a mesh read from the quadmesh text format, with
//! non-homogeneous boundary values passed straight to the assembler.

use dssy::assembly::{assemble, AssemblyOptions, Operator};
use dssy::bench::norms::error_norms_against;
use dssy::bench::{solve, SolveOptions};
use dssy::geometry::Point2;
use dssy::{ElementKind, Mesh};

const MESH: &str = "quadmesh v1 9 4
n 0 0
n 0.5 0
n 1 0
n 0 0.4
n 0.6 0.55
n 1 0.5
n 0 1
n 0.45 1
n 1 1
c 4 3 0 1
c 5 4 1 2
c 7 6 3 4
c 8 7 4 5
";

fn main() -> dssy::Result<()> {
    let mesh = Mesh::from_text(MESH)?;
    println!("{} cells, {} edges ({} interior)", mesh.n_cells(), mesh.edges.len(), mesh.n_interior_edges());

    // harmonic data: u = x₁² - x₂², so -Δu = 0
    let u = |x: Point2| [x.x1 * x.x1 - x.x2 * x.x2, 0.0];
    let grad = |x: Point2| [Point2::new(2.0 * x.x1, -2.0 * x.x2), Point2::ZERO];
    for kind in [ElementKind::nonparametric(0.0), ElementKind::parametric()] {
        let assembled = assemble(&mesh, kind, Operator::Laplace, None, Some(&u), AssemblyOptions::default())?;
        let sol = solve::finish(&mesh, assembled, SolveOptions::default())?;
        let e = error_norms_against(&mesh, kind, &sol.u_h, &u, &grad, 6)?;
        println!("{:<12} dofs {:>2}  L2 {:.3e}  H1 {:.3e}", kind.label(), sol.dofs(), e.l2, e.h1_broken);
    }
    Ok(())
}
