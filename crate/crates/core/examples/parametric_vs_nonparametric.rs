//! Parametric element with `x̂₁x̂₂` enrichment and static condensation
//! against the nonparametric element on the same meshes.

use dssy::assembly::{assemble, AssemblyOptions};
use dssy::bench::study::{convergence_study, MeshFamily, StudyConfig};
use dssy::bench::ProblemSpec;
use dssy::mesh::theta_mesh;
use dssy::ElementKind;

fn main() -> dssy::Result<()> {
    let problem = ProblemSpec::poisson();
    let family = MeshFamily::Theta { theta: 0.7 };
    let levels = [4, 8, 16, 32];
    let np = convergence_study(&StudyConfig::new(problem, family, ElementKind::nonparametric(0.0)).with_levels(&levels))?;
    let p = convergence_study(&StudyConfig::new(problem, family, ElementKind::parametric()).with_levels(&levels))?;

    println!("{:>6} | {:>6} {:>11} {:>9} | {:>6} {:>11} {:>9}", "h", "dof", "np L2", "np H1", "dof", "p L2", "p H1");
    for (a, b) in np.iter().zip(&p) {
        println!(
            "{:>6} | {:>6} {:>11.4e} {:>9.4} | {:>6} {:>11.4e} {:>9.4}",
            format!("1/{}", a.n),
            a.dof,
            a.err_l2,
            a.err_h1,
            b.dof,
            b.err_l2,
            b.err_h1
        );
    }

    // the cell unknowns never reach the global system
    let mesh = theta_mesh(16, 0.7)?;
    let f = |x| problem.forcing(x);
    for condense in [true, false] {
        let a = assemble(
            &mesh,
            ElementKind::parametric(),
            problem.operator(),
            Some(&f),
            None,
            AssemblyOptions { condense, ..AssemblyOptions::default() },
        )?;
        println!(
            "condense={condense}: {} global unknowns, {} nonzeros",
            a.system.n_unknowns(),
            a.system.matrix.nnz()
        );
    }
    Ok(())
}
