//! Pure-displacement elasticity: errors stay put as λ grows.

use dssy::bench::study::{convergence_study, MeshFamily, StudyConfig};
use dssy::bench::ProblemSpec;
use dssy::ElementKind;

fn main() -> dssy::Result<()> {
    let levels = [4, 8, 16, 32];
    println!("{:>8} {}", "λ", levels.map(|n| format!("{:>11}", format!("h=1/{n}"))).join(""));
    for lambda in [1.0, 1e2, 1e4, 1e5] {
        let problem = ProblemSpec::elasticity(1.0, lambda)?;
        let config = StudyConfig::new(problem, MeshFamily::Theta { theta: 0.7 }, ElementKind::nonparametric(0.0))
            .with_levels(&levels);
        let rows = convergence_study(&config)?;
        let errs: String = rows.iter().map(|r| format!("{:>11.4e}", r.err_l2)).collect();
        println!("{lambda:>8.0e} {errs}");
    }
    Ok(())
}
