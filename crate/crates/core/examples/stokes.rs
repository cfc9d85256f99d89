//! Stokes flow with the nonparametric element for velocity and cellwise
//! constant pressure.

use dssy::bench::study::{convergence_study, to_markdown, MeshFamily, StudyConfig};
use dssy::bench::ProblemSpec;
use dssy::ElementKind;

fn main() -> dssy::Result<()> {
    let problem = ProblemSpec::stokes();
    let config = StudyConfig::new(problem, MeshFamily::Theta { theta: 0.7 }, ElementKind::nonparametric(0.0))
        .with_levels(&[4, 8, 16, 32]);
    let rows = convergence_study(&config)?;
    print!("{}", to_markdown(&rows, &problem));
    Ok(())
}
