//! Convergence of the nonparametric element for `-Δu = f` on θ = 0.7 meshes.
//!
//! `cargo run --release --example poisson_convergence -- 1.0` uses c̃ = 1.

use dssy::bench::study::{convergence_study, to_markdown, MeshFamily, StudyConfig};
use dssy::bench::ProblemSpec;
use dssy::ElementKind;

fn main() -> dssy::Result<()> {
    let c: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let problem = ProblemSpec::poisson();
    let config = StudyConfig::new(problem, MeshFamily::Theta { theta: 0.7 }, ElementKind::nonparametric(c))
        .with_levels(&[4, 8, 16, 32, 64]);
    let rows = convergence_study(&config)?;
    println!("u = sin πx₁ sin πx₂, nonparametric element, c̃ = {c}\n");
    print!("{}", to_markdown(&rows, &problem));
    Ok(())
}
