//! θ-trapezoidal and randomly perturbed meshes.

use dssy::geometry::decompose;
use dssy::mesh::{random_mesh, theta_mesh, Mesh};

fn describe(name: &str, m: &Mesh) -> dssy::Result<()> {
    let mut smax = 0.0_f64;
    let (mut amin, mut amax) = (f64::MAX, 0.0_f64);
    for q in m.quads() {
        let d = decompose(&q)?;
        smax = smax.max(d.s_tilde.norm());
        amin = amin.min(q.area());
        amax = amax.max(q.area());
    }
    println!(
        "{name:<22} nodes {:>4}  cells {:>4}  interior edges {:>4}  area {amin:.5}..{amax:.5}  max |s̃| {smax:.3}",
        m.nodes.len(),
        m.n_cells(),
        m.n_interior_edges()
    );
    Ok(())
}

fn main() -> dssy::Result<()> {
    for theta in [0.0, 0.3, 0.5, 0.7] {
        describe(&format!("theta_mesh(8, {theta})"), &theta_mesh(8, theta)?)?;
    }
    for seed in 1..=3 {
        describe(&format!("random_mesh(8, 0.25, {seed})"), &random_mesh(8, 0.25, seed)?)?;
    }
    print!("{}", theta_mesh(2, 0.7)?.to_text());
    Ok(())
}
