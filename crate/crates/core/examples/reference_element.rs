//! The nonparametric reference element on an intermediate cell `K̃`.
//!
//! `cargo run --example reference_element -- 0.2 -0.3 1.0`

use dssy::geometry::{decompose, Point2, Quadrilateral, REF_MIDPOINTS};
use dssy::refelem::{circle_center_check, mean_value_residual, nodal_basis, unisolvency_det};

fn main() -> dssy::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let s = Point2::new(*args.first().unwrap_or(&0.2), *args.get(1).unwrap_or(&-0.3));
    let c = *args.get(2).unwrap_or(&0.0);

    println!("s̃ = ({}, {}), c̃ = {c}", s.x1, s.x2);
    println!("unisolvency det = {:.6}", unisolvency_det(s, c));
    println!("mean-value residuals = {:?}", mean_value_residual(s, c));

    let (center, r2) = circle_center_check(s)?;
    println!("circle through the η̃ points: center ({:.4}, {:.4}), r² = {:.6}", center.x1, center.x2, r2);

    let el = nodal_basis(s, c)?;
    println!("nodal basis at the edge midpoints:");
    for m in REF_MIDPOINTS {
        let v = el.values(m);
        println!("  m̂ = ({:>4}, {:>4}): {:>8.5} {:>8.5} {:>8.5} {:>8.5}", m.x1, m.x2, v[0], v[1], v[2], v[3]);
    }

    // a physical trapezoid and its decomposition F = A∘S + b
    let q = Quadrilateral::new([
        Point2::new(1.2, 1.0),
        Point2::new(0.0, 1.0),
        Point2::new(0.0, 0.0),
        Point2::new(0.8, 0.0),
    ]);
    let dec = decompose(&q)?;
    println!("trapezoid: s̃ = ({:.4}, {:.4}), det A = {:.4}", dec.s_tilde.x1, dec.s_tilde.x2, dec.a.det());
    Ok(())
}
