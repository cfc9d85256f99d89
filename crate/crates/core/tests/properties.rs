use dssy::assembly::{build_dofmap, interpolate, local_matrices, ElementKind, Operator};
use dssy::bench::norms::{error_norms_against, ERROR_QUAD_POINTS};
use dssy::bench::study::format_exp;
use dssy::geometry::{convexity_margin, decompose, Point2, Quadrilateral};
use dssy::linsolve::dense;
use dssy::mesh::{random_mesh, Mesh};
use dssy::refelem::{evaluation_matrix, mean_value_residual, nodal_basis, unisolvency_det};
use proptest::prelude::*;

/// `s̃` with a strictly convex intermediate cell.
fn shape() -> impl Strategy<Value = Point2> {
    (-0.95..0.95f64, -0.95..0.95f64)
        .prop_map(|(a, b)| Point2::new(a, b))
        .prop_filter("convex", |s| convexity_margin(*s) > 0.02)
}

/// Convex quadrilateral: jittered square, scaled, rotated and shifted.
fn quad() -> impl Strategy<Value = Quadrilateral> {
    (
        prop::array::uniform8(-0.3..0.3f64),
        0.01..2.0f64,
        0.0..std::f64::consts::TAU,
        -5.0..5.0f64,
        -5.0..5.0f64,
    )
        .prop_map(|(j, scale, angle, tx, ty)| {
            let base = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
            let (c, s) = (angle.cos(), angle.sin());
            let v = std::array::from_fn(|k| {
                let x = (base[k].0 + j[2 * k]) * scale;
                let y = (base[k].1 + j[2 * k + 1]) * scale;
                Point2::new(c * x - s * y + tx, s * x + c * y + ty)
            });
            Quadrilateral::new(v)
        })
}

fn kinds() -> [ElementKind; 3] {
    [ElementKind::nonparametric(0.0), ElementKind::nonparametric(1.0), ElementKind::parametric()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mean_value_property(s in shape(), c in -3.0..3.0f64) {
        for r in mean_value_residual(s, c) {
            prop_assert!(r.abs() <= 1e-12);
        }
    }

    #[test]
    fn determinant_identity(s in shape(), c in -3.0..3.0f64) {
        let closed = unisolvency_det(s, c);
        let numeric = dense::det(&evaluation_matrix(s, c));
        prop_assert!((numeric - closed).abs() <= 1e-12 * closed.abs().max(1.0));
    }

    #[test]
    fn nodal_basis_partition_of_unity(s in shape(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let el = nodal_basis(s, 0.0).unwrap();
        let sum: f64 = el.values(Point2::new(x, y)).iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        let g = el.grads(Point2::new(x, y)).iter().fold(Point2::ZERO, |a, &b| a + b);
        prop_assert!(g.norm() <= 1e-11);
    }

    #[test]
    fn bilinear_map_hits_vertices(q in quad()) {
        let dec = decompose(&q).unwrap();
        let refv = dssy::geometry::REF_VERTICES;
        for k in 0..4 {
            prop_assert!(dec.forward(refv[k]).dist(q.v[k]) <= 1e-12 * (1.0 + q.diameter()));
        }
    }

    #[test]
    fn local_stiffness_is_symmetric_with_constant_kernel(q in quad()) {
        for kind in kinds() {
            let loc = local_matrices(&q, kind, Operator::Laplace, None, 5).unwrap();
            let k = &loc.stiffness;
            let scale = k.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            for i in 0..k.n {
                for j in 0..k.n {
                    prop_assert!((k.get(i, j) - k.get(j, i)).abs() <= 1e-12 * scale);
                }
                prop_assert!(k.get(i, i) > 0.0);
            }
            // constants: all edge values 1, cell moment 0
            let ones: Vec<f64> = (0..k.n).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
            for v in k.mul_vec(&ones) {
                prop_assert!(v.abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn random_meshes_are_convex_and_reproducible(n in 2usize..12, alpha in 0.0..0.45f64, seed in 0u64..1000) {
        let m = random_mesh(n, alpha, seed).unwrap();
        prop_assert_eq!(m.n_interior_edges(), 2 * n * (n - 1));
        prop_assert_eq!(m.edges.len(), 2 * n * (n + 1));
        for q in m.quads() {
            let d = decompose(&q).unwrap();
            prop_assert!(convexity_margin(d.s_tilde) > 0.0);
        }
        prop_assert_eq!(m, random_mesh(n, alpha, seed).unwrap());
    }

    #[test]
    fn mesh_text_round_trip(n in 2usize..8, seed in 0u64..100) {
        let m = random_mesh(n, 0.3, seed).unwrap();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn exponent_format_round_trips(x in 1e-300..1e300f64) {
        let s = format_exp(x, 4);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-5 * x);
        let (_, e) = s.split_once('e').unwrap();
        prop_assert!(e.starts_with('-') || e.starts_with('+'));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_fields_are_interpolated_exactly(
        seed in 0u64..1000,
        a in prop::array::uniform3(-5.0..5.0f64),
        b in prop::array::uniform3(-5.0..5.0f64),
    ) {
        let m = random_mesh(5, 0.35, seed).unwrap();
        let u = move |x: Point2| [a[0] + a[1] * x.x1 + a[2] * x.x2, b[0] + b[1] * x.x1 + b[2] * x.x2];
        let g = move |_: Point2| [Point2::new(a[1], a[2]), Point2::new(b[1], b[2])];
        for kind in kinds() {
            let dm = build_dofmap(&m, kind).unwrap();
            let uh = interpolate(&m, &dm, 2, &u).unwrap();
            let e = error_norms_against(&m, kind, &uh, &u, &g, ERROR_QUAD_POINTS).unwrap();
            prop_assert!(e.l2 <= 1e-11 && e.h1_broken <= 1e-11);
        }
    }
}
