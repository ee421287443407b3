mod common;

use cuspidal_atlas::kinematics::jacobian_det;
use cuspidal_atlas::topology::aspects::label_aspects;
use cuspidal_atlas::topology::genericity::det_scale;
use cuspidal_atlas::topology::{
    count_aspects, count_aspects_on, genericity, homotopy_class, singular_curves, torus_dist, CurveOrigin, TorusGrid,
};
use cuspidal_atlas::{Settings, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn row_d_has_two_closed_fold_curves() {
    let p = common::row("d").params();
    let curves = singular_curves(&p, 256).unwrap();
    assert_eq!(curves.len(), 2);
    assert!(curves.iter().all(|c| c.closed && !c.suspect && c.origin == CurveOrigin::Fold));
}

#[test]
fn curve_vertices_lie_on_the_singular_set() {
    let tol = Tolerances::default();
    for r in &common::ROWS {
        let p = r.params();
        let scale = det_scale(&p, &TorusGrid::new(256));
        for c in singular_curves(&p, 256).unwrap() {
            for &(a, b) in &c.points {
                let d = jacobian_det(&p, a, b).abs();
                assert!(d < tol.eps_curve * scale, "row {}: |det| = {d} at ({a}, {b})", r.label);
            }
        }
    }
}

#[test]
fn axis_lines_are_traced_when_the_forearm_can_reach_the_axis() {
    let p = common::row("f").params();
    let curves = singular_curves(&p, 128).unwrap();
    let axis: Vec<_> = curves.iter().filter(|c| c.origin == CurveOrigin::AxisLine).collect();
    assert_eq!(axis.len(), 2);
    let want = (-p.d3 / p.d4).acos();
    for c in axis {
        assert!(c.points.iter().all(|&(_, t3)| (t3.abs() - want).abs() < 1e-12));
    }
    let q = common::row("d").params();
    assert!(singular_curves(&q, 128).unwrap().iter().all(|c| c.origin == CurveOrigin::Fold));
}

#[test]
fn aspect_counts_for_unambiguous_rows() {
    for label in ["a", "b", "d", "g", "h"] {
        let r = common::row(label);
        let map = count_aspects(&r.params(), &Settings::default()).unwrap();
        assert_eq!(map.aspect_count(), r.aspects, "row {label}");
    }
}

#[test]
fn aspect_count_ignores_where_the_torus_is_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings = Settings::default();
    for label in ["a", "b", "d", "h"] {
        let p = common::row(label).params();
        let base = count_aspects(&p, &settings).unwrap().aspect_count();
        for _ in 0..5 {
            let shift = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
            assert_eq!(count_aspects_on(&p, &settings, shift).unwrap().aspect_count(), base, "row {label}");
        }
    }
}

#[test]
fn determinant_sign_is_constant_inside_each_aspect() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in &common::ROWS {
        let p = r.params();
        let map = label_aspects(&p, &TorusGrid::new(256));
        let mut checked = 0;
        while checked < 1000 {
            let (a, b) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            if let Some(l) = map.label_at(a, b) {
                let s = jacobian_det(&p, a, b).signum() as i8;
                assert_eq!(s, map.aspects[l].det_sign, "row {} at ({a}, {b})", r.label);
                checked += 1;
            }
        }
    }
}

#[test]
fn wall_cells_touch_the_traced_curves() {
    for label in ["b", "d", "f"] {
        let p = common::row(label).params();
        let grid = TorusGrid::new(128);
        let map = label_aspects(&p, &grid);
        let curves = singular_curves(&p, 128).unwrap();
        let verts: Vec<_> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
        for j in 0..grid.resolution {
            for i in 0..grid.resolution {
                if map.cell_label(i, j).is_none() {
                    let c = grid.cell_center(i, j);
                    let near = verts.iter().any(|&v| torus_dist(v, c) < 1.5 * grid.step());
                    assert!(near, "row {label}: wall cell ({i}, {j}) far from every curve");
                }
            }
        }
    }
}

#[test]
fn genericity_verdicts() {
    let tol = Tolerances::default();
    for (label, want) in [("c", false), ("d", true), ("g", true), ("h", true)] {
        let p = common::row(label).params();
        let curves = singular_curves(&p, 256).unwrap();
        let g = genericity(&p, &curves, &tol);
        assert_eq!(g.generic, want, "row {label}: {:?}", g.witness);
        assert_eq!(g.witness.is_none(), want);
    }
}

#[test]
fn generic_curves_are_pairwise_disjoint() {
    for label in ["d", "h"] {
        let p = common::row(label).params();
        let curves = singular_curves(&p, 256).unwrap();
        let step = TorusGrid::new(256).step();
        for (k, a) in curves.iter().enumerate() {
            for b in &curves[k + 1..] {
                let gap = a
                    .points
                    .iter()
                    .flat_map(|&u| b.points.iter().map(move |&v| torus_dist(u, v)))
                    .fold(f64::INFINITY, f64::min);
                assert!(gap > 2.0 * step, "row {label}: curves {gap} apart");
            }
        }
    }
}

#[test]
fn homotopy_class_of_generic_cuspidal_rows() {
    for label in ["d", "h"] {
        let p = common::row(label).params();
        let h = homotopy_class(&singular_curves(&p, 256).unwrap()).unwrap();
        assert_eq!(h.to_string(), "2(1,0)", "row {label}");
        assert_eq!(h.curve_count(), 2);
    }
}
