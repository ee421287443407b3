mod common;

use cuspidal_atlas::kinematics::{ik_quartic, solve_ik, IkOptions};
use cuspidal_atlas::quartic::real_roots;
use cuspidal_atlas::workspace::{critical_value_curves, raster_window, SectionWindow};
use cuspidal_atlas::{find_cusps, posture_count, section_raster, SectionPoint, Settings};

fn point_segment_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - a.0 - s * dx).hypot(p.1 - a.1 - s * dy)
}

#[test]
fn posture_count_examples() {
    let p = common::pocket_design();
    // Beyond the reach nothing is attainable.
    assert_eq!(posture_count(&p, SectionPoint::new(p.reach() + 0.5, 0.3), 1e-6).unwrap(), 0);
    // The lifted solutions agree with the root count.
    let q = common::row("a").params();
    let sols = solve_ik(&q, &cuspidal_atlas::CartesianPoint::new(0.5, 0.0, 0.05), &IkOptions::default()).unwrap();
    assert_eq!(sols.len(), posture_count(&q, SectionPoint::new(0.5, 0.05), 1e-6).unwrap());
}

#[test]
fn pocket_design_section_split() {
    let r = section_raster(&common::pocket_design(), 256, 1e-6).unwrap();
    assert_eq!(r.max_count(), 4);
    assert_eq!(r.min_nonzero_count(), Some(2));
    let h = r.histogram();
    assert_eq!(h[1] + h[3], 0, "odd counts: {h:?}");
}

#[test]
fn four_posture_pixels_only_for_designs_that_have_them() {
    let d = section_raster(&common::row("d").params(), 128, 1e-6).unwrap();
    assert_eq!(d.max_count(), 4);
    let g = section_raster(&common::row("g").params(), 128, 1e-6).unwrap();
    assert_eq!(g.max_count(), 2);
}

#[test]
fn critical_curves_separate_count_changes() {
    for p in [common::pocket_design(), common::row("d").params()] {
        let r = section_raster(&p, 128, 1e-6).unwrap();
        let curves = critical_value_curves(&p, 512).unwrap();
        let px = (r.rho(1) - r.rho(0)).hypot(r.z(1) - r.z(0));
        let mut checked = 0;
        for j in 0..r.resolution {
            for i in 0..r.resolution - 1 {
                if r.count(i, j) == r.count(i + 1, j) {
                    continue;
                }
                let mid = (0.5 * (r.rho(i) + r.rho(i + 1)), r.z(j));
                let d = curves
                    .iter()
                    .flat_map(|c| c.points.windows(2).map(|w| point_segment_dist(mid, w[0], w[1])))
                    .fold(f64::INFINITY, f64::min);
                assert!(d < px, "count change at {mid:?} is {d} from every critical curve");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn cusp_counts_match_reference() {
    let settings = Settings::default();
    for r in &common::ROWS {
        let found = find_cusps(&r.params(), &settings).unwrap();
        assert_eq!(found.cusps.len(), r.cusps, "row {}", r.label);
    }
    assert_eq!(find_cusps(&common::pocket_design(), &settings).unwrap().cusps.len(), 4);
}

#[test]
fn cusps_sit_where_two_and_four_posture_regions_meet() {
    let p = common::pocket_design();
    let reach = p.reach();
    for c in find_cusps(&p, &Settings::default()).unwrap().cusps {
        let w = SectionWindow::around(SectionPoint::new(c.rho, c.z), 1e-2 * reach);
        let h = raster_window(&p, w, 32, 1e-6).unwrap().histogram();
        assert!(h[2] > 0 && h[4] > 0, "cusp ({}, {}) zoom histogram {h:?}", c.rho, c.z);
    }
}

#[test]
fn cusps_are_stable_under_refinement() {
    let base = Settings::default();
    let mut fine = base;
    fine.joint_resolution = 512;
    let mut tight = base;
    tight.tolerances.eps_dedup *= 0.5;
    for p in [common::pocket_design(), common::row("d").params(), common::row("f").params()] {
        let a = find_cusps(&p, &base).unwrap().cusps;
        let b = find_cusps(&p, &fine).unwrap().cusps;
        assert_eq!(a.len(), b.len());
        for c in &a {
            let near = b.iter().map(|k| (k.rho - c.rho).hypot(k.z - c.z)).fold(f64::INFINITY, f64::min);
            assert!(near < 1e-3, "cusp moved by {near}");
        }
        assert_eq!(find_cusps(&p, &tight).unwrap().cusps.len(), a.len());
    }
}

#[test]
fn three_solutions_coalesce_at_each_cusp() {
    for p in [common::pocket_design(), common::row("h").params(), common::row("e").params()] {
        for c in find_cusps(&p, &Settings::default()).unwrap().cusps {
            let mut q = ik_quartic(&p, &cuspidal_atlas::CartesianPoint::new(c.rho, 0.0, c.z));
            let mut t = c.t_triple;
            if t.abs() > 1.0 {
                q = q.reversed();
                t = 1.0 / t;
            }
            let roots = real_roots(&q, 1e-4).unwrap();
            let hit = roots.roots.iter().find(|r| (r.value - t).abs() < 1e-4);
            assert!(matches!(hit, Some(r) if r.multiplicity >= 3), "no triple root at {t}: {roots:?}");
        }
    }
}
