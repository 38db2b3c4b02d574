use std::f64::consts::{PI, TAU};

use super::*;
use crate::chart::ChartPoint;
use crate::geodesics::{build_mesh, distance_table, greedy_tree, MetricMesh, SpanningTree};
use crate::petals::{compute_petals, PetalSet};
use crate::ratform::sample;

struct Built {
    form: RationalForm,
    petals: PetalSet,
    mesh: Option<MetricMesh>,
    tree: SpanningTree,
    bp: SurfaceBlueprint,
}

fn build(seed: u64, n: usize, resolution: usize) -> Built {
    let form = sample::seeded(seed, n);
    let petals = compute_petals(&form).unwrap();
    let (mesh, tree) = if n == 3 {
        (None, SpanningTree { order: vec![0], edges: vec![], warnings: vec![] })
    } else {
        let mesh = build_mesh(&form, &petals, resolution).unwrap();
        let table = distance_table(&form, &petals, &mesh).unwrap();
        let tree = greedy_tree(&table);
        (Some(mesh), tree)
    };
    let bp = assemble_surface(&form, &petals, &tree).unwrap();
    Built { form, petals, mesh, tree, bp }
}

fn check<'a>(bp: &'a SurfaceBlueprint, name: &str) -> &'a Check {
    bp.diagnostics.iter().find(|c| c.name == name).unwrap()
}

#[test]
fn sector_construction_on_synthetic_vertices() {
    let (k, m, n, miss) = sector_order(PI / 3.0, 0.0, PI / 3.0);
    assert_eq!((k, m, n), (2, -1, 1));
    assert!(miss < 1e-14);
    // A full-cone leaf vertex always closes after four turns.
    for theta in [0.1, 0.5 * PI, 1.5 * PI, 6.0] {
        assert_eq!(sector_order(2.0 * TAU, theta, theta).0, 4);
    }
    // Interior angles below 2 pi never exceed order three.
    for i in 0..200 {
        let theta = i as f64 * 0.0314159;
        let alpha = 0.05 + (i % 37) as f64 * (TAU - 0.1) / 37.0;
        let phi = (theta + alpha).rem_euclid(TAU);
        let (k, _, _, miss) = sector_order(alpha, theta, phi);
        assert!(miss < 1e-9 && (1..=3).contains(&k), "alpha {alpha} theta {theta}: k = {k}");
    }
}

#[test]
fn rotation_matches_sampled_argument() {
    let b = build(2, 5, 20_000);
    let rot = rotation_system(&b.form, &b.petals, &b.tree).unwrap();
    for (i, flags) in rot.zeroes.iter().enumerate() {
        let c = b.form.zeroes[i];
        let eps = 1e-3 * crate::petals::zero_separation(&b.form, i);
        let g = |t: f64| {
            b.form.primitive_increment(&ChartPoint::finite(c), &ChartPoint::finite(c + C64::from_polar(eps, t)))
        };
        // Lifted argument of F - F(c) along the circle, starting at t = 0.
        let samples = 4096;
        let mut lifted = vec![g(0.0).arg()];
        for s in 1..=samples {
            let t = TAU * s as f64 / samples as f64;
            let prev = *lifted.last().unwrap();
            let d = (g(t).arg() - prev + PI).rem_euclid(TAU) - PI;
            lifted.push(prev + d);
        }
        assert!((lifted[samples] - lifted[0] - 2.0 * TAU).abs() < 1e-6, "cone angle at zero {i}");
        let at = |t: f64| {
            let s = t.rem_euclid(TAU) / TAU * samples as f64;
            let k = (s.floor() as usize).min(samples - 1);
            lifted[k] + (lifted[k + 1] - lifted[k]) * (s - k as f64)
        };
        // Geometric direction of each flag, read off the traced curves.
        let geometric: Vec<f64> = flags
            .iter()
            .map(|f| match f.kind {
                FlagKind::PetalCorner { pole } => {
                    let p = &b.petals.petals[pole];
                    let corner = p.corners.iter().find(|k| k.zero == i).unwrap();
                    let next = p.boundary[corner.vertex + 1].to_z();
                    at((next - c).arg())
                }
                FlagKind::TreeHalfEdge { edge, end } => {
                    let poly = b.tree.edges[edge].path.polyline();
                    let q = if end == EdgeEnd::From { poly[1] } else { poly[poly.len() - 2] };
                    at((q.to_z() - c).arg())
                }
            })
            .collect();
        let m = flags.len();
        for a in 0..m {
            let bnext = (a + 1) % m;
            let expect = cone_gap(flags[a].position, flags[bnext].position);
            let got = if m == 1 { CONE } else { (geometric[bnext] - geometric[a]).rem_euclid(CONE) };
            assert!((expect - got).abs() < 2e-2, "zero {i} flags {a}->{bnext}: {expect} vs {got}");
        }
    }
}

#[test]
fn quartic_word_has_six_sides_with_paired_mu() {
    let b = build(1, 4, 20_000);
    let sides = &b.bp.polygon.sides;
    assert_eq!(sides.len(), 6);
    let petal_sides = sides.iter().filter(|s| matches!(s.kind, SideKind::Petal { .. })).count();
    assert_eq!(petal_sides, 4);
    let mu = b.tree.edges[0].path.tau;
    let plus = sides.iter().find(|s| s.kind == SideKind::Cut { edge: 0, sign: 1 }).unwrap();
    let minus = sides.iter().find(|s| s.kind == SideKind::Cut { edge: 0, sign: -1 }).unwrap();
    assert_eq!(plus.vector, mu);
    assert_eq!(minus.vector, -mu);
    let h = b.bp.hexagon.as_ref().unwrap();
    assert!(h.multiset_ok && h.simple && h.closure_gap < 1e-12);
    assert_eq!(b.bp.cylinders.len(), 4);
}

#[test]
fn structure_across_degrees() {
    for (seed, n) in [(3, 5), (4, 5), (2, 6), (3, 7), (1, 8)] {
        let b = build(seed, n, 20_000);
        let bp = &b.bp;
        assert_eq!(bp.polygon.sides.len(), 3 * n - 6, "seed {seed} n {n}");
        assert!((bp.polygon.angle_sum() - (3.0 * n as f64 - 8.0) * PI).abs() < 1e-9);
        assert!(bp.polygon.closure_gap() < 1e-10 * bp.polygon.perimeter());
        assert_eq!(bp.vertex_classes, n - 2);
        assert_eq!(bp.euler_characteristic, 2);
        assert_eq!(bp.pastings.len(), n + n - 3);
        for name in ["cut_sides_opposite", "cone_angles", "sector_integrality", "vertex_class_labels", "tree_noncrossing"] {
            assert!(check(bp, name).pass, "seed {seed} n {n}: {name}");
        }
    }
}

#[test]
fn hexagon_area_matches_metric_area() {
    for seed in [1, 2] {
        let b = build(seed, 4, 40_000);
        let h = b.bp.hexagon.as_ref().unwrap();
        let area = b.mesh.as_ref().unwrap().metric_area;
        assert!((h.area - area).abs() < 5e-3 * area, "seed {seed}: {} vs {area}", h.area);
    }
}

#[test]
fn both_hexagon_cases_occur() {
    assert_eq!(build(1, 4, 20_000).bp.hexagon.unwrap().case, 1);
    assert_eq!(build(3, 4, 20_000).bp.hexagon.unwrap().case, 2);
}

#[test]
fn three_poles_give_a_triangle() {
    let b = build(2, 3, 0);
    let poly = &b.bp.polygon;
    assert_eq!(poly.sides.len(), 3);
    assert!(poly.sides.iter().all(|s| matches!(s.kind, SideKind::Petal { .. })));
    assert!(poly.closure_gap() < 1e-10);
    assert!((poly.angle_sum() - PI).abs() < 1e-9);
    assert_eq!(b.bp.vertex_classes, 1);
    assert!(b.bp.all_checks_pass());
}

#[test]
fn flipped_cut_sign_is_rejected() {
    let b = build(2, 5, 20_000);
    let mut bad = b.bp.clone();
    let i = bad.polygon.sides.iter().position(|s| matches!(s.kind, SideKind::Cut { .. })).unwrap();
    bad.polygon.sides[i].vector = -bad.polygon.sides[i].vector;
    let checks = verify_blueprint(&b.form, &bad);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    assert!(failed.contains(&"closure") && failed.contains(&"cut_sides_opposite"), "{failed:?}");
}

#[test]
fn canonical_word_is_rotation_invariant() {
    let b = build(3, 5, 20_000);
    let word = &b.bp.word;
    assert_eq!(canonical_rotation(word), 0);
    for shift in 1..word.len() {
        let mut w = word.clone();
        w.rotate_left(shift);
        let r = canonical_rotation(&w);
        w.rotate_left(r);
        assert!(w.iter().zip(word).all(|(a, b)| a.kind == b.kind));
    }
}
