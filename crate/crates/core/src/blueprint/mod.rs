//! Assembly of the surface from a single log-polygon and `n` half-infinite
//! cylinders.
//!
//! The cut tree and the petal boundaries split the sphere into the petals
//! and one topological disk `D`. The primitive maps `D` to a log-polygon with
//! `3n - 6` sides: one side `2 pi i lambda_j` per pole and both banks `+tau`,
//! `-tau` of every tree edge. Each petal side is pasted to a cylinder of the
//! same circumference, and the two banks of every cut are pasted together.
//!
//! [`assemble_surface`] produces a [`SurfaceBlueprint`]; [`verify_blueprint`]
//! re-derives every invariant from the blueprint alone and reports one
//! [`Check`] per property.

pub mod hexagon;
pub mod polygon;
pub mod rotation;

#[cfg(test)]
mod tests;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use hexagon::{hexagon_n4, is_simple, HexSide, HexagonReport};
pub use polygon::{
    boundary_word, canonical_rotation, polygon_geometry, sector_order, vertex_classes, LogPolygon, PolygonSide,
    PolygonVertex, SideKind, UnionFind, WordSide,
};
pub use rotation::{cone_gap, cone_position, rotation_system, EdgeEnd, Flag, FlagKind, RotationSystem, CONE};

use crate::chart::{ChartPoint, MobiusChart};
use crate::geodesics::{verify_noncrossing, SpanningTree};
use crate::petals::{PetalCensus, PetalSet};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Half-infinite flat cylinder glued along a petal side.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Cylinder {
    pub pole: usize,
    pub circumference: C64,
    /// Height at which the cylinder is cut off in drawings; the surface
    /// itself continues to infinity.
    pub truncation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pasting {
    PetalToCylinder { side: usize, pole: usize },
    CutPair { edge: usize, plus: usize, minus: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PetalSummary {
    pub pole: usize,
    pub radius: f64,
    pub boundary: Vec<C64>,
    pub displacement: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeEdgeSummary {
    pub stage: usize,
    pub from: usize,
    pub to: usize,
    pub tau: C64,
    pub length: f64,
    pub polyline: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceBlueprint {
    pub degree: usize,
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
    pub zeroes: Vec<C64>,
    pub census: PetalCensus,
    pub petals: Vec<PetalSummary>,
    pub tree: Vec<TreeEdgeSummary>,
    pub word: Vec<WordSide>,
    pub polygon: LogPolygon,
    pub cylinders: Vec<Cylinder>,
    pub pastings: Vec<Pasting>,
    pub vertex_classes: usize,
    pub euler_characteristic: i64,
    pub boundary_components: usize,
    pub hexagon: Option<HexagonReport>,
    pub diagnostics: Vec<Check>,
}

impl SurfaceBlueprint {
    pub fn all_checks_pass(&self) -> bool {
        self.diagnostics.iter().all(|c| c.pass)
    }
}

fn pastings(sides: &[PolygonSide]) -> Vec<Pasting> {
    let mut out = Vec::new();
    for (i, s) in sides.iter().enumerate() {
        match s.kind {
            SideKind::Petal { pole } => out.push(Pasting::PetalToCylinder { side: i, pole }),
            SideKind::Cut { edge, sign: 1 } => {
                if let Some(j) = sides.iter().position(|t| t.kind == SideKind::Cut { edge, sign: -1 }) {
                    out.push(Pasting::CutPair { edge, plus: i, minus: j });
                }
            }
            SideKind::Cut { .. } => {}
        }
    }
    out
}

/// Euler characteristic of the closed-up surface: polygon vertex classes,
/// minus the petal circles and the cuts, plus the polygon and one disk per
/// cylinder.
fn euler(classes: usize, n: usize, cuts: usize) -> i64 {
    classes as i64 - (n + cuts) as i64 + (1 + n) as i64
}

fn class_count(classes: &[usize]) -> usize {
    let mut c = classes.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Builds the blueprint from the petals and the cut tree.
pub fn assemble_surface(form: &RationalForm, petals: &PetalSet, tree: &SpanningTree) -> Result<SurfaceBlueprint> {
    let n = form.n();
    if tree.edges.len() + 3 != n {
        return Err(Error::invariant("assemble_surface", format!("tree has {} edges for n = {n}", tree.edges.len())));
    }
    let rot = rotation_system(form, petals, tree)?;
    let mut word = boundary_word(&rot, tree)?;
    let shift = canonical_rotation(&word);
    word.rotate_left(shift);
    let polygon = polygon_geometry(form, &rot, &word, tree)?;
    let classes = vertex_classes(&polygon.sides);
    let vertex_count = class_count(&classes);
    let hexagon = if n == 4 {
        Some(hexagon_n4(form, petals, &rot, &polygon, tree.edges[0].path.tau)?)
    } else {
        None
    };
    let mut bp = SurfaceBlueprint {
        degree: n,
        poles: form.poles.clone(),
        residues: form.residues.clone(),
        zeroes: form.zeroes.clone(),
        census: petals.census.clone(),
        petals: petals
            .petals
            .iter()
            .map(|p| PetalSummary {
                pole: p.pole,
                radius: p.radius,
                boundary: p.boundary.iter().map(ChartPoint::to_z).collect(),
                displacement: p.boundary_displacement,
            })
            .collect(),
        tree: tree
            .edges
            .iter()
            .map(|e| TreeEdgeSummary {
                stage: e.stage,
                from: e.from,
                to: e.to,
                tau: e.path.tau,
                length: e.path.length,
                polyline: e.path.polyline().iter().map(ChartPoint::to_z).collect(),
            })
            .collect(),
        word,
        cylinders: (0..n)
            .map(|j| Cylinder { pole: j, circumference: C64::new(0.0, TAU) * form.residues[j], truncation: 0.0 })
            .collect(),
        pastings: pastings(&polygon.sides),
        vertex_classes: vertex_count,
        euler_characteristic: euler(vertex_count, n, tree.edges.len()),
        boundary_components: n,
        polygon,
        hexagon,
        diagnostics: Vec::new(),
    };
    bp.diagnostics = verify_blueprint(form, &bp);
    Ok(bp)
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, residual: f64, tol: f64) {
        let pass = residual.is_finite() && residual <= tol;
        self.0.push(Check { name: name.to_string(), pass, residual });
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }
}

/// Re-derives the blueprint invariants from its stored data.
pub fn verify_blueprint(form: &RationalForm, bp: &SurfaceBlueprint) -> Vec<Check> {
    let n = bp.degree;
    let poly = &bp.polygon;
    let sides = &poly.sides;
    let perimeter = poly.perimeter().max(f64::MIN_POSITIVE);
    let mut ck = Checks(Vec::new());

    ck.push("side_count", (sides.len() as f64 - (3 * n) as f64 + 6.0).abs(), 0.0);
    ck.push("vertex_count", (poly.vertices.len() as f64 - sides.len() as f64).abs(), 0.0);
    let target = (3.0 * n as f64 - 8.0) * PI;
    ck.push("angle_sum", (poly.angle_sum() - target).abs() / target.abs().max(PI), 1e-9);

    // Cone angle at each zero is shared between its petal wedges and the
    // polygon vertices sitting there.
    let mut per_zero = vec![0.0; bp.zeroes.len()];
    for v in &poly.vertices {
        per_zero[v.zero] += v.angle;
    }
    let cone_miss = per_zero
        .iter()
        .enumerate()
        .map(|(i, &a)| (a + PI * bp.census.per_zero[i].len() as f64 - CONE).abs())
        .fold(0.0, f64::max);
    ck.push("cone_angles", cone_miss / CONE, 1e-9);

    ck.push("closure", poly.closure_gap() / perimeter, 1e-9);

    let mut petal_seen = vec![0usize; n];
    let mut petal_miss = 0.0f64;
    let mut cut_miss = 0.0f64;
    let mut cut_ok = true;
    for s in sides {
        match s.kind {
            SideKind::Petal { pole } => {
                petal_seen[pole] += 1;
                petal_miss = petal_miss.max((s.vector - C64::new(0.0, TAU) * bp.residues[pole]).norm());
            }
            SideKind::Cut { edge, sign } => match sides.iter().find(|t| t.kind == SideKind::Cut { edge, sign: -sign }) {
                Some(t) => cut_miss = cut_miss.max((s.vector + t.vector).norm()),
                None => cut_ok = false,
            },
        }
    }
    ck.push("petal_sides", petal_miss / perimeter, 1e-12);
    ck.flag("petal_sides_once", petal_seen.iter().all(|&c| c == 1));
    ck.flag("cut_sides_paired", cut_ok);
    ck.push("cut_sides_opposite", cut_miss / perimeter, 1e-12);
    let tau_miss = sides
        .iter()
        .filter_map(|s| match s.kind {
            SideKind::Cut { edge, sign } => bp.tree.get(edge).map(|e| (s.vector - e.tau * f64::from(sign)).norm()),
            SideKind::Petal { .. } => None,
        })
        .fold(0.0, f64::max);
    ck.push("cut_sides_match_tree", tau_miss / perimeter, 1e-12);

    let petal_disp = bp
        .petals
        .iter()
        .map(|p| {
            let c = C64::new(0.0, TAU) * bp.residues[p.pole];
            (p.displacement - c).norm() / c.norm()
        })
        .fold(0.0, f64::max);
    ck.push("petal_displacement", petal_disp, 1e-6);

    // Ramification orders recomputed from the development.
    let w = poly.development();
    let ns = sides.len();
    let mut sector_miss = 0.0f64;
    let mut k_consistent = true;
    for i in 0..ns {
        let (k, _, _, miss) = sector_order(poly.vertices[i].angle, (w[(i + ns - 1) % ns] - w[i]).arg(), (w[i + 1] - w[i]).arg());
        sector_miss = sector_miss.max(miss);
        k_consistent &= k == poly.vertices[i].k;
    }
    ck.push("sector_integrality", sector_miss / TAU, 1e-6);
    ck.flag("sector_orders_consistent", k_consistent);
    let kmax = poly.vertices.iter().map(|v| v.k).max().unwrap_or(0);
    ck.flag("ramification_at_most_three", kmax <= 3);
    ck.flag("degree_bound", n < 3 || poly.ambient_degree_bound <= (6 * n).saturating_sub(11).max(1));

    let classes = vertex_classes(sides);
    let count = class_count(&classes);
    ck.push("vertex_classes", (count as f64 - n as f64 + 2.0).abs(), 0.0);
    let labels_ok = (0..ns).all(|i| (0..ns).all(|j| classes[i] != classes[j] || poly.vertices[i].zero == poly.vertices[j].zero));
    ck.flag("vertex_class_labels", labels_ok);
    ck.flag("euler_characteristic", euler(count, n, bp.tree.len()) == 2 && bp.euler_characteristic == 2);
    ck.flag("boundary_components", bp.boundary_components == n && bp.cylinders.len() == n);
    ck.flag("pastings", pastings(sides) == bp.pastings);

    let census = &bp.census;
    let attached: usize = census.per_zero.iter().map(Vec::len).sum();
    ck.flag(
        "census",
        attached == n && census.per_zero.len() + 2 == n && (n == 3 || census.identities_hold(n)),
    );

    let mut uf = UnionFind::new(bp.zeroes.len());
    for e in &bp.tree {
        uf.union(e.from, e.to);
    }
    let spanning = bp.tree.len() + 1 == bp.zeroes.len() && (0..bp.zeroes.len()).all(|i| uf.find(i) == uf.find(0));
    ck.flag("tree_spanning", spanning);
    let tau_len = bp.tree.iter().map(|e| (e.tau.norm() - e.length).abs() / e.length.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    ck.push("tree_flat_length", tau_len, 1e-9);
    if let Some(&p0) = bp.poles.first() {
        let edges: Vec<(usize, usize, Vec<ChartPoint>)> = bp
            .tree
            .iter()
            .map(|e| (e.from, e.to, e.polyline.iter().map(|&z| ChartPoint::finite(z)).collect()))
            .collect();
        ck.flag("tree_noncrossing", verify_noncrossing(form, &MobiusChart::new(p0), &edges).ok);
    }

    if let Some(h) = &bp.hexagon {
        ck.push("hexagon_closure", h.closure_gap, 1e-9);
        ck.flag("hexagon_simple", h.simple);
        ck.flag("hexagon_sides", h.multiset_ok);
        ck.flag("hexagon_case", h.case == 1 || h.case == 2);
    }
    ck.0
}
