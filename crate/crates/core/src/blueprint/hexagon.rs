//! The degree-four specialization: the polygon is a planar hexagon with
//! four petal sides and one pair of parallel sides `mu`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::polygon::{LogPolygon, SideKind};
use super::rotation::{cone_gap, FlagKind, RotationSystem, CONE};
use crate::chart::ChartPoint;
use crate::flowfield::{trace_flow, FlowSpec, TerminalEvent};
use crate::petals::{launch_point, zero_separation, PetalSet, PROBE_OFFSET};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HexSide {
    Petal(usize),
    /// `+1`: the side equal to `mu`; `-1`: its reverse.
    Mu(i8),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HexagonReport {
    /// 1 when a flat cylinder of closed geodesics separates the petal pairs,
    /// 2 otherwise, 0 when no zero carries exactly two petals.
    pub case: u8,
    pub mu: C64,
    pub vertices: Vec<C64>,
    pub side_assignment: Vec<HexSide>,
    pub closure_gap: f64,
    pub simple: bool,
    pub area: f64,
    pub multiset_ok: bool,
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let cross = |o: C64, p: C64, q: C64| ((p - o).conj() * (q - o)).im;
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Whether the closed polyline `w` (first point repeated at the end) has
/// crossings between non-adjacent sides.
pub fn is_simple(w: &[C64]) -> bool {
    let n = w.len() - 1;
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(w[i], w[i + 1], w[j], w[j + 1]) {
                return false;
            }
        }
    }
    true
}

/// Traces the closed geodesic candidate through the wide gap at the zero
/// whose petals are `(a, b)`: Case 1 when it returns to the zero after the
/// flat length `2 pi |lambda_a + lambda_b|`.
fn classify(form: &RationalForm, petals: &PetalSet, rot: &RotationSystem, zero: usize) -> Result<u8> {
    let flags = &rot.zeroes[zero];
    let wedges: Vec<(usize, f64)> = flags
        .iter()
        .filter_map(|f| match f.kind {
            FlagKind::PetalCorner { pole } => Some((pole, f.position)),
            _ => None,
        })
        .collect();
    let [(a, sa), (b, sb)] = wedges[..] else {
        return Err(Error::invariant("hexagon_n4", format!("zero {zero} does not carry two petals")));
    };
    let g1 = cone_gap((sa + PI).rem_euclid(CONE), sb);
    let g2 = cone_gap((sb + PI).rem_euclid(CONE), sa);
    // The wide gap, as (start, width).
    let (gs, gw) = if g1 >= g2 { ((sa + PI).rem_euclid(CONE), g1) } else { ((sb + PI).rem_euclid(CONE), g2) };
    let sum = form.residues[a] + form.residues[b];
    let flat_len = TAU * sum.norm();
    let c = form.zeroes[zero];
    let rp = form.eval_derivative(c);
    let eps = PROBE_OFFSET * zero_separation(form, zero).min(form.diameter());
    for v in [C64::new(0.0, 1.0) * sum / sum.norm(), C64::new(0.0, -1.0) * sum / sum.norm()] {
        for lift in [0.0, TAU] {
            let pos = (v.arg() + lift).rem_euclid(CONE);
            let into = (pos - gs).rem_euclid(CONE);
            if !(into > 1e-9 && into < gw - 1e-9) {
                continue;
            }
            let u = C64::from_polar(1.0, 0.5 * (pos - rp.arg()));
            let start = launch_point(form, c, u, eps, v);
            let lead = form.primitive_increment(&ChartPoint::finite(c), &ChartPoint::finite(start));
            let t_lead = (lead * v.conj()).re;
            let spec = FlowSpec::new(ChartPoint::finite(start), v, flat_len * 1.001 - t_lead).with_regions(petals);
            let tr = trace_flow(form, &spec)?;
            let closed = matches!(tr.terminal_event, TerminalEvent::HitZero { index, .. } if index == zero)
                && (t_lead + tr.t_final() - flat_len).abs() <= 1e-6 * flat_len;
            return Ok(if closed { 1 } else { 2 });
        }
    }
    Err(Error::numerical("hexagon_n4", "no ray in the wide gap carries the cylinder direction"))
}

/// Hexagon report for a degree-four blueprint polygon.
pub fn hexagon_n4(
    form: &RationalForm,
    petals: &PetalSet,
    rot: &RotationSystem,
    polygon: &LogPolygon,
    mu: C64,
) -> Result<HexagonReport> {
    if form.n() != 4 || polygon.sides.len() != 6 {
        return Err(Error::InvalidInput("hexagon report needs a degree-four form".into()));
    }
    let vertices = polygon.development();
    let perimeter = polygon.perimeter();
    let closure_gap = polygon.closure_gap() / perimeter;
    let side_assignment: Vec<HexSide> = polygon
        .sides
        .iter()
        .map(|s| match s.kind {
            SideKind::Petal { pole } => HexSide::Petal(pole),
            SideKind::Cut { sign, .. } => HexSide::Mu(sign),
        })
        .collect();
    let mut poles: Vec<usize> = side_assignment
        .iter()
        .filter_map(|s| if let HexSide::Petal(j) = s { Some(*j) } else { None })
        .collect();
    poles.sort_unstable();
    let mu_sides: Vec<(i8, C64)> = polygon
        .sides
        .iter()
        .filter_map(|s| if let SideKind::Cut { sign, .. } = s.kind { Some((sign, s.vector)) } else { None })
        .collect();
    let petal_vectors_ok = polygon.sides.iter().all(|s| match s.kind {
        SideKind::Petal { pole } => (s.vector - C64::new(0.0, TAU) * form.residues[pole]).norm() <= 1e-12 * perimeter,
        SideKind::Cut { .. } => true,
    });
    let mu_ok = mu_sides.len() == 2
        && mu_sides.iter().all(|&(sign, v)| (v - mu * f64::from(sign)).norm() <= 1e-12 * perimeter);
    let multiset_ok = poles == vec![0, 1, 2, 3] && petal_vectors_ok && mu_ok;
    let c1 = (0..form.zeroes.len())
        .find(|&i| rot.zeroes[i].iter().filter(|f| matches!(f.kind, FlagKind::PetalCorner { .. })).count() == 2);
    let case = match c1 {
        Some(c1) => classify(form, petals, rot, c1)?,
        None => 0,
    };
    Ok(HexagonReport {
        case,
        mu,
        simple: is_simple(&vertices),
        vertices: vertices[..6].to_vec(),
        side_assignment,
        closure_gap,
        area: polygon.area(),
        multiset_ok,
    })
}
