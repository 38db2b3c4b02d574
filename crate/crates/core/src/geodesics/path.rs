//! Mesh shortest paths and their straightening into flat geodesics.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::mesh::MetricMesh;
use crate::chart::ChartPoint;
use crate::flowfield::{trace_flow, FlowSpec, RegionSet, TerminalEvent};
use crate::petals::{launch_point, zero_separation, PetalSet, PROBE_OFFSET};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source distances and predecessors (`usize::MAX` for none).
pub fn dijkstra(mesh: &MetricMesh, source: usize) -> (Vec<f64>, Vec<usize>) {
    let n = mesh.vertices.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &mesh.adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Entry(nd, v));
            }
        }
    }
    (dist, pred)
}

/// Vertex path from the source of `pred` to `target`.
pub fn extract_path(pred: &[usize], source: usize, target: usize) -> Option<Vec<usize>> {
    let mut path = vec![target];
    let mut v = target;
    while v != source {
        v = pred[v];
        if v == usize::MAX {
            return None;
        }
        path.push(v);
    }
    path.reverse();
    Some(path)
}

/// Mesh distance and vertex path between two zeroes.
pub fn shortest_path(mesh: &MetricMesh, a: usize, b: usize) -> Result<(f64, Vec<usize>)> {
    let (va, vb) = (mesh.zero_vertex[a], mesh.zero_vertex[b]);
    if a == b {
        return Ok((0.0, vec![va]));
    }
    let (dist, pred) = dijkstra(mesh, va);
    let path = extract_path(&pred, va, vb)
        .ok_or_else(|| Error::numerical("shortest_path", format!("zeroes {a} and {b} are disconnected in the mesh")))?;
    Ok((dist[vb], path))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// A flat straight segment found by shooting.
    Straight,
    /// A boundary arc of the given petal between two of its corners.
    BoundaryArc { pole: usize },
    /// Shooting failed; the mesh polyline is kept.
    MeshFallback,
}

/// A piece of a geodesic between two consecutive zeroes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub from: usize,
    pub to: usize,
    /// Displacement `int R dz` along the piece.
    pub tau: C64,
    pub length: f64,
    pub kind: SegmentKind,
    pub polyline: Vec<ChartPoint>,
}

impl GeodesicSegment {
    fn reversed(&self) -> Self {
        let mut polyline = self.polyline.clone();
        polyline.reverse();
        GeodesicSegment { from: self.to, to: self.from, tau: -self.tau, polyline, ..self.clone() }
    }
}

/// A refined geodesic between two zeroes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub from: usize,
    pub to: usize,
    pub segments: Vec<GeodesicSegment>,
    pub length: f64,
    pub tau: C64,
    /// Mesh (Dijkstra) length the refinement started from.
    pub mesh_length: f64,
    /// Some piece runs along a petal boundary.
    pub contact: bool,
    /// Some piece kept its mesh polyline.
    pub fallback: bool,
}

impl GeodesicPath {
    fn from_segments(from: usize, to: usize, segments: Vec<GeodesicSegment>, mesh_length: f64) -> Self {
        let length = segments.iter().map(|s| s.length).sum();
        let tau = segments.iter().map(|s| s.tau).sum();
        let contact = segments.iter().any(|s| matches!(s.kind, SegmentKind::BoundaryArc { .. }));
        let fallback = segments.iter().any(|s| s.kind == SegmentKind::MeshFallback);
        GeodesicPath { from, to, segments, length, tau, mesh_length, contact, fallback }
    }

    pub fn trivial(zero: usize) -> Self {
        GeodesicPath::from_segments(zero, zero, Vec::new(), 0.0)
    }

    pub fn reversed(&self) -> Self {
        let segments = self.segments.iter().rev().map(GeodesicSegment::reversed).collect();
        GeodesicPath::from_segments(self.to, self.from, segments, self.mesh_length)
    }

    /// Zeroes visited, endpoints included.
    pub fn breakpoints(&self) -> Vec<usize> {
        let mut b = vec![self.from];
        b.extend(self.segments.iter().map(|s| s.to));
        b
    }

    /// Concatenated polyline.
    pub fn polyline(&self) -> Vec<ChartPoint> {
        let mut out: Vec<ChartPoint> = Vec::new();
        for s in &self.segments {
            let skip = usize::from(!out.is_empty());
            out.extend(s.polyline.iter().skip(skip).copied());
        }
        out
    }
}

enum Shot {
    Hit(Vec<ChartPoint>),
    Blocked { zero: usize, tau: C64, polyline: Vec<ChartPoint> },
    Miss,
}

/// Relative tolerance on the arrival potential time.
const ARRIVAL_TOL: f64 = 1e-7;

struct Refiner<'a> {
    form: &'a RationalForm,
    petals: &'a PetalSet,
    mesh: &'a MetricMesh,
    zero_of_vertex: HashMap<usize, usize>,
}

impl<'a> Refiner<'a> {
    fn new(form: &'a RationalForm, petals: &'a PetalSet, mesh: &'a MetricMesh) -> Self {
        let zero_of_vertex = mesh.zero_vertex.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Refiner { form, petals, mesh, zero_of_vertex }
    }

    fn point(&self, v: usize) -> ChartPoint {
        match self.zero_of_vertex.get(&v) {
            Some(&i) => ChartPoint::finite(self.form.zeroes[i]),
            None => self.mesh.chart.from_w(self.mesh.vertices[v]),
        }
    }

    fn mesh_tau(&self, verts: &[usize]) -> C64 {
        verts.windows(2).map(|e| self.form.primitive_increment(&self.point(e[0]), &self.point(e[1]))).sum()
    }

    fn mesh_length(&self, verts: &[usize]) -> f64 {
        verts
            .windows(2)
            .map(|e| {
                self.mesh.adjacency[e[0]]
                    .iter()
                    .find(|(v, _)| *v == e[1])
                    .map(|&(_, w)| w)
                    .unwrap_or_else(|| {
                        let m = &self.mesh;
                        super::mesh::segment_weight(self.form, &m.chart, m.vertices[e[0]], m.vertices[e[1]])
                    })
            })
            .sum()
    }

    /// Fires the flat straight segment from zero `p` with displacement `tau`.
    fn shoot(&self, p: usize, q: usize, tau: C64, hint: Option<C64>) -> Shot {
        let form = self.form;
        let c = form.zeroes[p];
        let len = tau.norm();
        if len == 0.0 {
            return Shot::Miss;
        }
        let v = tau / len;
        let u = (v / form.eval_derivative(c)).sqrt();
        let u = u / u.norm();
        let mut dirs = [u, -u];
        if let Some(h) = hint {
            if (dirs[1] * h.conj()).re > (dirs[0] * h.conj()).re {
                dirs.swap(0, 1);
            }
        }
        let eps = PROBE_OFFSET * zero_separation(form, p).min(form.diameter());
        for d in dirs {
            let start = launch_point(form, c, d, eps, v);
            let sp = ChartPoint::finite(start);
            if self.petals.locate(&sp).is_some() {
                continue;
            }
            let lead = form.primitive_increment(&ChartPoint::finite(c), &sp);
            let t_lead = (lead * v.conj()).re;
            if t_lead <= 0.0 {
                continue;
            }
            let remaining = len - t_lead;
            let spec = FlowSpec::new(sp, v, remaining * (1.0 + 1e-6) + 1e-9 * len).with_regions(self.petals);
            let Ok(tr) = trace_flow(form, &spec) else { continue };
            let mut poly = vec![ChartPoint::finite(c)];
            poly.extend(tr.samples.iter().map(|s| s.point));
            if let TerminalEvent::HitZero { index, .. } = tr.terminal_event {
                let t_total = t_lead + tr.t_final();
                if index == q && (t_total - len).abs() <= ARRIVAL_TOL * len {
                    return Shot::Hit(poly);
                }
                if index != q && index != p && t_total < len * (1.0 - ARRIVAL_TOL) {
                    return Shot::Blocked { zero: index, tau: v * t_total, polyline: poly };
                }
            }
        }
        Shot::Miss
    }

    /// Boundary arc of a petal from corner `p` to corner `q` with displacement `tau`.
    fn boundary_arc(&self, p: usize, q: usize, tau: C64) -> Option<GeodesicSegment> {
        for petal in &self.petals.petals {
            let Some(cp) = petal.corners.iter().find(|c| c.zero == p) else { continue };
            let Some(cq) = petal.corners.iter().find(|c| c.zero == q) else { continue };
            let b = &petal.boundary;
            let last = b.len() - 1;
            let forward: Vec<ChartPoint> = if cq.vertex > cp.vertex {
                b[cp.vertex..=cq.vertex].to_vec()
            } else {
                b[cp.vertex..last].iter().chain(b[..=cq.vertex].iter()).copied().collect()
            };
            let disp: C64 = forward.windows(2).map(|w| self.form.primitive_increment(&w[0], &w[1])).sum();
            if (disp - tau).norm() <= 1e-8 * tau.norm() {
                return Some(GeodesicSegment {
                    from: p,
                    to: q,
                    tau,
                    length: tau.norm(),
                    kind: SegmentKind::BoundaryArc { pole: petal.pole },
                    polyline: forward,
                });
            }
            let reverse: Vec<ChartPoint> = if cp.vertex > cq.vertex {
                b[cq.vertex..=cp.vertex].iter().rev().copied().collect()
            } else {
                let mut r: Vec<ChartPoint> = b[cq.vertex..last].iter().chain(b[..=cp.vertex].iter()).copied().collect();
                r.reverse();
                r
            };
            let disp: C64 = reverse.windows(2).map(|w| self.form.primitive_increment(&w[0], &w[1])).sum();
            if (disp - tau).norm() <= 1e-8 * tau.norm() {
                return Some(GeodesicSegment {
                    from: p,
                    to: q,
                    tau,
                    length: tau.norm(),
                    kind: SegmentKind::BoundaryArc { pole: petal.pole },
                    polyline: reverse,
                });
            }
        }
        None
    }

    fn hint(&self, verts: Option<&[usize]>, p: usize) -> Option<C64> {
        let v = verts?;
        let next = *v.get(1)?;
        let z = self.mesh.chart.z_from_w(self.mesh.vertices[next]);
        let d = z - self.form.zeroes[p];
        d.is_finite().then_some(d)
    }

    fn fallback(&self, p: usize, q: usize, tau: C64, verts: Option<&[usize]>) -> GeodesicSegment {
        let (polyline, length) = match verts {
            Some(v) => (v.iter().map(|&k| self.point(k)).collect(), self.mesh_length(v)),
            None => (vec![ChartPoint::finite(self.form.zeroes[p]), ChartPoint::finite(self.form.zeroes[q])], f64::NAN),
        };
        GeodesicSegment { from: p, to: q, tau, length, kind: SegmentKind::MeshFallback, polyline }
    }

    /// Straightens the piece `p -> q` with displacement `tau`; `verts` is the
    /// mesh polyline realizing it when known.
    fn solve(&self, p: usize, q: usize, tau: C64, verts: Option<&[usize]>, depth: usize) -> Vec<GeodesicSegment> {
        if let Some(arc) = self.boundary_arc(p, q, tau) {
            return vec![arc];
        }
        match self.shoot(p, q, tau, self.hint(verts, p)) {
            Shot::Hit(polyline) => {
                return vec![GeodesicSegment { from: p, to: q, tau, length: tau.norm(), kind: SegmentKind::Straight, polyline }]
            }
            Shot::Blocked { zero, tau: t1, polyline } if depth < 8 => {
                let mut out =
                    vec![GeodesicSegment { from: p, to: zero, tau: t1, length: t1.norm(), kind: SegmentKind::Straight, polyline }];
                let rest = self.solve(zero, q, tau - t1, None, depth + 1);
                if rest.iter().all(|s| s.kind != SegmentKind::MeshFallback) {
                    out.extend(rest);
                    return out;
                }
            }
            _ => {}
        }
        if let Some(v) = verts.filter(|v| v.len() > 2 && depth < 4) {
            // The geodesic probably bends at a zero the mesh path passes
            // near without touching; try the closest ones.
            let mut cands: Vec<(f64, usize, usize)> = (0..self.form.zeroes.len())
                .filter(|&r| r != p && r != q)
                .map(|r| {
                    let wr = self.mesh.vertices[self.mesh.zero_vertex[r]];
                    let (k, d) = v
                        .iter()
                        .enumerate()
                        .map(|(k, &x)| (k, (self.mesh.vertices[x] - wr).norm()))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("nonempty");
                    (d, r, k)
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));
            for &(_, r, k) in cands.iter().take(3) {
                let vr = self.mesh.zero_vertex[r];
                let mut first: Vec<usize> = v[..=k].to_vec();
                let mut second: Vec<usize> = v[k..].to_vec();
                if first.last() != Some(&vr) {
                    first.push(vr);
                    second.insert(0, vr);
                }
                let t1 = self.mesh_tau(&first);
                let a = self.solve(p, r, t1, Some(&first), depth + 1);
                if a.iter().any(|s| s.kind == SegmentKind::MeshFallback) {
                    continue;
                }
                let b = self.solve(r, q, tau - t1, Some(&second), depth + 1);
                if b.iter().any(|s| s.kind == SegmentKind::MeshFallback) {
                    continue;
                }
                return a.into_iter().chain(b).collect();
            }
        }
        vec![self.fallback(p, q, tau, verts)]
    }

    /// Removes bends that a single straight segment can replace.
    fn shortcut(&self, mut segs: Vec<GeodesicSegment>) -> Vec<GeodesicSegment> {
        loop {
            let mut changed = false;
            for i in 0..segs.len().saturating_sub(1) {
                let (a, b) = (&segs[i], &segs[i + 1]);
                if a.kind == SegmentKind::MeshFallback || b.kind == SegmentKind::MeshFallback || a.from == b.to {
                    continue;
                }
                let tau = a.tau + b.tau;
                if tau.norm() >= (a.length + b.length) * (1.0 - 1e-12) {
                    continue;
                }
                let hint = a.polyline.get(1).map(|z| z.to_z() - self.form.zeroes[a.from]).filter(|d| d.is_finite());
                if let Shot::Hit(polyline) = self.shoot(a.from, b.to, tau, hint) {
                    let merged =
                        GeodesicSegment { from: a.from, to: b.to, tau, length: tau.norm(), kind: SegmentKind::Straight, polyline };
                    segs.splice(i..=i + 1, [merged]);
                    changed = true;
                    break;
                }
            }
            if !changed {
                return segs;
            }
        }
    }
}

/// Straightens a mesh path between two zeroes into a flat geodesic.
pub fn refine_path(form: &RationalForm, petals: &PetalSet, mesh: &MetricMesh, verts: &[usize]) -> Result<GeodesicPath> {
    let rf = Refiner::new(form, petals, mesh);
    let (Some(&v0), Some(&v1)) = (verts.first(), verts.last()) else {
        return Err(Error::InvalidInput("empty mesh path".into()));
    };
    let (Some(&a), Some(&b)) = (rf.zero_of_vertex.get(&v0), rf.zero_of_vertex.get(&v1)) else {
        return Err(Error::InvalidInput("mesh path does not join two zeroes".into()));
    };
    if verts.len() == 1 {
        return Ok(GeodesicPath::trivial(a));
    }
    let mesh_length = rf.mesh_length(verts);
    let marks: Vec<usize> = (0..verts.len()).filter(|&k| rf.zero_of_vertex.contains_key(&verts[k])).collect();
    let mut segs = Vec::new();
    for w in marks.windows(2) {
        let sub = &verts[w[0]..=w[1]];
        let p = rf.zero_of_vertex[&sub[0]];
        let q = rf.zero_of_vertex[&sub[sub.len() - 1]];
        segs.extend(rf.solve(p, q, rf.mesh_tau(sub), Some(sub), 0));
    }
    let segs = rf.shortcut(segs);
    Ok(GeodesicPath::from_segments(a, b, segs, mesh_length))
}
