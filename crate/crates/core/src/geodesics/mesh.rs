//! Graded triangulation of the metric space left after removing the petals.
//!
//! Everything lives in the chart `w = 1/(z - z_0)` centred at the first
//! pole. There the first petal is the exterior of a bounded loop, every other
//! petal is a hole, and the point at infinity of the z-sphere is the
//! ordinary point `w = 0`.

use std::collections::HashMap;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::chart::{Chart, ChartPoint, MobiusChart};
use crate::flowfield::RegionSet;
use crate::petals::{zero_separation, PetalSet};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Default target edge count.
pub const DEFAULT_RESOLUTION: usize = 40_000;
/// Refinement factor for the metric edge length near zeroes.
pub const ZERO_REFINEMENT: f64 = 4.0;
/// Radius of the refined zone around a zero, relative to its separation.
pub const ZERO_ZONE: f64 = 0.2;

const GAUSS8_X: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];
const GAUSS8_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

/// Triangulated metric space with a weighted edge graph.
#[derive(Clone, Debug)]
pub struct MetricMesh {
    pub chart: MobiusChart,
    /// Vertex positions in the w-chart.
    pub vertices: Vec<C64>,
    pub triangles: Vec<[usize; 3]>,
    /// Neighbours with metric edge weights; includes the flip diagonals of
    /// convex quadrilaterals.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    /// Vertex index of each zero.
    pub zero_vertex: Vec<usize>,
    /// Target metric edge length away from zeroes.
    pub h: f64,
    /// `sum over triangles of int |R|^2 dA` by a degree-5 rule.
    pub metric_area: f64,
}

/// `|R dz| / |dw|` at `w`.
pub fn density(form: &RationalForm, chart: &MobiusChart, w: C64) -> f64 {
    let p = chart.from_w(w);
    let r = form.eval_chart(&p).norm();
    match p.chart {
        Chart::Finite => r / w.norm_sqr(),
        Chart::Infinity => r / (C64::new(1.0, 0.0) + chart.center * w).norm_sqr(),
    }
}

/// Metric length of the straight w-segment `a -> b`.
pub fn segment_weight(form: &RationalForm, chart: &MobiusChart, a: C64, b: C64) -> f64 {
    let d = b - a;
    let mut acc = 0.0;
    for (x, wt) in GAUSS8_X.iter().zip(GAUSS8_W) {
        acc += wt * density(form, chart, a + d * *x);
    }
    acc * d.norm()
}

/// Degree-5 seven-point rule on a triangle for `int |R|^2 dA`.
pub fn triangle_metric_area(form: &RationalForm, chart: &MobiusChart, t: [C64; 3]) -> f64 {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_34;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_18;
    const W2: f64 = 0.125_939_180_544_827_15;
    let at = |l: [f64; 3]| t[0] * l[0] + t[1] * l[1] + t[2] * l[2];
    let f = |l: [f64; 3]| density(form, chart, at(l)).powi(2);
    let third = 1.0 / 3.0;
    let mut s = W0 * f([third, third, third]);
    for l in [[A1, B1, B1], [B1, A1, B1], [B1, B1, A1]] {
        s += W1 * f(l);
    }
    for l in [[A2, B2, B2], [B2, A2, B2], [B2, B2, A2]] {
        s += W2 * f(l);
    }
    let area = 0.5 * ((t[1] - t[0]).conj() * (t[2] - t[0])).im.abs();
    s * area
}

struct Grading<'a> {
    form: &'a RationalForm,
    chart: MobiusChart,
    petals: &'a PetalSet,
    zone: Vec<f64>,
}

impl Grading<'_> {
    /// Target metric length at `w` for base length `h`.
    fn target(&self, w: C64, h: f64) -> f64 {
        let p = self.chart.from_w(w);
        if p.chart == Chart::Finite {
            let z = p.coord;
            for (c, r) in self.form.zeroes.iter().zip(&self.zone) {
                if (z - c).norm() < *r {
                    return h / ZERO_REFINEMENT;
                }
            }
        }
        h
    }

    /// Leaf cells of an adaptive quadtree: `(center, size)` of cells whose
    /// centre lies in the space, subdivided until their metric width is
    /// below the local target.
    fn quadtree(&self, lo: C64, size: f64, h: f64) -> Vec<(C64, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![(lo, size, 0u32)];
        let min_size = size / 65536.0;
        while let Some((lo, s, depth)) = stack.pop() {
            let c = lo + C64::new(0.5 * s, 0.5 * s);
            let probes = [c, lo, lo + C64::new(s, 0.0), lo + C64::new(0.0, s), lo + C64::new(s, s)];
            let located: Vec<Option<usize>> =
                probes.iter().map(|&w| self.petals.locate(&self.chart.from_w(w))).collect();
            if located.iter().all(|l| l.is_some() && *l == located[0]) && depth > 2 {
                continue;
            }
            let rho = probes
                .iter()
                .map(|&w| density(self.form, &self.chart, w))
                .filter(|r| r.is_finite())
                .fold(0.0, f64::max);
            if s * rho > self.target(c, h) && s > min_size && depth < 18 {
                let hs = 0.5 * s;
                for (dx, dy) in [(0.0, 0.0), (hs, 0.0), (0.0, hs), (hs, hs)] {
                    stack.push((lo + C64::new(dx, dy), hs, depth + 1));
                }
            } else if located[0].is_none() {
                out.push((c, s));
            }
        }
        out
    }
}

/// Boundary loop of each petal in the w-chart, thinned to the local target
/// length. Corner zeroes are always kept.
fn thin_loop(g: &Grading, pts: &[C64], corners: &[usize], h: f64, cap: f64) -> Vec<C64> {
    let mut out = vec![pts[0]];
    let mut last = pts[0];
    let mut metric = 0.0;
    for k in 1..pts.len() {
        let a = pts[k - 1];
        let b = pts[k];
        metric += density(g.form, &g.chart, 0.5 * (a + b)) * (b - a).norm();
        let corner_dist = corners.iter().map(|&v| (b - pts[v]).norm()).fold(f64::INFINITY, f64::min);
        let wlen = (b - last).norm();
        let keep = corners.contains(&k)
            || metric >= 0.5 * g.target(b, h)
            || wlen >= cap
            || wlen >= 0.3 * corner_dist.max(1e-300) && corner_dist < 0.1 * cap;
        if keep {
            out.push(b);
            last = b;
            metric = 0.0;
        }
    }
    if last != pts[pts.len() - 1] {
        out.push(pts[pts.len() - 1]);
    }
    out
}

fn pt(w: C64) -> Point2<f64> {
    Point2::new(w.re, w.im)
}

/// Builds the mesh with roughly `resolution` edges.
pub fn build_mesh(form: &RationalForm, petals: &PetalSet, resolution: usize) -> Result<MetricMesh> {
    if petals.petals.is_empty() || petals.petals[0].boundary.is_empty() {
        return Err(Error::invariant("build_mesh", "first petal has no boundary"));
    }
    let chart = MobiusChart::new(form.poles[0]);
    let zone: Vec<f64> = (0..form.zeroes.len()).map(|i| ZERO_ZONE * zero_separation(form, i)).collect();
    let g = Grading { form, chart, petals, zone };

    let loops: Vec<(Vec<C64>, Vec<usize>)> = petals
        .petals
        .iter()
        .filter(|p| !p.boundary.is_empty())
        .map(|p| {
            let w: Vec<C64> = p.boundary.iter().map(|q| chart.to_w(q)).collect();
            (w, p.corners.iter().map(|c| c.vertex).collect())
        })
        .collect();
    let outer = &loops[0].0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for w in outer {
        x0 = x0.min(w.re);
        x1 = x1.max(w.re);
        y0 = y0.min(w.im);
        y1 = y1.max(w.im);
    }
    let size = (x1 - x0).max(y1 - y0) * 1.02;
    let lo = C64::new(0.5 * (x0 + x1) - 0.5 * size, 0.5 * (y0 + y1) - 0.5 * size);

    // Pilot pass for the metric area, then the base length for the target.
    let perimeter: f64 = form.residues.iter().map(|l| std::f64::consts::TAU * l.norm()).sum();
    let pilot = g.quadtree(lo, size, perimeter / 150.0);
    let area: f64 = pilot.iter().map(|&(c, s)| density(form, &chart, c).powi(2) * s * s).sum();
    let h = (3.0 * area / resolution.max(1000) as f64).sqrt();

    let cap = 0.01 * size;
    let mut positions: Vec<C64> = Vec::new();
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    let mut add = |w: C64, positions: &mut Vec<C64>| -> usize {
        *seen.entry((w.re.to_bits(), w.im.to_bits())).or_insert_with(|| {
            positions.push(w);
            positions.len() - 1
        })
    };
    let zero_pos: Vec<usize> =
        form.zeroes.iter().map(|&c| add(chart.to_w(&ChartPoint::finite(c)), &mut positions)).collect();
    let mut constraints: Vec<(usize, usize)> = Vec::new();
    for (w, corners) in &loops {
        let thin = thin_loop(&g, w, corners, h, cap);
        let ids: Vec<usize> = thin.iter().map(|&p| add(p, &mut positions)).collect();
        for e in ids.windows(2) {
            if e[0] != e[1] {
                constraints.push((e[0], e[1]));
            }
        }
    }
    for (c, _) in g.quadtree(lo, size, h) {
        add(c, &mut positions);
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(positions.len());
    for &w in &positions {
        let hd = cdt
            .insert(pt(w))
            .map_err(|e| Error::numerical("build_mesh", format!("vertex insertion failed: {e:?}")))?;
        handles.push(hd);
    }
    for &(a, b) in &constraints {
        let (ha, hb) = (handles[a], handles[b]);
        if ha == hb || cdt.exists_constraint(ha, hb) {
            continue;
        }
        if !cdt.can_add_constraint(ha, hb) {
            return Err(Error::numerical(
                "build_mesh",
                format!("petal boundary self-intersection near w = {}", positions[a]),
            ));
        }
        cdt.add_constraint(ha, hb);
    }
    let extra = positions.len() / 2;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_angle_limit(AngleLimit::from_deg(20.0))
            .with_max_additional_vertices(extra),
    );
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let vertices: Vec<C64> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            C64::new(p.x, p.y)
        })
        .collect();
    let mut triangles = Vec::new();
    for f in cdt.inner_faces() {
        if excluded.contains(&f.fix()) {
            continue;
        }
        let [a, b, c] = f.vertices().map(|v| v.fix().index());
        triangles.push([a, b, c]);
    }
    let zero_vertex: Vec<usize> = zero_pos.iter().map(|&k| handles[k].index()).collect();

    let adjacency = build_adjacency(form, &chart, &vertices, &triangles);
    let metric_area = triangles
        .iter()
        .map(|t| triangle_metric_area(form, &chart, [vertices[t[0]], vertices[t[1]], vertices[t[2]]]))
        .sum();
    Ok(MetricMesh { chart, vertices, triangles, adjacency, zero_vertex, h, metric_area })
}

fn build_adjacency(form: &RationalForm, chart: &MobiusChart, v: &[C64], tris: &[[usize; 3]]) -> Vec<Vec<(usize, f64)>> {
    use rayon::prelude::*;
    let mut opposite: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for t in tris {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            opposite.entry((a.min(b), a.max(b))).or_default().push(c);
        }
    }
    let mut pairs: Vec<(usize, usize)> = opposite.keys().copied().collect();
    for (&(a, b), opp) in &opposite {
        if let [c, d] = opp[..] {
            // The diagonal c-d lies inside the quadrilateral when a and b are
            // on opposite sides of it.
            let cross = |p: C64| ((v[d] - v[c]).conj() * (p - v[c])).im;
            if cross(v[a]) * cross(v[b]) < 0.0 {
                pairs.push((c.min(d), c.max(d)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let weights: Vec<f64> = pairs.par_iter().map(|&(a, b)| segment_weight(form, chart, v[a], v[b])).collect();
    let mut adj = vec![Vec::new(); v.len()];
    for (&(a, b), &w) in pairs.iter().zip(&weights) {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    adj
}
