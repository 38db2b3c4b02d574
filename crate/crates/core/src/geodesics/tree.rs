//! Greedy spanning tree of minimizing geodesics between zeroes, and the
//! pairwise non-crossing check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::MetricMesh;
use super::path::{dijkstra, extract_path, refine_path, GeodesicPath};
use crate::chart::{ChartPoint, MobiusChart};
use crate::petals::PetalSet;
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Relative distance gap under which two candidates count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Mesh and refined distances between all zeroes, with refined paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceTable {
    pub mesh: Vec<Vec<f64>>,
    pub refined: Vec<Vec<f64>>,
    /// `paths[a][b]` for `a < b`, oriented from `a` to `b`.
    paths: Vec<Vec<Option<GeodesicPath>>>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Refined geodesic from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> GeodesicPath {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => GeodesicPath::trivial(a),
            std::cmp::Ordering::Less => self.paths[a][b].clone().expect("computed"),
            std::cmp::Ordering::Greater => self.paths[b][a].as_ref().expect("computed").reversed(),
        }
    }
}

/// Dijkstra from every zero, then refinement of every pair.
pub fn distance_table(form: &RationalForm, petals: &PetalSet, mesh: &MetricMesh) -> Result<DistanceTable> {
    let m = form.zeroes.len();
    let runs: Vec<(Vec<f64>, Vec<usize>)> = (0..m).into_par_iter().map(|a| dijkstra(mesh, mesh.zero_vertex[a])).collect();
    let mut dmesh = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            dmesh[a][b] = runs[a].0[mesh.zero_vertex[b]];
            if !dmesh[a][b].is_finite() {
                return Err(Error::numerical("shortest_path", format!("zeroes {a} and {b} are disconnected in the mesh")));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let refined: Vec<GeodesicPath> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (va, vb) = (mesh.zero_vertex[a], mesh.zero_vertex[b]);
            let verts = extract_path(&runs[a].1, va, vb).expect("finite distance");
            refine_path(form, petals, mesh, &verts)
        })
        .collect::<Result<_>>()?;
    let mut paths = vec![vec![None; m]; m];
    let mut dref = vec![vec![0.0; m]; m];
    for (&(a, b), p) in pairs.iter().zip(refined) {
        dref[a][b] = p.length;
        dref[b][a] = p.length;
        paths[a][b] = Some(p);
    }
    Ok(DistanceTable { mesh: dmesh, refined: dref, paths })
}

/// Stage `k` edge of the tree, oriented from the already chosen zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeEdge {
    pub stage: usize,
    pub from: usize,
    pub to: usize,
    pub path: GeodesicPath,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanningTree {
    /// Zeroes in the order they were chosen.
    pub order: Vec<usize>,
    pub edges: Vec<TreeEdge>,
    pub warnings: Vec<String>,
}

impl SpanningTree {
    /// Tree degree of every zero.
    pub fn degrees(&self, zero_count: usize) -> Vec<usize> {
        let mut d = vec![0; zero_count];
        for e in &self.edges {
            d[e.from] += 1;
            d[e.to] += 1;
        }
        d
    }
}

/// Picks the minimum of `(distance, child, parent)` candidates, treating
/// distances within [`TIE_TOL`] as equal.
fn pick(cands: &[(f64, usize, usize)], warnings: &mut Vec<String>) -> (f64, usize, usize) {
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let tied: Vec<&(f64, usize, usize)> = cands.iter().filter(|c| c.0 <= best * (1.0 + TIE_TOL)).collect();
    let choice = **tied.iter().min_by_key(|c| (c.1, c.2)).expect("nonempty");
    let distinct = tied.iter().filter(|c| (c.1, c.2) != (choice.1, choice.2)).count();
    if distinct > 0 {
        warnings.push(format!(
            "{} candidates tie with distance {:.17e}; chose zero {} via zero {}",
            distinct + 1,
            best,
            choice.1,
            choice.2
        ));
    }
    choice
}

/// Greedy selection on a distance matrix: the closest pair first, then
/// repeatedly the zero closest to the chosen set. Returns the chosen order
/// and `(parent, child)` per stage.
pub fn greedy_order(dist: &[Vec<f64>], warnings: &mut Vec<String>) -> (Vec<usize>, Vec<(usize, usize)>) {
    let m = dist.len();
    if m < 2 {
        return ((0..m).collect(), Vec::new());
    }
    let first: Vec<(f64, usize, usize)> =
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).map(|(a, b)| (dist[a][b], a, b)).collect();
    // For the first stage, (child, parent) = (lower, higher) index.
    let (_, a, b) = pick(&first, warnings);
    let mut order = vec![a, b];
    let mut links = vec![(a, b)];
    while order.len() < m {
        let cands: Vec<(f64, usize, usize)> = (0..m)
            .filter(|c| !order.contains(c))
            .flat_map(|c| order.iter().map(move |&p| (c, p)))
            .map(|(c, p)| (dist[p][c], c, p))
            .collect();
        let (_, c, p) = pick(&cands, warnings);
        order.push(c);
        links.push((p, c));
    }
    (order, links)
}

/// The greedy tree on refined distances: `n - 3` geodesics joining the
/// `n - 2` zeroes.
pub fn greedy_tree(table: &DistanceTable) -> SpanningTree {
    let mut warnings = Vec::new();
    let (order, links) = greedy_order(&table.refined, &mut warnings);
    let edges = links
        .iter()
        .enumerate()
        .map(|(k, &(from, to))| TreeEdge { stage: k + 1, from, to, path: table.path(from, to) })
        .collect();
    for (k, &(from, to)) in links.iter().enumerate() {
        if table.paths[from.min(to)][from.max(to)].as_ref().is_some_and(|p| p.fallback) {
            warnings.push(format!("edge {} between zeroes {from} and {to} kept its mesh polyline", k + 1));
        }
    }
    SpanningTree { order, edges, warnings }
}

/// Outcome of the pairwise intersection test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonCrossing {
    pub ok: bool,
    /// `(edge index, edge index, point)` of the first offending contact.
    pub witness: Option<(usize, usize, C64)>,
}

/// Closest points of segments `ab` and `cd`: (distance, point on `ab`).
fn segment_gap(a: C64, b: C64, c: C64, d: C64) -> (f64, C64) {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let (r, s) = (b - a, d - c);
    let den = cross(r, s);
    if den != 0.0 {
        let t = cross(c - a, s) / den;
        let u = cross(c - a, r) / den;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return (0.0, a + r * t);
        }
    }
    let proj = |p: C64, q0: C64, q1: C64| {
        let e = q1 - q0;
        let l = e.norm_sqr();
        let t = if l == 0.0 { 0.0 } else { (((p - q0) * e.conj()).re / l).clamp(0.0, 1.0) };
        q0 + e * t
    };
    let opts = [
        ((a - proj(a, c, d)).norm(), a),
        ((b - proj(b, c, d)).norm(), b),
        ((c - proj(c, a, b)).norm(), proj(c, a, b)),
        ((d - proj(d, a, b)).norm(), proj(d, a, b)),
    ];
    opts.into_iter().min_by(|x, y| x.0.total_cmp(&y.0)).expect("four options")
}

/// Checks that tree edges meet only at shared endpoint zeroes, within
/// `1e-8` of the diameter. Polylines are compared in the chart `chart`
/// (bounded for paths through infinity); the tolerance is transported with
/// the chart's local scale factor `|w|^2`.
pub fn verify_noncrossing(form: &RationalForm, chart: &MobiusChart, edges: &[(usize, usize, Vec<ChartPoint>)]) -> NonCrossing {
    let tol_z = 1e-8 * form.diameter();
    let ws: Vec<Vec<C64>> = edges.iter().map(|e| e.2.iter().map(|p| chart.to_w(p)).collect()).collect();
    let bbox = |w: &[C64]| {
        w.windows(2)
            .map(|s| (s[0].re.min(s[1].re), s[0].re.max(s[1].re), s[0].im.min(s[1].im), s[0].im.max(s[1].im)))
            .collect::<Vec<_>>()
    };
    let boxes: Vec<_> = ws.iter().map(|w| bbox(w)).collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let shared: Vec<C64> = [edges[i].0, edges[i].1]
                .into_iter()
                .filter(|z| *z == edges[j].0 || *z == edges[j].1)
                .map(|z| chart.to_w(&ChartPoint::finite(form.zeroes[z])))
                .collect();
            for (si, bi) in boxes[i].iter().enumerate() {
                for (sj, bj) in boxes[j].iter().enumerate() {
                    let a = ws[i][si];
                    let tol = tol_z * a.norm_sqr();
                    if bi.0 > bj.1 + tol || bj.0 > bi.1 + tol || bi.2 > bj.3 + tol || bj.2 > bi.3 + tol {
                        continue;
                    }
                    let (gap, x) = segment_gap(a, ws[i][si + 1], ws[j][sj], ws[j][sj + 1]);
                    if gap > tol {
                        continue;
                    }
                    if shared.iter().any(|&c| (x - c).norm() <= tol_z * c.norm_sqr()) {
                        continue;
                    }
                    return NonCrossing { ok: false, witness: Some((i, j, chart.z_from_w(x))) };
                }
            }
        }
    }
    NonCrossing { ok: true, witness: None }
}

/// Tree edges as `(from, to, polyline)` triples for [`verify_noncrossing`].
pub fn tree_polylines(tree: &SpanningTree) -> Vec<(usize, usize, Vec<ChartPoint>)> {
    tree.edges.iter().map(|e| (e.from, e.to, e.path.polyline())).collect()
}
