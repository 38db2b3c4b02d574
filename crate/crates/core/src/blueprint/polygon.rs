//! Boundary word of the cut domain and the log-polygon it develops to.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::rotation::{cone_gap, EdgeEnd, FlagKind, RotationSystem};
use crate::geodesics::SpanningTree;
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SideKind {
    Petal { pole: usize },
    /// Cut side of tree edge `edge`; `sign = 1` when traversed from the
    /// edge's `from` zero to its `to` zero.
    Cut { edge: usize, sign: i8 },
}

impl SideKind {
    /// Ordering key for canonical rotation.
    fn key(&self) -> (u8, usize, i8) {
        match *self {
            SideKind::Petal { pole } => (0, pole, 1),
            SideKind::Cut { edge, sign } => (1, edge, -sign),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PolygonSide {
    pub kind: SideKind,
    pub vector: C64,
    pub length: f64,
}

/// One side of the boundary word with the flags it uses.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WordSide {
    pub kind: SideKind,
    pub start_zero: usize,
    /// Index of the outgoing flag in the start zero's rotation.
    pub start_flag: usize,
    pub end_zero: usize,
    /// Index of the flag the side returns along at the end zero.
    pub end_flag: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PolygonVertex {
    pub zero: usize,
    /// Interior angle at the start of the side with the same index.
    pub angle: f64,
    /// Ramification order of the added point.
    pub k: usize,
    /// Sector integers of the construction.
    pub m: i64,
    pub n: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogPolygon {
    pub sides: Vec<PolygonSide>,
    pub vertices: Vec<PolygonVertex>,
    pub ambient_degree_bound: usize,
}

impl LogPolygon {
    /// Developed vertex positions starting at the origin (one more than the
    /// side count; the last closes the loop up to the development gap).
    pub fn development(&self) -> Vec<C64> {
        let mut w = vec![C64::new(0.0, 0.0)];
        for s in &self.sides {
            let last = *w.last().expect("nonempty");
            w.push(last + s.vector);
        }
        w
    }

    pub fn angle_sum(&self) -> f64 {
        self.vertices.iter().map(|v| v.angle).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.sides.iter().map(|s| s.length).sum()
    }

    /// `|sum of side vectors|`.
    pub fn closure_gap(&self) -> f64 {
        self.sides.iter().map(|s| s.vector).sum::<C64>().norm()
    }

    /// Area enclosed by the development (positive for the clockwise
    /// traversal used here).
    pub fn area(&self) -> f64 {
        let w = self.development();
        -0.5 * w.windows(2).map(|p| p[0].re * p[1].im - p[1].re * p[0].im).sum::<f64>()
    }
}

/// Traverses the single face of the ribbon graph, keeping the domain on the
/// right: petal sides follow each petal boundary in its own orientation.
pub fn boundary_word(rot: &RotationSystem, tree: &SpanningTree) -> Result<Vec<WordSide>> {
    let total = rot.flag_count();
    let Some(start_zero) = (0..rot.zeroes.len()).find(|&i| !rot.zeroes[i].is_empty()) else {
        return Err(Error::invariant("boundary_word", "no flags"));
    };
    let mut word = Vec::with_capacity(total);
    let (mut zero, mut flag) = (start_zero, 0usize);
    loop {
        let f = rot.zeroes[zero][flag];
        let (kind, end_zero, end_flag) = match f.kind {
            FlagKind::PetalCorner { pole } => (SideKind::Petal { pole }, zero, flag),
            FlagKind::TreeHalfEdge { edge, end } => {
                let e = &tree.edges[edge];
                let (other, other_end, sign) = match end {
                    EdgeEnd::From => (e.to, EdgeEnd::To, 1),
                    EdgeEnd::To => (e.from, EdgeEnd::From, -1),
                };
                let ef = rot
                    .find(other, FlagKind::TreeHalfEdge { edge, end: other_end })
                    .ok_or_else(|| Error::invariant("boundary_word", format!("edge {edge} lacks its other end")))?;
                (SideKind::Cut { edge, sign }, other, ef)
            }
        };
        word.push(WordSide { kind, start_zero: zero, start_flag: flag, end_zero, end_flag });
        zero = end_zero;
        flag = (end_flag + 1) % rot.zeroes[end_zero].len();
        if (zero, flag) == (start_zero, 0) {
            break;
        }
        if word.len() > total {
            return Err(Error::invariant("boundary_word", "face traversal did not close"));
        }
    }
    if word.len() != total {
        return Err(Error::invariant(
            "boundary_word",
            format!("cut system did not produce a disk: face of {} sides, {} flags", word.len(), total),
        ));
    }
    Ok(word)
}

/// Sector integers and order of the ramification point added at a vertex
/// with interior angle `alpha`, whose neighbours in counter-clockwise order
/// lie in directions `theta` (next) and `phi` (previous).
pub fn sector_order(alpha: f64, theta: f64, phi: f64) -> (usize, i64, i64, f64) {
    let theta = theta.rem_euclid(TAU);
    let phi = phi.rem_euclid(TAU);
    // Largest m with 2 m pi < theta - pi; smallest n with 2 n pi > phi + pi.
    let m = ((theta - PI) / TAU).ceil() as i64 - 1;
    let n = ((phi + PI) / TAU).floor() as i64 + 1;
    let u = theta - PI - TAU * m as f64;
    let v = TAU * n as f64 - phi - PI;
    let total = TAU + alpha + u + v;
    let k = (total / TAU).round();
    (k as usize, m, n, (total - k * TAU).abs())
}

/// Side vectors, interior angles and ramification data for a word.
pub fn polygon_geometry(form: &RationalForm, rot: &RotationSystem, word: &[WordSide], tree: &SpanningTree) -> Result<LogPolygon> {
    let sides: Vec<PolygonSide> = word
        .iter()
        .map(|s| {
            let vector = match s.kind {
                SideKind::Petal { pole } => C64::new(0.0, TAU) * form.residues[pole],
                SideKind::Cut { edge, sign } => tree.edges[edge].path.tau * f64::from(sign),
            };
            PolygonSide { kind: s.kind, vector, length: vector.norm() }
        })
        .collect();
    let nside = word.len();
    let mut vertices = Vec::with_capacity(nside);
    for i in 0..nside {
        let prev = &word[(i + nside - 1) % nside];
        let cur = &word[i];
        if prev.end_zero != cur.start_zero {
            return Err(Error::invariant("polygon_geometry", format!("word breaks at side {i}")));
        }
        let z = cur.start_zero;
        let arrive = rot.zeroes[z][prev.end_flag].return_position();
        let depart = rot.zeroes[z][cur.start_flag].position;
        let angle = cone_gap(arrive, depart);
        vertices.push(PolygonVertex { zero: z, angle, k: 0, m: 0, n: 0 });
    }
    let mut poly = LogPolygon { sides, vertices, ambient_degree_bound: 0 };
    let w = poly.development();
    let scale = poly.perimeter();
    for i in 0..nside {
        // Counter-clockwise traversal is the reverse of the stored one.
        let next = w[(i + nside - 1) % nside] - w[i];
        let prev = w[i + 1] - w[i];
        let (k, m, n, miss) = sector_order(poly.vertices[i].angle, next.arg(), prev.arg());
        if miss > 1e-6 * (1.0 + scale) {
            return Err(Error::numerical(
                "polygon_geometry",
                format!("cone angle at vertex {i} disagrees with the developed side directions by {miss:e}"),
            ));
        }
        let v = &mut poly.vertices[i];
        v.k = k;
        v.m = m;
        v.n = n;
    }
    poly.ambient_degree_bound = poly.vertices.iter().map(|v| v.k.saturating_sub(1)).sum::<usize>() + 1;
    Ok(poly)
}

/// Rotation index making the side word lexicographically minimal.
pub fn canonical_rotation(word: &[WordSide]) -> usize {
    let keys: Vec<(u8, usize, i8)> = word.iter().map(|s| s.kind.key()).collect();
    let n = keys.len();
    (0..n)
        .min_by(|&a, &b| (0..n).map(|i| keys[(a + i) % n]).cmp((0..n).map(|i| keys[(b + i) % n])))
        .unwrap_or(0)
}

/// Disjoint-set forest used for vertex identification.
pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Vertex classes of the polygon once cut sides are paired and each petal
/// side is closed up by its cylinder. Returns the class of every vertex
/// (index of the start of each side).
pub fn vertex_classes(sides: &[PolygonSide]) -> Vec<usize> {
    let n = sides.len();
    let mut uf = UnionFind::new(n);
    for (i, s) in sides.iter().enumerate() {
        match s.kind {
            SideKind::Petal { .. } => uf.union(i, (i + 1) % n),
            SideKind::Cut { edge, sign: 1 } => {
                if let Some(j) = sides.iter().position(|t| t.kind == SideKind::Cut { edge, sign: -1 }) {
                    uf.union(i, (j + 1) % n);
                    uf.union((i + 1) % n, j);
                }
            }
            SideKind::Cut { .. } => {}
        }
    }
    (0..n).map(|i| uf.find(i)).collect()
}
