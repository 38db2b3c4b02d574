//! Cyclic order of petal corners and cut half-edges around each zero.
//!
//! A direction `u` leaving a simple zero `c` has developed position
//! `arg R'(c) + 2 arg u` on the cone of angle `4 pi`; petal corners occupy a
//! wedge of width `pi` starting at their outgoing boundary arm.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geodesics::{SegmentKind, SpanningTree};
use crate::petals::PetalSet;
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

pub const CONE: f64 = 2.0 * TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeEnd {
    From,
    To,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagKind {
    PetalCorner { pole: usize },
    TreeHalfEdge { edge: usize, end: EdgeEnd },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Flag {
    pub kind: FlagKind,
    /// Cone position of the outgoing ray (for a petal, its outgoing arm).
    pub position: f64,
    /// Unit tangent of that ray in the z-plane.
    pub direction: C64,
}

impl Flag {
    /// Cone position of the ray along which the boundary returns to the zero.
    pub fn return_position(&self) -> f64 {
        match self.kind {
            FlagKind::PetalCorner { .. } => (self.position + PI).rem_euclid(CONE),
            FlagKind::TreeHalfEdge { .. } => self.position,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationSystem {
    /// Per zero, flags sorted by increasing position.
    pub zeroes: Vec<Vec<Flag>>,
}

impl RotationSystem {
    pub fn flag_count(&self) -> usize {
        self.zeroes.iter().map(Vec::len).sum()
    }

    pub fn find(&self, zero: usize, kind: FlagKind) -> Option<usize> {
        self.zeroes[zero].iter().position(|f| f.kind == kind)
    }
}

/// Cone position of the direction `u` at zero `c`.
pub fn cone_position(form: &RationalForm, c: C64, u: C64) -> f64 {
    (form.eval_derivative(c).arg() + 2.0 * u.arg()).rem_euclid(CONE)
}

/// Counter-clockwise cone gap from position `a` to position `b`, in `(0, 4 pi]`.
pub fn cone_gap(a: f64, b: f64) -> f64 {
    let g = (b - a).rem_euclid(CONE);
    if g <= 1e-12 {
        CONE
    } else {
        g
    }
}

/// Unit ray at zero `c` whose flat direction is `v`, the sign picked closest
/// to the sampled tangent `hint`.
fn ray(form: &RationalForm, c: C64, v: C64, hint: C64) -> C64 {
    let u = (v / form.eval_derivative(c)).sqrt();
    let u = u / u.norm();
    if (u * hint.conj()).re >= 0.0 {
        u
    } else {
        -u
    }
}

/// Builds the rotation system from the petal corners and the tree edges.
pub fn rotation_system(form: &RationalForm, petals: &PetalSet, tree: &SpanningTree) -> Result<RotationSystem> {
    let m = form.zeroes.len();
    let mut zeroes: Vec<Vec<Flag>> = vec![Vec::new(); m];
    for petal in &petals.petals {
        for corner in &petal.corners {
            let c = form.zeroes[corner.zero];
            zeroes[corner.zero].push(Flag {
                kind: FlagKind::PetalCorner { pole: petal.pole },
                position: cone_position(form, c, corner.arm_out),
                direction: corner.arm_out,
            });
        }
    }
    for (k, e) in tree.edges.iter().enumerate() {
        let segs = &e.path.segments;
        let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
            return Err(Error::invariant("rotation_system", format!("tree edge {k} is empty")));
        };
        if segs.iter().any(|s| s.kind != SegmentKind::Straight) {
            return Err(Error::invariant(
                "rotation_system",
                format!("tree edge {k} is not a single flat segment away from petal boundaries"),
            ));
        }
        let (ca, cb) = (form.zeroes[e.from], form.zeroes[e.to]);
        let ua = ray(form, ca, first.tau / first.tau.norm(), first.polyline[1].to_z() - ca);
        let n = last.polyline.len();
        let ub = ray(form, cb, -last.tau / last.tau.norm(), last.polyline[n - 2].to_z() - cb);
        zeroes[e.from].push(Flag {
            kind: FlagKind::TreeHalfEdge { edge: k, end: EdgeEnd::From },
            position: cone_position(form, ca, ua),
            direction: ua,
        });
        zeroes[e.to].push(Flag {
            kind: FlagKind::TreeHalfEdge { edge: k, end: EdgeEnd::To },
            position: cone_position(form, cb, ub),
            direction: ub,
        });
    }
    for (i, flags) in zeroes.iter_mut().enumerate() {
        flags.sort_by(|a, b| a.position.total_cmp(&b.position));
        // Every flag must lie outside the open wedges of the petal corners,
        // and wedges must not overlap.
        for f in flags.iter() {
            if let FlagKind::PetalCorner { pole } = f.kind {
                for g in flags.iter() {
                    if g.kind == f.kind {
                        continue;
                    }
                    let into = (g.position - f.position).rem_euclid(CONE);
                    let wedge_hit = into < PI - 1e-9 || (into < 1e-9);
                    let other_wedge = matches!(g.kind, FlagKind::PetalCorner { .. })
                        && ((f.position - g.position).rem_euclid(CONE) < PI - 1e-9);
                    if wedge_hit || other_wedge {
                        return Err(Error::numerical(
                            "rotation_system",
                            format!(
                                "overlapping wedges at zero {i}: petal {pole} at {:.9} and {:?} at {:.9}",
                                f.position, g.kind, g.position
                            ),
                        ));
                    }
                }
            }
        }
    }
    Ok(RotationSystem { zeroes })
}
