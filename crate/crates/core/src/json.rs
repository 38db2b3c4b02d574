//! Canonical JSON documents for every pipeline stage.
//!
//! Objects are written with sorted keys, no whitespace, integers verbatim
//! and every float with 17 significant digits, so equal values always give
//! byte-identical text. Complex numbers are `[re, im]` pairs; an infinite
//! petal radius is the string `"inf"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::blueprint::{
    Check, Cylinder, HexagonReport, LogPolygon, Pasting, PolygonSide, PolygonVertex, SideKind, SurfaceBlueprint,
    TreeEdgeSummary, WordSide,
};
use crate::geodesics::{DistanceTable, SpanningTree};
use crate::petals::{PetalCensus, PetalSet};
use crate::ratform::{GenericityReport, RationalForm};
use crate::{Result, C64};

fn write_float(x: f64, out: &mut String) {
    if x.is_nan() {
        out.push_str("\"nan\"");
    } else if x.is_infinite() {
        out.push_str(if x > 0.0 { "\"inf\"" } else { "\"-inf\"" });
    } else {
        out.push_str(&format!("{x:.16e}"));
    }
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                write_float(n.as_f64().unwrap_or(f64::NAN), out);
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push(':');
                write_value(&m[k], out);
            }
            out.push('}');
        }
    }
}

/// Canonical text of any serializable value.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, &mut out);
    Ok(out)
}

/// A float that may be infinite, written as `"inf"` in that case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaybeInf(pub f64);

impl Serialize for MaybeInf {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for MaybeInf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "inf" => Ok(MaybeInf(f64::INFINITY)),
            Value::Number(n) => n.as_f64().map(MaybeInf).ok_or_else(|| D::Error::custom("bad number")),
            other => Err(D::Error::custom(format!("expected a number or \"inf\", got {other}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleDoc {
    pub z: C64,
    pub residue: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusDoc {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub n_more: usize,
    pub attachment: Vec<Vec<usize>>,
}

impl From<&PetalCensus> for CensusDoc {
    fn from(c: &PetalCensus) -> Self {
        CensusDoc { n0: c.n0, n1: c.n1, n2: c.n2, n_more: c.n_more, attachment: c.per_zero.clone() }
    }
}

impl From<&CensusDoc> for PetalCensus {
    fn from(c: &CensusDoc) -> Self {
        PetalCensus { n0: c.n0, n1: c.n1, n2: c.n2, n_more: c.n_more, per_zero: c.attachment.clone() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PetalDoc {
    pub pole: usize,
    pub radius: MaybeInf,
    pub boundary: Vec<C64>,
    pub displacement: C64,
    pub attached_zeroes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeDoc {
    pub from: usize,
    pub to: usize,
    pub stage: usize,
    pub length: f64,
    pub tau: C64,
    pub polyline: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SideDoc {
    pub kind: String,
    #[serde(rename = "ref")]
    pub reference: usize,
    pub sign: i8,
    pub vector: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexDoc {
    pub zero: usize,
    pub angle: f64,
    pub k: usize,
    pub m: i64,
    pub n: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolygonDoc {
    pub sides: Vec<SideDoc>,
    pub vertices: Vec<VertexDoc>,
    pub degree_bound: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl DiagnosticsDoc {
    pub fn new(checks: Vec<Check>) -> Self {
        DiagnosticsDoc { pass: checks.iter().all(|c| c.pass), checks }
    }
}

fn poles_doc(form: &RationalForm) -> Vec<PoleDoc> {
    form.poles.iter().zip(&form.residues).map(|(&z, &residue)| PoleDoc { z, residue }).collect()
}

fn petals_doc(petals: &PetalSet) -> Vec<PetalDoc> {
    petals
        .petals
        .iter()
        .map(|p| PetalDoc {
            pole: p.pole,
            radius: MaybeInf(p.radius),
            boundary: p.boundary.iter().map(|q| q.to_z()).collect(),
            displacement: p.boundary_displacement,
            attached_zeroes: p.attached_zeroes.clone(),
        })
        .collect()
}

fn tree_doc(edges: &[TreeEdgeSummary]) -> Vec<TreeDoc> {
    edges
        .iter()
        .map(|e| TreeDoc { from: e.from, to: e.to, stage: e.stage, length: e.length, tau: e.tau, polyline: e.polyline.clone() })
        .collect()
}

/// Output of the `analyze` stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeDoc {
    pub degree: usize,
    pub poles: Vec<PoleDoc>,
    pub zeroes: Vec<C64>,
    pub genericity: GenericityReport,
}

impl AnalyzeDoc {
    pub fn new(form: &RationalForm, genericity: &GenericityReport) -> Self {
        AnalyzeDoc { degree: form.n(), poles: poles_doc(form), zeroes: form.zeroes.clone(), genericity: genericity.clone() }
    }
}

/// Output of the `petals` stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PetalsDoc {
    pub degree: usize,
    pub census: CensusDoc,
    pub petals: Vec<PetalDoc>,
}

impl PetalsDoc {
    pub fn new(form: &RationalForm, petals: &PetalSet) -> Self {
        PetalsDoc { degree: form.n(), census: (&petals.census).into(), petals: petals_doc(petals) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistancesDoc {
    pub mesh: Vec<Vec<f64>>,
    pub refined: Vec<Vec<f64>>,
}

/// Output of the `tree` stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeStageDoc {
    pub degree: usize,
    pub distances: DistancesDoc,
    pub order: Vec<usize>,
    pub tree: Vec<TreeDoc>,
    pub noncrossing: bool,
    pub warnings: Vec<String>,
}

impl TreeStageDoc {
    pub fn new(form: &RationalForm, table: Option<&DistanceTable>, tree: &SpanningTree, noncrossing: bool) -> Self {
        let summaries: Vec<TreeEdgeSummary> = tree
            .edges
            .iter()
            .map(|e| TreeEdgeSummary {
                stage: e.stage,
                from: e.from,
                to: e.to,
                tau: e.path.tau,
                length: e.path.length,
                polyline: e.path.polyline().iter().map(|q| q.to_z()).collect(),
            })
            .collect();
        TreeStageDoc {
            degree: form.n(),
            distances: DistancesDoc {
                mesh: table.map(|t| t.mesh.clone()).unwrap_or_default(),
                refined: table.map(|t| t.refined.clone()).unwrap_or_default(),
            },
            order: tree.order.clone(),
            tree: tree_doc(&summaries),
            noncrossing,
            warnings: tree.warnings.clone(),
        }
    }
}

/// The full blueprint document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlueprintDoc {
    pub degree: usize,
    pub poles: Vec<PoleDoc>,
    pub zeroes: Vec<C64>,
    pub genericity: GenericityReport,
    pub census: CensusDoc,
    pub petals: Vec<PetalDoc>,
    pub tree: Vec<TreeDoc>,
    pub polygon: PolygonDoc,
    pub cylinders: Vec<Cylinder>,
    pub pastings: Vec<Pasting>,
    pub vertex_classes: usize,
    pub euler_characteristic: i64,
    pub boundary_components: usize,
    pub hexagon: Option<HexagonReport>,
    pub diagnostics: DiagnosticsDoc,
}

impl BlueprintDoc {
    pub fn new(form: &RationalForm, genericity: &GenericityReport, petals: &PetalSet, bp: &SurfaceBlueprint) -> Self {
        let sides = bp
            .polygon
            .sides
            .iter()
            .map(|s| {
                let (kind, reference, sign) = match s.kind {
                    SideKind::Petal { pole } => ("petal", pole, 1),
                    SideKind::Cut { edge, sign } => ("cut", edge, sign),
                };
                SideDoc { kind: kind.to_string(), reference, sign, vector: s.vector }
            })
            .collect();
        let vertices = bp
            .polygon
            .vertices
            .iter()
            .map(|v| VertexDoc { zero: v.zero, angle: v.angle, k: v.k, m: v.m, n: v.n })
            .collect();
        BlueprintDoc {
            degree: bp.degree,
            poles: poles_doc(form),
            zeroes: bp.zeroes.clone(),
            genericity: genericity.clone(),
            census: (&bp.census).into(),
            petals: petals_doc(petals),
            tree: tree_doc(&bp.tree),
            polygon: PolygonDoc { sides, vertices, degree_bound: bp.polygon.ambient_degree_bound },
            cylinders: bp.cylinders.clone(),
            pastings: bp.pastings.clone(),
            vertex_classes: bp.vertex_classes,
            euler_characteristic: bp.euler_characteristic,
            boundary_components: bp.boundary_components,
            hexagon: bp.hexagon.clone(),
            diagnostics: DiagnosticsDoc::new(bp.diagnostics.clone()),
        }
    }

    /// Rebuilds the in-memory blueprint. The boundary word keeps only its
    /// vertex labels; flag indices are not part of the document.
    pub fn to_blueprint(&self) -> SurfaceBlueprint {
        let nside = self.polygon.sides.len();
        let sides: Vec<PolygonSide> = self
            .polygon
            .sides
            .iter()
            .map(|s| {
                let kind = if s.kind == "petal" {
                    SideKind::Petal { pole: s.reference }
                } else {
                    SideKind::Cut { edge: s.reference, sign: s.sign }
                };
                PolygonSide { kind, vector: s.vector, length: s.vector.norm() }
            })
            .collect();
        let vertices: Vec<PolygonVertex> = self
            .polygon
            .vertices
            .iter()
            .map(|v| PolygonVertex { zero: v.zero, angle: v.angle, k: v.k, m: v.m, n: v.n })
            .collect();
        let word = (0..nside)
            .map(|i| WordSide {
                kind: sides[i].kind,
                start_zero: vertices[i].zero,
                start_flag: 0,
                end_zero: vertices[(i + 1) % nside].zero,
                end_flag: 0,
            })
            .collect();
        SurfaceBlueprint {
            degree: self.degree,
            poles: self.poles.iter().map(|p| p.z).collect(),
            residues: self.poles.iter().map(|p| p.residue).collect(),
            zeroes: self.zeroes.clone(),
            census: (&self.census).into(),
            petals: self
                .petals
                .iter()
                .map(|p| crate::blueprint::PetalSummary {
                    pole: p.pole,
                    radius: p.radius.0,
                    boundary: p.boundary.clone(),
                    displacement: p.displacement,
                })
                .collect(),
            tree: self
                .tree
                .iter()
                .map(|e| TreeEdgeSummary { stage: e.stage, from: e.from, to: e.to, tau: e.tau, length: e.length, polyline: e.polyline.clone() })
                .collect(),
            word,
            polygon: LogPolygon { sides, vertices, ambient_degree_bound: self.polygon.degree_bound },
            cylinders: self.cylinders.clone(),
            pastings: self.pastings.clone(),
            vertex_classes: self.vertex_classes,
            euler_characteristic: self.euler_characteristic,
            boundary_components: self.boundary_components,
            hexagon: self.hexagon.clone(),
            diagnostics: self.diagnostics.checks.clone(),
        }
    }
}

/// Parses a stage document written by [`to_canonical`].
pub fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}
