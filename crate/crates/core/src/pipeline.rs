//! Stage functions shared by the command-line tool and the C interface.

use std::path::Path;

use crate::blueprint::{assemble_surface, SurfaceBlueprint};
use crate::chart::MobiusChart;
use crate::geodesics::{
    build_mesh, distance_table, greedy_tree, tree_polylines, verify_noncrossing, DistanceTable, MetricMesh,
    NonCrossing, SpanningTree, DEFAULT_RESOLUTION,
};
use crate::petals::{compute_petals, PetalSet};
use crate::ratform::{check_generic, parse_form, sample, FormInput, GenericityReport, RationalForm};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Settings of one pipeline run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Genericity tolerance.
    pub tol: f64,
    /// Target edge count of the geodesic mesh.
    pub mesh_resolution: usize,
    /// Seed for `random:<n>` inputs.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tol: DEFAULT_TOL, mesh_resolution: DEFAULT_RESOLUTION, seed: 0 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.mesh_resolution < 1000 {
            return Err(Error::InvalidInput(format!("mesh resolution must be at least 1000, got {}", self.mesh_resolution)));
        }
        Ok(())
    }
}

/// Reads a form from an expression, a JSON coefficient file, inline JSON,
/// or `random:<n>` (a seeded generic form of degree `n`).
pub fn load_form(input: &str, seed: u64) -> Result<RationalForm> {
    let text = input.trim();
    if let Some(n) = text.strip_prefix("random:") {
        let n: usize = n.trim().parse().map_err(|_| Error::InvalidInput(format!("bad degree in {text:?}")))?;
        if !(3..=12).contains(&n) {
            return Err(Error::InvalidInput(format!("random forms need 3 <= n <= 12, got {n}")));
        }
        return Ok(sample::seeded(seed, n));
    }
    if text.starts_with('{') {
        return serde_json::from_str::<FormInput>(text)?.into_form();
    }
    let path = Path::new(text);
    if path.is_file() {
        let body = std::fs::read_to_string(path)?;
        return load_form(&body, seed);
    }
    parse_form(text)
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub form: RationalForm,
    pub genericity: GenericityReport,
}

pub fn analyze(form: RationalForm, tol: f64) -> Result<Analysis> {
    let genericity = check_generic(&form, tol)?;
    Ok(Analysis { form, genericity })
}

impl Analysis {
    /// Fails with [`Error::NonGeneric`] unless every condition holds.
    pub fn require_generic(&self) -> Result<()> {
        if self.genericity.is_generic() {
            Ok(())
        } else {
            Err(Error::NonGeneric(self.genericity.failure_summary()))
        }
    }
}

pub fn petals(analysis: &Analysis) -> Result<PetalSet> {
    analysis.require_generic()?;
    compute_petals(&analysis.form)
}

/// Geodesic stage output. Degree three has no cuts and no mesh.
pub struct TreeStage {
    pub mesh: Option<MetricMesh>,
    pub table: Option<DistanceTable>,
    pub tree: SpanningTree,
    pub noncrossing: NonCrossing,
}

pub fn tree(form: &RationalForm, petals: &PetalSet, resolution: usize) -> Result<TreeStage> {
    if form.n() == 3 {
        return Ok(TreeStage {
            mesh: None,
            table: None,
            tree: SpanningTree { order: vec![0], edges: Vec::new(), warnings: Vec::new() },
            noncrossing: NonCrossing { ok: true, witness: None },
        });
    }
    let mesh = build_mesh(form, petals, resolution)?;
    let table = distance_table(form, petals, &mesh)?;
    let tree = greedy_tree(&table);
    let noncrossing = verify_noncrossing(form, &MobiusChart::new(form.poles[0]), &tree_polylines(&tree));
    Ok(TreeStage { mesh: Some(mesh), table: Some(table), tree, noncrossing })
}

/// All stages of one run.
pub struct Pipeline {
    pub analysis: Analysis,
    pub petals: PetalSet,
    pub tree: TreeStage,
    pub blueprint: SurfaceBlueprint,
}

pub fn run(form: RationalForm, config: &RunConfig) -> Result<Pipeline> {
    config.validate()?;
    let analysis = analyze(form, config.tol)?;
    let petals = petals(&analysis)?;
    let tree = tree(&analysis.form, &petals, config.mesh_resolution)?;
    let blueprint = assemble_surface(&analysis.form, &petals, &tree.tree)?;
    Ok(Pipeline { analysis, petals, tree, blueprint })
}
