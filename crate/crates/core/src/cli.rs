//! The `tubelog` command-line tool.
//!
//! Every subcommand runs the stages it needs and prints (or writes) a
//! canonical JSON document. Exit codes: 0 success, 1 usage or parse error,
//! 2 non-generic input, 3 numerical failure or failed invariant.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blueprint::{assemble_surface, verify_blueprint, SurfaceBlueprint};
use crate::geodesics::{NonCrossing, SpanningTree, DEFAULT_RESOLUTION};
use crate::json::{to_canonical, AnalyzeDoc, BlueprintDoc, DiagnosticsDoc, PetalsDoc, TreeStageDoc};
use crate::petals::{Petal, PetalCensus, PetalSet, Probe};
use crate::pipeline::{self, Analysis, RunConfig, DEFAULT_TOL};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "tubelog", version, about = "Flat-surface decomposition of primitives of generic rational 1-forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Poles, zeroes, residues and the genericity report.
    Analyze(Args),
    /// Petal census and boundaries.
    Petals(Args),
    /// Distance matrix and cut tree.
    Tree(Args),
    /// The full surface blueprint.
    Blueprint(Args),
    /// SVG figures of the z-plane and of the developed polygon.
    Render(Args),
    /// Re-checks every invariant of the blueprint.
    Verify(Args),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Args {
    /// Expression in z, a JSON coefficient file, or random:<n>.
    #[arg(value_name = "INPUT")]
    pub positional: Option<String>,
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long = "mesh-res", default_value_t = DEFAULT_RESOLUTION)]
    pub mesh_res: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; documents go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "json")]
    pub format: Vec<Format>,
    /// Cache directory for upstream stages (defaults to the output directory).
    #[arg(long = "stage-cache")]
    pub stage_cache: Option<PathBuf>,
}

impl Args {
    fn input(&self) -> Result<&str> {
        match (&self.positional, &self.input) {
            (Some(_), Some(_)) => Err(Error::InvalidInput("give the input either positionally or with --input".into())),
            (Some(s), None) | (None, Some(s)) => Ok(s),
            (None, None) => Err(Error::InvalidInput("no input form given".into())),
        }
    }

    fn config(&self) -> RunConfig {
        RunConfig { tol: self.tol, mesh_resolution: self.mesh_res, seed: self.seed }
    }

    fn cache_dir(&self) -> Option<&Path> {
        self.stage_cache.as_deref().or(self.out.as_deref())
    }

    fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::InvalidInput(_) | Error::Json(_) | Error::Io(_) => 1,
        Error::NotRegularAtInfinity { .. } | Error::PoleNotSimple(_) | Error::NonGeneric(_) => 2,
        Error::Numerical { .. } | Error::Invariant { .. } => 3,
    }
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// One cached stage: the key it was computed for, the hash of the upstream
/// document it was derived from, and the payload.
#[derive(Serialize, Deserialize)]
struct CacheEntry<T> {
    key: String,
    upstream_sha256: String,
    data: T,
}

#[derive(Serialize, Deserialize)]
struct PetalPayload {
    petals: Vec<Petal>,
    census: PetalCensus,
    probes: Vec<Probe>,
}

#[derive(Serialize, Deserialize)]
struct TreePayload {
    mesh: Vec<Vec<f64>>,
    refined: Vec<Vec<f64>>,
    tree: SpanningTree,
    noncrossing: NonCrossing,
}

fn load_cache<T: for<'de> Deserialize<'de>>(dir: Option<&Path>, name: &str, key: &str, upstream: &str) -> Option<T> {
    let text = fs::read_to_string(dir?.join(name)).ok()?;
    let entry: CacheEntry<T> = serde_json::from_str(&text).ok()?;
    (entry.key == key && entry.upstream_sha256 == upstream).then_some(entry.data)
}

/// Stores a cache entry and returns the hash of its payload text.
fn store_cache<T: Serialize>(dir: Option<&Path>, name: &str, key: &str, upstream: &str, data: T) -> Result<String> {
    let entry = CacheEntry { key: key.to_string(), upstream_sha256: upstream.to_string(), data };
    let text = serde_json::to_string(&entry)?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), &text)?;
    }
    Ok(sha256_hex(&serde_json::to_string(&entry.data)?))
}

struct Session {
    args: Args,
    analysis: Analysis,
    analyze_text: String,
}

struct TreeResult {
    mesh: Vec<Vec<f64>>,
    refined: Vec<Vec<f64>>,
    tree: SpanningTree,
    noncrossing: NonCrossing,
}

impl Session {
    fn new(args: Args) -> Result<Session> {
        let config = args.config();
        config.validate()?;
        let form = pipeline::load_form(args.input()?, args.seed)?;
        let analysis = pipeline::analyze(form, args.tol)?;
        let analyze_text = to_canonical(&AnalyzeDoc::new(&analysis.form, &analysis.genericity))?;
        Ok(Session { args, analysis, analyze_text })
    }

    /// A session for the stages past `analyze`: non-generic input is
    /// refused after its report has been emitted.
    fn generic(args: Args) -> Result<Session> {
        let s = Session::new(args)?;
        if let Err(e) = s.analysis.require_generic() {
            s.emit("analyze.json", &s.analyze_text)?;
            return Err(e);
        }
        Ok(s)
    }

    fn petals(&self) -> Result<(PetalSet, String)> {
        self.analysis.require_generic()?;
        let dir = self.args.cache_dir();
        let upstream = sha256_hex(&self.analyze_text);
        let key = sha256_hex(&format!("petals:{upstream}"));
        let form = &self.analysis.form;
        if let Some(p) = load_cache::<PetalPayload>(dir, "petals.cache.json", &key, &upstream) {
            if p.petals.len() == form.n() {
                let hash = sha256_hex(&serde_json::to_string(&p)?);
                return Ok((PetalSet::from_parts(form, p.petals, p.census, p.probes), hash));
            }
        }
        let set = pipeline::petals(&self.analysis)?;
        let payload = PetalPayload { petals: set.petals.clone(), census: set.census.clone(), probes: set.probes.clone() };
        let hash = store_cache(dir, "petals.cache.json", &key, &upstream, payload)?;
        Ok((set, hash))
    }

    fn tree(&self, petals: &PetalSet, petals_hash: &str) -> Result<TreeResult> {
        let dir = self.args.cache_dir();
        let key = sha256_hex(&format!("tree:{petals_hash}:{}", self.args.mesh_res));
        if let Some(t) = load_cache::<TreePayload>(dir, "tree.cache.json", &key, petals_hash) {
            return Ok(TreeResult { mesh: t.mesh, refined: t.refined, tree: t.tree, noncrossing: t.noncrossing });
        }
        let stage = pipeline::tree(&self.analysis.form, petals, self.args.mesh_res)?;
        let (mesh, refined) = stage.table.map(|t| (t.mesh, t.refined)).unwrap_or_default();
        let payload = TreePayload { mesh, refined, tree: stage.tree, noncrossing: stage.noncrossing };
        store_cache(dir, "tree.cache.json", &key, petals_hash, &payload)?;
        Ok(TreeResult { mesh: payload.mesh, refined: payload.refined, tree: payload.tree, noncrossing: payload.noncrossing })
    }

    fn blueprint(&self) -> Result<(PetalSet, SurfaceBlueprint)> {
        let (petals, hash) = self.petals()?;
        let tree = self.tree(&petals, &hash)?;
        let bp = assemble_surface(&self.analysis.form, &petals, &tree.tree)?;
        Ok((petals, bp))
    }

    fn emit(&self, name: &str, text: &str) -> Result<()> {
        match &self.args.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), text)?;
            }
            None => println!("{text}"),
        }
        Ok(())
    }

    fn blueprint_text(&self, petals: &PetalSet, bp: &SurfaceBlueprint) -> Result<String> {
        to_canonical(&BlueprintDoc::new(&self.analysis.form, &self.analysis.genericity, petals, bp))
    }

    fn write_figures(&self, bp: &SurfaceBlueprint) -> Result<()> {
        let dir = self.args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("figure_a.svg"), crate::render::render_plane(bp))?;
        fs::write(dir.join("figure_b.svg"), crate::render::render_development(bp))?;
        Ok(())
    }
}

fn failed_checks(checks: &[crate::blueprint::Check]) -> Result<()> {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Invariant { stage: "verify", detail: format!("failed checks: {}", failed.join(", ")) })
    }
}

fn run_command(cmd: Command) -> Result<()> {
    match cmd {
        Command::Analyze(args) => {
            let s = Session::new(args)?;
            s.emit("analyze.json", &s.analyze_text)
        }
        Command::Petals(args) => {
            let s = Session::generic(args)?;
            let (set, _) = s.petals()?;
            s.emit("petals.json", &to_canonical(&PetalsDoc::new(&s.analysis.form, &set))?)
        }
        Command::Tree(args) => {
            let s = Session::generic(args)?;
            let (set, hash) = s.petals()?;
            let t = s.tree(&set, &hash)?;
            let mut doc = TreeStageDoc::new(&s.analysis.form, None, &t.tree, t.noncrossing.ok);
            doc.distances.mesh = t.mesh;
            doc.distances.refined = t.refined;
            s.emit("tree.json", &to_canonical(&doc)?)
        }
        Command::Blueprint(args) => {
            let s = Session::generic(args)?;
            let (petals, bp) = s.blueprint()?;
            if s.args.wants(Format::Json) || !s.args.wants(Format::Svg) {
                s.emit("blueprint.json", &s.blueprint_text(&petals, &bp)?)?;
            }
            if s.args.wants(Format::Svg) {
                s.write_figures(&bp)?;
            }
            failed_checks(&bp.diagnostics)
        }
        Command::Render(args) => {
            let s = Session::generic(args)?;
            let (_, bp) = s.blueprint()?;
            s.write_figures(&bp)
        }
        Command::Verify(args) => {
            let s = Session::generic(args)?;
            // A blueprint written earlier in the output directory is checked
            // as stored; otherwise it is computed.
            let stored = s.args.out.as_ref().map(|d| d.join("blueprint.json")).filter(|p| p.is_file());
            let bp = match stored {
                Some(path) => crate::json::from_str::<BlueprintDoc>(&fs::read_to_string(path)?)?.to_blueprint(),
                None => s.blueprint()?.1,
            };
            let checks = verify_blueprint(&s.analysis.form, &bp);
            s.emit("diagnostics.json", &to_canonical(&DiagnosticsDoc::new(checks.clone()))?)?;
            failed_checks(&checks)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("TUBELOG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tubelog: {e}");
            exit_code(&e)
        }
    }
}
