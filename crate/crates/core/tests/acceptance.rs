//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! on stdout and the supporting detail on stderr.
//!
//! The process exits 0 even when a criterion fails, so that a failing
//! property is reported rather than aborting the workspace test run. Set
//! `TUBELOG_ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tubelog::blueprint::polygon::{vertex_classes, SideKind};
use tubelog::blueprint::SurfaceBlueprint;
use tubelog::chart::{ChartPoint, MobiusChart};
use tubelog::flowfield::{trace_flow, FlowSpec};
use tubelog::geodesics::{tree_polylines, verify_noncrossing, DistanceTable, SpanningTree, DEFAULT_RESOLUTION};
use tubelog::json::{to_canonical, BlueprintDoc};
use tubelog::petals::PetalSet;
use tubelog::pipeline::{self, RunConfig};
use tubelog::ratform::{parse_form, sample, RationalForm};
use tubelog::C64;

const SUITE_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const SUITE_DEGREES: std::ops::RangeInclusive<usize> = 4..=8;
const CALIBRATION_SEED: u64 = 1001;
const COARSE_RESOLUTION: usize = DEFAULT_RESOLUTION / 2;

/// Everything kept from one full pipeline run.
struct Instance {
    seed: u64,
    n: usize,
    form: RationalForm,
    petals: PetalSet,
    table: Option<DistanceTable>,
    tree: SpanningTree,
    chart: MobiusChart,
    h: f64,
    metric_area: f64,
    blueprint: SurfaceBlueprint,
    json: String,
}

impl Instance {
    fn label(&self) -> String {
        format!("(seed {}, n {})", self.seed, self.n)
    }
}

fn run_instance(seed: u64, n: usize, resolution: usize) -> Result<Instance, String> {
    let form = sample::seeded(seed, n);
    let config = RunConfig { mesh_resolution: resolution, ..RunConfig::default() };
    let p = pipeline::run(form, &config).map_err(|e| format!("(seed {seed}, n {n}): {e}"))?;
    let json = to_canonical(&BlueprintDoc::new(&p.analysis.form, &p.analysis.genericity, &p.petals, &p.blueprint))
        .map_err(|e| e.to_string())?;
    let (h, metric_area) = p.tree.mesh.as_ref().map_or((f64::NAN, f64::NAN), |m| (m.h, m.metric_area));
    Ok(Instance {
        seed,
        n,
        chart: MobiusChart::new(p.analysis.form.poles[0]),
        form: p.analysis.form,
        petals: p.petals,
        table: p.tree.table,
        tree: p.tree.tree,
        h,
        metric_area,
        blueprint: p.blueprint,
        json,
    })
}

/// Collects failures of one criterion.
struct Verdict {
    number: usize,
    summary: String,
    failures: Vec<String>,
}

impl Verdict {
    fn new(number: usize) -> Self {
        Verdict { number, summary: String::new(), failures: Vec::new() }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    fn report(self) -> bool {
        let pass = self.failures.is_empty();
        println!("criterion {}: {}  {}", self.number, if pass { "PASS" } else { "FAIL" }, self.summary);
        for f in &self.failures {
            eprintln!("  criterion {}: {f}", self.number);
        }
        pass
    }
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new(1);
    let start = Instant::now();
    let result = parse_form("2/(z*(z-1)*(z+1))").and_then(|f| pipeline::analyze(f, pipeline::DEFAULT_TOL));
    let elapsed = start.elapsed().as_secs_f64();
    match result {
        Ok(a) => {
            let expected = [(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)];
            let mut err: f64 = 0.0;
            for (z, lam) in expected {
                let found = a.form.poles.iter().position(|p| (p - C64::new(z, 0.0)).norm() < 1e-6);
                match found {
                    Some(j) => err = err.max((a.form.residues[j] - C64::new(lam, 0.0)).norm()),
                    None => v.fail(format!("pole {z} not found")),
                }
            }
            v.check(err <= 1e-12, || format!("residue error {err:e}"));
            v.check(!a.genericity.cond_c.pass, || "condition (c) reported as passing".into());
            v.check(elapsed < 1.0, || format!("took {elapsed:.3} s"));
            v.summary = format!("residues (-2, 1, 1) within {err:.1e}, condition (c) failed, {:.1} ms", elapsed * 1e3);
        }
        Err(e) => v.fail(e.to_string()),
    }
    v
}

fn criterion_2(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(2);
    let mut bad = 0;
    for inst in suite {
        let before = v.failures.len();
        let c = &inst.petals.census;
        let n = inst.n;
        let sums = c.n0 + c.n1 + c.n2 == n - 2 && c.n1 + 2 * c.n2 == n && c.n_more == 0;
        v.check(sums, || format!("{} census ({}, {}, {}) + {} zeroes with three petals breaks the identities", inst.label(), c.n0, c.n1, c.n2, c.n_more));
        if sums {
            v.check(c.in_family(n), || format!("{} census ({}, {}, {}) outside the family", inst.label(), c.n0, c.n1, c.n2));
        }
        if n == 4 {
            v.check((c.n0, c.n1, c.n2) == (0, 0, 2), || format!("{} quartic census ({}, {}, {})", inst.label(), c.n0, c.n1, c.n2));
        }
        bad += usize::from(v.failures.len() > before);
    }
    v.summary = format!("{} of {} instances satisfy the census identities and family", suite.len() - bad, suite.len());
    v
}

fn petal_geometry(v: &mut Verdict, label: &str, form: &RationalForm, set: &PetalSet) {
    for p in &set.petals {
        let side = C64::new(0.0, TAU) * form.residues[p.pole];
        let (first, last) = (p.boundary.first().unwrap().to_z(), p.boundary.last().unwrap().to_z());
        let gap = (first - last).norm();
        v.check(gap <= 1e-6 * side.norm(), || format!("{label} petal {} closure gap {gap:e}", p.pole));
        let rel = (p.boundary_displacement - side).norm() / side.norm();
        v.check(rel <= 1e-8, || format!("{label} petal {} displacement error {rel:e}", p.pole));
        for (k, &q) in form.poles.iter().enumerate() {
            v.check(set.in_petal(p.pole, &ChartPoint::finite(q)) == (k == p.pole), || format!("{label} pole {k} vs petal {}", p.pole));
        }
        let scale = form.diameter();
        for b in p.boundary.iter().step_by(5) {
            let z = b.to_z();
            if !z.is_finite() || form.distance_to_zeroes(z) < 1e-3 * scale {
                continue;
            }
            for other in &set.petals {
                if other.pole != p.pole && set.in_petal(other.pole, b) {
                    v.fail(format!("{label} boundary of petal {} enters petal {}", p.pole, other.pole));
                }
            }
        }
    }
}

fn criterion_3(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(3);
    for inst in suite {
        petal_geometry(&mut v, &inst.label(), &inst.form, &inst.petals);
    }
    // Three poles with non-colinear residues.
    let poles: Vec<C64> = (0..3)
        .map(|k| C64::from_polar(1.0 + 0.1 * k as f64, TAU * k as f64 / 3.0 + 0.05 * k as f64))
        .collect();
    let lam = [C64::new(1.0, 0.2), C64::new(-0.3, 0.9), C64::new(-0.7, -1.1)];
    let mut triangle = f64::NAN;
    match sample::from_poles_and_residues(&poles, &lam).ok_or("form rejected".to_string()).and_then(|f| {
        pipeline::run(f, &RunConfig::default()).map_err(|e| e.to_string())
    }) {
        Ok(p) => {
            petal_geometry(&mut v, "three poles", &p.analysis.form, &p.petals);
            v.check(p.petals.census.per_zero == vec![vec![0, 1, 2]], || format!("three poles: attachment {:?}", p.petals.census.per_zero));
            triangle = p.petals.petals.iter().map(|q| q.boundary_displacement).sum::<C64>().norm();
            v.check(triangle <= 1e-10, || format!("three poles: boundary images sum to {triangle:e}"));
        }
        Err(e) => v.fail(format!("three poles: {e}")),
    }
    let petals: usize = suite.iter().map(|i| i.n).sum();
    v.summary = format!("{petals} suite petals closed and disjoint; three-pole triangle closes to {triangle:.1e}");
    v
}

fn criterion_4(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(4);
    let mut ramified = 0;
    for inst in suite {
        let (n, bp, l) = (inst.n, &inst.blueprint, inst.label());
        let poly = &bp.polygon;
        v.check(poly.sides.len() == 3 * n - 6, || format!("{l} {} sides", poly.sides.len()));
        for s in &poly.sides {
            if let SideKind::Cut { edge, sign: 1 } = s.kind {
                match poly.sides.iter().find(|t| t.kind == (SideKind::Cut { edge, sign: -1 })) {
                    Some(t) => {
                        let r = (s.vector + t.vector).norm();
                        v.check(r <= 1e-10 * (1.0 + s.length), || format!("{l} cut {edge} pair mismatch {r:e}"));
                    }
                    None => v.fail(format!("{l} cut {edge} unpaired")),
                }
            }
        }
        let closure = poly.closure_gap() / poly.perimeter();
        v.check(closure <= 1e-8, || format!("{l} development gap {closure:e}"));
        let angle = (poly.angle_sum() - (3 * n - 8) as f64 * PI).abs();
        v.check(angle <= 1e-6, || format!("{l} angle sum off by {angle:e}"));
        let classes = {
            let mut c = vertex_classes(&poly.sides);
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        v.check(classes == n - 2, || format!("{l} {classes} vertex classes"));
        // Cells of the capped surface: vertex classes; petal circles and
        // cuts; the polygon and one disk per cylinder.
        let chi = classes as i64 - (n + n - 3) as i64 + (1 + n) as i64;
        v.check(chi == 2, || format!("{l} Euler characteristic {chi}"));
        let kmax = poly.vertices.iter().map(|x| x.k).max().unwrap_or(0);
        if kmax > 3 {
            ramified += 1;
            v.fail(format!("{l} ramification order {kmax} (angles {:?})", poly.vertices.iter().map(|x| x.angle).collect::<Vec<_>>()));
        }
        v.check(poly.ambient_degree_bound <= 6 * n - 11, || format!("{l} degree bound {}", poly.ambient_degree_bound));
    }
    v.summary = format!(
        "{} instances; {} with a ramification order above three; other structural failures: {}",
        suite.len(),
        ramified,
        v.failures.len() - ramified
    );
    v
}

fn criterion_5(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(5);
    let mut cases = [0usize; 3];
    let mut worst_area: f64 = 0.0;
    let mut seed = 0;
    // Widen the seed set when one case has not been seen.
    while seed < 20 || (seed < 40 && (cases[1] == 0 || cases[2] == 0)) {
        seed += 1;
        let owned;
        let q = match suite.iter().find(|i| i.n == 4 && i.seed == seed) {
            Some(i) => i,
            None => match run_instance(seed, 4, DEFAULT_RESOLUTION) {
                Ok(i) => {
                    owned = i;
                    &owned
                }
                Err(e) => {
                    v.fail(e);
                    continue;
                }
            },
        };
        let l = q.label();
        let poly = &q.blueprint.polygon;
        let mu = q.tree.edges[0].path.tau;
        let mut petal_seen = [0usize; 4];
        let mut cut_signs = Vec::new();
        for s in &poly.sides {
            match s.kind {
                SideKind::Petal { pole } => {
                    let expect = C64::new(0.0, TAU) * q.form.residues[pole];
                    v.check((s.vector - expect).norm() <= 1e-12 * expect.norm(), || format!("{l} petal side {pole} vector"));
                    petal_seen[pole] += 1;
                }
                SideKind::Cut { sign, .. } => {
                    v.check((s.vector - mu * f64::from(sign)).norm() <= 1e-12 * mu.norm(), || format!("{l} cut side is not +-mu"));
                    cut_signs.push(sign);
                }
            }
        }
        cut_signs.sort_unstable();
        v.check(petal_seen == [1; 4] && cut_signs == [-1, 1], || format!("{l} side multiset {petal_seen:?} {cut_signs:?}"));
        let area = poly.area();
        let rel = (area - q.metric_area).abs() / q.metric_area;
        worst_area = worst_area.max(rel);
        v.check(rel <= 5e-3, || format!("{l} hexagon area {area} vs quadrature {} ({rel:e})", q.metric_area));
        let case = q.blueprint.hexagon.as_ref().map_or(0, |h| usize::from(h.case));
        cases[case.min(2)] += 1;
        v.check(case != 0, || format!("{l} hexagon case undetermined (attachment {:?})", q.petals.census.per_zero));
    }
    v.check(cases[1] > 0 && cases[2] > 0, || format!("cases seen: {cases:?}"));
    v.summary = format!(
        "quartic seeds 1..={seed}: case 1 x{}, case 2 x{}, undetermined x{}; worst area error {worst_area:.1e}",
        cases[1], cases[2], cases[0]
    );
    v
}

fn criterion_6(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(6);
    let mut edges = 0;
    for inst in suite {
        let polylines = tree_polylines(&inst.tree);
        edges += polylines.len();
        let nc = verify_noncrossing(&inst.form, &inst.chart, &polylines);
        v.check(nc.ok, || format!("{} crossing {:?}", inst.label(), nc.witness));
    }
    // Negative control: reroute an edge through an interior point of another.
    match suite.iter().find(|i| i.tree.edges.len() >= 3) {
        Some(inst) => {
            let mut polylines = tree_polylines(&inst.tree);
            let first = polylines[0].2.clone();
            let mid = first[first.len() / 2].to_z();
            let (from, to) = (polylines[2].0, polylines[2].1);
            polylines[2].2 = vec![
                ChartPoint::finite(inst.form.zeroes[from]),
                ChartPoint::finite(mid + C64::new(1e-3, 1e-3)),
                ChartPoint::finite(mid - C64::new(1e-3, 1e-3)),
                ChartPoint::finite(inst.form.zeroes[to]),
            ];
            let nc = verify_noncrossing(&inst.form, &inst.chart, &polylines);
            v.check(!nc.ok, || format!("{} corrupted tree accepted", inst.label()));
        }
        None => v.fail("no instance with three tree edges"),
    }
    v.summary = format!("{edges} tree edges over {} instances; corrupted tree rejected", suite.len());
    v
}

/// Largest `(mesh - refined) / h` over all zero pairs.
fn gap_ratio(inst: &Instance) -> f64 {
    let Some(t) = &inst.table else { return 0.0 };
    let mut worst: f64 = 0.0;
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            worst = worst.max((t.mesh[a][b] - t.refined[a][b]) / inst.h);
        }
    }
    worst
}

fn criterion_7(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(7);

    // Refined distances at the two finest mesh levels.
    let mut worst_change: f64 = 0.0;
    for n in SUITE_DEGREES {
        let fine = suite.iter().find(|i| i.seed == 1 && i.n == n).expect("suite instance");
        match run_instance(1, n, COARSE_RESOLUTION) {
            Ok(coarse) => {
                let (a, b) = (coarse.table.as_ref().unwrap(), fine.table.as_ref().unwrap());
                for i in 0..a.len() {
                    for j in i + 1..a.len() {
                        let rel = (a.refined[i][j] - b.refined[i][j]).abs() / b.refined[i][j];
                        worst_change = worst_change.max(rel);
                        v.check(rel <= 1e-6, || format!("{} d({i},{j}) changes by {rel:e} between mesh levels", fine.label()));
                    }
                }
            }
            Err(e) => v.fail(e),
        }
    }

    // Mesh excess bound, calibrated on forms outside the suite.
    let mut calibration: f64 = 0.0;
    for n in SUITE_DEGREES {
        match run_instance(CALIBRATION_SEED, n, DEFAULT_RESOLUTION) {
            Ok(inst) => calibration = calibration.max(gap_ratio(&inst)),
            Err(e) => v.fail(format!("calibration {e}")),
        }
    }
    let c = 2.0 * calibration;
    let mut worst_ratio: f64 = 0.0;
    for inst in suite {
        let r = gap_ratio(inst);
        worst_ratio = worst_ratio.max(r);
        v.check(r <= c, || format!("{} mesh excess {r:.3} h exceeds C = {c:.3}", inst.label()));
    }

    // Flow tracer displacement identity on random traces.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_trace: f64 = 0.0;
    let mut traces = 0;
    while traces < 100 {
        let inst = &suite[traces % suite.len()];
        let form = &inst.form;
        let d = form.diameter();
        let center = form.poles.iter().sum::<C64>() / form.n() as f64;
        let z = center + C64::from_polar(d * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        if form.distance_to_poles(z) < 0.05 * d || form.distance_to_zeroes(z) < 0.02 * d {
            continue;
        }
        let dir = C64::from_polar(1.0, rng.gen_range(0.0..TAU));
        let t_max = rng.gen_range(0.1..3.0);
        traces += 1;
        match trace_flow(form, &FlowSpec::new(ChartPoint::finite(z), dir, t_max)) {
            Ok(tr) => {
                let tv = dir * tr.t_final();
                let err = (tr.displacement - tv).norm() / (1.0 + tv.norm());
                worst_trace = worst_trace.max(err);
                v.check(err <= 1e-8, || format!("{} trace from {z}: displacement error {err:e}", inst.label()));
            }
            Err(e) => v.fail(format!("{} trace from {z}: {e}", inst.label())),
        }
    }
    v.summary = format!(
        "refined change {worst_change:.1e}; mesh excess {worst_ratio:.2} h <= C h with C = {c:.2}; {traces} traces, worst {worst_trace:.1e}"
    );
    v
}

fn criterion_8(suite: &[Instance]) -> Verdict {
    let mut v = Verdict::new(8);
    let picks = [(2, 5), (2, 7)];
    for (seed, n) in picks {
        let first = suite.iter().find(|i| i.seed == seed && i.n == n).expect("suite instance");
        match run_instance(seed, n, DEFAULT_RESOLUTION) {
            Ok(second) => v.check(first.json == second.json, || format!("{} outputs differ", first.label())),
            Err(e) => v.fail(e),
        }
    }
    v.summary = format!("{} repeated full runs byte-identical", picks.len());
    v
}

fn main() {
    let start = Instant::now();
    let mut pass = criterion_1().report();

    let mut suite = Vec::new();
    let mut suite_errors = Vec::new();
    for n in SUITE_DEGREES {
        for seed in SUITE_SEEDS {
            match run_instance(seed, n, DEFAULT_RESOLUTION) {
                Ok(i) => suite.push(i),
                Err(e) => suite_errors.push(e),
            }
        }
    }
    eprintln!("suite of {} instances built in {:.0} s", suite.len(), start.elapsed().as_secs_f64());
    for e in &suite_errors {
        eprintln!("  pipeline failure {e}");
    }

    type Criterion = fn(&[Instance]) -> Verdict;
    let rest: [Criterion; 7] = [criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8];
    for criterion in rest {
        let mut verdict = criterion(&suite);
        for e in &suite_errors {
            verdict.fail(format!("pipeline failure {e}"));
        }
        pass &= verdict.report();
    }
    println!("acceptance: {} in {:.0} s", if pass { "all criteria pass" } else { "some criteria fail" }, start.elapsed().as_secs_f64());
    if !pass && std::env::var("TUBELOG_ACCEPTANCE_STRICT").is_ok_and(|s| s == "1") {
        std::process::exit(1);
    }
}
