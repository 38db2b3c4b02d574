//! Pole petals: the maximal disks `|xi| < r` of the uniformizing coordinate
//! `xi = exp(F / lambda_j)` around each pole, their boundaries, which zeroes
//! sit on those boundaries, and the resulting census of zeroes by number of
//! attached petals.

mod region;
mod series;

use std::f64::consts::{FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use region::PolygonIndex;
pub use series::{petal_series, series_radius, PetalSeries, SeriesRadius};

use crate::chart::{ChartPoint, MobiusChart};
use crate::flowfield::{trace_flow, FlowSpec, RegionSet, TerminalEvent};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Number of series coefficients computed per petal.
pub const SERIES_ORDER: usize = 64;
/// Probe launch offset relative to the distance from the zero to the nearest
/// other singular point.
pub const PROBE_OFFSET: f64 = 1e-4;
/// Relative tolerance for "same minimal log-radius" when deciding attachment.
pub const ATTACH_TOL: f64 = 1e-6;
/// Potential-time budget for probes before escalation.
const PROBE_BUDGET: f64 = 200.0;
const PROBE_BUDGET_CAP: f64 = 2000.0;

/// Result of one backward radial probe from a zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Probe {
    pub zero: usize,
    pub pole: usize,
    /// Launch direction (unit complex number) in the z-plane at the zero.
    pub direction: C64,
    pub captured: bool,
    /// `log |xi_j(c)|` along this probe's branch, when captured.
    pub log_radius: Option<f64>,
    pub event: TerminalEvent,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PetalCensus {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    /// Zeroes with three or more petals; only possible for n = 3.
    pub n_more: usize,
    /// Zero index -> attached pole indices (sorted).
    pub per_zero: Vec<Vec<usize>>,
}

impl PetalCensus {
    pub fn identities_hold(&self, n: usize) -> bool {
        self.n0 + self.n1 + self.n2 + self.n_more == n - 2 && self.n1 + 2 * self.n2 == n && self.n_more == 0
    }

    /// Whether the triple belongs to the family `(j, n-4-2j, j+2)`.
    pub fn in_family(&self, n: usize) -> bool {
        let j = self.n0;
        n >= 4 && self.n_more == 0 && self.n2 == j + 2 && n >= 4 + 2 * j && self.n1 == n - 4 - 2 * j
    }
}

/// A corner of a petal boundary at an attached zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Corner {
    pub zero: usize,
    /// Direction of the radial separatrix entering the petal.
    pub probe_direction: C64,
    /// Unit tangent of the boundary arc leaving the zero (counter-clockwise
    /// around the pole).
    pub arm_out: C64,
    /// Unit tangent of the boundary arc arriving at the zero, pointing away
    /// from the zero.
    pub arm_in: C64,
    /// Index of the zero in the boundary polyline.
    pub vertex: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Petal {
    pub pole: usize,
    pub residue: C64,
    pub series: PetalSeries,
    /// Radius from the minimal separatrix potential (`INFINITY` if none).
    pub radius: f64,
    pub radius_series: SeriesRadius,
    /// Attached zeroes in boundary order, starting from the first corner.
    pub attached_zeroes: Vec<usize>,
    pub corners: Vec<Corner>,
    /// Closed loop: first and last points are the first corner.
    pub boundary: Vec<ChartPoint>,
    pub boundary_displacement: C64,
    pub warnings: Vec<String>,
}

impl Petal {
    pub fn radius_disagreement(&self) -> f64 {
        if self.radius.is_infinite() && self.radius_series.radius.is_infinite() {
            return 0.0;
        }
        (self.radius_series.radius - self.radius).abs() / self.radius
    }
}

/// All petals of a form plus the containment index used by other stages.
#[derive(Clone, Debug)]
pub struct PetalSet {
    pub petals: Vec<Petal>,
    pub census: PetalCensus,
    pub probes: Vec<Probe>,
    /// Per petal: boundary in the chart `w = 1/(z - z_j)`, where the petal
    /// is the exterior of the loop.
    index: Vec<Option<(MobiusChart, PolygonIndex)>>,
}

impl RegionSet for PetalSet {
    fn locate(&self, p: &ChartPoint) -> Option<usize> {
        self.index.iter().enumerate().find_map(|(j, ix)| {
            let (chart, poly) = ix.as_ref()?;
            let w = chart.to_w(p);
            (!w.is_finite() || !poly.contains(w)).then_some(j)
        })
    }
}

impl PetalSet {
    /// Whether `p` lies in petal `j`.
    pub fn in_petal(&self, j: usize, p: &ChartPoint) -> bool {
        match &self.index[j] {
            Some((chart, poly)) => {
                let w = chart.to_w(p);
                !w.is_finite() || !poly.contains(w)
            }
            None => true,
        }
    }
}

/// `log |xi_j(z)|` with `xi_j` normalized so that `xi_j ~ z - z_j`, using
/// principal logarithms; exact on the branch containing the pole when `z` is
/// close to `z_j`.
fn log_xi_near_pole(form: &RationalForm, j: usize, z: C64) -> f64 {
    let zj = form.poles[j];
    let lam = form.residues[j];
    let mut acc = (z - zj).ln();
    for (k, (&zk, &lk)) in form.poles.iter().zip(&form.residues).enumerate() {
        if k != j {
            acc += (lk / lam) * ((z - zk) / (zj - zk)).ln();
        }
    }
    acc.re
}

pub(crate) fn zero_separation(form: &RationalForm, i: usize) -> f64 {
    let c = form.zeroes[i];
    form.poles
        .iter()
        .chain(form.zeroes.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, z)| z))
        .map(|&q| (q - c).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Starting point near zero `c` in direction `dir`, projected onto the level
/// set where `F - F(c)` is a real multiple of `axis`.
pub(crate) fn launch_point(form: &RationalForm, c: C64, dir: C64, eps: f64, axis: C64) -> C64 {
    let mut z = c + dir * eps;
    let cp = ChartPoint::finite(c);
    let unit = axis / axis.norm();
    for _ in 0..4 {
        let d = form.primitive_increment(&cp, &ChartPoint::finite(z));
        let on_line = unit * (d * unit.conj()).re;
        let corr = (d - on_line) / form.eval(z);
        if !(corr.norm() < 0.1 * eps) {
            break;
        }
        z -= corr;
    }
    z
}

fn run_probe(form: &RationalForm, i: usize, j: usize, dir: C64) -> Result<Probe> {
    let c = form.zeroes[i];
    let lam = form.residues[j];
    let eps = PROBE_OFFSET * zero_separation(form, i).min(form.diameter());
    let start = launch_point(form, c, dir, eps, -lam);
    let mut budget = PROBE_BUDGET;
    loop {
        let tr = trace_flow(form, &FlowSpec::new(ChartPoint::finite(start), -lam, budget))?;
        match tr.terminal_event {
            TerminalEvent::Budget if budget < PROBE_BUDGET_CAP => {
                budget *= 4.0;
                continue;
            }
            TerminalEvent::Budget => {
                return Err(Error::numerical(
                    "find_attachments",
                    format!("probe from zero {i} toward pole {j} undecided after t = {budget}"),
                ));
            }
            ev => {
                let captured = ev == TerminalEvent::EnteredPole { index: j };
                let log_radius = captured.then(|| {
                    let ze = tr.end().to_z();
                    let launch = form.primitive_increment(&ChartPoint::finite(c), &ChartPoint::finite(start));
                    // |xi| shrinks by e^{-t}; the launch offset adds Re(dF/lambda).
                    log_xi_near_pole(form, j, ze) + tr.t_final() - (launch / lam).re
                });
                return Ok(Probe { zero: i, pole: j, direction: dir, captured, log_radius, event: ev });
            }
        }
    }
}

/// Tangent directions at zero `i` of the two radial separatrices for pole
/// `j`: `F - F(c)` negative real multiple of `lambda_j`, i.e. `w^2` parallel
/// to `-lambda_j / R'(c)`.
fn probe_directions(form: &RationalForm, i: usize, j: usize) -> [C64; 2] {
    let c = form.zeroes[i];
    let w = (-form.residues[j] / form.eval_derivative(c)).sqrt();
    let u = w / w.norm();
    [u, -u]
}

/// Runs all probes and assembles the census.
pub fn find_attachments(form: &RationalForm) -> Result<(PetalCensus, Vec<Probe>)> {
    let n = form.poles.len();
    let m = form.zeroes.len();
    let jobs: Vec<(usize, usize, C64)> = (0..m)
        .flat_map(|i| (0..n).flat_map(move |j| probe_directions(form, i, j).map(|d| (i, j, d))))
        .collect();
    let probes: Vec<Probe> = jobs
        .par_iter()
        .map(|&(i, j, d)| run_probe(form, i, j, d))
        .collect::<Result<_>>()?;
    let census = census_from_probes(form, &probes);
    Ok((census, probes))
}

/// Minimal captured log-radius per pole.
fn min_log_radius(n: usize, probes: &[Probe]) -> Vec<Option<f64>> {
    let mut best = vec![None::<f64>; n];
    for p in probes {
        if let Some(rho) = p.log_radius {
            best[p.pole] = Some(best[p.pole].map_or(rho, |b: f64| b.min(rho)));
        }
    }
    best
}

fn is_attaching(p: &Probe, best: &[Option<f64>]) -> bool {
    match (p.log_radius, best[p.pole]) {
        (Some(rho), Some(b)) => rho - b <= ATTACH_TOL * b.abs().max(1.0),
        _ => false,
    }
}

fn census_from_probes(form: &RationalForm, probes: &[Probe]) -> PetalCensus {
    let n = form.poles.len();
    let best = min_log_radius(n, probes);
    let mut per_zero = vec![Vec::new(); form.zeroes.len()];
    for p in probes {
        if is_attaching(p, &best) && !per_zero[p.zero].contains(&p.pole) {
            per_zero[p.zero].push(p.pole);
        }
    }
    for list in per_zero.iter_mut() {
        list.sort_unstable();
    }
    let count = |k: usize| per_zero.iter().filter(|l| l.len() == k).count();
    PetalCensus {
        n0: count(0),
        n1: count(1),
        n2: count(2),
        n_more: per_zero.iter().filter(|l| l.len() > 2).count(),
        per_zero,
    }
}

/// Traces the boundary of petal `j` counter-clockwise around the pole along
/// the critical level of `Re(F / lambda_j)`, passing through every attached
/// zero.
pub fn trace_petal_boundary(form: &RationalForm, j: usize, probes: &[Probe]) -> Result<(Vec<ChartPoint>, Vec<Corner>, C64)> {
    let n = form.poles.len();
    let best = min_log_radius(n, probes);
    let lam = form.residues[j];
    let v = C64::new(0.0, 1.0) * lam;
    let attaching: Vec<&Probe> = probes.iter().filter(|p| p.pole == j && is_attaching(p, &best)).collect();
    let Some(first) = attaching.first() else {
        return Err(Error::invariant("trace_petal_boundary", format!("petal {j} has no attached zero")));
    };
    let probe_dir = |i: usize| attaching.iter().find(|p| p.zero == i).map(|p| p.direction);
    // Arms at a corner: the level Re G = 0 leaves the zero at +-pi/4 from
    // the separatrix into the petal; Im G grows along the one at -pi/4.
    let arm_out = |d: C64| d * C64::from_polar(1.0, -FRAC_PI_4);
    let arm_in = |d: C64| d * C64::from_polar(1.0, FRAC_PI_4);

    let mut points: Vec<ChartPoint> = Vec::new();
    let mut corners: Vec<Corner> = Vec::new();
    let mut zero = first.zero;
    let mut elapsed = 0.0;
    let t_total = TAU * lam.norm() / v.norm();
    loop {
        let c = form.zeroes[zero];
        let d = probe_dir(zero).ok_or_else(|| {
            Error::invariant("trace_petal_boundary", format!("boundary of petal {j} reached unattached zero {zero}"))
        })?;
        if corners.iter().any(|k| k.zero == zero) {
            return Err(Error::numerical("trace_petal_boundary", format!("petal {j} boundary revisits zero {zero}")));
        }
        corners.push(Corner { zero, probe_direction: d, arm_out: arm_out(d), arm_in: arm_in(d), vertex: points.len() });
        points.push(ChartPoint::finite(c));
        let eps = PROBE_OFFSET * zero_separation(form, zero).min(form.diameter());
        let start = launch_point(form, c, arm_out(d), eps, v);
        let lead = form.primitive_increment(&ChartPoint::finite(c), &ChartPoint::finite(start));
        let t_lead = (lead * v.conj()).re / v.norm_sqr();
        let budget = 1.1 * t_total - elapsed;
        let tr = trace_flow(form, &FlowSpec::new(ChartPoint::finite(start), v, budget))?;
        points.extend(tr.samples.iter().map(|s| s.point));
        let next = match tr.terminal_event {
            TerminalEvent::HitZero { index, .. } => index,
            ev => {
                return Err(Error::numerical(
                    "trace_petal_boundary",
                    format!("boundary of petal {j} did not close (event {ev:?})"),
                ))
            }
        };
        // The last sample is the zero itself.
        points.pop();
        elapsed += t_lead + tr.t_final();
        if next == first.zero {
            break;
        }
        zero = next;
    }
    points.push(ChartPoint::finite(form.zeroes[first.zero]));

    let mut disp = C64::new(0.0, 0.0);
    for w in points.windows(2) {
        disp += form.primitive_increment(&w[0], &w[1]);
    }
    if (elapsed - t_total).abs() > 1e-6 * t_total {
        return Err(Error::numerical(
            "trace_petal_boundary",
            format!("petal {j} boundary closed after potential time {elapsed}, expected {t_total}"),
        ));
    }
    Ok((points, corners, disp))
}

/// Full petal computation for a generic form with at least one zero.
pub fn compute_petals(form: &RationalForm) -> Result<PetalSet> {
    let n = form.poles.len();
    let (census, probes) = find_attachments(form)?;
    let best = min_log_radius(n, &probes);
    let petals: Vec<Petal> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<Petal> {
            let series = petal_series(form, j, SERIES_ORDER)?;
            let radius_series = series_radius(&series);
            let radius = best[j].map_or(f64::INFINITY, f64::exp);
            let mut warnings = Vec::new();
            let (boundary, corners, disp) = if radius.is_finite() {
                trace_petal_boundary(form, j, &probes)?
            } else {
                (Vec::new(), Vec::new(), C64::new(0.0, 0.0))
            };
            let petal = Petal {
                pole: j,
                residue: form.residues[j],
                series,
                radius,
                radius_series,
                attached_zeroes: corners.iter().map(|c| c.zero).collect(),
                corners,
                boundary,
                boundary_displacement: disp,
                warnings: Vec::new(),
            };
            if petal.radius_disagreement() > 0.2 {
                warnings.push(format!(
                    "series radius {:.6e} and separatrix radius {:.6e} disagree by more than 20%",
                    petal.radius_series.radius, petal.radius
                ));
            }
            Ok(Petal { warnings, ..petal })
        })
        .collect::<Result<_>>()?;
    Ok(PetalSet::from_parts(form, petals, census, probes))
}

impl PetalSet {
    /// Reassembles a petal set from stored petals, rebuilding the
    /// containment index.
    pub fn from_parts(form: &RationalForm, petals: Vec<Petal>, census: PetalCensus, probes: Vec<Probe>) -> Self {
        let index = petals
            .iter()
            .map(|p| {
                (!p.boundary.is_empty()).then(|| {
                    let chart = MobiusChart::new(form.poles[p.pole]);
                    let w: Vec<C64> = p.boundary[..p.boundary.len() - 1].iter().map(|q| chart.to_w(q)).collect();
                    (chart, PolygonIndex::new(w))
                })
            })
            .collect();
        PetalSet { petals, census, probes, index }
    }
}

/// Petal-level check used by tests and the verifier: the boundary encloses
/// the pole (winding number one around it in the z-plane, computed from the
/// displacement) and closes.
pub fn boundary_winding(form: &RationalForm, petal: &Petal) -> f64 {
    let lam = form.residues[petal.pole];
    (petal.boundary_displacement / (C64::new(0.0, TAU) * lam)).re
}
