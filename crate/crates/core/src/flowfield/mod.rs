//! Integral curves of `dz/dt = v / R(z)`, the curves that the primitive maps
//! to straight lines `F(z(t)) = F(z(0)) + v t`.
//!
//! The tracer is a Dormand–Prince 5(4) integrator in whichever chart the
//! point currently sits in. After every accepted step the point is projected
//! back onto the exact invariant using the closed-form primitive, so drift
//! transverse to the flow does not accumulate. Terminal events are zero hits
//! (closest approach along the dense output), pole capture, entry into a
//! caller-supplied region set, and the time budget.

mod quad;

use serde::{Deserialize, Serialize};

pub use quad::{integrate_primitive, integrate_primitive_with, POLE_CLEARANCE, QTOL};

use crate::chart::{Chart, ChartPoint};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Caller-defined regions (pole petals) whose entry ends a trace.
pub trait RegionSet: Sync {
    /// Index of the region containing `p`, if any.
    fn locate(&self, p: &ChartPoint) -> Option<usize>;
}

#[derive(Clone, Copy, Debug)]
pub struct TraceParams {
    pub rtol: f64,
    /// Per-step cap on `|dz|` as a fraction of the distance to the nearest zero.
    pub zero_step_fraction: f64,
    /// Pole capture radius relative to the diameter of the singular set.
    pub pole_capture: f64,
    /// Zero-hit radius relative to the diameter.
    pub zero_hit: f64,
    pub event_atol: f64,
    pub max_steps: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            rtol: 1e-10,
            zero_step_fraction: 1e-3,
            pole_capture: 1e-6,
            zero_hit: 1e-8,
            event_atol: 1e-12,
            max_steps: 4_000_000,
        }
    }
}

#[derive(Clone, Copy)]
pub struct FlowSpec<'a> {
    pub start: ChartPoint,
    pub direction: C64,
    pub t_max: f64,
    pub stop_at_zeroes: bool,
    pub stop_at_poles: bool,
    pub regions: Option<&'a dyn RegionSet>,
    /// Trace ends when `|z|` exceeds this radius.
    pub exit_radius: Option<f64>,
    pub params: TraceParams,
}

impl<'a> FlowSpec<'a> {
    pub fn new(start: ChartPoint, direction: C64, t_max: f64) -> Self {
        FlowSpec {
            start,
            direction,
            t_max,
            stop_at_zeroes: true,
            stop_at_poles: true,
            regions: None,
            exit_radius: None,
            params: TraceParams::default(),
        }
    }

    pub fn with_regions(mut self, regions: &'a dyn RegionSet) -> Self {
        self.regions = Some(regions);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TerminalEvent {
    HitZero { index: usize, distance: f64 },
    EnteredPole { index: usize },
    EnteredRegion { index: usize },
    DomainExit,
    Budget,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub point: ChartPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathTrace {
    pub direction: C64,
    pub samples: Vec<TraceSample>,
    pub terminal_event: TerminalEvent,
    /// Sum of exact primitive increments between consecutive samples.
    pub displacement: C64,
    /// Sum of the moduli of those increments.
    pub length: f64,
}

impl PathTrace {
    pub fn t_final(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> ChartPoint {
        self.samples.last().expect("trace has samples").point
    }

    /// Finite-plane polyline, dropping samples too close to infinity to draw.
    pub fn z_polyline(&self) -> Vec<C64> {
        self.samples
            .iter()
            .map(|s| s.point.to_z())
            .filter(|z| z.is_finite())
            .collect()
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Field<'f> {
    form: &'f RationalForm,
    v: C64,
    chart: Chart,
    /// Zeroes and poles expressed in the current chart.
    zeroes: Vec<C64>,
    poles: Vec<C64>,
}

impl<'f> Field<'f> {
    fn new(form: &'f RationalForm, v: C64, chart: Chart) -> Self {
        let map = |z: &C64| match chart {
            Chart::Finite => *z,
            Chart::Infinity => z.inv(),
        };
        Field {
            form,
            v,
            chart,
            zeroes: form.zeroes.iter().map(map).collect(),
            poles: form.poles.iter().map(map).collect(),
        }
    }

    fn r(&self, y: C64) -> C64 {
        self.form.eval_chart(&ChartPoint { chart: self.chart, coord: y })
    }

    fn f(&self, y: C64) -> C64 {
        self.v / self.r(y)
    }

    fn dist_zero(&self, y: C64) -> f64 {
        self.zeroes.iter().map(|c| (c - y).norm()).fold(f64::INFINITY, f64::min)
    }

    fn dist_pole(&self, y: C64) -> f64 {
        self.poles.iter().map(|c| (c - y).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Cubic Hermite interpolant over one step.
#[derive(Clone, Copy)]
struct Hermite {
    t0: f64,
    h: f64,
    y0: C64,
    y1: C64,
    f0: C64,
    f1: C64,
}

impl Hermite {
    fn at(&self, t: f64) -> C64 {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        self.y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + self.f0 * (self.h * (s3 - 2.0 * s2 + s))
            + self.y1 * (-2.0 * s3 + 3.0 * s2)
            + self.f1 * (self.h * (s3 - s2))
    }

    /// Golden-section minimum of `|y(t) - target|` over the step.
    fn closest(&self, target: C64, atol: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (self.t0, self.t0 + self.h);
        let d = |t: f64| (self.at(t) - target).norm();
        let mut c = b - g * (b - a);
        let mut e = a + g * (b - a);
        let (mut fc, mut fe) = (d(c), d(e));
        let mut iter = 0;
        while (b - a) > atol && iter < 200 {
            if fc < fe {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = d(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = d(e);
            }
            iter += 1;
        }
        let mut best = (0.5 * (a + b), d(0.5 * (a + b)));
        for t in [self.t0, self.t0 + self.h] {
            let dt = d(t);
            if dt < best.1 {
                best = (t, dt);
            }
        }
        best
    }

    /// Bisection for the first time the distance to `target` drops to `r`,
    /// given that it is above `r` at the start and below at the end.
    fn crossing(&self, target: C64, r: f64, atol: f64) -> f64 {
        let (mut a, mut b) = (self.t0, self.t0 + self.h);
        while b - a > atol {
            let m = 0.5 * (a + b);
            if (self.at(m) - target).norm() > r {
                a = m;
            } else {
                b = m;
            }
        }
        b
    }
}

/// Traces the integral curve described by `spec`.
pub fn trace_flow(form: &RationalForm, spec: &FlowSpec) -> Result<PathTrace> {
    let v = spec.direction;
    if v.norm() == 0.0 || !v.is_finite() {
        return Err(Error::InvalidInput("flow direction must be nonzero".into()));
    }
    if !(spec.t_max > 0.0 && spec.t_max.is_finite()) {
        return Err(Error::InvalidInput("t_max must be positive and finite".into()));
    }
    let p = spec.params;
    let diam = form.diameter();
    let switch = form.chart_switch_radius();
    let hit_r = p.zero_hit * diam;
    let cap_r = p.pole_capture * diam;

    // Each zero's distance to the nearest other singularity, and |R'(c)|.
    let zero_sep: Vec<f64> = form
        .zeroes
        .iter()
        .map(|&c| {
            form.poles
                .iter()
                .chain(form.zeroes.iter().filter(|&&d| d != c))
                .map(|&q| (q - c).norm())
                .fold(f64::INFINITY, f64::min)
                .min(diam)
        })
        .collect();
    let zero_curv: Vec<f64> = form.zeroes.iter().map(|&c| form.eval_derivative(c).norm()).collect();
    // Potential differences below this are treated as rounding noise.
    let potential_floor = 1e-13 * form.residues.iter().map(|l| l.norm()).sum::<f64>().max(1e-300);

    let mut cur = spec.start.normalized(switch);
    let mut field = Field::new(form, v, cur.chart);
    let z0 = cur.to_z();
    if cur.chart == Chart::Finite {
        if form.distance_to_poles(z0) <= cap_r {
            return Err(Error::InvalidInput("flow starts at a pole".into()));
        }
        if form.distance_to_zeroes(z0) <= hit_r {
            return Err(Error::InvalidInput("flow starts at a zero".into()));
        }
    }

    let mut samples = vec![TraceSample { t: 0.0, point: cur }];
    let mut displacement = C64::new(0.0, 0.0);
    let mut length = 0.0;
    let mut t = 0.0;
    let mut region_state = spec.regions.and_then(|r| r.locate(&cur));

    let mut y = cur.coord;
    let mut fy = field.f(y);
    let feature = |field: &Field, y: C64| field.dist_zero(y).min(field.dist_pole(y));
    let mut h = 0.01 * feature(&field, y).min(1.0) / fy.norm();
    h = h.min(spec.t_max);

    let finish = |samples: Vec<TraceSample>, ev: TerminalEvent, disp: C64, len: f64| PathTrace {
        direction: v,
        samples,
        terminal_event: ev,
        displacement: disp,
        length: len,
    };

    for _ in 0..p.max_steps {
        let remaining = spec.t_max - t;
        if remaining <= 0.0 {
            return Ok(finish(samples, TerminalEvent::Budget, displacement, length));
        }
        let dz = field.dist_zero(y);
        let dp = field.dist_pole(y);
        // Geometric caps on the step.
        let speed = fy.norm();
        let mut h_cap = remaining;
        if dz.is_finite() {
            h_cap = h_cap.min(p.zero_step_fraction * dz / speed);
        }
        if dp.is_finite() {
            h_cap = h_cap.min(0.25 * dp / speed);
        }
        h = h.min(h_cap);
        if h <= 1e-15 * t.abs().max(1e-300) || h < f64::MIN_POSITIVE {
            return Err(Error::numerical(
                "trace_flow",
                format!("step size underflow at {} (t = {t})", cur.to_z()),
            ));
        }

        let k1 = fy;
        let k2 = field.f(y + k1 * (h * A21));
        let k3 = field.f(y + (k1 * A31 + k2 * A32) * h);
        let k4 = field.f(y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
        let k5 = field.f(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
        let k6 = field.f(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
        let y5 = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
        let k7 = field.f(y5);
        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let scale = p.rtol * feature(&field, y).min(y.norm().max(1.0)).max(1e-12 * diam);
        let err = err_vec.norm() / scale;
        if !err.is_finite() || !y5.is_finite() {
            h *= 0.25;
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        // Accepted: project onto the exact level F = F0 + v t.
        let t_new = t + h;
        let mut y_new = y5;
        let prev = ChartPoint { chart: field.chart, coord: y };
        let mut inc = form.primitive_increment(&prev, &ChartPoint { chart: field.chart, coord: y_new });
        for _ in 0..2 {
            let resid = inc - v * h;
            let corr = resid / field.r(y_new);
            if !(corr.norm() < 0.1 * field.dist_zero(y_new).min(field.dist_pole(y_new))) || corr.norm() == 0.0 {
                break;
            }
            y_new -= corr;
            inc = form.primitive_increment(&prev, &ChartPoint { chart: field.chart, coord: y_new });
        }
        let f_new = field.f(y_new);
        let herm = Hermite { t0: t, h, y0: y, y1: y_new, f0: fy, f1: f_new };

        // Events inside the step, earliest first.
        let mut event: Option<(f64, TerminalEvent)> = None;
        if spec.stop_at_zeroes {
            for (k, &c) in field.zeroes.iter().enumerate() {
                let d0 = (y - c).norm();
                let d1 = (y_new - c).norm();
                let near = d0.min(d1);
                let to_z = |d: f64| match field.chart {
                    Chart::Finite => d,
                    Chart::Infinity => d * form.zeroes[k].norm_sqr(),
                };
                if to_z(near) > 100.0 * hit_r + 2.0 * (y_new - y).norm() * to_z(1.0) {
                    continue;
                }
                let (tm, dm) = herm.closest(c, p.event_atol);
                let dm_z = to_z(dm);
                if dm_z <= hit_r && event.is_none_or(|(te, _)| tm < te) {
                    event = Some((tm, TerminalEvent::HitZero { index: k, distance: dm_z }));
                }
            }
        }
        if spec.stop_at_poles {
            for (k, &q) in field.poles.iter().enumerate() {
                let to_z = |d: f64| match field.chart {
                    Chart::Finite => d,
                    Chart::Infinity => d * form.poles[k].norm_sqr(),
                };
                let d1 = to_z((y_new - q).norm());
                let d0 = to_z((y - q).norm());
                if d1 <= cap_r && d1 < d0 {
                    let rr = match field.chart {
                        Chart::Finite => cap_r,
                        Chart::Infinity => cap_r / form.poles[k].norm_sqr(),
                    };
                    let tc = if d0 > cap_r { herm.crossing(q, rr, p.event_atol) } else { t_new };
                    if event.is_none_or(|(te, _)| tc < te) {
                        event = Some((tc, TerminalEvent::EnteredPole { index: k }));
                    }
                }
            }
        }

        let end_point = |tt: f64| -> ChartPoint {
            let yy = if tt >= t_new { y_new } else { herm.at(tt) };
            ChartPoint { chart: field.chart, coord: yy }
        };

        // Local model at nearby zeroes: the level line through the zero is
        // reached at t + s, missing it by the potential offset m.
        if event.is_none() && spec.stop_at_zeroes {
            let here = ChartPoint { chart: field.chart, coord: y_new };
            let zh = here.to_z();
            for (k, &ck) in form.zeroes.iter().enumerate() {
                if !((ck - zh).norm() < 0.05 * zero_sep[k]) {
                    continue;
                }
                let gap = form.primitive_increment(&here, &ChartPoint::finite(ck));
                let along = (gap * v.conj()).re / v.norm_sqr();
                let miss = ((gap * v.conj()).im / v.norm()).abs();
                if along < 0.0 || t_new + along > spec.t_max {
                    continue;
                }
                let m = (miss - potential_floor).max(0.0);
                let predicted = (2.0 * m / zero_curv[k]).sqrt();
                if predicted <= hit_r {
                    let te = t_new + along;
                    let pt = ChartPoint::finite(ck);
                    displacement += inc;
                    length += inc.norm();
                    samples.push(TraceSample { t: t_new, point: here });
                    let inc_e = form.primitive_increment(&here, &pt);
                    displacement += inc_e;
                    length += inc_e.norm();
                    if te > t_new {
                        samples.push(TraceSample { t: te, point: pt });
                    } else if let Some(last) = samples.last_mut() {
                        last.point = pt;
                    }
                    return Ok(finish(
                        samples,
                        TerminalEvent::HitZero { index: k, distance: predicted },
                        displacement,
                        length,
                    ));
                }
            }
        }

        if let Some((te, ev)) = event {
            let pt = end_point(te);
            let inc_e = form.primitive_increment(&prev, &pt);
            displacement += inc_e;
            length += inc_e.norm();
            samples.push(TraceSample { t: te, point: pt });
            return Ok(finish(samples, ev, displacement, length));
        }

        let new_point = ChartPoint { chart: field.chart, coord: y_new };
        if let Some(regions) = spec.regions {
            let now = regions.locate(&new_point);
            if let Some(k) = now {
                if region_state != Some(k) {
                    displacement += inc;
                    length += inc.norm();
                    samples.push(TraceSample { t: t_new, point: new_point });
                    return Ok(finish(samples, TerminalEvent::EnteredRegion { index: k }, displacement, length));
                }
            }
            region_state = now;
        }

        displacement += inc;
        length += inc.norm();
        t = t_new;
        samples.push(TraceSample { t, point: new_point });

        if let Some(rmax) = spec.exit_radius {
            if new_point.to_z().norm() > rmax {
                return Ok(finish(samples, TerminalEvent::DomainExit, displacement, length));
            }
        }

        // Chart switch with hysteresis.
        let normalized = new_point.normalized(switch);
        if normalized.chart != field.chart {
            field = Field::new(form, v, normalized.chart);
        }
        cur = normalized;
        y = cur.coord;
        fy = field.f(y);
        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= grow;
    }
    Err(Error::numerical(
        "trace_flow",
        format!("step budget exhausted at {} (t = {t})", cur.to_z()),
    ))
}
