//! Adaptive Gauss–Kronrod (7/15) quadrature of `R dz` and `|R| |dz|` along
//! straight chart segments.

use crate::chart::{Chart, ChartPoint};
use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 400;

/// Default minimum distance between a quadrature segment and a pole,
/// relative to the diameter of the singular set.
pub const POLE_CLEARANCE: f64 = 1e-9;

/// Default absolute quadrature tolerance relative to the segment's integral
/// scale.
pub const QTOL: f64 = 1e-13;

struct Segment<'a> {
    form: &'a RationalForm,
    chart: Chart,
    a: C64,
    b: C64,
}

impl Segment<'_> {
    fn integrand(&self, s: f64) -> (C64, f64) {
        let y = self.a + (self.b - self.a) * s;
        let r = self.form.eval_chart(&ChartPoint { chart: self.chart, coord: y });
        let dy = self.b - self.a;
        (r * dy, r.norm() * dy.norm())
    }

    /// GK15 on `[s0, s1]`: (displacement, length, error estimate).
    fn gk15(&self, s0: f64, s1: f64) -> (C64, f64, f64) {
        let c = 0.5 * (s0 + s1);
        let h = 0.5 * (s1 - s0);
        let (fc, gc) = self.integrand(c);
        let mut k_d = fc * WGK[7];
        let mut k_l = gc * WGK[7];
        let mut g_d = fc * WG[3];
        let mut g_l = gc * WG[3];
        for i in 0..7 {
            let (f1, g1) = self.integrand(c - h * XGK[i]);
            let (f2, g2) = self.integrand(c + h * XGK[i]);
            k_d += (f1 + f2) * WGK[i];
            k_l += (g1 + g2) * WGK[i];
            if i % 2 == 1 {
                g_d += (f1 + f2) * WG[i / 2];
                g_l += (g1 + g2) * WG[i / 2];
            }
        }
        let err = ((k_d - g_d) * h).norm() + ((k_l - g_l) * h).abs();
        (k_d * h, k_l * h, err)
    }

    /// Global adaptive refinement: always split the interval with the
    /// largest error estimate, up to a fixed number of intervals.
    fn adaptive(&self, tol: f64) -> Result<(C64, f64)> {
        let (d, l, e) = self.gk15(0.0, 1.0);
        let mut parts = vec![(0.0, 1.0, d, l, e)];
        loop {
            let (sum_d, sum_l, sum_e) = parts
                .iter()
                .fold((C64::new(0.0, 0.0), 0.0, 0.0), |acc, p| (acc.0 + p.2, acc.1 + p.3, acc.2 + p.4));
            if !sum_d.is_finite() || !sum_l.is_finite() {
                return Err(Error::numerical("integrate_primitive", "non-finite integrand"));
            }
            if sum_e <= tol || parts.len() >= MAX_INTERVALS {
                return Ok((sum_d, sum_l));
            }
            let (k, _) = parts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .4.total_cmp(&b.1 .4))
                .expect("nonempty");
            let (s0, s1, ..) = parts.swap_remove(k);
            let m = 0.5 * (s0 + s1);
            let (d1, l1, e1) = self.gk15(s0, m);
            let (d2, l2, e2) = self.gk15(m, s1);
            parts.push((s0, m, d1, l1, e1));
            parts.push((m, s1, d2, l2, e2));
        }
    }
}

fn segment_distance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// `(int R dz, int |R| |dz|)` along a polyline of chart points, each segment
/// straight in a chart that contains both of its endpoints.
pub fn integrate_primitive(form: &RationalForm, path: &[ChartPoint]) -> Result<(C64, f64)> {
    integrate_primitive_with(form, path, QTOL, POLE_CLEARANCE)
}

pub fn integrate_primitive_with(
    form: &RationalForm,
    path: &[ChartPoint],
    qtol: f64,
    pole_clearance: f64,
) -> Result<(C64, f64)> {
    let clearance = pole_clearance * form.diameter();
    let mut disp = C64::new(0.0, 0.0);
    let mut len = 0.0;
    for w in path.windows(2) {
        let chart = ChartPoint::common_chart(&w[0], &w[1]);
        let a = w[0].coord_in(chart);
        let b = w[1].coord_in(chart);
        if a == b {
            continue;
        }
        for &p in &form.poles {
            let pc = match chart {
                Chart::Finite => p,
                Chart::Infinity => p.inv(),
            };
            let dist = segment_distance(a, b, pc);
            // Measure the clearance in the finite chart.
            let dist_z = match chart {
                Chart::Finite => dist,
                Chart::Infinity => dist * p.norm_sqr(),
            };
            if dist_z < clearance {
                return Err(Error::InvalidInput(format!(
                    "path too close to pole at {p} (distance {dist_z:e})"
                )));
            }
        }
        let seg = Segment { form, chart, a, b };
        let (d0, l0, _) = seg.gk15(0.0, 1.0);
        let scale = d0.norm().max(l0).max(f64::MIN_POSITIVE);
        let (d, l) = seg.adaptive(qtol * scale)?;
        disp += d;
        len += l;
    }
    Ok((disp, len))
}
