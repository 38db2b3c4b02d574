//! Power series of the petal uniformizer `z(xi) = z_j + sum c_k xi^k`, the
//! solution of `xi dz/dxi = lambda_j / R(z)` normalized by `c_1 = 1`.

use serde::{Deserialize, Serialize};

use crate::ratform::RationalForm;
use crate::{Error, Result, C64};

/// Coefficients stored for the rescaled variable `eta = xi / scale`, so that
/// small radii do not overflow: `c_k = scaled[k-1] / scale^k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PetalSeries {
    pub pole: usize,
    pub scale: f64,
    pub scaled: Vec<C64>,
}

impl PetalSeries {
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// `c_k` for `k >= 1`.
    pub fn coefficient(&self, k: usize) -> C64 {
        self.scaled[k - 1] / self.scale.powi(k as i32)
    }

    /// `log |c_k|`, computed without forming `c_k`.
    pub fn log_abs_coefficient(&self, k: usize) -> f64 {
        self.scaled[k - 1].norm().ln() - k as f64 * self.scale.ln()
    }

    /// `(u, du/dxi)` of the truncated series at `xi`.
    pub fn eval(&self, xi: C64) -> (C64, C64) {
        let eta = xi / self.scale;
        let mut u = C64::new(0.0, 0.0);
        let mut du = C64::new(0.0, 0.0);
        for (i, &d) in self.scaled.iter().enumerate().rev() {
            let k = (i + 1) as f64;
            u = (u + d) * eta;
            du = du * eta + d * k;
        }
        (u, du / self.scale)
    }
}

/// Computes `k_max` coefficients by the order-by-order recurrence
/// `(k-1) P(z_j) c_k = -[xi^k](xi u' P(z_j+u) - lambda Q(z_j+u))|_{c_k=0}`.
pub fn petal_series(form: &RationalForm, j: usize, k_max: usize) -> Result<PetalSeries> {
    if form.pole_multiplicity[j] != 1 {
        return Err(Error::PoleNotSimple(format!("{}", form.poles[j])));
    }
    let zj = form.poles[j];
    let lam = form.residues[j];
    let p = form.num.taylor_shift(zj);
    let q = form.den.taylor_shift(zj);
    let pc = p.coeffs();
    let qc = q.coeffs();
    let p0 = pc[0];
    let deg = pc.len().max(qc.len());

    let scale = {
        let d = form
            .poles
            .iter()
            .chain(form.zeroes.iter())
            .filter(|&&w| w != zj)
            .map(|&w| (w - zj).norm())
            .fold(f64::INFINITY, f64::min);
        if d.is_finite() { d } else { 1.0 }
    };

    // pw[m][k] = [eta^k] u^m, built up as coefficients become known.
    let zero = C64::new(0.0, 0.0);
    let mut pw = vec![vec![zero; k_max + 1]; deg + 1];
    pw[0][0] = C64::new(1.0, 0.0);
    let mut d = vec![zero; k_max + 1];
    d[1] = C64::new(scale, 0.0);
    pw[1][1] = d[1];

    for k in 2..=k_max {
        for m in 2..=deg.min(k) {
            let mut acc = zero;
            for i in 1..=(k - m + 1) {
                acc += d[i] * pw[m - 1][k - i];
            }
            pw[m][k] = acc;
        }
        let mut lhs = zero;
        for (m, &pm) in pc.iter().enumerate().skip(1) {
            if m >= k {
                break;
            }
            let mut acc = zero;
            for i in 1..=(k - m) {
                acc += d[i] * (i as f64) * pw[m][k - i];
            }
            lhs += pm * acc;
        }
        let mut rhs = zero;
        for (m, &qm) in qc.iter().enumerate().skip(2) {
            if m > k {
                break;
            }
            rhs += qm * pw[m][k];
        }
        rhs *= lam;
        let ck = -(lhs - rhs) / (p0 * (k as f64 - 1.0));
        if !ck.is_finite() {
            return Err(Error::numerical(
                "petal_series",
                format!("recurrence overflow at order {k}; largest stable order {}", k - 1),
            ));
        }
        d[k] = ck;
        pw[1][k] = ck;
    }
    Ok(PetalSeries { pole: j, scale, scaled: d[1..].to_vec() })
}

/// Radius of convergence from the coefficient decay.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesRadius {
    /// `f64::INFINITY` when all coefficients past the first vanish.
    pub radius: f64,
    /// RMS residual of the regression in log space.
    pub fit_residual: f64,
}

/// Least-squares fit of `log|c_k| + 1.5 log k` against `k` over the upper
/// half of the computed orders; the `k^{-3/2}` factor is the signature of a
/// square-root branch point on the circle of convergence.
pub fn series_radius(series: &PetalSeries) -> SeriesRadius {
    let k_max = series.len();
    let all_zero = (2..=k_max).all(|k| series.scaled[k - 1].norm() <= 1e-13 * series.scale);
    if all_zero {
        return SeriesRadius { radius: f64::INFINITY, fit_residual: 0.0 };
    }
    let pts: Vec<(f64, f64)> = ((k_max / 2).max(2)..=k_max)
        .filter(|&k| series.scaled[k - 1].norm() > 0.0)
        .map(|k| (k as f64, series.log_abs_coefficient(k) + 1.5 * (k as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return SeriesRadius { radius: f64::INFINITY, fit_residual: 0.0 };
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    SeriesRadius { radius: (-slope).exp(), fit_residual: res }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratform::{parse_form, sample};

    #[test]
    fn reciprocal_is_identity() {
        let form = parse_form("1/z").unwrap();
        let s = petal_series(&form, 0, 16).unwrap();
        assert!((s.coefficient(1) - C64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 2..=16 {
            assert!(s.coefficient(k).norm() < 1e-15);
        }
        assert!(series_radius(&s).radius.is_infinite());
    }

    #[test]
    fn simple_pole_with_constant_residue() {
        let form = parse_form("(2+3i)/(z - 1 + 2i)").unwrap();
        let s = petal_series(&form, 0, 16).unwrap();
        assert!((s.coefficient(1) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((2..=16).all(|k| s.coefficient(k).norm() < 1e-14));
        assert!(series_radius(&s).radius.is_infinite());
    }

    #[test]
    fn ode_residual_on_half_radius_circle() {
        let form = sample::seeded(31, 4);
        for j in 0..4 {
            let s = petal_series(&form, j, 64).unwrap();
            let r = series_radius(&s).radius;
            let lam = form.residues[j];
            for k in 0..12 {
                let xi = C64::from_polar(0.5 * r, 0.3 + k as f64 * 0.5);
                let (u, du) = s.eval(xi);
                let z = form.poles[j] + u;
                let lhs = xi * du * form.num.eval(z);
                let rhs = lam * form.den.eval(z);
                let scale = rhs.norm().max((xi * du * form.num.eval(z)).norm());
                assert!((lhs - rhs).norm() <= 1e-9 * scale, "pole {j}: {:e}", (lhs - rhs).norm() / scale);
            }
        }
    }
}
