//! All-roots-at-once polynomial root finding (Aberth–Ehrlich iteration).

use serde::{Deserialize, Serialize};

use super::Polynomial;
use crate::{Error, Result, C64};

const MAX_ITER: usize = 500;

/// A root with its multiplicity after clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: C64,
    pub multiplicity: usize,
}

/// Residual acceptance threshold at `z`.
fn residual_bound(p: &Polynomial, z: C64) -> f64 {
    1e-12 * p.max_abs_coeff() * z.norm().max(1.0).powi(p.degree() as i32)
}

/// Finds all `deg p` roots, grouping near-coincident ones.
pub fn find_roots(p: &Polynomial) -> Result<Vec<Root>> {
    let raw = aberth(p)?;
    Ok(cluster(&raw))
}

/// Raw simultaneous iteration; returns exactly `deg p` approximations.
pub fn aberth(p: &Polynomial) -> Result<Vec<C64>> {
    let n = p.degree();
    if p.is_zero() || n == 0 {
        return Err(Error::InvalidInput(
            "root finding needs a polynomial of degree >= 1".into(),
        ));
    }
    let lead = p.leading();
    let monic = p.scale(lead.inv());
    if n == 1 {
        return Ok(vec![-monic.coeffs()[0]]);
    }

    // Fujiwara-type radius for the starting circle.
    let c = monic.coeffs();
    let radius = (0..n)
        .map(|k| c[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut moved = false;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let (v, dv) = monic.eval_with_derivative(z[k]);
            if v.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = v / dv;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let denom = C64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.is_finite() && denom.norm() > 0.0 && ratio.is_finite() {
                ratio / denom
            } else {
                C64::new(1e-8 * radius, 1e-8 * radius)
            };
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(1e-300) {
                converged[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    // Newton polish against the original coefficients.
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = p.eval_with_derivative(*r);
            let cand = *r - v / dv;
            if cand.is_finite() && p.eval(cand).norm() < v.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }

    for &r in &z {
        let res = p.eval(r).norm();
        if !res.is_finite() || res > residual_bound(p, r) {
            return Err(Error::numerical(
                "find_roots",
                format!(
                    "no convergence: |p({r})| = {res:e} exceeds {:e}",
                    residual_bound(p, r)
                ),
            ));
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

/// Groups approximations closer than a scale-relative tolerance. A root of
/// multiplicity m is split by roughly eps^(1/m) under floating point, so the
/// tolerance is loose relative to simple-root accuracy.
pub fn cluster(raw: &[C64]) -> Vec<Root> {
    let scale = raw.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-6 * scale;
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &r in raw {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|&q| (q - r).norm() < tol))
        {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| Root {
            z: g.iter().sum::<C64>() / g.len() as f64,
            multiplicity: g.len(),
        })
        .collect()
}
