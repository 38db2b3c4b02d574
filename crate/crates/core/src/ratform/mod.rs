//! The rational 1-form `R(z) dz = P(z)/Q(z) dz`: roots, residues, chart
//! evaluation, the closed-form primitive, and the genericity conditions.

mod generic;
mod parse;
mod poly;
mod roots;
pub mod sample;

use serde::{Deserialize, Serialize};

pub use generic::{
    check_generic, CondA, CondB, CondC, GenericityReport, MultipleRoot, RootKind,
    DEFAULT_GENERIC_TOL, MAX_GENERIC_DEGREE,
};
pub use parse::{parse_form, parse_polynomial_pair, FormInput};
pub use poly::Polynomial;
pub use roots::{aberth, find_roots, Root};

use crate::chart::{Chart, ChartPoint};
use crate::{Error, Result, C64};

/// Roots of numerator and denominator closer than this are cancelled.
pub const CANCEL_TOL: f64 = 1e-10;

/// Behaviour of the form at `z = infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AtInfinity {
    /// Regular and non-vanishing: `deg P = deg Q - 2`.
    Regular,
    /// Simple pole at infinity with the given residue (`deg P = deg Q - 1`).
    SimplePole(C64),
    /// Zero of the given order at infinity (`deg P = deg Q - 2 - order`).
    Zero(usize),
}

/// Forms with at most this many finite poles may have a simple pole or a
/// zero at infinity; larger forms must be regular there.
pub const MAX_IRREGULAR_DEGREE: usize = 3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalForm {
    pub num: Polynomial,
    pub den: Polynomial,
    pub poles: Vec<C64>,
    pub pole_multiplicity: Vec<usize>,
    pub residues: Vec<C64>,
    pub zeroes: Vec<C64>,
    pub zero_multiplicity: Vec<usize>,
    /// Number of poles on the sphere counted with multiplicity.
    pub degree_n: usize,
    pub at_infinity: AtInfinity,
    dnum: Polynomial,
    dden: Polynomial,
}

fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
}

impl RationalForm {
    /// Builds and analyzes the form from numerator and denominator, cancelling
    /// common roots first.
    pub fn from_parts(num: Polynomial, den: Polynomial) -> Result<Self> {
        let num = num.trimmed(1e-14);
        let den = den.trimmed(1e-14);
        if den.is_zero() || den.degree() == 0 {
            return Err(Error::InvalidInput(
                "denominator must have degree >= 1".into(),
            ));
        }
        if num.is_zero() {
            return Err(Error::InvalidInput("numerator is identically zero".into()));
        }
        let (num, den) = cancel_common_roots(num, den)?;
        Self::new(num, den)
    }

    /// Builds and analyzes the form without cancellation.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let dp = num.degree();
        let dq = den.degree();
        let at_infinity = if dq == dp + 2 {
            AtInfinity::Regular
        } else if dq == dp + 1 && dq <= MAX_IRREGULAR_DEGREE {
            AtInfinity::SimplePole(C64::new(0.0, 0.0))
        } else if dq > dp + 2 && dq <= MAX_IRREGULAR_DEGREE {
            AtInfinity::Zero(dq - dp - 2)
        } else {
            return Err(Error::NotRegularAtInfinity {
                num_degree: dp,
                den_degree: dq,
            });
        };

        let mut pole_roots = find_roots(&den)?;
        sort_roots(&mut pole_roots);
        let mut zero_roots = if dp >= 1 { find_roots(&num)? } else { Vec::new() };
        sort_roots(&mut zero_roots);

        let lead = den.leading();
        let (num, den) = (num.scale(lead.inv()), den.scale(lead.inv()));

        let mut form = RationalForm {
            dnum: num.derivative(),
            dden: den.derivative(),
            num,
            den,
            poles: pole_roots.iter().map(|r| r.z).collect(),
            pole_multiplicity: pole_roots.iter().map(|r| r.multiplicity).collect(),
            residues: Vec::new(),
            zeroes: zero_roots.iter().map(|r| r.z).collect(),
            zero_multiplicity: zero_roots.iter().map(|r| r.multiplicity).collect(),
            degree_n: dq + usize::from(dq == dp + 1),
            at_infinity,
        };
        form.residues = (0..form.poles.len())
            .map(|j| form.residue_at(j))
            .collect();
        if let AtInfinity::SimplePole(_) = form.at_infinity {
            let sum: C64 = form.residues.iter().sum();
            form.at_infinity = AtInfinity::SimplePole(-sum);
        }
        Ok(form)
    }

    pub fn n(&self) -> usize {
        self.degree_n
    }

    pub fn is_regular_at_infinity(&self) -> bool {
        matches!(self.at_infinity, AtInfinity::Regular)
    }

    pub fn all_simple(&self) -> bool {
        self.pole_multiplicity.iter().all(|&m| m == 1)
            && self.zero_multiplicity.iter().all(|&m| m == 1)
    }

    fn residue_at(&self, j: usize) -> C64 {
        let zj = self.poles[j];
        if self.pole_multiplicity[j] == 1 {
            let d = self.dden.eval(zj);
            if d.norm() > 1e-12 * self.den.max_abs_coeff() {
                return self.num.eval(zj) / d;
            }
        }
        // Multiple pole: trapezoidal contour integral on a small circle.
        let gap = self
            .poles
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &p)| (p - zj).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if gap.is_finite() {
            0.3 * gap
        } else {
            0.3 * zj.norm().max(1.0)
        };
        let m = 512;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..m {
            let e = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64);
            let z = zj + e * radius;
            acc += self.eval(z) * e * radius;
        }
        acc / m as f64
    }

    /// `R(z)` in the finite chart.
    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval(z) / self.den.eval(z)
    }

    /// `R'(z)`.
    pub fn eval_derivative(&self, z: C64) -> C64 {
        let (p, dp) = self.num.eval_with_derivative(z);
        let (q, dq) = self.den.eval_with_derivative(z);
        (dp * q - p * dq) / (q * q)
    }

    /// The coefficient of the form in the given chart: `R(z)` or
    /// `-R(1/xi)/xi^2`.
    pub fn eval_chart(&self, p: &ChartPoint) -> C64 {
        match p.chart {
            Chart::Finite => self.eval(p.coord),
            Chart::Infinity => {
                let xi = p.coord;
                let shift = self.den.degree() as i32 - self.num.degree() as i32 - 2;
                let ratio = self.num.eval_reversed(xi) / self.den.eval_reversed(xi);
                if shift >= 0 {
                    -ratio * xi.powi(shift)
                } else {
                    -ratio / xi.powi(-shift)
                }
            }
        }
    }

    /// Distance from `p` to the nearest finite pole, measured in the finite
    /// chart; infinite at `z = infinity` for regular forms.
    pub fn distance_to_poles(&self, z: C64) -> f64 {
        self.poles
            .iter()
            .map(|&q| (q - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to_zeroes(&self, z: C64) -> f64 {
        self.zeroes
            .iter()
            .map(|&q| (q - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest zero index and its distance.
    pub fn nearest_zero(&self, z: C64) -> Option<(usize, f64)> {
        self.zeroes
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, (c - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Diameter of the finite singular set (poles and zeroes), floored so
    /// that single-pole forms still have a length scale.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<C64> = self.poles.iter().chain(self.zeroes.iter()).copied().collect();
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d.max(pts.iter().map(|p| p.norm()).fold(0.0, f64::max)).max(1e-3)
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Radius beyond which flows switch to the chart at infinity.
    pub fn chart_switch_radius(&self) -> f64 {
        2.0 * (1.0 + self.max_pole_modulus().max(self.zeroes.iter().map(|c| c.norm()).fold(0.0, f64::max)))
    }

    /// Increment of the primitive `F = sum lambda_k log(z - z_k)` between two
    /// nearby points, using principal logarithms of ratios. Valid when the
    /// segment between them winds less than half a turn around every pole.
    pub fn primitive_increment(&self, a: &ChartPoint, b: &ChartPoint) -> C64 {
        let chart = ChartPoint::common_chart(a, b);
        let ca = a.coord_in(chart);
        let cb = b.coord_in(chart);
        let one = C64::new(1.0, 0.0);
        match chart {
            Chart::Finite => self
                .poles
                .iter()
                .zip(&self.residues)
                .map(|(&zk, &lam)| lam * ((cb - zk) / (ca - zk)).ln())
                .sum(),
            Chart::Infinity => {
                let mut acc: C64 = self
                    .poles
                    .iter()
                    .zip(&self.residues)
                    .map(|(&zk, &lam)| lam * ((one - zk * cb) / (one - zk * ca)).ln())
                    .sum();
                if let AtInfinity::SimplePole(res_inf) = self.at_infinity {
                    // F picks up -(sum lambda) log xi = res_inf log xi.
                    acc += res_inf * (cb / ca).ln();
                }
                acc
            }
        }
    }

    pub fn residue_sum(&self) -> C64 {
        self.residues.iter().sum()
    }
}

/// `(R value, metric density |R|)` at a chart point.
pub fn eval_form(form: &RationalForm, p: &ChartPoint) -> Result<(C64, f64)> {
    let z = p.to_z();
    if p.chart == Chart::Finite || z.is_finite() {
        let near = form.distance_to_poles(z);
        if near <= 1e-14 * form.diameter() {
            return Err(Error::InvalidInput(format!("evaluation at a pole ({z})")));
        }
    }
    let v = form.eval_chart(p);
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("evaluation at a pole ({p:?})")));
    }
    Ok((v, v.norm()))
}

/// Residues `lambda_j = P(z_j)/Q'(z_j)`; fails on non-simple poles.
pub fn residues(form: &RationalForm) -> Result<Vec<C64>> {
    for (j, &m) in form.pole_multiplicity.iter().enumerate() {
        let d = form.dden.eval(form.poles[j]);
        if m != 1 || d.norm() <= 1e-12 * form.den.max_abs_coeff() {
            return Err(Error::PoleNotSimple(format!("{}", form.poles[j])));
        }
    }
    Ok(form.residues.clone())
}

fn cancel_common_roots(num: Polynomial, den: Polynomial) -> Result<(Polynomial, Polynomial)> {
    if num.degree() == 0 {
        return Ok((num, den));
    }
    let mut nr = find_roots(&num)?;
    let mut dr = find_roots(&den)?;
    let mut cancelled = false;
    for a in nr.iter_mut() {
        for b in dr.iter_mut() {
            if a.multiplicity == 0 || b.multiplicity == 0 {
                continue;
            }
            if (a.z - b.z).norm() <= CANCEL_TOL * a.z.norm().max(1.0) {
                let k = a.multiplicity.min(b.multiplicity);
                a.multiplicity -= k;
                b.multiplicity -= k;
                cancelled = true;
            }
        }
    }
    if !cancelled {
        return Ok((num, den));
    }
    let expand = |roots: &[Root]| -> Vec<C64> {
        roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.z).take(r.multiplicity))
            .collect()
    };
    Ok((
        Polynomial::from_roots(&expand(&nr), num.leading()),
        Polynomial::from_roots(&expand(&dr), den.leading()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn residue_of_simple_pole() {
        // 3i/(z - (1+i))
        let form = RationalForm::new(
            Polynomial::constant(c(0.0, 3.0)),
            Polynomial::new(vec![c(-1.0, -1.0), c(1.0, 0.0)]),
        )
        .unwrap();
        assert!(matches!(form.at_infinity, AtInfinity::SimplePole(_)));
        let lam = residues(&form).unwrap();
        assert!((lam[0] - c(0.0, 3.0)).norm() < 1e-14);
    }

    #[test]
    fn eval_one_over_z() {
        let form = parse_form("1/z").unwrap();
        let (v, d) = eval_form(&form, &ChartPoint::finite(c(1.0, 0.0))).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        assert!((d - 1.0).abs() < 1e-15);
        assert!(eval_form(&form, &ChartPoint::finite(c(0.0, 0.0))).is_err());
    }

    #[test]
    fn two_pole_form_is_regular_at_infinity() {
        let form = parse_form("1/((z-1)*(z+2))").unwrap();
        let (v, d) = eval_form(&form, &ChartPoint::infinity(c(0.0, 0.0))).unwrap();
        assert!(v.norm() > 0.5 && v.is_finite());
        assert!(d > 0.0);
    }

    #[test]
    fn multiple_pole_residue_by_contour() {
        // 1/z^2 + 1/(z-1) - 1/(z+1)... build 1/((z-1)^2 (z+1)) with residues
        // -1/4 at 1 (double), 1/4 at -1.
        let form = RationalForm::new(
            Polynomial::constant(c(1.0, 0.0)),
            Polynomial::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0)),
        )
        .unwrap();
        let j = form.poles.iter().position(|p| (p - c(1.0, 0.0)).norm() < 1e-6).unwrap();
        assert_eq!(form.pole_multiplicity[j], 2);
        assert!((form.residues[j] - c(-0.25, 0.0)).norm() < 1e-10);
        assert!(residues(&form).is_err());
    }

    #[test]
    fn chart_consistency_of_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let form = sample::generic_form(4, &mut rng);
        for k in 0..16 {
            let z = C64::from_polar(3.0, k as f64 * 0.39 + 0.1);
            let dz = form.eval(z).norm();
            // |R(z)||dz| = |R~(xi)||dxi| with |dxi| = |dz|/|z|^2.
            let xi = z.inv();
            let dxi = form.eval_chart(&ChartPoint::infinity(xi)).norm();
            assert!((dz - dxi * xi.norm_sqr()).abs() <= 1e-12 * dz);
        }
    }

    #[test]
    fn primitive_increment_matches_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let form = sample::generic_form(5, &mut rng);
        let z = c(0.31, 2.7);
        let h = 1e-6;
        let inc = form.primitive_increment(
            &ChartPoint::finite(z),
            &ChartPoint::finite(z + c(h, 0.0)),
        );
        assert!((inc / h - form.eval(z)).norm() < 1e-5 * form.eval(z).norm());
        // The same increment through the chart at infinity.
        let a = ChartPoint::finite(c(40.0, 3.0));
        let b = ChartPoint::finite(c(40.5, 3.2));
        let i1 = form.primitive_increment(&a, &b);
        let i2 = form.primitive_increment(
            &ChartPoint::infinity(a.coord.inv()),
            &ChartPoint::infinity(b.coord.inv()),
        );
        assert!((i1 - i2).norm() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn residues_sum_to_zero(seed in 0u64..500, n in 3usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let form = sample::generic_form(n, &mut rng);
            let total: f64 = form.residues.iter().map(|l| l.norm()).sum();
            proptest::prop_assert!(form.residue_sum().norm() <= 1e-12 * total);
            proptest::prop_assert_eq!(form.zeroes.len(), n - 2);
            proptest::prop_assert_eq!(form.n(), n);
        }

        #[test]
        fn two_chart_density_consistency(seed in 0u64..100, k in 0usize..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let form = sample::generic_form(4, &mut rng);
            let m = form.max_pole_modulus();
            let t = k as f64 / 99.0;
            let radius = m * (2.0 + 8.0 * t);
            let z = C64::from_polar(radius, 2.399 * k as f64);
            let (_, dz) = eval_form(&form, &ChartPoint::finite(z)).unwrap();
            let (_, dxi) = eval_form(&form, &ChartPoint::infinity(z.inv())).unwrap();
            let scaled = dxi / z.norm_sqr();
            proptest::prop_assert!((dz - scaled).abs() <= 1e-10 * dz);
        }
    }
}
