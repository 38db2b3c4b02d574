use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::RationalForm;
use crate::{Error, Result, C64};

pub const DEFAULT_GENERIC_TOL: f64 = 1e-9;

/// Subset enumeration is exponential in the number of poles.
pub const MAX_GENERIC_DEGREE: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Pole,
    Zero,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultipleRoot {
    pub kind: RootKind,
    pub z: [f64; 2],
    pub multiplicity: usize,
}

/// Simplicity of poles and zeroes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CondA {
    pub pass: bool,
    pub witnesses: Vec<MultipleRoot>,
    /// Smallest distance between distinct singular points over the diameter.
    pub margin: f64,
}

/// Non-vanishing of residue sums over proper subsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CondB {
    pub pass: bool,
    pub subset: Option<Vec<usize>>,
    pub abs_sum: Option<f64>,
    /// `min |sum_I lambda| / max |lambda|`.
    pub margin: f64,
}

/// Real linear independence of non-complementary subset sums.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CondC {
    pub pass: bool,
    pub pair: Option<(Vec<usize>, Vec<usize>)>,
    /// `min |Im(s_I conj s_J)| / (|s_I| |s_J|)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenericityReport {
    pub tol: f64,
    pub regular_at_infinity: bool,
    pub cond_a: CondA,
    pub cond_b: CondB,
    pub cond_c: CondC,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.regular_at_infinity && self.cond_a.pass && self.cond_b.pass && self.cond_c.pass
    }

    /// Short human-readable list of failed conditions.
    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.regular_at_infinity {
            parts.push("form is not regular and non-vanishing at infinity".to_string());
        }
        if !self.cond_a.pass {
            parts.push(format!("{} multiple pole(s)/zero(s)", self.cond_a.witnesses.len()));
        }
        if !self.cond_b.pass {
            parts.push(format!("residue sum over {:?} vanishes", self.cond_b.subset.as_deref().unwrap_or(&[])));
        }
        if !self.cond_c.pass {
            if let Some((i, j)) = &self.cond_c.pair {
                parts.push(format!("residue sums over {i:?} and {j:?} are colinear"));
            }
        }
        parts.join("; ")
    }
}

fn mask_to_indices(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&k| mask & (1 << k) != 0).collect()
}

/// Checks simplicity, vanishing subset sums and colinear subset sums.
pub fn check_generic(form: &RationalForm, tol: f64) -> Result<GenericityReport> {
    let n = form.poles.len();
    if n > MAX_GENERIC_DEGREE {
        return Err(Error::InvalidInput(format!(
            "genericity check supports at most {MAX_GENERIC_DEGREE} poles, got {n}"
        )));
    }

    let mut witnesses = Vec::new();
    for (z, &m) in form.poles.iter().zip(&form.pole_multiplicity) {
        if m > 1 {
            witnesses.push(MultipleRoot { kind: RootKind::Pole, z: [z.re, z.im], multiplicity: m });
        }
    }
    for (z, &m) in form.zeroes.iter().zip(&form.zero_multiplicity) {
        if m > 1 {
            witnesses.push(MultipleRoot { kind: RootKind::Zero, z: [z.re, z.im], multiplicity: m });
        }
    }
    let points: Vec<C64> = form.poles.iter().chain(&form.zeroes).copied().collect();
    let mut min_sep = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            min_sep = min_sep.min((a - b).norm());
        }
    }
    let cond_a = CondA {
        pass: witnesses.is_empty(),
        margin: if witnesses.is_empty() && min_sep.is_finite() {
            min_sep / form.diameter()
        } else if witnesses.is_empty() {
            1.0
        } else {
            0.0
        },
        witnesses,
    };

    // Subsets avoiding the last pole represent every proper subset up to
    // complement, and s(I^c) = -s(I).
    let lam = &form.residues;
    let scale = lam.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let reps = if n >= 1 { 1u32 << (n - 1) } else { 1 };
    let mut sums = vec![C64::new(0.0, 0.0); reps as usize];
    for mask in 1..reps {
        let low = mask.trailing_zeros() as usize;
        sums[mask as usize] = sums[(mask & (mask - 1)) as usize] + lam[low];
    }

    let mut b_min = f64::INFINITY;
    let mut b_arg = 0u32;
    for mask in 1..reps {
        let a = sums[mask as usize].norm();
        if a < b_min {
            b_min = a;
            b_arg = mask;
        }
    }
    let b_margin = if b_min.is_finite() { b_min / scale } else { 1.0 };
    let b_pass = b_margin > tol;
    let cond_b = CondB {
        pass: b_pass,
        subset: (!b_pass).then(|| mask_to_indices(b_arg, n)),
        abs_sum: (!b_pass).then_some(b_min),
        margin: b_margin,
    };

    // Sorting directions modulo pi turns the pairwise colinearity test into
    // a nearest-neighbour gap search.
    let mut dirs: Vec<(f64, u32)> = (1..reps)
        .filter(|&m| sums[m as usize].norm() > tol * scale)
        .map(|m| (sums[m as usize].arg().rem_euclid(PI), m))
        .collect();
    dirs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut c_min = f64::INFINITY;
    let mut c_pair = (0u32, 0u32);
    if dirs.len() >= 2 {
        for w in dirs.windows(2) {
            let gap = w[1].0 - w[0].0;
            if gap < c_min {
                c_min = gap;
                c_pair = (w[0].1, w[1].1);
            }
        }
        let wrap = PI - (dirs[dirs.len() - 1].0 - dirs[0].0);
        if wrap < c_min {
            c_min = wrap;
            c_pair = (dirs[dirs.len() - 1].1, dirs[0].1);
        }
    }
    let c_margin = if c_min.is_finite() { c_min.sin().abs() } else { 1.0 };
    let c_pass = c_margin > tol;
    let cond_c = CondC {
        pass: c_pass,
        pair: (!c_pass).then(|| (mask_to_indices(c_pair.0, n), mask_to_indices(c_pair.1, n))),
        margin: c_margin,
    };

    Ok(GenericityReport {
        tol,
        regular_at_infinity: form.is_regular_at_infinity(),
        cond_a,
        cond_b,
        cond_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratform::{parse_form, sample, Polynomial};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Literal enumeration of all unordered pairs of distinct proper subsets,
    /// skipping complementary pairs.
    fn brute_force_c(lam: &[C64]) -> (f64, usize) {
        let n = lam.len();
        let full = (1u32 << n) - 1;
        let subsets: Vec<u32> = (1..full).collect();
        let sum = |m: u32| -> C64 { (0..n).filter(|k| m & (1 << k) != 0).map(|k| lam[k]).sum() };
        let mut best = f64::INFINITY;
        let mut pairs = 0;
        for (a, &i) in subsets.iter().enumerate() {
            for &j in &subsets[a + 1..] {
                if i ^ j == full {
                    continue;
                }
                pairs += 1;
                let (si, sj) = (sum(i), sum(j));
                best = best.min((si * sj.conj()).im.abs() / (si.norm() * sj.norm()));
            }
        }
        (best, pairs)
    }

    #[test]
    fn real_residues_fail_c() {
        let f = parse_form("2/(z*(z-1)*(z+1))").unwrap();
        let r = check_generic(&f, DEFAULT_GENERIC_TOL).unwrap();
        assert!(!r.cond_c.pass);
        assert!(r.cond_c.pair.is_some());
        assert!(r.cond_a.pass);
        assert!(!r.is_generic());
    }

    #[test]
    fn double_pole_fails_a() {
        let f = parse_form("1/((z-1)^2 (z+1))").unwrap();
        let r = check_generic(&f, DEFAULT_GENERIC_TOL).unwrap();
        assert!(!r.cond_a.pass);
        let w = &r.cond_a.witnesses[0];
        assert_eq!(w.kind, RootKind::Pole);
        assert!((w.z[0] - 1.0).abs() < 1e-6 && w.z[1].abs() < 1e-6);
    }

    #[test]
    fn seeded_quartic_matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let f = sample::generic_form(4, &mut rng);
        let r = check_generic(&f, DEFAULT_GENERIC_TOL).unwrap();
        assert!(r.is_generic());
        assert!(r.cond_a.margin > 0.0 && r.cond_b.margin > 0.0 && r.cond_c.margin > 0.0);
        let (best, pairs) = brute_force_c(&f.residues);
        // 91 unordered pairs of the 14 proper subsets, 7 of them complementary.
        assert_eq!(pairs, 84);
        assert!((best - r.cond_c.margin).abs() < 1e-12);
    }

    #[test]
    fn vanishing_subset_sum_fails_b() {
        // Residues 1, -1, i, -i.
        let poles = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(2.0, 2.0)];
        let lam = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)];
        let mut num = Polynomial::new(vec![]);
        for j in 0..4 {
            let others: Vec<C64> = (0..4).filter(|&k| k != j).map(|k| poles[k]).collect();
            num = num.add(&Polynomial::from_roots(&others, lam[j]));
        }
        let f = RationalForm::from_parts(num, Polynomial::from_roots(&poles, C64::new(1.0, 0.0))).unwrap();
        let r = check_generic(&f, DEFAULT_GENERIC_TOL).unwrap();
        assert!(!r.cond_b.pass);
        assert_eq!(r.cond_b.subset.as_ref().unwrap().len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn permutation_and_scaling_invariance(seed in 0u64..200, n in 4usize..=7, re in -2.0f64..2.0, im in 0.1f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sample::generic_form(n, &mut rng);
            let r = check_generic(&f, DEFAULT_GENERIC_TOL).unwrap();
            let s = C64::new(re, im);
            let g = RationalForm::from_parts(f.num.scale(s), f.den.clone()).unwrap();
            let rg = check_generic(&g, DEFAULT_GENERIC_TOL).unwrap();
            for (a, b) in f.residues.iter().zip(&g.residues) {
                proptest::prop_assert!((a * s - b).norm() < 1e-9 * a.norm().max(1.0));
            }
            proptest::prop_assert_eq!(r.is_generic(), rg.is_generic());
            proptest::prop_assert!((r.cond_c.margin - rg.cond_c.margin).abs() < 1e-8);
            // Reversing the pole order does not change the outcome.
            let mut lam: Vec<C64> = f.residues.clone();
            lam.reverse();
            let (best, _) = brute_force_c(&lam);
            proptest::prop_assert!((best - r.cond_c.margin).abs() < 1e-9);
        }
    }
}
