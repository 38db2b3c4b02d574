//! Seeded generator of generic forms used by tests, the acceptance suite
//! and the CLI demo input.

use rand::Rng;

use super::{check_generic, Polynomial, RationalForm};
use crate::C64;

/// Genericity margins required of generated forms, well above the check
/// tolerance so that downstream stages see comfortably generic input.
const MIN_MARGIN_B: f64 = 0.02;
const MIN_POLE_SEPARATION: f64 = 0.3;
const POLE_DISK_RADIUS: f64 = 2.0;

/// Builds `sum lambda_j / (z - z_j)` as a single fraction. Residues whose
/// sum vanishes to rounding level give a form regular at infinity.
pub fn from_poles_and_residues(poles: &[C64], residues: &[C64]) -> Option<RationalForm> {
    let (num, den) = fraction(poles, residues);
    let scale: f64 = residues.iter().map(|l| l.norm()).sum();
    let mut c = num.coeffs().to_vec();
    if c.len() == poles.len() && c.last().is_some_and(|l| l.norm() <= 1e-12 * scale) {
        c.pop();
    }
    RationalForm::new(Polynomial::new(c), den).ok()
}

fn fraction(poles: &[C64], residues: &[C64]) -> (Polynomial, Polynomial) {
    let mut num = Polynomial::new(Vec::new());
    for (j, &lam) in residues.iter().enumerate() {
        let others: Vec<C64> = poles
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &p)| p)
            .collect();
        num = num.add(&Polynomial::from_roots(&others, lam));
    }
    (num, Polynomial::from_roots(poles, C64::new(1.0, 0.0)))
}

fn candidate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<RationalForm> {
    let mut poles: Vec<C64> = Vec::with_capacity(n);
    let mut attempts = 0;
    while poles.len() < n {
        attempts += 1;
        if attempts > 10_000 {
            return None;
        }
        let r = POLE_DISK_RADIUS * rng.gen::<f64>().sqrt();
        let z = C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        if poles.iter().all(|p| (p - z).norm() >= MIN_POLE_SEPARATION) {
            poles.push(z);
        }
    }
    let mut lam: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mean: C64 = lam.iter().sum::<C64>() / n as f64;
    for l in lam.iter_mut() {
        *l -= mean;
    }
    let max = lam.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if lam.iter().any(|l| l.norm() < 0.1 * max) {
        return None;
    }
    let (num, den) = fraction(&poles, &lam);
    let form = RationalForm::new(num, den).ok()?;
    if form.zeroes.len() != n - 2 || !form.all_simple() {
        return None;
    }
    let sep = form
        .zeroes
        .iter()
        .map(|&c| {
            form.poles
                .iter()
                .chain(form.zeroes.iter().filter(|&&d| d != c))
                .map(|&p| (p - c).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    if sep < 0.05 {
        return None;
    }
    let report = check_generic(&form, super::DEFAULT_GENERIC_TOL).ok()?;
    // With N subset-sum directions the typical smallest angular gap is about
    // pi / N^2; ask for a fixed fraction of it.
    let dirs = ((1usize << (n - 1)) - 1) as f64;
    let min_margin_c = 0.1 * std::f64::consts::PI / (dirs * dirs);
    (report.is_generic() && report.cond_b.margin > MIN_MARGIN_B && report.cond_c.margin > min_margin_c)
        .then_some(form)
}

/// Draws a generic form with `n >= 3` poles, retrying until the margins are
/// comfortable.
pub fn generic_form<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RationalForm {
    assert!((3..=12).contains(&n), "sample degree must be in 3..=12");
    loop {
        if let Some(f) = candidate(n, rng) {
            return f;
        }
    }
}

/// Convenience: the form for `(seed, n)` from a ChaCha8 stream.
pub fn seeded(seed: u64, n: usize) -> RationalForm {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    generic_form(n, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_generic() {
        let a = seeded(7, 5);
        let b = seeded(7, 5);
        assert_eq!(a.poles, b.poles);
        assert_eq!(a.zeroes.len(), 3);
        assert!(check_generic(&a, 1e-9).unwrap().is_generic());
    }
}
