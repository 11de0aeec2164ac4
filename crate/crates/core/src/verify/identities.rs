//! Sum identities and bounds relating the coefficients of two sequences of
//! equal length.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::dyadic::Dyadic;
use crate::error::{invalid, Result};
use crate::rng::stream_rng;
use crate::runstats::{an_bn, coefficients, CoefficientSet};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub pairs: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name.as_str())
            .collect()
    }

    fn absorb(&mut self, other: IdentityReport) {
        self.pairs += other.pairs;
        for (mine, theirs) in self.checks.iter_mut().zip(other.checks) {
            mine.holds &= theirs.holds;
        }
    }
}

fn in_range(v: &Dyadic, hi: &Dyadic) -> bool {
    *v >= Dyadic::zero() && v <= hi
}

fn evaluate(n: usize, x: &CoefficientSet, y: &CoefficientSet) -> Vec<(&'static str, bool)> {
    let (a, b) = an_bn(n).expect("n >= 1");
    let nd = Dyadic::from_integer(n as u64);
    let two = Dyadic::from_integer(2);
    let ranges = |c: &CoefficientSet| {
        in_range(&c.alpha, &nd)
            && in_range(&c.delta, &nd)
            && in_range(&c.beta, &two)
            && in_range(&c.gamma, &two)
    };
    vec![
        (
            "alpha + delta = a(n)",
            &x.alpha + &x.delta == a && &y.alpha + &y.delta == a,
        ),
        (
            "beta + gamma = b(n)",
            &x.beta + &x.gamma == b && &y.beta + &y.gamma == b,
        ),
        ("0 <= alpha, delta <= n and 0 <= beta, gamma <= 2", ranges(x) && ranges(y)),
        ("|alpha_x - alpha_y| <= n", (&x.alpha - &y.alpha).abs() <= nd),
        ("|alpha_x - delta_y| <= n", (&x.alpha - &y.delta).abs() <= nd),
        ("|beta_x - beta_y| <= 2", (&x.beta - &y.beta).abs() <= two),
        ("|beta_x - gamma_y| <= 2", (&x.beta - &y.gamma).abs() <= two),
        (
            "beta_x - beta_y = -(gamma_x - gamma_y)",
            &x.beta - &y.beta == -(&x.gamma - &y.gamma),
        ),
        (
            "alpha_x - alpha_y = -(delta_x - delta_y)",
            &x.alpha - &y.alpha == -(&x.delta - &y.delta),
        ),
        (
            "|beta_x - gamma_y| = |beta_y - gamma_x|",
            (&x.beta - &y.gamma).abs() == (&y.beta - &x.gamma).abs(),
        ),
    ]
}

/// Check every identity for one pair of equal-length sequences.
pub fn identity_suite(x: &BitSeq, y: &BitSeq) -> Result<IdentityReport> {
    if x.len() != y.len() {
        return Err(invalid(format!(
            "identity checks need equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(invalid("identity checks need n >= 1"));
    }
    let checks = evaluate(x.len(), &coefficients(x), &coefficients(y))
        .into_iter()
        .map(|(name, holds)| IdentityCheck {
            name: name.to_string(),
            holds,
        })
        .collect();
    Ok(IdentityReport {
        n: x.len(),
        pairs: 1,
        checks,
    })
}

/// Uniformly random sequence of length `n` from the given stream.
pub fn random_sequence(rng: &mut impl RngCore, n: usize) -> BitSeq {
    let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
    BitSeq::from_words(words, n)
}

/// Check `x` against `samples` random partners; a check holds only if it held
/// for every partner.
pub fn identity_suite_random(x: &BitSeq, samples: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = stream_rng(seed, 0);
    let mut report = identity_suite(x, x)?;
    for _ in 0..samples {
        let y = random_sequence(&mut rng, x.len());
        report.absorb(identity_suite(x, &y)?);
    }
    Ok(report)
}
