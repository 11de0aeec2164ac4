//! Expected run counts in a trace, and the pairwise geometric coefficients.
//!
//! Everything here runs in O(n) scalar operations using prefix recurrences
//! over positions, one accumulator per symbol.

use serde::{Deserialize, Serialize};

use crate::bitseq::BitSeq;
use crate::dyadic::Dyadic;
use crate::error::{invalid, Result};
use crate::scalar::{pow, Scalar};
use num_traits::Zero;

/// `sum q^(j-i)` over pairs `i < j` split by symbol: both 0, both 1, or mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSums<T> {
    pub zeros: T,
    pub ones: T,
    pub cross: T,
}

impl<T: Scalar> PairSums<T> {
    pub fn same(&self) -> T {
        self.zeros.clone() + self.ones.clone()
    }

    fn scale(self, f: &T) -> Self {
        PairSums {
            zeros: self.zeros * f.clone(),
            ones: self.ones * f.clone(),
            cross: self.cross * f.clone(),
        }
    }
}

/// Pair sums with exponent `j - i - 1`.
///
/// `acc[s]` holds `sum_{i<j, x_i = s} q^(j-i-1)` for the current `j`; moving
/// to `j + 1` multiplies by `q` and adds the symbol just passed.
fn shifted_pair_sums<T: Scalar>(x: &BitSeq, q: &T) -> PairSums<T> {
    let mut acc = [T::zero(), T::zero()];
    let mut out = PairSums {
        zeros: T::zero(),
        ones: T::zero(),
        cross: T::zero(),
    };
    let mut prev: Option<bool> = None;
    for bit in x.iter() {
        if let Some(p) = prev {
            acc[0] = acc[0].clone() * q.clone();
            acc[1] = acc[1].clone() * q.clone();
            acc[p as usize] = acc[p as usize].clone() + T::one();
        }
        let s = bit as usize;
        if bit {
            out.ones = out.ones + acc[s].clone();
        } else {
            out.zeros = out.zeros + acc[s].clone();
        }
        out.cross = out.cross + acc[1 - s].clone();
        prev = Some(bit);
    }
    out
}

/// `sum_{i<j} q^(j-i)` over same-symbol and mixed-symbol pairs of `x`.
pub fn pair_sums<T: Scalar>(x: &BitSeq, q: &T) -> PairSums<T> {
    shifted_pair_sums(x, q).scale(q)
}

/// `sum_{i<j in S} q^(j-i)` for an arbitrary index set `S`.
pub fn pair_sum<T: Scalar>(indices: &[usize], q: &T) -> T {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut total = T::zero();
    // t = sum over earlier members i of q^(current - i)
    let mut t = T::zero();
    for w in sorted.windows(2) {
        let gap = (w[1] - w[0]) as u64;
        t = (t + T::one()) * pow(q, gap);
        total = total + t.clone();
    }
    total
}

/// Expected runs of 0s, of 1s, and in total, in a trace of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRuns<T> {
    pub zeros: T,
    pub ones: T,
    pub total: T,
    pub q: T,
}

/// Expected run counts of a trace of `x` through the deletion channel with
/// probability `q`, for `0 < q < 1`.
///
/// With `P0 = sum_{i<j, both 0} q^(j-i)` the zero-run expectation is
/// `(1-q) (n0 - (1-q)/q P0)`. The factor `1/q` is folded into the exponent so
/// no division is needed, which keeps the formula inside dyadic arithmetic.
pub fn expected_runs<T: Scalar>(x: &BitSeq, q: T) -> Result<ExpectedRuns<T>> {
    if !(q > T::zero() && q < T::one()) {
        return Err(invalid(format!(
            "expected run counts need 0 < q < 1, got {q:?}"
        )));
    }
    let p = T::one() - q.clone();
    let sums = shifted_pair_sums(x, &q);
    let ones_count = x.weight();
    let zeros_count = x.len() - ones_count;
    let zeros = p.clone() * (T::from_count(zeros_count) - p.clone() * sums.zeros);
    let ones = p.clone() * (T::from_count(ones_count) - p * sums.ones);
    Ok(ExpectedRuns {
        total: zeros.clone() + ones.clone(),
        zeros,
        ones,
        q,
    })
}

/// Exact expectations at `q = 1/2`.
pub fn expected_runs_half(x: &BitSeq) -> ExpectedRuns<Dyadic> {
    expected_runs(x, Dyadic::half()).expect("1/2 is a valid deletion probability")
}

/// The coefficients `alpha, beta, gamma, delta` of a sequence of length `n`.
///
/// * `alpha`: same-symbol pairs weighted `2^-(j-i)`
/// * `beta`: same-symbol pairs weighted `2^-(n-(j-i))`
/// * `gamma`: mixed pairs weighted `2^-(n-(j-i))`
/// * `delta`: mixed pairs weighted `2^-(j-i)`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub n: usize,
    pub alpha: Dyadic,
    pub beta: Dyadic,
    pub gamma: Dyadic,
    pub delta: Dyadic,
}

pub fn coefficients(x: &BitSeq) -> CoefficientSet {
    let n = x.len();
    let near = pair_sums(x, &Dyadic::half());
    let far = pair_sums(x, &Dyadic::from_integer(2));
    let shift = -(n as i64);
    CoefficientSet {
        n,
        alpha: near.same(),
        delta: near.cross,
        beta: far.same().mul_pow2(shift),
        gamma: far.cross.mul_pow2(shift),
    }
}

/// `a(n) = n - 2 + 2^-(n-1)` and `b(n) = 2 - (n+1) 2^-(n-1)`: the values of
/// `alpha + delta` and `beta + gamma` for every sequence of length `n`.
pub fn an_bn(n: usize) -> Result<(Dyadic, Dyadic)> {
    if n == 0 {
        return Err(invalid("a(n) and b(n) need n >= 1"));
    }
    let tail = Dyadic::pow2(1 - n as i64);
    let n_d = Dyadic::from_integer(n as u64);
    let a = &n_d - &Dyadic::from_integer(2) + &tail;
    let b = Dyadic::from_integer(2) - (&n_d + &Dyadic::from_integer(1)) * tail;
    Ok((a, b))
}

impl CoefficientSet {
    /// Coefficients of `x || x` and `x || complement(x)` from those of `x`.
    ///
    /// `delta` of the doubled sequences follows from `alpha + delta = a(2n)`.
    pub fn recurse(&self) -> (CoefficientSet, CoefficientSet) {
        let n = self.n;
        if n == 0 {
            return (self.clone(), self.clone());
        }
        let h = Dyadic::pow2(-(n as i64));
        let h2 = h.mul_pow2(1);
        let nh = &Dyadic::from_integer(n as u64) * &h;
        let two = Dyadic::from_integer(2);
        let (alpha, beta, gamma, delta) = (&self.alpha, &self.beta, &self.gamma, &self.delta);

        let alpha_hat = &two * alpha + beta + &h * alpha + &nh;
        let alpha_check = &two * alpha + gamma + &h * delta;
        let beta_hat = beta + &h2 * beta + &h * alpha + &nh;
        let beta_check = gamma + &h2 * beta + &h * delta;
        let gamma_hat = gamma + &h2 * gamma + &h * delta;
        let gamma_check = beta + &h2 * gamma + &h * alpha + &nh;

        let (a2n, _) = an_bn(2 * n).expect("positive length");
        let hat = CoefficientSet {
            n: 2 * n,
            delta: &a2n - &alpha_hat,
            alpha: alpha_hat,
            beta: beta_hat,
            gamma: gamma_hat,
        };
        let check = CoefficientSet {
            n: 2 * n,
            delta: &a2n - &alpha_check,
            alpha: alpha_check,
            beta: beta_check,
            gamma: gamma_check,
        };
        (hat, check)
    }

    /// Non-negativity, range bounds and the two sum identities.
    pub fn is_consistent(&self) -> bool {
        if self.n == 0 {
            return [&self.alpha, &self.beta, &self.gamma, &self.delta]
                .iter()
                .all(|v| v.is_zero());
        }
        let (a, b) = an_bn(self.n).expect("n >= 1");
        let zero = Dyadic::zero();
        let n = Dyadic::from_integer(self.n as u64);
        let two = Dyadic::from_integer(2);
        [&self.alpha, &self.delta].iter().all(|v| **v >= zero && **v <= n)
            && [&self.beta, &self.gamma].iter().all(|v| **v >= zero && **v <= two)
            && &self.alpha + &self.delta == a
            && &self.beta + &self.gamma == b
    }
}

/// Same as [`CoefficientSet::recurse`].
pub fn coefficient_recursion(c: &CoefficientSet) -> (CoefficientSet, CoefficientSet) {
    c.recurse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn b(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    // O(n^2) definition, used only as a reference here
    fn naive_coefficients(x: &BitSeq) -> CoefficientSet {
        let n = x.len();
        let mut c = CoefficientSet {
            n,
            alpha: Dyadic::zero(),
            beta: Dyadic::zero(),
            gamma: Dyadic::zero(),
            delta: Dyadic::zero(),
        };
        for j in 0..n {
            for i in 0..j {
                let gap = (j - i) as i64;
                let near = Dyadic::pow2(-gap);
                let far = Dyadic::pow2(gap - n as i64);
                if x.get(i) == x.get(j) {
                    c.alpha += near;
                    c.beta += far;
                } else {
                    c.delta += near;
                    c.gamma += far;
                }
            }
        }
        c
    }

    #[test]
    fn pair_sum_examples() {
        let half = Dyadic::half();
        assert_eq!(pair_sum(&[1, 2], &half), d("1/2"));
        assert_eq!(pair_sum(&[], &half), Dyadic::zero());
        assert_eq!(pair_sum(&[4], &half), Dyadic::zero());
        assert_eq!(pair_sum(&[1, 2, 3], &half), d("5/4"));
        assert_eq!(pair_sum(&[3, 1, 2, 2], &half), d("5/4"));
    }

    #[test]
    fn pair_sum_agrees_with_sequence_form() {
        let x = b("0110100110010111000101");
        let q = Dyadic::new(3, 2);
        let sums = pair_sums(&x, &q);
        assert_eq!(pair_sum(&x.support(), &q), sums.ones);
        assert_eq!(pair_sum(&x.cosupport(), &q), sums.zeros);
    }

    #[test]
    fn expected_runs_examples() {
        let r = expected_runs_half(&b("0"));
        assert_eq!((r.zeros, r.ones), (d("1/2"), Dyadic::zero()));
        assert_eq!(expected_runs_half(&b("00")).zeros, d("3/4"));
        let r = expected_runs_half(&b("01"));
        assert_eq!((r.zeros, r.ones, r.total), (d("1/2"), d("1/2"), d("1")));
        assert_eq!(
            expected_runs_half(&BitSeq::zeros(16)).total,
            d("65535/65536")
        );
    }

    #[test]
    fn expected_runs_rejects_degenerate_q() {
        assert!(expected_runs(&b("01"), 0.0).is_err());
        assert!(expected_runs(&b("01"), 1.0).is_err());
        assert!(expected_runs(&b("01"), Dyadic::zero()).is_err());
    }

    #[test]
    fn generic_scalars_agree() {
        let x = b("0011101001110");
        let q = BigRational::new(1.into(), 3.into());
        let exact = expected_runs(&x, q).unwrap();
        let approx = expected_runs(&x, 1.0f64 / 3.0).unwrap();
        let single = expected_runs(&x, 1.0f32 / 3.0).unwrap();
        let exact_f = num_traits::ToPrimitive::to_f64(&exact.total).unwrap();
        assert!((exact_f - approx.total).abs() < 1e-12);
        assert!((exact_f - single.total as f64).abs() < 1e-4);
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(&b("01"));
        assert_eq!(
            (c.alpha, c.beta, c.gamma, c.delta),
            (Dyadic::zero(), Dyadic::zero(), d("1/2"), d("1/2"))
        );
        let c = coefficients(&b("0000000011111111"));
        assert_eq!((c.alpha, c.beta, c.gamma), (d("769/64"), d("247/16384"), d("65025/32768")));
        let c = coefficients(&b("0110100110010110"));
        assert_eq!(
            (c.alpha, c.beta, c.gamma),
            (d("170741/32768"), d("33761/32768"), d("15879/16384"))
        );
    }

    #[test]
    fn coefficients_match_naive_definition() {
        for s in ["", "1", "0110", "000111010", "1101001010111000111010100101"] {
            let x = b(s);
            assert_eq!(coefficients(&x), naive_coefficients(&x), "{s}");
        }
    }

    #[test]
    fn an_bn_examples() {
        assert_eq!(an_bn(2).unwrap(), (d("1/2"), d("1/2")));
        assert_eq!(an_bn(1).unwrap(), (Dyadic::zero(), Dyadic::zero()));
        assert_eq!(an_bn(16).unwrap(), (d("458753/32768"), d("65519/32768")));
        assert!(an_bn(0).is_err());
    }

    #[test]
    fn recursion_examples() {
        let c = coefficients(&b("01"));
        let (hat, check) = coefficient_recursion(&c);
        assert_eq!(hat.alpha, d("1/2"));
        assert_eq!(check.alpha, d("5/8"));
        assert_eq!(hat, coefficients(&b("0101")));
        assert_eq!(check, coefficients(&b("0110")));

        for n in [1usize, 3, 8, 20] {
            let (a_n, _) = an_bn(n).unwrap();
            let (a_2n, _) = an_bn(2 * n).unwrap();
            let (hat, _) = coefficients(&BitSeq::zeros(n)).recurse();
            assert_eq!(coefficients(&BitSeq::zeros(n)).alpha, a_n);
            assert_eq!(hat.alpha, a_2n);
        }
    }

    #[test]
    fn consistency_check() {
        assert!(coefficients(&b("0110100110010110")).is_consistent());
        assert!(coefficients(&b("")).is_consistent());
        let mut bad = coefficients(&b("0110"));
        bad.delta += Dyadic::half();
        assert!(!bad.is_consistent());
    }
}
