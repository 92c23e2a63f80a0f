//! Model parameters: breeding potential, offspring law, derived exponents.
//!
//! All types are immutable once validated and safe to share across workers.

use serde::Serialize;

use crate::{Error, Real, Result, Scalar};

/// Tolerance for probability normalisation and mean consistency checks.
const PMF_TOL: f64 = 1e-12;

/// Finite-support law of the offspring increment `A` on `{1, 2, ...}`.
///
/// A branch event replaces one particle by `1 + A` particles, so the
/// population never decreases. Finite support keeps `E[A log A]` finite and
/// sampling exact.
#[derive(Debug, Clone, Serialize)]
pub struct OffspringLaw<S: Scalar = Real> {
    pmf: Vec<(u32, S)>,
}

impl<S: Scalar> OffspringLaw<S> {
    /// Build a law from `(k, prob)` atoms. Probabilities must sum to one
    /// within `1e-12` and all support points must be `>= 1`.
    pub fn new(pmf: Vec<(u32, S)>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidParams("offspring law has empty support".into()));
        }
        for &(k, prob) in &pmf {
            if k < 1 {
                return Err(Error::InvalidParams(format!(
                    "offspring support point {k} < 1"
                )));
            }
            if !(prob >= S::zero() && prob <= S::one()) {
                return Err(Error::InvalidParams(format!(
                    "offspring probability {prob} outside [0, 1]"
                )));
            }
        }
        let total: S = pmf.iter().map(|&(_, prob)| prob).sum();
        if (total - S::one()).abs() > S::lit(PMF_TOL) {
            return Err(Error::InvalidParams(format!(
                "offspring probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { pmf })
    }

    /// Deterministic law `A = k` (binary branching is `constant(1)`).
    pub fn constant(k: u32) -> Self {
        Self::new(vec![(k, S::one())]).expect("constant law is always valid")
    }

    pub fn atoms(&self) -> &[(u32, S)] {
        &self.pmf
    }

    /// `E[A]`.
    pub fn mean(&self) -> S {
        self.pmf
            .iter()
            .map(|&(k, prob)| S::lit(k as f64) * prob)
            .sum()
    }

    /// `E[A log A]`; finite by construction, recorded for reporting.
    pub fn mean_a_log_a(&self) -> S {
        self.pmf
            .iter()
            .map(|&(k, prob)| S::lit(k as f64) * S::lit((k as f64).ln()) * prob)
            .sum()
    }

    /// Inverse-CDF sample from a uniform `u` in `[0, 1)`.
    pub fn sample(&self, u: S) -> u32 {
        let mut acc = S::zero();
        for &(k, prob) in &self.pmf {
            acc = acc + prob;
            if u < acc {
                return k;
            }
        }
        // Guard against accumulated rounding at u ≈ 1.
        self.pmf.last().unwrap().0
    }
}

/// Validated model constants: branching intensity `beta`, potential exponent
/// `p` in `[0, 2)`, offspring mean `m`, and the offspring law itself.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialParams<S: Scalar = Real> {
    beta: S,
    p: S,
    m: S,
    offspring: OffspringLaw<S>,
}

impl<S: Scalar> PotentialParams<S> {
    /// Validate and freeze a parameter set. Fails with the violated
    /// invariant: `beta <= 0`, `p` outside `[0, 2)`, or `m` differing from
    /// the offspring-law mean.
    pub fn new(beta: S, p: S, m: S, offspring: OffspringLaw<S>) -> Result<Self> {
        if !(beta > S::zero()) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta = {beta} must be > 0")));
        }
        if !(p >= S::zero() && p < S::lit(2.0)) {
            return Err(Error::InvalidParams(format!("p = {p} out of [0,2)")));
        }
        if !(m >= S::one()) {
            return Err(Error::InvalidParams(format!("m = {m} must be >= 1")));
        }
        let law_mean = offspring.mean();
        if (m - law_mean).abs() > S::lit(PMF_TOL) {
            return Err(Error::InvalidParams(format!(
                "mean mismatch: m = {m} but offspring law has mean {law_mean}"
            )));
        }
        let params = Self { beta, p, m, offspring };
        // Consistency of the derived exponents: (2+p)/(2-p) vs 2q - 1.
        let direct = (S::lit(2.0) + p) / (S::lit(2.0) - p);
        if (params.growth_exponent() - direct).abs() > S::lit(1e-13) * direct.abs() {
            return Err(Error::InvalidParams(
                "derived exponent q inconsistent with (2+p)/(2-p)".into(),
            ));
        }
        Ok(params)
    }

    /// Convenience constructor with `m` taken from the law.
    pub fn from_law(beta: S, p: S, offspring: OffspringLaw<S>) -> Result<Self> {
        let m = offspring.mean();
        Self::new(beta, p, m, offspring)
    }

    /// Binary branching (`A = 1`) with the given intensity and exponent.
    pub fn binary(beta: S, p: S) -> Result<Self> {
        Self::from_law(beta, p, OffspringLaw::constant(1))
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn p(&self) -> S {
        self.p
    }

    pub fn m(&self) -> S {
        self.m
    }

    pub fn offspring(&self) -> &OffspringLaw<S> {
        &self.offspring
    }

    /// `m * beta`, the coefficient in the growth term of the rate functional.
    pub fn mbeta(&self) -> S {
        self.m * self.beta
    }

    /// Space rescaling exponent `q = 2 / (2 - p) >= 1`.
    pub fn q(&self) -> S {
        S::lit(2.0) / (S::lit(2.0) - self.p)
    }

    /// Growth exponent `(2 + p) / (2 - p) = 2q - 1` of `log` population sizes.
    pub fn growth_exponent(&self) -> S {
        S::lit(2.0) * self.q() - S::one()
    }

    /// Instantaneous branching rate `beta |x|^p` at position `x`, with the
    /// convention `|x|^0 = 1` for every `x` (so `p = 0` is the constant-rate
    /// case exactly).
    pub fn branch_rate(&self, x: S) -> S {
        self.beta * self.abs_pow(x)
    }

    /// `m * beta * |x|^p`, the local growth rate of expected particle counts.
    pub fn growth_rate(&self, x: S) -> S {
        self.m * self.branch_rate(x)
    }

    /// `|x|^p` with the `p = 0` convention.
    pub fn abs_pow(&self, x: S) -> S {
        if self.p == S::zero() {
            S::one()
        } else {
            x.abs().powf(self.p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn accepts_binary_reference_model() {
        let params = PotentialParams::new(1.0, 1.0, 1.0, OffspringLaw::constant(1)).unwrap();
        assert_eq!(params.mbeta(), 1.0);
        assert_eq!(params.q(), 2.0);
        assert_eq!(params.growth_exponent(), 3.0);
    }

    #[test]
    fn rejects_critical_exponent() {
        let err = PotentialParams::new(1.0, 2.0, 1.0, OffspringLaw::<f64>::constant(1))
            .unwrap_err()
            .to_string();
        assert!(err.contains("out of [0,2)"), "{err}");
    }

    #[test]
    fn rejects_mean_mismatch() {
        let err = PotentialParams::new(1.0, 1.0, 2.0, OffspringLaw::<f64>::constant(1))
            .unwrap_err()
            .to_string();
        assert!(err.contains("mean mismatch"), "{err}");
    }

    #[test]
    fn rejects_negative_p_and_beta() {
        assert!(PotentialParams::binary(1.0, -0.5).is_err());
        assert!(PotentialParams::binary(0.0, 1.0).is_err());
        assert!(PotentialParams::binary(-2.0, 1.0).is_err());
    }

    #[test]
    fn branch_rate_examples() {
        let p1 = PotentialParams::binary(1.0, 1.0).unwrap();
        assert_eq!(p1.branch_rate(-2.0), 2.0);

        let p0 = PotentialParams::binary(3.0, 0.0).unwrap();
        assert_eq!(p0.branch_rate(0.0), 3.0);

        let p15 = PotentialParams::binary(1.0, 1.5).unwrap();
        assert_relative_eq!(p15.branch_rate(4.0), 8.0, max_relative = 1e-15);
    }

    #[test]
    fn branch_rate_even_and_monotone_in_abs() {
        let params = PotentialParams::binary(0.7, 1.3).unwrap();
        let xs: [f64; 7] = [-3.0, -1.5, -0.2, 0.0, 0.4, 1.1, 2.8];
        for &x in &xs {
            assert_eq!(params.branch_rate(x), params.branch_rate(-x));
        }
        let mut sorted: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            assert!(params.branch_rate(w[0]) <= params.branch_rate(w[1]));
        }
    }

    #[test]
    fn offspring_law_checks() {
        assert!(OffspringLaw::<f64>::new(vec![]).is_err());
        assert!(OffspringLaw::new(vec![(0u32, 1.0f64)]).is_err());
        assert!(OffspringLaw::new(vec![(1u32, 0.5f64), (2, 0.4)]).is_err());
        let law = OffspringLaw::new(vec![(1u32, 0.5f64), (3, 0.5)]).unwrap();
        assert_relative_eq!(law.mean(), 2.0);
        assert_relative_eq!(law.mean_a_log_a(), 0.5 * 3.0 * 3.0f64.ln());
        assert_eq!(law.sample(0.49), 1);
        assert_eq!(law.sample(0.51), 3);
        assert_eq!(law.sample(0.9999999), 3);
    }
}
