//! Sanitization mechanisms: decoy-group randomization (A'), whole-domain
//! randomization (A), Anatomy publication, and Laplace query answering.

mod a_prime;
mod anatomy;
mod global;
mod laplace;
mod oracle;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use a_prime::{anonymize_a_prime, anonymize_a_prime_with, decoy_partitions, DecoyRandomizer};
pub use anatomy::{anonymize_anatomy, AnatomyPublication};
pub use global::{anonymize_global_a, anonymize_global_a_with};
pub use laplace::{laplace_answer, Laplace};
pub use oracle::{output_probability, output_probability_global_a};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    APrime,
    GlobalA,
    Anatomy,
}

/// Parameters of one anonymization run.
///
/// JSON form: `{"mechanism":"a_prime","l_prime":5,"seed":42}`; `p` is an
/// optional `[numerator, denominator]` pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizerConfig {
    pub mechanism: MechanismKind,
    pub l_prime: usize,
    pub seed: u64,
    /// Retention probability; `None` means 1/l'.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Ratio<u64>>,
    /// Permits p ≠ 1/l' for A'. Such releases do not carry the
    /// zero-differential guarantee; meant for reproducing negative results.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unsafe_test_mode: bool,
}

impl RandomizerConfig {
    pub fn a_prime(l_prime: usize, seed: u64) -> Self {
        RandomizerConfig {
            mechanism: MechanismKind::APrime,
            l_prime,
            seed,
            p: None,
            unsafe_test_mode: false,
        }
    }

    /// A' with an arbitrary retention probability, unsafe test mode on.
    pub fn a_prime_unsafe(l_prime: usize, p: Ratio<u64>, seed: u64) -> Self {
        RandomizerConfig {
            p: Some(p),
            unsafe_test_mode: true,
            ..Self::a_prime(l_prime, seed)
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// The validated retention probability p.
    pub fn retention(&self) -> Result<Ratio<u64>> {
        if self.l_prime == 0 {
            return Err(Error::InvalidParameter("l' must be at least 1".into()));
        }
        let uniform = Ratio::new(1, self.l_prime as u64);
        let p = self.p.unwrap_or(uniform);
        validate_probability(p)?;
        if self.mechanism == MechanismKind::APrime && p != uniform && !self.unsafe_test_mode {
            return Err(Error::UnsafeProbability { p: p.to_string() });
        }
        Ok(p)
    }
}

pub(crate) fn validate_probability(p: Ratio<u64>) -> Result<()> {
    if *p.denom() == 0 || p > Ratio::from_integer(1) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    if *p.denom() > u32::MAX as u64 {
        return Err(Error::InvalidParameter(format!(
            "probability denominator of {p} is too large"
        )));
    }
    Ok(())
}

/// Keeps the true value with probability `p`, otherwise picks one of
/// `others` alternatives uniformly. Returns `None` for "keep" and
/// `Some(j)` for the j-th alternative. Exact for rational `p`.
pub(crate) fn draw<R: Rng>(rng: &mut R, p: Ratio<u64>, others: usize) -> Option<usize> {
    if others == 0 {
        return None;
    }
    let (num, den) = (*p.numer(), *p.denom());
    let k = others as u64;
    let u = rng.random_range(0..den * k);
    if u < num * k {
        None
    } else {
        Some(((u - num * k) / (den - num)) as usize)
    }
}
