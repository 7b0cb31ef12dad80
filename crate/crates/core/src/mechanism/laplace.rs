use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Laplace noise with the given scale b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Laplace {
    scale: f64,
}

impl Laplace {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Laplace scale must be positive, got {scale}"
            )));
        }
        Ok(Laplace { scale })
    }

    /// Scale Σ Δf_i / ε for `m_queries` counting queries (Δf_i = 1).
    pub fn for_counting_queries(m_queries: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if m_queries == 0 {
            return Err(Error::InvalidParameter("m_queries must be at least 1".into()));
        }
        Laplace::new(m_queries as f64 / epsilon)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Inverse-CDF sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        // u uniform on (-1/2, 1/2); open at -1/2 so the log stays finite
        let u: f64 = loop {
            let u = rng.random::<f64>() - 0.5;
            if u > -0.5 {
                break u;
            }
        };
        -self.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

/// `true_count` plus one seeded Laplace draw of scale `m_queries / epsilon`.
pub fn laplace_answer(true_count: u64, m_queries: usize, epsilon: f64, seed: u64) -> Result<f64> {
    let noise = Laplace::for_counting_queries(m_queries, epsilon)?;
    Ok(true_count as f64 + noise.sample(&mut seed::rng(seed, seed::LAPLACE, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_for_the_reported_settings() {
        assert_eq!(Laplace::for_counting_queries(100, 0.01).unwrap().scale(), 10_000.0);
        assert_eq!(Laplace::for_counting_queries(100, 0.05).unwrap().scale(), 2_000.0);
    }

    #[test]
    fn mean_absolute_deviation_equals_scale() {
        let lap = Laplace::for_counting_queries(100, 0.05).unwrap();
        let mut rng = seed::rng(4, seed::LAPLACE, 0);
        let n = 10_000;
        let mean_abs = (0..n).map(|_| lap.sample(&mut rng).abs()).sum::<f64>() / n as f64;
        assert!((mean_abs / lap.scale() - 1.0).abs() < 0.05, "{mean_abs}");
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(laplace_answer(10, 1, 0.0, 1).is_err());
        assert!(laplace_answer(10, 1, -1.0, 1).is_err());
        assert!(laplace_answer(10, 0, 1.0, 1).is_err());
    }

    #[test]
    fn seeded_answers_repeat() {
        let a = laplace_answer(50, 10, 0.1, 3).unwrap();
        assert_eq!(a, laplace_answer(50, 10, 0.1, 3).unwrap());
        assert_ne!(a, laplace_answer(50, 10, 0.1, 4).unwrap());
    }
}
