//! Analytic utility and privacy guarantees for A' releases.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// T_f = sqrt(1/(l'·ε²·T_E)) with its reporting forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityThreshold {
    pub real: f64,
    /// Round-to-nearest, as usually reported.
    pub rounded: u64,
    /// The smallest integer count that is guaranteed to meet T_E.
    pub ceil: u64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Frequency above which the relative error exceeds `varepsilon` with
/// probability at most `t_e`.
pub fn utility_threshold(l_prime: usize, varepsilon: f64, t_e: f64) -> Result<UtilityThreshold> {
    if l_prime == 0 {
        return Err(Error::InvalidParameter("l' must be at least 1".into()));
    }
    check_positive("epsilon", varepsilon)?;
    check_positive("T_E", t_e)?;
    if t_e > 1.0 {
        return Err(Error::InvalidParameter(format!("T_E must be at most 1, got {t_e}")));
    }
    let real = (1.0 / (l_prime as f64 * varepsilon * varepsilon * t_e)).sqrt();
    Ok(UtilityThreshold {
        real,
        rounded: real.round() as u64,
        ceil: snap(real).ceil() as u64,
    })
}

/// min(1, 1/(l'·ε²·f_s²)).
pub fn error_bound(l_prime: usize, varepsilon: f64, f_s: u64) -> f64 {
    let b = 1.0 / (l_prime as f64 * varepsilon * varepsilon * (f_s as f64).powi(2));
    if b.is_nan() {
        1.0
    } else {
        b.min(1.0)
    }
}

/// Chebyshev with the variance of f'_s itself: min(1, (l'-1)/(l'·ε²·f_s)).
pub fn variance_bound(l_prime: usize, varepsilon: f64, f_s: u64) -> f64 {
    let l = l_prime as f64;
    let b = (l - 1.0) / (l * varepsilon * varepsilon * f_s as f64);
    if b.is_nan() {
        1.0
    } else {
        b.min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyTail {
    /// Lowest published count inside the window, ⌈(1-ε)f_s⌉.
    pub lo: u64,
    /// Highest published count inside the window, ⌊(1+ε)f_s⌋.
    pub hi: u64,
    /// Pr[lo ≤ f'_s ≤ hi] for f'_s ~ Binomial(l'·f_s, 1/l').
    pub in_range: f64,
    /// T_P = 1 - in_range.
    pub tail: f64,
}

/// Rounds values within 1e-9 of an integer onto it, so that windows such as
/// 0.7·10 are not pushed off by representation error.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 {
        r
    } else {
        v
    }
}

/// Probability that the published count of a value with true frequency
/// `f_s` deviates from it by more than `varepsilon·f_s`.
pub fn privacy_tail(f_s: u64, l_prime: usize, varepsilon: f64) -> Result<PrivacyTail> {
    if f_s == 0 {
        return Err(Error::InvalidParameter("f_s must be at least 1".into()));
    }
    if l_prime == 0 {
        return Err(Error::InvalidParameter("l' must be at least 1".into()));
    }
    if !(varepsilon.is_finite() && varepsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be non-negative, got {varepsilon}"
        )));
    }
    let f = f_s as f64;
    let n = l_prime as u64 * f_s;
    let lo = snap((1.0 - varepsilon) * f).ceil().max(0.0) as u64;
    let hi = (snap((1.0 + varepsilon) * f).floor() as u64).min(n);

    let in_range = if l_prime == 1 {
        // f'_s = f_s surely
        if (lo..=hi).contains(&f_s) {
            1.0
        } else {
            0.0
        }
    } else {
        let ln_p = -(l_prime as f64).ln();
        let ln_q = ((l_prime - 1) as f64 / l_prime as f64).ln();
        let mut sum = Neumaier::default();
        for x in lo..=hi {
            sum.add((ln_binomial(n, x) + x as f64 * ln_p + (n - x) as f64 * ln_q).exp());
        }
        sum.total().clamp(0.0, 1.0)
    };
    Ok(PrivacyTail {
        lo,
        hi,
        in_range,
        tail: (1.0 - in_range).max(0.0),
    })
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The parameters of a combined utility and privacy statement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeParams {
    pub l_prime: usize,
    /// Relative error ε.
    pub varepsilon: f64,
    /// Probability threshold T_E for errors above ε.
    pub t_e: f64,
    pub t_f: UtilityThreshold,
    /// T_P for a value whose frequency equals the reported T_f.
    pub t_p: f64,
}

impl GuaranteeParams {
    pub fn new(l_prime: usize, varepsilon: f64, t_e: f64) -> Result<Self> {
        let t_f = utility_threshold(l_prime, varepsilon, t_e)?;
        let t_p = privacy_tail(t_f.rounded.max(1), l_prime, varepsilon)?.tail;
        Ok(GuaranteeParams {
            l_prime,
            varepsilon,
            t_e,
            t_f,
            t_p,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeRow {
    pub f_s: u64,
    pub chebyshev_bound: f64,
    pub exact_tail: f64,
}

/// Chebyshev bound and exact binomial tail for every f_s in `f_range`.
pub fn guarantee_tables(
    l_prime: usize,
    varepsilon: f64,
    f_range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<GuaranteeRow>> {
    if *f_range.start() == 0 || f_range.is_empty() {
        return Err(Error::InvalidParameter(
            "frequency range must be non-empty and start at 1 or more".into(),
        ));
    }
    f_range
        .map(|f_s| {
            Ok(GuaranteeRow {
                f_s,
                chebyshev_bound: error_bound(l_prime, varepsilon, f_s),
                exact_tail: privacy_tail(f_s, l_prime, varepsilon)?.tail,
            })
        })
        .collect()
}

/// CSV with columns `f_s,chebyshev_bound,exact_tail`.
pub fn write_guarantee_csv<W: Write>(rows: &[GuaranteeRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<guarantee table>", e))?;
    Ok(())
}
