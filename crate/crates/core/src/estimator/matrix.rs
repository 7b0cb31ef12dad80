use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts over the K = 2^(w+1) conjunctive states of a query.
///
/// State bits: the predicate P is the most significant bit (bit w) and the
/// i-th queried sensitive attribute (1-based) is bit w-i. State K-1 is
/// "P and every sensitive condition holds".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        let k = counts.len();
        if k < 2 || !k.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "state vector length {k} is not 2^(w+1) for w >= 0"
            )));
        }
        if let Some(c) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid state count {c}")));
        }
        Ok(StateVector(counts))
    }

    pub fn counts(&self) -> &[f64] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of sensitive conditions encoded.
    pub fn w(&self) -> usize {
        self.0.len().trailing_zeros() as usize - 1
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Mass of the states where sensitive condition `i` (1-based) holds.
    pub fn marginal(&self, i: usize) -> f64 {
        marginal(&self.0, self.w(), i)
    }

    /// The all-positive state K-1.
    pub fn target(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

pub(crate) fn marginal(x: &[f64], w: usize, i: usize) -> f64 {
    let bit = 1usize << (w - i);
    x.iter()
        .enumerate()
        .filter(|(k, _)| k & bit != 0)
        .map(|(_, v)| v)
        .sum()
}

/// Index of the state with predicate bit `p` and sensitive bits `sa`.
pub fn state_index(p: bool, sa: &[bool]) -> usize {
    sa.iter().fold(p as usize, |acc, &b| acc << 1 | b as usize)
}

/// How the chance that a tuple not holding s is published as s is modelled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoyModel {
    /// a01 = f_s/N: s is taken to be among a tuple's decoys with
    /// probability f_s·l'/N.
    Simple,
    /// a01 = f_s(l'-1) / (l'(N-f_s)): the exact share of non-s tuples that
    /// sit in a group holding s, times 1/l'.
    #[default]
    Exact,
}

impl DecoyModel {
    /// Probability that a tuple without s is published with s.
    pub fn rate(self, f: f64, n: f64, l_prime: usize) -> f64 {
        let a = match self {
            DecoyModel::Simple => f / n,
            DecoyModel::Exact => {
                let l = l_prime as f64;
                if n - f > 0.0 {
                    f * (l - 1.0) / (l * (n - f))
                } else {
                    0.0
                }
            }
        };
        if a.is_finite() {
            a.clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Square row-major matrix of state transition probabilities a[i][j]
/// (state i in D to state j in D').
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not form a {size}x{size} matrix",
                entries.len()
            )));
        }
        Ok(TransitionMatrix { size, entries })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1.0;
        }
        TransitionMatrix { size, entries }
    }

    /// [[1-a, a], [(l'-1)/l', 1/l']] for one sensitive condition.
    pub fn factor(a: f64, l_prime: usize) -> Self {
        let keep = 1.0 / l_prime as f64;
        TransitionMatrix {
            size: 2,
            entries: vec![1.0 - a, a, 1.0 - keep, keep],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn kron(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let (a, b) = (self.size, other.size);
        let size = a * b;
        let mut entries = vec![0.0; size * size];
        for i in 0..a {
            for j in 0..a {
                let s = self.get(i, j);
                for k in 0..b {
                    for l in 0..b {
                        entries[(i * b + k) * size + j * b + l] = s * other.get(k, l);
                    }
                }
            }
        }
        TransitionMatrix { size, entries }
    }
}

fn check_inputs(x: &StateVector, l_prime: usize, n: usize, w: usize) -> Result<()> {
    if x.len() != 1 << (w + 1) {
        return Err(Error::InvalidParameter(format!(
            "state vector has {} entries but w={w} needs {}",
            x.len(),
            1usize << (w + 1)
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if l_prime == 0 {
        return Err(Error::InvalidParameter("l' must be at least 1".into()));
    }
    for i in 1..=w {
        let f = x.marginal(i);
        if f > n as f64 {
            return Err(Error::InvalidParameter(format!(
                "frequency {f} of sensitive condition {i} exceeds N={n}"
            )));
        }
    }
    Ok(())
}

/// Per-condition 2x2 factors M_1..M_w for the frequencies in `x`.
pub(crate) fn factors(x: &[f64], l_prime: usize, n: f64, w: usize, model: DecoyModel) -> Vec<[f64; 4]> {
    let keep = 1.0 / l_prime as f64;
    (1..=w)
        .map(|i| {
            let a = model.rate(marginal(x, w, i), n, l_prime);
            [1.0 - a, a, 1.0 - keep, keep]
        })
        .collect()
}

/// The 4x4 single-condition matrix with a01 = a23 = (x1+x3)/N.
pub fn build_single_sa_matrix(x: &StateVector, l_prime: usize, n: usize) -> Result<TransitionMatrix> {
    build_single_sa_matrix_with_model(x, l_prime, n, DecoyModel::Simple)
}

pub fn build_single_sa_matrix_with_model(
    x: &StateVector,
    l_prime: usize,
    n: usize,
    model: DecoyModel,
) -> Result<TransitionMatrix> {
    check_inputs(x, l_prime, n, 1)?;
    let f = x.counts()[1] + x.counts()[3];
    let a = model.rate(f, n as f64, l_prime);
    let back = (l_prime as f64 - 1.0) / l_prime as f64;
    let keep = 1.0 / l_prime as f64;
    #[rustfmt::skip]
    let entries = vec![
        1.0 - a, a,    0.0,     0.0,
        back,    keep, 0.0,     0.0,
        0.0,     0.0,  1.0 - a, a,
        0.0,     0.0,  back,    keep,
    ];
    TransitionMatrix::new(4, entries)
}

/// M = M0 ⊗ M1 ⊗ … ⊗ Mw with M0 the 2x2 identity (the predicate never
/// changes) and M_i built from the i-th marginal frequency of `x`.
pub fn build_multi_sa_matrix(x: &StateVector, l_prime: usize, n: usize, w: usize) -> Result<TransitionMatrix> {
    build_multi_sa_matrix_with_model(x, l_prime, n, w, DecoyModel::Simple)
}

pub fn build_multi_sa_matrix_with_model(
    x: &StateVector,
    l_prime: usize,
    n: usize,
    w: usize,
    model: DecoyModel,
) -> Result<TransitionMatrix> {
    check_inputs(x, l_prime, n, w)?;
    Ok(factors(x.counts(), l_prime, n as f64, w, model)
        .into_iter()
        .fold(TransitionMatrix::identity(2), |m, f| {
            m.kron(&TransitionMatrix { size: 2, entries: f.to_vec() })
        }))
}
