//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use decoy_core::data::{Attribute, Dataset, PublishedTable, Release, Schema, SchemaConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// Pr[lo ≤ X ≤ hi] for X ~ Binomial(n, num/den), exactly.
pub fn binomial_mass(n: u64, num: u64, den: u64, lo: u64, hi: u64) -> BigRational {
    let p = BigRational::new(num.into(), den.into());
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    for x in lo..=hi.min(n) {
        let term = BigRational::from_integer(binomial(n, x)) * pow(&p, x) * pow(&q, n - x);
        total += term;
    }
    total
}

pub fn pow(b: &BigRational, e: u64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= b;
    }
    out
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// One non-sensitive key column (unique per row) and one sensitive column
/// `s` over `domain`; ids equal row positions.
pub fn keyed_dataset(sa: &[&str], domain: &[&str]) -> Dataset {
    let schema = Arc::new(
        Schema::new(
            vec![
                Attribute {
                    name: "key".into(),
                    domain: (0..sa.len()).map(|i| format!("k{i}")).collect(),
                },
                Attribute {
                    name: "s".into(),
                    domain: domain.iter().map(|v| v.to_string()).collect(),
                },
            ],
            &["s"],
        )
        .unwrap(),
    );
    let codes: Vec<u32> = sa.iter().map(|v| schema.code(1, v).unwrap()).collect();
    let keys = (0..sa.len() as u32).collect();
    Dataset::new(schema, (0..sa.len() as u64).collect(), vec![keys, codes]).unwrap()
}

/// `dataset` with its sensitive column replaced.
pub fn with_sa(dataset: &Dataset, attr: usize, codes: Vec<u32>) -> Dataset {
    let mut columns = dataset.columns().to_vec();
    columns[attr] = codes;
    dataset.with_columns(columns).unwrap()
}

/// A candidate A' output assigning `codes` to the rows of `dataset`, rows
/// listed in reverse so that matching cannot rely on order.
pub fn candidate(dataset: &Dataset, attr: usize, codes: &[u32], l_prime: usize, release: Release) -> PublishedTable {
    let mut columns: Vec<Vec<u32>> = dataset.columns().to_vec();
    columns[attr] = codes.to_vec();
    for c in &mut columns {
        c.reverse();
    }
    PublishedTable::new(Arc::clone(dataset.schema()), columns, l_prime, release).unwrap()
}

/// A dataset with `x = (x0, x1, x2, x3)` tuples in the states
/// (¬P,¬s), (¬P,s), (P,¬s), (P,s) for P: `a = p` and s: `s = s0`. Non-s
/// tuples spread evenly over s1..s{m-1}.
pub fn state_dataset(x: [usize; 4], m: usize, id_seed: u64) -> Dataset {
    let schema = Arc::new(
        Schema::new(
            vec![
                Attribute {
                    name: "a".into(),
                    domain: vec!["n".into(), "p".into()],
                },
                Attribute {
                    name: "s".into(),
                    domain: (0..m).map(|i| format!("s{i}")).collect(),
                },
            ],
            &["s"],
        )
        .unwrap(),
    );
    let mut rows = Vec::new();
    for (state, &count) in x.iter().enumerate() {
        let a = if state >= 2 { "p" } else { "n" };
        for j in 0..count {
            let s = if state % 2 == 1 {
                "s0".to_string()
            } else {
                format!("s{}", 1 + j % (m - 1))
            };
            rows.push([a.to_string(), s]);
        }
    }
    Dataset::from_rows(schema, &rows, id_seed).unwrap()
}

/// A single-attribute dataset `s` where value `s0` appears `f` times and the
/// remaining `n - f` tuples spread over `m - 1` other values.
pub fn frequency_dataset(n: usize, f: usize, m: usize) -> Dataset {
    state_dataset([n - f, f, 0, 0], m, 1)
}

pub fn census(n: usize, seed: u64) -> Dataset {
    decoy_core::data::generate_synthetic(n, &SchemaConfig::census_like(), seed).unwrap()
}
