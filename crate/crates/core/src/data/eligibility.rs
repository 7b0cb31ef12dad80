use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityReport {
    pub eligible: bool,
    /// Largest frequency of any sensitive value (over all sensitive
    /// attributes) in the returned dataset.
    pub max_sa_frequency: usize,
    pub required_deletions: usize,
    pub deleted_ids: Vec<u64>,
}

/// True when `n` is a multiple of `l_prime` and no sensitive value occurs
/// more than `n / l_prime` times.
pub fn is_eligible(dataset: &Dataset, l_prime: usize) -> bool {
    let n = dataset.len();
    l_prime >= 1
        && n.is_multiple_of(l_prime)
        && max_frequency(dataset).0 * l_prime <= n
}

/// (max frequency, attribute, code) of the most frequent sensitive bucket.
/// Ties go to the earlier attribute, then the lexicographically smaller value.
fn max_frequency(dataset: &Dataset) -> (usize, usize, u32) {
    let schema = dataset.schema();
    let mut best: Option<(usize, usize, u32)> = None;
    for &attr in schema.sensitive() {
        for (code, &count) in dataset.value_counts(attr).iter().enumerate() {
            let code = code as u32;
            let replace = match best {
                None => true,
                Some((bc, ba, bcode)) => {
                    count > bc
                        || (count == bc
                            && ba == attr
                            && schema.value(attr, code) < schema.value(ba, bcode))
                }
            };
            if replace {
                best = Some((count, attr, code));
            }
        }
    }
    best.unwrap_or((0, 0, 0))
}

/// Deletes at most `l_prime - 1` tuples so that the dataset becomes
/// eligible for decoy groups of size `l_prime`.
///
/// Each step removes the largest-id tuple from the currently most frequent
/// sensitive bucket. If eligibility is still not reached after `l_prime - 1`
/// deletions, the original dataset is returned with `eligible = false`.
pub fn enforce_eligibility(dataset: &Dataset, l_prime: usize) -> (Dataset, EligibilityReport) {
    let l_prime = l_prime.max(1);
    let mut current = dataset.clone();
    let mut deleted = Vec::new();
    loop {
        if is_eligible(&current, l_prime) {
            let report = EligibilityReport {
                eligible: true,
                max_sa_frequency: max_frequency(&current).0,
                required_deletions: deleted.len(),
                deleted_ids: deleted,
            };
            return (current, report);
        }
        if deleted.len() >= l_prime - 1 || current.is_empty() {
            let report = EligibilityReport {
                eligible: false,
                max_sa_frequency: max_frequency(dataset).0,
                required_deletions: 0,
                deleted_ids: Vec::new(),
            };
            return (dataset.clone(), report);
        }
        let (_, attr, code) = max_frequency(&current);
        let column = current.column(attr);
        let victim = (0..current.len())
            .filter(|&r| column[r] == code)
            .max_by_key(|&r| current.ids()[r])
            .expect("most frequent bucket is non-empty");
        deleted.push(current.ids()[victim]);
        let keep: Vec<usize> = (0..current.len()).filter(|&r| r != victim).collect();
        current = current.select_rows(&keep);
    }
}
