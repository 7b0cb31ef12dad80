//! Decoy-group construction.
//!
//! Tuples are hashed into buckets by sensitive value. Each iteration takes
//! the l' largest buckets and removes the smallest-id tuple from each to
//! form one group. Bucket-size ties are broken by the smaller value (`Ord`
//! on `V`, which callers make lexicographic). The result depends only on the
//! multiset of `(id, value)` pairs, never on row order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::{Error, Result};

/// A partition of the `(id, sensitive value)` projection into groups of
/// exactly `l_prime` tuples with pairwise distinct values.
///
/// Kept in memory only; the type deliberately implements no serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoyPartition<V> {
    l_prime: usize,
    groups: Vec<Vec<(u64, V)>>,
}

impl<V> DecoyPartition<V> {
    pub fn l_prime(&self) -> usize {
        self.l_prime
    }

    /// Groups in creation order; within a group, members in selection order
    /// (largest bucket first).
    pub fn groups(&self) -> &[Vec<(u64, V)>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Index of the group holding `id`.
    pub fn locate(&self, id: u64) -> Result<usize> {
        self.groups
            .iter()
            .position(|g| g.iter().any(|(i, _)| *i == id))
            .ok_or(Error::UnknownId(id))
    }

    /// Map from id to group index, for bulk lookups.
    pub fn group_index(&self) -> HashMap<u64, usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, members)| members.iter().map(move |(id, _)| (*id, g)))
            .collect()
    }

    /// The decoy values of group `group`.
    pub fn decoys(&self, group: usize) -> impl Iterator<Item = &V> {
        self.groups[group].iter().map(|(_, v)| v)
    }

    pub fn map_values<W>(self, mut f: impl FnMut(V) -> W) -> DecoyPartition<W> {
        DecoyPartition {
            l_prime: self.l_prime,
            groups: self
                .groups
                .into_iter()
                .map(|g| g.into_iter().map(|(id, v)| (id, f(v))).collect())
                .collect(),
        }
    }
}

/// Partitions `rows` into decoy groups of size `l_prime`.
///
/// Fails when some iteration finds fewer than `l_prime` non-empty buckets,
/// which happens exactly when the input is not eligible.
pub fn partition<V: Ord + Clone>(rows: &[(u64, V)], l_prime: usize) -> Result<DecoyPartition<V>> {
    if l_prime == 0 {
        return Err(Error::InvalidParameter("l' must be at least 1".into()));
    }
    if !rows.len().is_multiple_of(l_prime) {
        return Err(Error::Ineligible {
            l_prime,
            reason: format!("{} tuples is not a multiple of l'", rows.len()),
        });
    }

    let mut by_value: BTreeMap<&V, Vec<u64>> = BTreeMap::new();
    for (id, value) in rows {
        by_value.entry(value).or_default().push(*id);
    }
    let mut buckets: Vec<(V, Vec<u64>)> = by_value
        .into_iter()
        .map(|(v, mut ids)| {
            // popped from the back, so smallest id last
            ids.sort_unstable_by(|a, b| b.cmp(a));
            (v.clone(), ids)
        })
        .collect();

    // (size, smaller value first on ties, bucket index)
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = buckets
        .iter()
        .enumerate()
        .map(|(i, (_, ids))| (ids.len(), Reverse(i)))
        .collect();

    let n_groups = rows.len() / l_prime;
    let mut groups = Vec::with_capacity(n_groups);
    let mut picked = Vec::with_capacity(l_prime);
    for iteration in 1..=n_groups {
        picked.clear();
        while picked.len() < l_prime {
            match heap.pop() {
                Some(entry) => picked.push(entry),
                None => {
                    return Err(Error::PartitionFailed {
                        iteration,
                        available: picked.len(),
                        needed: l_prime,
                    })
                }
            }
        }
        let mut group = Vec::with_capacity(l_prime);
        for &(size, Reverse(b)) in &picked {
            let (value, ids) = &mut buckets[b];
            let id = ids.pop().expect("heap tracks bucket sizes");
            group.push((id, value.clone()));
            if size > 1 {
                heap.push((size - 1, Reverse(b)));
            }
        }
        groups.push(group);
    }
    Ok(DecoyPartition { l_prime, groups })
}
