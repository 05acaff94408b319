//! Group structure and sub-vector gather/scatter.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error};
use crate::math;

/// A partition of `0..n` into non-empty, pairwise disjoint groups, each with a
/// positive weight `lambda_i`.
///
/// Groups are stored as sorted index lists, so they need not be contiguous.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    weights: Vec<f64>,
    dim: usize,
}

impl GroupPartition {
    pub fn new(groups: Vec<Vec<usize>>, weights: Vec<f64>) -> crate::Result<Self> {
        if groups.len() != weights.len() {
            return Err(Error::InvalidPartition("one weight per group is required"));
        }
        if groups.is_empty() {
            return Err(Error::InvalidPartition("at least one group is required"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidPartition("group weights must be positive and finite"));
        }
        let mut groups = groups;
        let dim: usize = groups.iter().map(Vec::len).sum();
        let mut seen = vec![false; dim];
        for g in groups.iter_mut() {
            if g.is_empty() {
                return Err(Error::InvalidPartition("groups must be non-empty"));
            }
            g.sort_unstable();
            for &j in g.iter() {
                if j >= dim || seen[j] {
                    return Err(Error::InvalidPartition(
                        "groups must be disjoint and cover 0..n exactly",
                    ));
                }
                seen[j] = true;
            }
        }
        Ok(Self {
            groups,
            weights,
            dim,
        })
    }

    /// Same groups, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> crate::Result<Self> {
        Self::new(self.groups.clone(), weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Copies `[x]_{G_i}` into a fresh vector.
    pub fn gather(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.groups[i].iter().map(|&j| x[j]).collect()
    }

    /// Writes `block` into the coordinates of group `i`.
    pub fn scatter(&self, i: usize, block: &[f64], x: &mut [f64]) {
        debug_assert_eq!(block.len(), self.groups[i].len());
        for (&j, &v) in self.groups[i].iter().zip(block) {
            x[j] = v;
        }
    }

    pub fn block_norm_sq(&self, i: usize, x: &[f64]) -> f64 {
        self.groups[i].iter().map(|&j| x[j] * x[j]).sum()
    }

    pub fn block_norm(&self, i: usize, x: &[f64]) -> f64 {
        math::sqrt(self.block_norm_sq(i, x))
    }

    /// A block is zero iff every entry is exactly `0.0`.
    pub fn block_is_zero(&self, i: usize, x: &[f64]) -> bool {
        self.groups[i].iter().all(|&j| x[j] == 0.0)
    }

    /// Number of groups whose block of `x` is exactly zero.
    pub fn zero_group_count(&self, x: &[f64]) -> usize {
        (0..self.num_groups())
            .filter(|&i| self.block_is_zero(i, x))
            .count()
    }

    /// Indicator per group of an exactly-zero block.
    pub fn zero_pattern(&self, x: &[f64]) -> Vec<bool> {
        (0..self.num_groups())
            .map(|i| self.block_is_zero(i, x))
            .collect()
    }

    pub(crate) fn check(&self, x: &[f64]) -> crate::Result<()> {
        check_dim(self.dim, x.len())
    }
}

/// An ordered set of group indices. Coordinates are recovered through the
/// owning [`GroupPartition`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupSet(Vec<usize>);

impl GroupSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary group ids; sorts and removes duplicates.
    pub fn from_ids(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn all(num_groups: usize) -> Self {
        Self((0..num_groups).collect())
    }

    pub(crate) fn push_sorted(&mut self, id: usize) {
        debug_assert!(self.0.last().is_none_or(|&l| l < id));
        self.0.push(id);
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Groups of `0..num_groups` not in `self`.
    pub fn complement(&self, num_groups: usize) -> Self {
        Self((0..num_groups).filter(|&i| !self.contains(i)).collect())
    }

    /// Coordinates covered by the set, group by group.
    pub fn coords(&self, partition: &GroupPartition) -> Vec<usize> {
        self.0
            .iter()
            .flat_map(|&i| partition.group(i).iter().copied())
            .collect()
    }

    /// Number of coordinates covered by the set.
    pub fn num_coords(&self, partition: &GroupPartition) -> usize {
        self.0.iter().map(|&i| partition.group(i).len()).sum()
    }

    /// `||[v]_I||_2` over the coordinates of the set; zero for the empty set.
    pub fn norm_of(&self, partition: &GroupPartition, v: &[f64]) -> f64 {
        math::sqrt(self.0.iter().map(|&i| partition.block_norm_sq(i, v)).sum())
    }

    /// `P_I(v)`: keeps the coordinates of the set, zeroes the rest.
    pub fn project(&self, partition: &GroupPartition, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for &i in &self.0 {
            for &j in partition.group(i) {
                out[j] = v[j];
            }
        }
        out
    }
}

impl FromIterator<usize> for GroupSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_ids(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_gap_and_bad_weights() {
        assert!(GroupPartition::new(vec![vec![0, 1], vec![1]], vec![1.0, 1.0]).is_err());
        assert!(GroupPartition::new(vec![vec![0], vec![2]], vec![1.0, 1.0]).is_err());
        assert!(GroupPartition::new(vec![vec![0], vec![]], vec![1.0, 1.0]).is_err());
        assert!(GroupPartition::new(vec![vec![0]], vec![0.0]).is_err());
        assert!(GroupPartition::new(vec![vec![0]], vec![-1.0]).is_err());
        assert!(GroupPartition::new(vec![vec![0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn non_contiguous_groups_gather_scatter() {
        let p = GroupPartition::new(vec![vec![2, 0], vec![1, 3]], vec![1.0, 2.0]).unwrap();
        assert_eq!(p.group(0), &[0, 2]);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(p.gather(0, &x), vec![1.0, 3.0]);
        let mut y = [0.0; 4];
        p.scatter(1, &[5.0, 6.0], &mut y);
        assert_eq!(y, [0.0, 5.0, 0.0, 6.0]);
        assert_eq!(p.block_norm(1, &[0.0, 3.0, 9.0, 4.0]), 5.0);
    }

    #[test]
    fn group_set_ops() {
        let p = GroupPartition::new(vec![vec![0, 1], vec![2], vec![3, 4]], vec![1.0; 3]).unwrap();
        let s: GroupSet = [2, 0].into_iter().collect();
        assert_eq!(s.ids(), &[0, 2]);
        assert_eq!(s.coords(&p), vec![0, 1, 3, 4]);
        assert_eq!(s.complement(3).ids(), &[1]);
        let v = [3.0, 4.0, 7.0, 0.0, 0.0];
        assert_eq!(s.norm_of(&p, &v), 5.0);
        assert_eq!(s.project(&p, &v), vec![3.0, 4.0, 0.0, 0.0, 0.0]);
        assert_eq!(GroupSet::new().norm_of(&p, &v), 0.0);
        assert_eq!(p.zero_group_count(&v), 1);
    }
}
