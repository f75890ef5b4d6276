use alloc::vec::Vec;

use crate::error::{Error, Result};

/// For each process `i`, the processes whose intensity depends on the history
/// of `i` (its out-neighborhood). Firing `i` requires refreshing exactly
/// `{i} ∪ neighbors(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    neighbors: Vec<Vec<usize>>,
    update_sets: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn new(neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let m = neighbors.len();
        let mut cleaned = Vec::with_capacity(m);
        let mut update_sets = Vec::with_capacity(m);
        for (i, list) in neighbors.into_iter().enumerate() {
            let mut list = list;
            if let Some(&bad) = list.iter().find(|&&j| j >= m) {
                return Err(Error::IndexOutOfRange { index: bad, len: m });
            }
            list.sort_unstable();
            list.dedup();
            let mut set = list.clone();
            if let Err(pos) = set.binary_search(&i) {
                set.insert(pos, i);
            }
            cleaned.push(list);
            update_sets.push(set);
        }
        Ok(Self {
            neighbors: cleaned,
            update_sets,
        })
    }

    /// No process depends on any other.
    pub fn isolated(m: usize) -> Self {
        Self::new(alloc::vec![Vec::new(); m]).expect("valid by construction")
    }

    /// Every process depends on every other one (no self-loops).
    pub fn complete(m: usize) -> Self {
        let n = (0..m)
            .map(|i| (0..m).filter(|&j| j != i).collect())
            .collect();
        Self::new(n).expect("valid by construction")
    }

    /// Build from in-neighborhoods: `inputs[i]` lists the processes whose
    /// events excite `i`. The result is the transpose.
    pub fn from_inputs(inputs: &[Vec<usize>]) -> Result<Self> {
        let m = inputs.len();
        let mut out = alloc::vec![Vec::new(); m];
        for (i, list) in inputs.iter().enumerate() {
            for &j in list {
                if j >= m {
                    return Err(Error::IndexOutOfRange { index: j, len: m });
                }
                out[j].push(i);
            }
        }
        Self::new(out)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.neighbors
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
    }

    /// `{i} ∪ neighbors(i)`, sorted and deduplicated.
    pub fn update_set(&self, i: usize) -> Result<&[usize]> {
        self.update_sets
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
    }

    pub fn max_out_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.neighbors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle() {
        let g = DependencyGraph::new(vec![vec![1], vec![0]]).unwrap();
        assert_eq!(g.update_set(0).unwrap(), &[0, 1]);
    }

    #[test]
    fn empty_neighborhood_keeps_self() {
        let g = DependencyGraph::new(vec![vec![], vec![]]).unwrap();
        assert_eq!(g.update_set(0).unwrap(), &[0]);
    }

    #[test]
    fn complete_three() {
        let g = DependencyGraph::complete(3);
        assert_eq!(g.update_set(2).unwrap(), &[0, 1, 2]);
    }

    #[test]
    fn self_loop_and_duplicates_are_deduplicated() {
        let g = DependencyGraph::new(vec![vec![0, 0, 1, 1], vec![]]).unwrap();
        assert_eq!(g.neighbors(0).unwrap(), &[0, 1]);
        assert_eq!(g.update_set(0).unwrap(), &[0, 1]);
    }

    #[test]
    fn out_of_range() {
        assert!(DependencyGraph::new(vec![vec![2], vec![]]).is_err());
        let g = DependencyGraph::isolated(2);
        assert_eq!(
            g.update_set(5).unwrap_err(),
            Error::IndexOutOfRange { index: 5, len: 2 }
        );
    }

    #[test]
    fn transpose_of_inputs() {
        // 0 excites 1 and 2; 2 excites 0.
        let g = DependencyGraph::from_inputs(&[vec![2], vec![0], vec![0]]).unwrap();
        assert_eq!(g.neighbors(0).unwrap(), &[1, 2]);
        assert_eq!(g.neighbors(2).unwrap(), &[0]);
        assert_eq!(g.neighbors(1).unwrap(), &[] as &[usize]);
    }
}
