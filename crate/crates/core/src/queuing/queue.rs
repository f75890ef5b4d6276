//! Indexed binary min-heap holding exactly one candidate per process.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// A process's pending candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEntry {
    pub candidate_time: f64,
    pub process: usize,
    /// `B̄ᵢ*` at proposal; the `v`-test uses this frozen value.
    pub upper: f64,
    pub lower: f64,
    /// `false` when the entry only marks a window expiry.
    pub accepted: bool,
}

impl QueueEntry {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.candidate_time
            .partial_cmp(&other.candidate_time)
            .unwrap_or(Ordering::Equal)
            .then(self.process.cmp(&other.process))
    }
}

/// Min-priority queue keyed by candidate time, ties broken by lower process
/// index, with `O(log M)` keyed updates.
#[derive(Debug, Clone)]
pub struct CandidateQueue {
    entries: Vec<QueueEntry>,
    heap: Vec<usize>,
    pos: Vec<usize>,
}

impl CandidateQueue {
    /// Build from one entry per process; `entries[i].process` must equal `i`.
    pub fn new(entries: Vec<QueueEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Queue("queue needs at least one process"));
        }
        if entries.iter().enumerate().any(|(i, e)| e.process != i) {
            return Err(Error::Queue("entry process index does not match its slot"));
        }
        if entries.iter().any(|e| e.candidate_time.is_nan()) {
            return Err(Error::Queue("NaN candidate time"));
        }
        let m = entries.len();
        let mut q = Self {
            entries,
            heap: (0..m).collect(),
            pos: (0..m).collect(),
        };
        for k in (0..m / 2).rev() {
            q.sift_down(k);
        }
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn peek(&self) -> &QueueEntry {
        &self.entries[self.heap[0]]
    }

    pub fn get(&self, process: usize) -> Option<&QueueEntry> {
        self.entries.get(process)
    }

    /// Replace the entry of `entry.process`.
    pub fn update(&mut self, entry: QueueEntry) -> Result<()> {
        let i = entry.process;
        if i >= self.entries.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.entries.len(),
            });
        }
        if entry.candidate_time.is_nan() {
            return Err(Error::Queue("NaN candidate time"));
        }
        let k = self.pos[i];
        let up = entry.key_cmp(&self.entries[i]) == Ordering::Less;
        self.entries[i] = entry;
        if up {
            self.sift_up(k);
        } else {
            self.sift_down(k);
        }
        Ok(())
    }

    fn less(&self, a: usize, b: usize) -> bool {
        self.entries[self.heap[a]].key_cmp(&self.entries[self.heap[b]]) == Ordering::Less
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = a;
        self.pos[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut k: usize) {
        while k > 0 {
            let parent = (k - 1) / 2;
            if !self.less(k, parent) {
                break;
            }
            self.swap(k, parent);
            k = parent;
        }
    }

    fn sift_down(&mut self, mut k: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * k + 1, 2 * k + 2);
            let mut best = k;
            if l < n && self.less(l, best) {
                best = l;
            }
            if r < n && self.less(r, best) {
                best = r;
            }
            if best == k {
                break;
            }
            self.swap(k, best);
            k = best;
        }
    }

    #[cfg(test)]
    fn is_heap(&self) -> bool {
        (1..self.heap.len()).all(|k| !self.less(k, (k - 1) / 2))
            && self.heap.iter().enumerate().all(|(k, &i)| self.pos[i] == k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(process: usize, t: f64) -> QueueEntry {
        QueueEntry {
            candidate_time: t,
            process,
            upper: 1.0,
            lower: 0.0,
            accepted: true,
        }
    }

    #[test]
    fn peek_and_update() {
        let mut q = CandidateQueue::new(vec![entry(0, 3.0), entry(1, 1.0), entry(2, 2.0)]).unwrap();
        assert_eq!(q.peek().process, 1);
        q.update(entry(1, 5.0)).unwrap();
        assert_eq!(q.peek().process, 2);
        q.update(entry(0, 0.5)).unwrap();
        assert_eq!(q.peek().process, 0);
        assert!(q.is_heap());
    }

    #[test]
    fn ties_go_to_lower_index() {
        let q = CandidateQueue::new(vec![entry(0, 1.0), entry(1, 1.0)]).unwrap();
        assert_eq!(q.peek().process, 0);
        let q = CandidateQueue::new(vec![entry(0, 2.0), entry(1, 1.0), entry(2, 1.0)]).unwrap();
        assert_eq!(q.peek().process, 1);
    }

    #[test]
    fn infinite_times_sink() {
        let q = CandidateQueue::new(vec![entry(0, f64::INFINITY), entry(1, 4.0)]).unwrap();
        assert_eq!(q.peek().process, 1);
    }

    #[test]
    fn invalid_construction() {
        assert!(CandidateQueue::new(vec![]).is_err());
        assert!(CandidateQueue::new(vec![entry(1, 0.0)]).is_err());
        let mut q = CandidateQueue::new(vec![entry(0, 0.0)]).unwrap();
        assert!(q.update(entry(3, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn min_tracks_random_updates(init in prop::collection::vec(0.0f64..100.0, 1..40),
                                     ops in prop::collection::vec((0usize..40, 0.0f64..100.0), 0..200)) {
            let m = init.len();
            let mut q = CandidateQueue::new(init.iter().enumerate().map(|(i, &t)| entry(i, t)).collect()).unwrap();
            let mut shadow = init.clone();
            for (i, t) in ops {
                let i = i % m;
                q.update(entry(i, t)).unwrap();
                shadow[i] = t;
                prop_assert!(q.is_heap());
                let (best, _) = shadow.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
                prop_assert_eq!(q.peek().process, best);
            }
        }
    }
}
