//! Open list with lazy deletion: improved entries are re-inserted and stale
//! ones skipped on pop, so no decrease-key is needed.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use super::node::NodeKey;

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    f: f64,
    h: f64,
    seq: u64,
    node: usize,
    key: NodeKey,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // Reversed for a min-heap: smaller f, then smaller h, then earlier
    // insertion pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct CostQueue {
    heap: BinaryHeap<QueueEntry>,
    /// Best queued `(f, node)` per key.
    best: HashMap<NodeKey, (f64, usize)>,
    seq: u64,
}

impl CostQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queued cost for `key`, if any.
    pub fn cost_of(&self, key: &NodeKey) -> Option<f64> {
        self.best.get(key).map(|b| b.0)
    }

    /// Inserts when `key` is absent or `f` strictly improves on it.
    pub fn offer(&mut self, key: NodeKey, f: f64, h: f64, node: usize) -> bool {
        match self.best.entry(key) {
            Entry::Occupied(mut e) => {
                if e.get().0 <= f {
                    return false;
                }
                e.insert((f, node));
            }
            Entry::Vacant(e) => {
                e.insert((f, node));
            }
        }
        self.seq += 1;
        self.heap.push(QueueEntry {
            f,
            h,
            seq: self.seq,
            node,
            key,
        });
        true
    }

    /// Removes and returns the cheapest live node.
    pub fn pop(&mut self) -> Option<(NodeKey, usize, f64)> {
        while let Some(e) = self.heap.pop() {
            if self.best.get(&e.key).is_some_and(|b| b.1 == e.node) {
                self.best.remove(&e.key);
                return Some((e.key, e.node, e.f));
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }
}
