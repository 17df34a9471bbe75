//! Random simple paths of a prescribed length.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::topology::{Path, Topology};

/// Fresh start qubits tried before giving up on a length.
pub const MAX_ENDPOINT_RETRIES: usize = 50;
/// Candidate paths gathered per start qubit before one is chosen.
pub const DEFAULT_CANDIDATES: usize = 8;
/// Node expansions allowed per start qubit.
const EXPANSION_BUDGET: usize = 20_000;

struct Walk<'a, R: Rng + ?Sized> {
    topology: &'a Topology,
    length: usize,
    cap: usize,
    budget: usize,
    on_path: Vec<bool>,
    stack: Vec<usize>,
    found: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    mark: Vec<u32>,
    epoch: u32,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Walk<'_, R> {
    /// Unvisited qubits reachable from `from` without crossing the path,
    /// counting `from` itself; stops early once `need` is reached.
    fn reachable(&mut self, from: usize, need: usize) -> usize {
        self.epoch += 1;
        self.queue.clear();
        self.queue.push_back(from);
        self.mark[from] = self.epoch;
        let mut count = 1;
        while let Some(q) = self.queue.pop_front() {
            if count >= need {
                break;
            }
            for &n in self.topology.neighbors(q) {
                if !self.on_path[n] && self.mark[n] != self.epoch {
                    self.mark[n] = self.epoch;
                    count += 1;
                    self.queue.push_back(n);
                }
            }
        }
        count
    }

    fn extend(&mut self) -> bool {
        if self.found.len() >= self.cap || self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        if self.stack.len() == self.length {
            self.found.push(self.stack.clone());
            return true;
        }
        let current = *self.stack.last().expect("seeded");
        let mut next: Vec<usize> = self
            .topology
            .neighbors(current)
            .iter()
            .copied()
            .filter(|&n| !self.on_path[n])
            .collect();
        next.shuffle(self.rng);
        for n in next {
            let need = self.length - self.stack.len();
            self.on_path[n] = true;
            if self.reachable(n, need) >= need {
                self.stack.push(n);
                let go_on = self.extend();
                self.stack.pop();
                if !go_on {
                    self.on_path[n] = false;
                    return false;
                }
            }
            self.on_path[n] = false;
        }
        true
    }
}

/// Draws a simple path with exactly `length` qubits.
///
/// A start qubit is picked uniformly, a randomized depth-first search with
/// reachability pruning collects up to `candidates` paths of the target
/// length from it, and one of them is returned uniformly. Returns `None`
/// after [`MAX_ENDPOINT_RETRIES`] start qubits yield nothing.
pub fn sample_path<R: Rng + ?Sized>(
    topology: &Topology,
    length: usize,
    candidates: usize,
    rng: &mut R,
) -> Option<Path> {
    let n = topology.num_qubits();
    if length < 2 || length > n {
        return None;
    }
    for _ in 0..MAX_ENDPOINT_RETRIES {
        let start = rng.random_range(0..n);
        let mut walk = Walk {
            topology,
            length,
            cap: candidates.max(1),
            budget: EXPANSION_BUDGET,
            on_path: vec![false; n],
            stack: vec![start],
            found: Vec::new(),
            queue: VecDeque::new(),
            mark: vec![0; n],
            epoch: 0,
            rng: &mut *rng,
        };
        walk.on_path[start] = true;
        if walk.reachable(start, length) < length {
            continue;
        }
        walk.extend();
        let mut found = walk.found;
        if !found.is_empty() {
            let pick = rng.random_range(0..found.len());
            return Some(Path::new(found.swap_remove(pick)));
        }
    }
    None
}
