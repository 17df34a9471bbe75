use std::collections::VecDeque;

use super::{Path, Result, Topology, TopologyError};

/// Extra qubits allowed beyond the shortest path when enumerating candidates.
pub const DEFAULT_SLACK: usize = 4;
/// Maximum number of candidate paths returned by enumeration.
pub const DEFAULT_CAP: usize = 64;

const UNREACHABLE: usize = usize::MAX;

/// Per-qubit and per-edge (canonical order) visit counts over a path set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitationStats {
    pub qubit_counts: Vec<usize>,
    pub edge_counts: Vec<usize>,
}

impl VisitationStats {
    /// `(min, max)` over qubit counts.
    pub fn qubit_range(&self) -> (usize, usize) {
        min_max(&self.qubit_counts)
    }

    /// `(min, max)` over edge counts.
    pub fn edge_range(&self) -> (usize, usize) {
        min_max(&self.edge_counts)
    }
}

fn min_max(values: &[usize]) -> (usize, usize) {
    let min = values.iter().copied().min().unwrap_or(0);
    let max = values.iter().copied().max().unwrap_or(0);
    (min, max)
}

impl Topology {
    /// Hop distances from `source`; unreachable qubits map to `usize::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.num_qubits];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(q) = queue.pop_front() {
            for &n in self.neighbors(q) {
                if dist[n] == UNREACHABLE {
                    dist[n] = dist[q] + 1;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    fn check_pair(&self, s: usize, d: usize) -> Result<()> {
        self.check_qubit(s)?;
        self.check_qubit(d)?;
        if s == d {
            return Err(TopologyError::SameEndpoints(s));
        }
        Ok(())
    }

    /// Minimum-length path from `s` to `d`; ties resolve to the
    /// lexicographically smallest qubit sequence.
    pub fn shortest_path(&self, s: usize, d: usize) -> Result<Path> {
        self.check_pair(s, d)?;
        let to_target = self.bfs_distances(d);
        if to_target[s] == UNREACHABLE {
            return Err(TopologyError::NoPath { from: s, to: d });
        }
        // Greedy descent on the distance field picks the smallest admissible
        // neighbor at every step, which is the lexicographic minimum.
        let mut qubits = Vec::with_capacity(to_target[s] + 1);
        let mut current = s;
        qubits.push(current);
        while current != d {
            current = *self
                .neighbors(current)
                .iter()
                .find(|&&n| to_target[n] + 1 == to_target[current])
                .expect("distance field has a descending neighbor");
            qubits.push(current);
        }
        Ok(Path(qubits))
    }

    /// All simple paths from `s` to `d` with at most `shortest + slack`
    /// qubits, ordered by (length, lexicographic) and truncated to `cap`.
    ///
    /// Pass `usize::MAX` for an unbounded slack or cap.
    pub fn enumerate_paths(
        &self,
        s: usize,
        d: usize,
        slack: usize,
        cap: usize,
    ) -> Result<Vec<Path>> {
        self.check_pair(s, d)?;
        let to_target = self.bfs_distances(d);
        if to_target[s] == UNREACHABLE {
            return Err(TopologyError::NoPath { from: s, to: d });
        }
        let shortest = to_target[s] + 1;
        let longest = shortest.saturating_add(slack).min(self.num_qubits);

        let mut search = LengthSearch {
            topology: self,
            to_target: &to_target,
            target: d,
            on_path: vec![false; self.num_qubits],
            stack: Vec::with_capacity(longest),
            found: Vec::new(),
            cap,
        };
        // One depth-first pass per exact length, visiting neighbors in
        // ascending order, yields each length class already sorted.
        for length in shortest..=longest {
            if search.found.len() >= cap {
                break;
            }
            search.stack.clear();
            search.stack.push(s);
            search.on_path[s] = true;
            search.extend(length);
            search.on_path[s] = false;
        }
        Ok(search.found)
    }

    /// Counts how many paths touch each qubit and traverse each edge.
    pub fn visitation_stats(&self, paths: &[Path]) -> Result<VisitationStats> {
        let mut qubit_counts = vec![0; self.num_qubits];
        let mut edge_counts = vec![0; self.num_edges()];
        for path in paths {
            self.validate_path(path)?;
            for &q in path.qubits() {
                qubit_counts[q] += 1;
            }
            for w in path.qubits().windows(2) {
                edge_counts[self.edge_index(w[0], w[1]).expect("validated")] += 1;
            }
        }
        Ok(VisitationStats {
            qubit_counts,
            edge_counts,
        })
    }
}

struct LengthSearch<'a> {
    topology: &'a Topology,
    to_target: &'a [usize],
    target: usize,
    on_path: Vec<bool>,
    stack: Vec<usize>,
    found: Vec<Path>,
    cap: usize,
}

impl LengthSearch<'_> {
    /// Extends the current stack to exactly `length` qubits ending at the
    /// target. Returns false once the cap is reached.
    fn extend(&mut self, length: usize) -> bool {
        let current = *self.stack.last().expect("stack seeded with source");
        if current == self.target {
            if self.stack.len() == length {
                self.found.push(Path(self.stack.clone()));
                return self.found.len() < self.cap;
            }
            return true;
        }
        let remaining = length - self.stack.len();
        for &next in self.topology.neighbors(current) {
            if self.on_path[next] || self.to_target[next] + 1 > remaining {
                continue;
            }
            // The target may only be entered as the final qubit.
            if next == self.target && remaining != 1 {
                continue;
            }
            self.on_path[next] = true;
            self.stack.push(next);
            let keep_going = self.extend(length);
            self.stack.pop();
            self.on_path[next] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}
