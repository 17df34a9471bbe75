//! Exact greedy, level-wise tree growth.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::{GbdtError, GbdtModel, GbdtParams, Result, Tree, TreeNode};

const NO_SLOT: u32 = u32::MAX;
/// Gains closer than this (relative) count as tied, so rounding noise in
/// the prefix sums cannot override the lowest-feature, lowest-threshold rule.
const TIE_RTOL: f64 = 1e-12;

fn beats(gain: f64, best: Option<Candidate>) -> bool {
    match best {
        None => true,
        Some(b) => gain > b.gain + TIE_RTOL * b.gain.abs(),
    }
}

/// Fits a model; see [`train_with_trace`].
pub fn train(x: &[Vec<f64>], y: &[f64], params: &GbdtParams) -> Result<GbdtModel> {
    train_with_trace(x, y, params).map(|(model, _)| model)
}

/// Fits a model and reports the training MSE before the first round and
/// after every round.
pub fn train_with_trace(
    x: &[Vec<f64>],
    y: &[f64],
    params: &GbdtParams,
) -> Result<(GbdtModel, Vec<f64>)> {
    params.validate()?;
    let width = check_inputs(x, y)?;
    let data = Columns::new(x, y, width);
    let n = data.rows();
    let base_score = data.labels.iter().sum::<f64>() / n as f64;

    let mut pred = vec![base_score; n];
    let mse = |pred: &[f64]| {
        pred.iter()
            .zip(&data.labels)
            .map(|(p, y)| (p - y) * (p - y))
            .sum::<f64>()
            / n as f64
    };
    let mut trace = Vec::with_capacity(params.rounds + 1);
    trace.push(mse(&pred));
    let mut trees = Vec::with_capacity(params.rounds);
    let mut grad = vec![0.0; n];
    let mut grower = Grower::new(&data, params);
    for _ in 0..params.rounds {
        for i in 0..n {
            grad[i] = pred[i] - data.labels[i];
        }
        let (nodes, leaf_of) = grower.grow(&grad);
        for i in 0..n {
            if let TreeNode::Leaf { weight } = nodes[leaf_of[i]] {
                pred[i] += params.eta * weight;
            }
        }
        let tree = Tree::from_nodes(nodes);
        trace.push(mse(&pred));
        trees.push(tree);
    }
    let model = GbdtModel {
        base_score,
        eta: params.eta,
        feature_width: width,
        trees,
        params: params.clone(),
    };
    Ok((model, trace))
}

fn check_inputs(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(GbdtError::LabelCount {
            features: x.len(),
            labels: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(GbdtError::TooFewRows(x.len()));
    }
    let width = x[0].len();
    for (row, (xs, &label)) in x.iter().zip(y).enumerate() {
        if xs.len() != width {
            return Err(GbdtError::WidthMismatch {
                row,
                expected: width,
                found: xs.len(),
            });
        }
        if xs.iter().any(|v| v.is_nan()) {
            return Err(GbdtError::NotANumber {
                what: "features",
                row,
            });
        }
        if label.is_nan() {
            return Err(GbdtError::NotANumber {
                what: "labels",
                row,
            });
        }
    }
    Ok(width)
}

/// Column-major copy of the training set in a canonical row order, so the
/// fitted model does not depend on how the caller ordered the rows.
struct Columns {
    cols: Vec<Vec<f64>>,
    labels: Vec<f64>,
    /// Per feature, row indices sorted by value (ties by row index).
    sorted: Vec<Vec<u32>>,
}

impl Columns {
    fn new(x: &[Vec<f64>], y: &[f64], width: usize) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            x[a].iter()
                .zip(&x[b])
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(y[a].total_cmp(&y[b]))
        });
        let cols: Vec<Vec<f64>> = (0..width)
            .map(|f| order.iter().map(|&r| x[r][f]).collect())
            .collect();
        let labels = order.iter().map(|&r| y[r]).collect();
        let sorted = cols
            .par_iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Columns {
            cols,
            labels,
            sorted,
        }
    }

    fn rows(&self) -> usize {
        self.labels.len()
    }

    fn width(&self) -> usize {
        self.cols.len()
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Stats {
    g: f64,
    h: f64,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Per-slot scan state while sweeping one feature.
#[derive(Clone, Copy)]
struct Sweep {
    left: Stats,
    last: f64,
    seen: bool,
}

struct Grower<'a> {
    data: &'a Columns,
    params: &'a GbdtParams,
    /// Active slot of each row at the current level, or `NO_SLOT`.
    slot: Vec<u32>,
    /// Arena node of each row.
    node: Vec<usize>,
}

impl<'a> Grower<'a> {
    fn new(data: &'a Columns, params: &'a GbdtParams) -> Self {
        Grower {
            data,
            params,
            slot: vec![0; data.rows()],
            node: vec![0; data.rows()],
        }
    }

    fn gain(&self, left: Stats, total: Stats) -> f64 {
        let lambda = self.params.lambda_reg;
        let right = Stats {
            g: total.g - left.g,
            h: total.h - left.h,
        };
        let score = |s: Stats| s.g * s.g / (s.h + lambda);
        0.5 * (score(left) + score(right) - score(total))
    }

    /// Best split of every active slot along one feature.
    fn best_for_feature(&self, f: usize, grad: &[f64], totals: &[Stats]) -> Vec<Option<Candidate>> {
        let col = &self.data.cols[f];
        let min_child = self.params.min_child_weight;
        let mut state = vec![
            Sweep {
                left: Stats::default(),
                last: 0.0,
                seen: false,
            };
            totals.len()
        ];
        let mut best: Vec<Option<Candidate>> = vec![None; totals.len()];
        for &r in &self.data.sorted[f] {
            let r = r as usize;
            let s = self.slot[r];
            if s == NO_SLOT {
                continue;
            }
            let s = s as usize;
            let v = col[r];
            let st = &mut state[s];
            if st.seen && v > st.last {
                let left = st.left;
                let total = totals[s];
                if left.h >= min_child && total.h - left.h >= min_child {
                    let gain = self.gain(left, total);
                    if beats(gain, best[s]) {
                        best[s] = Some(Candidate {
                            gain,
                            feature: f,
                            threshold: midpoint(st.last, v),
                        });
                    }
                }
            }
            let st = &mut state[s];
            st.left.g += grad[r];
            st.left.h += 1.0;
            st.last = v;
            st.seen = true;
        }
        best
    }

    /// Grows one tree; returns its arena with the leaf reached by every row.
    fn grow(&mut self, grad: &[f64]) -> (Vec<TreeNode>, Vec<usize>) {
        let n = self.data.rows();
        let mut nodes = vec![TreeNode::Leaf { weight: 0.0 }];
        self.slot.iter_mut().for_each(|s| *s = 0);
        self.node.iter_mut().for_each(|s| *s = 0);
        let mut active: Vec<usize> = vec![0];
        let mut totals = vec![Stats {
            g: grad.iter().sum(),
            h: n as f64,
        }];
        let lambda = self.params.lambda_reg;
        let leaf = |s: Stats| TreeNode::Leaf {
            weight: -s.g / (s.h + lambda),
        };

        for depth in 0..=self.params.max_depth {
            if active.is_empty() {
                break;
            }
            if depth == self.params.max_depth {
                for (&id, &s) in active.iter().zip(&totals) {
                    nodes[id] = leaf(s);
                }
                break;
            }
            let per_feature: Vec<Vec<Option<Candidate>>> = (0..self.data.width())
                .into_par_iter()
                .map(|f| self.best_for_feature(f, grad, &totals))
                .collect();
            // Features are folded in ascending order, so ties keep the lowest
            // feature and threshold.
            let mut chosen: Vec<Option<Candidate>> = vec![None; active.len()];
            for cands in &per_feature {
                for (slot, c) in cands.iter().enumerate() {
                    if let Some(c) = c {
                        if beats(c.gain, chosen[slot]) {
                            chosen[slot] = Some(*c);
                        }
                    }
                }
            }

            let mut next_active = Vec::new();
            let mut child_slot = vec![(NO_SLOT, NO_SLOT); active.len()];
            for (slot, (&id, &total)) in active.iter().zip(&totals).enumerate() {
                match chosen[slot] {
                    Some(c) if c.gain > self.params.min_gain => {
                        let left = nodes.len();
                        nodes.push(TreeNode::Leaf { weight: 0.0 });
                        nodes.push(TreeNode::Leaf { weight: 0.0 });
                        nodes[id] = TreeNode::Split {
                            feature: c.feature,
                            threshold: c.threshold,
                            left,
                            right: left + 1,
                        };
                        child_slot[slot] = (next_active.len() as u32, next_active.len() as u32 + 1);
                        next_active.push(left);
                        next_active.push(left + 1);
                    }
                    _ => nodes[id] = leaf(total),
                }
            }

            let mut next_totals = vec![Stats::default(); next_active.len()];
            for r in 0..n {
                let s = self.slot[r];
                if s == NO_SLOT {
                    continue;
                }
                let (l, rt) = child_slot[s as usize];
                if l == NO_SLOT {
                    self.slot[r] = NO_SLOT;
                    continue;
                }
                let TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } = nodes[self.node[r]]
                else {
                    unreachable!("split node");
                };
                let (cs, cn) = if self.data.cols[feature][r] < threshold {
                    (l, left)
                } else {
                    (rt, right)
                };
                self.slot[r] = cs;
                self.node[r] = cn;
                next_totals[cs as usize].g += grad[r];
                next_totals[cs as usize].h += 1.0;
            }
            active = next_active;
            totals = next_totals;
        }
        (nodes, self.node.clone())
    }
}

/// Threshold strictly above `a` and at most `b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a * 0.5 + b * 0.5;
    if m > a {
        m
    } else {
        b
    }
}
