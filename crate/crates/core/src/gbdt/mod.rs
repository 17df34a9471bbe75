//! Gradient-boosted regression trees with squared-error loss.

mod metrics;
mod model_io;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{
    compute_metrics, fidelity_vs_length_table, write_length_table_csv, LengthRow, MetricsReport,
};
pub use model_io::{load_model, save_model, MODEL_VERSION};
pub use train::{train, train_with_trace};

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("training needs at least two rows, got {0}")]
    TooFewRows(usize),
    #[error("{features} feature rows but {labels} labels")]
    LabelCount { features: usize, labels: usize },
    #[error("row {row} has width {found}, expected {expected}")]
    WidthMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("NaN in {what} at row {row}")]
    NotANumber { what: &'static str, row: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error(
        "predictions and truths must be non-empty and equally long ({predictions} vs {truths})"
    )]
    MetricLengths { predictions: usize, truths: usize },
    #[error("model version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

pub type Result<T, E = GbdtError> = std::result::Result<T, E>;

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda_reg: f64,
    /// Minimum number of rows in each child of a split.
    pub min_child_weight: f64,
    pub min_gain: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            rounds: 200,
            max_depth: 6,
            eta: 0.1,
            lambda_reg: 1.0,
            min_child_weight: 1.0,
            min_gain: 0.0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(GbdtError::InvalidParam {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta", "must lie in (0, 1]");
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return bad("lambda_reg", "must be finite and non-negative");
        }
        if self.min_child_weight.is_nan() || self.min_child_weight < 0.0 {
            return bad("min_child_weight", "must be non-negative");
        }
        if self.min_gain.is_nan() {
            return bad("min_gain", "must not be NaN");
        }
        Ok(())
    }
}

/// Tree node in a flat arena; the root is index 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    /// Builds a tree rooted at index 0, renumbering nodes into preorder.
    pub(crate) fn from_nodes(nodes: Vec<TreeNode>) -> Self {
        fn visit(src: &[TreeNode], i: usize, out: &mut Vec<TreeNode>) -> usize {
            let id = out.len();
            out.push(src[i]);
            if let TreeNode::Split { left, right, .. } = src[i] {
                let l = visit(src, left, out);
                let r = visit(src, right, out);
                if let TreeNode::Split { left, right, .. } = &mut out[id] {
                    *left = l;
                    *right = r;
                }
            }
            id
        }
        let mut out = Vec::with_capacity(nodes.len());
        visit(&nodes, 0, &mut out);
        Tree { nodes: out }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Features used by any split, ascending.
    pub fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GbdtModel {
    pub base_score: f64,
    pub eta: f64,
    pub feature_width: usize,
    pub trees: Vec<Tree>,
    pub params: GbdtParams,
}

impl GbdtModel {
    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_width {
            return Err(GbdtError::WidthMismatch {
                row: 0,
                expected: self.feature_width,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Unclamped ensemble output.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        self.check_width(x)?;
        Ok(self.raw_unchecked(x))
    }

    pub(crate) fn raw_unchecked(&self, x: &[f64]) -> f64 {
        self.base_score + self.eta * self.trees.iter().map(|t| t.evaluate(x)).sum::<f64>()
    }

    /// Predicted fidelity, clamped to `[0, 1]`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.predict_raw(x)?.clamp(0.0, 1.0))
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        rows.par_iter()
            .enumerate()
            .map(|(row, x)| {
                self.predict(x).map_err(|e| match e {
                    GbdtError::WidthMismatch {
                        expected, found, ..
                    } => GbdtError::WidthMismatch {
                        row,
                        expected,
                        found,
                    },
                    other => other,
                })
            })
            .collect()
    }

    /// Features split on anywhere in the ensemble.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.trees.iter().flat_map(Tree::split_features).collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}
