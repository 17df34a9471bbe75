use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GbdtError, GbdtModel, GbdtParams, Result, Tree, TreeNode};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Split {
        f: usize,
        t: f64,
        l: Box<NodeDoc>,
        r: Box<NodeDoc>,
    },
    Leaf {
        w: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: u32,
    base_score: f64,
    eta: f64,
    feature_width: usize,
    training_params: GbdtParams,
    trees: Vec<NodeDoc>,
}

fn to_doc(tree: &Tree, i: usize) -> NodeDoc {
    match tree.nodes[i] {
        TreeNode::Leaf { weight } => NodeDoc::Leaf { w: weight },
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => NodeDoc::Split {
            f: feature,
            t: threshold,
            l: Box::new(to_doc(tree, left)),
            r: Box::new(to_doc(tree, right)),
        },
    }
}

fn from_doc(doc: NodeDoc, width: usize, nodes: &mut Vec<TreeNode>) -> Result<usize> {
    let id = nodes.len();
    match doc {
        NodeDoc::Leaf { w } => nodes.push(TreeNode::Leaf { weight: w }),
        NodeDoc::Split { f, t, l, r } => {
            if f >= width {
                return Err(GbdtError::Malformed(format!(
                    "split feature {f} outside width {width}"
                )));
            }
            nodes.push(TreeNode::Leaf { weight: 0.0 });
            let left = from_doc(*l, width, nodes)?;
            let right = from_doc(*r, width, nodes)?;
            nodes[id] = TreeNode::Split {
                feature: f,
                threshold: t,
                left,
                right,
            };
        }
    }
    Ok(id)
}

impl GbdtModel {
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION,
            base_score: self.base_score,
            eta: self.eta,
            feature_width: self.feature_width,
            training_params: self.params.clone(),
            trees: self.trees.iter().map(|t| to_doc(t, 0)).collect(),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let version = serde_json::from_str::<serde_json::Value>(text)
            .map_err(|e| GbdtError::Malformed(e.to_string()))?
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| GbdtError::Malformed("missing version".into()))?;
        if version != MODEL_VERSION as u64 {
            return Err(GbdtError::Version {
                found: version as u32,
                expected: MODEL_VERSION,
            });
        }
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| GbdtError::Malformed(e.to_string()))?;
        let mut trees = Vec::with_capacity(doc.trees.len());
        for t in doc.trees {
            let mut nodes = Vec::new();
            from_doc(t, doc.feature_width, &mut nodes)?;
            trees.push(Tree::from_nodes(nodes));
        }
        Ok(GbdtModel {
            base_score: doc.base_score,
            eta: doc.eta,
            feature_width: doc.feature_width,
            trees,
            params: doc.training_params,
        })
    }
}

pub fn save_model(model: &GbdtModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_json()).map_err(|source| GbdtError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GbdtModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| GbdtError::Io {
        path: path.display().to_string(),
        source,
    })?;
    GbdtModel::from_json(&text)
}
