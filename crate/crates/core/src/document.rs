//! JSON form of a [`TreeNet`].
//!
//! Parameters are decimal strings carrying enough digits to reproduce the
//! binary value exactly at the recorded precision, so a save/load cycle is
//! bit-exact. Documents without `precision_bits` are rejected rather than
//! read at some default width.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::activation::{Activation, ActivationKind};
use crate::error::{Error, Result};
use crate::numeric::{Precision, Real};
use crate::poly::{Neuron, ShallowNet1D};
use crate::tree::{LayerActivation, LeafParam, NodeParam, TreeArch, TreeNet};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActivationDoc {
    Identity,
    Sigmoid {
        name: ActivationKind,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
    },
    Unit {
        name: ActivationKind,
        /// `[a, w, theta]` per hidden unit.
        terms: Vec<[String; 3]>,
    },
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchDoc {
    #[serde(rename = "L")]
    pub depth: usize,
    pub widths: Vec<usize>,
    pub activations: Vec<ActivationDoc>,
    pub theta0: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDocument {
    pub format_version: u32,
    pub arch: ArchDoc,
    pub precision_bits: Option<u32>,
    pub leaf_params: Vec<[String; 3]>,
    pub node_params: Vec<Vec<[String; 2]>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn dec(x: &Real) -> String {
    x.to_string_radix(10, None)
}

fn act_doc(act: &LayerActivation) -> ActivationDoc {
    match act {
        LayerActivation::Identity => ActivationDoc::Identity,
        LayerActivation::Sigmoid(a) => ActivationDoc::Sigmoid {
            name: a.kind,
            scale: a.scale,
        },
        LayerActivation::Unit(u) => ActivationDoc::Unit {
            name: u.activation.kind,
            terms: u
                .terms
                .iter()
                .map(|n| [dec(&n.a), dec(&n.w), dec(&n.theta)])
                .collect(),
        },
    }
}

impl NetDocument {
    pub fn from_net(net: &TreeNet) -> Self {
        let arch = net.arch();
        NetDocument {
            format_version: FORMAT_VERSION,
            arch: ArchDoc {
                depth: arch.depth(),
                widths: arch.widths().to_vec(),
                activations: arch.activations().iter().map(act_doc).collect(),
                theta0: format!("{}", net.theta0()),
            },
            precision_bits: Some(net.precision().bits()),
            leaf_params: net
                .leaves()
                .iter()
                .map(|l| [dec(&l.a), dec(&l.w), dec(&l.b)])
                .collect(),
            node_params: (1..=arch.depth())
                .map(|k| net.layer(k).iter().map(|n| [dec(&n.a), dec(&n.b)]).collect())
                .collect(),
            metadata: net.metadata.clone(),
        }
    }

    pub fn into_net(self) -> Result<TreeNet> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::parse(
                "format_version",
                format!("unsupported version {}", self.format_version),
            ));
        }
        let bits = self
            .precision_bits
            .ok_or_else(|| Error::parse("precision_bits", "field is required"))?;
        let prec = Precision::new(bits).map_err(|e| Error::parse("precision_bits", e.to_string()))?;
        let a = &self.arch;
        if a.widths.len() != a.depth + 1 {
            return Err(Error::parse(
                "arch.widths",
                format!("{} widths for depth {}", a.widths.len(), a.depth),
            ));
        }
        if a.activations.len() != a.depth + 1 {
            return Err(Error::parse(
                "arch.activations",
                format!("{} activations for depth {}", a.activations.len(), a.depth),
            ));
        }
        let theta0: f64 = a
            .theta0
            .parse()
            .map_err(|_| Error::parse("arch.theta0", format!("not a number: {:?}", a.theta0)))?;
        let num = |s: &str, loc: &dyn Fn() -> String| -> Result<Real> {
            prec.parse(s).map_err(|_| Error::parse(loc(), format!("not a number: {s:?}")))
        };
        let mut acts = Vec::with_capacity(a.activations.len());
        for (k, d) in a.activations.iter().enumerate() {
            acts.push(match d {
                ActivationDoc::Identity => LayerActivation::Identity,
                ActivationDoc::Sigmoid { name, scale } => LayerActivation::Sigmoid(Activation::scaled(*name, *scale)),
                ActivationDoc::Unit { name, terms } => {
                    let mut ns = Vec::with_capacity(terms.len());
                    for (j, [ta, tw, tt]) in terms.iter().enumerate() {
                        let loc = || format!("arch.activations[{k}].terms[{j}]");
                        ns.push(Neuron {
                            a: num(ta, &loc)?,
                            w: num(tw, &loc)?,
                            theta: num(tt, &loc)?,
                        });
                    }
                    LayerActivation::Unit(ShallowNet1D {
                        activation: Activation::new(*name),
                        terms: ns,
                    })
                }
            });
        }
        let arch = TreeArch::new(a.widths.clone(), acts).map_err(|e| Error::parse("arch", e.to_string()))?;
        let counts = arch.layer_counts();
        if self.leaf_params.len() != counts[0] {
            return Err(Error::parse(
                "leaf_params",
                format!("expected {} entries, found {}", counts[0], self.leaf_params.len()),
            ));
        }
        if self.node_params.len() != arch.depth() {
            return Err(Error::parse(
                format!("node_params[{}]", self.node_params.len()),
                format!("missing layer: expected {} layers", arch.depth()),
            ));
        }
        let mut leaves = Vec::with_capacity(counts[0]);
        for (i, [la, lw, lb]) in self.leaf_params.iter().enumerate() {
            let loc = || format!("leaf_params[{i}]");
            leaves.push(LeafParam {
                a: num(la, &loc)?,
                w: num(lw, &loc)?,
                b: num(lb, &loc)?,
            });
        }
        let mut nodes = Vec::with_capacity(arch.depth());
        for (k, layer) in self.node_params.iter().enumerate() {
            if layer.len() != counts[k + 1] {
                return Err(Error::parse(
                    format!("node_params[{k}]"),
                    format!("expected {} entries, found {}", counts[k + 1], layer.len()),
                ));
            }
            let mut ps = Vec::with_capacity(layer.len());
            for (p, [na, nb]) in layer.iter().enumerate() {
                let loc = || format!("node_params[{k}][{p}]");
                ps.push(NodeParam {
                    a: num(na, &loc)?,
                    b: num(nb, &loc)?,
                });
            }
            nodes.push(ps);
        }
        let mut net = TreeNet::from_parts(arch, prec, theta0, leaves, nodes)?;
        net.metadata = self.metadata;
        Ok(net)
    }
}

pub fn to_json(net: &TreeNet) -> Result<String> {
    serde_json::to_string_pretty(&NetDocument::from_net(net))
        .map_err(|e| Error::parse("document", e.to_string()))
}

pub fn from_json(text: &str) -> Result<TreeNet> {
    let doc: NetDocument = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    doc.into_net()
}
