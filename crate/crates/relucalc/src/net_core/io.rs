//! Versioned JSON file format for networks.
//!
//! ```json
//! {"version": 1, "d": 1, "d_out": 1, "activation": "relu",
//!  "layers": [{"W": [["1"], ["1"]], "b": ["0", "-1/2"]},
//!             {"W": [["2", "-4"]], "b": ["0"]}]}
//! ```
//!
//! Numbers are strings: `"p/q"` for exact values, decimal literals for
//! floats.  Special networks add `roles` and optionally `domain_hint`.
//! Unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::{Layer, ReluNet};
use super::numeric::{format_scalar, parse_scalar, Scalar};
use super::special::{BoxDomain, ChannelRole, RoleKind, SpecialNet};
use super::NetError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    #[serde(rename = "W")]
    pub w: Vec<Vec<String>>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleFile {
    /// `"source"`, `"collation"` or `"compute"`.
    pub kind: String,
    /// 1-based input coordinate for source channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<usize>,
    pub relu_free: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub lo: Vec<String>,
    pub hi: Vec<String>,
}

/// On-disk representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub version: u32,
    pub d: usize,
    pub d_out: usize,
    pub activation: String,
    pub layers: Vec<LayerFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<Vec<RoleFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_hint: Option<DomainFile>,
}

/// A loaded network: plain or special.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredNet<T> {
    Plain(ReluNet<T>),
    Special(SpecialNet<T>),
}

impl<T: Scalar> StoredNet<T> {
    /// The underlying weights (roles dropped).
    pub fn net(&self) -> &ReluNet<T> {
        match self {
            StoredNet::Plain(n) => n,
            StoredNet::Special(s) => s.net(),
        }
    }

    pub fn eval(&self, x: &[T]) -> Result<Vec<T>, NetError> {
        match self {
            StoredNet::Plain(n) => n.eval(x),
            StoredNet::Special(s) => s.eval(x),
        }
    }
}

impl<T: Scalar> From<ReluNet<T>> for StoredNet<T> {
    fn from(n: ReluNet<T>) -> Self {
        StoredNet::Plain(n)
    }
}

impl<T: Scalar> From<SpecialNet<T>> for StoredNet<T> {
    fn from(n: SpecialNet<T>) -> Self {
        StoredNet::Special(n)
    }
}

fn layers_to_file<T: Scalar>(net: &ReluNet<T>) -> Vec<LayerFile> {
    net.layers()
        .iter()
        .map(|l| LayerFile {
            w: l.w.iter().map(|r| r.iter().map(format_scalar).collect()).collect(),
            b: l.b.iter().map(format_scalar).collect(),
        })
        .collect()
}

impl NetFile {
    pub fn from_stored<T: Scalar>(s: &StoredNet<T>) -> Self {
        let net = s.net();
        let mut f = NetFile {
            version: FORMAT_VERSION,
            d: net.input_dim(),
            d_out: net.output_dim(),
            activation: "relu".into(),
            layers: layers_to_file(net),
            roles: None,
            domain_hint: None,
        };
        if let StoredNet::Special(sp) = s {
            f.roles = Some(
                sp.roles()
                    .iter()
                    .map(|r| match r.kind {
                        RoleKind::Source(i) => RoleFile {
                            kind: "source".into(),
                            coord: Some(i + 1),
                            relu_free: r.relu_free,
                        },
                        RoleKind::Collation => {
                            RoleFile { kind: "collation".into(), coord: None, relu_free: r.relu_free }
                        }
                        RoleKind::Compute => {
                            RoleFile { kind: "compute".into(), coord: None, relu_free: r.relu_free }
                        }
                    })
                    .collect(),
            );
            f.domain_hint = sp.domain_hint().and_then(|h| {
                let lo: Option<Vec<String>> = h.sides.iter().map(|s| s.lo.as_ref().map(format_scalar)).collect();
                let hi: Option<Vec<String>> = h.sides.iter().map(|s| s.hi.as_ref().map(format_scalar)).collect();
                Some(DomainFile { lo: lo?, hi: hi? })
            });
        }
        f
    }

    pub fn into_stored<T: Scalar>(self) -> Result<StoredNet<T>, NetError> {
        if self.version != FORMAT_VERSION {
            return Err(NetError::Version(self.version));
        }
        if self.activation != "relu" {
            return Err(NetError::Parse(format!("unsupported activation {:?}", self.activation)));
        }
        let ctx = |li: usize, what: &str, e: NetError| NetError::Parse(format!("layers[{li}].{what}: {e}"));
        let mut layers = Vec::with_capacity(self.layers.len());
        for (li, lf) in self.layers.iter().enumerate() {
            let w = lf
                .w
                .iter()
                .map(|r| r.iter().map(|s| parse_scalar::<T>(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ctx(li, "W", e))?;
            let b = lf
                .b
                .iter()
                .map(|s| parse_scalar::<T>(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ctx(li, "b", e))?;
            layers.push(Layer::new(w, b).map_err(|e| ctx(li, "W", e))?);
        }
        let net = ReluNet::new(self.d, self.d_out, layers)?;
        let Some(roles) = self.roles else {
            if self.domain_hint.is_some() {
                return Err(NetError::Parse("domain_hint given without roles".into()));
            }
            return Ok(StoredNet::Plain(net));
        };
        let roles = roles
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let kind = match (r.kind.as_str(), r.coord) {
                    ("source", Some(c)) if c >= 1 => RoleKind::Source(c - 1),
                    ("collation", None) => RoleKind::Collation,
                    ("compute", None) => RoleKind::Compute,
                    _ => return Err(NetError::Parse(format!("roles[{i}]: invalid role {:?}", r.kind))),
                };
                Ok(ChannelRole { kind, relu_free: r.relu_free })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let hint = match self.domain_hint {
            None => None,
            Some(h) => {
                let p = |v: &Vec<String>| {
                    v.iter()
                        .map(|s| parse_scalar::<T>(s))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| NetError::Parse(format!("domain_hint: {e}")))
                };
                Some(BoxDomain::new(p(&h.lo)?, p(&h.hi)?)?)
            }
        };
        Ok(StoredNet::Special(SpecialNet::new(net, roles, hint)?))
    }
}

pub fn to_json_string<T: Scalar>(net: &StoredNet<T>) -> String {
    serde_json::to_string_pretty(&NetFile::from_stored(net)).expect("serializable")
}

pub fn load_str<T: Scalar>(text: &str) -> Result<StoredNet<T>, NetError> {
    let f: NetFile = serde_json::from_str(text).map_err(|e| {
        NetError::Parse(format!("{e} (line {}, column {})", e.line(), e.column()))
    })?;
    f.into_stored()
}

pub fn save<T: Scalar>(net: &StoredNet<T>, path: impl AsRef<Path>) -> Result<(), NetError> {
    std::fs::write(path, to_json_string(net) + "\n")?;
    Ok(())
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<StoredNet<T>, NetError> {
    let text = std::fs::read_to_string(path)?;
    load_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_core::numeric::{q, qi, Q};

    fn third() -> ReluNet<Q> {
        ReluNet::new(
            1,
            1,
            vec![
                Layer::new(vec![vec![q(1, 3)]], vec![q(-2, 7)]).unwrap(),
                Layer::new(vec![vec![qi(3)]], vec![qi(0)]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn exact_round_trip() {
        let s = StoredNet::Plain(third());
        let text = to_json_string(&s);
        assert!(text.contains("\"1/3\""));
        let back: StoredNet<Q> = load_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn float_mode_reads_exact_file() {
        let text = to_json_string(&StoredNet::Plain(third()));
        let back: StoredNet<f64> = load_str(&text).unwrap();
        assert!((back.net().layers()[0].w[0][0] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn truncated_and_unknown_fields_fail() {
        let text = to_json_string(&StoredNet::Plain(third()));
        let cut = &text[..text.len() / 2];
        let err = load_str::<Q>(cut).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let extra = text.replacen("\"version\"", "\"colour\": 1, \"version\"", 1);
        assert!(load_str::<Q>(&extra).is_err());
        let v2 = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(load_str::<Q>(&v2), Err(NetError::Version(2))));
    }
}
