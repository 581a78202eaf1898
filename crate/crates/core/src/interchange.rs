//! Text documents shared by every front end: sets as
//! `{"modulus": N | null, "elements": [...]}`, extremal results, and the
//! run header recording seed and configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::construct::FamilyTag;
use crate::error::{Error, Result};
use crate::search::{ClassificationResult, ExtremalResult, Side};
use crate::sets::{AnySet, IntegerSet, MapContext, ResidueSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDocument {
    /// `null` for a set of integers.
    pub modulus: Option<u64>,
    pub elements: Vec<i64>,
}

impl SetDocument {
    pub fn from_set(set: &AnySet) -> Self {
        match set {
            AnySet::Integers(s) => SetDocument {
                modulus: None,
                elements: s.elements().to_vec(),
            },
            AnySet::Residues(s) => SetDocument {
                modulus: Some(s.modulus()),
                elements: s.iter().map(|x| x as i64).collect(),
            },
        }
    }

    /// Validates the document: residues must lie in `[0, N)` and no element
    /// may repeat.
    pub fn to_set(&self) -> Result<AnySet> {
        match self.modulus {
            None => Ok(AnySet::Integers(IntegerSet::new(self.elements.iter().copied())?)),
            Some(modulus) => {
                let elems = self
                    .elements
                    .iter()
                    .map(|&x| {
                        u64::try_from(x).map_err(|_| {
                            Error::invalid(format!("residue {x} is negative"))
                        })
                    })
                    .collect::<Result<Vec<u64>>>()?;
                Ok(AnySet::Residues(ResidueSet::new(modulus, elems)?))
            }
        }
    }

    pub fn parse(text: &str) -> Result<AnySet> {
        let doc: SetDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        doc.to_set()
    }
}

pub fn set_to_json(set: &AnySet) -> String {
    serde_json::to_string(&SetDocument::from_set(set)).expect("set serializes")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalDocument {
    pub side: Side,
    pub n: u64,
    pub modulus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub width_cap: Option<u64>,
    pub value: u64,
    pub witnesses: Vec<SetDocument>,
    pub search_space_size: u64,
    pub pruned_count: u64,
}

impl From<&ExtremalResult> for ExtremalDocument {
    fn from(r: &ExtremalResult) -> Self {
        ExtremalDocument {
            side: r.side,
            n: r.n,
            modulus: r.modulus,
            width_cap: r.width_cap,
            value: r.value,
            witnesses: r.witnesses.iter().map(SetDocument::from_set).collect(),
            search_space_size: r.search_space_size,
            pruned_count: r.pruned_count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineMapDocument {
    pub scale: i64,
    pub shift: i64,
    /// `null` over the integers.
    pub modulus: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationDocument {
    pub matched: bool,
    pub tag: Option<String>,
    pub map: Option<AffineMapDocument>,
}

impl From<&ClassificationResult> for ClassificationDocument {
    fn from(c: &ClassificationResult) -> Self {
        ClassificationDocument {
            matched: c.matched,
            tag: c.tag.as_ref().map(FamilyTag::to_string),
            map: c.map.map(|m| AffineMapDocument {
                scale: m.scale(),
                shift: m.shift(),
                modulus: match m.context() {
                    MapContext::Integers => None,
                    MapContext::Modular(n) => Some(n),
                },
            }),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
}

impl RunHeader {
    pub fn new(command: &str, seed: u64) -> Self {
        RunHeader {
            tool: "threeap".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.insert(key.into(), value.to_string());
        self
    }

    /// One-line `# key=value` comment suitable for CSV output.
    pub fn comment_line(&self) -> String {
        let mut s = format!(
            "# {} {} command={} seed={}",
            self.tool, self.version, self.command, self.seed
        );
        for (k, v) in &self.config {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{classify_extremal, max3ap_integers, DEFAULT_BUDGET_NODES};

    #[test]
    fn set_round_trip() {
        let r = AnySet::Residues(ResidueSet::new(5, [1, 2, 3, 4]).unwrap());
        let json = set_to_json(&r);
        assert_eq!(json, r#"{"modulus":5,"elements":[1,2,3,4]}"#);
        assert_eq!(SetDocument::parse(&json).unwrap(), r);
        let z = AnySet::Integers(IntegerSet::new([-3, 0, 7]).unwrap());
        assert_eq!(SetDocument::parse(&set_to_json(&z)).unwrap(), z);
        let empty = SetDocument::parse(r#"{"modulus":5,"elements":[]}"#).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn invalid_documents() {
        assert!(SetDocument::parse(r#"{"modulus":5,"elements":[5]}"#).is_err());
        assert!(SetDocument::parse(r#"{"modulus":5,"elements":[-1]}"#).is_err());
        assert!(SetDocument::parse(r#"{"modulus":null,"elements":[1,1]}"#).is_err());
        assert!(matches!(SetDocument::parse("{"), Err(Error::Malformed(_))));
    }

    #[test]
    fn result_documents() {
        let r = max3ap_integers(4, 8, DEFAULT_BUDGET_NODES).unwrap();
        let doc = ExtremalDocument::from(&r);
        assert_eq!(doc.value, 8);
        assert_eq!(doc.witnesses.len(), r.witnesses.len());
        let text = serde_json::to_string(&doc).unwrap();
        let back: ExtremalDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let c = classify_extremal(&AnySet::Integers(IntegerSet::new([1, 5, 7, 9, 13]).unwrap())).unwrap();
        let cd = ClassificationDocument::from(&c);
        assert_eq!(cd.tag.as_deref(), Some("E(1,1)"));
        assert_eq!(cd.map, Some(AffineMapDocument { scale: 2, shift: 7, modulus: None }));
    }

    #[test]
    fn header_line() {
        let h = RunHeader::new("count", 7).with("format", "csv");
        assert_eq!(h.comment_line(), format!("# threeap {} command=count seed=7 format=csv", env!("CARGO_PKG_VERSION")));
    }
}
