//! Versioned JSON persistence for expansions and models.
//!
//! Values round-trip bitwise: floats are printed in shortest-exact form, so
//! a reloaded surrogate reproduces predictions exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cvt::VoronoiPartition;
use crate::error::{Error, Result};
use crate::hdmr::{ComponentTable, CutHdmrExpansion};
use crate::interp::NodeSet;
use crate::model::{BuildInfo, CvtHdmrModel};
use crate::space::Point;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TableDoc {
    dims: Vec<usize>,
    extents: Vec<usize>,
    /// Tensor values flattened row-major, response components innermost.
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ExpansionDoc {
    format_version: u32,
    kind: String,
    p: usize,
    m: usize,
    order: usize,
    anchor: Vec<f64>,
    f0: Vec<f64>,
    node_sets: Vec<NodeSet>,
    tables: Vec<TableDoc>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    kind: String,
    partition: VoronoiPartition,
    build: BuildInfo,
    expansions: Vec<ExpansionDoc>,
}

fn expansion_doc(exp: &CutHdmrExpansion) -> Result<ExpansionDoc> {
    if exp.is_explicit() {
        return Err(Error::UnsupportedMethod(
            "explicit-slice expansions evaluate a live model and cannot be persisted".into(),
        ));
    }
    Ok(ExpansionDoc {
        format_version: FORMAT_VERSION,
        kind: "cut-hdmr-expansion".into(),
        p: exp.input_dim(),
        m: exp.out_dim(),
        order: exp.order(),
        anchor: exp.anchor().coords().to_vec(),
        f0: exp.zeroth_order().to_vec(),
        node_sets: exp.node_sets().to_vec(),
        tables: exp
            .tables()
            .iter()
            .map(|t| TableDoc { dims: t.dims.clone(), extents: t.extents.clone(), values: t.values.clone() })
            .collect(),
    })
}

fn expansion_from_doc(doc: ExpansionDoc) -> Result<CutHdmrExpansion> {
    let anchor = Point::new(doc.anchor).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.f0.len() != doc.m {
        return Err(Error::Parse(format!(
            "zeroth-order term has {} components, header says {}",
            doc.f0.len(),
            doc.m
        )));
    }
    let tables = doc
        .tables
        .into_iter()
        .map(|t| ComponentTable { dims: t.dims, extents: t.extents, values: t.values })
        .collect();
    CutHdmrExpansion::from_parts(anchor, doc.f0, doc.node_sets, tables, doc.order)
}

fn check_version(text: &str, expected_kind: &str) -> Result<()> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Parse("missing field `format_version`".into()))?;
    if found != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch { found: found as u32, supported: FORMAT_VERSION });
    }
    if let Some(kind) = value.get("kind").and_then(|v| v.as_str()) {
        if kind != expected_kind {
            return Err(Error::Parse(format!(
                "document kind is `{kind}`, expected `{expected_kind}`"
            )));
        }
    }
    Ok(())
}

pub fn expansion_to_json(exp: &CutHdmrExpansion) -> Result<String> {
    serde_json::to_string(&expansion_doc(exp)?).map_err(|e| Error::Parse(e.to_string()))
}

pub fn expansion_from_json(text: &str) -> Result<CutHdmrExpansion> {
    check_version(text, "cut-hdmr-expansion")?;
    let doc: ExpansionDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    expansion_from_doc(doc)
}

pub fn model_to_json(model: &CvtHdmrModel) -> Result<String> {
    let doc = ModelDoc {
        format_version: FORMAT_VERSION,
        kind: "cvt-hdmr-model".into(),
        partition: model.partition().clone(),
        build: model.build_info().clone(),
        expansions: model.expansions().iter().map(expansion_doc).collect::<Result<_>>()?,
    };
    serde_json::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<CvtHdmrModel> {
    check_version(text, "cvt-hdmr-model")?;
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let expansions = doc
        .expansions
        .into_iter()
        .map(expansion_from_doc)
        .collect::<Result<Vec<_>>>()?;
    CvtHdmrModel::from_parts(doc.partition, expansions, doc.build)
}

pub fn save_model(model: &CvtHdmrModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CvtHdmrModel> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&text)
}

pub fn save_expansion(exp: &CutHdmrExpansion, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, expansion_to_json(exp)?)?;
    Ok(())
}

pub fn load_expansion(path: impl AsRef<Path>) -> Result<CutHdmrExpansion> {
    let text = std::fs::read_to_string(path)?;
    expansion_from_json(&text)
}
