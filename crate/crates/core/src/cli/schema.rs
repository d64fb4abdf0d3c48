//! JSON file formats. Every scalar is an integer; vectors are coordinate
//! lists and table entries are mixed-radix ranks, least significant
//! coordinate first.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brace::{Backend, Brace};
use crate::classify_p4::{Catalog, ParamValue};
use crate::correspondence::FlowCache;
use crate::error::{Error, Result};
use crate::fpcore::Prime;
use crate::prelie::{PreLieAlgebra, StructureConstants};
use crate::radical::MixedTableBrace;

/// `{"kind":"prelie","p":11,"dim":2,"c":[[[0,1],[0,0]],[[0,0],[0,0]]]}`,
/// where `c[i][j]` holds the coordinates of `e_i · e_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreLieFile {
    pub kind: String,
    pub p: u64,
    pub dim: usize,
    pub c: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraceFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub backend: String,
    /// `[[prime, dim], ...]` for a table over a product of elementary
    /// abelian groups; replaces `p` and `dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<(u64, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<Vec<Vec<u64>>>,
    /// Associative structure constants of a radical ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prelie: Option<PreLieFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogFile {
    pub kind: String,
    pub p: u64,
    pub families: Vec<FamilySummaryFile>,
    pub warnings: Vec<String>,
    pub records: Vec<RecordFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySummaryFile {
    pub family: String,
    pub candidates: u64,
    pub survivors: u64,
    pub distinct_tables: usize,
    pub iso_classes: Option<usize>,
    pub effective_params: Vec<String>,
    pub vacuous_params: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordFile {
    pub family: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub c: Vec<Vec<Vec<u32>>>,
    pub chain_dims: Vec<usize>,
    pub multiplicity: u64,
    pub iso_class: Option<usize>,
    pub iso_rep: bool,
    pub checks_pass: bool,
}

/// A brace read from disk.
pub enum LoadedBrace {
    Fp(Brace),
    Mixed(MixedTableBrace),
}

/// Either kind of input file.
pub enum Loaded {
    PreLie(PreLieAlgebra),
    Brace(LoadedBrace),
}

fn read(path: &Path) -> Result<serde_json::Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: malformed JSON: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(value: serde_json::Value, path: &Path) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<Loaded> {
    let value = read(path)?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("prelie") => Ok(Loaded::PreLie(prelie_from_file(&parse(value, path)?)?)),
        Some("brace") => Ok(Loaded::Brace(brace_from_file(&parse(value, path)?)?)),
        Some(other) => Err(Error::input(format!("{}: unsupported kind {other:?}", path.display()))),
        None => Err(Error::input(format!("{}: missing \"kind\"", path.display()))),
    }
}

pub fn load_prelie(path: &Path) -> Result<PreLieAlgebra> {
    match load(path)? {
        Loaded::PreLie(a) => Ok(a),
        Loaded::Brace(_) => Err(Error::input(format!("{}: expected a prelie file", path.display()))),
    }
}

pub fn load_brace(path: &Path) -> Result<LoadedBrace> {
    match load(path)? {
        Loaded::Brace(b) => Ok(b),
        Loaded::PreLie(_) => Err(Error::input(format!("{}: expected a brace file", path.display()))),
    }
}

pub fn load_fp_brace(path: &Path) -> Result<Brace> {
    match load_brace(path)? {
        LoadedBrace::Fp(b) => Ok(b),
        LoadedBrace::Mixed(_) => Err(Error::input(format!(
            "{}: this command needs an F_p-brace, not a table over several primes",
            path.display()
        ))),
    }
}

fn check_cube(c: &[Vec<Vec<i64>>], dim: usize) -> Result<()> {
    if c.len() != dim
        || c.iter()
            .any(|row| row.len() != dim || row.iter().any(|v| v.len() != dim))
    {
        return Err(Error::input(format!(
            "structure constants must be {dim} × {dim} × {dim}"
        )));
    }
    Ok(())
}

pub fn prelie_from_file(f: &PreLieFile) -> Result<PreLieAlgebra> {
    if f.kind != "prelie" {
        return Err(Error::input(format!("expected kind \"prelie\", got {:?}", f.kind)));
    }
    check_cube(&f.c, f.dim)?;
    PreLieAlgebra::from_table(Prime::new(f.p)?, f.dim, &f.c)
}

pub fn prelie_to_file(a: &PreLieAlgebra) -> PreLieFile {
    PreLieFile {
        kind: "prelie".into(),
        p: a.modulus().get() as u64,
        dim: a.dim(),
        c: nested_i64(a.constants()),
    }
}

fn nested_i64(c: &StructureConstants) -> Vec<Vec<Vec<i64>>> {
    c.to_nested()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| v.into_iter().map(i64::from).collect())
                .collect()
        })
        .collect()
}

pub fn brace_from_file(f: &BraceFile) -> Result<LoadedBrace> {
    if f.kind != "brace" {
        return Err(Error::input(format!("expected kind \"brace\", got {:?}", f.kind)));
    }
    if let Some(components) = &f.components {
        if f.backend != "table" {
            return Err(Error::input("\"components\" is only supported by the table backend"));
        }
        let star = f
            .star
            .as_ref()
            .ok_or_else(|| Error::input("table backend needs \"star\""))?;
        return Ok(LoadedBrace::Mixed(MixedTableBrace::from_table(components, star)?));
    }
    let p = Prime::new(f.p.ok_or_else(|| Error::input("brace file needs \"p\""))?)?;
    let n = f.dim.ok_or_else(|| Error::input("brace file needs \"dim\""))?;
    let brace = match f.backend.as_str() {
        "table" => {
            let star = f
                .star
                .as_ref()
                .ok_or_else(|| Error::input("table backend needs \"star\""))?;
            Brace::from_star_table(p, n, star)?
        }
        "ring" => {
            let r = f.r.as_ref().ok_or_else(|| Error::input("ring backend needs \"r\""))?;
            check_cube(r, n)?;
            Brace::from_ring(StructureConstants::new(p, n, r)?)?
        }
        "flows" => {
            let inner = f
                .prelie
                .as_ref()
                .ok_or_else(|| Error::input("flows backend needs \"prelie\""))?;
            let alg = prelie_from_file(inner)?;
            if alg.modulus() != p || alg.dim() != n {
                return Err(Error::input("embedded prelie algebra disagrees with \"p\"/\"dim\""));
            }
            Brace::from_flows(Arc::new(FlowCache::new(&alg)?))
        }
        other => return Err(Error::input(format!("unknown backend {other:?}"))),
    };
    Ok(LoadedBrace::Fp(brace))
}

pub fn brace_to_file(b: &Brace) -> BraceFile {
    let mut f = BraceFile {
        kind: "brace".into(),
        p: Some(b.modulus().get() as u64),
        dim: Some(b.dim()),
        backend: b.backend().name().into(),
        components: None,
        star: None,
        r: None,
        prelie: None,
    };
    match b.backend() {
        Backend::Table(t) => {
            f.star = Some(
                t.ranks()
                    .chunks(t.size())
                    .map(|row| row.iter().map(|&v| v as u64).collect())
                    .collect(),
            )
        }
        Backend::Ring(c) => f.r = Some(nested_i64(c)),
        Backend::Flows(cache) => f.prelie = Some(prelie_to_file(cache.algebra())),
    }
    f
}

pub fn catalog_to_file(cat: &Catalog) -> CatalogFile {
    CatalogFile {
        kind: "catalog".into(),
        p: cat.p.get() as u64,
        families: cat
            .families
            .iter()
            .map(|s| FamilySummaryFile {
                family: s.family.tag().into(),
                candidates: s.candidates,
                survivors: s.survivors,
                distinct_tables: s.distinct_tables,
                iso_classes: s.iso_classes,
                effective_params: s.effective_params.iter().map(|s| s.to_string()).collect(),
                vacuous_params: s.vacuous_params.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
        warnings: cat.warnings.clone(),
        records: cat
            .entries
            .iter()
            .map(|e| RecordFile {
                family: e.record.family.tag().into(),
                params: e
                    .record
                    .params
                    .iter()
                    .map(|(k, v)| {
                        let v = match v {
                            ParamValue::Scalar(s) => serde_json::Value::from(*s),
                            ParamValue::Choice(c) => serde_json::Value::from(*c),
                        };
                        (k.to_string(), v)
                    })
                    .collect(),
                c: e.record.algebra.constants().to_nested(),
                chain_dims: e.record.chain_dims.clone(),
                multiplicity: e.record.multiplicity,
                iso_class: e.record.iso_class,
                iso_rep: e.record.iso_rep,
                checks_pass: e.checks.all_pass(cat.p),
            })
            .collect(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::input(format!("cannot write {}: {e}", path.display())))
}
