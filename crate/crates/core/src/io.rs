//! File formats: JSON systems, families, trees and reports; edge lists; CSV
//! similarity and answer matrices.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::builder::{Level, ReductionTrace, Report};
use crate::error::{Error, Result};
use crate::forbidden::{Evidence, FamilyKind, ForbiddenFamily, Witness};
use crate::ground::{block_of_tangle, Graph};
use crate::oracle::minimal_elements;
use crate::scalar::Scalar;
use crate::sepsys::{
    LatticeTables, OrientedSepId, PartialOrientation, SeparationSystem, SystemSpec, Threshold,
};
use crate::tree::StructureTree;

pub const SEPSYS_SCHEMA: &str = "sepsys/v1";
pub const FAMILY_SCHEMA: &str = "family/v1";
pub const TREE_SCHEMA: &str = "tree/v1";
pub const REPORT_SCHEMA: &str = "report/v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniverseJson {
    pub join: Vec<Vec<usize>>,
    pub meet: Vec<Vec<usize>>,
}

/// `sepsys/v1`: oriented ids are `2s` for `s→` and `2s + 1` for `s←`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemJson<T> {
    #[serde(default)]
    pub schema: Option<String>,
    pub count: usize,
    pub orders: Vec<T>,
    #[serde(default)]
    pub leq: Vec<(usize, usize)>,
    #[serde(default)]
    pub universe: Option<UniverseJson>,
    #[serde(default)]
    pub distributive: bool,
    #[serde(default)]
    pub close_transitively: bool,
    #[serde(default)]
    pub allow_degenerate: bool,
}

impl<T: Scalar> SystemJson<T> {
    pub fn into_spec(self) -> Result<SystemSpec<T>> {
        check_schema(self.schema.as_deref(), SEPSYS_SCHEMA)?;
        Ok(SystemSpec {
            count: self.count,
            orders: self.orders,
            leq: self.leq.into_iter().map(|(a, b)| (OrientedSepId(a), OrientedSepId(b))).collect(),
            lattice: self.universe.map(|u| LatticeTables { join: u.join, meet: u.meet }),
            distributive: self.distributive,
            close_transitively: self.close_transitively,
            allow_degenerate: self.allow_degenerate,
        })
    }
}

fn check_schema(found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(s) if s != expected => Err(Error::Input(format!("expected schema {expected}, found {s}"))),
        _ => Ok(()),
    }
}

pub fn parse_system_spec<T: Scalar + DeserializeOwned>(text: &str) -> Result<SystemSpec<T>> {
    serde_json::from_str::<SystemJson<T>>(text)?.into_spec()
}

/// The `sepsys/v1` form of a system: its full relation, without universe tables.
pub fn system_to_json<T: Scalar>(system: &SeparationSystem<T>) -> SystemJson<T> {
    let leq = system
        .oriented()
        .flat_map(|a| system.up_set(a).filter(move |&b| b != a).map(move |b| (a.0, b.0)))
        .collect();
    SystemJson {
        schema: Some(SEPSYS_SCHEMA.into()),
        count: system.len(),
        orders: system.orders().to_vec(),
        leq,
        universe: None,
        distributive: false,
        close_transitively: false,
        allow_degenerate: system.seps().any(|s| system.is_degenerate(s)),
    }
}

/// `family/v1`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    #[serde(default)]
    pub schema: Option<String>,
    pub kind: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub explicit_members: Option<Vec<Vec<usize>>>,
}

/// Parses `KIND[:PARAM]`, for example `blocks:3`, `cluster:2` or `strong-profile`.
pub fn parse_family_kind(text: &str) -> Result<FamilyKind> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (text, None),
    };
    let number = |what: &str| -> Result<usize> {
        let p = param.ok_or_else(|| Error::Input(format!("family {name} needs a parameter, as in {name}:{what}")))?;
        p.trim()
            .parse()
            .map_err(|_| Error::Input(format!("family parameter {p:?} is not a non-negative integer")))
    };
    let kind = match name.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "empty" => FamilyKind::Empty,
        "explicit" => FamilyKind::Explicit,
        "blocks" => FamilyKind::Blocks { k: number("k")? },
        "cluster" => FamilyKind::Cluster { n: number("n")? },
        "profile" => FamilyKind::Profile,
        "strong-profile" => FamilyKind::StrongProfile,
        "graph-tangle" => FamilyKind::GraphTangle,
        other => return Err(Error::Input(format!("unknown family kind {other:?}"))),
    };
    if param.is_some() && !matches!(kind, FamilyKind::Blocks { .. } | FamilyKind::Cluster { .. }) {
        return Err(Error::Input(format!("family {name} takes no parameter")));
    }
    Ok(kind)
}

impl FamilyJson {
    pub fn into_family<T: Scalar>(self, system: &Arc<SeparationSystem<T>>) -> Result<ForbiddenFamily<T>> {
        check_schema(self.schema.as_deref(), FAMILY_SCHEMA)?;
        let name = self.kind.trim().to_ascii_lowercase().replace('_', "-");
        match name.as_str() {
            "explicit" => {
                let members: Vec<Vec<OrientedSepId>> = self
                    .explicit_members
                    .unwrap_or_default()
                    .into_iter()
                    .map(|m| m.into_iter().map(OrientedSepId).collect())
                    .collect();
                ForbiddenFamily::make_explicit(system, &members)
            }
            "blocks" => {
                let k = self.k.ok_or_else(|| Error::Input("blocks family needs k".into()))?;
                ForbiddenFamily::make_blocks(system, k)
            }
            "cluster" => {
                let n = self.n.ok_or_else(|| Error::Input("cluster family needs n".into()))?;
                ForbiddenFamily::make_cluster(system, n)
            }
            other => ForbiddenFamily::make(system, parse_family_kind(other)?),
        }
    }
}

pub fn parse_family<T: Scalar>(text: &str, system: &Arc<SeparationSystem<T>>) -> Result<ForbiddenFamily<T>> {
    serde_json::from_str::<FamilyJson>(text)?.into_family(system)
}

pub fn family_to_json<T: Scalar>(family: &ForbiddenFamily<T>) -> FamilyJson {
    let (kind, k, n) = match family.kind() {
        FamilyKind::Blocks { k } => ("blocks", Some(k), None),
        FamilyKind::Cluster { n } => ("cluster", None, Some(n)),
        FamilyKind::Empty => ("empty", None, None),
        FamilyKind::Explicit => ("explicit", None, None),
        FamilyKind::Profile => ("profile", None, None),
        FamilyKind::StrongProfile => ("strong-profile", None, None),
        FamilyKind::GraphTangle => ("graph-tangle", None, None),
    };
    let sys = family.system();
    let explicit = (family.kind() == FamilyKind::Explicit).then(|| {
        family
            .explicit_members()
            .iter()
            .map(|m| origin_ids(sys, m))
            .collect()
    });
    FamilyJson {
        schema: Some(FAMILY_SCHEMA.into()),
        kind: kind.into(),
        k,
        n,
        explicit_members: explicit,
    }
}

/// Threshold value in JSON: a number, or the string `"all"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdJson<T> {
    Below(T),
    All(String),
}

impl<T: Scalar> ThresholdJson<T> {
    pub fn from_threshold(k: Threshold<T>) -> Self {
        match k {
            Threshold::Below(v) => ThresholdJson::Below(v),
            Threshold::Unbounded => ThresholdJson::All("all".into()),
        }
    }

    pub fn to_threshold(&self) -> Result<Threshold<T>> {
        match self {
            ThresholdJson::Below(v) => Ok(Threshold::Below(*v)),
            ThresholdJson::All(s) if s == "all" => Ok(Threshold::Unbounded),
            ThresholdJson::All(s) => Err(Error::Input(format!("threshold {s:?} is neither a number nor \"all\""))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemRef<T> {
    /// The tree lives on `S_k` of the loaded system; absent for the whole system.
    #[serde(default = "no_threshold")]
    pub below: Option<ThresholdJson<T>>,
}

fn no_threshold<T>() -> Option<ThresholdJson<T>> {
    None
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub edge_label: Option<usize>,
}

/// `tree/v1`. Edge labels use the oriented ids of the loaded system.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson<T> {
    #[serde(default)]
    pub schema: Option<String>,
    pub root: usize,
    pub nodes: Vec<NodeJson>,
    pub system_ref: SystemRef<T>,
}

pub fn tree_to_json<T: Scalar>(tree: &StructureTree<T>, below: Option<Threshold<T>>) -> TreeJson<T> {
    let sys = tree.system();
    TreeJson {
        schema: Some(TREE_SCHEMA.into()),
        root: tree.root(),
        nodes: tree
            .parts()
            .into_iter()
            .map(|(id, parent, label)| NodeJson {
                id,
                parent,
                edge_label: label.map(|a| sys.origin_of(a).0),
            })
            .collect(),
        system_ref: SystemRef {
            below: below.map(ThresholdJson::from_threshold),
        },
    }
}

/// Rebuilds a tree over `root_system`, or over its restriction named in `system_ref`.
pub fn tree_from_json<T: Scalar>(json: &TreeJson<T>, root_system: &Arc<SeparationSystem<T>>) -> Result<StructureTree<T>> {
    check_schema(json.schema.as_deref(), TREE_SCHEMA)?;
    let system = match &json.system_ref.below {
        Some(k) => Arc::new(root_system.restrict_below(k.to_threshold()?)),
        None => root_system.clone(),
    };
    let mut to_local = vec![None; root_system.oriented_len()];
    for a in system.oriented() {
        to_local[system.origin_of(a).0] = Some(a);
    }
    let mut parts = Vec::with_capacity(json.nodes.len());
    for node in &json.nodes {
        let label = match node.edge_label {
            Some(id) => Some(to_local.get(id).copied().flatten().ok_or_else(|| {
                Error::MalformedTree(format!("label {id} of node {} is not in the tree's system", node.id))
            })?),
            None => None,
        };
        parts.push((node.id, node.parent, label));
    }
    StructureTree::from_parts(system, json.root, &parts)
}

pub fn parse_tree<T: Scalar + DeserializeOwned>(
    text: &str,
    root_system: &Arc<SeparationSystem<T>>,
) -> Result<StructureTree<T>> {
    tree_from_json(&serde_json::from_str::<TreeJson<T>>(text)?, root_system)
}

/// Oriented ids of `set` in the loaded system, sorted.
pub fn origin_ids<T: Scalar>(system: &SeparationSystem<T>, set: &PartialOrientation) -> Vec<usize> {
    let mut ids: Vec<usize> = set.iter().map(|a| system.origin_of(a).0).collect();
    ids.sort_unstable();
    ids
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub members: Vec<usize>,
    pub evidence: Evidence,
}

pub fn witness_to_json<T: Scalar>(system: &SeparationSystem<T>, w: &Witness) -> WitnessJson {
    let o = |a: OrientedSepId| system.origin_of(a);
    let evidence = match &w.evidence {
        Evidence::Profile { r, s, join } => Evidence::Profile {
            r: o(*r),
            s: o(*s),
            join: o(*join),
        },
        Evidence::StrongProfile { r, s, t_inv } => Evidence::StrongProfile {
            r: o(*r),
            s: o(*s),
            t_inv: o(*t_inv),
        },
        other => other.clone(),
    };
    WitnessJson {
        members: origin_ids(system, &w.members),
        evidence,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangleJson {
    /// The minimal elements, which determine the tangle.
    pub minimal: Vec<usize>,
    pub members: Vec<usize>,
    /// Human-readable minimal elements.
    pub described: Vec<String>,
    /// For a `B_k`-tangle of a graph, the vertices of its `k`-block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<Vec<usize>>,
}

pub fn tangle_to_json<T: Scalar>(family: &ForbiddenFamily<T>, tau: &PartialOrientation) -> TangleJson {
    let system = family.system();
    let block = match family.kind() {
        FamilyKind::Blocks { k } => block_of_tangle(system, tau, k).ok().map(|b| b.ones().collect()),
        _ => None,
    };
    let minimal = minimal_elements(system, tau);
    let mut described: Vec<(usize, String)> = minimal
        .iter()
        .map(|a| (system.origin_of(a).0, system.describe(a)))
        .collect();
    described.sort();
    TangleJson {
        minimal: origin_ids(system, &minimal),
        members: origin_ids(system, tau),
        described: described.into_iter().map(|(_, d)| d).collect(),
        block,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelJson<T> {
    pub k: ThresholdJson<T>,
    pub separations: usize,
    pub tree: TreeJson<T>,
    pub tree_reduced: Option<TreeJson<T>>,
    pub reduction_steps: Vec<(usize, usize)>,
    pub structure_tree: bool,
    pub tangles: Vec<TangleJson>,
    pub f_tree: bool,
    pub certificates: Vec<WitnessJson>,
}

/// `report/v1`
#[derive(Clone, Debug, Serialize)]
pub struct ReportJson<T> {
    pub schema: String,
    pub family: String,
    pub separations: usize,
    pub tree_full: TreeJson<T>,
    pub tree_reduced: Option<TreeJson<T>>,
    pub reduction_steps: Vec<(usize, usize)>,
    pub structure_tree: bool,
    pub tangles: Vec<TangleJson>,
    pub f_tree: bool,
    pub certificates: Vec<WitnessJson>,
    pub per_k: Vec<LevelJson<T>>,
}

fn steps<T>(trace: &Option<ReductionTrace<T>>) -> Vec<(usize, usize)> {
    trace.as_ref().map(|t| t.steps.clone()).unwrap_or_default()
}

fn below<T: Scalar>(k: Threshold<T>) -> Option<Threshold<T>> {
    match k {
        Threshold::Unbounded => None,
        k => Some(k),
    }
}

pub fn level_to_json<T: Scalar>(level: &Level<T>) -> LevelJson<T> {
    let sys = &level.system;
    LevelJson {
        k: ThresholdJson::from_threshold(level.k),
        separations: sys.len(),
        tree: tree_to_json(&level.tree, below(level.k)),
        tree_reduced: level.reduced.as_ref().map(|t| tree_to_json(t, below(level.k))),
        reduction_steps: steps(&level.trace),
        structure_tree: level.structure_tree,
        tangles: level.tangles.iter().map(|t| tangle_to_json(&level.family, t)).collect(),
        f_tree: level.f_tree,
        certificates: level.certificates.iter().map(|w| witness_to_json(sys, w)).collect(),
    }
}

pub fn report_to_json<T: Scalar>(report: &Report<T>, family: &ForbiddenFamily<T>) -> ReportJson<T> {
    let sys = report.tree_full.system();
    ReportJson {
        schema: REPORT_SCHEMA.into(),
        family: family.kind().to_string(),
        separations: sys.len(),
        tree_full: tree_to_json(&report.tree_full, None),
        tree_reduced: report.tree_reduced.as_ref().map(|t| tree_to_json(t, None)),
        reduction_steps: steps(&report.trace),
        structure_tree: report.structure_tree,
        tangles: report.tangles.iter().map(|t| tangle_to_json(family, t)).collect(),
        f_tree: report.f_tree,
        certificates: report.certificates.iter().map(|w| witness_to_json(sys, w)).collect(),
        per_k: report.levels.iter().map(level_to_json).collect(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Edge list: one `u v` pair per line with 0-based vertices. Blank lines and
/// `#` comments are ignored. A first line holding a single integer gives the
/// vertex count; otherwise it is one more than the largest vertex.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared = None;
    let mut edges = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| Error::Input(format!("line {}: {f:?} is not a vertex index", lineno + 1)))
        };
        match fields.as_slice() {
            [n] if first => declared = Some(parse(n)?),
            [u, v] => edges.push((parse(u)?, parse(v)?)),
            _ => return Err(Error::Input(format!("line {}: expected \"u v\"", lineno + 1))),
        }
        first = false;
    }
    let n = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Graph::new(n, &edges)
}

fn csv_rows(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => Error::Input(format!("ragged CSV row: {e}")),
            _ => Error::Csv(e),
        })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

/// A square, symmetric, non-negative similarity matrix without header.
pub fn parse_similarity_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let rows = csv_rows(text)?;
    let n = rows.len();
    let mut matrix = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Input(format!("similarity row {i} has {} entries, expected {n}", row.len())));
        }
        let values = row
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| Error::Input(format!("similarity entry {cell:?} in row {i} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        matrix.push(values);
    }
    Ok(matrix)
}

/// A persons × questions matrix of answers: `1/0`, `yes/no`, `true/false`.
pub fn parse_answers_csv(text: &str) -> Result<Vec<Vec<bool>>> {
    csv_rows(text)?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|cell| match cell.to_ascii_lowercase().as_str() {
                    "1" | "yes" | "y" | "true" => Ok(true),
                    "0" | "no" | "n" | "false" => Ok(false),
                    other => Err(Error::Input(format!("answer {other:?} in row {i} is not binary"))),
                })
                .collect()
        })
        .collect()
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}
