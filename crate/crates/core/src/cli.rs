//! Command-line front end.
//!
//! Exit codes: 0 success or a tangle exists, 1 an `F`-tree certificate was
//! produced, 2 invalid input, 3 a budget was exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::builder::{pipeline_at, reduce, BuildConfig, Level};
use crate::dot::tree_to_dot;
use crate::error::{Error, Result};
use crate::forbidden::{FamilyKind, ForbiddenFamily};
use crate::ground::{bipartition_system, graph_system, questionnaire_system, BipartitionGround, OrderRule, QuestionOrder};
use crate::io::{
    self, parse_family_kind, tangle_to_json, tree_to_json, witness_to_json, FamilyJson, TangleJson,
    ThresholdJson, TreeJson, WitnessJson,
};
use crate::oracle::{all_consistent_orientations, all_tangles, OracleBudget};
use crate::sepsys::{validate, AxiomViolation, OrientedSepId, SeparationSystem, Threshold};
use crate::tree::StructureTree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tangle-forge", version, about = "Tangle structure trees, tangles and F-tree certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the separation system axioms and the family against the input.
    Validate(RunArgs),
    /// Build, restrict and reduce; writes a report/v1 JSON.
    Build(RunArgs),
    /// Reduce a tree (tree/v1 or the full tree of a report/v1) to an irreducible one.
    Reduce(RunArgs),
    /// Restrict a tree to the separations of order below `--k`.
    Restrict(RunArgs),
    /// List the tangles displayed by the structure tree at each threshold.
    Tangles(RunArgs),
    /// Exit 0 with the tangles when some exist at `--k`, exit 1 with an F-tree otherwise.
    Certify(RunArgs),
    /// Enumerate tangles exhaustively.
    Oracle(RunArgs),
    /// Emit a structure tree as Graphviz DOT.
    ExportDot(RunArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Edge list: `u v` per line, optional vertex count on the first line.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Square similarity matrix (CSV); the system is every bipartition of the points.
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    /// Persons × questions answer matrix (CSV of 0/1).
    #[arg(long)]
    pub answers: Option<PathBuf>,
    /// A sepsys/v1 JSON system.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Dot,
}

/// Settings shared by all subcommands.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// KIND[:PARAM]: empty, blocks:K, cluster:N, profile, strong-profile, graph-tangle, explicit:PATH.
    #[arg(long, default_value = "empty")]
    pub family: String,
    /// Threshold: a number, or `all`. Repeatable.
    #[arg(long = "k")]
    pub k: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Maximum number of separations the oracle may enumerate.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Input tree (tree/v1, or report/v1 for its full tree).
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// For graphs: keep separations with fewer than this many separator vertices.
    /// Defaults to `k` of a `blocks:k` family.
    #[arg(long)]
    pub order_below: Option<usize>,
    /// Also write the DOT of the resulting tree here.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Order of questionnaire separations.
    #[arg(long, value_enum, default_value_t = QuestionRule::Agreement)]
    pub question_order: QuestionRule,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum QuestionRule {
    #[default]
    Agreement,
    Balance,
}

enum FamilySpec {
    Kind(FamilyKind),
    File(PathBuf),
}

fn parse_family_spec(text: &str) -> Result<FamilySpec> {
    match text.split_once(':') {
        Some((name, path)) if name.trim().eq_ignore_ascii_case("explicit") => Ok(FamilySpec::File(path.into())),
        _ => match parse_family_kind(text)? {
            FamilyKind::Explicit => Err(Error::Input("explicit families are given as explicit:PATH".into())),
            kind => Ok(FamilySpec::Kind(kind)),
        },
    }
}

fn parse_threshold(text: &str) -> Result<Threshold<f64>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(Threshold::Unbounded);
    }
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("threshold {text:?} is neither a number nor \"all\"")))?;
    if !v.is_finite() {
        return Err(Error::Input(format!("threshold {text:?} is not finite")));
    }
    Ok(Threshold::Below(v))
}

struct Session {
    args: RunArgs,
    family_spec: FamilySpec,
    system: Arc<SeparationSystem<f64>>,
}

impl Session {
    fn open(args: RunArgs) -> Result<Session> {
        let family_spec = parse_family_spec(&args.family)?;
        let system = load_system(&args, &family_spec)?;
        Ok(Session {
            args,
            family_spec,
            system: Arc::new(system),
        })
    }

    fn family(&self) -> Result<ForbiddenFamily<f64>> {
        match &self.family_spec {
            FamilySpec::Kind(kind) => ForbiddenFamily::make(&self.system, *kind),
            FamilySpec::File(path) => {
                let text = io::read_to_string(path)?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                if value.is_array() {
                    let members: Vec<Vec<usize>> = serde_json::from_value(value)?;
                    let members: Vec<Vec<OrientedSepId>> =
                        members.into_iter().map(|m| m.into_iter().map(OrientedSepId).collect()).collect();
                    ForbiddenFamily::make_explicit(&self.system, &members)
                } else {
                    serde_json::from_value::<FamilyJson>(value)?.into_family(&self.system)
                }
            }
        }
    }

    fn thresholds(&self) -> Result<Vec<Threshold<f64>>> {
        self.args.k.iter().map(|k| parse_threshold(k)).collect()
    }

    fn single_threshold(&self) -> Result<Threshold<f64>> {
        match self.thresholds()?.as_slice() {
            [] => Ok(Threshold::Unbounded),
            [k] => Ok(*k),
            _ => Err(Error::Input("this command takes at most one --k".into())),
        }
    }

    fn budget(&self) -> Result<OracleBudget> {
        match self.args.budget {
            Some(n) => Ok(OracleBudget::with_max_separations(n)),
            None => OracleBudget::from_env(),
        }
    }

    fn load_tree(&self) -> Result<StructureTree<f64>> {
        let path = self
            .args
            .tree
            .as_ref()
            .ok_or_else(|| Error::Input("this command needs --tree".into()))?;
        let value: serde_json::Value = serde_json::from_str(&io::read_to_string(path)?)?;
        let tree_value = match value.get("schema").and_then(|s| s.as_str()) {
            Some(io::REPORT_SCHEMA) => value
                .get("tree_full")
                .cloned()
                .ok_or_else(|| Error::Input("report has no tree_full".into()))?,
            _ => value,
        };
        let json: TreeJson<f64> = serde_json::from_value(tree_value)?;
        io::tree_from_json(&json, &self.system)
    }
}

fn load_system(args: &RunArgs, family: &FamilySpec) -> Result<SeparationSystem<f64>> {
    let input = &args.input;
    if let Some(path) = &input.graph {
        let graph = io::parse_edge_list(&io::read_to_string(path)?)?;
        let k = match (args.order_below, family) {
            (Some(k), _) => k,
            (None, FamilySpec::Kind(FamilyKind::Blocks { k })) => *k,
            _ => {
                return Err(Error::Input(
                    "graph input needs --order-below unless the family is blocks:k".into(),
                ))
            }
        };
        return graph_system(&graph, k);
    }
    if let Some(path) = &input.similarity {
        let sim = io::parse_similarity_csv(&io::read_to_string(path)?)?;
        let ground = BipartitionGround::all_subsets(sim.len(), OrderRule::CutWeight(sim))?;
        return bipartition_system(&ground);
    }
    if let Some(path) = &input.answers {
        let answers = io::parse_answers_csv(&io::read_to_string(path)?)?;
        let rule = match args.question_order {
            QuestionRule::Agreement => QuestionOrder::Agreement,
            QuestionRule::Balance => QuestionOrder::Balance,
        };
        return Ok(questionnaire_system::<f64>(&answers, rule)?.system);
    }
    if let Some(path) = &input.system {
        let spec = io::parse_system_spec::<f64>(&io::read_to_string(path)?)?;
        return SeparationSystem::from_spec(spec);
    }
    Err(Error::Input("no input given".into()))
}

/// What a command produced: the text to write and the exit code.
struct Outcome {
    text: String,
    code: i32,
    message: Option<String>,
}

impl Outcome {
    fn json<S: Serialize>(value: &S, code: i32) -> Result<Outcome> {
        Ok(Outcome {
            text: io::to_json_string(value)?,
            code,
            message: None,
        })
    }
}

/// Parses the command line, runs it and returns the exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli, &mut std::io::stdout(), &mut std::io::stderr()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
    }
}

/// Runs a parsed command. Output goes to `--out` when given, else to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = dispatch(cli.command).and_then(|(outcome, out, dot)| {
        match out {
            Some(path) => write_file(&path, &outcome.text)?,
            None => stdout.write_all(outcome.text.as_bytes())?,
        }
        if let Some((path, text)) = dot {
            write_file(&path, &text)?;
        }
        if let Some(message) = &outcome.message {
            let _ = writeln!(stderr, "{message}");
        }
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// The exit code an error maps to.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) | Error::NodeCapExceeded(_) => EXIT_BUDGET,
        _ => EXIT_INVALID,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

type Dispatched = (Outcome, Option<PathBuf>, Option<(PathBuf, String)>);

fn dispatch(command: Command) -> Result<Dispatched> {
    let (name, args) = match command {
        Command::Validate(a) => ("validate", a),
        Command::Build(a) => ("build", a),
        Command::Reduce(a) => ("reduce", a),
        Command::Restrict(a) => ("restrict", a),
        Command::Tangles(a) => ("tangles", a),
        Command::Certify(a) => ("certify", a),
        Command::Oracle(a) => ("oracle", a),
        Command::ExportDot(a) => ("export-dot", a),
    };
    if name == "validate" {
        let out = args.out.clone();
        return Ok((cmd_validate(args)?, out, None));
    }
    let session = Session::open(args)?;
    let family = session.family()?;
    let mut dot = None;
    let outcome = match name {
        "build" => {
            let (outcome, tree) = cmd_build(&session, &family)?;
            if let Some(path) = &session.args.dot {
                dot = Some((path.clone(), tree_to_dot(&tree, &family_for(&tree, &family)?)?));
            }
            outcome
        }
        "reduce" => cmd_reduce(&session, &family)?,
        "restrict" => cmd_restrict(&session, &family)?,
        "tangles" => cmd_tangles(&session, &family)?,
        "certify" => cmd_certify(&session, &family)?,
        "oracle" => cmd_oracle(&session, &family)?,
        _ => cmd_export_dot(&session, &family)?,
    };
    Ok((outcome, session.args.out.clone(), dot))
}

fn family_for(tree: &StructureTree<f64>, family: &ForbiddenFamily<f64>) -> Result<ForbiddenFamily<f64>> {
    if Arc::ptr_eq(tree.system(), family.system()) {
        Ok(family.clone())
    } else {
        family.restrict_to(tree.system())
    }
}

#[derive(Serialize)]
struct ValidationJson {
    schema: &'static str,
    valid: bool,
    separations: usize,
    violations: Vec<AxiomViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyCheck>,
}

#[derive(Serialize)]
struct FamilyCheck {
    kind: String,
    standard: bool,
    /// Co-trivial elements whose singletons are not forbidden.
    non_standard: Vec<usize>,
}

fn cmd_validate(args: RunArgs) -> Result<Outcome> {
    let family_spec = parse_family_spec(&args.family)?;
    if let Some(path) = &args.input.system {
        let spec = io::parse_system_spec::<f64>(&io::read_to_string(path)?)?;
        let report = validate(&spec);
        if !report.is_valid() {
            let names: Vec<&str> = report.violations.iter().map(AxiomViolation::axiom).collect();
            let message = format!("error: invalid separation system: {} ({report})", names.join(", "));
            let mut outcome = Outcome::json(
                &ValidationJson {
                    schema: "validation/v1",
                    valid: false,
                    separations: spec.count,
                    violations: report.violations,
                    family: None,
                },
                EXIT_INVALID,
            )?;
            outcome.message = Some(message);
            return Ok(outcome);
        }
    }
    let session = Session {
        system: Arc::new(load_system(&args, &family_spec)?),
        args,
        family_spec,
    };
    let family = session.family()?;
    let non_standard: Vec<usize> = family
        .standardness_counterexamples()
        .into_iter()
        .map(|a| session.system.origin_of(a).0)
        .collect();
    Outcome::json(
        &ValidationJson {
            schema: "validation/v1",
            valid: true,
            separations: session.system.len(),
            violations: Vec::new(),
            family: Some(FamilyCheck {
                kind: family.kind().to_string(),
                standard: non_standard.is_empty(),
                non_standard,
            }),
        },
        EXIT_OK,
    )
}

fn thresholds_or_default(session: &Session) -> Result<Vec<Threshold<f64>>> {
    let given = session.thresholds()?;
    Ok(if given.is_empty() {
        crate::builder::default_thresholds(&session.system)
    } else {
        given
    })
}

fn cmd_build(session: &Session, family: &ForbiddenFamily<f64>) -> Result<(Outcome, StructureTree<f64>)> {
    let thresholds = thresholds_or_default(session)?;
    let report = pipeline_at(&session.system, family, &BuildConfig::default(), &thresholds)?;
    let json = io::report_to_json(&report, family);
    let shown = report.tree_reduced.clone().unwrap_or_else(|| report.tree_full.clone());
    let outcome = match session.args.format {
        Format::Json => Outcome::json(&json, EXIT_OK)?,
        Format::Dot => Outcome {
            text: tree_to_dot(&shown, family)?,
            code: EXIT_OK,
            message: None,
        },
    };
    Ok((outcome, shown))
}

#[derive(Serialize)]
struct ReductionJson {
    schema: &'static str,
    tree: TreeJson<f64>,
    steps: Vec<(usize, usize)>,
}

fn below(tree: &StructureTree<f64>, root_len: usize, k: Option<Threshold<f64>>) -> Option<Threshold<f64>> {
    if tree.system().len() == root_len && k.is_none() {
        None
    } else {
        k
    }
}

fn stored_threshold(session: &Session) -> Result<Option<Threshold<f64>>> {
    let Some(path) = &session.args.tree else { return Ok(None) };
    let value: serde_json::Value = serde_json::from_str(&io::read_to_string(path)?)?;
    let tree = match value.get("schema").and_then(|s| s.as_str()) {
        Some(io::REPORT_SCHEMA) => value.get("tree_full").cloned().unwrap_or_default(),
        _ => value,
    };
    match tree.get("system_ref").and_then(|r| r.get("below")) {
        Some(v) if !v.is_null() => {
            let k: ThresholdJson<f64> = serde_json::from_value(v.clone())?;
            Ok(Some(k.to_threshold()?))
        }
        _ => Ok(None),
    }
}

fn cmd_reduce(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let tree = session.load_tree()?;
    let family = family_for(&tree, family)?;
    let (reduced, trace) = reduce(&tree, &family)?;
    let k = below(&reduced, session.system.len(), stored_threshold(session)?);
    match session.args.format {
        Format::Json => Outcome::json(
            &ReductionJson {
                schema: "reduction/v1",
                tree: tree_to_json(&reduced, k),
                steps: trace.steps,
            },
            EXIT_OK,
        ),
        Format::Dot => Ok(Outcome {
            text: tree_to_dot(&reduced, &family)?,
            code: EXIT_OK,
            message: None,
        }),
    }
}

fn cmd_restrict(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let tree = session.load_tree()?;
    let k = match session.thresholds()?.as_slice() {
        [k] => *k,
        _ => return Err(Error::Input("restrict needs exactly one --k".into())),
    };
    let restricted = tree.restrict(k)?;
    let combined = match stored_threshold(session)? {
        Some(k0) => k0.min(k),
        None => k,
    };
    match session.args.format {
        Format::Json => Outcome::json(&tree_to_json(&restricted, Some(combined)), EXIT_OK),
        Format::Dot => Ok(Outcome {
            text: tree_to_dot(&restricted, &family_for(&restricted, family)?)?,
            code: EXIT_OK,
            message: None,
        }),
    }
}

#[derive(Serialize)]
struct TangleLevelJson {
    k: ThresholdJson<f64>,
    separations: usize,
    structure_tree: bool,
    tangles: Vec<TangleJson>,
}

#[derive(Serialize)]
struct TanglesJson {
    schema: &'static str,
    family: String,
    levels: Vec<TangleLevelJson>,
}

fn not_structure_tree(level: &Level<f64>) -> Error {
    let violation = level
        .tree
        .check_structure_tree(&level.family)
        .err()
        .map(|v| v.to_string())
        .unwrap_or_default();
    Error::Input(format!(
        "no structure tree at threshold {}: {violation}; the family is not rich or not standard",
        level.k
    ))
}

fn cmd_tangles(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let thresholds = thresholds_or_default(session)?;
    let report = pipeline_at(&session.system, family, &BuildConfig::default(), &thresholds)?;
    let mut levels = Vec::new();
    for level in &report.levels {
        if !level.structure_tree {
            return Err(not_structure_tree(level));
        }
        levels.push(TangleLevelJson {
            k: ThresholdJson::from_threshold(level.k),
            separations: level.system.len(),
            structure_tree: level.structure_tree,
            tangles: level.tangles.iter().map(|t| tangle_to_json(&level.family, t)).collect(),
        });
    }
    Outcome::json(
        &TanglesJson {
            schema: "tangles/v1",
            family: family.kind().to_string(),
            levels,
        },
        EXIT_OK,
    )
}

#[derive(Serialize)]
struct CertificateJson {
    schema: &'static str,
    outcome: &'static str,
    k: ThresholdJson<f64>,
    separations: usize,
    tangles: Vec<TangleJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_tree: Option<TreeJson<f64>>,
    certificates: Vec<WitnessJson>,
}

fn cmd_certify(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let k = session.single_threshold()?;
    let report = pipeline_at(&session.system, family, &BuildConfig::default(), &[k])?;
    let level = &report.levels[0];
    if !level.structure_tree {
        return Err(not_structure_tree(level));
    }
    let stored = match k {
        Threshold::Unbounded => None,
        k => Some(k),
    };
    if !level.tangles.is_empty() {
        return Outcome::json(
            &CertificateJson {
                schema: "certificate/v1",
                outcome: "tangles",
                k: ThresholdJson::from_threshold(k),
                separations: level.system.len(),
                tangles: level.tangles.iter().map(|t| tangle_to_json(&level.family, t)).collect(),
                f_tree: None,
                certificates: Vec::new(),
            },
            EXIT_OK,
        );
    }
    let tree = level.reduced.as_ref().unwrap_or(&level.tree);
    match session.args.format {
        Format::Dot => Ok(Outcome {
            text: tree_to_dot(tree, &level.family)?,
            code: EXIT_CERTIFICATE,
            message: None,
        }),
        Format::Json => Outcome::json(
            &CertificateJson {
                schema: "certificate/v1",
                outcome: "f-tree",
                k: ThresholdJson::from_threshold(k),
                separations: level.system.len(),
                tangles: Vec::new(),
                f_tree: Some(tree_to_json(tree, stored)),
                certificates: level
                    .certificates
                    .iter()
                    .map(|w| witness_to_json(&level.system, w))
                    .collect(),
            },
            EXIT_CERTIFICATE,
        ),
    }
}

#[derive(Serialize)]
struct OracleJson {
    schema: &'static str,
    family: String,
    k: ThresholdJson<f64>,
    separations: usize,
    consistent_orientations: usize,
    tangles: Vec<TangleJson>,
}

fn cmd_oracle(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let k = session.single_threshold()?;
    let budget = session.budget()?;
    let sub = Arc::new(session.system.restrict_below(k));
    let sub_family = family.restrict_to(&sub)?;
    let consistent = all_consistent_orientations(&sub, &budget)?;
    let tangles = all_tangles(&sub, &sub_family, &budget)?;
    Outcome::json(
        &OracleJson {
            schema: "oracle/v1",
            family: family.kind().to_string(),
            k: ThresholdJson::from_threshold(k),
            separations: sub.len(),
            consistent_orientations: consistent.len(),
            tangles: tangles.iter().map(|t| tangle_to_json(&sub_family, t)).collect(),
        },
        EXIT_OK,
    )
}

fn cmd_export_dot(session: &Session, family: &ForbiddenFamily<f64>) -> Result<Outcome> {
    let tree = match &session.args.tree {
        Some(_) => session.load_tree()?,
        None => {
            let k = session.single_threshold()?;
            let report = pipeline_at(&session.system, family, &BuildConfig::default(), &[k])?;
            let level = report.levels.into_iter().next().expect("one threshold requested");
            level.reduced.unwrap_or(level.tree)
        }
    };
    Ok(Outcome {
        text: tree_to_dot(&tree, &family_for(&tree, family)?)?,
        code: EXIT_OK,
        message: None,
    })
}
