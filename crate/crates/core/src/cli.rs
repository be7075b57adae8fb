//! Network specification files and the `ghznet` command runner.
//!
//! Grammar, one declaration per line (`#` starts a comment):
//!
//! ```text
//! agents N
//! edge i j [w]        # EPR pair between agents i and j, optional weight
//! hyper i j k ...     # shared GHZ-form state among the listed agents
//! ```
//!
//! `agents` must come first. A file holds either `edge` or `hyper` lines.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::protocols::{
    run_protocol_one, run_protocol_three, run_protocol_two, BranchMode, CorrectionRule,
    ProtocolError, ProtocolReport, ProtocolTwoOptions, Step2Variant, Step3Order,
};
use crate::topology::{
    AgentId, EntangledHypergraph, EprGraph, MergeStep, SpanningTree, TopologyError,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DISCONNECTED: i32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: TopologyError },
    #[error("missing `agents N` line")]
    MissingAgents,
}

fn syntax(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecBody {
    Edges(Vec<(u32, u32, Option<f64>)>),
    Hyperedges(Vec<Vec<u32>>),
}

/// A parsed and validated specification file.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub n: u32,
    pub body: SpecBody,
}

fn parse_id(tok: &str, line: usize) -> Result<u32, SpecError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected an agent number, found `{tok}`")))
}

pub fn parse_spec(text: &str) -> Result<NetworkSpec, SpecError> {
    let mut n = None;
    let mut graph: Option<EprGraph> = None;
    let mut edges = Vec::new();
    let mut hyper: Vec<Vec<u32>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&kw, args)) = toks.split_first() else {
            continue;
        };
        let Some(agents) = n else {
            if kw != "agents" {
                return Err(syntax(line, "the first declaration must be `agents N`"));
            }
            let [count] = args else {
                return Err(syntax(line, "`agents` takes exactly one number"));
            };
            let count = parse_id(count, line)?;
            let g = EprGraph::new(count).map_err(|source| SpecError::Invalid { line, source })?;
            n = Some(count);
            graph = Some(g);
            continue;
        };
        match kw {
            "agents" => return Err(syntax(line, "`agents` declared twice")),
            "edge" => {
                if !hyper.is_empty() {
                    return Err(syntax(line, "cannot mix `edge` and `hyper` declarations"));
                }
                let (a, b, w) = match args {
                    [a, b] => (parse_id(a, line)?, parse_id(b, line)?, None),
                    [a, b, w] => {
                        let w = f64::from_str(w)
                            .map_err(|_| syntax(line, format!("expected a weight, found `{w}`")))?;
                        (parse_id(a, line)?, parse_id(b, line)?, Some(w))
                    }
                    _ => {
                        return Err(syntax(
                            line,
                            "`edge` takes two agents and an optional weight",
                        ))
                    }
                };
                let g = graph.as_mut().expect("set with n");
                match w {
                    Some(w) => g.add_weighted_edge(a, b, w),
                    None => g.add_edge(a, b),
                }
                .map_err(|source| SpecError::Invalid { line, source })?;
                edges.push((a, b, w));
            }
            "hyper" => {
                if !edges.is_empty() {
                    return Err(syntax(line, "cannot mix `edge` and `hyper` declarations"));
                }
                let members = args
                    .iter()
                    .map(|t| parse_id(t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                hyper.push(members);
                // earlier lines already validated, so any error is this line's
                EntangledHypergraph::new(agents, &hyper)
                    .map_err(|source| SpecError::Invalid { line, source })?;
            }
            other => return Err(syntax(line, format!("unknown declaration `{other}`"))),
        }
    }
    let n = n.ok_or(SpecError::MissingAgents)?;
    let body = if hyper.is_empty() {
        SpecBody::Edges(edges)
    } else {
        SpecBody::Hyperedges(hyper)
    };
    Ok(NetworkSpec { n, body })
}

impl fmt::Display for NetworkSpec {
    /// Normalized form: no comments, single spaces, one declaration per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "agents {}", self.n)?;
        match &self.body {
            SpecBody::Edges(edges) => {
                for (a, b, w) in edges {
                    match w {
                        Some(w) => writeln!(f, "edge {a} {b} {w}")?,
                        None => writeln!(f, "edge {a} {b}")?,
                    }
                }
            }
            SpecBody::Hyperedges(hs) => {
                for h in hs {
                    let ids: Vec<String> = h.iter().map(u32::to_string).collect();
                    writeln!(f, "hyper {}", ids.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

impl NetworkSpec {
    pub fn structure(&self) -> &'static str {
        match self.body {
            SpecBody::Edges(_) => "EPR graph",
            SpecBody::Hyperedges(_) => "entangled hypergraph",
        }
    }

    pub fn epr_graph(&self) -> Option<EprGraph> {
        let SpecBody::Edges(edges) = &self.body else {
            return None;
        };
        let mut g = EprGraph::new(self.n).expect("validated");
        for &(a, b, w) in edges {
            match w {
                Some(w) => g.add_weighted_edge(a, b, w),
                None => g.add_edge(a, b),
            }
            .expect("validated");
        }
        Some(g)
    }

    /// The hypergraph view; EPR pairs count as two-member hyperedges.
    pub fn hypergraph(&self) -> Result<EntangledHypergraph, TopologyError> {
        match &self.body {
            SpecBody::Hyperedges(hs) => EntangledHypergraph::new(self.n, hs),
            SpecBody::Edges(edges) => {
                let hs: Vec<Vec<u32>> = edges.iter().map(|&(a, b, _)| vec![a, b]).collect();
                EntangledHypergraph::new(self.n, &hs)
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        match self.epr_graph() {
            Some(g) => g.is_connected(),
            None => self.hypergraph().is_ok_and(|h| h.is_connected()),
        }
    }

    /// SHA-256 of the normalized form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Check,
    Tree,
    Mst,
    Ghz3,
    Weave,
    Fuse,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Check => "check",
            Subcommand::Tree => "tree",
            Subcommand::Mst => "mst",
            Subcommand::Ghz3 => "ghz3",
            Subcommand::Weave => "weave",
            Subcommand::Fuse => "fuse",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected `all` or `sample:<count>`, found `{0}`")]
pub struct BranchesParseError(String);

/// Parse `all` or `sample:<count>`.
pub fn parse_branches(s: &str) -> Result<BranchMode, BranchesParseError> {
    if s == "all" {
        return Ok(BranchMode::All);
    }
    s.strip_prefix("sample:")
        .and_then(|c| c.parse().ok())
        .filter(|&c: &usize| c > 0)
        .map(BranchMode::Sample)
        .ok_or_else(|| BranchesParseError(s.to_owned()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected `ascending`, `descending` or `shuffled:<seed>`, found `{0}`")]
pub struct OrderParseError(String);

pub fn parse_order(s: &str) -> Result<Step3Order, OrderParseError> {
    match s {
        "ascending" => Ok(Step3Order::Ascending),
        "descending" => Ok(Step3Order::Descending),
        _ => s
            .strip_prefix("shuffled:")
            .and_then(|v| v.parse().ok())
            .map(Step3Order::Shuffled)
            .ok_or_else(|| OrderParseError(s.to_owned())),
    }
}

fn order_label(order: Step3Order) -> String {
    match order {
        Step3Order::Ascending => "ascending".into(),
        Step3Order::Descending => "descending".into(),
        Step3Order::Shuffled(seed) => format!("shuffled:{seed}"),
    }
}

fn branches_label(mode: BranchMode) -> String {
    match mode {
        BranchMode::All => "all".into(),
        BranchMode::Sample(c) => format!("sample:{c}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunFlags {
    pub seed: u64,
    pub branches: BranchMode,
    pub step2: Step2Variant,
    pub order: Step3Order,
    pub verbose: bool,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            seed: 0,
            branches: BranchMode::All,
            step2: Step2Variant::Symmetric,
            order: Step3Order::Ascending,
            verbose: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeSummary {
    pub edges: Vec<(AgentId, AgentId)>,
    pub root_leaf: AgentId,
    pub start: AgentId,
    pub leaves: Vec<AgentId>,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl TreeSummary {
    fn new(tree: &SpanningTree, weight: Option<f64>) -> Self {
        Self {
            edges: tree.edges().to_vec(),
            root_leaf: tree.root_leaf(),
            start: tree.start(),
            leaves: tree.leaves().iter().copied().collect(),
            k: tree.k(),
            weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyVerdict {
    pub structure: &'static str,
    pub n: u32,
    pub connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_schedule: Option<Vec<MergeStep>>,
}

/// The machine-readable result of one invocation. Field order is the JSON
/// key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Subcommand,
    pub spec_sha256: String,
    pub seed: u64,
    pub branches: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step2: Option<Step2Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<String>,
    pub topology: TopologyVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolReport>,
    pub exit_code: i32,
    pub message: String,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A finished run: the report, the human-readable summary and the status.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub text: String,
    pub exit_code: i32,
}

fn rejection(spec: &NetworkSpec) -> String {
    let err = match spec.epr_graph() {
        Some(g) => g.spanning_tree().err(),
        None => spec
            .hypergraph()
            .and_then(|h| h.merge_schedule().map(|_| ()))
            .err(),
    };
    match err {
        Some(e) => e.to_string(),
        None => format!("{} is disconnected", spec.structure()),
    }
}

fn protocol_exit(err: &ProtocolError) -> i32 {
    match err {
        ProtocolError::Topology(TopologyError::Disconnected { .. }) => EXIT_DISCONNECTED,
        _ => EXIT_FAILURE,
    }
}

/// Execute `command` on `spec`. Never panics on bad input; failures are
/// reported through the exit code and message.
pub fn run(command: Subcommand, spec: &NetworkSpec, flags: &RunFlags) -> RunOutcome {
    let connected = spec.is_connected();
    let mut topology = TopologyVerdict {
        structure: spec.structure(),
        n: spec.n,
        connected,
        tree: None,
        merge_schedule: None,
    };
    let mut protocol = None;
    let mut text = String::new();

    let (exit_code, message) = if !connected {
        (EXIT_DISCONNECTED, rejection(spec))
    } else {
        match execute(command, spec, flags, &mut topology, &mut text) {
            Ok(Some(report)) => {
                let ok = report.passes();
                let msg = format!(
                    "Protocol {}: cbits {} (expected {}), worst fidelity {:.12}, {} branches{}",
                    report.protocol,
                    report.cbits,
                    report.expected_cbits,
                    report.worst_fidelity,
                    report.branch_count,
                    if ok { "" } else { ", CHECKS FAILED" }
                );
                if flags.verbose {
                    for b in &report.branches {
                        let _ = writeln!(
                            text,
                            "  branch {:>24}  p={:.6}  F={:.12}",
                            b.outcomes, b.probability, b.fidelity
                        );
                    }
                    let _ = writeln!(text, "transcript:");
                    for e in report.transcript.events() {
                        let _ = writeln!(
                            text,
                            "  {}",
                            serde_json::to_string(e).expect("event serializes")
                        );
                    }
                }
                protocol = Some(report);
                (if ok { EXIT_OK } else { EXIT_FAILURE }, msg)
            }
            Ok(None) => (EXIT_OK, format!("{} is connected", spec.structure())),
            Err(e) => (protocol_exit(&e), e.to_string()),
        }
    };
    let _ = writeln!(text, "{message}");

    let weave = command == Subcommand::Weave;
    let step2 = weave.then_some(flags.step2);
    let order = weave.then(|| order_label(flags.order));
    let report = RunReport {
        tool: "ghznet",
        version: TOOL_VERSION,
        command,
        spec_sha256: spec.hash(),
        seed: flags.seed,
        branches: branches_label(flags.branches),
        step2,
        order,
        topology,
        protocol,
        exit_code,
        message,
    };
    RunOutcome {
        report,
        text,
        exit_code,
    }
}

fn require_graph(spec: &NetworkSpec, command: Subcommand) -> Result<EprGraph, ProtocolError> {
    spec.epr_graph().ok_or_else(|| {
        ProtocolError::WrongTopology(format!("`{}` needs `edge` declarations", command.name()))
    })
}

fn describe_tree(text: &mut String, t: &TreeSummary) {
    let edges: Vec<String> = t
        .edges
        .iter()
        .map(|(a, b)| format!("{}-{}", a.0, b.0))
        .collect();
    let leaves: Vec<String> = t.leaves.iter().map(|a| a.0.to_string()).collect();
    let _ = writeln!(
        text,
        "tree edges: {}\nT = {}, S = {}, L = {{{}}}, k = {}",
        edges.join(" "),
        t.root_leaf.0,
        t.start.0,
        leaves.join(", "),
        t.k
    );
    if let Some(w) = t.weight {
        let _ = writeln!(text, "total weight: {w}");
    }
}

fn execute(
    command: Subcommand,
    spec: &NetworkSpec,
    flags: &RunFlags,
    topology: &mut TopologyVerdict,
    text: &mut String,
) -> Result<Option<ProtocolReport>, ProtocolError> {
    match command {
        Subcommand::Check => Ok(None),
        Subcommand::Tree | Subcommand::Mst => {
            let g = require_graph(spec, command)?;
            let (tree, weight) = if command == Subcommand::Mst {
                let t = g.minimum_spanning_tree()?;
                let w = g.tree_weight(&t);
                (t, Some(w))
            } else {
                (g.spanning_tree()?, None)
            };
            let summary = TreeSummary::new(&tree, weight);
            describe_tree(text, &summary);
            topology.tree = Some(summary);
            Ok(None)
        }
        Subcommand::Ghz3 => {
            let g = require_graph(spec, command)?;
            let center = (1..=3).map(AgentId).find(|&a| g.neighbors(a).len() == 2);
            let fits = g.n() == 3 && g.edge_count() == 2;
            let Some(sharer) = center.filter(|_| fits) else {
                return Err(ProtocolError::WrongTopology(
                    "`ghz3` needs 3 agents and EPR pairs from one agent to each of the others"
                        .into(),
                ));
            };
            let rule = CorrectionRule::from_cycle([AgentId(1), AgentId(2), AgentId(3)], sharer)?;
            run_protocol_one(&rule, flags.branches, flags.seed).map(Some)
        }
        Subcommand::Weave => {
            let g = require_graph(spec, command)?;
            let (tree, weight) = if g.has_weights() {
                let t = g.minimum_spanning_tree()?;
                let w = g.tree_weight(&t);
                (t, Some(w))
            } else {
                (g.spanning_tree()?, None)
            };
            let summary = TreeSummary::new(&tree, weight);
            describe_tree(text, &summary);
            topology.tree = Some(summary);
            let opts = ProtocolTwoOptions {
                step2: flags.step2,
                order: flags.order,
            };
            run_protocol_two(&tree, &opts, flags.branches, flags.seed).map(Some)
        }
        Subcommand::Fuse => {
            let h = spec.hypergraph()?;
            topology.merge_schedule = Some(h.merge_schedule()?);
            run_protocol_three(&h, flags.branches, flags.seed).map(Some)
        }
    }
}
