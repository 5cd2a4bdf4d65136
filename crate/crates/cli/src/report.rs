//! Versioned report envelope and its JSON schema.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use pbna_core::feasibility::FeasibilityReport;
use pbna_core::netgraph::Network;
use pbna_core::simulate::SimResult;

use crate::sweep::OracleReport;

/// Bumped on any incompatible change to the report layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    pub tool_version: String,
    pub graph: GraphSummary,
    pub report: Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
}

impl GraphSummary {
    pub fn of(net: &Network) -> GraphSummary {
        GraphSummary {
            nodes: net.nodes().len(),
            edges: net.edges().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Check(FeasibilityReport),
    Simulate(Box<SimulationReport>),
    Oracle(OracleReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SimulationReport {
    pub feasibility: FeasibilityReport,
    /// Absent when the run was refused.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
}

impl ReportFile {
    pub fn new(net: &Network, report: Report) -> ReportFile {
        ReportFile {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            graph: GraphSummary::of(net),
            report,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn schema() -> schemars::schema::RootSchema {
    schemars::schema_for!(ReportFile)
}

pub fn schema_json() -> String {
    let mut s = serde_json::to_string_pretty(&schema()).expect("schema serializes");
    s.push('\n');
    s
}
