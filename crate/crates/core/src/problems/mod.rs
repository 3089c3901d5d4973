//! The seven problem families: instances, parsers and generators,
//! preprocessing, master rows, pricing models and branching rules.

mod arcs;
pub mod bpp;
pub mod fixtures;
pub mod gcp;
mod groups;
pub mod mrasp;
pub mod pdptw;
pub mod pms;
pub mod routing;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnp::BnpProblem;
use crate::colgen::{ColgenError, Column};
use crate::model::{Model, State, TransitionRef};

pub use arcs::{allowed_arcs, route_arcs};
pub use bpp::BppInstance;
pub use gcp::GcpInstance;
pub use groups::Groups;
pub use mrasp::MraspInstance;
pub use pdptw::{PdptwInstance, PdptwProblem};
pub use pms::{PmsConfig, PmsInstance};
pub use routing::{RoutingInstance, RoutingProblem};

/// Distance standing in for "no path"; finite so that products with zero
/// stay well defined.
pub const UNREACHABLE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Semantic(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
}

impl InstanceError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        InstanceError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Bpp,
    Gcp,
    Pms,
    Mrasp,
    Vrptw,
    #[serde(rename = "cumvrptw")]
    CumVrptw,
    Pdptw,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Bpp,
        ProblemKind::Gcp,
        ProblemKind::Pms,
        ProblemKind::Mrasp,
        ProblemKind::Vrptw,
        ProblemKind::CumVrptw,
        ProblemKind::Pdptw,
    ];
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Bpp => "bpp",
            ProblemKind::Gcp => "gcp",
            ProblemKind::Pms => "pms",
            ProblemKind::Mrasp => "mrasp",
            ProblemKind::Vrptw => "vrptw",
            ProblemKind::CumVrptw => "cumvrptw",
            ProblemKind::Pdptw => "pdptw",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown problem `{s}`"))
    }
}

/// A rendering of an integer solution in problem terms. Indices are the
/// instance's own (0-based items, vertices, jobs and aircraft; routing nodes
/// as numbered in the instance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolutionView {
    Bins { bins: Vec<Vec<usize>> },
    ColorClasses { classes: Vec<Vec<usize>> },
    Schedules { machines: Vec<Vec<TimedTask>> },
    RunwayPlans { runways: Vec<Vec<TimedTask>> },
    Routes { routes: Vec<Route> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedTask {
    pub id: usize,
    pub start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

/// A problem family that can also describe its solutions.
pub trait Family: BnpProblem {
    fn kind(&self) -> ProblemKind;

    /// Renders the selected columns (with multiplicities).
    fn render(&self, columns: &[(Column, u32)]) -> SolutionView;
}

/// States visited along `path` from the target, one per transition (the
/// state the transition is applied to).
pub(crate) fn replay(model: &Model, path: &[TransitionRef]) -> Result<Vec<State>, ColgenError> {
    let mut state = model.target().clone();
    let mut out = Vec::with_capacity(path.len());
    for &t in path {
        let next = model.apply_checked(t, &state)?;
        out.push(std::mem::replace(&mut state, next));
    }
    Ok(out)
}

/// Splits a text into whitespace-separated numbers per line, keeping the
/// 1-based line and column of each token.
pub(crate) fn numeric_lines(text: &str) -> Result<Vec<(usize, Vec<f64>)>, InstanceError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut values = Vec::new();
        let mut offset = 0;
        for token in line.split_whitespace() {
            let col = line[offset..].find(token).map_or(offset, |p| p + offset);
            offset = col + token.len();
            let v = token
                .parse::<f64>()
                .map_err(|_| InstanceError::parse(ln + 1, col + 1, format!("expected a number, found `{token}`")))?;
            values.push(v);
        }
        if !values.is_empty() {
            out.push((ln + 1, values));
        }
    }
    Ok(out)
}

pub(crate) fn require_integer(v: f64, line: usize, what: &str) -> Result<usize, InstanceError> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(InstanceError::parse(line, 1, format!("{what} must be a nonnegative integer")));
    }
    Ok(v as usize)
}

fn all_integral(values: impl IntoIterator<Item = f64>) -> bool {
    values.into_iter().all(|v| v.fract() == 0.0)
}
