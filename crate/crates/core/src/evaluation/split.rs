//! Simulated "developer in the middle of a project" splits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Declaration, InvocationId, Project};
use crate::engine::ActiveQuery;
use crate::error::{Error, Result};

/// How much of a testing project is revealed to the engine.
///
/// `C1.x` keep roughly the first half of the declarations and use the last
/// one of that half as active declaration; `C2.x` keep everything and use the
/// last declaration. `x.1` reveals one invocation of the active
/// declaration, `x.2` reveals four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Configuration {
    #[serde(rename = "C1.1")]
    C11,
    #[serde(rename = "C1.2")]
    C12,
    #[serde(rename = "C2.1")]
    C21,
    #[serde(rename = "C2.2")]
    C22,
}

impl Configuration {
    pub const ALL: [Configuration; 4] = [Self::C11, Self::C12, Self::C21, Self::C22];

    /// π: invocations of the active declaration given as query.
    pub fn query_len(self) -> usize {
        match self {
            Self::C11 | Self::C21 => 1,
            Self::C12 | Self::C22 => 4,
        }
    }

    /// δ: complete context declarations kept for a project of `total` declarations.
    pub fn context_len(self, total: usize) -> usize {
        match self {
            Self::C11 | Self::C12 => (total / 2).saturating_sub(1),
            Self::C21 | Self::C22 => total.saturating_sub(1),
        }
    }

    fn min_declarations(self) -> usize {
        match self {
            Self::C11 | Self::C12 => 4,
            Self::C21 | Self::C22 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::C11 => "C1.1",
            Self::C12 => "C1.2",
            Self::C21 => "C2.1",
            Self::C22 => "C2.2",
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('.', "").as_str() {
            "c11" => Ok(Self::C11),
            "c12" => Ok(Self::C12),
            "c21" => Ok(Self::C21),
            "c22" => Ok(Self::C22),
            _ => Err(Error::InvalidArgument(format!("unknown configuration `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    TooFewDeclarations,
    ActiveTooShort,
    EmptyGroundTruth,
}

impl SkipReason {
    pub fn label(self) -> &'static str {
        match self {
            Self::TooFewDeclarations => "too_few_declarations",
            Self::ActiveTooShort => "active_too_short",
            Self::EmptyGroundTruth => "empty_ground_truth",
        }
    }
}

/// A testing project cut into context (P1), the partial active declaration
/// (P2) and removed declarations (P3).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSplit {
    pub context: Vec<Declaration>,
    /// The active declaration as originally written.
    pub active: Declaration,
    /// First π invocations of the active declaration, in source order.
    pub query: Vec<InvocationId>,
    /// Remaining invocations of the active declaration as a sorted set,
    /// minus anything already in the query.
    pub ground_truth: Vec<InvocationId>,
    pub removed: Vec<Declaration>,
}

impl EvalSplit {
    /// The invocations after the query prefix, in source order.
    pub fn hidden_sequence(&self) -> &[InvocationId] {
        &self.active.invocations()[self.query.len()..]
    }

    /// Engine query for this split: context declarations plus the active
    /// declaration truncated to its query prefix.
    pub fn to_query(&self, project: &Project, replaces: Option<usize>) -> ActiveQuery {
        let mut declarations = self.context.clone();
        declarations.push(Declaration::new(
            self.active.name.clone(),
            self.active.param_types.clone(),
            self.query.clone(),
            None,
        ));
        let active = declarations.len() - 1;
        ActiveQuery {
            project: Project::new(project.id.clone(), project.category.clone(), declarations),
            active,
            replaces,
        }
    }
}

pub fn split_project(project: &Project, configuration: Configuration) -> Result<EvalSplit, SkipReason> {
    let total = project.declarations.len();
    if total < configuration.min_declarations() {
        return Err(SkipReason::TooFewDeclarations);
    }
    let context_len = configuration.context_len(total);
    let active = &project.declarations[context_len];
    let pi = configuration.query_len();
    if active.invocations().len() <= pi {
        return Err(SkipReason::ActiveTooShort);
    }
    let query = active.invocations()[..pi].to_vec();
    let mut ground_truth: Vec<InvocationId> = active.invocations()[pi..]
        .iter()
        .copied()
        .filter(|id| !query.contains(id))
        .collect();
    ground_truth.sort_unstable();
    ground_truth.dedup();
    if ground_truth.is_empty() {
        return Err(SkipReason::EmptyGroundTruth);
    }
    Ok(EvalSplit {
        context: project.declarations[..context_len].to_vec(),
        active: active.clone(),
        query,
        ground_truth,
        removed: project.declarations[context_len + 1..].to_vec(),
    })
}
