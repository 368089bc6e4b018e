use std::path::PathBuf;

use per1_core::algebra::Lambda;
use per1_core::dynamics::Sign;
use per1_core::measure::{Resolution, Window};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

/// Which critical point(s) a command follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignChoice {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "both")]
    Both,
}

impl SignChoice {
    pub fn signs(self) -> Vec<Sign> {
        match self {
            SignChoice::Plus => vec![Sign::Plus],
            SignChoice::Minus => vec![Sign::Minus],
            SignChoice::Both => Sign::both().to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RenderKind {
    /// Grayscale image of the critical orbit with the locus masked.
    Locus,
    /// Discrete Laplacian of the escape rate.
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityChoice {
    ClosedForm,
    Resultant,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    H12,
    Symmetry,
    Sandwich,
    Resultant,
    GlobalSums,
    Heights,
    Witness,
    Claim2,
    Distinct,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::H12,
        Check::Symmetry,
        Check::Sandwich,
        Check::Resultant,
        Check::GlobalSums,
        Check::Heights,
        Check::Witness,
        Check::Claim2,
        Check::Distinct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::H12 => "h12",
            Check::Symmetry => "symmetry",
            Check::Sandwich => "sandwich",
            Check::Resultant => "resultant",
            Check::GlobalSums => "global-sums",
            Check::Heights => "heights",
            Check::Witness => "witness",
            Check::Claim2 => "claim2",
            Check::Distinct => "distinct",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Task {
    Render {
        lambda: Lambda,
        window: Window,
        resolution: Resolution,
        sign: SignChoice,
        kind: RenderKind,
    },
    Pcf {
        lambda: Lambda,
        n: u32,
        m: u32,
        sign: Sign,
        format: OutputFormat,
    },
    Verify {
        checks: Vec<Check>,
        /// Overrides the parameters of the checks that take one.
        lambda: Option<Lambda>,
        inject_fault: bool,
    },
    Heights {
        lambda: Lambda,
        t: Lambda,
        sign: Sign,
        terms: usize,
    },
    Gamma {
        lambda: Lambda,
        /// Empty for the global sum only.
        places: Vec<String>,
        terms: usize,
    },
    Capacity {
        lambda: Lambda,
        mode: CapacityChoice,
        n: u32,
        n_max: u32,
    },
}

/// A fully resolved invocation. Serialising it and running the result
/// reproduces the original outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub task: Task,
    pub tol: f64,
    /// Output stem; files get extensions appended.
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<RunConfig> {
        serde_json::from_str(s)
    }

    pub fn subcommand(&self) -> &'static str {
        match self.task {
            Task::Render { .. } => "render",
            Task::Pcf { .. } => "pcf",
            Task::Verify { .. } => "verify",
            Task::Heights { .. } => "heights",
            Task::Gamma { .. } => "gamma",
            Task::Capacity { .. } => "capacity",
        }
    }
}
