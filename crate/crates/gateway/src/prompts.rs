use std::fmt;
use std::str::FromStr;

use motorscene_core::evaluation::OutputKind;
use serde::{Deserialize, Serialize};

use crate::GatewayError;

const SIMPLE_CGA: &str = include_str!("../prompts/simple_cga.txt");
const SIMPLE_CGA_VERBOSE: &str = include_str!("../prompts/simple_cga_verbose.txt");
const SHENLONG_CGA: &str = include_str!("../prompts/shenlong_cga.txt");
const EUCLIDEAN_MAT4: &str = include_str!("../prompts/euclidean_mat4.txt");
const COMPACT_SE3: &str = include_str!("../prompts/compact_se3.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    SimpleCga,
    ShenlongCga,
    EuclideanMat4,
    CompactSe3,
    /// Longer Simple prompt used only by the prompt-length ablation.
    SimpleCgaVerbose,
}

impl StrategyName {
    /// The four strategies of the main comparisons, in table order.
    pub const MAIN: [StrategyName; 4] = [
        StrategyName::SimpleCga,
        StrategyName::ShenlongCga,
        StrategyName::EuclideanMat4,
        StrategyName::CompactSe3,
    ];

    pub const ALL: [StrategyName; 5] = [
        StrategyName::SimpleCga,
        StrategyName::ShenlongCga,
        StrategyName::EuclideanMat4,
        StrategyName::CompactSe3,
        StrategyName::SimpleCgaVerbose,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyName::SimpleCga => "simple_cga",
            StrategyName::ShenlongCga => "shenlong_cga",
            StrategyName::EuclideanMat4 => "euclidean_mat4",
            StrategyName::CompactSe3 => "compact_se3",
            StrategyName::SimpleCgaVerbose => "simple_cga_verbose",
        }
    }

    /// Human-facing label as used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            StrategyName::SimpleCga => "Simple CGA",
            StrategyName::ShenlongCga => "Shenlong",
            StrategyName::EuclideanMat4 => "Euclidean 4x4",
            StrategyName::CompactSe3 => "Compact SE3",
            StrategyName::SimpleCgaVerbose => "Simple CGA (verbose)",
        }
    }

    pub fn output_kind(self) -> OutputKind {
        match self {
            StrategyName::SimpleCga | StrategyName::ShenlongCga | StrategyName::SimpleCgaVerbose => OutputKind::CgaJson,
            StrategyName::EuclideanMat4 => OutputKind::Mat4Json,
            StrategyName::CompactSe3 => OutputKind::Se3Json,
        }
    }

    /// Default completion budget: the powered-suite setting.
    pub fn default_max_tokens(self) -> u32 {
        match self {
            StrategyName::CompactSe3 => 500,
            _ => 600,
        }
    }

    /// Prompt length as stated in the published protocol table, where one exists.
    pub fn published_prompt_chars(self) -> Option<usize> {
        match self {
            StrategyName::SimpleCga => Some(721),
            StrategyName::ShenlongCga => Some(963),
            StrategyName::EuclideanMat4 => Some(435),
            StrategyName::CompactSe3 => Some(588),
            StrategyName::SimpleCgaVerbose => None,
        }
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyName {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let found = match key.as_str() {
            "simple_cga" | "simple" => StrategyName::SimpleCga,
            "shenlong_cga" | "shenlong" => StrategyName::ShenlongCga,
            "euclidean_mat4" | "euclidean" => StrategyName::EuclideanMat4,
            "compact_se3" | "se3" => StrategyName::CompactSe3,
            "simple_cga_verbose" | "verbose" => StrategyName::SimpleCgaVerbose,
            _ => return Err(GatewayError::UnknownStrategy(s.to_string())),
        };
        Ok(found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptStrategy {
    pub name: StrategyName,
    pub system_prompt: String,
    pub output_kind: OutputKind,
    pub max_tokens: u32,
    /// True only for the prompt whose text was published word for word.
    pub verbatim: bool,
}

impl PromptStrategy {
    pub fn builtin(name: StrategyName) -> Self {
        let system_prompt = match name {
            StrategyName::SimpleCga => SIMPLE_CGA,
            StrategyName::ShenlongCga => SHENLONG_CGA,
            StrategyName::EuclideanMat4 => EUCLIDEAN_MAT4,
            StrategyName::CompactSe3 => COMPACT_SE3,
            StrategyName::SimpleCgaVerbose => SIMPLE_CGA_VERBOSE,
        };
        PromptStrategy {
            name,
            system_prompt: system_prompt.to_string(),
            output_kind: name.output_kind(),
            max_tokens: name.default_max_tokens(),
            verbatim: name == StrategyName::SimpleCga,
        }
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    /// Measured length of the shipped prompt, in Unicode scalar values.
    pub fn prompt_chars(&self) -> usize {
        self.system_prompt.chars().count()
    }
}

/// Every built-in strategy with default budgets.
pub fn registry() -> Vec<PromptStrategy> {
    StrategyName::ALL.into_iter().map(PromptStrategy::builtin).collect()
}
