use std::fmt;

use lesiondist::detection::DetectError;
use lesiondist::distance::TransformError;
use lesiondist::eval::EvalError;
use lesiondist::grid::GridError;
use lesiondist::io::FormatError;
use lesiondist::normalize::NormalizeError;
use lesiondist::pipeline::{PipelineError, Stage};
use lesiondist::shift::ShiftError;
use lesiondist::synthetic::SynthError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Config,
    Data,
    Internal,
}

impl Class {
    pub fn exit_code(self) -> i32 {
        match self {
            Class::Config => 2,
            Class::Data => 3,
            Class::Internal => 4,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub class: Class,
    /// Short machine-friendly tag, e.g. `"format"` or `"transform"`.
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<usize>,
}

impl CliError {
    pub fn new(class: Class, kind: &str, message: impl fmt::Display) -> Self {
        CliError {
            class,
            kind: kind.into(),
            message: message.to_string(),
            stage: None,
            case: None,
        }
    }

    pub fn config(message: impl fmt::Display) -> Self {
        CliError::new(Class::Config, "config", message)
    }

    pub fn data(message: impl fmt::Display) -> Self {
        CliError::new(Class::Data, "data", message)
    }

    pub fn to_json(&self) -> String {
        let body = serde_json::json!({
            "error": self,
            "exit_code": self.class.exit_code(),
        });
        body.to_string()
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::new(Class::Data, "format", e)
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::new(Class::Data, "grid", e)
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        let class = match e {
            TransformError::DidNotConverge(_) => Class::Internal,
            TransformError::ZeroPasses
            | TransformError::BadSpacing(_)
            | TransformError::SpacingArity(_) => Class::Config,
            TransformError::EmptyDotSet | TransformError::Grid(_) => Class::Data,
        };
        CliError::new(class, "transform", e)
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        let class = match e {
            NormalizeError::NonPositiveDecay(_) => Class::Config,
            _ => Class::Data,
        };
        CliError::new(class, "normalize", e)
    }
}

impl From<ShiftError> for CliError {
    fn from(e: ShiftError) -> Self {
        let class = match e {
            ShiftError::NotTwoDimensional(_) | ShiftError::Grid(_) => Class::Data,
            _ => Class::Config,
        };
        CliError::new(class, "shift", e)
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        CliError::new(Class::Data, "detect", e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let class = match e {
            EvalError::BadRadius(_) | EvalError::BadFpLimit(_) | EvalError::ZeroSamples => {
                Class::Config
            }
            _ => Class::Data,
        };
        CliError::new(class, "eval", e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        let class = match e {
            SynthError::Grid(_) => Class::Internal,
            _ => Class::Config,
        };
        CliError::new(class, "synth", e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let class = match e.stage {
            Stage::Config | Stage::Synth => Class::Config,
            Stage::Io => Class::Data,
            Stage::Eval => Class::Data,
            _ => Class::Internal,
        };
        CliError {
            class,
            kind: "pipeline".into(),
            message: e.to_string(),
            stage: Some(e.stage),
            case: e.case,
        }
    }
}
