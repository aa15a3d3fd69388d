//! Palette adaptation: scoring, scheme selection and numerical recoloring.

mod optimize;
mod palette;

use thiserror::Error;

pub use optimize::{
    gradient_check, objective, optimize_palette, AdaptationResult, GradientCheck, Objective,
    ObjectiveTerms, OptimizeOptions, CHECK_STEP, FD_STEP,
};
pub use palette::{score_palette, select_scheme, Palette, PaletteEntry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdaptError {
    #[error("a palette needs at least 2 colors, got {0}")]
    TooFewEntries(usize),
    #[error("role {0:?} appears twice")]
    DuplicateRole(String),
    #[error("candidate and original palettes have different roles")]
    RoleMismatch,
    #[error("every color is pinned, nothing to optimize")]
    AllPinned,
    #[error("no schemes to choose from")]
    NoSchemes,
    #[error("invalid optimizer options: {0}")]
    Options(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}
