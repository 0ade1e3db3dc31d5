//! Cutting a concentrated density at a neck and comparing spectra.

mod cutoff;
mod dirichlet;
mod report;
mod transplant;

pub use cutoff::cutoff_profile;
pub use dirichlet::{cap_dirichlet, CapDirichlet};
pub use report::{compare_split, Piece, SplitReport, MAX_SPLIT_WINDOW};
pub use transplant::{split_density, CapTransplant, SplitDensity};
