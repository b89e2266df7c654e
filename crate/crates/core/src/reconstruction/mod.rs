//! Squared eigenfunction values `e_k(x0)²` from the full and split spectra.

pub mod esq;
pub mod normalization;
pub mod pair;

pub use esq::*;
pub use normalization::{c_via_limit, c_via_ratio, default_schedule, LimitNormalization, RatioNormalization};
pub use pair::{pair_split_labels, spectral_shift_guard, Label, PairedLabels, Side, SpectraPair};
