//! Computational toolkit for Kleinian groups: Möbius geometry, circle
//! pencils, limits of graphs, trace fields and arithmeticity, return-map
//! cocycles and their drift.

pub mod arith;
pub mod circle;
pub mod cocycle;
pub mod config;
pub mod domain;
pub mod experiments;
pub mod graphs;
pub mod moebius;
pub mod numberfield;
pub mod padic;
pub mod par;
pub mod poly;
pub mod presentation;
pub mod presets;
pub mod scalar;
pub mod stats;
pub mod surfaces;

pub use moebius::{dist_h3, law_of_cosines_side, H3Point, Moebius, ProjPoint};
pub use numberfield::{FieldElement, NumberField};
pub use scalar::{Field, Scalar, DEFAULT_TOL};
