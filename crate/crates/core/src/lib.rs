//! Exact Hall algebras over finite fields: quiver representations, Ringel–Hall
//! products, and semi-derived Hall algebras of Z/2- and Z-graded complexes.

pub mod check;
pub mod cli;
pub mod complex;
pub mod cx2;
pub mod error;
pub mod ff;
pub mod hall;
mod linsys;
pub mod par;
pub mod quiver;
pub mod sdcore;
pub mod sdh2;
pub mod sdhz;
pub mod suites;

pub use error::{Error, Result};
