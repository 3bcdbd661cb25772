//! Numerical toolkit for coupled quasilinear `(p₁,p₂)`-Laplacian systems
//!
//! ```text
//! −div(A(x,u)|∇u|^{p₁−2}∇u) + (1/p₁)A_u(x,u)|∇u|^{p₁} = G_u(x,u,v)
//! −div(B(x,v)|∇v|^{p₂−2}∇v) + (1/p₂)B_v(x,v)|∇v|^{p₂} = G_v(x,u,v)
//! ```
//!
//! with homogeneous Dirichlet data, treated through the energy
//! `J(u,v) = (1/p₁)∫A|∇u|^{p₁} + (1/p₂)∫B|∇v|^{p₂} − ∫G`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod hypotheses;
pub mod linalg;
pub mod mesh;
pub mod models;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
