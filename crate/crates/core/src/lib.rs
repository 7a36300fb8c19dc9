//! Numerical toolkit for reproducing kernel spaces.
//!
//! Kernels are built from three recipes: Carleman feature families
//! (`K(x,y) = <Γ_x, Γ_y>`), truncated orthonormal bases
//! (`K(x,y) = Σ α_i² e_i(x) e_i(y)`) and duality pairs
//! (`K(x,y) = L(Γ_x, Λ_y)`). On top of those the crate provides finite kernel
//! expansions with their norms and evaluation bounds, the L^p Cameron–Martin
//! duality on `[0, 1]`, and two regularized least-squares solvers whose
//! solutions are expansions over the training points.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod domain;
pub mod duality;
pub mod eigen;
pub mod error;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod rkhs;
pub mod solvers;
pub mod verify;

pub use domain::Domain;
pub use duality::{cameron_martin_subduality, SobolevFunction, SubdualitySpec};
pub use eigen::{symmetric_eigen, symmetric_eigenvalues, SymmetricEigen};
pub use error::{Result, RksError};
pub use kernel::{Basis, ClosedForm, FeatureFamily, GramMatrix, KernelKind, KernelSpec, Verdict};
pub use quadrature::{QuadratureConfig, QuadratureMeasure, QuadratureRule};
pub use rkhs::{EvaluationBound, RkhsFunction};
pub use solvers::{Dataset, FitConfig, FitResult};
pub use verify::{CheckReport, CheckStatus};
