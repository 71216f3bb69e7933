//! # ssgk
//!
//! Graph classification with a structure-preserving symmetric graph kernel.
//!
//! Each weighted graph matrix `X` is approximated by a sparse symmetric sum
//! of rank-one terms `Σ_r a_r a_rᵀ` ([`factorization`]). Two graphs are
//! compared through their factor vectors with `κ(X, Y) = Σ_pq k(x_p, y_q)²`
//! for an RBF base kernel `k` ([`kernel`]), and the resulting Gram matrices
//! feed a one-vs-one SMO support vector machine ([`svm`]).
//!
//! [`baselines`] provides edge, clustering-coefficient and path-length
//! features for comparison, [`data`] the file formats, band averaging and a
//! synthetic dataset generator, and [`experiment`] the cross-validated grid
//! search used to select hyperparameters.

pub mod baselines;
pub mod data;
pub mod error;
pub mod experiment;
pub mod factorization;
pub mod kernel;
pub mod linalg;
pub mod svm;
pub mod textio;

pub use error::{Error, Result};
pub use factorization::{factorize, FactorizationConfig, FactorizationResult};
pub use kernel::{build_cross_gram, build_gram, ssgk, GramMatrix, RbfParams};
pub use linalg::{EigenDecomposition, FactorSet, Matrix, SymmetricMatrix};
pub use svm::{Accuracy, MulticlassModel, SvmConfig};
