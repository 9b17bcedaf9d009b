//! Non-monotone adaptive gradient methods.
//!
//! GradaGrad keeps AdaGrad's `γ/√α` step size but feeds the accumulator with
//! `v = g² − ρ·g·m_prev`, which is negative when consecutive directions agree.
//! Negative increments grow the numerator `γ` instead of shrinking `α`, so the
//! learning rate can rise as well as fall.
//!
//! * [`optim`]: scalar and diagonal GradaGrad, AdaGrad, SGD and Adam.
//! * [`problems`]: convex objectives with seeded stochastic gradients.
//! * [`data`]: LIBSVM ingestion and minibatch iteration.
//! * [`verify`]: executable checks of the method's identities and inequalities.
//! * [`bench`](mod@bench): run configuration, experiment driver, grid search and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod data;
pub mod error;
pub mod optim;
pub mod problems;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
