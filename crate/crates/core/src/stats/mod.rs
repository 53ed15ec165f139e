//! The numerical engine: descriptive statistics, the KS-vs-normal test with
//! estimated parameters (Lilliefors regime), one-way ANOVA with exact F
//! tails, and ordinary least squares.
//!
//! All kernels are generic over the scalar type via [`Real`]; the rest of
//! the crate works with the `f64` aliases exported from the crate root.
//! Summation is a plain left fold in data order, so results are bit-stable
//! per build.

mod anova;
mod describe;
mod ks;
mod ols;
mod special;

pub use anova::{anova_oneway, f_upper_tail, AnovaError, AnovaResult};
pub use describe::{mean_sd_sem, Descriptives};
pub use ks::{ks_normal, ks_pvalue, KsOutcome, KsPValue};
pub use ols::{ols_fit, OlsError, OlsFit};
pub use special::{ln_gamma, normal_cdf, reg_inc_beta};

use num_traits::{Float, NumAssign};
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::iter::Sum;

/// Scalar bound for the numerical kernels (satisfied by f32 and f64).
pub trait Real: Float + NumAssign + Sum + Debug {}

impl<T: Float + NumAssign + Sum + Debug> Real for T {}

/// One condition's worth of 1/2 response codes, labeled (e.g. "ZSP", "2-Shot").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedVector<T> {
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Real> CodedVector<T> {
    pub fn new(label: impl Into<String>, values: Vec<T>) -> Self {
        Self { values: values, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("need at least {needed} groups, got {got}")]
    TooFewGroups { needed: usize, got: usize },
}
