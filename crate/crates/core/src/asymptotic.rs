//! Chi-square approximations: the asymptotic LRT p-value, the asymptotic
//! e-value and Pearson's p-value.

use crate::lrt::LrtResult;
use crate::special::chi2_survival;
use crate::table::{Design, HypothesisSpec};

/// Degrees of freedom for the two asymptotic indices built on `-2 ln λ`.
///
/// The p-value uses the codimension of the null set; the e-value uses the
/// full dimension of the parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DfRule {
    pub p_value_df: u32,
    pub e_value_df: u32,
}

impl DfRule {
    pub fn for_spec(spec: &HypothesisSpec) -> Self {
        match spec.design() {
            Design::Homogeneity { row_margins, cols } => {
                let (l, c) = (row_margins.len() as u32, *cols as u32);
                Self {
                    p_value_df: ((l - 1) * (c - 1)).max(1),
                    e_value_df: l * (c - 1),
                }
            }
            Design::Independence { rows, cols, .. } => {
                let (l, c) = (*rows as u32, *cols as u32);
                Self {
                    p_value_df: l + c - 2,
                    e_value_df: l * c - 1,
                }
            }
            Design::HardyWeinberg { .. } => Self {
                p_value_df: 1,
                e_value_df: 2,
            },
        }
    }
}

pub fn asymptotic_p_value(lrt: &LrtResult, rule: DfRule) -> f64 {
    chi2_survival(lrt.neg2_log_lambda, rule.p_value_df)
}

pub fn asymptotic_e_value(lrt: &LrtResult, rule: DfRule) -> f64 {
    chi2_survival(lrt.neg2_log_lambda, rule.e_value_df)
}

pub fn chi2_p_value(stat: f64, df: u32) -> f64 {
    chi2_survival(stat.max(0.0), df)
}
