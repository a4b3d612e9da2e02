//! Likelihood-ratio statistics and Pearson's chi-square, with the maximum
//! likelihood estimates under the null they are built from.
//!
//! Everything is computed in log space. Terms `t ln(t / m)` with `t = 0`
//! contribute nothing, which is the continuity limit `0^0 = 1`.

use crate::error::Result;
use crate::special::xlogx_ratio;
use crate::table::{ContingencyTable, Design, HypothesisSpec};

/// `ln λ` for one table, with the null estimate that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LrtResult {
    /// `ln λ`, never positive.
    pub log_lambda: f64,
    /// `-2 ln λ`, never negative.
    pub neg2_log_lambda: f64,
    /// Cell probabilities at the constrained MLE, row-major over the
    /// table's cells: the pooled column proportions repeated on every row
    /// (homogeneity), products of the margin proportions (independence), or
    /// `(θ², 2θ(1-θ), (1-θ)²)` (Hardy–Weinberg).
    pub mle_under_h: Vec<f64>,
}

impl LrtResult {
    pub fn lambda(&self) -> f64 {
        self.log_lambda.exp()
    }

    fn new(log_lambda: f64, mle_under_h: Vec<f64>) -> Self {
        // analytically ≤ 0; rounding can leave a positive ulp or two
        let log_lambda = log_lambda.min(0.0);
        Self {
            log_lambda,
            neg2_log_lambda: 0.0 - 2.0 * log_lambda, // never -0.0
            mle_under_h,
        }
    }
}

/// Allele frequency estimate `(2 x1 + x2) / 2n`; 1/2 when `n = 0`.
pub fn hw_allele_estimate(table: &ContingencyTable) -> f64 {
    let c = table.cells();
    let n = table.total();
    if n == 0 {
        0.5
    } else {
        (2 * c[0] + c[1]) as f64 / (2 * n) as f64
    }
}

/// Cell probabilities at the MLE under the null; see [`LrtResult::mle_under_h`].
pub fn mle_under_h(table: &ContingencyTable, spec: &HypothesisSpec) -> Result<Vec<f64>> {
    spec.check(table)?;
    Ok(null_cell_probs(table, spec))
}

fn null_cell_probs(table: &ContingencyTable, spec: &HypothesisSpec) -> Vec<f64> {
    let n = table.total();
    let (rows, cols) = (table.rows(), table.cols());
    match spec.design() {
        Design::Homogeneity { .. } => {
            let common: Vec<f64> = if n == 0 {
                vec![1.0 / cols as f64; cols]
            } else {
                table.col_margins().iter().map(|&m| m as f64 / n as f64).collect()
            };
            common.iter().copied().cycle().take(rows * cols).collect()
        }
        Design::Independence { .. } => {
            let prop = |m: u64, k: usize| if n == 0 { 1.0 / k as f64 } else { m as f64 / n as f64 };
            let mut out = Vec::with_capacity(rows * cols);
            for &r in table.row_margins() {
                for &c in table.col_margins() {
                    out.push(prop(r, rows) * prop(c, cols));
                }
            }
            out
        }
        Design::HardyWeinberg { .. } => {
            let t = hw_allele_estimate(table);
            vec![t * t, 2.0 * t * (1.0 - t), (1.0 - t) * (1.0 - t)]
        }
    }
}

/// `ln λ(x)` for the hypothesis in `spec`.
pub fn log_lambda(table: &ContingencyTable, spec: &HypothesisSpec) -> Result<LrtResult> {
    spec.check(table)?;
    let ll = log_lambda_unchecked(table, spec);
    Ok(LrtResult::new(ll, null_cell_probs(table, spec)))
}

/// `ln λ` without validation or the MLE vector; hot path for enumeration.
pub(crate) fn log_lambda_unchecked(table: &ContingencyTable, spec: &HypothesisSpec) -> f64 {
    let n = table.total();
    let ll = match spec.design() {
        Design::Homogeneity { .. } => {
            let null: f64 = table.col_margins().iter().map(|&m| xlogx_ratio(m, n)).sum();
            let mut full = 0.0;
            for (i, &ni) in table.row_margins().iter().enumerate() {
                full += table.row(i).iter().map(|&x| xlogx_ratio(x, ni)).sum::<f64>();
            }
            null - full
        }
        Design::Independence { .. } => {
            let null: f64 = table.row_margins().iter().map(|&m| xlogx_ratio(m, n)).sum::<f64>()
                + table.col_margins().iter().map(|&m| xlogx_ratio(m, n)).sum::<f64>();
            let full: f64 = table.cells().iter().map(|&x| xlogx_ratio(x, n)).sum();
            null - full
        }
        Design::HardyWeinberg { .. } => {
            let c = table.cells();
            // (2x1 + x2) ln θ̂ + (2x3 + x2) ln(1 - θ̂) with θ̂ = (2x1 + x2) / 2n
            let null = c[1] as f64 * 2f64.ln()
                + xlogx_ratio(2 * c[0] + c[1], 2 * n)
                + xlogx_ratio(2 * c[2] + c[1], 2 * n);
            let full: f64 = c.iter().map(|&x| xlogx_ratio(x, n)).sum();
            null - full
        }
    };
    ll.min(0.0)
}

/// Pearson's statistic and its reference degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PearsonChi2 {
    pub statistic: f64,
    pub df: u32,
}

/// `Σ (O - E)² / E` with `E` from the MLE under the null.
///
/// Cells with `E = 0` are skipped; their observed count is necessarily 0.
pub fn pearson_chi2(table: &ContingencyTable, spec: &HypothesisSpec) -> Result<PearsonChi2> {
    spec.check(table)?;
    let n = table.total() as f64;
    let (rows, cols) = (table.rows(), table.cols());
    let expected: Vec<f64> = match spec.design() {
        Design::HardyWeinberg { .. } => null_cell_probs(table, spec).iter().map(|p| n * p).collect(),
        _ => {
            let mut e = Vec::with_capacity(rows * cols);
            for &r in table.row_margins() {
                for &c in table.col_margins() {
                    e.push(if n == 0.0 { 0.0 } else { r as f64 * c as f64 / n });
                }
            }
            e
        }
    };
    let statistic = table
        .cells()
        .iter()
        .zip(&expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = match spec.design() {
        Design::HardyWeinberg { .. } => 1,
        _ => ((rows - 1) * (cols - 1)) as u32,
    };
    Ok(PearsonChi2 { statistic, df })
}
