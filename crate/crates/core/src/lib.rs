//! Exact and asymptotic significance indices for contingency tables.
//!
//! Three null hypotheses are covered: homogeneity of row distributions,
//! independence of rows and columns, and Hardy–Weinberg equilibrium of
//! genotype counts. For each observed table the crate computes
//!
//! * the exact P-value of the likelihood-ratio statistic, under the table
//!   distribution obtained by integrating the nuisance parameters out,
//! * the asymptotic LRT p-value and Pearson's chi-square p-value,
//! * Fisher's exact p-value (2x2 homogeneity only),
//! * the FBST e-value by Monte Carlo, and its chi-square approximation,
//!
//! plus Monte Carlo power functions for the frequentist tests.
//!
//! ```
//! use ctsig::{build_distribution, ContingencyTable, Hypothesis, HypothesisSpec};
//!
//! let table = ContingencyTable::parse("10,0;0,10")?;
//! let spec = HypothesisSpec::for_table(Hypothesis::Homogeneity, &table)?;
//! let dist = build_distribution(&spec)?;
//! let p = dist.p_value(&table)?;
//! assert!(p > 0.0 && p < 1e-4);
//! # Ok::<(), ctsig::Error>(())
//! ```

pub mod asymptotic;
pub mod error;
pub mod exact;
pub mod fbst;
pub mod fisher;
pub mod lrt;
pub mod power;
pub mod report;
pub mod special;
pub mod table;

pub use asymptotic::{asymptotic_e_value, asymptotic_p_value, chi2_p_value, DfRule};
pub use error::{Error, Result};
pub use exact::{build_distribution, exact_p_value, log_h, ExactDistribution, ExactEntry, DEFAULT_BUDGET};
pub use fbst::{e_value, EValue, PosteriorModel, DEFAULT_MC_SAMPLES};
pub use fisher::{fisher_p_value, FisherInput};
pub use lrt::{log_lambda, pearson_chi2, LrtResult, PearsonChi2};
pub use power::{estimate_power, PowerGrid, PowerSettings, TestKind};
pub use report::{index_report, sweep, IndexReport, McSettings};
pub use special::{chi2_survival, log_factorial, RngStream};
pub use table::{count_tables, enumerate_tables, ContingencyTable, Hypothesis, HypothesisSpec};
