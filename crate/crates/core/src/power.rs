//! Monte Carlo power functions on a grid of parameter points.
//!
//! Supported designs are the two whose parameter has two free coordinates:
//! 2x2 homogeneity (`θ1`, `θ2` are the first-column probabilities of the two
//! rows) and Hardy–Weinberg (`θ1`, `θ2` are the AA and Aa probabilities).
//! Row margins, or the sample size, are fixed, so the table space is small
//! and every test's decision is precomputed once per table.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::asymptotic::{asymptotic_p_value, chi2_p_value, DfRule};
use crate::error::{Error, Result};
use crate::exact::{ExactDistribution, DEFAULT_BUDGET};
use crate::fisher::{fisher_p_value, FisherInput};
use crate::lrt::{log_lambda, pearson_chi2};
use crate::special::{sample_binomial, sample_multinomial, RngStream};
use crate::table::{enumerate_tables, ContingencyTable, Design, HypothesisSpec};

/// A frequentist test whose rejection rate is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    ExactP,
    AsymLrt,
    Chi2,
    Fisher,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [TestKind::ExactP, TestKind::AsymLrt, TestKind::Chi2, TestKind::Fisher];

    pub fn id(self) -> &'static str {
        match self {
            TestKind::ExactP => "exact_p",
            TestKind::AsymLrt => "asym_lrt",
            TestKind::Chi2 => "chi2",
            TestKind::Fisher => "fisher",
        }
    }

    /// Tests that apply to `spec`, in canonical order.
    pub fn applicable(spec: &HypothesisSpec) -> Vec<TestKind> {
        Self::ALL
            .into_iter()
            .filter(|t| *t != TestKind::Fisher || spec.is_two_by_two_homogeneity())
            .collect()
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown test {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSettings {
    /// Points per axis.
    pub grid: usize,
    /// Simulated tables per point.
    pub reps: u64,
    /// Reject when the index is at most this.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            grid: 100,
            reps: 1000,
            alpha: 0.05,
            seed: 0,
        }
    }
}

/// Grid coordinate `i` (0-based) at the cell center `(i + 1/2) / g`.
pub fn grid_coordinate(i: usize, grid: usize) -> f64 {
    (i as f64 + 0.5) / grid as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerCell {
    pub theta1: f64,
    pub theta2: f64,
    /// Rejection counts in the grid's test order; `None` off the simplex.
    pub rejections: Option<Vec<u64>>,
}

#[derive(Clone, Debug)]
pub struct PowerGrid {
    pub spec: HypothesisSpec,
    pub tests: Vec<TestKind>,
    pub settings: PowerSettings,
    /// Row-major over `(θ1 index, θ2 index)`.
    pub cells: Vec<PowerCell>,
}

impl PowerGrid {
    /// Estimated power of `tests[test_index]` at a cell, if feasible.
    pub fn power(&self, cell: usize, test_index: usize) -> Option<f64> {
        self.cells[cell]
            .rejections
            .as_ref()
            .map(|r| r[test_index] as f64 / self.settings.reps as f64)
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.settings.grid + j
    }

    /// Mean power of one test over the feasible cells.
    pub fn mean_power(&self, test: TestKind) -> Option<f64> {
        let k = self.tests.iter().position(|&t| t == test)?;
        let vals: Vec<f64> = (0..self.cells.len()).filter_map(|c| self.power(c, k)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

/// Which tests reject each table of a fixed-design space.
///
/// Indexed by the two free counts: `(x11, x21)` for 2x2 homogeneity,
/// `(x1, x2)` for Hardy–Weinberg.
#[derive(Clone, Debug)]
pub struct DecisionTable {
    width: usize,
    tests: Vec<TestKind>,
    reject: Vec<Vec<bool>>,
}

impl DecisionTable {
    pub fn build(spec: &HypothesisSpec, tests: &[TestKind], alpha: f64) -> Result<Self> {
        let width = match spec.design() {
            Design::Homogeneity { row_margins, .. } if spec.is_two_by_two_homogeneity() => {
                row_margins[1] as usize + 1
            }
            Design::HardyWeinberg { total } => *total as usize + 1,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "power functions need a 2x2 homogeneity or Hardy-Weinberg design, got {spec}"
                )))
            }
        };
        if tests.contains(&TestKind::Fisher) && !spec.is_two_by_two_homogeneity() {
            return Err(Error::InvalidArgument(
                "Fisher's test applies to 2x2 homogeneity only".into(),
            ));
        }
        let dist = if tests.contains(&TestKind::ExactP) {
            Some(ExactDistribution::build_with_budget(spec, DEFAULT_BUDGET)?)
        } else {
            None
        };
        let rule = DfRule::for_spec(spec);
        let height = match spec.design() {
            Design::Homogeneity { row_margins, .. } => row_margins[0] as usize + 1,
            _ => width,
        };
        let mut reject = vec![Vec::new(); width * height];
        for t in enumerate_tables(spec) {
            let lrt = log_lambda(&t, spec)?;
            let decisions = tests
                .iter()
                .map(|test| {
                    let index = match test {
                        TestKind::ExactP => dist
                            .as_ref()
                            .expect("built above")
                            .p_value_for_log_lambda(lrt.log_lambda),
                        TestKind::AsymLrt => asymptotic_p_value(&lrt, rule),
                        TestKind::Chi2 => {
                            let p = pearson_chi2(&t, spec)?;
                            chi2_p_value(p.statistic, p.df)
                        }
                        TestKind::Fisher => fisher_p_value(&FisherInput::new(&t)?),
                    };
                    Ok(index <= alpha)
                })
                .collect::<Result<Vec<bool>>>()?;
            let (a, b) = Self::key(&t);
            reject[a * width + b] = decisions;
        }
        Ok(Self {
            width,
            tests: tests.to_vec(),
            reject,
        })
    }

    fn key(t: &ContingencyTable) -> (usize, usize) {
        let c = t.cells();
        if t.rows() == 2 {
            (c[0] as usize, c[2] as usize)
        } else {
            (c[0] as usize, c[1] as usize)
        }
    }

    /// Decisions for `table`, in the order of the tests given to `build`.
    pub fn decisions(&self, table: &ContingencyTable) -> &[bool] {
        let (a, b) = Self::key(table);
        &self.reject[a * self.width + b]
    }

    pub fn tests(&self) -> &[TestKind] {
        &self.tests
    }
}

/// Simulates `settings.reps` tables at every grid point and records how
/// often each test rejects.
pub fn estimate_power(spec: &HypothesisSpec, tests: &[TestKind], settings: PowerSettings) -> Result<PowerGrid> {
    if settings.grid < 1 || settings.reps < 1 {
        return Err(Error::InvalidArgument("grid and replicate counts must be positive".into()));
    }
    if tests.is_empty() {
        return Err(Error::InvalidArgument("no tests requested".into()));
    }
    let decisions = DecisionTable::build(spec, tests, settings.alpha)?;
    let g = settings.grid;
    let cells = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let theta1 = grid_coordinate(idx / g, g);
            let theta2 = grid_coordinate(idx % g, g);
            let mut rng = RngStream::new(settings.seed, idx as u64);
            let rejections = simulate_point(spec, &decisions, theta1, theta2, settings.reps, &mut rng);
            PowerCell {
                theta1,
                theta2,
                rejections,
            }
        })
        .collect();
    Ok(PowerGrid {
        spec: spec.clone(),
        tests: tests.to_vec(),
        settings,
        cells,
    })
}

/// Rejection counts at one parameter point, or `None` if the point is not
/// a valid parameter (Hardy–Weinberg with `θ1 + θ2 ≥ 1`).
pub fn simulate_point(
    spec: &HypothesisSpec,
    decisions: &DecisionTable,
    theta1: f64,
    theta2: f64,
    reps: u64,
    rng: &mut RngStream,
) -> Option<Vec<u64>> {
    let mut counts = vec![0u64; decisions.tests().len()];
    match spec.design() {
        Design::Homogeneity { row_margins, .. } => {
            let (m1, m2) = (row_margins[0], row_margins[1]);
            for _ in 0..reps {
                let x11 = sample_binomial(rng, m1, theta1);
                let x21 = sample_binomial(rng, m2, theta2);
                let t = ContingencyTable::from_cells_unchecked(2, 2, vec![x11, m1 - x11, x21, m2 - x21]);
                tally(&mut counts, decisions.decisions(&t));
            }
        }
        Design::HardyWeinberg { total } => {
            let theta3 = 1.0 - theta1 - theta2;
            if theta3 <= 1e-9 {
                return None;
            }
            for _ in 0..reps {
                let x = sample_multinomial(rng, *total, &[theta1, theta2, theta3]);
                let t = ContingencyTable::from_cells_unchecked(1, 3, x);
                tally(&mut counts, decisions.decisions(&t));
            }
        }
        Design::Independence { .. } => unreachable!("rejected by DecisionTable::build"),
    }
    Some(counts)
}

fn tally(counts: &mut [u64], decisions: &[bool]) {
    for (c, &d) in counts.iter_mut().zip(decisions) {
        *c += u64::from(d);
    }
}
