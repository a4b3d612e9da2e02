//! Fisher's exact test for 2x2 tables, conditioning on both margins.

use crate::error::{Error, Result};
use crate::special::log_factorial;
use crate::table::ContingencyTable;

/// Relative slack when comparing hypergeometric probabilities.
const RELATIVE_TIE: f64 = 1e-7;

/// A 2x2 table whose row and column margins are both held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FisherInput {
    cells: [u64; 4],
}

impl FisherInput {
    pub fn new(table: &ContingencyTable) -> Result<Self> {
        if table.rows() != 2 || table.cols() != 2 {
            return Err(Error::InvalidTable(format!(
                "Fisher's test needs a 2x2 table, got {}x{}",
                table.rows(),
                table.cols()
            )));
        }
        let c = table.cells();
        Ok(Self {
            cells: [c[0], c[1], c[2], c[3]],
        })
    }

    /// Values `x11` can take with the margins fixed.
    pub fn support(&self) -> std::ops::RangeInclusive<u64> {
        let [a, b, c, d] = self.cells;
        let (r1, c1, n) = (a + b, a + c, a + b + c + d);
        (r1 + c1).saturating_sub(n)..=r1.min(c1)
    }

    /// `ln Pr(X11 = x11)` under the hypergeometric law of these margins.
    pub fn log_prob(&self, x11: u64) -> f64 {
        let [a, b, c, d] = self.cells;
        let (r1, r2, c1, c2) = (a + b, c + d, a + c, b + d);
        let n = r1 + r2;
        log_factorial(r1) + log_factorial(r2) + log_factorial(c1) + log_factorial(c2)
            - log_factorial(n)
            - log_factorial(x11)
            - log_factorial(r1 - x11)
            - log_factorial(c1 - x11)
            - log_factorial(n + x11 - r1 - c1)
    }
}

/// Two-sided p-value: total probability of the tables, with the same
/// margins, that are no more probable than the observed one.
pub fn fisher_p_value(input: &FisherInput) -> f64 {
    let observed = input.log_prob(input.cells[0]);
    let cutoff = observed + RELATIVE_TIE.ln_1p();
    let p: f64 = input
        .support()
        .map(|x| input.log_prob(x))
        .filter(|&lp| lp <= cutoff)
        .map(f64::exp)
        .sum();
    p.min(1.0)
}
