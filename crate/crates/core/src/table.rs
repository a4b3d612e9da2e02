//! Contingency tables, hypothesis designs and enumeration of table spaces.
//!
//! A design fixes the quantities that are known before sampling: the row
//! margins for homogeneity, the grand total for independence and for
//! Hardy–Weinberg. [`enumerate_tables`] walks every table compatible with a
//! design in lexicographic order over the row-major cells.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A matrix of nonnegative counts together with its margins.
///
/// Hardy–Weinberg genotype counts `(x1, x2, x3)` are a `1 x 3` table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    cells: Vec<u64>,
    row_margins: Vec<u64>,
    col_margins: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Builds a table from row-major cells.
    pub fn new(rows: usize, cols: usize, cells: Vec<u64>) -> Result<Self> {
        if rows < 1 || cols < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 1 row and 2 columns, got {rows}x{cols}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::InvalidTable(format!(
                "{} cells for a {rows}x{cols} table",
                cells.len()
            )));
        }
        Ok(Self::from_cells_unchecked(rows, cols, cells))
    }

    pub(crate) fn from_cells_unchecked(rows: usize, cols: usize, cells: Vec<u64>) -> Self {
        let mut row_margins = vec![0; rows];
        let mut col_margins = vec![0; cols];
        for (i, row) in cells.chunks_exact(cols).enumerate() {
            for (j, &x) in row.iter().enumerate() {
                row_margins[i] += x;
                col_margins[j] += x;
            }
        }
        let total = row_margins.iter().sum();
        Self {
            rows,
            cols,
            cells,
            row_margins,
            col_margins,
            total,
        }
    }

    /// Builds a table from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidTable("rows have different lengths".into()));
        }
        let cells = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, cells)
    }

    /// Genotype counts (AA, Aa, aa).
    pub fn genotypes(aa: u64, het: u64, bb: u64) -> Self {
        Self::from_cells_unchecked(1, 3, vec![aa, het, bb])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> u64 {
        self.cells[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_margins(&self) -> &[u64] {
        &self.row_margins
    }

    pub fn col_margins(&self) -> &[u64] {
        &self.col_margins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Parses `r1c1,r1c2,...;r2c1,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|c| {
                        c.trim().parse::<u64>().map_err(|_| {
                            Error::InvalidTable(format!("cannot parse cell {:?}", c.trim()))
                        })
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    /// Cells joined with commas in row-major order.
    pub fn cells_csv(&self) -> String {
        let parts: Vec<String> = self.cells.iter().map(u64::to_string).collect();
        parts.join(",")
    }
}

impl fmt::Display for ContingencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.cells.chunks_exact(self.cols).enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

/// The null hypothesis being tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Homogeneity,
    Independence,
    HardyWeinberg,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Homogeneity => "homogeneity",
            Hypothesis::Independence => "independence",
            Hypothesis::HardyWeinberg => "hardy-weinberg",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneity" => Ok(Hypothesis::Homogeneity),
            "independence" => Ok(Hypothesis::Independence),
            "hardy-weinberg" | "hw" => Ok(Hypothesis::HardyWeinberg),
            other => Err(Error::InvalidSpec(format!("unknown hypothesis {other:?}"))),
        }
    }
}

/// Fixed design quantities for each hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Design {
    /// Row margins are fixed; each row is an independent multinomial.
    Homogeneity { row_margins: Vec<u64>, cols: usize },
    /// Only the grand total is fixed; the table is one multinomial.
    Independence { rows: usize, cols: usize, total: u64 },
    /// Genotype counts with a fixed number of individuals.
    HardyWeinberg { total: u64 },
}

/// A validated hypothesis plus its design.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisSpec {
    design: Design,
}

impl HypothesisSpec {
    pub fn homogeneity(row_margins: Vec<u64>, cols: usize) -> Result<Self> {
        if row_margins.is_empty() {
            return Err(Error::InvalidSpec("homogeneity needs at least one row margin".into()));
        }
        if cols < 2 {
            return Err(Error::InvalidSpec(format!(
                "homogeneity needs at least 2 columns, got {cols}"
            )));
        }
        Ok(Self {
            design: Design::Homogeneity { row_margins, cols },
        })
    }

    pub fn independence(rows: usize, cols: usize, total: u64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidSpec(format!(
                "independence needs at least 2x2, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            design: Design::Independence { rows, cols, total },
        })
    }

    pub fn hardy_weinberg(total: u64) -> Self {
        Self {
            design: Design::HardyWeinberg { total },
        }
    }

    /// The design an observed table belongs to under `kind`.
    pub fn for_table(kind: Hypothesis, table: &ContingencyTable) -> Result<Self> {
        match kind {
            Hypothesis::Homogeneity => {
                Self::homogeneity(table.row_margins().to_vec(), table.cols())
            }
            Hypothesis::Independence => {
                Self::independence(table.rows(), table.cols(), table.total())
            }
            Hypothesis::HardyWeinberg => {
                if table.rows() != 1 || table.cols() != 3 {
                    return Err(Error::Mismatch(format!(
                        "Hardy-Weinberg needs 3 genotype counts, got a {}x{} table",
                        table.rows(),
                        table.cols()
                    )));
                }
                Ok(Self::hardy_weinberg(table.total()))
            }
        }
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn kind(&self) -> Hypothesis {
        match self.design {
            Design::Homogeneity { .. } => Hypothesis::Homogeneity,
            Design::Independence { .. } => Hypothesis::Independence,
            Design::HardyWeinberg { .. } => Hypothesis::HardyWeinberg,
        }
    }

    /// `(rows, cols)` of every table in the space.
    pub fn dims(&self) -> (usize, usize) {
        match &self.design {
            Design::Homogeneity { row_margins, cols } => (row_margins.len(), *cols),
            Design::Independence { rows, cols, .. } => (*rows, *cols),
            Design::HardyWeinberg { .. } => (1, 3),
        }
    }

    pub fn total(&self) -> u64 {
        match &self.design {
            Design::Homogeneity { row_margins, .. } => row_margins.iter().sum(),
            Design::Independence { total, .. } | Design::HardyWeinberg { total } => *total,
        }
    }

    /// True for the 2x2 homogeneity design, the only one with a Fisher test.
    pub fn is_two_by_two_homogeneity(&self) -> bool {
        matches!(&self.design, Design::Homogeneity { row_margins, cols } if row_margins.len() == 2 && *cols == 2)
    }

    /// Checks that `table` belongs to this design's space.
    pub fn check(&self, table: &ContingencyTable) -> Result<()> {
        let (rows, cols) = self.dims();
        if table.rows() != rows || table.cols() != cols {
            return Err(Error::Mismatch(format!(
                "expected a {rows}x{cols} table, got {}x{}",
                table.rows(),
                table.cols()
            )));
        }
        match &self.design {
            Design::Homogeneity { row_margins, .. } => {
                if table.row_margins() != row_margins.as_slice() {
                    return Err(Error::Mismatch(format!(
                        "row margins {:?} differ from the design's {:?}",
                        table.row_margins(),
                        row_margins
                    )));
                }
            }
            Design::Independence { total, .. } | Design::HardyWeinberg { total } => {
                if table.total() != *total {
                    return Err(Error::Mismatch(format!(
                        "total {} differs from the design's {total}",
                        table.total()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Canonical text form, stable across versions; used for cache keys.
    pub fn canonical(&self) -> String {
        match &self.design {
            Design::Homogeneity { row_margins, cols } => {
                let m: Vec<String> = row_margins.iter().map(u64::to_string).collect();
                format!("homogeneity;cols={cols};margins={}", m.join(","))
            }
            Design::Independence { rows, cols, total } => {
                format!("independence;rows={rows};cols={cols};n={total}")
            }
            Design::HardyWeinberg { total } => format!("hardy-weinberg;n={total}"),
        }
    }

    /// Blocks of consecutive cells with a fixed sum: `(len, sum)` each.
    fn blocks(&self) -> Vec<(usize, u64)> {
        match &self.design {
            Design::Homogeneity { row_margins, cols } => {
                row_margins.iter().map(|&m| (*cols, m)).collect()
            }
            Design::Independence { rows, cols, total } => vec![(rows * cols, *total)],
            Design::HardyWeinberg { total } => vec![(3, *total)],
        }
    }
}

impl fmt::Display for HypothesisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub(crate) fn binomial_u128(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of tables in the design's space.
pub fn count_tables(spec: &HypothesisSpec) -> u128 {
    spec.blocks()
        .into_iter()
        .map(|(len, sum)| binomial_u128(sum as u128 + len as u128 - 1, len as u128 - 1))
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Streams every table of the design exactly once, lexicographically over
/// the row-major cells.
pub fn enumerate_tables(spec: &HypothesisSpec) -> TableIter {
    TableIter::new(spec)
}

/// Iterator returned by [`enumerate_tables`].
#[derive(Clone, Debug)]
pub struct TableIter {
    rows: usize,
    cols: usize,
    blocks: Vec<(usize, usize, u64)>,
    current: Vec<u64>,
    done: bool,
}

impl TableIter {
    fn new(spec: &HypothesisSpec) -> Self {
        let (rows, cols) = spec.dims();
        let mut blocks = Vec::new();
        let mut start = 0;
        for (len, sum) in spec.blocks() {
            blocks.push((start, len, sum));
            start += len;
        }
        let mut current = vec![0; rows * cols];
        for &(start, len, sum) in &blocks {
            current[start + len - 1] = sum;
        }
        Self {
            rows,
            cols,
            blocks,
            current,
            done: false,
        }
    }

    /// Advances one composition block to its lexicographic successor.
    /// Returns false, leaving the block untouched, when it is the last one.
    fn advance_block(parts: &mut [u64]) -> bool {
        let last = parts.len() - 1;
        let mut suffix = parts[last];
        for i in (0..last).rev() {
            if suffix > 0 {
                parts[i] += 1;
                for p in &mut parts[i + 1..last] {
                    *p = 0;
                }
                parts[last] = suffix - 1;
                return true;
            }
            suffix += parts[i];
        }
        false
    }

    fn reset_block(parts: &mut [u64], sum: u64) {
        let last = parts.len() - 1;
        parts[..last].fill(0);
        parts[last] = sum;
    }
}

impl Iterator for TableIter {
    type Item = ContingencyTable;

    fn next(&mut self) -> Option<ContingencyTable> {
        if self.done {
            return None;
        }
        let out = ContingencyTable::from_cells_unchecked(self.rows, self.cols, self.current.clone());
        self.done = true;
        for &(start, len, sum) in self.blocks.iter().rev() {
            let parts = &mut self.current[start..start + len];
            if Self::advance_block(parts) {
                self.done = false;
                break;
            }
            Self::reset_block(parts, sum);
        }
        Some(out)
    }
}
