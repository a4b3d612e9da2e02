//! All indices for a table, table-space sweeps, and their text formats.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic::{asymptotic_e_value, asymptotic_p_value, chi2_p_value, DfRule};
use crate::error::{Error, Result};
use crate::exact::ExactDistribution;
use crate::fbst::PosteriorModel;
use crate::fisher::{fisher_p_value, FisherInput};
use crate::lrt::{log_lambda, pearson_chi2};
use crate::power::PowerGrid;
use crate::special::RngStream;
use crate::table::{enumerate_tables, ContingencyTable, Hypothesis, HypothesisSpec};

/// Every index computed for one observed table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport {
    pub table: Vec<Vec<u64>>,
    pub hypothesis: Hypothesis,
    pub lambda: f64,
    pub neg2_log_lambda: f64,
    pub p_exact: f64,
    pub p_lrt_asym: f64,
    pub p_chi2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_fisher: Option<f64>,
    pub ev_mc: f64,
    pub ev_mc_stderr: f64,
    pub ev_asym: f64,
    pub seed: u64,
    pub k: u64,
}

/// Monte Carlo settings for the e-value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McSettings {
    pub seed: u64,
    pub samples: u64,
}

/// Computes every index for `table`; `dist` must be the distribution of
/// the table's design and `stream_id` picks the e-value's random stream.
pub fn index_report(
    table: &ContingencyTable,
    dist: &ExactDistribution,
    mc: McSettings,
    stream_id: u64,
) -> Result<IndexReport> {
    let spec = dist.spec();
    let lrt = log_lambda(table, spec)?;
    let rule = DfRule::for_spec(spec);
    let pearson = pearson_chi2(table, spec)?;
    let p_fisher = if spec.is_two_by_two_homogeneity() {
        Some(fisher_p_value(&FisherInput::new(table)?))
    } else {
        None
    };
    let model = PosteriorModel::new(table, spec)?;
    let ev = model.e_value(&mut RngStream::new(mc.seed, stream_id), mc.samples)?;
    Ok(IndexReport {
        table: (0..table.rows()).map(|i| table.row(i).to_vec()).collect(),
        hypothesis: spec.kind(),
        lambda: lrt.lambda(),
        neg2_log_lambda: lrt.neg2_log_lambda,
        p_exact: dist.p_value_for_log_lambda(lrt.log_lambda),
        p_lrt_asym: asymptotic_p_value(&lrt, rule),
        p_chi2: chi2_p_value(pearson.statistic, pearson.df),
        p_fisher,
        ev_mc: ev.value,
        ev_mc_stderr: ev.mc_stderr,
        ev_asym: asymptotic_e_value(&lrt, rule),
        seed: mc.seed,
        k: mc.samples,
    })
}

/// Reports for every table of `dist`'s design, in enumeration order. The
/// e-value of the `i`-th table uses random stream `i`.
pub fn sweep(dist: &ExactDistribution, mc: McSettings) -> Result<Vec<IndexReport>> {
    const CHUNK: usize = 1 << 14;
    let mut out = Vec::with_capacity(dist.len());
    let mut tables = enumerate_tables(dist.spec()).enumerate().peekable();
    while tables.peek().is_some() {
        let chunk: Vec<(usize, ContingencyTable)> = tables.by_ref().take(CHUNK).collect();
        let reports = chunk
            .par_iter()
            .map(|(i, t)| index_report(t, dist, mc, *i as u64))
            .collect::<Result<Vec<_>>>()?;
        out.extend(reports);
    }
    Ok(out)
}

/// The sweep presets: the ten scenarios of the all-tables comparison.
pub fn preset(number: u32) -> Result<HypothesisSpec> {
    match number {
        1 => HypothesisSpec::homogeneity(vec![30, 30], 2),
        2 => HypothesisSpec::homogeneity(vec![100, 100], 2),
        3 => HypothesisSpec::homogeneity(vec![30, 30], 3),
        4 => HypothesisSpec::homogeneity(vec![15, 15, 15], 3),
        5 => HypothesisSpec::independence(2, 2, 30),
        6 => HypothesisSpec::independence(2, 3, 30),
        7 => HypothesisSpec::independence(3, 3, 15),
        8 => HypothesisSpec::independence(3, 3, 25),
        9 => Ok(HypothesisSpec::hardy_weinberg(30)),
        10 => Ok(HypothesisSpec::hardy_weinberg(100)),
        other => Err(Error::InvalidArgument(format!("presets are 1..=10, got {other}"))),
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub const SWEEP_HEADER: &str = "cells;lambda;neg2loglambda;p_exact;p_lrt_asym;p_chi2;p_fisher;ev_mc;ev_asym";

/// One `;`-separated sweep line (no trailing newline).
pub fn sweep_csv_row(r: &IndexReport) -> String {
    let cells: Vec<String> = r.table.iter().flatten().map(u64::to_string).collect();
    [
        cells.join(","),
        format_real(r.lambda),
        format_real(r.neg2_log_lambda),
        format_real(r.p_exact),
        format_real(r.p_lrt_asym),
        format_real(r.p_chi2),
        r.p_fisher.map(format_real).unwrap_or_default(),
        format_real(r.ev_mc),
        format_real(r.ev_asym),
    ]
    .join(";")
}

pub const POWER_HEADER: &str = "theta1;theta2;test;power;reps";

/// Power CSV lines, one per feasible cell and test.
pub fn power_csv_rows(grid: &PowerGrid) -> Vec<String> {
    let mut out = Vec::new();
    for (c, cell) in grid.cells.iter().enumerate() {
        if cell.rejections.is_none() {
            continue;
        }
        for (k, test) in grid.tests.iter().enumerate() {
            let power = grid.power(c, k).expect("feasible cell");
            out.push(format!(
                "{};{};{};{};{}",
                format_real(cell.theta1),
                format_real(cell.theta2),
                test.id(),
                format_real(power),
                grid.settings.reps
            ));
        }
    }
    out
}

/// JSON-friendly view of one power row.
#[derive(Clone, Debug, Serialize)]
pub struct PowerRow {
    pub theta1: f64,
    pub theta2: f64,
    pub test: &'static str,
    pub power: f64,
    pub reps: u64,
}

pub fn power_rows(grid: &PowerGrid) -> Vec<PowerRow> {
    let mut out = Vec::new();
    for (c, cell) in grid.cells.iter().enumerate() {
        for (k, test) in grid.tests.iter().enumerate() {
            if let Some(power) = grid.power(c, k) {
                out.push(PowerRow {
                    theta1: cell.theta1,
                    theta2: cell.theta2,
                    test: test.id(),
                    power,
                    reps: grid.settings.reps,
                });
            }
        }
    }
    out
}
