//! Runs the library against the rational oracle over whole spaces.

use num::rational::BigRational;

use ctsig::exact::lambda_ties;
use ctsig::{build_distribution, enumerate_tables, log_h, log_lambda, ContingencyTable, HypothesisSpec};

use super::{to_f64, OracleSpace};

#[derive(Debug, Default)]
pub struct Discrepancy {
    pub tables: usize,
    pub h: f64,
    pub prob: f64,
    pub lambda: f64,
    pub p_value: f64,
    pub order_violations: usize,
}

impl Discrepancy {
    pub fn worst(&self) -> f64 {
        self.h.max(self.prob).max(self.lambda).max(self.p_value)
    }

    pub fn merge(&mut self, other: &Discrepancy) {
        self.tables += other.tables;
        self.h = self.h.max(other.h);
        self.prob = self.prob.max(other.prob);
        self.lambda = self.lambda.max(other.lambda);
        self.p_value = self.p_value.max(other.p_value);
        self.order_violations += other.order_violations;
    }
}

/// Compares `h`, `Pr(x | H)`, `λ`, the `λ` ordering and the P-value for
/// every table of `spec` with the exact oracle.
pub fn against_oracle(
    spec: &HypothesisSpec,
    oracle: impl Fn(&ContingencyTable) -> (BigRational, BigRational),
) -> Discrepancy {
    let tables: Vec<ContingencyTable> = enumerate_tables(spec).collect();
    let (h, lambda): (Vec<_>, Vec<_>) = tables.iter().map(&oracle).unzip();
    let exact = OracleSpace::new(h, lambda);
    let dist = build_distribution(spec).unwrap();

    let mut d = Discrepancy {
        tables: tables.len(),
        ..Default::default()
    };
    let log_lambdas: Vec<f64> = tables.iter().map(|t| log_lambda(t, spec).unwrap().log_lambda).collect();
    for (i, t) in tables.iter().enumerate() {
        let entry = dist.entries()[i];
        d.h = d.h.max((log_h(t, spec).unwrap().exp() - to_f64(&exact.h[i])).abs());
        d.prob = d.prob.max((entry.log_prob.exp() - to_f64(&exact.prob[i])).abs());
        d.lambda = d.lambda.max((log_lambdas[i].exp() - to_f64(&exact.lambda[i])).abs());
        d.p_value = d.p_value.max((dist.p_value(t).unwrap() - to_f64(&exact.p_value[i])).abs());
        for j in 0..tables.len() {
            let tied = lambda_ties(log_lambdas[i], log_lambdas[j]);
            let ok = match exact.lambda[i].cmp(&exact.lambda[j]) {
                std::cmp::Ordering::Equal => tied,
                std::cmp::Ordering::Less => !tied && log_lambdas[i] < log_lambdas[j],
                std::cmp::Ordering::Greater => !tied && log_lambdas[i] > log_lambdas[j],
            };
            if !ok {
                d.order_violations += 1;
            }
        }
    }
    d
}

pub fn homogeneity_2x2_oracle(t: &ContingencyTable) -> (BigRational, BigRational) {
    let c = t.cells();
    (
        super::h_homogeneity_2x2(c[0], c[1], c[2], c[3]),
        super::lambda_homogeneity_2x2(c[0], c[1], c[2], c[3]),
    )
}

pub fn hardy_weinberg_oracle(t: &ContingencyTable) -> (BigRational, BigRational) {
    let c = t.cells();
    (
        super::h_hardy_weinberg(c[0], c[1], c[2]),
        super::lambda_hardy_weinberg(c[0], c[1], c[2]),
    )
}
