//! Full Bayesian Significance Test under uniform priors.
//!
//! With a `Dirichlet(1, ..., 1)` prior on every multinomial block the
//! posterior is a product of Dirichlet densities with parameters
//! `count + 1`. The tangent set holds the points whose posterior density is
//! at least the density's supremum over the null set, and the e-value is
//! one minus the posterior probability of that set.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lrt::mle_under_h;
use crate::special::{log_factorial, sample_dirichlet_into, RngStream};
use crate::table::{ContingencyTable, Design, HypothesisSpec};

/// Default Monte Carlo sample size for e-values.
pub const DEFAULT_MC_SAMPLES: u64 = 100_000;

/// Posterior of the unrestricted model for one observed table.
#[derive(Clone, Debug)]
pub struct PosteriorModel {
    spec: HypothesisSpec,
    /// `(start, len)` of each independent Dirichlet block in the flat
    /// parameter vector.
    blocks: Vec<(usize, usize)>,
    alphas: Vec<f64>,
    counts: Vec<u64>,
    log_norms: Vec<f64>,
    maximizer: Vec<f64>,
    log_sup_h: f64,
    log_mode: f64,
}

impl PosteriorModel {
    pub fn new(table: &ContingencyTable, spec: &HypothesisSpec) -> Result<Self> {
        let null_probs = mle_under_h(table, spec)?;
        let (rows, cols) = spec.dims();
        let blocks: Vec<(usize, usize)> = match spec.design() {
            Design::Homogeneity { .. } => (0..rows).map(|i| (i * cols, cols)).collect(),
            Design::Independence { .. } | Design::HardyWeinberg { .. } => vec![(0, rows * cols)],
        };
        let counts = table.cells().to_vec();
        let alphas = counts.iter().map(|&x| x as f64 + 1.0).collect();
        let mut log_norms = Vec::with_capacity(blocks.len());
        let mut log_mode = 0.0;
        for &(start, len) in &blocks {
            let xs = &counts[start..start + len];
            let n: u64 = xs.iter().sum();
            // Γ(n + len) / Π Γ(x + 1)
            let norm = log_factorial(n + len as u64 - 1)
                - xs.iter().map(|&x| log_factorial(x)).sum::<f64>();
            log_norms.push(norm);
            log_mode += norm + xs.iter().map(|&x| crate::special::xlogx_ratio(x, n)).sum::<f64>();
        }
        let mut model = Self {
            spec: spec.clone(),
            blocks,
            alphas,
            counts,
            log_norms,
            maximizer: null_probs,
            log_sup_h: 0.0,
            log_mode,
        };
        // flat prior: the constrained posterior maximizer is the null MLE
        model.log_sup_h = model.log_posterior_density(&model.maximizer)?;
        Ok(model)
    }

    pub fn spec(&self) -> &HypothesisSpec {
        &self.spec
    }

    /// Posterior Dirichlet parameters, row-major over the cells.
    pub fn dirichlet_alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `(start, len)` of each Dirichlet block of the parameter vector.
    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Point of the null set where the posterior density peaks.
    pub fn maximizer_under_h(&self) -> &[f64] {
        &self.maximizer
    }

    /// `ln sup_{θ ∈ Θ_H} π(θ | x)`.
    pub fn log_sup_under_h(&self) -> f64 {
        self.log_sup_h
    }

    /// `ln` of the unrestricted posterior mode density.
    pub fn log_mode_density(&self) -> f64 {
        self.log_mode
    }

    /// Log posterior density at `point`, a flat vector of one probability
    /// per cell whose blocks each lie on a simplex.
    pub fn log_posterior_density(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.counts.len() {
            return Err(Error::OffSimplex(format!(
                "expected {} coordinates, got {}",
                self.counts.len(),
                point.len()
            )));
        }
        for &(start, len) in &self.blocks {
            let block = &point[start..start + len];
            if block.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::OffSimplex(format!("coordinate outside [0, 1] in {block:?}")));
            }
            let s: f64 = block.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::OffSimplex(format!("block sums to {s}")));
            }
        }
        Ok(self.log_density_unchecked(point))
    }

    fn log_density_unchecked(&self, point: &[f64]) -> f64 {
        let mut acc: f64 = self.log_norms.iter().sum();
        for (&x, &p) in self.counts.iter().zip(point) {
            if x > 0 {
                acc += x as f64 * p.ln();
            }
        }
        acc
    }

    /// Monte Carlo e-value from `k` posterior draws.
    ///
    /// When the null set contains the posterior mode the tangent set is
    /// null and the e-value is 1 without sampling.
    pub fn e_value(&self, rng: &mut RngStream, k: u64) -> Result<EValue> {
        if k == 0 {
            return Err(Error::InvalidArgument("e-value needs at least one sample".into()));
        }
        if self.log_sup_h >= self.log_mode - 1e-12 * self.log_mode.abs().max(1.0) {
            return Ok(EValue {
                value: 1.0,
                mc_stderr: 0.0,
                samples: k,
            });
        }
        let hits = self.count_tangent_hits(rng, k);
        let inside = hits as f64 / k as f64;
        let value = 1.0 - inside;
        Ok(EValue {
            value,
            mc_stderr: (value * (1.0 - value) / k as f64).sqrt(),
            samples: k,
        })
    }

    fn count_tangent_hits<R: Rng + ?Sized>(&self, rng: &mut R, k: u64) -> u64 {
        let mut point = vec![0.0; self.counts.len()];
        let mut draw = Vec::new();
        let mut hits = 0;
        for _ in 0..k {
            for &(start, len) in &self.blocks {
                sample_dirichlet_into(rng, &self.alphas[start..start + len], &mut draw);
                point[start..start + len].copy_from_slice(&draw);
            }
            if self.log_density_unchecked(&point) >= self.log_sup_h {
                hits += 1;
            }
        }
        hits
    }
}

/// A Monte Carlo e-value with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EValue {
    pub value: f64,
    pub mc_stderr: f64,
    pub samples: u64,
}

/// Convenience wrapper around [`PosteriorModel::e_value`].
pub fn e_value(model: &PosteriorModel, rng: &mut RngStream, k: u64) -> Result<EValue> {
    model.e_value(rng, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrt::hw_allele_estimate;
    use crate::special::xlogx_ratio;
    use crate::table::{enumerate_tables, Hypothesis};

    fn model(kind: Hypothesis, t: &ContingencyTable) -> PosteriorModel {
        PosteriorModel::new(t, &HypothesisSpec::for_table(kind, t).unwrap()).unwrap()
    }

    #[test]
    fn product_beta_density() {
        let t = ContingencyTable::parse("0,1;1,0").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        let d = m.log_posterior_density(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(d.abs() < 1e-15);
        assert_eq!(m.dirichlet_alphas(), &[1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn flat_posteriors() {
        let m = model(Hypothesis::HardyWeinberg, &ContingencyTable::genotypes(0, 0, 0));
        for p in [[0.2, 0.3, 0.5], [1.0, 0.0, 0.0], [0.0, 0.5, 0.5]] {
            assert!((m.log_posterior_density(&p).unwrap() - 2f64.ln()).abs() < 1e-15);
        }
        let t = ContingencyTable::parse("0,0,0;0,0,0").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        let a = m.log_posterior_density(&[0.1, 0.2, 0.7, 0.3, 0.3, 0.4]).unwrap();
        let b = m.log_posterior_density(&[0.5, 0.5, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn off_simplex_points() {
        let t = ContingencyTable::parse("2,1;0,3").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        assert!(m.log_posterior_density(&[0.5, 0.5, 0.5]).is_err());
        assert!(m.log_posterior_density(&[0.5, 0.6, 0.5, 0.5]).is_err());
        assert!(m.log_posterior_density(&[1.5, -0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn sup_when_mode_is_in_null_set() {
        let t = ContingencyTable::parse("5,5;5,5").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        assert_eq!(m.maximizer_under_h(), &[0.5; 4]);
        assert!((m.log_sup_under_h() - m.log_mode_density()).abs() < 1e-12);

        let m = model(Hypothesis::HardyWeinberg, &ContingencyTable::genotypes(25, 50, 25));
        assert_eq!(m.maximizer_under_h(), &[0.25, 0.5, 0.25]);
        assert!((m.log_sup_under_h() - m.log_mode_density()).abs() < 1e-10);
    }

    #[test]
    fn sup_for_swapped_unit_table() {
        // (2! 2! / 1) (1/2)^1 (1/2)^1 = 1
        let t = ContingencyTable::parse("1,0;0,1").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        assert!(m.log_sup_under_h().abs() < 1e-15);
    }

    /// Dirichlet normalizer Γ(Σα) / Π Γ(α) for α = counts + 1.
    fn norm(xs: &[u64]) -> f64 {
        let n: u64 = xs.iter().sum();
        log_factorial(n + xs.len() as u64 - 1) - xs.iter().map(|&x| log_factorial(x)).sum::<f64>()
    }

    #[test]
    fn sup_matches_closed_forms() {
        for t in enumerate_tables(&HypothesisSpec::homogeneity(vec![4, 7, 2], 3).unwrap()) {
            let m = model(Hypothesis::Homogeneity, &t);
            let n = t.total();
            let want: f64 = (0..3).map(|i| norm(t.row(i))).sum::<f64>()
                + t.col_margins().iter().map(|&c| xlogx_ratio(c, n)).sum::<f64>();
            assert!((m.log_sup_under_h() - want).abs() < 1e-10);
        }
        for t in enumerate_tables(&HypothesisSpec::independence(2, 3, 6).unwrap()) {
            let m = model(Hypothesis::Independence, &t);
            let n = t.total();
            let want = norm(t.cells())
                + t.row_margins().iter().map(|&r| xlogx_ratio(r, n)).sum::<f64>()
                + t.col_margins().iter().map(|&c| xlogx_ratio(c, n)).sum::<f64>();
            assert!((m.log_sup_under_h() - want).abs() < 1e-10);
        }
        for t in enumerate_tables(&HypothesisSpec::hardy_weinberg(15)) {
            let m = model(Hypothesis::HardyWeinberg, &t);
            let c = t.cells();
            let n = t.total();
            let theta = hw_allele_estimate(&t);
            let want = norm(c)
                + c[1] as f64 * 2f64.ln()
                + xlogx_ratio(2 * c[0] + c[1], 2 * n)
                + xlogx_ratio(2 * c[2] + c[1], 2 * n);
            assert!((m.log_sup_under_h() - want).abs() < 1e-10, "{t} {theta}");
        }
    }

    #[test]
    fn sup_never_exceeds_mode() {
        for t in enumerate_tables(&HypothesisSpec::independence(3, 2, 5).unwrap()) {
            let m = model(Hypothesis::Independence, &t);
            assert!(m.log_sup_under_h() <= m.log_mode_density() + 1e-12);
        }
    }

    #[test]
    fn e_value_edges() {
        let t = ContingencyTable::parse("5,5;5,5").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        for k in [1, 10, 1000] {
            let ev = m.e_value(&mut RngStream::new(0, 0), k).unwrap();
            assert_eq!(ev.value, 1.0);
        }
        let t = ContingencyTable::parse("7,3;2,8").unwrap();
        let m = model(Hypothesis::Homogeneity, &t);
        for s in 0..20 {
            let ev = m.e_value(&mut RngStream::new(s, 0), 1).unwrap();
            assert!(ev.value == 0.0 || ev.value == 1.0);
        }
        assert!(m.e_value(&mut RngStream::new(0, 0), 0).is_err());
    }

    #[test]
    fn e_value_reproducible() {
        let t = ContingencyTable::genotypes(3, 1, 6);
        let m = model(Hypothesis::HardyWeinberg, &t);
        let a = m.e_value(&mut RngStream::new(11, 5), 5000).unwrap();
        let b = m.e_value(&mut RngStream::new(11, 5), 5000).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0 && a.value < 1.0);
    }

    #[test]
    fn e_value_row_permutation() {
        let a = ContingencyTable::parse("6,1,3;2,5,3").unwrap();
        let b = ContingencyTable::parse("2,5,3;6,1,3").unwrap();
        let k = 40_000;
        let ea = model(Hypothesis::Homogeneity, &a).e_value(&mut RngStream::new(3, 0), k).unwrap();
        let eb = model(Hypothesis::Homogeneity, &b).e_value(&mut RngStream::new(3, 1), k).unwrap();
        let se = (ea.mc_stderr.powi(2) + eb.mc_stderr.powi(2)).sqrt();
        assert!((ea.value - eb.value).abs() <= 3.0 * se, "{ea:?} {eb:?}");
    }
}
