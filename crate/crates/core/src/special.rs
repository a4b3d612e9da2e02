//! Numerical kernels: log-factorials, the chi-square survival function and
//! seedable random streams with the samplers the Monte Carlo code needs.

use std::sync::OnceLock;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};

const TABLE_SIZE: usize = 1 << 16;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..TABLE_SIZE as u64).map(log_factorial_uncached).collect())
}

fn log_factorial_uncached(m: u64) -> f64 {
    if m <= 20 {
        // exact in u64, so only one rounding before the log
        let f: u64 = (1..=m).product();
        return (f as f64).ln();
    }
    // Stirling series for ln Γ(z), z = m + 1 > 21; the first omitted term is
    // below 1e-15.
    let z = (m + 1) as f64;
    let z2 = z * z;
    let series = (1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0) / z2) / z2) / z2)
        / z;
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// `ln(m!)`, tabulated for `m < 65536`.
pub fn log_factorial(m: u64) -> f64 {
    match factorial_table().get(m as usize) {
        Some(&v) => v,
        None => log_factorial_uncached(m),
    }
}

/// `ln Γ(df / 2)` for a positive integer `df`.
fn log_gamma_half(df: u32) -> f64 {
    let k = u64::from(df / 2);
    if df.is_multiple_of(2) {
        log_factorial(k - 1)
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        log_factorial(2 * k) + LN_SQRT_PI - (k as f64) * 4f64.ln() - log_factorial(k)
    }
}

/// `x * ln(x / m)` with the convention `0 * ln 0 = 0`.
#[inline]
pub fn xlogx_ratio(x: u64, m: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        x as f64 * (x as f64 / m as f64).ln()
    }
}

/// `ln(exp(a_1) + ... + exp(a_n))`, stable for large magnitudes.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSumExp::default();
    for v in values {
        acc.push(v);
    }
    acc.value()
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled_sum += (v - self.max).exp();
        } else {
            self.scaled_sum = self.scaled_sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.scaled_sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma `Q(a, x)` for `a = df / 2`.
///
/// Series for `x < a + 1`, Lentz continued fraction otherwise.
fn gamma_q_half(df: u32, x: f64) -> f64 {
    let a = f64::from(df) / 2.0;
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let log_prefactor = -x + a * x.ln() - log_gamma_half(df);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        let p = (log_prefactor + sum.ln()).exp();
        (1.0 - p).clamp(0.0, 1.0)
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        (log_prefactor + h.ln()).exp().clamp(0.0, 1.0)
    }
}

/// `Pr(χ²_df ≥ x)`.
///
/// # Panics
///
/// If `df == 0`.
pub fn chi2_survival(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs at least one degree of freedom");
    if x.is_nan() {
        return f64::NAN;
    }
    if df == 2 {
        return (-x / 2.0).exp().min(1.0);
    }
    gamma_q_half(df, x / 2.0)
}

/// A reproducible random stream: one master seed, many independent streams.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives each grid cell or
/// table its own sequence without coordination between workers.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream under the same master seed.
    pub fn derive(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Draws `Gamma(shape, 1)`; `shape` must be positive.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    Gamma::new(shape, 1.0)
        .expect("gamma shape must be positive and finite")
        .sample(rng)
}

/// Draws a point of the simplex from `Dirichlet(alphas)` by normalizing
/// independent gamma draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, alphas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(alphas.len());
    sample_dirichlet_into(rng, alphas, &mut out);
    out
}

pub(crate) fn sample_dirichlet_into<R: Rng + ?Sized>(rng: &mut R, alphas: &[f64], out: &mut Vec<f64>) {
    out.clear();
    if alphas.len() == 1 {
        out.push(1.0);
        return;
    }
    let mut sum = 0.0;
    for &a in alphas {
        let g = sample_gamma(rng, a);
        sum += g;
        out.push(g);
    }
    for g in out.iter_mut() {
        *g /= sum;
    }
}

pub fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, m: u64, p: f64) -> u64 {
    if p <= 0.0 || m == 0 {
        return 0;
    }
    if p >= 1.0 {
        return m;
    }
    Binomial::new(m, p)
        .expect("binomial probability in [0, 1]")
        .sample(rng)
}

/// Multinomial draw by successive conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(rng: &mut R, m: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = m;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = left;
            break;
        }
        let x = if mass <= 0.0 {
            0
        } else {
            sample_binomial(rng, left, (p / mass).clamp(0.0, 1.0))
        };
        out[i] = x;
        left -= x;
        mass -= p;
    }
    out
}
