//! Oracles shared by the integration suites. Only `compare` touches the
//! library; everything else is independent of its code paths.
#![allow(dead_code)]

pub mod compare;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

// ---------------------------------------------------------------- rational

pub fn fact(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `(a / b)^a`, with `0^0 = 1`.
fn self_power(a: u64, b: u64) -> BigRational {
    if a == 0 {
        BigRational::one()
    } else {
        num::pow::pow(ratio(a, b), a as usize)
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Exact `h` for a 2-row homogeneity table `[[a, b], [c, d]]` from the
/// integral `C(n1, a) C(n2, c) ∫ θ^(a+c) (1-θ)^(b+d) dθ`.
pub fn h_homogeneity_2x2(a: u64, b: u64, c: u64, d: u64) -> BigRational {
    let (n1, n2) = (a + b, c + d);
    let binoms = fact(n1) * fact(n2) / (fact(a) * fact(b) * fact(c) * fact(d));
    // ∫ θ^p (1-θ)^q = p! q! / (p + q + 1)!
    let beta = BigRational::new(fact(a + c) * fact(b + d), fact(n1 + n2 + 1));
    BigRational::from_integer(binoms) * beta
}

/// Exact `h` for genotype counts from
/// `n!/(x1! x2! x3!) 2^x2 ∫ θ^(2x1+x2) (1-θ)^(2x3+x2) dθ`.
pub fn h_hardy_weinberg(x1: u64, x2: u64, x3: u64) -> BigRational {
    let n = x1 + x2 + x3;
    let multinom = fact(n) / (fact(x1) * fact(x2) * fact(x3));
    let two = num::pow::pow(BigInt::from(2), x2 as usize);
    let beta = BigRational::new(fact(2 * x1 + x2) * fact(2 * x3 + x2), fact(2 * n + 1));
    BigRational::from_integer(multinom * two) * beta
}

pub fn lambda_homogeneity_2x2(a: u64, b: u64, c: u64, d: u64) -> BigRational {
    let (n1, n2) = (a + b, c + d);
    let n = n1 + n2;
    let null = self_power(a + c, n) * self_power(b + d, n);
    let full = self_power(a, n1) * self_power(b, n1) * self_power(c, n2) * self_power(d, n2);
    null / full
}

pub fn lambda_hardy_weinberg(x1: u64, x2: u64, x3: u64) -> BigRational {
    let n = x1 + x2 + x3;
    if n == 0 {
        return BigRational::one();
    }
    let two = BigRational::from_integer(num::pow::pow(BigInt::from(2), x2 as usize));
    let null = two * self_power(2 * x1 + x2, 2 * n) * self_power(2 * x3 + x2, 2 * n);
    let full = self_power(x1, n) * self_power(x2, n) * self_power(x3, n);
    null / full
}

/// Normalized probabilities and exact P-values for a space given each
/// table's exact `h` and `λ`.
pub struct OracleSpace {
    pub h: Vec<BigRational>,
    pub prob: Vec<BigRational>,
    pub lambda: Vec<BigRational>,
    pub p_value: Vec<BigRational>,
}

impl OracleSpace {
    pub fn new(h: Vec<BigRational>, lambda: Vec<BigRational>) -> Self {
        let total = h.iter().fold(BigRational::zero(), |acc, x| acc + x);
        let prob: Vec<BigRational> = h.iter().map(|x| x / &total).collect();
        let p_value = lambda
            .iter()
            .map(|l| {
                lambda
                    .iter()
                    .zip(&prob)
                    .filter(|(other, _)| *other <= l)
                    .fold(BigRational::zero(), |acc, (_, p)| acc + p)
            })
            .collect();
        Self { h, prob, lambda, p_value }
    }
}

// -------------------------------------------------------------- quadrature

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push((1.0 - x) / 2.0);
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre over `[lo, hi]`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let width = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            acc += w * width * f(a + x * width);
        }
    }
    acc
}

fn binom_f64(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Beta(a, b)` CDF for integer parameters as a binomial tail.
pub fn beta_cdf(a: u64, b: u64, x: f64) -> f64 {
    let m = a + b - 1;
    (a..=m)
        .map(|j| binom_f64(m, j) * x.powi(j as i32) * (1.0 - x).powi((m - j) as i32))
        .sum()
}

fn ln_beta_density(a: u64, b: u64, x: f64) -> f64 {
    let m = a + b - 1;
    // 1 / B(a, b) = m! / ((a-1)! (b-1)!) = m * C(m-1, a-1)
    let norm = (m as f64 * binom_f64(m - 1, a - 1)).ln();
    let mut v = norm;
    if a > 1 {
        v += (a - 1) as f64 * x.ln();
    }
    if b > 1 {
        v += (b - 1) as f64 * (1.0 - x).ln();
    }
    v
}

/// Interval where the `Beta(a, b)` log-density is at least `level`, or
/// `None` if the mode is below it.
fn superlevel(a: u64, b: u64, level: f64) -> Option<(f64, f64)> {
    let mode = (a - 1) as f64 / (a + b - 2) as f64;
    if ln_beta_density(a, b, mode) < level {
        return None;
    }
    let crossing = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if ln_beta_density(a, b, mid) >= level {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if ln_beta_density(a, b, 0.0) >= level { 0.0 } else { crossing(mode, 0.0) };
    let hi = if ln_beta_density(a, b, 1.0) >= level { 1.0 } else { crossing(mode, 1.0) };
    Some((lo, hi))
}

/// e-value of a 2x2 homogeneity table `[[a, b], [c, d]]` by deterministic
/// quadrature of the product-Beta posterior over the tangent set.
pub fn fbst_quadrature_2x2(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (n1, n2) = (a + b, c + d);
    let n = n1 + n2;
    // posterior sup on the null line: (n1+1)!(n2+1)!/(a!b!c!d!) p^(a+c) (1-p)^(b+d)
    let xl = |x: u64, m: u64| if x == 0 { 0.0 } else { x as f64 * (x as f64 / m as f64).ln() };
    let ln_fact = |k: u64| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_sup = ln_fact(n1 + 1) + ln_fact(n2 + 1) - ln_fact(a) - ln_fact(b) - ln_fact(c) - ln_fact(d)
        + xl(a + c, n)
        + xl(b + d, n);

    let (a1, b1, a2, b2) = (a + 1, b + 1, c + 1, d + 1);
    let mode2 = (a2 - 1) as f64 / (a2 + b2 - 2) as f64;
    let max2 = ln_beta_density(a2, b2, mode2);
    let Some((u1, u2)) = superlevel(a1, b1, ln_sup - max2) else {
        return 1.0;
    };
    let inner = |t1: f64| {
        let level = ln_sup - ln_beta_density(a1, b1, t1);
        match superlevel(a2, b2, level) {
            Some((v1, v2)) => beta_cdf(a2, b2, v2) - beta_cdf(a2, b2, v1),
            None => 0.0,
        }
    };
    // cosine map flattens the square-root behaviour at the end points
    let width = u2 - u1;
    let tangent = integrate(
        |s| {
            let t1 = u1 + width * (1.0 - (std::f64::consts::PI * s).cos()) / 2.0;
            let jac = width * std::f64::consts::FRAC_PI_2 * (std::f64::consts::PI * s).sin();
            (ln_beta_density(a1, b1, t1).exp()) * inner(t1) * jac
        },
        0.0,
        1.0,
        64,
        20,
    );
    1.0 - tangent
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}
