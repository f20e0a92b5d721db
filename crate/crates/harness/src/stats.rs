//! Summary statistics and the exact sign test.
//!
//! Quantiles use linear interpolation between order statistics (type 7):
//! for sorted `x` of length `n`, `q(p) = x[j] + g * (x[j+1] - x[j])` with
//! `h = (n - 1) p`, `j = floor(h)`, `g = h - j`.

use num_traits::Float;
use serde::Serialize;

/// Type-7 quantile of sorted data; `None` when empty.
pub fn quantile<F: Float>(sorted: &[F], p: F) -> Option<F> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let h = F::from(n - 1)? * p;
    let j = h.floor();
    let g = h - j;
    let j = j.to_usize()?.min(n - 1);
    let hi = sorted[(j + 1).min(n - 1)];
    Some(sorted[j] + g * (hi - sorted[j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary<F> {
    pub n: usize,
    pub min: F,
    pub q1: F,
    pub median: F,
    pub q3: F,
    pub max: F,
    pub mean: F,
}

pub type Summary64 = Summary<f64>;

impl<F: Float> Summary<F> {
    /// Summary of the values; `None` when there are none. NaNs are not expected.
    pub fn of(values: &[F]) -> Option<Summary<F>> {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        let q = |p: f64| quantile(&v, F::from(p).expect("representable"));
        let sum = v.iter().fold(F::zero(), |acc, &x| acc + x);
        Some(Summary {
            n: v.len(),
            min: *v.first()?,
            q1: q(0.25)?,
            median: q(0.5)?,
            q3: q(0.75)?,
            max: *v.last()?,
            mean: sum / F::from(v.len())?,
        })
    }

    pub fn iqr(&self) -> F {
        self.q3 - self.q1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Two-sided exact binomial p-value; ties are dropped.
    pub p_value: f64,
}

/// Exact two-sided sign test on paired samples, `a` against `b`.
pub fn sign_test(pairs: impl IntoIterator<Item = (f64, f64)>) -> SignTest {
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (a, b) in pairs {
        match a.partial_cmp(&b) {
            Some(std::cmp::Ordering::Greater) => wins += 1,
            Some(std::cmp::Ordering::Less) => losses += 1,
            _ => ties += 1,
        }
    }
    let n = wins + losses;
    let k = wins.min(losses);
    // P(X <= k) for X ~ Bin(n, 1/2), summed in log space
    let mut ln_c = 0.0;
    let mut tail = 0.0;
    let ln_half_n = n as f64 * 0.5f64.ln();
    for i in 0..=k {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c + ln_half_n).exp();
    }
    let p_value = if n == 0 { 1.0 } else { (2.0 * tail).min(1.0) };
    SignTest { wins, losses, ties, p_value }
}
