//! Shared numerics: composite Simpson quadrature for the path integrals and
//! finite-difference derivatives for sampled time series.

/// Resolution knobs for the turbulence path integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Number of Simpson panels over the (truncated) integration domain.
    pub panels: usize,
    /// Absolute Cn^2 level below which the profile tail is treated as vacuum
    /// and excluded from the integration domain.
    pub tail_cutoff: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels: 10_000,
            tail_cutoff: 1e-30,
        }
    }
}

/// Composite Simpson rule over [a, b] with `panels` subintervals.
///
/// The panel count is rounded up to the next even number; Simpson weights
/// require it. Returns 0 for an empty or inverted interval.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Per-sample derivative dy/dt of a sampled series.
///
/// Interior points use the three-point central formula valid for nonuniform
/// spacing; the endpoints fall back to one-sided differences. Epochs must be
/// strictly increasing.
pub fn sample_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(t.len(), y.len());
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut d = Vec::with_capacity(n);
    d.push((y[1] - y[0]) / (t[1] - t[0]));
    for i in 1..n - 1 {
        let h0 = t[i] - t[i - 1];
        let h1 = t[i + 1] - t[i];
        // Unequal-interval central difference, second-order accurate.
        let v = (y[i + 1] * h0 * h0 - y[i - 1] * h1 * h1
            + y[i] * (h1 * h1 - h0 * h0))
            / (h0 * h1 * (h0 + h1));
        d.push(v);
    }
    d.push((y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]));
    d
}

/// Histogram of `values` over the symmetric range [-max|v|, +max|v|],
/// returned as (bin center, count) pairs. All-zero data collapses into the
/// central bin of an arbitrary unit range.
pub fn symmetric_histogram(values: &[f64], bins: usize) -> Vec<(f64, u64)> {
    assert!(bins > 0, "histogram needs at least one bin");
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let half = if max_abs > 0.0 { max_abs } else { 1.0 };
    let width = 2.0 * half / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in values {
        let idx = (((v + half) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (-half + (i as f64 + 0.5) * width, c))
        .collect()
}
