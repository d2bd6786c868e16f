//! Small numerical helpers shared across modules.

/// Blocks shorter than this are summed sequentially.
const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so results are reproducible bit-for-bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of a mapped iterator (collects first).
pub fn pairwise_sum_by<I, F>(iter: I, f: F) -> f64
where
    I: IntoIterator,
    F: FnMut(I::Item) -> f64,
{
    let v: Vec<f64> = iter.into_iter().map(f).collect();
    pairwise_sum(&v)
}

/// Ordinary least-squares line `y = slope * x + intercept`.
///
/// Returns `None` with fewer than two points or a degenerate abscissa.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = pairwise_sum(&xs[..n]) / n as f64;
    let my = pairwise_sum(&ys[..n]) / n as f64;
    let sxx: Vec<f64> = xs[..n].iter().map(|x| (x - mx) * (x - mx)).collect();
    let sxy: Vec<f64> = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    let sxx = pairwise_sum(&sxx);
    if sxx <= 0.0 {
        return None;
    }
    let slope = pairwise_sum(&sxy) / sxx;
    Some((slope, my - slope * mx))
}

/// Fit `log|y| = slope * log(x) + c`, skipping non-positive entries.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Binomial coefficient as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// `2^e` for an integer exponent.
#[inline]
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}
