use serde::Serialize;

/// Pairwise (cascade) summation; the result depends only on the order of
/// `xs`, never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation.
    pub stddev: f64,
    /// Standard error of the mean.
    pub stderr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        if n == 0 {
            return Summary { n, mean: f64::NAN, stddev: f64::NAN, stderr: f64::NAN };
        }
        let mean = pairwise_sum(xs) / n as f64;
        if n == 1 {
            return Summary { n, mean, stddev: 0.0, stderr: 0.0 };
        }
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let stddev = (pairwise_sum(&dev) / (n - 1) as f64).sqrt();
        Summary { n, mean, stddev, stderr: stddev / (n as f64).sqrt() }
    }
}
