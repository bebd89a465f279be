//! Summary statistics over simulation iterations.

/// Empirical quantile, linear interpolation between order statistics
/// (Hyndman-Fan type 7, the R default). `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
}

impl Stats {
    pub const HEADER: [&'static str; 5] = ["n", "mean", "sd", "q2.5", "q97.5"];

    /// Statistics of `values`, summed in the given order.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, sd: f64::NAN, q025: f64::NAN, q975: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            n,
            mean,
            sd,
            q025: quantile_sorted(&sorted, 0.025),
            q975: quantile_sorted(&sorted, 0.975),
        }
    }

    /// Monte Carlo standard error of the mean.
    pub fn mcse(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }

    /// CSV fields in [`Stats::HEADER`] order; undefined values are empty.
    pub fn fields(&self) -> Vec<String> {
        let f = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
        vec![self.n.to_string(), f(self.mean), f(self.sd), f(self.q025), f(self.q975)]
    }
}
