//! Small numeric helpers shared across modules: compensated summation,
//! sample moments, and least-squares line fits.

/// Kahan compensated accumulator. Used wherever the spec of a sum requires
/// results independent of evaluation order to ~1e-12 relative.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_total(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    kahan_total(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    kahan_total(xs.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Least-squares line fit y = slope * x + intercept.
/// Returns (slope, intercept). Requires at least two distinct x values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let xm = mean(xs);
    let ym = mean(ys);
    let sxx = kahan_total(xs.iter().map(|x| (x - xm) * (x - xm)));
    if sxx == 0.0 || !sxx.is_finite() {
        return None;
    }
    let sxy = kahan_total(xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)));
    let slope = sxy / sxx;
    Some((slope, ym - slope * xm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-13);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (slope, intercept) = linear_fit(&xs, &ys).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
    }
}
