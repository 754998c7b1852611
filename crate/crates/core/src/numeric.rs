//! Compensated accumulation and small least-squares helpers.

use num_complex::Complex64;

/// Neumaier variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Elementwise compensated accumulator over complex vectors.
#[derive(Debug, Clone)]
pub struct ComplexAccumulator {
    re: Vec<CompensatedSum>,
    im: Vec<CompensatedSum>,
}

impl ComplexAccumulator {
    pub fn zeros(len: usize) -> Self {
        Self { re: vec![CompensatedSum::default(); len], im: vec![CompensatedSum::default(); len] }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn add(&mut self, values: &[Complex64]) {
        assert_eq!(values.len(), self.re.len(), "accumulator length mismatch");
        for ((r, i), v) in self.re.iter_mut().zip(self.im.iter_mut()).zip(values) {
            r.add(v.re);
            i.add(v.im);
        }
    }

    pub fn finish(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(r, i)| Complex64::new(r.value(), i.value())).collect()
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (slope * a + intercept)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r_squared })
}

/// Least-squares slope of a line forced through the origin.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> Option<f64> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if x.len() != y.len() || sxx == 0.0 {
        return None;
    }
    Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut naive = 1.0f64;
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            naive += 1e-16;
            acc.add(1e-16);
        }
        assert_eq!(naive, 1.0);
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-24);
    }

    #[test]
    fn exact_line_fit() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
        assert!((slope_through_origin(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 2.0).abs() < 1e-15);
    }
}
