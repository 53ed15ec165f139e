//! Mean, sample standard deviation, and standard error of the mean.

use super::special::c;
use super::{CodedVector, Real, StatsError};

/// Descriptive summary of one condition vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptives<T> {
    pub mean: T,
    /// Sample standard deviation (n-1 denominator).
    pub sd: T,
    /// sd / sqrt(n).
    pub sem: T,
    pub n: usize,
}

/// mean, sample sd, and SEM of a coded vector. Requires |v| >= 2.
pub fn mean_sd_sem<T: Real>(v: &CodedVector<T>) -> Result<Descriptives<T>, StatsError> {
    let n = v.len();
    if n < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: n });
    }
    let nf = c::<T>(n as f64);
    let mean = v.values.iter().copied().sum::<T>() / nf;
    let ss = v
        .values
        .iter()
        .map(|&x| {
            let d = x - mean;
            d * d
        })
        .sum::<T>();
    let sd = (ss / c::<T>((n - 1) as f64)).sqrt();
    let sem = sd / nf.sqrt();
    Ok(Descriptives { mean, sd, sem, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coded(twos: usize, n: usize) -> CodedVector<f64> {
        let mut values = vec![2.0; twos];
        values.extend(std::iter::repeat(1.0).take(n - twos));
        CodedVector::new("test", values)
    }

    #[test]
    fn falcon_zsp_column() {
        // 18 ones + 4 twos
        let d = mean_sd_sem(&coded(4, 22)).unwrap();
        assert!((d.mean - 1.1818).abs() < 5e-5);
        assert!((d.sd - 0.3948).abs() < 5e-5);
        assert!((d.sem - 0.0842).abs() < 5e-5);
    }

    #[test]
    fn all_ones_degenerate() {
        let d = mean_sd_sem(&coded(0, 22)).unwrap();
        assert_eq!(d.mean, 1.0);
        assert_eq!(d.sd, 0.0);
        assert_eq!(d.sem, 0.0);
    }

    #[test]
    fn falcon_two_shot_column() {
        // 10 ones + 12 twos
        let d = mean_sd_sem(&coded(12, 22)).unwrap();
        assert!((d.mean - 1.5455).abs() < 5e-5);
        assert!((d.sd - 0.5096).abs() < 5e-5);
        assert!((d.sem - 0.1087).abs() < 5e-5);
    }

    #[test]
    fn coded_mean_identity() {
        // mean of a {1,2} vector with t twos out of n is exactly 1 + t/n
        for n in 2..40usize {
            for t in 0..=n {
                let d = mean_sd_sem(&coded(t, n)).unwrap();
                let expect = 1.0 + t as f64 / n as f64;
                assert!((d.mean - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_few_values() {
        let v = CodedVector::new("x", vec![1.0f64]);
        assert_eq!(
            mean_sd_sem(&v),
            Err(StatsError::TooFewValues { needed: 2, got: 1 })
        );
    }
}
