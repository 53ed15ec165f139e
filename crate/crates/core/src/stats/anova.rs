//! One-way ANOVA with exact F upper-tail probabilities.

use super::special::{c, reg_inc_beta};
use super::{CodedVector, Real, StatsError};

pub type AnovaError = StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaResult<T> {
    pub f_stat: T,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: T,
    pub group_means: Vec<T>,
}

/// Classic one-way decomposition: SSB = sum n_i (m_i - m)^2,
/// SSW = sum_i sum_j (x_ij - m_i)^2, F = (SSB/dfB)/(SSW/dfW).
///
/// SSW = 0 is handled as p -> 0 when SSB > 0 (F reported as infinity)
/// and p = 1 when SSB = 0.
pub fn anova_oneway<T: Real>(groups: &[CodedVector<T>]) -> Result<AnovaResult<T>, AnovaError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { needed: 2, got: groups.len() });
    }
    for g in groups {
        if g.len() < 2 {
            return Err(StatsError::TooFewValues { needed: 2, got: g.len() });
        }
    }

    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .sum::<T>()
        / c::<T>(total_n as f64);

    let group_means: Vec<T> = groups
        .iter()
        .map(|g| g.values.iter().copied().sum::<T>() / c::<T>(g.len() as f64))
        .collect();

    let ssb = groups
        .iter()
        .zip(&group_means)
        .map(|(g, &m)| {
            let d = m - grand;
            c::<T>(g.len() as f64) * d * d
        })
        .sum::<T>();
    let ssw = groups
        .iter()
        .zip(&group_means)
        .map(|(g, &m)| {
            g.values
                .iter()
                .map(|&x| {
                    let d = x - m;
                    d * d
                })
                .sum::<T>()
        })
        .sum::<T>();

    let df_between = groups.len() - 1;
    let df_within = total_n - groups.len();

    let (f_stat, p_value) = if ssw == T::zero() {
        if ssb == T::zero() {
            (T::zero(), T::one())
        } else {
            (T::infinity(), T::zero())
        }
    } else {
        let f = (ssb / c::<T>(df_between as f64)) / (ssw / c::<T>(df_within as f64));
        (f, f_upper_tail(f, df_between, df_within))
    };

    Ok(AnovaResult { f_stat, df_between, df_within, p_value, group_means })
}

/// Upper tail of the F(d1, d2) distribution:
/// p = I_{d2/(d2 + d1 f)}(d2/2, d1/2).
pub fn f_upper_tail<T: Real>(f: T, d1: usize, d2: usize) -> T {
    debug_assert!(d1 >= 1 && d2 >= 1);
    if f <= T::zero() {
        return T::one();
    }
    if f.is_infinite() {
        return T::zero();
    }
    let d1f = c::<T>(d1 as f64);
    let d2f = c::<T>(d2 as f64);
    let x = d2f / (d2f + d1f * f);
    reg_inc_beta(x, d2f / c::<T>(2.0), d1f / c::<T>(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coded(label: &str, twos: usize, n: usize) -> CodedVector<f64> {
        let mut values = vec![1.0; n - twos];
        values.extend(std::iter::repeat(2.0).take(twos));
        CodedVector::new(label, values)
    }

    #[test]
    fn falcon_four_conditions() {
        let groups = [
            coded("ZSP", 4, 22),
            coded("2-Shot", 12, 22),
            coded("5-Shot", 8, 22),
            coded("10-shot", 11, 22),
        ];
        let r = anova_oneway(&groups).unwrap();
        assert_eq!(r.df_between, 3);
        assert_eq!(r.df_within, 84);
        assert!((r.f_stat - 2.553).abs() < 1e-3, "F = {}", r.f_stat);
        assert!((r.p_value - 0.0609).abs() < 3e-3, "p = {}", r.p_value);
    }

    #[test]
    fn mixtral_three_conditions() {
        let groups = [coded("ZSP", 5, 22), coded("6-Shot", 5, 22), coded("32-Shot", 2, 22)];
        let r = anova_oneway(&groups).unwrap();
        assert!((r.p_value - 0.4117).abs() < 3e-3, "p = {}", r.p_value);
    }

    #[test]
    fn identical_groups_no_between_variance() {
        let groups = [coded("a", 5, 22), coded("b", 5, 22)];
        let r = anova_oneway(&groups).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn zero_within_variance_with_separation() {
        let groups = [
            CodedVector::new("a", vec![1.0f64; 5]),
            CodedVector::new("b", vec![2.0f64; 5]),
        ];
        let r = anova_oneway(&groups).unwrap();
        assert!(r.f_stat.is_infinite());
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn zero_within_variance_without_separation() {
        let groups = [
            CodedVector::new("a", vec![1.0f64; 5]),
            CodedVector::new("b", vec![1.0f64; 5]),
        ];
        let r = anova_oneway(&groups).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn f_tail_boundary() {
        assert_eq!(f_upper_tail(0.0f64, 3, 84), 1.0);
    }

    #[test]
    fn f_tail_claude_and_mini_reconstructions() {
        assert!((f_upper_tail(1.0328f64, 2, 63) - 0.3620).abs() < 3e-3);
        assert!((f_upper_tail(0.9163f64, 2, 63) - 0.4053).abs() < 3e-3);
    }

    #[test]
    fn f_tail_strictly_decreasing() {
        let mut prev = f_upper_tail(0.0f64, 3, 84);
        for i in 1..60 {
            let p = f_upper_tail(i as f64 * 0.25, 3, 84);
            assert!(p < prev, "not decreasing at f = {}", i as f64 * 0.25);
            prev = p;
        }
    }

    #[test]
    fn too_few_groups_and_values() {
        assert!(matches!(
            anova_oneway(&[coded("a", 1, 22)]),
            Err(StatsError::TooFewGroups { .. })
        ));
        let bad = [coded("a", 1, 22), CodedVector::new("b", vec![1.0f64])];
        assert!(matches!(anova_oneway(&bad), Err(StatsError::TooFewValues { .. })));
    }
}
