//! One-sample KS test against a normal with parameters estimated from the
//! sample. The D statistic uses the plain plug-in normal CDF; p-values use
//! the Lilliefors-regime approximation (estimated parameters make plain
//! Kolmogorov asymptotics anti-conservative).

use super::special::{c, normal_cdf};
use super::{mean_sd_sem, CodedVector, Real, StatsError};

/// Result of the KS-vs-normal statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KsOutcome<T> {
    Statistic(T),
    /// Zero sample variance: the test does not apply (rendered as "-").
    Degenerate,
}

impl<T: Real> KsOutcome<T> {
    pub fn statistic(&self) -> Option<T> {
        match self {
            KsOutcome::Statistic(d) => Some(*d),
            KsOutcome::Degenerate => None,
        }
    }
}

/// D = sup_x |F_n(x) - Phi((x - mean)/sd)|, evaluated on both sides of
/// every jump of the empirical CDF. Requires |v| >= 2; zero variance
/// yields [`KsOutcome::Degenerate`].
pub fn ks_normal<T: Real>(v: &CodedVector<T>) -> Result<KsOutcome<T>, StatsError> {
    let d = mean_sd_sem(v)?;
    if d.sd == T::zero() {
        return Ok(KsOutcome::Degenerate);
    }
    let mut sorted = v.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("codes are finite"));
    let n = sorted.len();
    let nf = c::<T>(n as f64);

    let mut sup = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let z = (x - d.mean) / d.sd;
        let phi = normal_cdf(z);
        let upper = c::<T>((i + 1) as f64) / nf - phi; // F_n(x) - Phi
        let lower = phi - c::<T>(i as f64) / nf; // Phi - F_n(x^-)
        sup = sup.max(upper).max(lower);
    }
    Ok(KsOutcome::Statistic(sup))
}

/// Lilliefors-regime p-value for the D statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsPValue<T> {
    pub p: T,
    /// Always true here: the normal's parameters were estimated from the
    /// sample, so the correction regime applies.
    pub estimated_params: bool,
    /// Set when D = 0 (perfect fit; p clamps at the approximation's max).
    pub boundary: bool,
}

/// p-value via the Dallal-Wilkinson approximation with the polynomial
/// upper branch used by R's `nortest::lillie.test`, valid for estimated
/// parameters. Clamped to [0, 1].
pub fn ks_pvalue<T: Real>(d_stat: T, n: usize) -> KsPValue<T> {
    debug_assert!(n >= 2);
    let nf = c::<T>(n as f64);
    let (kd, nd) = if n <= 100 {
        (d_stat, nf)
    } else {
        (d_stat * (nf / c::<T>(100.0)).powf(c::<T>(0.49)), c::<T>(100.0))
    };

    let mut p = (-c::<T>(7.01256) * kd * kd * (nd + c::<T>(2.78019))
        + c::<T>(2.99587) * kd * (nd + c::<T>(2.78019)).sqrt()
        - c::<T>(0.122119)
        + c::<T>(0.974598) / nd.sqrt()
        + c::<T>(1.67997) / nd)
        .exp();

    if p > c::<T>(0.1) {
        let kk = (nf.sqrt() - c::<T>(0.01) + c::<T>(0.85) / nf.sqrt()) * d_stat;
        p = if kk <= c::<T>(0.302) {
            T::one()
        } else if kk <= c::<T>(0.5) {
            poly(kk, &[2.76773, -19.828315, 80.709644, -138.55152, 81.218052])
        } else if kk <= c::<T>(0.9) {
            poly(kk, &[-4.901232, 40.662806, -97.490286, 94.029866, -32.355711])
        } else if kk <= c::<T>(1.31) {
            poly(kk, &[6.198765, -19.558097, 23.186922, -12.234627, 2.423045])
        } else {
            T::zero()
        };
    }

    KsPValue {
        p: p.max(T::zero()).min(T::one()),
        estimated_params: true,
        boundary: d_stat == T::zero(),
    }
}

// ascending-power coefficients
fn poly<T: Real>(x: T, coeffs: &[f64]) -> T {
    let mut acc = T::zero();
    for &co in coeffs.iter().rev() {
        acc = acc * x + c::<T>(co);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coded(twos: usize, n: usize) -> CodedVector<f64> {
        let mut values = vec![1.0; n - twos];
        values.extend(std::iter::repeat(2.0).take(twos));
        CodedVector::new("test", values)
    }

    #[test]
    fn falcon_zsp_statistic() {
        // 18 ones + 4 twos: the jump at x=1 dominates,
        // |F_n(1) - Phi(z_1)| = |0.8182 - 0.3226|
        let d = ks_normal(&coded(4, 22)).unwrap().statistic().unwrap();
        assert!((d - 0.496).abs() < 1e-3, "D = {d}");
    }

    #[test]
    fn falcon_two_shot_statistic() {
        let d = ks_normal(&coded(12, 22)).unwrap().statistic().unwrap();
        assert!((d - 0.359).abs() < 1e-3, "D = {d}");
    }

    #[test]
    fn degenerate_on_constant_vector() {
        assert_eq!(ks_normal(&coded(0, 22)).unwrap(), KsOutcome::Degenerate);
        assert_eq!(ks_normal(&coded(22, 22)).unwrap(), KsOutcome::Degenerate);
    }

    #[test]
    fn pvalue_highly_significant() {
        let r = ks_pvalue(0.496, 22);
        assert!(r.p < 1e-4, "p = {}", r.p);
        assert!(r.estimated_params);
        assert!(!r.boundary);
    }

    #[test]
    fn pvalue_sub_milli() {
        let r = ks_pvalue(0.336, 22);
        assert!(r.p < 1e-3, "p = {}", r.p);
    }

    #[test]
    fn pvalue_boundary_perfect_fit() {
        let r = ks_pvalue(0.0, 22);
        assert_eq!(r.p, 1.0);
        assert!(r.boundary);
    }

    #[test]
    fn statistic_in_unit_interval() {
        for t in 1..22 {
            let d = ks_normal(&coded(t, 22)).unwrap().statistic().unwrap();
            assert!(d > 0.0 && d < 1.0);
        }
    }
}
