use crate::error::{Error, Result};
use crate::stochastic::VarianceSchedule;

fn check_common(l: f64, d: f64, k: usize) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::param("L", format!("must be positive, got {l}")));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::param("D", format!("must be nonnegative, got {d}")));
    }
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    Ok(())
}

/// `4D²/((1/L + 2ρ)² k²)`, valid for `ρ > −1/(2L)`.
pub fn bound_feg(l: f64, rho: f64, d: f64, k: usize) -> Result<f64> {
    check_common(l, d, k)?;
    if !(rho > -1.0 / (2.0 * l)) {
        return Err(Error::ParameterRange(format!("rho = {rho} must exceed -1/(2L)")));
    }
    let c = 1.0 / l + 2.0 * rho;
    let kf = k as f64;
    Ok(4.0 * d * d / (c * c * kf * kf))
}

/// `4D²/(((k−1)(1−δ) + 1)² ((1−δ)/L + 2ρ)²)`, valid for `ρ > −(1−δ)/(2L)`.
pub fn bound_fega(l: f64, rho: f64, delta: f64, d: f64, k: usize) -> Result<f64> {
    check_common(l, d, k)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let q = 1.0 - delta;
    if !(rho > -q / (2.0 * l)) {
        return Err(Error::ParameterRange(format!(
            "rho = {rho} must exceed -(1-delta)/(2L)"
        )));
    }
    let steps = (k as f64 - 1.0) * q + 1.0;
    let c = q / l + 2.0 * rho;
    Ok(4.0 * d * d / (steps * steps * c * c))
}

/// `4L²D²/k² + (6/k²)[σ_0² + Σ_{l=1}^{k−1} (l²σ_l² + (l+1)²σ²_{l+1/2})]`.
pub fn bound_sfeg(l: f64, d: f64, sigmas: &VarianceSchedule, k: usize) -> Result<f64> {
    check_common(l, d, k)?;
    let kf = k as f64;
    Ok(4.0 * l * l * d * d / (kf * kf) + sfeg_noise_term(sigmas, k)?)
}

/// The additive noise term of [`bound_sfeg`].
pub fn sfeg_noise_term(sigmas: &VarianceSchedule, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    let mut acc = sigmas.variance(0)?;
    for j in 1..k {
        let jf = j as f64;
        acc += jf * jf * sigmas.variance(2 * j)? + (jf + 1.0) * (jf + 1.0) * sigmas.variance(2 * j + 1)?;
    }
    let kf = k as f64;
    Ok(6.0 * acc / (kf * kf))
}

/// Constant-step anchored baseline: `260 L²D²/(k+1)²`.
pub fn bound_eag_c(l: f64, d: f64, k: usize) -> Result<f64> {
    check_common(l, d, k.max(1))?;
    let kp = k as f64 + 1.0;
    Ok(260.0 * l * l * d * d / (kp * kp))
}

/// Varying-step anchored baseline: `27 L²D²/((k+1)(k+2))`.
pub fn bound_eag_v(l: f64, d: f64, k: usize) -> Result<f64> {
    check_common(l, d, k.max(1))?;
    let kf = k as f64;
    Ok(27.0 * l * l * d * d / ((kf + 1.0) * (kf + 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::schedule_for_epsilon;

    #[test]
    fn feg_bound_values() {
        assert_eq!(bound_feg(1.0, 0.0, 1.0, 2).unwrap(), 1.0);
        assert!((bound_feg(1.0, 0.0, 1.0, 6).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(bound_feg(3.0, 0.1, 0.0, 7).unwrap(), 0.0);
        assert!(bound_feg(1.0, -0.5, 1.0, 2).is_err());
        assert!(bound_feg(1.0, 0.0, 1.0, 0).is_err());
        assert!(bound_feg(1.0, 0.0, -1.0, 1).is_err());
    }

    #[test]
    fn fega_bound_values() {
        assert!((bound_fega(1.0, 0.0, 0.5, 1.0, 3).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(bound_fega(1.0, 0.0, 0.5, 0.0, 3).unwrap(), 0.0);
        assert!(bound_fega(1.0, -0.25, 0.5, 1.0, 3).is_err());
        assert!(bound_fega(1.0, -0.2, 0.5, 1.0, 3).is_ok());
        // delta -> 0 recovers the FEG bound
        for k in 1..50 {
            let a = bound_fega(2.0, 0.1, 1e-12, 1.3, k).unwrap();
            let b = bound_feg(2.0, 0.1, 1.3, k).unwrap();
            assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn sfeg_noise_free_reduction() {
        let zero = VarianceSchedule::zero();
        for k in 1..20 {
            let kf = k as f64;
            assert_eq!(bound_sfeg(2.0, 1.5, &zero, k).unwrap(), 4.0 * 4.0 * 2.25 / (kf * kf));
        }
    }

    #[test]
    fn sfeg_epsilon_schedule_telescopes() {
        for &eps in &[0.1, 1.0, 7.5] {
            let s = schedule_for_epsilon(eps, 200).unwrap();
            for k in 1..200 {
                let kf = k as f64;
                let expect = 4.0 / (kf * kf) + eps;
                assert!((bound_sfeg(1.0, 1.0, &s, k).unwrap() - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn sfeg_constant_variance_grows_linearly() {
        // with sigma^2 = s everywhere: (6/k^2)[1 + sum (2l^2 + 2l + 1)] s = (4k + 2/k) s
        let s = VarianceSchedule::constant(0.1).unwrap();
        for k in 1..100 {
            let kf = k as f64;
            let term = sfeg_noise_term(&s, k).unwrap();
            assert!((term - 0.1 * (4.0 * kf + 2.0 / kf)).abs() <= 1e-12 * term);
        }
    }

    #[test]
    fn missing_variance_is_an_error() {
        let s = schedule_for_epsilon(1.0, 5).unwrap();
        assert!(bound_sfeg(1.0, 1.0, &s, 6).is_err());
        let neg = VarianceSchedule::Table { variances: vec![-1.0] };
        assert!(bound_sfeg(1.0, 1.0, &neg, 1).is_err());
    }

    #[test]
    fn eag_bounds() {
        assert_eq!(bound_eag_c(2.0, 1.0, 1).unwrap(), 260.0);
        assert_eq!(bound_eag_v(1.0, 1.0, 1).unwrap(), 4.5);
        assert_eq!(bound_eag_v(1.0, 1.0, 0).unwrap(), 13.5);
    }
}
