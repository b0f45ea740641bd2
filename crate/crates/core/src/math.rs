//! Scalar helpers shared by the simulator and the models.

/// Floor applied to probabilities before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for `y > 0`.
#[inline]
pub fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// `-ln(max(p, LOG_FLOOR))`.
#[inline]
pub fn neg_log(p: f64) -> f64 {
    -p.max(LOG_FLOOR).ln()
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn sigmoid_and_logit_invert() {
        for p in [1e-9, 0.02, 0.5, 0.734, 0.999] {
            assert_abs_diff_eq!(sigmoid(logit(p)), p, epsilon = 1e-12);
        }
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn softplus_is_stable() {
        assert_abs_diff_eq!(softplus(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(softplus(100.0), 100.0, epsilon = 1e-12);
        assert!(softplus(-100.0) > 0.0);
        for y in [0.5, 1.0, 4.0, 40.0] {
            assert_abs_diff_eq!(softplus(softplus_inv(y)), y, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_is_clamped() {
        assert_abs_diff_eq!(neg_log(0.0), -(1e-12f64).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(neg_log(0.5), 2f64.ln(), epsilon = 1e-15);
    }
}
