use crate::Real;

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `ln σ(z)`; stays finite (≈ z) for large negative `z`.
#[inline]
pub fn log_sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// `ln(1 - σ(z)) = ln σ(-z)`.
#[inline]
pub fn log_one_minus_sigmoid<F: Real>(z: F) -> F {
    log_sigmoid(-z)
}

/// `ln(p / (1 - p))`.
#[inline]
pub fn logit<F: Real>(p: F) -> F {
    -(F::one() / p - F::one()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!((sigmoid(1.0f64) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!((sigmoid(1.0f32) - 0.731_058_6).abs() < 1e-7);
        assert!((log_sigmoid(-40.0f64) + 40.0).abs() < 1e-15);
        assert!(log_sigmoid(-500.0f64).is_finite());
        assert!((log_sigmoid(-500.0f64) + 500.0).abs() < 1e-12);
        assert!(log_sigmoid(500.0f64).abs() < 1e-200);
        assert!((log_one_minus_sigmoid(500.0f64) + 500.0).abs() < 1e-12);
        assert_eq!(sigmoid(-500.0f64) + sigmoid(500.0f64), 1.0);
    }

    #[test]
    fn logit_inverts_sigmoid() {
        for z in [-6.0f64, -1.0, 0.0, 0.3, 4.0] {
            assert!((logit(sigmoid(z)) - z).abs() < 1e-12);
        }
    }
}
