//! Rising factorials and Taylor models.

use crate::error::Error;
use crate::objective::ObjectiveOracle;
use crate::point::{dot, sub};
use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

/// `k^{(m)} = k (k+1) ⋯ (k+m−1)`, exact in 128-bit integers.
///
/// Returns `None` on overflow; `k = 0` gives 0 and `m = 0` gives 1.
pub fn rising_factorial_exact(k: u64, m: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..m as u64 {
        acc = acc.checked_mul(u128::from(k) + u128::from(i))?;
    }
    Some(acc)
}

/// `k^{(m)}` as a float.
///
/// Exact whenever the product is below `2^53`; otherwise correctly rounded
/// from the 128-bit product, or accumulated in floating point (relative
/// error at most `m` ulps) if even that overflows.
pub fn rising_factorial(k: u64, m: u32) -> f64 {
    match rising_factorial_exact(k, m) {
        Some(v) => v as f64,
        None => (0..m).map(|i| k as f64 + f64::from(i)).product(),
    }
}

/// `Σ_{i=0}^{order} (1/i!) ∇^i f(x)[y − x]^i` for `order <= 3`.
pub fn taylor_model(
    f: &dyn ObjectiveOracle,
    x: &[f64],
    order: u32,
    y: &[f64],
) -> Result<f64, Error> {
    crate::error::check_dims(x.len(), y.len())?;
    if order > 3 || order > f.derivative_order() {
        return Err(Error::Capability(format!(
            "taylor model of order {order} needs derivatives f provides only to order {}",
            f.derivative_order()
        )));
    }
    let u = sub(y, x);
    let mut val = f.value(x);
    if order >= 1 {
        val += dot(&f.gradient(x), &u);
    }
    if order >= 2 {
        let hu = f
            .hessian_apply(x, &u)
            .ok_or_else(|| Error::Capability("hessian unavailable".into()))?;
        val += 0.5 * dot(&hu, &u);
    }
    if order >= 3 {
        let tu = f
            .third_apply(x, &u)
            .ok_or_else(|| Error::Capability("third derivative unavailable".into()))?;
        val += dot(&tu, &u) / 6.0;
    }
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DiagonalQuadratic, PowerNorm};

    #[test]
    fn small_values() {
        assert_eq!(rising_factorial(3, 2), 12.0);
        assert_eq!(rising_factorial(7, 1), 7.0);
        assert_eq!(rising_factorial(2, 3), 24.0);
        assert_eq!(rising_factorial(0, 3), 0.0);
        assert_eq!(rising_factorial_exact(u64::MAX, 3), None);
        assert!(rising_factorial(u64::MAX, 3).is_finite());
    }

    #[test]
    fn taylor_examples() {
        let q = DiagonalQuadratic::new(alloc::vec![1.0]).unwrap();
        assert_eq!(taylor_model(&q, &[0.0], 1, &[1.0]).unwrap(), 0.0);
        let q2 = DiagonalQuadratic::new(alloc::vec![2.0, 5.0]).unwrap();
        let (x, y) = ([0.3, -1.0], [2.0, 0.5]);
        assert!((taylor_model(&q2, &x, 2, &y).unwrap() - q2.value(&y)).abs() < 1e-14);
        // x⁴ = 4 · (¼x⁴); expansion at 1 evaluated at 1.5: 1 + 2 + 1.5.
        let f = PowerNorm::new(4.0, 1).unwrap();
        let m = 4.0 * taylor_model(&f, &[1.0], 2, &[1.5]).unwrap();
        assert!((m - 4.5).abs() < 1e-14);
        assert!(taylor_model(&PowerNorm::new(3.0, 1).unwrap(), &[1.0], 3, &[2.0]).is_err());
    }
}
