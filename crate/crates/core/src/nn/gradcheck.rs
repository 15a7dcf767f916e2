//! Central finite-difference gradient checking in double precision.

/// `|a − n| / max(|a|, |n|, 1e-12)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

pub fn central_difference(mut f: impl FnMut(&[f64]) -> f64, point: &[f64], eps: f64) -> Vec<f64> {
    let mut x = point.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = x[k];
            x[k] = orig + eps;
            let up = f(&x);
            x[k] = orig - eps;
            let down = f(&x);
            x[k] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Max relative error between `analytic` (the gradient of `f` at `point`)
/// and central differences of `f`.
pub fn grad_check(f: impl FnMut(&[f64]) -> f64, analytic: &[f64], point: &[f64], eps: f64) -> f64 {
    assert_eq!(analytic.len(), point.len(), "gradient and point lengths differ");
    let numeric = central_difference(f, point, eps);
    analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic() {
        let x = [1.0, 2.0];
        let err = grad_check(|p| p.iter().map(|v| v * v).sum(), &[2.0, 4.0], &x, 1e-5);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let err = grad_check(|p| p[0] * p[0], &[3.0], &[1.0], 1e-5);
        assert!(err > 0.3);
    }
}
