//! Small special functions shared across modules.

/// `sin(y) / y` with the removable singularity filled in.
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

/// `sin(q * s) / q`, finite as `q -> 0` (limit `s`).
pub fn sin_over(q: f64, s: f64) -> f64 {
    let y = q * s;
    s * sinc(y)
}

/// Half-maximum abscissa of `sinc`: the root of `sin(y)/y = 1/2` in `(0, pi)`.
pub fn sinc_half_max_root() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sinc(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_continuous_at_series_switch() {
        let y = 1e-4 * (1.0 - 1e-9);
        assert!((sinc(y) - y.sin() / y).abs() < 1e-15);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn half_max_root_value() {
        let y = sinc_half_max_root();
        assert!((y - 1.895_494_267).abs() < 1e-8, "{y}");
        assert!((sinc(y) - 0.5).abs() < 1e-14);
    }
}
