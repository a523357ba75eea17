//! Scalar helpers used by every algorithm: nearest-integer rounding (ties go
//! toward +infinity), clamped rounding onto `[u_min, u_max]` and the two-valued
//! sign with `sign(0) = -1`.

use super::DecodeError;

/// Nearest integer to `x`; exact half-integers round up, so
/// `round_nearest(-0.5) == 0` and `round_nearest(2.5) == 3`.
#[inline]
pub fn round_nearest(x: f64) -> i64 {
    // truncate and step down for negative non-integers; avoids a libm floor
    // call on targets without a rounding instruction
    let t = x as i64;
    let f = t - i64::from(x < t as f64);
    // x - floor(x) is exact for |x| < 2^52
    if x - f as f64 >= 0.5 {
        f + 1
    } else {
        f
    }
}

/// Nearest integer in `[u_min, u_max]`, i.e. `round_nearest` clamped.
#[inline]
pub fn round_clamped(x: f64, u_min: i64, u_max: i64) -> Result<i64, DecodeError> {
    if u_min > u_max {
        return Err(DecodeError::EmptyRange { u_min, u_max });
    }
    Ok(round_nearest(x).clamp(u_min, u_max))
}

/// `-1` for `x <= 0`, `+1` otherwise. Works for reals and integers alike.
#[inline]
pub fn sign_step<T: PartialOrd + Default>(x: T) -> i64 {
    if x <= T::default() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_examples() {
        assert_eq!(round_nearest(1.45), 1);
        assert_eq!(round_nearest(-0.5), 0);
        assert_eq!(round_nearest(0.5), 1);
        assert_eq!(round_nearest(-1.5), -1);
        assert_eq!(round_nearest(7.0), 7);
        assert_eq!(round_nearest(-7.0), -7);
        assert_eq!(round_nearest(0.49999999999999994), 0);
    }

    #[test]
    fn clamped_examples() {
        assert_eq!(round_clamped(3.7, -1, 2), Ok(2));
        assert_eq!(round_clamped(0.2, 0, 3), Ok(0));
        assert_eq!(round_clamped(-9.0, 0, 1), Ok(0));
        assert_eq!(
            round_clamped(0.0, 2, 1),
            Err(DecodeError::EmptyRange { u_min: 2, u_max: 1 })
        );
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_step(0.0), -1);
        assert_eq!(sign_step(-0.0), -1);
        assert_eq!(sign_step(3.2), 1);
        assert_eq!(sign_step(-7i64), -1);
        assert_eq!(sign_step(0i64), -1);
        assert_eq!(sign_step(2i64), 1);
    }

    proptest! {
        #[test]
        fn round_is_nearest(x in -1e6f64..1e6) {
            let u = round_nearest(x);
            prop_assert!((u as f64 - x).abs() <= 0.5);
        }

        #[test]
        fn clamped_stays_in_range(x in -50f64..50.0, lo in -5i64..5, width in 0i64..6) {
            let hi = lo + width;
            let u = round_clamped(x, lo, hi).unwrap();
            prop_assert!(lo <= u && u <= hi);
            let r = round_nearest(x);
            if lo <= r && r <= hi {
                prop_assert_eq!(u, r);
            }
        }
    }
}
