//! Signed log-domain scalars.
//!
//! [`LogScalar`] stores a real number as `(sign, ln|x|)` so that products,
//! quotients and sums of quantities as large as `exp(N·M·‖A‖·‖B‖)` never
//! overflow. Addition and subtraction use the usual log-sum-exp /
//! log-diff-exp identities; all operations preserve the invariant
//! `sign == 0  ⇔  log_abs == -∞`.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real number represented as a sign and the natural log of its magnitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogScalar {
    sign: i8,
    log_abs: f64,
}

/// `ln(e^a + e^b)` with care for infinities.
fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^hi - e^lo)` for `hi > lo`; `-∞` when they coincide.
fn logsubexp(hi: f64, lo: f64) -> f64 {
    debug_assert!(hi >= lo);
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    // -expm1(lo - hi) = 1 - e^{lo-hi} ∈ (0, 1], no cancellation in the log.
    hi + (-(lo - hi).exp_m1()).ln()
}

impl LogScalar {
    /// The additive identity.
    pub const fn zero() -> Self {
        LogScalar {
            sign: 0,
            log_abs: f64::NEG_INFINITY,
        }
    }

    /// The multiplicative identity.
    pub const fn one() -> Self {
        LogScalar {
            sign: 1,
            log_abs: 0.0,
        }
    }

    /// Build from a sign and a log-magnitude, normalizing zeros.
    ///
    /// # Panics
    /// Panics if `log_abs` is NaN or `sign` is outside `{-1, 0, 1}`.
    pub fn new(sign: i8, log_abs: f64) -> Self {
        assert!(!log_abs.is_nan(), "log magnitude must not be NaN");
        assert!((-1..=1).contains(&sign), "sign must be -1, 0 or 1");
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            LogScalar::zero()
        } else {
            LogScalar { sign, log_abs }
        }
    }

    /// The positive number `e^log_abs`.
    pub fn from_log(log_abs: f64) -> Self {
        Self::new(1, log_abs)
    }

    /// Exact conversion from a finite float.
    ///
    /// # Panics
    /// Panics on NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(!x.is_nan(), "cannot represent NaN as a LogScalar");
        if x == 0.0 {
            LogScalar::zero()
        } else {
            LogScalar {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    /// Convert back to a float; saturates to `±∞` when the magnitude
    /// overflows the double range.
    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }

    /// Sign in `{-1, 0, 1}`.
    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude (`-∞` for zero).
    pub fn log_abs(self) -> f64 {
        self.log_abs
    }

    /// True iff the value is exactly zero.
    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// `|x|` as a `LogScalar`.
    pub fn abs(self) -> Self {
        LogScalar {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    /// Panics on zero.
    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "division by zero LogScalar");
        LogScalar {
            sign: self.sign,
            log_abs: -self.log_abs,
        }
    }

    /// Integer power (0^0 = 1 by convention).
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return LogScalar::one();
        }
        if self.is_zero() {
            assert!(n > 0, "zero to a negative power");
            return LogScalar::zero();
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        LogScalar {
            sign,
            log_abs: self.log_abs * f64::from(n),
        }
    }

    /// Multiply by `e^c` (exact shift in the log domain).
    pub fn mul_exp(self, c: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogScalar::new(self.sign, self.log_abs + c)
    }

    /// Relative deviation `|self - other| / max(|self|, |other|)`;
    /// zero when both are zero.
    pub fn rel_diff(self, other: Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let diff = (self - other).abs();
        let scale = if self.abs() >= other.abs() {
            self.abs()
        } else {
            other.abs()
        };
        (diff.log_abs - scale.log_abs).exp()
    }
}

impl Default for LogScalar {
    fn default() -> Self {
        LogScalar::zero()
    }
}

impl PartialEq for LogScalar {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.log_abs == other.log_abs)
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            o => return Some(o),
        }
        Some(match self.sign {
            1 => self
                .log_abs
                .partial_cmp(&other.log_abs)
                .unwrap_or(Ordering::Equal),
            -1 => other
                .log_abs
                .partial_cmp(&self.log_abs)
                .unwrap_or(Ordering::Equal),
            _ => Ordering::Equal,
        })
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> LogScalar {
        LogScalar {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: LogScalar) -> LogScalar {
        if self.is_zero() || rhs.is_zero() {
            return LogScalar::zero();
        }
        LogScalar {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs + rhs.log_abs,
        }
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    // Log-domain division is multiplication by the reciprocal.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogScalar) -> LogScalar {
        self * rhs.recip()
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: LogScalar) -> LogScalar {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.sign == rhs.sign {
            return LogScalar {
                sign: self.sign,
                log_abs: logaddexp(self.log_abs, rhs.log_abs),
            };
        }
        // Opposite signs: the larger magnitude wins.
        match self
            .log_abs
            .partial_cmp(&rhs.log_abs)
            .unwrap_or(Ordering::Equal)
        {
            Ordering::Equal => LogScalar::zero(),
            Ordering::Greater => LogScalar {
                sign: self.sign,
                log_abs: logsubexp(self.log_abs, rhs.log_abs),
            },
            Ordering::Less => LogScalar {
                sign: rhs.sign,
                log_abs: logsubexp(rhs.log_abs, self.log_abs),
            },
        }
    }
}

impl Sub for LogScalar {
    type Output = LogScalar;
    fn sub(self, rhs: LogScalar) -> LogScalar {
        self + (-rhs)
    }
}

impl std::iter::Product for LogScalar {
    fn product<I: Iterator<Item = LogScalar>>(iter: I) -> LogScalar {
        iter.fold(LogScalar::one(), |acc, x| acc * x)
    }
}

impl std::iter::Sum for LogScalar {
    fn sum<I: Iterator<Item = LogScalar>>(iter: I) -> LogScalar {
        iter.fold(LogScalar::zero(), |acc, x| acc + x)
    }
}

impl std::fmt::Display for LogScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_abs),
            _ => write!(f, "-exp({})", self.log_abs),
        }
    }
}
