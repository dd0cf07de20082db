//! Thin wrappers over `libm` plus extended-real helpers.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `exponent * ln(mass)` with the conventions `0^0 = 1`, `0^a = 0` for
/// `a > 0` and `0^a = +inf` for `a < 0`.
#[inline]
pub fn log_power(mass: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else if mass == 0.0 {
        if exponent > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        exponent * ln(mass)
    }
}

/// Accumulates `Σ exponent · ln(mass)` for one outcome. A vanishing factor
/// with positive exponent annihilates the term even when another factor
/// diverges.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogProduct {
    sum: f64,
    zero: bool,
    infinite: bool,
}

impl LogProduct {
    #[inline]
    pub fn push(&mut self, mass: f64, exponent: f64) {
        let t = log_power(mass, exponent);
        if t == f64::NEG_INFINITY {
            self.zero = true;
        } else if t == f64::INFINITY {
            self.infinite = true;
        } else {
            self.sum += t;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else if self.infinite {
            f64::INFINITY
        } else {
            self.sum
        }
    }
}

/// `ln Σ exp(terms)` over extended reals.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &t in terms {
        if t > max {
            max = t;
        }
    }
    if max.is_infinite() {
        return max;
    }
    let mut acc = 0.0;
    for &t in terms {
        acc += exp(t - max);
    }
    max + ln(acc)
}

/// Product of an extended real with a finite nonzero coefficient, keeping
/// `±inf` stable.
#[inline]
pub fn scale(value: f64, coefficient: f64) -> f64 {
    if value.is_infinite() {
        if (value > 0.0) == (coefficient > 0.0) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        value * coefficient
    }
}
