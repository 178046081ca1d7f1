//! Dense truncated power series over `f64`.
//!
//! Coefficients are stored in the plain convention: `coeffs[n]` multiplies
//! `t^n` directly (no `1/n!` factor). All binary operations truncate the
//! result to the smaller of the two operand orders.

use thiserror::Error;

/// Constant terms smaller than this are treated as zero by [`TruncSeries::reciprocal`].
pub const RECIPROCAL_MIN_LEADING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    /// Reciprocal of a series whose constant term is (numerically) zero.
    #[error("reciprocal requires a nonzero constant term, got {0:e}")]
    ZeroConstantTerm(f64),
    /// Exponential of a series whose constant term is not zero.
    #[error("exp requires a zero constant term, got {0:e}")]
    NonzeroConstantTerm(f64),
    /// Shift-down past a nonzero low-order coefficient.
    #[error("cannot divide by t^{power}: coefficient of t^{index} is {value:e}")]
    NonzeroLowOrder { power: usize, index: usize, value: f64 },
}

/// A univariate power series truncated at degree `order` (inclusive).
///
/// Invariant: `coeffs.len() == order() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    coeffs: Vec<f64>,
}

impl TruncSeries {
    /// Series from raw coefficients; `coeffs[n]` is the coefficient of `t^n`.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series has at least the constant term");
        TruncSeries { coeffs }
    }

    /// The zero series of the given order.
    pub fn zero(order: usize) -> Self {
        TruncSeries { coeffs: vec![0.0; order + 1] }
    }

    /// The constant series `value` of the given order.
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        TruncSeries { coeffs }
    }

    /// The identity series `t` of the given order.
    pub fn var(order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        TruncSeries { coeffs }
    }

    /// Inclusive truncation degree.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `t^n`, or 0 beyond the truncation order.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Sets the coefficient of `t^n`. Panics past the truncation order.
    pub fn set_coeff(&mut self, n: usize, value: f64) {
        self.coeffs[n] = value;
    }

    /// True when every odd-degree coefficient is exactly zero.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// True when every even-degree coefficient is exactly zero.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|&c| c == 0.0)
    }

    /// Coefficientwise sum, truncated to the smaller order.
    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        TruncSeries { coeffs }
    }

    /// Coefficientwise difference, truncated to the smaller order.
    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeffs[k] - other.coeffs[k]).collect();
        TruncSeries { coeffs }
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut sum = 0.0;
            for j in 0..=k {
                sum += self.coeffs[j] * other.coeffs[k - j];
            }
            *c = sum;
        }
        TruncSeries { coeffs }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }

    /// Multiplicative inverse: `self.mul(&inv)` is 1 up to the truncation order.
    ///
    /// Recurrence: `r[0] = 1/c[0]`, `r[k] = -(1/c[0]) * sum_{j=1..=k} c[j] r[k-j]`.
    pub fn reciprocal(&self) -> Result<TruncSeries, SeriesError> {
        let c0 = self.coeffs[0];
        if c0.abs() < RECIPROCAL_MIN_LEADING {
            return Err(SeriesError::ZeroConstantTerm(c0));
        }
        let inv_c0 = 1.0 / c0;
        let n = self.coeffs.len();
        let mut r = vec![0.0; n];
        r[0] = inv_c0;
        for k in 1..n {
            let mut sum = 0.0;
            for j in 1..=k {
                sum += self.coeffs[j] * r[k - j];
            }
            r[k] = -sum * inv_c0;
        }
        Ok(TruncSeries { coeffs: r })
    }

    /// Exponential of a series with zero constant term.
    ///
    /// Recurrence: `e[0] = 1`, `e[k] = (1/k) * sum_{j=1..=k} j a[j] e[k-j]`.
    pub fn exp_series(&self) -> Result<TruncSeries, SeriesError> {
        let c0 = self.coeffs[0];
        if c0 != 0.0 {
            return Err(SeriesError::NonzeroConstantTerm(c0));
        }
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        for k in 1..n {
            let mut sum = 0.0;
            for j in 1..=k {
                sum += (j as f64) * self.coeffs[j] * e[k - j];
            }
            e[k] = sum / (k as f64);
        }
        Ok(TruncSeries { coeffs: e })
    }

    /// Termwise derivative. The order drops by one.
    pub fn differentiate(&self) -> TruncSeries {
        if self.coeffs.len() == 1 {
            return TruncSeries { coeffs: vec![0.0] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| (n as f64) * c)
            .collect();
        TruncSeries { coeffs }
    }

    /// Multiplies by `t^power`; the order grows by `power`.
    pub fn shift_up(&self, power: usize) -> TruncSeries {
        let mut coeffs = vec![0.0; power];
        coeffs.extend_from_slice(&self.coeffs);
        TruncSeries { coeffs }
    }

    /// Divides by `t^power`. The lowest `power` coefficients must be exactly zero.
    pub fn shift_down(&self, power: usize) -> Result<TruncSeries, SeriesError> {
        assert!(power < self.coeffs.len());
        for (index, &value) in self.coeffs[..power].iter().enumerate() {
            if value != 0.0 {
                return Err(SeriesError::NonzeroLowOrder { power, index, value });
            }
        }
        Ok(TruncSeries { coeffs: self.coeffs[power..].to_vec() })
    }

    /// Polynomial value at `t` via Horner's scheme.
    pub fn eval_horner(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Sum of absolute coefficient values; a cheap conditioning scale.
    pub fn one_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}
