//! Recovery metrics and convergence-rate diagnostics.

use crate::error::{check_len, Error, Result};
use crate::measurement::GroundTruth;
use crate::scalar::{norm2, Scalar};
use crate::sparse::signed_distance;

/// A recovery counts as successful when its relative error is strictly below this.
pub const SUCCESS_THRESHOLD: f64 = 1e-3;

/// Upper end of the error window used for the linear-rate fit.
pub const LINEAR_FIT_CEILING: f64 = 1e-1;

/// Errors at or below this qualify a pair for the quadratic-tail estimate.
pub const QUADRATIC_TAIL_CEILING: f64 = 1e-2;

/// `dist(x, x♮) / ‖x♮‖`.
pub fn relative_error<T: Scalar>(x: &[T], truth: &GroundTruth<T>) -> Result<T> {
    relative_error_to(x, truth.signal())
}

/// Relative error against a plain reference vector; a zero reference is rejected.
pub fn relative_error_to<T: Scalar>(x: &[T], reference: &[T]) -> Result<T> {
    let norm = norm2(reference);
    if norm.is_zero() {
        return Err(Error::InvalidArgument(
            "relative error undefined for a zero reference".into(),
        ));
    }
    Ok(signed_distance(x, reference)? / norm)
}

pub fn is_success<T: Scalar>(re: T) -> bool {
    re < T::lit(SUCCESS_THRESHOLD)
}

/// `10·log10(V² / MSE)` with `V = max(truth) − min(truth)`; `+∞` when the
/// estimate is exact.
pub fn psnr<T: Scalar>(estimate: &[T], truth: &[T]) -> Result<T> {
    check_len("psnr estimate", truth.len(), estimate.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidArgument("psnr of empty vectors".into()));
    }
    let (lo, hi) = truth
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let sse = estimate
        .iter()
        .zip(truth)
        .map(|(&a, &b)| (a - b) * (a - b))
        .fold(T::zero(), |a, b| a + b);
    let mse = sse / T::from_usize(truth.len()).unwrap();
    if mse.is_zero() {
        return Ok(T::infinity());
    }
    let range = hi - lo;
    Ok(T::lit(10.0) * (range * range / mse).log10())
}

/// Shape of an error trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateDiagnostics<T> {
    /// Slope of `ln e_k` against `k`; `ln` of the per-iteration contraction.
    pub linear_fit_slope: Option<T>,
    pub linear_fit_r2: Option<T>,
    /// `max e_{k+1} / e_k²` over tail pairs.
    pub quadratic_tail_constant: Option<T>,
    pub tail_start_iter: Option<usize>,
}

impl<T> Default for RateDiagnostics<T> {
    fn default() -> Self {
        Self {
            linear_fit_slope: None,
            linear_fit_r2: None,
            quadratic_tail_constant: None,
            tail_start_iter: None,
        }
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, R²)`.
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Option<(T, T)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = T::from_usize(n).unwrap();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if sxx.is_zero() {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy.is_zero() {
        T::one()
    } else {
        (sxy * sxy / (sxx * syy)).min(T::one()).max(T::zero())
    };
    Some((slope, r2))
}

/// Diagnoses linear and quadratic convergence from an error trace.
///
/// The linear fit regresses `ln e_k` on `k` over entries with
/// `floor < e_k ≤ 0.1` and needs at least three of them. The quadratic tail
/// looks at consecutive pairs with `e_k ≤ 1e-2`, both errors above `floor`
/// and, when `support_correct` is given, the correct support at both ends.
pub fn rate_diagnostics<T: Scalar>(
    errors: &[T],
    support_correct: Option<&[bool]>,
    floor: T,
) -> RateDiagnostics<T> {
    let mut diag = RateDiagnostics::default();
    let (ks, logs): (Vec<T>, Vec<T>) = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > floor && e <= T::lit(LINEAR_FIT_CEILING))
        .map(|(k, &e)| (T::from_usize(k).unwrap(), e.ln()))
        .unzip();
    if ks.len() >= 3 {
        if let Some((slope, r2)) = linear_fit(&ks, &logs) {
            diag.linear_fit_slope = Some(slope);
            diag.linear_fit_r2 = Some(r2);
        }
    }
    let matched = |k: usize| support_correct.is_none_or(|s| s.get(k).copied().unwrap_or(false));
    for k in 0..errors.len().saturating_sub(1) {
        let (e0, e1) = (errors[k], errors[k + 1]);
        if e0 <= T::lit(QUADRATIC_TAIL_CEILING)
            && e0 > floor
            && e1 > floor
            && matched(k)
            && matched(k + 1)
        {
            let ratio = e1 / (e0 * e0);
            diag.quadratic_tail_constant = Some(match diag.quadratic_tail_constant {
                Some(c) => c.max(ratio),
                None => ratio,
            });
            diag.tail_start_iter.get_or_insert(k);
        }
    }
    diag
}
