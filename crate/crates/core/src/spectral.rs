//! Sparse spectral initialization.
//!
//! The support estimate keeps the `s` coordinates with the largest
//! `1/m · Σ y_i a_ij²`. On that support the initial point is the leading
//! eigenvector of `1/m · Σ y_i a_i[Ŝ] a_i[Ŝ]ᵀ`, rescaled so that
//! `‖x0‖² = 1/m · Σ y_i`.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::measurement::ProblemInstance;
use crate::scalar::{axpy, dot, norm2, Scalar};
use crate::seed::{rng_from_seed, START_SEED};
use crate::sparse::{hard_threshold_support, SupportSet};

/// Default relative eigen-residual for the power iteration.
pub const DEFAULT_POWER_TOL: f64 = 1e-8;
/// Default iteration cap for the power iteration.
pub const DEFAULT_POWER_MAX_ITERS: usize = 1000;

/// Result of [`spectral_init`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitReport<T> {
    pub x0: Vec<T>,
    pub est_support: SupportSet,
    pub power_iters: usize,
    pub eig_residual: T,
}

/// Per-coordinate scores `1/m · Σ_i y_i a_ij²`.
pub fn support_scores<T: Scalar>(inst: &ProblemInstance<T>) -> Vec<T> {
    let a = inst.matrix();
    let mut scores = vec![T::zero(); inst.n()];
    for (i, &y) in inst.intensities().iter().enumerate() {
        if y.is_zero() {
            continue;
        }
        for (sc, &v) in scores.iter_mut().zip(a.row(i)) {
            *sc = *sc + y * v * v;
        }
    }
    let inv_m = T::one() / T::from_usize(inst.m()).unwrap();
    scores.iter_mut().for_each(|v| *v = *v * inv_m);
    scores
}

/// Indices of the `s` largest scores, ties toward the smallest index.
pub fn score_support<T: Scalar>(inst: &ProblemInstance<T>, s: usize) -> Result<SupportSet> {
    hard_threshold_support(&support_scores(inst), s)
}

/// `1/m · Σ_i y_i a_i[S] a_i[S]ᵀ`
pub fn restricted_covariance<T: Scalar>(
    inst: &ProblemInstance<T>,
    support: &SupportSet,
) -> Result<DenseMatrix<T>> {
    support.check_within(inst.n())?;
    let a = inst.matrix();
    let idx = support.indices();
    let p = idx.len();
    let mut acc = vec![T::zero(); p * p];
    let mut buf = vec![T::zero(); p];
    for (i, &y) in inst.intensities().iter().enumerate() {
        let row = a.row(i);
        for (b, &j) in buf.iter_mut().zip(idx) {
            *b = row[j];
        }
        for r in 0..p {
            axpy(y * buf[r], &buf[r..], &mut acc[r * p + r..(r + 1) * p]);
        }
    }
    let inv_m = T::one() / T::from_usize(inst.m()).unwrap();
    Ok(DenseMatrix::from_fn(p, p, |r, c| {
        let v = if c < r {
            acc[c * p + r]
        } else {
            acc[r * p + c]
        };
        v * inv_m
    }))
}

fn check_symmetric<T: Scalar>(m: &DenseMatrix<T>) -> Result<()> {
    if m.rows() == 0 {
        return Err(Error::InvalidArgument("matrix must be at least 1x1".into()));
    }
    let asym = m.max_asymmetry().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        ))
    })?;
    let scale = m
        .as_slice()
        .iter()
        .fold(T::one(), |acc, v| acc.max(v.abs()));
    if !m.is_finite() || asym > T::lit(1e-10) * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym.as_f64(),
        });
    }
    Ok(())
}

/// Plain power iteration on `m + shift·I`. Returns `(v, λ, residual, iters)`
/// with `λ` the Rayleigh quotient of the unshifted matrix.
fn power_iterate<T: Scalar>(
    m: &DenseMatrix<T>,
    shift: T,
    mut v: Vec<T>,
    threshold: T,
    max_iters: usize,
) -> Result<(Vec<T>, T, T, usize)> {
    let mut residual = T::infinity();
    for it in 0..=max_iters {
        let mv = m.mul_vec(&v)?;
        let lambda = dot(&v, &mv);
        residual = mv
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - lambda * b) * (a - lambda * b))
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if residual <= threshold {
            return Ok((v, lambda, residual, it));
        }
        if it == max_iters {
            break;
        }
        let mut w = mv;
        axpy(shift, &v, &mut w);
        let nw = norm2(&w);
        if nw.is_zero() || !nw.is_finite() {
            break;
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual: residual.as_f64(),
    })
}

fn seeded_start<T: Scalar>(p: usize) -> Vec<T> {
    let mut rng = rng_from_seed(START_SEED);
    let v: Vec<T> = (0..p)
        .map(|_| T::sample_standard_normal(&mut rng))
        .collect();
    let nv = norm2(&v);
    v.into_iter().map(|x| x / nv).collect()
}

/// Leading (largest algebraic) eigenvector of a symmetric matrix from a fixed
/// seeded start. See [`leading_eigenvector_from`].
pub fn leading_eigenvector<T: Scalar>(
    m: &DenseMatrix<T>,
    tol: T,
    max_iters: usize,
) -> Result<(Vec<T>, T)> {
    check_symmetric(m)?;
    let start = seeded_start(m.rows());
    leading_eigenvector_from(m, &start, tol, max_iters).map(|(v, r, _)| (v, r))
}

/// Power iteration from `start` until `‖Mv − (vᵀMv)v‖ ≤ tol·‖M‖_F`.
///
/// When the dominant eigenvalue in magnitude is negative the iteration is
/// rerun on `M + |λ|·I` from the seeded start, which makes the largest
/// algebraic eigenvalue dominant.
/// A zero start vector falls back to the seeded one. Returns the unit vector,
/// the achieved residual and the total iteration count.
pub fn leading_eigenvector_from<T: Scalar>(
    m: &DenseMatrix<T>,
    start: &[T],
    tol: T,
    max_iters: usize,
) -> Result<(Vec<T>, T, usize)> {
    check_symmetric(m)?;
    let p = m.rows();
    crate::error::check_len("start vector", p, start.len())?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let ns = norm2(start);
    let v0 = if ns > T::zero() && ns.is_finite() {
        start.iter().map(|&x| x / ns).collect()
    } else {
        seeded_start(p)
    };
    let scale = m.frobenius_norm();
    if scale.is_zero() {
        return Ok((v0, T::zero(), 0));
    }
    let threshold = tol * scale;
    let (v, lambda, res, iters) = power_iterate(m, T::zero(), v0, threshold, max_iters)?;
    if lambda >= T::zero() {
        return Ok((v, res, iters));
    }
    // `v` sits on the negative eigenvector, which the shift maps to zero;
    // restart from the seeded vector instead.
    let (v, _, res, more) = power_iterate(m, lambda.abs(), seeded_start(p), threshold, max_iters)?;
    Ok((v, res, iters + more))
}

/// Sparse spectral initialization with the default power-iteration cap.
pub fn spectral_init<T: Scalar>(
    inst: &ProblemInstance<T>,
    s: usize,
    tol: T,
) -> Result<InitReport<T>> {
    spectral_init_with(inst, s, tol, DEFAULT_POWER_MAX_ITERS)
}

pub fn spectral_init_with<T: Scalar>(
    inst: &ProblemInstance<T>,
    s: usize,
    tol: T,
    max_iters: usize,
) -> Result<InitReport<T>> {
    let m = T::from_usize(inst.m()).unwrap();
    let power = inst.intensities().iter().fold(T::zero(), |a, &b| a + b) / m;
    if !(power > T::zero()) {
        return Err(Error::Degenerate(
            "measurements have nonpositive total intensity",
        ));
    }
    let scores = support_scores(inst);
    let est_support = hard_threshold_support(&scores, s)?;
    let cov = restricted_covariance(inst, &est_support)?;
    let start: Vec<T> = est_support.iter().map(|j| scores[j]).collect();
    let (v, residual, iters) = leading_eigenvector_from(&cov, &start, tol, max_iters)?;
    let scale = power.sqrt();
    let mut x0 = vec![T::zero(); inst.n()];
    for (&j, &vj) in est_support.indices().iter().zip(&v) {
        x0[j] = vj * scale;
    }
    Ok(InitReport {
        x0,
        est_support,
        power_iters: iters,
        eig_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{generate_instance, SensingMatrix};
    use crate::seed::TrialSeeds;

    #[test]
    fn diagonal_matrix_gives_first_axis() {
        let m = DenseMatrix::from_row_major(2, 2, vec![3.0f64, 0.0, 0.0, 1.0]).unwrap();
        let (v, res) = leading_eigenvector(&m, 1e-12, 1000).unwrap();
        assert!((v[0].abs() - 1.0).abs() < 1e-10);
        assert!(v[1].abs() < 1e-10);
        assert!(res <= 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn one_by_one() {
        let m = DenseMatrix::from_row_major(1, 1, vec![-4.0f64]).unwrap();
        let (v, res) = leading_eigenvector(&m, 1e-8, 10).unwrap();
        assert_eq!(v[0].abs(), 1.0);
        assert_eq!(res, 0.0);
    }

    #[test]
    fn negative_dominant_eigenvalue_still_finds_largest() {
        // eigenvalues -5 and 2: largest algebraic is 2 with vector e_2
        let m = DenseMatrix::from_row_major(2, 2, vec![-5.0f64, 0.0, 0.0, 2.0]).unwrap();
        let (v, _) = leading_eigenvector(&m, 1e-12, 10_000).unwrap();
        assert!((v[1].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonsymmetric_and_reports_nonconvergence() {
        let m = DenseMatrix::from_row_major(2, 2, vec![1.0f64, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            leading_eigenvector(&m, 1e-8, 100),
            Err(Error::NotSymmetric { .. })
        ));
        let close = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 0.999999]).unwrap();
        match leading_eigenvector(&close, 1e-14, 3) {
            Err(Error::Convergence { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn all_zero_measurements_are_degenerate() {
        let a = SensingMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let inst = ProblemInstance::from_intensities(a, vec![0.0, 0.0], 0.0, None).unwrap();
        assert!(matches!(
            spectral_init(&inst, 1, 1e-8),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn full_sparsity_selects_everything() {
        let inst = generate_instance::<f64>(20, 6, 3, 0.0, &TrialSeeds::derive(3, 0)).unwrap();
        assert_eq!(score_support(&inst, 6).unwrap(), SupportSet::full(6));
    }

    #[test]
    fn init_norm_and_sparsity() {
        let inst = generate_instance::<f64>(200, 50, 5, 0.0, &TrialSeeds::derive(2, 4)).unwrap();
        let rep = spectral_init(&inst, 5, 1e-8).unwrap();
        let power: f64 = inst.intensities().iter().sum::<f64>() / 200.0;
        let norm2: f64 = rep.x0.iter().map(|v| v * v).sum();
        assert!((norm2 - power).abs() <= 1e-10 * power);
        assert!(rep.x0.iter().filter(|v| **v != 0.0).count() <= 5);
    }
}
