//! Intensity and amplitude least-squares losses with their derivatives.
//!
//! ```text
//! f_I(x) = 1/(4m) Σ ((a_i·x)² − y_i)²
//! f_A(x) = 1/(2m) Σ (|a_i·x| − z_i)²
//! ```
//!
//! Every public function computes `Ax` once. The solver keeps `Ax` for the
//! current iterate and calls the `*_from_product` variants directly.

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::measurement::ProblemInstance;
use crate::scalar::{axpy, Scalar};
use crate::sparse::{support_of, SupportSet};

/// Block `[∇² f_I(x)]_{S,T}` of the intensity-loss Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedHessian<T> {
    pub row_support: SupportSet,
    pub col_support: SupportSet,
    pub block: DenseMatrix<T>,
}

/// `Ax`, skipping the zero coordinates of a sparse `x`.
pub(crate) fn forward<T: Scalar>(inst: &ProblemInstance<T>, x: &[T]) -> Result<Vec<T>> {
    inst.check_signal(x)?;
    let support = support_of(x);
    if support.len() * 4 < x.len() {
        inst.matrix().apply_on(x, &support)
    } else {
        inst.matrix().apply(x)
    }
}

#[inline]
fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

pub fn intensity_loss<T: Scalar>(inst: &ProblemInstance<T>, x: &[T]) -> Result<T> {
    let ax = forward(inst, x)?;
    let m = T::from_usize(inst.m()).unwrap();
    let sum = ax
        .iter()
        .zip(inst.intensities())
        .map(|(&v, &y)| {
            let r = v * v - y;
            r * r
        })
        .fold(T::zero(), |a, b| a + b);
    Ok(sum / (T::lit(4.0) * m))
}

pub fn amplitude_loss<T: Scalar>(inst: &ProblemInstance<T>, x: &[T]) -> Result<T> {
    let ax = forward(inst, x)?;
    let m = T::from_usize(inst.m()).unwrap();
    let sum = ax
        .iter()
        .zip(inst.amplitudes())
        .map(|(&v, &z)| {
            let r = v.abs() - z;
            r * r
        })
        .fold(T::zero(), |a, b| a + b);
    Ok(sum / (T::lit(2.0) * m))
}

/// Generalized gradient `1/m · Aᵀ(Ax − z ⊙ sgn(Ax))` with `sgn(0) = 0`.
pub fn amplitude_gradient<T: Scalar>(inst: &ProblemInstance<T>, x: &[T]) -> Result<Vec<T>> {
    let ax = forward(inst, x)?;
    amplitude_gradient_from_product(inst, &ax)
}

pub(crate) fn amplitude_gradient_from_product<T: Scalar>(
    inst: &ProblemInstance<T>,
    ax: &[T],
) -> Result<Vec<T>> {
    let inv_m = T::one() / T::from_usize(inst.m()).unwrap();
    let residual: Vec<T> = ax
        .iter()
        .zip(inst.amplitudes())
        .map(|(&v, &z)| (v - z * sign(v)) * inv_m)
        .collect();
    inst.matrix().apply_transpose(&residual)
}

/// `[∇ f_I(x)]_S`, entries `1/m · Σ ((a_i·x)² − y_i)(a_i·x) a_i[j]` for `j ∈ S`.
pub fn intensity_gradient_restricted<T: Scalar>(
    inst: &ProblemInstance<T>,
    x: &[T],
    support: &SupportSet,
) -> Result<Vec<T>> {
    support.check_within(inst.n())?;
    let ax = forward(inst, x)?;
    Ok(intensity_gradient_from_product(inst, &ax, support))
}

pub(crate) fn intensity_gradient_from_product<T: Scalar>(
    inst: &ProblemInstance<T>,
    ax: &[T],
    support: &SupportSet,
) -> Vec<T> {
    let a = inst.matrix();
    let idx = support.indices();
    let mut g = vec![T::zero(); idx.len()];
    for (i, (&v, &y)) in ax.iter().zip(inst.intensities()).enumerate() {
        let w = (v * v - y) * v;
        if w.is_zero() {
            continue;
        }
        let row = a.row(i);
        for (gp, &j) in g.iter_mut().zip(idx) {
            *gp = *gp + w * row[j];
        }
    }
    let inv_m = T::one() / T::from_usize(inst.m()).unwrap();
    g.iter_mut().for_each(|v| *v = *v * inv_m);
    g
}

/// `[∇² f_I(x)]_{S,T}`, entries `1/m · Σ (3(a_i·x)² − y_i) a_i[S_p] a_i[T_q]`.
pub fn intensity_hessian_block<T: Scalar>(
    inst: &ProblemInstance<T>,
    x: &[T],
    rows: &SupportSet,
    cols: &SupportSet,
) -> Result<RestrictedHessian<T>> {
    rows.check_within(inst.n())?;
    cols.check_within(inst.n())?;
    let ax = forward(inst, x)?;
    Ok(hessian_block_from_product(inst, &ax, rows, cols))
}

pub(crate) fn hessian_block_from_product<T: Scalar>(
    inst: &ProblemInstance<T>,
    ax: &[T],
    rows: &SupportSet,
    cols: &SupportSet,
) -> RestrictedHessian<T> {
    let a = inst.matrix();
    let (ri, ci) = (rows.indices(), cols.indices());
    let (p, q) = (ri.len(), ci.len());
    let symmetric = rows == cols;
    let mut block = DenseMatrix::zeros(p, q);
    let mut row_buf = vec![T::zero(); p];
    let mut col_buf = vec![T::zero(); q];
    let mut acc = vec![T::zero(); p * q];
    for (i, (&v, &y)) in ax.iter().zip(inst.intensities()).enumerate() {
        let w = T::lit(3.0) * v * v - y;
        let row = a.row(i);
        for (b, &j) in row_buf.iter_mut().zip(ri) {
            *b = row[j];
        }
        for (b, &j) in col_buf.iter_mut().zip(ci) {
            *b = row[j];
        }
        for r in 0..p {
            let coef = w * row_buf[r];
            if symmetric {
                // upper triangle only, mirrored below
                axpy(coef, &col_buf[r..], &mut acc[r * q + r..(r + 1) * q]);
            } else {
                axpy(coef, &col_buf, &mut acc[r * q..(r + 1) * q]);
            }
        }
    }
    let inv_m = T::one() / T::from_usize(inst.m()).unwrap();
    for r in 0..p {
        for c in 0..q {
            let v = if symmetric && c < r {
                acc[c * q + r]
            } else {
                acc[r * q + c]
            };
            block[(r, c)] = v * inv_m;
        }
    }
    RestrictedHessian {
        row_support: rows.clone(),
        col_support: cols.clone(),
        block,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{generate_instance, SensingMatrix};
    use crate::seed::TrialSeeds;

    fn small() -> ProblemInstance<f64> {
        generate_instance(8, 4, 2, 0.0, &TrialSeeds::derive(5, 0)).unwrap()
    }

    #[test]
    fn losses_vanish_at_truth_and_its_negation() {
        let inst = small();
        let t = inst.truth().unwrap().signal().to_vec();
        let neg: Vec<f64> = t.iter().map(|v| -v).collect();
        assert_eq!(intensity_loss(&inst, &t).unwrap(), 0.0);
        assert_eq!(intensity_loss(&inst, &neg).unwrap(), 0.0);
        assert!(amplitude_loss(&inst, &t).unwrap() < 1e-28);
    }

    #[test]
    fn amplitude_loss_at_origin() {
        let inst = small();
        let expect: f64 = inst.amplitudes().iter().map(|z| z * z).sum::<f64>() / 16.0;
        let got = amplitude_loss(&inst, &[0.0; 4]).unwrap();
        assert!((got - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn amplitude_gradient_zero_at_truth_and_origin() {
        let inst = small();
        let t = inst.truth().unwrap().signal().to_vec();
        let g = amplitude_gradient(&inst, &t).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14));
        assert!(amplitude_gradient(&inst, &[0.0; 4])
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn restricted_gradient_edge_cases() {
        let inst = small();
        let t = inst.truth().unwrap().signal().to_vec();
        let g = intensity_gradient_restricted(&inst, &t, &SupportSet::full(4)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14));
        let x = [0.3, -0.1, 0.2, 0.5];
        assert!(
            intensity_gradient_restricted(&inst, &x, &SupportSet::empty())
                .unwrap()
                .is_empty()
        );
        let bad = SupportSet::from_indices(vec![7], 8).unwrap();
        assert!(intensity_gradient_restricted(&inst, &x, &bad).is_err());
    }

    #[test]
    fn hessian_at_origin_closed_form() {
        let inst = small();
        let s = SupportSet::from_indices(vec![0, 2], 4).unwrap();
        let t = SupportSet::from_indices(vec![1, 2, 3], 4).unwrap();
        let h = intensity_hessian_block(&inst, &[0.0; 4], &s, &t).unwrap();
        let a = inst.matrix();
        for (p, &j) in s.indices().iter().enumerate() {
            for (q, &k) in t.indices().iter().enumerate() {
                let expect: f64 = -(0..8)
                    .map(|i| inst.intensities()[i] * a.get(i, j) * a.get(i, k))
                    .sum::<f64>()
                    / 8.0;
                assert!((h.block[(p, q)] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn symmetric_block_is_exactly_symmetric() {
        let inst = small();
        let x = [0.4, -1.2, 0.7, 0.1];
        let full = SupportSet::full(4);
        let h = intensity_hessian_block(&inst, &x, &full, &full).unwrap();
        assert_eq!(h.block.max_asymmetry(), Some(0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SensingMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let inst = ProblemInstance::from_intensities(a, vec![1.0], 0.0, None).unwrap();
        assert!(intensity_loss(&inst, &[1.0]).is_err());
        assert!(amplitude_gradient(&inst, &[1.0, 2.0, 3.0]).is_err());
    }
}
