//! Hard thresholding, supports, and the sign-invariant distance.

use std::cmp::Ordering;

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Strictly increasing set of coordinate indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{0, 1, ..., n-1}`
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    /// Builds a support from arbitrary indices, sorting and rejecting
    /// duplicates or entries outside `[0, dim)`.
    pub fn from_indices(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: dim,
            });
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "support indices must be distinct".into(),
            ));
        }
        Ok(Self { indices })
    }

    /// Sorted-input constructor for callers that already hold unique indices.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
        }
    }

    /// Largest index plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.indices.last().map_or(0, |&i| i + 1)
    }

    pub(crate) fn check_within(&self, dim: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= dim => Err(Error::IndexOutOfRange { index: i, len: dim }),
            _ => Ok(()),
        }
    }
}

impl<'a> IntoIterator for &'a SupportSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// Orders indices by decreasing magnitude, equal magnitudes by increasing index.
fn magnitude_order<T: Scalar>(w: &[T]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        w[b].abs()
            .partial_cmp(&w[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

/// Indices selected by `H_s`: the `s` largest-magnitude entries of `w`, ties
/// resolved toward the smallest index. Always returns exactly `s` indices,
/// even when some of the selected entries are zero.
pub fn hard_threshold_support<T: Scalar>(w: &[T], s: usize) -> Result<SupportSet> {
    let n = w.len();
    if s < 1 || s > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity s={s} must satisfy 1 <= s <= n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if s < n {
        order.select_nth_unstable_by(s - 1, magnitude_order(w));
        order.truncate(s);
    }
    order.sort_unstable();
    Ok(SupportSet::from_sorted_unchecked(order))
}

/// Keeps the `s` largest-magnitude entries of `w` and zeroes the rest.
pub fn hard_threshold<T: Scalar>(w: &[T], s: usize) -> Result<Vec<T>> {
    let keep = hard_threshold_support(w, s)?;
    Ok(restrict_to(w, &keep))
}

/// Copy of `w` with every entry outside `support` set to zero.
pub fn restrict_to<T: Scalar>(w: &[T], support: &SupportSet) -> Vec<T> {
    let mut out = vec![T::zero(); w.len()];
    for i in support.iter() {
        out[i] = w[i];
    }
    out
}

/// Indices of the exactly-nonzero entries of `x`.
pub fn support_of<T: Scalar>(x: &[T]) -> SupportSet {
    SupportSet::from_sorted_unchecked(
        x.iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect(),
    )
}

/// `min(‖x − t‖, ‖x + t‖)`.
pub fn signed_distance<T: Scalar>(x: &[T], t: &[T]) -> Result<T> {
    check_len("signed distance operand", t.len(), x.len())?;
    let (mut minus, mut plus) = (T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(t) {
        minus = minus + (a - b) * (a - b);
        plus = plus + (a + b) * (a + b);
    }
    Ok(minus.min(plus).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_two_largest() {
        assert_eq!(
            hard_threshold(&[3.0, -5.0, 1.0], 2).unwrap(),
            vec![3.0, -5.0, 0.0]
        );
    }

    #[test]
    fn sparse_input_is_unchanged() {
        let w = [0.0, 2.0, 0.0, -1.0, 0.0];
        assert_eq!(hard_threshold(&w, 2).unwrap(), w.to_vec());
        assert_eq!(hard_threshold(&w, 4).unwrap(), w.to_vec());
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let w = [1.0, -2.0, 2.0, 1.0, -1.0];
        assert_eq!(hard_threshold_support(&w, 3).unwrap().indices(), &[0, 1, 2]);
        assert_eq!(
            hard_threshold_support(&[0.0f64; 6], 2).unwrap().indices(),
            &[0, 1]
        );
    }

    #[test]
    fn rejects_bad_sparsity() {
        assert!(hard_threshold(&[1.0, 2.0], 0).is_err());
        assert!(hard_threshold(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn support_extraction() {
        assert_eq!(support_of(&[0.0, 2.0, 0.0, -1.0]).indices(), &[1, 3]);
        assert!(support_of(&[0.0f64; 4]).is_empty());
    }

    #[test]
    fn distance_cases() {
        let x = [1.0, -2.0, 0.5];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(signed_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(signed_distance(&x, &neg).unwrap(), 0.0);
        let d = signed_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!(signed_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn support_set_algebra() {
        let a = SupportSet::from_indices(vec![4, 1, 2], 5).unwrap();
        let b = SupportSet::from_indices(vec![2], 5).unwrap();
        assert_eq!(a.indices(), &[1, 2, 4]);
        assert_eq!(a.difference(&b).indices(), &[1, 4]);
        assert!(b.is_subset_of(&a));
        assert!(SupportSet::from_indices(vec![5], 5).is_err());
        assert!(SupportSet::from_indices(vec![1, 1], 5).is_err());
    }
}
