//! Gaussian sensing matrices, sparse ground-truth signals and phaseless
//! measurements `y_i = (a_i·x)² + σ·ε_i`.

use rand::seq::index;

use crate::error::{check_len, Error, Result};
use crate::scalar::{axpy, dot, norm2, Scalar};
use crate::seed::{rng_from_seed, TrialSeeds};
use crate::sparse::{support_of, SupportSet};

/// Dense `m × n` sensing matrix stored row-major; row `i` is the sensing vector `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> SensingMatrix<T> {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "sensing matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_len("sensing matrix data", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "sensing matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                what: "sensing matrix row",
                expected: cols,
                found: bad.len(),
            });
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Number of measurements `m`.
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Signal dimension `n`.
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    /// `Ax`
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("signal", self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Ax` touching only the columns in `support`; entries of `x` outside it
    /// are treated as zero.
    pub fn apply_on(&self, x: &[T], support: &SupportSet) -> Result<Vec<T>> {
        check_len("signal", self.cols, x.len())?;
        support.check_within(self.cols)?;
        let idx = support.indices();
        Ok((0..self.rows)
            .map(|i| {
                let row = self.row(i);
                idx.iter().fold(T::zero(), |acc, &j| acc + row[j] * x[j])
            })
            .collect())
    }

    /// `Aᵀr`
    pub fn apply_transpose(&self, r: &[T]) -> Result<Vec<T>> {
        check_len("row-space vector", self.rows, r.len())?;
        let mut out = vec![T::zero(); self.cols];
        for (i, &ri) in r.iter().enumerate() {
            if !ri.is_zero() {
                axpy(ri, self.row(i), &mut out);
            }
        }
        Ok(out)
    }
}

/// Draws an `m × n` matrix with i.i.d. standard normal entries, filled row by row.
pub fn generate_gaussian_matrix<T: Scalar>(
    m: usize,
    n: usize,
    seed: u64,
) -> Result<SensingMatrix<T>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let data = (0..m * n)
        .map(|_| T::sample_standard_normal(&mut rng))
        .collect();
    Ok(SensingMatrix {
        rows: m,
        cols: n,
        data,
    })
}

/// Sparse ground-truth signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    signal: Vec<T>,
    sparsity: usize,
    support: SupportSet,
}

impl<T: Scalar> GroundTruth<T> {
    /// Wraps a signal with at most `sparsity` nonzeros. The all-zero signal is rejected.
    pub fn new(signal: Vec<T>, sparsity: usize) -> Result<Self> {
        if signal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "signal entries must be finite".into(),
            ));
        }
        let support = support_of(&signal);
        if support.is_empty() {
            return Err(Error::Degenerate("ground-truth signal is identically zero"));
        }
        if sparsity < 1 || support.len() > sparsity {
            return Err(Error::InvalidArgument(format!(
                "signal has {} nonzeros, more than the declared sparsity {sparsity}",
                support.len()
            )));
        }
        Ok(Self {
            signal,
            sparsity,
            support,
        })
    }

    pub fn signal(&self) -> &[T] {
        &self.signal
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.signal.len()
    }

    pub fn norm(&self) -> T {
        norm2(&self.signal)
    }

    /// Smallest nonzero magnitude.
    pub fn min_abs(&self) -> T {
        self.support
            .iter()
            .map(|i| self.signal[i].abs())
            .fold(T::infinity(), T::min)
    }
}

/// Draws an `s`-sparse signal of length `n`: support uniform over all
/// `s`-subsets, nonzero values i.i.d. standard normal.
pub fn generate_sparse_signal<T: Scalar>(n: usize, s: usize, seed: u64) -> Result<GroundTruth<T>> {
    if s < 1 || s > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity s={s} must satisfy 1 <= s <= n={n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut support = index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut signal = vec![T::zero(); n];
    for &j in &support {
        let mut v = T::sample_standard_normal(&mut rng);
        while v.is_zero() {
            v = T::sample_standard_normal(&mut rng);
        }
        signal[j] = v;
    }
    GroundTruth::new(signal, s)
}

/// Phaseless measurements together with the matrix that produced them.
#[derive(Debug, Clone)]
pub struct ProblemInstance<T> {
    a: SensingMatrix<T>,
    y: Vec<T>,
    z: Vec<T>,
    sigma: T,
    truth: Option<GroundTruth<T>>,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Builds an instance from given intensities. Amplitudes are
    /// `z_i = sqrt(max(y_i, 0))`.
    pub fn from_intensities(
        a: SensingMatrix<T>,
        y: Vec<T>,
        sigma: T,
        truth: Option<GroundTruth<T>>,
    ) -> Result<Self> {
        check_len("measurements", a.rows(), y.len())?;
        if let Some(t) = &truth {
            check_len("ground truth", a.cols(), t.dim())?;
        }
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and nonnegative, got {sigma}"
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("measurements must be finite".into()));
        }
        let z = y.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
        Ok(Self {
            a,
            y,
            z,
            sigma,
            truth,
        })
    }

    pub fn matrix(&self) -> &SensingMatrix<T> {
        &self.a
    }

    /// Intensities `y`.
    pub fn intensities(&self) -> &[T] {
        &self.y
    }

    /// Amplitudes `z`.
    pub fn amplitudes(&self) -> &[T] {
        &self.z
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn truth(&self) -> Option<&GroundTruth<T>> {
        self.truth.as_ref()
    }

    /// Number of measurements `m`.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Signal dimension `n`.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Same data with the ground truth removed, for blind solving.
    pub fn without_truth(&self) -> Self {
        Self {
            truth: None,
            ..self.clone()
        }
    }

    pub(crate) fn check_signal(&self, x: &[T]) -> Result<()> {
        check_len("signal", self.n(), x.len())
    }
}

/// Measures `truth` through `a`: `y_i = (a_i·x)² + sigma·ε_i` with `ε` drawn
/// from the stream seeded by `seed`.
pub fn measure<T: Scalar>(
    a: SensingMatrix<T>,
    truth: GroundTruth<T>,
    sigma: T,
    seed: u64,
) -> Result<ProblemInstance<T>> {
    check_len("ground truth", a.cols(), truth.dim())?;
    let ax = a.apply_on(truth.signal(), truth.support())?;
    let mut y: Vec<T> = ax.iter().map(|&v| v * v).collect();
    if sigma > T::zero() {
        let mut rng = rng_from_seed(seed);
        for yi in &mut y {
            *yi = *yi + sigma * T::sample_standard_normal(&mut rng);
        }
    }
    ProblemInstance::from_intensities(a, y, sigma, Some(truth))
}

/// Generates matrix, signal and measurements of one trial from its seeds.
pub fn generate_instance<T: Scalar>(
    m: usize,
    n: usize,
    s: usize,
    sigma: T,
    seeds: &TrialSeeds,
) -> Result<ProblemInstance<T>> {
    let truth = generate_sparse_signal(n, s, seeds.signal)?;
    let a = generate_gaussian_matrix(m, n, seeds.matrix)?;
    measure(a, truth, sigma, seeds.noise)
}
