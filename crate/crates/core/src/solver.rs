//! Newton hard thresholding and the first-order IHT baseline.
//!
//! Each Newton iteration
//!
//! 1. selects the free variables `S_{k+1} = supp(H_s(x^k − η ∇f_A(x^k)))`,
//! 2. solves `H_{S,S} p = −H_{S,J} x^k_J + g_S` with `J = S_k \ S_{k+1}`,
//!    where `H` and `g` are the Hessian and gradient of the intensity loss,
//! 3. sets `x^{k+1}_S = x^k_S − p` and zeroes every other coordinate.
//!
//! If the `s × s` block cannot be factored even after ridge retries the
//! iteration takes the hard-thresholded gradient point from step 1 instead.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::measurement::ProblemInstance;
use crate::objectives::{
    amplitude_gradient_from_product, forward, hessian_block_from_product,
    intensity_gradient_from_product,
};
use crate::scalar::{norm2, Scalar};
use crate::sparse::{hard_threshold_support, restrict_to, signed_distance, support_of, SupportSet};

/// What to do when the reduced Newton system cannot be solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NewtonFallback {
    /// Retry with growing ridge shifts, then take the IHT point.
    #[default]
    RegularizeThenIht,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Gradient stepsize used to pick the free variables, in `(0, 2)`.
    pub eta: T,
    /// Operating sparsity `s`.
    pub sparsity: usize,
    pub max_iters: usize,
    /// Stop once `dist(x^{k+1}, x^k) / ‖x^k‖` drops below this.
    pub rel_change_tol: T,
    /// Stop once the relative error to the ground truth drops below this.
    /// Ignored when the instance carries no ground truth.
    pub truth_rel_err_tol: Option<T>,
    pub newton_fallback: NewtonFallback,
    pub ridge_base: T,
    pub ridge_growth: T,
    pub ridge_max_tries: usize,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(sparsity: usize) -> Self {
        Self {
            eta: T::lit(0.95),
            sparsity,
            max_iters: 1000,
            rel_change_tol: T::lit(1e-3),
            truth_rel_err_tol: Some(T::lit(1e-3)),
            newton_fallback: NewtonFallback::RegularizeThenIht,
            ridge_base: T::lit(1e-8),
            ridge_growth: T::lit(100.0),
            ridge_max_tries: 4,
        }
    }

    /// Configuration for noisy or truth-free data: only the step-change rule applies.
    pub fn blind(sparsity: usize) -> Self {
        Self {
            truth_rel_err_tol: None,
            ..Self::new(sparsity)
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.eta > T::zero() && self.eta < T::lit(2.0)) {
            return bad(format!("stepsize eta={} must lie in (0, 2)", self.eta));
        }
        if self.sparsity < 1 || self.sparsity > n {
            return bad(format!(
                "sparsity s={} must satisfy 1 <= s <= n={n}",
                self.sparsity
            ));
        }
        if !(self.rel_change_tol > T::zero()) {
            return bad(format!(
                "rel_change_tol={} must be positive",
                self.rel_change_tol
            ));
        }
        if let Some(t) = self.truth_rel_err_tol {
            if !(t > T::zero()) {
                return bad(format!("truth_rel_err_tol={t} must be positive"));
            }
        }
        if !(self.ridge_base > T::zero()) || !(self.ridge_growth > T::one()) {
            return bad("ridge_base must be positive and ridge_growth greater than one".into());
        }
        Ok(())
    }
}

/// Current estimate with the index set it was updated on.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIterate<T> {
    pub x: Vec<T>,
    pub support: SupportSet,
    pub k: usize,
}

impl<T: Scalar> SparseIterate<T> {
    /// Starting iterate; its support is the nonzero pattern of `x0`.
    pub fn start(x0: Vec<T>) -> Self {
        let support = support_of(&x0);
        Self {
            x: x0,
            support,
            k: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    TruthTol,
    StepTol,
    MaxIters,
    Degenerate,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TruthTol => "truth-tol",
            Termination::StepTol => "step-tol",
            Termination::MaxIters => "max-iters",
            Termination::Degenerate => "degenerate",
        }
    }
}

/// One trace entry, recorded for `k = 0` and after every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    pub rel_err: Option<T>,
    /// `dist(x^k, x^{k-1}) / ‖x^{k-1}‖`; absent at `k = 0`.
    pub rel_change: Option<T>,
    pub support_correct: Option<bool>,
    /// Wall time since the solve started.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome<T> {
    pub final_iterate: SparseIterate<T>,
    pub trace: Vec<TraceRecord<T>>,
    pub termination: Termination,
    pub newton_fallbacks_used: usize,
}

impl<T: Scalar> TrialOutcome<T> {
    pub fn iterations(&self) -> usize {
        self.final_iterate.k
    }

    pub fn final_rel_err(&self) -> Option<T> {
        self.trace.last().and_then(|r| r.rel_err)
    }

    pub fn elapsed(&self) -> Duration {
        self.trace.last().map_or(Duration::ZERO, |r| r.elapsed)
    }

    /// First iteration whose relative error is below `tol`.
    pub fn iterations_to(&self, tol: T) -> Option<usize> {
        self.trace
            .iter()
            .find(|r| r.rel_err.is_some_and(|e| e < tol))
            .map(|r| r.k)
    }

    /// Relative errors of the trace, in order. Empty without ground truth.
    pub fn errors(&self) -> Vec<T> {
        self.trace.iter().filter_map(|r| r.rel_err).collect()
    }

    pub fn support_flags(&self) -> Vec<bool> {
        self.trace
            .iter()
            .map(|r| r.support_correct.unwrap_or(false))
            .collect()
    }
}

/// Solution of the reduced Newton system.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonDirection<T> {
    /// Direction over `S_{k+1}` in increasing index order; all zeros when
    /// `fallback_used` is set.
    pub p: Vec<T>,
    pub fallback_used: bool,
    /// Ridge shift that made the factorization succeed, if one was needed.
    pub ridge: Option<T>,
}

/// Gradient-step point `x^k − η ∇f_A(x^k)` and the free variables it selects.
struct Selection<T> {
    trial: Vec<T>,
    free: SupportSet,
}

fn select<T: Scalar>(
    inst: &ProblemInstance<T>,
    x: &[T],
    ax: &[T],
    cfg: &SolverConfig<T>,
) -> Result<Selection<T>> {
    let grad = amplitude_gradient_from_product(inst, ax)?;
    let trial: Vec<T> = x
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| v - cfg.eta * g)
        .collect();
    let free = hard_threshold_support(&trial, cfg.sparsity)?;
    Ok(Selection { trial, free })
}

/// `S_{k+1}`: the `s` indices kept by hard thresholding `x^k − η ∇f_A(x^k)`.
pub fn identify_free_variables<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    cfg: &SolverConfig<T>,
) -> Result<SupportSet> {
    cfg.validate(inst.n())?;
    let ax = forward(inst, &it.x)?;
    Ok(select(inst, &it.x, &ax, cfg)?.free)
}

/// Solves `h p = rhs` by Cholesky, retrying with `λI` for
/// `λ = ridge_base·|tr h|/dim · ridge_growth^t`, `t = 0..ridge_max_tries`.
/// Returns the solution and the ridge used, or `None` once every retry fails.
pub fn solve_reduced_system<T: Scalar>(
    h: &DenseMatrix<T>,
    rhs: &[T],
    cfg: &SolverConfig<T>,
) -> Option<(Vec<T>, Option<T>)> {
    let finite = |p: &[T]| p.iter().all(|v| v.is_finite());
    if let Some(ch) = Cholesky::factor(h) {
        let p = ch.solve(rhs);
        if finite(&p) {
            return Some((p, None));
        }
    }
    let dim = T::from_usize(h.rows().max(1)).unwrap();
    let mean_diag = h.trace().abs() / dim;
    let mut ridge = cfg.ridge_base
        * if mean_diag > T::zero() {
            mean_diag
        } else {
            T::one()
        };
    for _ in 0..cfg.ridge_max_tries {
        if let Some(ch) = Cholesky::factor_shifted(h, ridge) {
            let p = ch.solve(rhs);
            if finite(&p) {
                return Some((p, Some(ridge)));
            }
        }
        ridge = ridge * cfg.ridge_growth;
    }
    None
}

fn direction_from_product<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    ax: &[T],
    free: &SupportSet,
    cfg: &SolverConfig<T>,
) -> NewtonDirection<T> {
    let dropped = it.support.difference(free);
    let h_ss = hessian_block_from_product(inst, ax, free, free).block;
    let mut rhs = intensity_gradient_from_product(inst, ax, free);
    if !dropped.is_empty() {
        let h_sj = hessian_block_from_product(inst, ax, free, &dropped).block;
        let x_j: Vec<T> = dropped.iter().map(|j| it.x[j]).collect();
        let coupling = h_sj.mul_vec(&x_j).expect("block shape matches dropped set");
        for (r, c) in rhs.iter_mut().zip(coupling) {
            *r = *r - c;
        }
    }
    match solve_reduced_system(&h_ss, &rhs, cfg) {
        Some((p, ridge)) => NewtonDirection {
            p,
            fallback_used: false,
            ridge,
        },
        None => NewtonDirection {
            p: vec![T::zero(); free.len()],
            fallback_used: true,
            ridge: None,
        },
    }
}

/// Reduced Newton direction over `free` at the iterate `it`.
pub fn newton_direction<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    free: &SupportSet,
    cfg: &SolverConfig<T>,
) -> Result<NewtonDirection<T>> {
    if free.is_empty() {
        return Err(Error::InvalidArgument(
            "free-variable set must be nonempty".into(),
        ));
    }
    free.check_within(inst.n())?;
    it.support.check_within(inst.n())?;
    let ax = forward(inst, &it.x)?;
    Ok(direction_from_product(inst, it, &ax, free, cfg))
}

/// Result of one Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    pub next: SparseIterate<T>,
    pub fallback_used: bool,
}

fn newton_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    cfg: &SolverConfig<T>,
) -> Result<StepReport<T>> {
    let ax = forward(inst, &it.x)?;
    let Selection { trial, free } = select(inst, &it.x, &ax, cfg)?;
    let dir = direction_from_product(inst, it, &ax, &free, cfg);
    let x = if dir.fallback_used {
        restrict_to(&trial, &free)
    } else {
        let mut x = vec![T::zero(); inst.n()];
        for (&j, &pj) in free.indices().iter().zip(&dir.p) {
            x[j] = it.x[j] - pj;
        }
        x
    };
    Ok(StepReport {
        next: SparseIterate {
            x,
            support: free,
            k: it.k + 1,
        },
        fallback_used: dir.fallback_used,
    })
}

fn iht_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    cfg: &SolverConfig<T>,
) -> Result<StepReport<T>> {
    let ax = forward(inst, &it.x)?;
    let Selection { trial, free } = select(inst, &it.x, &ax, cfg)?;
    Ok(StepReport {
        next: SparseIterate {
            x: restrict_to(&trial, &free),
            support: free,
            k: it.k + 1,
        },
        fallback_used: false,
    })
}

/// One Newton iteration, also reporting whether the IHT fallback was taken.
pub fn step_detailed<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    cfg: &SolverConfig<T>,
) -> Result<StepReport<T>> {
    cfg.validate(inst.n())?;
    inst.check_signal(&it.x)?;
    newton_step(inst, it, cfg)
}

/// One Newton iteration `x^k → x^{k+1}`.
pub fn step<T: Scalar>(
    inst: &ProblemInstance<T>,
    it: &SparseIterate<T>,
    cfg: &SolverConfig<T>,
) -> Result<SparseIterate<T>> {
    step_detailed(inst, it, cfg).map(|r| r.next)
}

type Stepper<T> =
    fn(&ProblemInstance<T>, &SparseIterate<T>, &SolverConfig<T>) -> Result<StepReport<T>>;

struct Recorder<'a, T> {
    truth: Option<(&'a [T], T, &'a SupportSet)>,
    started: Instant,
}

impl<'a, T: Scalar> Recorder<'a, T> {
    fn record(&self, it: &SparseIterate<T>, rel_change: Option<T>) -> TraceRecord<T> {
        let (rel_err, support_correct) = match self.truth {
            Some((signal, norm, support)) => (
                signed_distance(&it.x, signal).ok().map(|d| d / norm),
                Some(support_of(&it.x) == *support),
            ),
            None => (None, None),
        };
        TraceRecord {
            k: it.k,
            rel_err,
            rel_change,
            support_correct,
            elapsed: self.started.elapsed(),
        }
    }
}

fn run<T: Scalar>(
    inst: &ProblemInstance<T>,
    x0: Vec<T>,
    cfg: &SolverConfig<T>,
    stepper: Stepper<T>,
) -> Result<TrialOutcome<T>> {
    cfg.validate(inst.n())?;
    inst.check_signal(&x0)?;
    let start = SparseIterate::start(x0);
    if start.support.len() > cfg.sparsity {
        return Err(Error::InvalidArgument(format!(
            "initial point has {} nonzeros, more than s={}",
            start.support.len(),
            cfg.sparsity
        )));
    }
    let truth = inst.truth().map(|t| (t.signal(), t.norm(), t.support()));
    let truth_tol = truth.and(cfg.truth_rel_err_tol);
    let rec = Recorder {
        truth,
        started: Instant::now(),
    };
    let hit_truth = |r: &TraceRecord<T>| match (truth_tol, r.rel_err) {
        (Some(tol), Some(e)) => e < tol,
        _ => false,
    };

    let mut trace = vec![rec.record(&start, None)];
    let mut current = start;
    let mut fallbacks = 0;
    let mut termination = Termination::MaxIters;
    if hit_truth(&trace[0]) {
        termination = Termination::TruthTol;
    } else {
        while current.k < cfg.max_iters {
            let StepReport {
                next,
                fallback_used,
            } = stepper(inst, &current, cfg)?;
            fallbacks += usize::from(fallback_used);
            let prev_norm = norm2(&current.x);
            let change = signed_distance(&next.x, &current.x)?;
            let rel_change = (prev_norm > T::zero()).then(|| change / prev_norm);
            let record = rec.record(&next, rel_change);
            let done_truth = hit_truth(&record);
            trace.push(record);
            current = next;
            if done_truth {
                termination = Termination::TruthTol;
                break;
            }
            match rel_change {
                None => {
                    termination = Termination::Degenerate;
                    break;
                }
                Some(rc) if rc < cfg.rel_change_tol => {
                    termination = Termination::StepTol;
                    break;
                }
                _ => {}
            }
        }
    }
    Ok(TrialOutcome {
        final_iterate: current,
        trace,
        termination,
        newton_fallbacks_used: fallbacks,
    })
}

/// Runs Newton hard thresholding from `x0` until a stopping rule fires.
pub fn solve<T: Scalar>(
    inst: &ProblemInstance<T>,
    x0: Vec<T>,
    cfg: &SolverConfig<T>,
) -> Result<TrialOutcome<T>> {
    run(inst, x0, cfg, newton_step)
}

/// Iterated hard thresholding on the amplitude loss,
/// `u^{k+1} = H_s(u^k − η ∇f_A(u^k))`, with the same stopping rules as [`solve`].
pub fn iht_solve<T: Scalar>(
    inst: &ProblemInstance<T>,
    x0: Vec<T>,
    cfg: &SolverConfig<T>,
) -> Result<TrialOutcome<T>> {
    run(inst, x0, cfg, iht_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::generate_instance;
    use crate::seed::TrialSeeds;

    fn instance() -> ProblemInstance<f64> {
        generate_instance(60, 20, 3, 0.0, &TrialSeeds::derive(17, 2)).unwrap()
    }

    #[test]
    fn defaults() {
        let cfg = SolverConfig::<f64>::new(5);
        assert_eq!(cfg.eta, 0.95);
        assert_eq!(cfg.max_iters, 1000);
        assert_eq!(cfg.rel_change_tol, 1e-3);
        assert_eq!(cfg.truth_rel_err_tol, Some(1e-3));
        assert_eq!(cfg.ridge_base, 1e-8);
        assert_eq!(cfg.ridge_growth, 100.0);
        assert_eq!(cfg.ridge_max_tries, 4);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::<f64>::new(3);
        assert!(cfg.validate(10).is_ok());
        cfg.eta = 2.0;
        assert!(cfg.validate(10).is_err());
        cfg.eta = 0.5;
        cfg.sparsity = 11;
        assert!(cfg.validate(10).is_err());
    }

    #[test]
    fn truth_is_fixed_point() {
        let inst = instance();
        let truth = inst.truth().unwrap();
        let it = SparseIterate {
            x: truth.signal().to_vec(),
            support: truth.support().clone(),
            k: 0,
        };
        let cfg = SolverConfig::new(3);
        assert_eq!(
            identify_free_variables(&inst, &it, &cfg).unwrap(),
            *truth.support()
        );
        let dir = newton_direction(&inst, &it, truth.support(), &cfg).unwrap();
        assert!(!dir.fallback_used);
        assert!(dir.p.iter().all(|v| v.abs() < 1e-12));
        let next = step(&inst, &it, &cfg).unwrap();
        assert_eq!(next.k, 1);
        for (a, b) in next.x.iter().zip(truth.signal()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_selects_smallest_indices() {
        let inst = instance();
        let it = SparseIterate::start(vec![0.0; 20]);
        let cfg = SolverConfig::new(3);
        let free = identify_free_variables(&inst, &it, &cfg).unwrap();
        assert_eq!(free.indices(), &[0, 1, 2]);
    }

    #[test]
    fn indefinite_block_triggers_fallback() {
        let cfg = SolverConfig::<f64>::new(2);
        let h = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, -3.0]).unwrap();
        assert!(solve_reduced_system(&h, &[1.0, 1.0], &cfg).is_none());
        // slightly singular blocks are rescued by the ridge
        let h = DenseMatrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (_, ridge) = solve_reduced_system(&h, &[1.0, 1.0], &cfg).unwrap();
        assert!(ridge.is_some());
    }

    #[test]
    fn solve_from_truth_stops_immediately() {
        let inst = instance();
        let x0 = inst.truth().unwrap().signal().to_vec();
        for out in [
            solve(&inst, x0.clone(), &SolverConfig::new(3)).unwrap(),
            iht_solve(&inst, x0.clone(), &SolverConfig::new(3)).unwrap(),
        ] {
            assert_eq!(out.termination, Termination::TruthTol);
            assert_eq!(out.iterations(), 0);
            assert_eq!(out.trace.len(), 1);
        }
    }

    #[test]
    fn origin_start_is_degenerate() {
        let inst = instance();
        let out = solve(&inst, vec![0.0; 20], &SolverConfig::new(3)).unwrap();
        assert_eq!(out.termination, Termination::Degenerate);
        assert_eq!(out.trace.len(), 2);
    }

    #[test]
    fn too_dense_start_rejected() {
        let inst = instance();
        assert!(solve(&inst, vec![1.0; 20], &SolverConfig::new(3)).is_err());
    }
}
