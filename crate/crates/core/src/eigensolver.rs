//! Lowest eigenvalues of a [`DiscreteForm`] and counts of eigenvalues below a
//! threshold.
//!
//! Energies are reported in continuum units: an eigenvalue `μ` of the
//! dimensionless operator `H` is the energy `μ / h²`. Large problems use
//! thick-restart Lanczos on `(H - σh²)⁻¹` with a sparse LDLᵀ factorization,
//! where `σ` sits below the analytic lower bound of the ray configuration.
//! Small problems are solved densely.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::sparse::linalg::cholesky::supernodal::SupernodalLdltRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::{Conj, Mat, MatMut, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analytic_bounds::star_bound;
use crate::discretization::DiscreteForm;
use crate::geometry::{Ray, RayConfig};
use crate::sparse::SymmetricCsr;

pub const DEFAULT_SEED: u64 = 42;
pub const MAX_EIGENPAIRS: usize = 20;
pub const MIN_TOLERANCE: f64 = 1e-12;
pub const MAX_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_MAX_APPLICATIONS: usize = 10_000;
/// Problems with at most this many unknowns are solved densely by default.
pub const DEFAULT_DENSE_CUTOFF: usize = 600;

/// Attempts at pushing the shift further down when the factorization shows
/// the analytic floor is not below the discrete spectrum.
const SHIFT_RETRIES: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("k = {0} outside 1..={MAX_EIGENPAIRS}")]
    BadCount(usize),
    #[error("tolerance {0} outside [{MIN_TOLERANCE}, {MAX_TOLERANCE}]")]
    BadTolerance(f64),
    #[error("threshold {0} must be negative")]
    BadThreshold(f64),
    #[error("could not factor the operator shifted by {shift}")]
    Factorization { shift: f64 },
    #[error("no admissible shift below the spectrum found (last tried {shift})")]
    NoShift { shift: f64 },
    #[error("all {k} computed eigenvalues lie below {threshold}; count undetermined")]
    CountExhausted { k: usize, threshold: f64 },
    #[error("eigensolver did not converge within {applications} operator applications")]
    NotConverged { applications: usize },
    #[error("inertia count {inertia} disagrees with eigenvalue count {extension}")]
    CountMismatch { inertia: usize, extension: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Seed of the starting-vector generator.
    pub seed: u64,
    /// Cap on operator applications (linear solves) per call.
    pub max_applications: usize,
    /// Krylov subspace size; defaults to `max(2k + 10, 20)`.
    pub krylov_dim: Option<usize>,
    pub dense_cutoff: usize,
    pub keep_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            max_applications: DEFAULT_MAX_APPLICATIONS,
            krylov_dim: None,
            dense_cutoff: DEFAULT_DENSE_CUTOFF,
            keep_vectors: true,
        }
    }
}

/// Result of an eigenvalue solve. Eigenvalues are ascending energies, each
/// the Rayleigh quotient of its eigenvector. Residuals are
/// `‖Hv - μv‖ / (‖H‖_∞ ‖v‖)`, recomputed by an explicit product after the
/// solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    converged: Vec<bool>,
    eigenvectors: Option<Vec<Vec<f64>>>,
    iterations: usize,
    shift: Option<f64>,
}

impl SpectrumEstimate {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn converged(&self) -> &[bool] {
        &self.converged
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Unit-norm eigenvectors with non-negative entry sum, when retained.
    pub fn eigenvectors(&self) -> Option<&[Vec<f64>]> {
        self.eigenvectors.as_deref()
    }

    /// Operator applications used (0 for the dense path).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Energy `σ` used for shift-invert, if that path ran.
    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn lowest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn scale(x: &mut [f64], a: f64) {
    x.iter_mut().for_each(|v| *v *= a);
}

/// Continuum lower bound for the form's spectrum, including its energy
/// shift. Rays with zero coupling are ignored; if the couplings admit no
/// split, every coupling is raised to the largest one, which can only lower
/// the form.
pub fn spectral_floor(form: &DiscreteForm) -> f64 {
    let active: Vec<Ray> = form
        .rays()
        .into_iter()
        .filter(|r| r.coupling > 0.0)
        .collect();
    let bound = match active.len() {
        0 => 0.0,
        // a half-line sits inside a full line
        1 => -active[0].coupling.powi(2) / 4.0,
        _ => {
            let config = RayConfig::new(active).expect("rays come from a valid configuration");
            star_bound(&config)
                .or_else(|_| {
                    let max = config.max_coupling();
                    star_bound(
                        &config
                            .with_uniform_coupling(max)
                            .expect("positive coupling"),
                    )
                })
                .map(|r| r.bound)
                .unwrap_or_else(|_| -config.max_coupling().powi(2))
        }
    };
    bound + form.shift()
}

/// Symbolic factorization of an operator's pattern, reusable across shifts.
struct Factorizer<'a> {
    op: &'a SymmetricCsr,
    symbolic: SymbolicCholesky<usize>,
}

/// Numeric LDLᵀ of `H - shift·I` (dimensionless shift).
struct ShiftedFactor<'a> {
    symbolic: &'a SymbolicCholesky<usize>,
    values: Vec<f64>,
    negatives: usize,
    scratch: MemBuffer,
}

impl<'a> Factorizer<'a> {
    fn new(op: &'a SymmetricCsr) -> Self {
        let lower = op.to_faer_lower(0.0);
        let symbolic = factorize_symbolic_cholesky(
            lower.symbolic(),
            Side::Lower,
            SymmetricOrdering::Amd,
            Default::default(),
        )
        .expect("pattern of a square matrix");
        Self { op, symbolic }
    }

    fn factor(&self, shift: f64) -> Option<ShiftedFactor<'_>> {
        let lower = self.op.to_faer_lower(-shift);
        let mut values = vec![0.0; self.symbolic.len_val()];
        let mut buf = MemBuffer::new(
            self.symbolic
                .factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()),
        );
        self.symbolic
            .factorize_numeric_ldlt(
                &mut values,
                lower.as_ref(),
                Side::Lower,
                LdltRegularization::default(),
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .ok()?;
        let negatives = count_negative_pivots(&self.symbolic, &values);
        let scratch = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        Some(ShiftedFactor {
            symbolic: &self.symbolic,
            values,
            negatives,
            scratch,
        })
    }
}

fn count_negative_pivots(symbolic: &SymbolicCholesky<usize>, values: &[f64]) -> usize {
    match symbolic.raw() {
        SymbolicCholeskyRaw::Supernodal(sn) => {
            let factor = SupernodalLdltRef::new(sn, values);
            (0..sn.n_supernodes())
                .map(|s| {
                    let block = factor.supernode(s).val();
                    (0..block.ncols()).filter(|&d| block[(d, d)] < 0.0).count()
                })
                .sum()
        }
        SymbolicCholeskyRaw::Simplicial(sp) => {
            let pattern = sp.factor();
            let (col_ptr, row_idx) = (pattern.col_ptr(), pattern.row_idx());
            (0..pattern.ncols())
                .filter(|&c| {
                    (col_ptr[c]..col_ptr[c + 1]).any(|p| row_idx[p] == c && values[p] < 0.0)
                })
                .count()
        }
    }
}

impl ShiftedFactor<'_> {
    fn solve_in_place(&mut self, x: &mut [f64]) {
        let n = x.len();
        LdltRef::new(self.symbolic, &self.values).solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(x, n, 1),
            Par::Seq,
            MemStack::new(&mut self.scratch),
        );
    }
}

/// Number of eigenvalues strictly below `threshold` (an energy), from the
/// inertia of `H - threshold·h²·I`.
pub fn count_below_by_inertia(form: &DiscreteForm, threshold: f64) -> Result<usize, SolverError> {
    let factorizer = Factorizer::new(form.operator());
    let h2 = form.mass();
    // a pivot of exactly zero means the threshold is an eigenvalue to
    // working precision; nudging it down keeps "strictly below"
    for nudge in [0.0, 1e-12, 1e-10] {
        let shift = (threshold - nudge * threshold.abs().max(1.0)) * h2;
        if let Some(f) = factorizer.factor(shift) {
            return Ok(f.negatives);
        }
    }
    Err(SolverError::Factorization { shift: threshold })
}

/// Number of eigenvalues strictly below `threshold`, by computing
/// progressively more eigenpairs until one reaches the threshold.
pub fn count_below_by_extension(
    form: &DiscreteForm,
    threshold: f64,
    tol: f64,
    options: &SolverOptions,
) -> Result<usize, SolverError> {
    let options = SolverOptions {
        keep_vectors: false,
        ..options.clone()
    };
    let mut k = 4.min(form.dim());
    loop {
        let est = lowest_eigenpairs_with(form, k, tol, &options)?;
        if !est.all_converged() {
            return Err(SolverError::NotConverged {
                applications: est.iterations(),
            });
        }
        let below = est.eigenvalues().iter().filter(|&&e| e < threshold).count();
        if below < k {
            return Ok(below);
        }
        if k >= MAX_EIGENPAIRS.min(form.dim()) {
            return Err(SolverError::CountExhausted { k, threshold });
        }
        k = (2 * k).min(MAX_EIGENPAIRS).min(form.dim());
    }
}

/// Number of eigenvalues strictly below `threshold < 0`. The inertia count is
/// authoritative; when the count is small enough for the eigensolver to
/// reach, it is cross-checked against an explicit solve.
pub fn count_below(form: &DiscreteForm, threshold: f64, tol: f64) -> Result<usize, SolverError> {
    count_below_with(form, threshold, tol, &SolverOptions::default())
}

pub fn count_below_with(
    form: &DiscreteForm,
    threshold: f64,
    tol: f64,
    options: &SolverOptions,
) -> Result<usize, SolverError> {
    if threshold.is_nan() || threshold >= 0.0 {
        return Err(SolverError::BadThreshold(threshold));
    }
    check_tolerance(tol)?;
    let inertia = count_below_by_inertia(form, threshold)?;
    if inertia < MAX_EIGENPAIRS {
        let extension = count_below_by_extension(form, threshold, tol, options)?;
        if extension != inertia {
            return Err(SolverError::CountMismatch { inertia, extension });
        }
    }
    Ok(inertia)
}

fn check_tolerance(tol: f64) -> Result<(), SolverError> {
    if (MIN_TOLERANCE..=MAX_TOLERANCE).contains(&tol) {
        Ok(())
    } else {
        Err(SolverError::BadTolerance(tol))
    }
}

pub fn lowest_eigenpairs(
    form: &DiscreteForm,
    k: usize,
    tol: f64,
) -> Result<SpectrumEstimate, SolverError> {
    lowest_eigenpairs_with(form, k, tol, &SolverOptions::default())
}

/// The `k` lowest eigenpairs. Non-convergence within the application cap is
/// reported through the per-pair flags, not as an error.
pub fn lowest_eigenpairs_with(
    form: &DiscreteForm,
    k: usize,
    tol: f64,
    options: &SolverOptions,
) -> Result<SpectrumEstimate, SolverError> {
    if !(1..=MAX_EIGENPAIRS).contains(&k) || k > form.dim() {
        return Err(SolverError::BadCount(k));
    }
    check_tolerance(tol)?;
    let mut estimate = if form.dim() <= options.dense_cutoff {
        dense_eigenpairs(form, k, tol)
    } else {
        shift_invert_eigenpairs(form, k, tol, options)?
    };
    if !options.keep_vectors {
        estimate.eigenvectors = None;
    }
    Ok(estimate)
}

/// Rayleigh quotient, relative residual and sign normalization of one
/// approximate eigenvector of `op`.
fn finish_pair(op: &SymmetricCsr, op_norm: f64, x: &mut [f64]) -> (f64, f64) {
    let nx = norm(x);
    scale(x, 1.0 / nx);
    if x.iter().sum::<f64>() < 0.0 {
        scale(x, -1.0);
    }
    let mut y = vec![0.0; x.len()];
    op.matvec(x, &mut y);
    let mu = dot(x, &y);
    axpy(-mu, x, &mut y);
    (mu, norm(&y) / op_norm)
}

fn assemble_estimate(
    form: &DiscreteForm,
    mut vectors: Vec<Vec<f64>>,
    tol: f64,
    iterations: usize,
    shift: Option<f64>,
) -> SpectrumEstimate {
    let op = form.operator();
    let op_norm = op.inf_norm().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<(f64, f64, Vec<f64>)> = vectors
        .drain(..)
        .map(|mut x| {
            let (mu, res) = finish_pair(op, op_norm, &mut x);
            (mu, res, x)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let h2 = form.mass();
    SpectrumEstimate {
        eigenvalues: pairs.iter().map(|p| p.0 / h2).collect(),
        residuals: pairs.iter().map(|p| p.1).collect(),
        converged: pairs.iter().map(|p| p.1 <= tol).collect(),
        eigenvectors: Some(pairs.into_iter().map(|p| p.2).collect()),
        iterations,
        shift,
    }
}

fn dense_eigenpairs(form: &DiscreteForm, k: usize, tol: f64) -> SpectrumEstimate {
    let op = form.operator();
    let n = op.dim();
    let mut dense = Mat::<f64>::zeros(n, n);
    for r in 0..n {
        for (c, v) in op.row(r) {
            dense[(r, c)] = v;
        }
    }
    let evd = dense
        .self_adjoint_eigen(Side::Lower)
        .expect("dense symmetric eigendecomposition");
    let u = evd.U();
    let vectors = (0..k)
        .map(|j| (0..n).map(|i| u[(i, j)]).collect())
        .collect();
    assemble_estimate(form, vectors, tol, 0, None)
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng, against: &[&[Vec<f64>]]) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for set in against {
                for u in *set {
                    let c = dot(u, &v);
                    axpy(-c, u, &mut v);
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            scale(&mut v, 1.0 / nv);
            return v;
        }
    }
}

struct LanczosOutcome {
    /// Ritz vectors for the `nev` largest Ritz values, in descending order.
    vectors: Vec<Vec<f64>>,
    applications: usize,
}

/// Thick-restart Lanczos with full reorthogonalization for the largest
/// eigenvalues of a symmetric positive operator, restricted to the
/// orthogonal complement of `locked`.
///
/// `estimate_scale` converts the Ritz residual bound `|β yₘ| / θ` into the
/// caller's residual measure. Once every wanted pair passes the estimate,
/// `verify` checks the Ritz vectors independently; a rejection tightens
/// the internal target and iteration continues.
struct Lanczos<'a> {
    dim: usize,
    nev: usize,
    max_basis: usize,
    locked: &'a [Vec<f64>],
    budget: usize,
    tol: f64,
    estimate_scale: f64,
}

impl Lanczos<'_> {
    fn run(
        &self,
        apply: &mut dyn FnMut(&[f64], &mut [f64]),
        verify: &mut dyn FnMut(&[Vec<f64>]) -> bool,
        rng: &mut ChaCha8Rng,
    ) -> LanczosOutcome {
        let available = self.dim - self.locked.len();
        let m = self.max_basis.min(available);
        let nev = self.nev.min(m);
        let keep = (nev + (m - nev) / 2).min(m.saturating_sub(1)).max(nev);
        let mut basis: Vec<Vec<f64>> = vec![random_unit(self.dim, rng, &[self.locked])];
        let mut proj = Mat::<f64>::zeros(m, m);
        let mut size = 0;
        let mut applications = 0;
        let mut w = vec![0.0; self.dim];
        let mut beta = 0.0;
        let mut target = self.tol * 0.1;
        loop {
            while size < m && applications < self.budget {
                apply(&basis[size], &mut w);
                applications += 1;
                let mut coef = vec![0.0; size + 1];
                for _ in 0..2 {
                    for u in self.locked {
                        let c = dot(u, &w);
                        axpy(-c, u, &mut w);
                    }
                    for (i, v) in basis.iter().enumerate() {
                        let c = dot(v, &w);
                        coef[i] += c;
                        axpy(-c, v, &mut w);
                    }
                }
                for (i, &c) in coef.iter().enumerate() {
                    proj[(i, size)] = c;
                    proj[(size, i)] = c;
                }
                size += 1;
                beta = norm(&w);
                if size < m {
                    let breakdown = beta <= 1e-12 * coef[size - 1].abs().max(f64::MIN_POSITIVE);
                    let next = if breakdown {
                        // invariant subspace found; continue in a fresh direction
                        beta = 0.0;
                        random_unit(self.dim, rng, &[self.locked, basis.as_slice()])
                    } else {
                        w.iter().map(|x| x / beta).collect()
                    };
                    basis.push(next);
                }
            }

            let sub = proj.as_ref().submatrix(0, 0, size, size).to_owned();
            let evd = sub
                .self_adjoint_eigen(Side::Lower)
                .expect("small dense eigendecomposition");
            let (theta, y) = (evd.S().column_vector(), evd.U());
            // descending order of Ritz values
            let order: Vec<usize> = (0..size).rev().collect();
            let wanted = nev.min(size);
            let estimates_ok = order[..wanted].iter().all(|&c| {
                let est = self.estimate_scale * (beta * y[(size - 1, c)]).abs() / theta[c].abs();
                est <= target
            });
            let out_of_budget = applications >= self.budget;
            let ritz = |cols: &[usize]| -> Vec<Vec<f64>> {
                cols.iter()
                    .map(|&c| {
                        let mut x = vec![0.0; self.dim];
                        for (l, v) in basis.iter().take(size).enumerate() {
                            axpy(y[(l, c)], v, &mut x);
                        }
                        x
                    })
                    .collect()
            };

            if estimates_ok || out_of_budget || size == available {
                let vectors = ritz(&order[..wanted]);
                if verify(&vectors) || out_of_budget || size == available {
                    return LanczosOutcome {
                        vectors,
                        applications,
                    };
                }
                target = (target * 0.1).max(1e-3 * f64::EPSILON);
            }

            // thick restart: keep the leading Ritz vectors and continue from
            // the current residual direction
            let kept = keep.min(size - 1).max(1);
            let mut new_basis = ritz(&order[..kept]);
            proj = Mat::zeros(m, m);
            for (i, &c) in order[..kept].iter().enumerate() {
                proj[(i, i)] = theta[c];
            }
            let next = if beta > 0.0 {
                let mut r: Vec<f64> = w.iter().map(|x| x / beta).collect();
                // re-project against the rotated basis to keep it clean
                for u in self.locked.iter().chain(new_basis.iter()) {
                    let c = dot(u, &r);
                    axpy(-c, u, &mut r);
                }
                let nr = norm(&r);
                scale(&mut r, 1.0 / nr);
                r
            } else {
                random_unit(self.dim, rng, &[self.locked, new_basis.as_slice()])
            };
            new_basis.push(next);
            basis = new_basis;
            size = kept;
        }
    }
}

fn shift_invert_eigenpairs(
    form: &DiscreteForm,
    k: usize,
    tol: f64,
    options: &SolverOptions,
) -> Result<SpectrumEstimate, SolverError> {
    let op = form.operator();
    let dim = op.dim();
    let h2 = form.mass();
    let op_norm = op.inf_norm();

    let floor = spectral_floor(form);
    let base = form.shift();
    // 1.5× the analytic floor; with no coupling the floor is 0 and the
    // unshifted operator is already positive definite
    let mut offset = 1.5 * (floor - base);
    let factorizer = Factorizer::new(op);
    let mut chosen = None;
    let mut sigma = base + offset;
    for _ in 0..SHIFT_RETRIES {
        sigma = base + offset;
        if let Some(f) = factorizer.factor(sigma * h2) {
            if f.negatives == 0 {
                chosen = Some(f);
                break;
            }
        }
        offset = 2.0 * offset - 1.0;
    }
    let mut factor = chosen.ok_or(SolverError::NoShift { shift: sigma })?;

    let shifted_norm = op_norm + (sigma * h2).abs();
    let max_basis = options
        .krylov_dim
        .unwrap_or_else(|| (2 * k + 10).max(20))
        .max(k + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut apply = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        factor.solve_in_place(y);
    };
    let check = |vectors: &[Vec<f64>]| {
        vectors.iter().all(|x| {
            let mut x = x.clone();
            finish_pair(op, op_norm, &mut x).1 <= tol
        })
    };

    let mut budget = options.max_applications;
    let run = Lanczos {
        dim,
        nev: k,
        max_basis,
        locked: &[],
        budget,
        tol,
        estimate_scale: shifted_norm / op_norm,
    };
    let outcome = run.run(&mut apply, &mut |v| check(v), &mut rng);
    budget = budget.saturating_sub(outcome.applications);
    let mut applications = outcome.applications;
    let mut vectors = outcome.vectors;

    // The ground state of a Z-matrix is simple. For k > 1 a missed copy of
    // a repeated eigenvalue would show up as a lower eigenvalue in the
    // complement of what was found.
    if k > 1 {
        let energy = |x: &[f64]| op.quad_form(x) / dot(x, x);
        for _ in 0..k {
            if budget == 0 {
                break;
            }
            let mut locked: Vec<Vec<f64>> = vectors.clone();
            for v in &mut locked {
                let n = norm(v);
                scale(v, 1.0 / n);
            }
            let probe = Lanczos {
                dim,
                nev: 1,
                max_basis: 20,
                locked: &locked,
                budget,
                tol,
                estimate_scale: shifted_norm / op_norm,
            };
            let extra = probe.run(&mut apply, &mut |v| check(v), &mut rng);
            budget = budget.saturating_sub(extra.applications);
            applications += extra.applications;
            let candidate = extra.vectors.into_iter().next().expect("one vector");
            let highest = vectors.iter().map(|x| energy(x)).fold(f64::MIN, f64::max);
            let margin = tol * op_norm;
            if energy(&candidate) < highest - margin {
                vectors.push(candidate);
                vectors.sort_by(|a, b| energy(a).total_cmp(&energy(b)));
                vectors.truncate(k);
            } else {
                break;
            }
        }
    }

    Ok(assemble_estimate(
        form,
        vectors,
        tol,
        applications,
        Some(sigma),
    ))
}
