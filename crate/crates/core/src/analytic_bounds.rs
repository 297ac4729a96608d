//! Closed-form lower bounds on the spectral bottom and the coupling-splitting
//! optimization behind them.
//!
//! The plane minus a star of rays is a union of wedges. Each ray's coupling
//! `α_i` is shared between the two wedges it bounds, `α_i = γ_k + γ_{k+1}`,
//! and each wedge `k` contributes the lower bound `-c(θ_k) γ_k²` where
//!
//! ```text
//! c(θ) = 1 / sin²(θ/2)   for θ ≤ π
//! c(θ) = 1               for π < θ < 2π.
//! ```
//!
//! The form is then bounded below by `-max_k c(θ_k) γ_k²` times the squared
//! norm, and the best certificate minimizes that maximum over admissible
//! splits (all `γ_k ≥ 0`).

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{wedges_of, GeometryError, RayConfig};

/// Largest star accepted by [`brute_force_star_bound`].
pub const BRUTE_FORCE_MAX_RAYS: usize = 6;
/// Smallest grid resolution accepted by [`brute_force_star_bound`].
pub const BRUTE_FORCE_MIN_RESOLUTION: usize = 1_000;
/// Parameter width at which the golden-section search stops.
pub const GOLDEN_SECTION_TOL: f64 = 1e-10;
/// Relative tolerance on the cyclic ray constraints `γ_k + γ_{k+1} = α_i`.
pub const SPLIT_CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("no admissible split: {0}")]
    NoAdmissibleSplit(String),
    #[error("brute-force search supports at most {BRUTE_FORCE_MAX_RAYS} rays, got {0}")]
    TooManyRays(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn check_coupling(name: &'static str, value: f64, allow_zero: bool) -> Result<(), BoundError> {
    let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
    if ok {
        Ok(())
    } else {
        Err(BoundError::Domain {
            name,
            value,
            range: if allow_zero { "[0, ∞)" } else { "(0, ∞)" },
        })
    }
}

fn check_angle_phi(phi: f64) -> Result<(), BoundError> {
    if phi > 0.0 && phi <= PI {
        Ok(())
    } else {
        Err(BoundError::Domain {
            name: "phi",
            value: phi,
            range: "(0, π]",
        })
    }
}

fn check_lines_phi(phi: f64) -> Result<(), BoundError> {
    if phi > 0.0 && phi < PI {
        Ok(())
    } else {
        Err(BoundError::Domain {
            name: "phi",
            value: phi,
            range: "(0, π)",
        })
    }
}

/// Per-wedge coupling shares, indexed like [`wedges_of`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSolution {
    gammas: Vec<f64>,
}

impl SplitSolution {
    pub fn new(gammas: Vec<f64>) -> Self {
        Self { gammas }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Largest relative violation of `γ_{k-1} + γ_k = α_k` over the rays of
    /// `config`, where ray `k` separates wedge `k - 1` from wedge `k`.
    pub fn constraint_violation(&self, config: &RayConfig) -> f64 {
        let n = config.len();
        config
            .rays()
            .iter()
            .enumerate()
            .map(|(i, ray)| {
                let sum = self.gammas[(i + n - 1) % n] + self.gammas[i];
                (sum - ray.coupling).abs() / ray.coupling
            })
            .fold(0.0, f64::max)
    }
}

/// Certified lower bound together with the split that certifies it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Lower bound on the bottom of the spectrum (≤ 0).
    pub bound: f64,
    pub split: SplitSolution,
    /// `-c(θ_k) γ_k²` for each wedge; `bound` is their minimum (up to
    /// rounding for the closed forms, which report the exact formula).
    pub per_wedge_bounds: Vec<f64>,
}

impl BoundResult {
    fn from_split(gammas: Vec<f64>, openings: &[f64]) -> Self {
        let per_wedge_bounds: Vec<f64> = gammas
            .iter()
            .zip(openings)
            .map(|(&g, &theta)| -wedge_constant(theta) * g * g)
            .collect();
        let bound = per_wedge_bounds.iter().copied().fold(0.0, f64::min);
        Self {
            bound,
            split: SplitSolution::new(gammas),
            per_wedge_bounds,
        }
    }
}

/// `c(θ)` in `‖∇f‖² - γ‖f|∂Ω‖² ≥ -c(θ) γ² ‖f‖²` on a wedge of opening `θ`.
pub fn wedge_constant(theta: f64) -> f64 {
    if theta <= PI {
        let s = (theta / 2.0).sin();
        1.0 / (s * s)
    } else {
        1.0
    }
}

pub fn wedge_lower_bound(gamma: f64, theta: f64) -> Result<f64, BoundError> {
    check_coupling("gamma", gamma, true)?;
    if !(theta > 0.0 && theta < TAU) {
        return Err(BoundError::Domain {
            name: "theta",
            value: theta,
            range: "(0, 2π)",
        });
    }
    Ok(-wedge_constant(theta) * gamma * gamma)
}

/// Optimal share `β` of the coupling given to the narrow wedge of a broken
/// line with opening `phi`.
pub fn angle_split(alpha: f64, phi: f64) -> Result<f64, BoundError> {
    check_coupling("alpha", alpha, false)?;
    check_angle_phi(phi)?;
    let s = (phi / 2.0).sin();
    Ok(alpha * s / (1.0 + s))
}

/// Bound `-α²/(1 + sin(φ/2))²` for the broken line.
///
/// The split is ordered like `wedges_of(angle_config(phi, alpha))`: the
/// reflex wedge (opening `2π - φ`, share `α - β`) first, then the wedge of
/// opening `φ` (share `β`).
pub fn angle_bound(alpha: f64, phi: f64) -> Result<BoundResult, BoundError> {
    let beta = angle_split(alpha, phi)?;
    let s = (phi / 2.0).sin();
    let mut result = BoundResult::from_split(vec![alpha - beta, beta], &[TAU - phi, phi]);
    result.bound = -alpha * alpha / ((1.0 + s) * (1.0 + s));
    Ok(result)
}

/// The older estimate `-α²/(4 sin²(φ/2))`, i.e. the even split `β = α/2`.
pub fn llp_bound(alpha: f64, phi: f64) -> Result<f64, BoundError> {
    check_coupling("alpha", alpha, false)?;
    check_angle_phi(phi)?;
    let s = (phi / 2.0).sin();
    Ok(-alpha * alpha / (4.0 * s * s))
}

/// Optimal share `β` given to each of the two wedges of opening `phi` when
/// two lines cross.
pub fn lines_split(alpha: f64, phi: f64) -> Result<f64, BoundError> {
    check_coupling("alpha", alpha, false)?;
    check_lines_phi(phi)?;
    let (s, c) = (phi / 2.0).sin_cos();
    Ok(alpha * s / (s + c))
}

/// Bound `-α²/(1 + sin φ)` for two crossing lines, split ordered like
/// `wedges_of(lines_config(phi, alpha))`: `[β, α-β, β, α-β]`.
pub fn lines_bound(alpha: f64, phi: f64) -> Result<BoundResult, BoundError> {
    let beta = lines_split(alpha, phi)?;
    let rest = alpha - beta;
    let mut result = BoundResult::from_split(
        vec![beta, rest, beta, rest],
        &[phi, PI - phi, phi, PI - phi],
    );
    result.bound = -alpha * alpha / (1.0 + phi.sin());
    Ok(result)
}

/// Affine parametrization of all splits satisfying the ray constraints:
/// `γ_k = offset_k + sign_k · t` with `t = γ_0`.
struct SplitFamily {
    offsets: Vec<f64>,
    signs: Vec<f64>,
    slopes: Vec<f64>,
}

impl SplitFamily {
    fn gamma(&self, k: usize, t: f64) -> f64 {
        self.offsets[k] + self.signs[k] * t
    }

    fn gammas(&self, t: f64) -> Vec<f64> {
        (0..self.offsets.len())
            .map(|k| self.gamma(k, t).max(0.0))
            .collect()
    }

    /// `max_k sqrt(c_k) γ_k(t)`; its square is the bound magnitude.
    fn objective(&self, t: f64) -> f64 {
        (0..self.offsets.len())
            .map(|k| self.slopes[k] * self.gamma(k, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Best certificate for an arbitrary star.
///
/// For an odd number of rays the constraints fix the split uniquely. For an
/// even number they leave one free parameter (and require the alternating
/// sum of couplings to vanish); the maximum is minimized over it by
/// golden-section search and the result snapped onto the crossing of the
/// active increasing and decreasing terms.
pub fn star_bound(config: &RayConfig) -> Result<BoundResult, BoundError> {
    let openings = wedges_of(config).openings();
    let couplings = config.couplings();
    let n = couplings.len();
    let scale = config.max_coupling();

    let mut offsets = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for k in 1..n {
        offsets[k] = couplings[k] - offsets[k - 1];
        signs[k] = -signs[k - 1];
    }
    let slopes = openings.iter().map(|&t| wedge_constant(t).sqrt()).collect();
    let family = SplitFamily {
        offsets,
        signs,
        slopes,
    };
    let last = n - 1;
    let tol = SPLIT_CONSTRAINT_TOL * scale;

    let t = if n % 2 == 1 {
        let t = (couplings[0] - family.offsets[last]) / 2.0;
        if let Some(k) = (0..n).find(|&k| family.gamma(k, t) < -tol) {
            return Err(BoundError::NoAdmissibleSplit(format!(
                "the unique split has negative share {} on wedge {k}",
                family.gamma(k, t)
            )));
        }
        t
    } else {
        let residual = family.offsets[last] - couplings[0];
        if residual.abs() > tol {
            return Err(BoundError::NoAdmissibleSplit(format!(
                "alternating sum of couplings is {residual}, must vanish for an even star"
            )));
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..n {
            if family.signs[k] > 0.0 {
                lo = lo.max(-family.offsets[k]);
            } else {
                hi = hi.min(family.offsets[k]);
            }
        }
        if lo > hi + tol {
            return Err(BoundError::NoAdmissibleSplit(format!(
                "feasible share interval [{lo}, {hi}] is empty"
            )));
        }
        let hi = hi.max(lo);
        minimize_even(&family, lo, hi)
    };

    Ok(BoundResult::from_split(family.gammas(t), &openings))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn minimize_even(family: &SplitFamily, lo: f64, hi: f64) -> f64 {
    let g = |t: f64| family.objective(t);
    let t_golden = golden_section(g, lo, hi, GOLDEN_SECTION_TOL);

    // The objective is a max of lines, so its minimizer is an endpoint or a
    // crossing of an increasing and a decreasing line. Snap to the crossing
    // nearest the golden-section estimate.
    let n = family.offsets.len();
    let window = 1e-6 * (1.0 + (hi - lo).abs());
    let mut candidates = vec![t_golden, lo, hi];
    for u in (0..n).filter(|&k| family.signs[k] > 0.0) {
        for d in (0..n).filter(|&k| family.signs[k] < 0.0) {
            let (su, sd) = (family.slopes[u], family.slopes[d]);
            let t = (sd * family.offsets[d] - su * family.offsets[u]) / (su + sd);
            if (t - t_golden).abs() <= window {
                candidates.push(t.clamp(lo, hi));
            }
        }
    }
    candidates
        .into_iter()
        .map(|t| (g(t), t))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|(_, t)| t)
        .unwrap_or(t_golden)
}

/// Independent grid-search oracle for [`star_bound`], for stars of at most
/// six rays.
///
/// The ray constraints are taken from the wedge adjacency directly. An odd
/// star has a single admissible split, found by solving the cyclic linear
/// system with Gaussian elimination. An even star is scanned over
/// `resolution + 1` values of `γ_0`, keeping the first best point.
pub fn brute_force_star_bound(
    config: &RayConfig,
    resolution: usize,
) -> Result<BoundResult, BoundError> {
    let n = config.len();
    if n > BRUTE_FORCE_MAX_RAYS {
        return Err(BoundError::TooManyRays(n));
    }
    if resolution < BRUTE_FORCE_MIN_RESOLUTION {
        return Err(BoundError::Domain {
            name: "resolution",
            value: resolution as f64,
            range: "[1000, ∞)",
        });
    }
    let decomposition = wedges_of(config);
    let wedges = decomposition.wedges();
    let openings = decomposition.openings();
    let constants: Vec<f64> = openings.iter().map(|&t| wedge_constant(t)).collect();
    let couplings = config.couplings();
    let tol = SPLIT_CONSTRAINT_TOL * config.max_coupling();

    // incidence[i] = the two wedges bordered by ray i
    let mut incidence = vec![Vec::with_capacity(2); n];
    for (k, w) in wedges.iter().enumerate() {
        incidence[w.left_ray].push(k);
        incidence[w.right_ray].push(k);
    }

    let worst = |gammas: &[f64]| {
        gammas
            .iter()
            .zip(&constants)
            .map(|(g, c)| c * g * g)
            .fold(0.0, f64::max)
    };

    if n % 2 == 1 {
        let mut system = vec![vec![0.0; n + 1]; n];
        for (i, row) in system.iter_mut().enumerate() {
            for &k in &incidence[i] {
                row[k] += 1.0;
            }
            row[n] = couplings[i];
        }
        let gammas = solve_dense(system).ok_or_else(|| {
            BoundError::NoAdmissibleSplit("singular ray constraint system".into())
        })?;
        if let Some((k, g)) = gammas.iter().enumerate().find(|(_, &g)| g < -tol) {
            return Err(BoundError::NoAdmissibleSplit(format!(
                "the unique split has negative share {g} on wedge {k}"
            )));
        }
        let gammas: Vec<f64> = gammas.into_iter().map(|g| g.max(0.0)).collect();
        return Ok(BoundResult::from_split(gammas, &openings));
    }

    // walk the cycle: wedge k and wedge k+1 share ray wedges[k].left_ray
    let upper = couplings[wedges[0].right_ray].min(couplings[wedges[0].left_ray]);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut gammas = vec![0.0; n];
    for step in 0..=resolution {
        gammas[0] = upper * step as f64 / resolution as f64;
        for k in 0..n - 1 {
            gammas[k + 1] = couplings[wedges[k].left_ray] - gammas[k];
        }
        let closing = gammas[n - 1] + gammas[0] - couplings[wedges[n - 1].left_ray];
        if closing.abs() > tol || gammas.iter().any(|&g| g < -tol) {
            continue;
        }
        let value = worst(&gammas);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, gammas.iter().map(|g| g.max(0.0)).collect()));
        }
    }
    let (_, gammas) = best.ok_or_else(|| {
        BoundError::NoAdmissibleSplit("no grid point satisfies the ray constraints".into())
    })?;
    Ok(BoundResult::from_split(gammas, &openings))
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest {
            let factor = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| m[row][j] * x[j]).sum();
        x[row] = (m[row][n] - tail) / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angle_config, lines_config};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    /// Minimize `max(c1 β², c2 (α-β)²)` over a uniform β grid.
    fn grid_two_term(alpha: f64, c1: f64, c2: f64, step: f64) -> (f64, f64) {
        let steps = (alpha / step).round() as usize;
        (0..=steps)
            .map(|i| {
                let b = i as f64 * step;
                ((c1 * b * b).max(c2 * (alpha - b) * (alpha - b)), b)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(v, b)| (-v, b))
            .unwrap()
    }

    #[test]
    fn wedge_bound_examples() {
        assert_eq!(wedge_lower_bound(1.0, PI).unwrap(), -1.0);
        assert_eq!(wedge_lower_bound(2.0, 1.5 * PI).unwrap(), -4.0);
        assert_abs_diff_eq!(
            wedge_lower_bound(1.0, PI / 3.0).unwrap(),
            -4.0,
            epsilon = 1e-14
        );
        assert_eq!(wedge_lower_bound(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn wedge_bound_domain() {
        assert!(wedge_lower_bound(1.0, 0.0).is_err());
        assert!(wedge_lower_bound(1.0, TAU).is_err());
        assert!(wedge_lower_bound(-0.1, 1.0).is_err());
        assert!(wedge_lower_bound(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn angle_bound_straight_line() {
        let r = angle_bound(1.0, PI).unwrap();
        assert_eq!(r.bound, -0.25);
        assert_eq!(angle_split(1.0, PI).unwrap(), 0.5);
        assert_eq!(r.split.gammas(), &[0.5, 0.5]);
        assert_eq!(angle_bound(2.0, PI).unwrap().bound, -1.0);
    }

    #[test]
    fn angle_bound_right_angle_matches_grid_oracle() {
        let s = (PI / 4.0).sin();
        let (oracle, oracle_beta) = grid_two_term(1.0, 1.0 / (s * s), 1.0, 1e-6);
        // frozen from the same grid search
        assert_abs_diff_eq!(oracle, -0.3431464, epsilon = 1e-7);
        assert_abs_diff_eq!(oracle_beta, 0.414213, epsilon = 1e-6);

        let r = angle_bound(1.0, PI / 2.0).unwrap();
        let beta = angle_split(1.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(r.bound, -0.3431458, epsilon = 1e-7);
        assert_abs_diff_eq!(beta, 0.4142136, epsilon = 1e-7);
        assert_abs_diff_eq!(r.bound, oracle, epsilon = 2e-6);
        assert_abs_diff_eq!(beta, oracle_beta, epsilon = 2e-6);
        // the grid can only do worse than the true optimum
        assert!(r.bound >= oracle);
    }

    #[test]
    fn llp_examples() {
        assert_eq!(llp_bound(1.0, PI).unwrap(), -0.25);
        assert_abs_diff_eq!(llp_bound(1.0, PI / 2.0).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(llp_bound(1.0, PI / 3.0).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn lines_bound_examples() {
        let r = lines_bound(1.0, PI / 2.0).unwrap();
        assert_eq!(r.bound, -0.5);
        assert_abs_diff_eq!(lines_split(1.0, PI / 2.0).unwrap(), 0.5, epsilon = 1e-15);

        let c1 = 1.0 / (PI / 6.0).sin().powi(2);
        let c2 = 1.0 / (PI / 6.0).cos().powi(2);
        let (oracle, oracle_beta) = grid_two_term(1.0, c1, c2, 1e-6);
        assert_abs_diff_eq!(oracle, -0.5358991, epsilon = 1e-7);

        let r = lines_bound(1.0, PI / 3.0).unwrap();
        let beta = lines_split(1.0, PI / 3.0).unwrap();
        assert_abs_diff_eq!(r.bound, -0.5358984, epsilon = 1e-7);
        assert_abs_diff_eq!(beta, 0.3660254, epsilon = 1e-7);
        assert_abs_diff_eq!(r.bound, oracle, epsilon = 2e-6);
        assert_abs_diff_eq!(beta, oracle_beta, epsilon = 2e-6);

        for phi in [0.3, 1.0, 1.4] {
            assert_relative_eq!(
                lines_bound(1.0, phi).unwrap().bound,
                lines_bound(1.0, PI - phi).unwrap().bound,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(angle_bound(0.0, 1.0).is_err());
        assert!(angle_bound(1.0, 0.0).is_err());
        assert!(angle_bound(1.0, 4.0).is_err());
        assert!(llp_bound(-1.0, 1.0).is_err());
        assert!(lines_bound(1.0, PI).is_err());
        assert!(lines_bound(1.0, 0.0).is_err());
        assert!(lines_bound(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn star_reproduces_closed_forms() {
        for phi in [PI / 6.0, PI / 2.0, 5.0 * PI / 6.0, PI] {
            let star = star_bound(&angle_config(phi, 1.0).unwrap()).unwrap();
            let closed = angle_bound(1.0, phi).unwrap();
            assert_relative_eq!(star.bound, closed.bound, max_relative = 1e-12);
            for (a, b) in star.split.gammas().iter().zip(closed.split.gammas()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
        let star = star_bound(&lines_config(PI / 2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(star.bound, -0.5, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_three_star() {
        let cfg =
            RayConfig::from_pairs(&[(0.0, 1.0), (2.0 * PI / 3.0, 1.0), (4.0 * PI / 3.0, 1.0)])
                .unwrap();
        let r = star_bound(&cfg).unwrap();
        for &g in r.split.gammas() {
            assert_abs_diff_eq!(g, 0.5, epsilon = 1e-15);
        }
        assert_relative_eq!(r.bound, -1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn inadmissible_stars() {
        // odd star where one coupling dwarfs the rest
        let cfg = RayConfig::from_pairs(&[(0.0, 5.0), (2.0, 1.0), (4.0, 1.0)]).unwrap();
        assert!(matches!(
            star_bound(&cfg),
            Err(BoundError::NoAdmissibleSplit(_))
        ));
        assert!(matches!(
            brute_force_star_bound(&cfg, 1000),
            Err(BoundError::NoAdmissibleSplit(_))
        ));
        // even star with nonzero alternating sum
        let cfg = RayConfig::from_pairs(&[(0.0, 1.0), (1.0, 2.0), (3.0, 1.0), (4.0, 1.0)]).unwrap();
        assert!(matches!(
            star_bound(&cfg),
            Err(BoundError::NoAdmissibleSplit(_))
        ));
        assert!(matches!(
            brute_force_star_bound(&cfg, 1000),
            Err(BoundError::NoAdmissibleSplit(_))
        ));
        // even star with consistent couplings but an empty share interval is
        // impossible: γ_0 ∈ [0, min] always works for two rays
        let cfg = RayConfig::from_pairs(&[(0.0, 2.0), (1.0, 2.0)]).unwrap();
        assert!(star_bound(&cfg).is_ok());
    }

    #[test]
    fn brute_force_preconditions() {
        let seven: Vec<(f64, f64)> = (0..7).map(|k| (k as f64 * 0.8, 1.0)).collect();
        let cfg = RayConfig::from_pairs(&seven).unwrap();
        assert_eq!(
            brute_force_star_bound(&cfg, 1000),
            Err(BoundError::TooManyRays(7))
        );
        let cfg = angle_config(1.0, 1.0).unwrap();
        assert!(brute_force_star_bound(&cfg, 999).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force_star_bound(&angle_config(PI / 2.0, 1.0).unwrap(), 1_000_000).unwrap();
        assert_abs_diff_eq!(
            r.bound,
            angle_bound(1.0, PI / 2.0).unwrap().bound,
            epsilon = 1e-5
        );
        let r = brute_force_star_bound(&lines_config(PI / 3.0, 1.0).unwrap(), 1_000_000).unwrap();
        assert_abs_diff_eq!(
            r.bound,
            lines_bound(1.0, PI / 3.0).unwrap().bound,
            epsilon = 1e-5
        );
        let r = brute_force_star_bound(&angle_config(PI, 1.0).unwrap(), 1_000_000).unwrap();
        assert_abs_diff_eq!(r.bound, -0.25, epsilon = 1e-6);
    }

    #[test]
    fn split_satisfies_ray_constraints() {
        let cfg =
            RayConfig::from_pairs(&[(0.1, 1.0), (1.3, 1.2), (2.9, 0.9), (4.0, 1.1), (5.5, 1.3)])
                .unwrap();
        let r = star_bound(&cfg).unwrap();
        assert!(r.split.constraint_violation(&cfg) < 1e-12);
        assert!(r.split.gammas().iter().all(|&g| g >= 0.0));
    }

    proptest! {
        #[test]
        fn angle_bound_scales_quadratically(alpha in 0.01f64..10.0, phi in 0.01f64..PI, c in 0.1f64..10.0) {
            let a = angle_bound(c * alpha, phi).unwrap().bound;
            let b = angle_bound(alpha, phi).unwrap().bound;
            prop_assert!((a - c * c * b).abs() <= 1e-13 * a.abs());
            let a = lines_bound(c * alpha, phi.min(PI - 1e-3)).unwrap().bound;
            let b = lines_bound(alpha, phi.min(PI - 1e-3)).unwrap().bound;
            prop_assert!((a - c * c * b).abs() <= 1e-13 * a.abs());
            let a = llp_bound(c * alpha, phi).unwrap();
            let b = llp_bound(alpha, phi).unwrap();
            prop_assert!((a - c * c * b).abs() <= 1e-13 * a.abs());
        }

        #[test]
        fn power_of_two_scaling_is_exact(alpha in 0.01f64..10.0, phi in 0.01f64..PI, e in -4i32..5) {
            let c = 2f64.powi(e);
            prop_assert_eq!(angle_bound(c * alpha, phi).unwrap().bound, c * c * angle_bound(alpha, phi).unwrap().bound);
        }

        #[test]
        fn optimum_equalizes_wedges(alpha in 0.01f64..10.0, phi in 0.01f64..PI) {
            let r = angle_bound(alpha, phi).unwrap();
            let (p, q) = (r.per_wedge_bounds[0], r.per_wedge_bounds[1]);
            prop_assert!((p - q).abs() <= 1e-10 * p.abs().max(q.abs()));
            let beta = angle_split(alpha, phi).unwrap();
            prop_assert!(beta > 0.0 && beta < alpha);

            let phi = phi.min(PI - 1e-3);
            let r = lines_bound(alpha, phi).unwrap();
            let m = r.per_wedge_bounds.iter().copied().fold(f64::INFINITY, f64::min);
            for w in &r.per_wedge_bounds {
                prop_assert!((w - m).abs() <= 1e-10 * m.abs());
            }
            let beta = lines_split(alpha, phi).unwrap();
            prop_assert!(beta > 0.0 && beta < alpha);
        }

        #[test]
        fn bound_is_min_of_wedges(alpha in 0.01f64..10.0, phi in 0.01f64..(PI - 1e-3)) {
            for r in [angle_bound(alpha, phi).unwrap(), lines_bound(alpha, phi).unwrap()] {
                let m = r.per_wedge_bounds.iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert!((r.bound - m).abs() <= 1e-12 * m.abs());
                prop_assert!(r.bound <= 0.0);
            }
        }

        #[test]
        fn monotone_in_angle(alpha in 0.1f64..10.0, a in 0.01f64..PI, b in 0.01f64..PI) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(angle_bound(alpha, lo).unwrap().bound < angle_bound(alpha, hi).unwrap().bound);
            let (lo, hi) = (lo.min(PI / 2.0), hi.min(PI / 2.0));
            if hi - lo > 1e-6 {
                prop_assert!(lines_bound(alpha, lo).unwrap().bound < lines_bound(alpha, hi).unwrap().bound);
            }
        }

        #[test]
        fn star_matches_closed_forms(alpha in 0.1f64..10.0, phi in 0.01f64..(PI - 0.01)) {
            let s = star_bound(&angle_config(phi, alpha).unwrap()).unwrap().bound;
            let c = angle_bound(alpha, phi).unwrap().bound;
            prop_assert!((s - c).abs() <= 1e-10 * c.abs());
            let s = star_bound(&lines_config(phi, alpha).unwrap()).unwrap().bound;
            let c = lines_bound(alpha, phi).unwrap().bound;
            prop_assert!((s - c).abs() <= 1e-10 * c.abs());
        }

        #[test]
        fn star_invariant_under_rotation(phi in 0.05f64..(PI - 0.05), delta in -7.0f64..7.0) {
            let cfg = lines_config(phi, 1.0).unwrap();
            let a = star_bound(&cfg).unwrap().bound;
            let b = star_bound(&cfg.rotated(delta).unwrap()).unwrap().bound;
            prop_assert!((a - b).abs() <= 1e-9 * a.abs());
        }
    }
}
