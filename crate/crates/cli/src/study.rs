//! Grid-refinement study on the straight line, where the exact answer is
//! known: `-α²/4` in the plane, and `-α²/4 + π²/(4L²)` in the Dirichlet box
//! (the line runs wall to wall, so the along-line factor is the 1D box
//! ground state).

use std::f64::consts::PI;

use delta_wedge::discretization::{assemble, build_grid};
use delta_wedge::eigensolver::lowest_eigenpairs_with;
use delta_wedge::{angle_config, SolverOptions};

use crate::CliError;

pub const STUDY_SPACINGS: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub spacings: Vec<f64>,
    pub energies: Vec<f64>,
    pub converged: bool,
    /// Observed order from three successive halvings, if the differences
    /// shrink geometrically.
    pub order: Option<f64>,
    /// Richardson extrapolation to `h = 0`.
    pub extrapolated: f64,
    /// `-α²/4`.
    pub plane_value: f64,
    /// `-α²/4 + π²/(4L²)`.
    pub box_value: f64,
}

impl ConvergenceStudy {
    /// Energies decrease with `h` and stay above the plane value.
    pub fn monotone(&self) -> bool {
        self.energies.windows(2).all(|w| w[1] < w[0])
            && self.energies.iter().all(|&e| e > self.plane_value)
    }

    /// Distance from the finest energy to the extrapolated limit.
    pub fn measured_error(&self) -> f64 {
        (self.energies.last().copied().unwrap_or(f64::NAN) - self.extrapolated).abs()
    }
}

/// Richardson step for spacings halved twice: `(order, limit)`.
pub fn richardson(e: [f64; 3]) -> (Option<f64>, f64) {
    let (d1, d2) = (e[0] - e[1], e[1] - e[2]);
    if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() && d1.abs() > d2.abs() {
        let p = (d1 / d2).log2();
        (Some(p), e[2] - d2 / (2f64.powf(p) - 1.0))
    } else {
        (None, e[2])
    }
}

pub fn run_study(
    alpha: f64,
    half_width: f64,
    tol: f64,
    options: &SolverOptions,
) -> Result<ConvergenceStudy, CliError> {
    let config = angle_config(PI, alpha)?;
    let mut energies = Vec::new();
    let mut converged = true;
    for &h in &STUDY_SPACINGS {
        let form = assemble(&build_grid(half_width, h)?, &config);
        let est = lowest_eigenpairs_with(&form, 1, tol, options)?;
        converged &= est.all_converged();
        energies.push(est.lowest());
    }
    let (order, extrapolated) = richardson([energies[0], energies[1], energies[2]]);
    Ok(ConvergenceStudy {
        spacings: STUDY_SPACINGS.to_vec(),
        energies,
        converged,
        order,
        extrapolated,
        plane_value: -alpha * alpha / 4.0,
        box_value: -alpha * alpha / 4.0 + PI * PI / (4.0 * half_width * half_width),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_a_power_law() {
        let f = |h: f64| 1.5 + 0.3 * h * h;
        let (p, limit) = richardson([f(0.2), f(0.1), f(0.05)]);
        assert!((p.unwrap() - 2.0).abs() < 1e-9);
        assert!((limit - 1.5).abs() < 1e-12);
        let g = |h: f64| -2.0 + 0.7 * h;
        let (p, limit) = richardson([g(0.2), g(0.1), g(0.05)]);
        assert!((p.unwrap() - 1.0).abs() < 1e-9);
        assert!((limit + 2.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_declines_erratic_data() {
        assert_eq!(richardson([1.0, 2.0, 1.5]), (None, 1.5));
        assert_eq!(richardson([1.0, 1.0, 1.0]), (None, 1.0));
    }

    #[test]
    fn small_box_study() {
        let s = run_study(1.0, 10.0, 1e-10, &SolverOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.monotone(), "{:?}", s.energies);
        assert!((s.extrapolated - s.box_value).abs() < 2e-3, "{s:?}");
        assert!(s.measured_error() < 1e-3);
    }
}
