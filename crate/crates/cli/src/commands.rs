use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use delta_wedge::analytic_bounds::{angle_split, lines_split};
use delta_wedge::{angle_bound, lines_bound, llp_bound, star_bound};

use crate::args::Mode;
use crate::params::Params;
use crate::study::{run_study, ConvergenceStudy};
use crate::sweep::{compute_row, format_float, run_sweep, write_csv, write_plot_data, SweepRow};
use crate::{exit, CliError};

/// Closed-form and optimized bounds may differ by rounding only.
const BOUND_AGREEMENT: f64 = 1e-10;
/// Distance allowed between the crossing-lines ground energy and its exact
/// value `-α²/2`.
const PERPENDICULAR_TOL: f64 = 0.05;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn single_phi(params: &Params) -> Result<Option<f64>, CliError> {
    match (params.mode, params.phis.as_slice()) {
        (Mode::Star, _) => Ok(None),
        (_, [phi]) => Ok(Some(*phi)),
        _ => Err(CliError::Usage(
            "exactly one opening angle is required".into(),
        )),
    }
}

pub fn cmd_bound(params: &Params, out: &mut dyn Write) -> Result<u8, CliError> {
    let phi = single_phi(params)?;
    let alpha = params.alpha;
    let mode_name = match params.mode {
        Mode::Angle => "angle",
        Mode::Lines => "lines",
        Mode::Star => "star",
    };
    writeln!(out, "mode {mode_name}")?;
    let result = match params.mode {
        Mode::Angle => {
            let phi = phi.expect("checked");
            writeln!(out, "alpha {alpha}")?;
            writeln!(out, "phi_rad {phi}")?;
            let r = angle_bound(alpha, phi)?;
            writeln!(out, "bound {}", r.bound)?;
            writeln!(out, "beta {}", angle_split(alpha, phi)?)?;
            writeln!(out, "llp {}", llp_bound(alpha, phi)?)?;
            r
        }
        Mode::Lines => {
            let phi = phi.expect("checked");
            writeln!(out, "alpha {alpha}")?;
            writeln!(out, "phi_rad {phi}")?;
            let r = lines_bound(alpha, phi)?;
            writeln!(out, "bound {}", r.bound)?;
            writeln!(out, "beta {}", lines_split(alpha, phi)?)?;
            r
        }
        Mode::Star => {
            let config = params.rays.as_ref().expect("star mode has rays");
            for ray in config.rays() {
                writeln!(out, "ray {} {}", ray.angle.to_degrees(), ray.coupling)?;
            }
            let r = star_bound(config)?;
            writeln!(out, "bound {}", r.bound)?;
            r
        }
    };
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "split {}", join(result.split.gammas()))?;
    writeln!(out, "wedge_bounds {}", join(&result.per_wedge_bounds))?;
    Ok(exit::SUCCESS)
}

fn write_outputs(params: &Params, rows: &[SweepRow]) -> Result<(), CliError> {
    if let Some(path) = &params.out {
        let mut file = create(path)?;
        write_csv(rows, &mut file)?;
        file.flush().map_err(io_err(path))?;
    }
    if let Some(path) = &params.plot_data {
        let mut file = create(path)?;
        write_plot_data(rows, &mut file).map_err(io_err(path))?;
        file.flush().map_err(io_err(path))?;
    }
    Ok(())
}

fn print_study(study: &ConvergenceStudy, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "convergence study (straight line)")?;
    for (h, e) in study.spacings.iter().zip(&study.energies) {
        writeln!(out, "  h {h} e_num {}", format_float(*e))?;
    }
    match study.order {
        Some(p) => writeln!(out, "  observed order {p:.3}")?,
        None => writeln!(out, "  observed order undetermined")?,
    }
    writeln!(out, "  extrapolated {}", format_float(study.extrapolated))?;
    writeln!(out, "  box value {}", format_float(study.box_value))?;
    writeln!(out, "  plane value {}", format_float(study.plane_value))?;
    writeln!(out, "  monotone {}", study.monotone())?;
    writeln!(
        out,
        "  measured tol_disc {}",
        format_float(study.measured_error())
    )?;
    Ok(())
}

pub fn cmd_solve(params: &Params, out: &mut dyn Write) -> Result<u8, CliError> {
    let phi = single_phi(params)?;
    let result = compute_row(params, phi)?;
    let (row, spectrum, form) = (&result.row, &result.spectrum, &result.form);
    if let Some(path) = &params.dump_matrix {
        let mut file = create(path)?;
        form.write_matrix(&mut file).map_err(io_err(path))?;
        file.flush().map_err(io_err(path))?;
    }
    let grid = form.grid();
    if let Some(phi) = phi {
        writeln!(out, "phi_rad {phi}")?;
    }
    writeln!(
        out,
        "grid n {} unknowns {} h {} L {}",
        grid.n(),
        grid.unknowns(),
        grid.spacing(),
        grid.half_width()
    )?;
    writeln!(out, "bound {}", format_float(row.bound_new))?;
    if let Some(shift) = spectrum.shift() {
        writeln!(out, "shift {}", format_float(shift))?;
    }
    for (i, ((e, r), c)) in spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.residuals())
        .zip(spectrum.converged())
        .enumerate()
    {
        writeln!(
            out,
            "lambda_{} {} residual {r:.3e} converged {c}",
            i + 1,
            format_float(*e)
        )?;
    }
    writeln!(out, "ess_threshold {}", format_float(row.ess_threshold))?;
    writeln!(out, "n_below_ess {}", row.n_below_ess)?;
    writeln!(out, "iterations {}", spectrum.iterations())?;
    if params.convergence_study {
        print_study(
            &run_study(params.alpha, params.half_width, params.tol, &params.solver)?,
            out,
        )?;
    }
    write_outputs(params, std::slice::from_ref(row))?;
    Ok(if row.converged {
        exit::SUCCESS
    } else {
        exit::NOT_CONVERGED
    })
}

fn sweep_rows(params: &Params) -> Result<Vec<SweepRow>, CliError> {
    if params.mode == Mode::Star {
        return Err(CliError::Usage(
            "sweeps run over opening angles; use angle or lines mode".into(),
        ));
    }
    run_sweep(params)
}

pub fn cmd_sweep(params: &Params, out: &mut dyn Write) -> Result<u8, CliError> {
    let rows = sweep_rows(params)?;
    if params.out.is_none() {
        write_csv(&rows, &mut *out)?;
    }
    write_outputs(params, &rows)?;
    Ok(if rows.iter().all(|r| r.converged) {
        exit::SUCCESS
    } else {
        exit::NOT_CONVERGED
    })
}

/// A failed verification predicate for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub phi: Option<f64>,
    pub check: char,
    pub message: String,
}

/// Checks the verification predicates on computed rows:
///
/// - (a) `e_num ≥ bound_new - tol_disc` (converged rows);
/// - (b) `bound_new ≥ bound_llp` (angle mode);
/// - (c) `bound_new ≥ -α²`;
/// - (d) angle mode: no eigenvalue below the essential threshold at 180°, at
///   least one for smaller angles;
/// - (e) lines mode: the optimizer reproduces the closed form, and at 90°
///   the ground energy is within 0.05 of `-α²/2`.
pub fn check_rows(params: &Params, rows: &[SweepRow]) -> Vec<Failure> {
    let alpha = params.alpha;
    let mut failures = Vec::new();
    for row in rows {
        let mut fail = |check: char, message: String| {
            failures.push(Failure {
                phi: row.phi,
                check,
                message,
            })
        };
        if row.converged && row.e_num < row.bound_new - params.tol_disc {
            fail(
                'a',
                format!(
                    "e_num {} below bound {} by more than {}",
                    row.e_num, row.bound_new, params.tol_disc
                ),
            );
        }
        if let Some(llp) = row.bound_llp {
            if row.bound_new < llp - 1e-12 * llp.abs() {
                fail(
                    'b',
                    format!("bound {} below LLP bound {llp}", row.bound_new),
                );
            }
        }
        if row.bound_new < -alpha * alpha {
            fail(
                'c',
                format!(
                    "bound {} below -alpha^2 = {}",
                    row.bound_new,
                    -alpha * alpha
                ),
            );
        }
        if let (Mode::Angle, Some(phi)) = (params.mode, row.phi) {
            let straight = (phi - std::f64::consts::PI).abs() < 1e-9;
            if straight && row.n_below_ess != 0 {
                fail(
                    'd',
                    format!(
                        "{} eigenvalues below the essential threshold at 180°",
                        row.n_below_ess
                    ),
                );
            }
            if !straight && row.n_below_ess == 0 {
                fail(
                    'd',
                    format!(
                        "no eigenvalue below {} at {:.4}°",
                        row.ess_threshold - params.tol_disc,
                        phi.to_degrees()
                    ),
                );
            }
        }
        if let (Mode::Lines, Some(phi), Some(closed)) = (params.mode, row.phi, row.bound_lines) {
            let unscaled = row.bound_new / params.bound_scale;
            if (unscaled - closed).abs() > BOUND_AGREEMENT * closed.abs() {
                fail(
                    'e',
                    format!("optimized bound {unscaled} differs from closed form {closed}"),
                );
            }
            let perpendicular = (phi - std::f64::consts::FRAC_PI_2).abs() < 1e-9;
            let exact = -alpha * alpha / 2.0;
            if perpendicular && row.converged && (row.e_num - exact).abs() > PERPENDICULAR_TOL {
                fail(
                    'e',
                    format!(
                        "e_num {} not within {PERPENDICULAR_TOL} of {exact}",
                        row.e_num
                    ),
                );
            }
        }
    }
    failures
}

pub fn cmd_verify(params: &Params, out: &mut dyn Write) -> Result<u8, CliError> {
    let rows = sweep_rows(params)?;
    write_outputs(params, &rows)?;
    let mut failures = check_rows(params, &rows);
    if params.convergence_study {
        let study = run_study(params.alpha, params.half_width, params.tol, &params.solver)?;
        print_study(&study, out)?;
        if !study.monotone() || study.measured_error() > params.tol_disc {
            failures.push(Failure {
                phi: Some(std::f64::consts::PI),
                check: 'f',
                message: format!(
                    "convergence study: monotone {}, measured error {} vs tol_disc {}",
                    study.monotone(),
                    study.measured_error(),
                    params.tol_disc
                ),
            });
        }
    }
    for row in &rows {
        let phi = row
            .phi
            .map(|p| format!("{:.4}°", p.to_degrees()))
            .unwrap_or_default();
        writeln!(
            out,
            "row {phi} bound {} e_num {} gap {} n_below_ess {} converged {}",
            format_float(row.bound_new),
            format_float(row.e_num),
            format_float(row.gap),
            row.n_below_ess,
            row.converged
        )?;
    }
    for f in &failures {
        let phi = f
            .phi
            .map(|p| format!("{:.4}°", p.to_degrees()))
            .unwrap_or_default();
        writeln!(out, "FAIL ({}) {phi}: {}", f.check, f.message)?;
    }
    if rows.iter().any(|r| !r.converged) {
        writeln!(out, "verify: solver did not converge on every row")?;
        return Ok(exit::NOT_CONVERGED);
    }
    if failures.is_empty() {
        writeln!(out, "verify: PASS ({} rows)", rows.len())?;
        Ok(exit::SUCCESS)
    } else {
        writeln!(out, "verify: FAIL ({} failures)", failures.len())?;
        Ok(exit::VERIFY_FAILED)
    }
}
