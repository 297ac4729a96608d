//! Merges the config file, command-line flags and defaults into validated
//! run parameters.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use delta_wedge::geometry::{Ray, RayConfig};
use delta_wedge::SolverOptions;

use crate::args::{Args, Mode};
use crate::CliError;

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
pub const DEFAULT_SPACING: f64 = 0.05;
pub const DEFAULT_K: usize = 1;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TOL_DISC: f64 = 0.02;
pub const SEED_ENV: &str = "DELTA_WEDGE_SEED";

/// Angles this close to π (or π/2 in lines mode) are taken as exact, so
/// that degree input hits the closed-form endpoints.
const ANGLE_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub mode: Mode,
    pub alpha: f64,
    /// Opening angles in radians, ascending (angle and lines modes).
    pub phis: Vec<f64>,
    pub rays: Option<RayConfig>,
    pub half_width: f64,
    pub h: f64,
    pub k: usize,
    pub tol: f64,
    pub tol_disc: f64,
    pub out: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
    pub dump_matrix: Option<PathBuf>,
    pub convergence_study: bool,
    pub bound_scale: f64,
    pub solver: SolverOptions,
}

/// Contents of a `key=value` config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub alpha: Option<f64>,
    pub phi_deg: Option<Vec<f64>>,
    pub half_width: Option<f64>,
    pub h: Option<f64>,
    pub k: Option<usize>,
    pub tol: Option<f64>,
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage(format!("config: cannot parse {key} = {value:?}")))
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let mut cfg = ConfigFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "alpha" => cfg.alpha = Some(parse_num(key, value)?),
            "phi_deg" => {
                cfg.phi_deg = Some(
                    value
                        .split(',')
                        .map(|v| parse_num(key, v.trim()))
                        .collect::<Result<_, _>>()?,
                )
            }
            "L" => cfg.half_width = Some(parse_num(key, value)?),
            "h" => cfg.h = Some(parse_num(key, value)?),
            "k" => cfg.k = Some(parse_num(key, value)?),
            "tol" => cfg.tol = Some(parse_num(key, value)?),
            "mode" => {
                cfg.mode = Some(
                    Mode::from_str(value, true)
                        .map_err(|_| usage(format!("config: unknown mode {value:?}")))?,
                )
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => return Err(usage(format!("config: unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

fn parse_rays(specs: &[String]) -> Result<RayConfig, CliError> {
    let rays = specs
        .iter()
        .map(|s| {
            let (deg, coupling) = s
                .split_once(':')
                .ok_or_else(|| usage(format!("ray {s:?}: expected DEG:COUPLING")))?;
            let deg: f64 = deg
                .trim()
                .parse()
                .map_err(|_| usage(format!("ray {s:?}: bad angle")))?;
            let coupling: f64 = coupling
                .trim()
                .parse()
                .map_err(|_| usage(format!("ray {s:?}: bad coupling")))?;
            Ok(Ray::new(deg.to_radians(), coupling))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(RayConfig::new(rays)?)
}

fn inclusive_range(values: &[f64]) -> Result<Vec<f64>, CliError> {
    let (start, end, step) = (values[0], values[1], values[2]);
    if !(step > 0.0 && start <= end && start.is_finite() && end.is_finite()) {
        return Err(usage("--phi-range-deg needs START <= END and STEP > 0"));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn snap(phi: f64, target: f64) -> f64 {
    if (phi - target).abs() < ANGLE_SNAP {
        target
    } else {
        phi
    }
}

pub fn seed_from_env(value: Option<&str>) -> Result<u64, CliError> {
    match value {
        None => Ok(delta_wedge::eigensolver::DEFAULT_SEED),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
    }
}

/// Resolves parameters: flags override the config file, which overrides
/// the defaults.
pub fn resolve(args: &Args, env_seed: Option<&str>) -> Result<Params, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ConfigFile::default(),
    };

    let mode = args
        .mode
        .or(file.mode)
        .ok_or_else(|| usage("a mode is required: angle, lines or star"))?;
    let alpha = args.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(usage(format!("alpha = {alpha} must be positive")));
    }

    let mut phis: Vec<f64> = if !args.phi_deg.is_empty() {
        args.phi_deg.iter().map(|d| d.to_radians()).collect()
    } else if !args.phi_rad.is_empty() {
        args.phi_rad.clone()
    } else if !args.phi_range_deg.is_empty() {
        inclusive_range(&args.phi_range_deg)?
            .into_iter()
            .map(f64::to_radians)
            .collect()
    } else {
        file.phi_deg
            .unwrap_or_default()
            .into_iter()
            .map(f64::to_radians)
            .collect()
    };
    let (upper, range) = match mode {
        Mode::Lines => (FRAC_PI_2, "(0°, 90°]"),
        _ => (PI, "(0°, 180°]"),
    };
    for phi in &mut phis {
        *phi = snap(*phi, upper);
        if !(*phi > 0.0 && *phi <= upper) {
            return Err(usage(format!(
                "opening angle {}° outside {range}",
                phi.to_degrees()
            )));
        }
    }
    phis.sort_by(f64::total_cmp);
    phis.dedup();

    let rays = match mode {
        Mode::Star => {
            if args.rays.is_empty() {
                return Err(usage("star mode needs --rays DEG:COUPLING,..."));
            }
            Some(parse_rays(&args.rays)?)
        }
        _ if !args.rays.is_empty() => return Err(usage("--rays is only used in star mode")),
        _ => None,
    };
    if mode != Mode::Star && phis.is_empty() {
        return Err(usage(
            "an opening angle is required (--phi-deg, --phi-rad or --phi-range-deg)",
        ));
    }

    let half_width = args
        .half_width
        .or(file.half_width)
        .unwrap_or(DEFAULT_HALF_WIDTH);
    let h = args.h.or(file.h).unwrap_or(DEFAULT_SPACING);
    let k = args.k.or(file.k).unwrap_or(DEFAULT_K);
    let tol = args.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
    let tol_disc = args.tol_disc.unwrap_or(DEFAULT_TOL_DISC);
    if !(1..=delta_wedge::eigensolver::MAX_EIGENPAIRS).contains(&k) {
        return Err(usage(format!("k = {k} outside 1..=20")));
    }
    if !(delta_wedge::eigensolver::MIN_TOLERANCE..=delta_wedge::eigensolver::MAX_TOLERANCE)
        .contains(&tol)
    {
        return Err(usage(format!("tol = {tol} outside [1e-12, 1e-4]")));
    }
    if !(tol_disc.is_finite() && tol_disc >= 0.0) {
        return Err(usage(format!("tol-disc = {tol_disc} must be non-negative")));
    }
    let bound_scale = args.fault_bound_scale.unwrap_or(1.0);
    if !(bound_scale.is_finite() && bound_scale > 0.0) {
        return Err(usage(format!("bound scale {bound_scale} must be positive")));
    }

    Ok(Params {
        mode,
        alpha,
        phis,
        rays,
        half_width,
        h,
        k,
        tol,
        tol_disc,
        out: args.out.clone().or(file.out),
        plot_data: args.plot_data.clone(),
        dump_matrix: args.dump_matrix.clone(),
        convergence_study: args.convergence_study,
        bound_scale,
        solver: SolverOptions {
            seed: seed_from_env(env_seed)?,
            max_applications: args
                .max_applications
                .unwrap_or(delta_wedge::eigensolver::DEFAULT_MAX_APPLICATIONS),
            ..SolverOptions::default()
        },
    })
}
