//! One row per opening angle: analytic bounds next to the discrete ground
//! energy, with CSV and plot-data output.

use std::io::{Read, Write};

use delta_wedge::discretization::{assemble, build_grid, DiscreteForm};
use delta_wedge::eigensolver::{count_below_by_inertia, count_below_with, lowest_eigenpairs_with};
use delta_wedge::geometry::RayConfig;
use delta_wedge::{
    angle_bound, angle_config, lines_bound, lines_config, llp_bound, star_bound, SolverError,
    SpectrumEstimate,
};

use crate::args::Mode;
use crate::params::Params;
use crate::CliError;

pub const CSV_HEADER: [&str; 11] = [
    "phi_rad",
    "bound_new",
    "bound_llp",
    "bound_lines",
    "e_num",
    "gap",
    "ess_threshold",
    "n_below_ess",
    "h",
    "L",
    "converged",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Opening angle; absent for star configurations.
    pub phi: Option<f64>,
    pub bound_new: f64,
    /// Angle mode only.
    pub bound_llp: Option<f64>,
    /// Lines mode only: the closed form, while `bound_new` comes from the
    /// general split optimizer.
    pub bound_lines: Option<f64>,
    pub e_num: f64,
    pub gap: f64,
    /// `-α²/4` for the strongest ray.
    pub ess_threshold: f64,
    /// Eigenvalues below `ess_threshold - tol_disc`.
    pub n_below_ess: usize,
    pub h: f64,
    pub half_width: f64,
    pub converged: bool,
}

/// The configuration for one angle together with its analytic bounds
/// `(config, bound_new, bound_llp, bound_lines)`.
pub fn bounds_for(
    params: &Params,
    phi: Option<f64>,
) -> Result<(RayConfig, f64, Option<f64>, Option<f64>), CliError> {
    let alpha = params.alpha;
    let out = match params.mode {
        Mode::Angle => {
            let phi = phi.expect("angle mode has an angle");
            (
                angle_config(phi, alpha)?,
                angle_bound(alpha, phi)?.bound,
                Some(llp_bound(alpha, phi)?),
                None,
            )
        }
        Mode::Lines => {
            let phi = phi.expect("lines mode has an angle");
            let config = lines_config(phi, alpha)?;
            let optimized = star_bound(&config)?.bound;
            (
                config,
                optimized,
                None,
                Some(lines_bound(alpha, phi)?.bound),
            )
        }
        Mode::Star => {
            let config = params.rays.clone().expect("star mode has rays");
            let bound = star_bound(&config)?.bound;
            (config, bound, None, None)
        }
    };
    Ok(out)
}

pub struct RowResult {
    pub row: SweepRow,
    pub spectrum: SpectrumEstimate,
    pub form: DiscreteForm,
}

pub fn compute_row(params: &Params, phi: Option<f64>) -> Result<RowResult, CliError> {
    let (config, bound_new, bound_llp, bound_lines) = bounds_for(params, phi)?;
    let bound_new = bound_new * params.bound_scale;
    let ess_threshold = -config.max_coupling().powi(2) / 4.0;
    let grid = build_grid(params.half_width, params.h)?;
    let form = assemble(&grid, &config);

    let spectrum = lowest_eigenpairs_with(&form, params.k, params.tol, &params.solver)?;
    let mut converged = spectrum.all_converged();
    let threshold = ess_threshold - params.tol_disc;
    let n_below_ess = match count_below_with(&form, threshold, params.tol, &params.solver) {
        Ok(n) => n,
        Err(SolverError::NotConverged { .. }) => {
            converged = false;
            count_below_by_inertia(&form, threshold)?
        }
        Err(e) => return Err(e.into()),
    };
    let e_num = spectrum.lowest();
    let row = SweepRow {
        phi,
        bound_new,
        bound_llp,
        bound_lines,
        e_num,
        gap: e_num - bound_new,
        ess_threshold,
        n_below_ess,
        h: params.h,
        half_width: params.half_width,
        converged,
    };
    Ok(RowResult {
        row,
        spectrum,
        form,
    })
}

/// Rows in ascending angle order.
pub fn run_sweep(params: &Params) -> Result<Vec<SweepRow>, CliError> {
    params
        .phis
        .iter()
        .map(|&phi| compute_row(params, Some(phi)).map(|r| r.row))
        .collect()
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn record(row: &SweepRow) -> [String; 11] {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    [
        opt(row.phi),
        format_float(row.bound_new),
        opt(row.bound_llp),
        opt(row.bound_lines),
        format_float(row.e_num),
        format_float(row.gap),
        format_float(row.ess_threshold),
        row.n_below_ess.to_string(),
        format_float(row.h),
        format_float(row.half_width),
        row.converged.to_string(),
    ]
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(record(row))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, CliError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Parse(format!("unexpected CSV header {header:?}")));
    }
    let bad = |field: &str, value: &str| CliError::Parse(format!("bad {field} value {value:?}"));
    let float = |r: &csv::StringRecord, i: usize| -> Result<f64, CliError> {
        r[i].parse().map_err(|_| bad(CSV_HEADER[i], &r[i]))
    };
    let optional = |r: &csv::StringRecord, i: usize| -> Result<Option<f64>, CliError> {
        if r[i].is_empty() {
            Ok(None)
        } else {
            float(r, i).map(Some)
        }
    };
    reader
        .records()
        .map(|rec| {
            let r = rec?;
            Ok(SweepRow {
                phi: optional(&r, 0)?,
                bound_new: float(&r, 1)?,
                bound_llp: optional(&r, 2)?,
                bound_lines: optional(&r, 3)?,
                e_num: float(&r, 4)?,
                gap: float(&r, 5)?,
                ess_threshold: float(&r, 6)?,
                n_below_ess: r[7].parse().map_err(|_| bad(CSV_HEADER[7], &r[7]))?,
                h: float(&r, 8)?,
                half_width: float(&r, 9)?,
                converged: r[10].parse().map_err(|_| bad(CSV_HEADER[10], &r[10]))?,
            })
        })
        .collect()
}

/// One block per curve, `# name` followed by `phi value` lines; blocks are
/// separated by a blank line.
pub fn write_plot_data<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    type Column = fn(&SweepRow) -> Option<f64>;
    let curves: [(&str, Column); 5] = [
        ("bound_new", |r| Some(r.bound_new)),
        ("bound_llp", |r| r.bound_llp),
        ("bound_lines", |r| r.bound_lines),
        ("e_num", |r| Some(r.e_num)),
        ("ess_threshold", |r| Some(r.ess_threshold)),
    ];
    let mut first = true;
    for (name, column) in curves {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.phi?, column(r)?)))
            .collect();
        if points.is_empty() {
            continue;
        }
        if !first {
            writeln!(out)?;
        }
        first = false;
        writeln!(out, "# {name}")?;
        for (phi, value) in points {
            writeln!(out, "{} {}", format_float(phi), format_float(value))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(phi: Option<f64>, e: f64) -> SweepRow {
        SweepRow {
            phi,
            bound_new: -0.3431457505076198,
            bound_llp: Some(-0.5),
            bound_lines: None,
            e_num: e,
            gap: e + 0.3431457505076198,
            ess_threshold: -0.25,
            n_below_ess: 1,
            h: 0.05,
            half_width: 20.0,
            converged: true,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[row(Some(1.0), -0.26)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "phi_rad,bound_new,bound_llp,bound_lines,e_num,gap,ess_threshold,n_below_ess,h,L,converged"
        );
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 11);
        assert_eq!(fields[0], "1.0000000000000000e0");
        assert_eq!(fields[3], "");
        assert_eq!(fields[7], "1");
        assert_eq!(fields[10], "true");
    }

    #[test]
    fn csv_rejects_foreign_files() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn plot_data_blocks() {
        let rows = [row(Some(0.5), -0.4), row(Some(1.0), -0.3), row(None, -1.0)];
        let mut buf = Vec::new();
        write_plot_data(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let blocks: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(blocks.len(), 4);
        assert!(blocks[0].starts_with("# bound_new\n"));
        assert_eq!(blocks[0].lines().count(), 3);
        assert!(!text.contains("bound_lines"));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            phi in proptest::option::of(1e-6f64..3.2),
            e in -10.0f64..0.0,
            llp in proptest::option::of(-1e3f64..0.0),
            lines in proptest::option::of(-1e3f64..0.0),
            tiny in -1e-300f64..1e-300,
            n in 0usize..1000,
            converged: bool,
        ) {
            let r = SweepRow {
                phi,
                bound_new: tiny,
                bound_llp: llp,
                bound_lines: lines,
                e_num: e,
                gap: e - tiny,
                ess_threshold: -0.25,
                n_below_ess: n,
                h: 0.1,
                half_width: 20.0,
                converged,
            };
            let mut buf = Vec::new();
            write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), 1);
            let b = &back[0];
            prop_assert_eq!(b.phi.map(f64::to_bits), r.phi.map(f64::to_bits));
            prop_assert_eq!(b.bound_new.to_bits(), r.bound_new.to_bits());
            prop_assert_eq!(b.e_num.to_bits(), r.e_num.to_bits());
            prop_assert_eq!(b.gap.to_bits(), r.gap.to_bits());
            prop_assert_eq!(b, &r);
        }
    }
}
