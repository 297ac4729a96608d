//! Finite-difference version of the quadratic form
//! `‖∇f‖² - Σ_i α_i ‖f|_{ray i}‖²` on the box `[-L, L]²` with zero boundary
//! values.
//!
//! The gradient term is the 5-point graph Laplacian `K` (`fᵀKf` is the sum
//! of squared differences over grid edges, including edges to the boundary).
//! The trace on each ray is sampled at arclengths `(j + ½)h` by bilinear
//! interpolation and integrated with the midpoint rule, giving a positive
//! semidefinite matrix `T_i`. The discrete eigenproblem is
//!
//! ```text
//! (K - Σ_i α_i h T_i) v = λ h² v.
//! ```

use std::io::{self, Write};

use thiserror::Error;

use crate::geometry::{Ray, RayConfig};
use crate::sparse::SymmetricCsr;

/// Default limit on the number of unknowns `n²`.
pub const DEFAULT_MAX_UNKNOWNS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizationError {
    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("grid needs {unknowns} unknowns, above the cap of {cap}")]
    TooLarge { unknowns: usize, cap: usize },
    #[error("expected {expected} couplings, got {got}")]
    CouplingCount { expected: usize, got: usize },
    #[error("coupling {index} is {value}; couplings must be finite and non-negative")]
    BadCoupling { index: usize, value: f64 },
    #[error("vector has {got} entries, grid has {expected} unknowns")]
    Length { expected: usize, got: usize },
    #[error("the zero vector has no Rayleigh quotient")]
    ZeroVector,
}

/// Uniform grid on `[-L, -L + (n+1)h]²`. Lattice indices run over `0..=n+1`
/// per axis; `0` and `n+1` are Dirichlet nodes and carry no unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    spacing: f64,
    n: usize,
}

pub fn build_grid(half_width: f64, spacing: f64) -> Result<Grid, DiscretizationError> {
    build_grid_with_cap(half_width, spacing, DEFAULT_MAX_UNKNOWNS)
}

pub fn build_grid_with_cap(
    half_width: f64,
    spacing: f64,
    cap: usize,
) -> Result<Grid, DiscretizationError> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(DiscretizationError::Domain {
            name: "L",
            value: half_width,
            range: "(0, ∞)",
        });
    }
    if !(spacing > 0.0 && spacing < half_width) {
        return Err(DiscretizationError::Domain {
            name: "h",
            value: spacing,
            range: "(0, L)",
        });
    }
    // guard against 2L/h landing a hair below an integer
    let cells = (2.0 * half_width / spacing * (1.0 + 4.0 * f64::EPSILON)).floor();
    if cells < 4.0 {
        return Err(DiscretizationError::Domain {
            name: "h",
            value: spacing,
            range: "(0, L/2] (at least 3 interior nodes per axis)",
        });
    }
    let n = cells as usize - 1;
    let unknowns = n.saturating_mul(n);
    if unknowns > cap {
        return Err(DiscretizationError::TooLarge { unknowns, cap });
    }
    Ok(Grid {
        half_width,
        spacing,
        n,
    })
}

impl Grid {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Interior nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unknowns(&self) -> usize {
        self.n * self.n
    }

    /// Coordinate of lattice line `i` (`0..=n+1`).
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    /// Upper edge of the box, `-L + (n+1)h`; equals `L` when `2L/h` is an
    /// integer.
    pub fn upper(&self) -> f64 {
        self.coordinate(self.n + 1)
    }

    /// Unknown index of interior lattice node `(i, j)`, row-major in `j`.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        let interior = 1..=self.n;
        (interior.contains(&i) && interior.contains(&j)).then(|| (j - 1) * self.n + (i - 1))
    }

    /// Lattice coordinates `(i, j)` of unknown `p`.
    pub fn lattice(&self, p: usize) -> (usize, usize) {
        (p % self.n + 1, p / self.n + 1)
    }

    pub fn position(&self, p: usize) -> (f64, f64) {
        let (i, j) = self.lattice(p);
        (self.coordinate(i), self.coordinate(j))
    }

    /// Image of unknown `p` under the reflection `y ↦ -y` (`j ↦ n+1-j`).
    pub fn reflect_y(&self, p: usize) -> usize {
        let (i, j) = self.lattice(p);
        self.index(i, self.n + 1 - j)
            .expect("reflection stays interior")
    }

    /// Values of `f` at every unknown.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.unknowns())
            .map(|p| {
                let (x, y) = self.position(p);
                f(x, y)
            })
            .collect()
    }
}

/// One quadrature point on a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub arclength: f64,
    /// Arclength weight `w_j` (the midpoint rule gives `h`).
    pub weight: f64,
    /// Interior nodes of the enclosing cell with their bilinear weights;
    /// Dirichlet corners are dropped.
    pub stencil: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceQuadrature {
    pub ray_index: usize,
    /// Distance from the origin to where the ray leaves the box.
    pub length_inside: f64,
    pub samples: Vec<TraceSample>,
}

impl TraceQuadrature {
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// `∫ |f|² ds` along the ray, approximated.
    pub fn integrate_squared(&self, f: &[f64]) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let v: f64 = s.stencil.iter().map(|&(p, b)| b * f[p]).sum();
                s.weight * v * v
            })
            .sum()
    }
}

/// Distance along `dir` from the origin to the boundary of `[lo, hi]²`.
fn exit_distance(lo: f64, hi: f64, dir: (f64, f64)) -> f64 {
    let axis = |d: f64| {
        if d > 1e-15 {
            hi / d
        } else if d < -1e-15 {
            lo / d
        } else {
            f64::INFINITY
        }
    };
    axis(dir.0).min(axis(dir.1))
}

pub fn trace_quadrature(grid: &Grid, ray_index: usize, ray: &Ray) -> TraceQuadrature {
    let h = grid.spacing();
    let lo = grid.coordinate(0);
    let hi = grid.upper();
    let dir = ray.direction();
    let length_inside = if lo < 0.0 && hi > 0.0 {
        exit_distance(lo, hi, dir)
    } else {
        0.0
    };

    let mut samples = Vec::new();
    let mut j = 0usize;
    loop {
        let s = (j as f64 + 0.5) * h;
        if s >= length_inside {
            break;
        }
        let (x, y) = (s * dir.0, s * dir.1);
        let u = (x - lo) / h;
        let v = (y - lo) / h;
        let (i0, j0) = (u.floor(), v.floor());
        let (fx, fy) = (u - i0, v - j0);
        let (i0, j0) = (i0 as usize, j0 as usize);
        let corners = [
            (i0, j0, (1.0 - fx) * (1.0 - fy)),
            (i0 + 1, j0, fx * (1.0 - fy)),
            (i0, j0 + 1, (1.0 - fx) * fy),
            (i0 + 1, j0 + 1, fx * fy),
        ];
        let stencil = corners
            .into_iter()
            .filter(|&(_, _, b)| b > 0.0)
            .filter_map(|(i, j, b)| grid.index(i, j).map(|p| (p, b)))
            .collect();
        samples.push(TraceSample {
            arclength: s,
            weight: h,
            stencil,
        });
        j += 1;
    }
    TraceQuadrature {
        ray_index,
        length_inside,
        samples,
    }
}

/// 5-point stiffness: 4 on the diagonal, -1 for each interior neighbour.
pub fn stiffness_matrix(grid: &Grid) -> SymmetricCsr {
    let n = grid.n();
    let dim = n * n;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col_idx = Vec::with_capacity(5 * dim);
    let mut values = Vec::with_capacity(5 * dim);
    row_ptr.push(0);
    for p in 0..dim {
        let (i, j) = (p % n, p / n);
        if j > 0 {
            col_idx.push(p - n);
            values.push(-1.0);
        }
        if i > 0 {
            col_idx.push(p - 1);
            values.push(-1.0);
        }
        col_idx.push(p);
        values.push(4.0);
        if i + 1 < n {
            col_idx.push(p + 1);
            values.push(-1.0);
        }
        if j + 1 < n {
            col_idx.push(p + n);
            values.push(-1.0);
        }
        row_ptr.push(col_idx.len());
    }
    SymmetricCsr::from_raw(dim, row_ptr, col_idx, values)
}

/// `T = Σ_j (w_j / h) b_j b_jᵀ` for one ray.
pub fn trace_matrix(grid: &Grid, quadrature: &TraceQuadrature) -> SymmetricCsr {
    let h = grid.spacing();
    let mut triplets = Vec::new();
    for sample in &quadrature.samples {
        let scale = sample.weight / h;
        for &(p, bp) in &sample.stencil {
            for &(q, bq) in &sample.stencil {
                triplets.push((p, q, scale * bp * bq));
            }
        }
    }
    SymmetricCsr::from_triplets(grid.unknowns(), triplets)
}

/// Assembled discrete form. Immutable; variants with other couplings or a
/// diagonal energy shift are derived copies.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    grid: Grid,
    rays: Vec<Ray>,
    couplings: Vec<f64>,
    shift: f64,
    stiffness: SymmetricCsr,
    quadratures: Vec<TraceQuadrature>,
    traces: Vec<SymmetricCsr>,
    operator: SymmetricCsr,
}

pub fn assemble(grid: &Grid, config: &RayConfig) -> DiscreteForm {
    let stiffness = stiffness_matrix(grid);
    let quadratures: Vec<TraceQuadrature> = config
        .rays()
        .iter()
        .enumerate()
        .map(|(i, ray)| trace_quadrature(grid, i, ray))
        .collect();
    let traces = quadratures.iter().map(|q| trace_matrix(grid, q)).collect();
    let mut form = DiscreteForm {
        grid: *grid,
        rays: config.rays().to_vec(),
        couplings: config.couplings(),
        shift: 0.0,
        operator: SymmetricCsr::zeros(0),
        stiffness,
        quadratures,
        traces,
    };
    form.rebuild_operator();
    form
}

impl DiscreteForm {
    fn rebuild_operator(&mut self) {
        let h = self.grid.spacing();
        let mut op = self.stiffness.clone();
        for (trace, &alpha) in self.traces.iter().zip(&self.couplings) {
            if alpha != 0.0 && trace.nnz() > 0 {
                op = op.add_scaled(trace, -alpha * h);
            }
        }
        if self.shift != 0.0 {
            op = op.with_diagonal_shift(self.shift * h * h);
        }
        self.operator = op;
    }

    /// Same geometry with per-ray couplings replaced; zero couplings are
    /// allowed here (the ray then has no effect).
    pub fn with_couplings(&self, couplings: &[f64]) -> Result<Self, DiscretizationError> {
        if couplings.len() != self.rays.len() {
            return Err(DiscretizationError::CouplingCount {
                expected: self.rays.len(),
                got: couplings.len(),
            });
        }
        if let Some((index, &value)) = couplings
            .iter()
            .enumerate()
            .find(|(_, &c)| !(c.is_finite() && c >= 0.0))
        {
            return Err(DiscretizationError::BadCoupling { index, value });
        }
        let mut out = self.clone();
        out.couplings = couplings.to_vec();
        out.rebuild_operator();
        Ok(out)
    }

    /// Adds `shift` (an energy) to every eigenvalue.
    pub fn with_shift(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.shift = shift;
        out.rebuild_operator();
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Rays with the couplings currently in effect.
    pub fn rays(&self) -> Vec<Ray> {
        self.rays
            .iter()
            .zip(&self.couplings)
            .map(|(r, &c)| Ray::new(r.angle, c))
            .collect()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.grid.unknowns()
    }

    /// Area per node, `h²`.
    pub fn mass(&self) -> f64 {
        self.grid.spacing() * self.grid.spacing()
    }

    pub fn stiffness(&self) -> &SymmetricCsr {
        &self.stiffness
    }

    pub fn trace(&self, ray: usize) -> &SymmetricCsr {
        &self.traces[ray]
    }

    pub fn quadrature(&self, ray: usize) -> &TraceQuadrature {
        &self.quadratures[ray]
    }

    /// `K - Σ_i α_i h T_i + s h² I`, dimensionless.
    pub fn operator(&self) -> &SymmetricCsr {
        &self.operator
    }

    /// Discrete Rayleigh quotient in energy units.
    pub fn form_value(&self, f: &[f64]) -> Result<f64, DiscretizationError> {
        if f.len() != self.dim() {
            return Err(DiscretizationError::Length {
                expected: self.dim(),
                got: f.len(),
            });
        }
        let norm2: f64 = f.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            return Err(DiscretizationError::ZeroVector);
        }
        Ok(self.operator.quad_form(f) / (self.mass() * norm2))
    }

    /// Header `n nnz h L` followed by the lower triangle of the operator.
    pub fn write_matrix<W: Write>(&self, out: W) -> io::Result<()> {
        let header = format!(
            "{} {} {} {}",
            self.dim(),
            self.operator.lower_nnz(),
            self.grid.spacing(),
            self.grid.half_width()
        );
        self.operator.write_coordinate(out, &header)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angle_config, lines_config};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_sizes() {
        assert_eq!(build_grid(1.0, 0.2).unwrap().n(), 9);
        let g = build_grid(1.0, 0.5).unwrap();
        assert_eq!((g.n(), g.unknowns()), (3, 9));
        let g = build_grid(20.0, 0.05).unwrap();
        assert_eq!(g.n(), 799);
        assert_eq!(g.unknowns(), 638_401);
        assert_eq!(build_grid(1.0, 0.3).unwrap().n(), 5);
        assert_eq!(build_grid(2.0, 0.3).unwrap().n(), 12);
        assert_eq!(build_grid(10.0, 0.05).unwrap().n(), 399);
        assert_eq!(build_grid(20.0, 0.1).unwrap().n(), 399);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_grid(0.0, 0.1).is_err());
        assert!(build_grid(1.0, 0.0).is_err());
        assert!(build_grid(1.0, -0.1).is_err());
        assert!(build_grid(1.0, 0.6).is_err());
        assert!(build_grid(1.0, 1.5).is_err());
        assert!(matches!(
            build_grid_with_cap(20.0, 0.05, 1000),
            Err(DiscretizationError::TooLarge {
                unknowns: 638_401,
                cap: 1000
            })
        ));
        assert!(matches!(
            build_grid(1000.0, 0.1),
            Err(DiscretizationError::TooLarge { .. })
        ));
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = build_grid(2.0, 0.3).unwrap();
        for p in 0..g.unknowns() {
            let (i, j) = g.lattice(p);
            assert_eq!(g.index(i, j), Some(p));
        }
        assert_eq!(g.index(0, 3), None);
        assert_eq!(g.index(3, g.n() + 1), None);
        assert_abs_diff_eq!(g.position(0).0, -2.0 + 0.3, epsilon = 1e-15);
    }

    fn small_grid() -> Grid {
        build_grid(1.0, 0.5).unwrap()
    }

    #[test]
    fn axis_ray_quadrature_by_hand() {
        let g = small_grid();
        let q = trace_quadrature(&g, 0, &Ray::new(0.0, 1.0));
        assert_abs_diff_eq!(q.length_inside, 1.0, epsilon = 1e-15);
        let s: Vec<f64> = q.samples.iter().map(|s| s.arclength).collect();
        assert_eq!(s, vec![0.25, 0.75]);
        assert!(q.samples.iter().all(|s| s.weight == 0.5));
        // nodes on y = 0 are lattice j = 2; x = 0 and x = 0.5 are i = 2, 3
        let center = g.index(2, 2).unwrap();
        let right = g.index(3, 2).unwrap();
        assert_eq!(q.samples[0].stencil, vec![(center, 0.5), (right, 0.5)]);
        // the second sample straddles x = 0.5 and the boundary x = 1
        assert_eq!(q.samples[1].stencil, vec![(right, 0.5)]);
    }

    #[test]
    fn diagonal_ray_quadrature_by_hand() {
        let g = small_grid();
        let q = trace_quadrature(&g, 0, &Ray::new(PI / 4.0, 1.0));
        assert_abs_diff_eq!(q.length_inside, 2f64.sqrt(), epsilon = 1e-14);
        let s: Vec<f64> = q.samples.iter().map(|s| s.arclength).collect();
        assert_eq!(s, vec![0.25, 0.75, 1.25]);
        assert!(q.samples.iter().all(|s| s.weight == 0.5));
        // first sample at (0.177, 0.177): cell [0, 0.5]², u = v = 0.354
        let f = 0.25 / 2f64.sqrt() / 0.5;
        let st = &q.samples[0].stencil;
        assert_eq!(st.len(), 4);
        assert_abs_diff_eq!(st[0].1, (1.0 - f) * (1.0 - f), epsilon = 1e-14);
        assert_abs_diff_eq!(st[3].1, f * f, epsilon = 1e-14);
        // last sample's cell touches the boundary: only (0.5, 0.5) survives
        let last = &q.samples[2].stencil;
        assert_eq!(last.len(), 1);
        assert_eq!(last[0].0, g.index(3, 3).unwrap());
    }

    #[test]
    fn stencil_weights_are_convex() {
        let g = build_grid(3.0, 0.17).unwrap();
        for angle in [0.0, 0.3, 1.0, PI / 2.0, 2.5, PI, 4.0, 5.9] {
            let q = trace_quadrature(&g, 0, &Ray::new(angle, 1.0));
            assert!((q.total_weight() - q.length_inside).abs() <= g.spacing());
            for (k, s) in q.samples.iter().enumerate() {
                let total: f64 = s.stencil.iter().map(|(_, b)| b).sum();
                assert!(s.stencil.iter().all(|&(_, b)| (0.0..=1.0).contains(&b)));
                if k + 2 < q.samples.len() {
                    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                } else {
                    assert!(total <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn stiffness_pattern() {
        let g = build_grid(2.0, 0.3).unwrap();
        let k = stiffness_matrix(&g);
        assert_eq!(k.asymmetry(), 0.0);
        let center = g.index(5, 5).unwrap();
        let row: Vec<(usize, f64)> = k.row(center).collect();
        assert_eq!(row.len(), 5);
        assert_eq!(k.get(center, center), 4.0);
        assert_eq!(k.get(center, center + 1), -1.0);
        assert_eq!(k.get(center, center + g.n()), -1.0);
        // corner node: two interior neighbours
        assert_eq!(k.row(0).count(), 3);
    }

    #[test]
    fn indicator_far_from_rays() {
        let g = build_grid(4.0, 0.25).unwrap();
        let form = assemble(&g, &angle_config(PI, 1.0).unwrap());
        let mut f = vec![0.0; g.unknowns()];
        let p = g.index(2, 3).unwrap();
        f[p] = 1.0;
        let h = g.spacing();
        assert_abs_diff_eq!(form.form_value(&f).unwrap(), 4.0 / (h * h), epsilon = 1e-12);
    }

    #[test]
    fn form_value_errors() {
        let g = build_grid(2.0, 0.3).unwrap();
        let form = assemble(&g, &angle_config(PI, 1.0).unwrap());
        assert_eq!(
            form.form_value(&vec![0.0; g.unknowns()]),
            Err(DiscretizationError::ZeroVector)
        );
        assert!(matches!(
            form.form_value(&[1.0]),
            Err(DiscretizationError::Length { .. })
        ));
    }

    #[test]
    fn constant_is_positive_without_coupling() {
        let g = build_grid(2.0, 0.2).unwrap();
        let form = assemble(&g, &angle_config(PI / 2.0, 1.0).unwrap())
            .with_couplings(&[0.0, 0.0])
            .unwrap();
        let f = vec![1.0; g.unknowns()];
        assert!(form.form_value(&f).unwrap() > 0.0);
    }

    #[test]
    fn line_ground_profile_is_bound() {
        // e^{-|x|/2} across the line x = 0, slowly varying along it
        let g = build_grid(20.0, 0.05).unwrap();
        let form = assemble(&g, &angle_config(PI, 1.0).unwrap());
        let l = g.half_width();
        let f = g.sample(|x, y| (-x.abs() / 2.0).exp() * (PI * y / (2.0 * l)).cos());
        let value = form.form_value(&f).unwrap();
        assert!(value <= -0.2, "{value}");
        assert!(value >= -0.26, "{value}");
    }

    #[test]
    fn trace_integrates_squared_values() {
        let g = build_grid(5.0, 0.1).unwrap();
        let cfg = angle_config(PI / 3.0, 1.0).unwrap();
        let form = assemble(&g, &cfg);
        let f = g.sample(|x, y| (-(x * x + y * y) / 4.0).exp());
        // ∫_0^∞ e^{-s²/2} ds = sqrt(π/2)
        let exact = (PI / 2.0).sqrt();
        let q = form.quadrature(0).integrate_squared(&f);
        assert_abs_diff_eq!(q, exact, epsilon = 0.02);
        let h = g.spacing();
        assert_abs_diff_eq!(h * form.trace(0).quad_form(&f), q, epsilon = 1e-12);
    }

    #[test]
    fn operator_reflection_symmetry() {
        let g = build_grid(3.0, 0.2).unwrap();
        let form = assemble(&g, &angle_config(PI / 3.0, 1.0).unwrap());
        let op = form.operator();
        assert!(op.asymmetry() < 1e-15);
        let mut worst: f64 = 0.0;
        for p in 0..g.unknowns() {
            for (q, v) in op.row(p) {
                let mirrored = op.get(g.reflect_y(p), g.reflect_y(q));
                worst = worst.max((v - mirrored).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn scaling_relabels_the_same_matrix() {
        let a = assemble(
            &build_grid(5.0, 0.125).unwrap(),
            &lines_config(1.0, 2.0).unwrap(),
        );
        let b = assemble(
            &build_grid(10.0, 0.25).unwrap(),
            &lines_config(1.0, 1.0).unwrap(),
        );
        assert_eq!(a.dim(), b.dim());
        let (oa, ob) = (a.operator(), b.operator());
        assert_eq!(oa.nnz(), ob.nnz());
        let diff = oa.add_scaled(ob, -1.0).inf_norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn matrix_dump_format() {
        let g = build_grid(1.0, 0.2).unwrap();
        let form = assemble(&g, &angle_config(PI, 1.0).unwrap());
        let mut buf = Vec::new();
        form.write_matrix(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(' ').collect();
        assert_eq!(header[0], "81");
        let nnz: usize = header[1].parse().unwrap();
        assert_eq!(header[2..], ["0.2", "1"]);
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), nnz);
        for line in body {
            let parts: Vec<&str> = line.split(' ').collect();
            let (r, c): (usize, usize) = (parts[0].parse().unwrap(), parts[1].parse().unwrap());
            assert!(r >= c);
            let v: f64 = parts[2].parse().unwrap();
            assert_eq!(v, form.operator().get(r, c));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn trace_is_positive_semidefinite(angle in 0.0f64..std::f64::consts::TAU, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let g = build_grid(2.0, 0.13).unwrap();
            let q = trace_quadrature(&g, 0, &Ray::new(angle, 1.0));
            let t = trace_matrix(&g, &q);
            prop_assert!(t.asymmetry() < 1e-15);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..64 {
                let f: Vec<f64> = (0..g.unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
                prop_assert!(t.quad_form(&f) >= -1e-12);
            }
        }

        #[test]
        fn quadrature_covers_the_ray(angle in 0.0f64..std::f64::consts::TAU, h in 0.05f64..0.4) {
            let g = build_grid(2.0, h).unwrap();
            let q = trace_quadrature(&g, 0, &Ray::new(angle, 1.0));
            prop_assert!((q.total_weight() - q.length_inside).abs() <= h / 2.0 + 1e-12);
            prop_assert!(q.samples.iter().all(|s| s.weight > 0.0));
        }
    }
}
