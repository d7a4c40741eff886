//! Problem generators: the explicit 6x4 Tanabe system with known solution
//! structure, and a parallel-beam tomography setup (projection matrix, head
//! phantom, sinogram).

use crate::exec;
use crate::linalg::{row_norms_squared, DenseMatrix, Vector, ZERO_ROW_THRESHOLD};

/// A linear system plus whatever solution structure is known.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: Vector,
    /// A known test solution, when one exists.
    pub x_star: Option<Vector>,
    /// Basis of `N(A)`, when known.
    pub nullspace_basis: Option<Vec<Vector>>,
    pub label: String,
}

/// Parallel-beam scan description. The image is `grid x grid` unit pixels
/// centered at the origin; rays of one angle are parallel, equally spaced
/// across `detector_span` (in pixel units), and the fan is centered on the
/// image center.
#[derive(Debug, Clone, Copy)]
pub struct ScanGeometry {
    pub n_angles: usize,
    pub n_rays: usize,
    pub grid: usize,
    pub detector_span: f64,
    /// Angles cover `[0, 2pi)` instead of the default `[0, pi)`. Opposing
    /// parallel-beam views duplicate information, so the default is the
    /// half circle.
    pub full_circle: bool,
}

impl ScanGeometry {
    /// Default detector span `sqrt(2) * grid` (the circumscribed width), half
    /// circle coverage.
    pub fn new(n_angles: usize, n_rays: usize, grid: usize) -> Self {
        ScanGeometry {
            n_angles,
            n_rays,
            grid,
            detector_span: std::f64::consts::SQRT_2 * grid as f64,
            full_circle: false,
        }
    }

    pub fn with_span(mut self, span: f64) -> Self {
        self.detector_span = span;
        self
    }

    pub fn with_full_circle(mut self, full: bool) -> Self {
        self.full_circle = full;
        self
    }

    pub fn ray_count(&self) -> usize {
        self.n_angles * self.n_rays
    }

    pub fn pixel_count(&self) -> usize {
        self.grid * self.grid
    }

    /// Angle of view `t` in radians.
    pub fn angle(&self, t: usize) -> f64 {
        let arc = if self.full_circle {
            2.0 * std::f64::consts::PI
        } else {
            std::f64::consts::PI
        };
        arc * t as f64 / self.n_angles as f64
    }

    /// Signed detector offset of ray `r` within a view.
    pub fn offset(&self, r: usize) -> f64 {
        if self.n_rays <= 1 {
            0.0
        } else {
            (r as f64 - (self.n_rays as f64 - 1.0) / 2.0) * self.detector_span
                / (self.n_rays as f64 - 1.0)
        }
    }
}

/// Grayscale image on a square grid, pixels row-major, top row first.
#[derive(Debug, Clone)]
pub struct PhantomImage {
    pub grid: usize,
    pub pixels: Vector,
}

/// The 6x4 consistent over-determined test system. `x_star = (1,1,1,1)` and
/// the nullspace is spanned by `(-2/3, 1, -2/3, 1)`.
pub fn tanabe_problem() -> ProblemInstance {
    let a = DenseMatrix::from_rows(&[
        &[1.0, 3.0, 2.0, -1.0],
        &[1.0, 2.0, -1.0, -2.0],
        &[1.0, -1.0, 2.0, 3.0],
        &[2.0, 1.0, 1.0, 1.0],
        &[5.0, 5.0, 4.0, 1.0],
        &[4.0, -1.0, 5.0, 7.0],
    ]);
    let b = Vector::from_vec(vec![5.0, 0.0, 5.0, 5.0, 15.0, 15.0]);
    let x_star = Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
    let xi = Vector::from_vec(vec![-2.0 / 3.0, 1.0, -2.0 / 3.0, 1.0]);
    ProblemInstance {
        a,
        b,
        x_star: Some(x_star),
        nullspace_basis: Some(vec![xi]),
        label: "tanabe".to_string(),
    }
}

/// One projection-matrix row: Euclidean intersection lengths of the ray with
/// every pixel square, by parametric line-grid traversal.
fn trace_ray(g: &ScanGeometry, view: usize, ray: usize) -> Vec<f64> {
    let grid = g.grid;
    let half = grid as f64 / 2.0;
    let theta = g.angle(view);
    // snap roundoff-sized components so axis-parallel rays are exactly
    // axis-parallel (sin(pi) is ~1e-16, which would drift boundary rays
    // across pixel rows)
    let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let dir = [snap(theta.cos()), snap(theta.sin())];
    let normal = [snap(-theta.sin()), snap(theta.cos())];
    let off = g.offset(ray);
    let origin = [off * normal[0], off * normal[1]];

    let mut row = vec![0.0; grid * grid];

    // clip the parameter range to the image square
    let mut s_min = f64::NEG_INFINITY;
    let mut s_max = f64::INFINITY;
    for dim in 0..2 {
        if dir[dim].abs() < 1e-14 {
            if origin[dim].abs() > half {
                return row; // parallel to the slab and outside it
            }
        } else {
            let s1 = (-half - origin[dim]) / dir[dim];
            let s2 = (half - origin[dim]) / dir[dim];
            s_min = s_min.max(s1.min(s2));
            s_max = s_max.min(s1.max(s2));
        }
    }
    if s_min >= s_max {
        return row;
    }

    // every gridline crossing inside the clipped range
    let mut crossings = Vec::with_capacity(2 * grid + 4);
    crossings.push(s_min);
    crossings.push(s_max);
    for dim in 0..2 {
        if dir[dim].abs() < 1e-14 {
            continue;
        }
        for line in 0..=grid {
            let coord = -half + line as f64;
            let s = (coord - origin[dim]) / dir[dim];
            if s > s_min && s < s_max {
                crossings.push(s);
            }
        }
    }
    crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());

    for w in crossings.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let len = s1 - s0;
        if len < 1e-14 {
            continue; // corner sliver
        }
        let mid = 0.5 * (s0 + s1);
        let px = origin[0] + mid * dir[0];
        let py = origin[1] + mid * dir[1];
        let cx = (px + half).floor() as isize;
        let cy = (py + half).floor() as isize;
        if cx < 0 || cy < 0 || cx >= grid as isize || cy >= grid as isize {
            continue;
        }
        // top image row holds the largest y
        let row_img = grid - 1 - cy as usize;
        row[row_img * grid + cx as usize] += len;
    }
    row
}

/// Assembles the projection matrix, one row per (view, ray) pair in
/// view-major order. All-zero rows (rays missing the image) are kept.
pub fn build_projection_matrix(g: &ScanGeometry) -> DenseMatrix {
    assert!(g.grid >= 1 && g.n_rays >= 1 && g.n_angles >= 1);
    let rows = exec::map_indices(g.ray_count(), |k| trace_ray(g, k / g.n_rays, k % g.n_rays));
    collect_rows(g, rows)
}

/// Single-threaded variant of [`build_projection_matrix`].
pub fn build_projection_matrix_seq(g: &ScanGeometry) -> DenseMatrix {
    assert!(g.grid >= 1 && g.n_rays >= 1 && g.n_angles >= 1);
    let rows = exec::map_indices_seq(g.ray_count(), |k| trace_ray(g, k / g.n_rays, k % g.n_rays));
    collect_rows(g, rows)
}

fn collect_rows(g: &ScanGeometry, rows: Vec<Vec<f64>>) -> DenseMatrix {
    let mut data = Vec::with_capacity(g.ray_count() * g.pixel_count());
    for r in rows {
        data.extend_from_slice(&r);
    }
    DenseMatrix::from_vec(g.ray_count(), g.pixel_count(), data).expect("row length is fixed")
}

/// Indices of all-zero rows (w.r.t. the zero-row threshold).
pub fn zero_rows(a: &DenseMatrix) -> Vec<usize> {
    let norms2 = row_norms_squared(a);
    (0..a.rows())
        .filter(|&i| norms2[i] < ZERO_ROW_THRESHOLD)
        .collect()
}

/// One ellipse of the phantom: intensity, semi-axes, center, rotation.
struct Ellipse {
    intensity: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    phi_deg: f64,
}

/// The ten modified Shepp-Logan ellipses (Toft's parameterization, as used by
/// the common reconstruction toolkits).
#[rustfmt::skip]
const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse { intensity: 1.0,  a: 0.69,   b: 0.92,   x0: 0.0,   y0: 0.0,    phi_deg: 0.0 },
    Ellipse { intensity: -0.8, a: 0.6624, b: 0.874,  x0: 0.0,   y0: -0.0184, phi_deg: 0.0 },
    Ellipse { intensity: -0.2, a: 0.11,   b: 0.31,   x0: 0.22,  y0: 0.0,    phi_deg: -18.0 },
    Ellipse { intensity: -0.2, a: 0.16,   b: 0.41,   x0: -0.22, y0: 0.0,    phi_deg: 18.0 },
    Ellipse { intensity: 0.1,  a: 0.21,   b: 0.25,   x0: 0.0,   y0: 0.35,   phi_deg: 0.0 },
    Ellipse { intensity: 0.1,  a: 0.046,  b: 0.046,  x0: 0.0,   y0: 0.1,    phi_deg: 0.0 },
    Ellipse { intensity: 0.1,  a: 0.046,  b: 0.046,  x0: 0.0,   y0: -0.1,   phi_deg: 0.0 },
    Ellipse { intensity: 0.1,  a: 0.046,  b: 0.023,  x0: -0.08, y0: -0.605, phi_deg: 0.0 },
    Ellipse { intensity: 0.1,  a: 0.023,  b: 0.023,  x0: 0.0,   y0: -0.606, phi_deg: 0.0 },
    Ellipse { intensity: 0.1,  a: 0.023,  b: 0.046,  x0: 0.06,  y0: -0.605, phi_deg: 0.0 },
];

/// Modified Shepp-Logan head phantom sampled at pixel centers over
/// `[-1, 1]^2`, top row first. Deterministic for a given grid.
pub fn head_phantom(grid: usize) -> PhantomImage {
    assert!(grid >= 1);
    let mut pixels = Vec::with_capacity(grid * grid);
    let step = 2.0 / grid as f64;
    for r in 0..grid {
        let y = 1.0 - (r as f64 + 0.5) * step;
        for c in 0..grid {
            let x = -1.0 + (c as f64 + 0.5) * step;
            let mut v = 0.0;
            for e in &SHEPP_LOGAN {
                let phi = e.phi_deg.to_radians();
                let dx = x - e.x0;
                let dy = y - e.y0;
                let u = dx * phi.cos() + dy * phi.sin();
                let w = -dx * phi.sin() + dy * phi.cos();
                if u * u / (e.a * e.a) + w * w / (e.b * e.b) <= 1.0 {
                    v += e.intensity;
                }
            }
            // overlapping intensities cancel to 0 up to roundoff; the phantom
            // itself is nonnegative
            pixels.push(v.max(0.0));
        }
    }
    PhantomImage {
        grid,
        pixels: Vector::from_vec(pixels),
    }
}

/// Consistent tomography problem: `A` from the scan geometry, `x*` the head
/// phantom, `b = A x*`.
pub fn tomo_problem(g: &ScanGeometry) -> ProblemInstance {
    let a = build_projection_matrix(g);
    let phantom = head_phantom(g.grid);
    let b = a.matvec(&phantom.pixels);
    let n_zero = zero_rows(&a).len();
    let label = format!(
        "tomo {}x{} grid {} span {:.4}{}{}",
        g.n_angles,
        g.n_rays,
        g.grid,
        g.detector_span,
        if g.full_circle { " full-circle" } else { "" },
        if n_zero > 0 {
            format!(" ({n_zero} empty rays)")
        } else {
            String::new()
        }
    );
    ProblemInstance {
        a,
        b,
        x_star: Some(phantom.pixels),
        nullspace_basis: None,
        label,
    }
}
