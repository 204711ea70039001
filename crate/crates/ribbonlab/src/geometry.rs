//! Reconstruction of minimal-energy shapes: frame integration for constant
//! or varying flexure/torsion rates, ribbon and cylinder surface meshes,
//! rate recovery, and mesh export.
//!
//! The frame system is `R' = R Omega` with `Omega(1,3) = -flexure`,
//! `Omega(2,3) = -torsion`, and zero in-plane rate `Omega(1,2)`.  Each step
//! applies the closed-form rotation exponential at the midpoint rate, which
//! keeps every frame exactly orthonormal and is exact for piecewise-constant
//! rates; the centerline integrates the first director through the exact
//! integral of the exponential flow on each step.

use std::io::{self, Write};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::plate::{CylindricalIsometry, PlateDomain};
use crate::rod::FrameField;

/// Orthonormality bound enforced on every stored frame.
pub const FRAME_DRIFT_TOL: f64 = 1e-12;

/// Smallest admissible triangle area in generated meshes.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// Rotation-rate threshold below which the exponential-flow coefficients
/// switch to their series expansions.
const SMALL_ANGLE: f64 = 1e-4;

/// Discrete frame trajectory: arc coordinates, rotations whose columns are
/// the directors `d1 | d2 | d3`, and centerline points with `x' = d1`.
#[derive(Debug, Clone)]
pub struct FrameTrajectory {
    arcs: Vec<f64>,
    frames: Vec<Matrix3<f64>>,
    positions: Vec<Vector3<f64>>,
}

impl FrameTrajectory {
    /// Builds a trajectory from samples, validating monotone arcs and exact
    /// orthonormality of the frames.
    pub fn new(
        arcs: Vec<f64>,
        frames: Vec<Matrix3<f64>>,
        positions: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        if arcs.len() != frames.len() || arcs.len() != positions.len() {
            return Err(Error::invalid_argument(format!(
                "sample counts disagree: {} arcs, {} frames, {} positions",
                arcs.len(),
                frames.len(),
                positions.len()
            )));
        }
        if arcs.len() < 2 {
            return Err(Error::invalid_argument(
                "a trajectory needs at least 2 samples",
            ));
        }
        if arcs.windows(2).any(|w| !(w[1] > w[0] && w[1].is_finite())) || !arcs[0].is_finite() {
            return Err(Error::invalid_argument(
                "arc coordinates must be finite and strictly increasing",
            ));
        }
        for (i, frame) in frames.iter().enumerate() {
            let defect = (frame.transpose() * frame - Matrix3::identity()).norm();
            if defect > FRAME_DRIFT_TOL || frame.determinant() <= 0.0 {
                return Err(Error::InvalidFrame(format!(
                    "sample {i} is not a rotation: orthonormality defect {defect:.3e}"
                )));
            }
        }
        if positions.iter().any(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid_argument(
                "centerline points must be finite",
            ));
        }
        Ok(Self {
            arcs,
            frames,
            positions,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    /// Whether the trajectory has no samples (never true for a constructed
    /// trajectory).
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Arc coordinates.
    pub fn arcs(&self) -> &[f64] {
        &self.arcs
    }

    /// Frames (columns are `d1 | d2 | d3`).
    pub fn frames(&self) -> &[Matrix3<f64>] {
        &self.frames
    }

    /// Centerline points.
    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    /// Director `k` (0, 1, or 2) at sample `i`.
    pub fn director(&self, i: usize, k: usize) -> Vector3<f64> {
        self.frames[i].column(k).into()
    }

    /// Total arc length spanned by the samples.
    pub fn arc_length(&self) -> f64 {
        self.arcs[self.arcs.len() - 1] - self.arcs[0]
    }

    /// Worst orthonormality defect `max_i ‖R_i^T R_i − I‖` over the samples.
    pub fn orthonormality_drift(&self) -> f64 {
        self.frames
            .iter()
            .map(|r| (r.transpose() * r - Matrix3::identity()).norm())
            .fold(0.0, f64::max)
    }

    /// Worst deviation of the discrete centerline tangent from the first
    /// director, `max_i |x'(s_i) − d1(s_i)|` with second-order differences.
    /// The defect is `O(step²)` for smooth rates.
    pub fn tangent_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (ia, ib, ic) = if i == 0 {
                (0, 1, 2)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            let s = self.arcs[i];
            let (sa, sb, sc) = (self.arcs[ia], self.arcs[ib], self.arcs[ic]);
            let wa = (2.0 * s - sb - sc) / ((sa - sb) * (sa - sc));
            let wb = (2.0 * s - sa - sc) / ((sb - sa) * (sb - sc));
            let wc = (2.0 * s - sa - sb) / ((sc - sa) * (sc - sb));
            let derivative =
                wa * self.positions[ia] + wb * self.positions[ib] + wc * self.positions[ic];
            worst = worst.max((derivative - self.director(i, 0)).norm());
        }
        worst
    }

    /// View of the trajectory as a rod frame field (drops the centerline).
    pub fn to_frame_field(&self) -> Result<FrameField> {
        FrameField::new(self.arcs.clone(), self.frames.clone())
    }
}

/// Exact per-step update of the exponential flow: the rotation increment
/// `exp(step Omega)` and the displacement `∫_0^step exp(tau Omega) e1 dtau`
/// for the constant rate pair `(flexure, torsion)`.
fn exponential_step(
    flexure: f64,
    torsion: f64,
    step: f64,
) -> (UnitQuaternion<f64>, Vector3<f64>) {
    // Axial vector of Omega: Omega v = omega x v.
    let omega = Vector3::new(torsion, -flexure, 0.0);
    let rotation = UnitQuaternion::from_scaled_axis(step * omega);

    let speed = omega.norm();
    let x = step * speed;
    // Coefficients of ∫ exp(tau Omega) dtau = step I + c1 Omega + c2 Omega².
    let (c1, c2) = if x < SMALL_ANGLE {
        (
            step * step * (0.5 - x * x / 24.0 + x.powi(4) / 720.0),
            step * step * step * (1.0 / 6.0 - x * x / 120.0 + x.powi(4) / 5040.0),
        )
    } else {
        (
            (1.0 - x.cos()) / (speed * speed),
            (step - x.sin() / speed) / (speed * speed),
        )
    };
    let omega_e1 = omega.cross(&Vector3::x());
    let omega2_e1 = omega.cross(&omega_e1);
    let displacement = step * Vector3::x() + c1 * omega_e1 + c2 * omega2_e1;
    (rotation, displacement)
}

/// Integrates the frame system `R' = R Omega` for the given flexure and
/// torsion rates over the centered arc interval `[-length/2, length/2]`,
/// starting from `r0` with the centerline at the origin.
///
/// Each step evaluates the rates at the interval midpoint and applies the
/// closed-form exponential, so the frames are exactly orthonormal at every
/// resolution and the update is exact for constant rates.
pub fn integrate_frame(
    flexure: &dyn Fn(f64) -> f64,
    torsion: &dyn Fn(f64) -> f64,
    r0: &Matrix3<f64>,
    length: f64,
    n_samples: usize,
) -> Result<FrameTrajectory> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid_argument(format!(
            "length must be positive, got {length}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::invalid_argument(
            "frame integration needs at least 2 samples",
        ));
    }
    let defect = (r0.transpose() * r0 - Matrix3::identity()).norm();
    if defect > FRAME_DRIFT_TOL || r0.determinant() <= 0.0 {
        return Err(Error::InvalidFrame(format!(
            "initial frame is not a rotation: orthonormality defect {defect:.3e}"
        )));
    }

    let steps = n_samples - 1;
    let step = length / steps as f64;
    let start = -0.5 * length;

    let mut arcs = Vec::with_capacity(n_samples);
    let mut frames = Vec::with_capacity(n_samples);
    let mut positions = Vec::with_capacity(n_samples);

    let mut orientation = UnitQuaternion::from_rotation_matrix(
        &nalgebra::Rotation3::from_matrix_unchecked(*r0),
    );
    let mut position = Vector3::zeros();
    arcs.push(start);
    frames.push(*r0);
    positions.push(position);

    for i in 0..steps {
        let mid = start + (i as f64 + 0.5) * step;
        let (a, b) = (flexure(mid), torsion(mid));
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "rates must be finite, got ({a}, {b}) at s = {mid}"
            )));
        }
        let (rotation, displacement) = exponential_step(a, b, step);
        position += orientation.to_rotation_matrix() * displacement;
        orientation = UnitQuaternion::new_normalize((orientation * rotation).into_inner());
        arcs.push(start + (i + 1) as f64 * step);
        frames.push(*orientation.to_rotation_matrix().matrix());
        positions.push(position);
    }

    FrameTrajectory::new(arcs, frames, positions)
}

/// Convenience wrapper for constant flexure and torsion.
pub fn integrate_constant_frame(
    flexure: f64,
    torsion: f64,
    r0: &Matrix3<f64>,
    length: f64,
    n_samples: usize,
) -> Result<FrameTrajectory> {
    integrate_frame(&|_| flexure, &|_| torsion, r0, length, n_samples)
}

/// Recovered strain rates of a trajectory: per-sample second-order
/// difference estimates of the flexure `d1'·d3`, the torsion `d2'·d3`, and
/// the in-plane rate `d1'·d2` (zero by construction for integrated frames).
#[derive(Debug, Clone)]
pub struct RecoveredRates {
    pub flexure: Vec<f64>,
    pub torsion: Vec<f64>,
    pub in_plane: Vec<f64>,
}

/// Recovers the strain rates from a trajectory with centered differences
/// (one-sided second-order stencils at the endpoints).  The roundtrip error
/// against the generating rates is `O((length/n)²)`.
pub fn recover_rates(trajectory: &FrameTrajectory) -> Result<RecoveredRates> {
    if trajectory.len() < 3 {
        return Err(Error::invalid_argument(
            "rate recovery needs at least 3 samples",
        ));
    }
    let field = trajectory.to_frame_field()?;
    let n = trajectory.len();
    let mut recovered = RecoveredRates {
        flexure: Vec::with_capacity(n),
        torsion: Vec::with_capacity(n),
        in_plane: Vec::with_capacity(n),
    };
    for i in 0..n {
        let derivative = field.frame_derivative(i);
        let d1p = derivative.column(0);
        let d2p = derivative.column(1);
        let d2 = trajectory.director(i, 1);
        let d3 = trajectory.director(i, 2);
        recovered.flexure.push(d1p.dot(&d3));
        recovered.torsion.push(d2p.dot(&d3));
        recovered.in_plane.push(d1p.dot(&d2));
    }
    Ok(recovered)
}

/// Structured triangulated strip with provenance metadata.
#[derive(Debug, Clone)]
pub struct RibbonMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    n_along: usize,
    n_across: usize,
    metadata: Vec<(String, String)>,
}

impl RibbonMesh {
    fn from_grid(
        vertices: Vec<Vector3<f64>>,
        n_along: usize,
        n_across: usize,
        metadata: Vec<(String, String)>,
    ) -> Result<Self> {
        debug_assert_eq!(vertices.len(), n_along * n_across);
        let mut triangles = Vec::with_capacity(2 * (n_along - 1) * (n_across - 1));
        let index = |i: usize, j: usize| i * n_across + j;
        for i in 0..n_along - 1 {
            for j in 0..n_across - 1 {
                triangles.push([index(i, j), index(i + 1, j), index(i + 1, j + 1)]);
                triangles.push([index(i, j), index(i + 1, j + 1), index(i, j + 1)]);
            }
        }
        let mesh = Self {
            vertices,
            triangles,
            n_along,
            n_across,
            metadata,
        };
        if let Some(area) = mesh.triangle_areas().find(|&a| a <= MIN_TRIANGLE_AREA) {
            return Err(Error::invalid_argument(format!(
                "degenerate triangle of area {area:.3e} in generated mesh"
            )));
        }
        Ok(mesh)
    }

    /// Vertex positions.
    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    /// Triangle index triples (counter-clockwise toward the surface normal).
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Grid extent along the trajectory.
    pub fn n_along(&self) -> usize {
        self.n_along
    }

    /// Grid extent across the strip.
    pub fn n_across(&self) -> usize {
        self.n_across
    }

    /// Provenance metadata as key-value pairs.
    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    /// Appends a provenance entry.
    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    fn triangle_areas(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().map(|t| {
            let [a, b, c] = *t;
            let u = self.vertices[b] - self.vertices[a];
            let v = self.vertices[c] - self.vertices[a];
            0.5 * u.cross(&v).norm()
        })
    }

    /// Total surface area of the triangulation.
    pub fn total_area(&self) -> f64 {
        self.triangle_areas().sum()
    }

    /// Largest discrete Gaussian curvature magnitude (angle defect
    /// `|2 pi − Σ incident angles|`) over the interior grid vertices.
    /// Near zero for developable surfaces at adequate resolution.
    pub fn interior_angle_defect(&self) -> f64 {
        let mut angle_sum = vec![0.0_f64; self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let v = t[k];
                let u = self.vertices[t[(k + 1) % 3]] - self.vertices[v];
                let w = self.vertices[t[(k + 2) % 3]] - self.vertices[v];
                let cos = u.dot(&w) / (u.norm() * w.norm());
                angle_sum[v] += cos.clamp(-1.0, 1.0).acos();
            }
        }
        let mut worst: f64 = 0.0;
        for i in 1..self.n_along - 1 {
            for j in 1..self.n_across - 1 {
                let defect = (2.0 * std::f64::consts::PI
                    - angle_sum[i * self.n_across + j])
                    .abs();
                worst = worst.max(defect);
            }
        }
        worst
    }
}

/// Builds the ruled strip `y(s, t) = x(s) + t d2(s)`, `t ∈ [−width/2,
/// width/2]`, over the trajectory samples.  Self-intersections are not
/// checked.
pub fn ribbon_mesh(
    trajectory: &FrameTrajectory,
    width: f64,
    n_across: usize,
) -> Result<RibbonMesh> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid_argument(format!(
            "ribbon width must be positive, got {width}"
        )));
    }
    if n_across < 2 {
        return Err(Error::invalid_argument(
            "ribbon mesh needs at least 2 samples across",
        ));
    }
    let n_along = trajectory.len();
    let mut vertices = Vec::with_capacity(n_along * n_across);
    for i in 0..n_along {
        let x = trajectory.positions()[i];
        let d2 = trajectory.director(i, 1);
        for j in 0..n_across {
            let t = width * (j as f64 / (n_across - 1) as f64 - 0.5);
            vertices.push(x + t * d2);
        }
    }
    let metadata = vec![
        ("kind".to_string(), "ribbon".to_string()),
        ("width".to_string(), format!("{width}")),
        ("arc_length".to_string(), format!("{}", trajectory.arc_length())),
    ];
    RibbonMesh::from_grid(vertices, n_along, n_across, metadata)
}

/// Builds the exact isometric rolling of the strip `domain` at curvature
/// `kappa` along the material direction `e(phi)`, sampled on an
/// `n_along x n_across` grid.  The mesh has zero discrete Gaussian
/// curvature away from the boundary up to the resolution error.
pub fn cylinder_mesh(
    phi: f64,
    kappa: f64,
    domain: &PlateDomain,
    n_along: usize,
    n_across: usize,
) -> Result<RibbonMesh> {
    if n_along < 2 || n_across < 2 {
        return Err(Error::invalid_argument(
            "cylinder mesh needs at least 2 samples per direction",
        ));
    }
    let isometry = CylindricalIsometry::constant(phi, kappa, *domain)?;
    let mut vertices = Vec::with_capacity(n_along * n_across);
    for i in 0..n_along {
        let z1 = domain.length() * (i as f64 / (n_along - 1) as f64 - 0.5);
        for j in 0..n_across {
            let z2 = domain.width() * (j as f64 / (n_across - 1) as f64 - 0.5);
            let x = domain.strip_to_material(z1, z2);
            vertices.push(isometry.map(x));
        }
    }
    let metadata = vec![
        ("kind".to_string(), "cylinder".to_string()),
        ("phi".to_string(), format!("{phi}")),
        ("kappa".to_string(), format!("{kappa}")),
        ("length".to_string(), format!("{}", domain.length())),
        ("width".to_string(), format!("{}", domain.width())),
        ("orientation".to_string(), format!("{}", domain.orientation())),
    ];
    RibbonMesh::from_grid(vertices, n_along, n_across, metadata)
}

/// Writes the mesh as ASCII OBJ: provenance comment header, `v x y z`
/// vertex lines, `f i j k` faces with 1-based indices.  Coordinates are in
/// reference-thickness units.  The output is deterministic byte for byte.
pub fn write_obj<W: Write>(mesh: &RibbonMesh, out: &mut W) -> io::Result<()> {
    writeln!(out, "# ribbonlab")?;
    for (key, value) in mesh.metadata() {
        writeln!(out, "# {key}: {value}")?;
    }
    for v in mesh.vertices() {
        writeln!(out, "v {:.12e} {:.12e} {:.12e}", v.x, v.y, v.z)?;
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Writes the trajectory as CSV with columns
/// `s,x1,x2,x3,d1x,d1y,d1z,d2x,d2y,d2z,d3x,d3y,d3z`.
pub fn write_trajectory_csv<W: Write>(
    trajectory: &FrameTrajectory,
    out: &mut W,
) -> io::Result<()> {
    writeln!(
        out,
        "s,x1,x2,x3,d1x,d1y,d1z,d2x,d2y,d2z,d3x,d3y,d3z"
    )?;
    for i in 0..trajectory.len() {
        let x = trajectory.positions()[i];
        write!(out, "{:.12e},{:.12e},{:.12e},{:.12e}", trajectory.arcs()[i], x.x, x.y, x.z)?;
        for k in 0..3 {
            let d = trajectory.director(i, k);
            write!(out, ",{:.12e},{:.12e},{:.12e}", d.x, d.y, d.z)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
