//! The one-dimensional rod limit of the twist plate model.
//!
//! Cutting a narrow strip at angle `theta` out of the twist plate and sending
//! the width to zero leaves a rod energy over framed curves.  The limiting
//! density `Q(alpha, beta)` depends on the flexure rate `alpha = d1'·d3` and
//! the torsion rate `beta = d2'·d3` of the orthonormal frame `(d1, d2, d3)`
//! along the centerline, and it is piecewise smooth over three regions of the
//! `(alpha, beta)` plane: the interior of a disk (where the density is affine),
//! the interior of a possibly degenerate hyperbola (where it is a parabola in
//! `beta`, independent of `alpha`), and the remainder.
//!
//! This module provides the rotated target curvature, the region
//! classification, the closed-form density with its minimum set, a
//! brute-force minimizer used as an oracle for the closed form, and the frame
//! energy functional evaluated on sampled frame fields.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, Matrix3, Rotation2};

use crate::error::{Error, Result};
use crate::material::TextureTag;
use crate::relaxation::PlateModel;

/// Tolerance for the consistency check between the rotated target curvature
/// assembled from the plate model and its closed form.
pub const ROTATED_TARGET_TOL: f64 = 1e-12;

/// Per-sample orthonormality tolerance for frame fields.
pub const FRAME_ORTHONORMALITY_TOL: f64 = 1e-10;

/// Tolerance on the admissibility constraint `d1'·d2 = 0` of frame fields.
pub const ADMISSIBILITY_TOL: f64 = 1e-8;

/// Membership tolerance for the brute-force minimizer set: refined candidate
/// points whose density exceeds the refined minimum by more than this are
/// discarded.
pub const BRUTE_VALUE_TOL: f64 = 1e-9;

/// Number of shrink rounds in the local descent that refines brute-force grid
/// candidates.  Each round shrinks the search box by a factor of three.
const DESCENT_ROUNDS: usize = 18;

/// Region of the `(alpha, beta)` plane on which a single closed-form branch of
/// the rod density applies.
///
/// With `s = k a_theta / (1 + gamma)` the regions are
///
/// * `Disk`: `s·alpha > alpha² + beta²`, the open disk of radius `|s|/2`
///   centered at `(s/2, 0)`; empty when `a_theta = 0`.  The density is affine
///   here.
/// * `Hyperbola`: `s·alpha <= beta² - alpha²`, the closed region between the
///   two branches of a (possibly degenerate) hyperbola.  The density is a
///   parabola in `beta` and independent of `alpha` here.
/// * `Intermediate`: the remainder of the plane.
///
/// The disk and hyperbola conditions are mutually exclusive, so the three
/// regions partition the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RodRegion {
    /// Open disk where the density is affine in `(alpha, beta)`.
    Disk,
    /// Closed hyperbola interior where the density is a torsion parabola.
    Hyperbola,
    /// Remainder of the plane.
    Intermediate,
}

impl fmt::Display for RodRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            RodRegion::Disk => "disk",
            RodRegion::Hyperbola => "hyperbola",
            RodRegion::Intermediate => "intermediate",
        };
        f.write_str(label)
    }
}

/// Closed-form density of the one-dimensional rod model obtained from the
/// twist plate model by cutting a strip at angle `theta`.
#[derive(Debug, Clone)]
pub struct RodDensity {
    theta: f64,
    k: f64,
    a_theta: f64,
    b_theta: f64,
    gamma: f64,
    mu: f64,
    beta_t: f64,
    /// Ratio multiplying `a_theta²` in the affine-branch constant.  Boundary
    /// continuity forces the value `1/(1+gamma)`; the constructor always uses
    /// it.  A crate-internal hook can perturb it so the verification suite can
    /// demonstrate that the continuity check actually detects a wrong ratio.
    dbranch_ratio: f64,
}

impl RodDensity {
    /// Builds the rod density for a strip cut at angle `theta ∈ [0, π)` from
    /// a twist plate model.
    ///
    /// The rotated target curvature `R_thetaᵀ Ā R_theta` assembled from the
    /// plate model must agree with its closed form
    /// `k·[[-a_theta, b_theta], [b_theta, a_theta]]`, `k = (6/π²)(alpha0/h0)`,
    /// within [`ROTATED_TARGET_TOL`]; a mismatch means the supplied model is
    /// not the twist model this reduction starts from.
    pub fn new(model: &PlateModel, theta: f64) -> Result<Self> {
        Self::with_dbranch_ratio(model, theta, None)
    }

    /// Same as [`RodDensity::new`] but with an explicit affine-branch ratio.
    /// Used by the verification suite as a negative control: any value other
    /// than `1/(1+gamma)` must break continuity across the disk boundary.
    pub(crate) fn with_dbranch_ratio(
        model: &PlateModel,
        theta: f64,
        ratio: Option<f64>,
    ) -> Result<Self> {
        if !theta.is_finite() || !(0.0..PI).contains(&theta) {
            return Err(Error::invalid_argument(format!(
                "cut angle must lie in [0, pi), got {theta}"
            )));
        }
        if model.texture() != TextureTag::Twist {
            return Err(Error::unsupported_texture(model.texture().to_string(), "rod reduction"));
        }
        let params = model.params();
        let mu = params.mu();
        let gamma = params.gamma();
        let k = 6.0 / (PI * PI) * params.activation_ratio();
        let a_theta = (2.0 * theta).cos();
        let b_theta = (2.0 * theta).sin();

        let rot = Rotation2::new(theta);
        let rotated = rot.matrix().transpose() * model.target_curvature() * rot.matrix();
        let closed_form = Matrix2::new(-k * a_theta, k * b_theta, k * b_theta, k * a_theta);
        let gap = (rotated - closed_form).norm();
        if gap > ROTATED_TARGET_TOL * k.max(1.0) {
            return Err(Error::Internal(format!(
                "rotated target curvature deviates from its closed form by {gap:.3e}"
            )));
        }

        Ok(Self {
            theta,
            k,
            a_theta,
            b_theta,
            gamma,
            mu,
            beta_t: model.residual(),
            dbranch_ratio: ratio.unwrap_or_else(|| 1.0 / (1.0 + gamma)),
        })
    }

    /// Cut angle of the strip.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Curvature scale `k = (6/π²)(alpha0/h0)`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `cos 2θ`.
    pub fn a_theta(&self) -> f64 {
        self.a_theta
    }

    /// `sin 2θ`.
    pub fn b_theta(&self) -> f64 {
        self.b_theta
    }

    /// Volumetric coupling ratio inherited from the plate model.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Shear modulus inherited from the plate model.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Residual offset of the twist plate model (the constant added after
    /// thickness relaxation).
    pub fn beta_t(&self) -> f64 {
        self.beta_t
    }

    /// Rotated target curvature `k·[[-a_theta, b_theta],[b_theta, a_theta]]`.
    pub fn rotated_target(&self) -> Matrix2<f64> {
        Matrix2::new(
            -self.k * self.a_theta,
            self.k * self.b_theta,
            self.k * self.b_theta,
            self.k * self.a_theta,
        )
    }

    /// Center abscissa parameter `s = k a_theta / (1 + gamma)` of the disk
    /// region.
    fn disk_parameter(&self) -> f64 {
        self.k * self.a_theta / (1.0 + self.gamma)
    }

    /// Classifies a `(alpha, beta)` pair into the branch region of the
    /// density.  Boundary points go to the closed hyperbola region (its
    /// condition uses `<=`), never to the open disk.
    pub fn classify(&self, alpha: f64, beta: f64) -> RodRegion {
        let s = self.disk_parameter();
        if s * alpha > alpha * alpha + beta * beta {
            RodRegion::Disk
        } else if s * alpha <= beta * beta - alpha * alpha {
            RodRegion::Hyperbola
        } else {
            RodRegion::Intermediate
        }
    }

    /// Evaluates the rod density at `(alpha, beta)`.
    pub fn value(&self, alpha: f64, beta: f64) -> f64 {
        match self.classify(alpha, beta) {
            RodRegion::Disk => self.disk_branch(alpha, beta),
            RodRegion::Hyperbola => self.hyperbola_branch(beta),
            RodRegion::Intermediate => self.intermediate_branch(alpha, beta),
        }
    }

    /// Affine branch, valid on the open disk.
    fn disk_branch(&self, alpha: f64, beta: f64) -> f64 {
        let (mu, k, a, b) = (self.mu, self.k, self.a_theta, self.b_theta);
        mu / 3.0 * k * (a * alpha - b * beta)
            + mu / 12.0 * k * k * (2.0 - self.dbranch_ratio * a * a)
            + 0.5 * self.beta_t
    }

    /// Torsion-parabola branch, valid on the closed hyperbola interior;
    /// independent of `alpha`.
    fn hyperbola_branch(&self, beta: f64) -> f64 {
        let (mu, k, a, b) = (self.mu, self.k, self.a_theta, self.b_theta);
        mu / 3.0 * ((1.0 + self.gamma) * beta * beta - k * b * beta)
            + mu / 12.0 * k * k * (2.0 - a * a / (1.0 + self.gamma))
            + 0.5 * self.beta_t
    }

    /// Rational branch on the remainder of the plane.
    ///
    /// The expression divides by `alpha`, but every point with `alpha = 0`
    /// satisfies the hyperbola condition `0 <= beta²` and is therefore never
    /// classified into this branch; the fallback below is the continuous
    /// extension and only guards against misuse.
    fn intermediate_branch(&self, alpha: f64, beta: f64) -> f64 {
        if alpha == 0.0 {
            debug_assert!(false, "alpha = 0 always classifies into the hyperbola region");
            return self.hyperbola_branch(beta);
        }
        let (mu, k, a, b) = (self.mu, self.k, self.a_theta, self.b_theta);
        let r2 = alpha * alpha + beta * beta;
        mu / 12.0 * (1.0 + self.gamma) * r2 * r2 / (alpha * alpha)
            + mu / 6.0 * k * (a * (alpha * alpha - beta * beta) / alpha - 2.0 * b * beta)
            + mu / 6.0 * k * k
            + 0.5 * self.beta_t
    }

    /// Closed-form minimum set and minimum value of the density.
    pub fn min_set(&self) -> RodMinSet {
        let t = self.k / (2.0 * (1.0 + self.gamma));
        RodMinSet {
            alpha_interval: (-t * (1.0 + self.a_theta), t * (1.0 - self.a_theta)),
            beta: t * self.b_theta,
            value: self.mu / 12.0 * self.k * self.k * (1.0 + 2.0 * self.gamma)
                / (1.0 + self.gamma)
                + 0.5 * self.beta_t,
        }
    }

    /// Default brute-force search window `[-3k, 3k]²`, comfortably containing
    /// the closed-form minimum set for every cut angle.
    pub fn default_window(&self) -> [(f64, f64); 2] {
        let r = 3.0 * self.k;
        [(-r, r), (-r, r)]
    }

    /// Brute-force minimization over a rectangular window: dense grid
    /// evaluation followed by local descent from every near-minimal cell.
    ///
    /// Returns the refined minimum value and the set of refined minimizers
    /// (all descended points within [`BRUTE_VALUE_TOL`] of the refined
    /// minimum, plus any raw grid points already that close).  The window must
    /// contain the closed-form minimum set.
    pub fn min_brute(&self, window: [(f64, f64); 2], grid: [usize; 2]) -> Result<BruteMinimum> {
        for (lo, hi) in window {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid_argument(format!(
                    "window bounds must be finite with lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        for n in grid {
            if n < 2 {
                return Err(Error::invalid_argument("grid must have at least 2 points per axis"));
            }
        }
        let min_set = self.min_set();
        let (alo, ahi) = window[0];
        let (blo, bhi) = window[1];
        let inside = |a: f64, b: f64| (alo..=ahi).contains(&a) && (blo..=bhi).contains(&b);
        if !inside(min_set.alpha_interval.0, min_set.beta)
            || !inside(min_set.alpha_interval.1, min_set.beta)
        {
            return Err(Error::invalid_argument(
                "brute-force window does not contain the closed-form minimum set",
            ));
        }

        let (na, nb) = (grid[0], grid[1]);
        let da = (ahi - alo) / (na - 1) as f64;
        let db = (bhi - blo) / (nb - 1) as f64;

        let mut values = vec![0.0f64; na * nb];
        let mut grid_min = f64::INFINITY;
        for i in 0..na {
            let alpha = alo + da * i as f64;
            for j in 0..nb {
                let beta = blo + db * j as f64;
                let v = self.value(alpha, beta);
                values[i * nb + j] = v;
                grid_min = grid_min.min(v);
            }
        }

        // Any cell whose node sits within half a grid step of a minimizer can
        // sag by at most the largest second derivative times (step/2)^2, plus
        // a linear term from the affine branch; descend from every node below
        // that margin so no piece of a flat minimum valley is missed.
        let curvature = self.mu * (1.0 + self.gamma);
        let slope = self.mu / 3.0 * self.k * (self.a_theta.abs() + self.b_theta.abs());
        let margin = curvature * (da * da + db * db) + slope * (da + db);

        let mut refined_min = grid_min;
        let mut refined: Vec<(f64, f64, f64)> = Vec::new();
        for i in 0..na {
            for j in 0..nb {
                if values[i * nb + j] > grid_min + margin {
                    continue;
                }
                let start = (alo + da * i as f64, blo + db * j as f64);
                let (pa, pb, pv) = self.descend(start, (da, db), &window);
                refined_min = refined_min.min(pv);
                refined.push((pa, pb, pv));
            }
        }

        let mut minimizers: Vec<(f64, f64)> = refined
            .into_iter()
            .filter(|&(_, _, v)| v <= refined_min + BRUTE_VALUE_TOL)
            .map(|(a, b, _)| (a, b))
            .collect();
        // Raw grid nodes that are already minimal belong in the set too (they
        // matter when the minimum valley happens to lie on a grid line).
        for i in 0..na {
            for j in 0..nb {
                if values[i * nb + j] <= refined_min + BRUTE_VALUE_TOL {
                    minimizers.push((alo + da * i as f64, blo + db * j as f64));
                }
            }
        }
        minimizers.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
        minimizers.dedup_by(|p, q| (p.0 - q.0).abs() < 0.5 * da && (p.1 - q.1).abs() < 0.5 * db);

        Ok(BruteMinimum {
            min_value: refined_min,
            minimizers,
            grid_step: (da, db),
        })
    }

    /// Shrinking-box local descent from a starting point.  Ties keep the
    /// current center, so flat valley directions do not drift.
    fn descend(
        &self,
        start: (f64, f64),
        step: (f64, f64),
        window: &[(f64, f64); 2],
    ) -> (f64, f64, f64) {
        let mut center = start;
        let mut best = self.value(center.0, center.1);
        let (mut ha, mut hb) = step;
        for _ in 0..DESCENT_ROUNDS {
            let mut next = center;
            for i in -2i32..=2 {
                for j in -2i32..=2 {
                    let a = (center.0 + 0.5 * ha * i as f64).clamp(window[0].0, window[0].1);
                    let b = (center.1 + 0.5 * hb * j as f64).clamp(window[1].0, window[1].1);
                    let v = self.value(a, b);
                    if v < best {
                        best = v;
                        next = (a, b);
                    }
                }
            }
            center = next;
            ha /= 3.0;
            hb /= 3.0;
        }
        (center.0, center.1, best)
    }
}

/// Closed-form minimum set of the rod density: a closed interval of flexure
/// rates times a single torsion rate, plus the minimum value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodMinSet {
    /// Closed interval `[lo, hi]` of minimizing flexure rates `alpha`.
    pub alpha_interval: (f64, f64),
    /// The unique minimizing torsion rate `beta`.
    pub beta: f64,
    /// Minimum value of the density.
    pub value: f64,
}

impl RodMinSet {
    /// Whether `(alpha, beta)` lies in the minimum set up to `tol` in each
    /// coordinate.
    pub fn contains(&self, alpha: f64, beta: f64, tol: f64) -> bool {
        (self.alpha_interval.0 - tol..=self.alpha_interval.1 + tol).contains(&alpha)
            && (self.beta - beta).abs() <= tol
    }
}

/// Result of the brute-force grid minimization.
#[derive(Debug, Clone)]
pub struct BruteMinimum {
    /// Minimum value after local refinement.
    pub min_value: f64,
    /// Refined minimizers (lexicographically sorted, deduplicated at half the
    /// grid step).
    pub minimizers: Vec<(f64, f64)>,
    /// Grid spacing `(d_alpha, d_beta)` of the scan.
    pub grid_step: (f64, f64),
}

impl BruteMinimum {
    /// Extent `(min, max)` of the torsion coordinates among the minimizers.
    pub fn beta_range(&self) -> Option<(f64, f64)> {
        let first = self.minimizers.first()?.1;
        Some(self.minimizers.iter().fold((first, first), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        }))
    }

    /// Fraction of the closed interval `[lo, hi]` covered by the minimizers'
    /// flexure coordinates, each counted with a radius of half the grid step.
    pub fn alpha_coverage(&self, interval: (f64, f64)) -> f64 {
        let (lo, hi) = interval;
        let radius = 0.5 * self.grid_step.0;
        if hi - lo <= radius {
            let covered = self
                .minimizers
                .iter()
                .any(|p| p.0 >= lo - radius && p.0 <= hi + radius);
            return if covered { 1.0 } else { 0.0 };
        }
        let mut spans: Vec<(f64, f64)> = self
            .minimizers
            .iter()
            .map(|p| ((p.0 - radius).max(lo), (p.0 + radius).min(hi)))
            .filter(|(a, b)| b > a)
            .collect();
        spans.sort_by(|p, q| p.partial_cmp(q).expect("finite coordinates"));
        let mut covered = 0.0;
        let mut reach = f64::NEG_INFINITY;
        for (a, b) in spans {
            let a = a.max(reach);
            if b > a {
                covered += b - a;
                reach = b;
            }
            reach = reach.max(b);
        }
        covered / (hi - lo)
    }
}

/// Orthonormal frame field sampled along the rod centerline: arc coordinates
/// together with rotation matrices whose columns are `(d1, d2, d3)`, `d1`
/// being the tangent.
#[derive(Debug, Clone)]
pub struct FrameField {
    arcs: Vec<f64>,
    frames: Vec<Matrix3<f64>>,
}

impl FrameField {
    /// Builds a frame field from sample arc coordinates (strictly increasing,
    /// at least three) and one rotation matrix per sample.  Each matrix must
    /// be in SO(3) within [`FRAME_ORTHONORMALITY_TOL`].
    pub fn new(arcs: Vec<f64>, frames: Vec<Matrix3<f64>>) -> Result<Self> {
        if arcs.len() != frames.len() {
            return Err(Error::invalid_argument(format!(
                "got {} arc coordinates but {} frames",
                arcs.len(),
                frames.len()
            )));
        }
        if arcs.len() < 3 {
            return Err(Error::invalid_argument(
                "a frame field needs at least three samples for finite differences",
            ));
        }
        if arcs.windows(2).any(|w| !(w[1] > w[0])) || arcs.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid_argument(
                "arc coordinates must be finite and strictly increasing",
            ));
        }
        for (i, r) in frames.iter().enumerate() {
            let defect = (r.transpose() * r - Matrix3::identity()).norm();
            if !(defect <= FRAME_ORTHONORMALITY_TOL) || r.determinant() <= 0.0 {
                return Err(Error::InvalidFrame(format!(
                    "frame {i} deviates from SO(3) by {defect:.3e} (det {:.3e})",
                    r.determinant()
                )));
            }
        }
        Ok(Self { arcs, frames })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    /// Whether the field has no samples (never true for a constructed field).
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Sample arc coordinates.
    pub fn arcs(&self) -> &[f64] {
        &self.arcs
    }

    /// Sampled frames, columns `(d1, d2, d3)`.
    pub fn frames(&self) -> &[Matrix3<f64>] {
        &self.frames
    }

    /// Length of the sampled interval.
    pub fn length(&self) -> f64 {
        self.arcs[self.arcs.len() - 1] - self.arcs[0]
    }

    /// Derivative of the frame at sample `i` by three-point finite
    /// differences (centered in the interior, one-sided at the ends; exact
    /// for frames varying quadratically in arc length).
    pub(crate) fn frame_derivative(&self, i: usize) -> Matrix3<f64> {
        let n = self.arcs.len();
        let (ia, ib, ic) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (sa, sb, sc) = (self.arcs[ia], self.arcs[ib], self.arcs[ic]);
        let s = self.arcs[i];
        // Differentiate the quadratic Lagrange interpolant through the three
        // nodes; this reduces to the usual centered/one-sided stencils on
        // uniform grids.
        let wa = (2.0 * s - sb - sc) / ((sa - sb) * (sa - sc));
        let wb = (2.0 * s - sa - sc) / ((sb - sa) * (sb - sc));
        let wc = (2.0 * s - sa - sb) / ((sc - sa) * (sc - sb));
        self.frames[ia] * wa + self.frames[ib] * wb + self.frames[ic] * wc
    }

    /// Flexure and torsion rates `(d1'·d3, d2'·d3)` at every sample, checking
    /// the admissibility constraint `|d1'·d2| <=` [`ADMISSIBILITY_TOL`].
    pub fn strain_rates(&self) -> Result<Vec<(f64, f64)>> {
        let mut rates = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let deriv = self.frame_derivative(i);
            let d1p = deriv.column(0);
            let d2p = deriv.column(1);
            let d2 = self.frames[i].column(1);
            let d3 = self.frames[i].column(2);
            let twist_defect = d1p.dot(&d2);
            if twist_defect.abs() > ADMISSIBILITY_TOL {
                return Err(Error::InvalidFrame(format!(
                    "admissibility violated at sample {i}: d1'.d2 = {twist_defect:.3e}"
                )));
            }
            rates.push((d1p.dot(&d3), d2p.dot(&d3)));
        }
        Ok(rates)
    }
}

/// Evaluates the rod density at `(alpha, beta)`.
pub fn rod_density(alpha: f64, beta: f64, density: &RodDensity) -> f64 {
    density.value(alpha, beta)
}

/// Region of `(alpha, beta)` in the piecewise decomposition of the density.
pub fn classify(alpha: f64, beta: f64, density: &RodDensity) -> RodRegion {
    density.classify(alpha, beta)
}

/// Closed-form minimum set and minimum value of the rod density.
pub fn rod_min_set(density: &RodDensity) -> RodMinSet {
    density.min_set()
}

/// Brute-force oracle for [`rod_min_set`]; see [`RodDensity::min_brute`].
pub fn rod_min_brute(
    density: &RodDensity,
    window: [(f64, f64); 2],
    grid: [usize; 2],
) -> Result<BruteMinimum> {
    density.min_brute(window, grid)
}

/// Rod energy of a sampled frame field: the density evaluated on the flexure
/// and torsion rates, integrated over arc length by the trapezoid rule.
pub fn rod_energy(frame: &FrameField, density: &RodDensity) -> Result<f64> {
    let rates = frame.strain_rates()?;
    let values: Vec<f64> = rates
        .iter()
        .map(|&(alpha, beta)| density.value(alpha, beta))
        .collect();
    let mut total = 0.0;
    for i in 0..frame.len() - 1 {
        let ds = frame.arcs()[i + 1] - frame.arcs()[i];
        total += 0.5 * ds * (values[i] + values[i + 1]);
    }
    Ok(total)
}
