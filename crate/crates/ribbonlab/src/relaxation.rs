//! Thickness relaxation: from activation profiles to the plate quadratic form.
//!
//! Two nested minimizations turn the thickness-resolved quadratic energy into
//! a plate density in the second fundamental form `G`:
//!
//! 1. relaxing the third column of the strain pointwise replaces the 3D form
//!    `q3` by `q2(G) = 2 mu (|sym G|^2 + gamma tr(G)^2)` on 2x2 arguments;
//! 2. relaxing over in-plane midplane stretches `D` and integrating across
//!    the thickness yields
//!    `qbar2(G) = min_D int q2(D + t G + B(t)) dt = (1/12) q2(G - target) + residual`.
//!
//! The closed-form path computes the Legendre decomposition of the activation
//! profile `B(t) = B0 + t B1/12... ` precisely: `B0 = int B`, `B1 = 12 int t B`,
//! `target = -B1`, and the residual is the energy of the component orthogonal
//! to affine profiles.  [`ThicknessOracle`] re-derives the same model through
//! the raw double minimization (linear stationarity solves on quadrature
//! moments) and exists solely to cross-check the closed forms.

use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::material::{activation_slope, MaterialParams, Texture, TextureTag};
use crate::quadrature::GaussLegendre;
use crate::report::{comparison_entry, ComparisonReport};

/// Default quadrature order per smooth panel for thickness integrals.
pub const DEFAULT_PROFILE_ORDER: usize = 48;
/// Relative tolerance for the order-doubling convergence check.
pub const QUADRATURE_REL_TOL: f64 = 1e-9;
/// Tolerance for the internal Legendre-orthogonality identity.
const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Residuals below this fraction of the profile's own quadratic energy are
/// rounding remnants of the affine projection (squares of ~1e-16 float
/// differences), not physical frustration; they snap to exactly zero.  Any
/// genuine nonlinearity a double can represent sits orders of magnitude
/// above this floor.
const RESIDUAL_ZERO_FLOOR: f64 = 1e-26;

/// The reduced quadratic form `q2(G) = 2 mu (|sym G|^2 + gamma tr(G)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic2 {
    mu: f64,
    gamma: f64,
}

impl Quadratic2 {
    pub fn new(mu: f64, gamma: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid_argument(format!("mu must be positive, got {mu}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid_argument(format!(
                "gamma must lie in (0, 1), got {gamma}"
            )));
        }
        Ok(Quadratic2 { mu, gamma })
    }

    pub fn from_material(params: &MaterialParams) -> Self {
        Quadratic2 {
            mu: params.mu(),
            gamma: params.gamma(),
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Evaluates `q2(G)`; skew parts do not contribute.
    pub fn q2(&self, g: &Matrix2<f64>) -> f64 {
        let sym = 0.5 * (g + g.transpose());
        2.0 * self.mu * (sym.norm_squared() + self.gamma * g.trace().powi(2))
    }

    /// Symmetric bilinear form with `q2(G) = bilinear(G, G)`.
    pub fn bilinear(&self, a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
        let sa = 0.5 * (a + a.transpose());
        let sb = 0.5 * (b + b.transpose());
        2.0 * self.mu * (sa.dot(&sb) + self.gamma * a.trace() * b.trace())
    }
}

/// Result of the embedded 3D minimization behind `q2`.
#[derive(Debug, Clone, Copy)]
pub struct Q2Oracle {
    /// Minimal value of `q3` over the embedded third column.
    pub value: f64,
    /// Optimal shear components of the third column.
    pub shear: Vector2<f64>,
    /// Optimal normal stretch component.
    pub normal: f64,
}

/// Minimizes `q3` over 3x3 matrices extending a 2x2 upper-left block `G` with
/// a free third column, by solving the linear stationarity system.
///
/// This is the independent route to `q2`; [`Quadratic2::q2`] is the closed
/// form it validates.
pub fn q2_oracle(g: &Matrix2<f64>, params: &MaterialParams) -> Result<Q2Oracle> {
    let embed = |g: &Matrix2<f64>, col: &Vector3<f64>| {
        Matrix3::new(
            g[(0, 0)],
            g[(0, 1)],
            col[0],
            g[(1, 0)],
            g[(1, 1)],
            col[1],
            0.0,
            0.0,
            col[2],
        )
    };
    // q3(embed) is a strictly convex quadratic in the free column; assemble
    // its Hessian and gradient at zero by finite evaluation and solve.
    let base = crate::material::q3(&embed(g, &Vector3::zeros()), params);
    let mut hessian = Matrix3::zeros();
    let mut gradient = Vector3::zeros();
    let basis = [Vector3::x(), Vector3::y(), Vector3::z()];
    for (i, ei) in basis.iter().enumerate() {
        let plus = crate::material::q3(&embed(g, ei), params);
        let minus = crate::material::q3(&embed(g, &(-ei)), params);
        gradient[i] = 0.5 * (plus - minus);
        hessian[(i, i)] = plus + minus - 2.0 * base;
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let pair = crate::material::q3(&embed(g, &(basis[i] + basis[j])), params);
            let hij = pair - crate::material::q3(&embed(g, &basis[i]), params)
                - crate::material::q3(&embed(g, &basis[j]), params)
                + base;
            hessian[(i, j)] = hij;
            hessian[(j, i)] = hij;
        }
    }
    let col = hessian
        .lu()
        .solve(&(-gradient))
        .ok_or_else(|| Error::Internal("singular stationarity system in q2_oracle".into()))?;
    let value = crate::material::q3(&embed(g, &col), params);
    Ok(Q2Oracle {
        value,
        shear: Vector2::new(col[0], col[1]),
        normal: col[2],
    })
}

/// Smoothness class of a thickness profile; jumps are only supported at the
/// midplane, where bilayers switch slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    MidplaneJump,
}

/// A symmetric 2x2 activation profile `t -> B(t)` on `t in [-1/2, 1/2]`.
#[derive(Clone)]
pub struct ThicknessProfile {
    eval: Arc<dyn Fn(f64) -> Matrix2<f64> + Send + Sync>,
    smoothness: Smoothness,
    tag: TextureTag,
    params: MaterialParams,
}

impl std::fmt::Debug for ThicknessProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThicknessProfile")
            .field("smoothness", &self.smoothness)
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

impl ThicknessProfile {
    /// In-plane activation profile of a texture: the upper-left 2x2 block of
    /// the spontaneous-strain slope.
    pub fn from_texture(texture: &Texture, params: &MaterialParams) -> Result<Self> {
        let smoothness = match texture {
            Texture::Bilayer { .. } => Smoothness::MidplaneJump,
            _ => Smoothness::Smooth,
        };
        let tag = texture.tag();
        // Validate once on a probe point so construction surfaces errors.
        activation_slope(texture, params, 0.25)?;
        let texture = texture.clone();
        let captured = *params;
        let eval = move |t: f64| -> Matrix2<f64> {
            let b = activation_slope(&texture, &captured, t)
                .expect("profile evaluated inside [-1/2, 1/2]");
            b.fixed_view::<2, 2>(0, 0).into_owned()
        };
        Ok(ThicknessProfile {
            eval: Arc::new(eval),
            smoothness,
            tag,
            params: *params,
        })
    }

    /// Wraps a smooth custom profile; values must be symmetric within 1e-12.
    pub fn smooth<F>(eval: F, params: &MaterialParams) -> Result<Self>
    where
        F: Fn(f64) -> Matrix2<f64> + Send + Sync + 'static,
    {
        Self::custom(eval, Smoothness::Smooth, params)
    }

    /// Wraps a custom profile with a jump at the midplane.
    pub fn with_midplane_jump<F>(eval: F, params: &MaterialParams) -> Result<Self>
    where
        F: Fn(f64) -> Matrix2<f64> + Send + Sync + 'static,
    {
        Self::custom(eval, Smoothness::MidplaneJump, params)
    }

    fn custom<F>(eval: F, smoothness: Smoothness, params: &MaterialParams) -> Result<Self>
    where
        F: Fn(f64) -> Matrix2<f64> + Send + Sync + 'static,
    {
        for i in 0..17 {
            let t = -0.5 + (i as f64 + 0.5) / 17.0;
            let b = eval(t);
            if (b - b.transpose()).norm() > 1e-12 {
                return Err(Error::invalid_argument(format!(
                    "thickness profile must be symmetric, asymmetry {:e} at t = {t}",
                    (b - b.transpose()).norm()
                )));
            }
        }
        Ok(ThicknessProfile {
            eval: Arc::new(eval),
            smoothness,
            tag: TextureTag::Custom,
            params: *params,
        })
    }

    pub fn value(&self, t: f64) -> Matrix2<f64> {
        (self.eval)(t)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn tag(&self) -> TextureTag {
        self.tag
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// Smooth integration panels covering `[-1/2, 1/2]`.
    pub fn panels(&self) -> Vec<(f64, f64)> {
        match self.smoothness {
            Smoothness::Smooth => vec![(-0.5, 0.5)],
            Smoothness::MidplaneJump => vec![(-0.5, 0.0), (0.0, 0.5)],
        }
    }

    /// The profile shifted by `constant + t * linear`; used to exercise the
    /// covariance of the relaxation (constant shifts move the residual target
    /// for `D`, linear shifts move the curvature target).
    pub fn shifted(&self, constant: Matrix2<f64>, linear: Matrix2<f64>) -> Self {
        let base = self.eval.clone();
        ThicknessProfile {
            eval: Arc::new(move |t| base(t) + constant + t * linear),
            smoothness: self.smoothness,
            tag: TextureTag::Custom,
            params: self.params,
        }
    }
}

/// The relaxed plate model `qbar2(G) = alpha q2(G - target) + residual`.
#[derive(Debug, Clone, Copy)]
pub struct PlateModel {
    alpha_coeff: f64,
    target_curvature: Matrix2<f64>,
    residual: f64,
    texture: TextureTag,
    params: MaterialParams,
}

impl PlateModel {
    pub fn new(
        alpha_coeff: f64,
        target_curvature: Matrix2<f64>,
        residual: f64,
        texture: TextureTag,
        params: MaterialParams,
    ) -> Result<Self> {
        if !(alpha_coeff > 0.0) {
            return Err(Error::invalid_argument(format!(
                "bending coefficient must be positive, got {alpha_coeff}"
            )));
        }
        if residual < -1e-12 {
            return Err(Error::invalid_argument(format!(
                "residual energy must be nonnegative, got {residual:e}"
            )));
        }
        Ok(PlateModel {
            alpha_coeff,
            target_curvature,
            residual: residual.max(0.0),
            texture,
            params,
        })
    }

    pub fn alpha_coeff(&self) -> f64 {
        self.alpha_coeff
    }

    pub fn target_curvature(&self) -> &Matrix2<f64> {
        &self.target_curvature
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn texture(&self) -> TextureTag {
        self.texture
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }
}

/// Evaluates the relaxed density `qbar2(G)`; its minimum over symmetric `G`
/// is `residual`, attained exactly at the target curvature.
pub fn qbar2(g: &Matrix2<f64>, model: &PlateModel, form: &Quadratic2) -> f64 {
    model.alpha_coeff * form.q2(&(g - model.target_curvature)) + model.residual
}

fn integrate_matrix<F: Fn(f64) -> Matrix2<f64>>(
    rule: &GaussLegendre,
    panels: &[(f64, f64)],
    f: F,
) -> Matrix2<f64> {
    let mut acc = Matrix2::zeros();
    for &(a, b) in panels {
        for (t, w) in rule.mapped(a, b) {
            acc += w * f(t);
        }
    }
    acc
}

/// Legendre moments of a thickness profile.
#[derive(Debug, Clone, Copy)]
struct ProfileMoments {
    b0: Matrix2<f64>,
    b1: Matrix2<f64>,
}

fn profile_moments(
    profile: &ThicknessProfile,
    rule: &GaussLegendre,
) -> ProfileMoments {
    let panels = profile.panels();
    let b0 = integrate_matrix(rule, &panels, |t| profile.value(t));
    let b1 = 12.0 * integrate_matrix(rule, &panels, |t| t * profile.value(t));
    ProfileMoments { b0, b1 }
}

/// Closed-form thickness relaxation by Legendre decomposition.
///
/// Splits the profile as `B(t) = B0 + t B1 + B_perp(t)` with `B0 = int B` and
/// `B1 = 12 int t B`.  The constant part is absorbed by the midplane stretch,
/// the linear part sets the target curvature `-B1`, and the orthogonal
/// remainder contributes the frustration residual `int q2(B_perp)`.  The
/// moment integrals are evaluated by Gauss quadrature per smooth panel and
/// cross-checked at doubled order.
pub fn relax_thickness(
    profile: &ThicknessProfile,
    form: &Quadratic2,
    order: usize,
) -> Result<PlateModel> {
    let rule = GaussLegendre::new(order);
    let fine = GaussLegendre::new(2 * order);
    let panels = profile.panels();

    let moments = profile_moments(profile, &rule);
    let moments_fine = profile_moments(profile, &fine);
    let moment_gap = (moments.b0 - moments_fine.b0).norm() + (moments.b1 - moments_fine.b1).norm();
    if moment_gap > QUADRATURE_REL_TOL * (1.0 + moments_fine.b0.norm() + moments_fine.b1.norm()) {
        return Err(Error::Quadrature(format!(
            "profile moments did not converge between orders {order} and {}: gap {moment_gap:e}",
            2 * order
        )));
    }
    let ProfileMoments { b0, b1 } = moments_fine;

    let perp = |t: f64| profile.value(t) - b0 - t * b1;
    // Legendre orthogonality of the remainder, an identity of the projection.
    let perp0 = integrate_matrix(&fine, &panels, perp).norm();
    let perp1 = integrate_matrix(&fine, &panels, |t| t * perp(t)).norm();
    let scale = 1.0 + b0.norm() + b1.norm();
    if perp0 > ORTHOGONALITY_TOL * scale || perp1 > ORTHOGONALITY_TOL * scale {
        return Err(Error::Internal(format!(
            "Legendre remainder is not orthogonal to affine profiles ({perp0:e}, {perp1:e})"
        )));
    }

    let residual_coarse: f64 = panels
        .iter()
        .map(|&(a, b)| rule.integrate(a, b, |t| form.q2(&perp(t))))
        .sum();
    let residual: f64 = panels
        .iter()
        .map(|&(a, b)| fine.integrate(a, b, |t| form.q2(&perp(t))))
        .sum();
    if (residual - residual_coarse).abs() > QUADRATURE_REL_TOL * residual.abs().max(1.0) {
        return Err(Error::Quadrature(format!(
            "residual integral did not converge between orders {order} and {}",
            2 * order
        )));
    }

    // The remainder is a difference of same-magnitude floats, so an exactly
    // affine profile leaves a square-of-rounding remnant (~1e-33 times the
    // profile energy) instead of exact zero.  Below double precision that
    // remnant carries no information; snap it so linear profiles report a
    // residual of exactly 0.
    let profile_energy: f64 = panels
        .iter()
        .map(|&(a, b)| fine.integrate(a, b, |t| form.q2(&profile.value(t))))
        .sum();
    let residual = if residual <= RESIDUAL_ZERO_FLOOR * profile_energy {
        0.0
    } else {
        residual
    };

    PlateModel::new(
        1.0 / 12.0,
        -b1,
        residual,
        profile.tag(),
        *profile.params(),
    )
}

/// Quadrature-and-linear-algebra oracle for the thickness relaxation.
///
/// For each curvature `G` it evaluates `min_D int q2(D + t G + B(t)) dt` by
/// solving the symmetric 3-dimensional stationarity system for `D`, then
/// recovers the full model (target, residual, bending coefficient) from
/// finite evaluations of that value function.  It deliberately shares no
/// algebra with [`relax_thickness`].
pub struct ThicknessOracle {
    profile: ThicknessProfile,
    form: Quadratic2,
    rule: GaussLegendre,
    /// Constant part `q2(D*) + 2 <D*, B0>` of the relaxed value function.
    constant: f64,
    d_star: Matrix2<f64>,
    order: usize,
}

impl ThicknessOracle {
    pub fn new(profile: &ThicknessProfile, form: &Quadratic2, order: usize) -> Result<Self> {
        let rule = GaussLegendre::new(order);
        let panels = profile.panels();
        let b0 = integrate_matrix(&rule, &panels, |t| profile.value(t));

        // min_D [ q2(D) + 2 L(D, B0) ] over symmetric D in coordinates
        // (d11, d22, d12): Hessian of q2 and gradient of the coupling.
        let mu = form.mu();
        let gamma = form.gamma();
        let hessian = 4.0
            * mu
            * nalgebra::Matrix3::new(
                1.0 + gamma,
                gamma,
                0.0,
                gamma,
                1.0 + gamma,
                0.0,
                0.0,
                0.0,
                2.0,
            );
        let tr = b0.trace();
        let gradient = 4.0
            * mu
            * Vector3::new(
                b0[(0, 0)] + gamma * tr,
                b0[(1, 1)] + gamma * tr,
                2.0 * 0.5 * (b0[(0, 1)] + b0[(1, 0)]),
            );
        let d = hessian
            .lu()
            .solve(&(-gradient))
            .ok_or_else(|| Error::Internal("singular midplane-stretch system".into()))?;
        let d_star = Matrix2::new(d[0], d[2], d[2], d[1]);
        let constant = form.q2(&d_star) + 2.0 * form.bilinear(&d_star, &b0);

        Ok(ThicknessOracle {
            profile: profile.clone(),
            form: *form,
            rule,
            constant,
            d_star,
            order,
        })
    }

    /// Minimizing midplane stretch `D*` (independent of the curvature).
    pub fn midplane_stretch(&self) -> &Matrix2<f64> {
        &self.d_star
    }

    /// Relaxed value `min_D int q2(D + t G + B(t)) dt` at curvature `G`.
    pub fn value(&self, g: &Matrix2<f64>) -> f64 {
        let panels = self.profile.panels();
        let integral: f64 = panels
            .iter()
            .map(|&(a, b)| {
                self.rule
                    .integrate(a, b, |t| self.form.q2(&(t * g + self.profile.value(t))))
            })
            .sum();
        self.constant + integral
    }

    /// Extracts the full plate model from the value function: argmin by a
    /// second linear solve, bending coefficient from a Hessian ratio, and a
    /// doubled-order convergence check on the residual.
    pub fn model(&self) -> Result<PlateModel> {
        let e1 = Matrix2::new(1.0, 0.0, 0.0, 0.0);
        let e2 = Matrix2::new(0.0, 0.0, 0.0, 1.0);
        let e3 = Matrix2::new(0.0, 1.0, 1.0, 0.0);
        let basis = [e1, e2, e3];

        let f0 = self.value(&Matrix2::zeros());
        let mut hessian = Matrix3::zeros();
        let mut gradient = Vector3::zeros();
        for (i, ei) in basis.iter().enumerate() {
            let plus = self.value(ei);
            let minus = self.value(&(-ei));
            gradient[i] = 0.5 * (plus - minus);
            hessian[(i, i)] = plus + minus - 2.0 * f0;
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let hij = self.value(&(basis[i] + basis[j])) - self.value(&basis[i])
                    - self.value(&basis[j])
                    + f0;
                hessian[(i, j)] = hij;
                hessian[(j, i)] = hij;
            }
        }
        let g = hessian
            .lu()
            .solve(&(-gradient))
            .ok_or_else(|| Error::Internal("singular curvature stationarity system".into()))?;
        let target = Matrix2::new(g[0], g[2], g[2], g[1]);
        let residual = self.value(&target);

        // Convergence: re-evaluate the residual at doubled order.
        let doubled = ThicknessOracle::new(&self.profile, &self.form, 2 * self.order)?;
        let residual_fine = doubled.value(&target);
        if (residual - residual_fine).abs() > QUADRATURE_REL_TOL * residual.abs().max(1.0) {
            return Err(Error::Quadrature(format!(
                "oracle residual did not converge between orders {} and {}",
                self.order,
                2 * self.order
            )));
        }

        // Bending coefficient from the Hessian ratio along a probe direction.
        let probe = Matrix2::new(0.7, 0.31, 0.31, -0.42);
        let alpha = (self.value(&(target + probe)) + self.value(&(target - probe))
            - 2.0 * residual)
            / (2.0 * self.form.q2(&probe));

        PlateModel::new(alpha, target, residual, self.profile.tag(), *self.profile.params())
    }
}

/// Convenience wrapper: the oracle-derived plate model.
pub fn relax_thickness_oracle(
    profile: &ThicknessProfile,
    form: &Quadratic2,
    order: usize,
) -> Result<PlateModel> {
    ThicknessOracle::new(profile, form, order)?.model()
}

fn matrix_values(m: &Matrix2<f64>) -> Vec<f64> {
    vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

/// Compares a computed plate model against the closed-form constants printed
/// in the reference derivation, flagging relative gaps above
/// [`crate::report::DISCREPANCY_TOL`].
///
/// Two constants in the reference are known to disagree with the recomputed
/// relaxation (the splay-bend residual and the bilayer residual); the entries
/// record the printed expressions verbatim so the flags document exactly
/// which values differ.
pub fn reference_comparison(
    texture: &Texture,
    params: &MaterialParams,
    model: &PlateModel,
    form: &Quadratic2,
) -> ComparisonReport {
    let ratio = params.activation_ratio();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let pi4 = pi2 * pi2;
    let k = 6.0 / pi2 * ratio;
    let mu = form.mu();
    let gamma = form.gamma();

    let mut entries = vec![comparison_entry(
        "alpha_coeff",
        "dimensionless",
        "1/12",
        vec![1.0 / 12.0],
        vec![model.alpha_coeff()],
    )];

    let (target_expr, target_ref): (String, Matrix2<f64>) = match texture {
        Texture::Twist => (
            "(6/pi^2)(alpha0/h0) diag(-1, 1)".to_string(),
            Matrix2::new(-k, 0.0, 0.0, k),
        ),
        Texture::SplayBend => (
            "(6/pi^2)(alpha0/h0) diag(-1, 0)".to_string(),
            Matrix2::new(-k, 0.0, 0.0, 0.0),
        ),
        Texture::ConstantDirector(n) => {
            let n = n.into_inner();
            let proj = Matrix2::new(n.x * n.x, n.x * n.y, n.x * n.y, n.y * n.y);
            (
                "(alpha0/(2 h0)) ((n (x) n)' - I/3)".to_string(),
                0.5 * ratio * (proj - Matrix2::identity() / 3.0),
            )
        }
        Texture::Bilayer { m1, m2 } => {
            let mc1 = m1.fixed_view::<2, 2>(0, 0).into_owned();
            let mc2 = m2.fixed_view::<2, 2>(0, 0).into_owned();
            (
                "-(3/2)(M1' - M2')".to_string(),
                -1.5 * (mc1 - mc2),
            )
        }
    };
    entries.push(comparison_entry(
        "target_curvature",
        "1/h0",
        target_expr,
        matrix_values(&target_ref),
        matrix_values(model.target_curvature()),
    ));

    let (residual_expr, residual_ref): (String, f64) = match texture {
        Texture::Twist => (
            "mu (pi^4 - 4 pi^2 - 48)/(4 pi^4) (alpha0/h0)^2".to_string(),
            mu * (pi4 - 4.0 * pi2 - 48.0) / (4.0 * pi4) * ratio * ratio,
        ),
        Texture::SplayBend => (
            "mu (1 + gamma)(pi^4 - 12)/16 (alpha0/h0)^2".to_string(),
            mu * (1.0 + gamma) * (pi4 - 12.0) / 16.0 * ratio * ratio,
        ),
        Texture::ConstantDirector(_) => ("0".to_string(), 0.0),
        Texture::Bilayer { m1, m2 } => {
            let sum = (m1 + m2).fixed_view::<2, 2>(0, 0).into_owned();
            (
                "-(1/16) q2(M1' + M2')".to_string(),
                -form.q2(&sum) / 16.0,
            )
        }
    };
    entries.push(comparison_entry(
        "residual",
        "mu/h0^2",
        residual_expr,
        vec![residual_ref],
        vec![model.residual()],
    ));

    let mut report = ComparisonReport {
        texture: texture.tag(),
        entries,
        any_discrepancy: false,
    };
    report.recompute_summary();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn default_setup() -> (MaterialParams, Quadratic2) {
        let params = MaterialParams::default();
        let form = Quadratic2::from_material(&params);
        (params, form)
    }

    fn twist_target(params: &MaterialParams) -> Matrix2<f64> {
        let k = 6.0 / (std::f64::consts::PI * std::f64::consts::PI) * params.activation_ratio();
        Matrix2::new(-k, 0.0, 0.0, k)
    }

    fn twist_residual(params: &MaterialParams) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let pi4 = pi2 * pi2;
        params.mu() * (pi4 - 4.0 * pi2 - 48.0) / (4.0 * pi4) * params.activation_ratio().powi(2)
    }

    fn random_symmetric2(rng: &mut ChaCha8Rng, scale: f64) -> Matrix2<f64> {
        let a = rng.random_range(-scale..scale);
        let b = rng.random_range(-scale..scale);
        let c = rng.random_range(-scale..scale);
        Matrix2::new(a, c, c, b)
    }

    #[test]
    fn q2_matches_the_reference_value_at_identity() {
        let (_, form) = default_setup();
        assert_relative_eq!(form.q2(&Matrix2::identity()), 6.4, epsilon = 1e-14);
    }

    #[test]
    fn q2_oracle_agrees_with_the_closed_form() {
        let (params, form) = default_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = Matrix2::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let oracle = q2_oracle(&g, &params).unwrap();
            assert_relative_eq!(oracle.value, form.q2(&g), epsilon = 1e-11, max_relative = 1e-11);
        }
    }

    #[test]
    fn q2_oracle_is_trivial_at_zero() {
        let (params, _) = default_setup();
        let oracle = q2_oracle(&Matrix2::zeros(), &params).unwrap();
        assert_abs_diff_eq!(oracle.value, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle.shear.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle.normal, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn q2_oracle_normal_component_is_the_trace_contraction() {
        let (params, _) = default_setup();
        let g = Matrix2::new(0.4, -0.1, -0.1, 0.2);
        let oracle = q2_oracle(&g, &params).unwrap();
        assert_relative_eq!(oracle.normal, -params.gamma() * g.trace(), epsilon = 1e-12);
        assert_abs_diff_eq!(oracle.shear.norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn twist_relaxation_reproduces_the_closed_constants() {
        let (params, form) = default_setup();
        let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        assert_eq!(model.alpha_coeff(), 1.0 / 12.0);
        assert_relative_eq!(
            (model.target_curvature() - twist_target(&params)).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(model.residual(), twist_residual(&params), epsilon = 1e-12);
    }

    #[test]
    fn twist_residual_is_independent_of_gamma() {
        for &gamma in &[0.05, 0.3, 0.8] {
            let params = MaterialParams::new(1.0, gamma, 1.0, 1.0).unwrap();
            let form = Quadratic2::from_material(&params);
            let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
            let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
            assert_relative_eq!(model.residual(), twist_residual(&params), epsilon = 1e-12);
        }
    }

    #[test]
    fn splay_bend_relaxation_matches_the_recomputed_residual() {
        let (params, form) = default_setup();
        let profile = ThicknessProfile::from_texture(&Texture::SplayBend, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let k = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert_relative_eq!(
            (model.target_curvature() - Matrix2::new(-k, 0.0, 0.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
        let pi4 = std::f64::consts::PI.powi(4);
        let expected = params.mu() * (1.0 + params.gamma()) * (pi4 - 96.0) / (16.0 * pi4);
        assert_relative_eq!(model.residual(), expected, epsilon = 1e-12);
    }

    #[test]
    fn constant_director_relaxes_to_zero_residual() {
        let (params, form) = default_setup();
        for axis in [
            Vector3::z(),
            Vector3::x(),
            Vector3::new(1.0, 2.0, -0.5).normalize(),
        ] {
            let texture = Texture::constant_director(axis).unwrap();
            let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
            let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
            assert_abs_diff_eq!(model.residual(), 0.0, epsilon = 1e-14);
            let proj = Matrix2::new(
                axis.x * axis.x,
                axis.x * axis.y,
                axis.x * axis.y,
                axis.y * axis.y,
            );
            let expected = 0.5 * params.activation_ratio() * (proj - Matrix2::identity() / 3.0);
            assert_relative_eq!(
                (model.target_curvature() - expected).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn normal_director_gives_the_isotropic_target() {
        let (params, form) = default_setup();
        let texture = Texture::constant_director(Vector3::z()).unwrap();
        let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let m0 = -params.alpha0() / (6.0 * params.h0());
        assert_relative_eq!(
            (model.target_curvature() - m0 * Matrix2::identity()).norm(),
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn bilayer_example_matches_the_derived_constants() {
        let (params, form) = default_setup();
        let m1 = Matrix3::from_diagonal(&Vector3::new(0.1, 0.0, 0.0));
        let texture = Texture::bilayer(m1, Matrix3::zeros()).unwrap();
        let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        assert_relative_eq!(
            (model.target_curvature() - Matrix2::new(-0.15, 0.0, 0.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-13
        );
        assert_relative_eq!(model.residual(), 0.001625, epsilon = 1e-12);
    }

    #[test]
    fn bilayer_residual_is_the_difference_form() {
        let (params, form) = default_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m1c = random_symmetric2(&mut rng, 0.3);
            let m2c = random_symmetric2(&mut rng, 0.3);
            let lift = |m: &Matrix2<f64>| {
                let mut out = Matrix3::zeros();
                out.fixed_view_mut::<2, 2>(0, 0).copy_from(m);
                out
            };
            let texture = Texture::bilayer(lift(&m1c), lift(&m2c)).unwrap();
            let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
            let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
            assert_relative_eq!(
                model.residual(),
                form.q2(&(m1c - m2c)) / 16.0,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                (model.target_curvature() + 1.5 * (m1c - m2c)).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn equal_layers_degenerate_to_a_plain_shift() {
        let (params, form) = default_setup();
        let m = Matrix3::new(0.2, 0.05, 0.0, 0.05, -0.1, 0.0, 0.0, 0.0, 0.3);
        let texture = Texture::bilayer(m, m).unwrap();
        let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        assert_abs_diff_eq!(model.target_curvature().norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.residual(), 0.0, epsilon = 1e-12);
        // The relaxed density is then the unshifted bending form.
        let g = Matrix2::new(0.3, -0.2, -0.2, 0.1);
        assert_relative_eq!(qbar2(&g, &model, &form), form.q2(&g) / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn shifts_move_the_model_covariantly() {
        let (params, form) = default_setup();
        let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
        let base = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let constant = Matrix2::new(0.3, -0.1, -0.1, 0.2);
        let linear = Matrix2::new(-0.2, 0.05, 0.05, 0.4);

        // A constant shift is absorbed by the midplane stretch.
        let shifted = profile.shifted(constant, Matrix2::zeros());
        let model = relax_thickness(&shifted, &form, DEFAULT_PROFILE_ORDER).unwrap();
        assert_relative_eq!(
            (model.target_curvature() - base.target_curvature()).norm(),
            0.0,
            epsilon = 1e-11
        );
        assert_relative_eq!(model.residual(), base.residual(), epsilon = 1e-11);

        // A linear shift moves the target by its slope.
        let shifted = profile.shifted(Matrix2::zeros(), linear);
        let model = relax_thickness(&shifted, &form, DEFAULT_PROFILE_ORDER).unwrap();
        assert_relative_eq!(
            (model.target_curvature() - (base.target_curvature() - linear)).norm(),
            0.0,
            epsilon = 1e-11
        );
        assert_relative_eq!(model.residual(), base.residual(), epsilon = 1e-11);
    }

    #[test]
    fn oracle_reproduces_the_closed_model_for_all_textures() {
        let (params, form) = default_setup();
        let textures = [
            Texture::Twist,
            Texture::SplayBend,
            Texture::constant_director(Vector3::new(0.6, 0.0, 0.8)).unwrap(),
            Texture::bilayer(
                Matrix3::from_diagonal(&Vector3::new(0.1, -0.2, 0.05)),
                Matrix3::from_diagonal(&Vector3::new(-0.05, 0.1, 0.0)),
            )
            .unwrap(),
        ];
        for texture in textures {
            let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
            let closed = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
            let oracle = relax_thickness_oracle(&profile, &form, 64).unwrap();
            assert_relative_eq!(oracle.alpha_coeff(), closed.alpha_coeff(), epsilon = 1e-10);
            assert_relative_eq!(
                (oracle.target_curvature() - closed.target_curvature()).norm(),
                0.0,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                oracle.residual(),
                closed.residual(),
                epsilon = 1e-10,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn oracle_value_matches_qbar2_pointwise() {
        let (params, form) = default_setup();
        let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let oracle = ThicknessOracle::new(&profile, &form, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_symmetric2(&mut rng, 2.0);
            assert_relative_eq!(
                oracle.value(&g),
                qbar2(&g, &model, &form),
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn qbar2_at_zero_matches_the_closed_expression() {
        let (params, form) = default_setup();
        let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let k = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let expected = form.q2(&Matrix2::new(-k, 0.0, 0.0, k)) / 12.0 + twist_residual(&params);
        assert_relative_eq!(qbar2(&Matrix2::zeros(), &model, &form), expected, epsilon = 1e-12);
    }

    #[test]
    fn comparison_flags_exactly_the_known_discrepancies() {
        let (params, form) = default_setup();

        let twist_profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
        let twist = relax_thickness(&twist_profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let report = reference_comparison(&Texture::Twist, &params, &twist, &form);
        assert!(!report.any_discrepancy);

        let sb_profile = ThicknessProfile::from_texture(&Texture::SplayBend, &params).unwrap();
        let sb = relax_thickness(&sb_profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let report = reference_comparison(&Texture::SplayBend, &params, &sb, &form);
        assert!(report.any_discrepancy);
        let flagged: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.discrepancy)
            .map(|e| e.quantity.as_str())
            .collect();
        assert_eq!(flagged, vec!["residual"]);

        let m1 = Matrix3::from_diagonal(&Vector3::new(0.1, 0.0, 0.0));
        let texture = Texture::bilayer(m1, Matrix3::zeros()).unwrap();
        let profile = ThicknessProfile::from_texture(&texture, &params).unwrap();
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER).unwrap();
        let report = reference_comparison(&texture, &params, &model, &form);
        let flagged: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.discrepancy)
            .map(|e| e.quantity.as_str())
            .collect();
        assert_eq!(flagged, vec!["residual"]);
    }

    #[test]
    fn custom_profiles_must_be_symmetric() {
        let params = MaterialParams::default();
        let bad = ThicknessProfile::smooth(|_t| Matrix2::new(0.0, 1.0, 0.0, 0.0), &params);
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn qbar2_is_minimized_at_the_target(
            g11 in -1.5..1.5f64, g22 in -1.5..1.5f64, g12 in -1.5..1.5f64,
        ) {
            let params = MaterialParams::default();
            let form = Quadratic2::from_material(&params);
            let profile = ThicknessProfile::from_texture(&Texture::Twist, &params).unwrap();
            let model = relax_thickness(&profile, &form, 24).unwrap();
            let g = Matrix2::new(g11, g12, g12, g22);
            prop_assert!(qbar2(&g, &model, &form) >= model.residual() - 1e-12);
        }

        #[test]
        fn q2_ignores_skew_parts(
            a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, s in -2.0..2.0f64,
        ) {
            let form = Quadratic2::new(1.0, 0.3).unwrap();
            let sym = Matrix2::new(a, c, c, b);
            let skewed = Matrix2::new(a, c + s, c - s, b);
            prop_assert!((form.q2(&sym) - form.q2(&skewed)).abs() < 1e-12);
        }
    }
}
