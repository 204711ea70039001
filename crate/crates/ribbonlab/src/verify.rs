//! Cross-module verification suite.
//!
//! Each check bundles one acceptance-level claim about the pipeline —
//! closed forms against quadrature oracles, plate minima against rod minima,
//! recovery ansatz energies against the plate limit — into a pass/fail
//! result with a human-readable detail string.  All random sampling uses
//! fixed seeds, so results are reproducible bit for bit.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Matrix3, Rotation3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{integrate_constant_frame, integrate_frame, recover_rates};
use crate::material::{self, MaterialParams, Texture};
use crate::plate::{
    gamma_scaling_sweep, minimize_over_cylinders, CylindricalIsometry, PlateDomain,
    QuadratureOrders,
};
use crate::relaxation::{
    qbar2, relax_thickness, relax_thickness_oracle, Quadratic2, ThicknessOracle,
    ThicknessProfile, DEFAULT_PROFILE_ORDER,
};
use crate::rod::{rod_energy, RodDensity};

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Ordinal of the acceptance criterion (1-based; 0 for auxiliary checks).
    pub id: u8,
    /// Short name of the claim.
    pub name: &'static str,
    /// Whether every assertion held.
    pub passed: bool,
    /// Key measured values, or the list of violated assertions.
    pub details: String,
    /// Wall-clock runtime of the check.
    pub runtime: Duration,
}

impl CheckResult {
    /// One-line pass/fail summary.
    pub fn status_line(&self) -> String {
        format!(
            "{} criterion {:2} — {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime.as_secs_f64(),
            self.details
        )
    }
}

/// Assertion collector for one check.
struct Checker {
    failures: Vec<String>,
    notes: Vec<String>,
    start: Instant,
}

impl Checker {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn require(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    fn note(&mut self, message: impl Into<String>) {
        self.notes.push(message.into());
    }

    fn finish(self, id: u8, name: &'static str) -> CheckResult {
        let runtime = self.start.elapsed();
        let passed = self.failures.is_empty();
        let details = if passed {
            self.notes.join("; ")
        } else {
            self.failures.join(" | ")
        };
        CheckResult {
            id,
            name,
            passed,
            details,
            runtime,
        }
    }
}

fn twist_model() -> Result<(MaterialParams, Quadratic2, crate::relaxation::PlateModel)> {
    let params = MaterialParams::default();
    let profile = ThicknessProfile::from_texture(&Texture::Twist, &params)?;
    let form = Quadratic2::from_material(&params);
    let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER)?;
    Ok((params, form, model))
}

fn random_symmetric2(rng: &mut ChaCha8Rng, scale: f64) -> Matrix2<f64> {
    let a = rng.random_range(-scale..scale);
    let b = rng.random_range(-scale..scale);
    let c = rng.random_range(-scale..scale);
    Matrix2::new(a, b, b, c)
}

fn random_symmetric3(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    let d: Vec<f64> = (0..6).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix3::new(
        d[0], d[3], d[4], d[3], d[1], d[5], d[4], d[5], d[2],
    )
}

fn max_component_gap(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    (a - b).abs().max()
}

/// Criterion 1: closed-form twist plate constants and their quadrature
/// oracle.
pub fn check_twist_constants() -> Result<CheckResult> {
    let mut c = Checker::new();
    let (params, form, model) = twist_model()?;
    let ratio = params.activation_ratio();
    let k = 6.0 / (PI * PI) * ratio;
    let pi2 = PI * PI;
    let beta_expected = form.mu() * (pi2 * pi2 - 4.0 * pi2 - 48.0) / (4.0 * pi2 * pi2)
        * ratio
        * ratio;

    c.require(model.alpha_coeff() == 1.0 / 12.0, || {
        format!("alpha = {} is not exactly 1/12", model.alpha_coeff())
    });
    let target_gap = max_component_gap(
        model.target_curvature(),
        &Matrix2::new(-k, 0.0, 0.0, k),
    );
    c.require(target_gap <= 1e-10, || {
        format!("target curvature off by {target_gap:.3e}")
    });
    let beta_gap = (model.residual() - beta_expected).abs();
    c.require(beta_gap <= 1e-10, || {
        format!("residual off by {beta_gap:.3e}")
    });

    let profile = ThicknessProfile::from_texture(&Texture::Twist, &params)?;
    let oracle = relax_thickness_oracle(&profile, &form, DEFAULT_PROFILE_ORDER)?;
    let oracle_alpha = (oracle.alpha_coeff() - model.alpha_coeff()).abs();
    let oracle_target = max_component_gap(oracle.target_curvature(), model.target_curvature());
    let oracle_beta = (oracle.residual() - model.residual()).abs();
    c.require(oracle_alpha <= 1e-8, || {
        format!("oracle alpha gap {oracle_alpha:.3e}")
    });
    c.require(oracle_target <= 1e-8, || {
        format!("oracle target gap {oracle_target:.3e}")
    });
    c.require(oracle_beta <= 1e-8, || {
        format!("oracle residual gap {oracle_beta:.3e}")
    });

    let elapsed = c.start.elapsed();
    c.require(elapsed < Duration::from_secs(1), || {
        format!("runtime {:.2} s exceeds 1 s", elapsed.as_secs_f64())
    });
    c.note(format!(
        "alpha = 1/12 exact, target gap {target_gap:.1e}, residual gap {beta_gap:.1e}, \
         oracle gaps ({oracle_alpha:.1e}, {oracle_target:.1e}, {oracle_beta:.1e})"
    ));
    Ok(c.finish(1, "twist plate constants"))
}

/// Criterion 2: relaxed density closed form against the direct-minimization
/// oracle on random curvature arguments for every texture.
pub fn check_oracle_equivalence() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0002);
    let params = MaterialParams::default();
    let form = Quadratic2::from_material(&params);

    let mut textures: Vec<(String, Texture, usize)> = vec![
        ("twist".into(), Texture::Twist, 1000),
        ("splay-bend".into(), Texture::SplayBend, 1000),
        (
            "constant-director".into(),
            Texture::constant_director(Vector3::z())?,
            1000,
        ),
    ];
    for i in 0..10 {
        let m1 = random_symmetric3(&mut rng, 0.5);
        let m2 = random_symmetric3(&mut rng, 0.5);
        textures.push((format!("bilayer {i}"), Texture::bilayer(m1, m2)?, 100));
    }

    let mut worst: f64 = 0.0;
    let mut worst_label = String::new();
    for (label, texture, draws) in &textures {
        let profile = ThicknessProfile::from_texture(texture, &params)?;
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER)?;
        let oracle = ThicknessOracle::new(&profile, &form, DEFAULT_PROFILE_ORDER)?;
        for _ in 0..*draws {
            let g = random_symmetric2(&mut rng, 1.5);
            let gap = (qbar2(&g, &model, &form) - oracle.value(&g)).abs();
            if gap > worst {
                worst = gap;
                worst_label = label.clone();
            }
        }
    }
    c.require(worst < 1e-8, || {
        format!("worst closed-form vs oracle gap {worst:.3e} ({worst_label})")
    });

    let elapsed = c.start.elapsed();
    c.require(elapsed < Duration::from_secs(10), || {
        format!("runtime {:.2} s exceeds 10 s", elapsed.as_secs_f64())
    });
    c.note(format!(
        "4000 random arguments across 13 textures, worst gap {worst:.1e}"
    ));
    Ok(c.finish(2, "thickness relaxation oracle equivalence"))
}

/// Criterion 3: splay-bend target curvature, oracle-consistent residual,
/// and the recorded comparison against the printed residual constant.
pub fn check_splaybend_constants() -> Result<CheckResult> {
    let mut c = Checker::new();
    let params = MaterialParams::default();
    let form = Quadratic2::from_material(&params);
    let profile = ThicknessProfile::from_texture(&Texture::SplayBend, &params)?;
    let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER)?;
    let ratio = params.activation_ratio();
    let k = 6.0 / (PI * PI) * ratio;

    let target_gap = max_component_gap(
        model.target_curvature(),
        &Matrix2::new(-k, 0.0, 0.0, 0.0),
    );
    c.require(target_gap <= 1e-10, || {
        format!("target curvature off by {target_gap:.3e}")
    });

    let oracle = relax_thickness_oracle(&profile, &form, DEFAULT_PROFILE_ORDER)?;
    let oracle_gap = (oracle.residual() - model.residual()).abs();
    c.require(oracle_gap <= 1e-8, || {
        format!("closed-form vs oracle residual gap {oracle_gap:.3e}")
    });

    // The printed residual constant differs from the recomputed relaxation;
    // record the comparison without failing on it.
    let comparison =
        crate::relaxation::reference_comparison(&Texture::SplayBend, &params, &model, &form);
    let residual_entry = comparison
        .entries
        .iter()
        .find(|e| e.quantity == "residual")
        .expect("comparison always carries a residual entry");
    c.note(format!(
        "target gap {target_gap:.1e}, oracle residual gap {oracle_gap:.1e}; printed residual \
         {} = {:.6e} vs computed {:.6e} (discrepancy flag {})",
        residual_entry.reference_expression,
        residual_entry.reference_values[0],
        residual_entry.computed_values[0],
        residual_entry.discrepancy
    ));
    Ok(c.finish(3, "splay-bend target and recorded residual comparison"))
}

/// Criterion 4: bilayer residual closed form against the oracle across
/// random pairs, plus the degenerate equal-layer case.
pub fn check_bilayer_residual() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let params = MaterialParams::default();
    let form = Quadratic2::from_material(&params);

    let mut worst_closed: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..25 {
        let m1 = random_symmetric3(&mut rng, 0.5);
        let m2 = random_symmetric3(&mut rng, 0.5);
        let texture = Texture::bilayer(m1, m2)?;
        let diff = (m1 - m2).fixed_view::<2, 2>(0, 0).into_owned();
        let expected = form.q2(&diff) / 16.0;

        let profile = ThicknessProfile::from_texture(&texture, &params)?;
        let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER)?;
        worst_closed = worst_closed.max((model.residual() - expected).abs());
        let oracle = relax_thickness_oracle(&profile, &form, DEFAULT_PROFILE_ORDER)?;
        worst_oracle = worst_oracle.max((oracle.residual() - expected).abs());
    }
    c.require(worst_closed <= 1e-8, || {
        format!("closed-form residual misses (1/16) q2(M1' - M2') by {worst_closed:.3e}")
    });
    c.require(worst_oracle <= 1e-8, || {
        format!("oracle residual misses (1/16) q2(M1' - M2') by {worst_oracle:.3e}")
    });

    let m = random_symmetric3(&mut rng, 0.5);
    let texture = Texture::bilayer(m, m)?;
    let profile = ThicknessProfile::from_texture(&texture, &params)?;
    let model = relax_thickness(&profile, &form, DEFAULT_PROFILE_ORDER)?;
    let target_norm = model.target_curvature().abs().max();
    c.require(target_norm <= 1e-12, || {
        format!("equal layers leave target {target_norm:.3e}")
    });
    c.require(model.residual().abs() <= 1e-12, || {
        format!("equal layers leave residual {:.3e}", model.residual())
    });

    c.note(format!(
        "25 random pairs: residual = (1/16) q2(M1' - M2') within {:.1e} (closed) / {:.1e} \
         (oracle); equal layers exactly relaxed",
        worst_closed.max(1e-18),
        worst_oracle.max(1e-18)
    ));
    Ok(c.finish(4, "bilayer residual closed form"))
}

/// Criterion 5: cylindrical minimizers of the twist plate energy.
pub fn check_plate_minimum() -> Result<CheckResult> {
    let mut c = Checker::new();
    let (params, form, model) = twist_model()?;
    let ratio = params.activation_ratio();
    let gamma = form.gamma();
    let domain = PlateDomain::axis_aligned(2.0, 0.5)?;
    let minimum = minimize_over_cylinders(&model, &form, &domain)?;

    let expected_energy = 3.0 * form.mu() / PI.powi(4) * ratio * ratio * (1.0 + 2.0 * gamma)
        / (1.0 + gamma)
        + 0.5 * model.residual();
    let energy_gap = (minimum.energy_per_area - expected_energy).abs();
    c.require(energy_gap <= 1e-8, || {
        format!("minimum energy per area off by {energy_gap:.3e}")
    });
    c.require(minimum.minimizers.len() == 2 && !minimum.degenerate_family, || {
        format!(
            "expected exactly two minimizer directions, got {} (degenerate: {})",
            minimum.minimizers.len(),
            minimum.degenerate_family
        )
    });
    if minimum.minimizers.len() == 2 {
        let spacing =
            ((minimum.minimizers[1].phi - minimum.minimizers[0].phi).abs() - PI / 2.0).abs();
        c.require(spacing <= 1e-6, || {
            format!("minimizer directions not pi/2 apart (off by {spacing:.3e})")
        });
    }
    let kappa_expected = 6.0 / (PI * PI * (1.0 + gamma)) * ratio;
    let mut kappa_gap: f64 = 0.0;
    for m in &minimum.minimizers {
        kappa_gap = kappa_gap.max((m.kappa.abs() - kappa_expected).abs());
    }
    c.require(kappa_gap <= 1e-8, || {
        format!("optimal curvature magnitude off by {kappa_gap:.3e}")
    });

    c.note(format!(
        "energy/area {:.7} (gap {energy_gap:.1e}), directions {:?}, |kappa*| gap {kappa_gap:.1e}",
        minimum.energy_per_area,
        minimum
            .minimizers
            .iter()
            .map(|m| (m.phi * 1e6).round() / 1e6)
            .collect::<Vec<_>>()
    ));
    Ok(c.finish(5, "cylinder minimizers of the plate energy"))
}

#[derive(Clone, Copy)]
enum Boundary {
    Disk,
    Hyperbola,
}

/// Boundary probe points for the rod density regions at angle `theta`,
/// paired with outward normals.
fn boundary_probe(
    density: &RodDensity,
    boundary: Boundary,
    rng: &mut ChaCha8Rng,
) -> Option<(Vector2<f64>, Vector2<f64>)> {
    let s = density.k() * density.a_theta() / (1.0 + density.gamma());
    match boundary {
        Boundary::Disk => {
            if s.abs() < 1e-12 {
                return None;
            }
            let tau = rng.random_range(0.0..(2.0 * PI));
            let center = Vector2::new(0.5 * s, 0.0);
            let radius = 0.5 * s.abs();
            let point = center + radius * Vector2::new(tau.cos(), tau.sin());
            let normal = (point - center) / radius;
            Some((point, normal))
        }
        Boundary::Hyperbola => {
            let beta = rng.random_range(0.05..(2.0 * density.k().abs().max(0.5)));
            let beta = if rng.random_bool(0.5) { beta } else { -beta };
            let sigma = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let alpha = 0.5 * (-s + sigma * (s * s + 4.0 * beta * beta).sqrt());
            let gradient = Vector2::new(s + 2.0 * alpha, -2.0 * beta);
            let norm = gradient.norm();
            if norm < 1e-10 {
                return None;
            }
            Some((Vector2::new(alpha, beta), gradient / norm))
        }
    }
}

/// Criterion 6: rod density continuity across region boundaries, brute-force
/// minimum against the closed-form minimum set, and the cross-module
/// identity with the plate minimum.
pub fn check_rod_density() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0006);
    let (_, form, model) = twist_model()?;
    let domain = PlateDomain::axis_aligned(2.0, 0.5)?;
    let plate_minimum = minimize_over_cylinders(&model, &form, &domain)?;

    let thetas = [0.0, PI / 8.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let offset = 1e-7;
    let mut probes = 0usize;
    let mut worst_jump: f64 = 0.0;
    let mut worst_value_gap: f64 = 0.0;
    let mut worst_coverage: f64 = 1.0;
    let mut worst_identity: f64 = 0.0;

    for &theta in &thetas {
        let density = RodDensity::new(&model, theta)?;
        // 2000 probes per angle; when the disk region is empty (cos 2θ = 0)
        // its share moves to the hyperbola boundary.
        let disk_share = if density.a_theta().abs() < 1e-12 { 0 } else { 1000 };
        let shares = [(Boundary::Disk, disk_share), (Boundary::Hyperbola, 2000 - disk_share)];
        for (boundary, share) in shares {
            for _ in 0..share {
                let (point, normal) = boundary_probe(&density, boundary, &mut rng)
                    .expect("probe generation only fails on an empty disk");
                let inner = density.value(point.x - offset * normal.x, point.y - offset * normal.y);
                let outer = density.value(point.x + offset * normal.x, point.y + offset * normal.y);
                let scale = inner.abs().max(outer.abs()).max(1.0);
                worst_jump = worst_jump.max((inner - outer).abs() / scale);
                probes += 1;
            }
        }

        let min_set = density.min_set();
        let brute = density.min_brute(density.default_window(), [161, 161])?;
        worst_value_gap = worst_value_gap.max((brute.min_value - min_set.value).abs());
        worst_coverage = worst_coverage.min(brute.alpha_coverage(min_set.alpha_interval));
        if let Some((lo, hi)) = brute.beta_range() {
            let beta_tol = brute.grid_step.1;
            c.require(
                (lo - min_set.beta).abs() <= beta_tol && (hi - min_set.beta).abs() <= beta_tol,
                || {
                    format!(
                        "theta {theta:.3}: brute-force beta range [{lo:.4}, {hi:.4}] misses \
                         {:.4}",
                        min_set.beta
                    )
                },
            );
        }
        worst_identity =
            worst_identity.max((min_set.value - plate_minimum.energy_per_area).abs());
    }

    c.require(probes >= 10_000, || {
        format!("only {probes} boundary probes were generated")
    });
    c.require(worst_jump < 1e-5, || {
        format!("boundary jump {worst_jump:.3e} of scale")
    });
    c.require(worst_value_gap <= 1e-6, || {
        format!("brute-force minimum off by {worst_value_gap:.3e}")
    });
    c.require(worst_coverage >= 0.95, || {
        format!("minimum-set coverage only {:.1}%", 100.0 * worst_coverage)
    });
    c.require(worst_identity <= 1e-12, || {
        format!("rod minimum vs plate minimum per area differ by {worst_identity:.3e}")
    });

    c.note(format!(
        "{probes} probes, worst jump {worst_jump:.1e}; brute minimum gap {worst_value_gap:.1e}, \
         coverage >= {:.1}%, rod-plate identity gap {worst_identity:.1e}",
        100.0 * worst_coverage
    ));
    Ok(c.finish(6, "rod density continuity and minimum"))
}

/// Criterion 7: the two reflection/rotation symmetries of the rod density.
pub fn check_rod_symmetries() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let (_, _, model) = twist_model()?;
    let window = RodDensity::new(&model, 0.0)?.default_window();

    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let theta = i as f64 * PI / 8.0;
        let density = RodDensity::new(&model, theta)?;
        // Both densities are pi-periodic in the cut angle, so reducing the
        // mirrored and rotated angles into [0, pi) is exact.
        let mirrored = RodDensity::new(&model, (PI / 2.0 - theta).rem_euclid(PI))?;
        let rotated = RodDensity::new(&model, (theta + PI / 2.0).rem_euclid(PI))?;
        for _ in 0..1000 {
            let alpha = rng.random_range(window[0].0..window[0].1);
            let beta = rng.random_range(window[1].0..window[1].1);
            let value = density.value(alpha, beta);
            worst = worst.max((value - mirrored.value(-alpha, beta)).abs());
            worst = worst.max((value - rotated.value(-alpha, -beta)).abs());
        }
    }
    c.require(worst <= 1e-12, || {
        format!("worst symmetry defect {worst:.3e}")
    });
    c.note(format!(
        "8000 samples x 2 identities, worst defect {worst:.1e}"
    ));
    Ok(c.finish(7, "rod density symmetries"))
}

/// Criterion 8: frame integration drift, rate-recovery roundtrip with
/// second-order convergence, and agreement of frame energies with the rod
/// minimum.
pub fn check_geometry() -> Result<CheckResult> {
    let mut c = Checker::new();
    let identity = Matrix3::identity();

    let trajectory = integrate_frame(
        &|s: f64| 0.4 * (1.3 * s).sin(),
        &|s: f64| 0.3 * (0.7 * s).cos(),
        &identity,
        10.0,
        10_001,
    )?;
    let drift = trajectory.orthonormality_drift();
    c.require(drift < 1e-12, || format!("SO(3) drift {drift:.3e}"));

    let roundtrip_error = |n: usize| -> Result<f64> {
        let (a, b) = (0.1, 0.23);
        let traj = integrate_constant_frame(a, b, &identity, 3.0, n)?;
        let rates = recover_rates(&traj)?;
        let mut err: f64 = 0.0;
        for i in 0..traj.len() {
            err = err.max((rates.flexure[i] - a).abs());
            err = err.max((rates.torsion[i] - b).abs());
        }
        Ok(err)
    };
    let coarse = roundtrip_error(400)?;
    let fine = roundtrip_error(800)?;
    c.require(coarse < 1e-4, || {
        format!("roundtrip error {coarse:.3e} at n = 400")
    });
    let ratio = coarse / fine;
    c.require((3.0..5.5).contains(&ratio), || {
        format!("convergence ratio {ratio:.2} not second order")
    });

    let (_, _, model) = twist_model()?;
    let density = RodDensity::new(&model, PI / 4.0)?;
    let min_set = density.min_set();
    let length = 2.0;
    let alpha = 0.5 * (min_set.alpha_interval.0 + min_set.alpha_interval.1);
    let traj = integrate_constant_frame(alpha, min_set.beta, &identity, length, 1001)?;
    let energy = rod_energy(&traj.to_frame_field()?, &density)?;
    let energy_gap = (energy - length * min_set.value).abs();
    c.require(energy_gap <= 1e-6, || {
        format!("min-set frame energy off by {energy_gap:.3e}")
    });

    c.note(format!(
        "drift {drift:.1e} over 10^4 steps, roundtrip {coarse:.1e} at n = 400 (ratio {ratio:.2}), \
         frame energy gap {energy_gap:.1e}"
    ));
    Ok(c.finish(8, "frame integration and rate recovery"))
}

/// Criterion 9: thickness scaling of the 3D energy on the twist cylinder
/// minimizer with the full-profile corrector.
pub fn check_gamma_scaling() -> Result<CheckResult> {
    let mut c = Checker::new();
    let params = MaterialParams::default();
    let (_, form, model) = twist_model()?;
    let domain = PlateDomain::axis_aligned(2.0, 0.5)?;
    let minimum = minimize_over_cylinders(&model, &form, &domain)?;
    let best = minimum.minimizers[0];
    let base = CylindricalIsometry::constant(best.phi, best.kappa, domain)?;

    let h_list = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let sweep = gamma_scaling_sweep(
        &Texture::Twist,
        &params,
        &base,
        &h_list,
        QuadratureOrders::default(),
    )?;

    for row in &sweep.rows {
        c.require(row.gap.is_finite(), || {
            format!("ansatz degenerated at h = {}", row.h)
        });
    }
    for pair in sweep.rows.windows(2) {
        c.require(pair[1].gap.abs() < pair[0].gap.abs(), || {
            format!(
                "gap magnitude not decreasing between h = {} and h = {}",
                pair[0].h, pair[1].h
            )
        });
    }
    c.require(sweep.slope >= 0.8, || {
        format!("fitted log-log slope {:.3} < 0.8", sweep.slope)
    });
    if let Some(last) = sweep.rows.last() {
        let relative = (last.rescaled_per_h2 - sweep.plate_energy).abs() / sweep.plate_energy;
        c.require(relative <= 0.05, || {
            format!("h = 1e-3 energy misses the plate limit by {:.2}%", 100.0 * relative)
        });
        c.note(format!(
            "plate limit {:.7}, slope {:.3}, final gap {:.2e} ({:.3}% of limit)",
            sweep.plate_energy,
            sweep.slope,
            last.gap,
            100.0 * relative
        ));
    }

    let elapsed = c.start.elapsed();
    c.require(elapsed < Duration::from_secs(60), || {
        format!("runtime {:.1} s exceeds 60 s", elapsed.as_secs_f64())
    });
    Ok(c.finish(9, "thickness scaling of the 3D energy"))
}

/// Criterion 10: bulk density Hessian, zero set, and the curvature
/// obstruction of the spontaneous metric.
pub fn check_material_layer() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_000A);
    let params = MaterialParams::default();

    let step = 1e-4;
    let mut worst_hessian: f64 = 0.0;
    for _ in 0..100 {
        let m = {
            let mut m = Matrix3::zeros();
            for r in 0..3 {
                for s in 0..3 {
                    m[(r, s)] = rng.random_range(-1.0..1.0);
                }
            }
            m
        };
        let plus = material::w0(&(Matrix3::identity() + step * m), &params);
        let minus = material::w0(&(Matrix3::identity() - step * m), &params);
        let fd = (plus + minus) / (step * step);
        let exact = material::q3(&m, &params);
        worst_hessian = worst_hessian.max((fd - exact).abs() / exact.max(1e-12));
    }
    c.require(worst_hessian < 1e-5, || {
        format!("finite-difference Hessian off by {worst_hessian:.3e} relative")
    });

    let mut worst_rotation: f64 = 0.0;
    for _ in 0..100 {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let rotation = Rotation3::new(axis * rng.random_range(0.0..PI));
        worst_rotation = worst_rotation.max(material::w0(rotation.matrix(), &params).abs());
    }
    c.require(worst_rotation < 1e-12, || {
        format!("density on rotations reaches {worst_rotation:.3e}")
    });

    let mut min_positive = f64::INFINITY;
    for _ in 0..1000 {
        let mut f = Matrix3::zeros();
        for r in 0..3 {
            for s in 0..3 {
                f[(r, s)] = rng.random_range(-1.5..1.5);
            }
        }
        min_positive = min_positive.min(material::w0(&f, &params));
    }
    c.require(min_positive > 0.0, || {
        format!("density on a random non-rotation dropped to {min_positive:.3e}")
    });

    let twist_defect = material::riemann_flatness_defect(&Texture::Twist, &params, 0.1, 64)?;
    c.require(twist_defect > 1e-4, || {
        format!("twist curvature obstruction only {twist_defect:.3e}")
    });
    let flat_params = MaterialParams::new(1.0, 0.3, 0.0, 1.0)?;
    let flat_defect =
        material::riemann_flatness_defect(&Texture::Twist, &flat_params, 0.1, 64)?;
    c.require(flat_defect < 1e-10, || {
        format!("inactive metric shows spurious curvature {flat_defect:.3e}")
    });

    c.note(format!(
        "Hessian gap {worst_hessian:.1e}, rotations <= {worst_rotation:.1e}, smallest \
         non-rotation density {min_positive:.2}, metric defects {twist_defect:.2e} (twist) / \
         {flat_defect:.1e} (inactive)"
    ));
    Ok(c.finish(10, "bulk energy density and curvature obstruction"))
}

/// Negative control: perturbing the disk-branch coefficient away from its
/// continuity-determined value must break boundary continuity.  Passes when
/// the probe detects the break.
pub fn check_continuity_negative_control() -> Result<CheckResult> {
    let mut c = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_00FF);
    let (_, form, model) = twist_model()?;
    let perturbed =
        RodDensity::with_dbranch_ratio(&model, 0.0, Some(1.05 / (1.0 + form.gamma())))?;

    let offset = 1e-7;
    let mut worst_jump: f64 = 0.0;
    for _ in 0..1000 {
        let Some((point, normal)) = boundary_probe(&perturbed, Boundary::Disk, &mut rng) else {
            continue;
        };
        let inner = perturbed.value(point.x - offset * normal.x, point.y - offset * normal.y);
        let outer = perturbed.value(point.x + offset * normal.x, point.y + offset * normal.y);
        let scale = inner.abs().max(outer.abs()).max(1.0);
        worst_jump = worst_jump.max((inner - outer).abs() / scale);
    }
    c.require(worst_jump > 1e-4, || {
        format!("perturbed branch constant went undetected (worst jump {worst_jump:.3e})")
    });
    c.note(format!(
        "perturbed disk branch produces boundary jump {worst_jump:.1e} (detected)"
    ));
    Ok(c.finish(0, "boundary continuity negative control"))
}

/// Runs the ten acceptance checks in order.
pub fn run_all() -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_twist_constants()?,
        check_oracle_equivalence()?,
        check_splaybend_constants()?,
        check_bilayer_residual()?,
        check_plate_minimum()?,
        check_rod_density()?,
        check_rod_symmetries()?,
        check_geometry()?,
        check_gamma_scaling()?,
        check_material_layer()?,
    ])
}
