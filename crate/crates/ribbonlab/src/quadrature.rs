//! Gauss–Legendre quadrature on intervals and panel unions.
//!
//! Rules are generated by Newton iteration on the Legendre recurrence, which
//! is accurate to machine precision for the orders used here (< 200).  All
//! thickness integrals in this crate are either polynomial, trigonometric, or
//! piecewise constant, so a fixed rule per smooth panel converges to round-off
//! well below the order-doubling tolerance used in cross-checks.

use crate::error::{Error, Result};

/// Gauss–Legendre rule of given order on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule with `n >= 1` points.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in symmetric pairs; solve for the non-negative half.
        for i in 0..n.div_ceil(2) {
            // Tricomi-style initial guess for the i-th root in decreasing order.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (p2, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to the interval `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Integrates `f` over a union of panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, panels: &[(f64, f64)], mut f: F) -> f64 {
        panels
            .iter()
            .map(|&(a, b)| self.integrate(a, b, &mut f))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let k = k as f64;
        let p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Integrates over panels at order `n`, re-evaluates at `2n`, and errors out
/// if the two disagree beyond `rel_tol` relative to the integral scale.
pub fn integrate_checked<F: FnMut(f64) -> f64>(
    panels: &[(f64, f64)],
    n: usize,
    rel_tol: f64,
    mut f: F,
) -> Result<f64> {
    let coarse = GaussLegendre::new(n).integrate_panels(panels, &mut f);
    let fine = GaussLegendre::new(2 * n).integrate_panels(panels, &mut f);
    let scale = fine.abs().max(1.0);
    if (coarse - fine).abs() > rel_tol * scale {
        return Err(Error::Quadrature(format!(
            "order {n} gives {coarse:e}, order {} gives {fine:e}; disagreement exceeds {rel_tol:e}",
            2 * n
        )));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_rules_match_known_nodes() {
        let g2 = GaussLegendre::new(2);
        assert_relative_eq!(g2.nodes[1], 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g2.weights[0], 1.0, epsilon = 1e-15);
        let g3 = GaussLegendre::new(3);
        assert_relative_eq!(g3.nodes[2], (0.6_f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g3.weights[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // n-point Gauss integrates degree 2n-1 exactly.
        let g = GaussLegendre::new(5);
        let exact = 2.0 / 10.0; // int_{-1}^{1} x^9 dx = 0, x^8 gives 2/9... use x^8
        let v = g.integrate(-1.0, 1.0, |x| x.powi(8));
        assert_relative_eq!(v, 2.0 / 9.0, epsilon = 1e-14);
        let v9 = g.integrate(0.0, 1.0, |x| x.powi(9));
        assert_relative_eq!(v9, 1.0 / 10.0, epsilon = 1e-14);
        let _ = exact;
    }

    #[test]
    fn trigonometric_integral_converges() {
        let g = GaussLegendre::new(16);
        let v = g.integrate(-0.5, 0.5, |t| (std::f64::consts::PI * t).cos());
        assert_relative_eq!(v, 2.0 / std::f64::consts::PI, epsilon = 1e-14);
    }

    #[test]
    fn split_panels_handle_jumps_exactly() {
        let g = GaussLegendre::new(4);
        let v = g.integrate_panels(&[(-0.5, 0.0), (0.0, 0.5)], |t| {
            if t >= 0.0 {
                2.0
            } else {
                -1.0
            }
        });
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn checked_integration_flags_disagreement() {
        // A step inside a single panel cannot converge between orders.  The
        // jump sits at 0.3 so the two symmetric rules bracket it differently.
        let r = integrate_checked(&[(-1.0, 1.0)], 4, 1e-12, |t| if t > 0.3 { 1.0 } else { 0.0 });
        assert!(r.is_err());
        let ok = integrate_checked(&[(-1.0, 1.0)], 8, 1e-12, |t| t * t);
        assert_relative_eq!(ok.unwrap(), 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn high_order_rule_is_well_formed() {
        let g = GaussLegendre::new(96);
        let total: f64 = g.weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        for w in &g.weights {
            assert!(*w > 0.0);
        }
        for pair in g.nodes.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }
}
