//! Gauss–Legendre rules and tensor-product averages over Bloch spheres.
//!
//! A pure qubit state `cos(θ/2) e^{iΦ}|0⟩ + sin(θ/2)|1⟩` is parameterized by
//! `u = cos θ ∈ [−1, 1]` and `Φ ∈ [0, 2π)`; the uniform measure `sin θ dθ dΦ / 4π`
//! becomes `du dΦ / 4π`, which both Gauss–Legendre factors integrate directly.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be >= 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let pn_1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * pn - pn_1) / (x * x - 1.0);
    (pn, d)
}

/// A point on the Bloch sphere with its quadrature weight (weights over one
/// sphere sum to one).
#[derive(Debug, Clone, Copy)]
pub struct BlochNode {
    /// Amplitude on the first basis state, `cos(θ/2) e^{iΦ}`.
    pub first: Complex64,
    /// Amplitude on the second basis state, `sin(θ/2)`.
    pub second: Complex64,
    pub weight: f64,
}

/// Tensor-product rule on one Bloch sphere: `polar` points in `cos θ` and
/// `azimuthal` points in `Φ`.
pub fn bloch_rule(polar: usize, azimuthal: usize) -> Vec<BlochNode> {
    let u_rule = GaussLegendre::new(polar);
    let phi_rule = GaussLegendre::new(azimuthal);
    let mut out = Vec::with_capacity(polar * azimuthal);
    for (u, wu) in u_rule.nodes.iter().zip(&u_rule.weights) {
        // cos(θ/2) = sqrt((1+u)/2), sin(θ/2) = sqrt((1-u)/2)
        let c = ((1.0 + u) * 0.5).sqrt();
        let s = ((1.0 - u) * 0.5).sqrt();
        for (x, wx) in phi_rule.nodes.iter().zip(&phi_rule.weights) {
            let phi = PI * (x + 1.0);
            out.push(BlochNode {
                first: Complex64::from_polar(c, phi),
                second: Complex64::new(s, 0.0),
                // du dΦ / 4π, with dΦ = π dx
                weight: wu * wx / 4.0,
            });
        }
    }
    out
}

/// Result of an adaptive average, with the order at which it converged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub order: usize,
    /// Change between the last two orders.
    pub change: f64,
}

/// Absolute change between successive order doublings required for convergence.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Doubles the order starting at `start` until the largest component of the
/// estimate moves by less than [`QUADRATURE_TOLERANCE`] or `max_order` is
/// reached.
pub fn adaptive<const K: usize>(
    start: usize,
    max_order: usize,
    mut estimate: impl FnMut(usize) -> [f64; K],
) -> Converged<[f64; K]> {
    let mut order = start.max(1);
    let mut prev = estimate(order);
    loop {
        let next_order = order * 2;
        let next = estimate(next_order);
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < QUADRATURE_TOLERANCE || next_order >= max_order {
            return Converged {
                value: next,
                order: next_order,
                change,
            };
        }
        order = next_order;
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_order_nodes_match_tables() {
        let g = GaussLegendre::new(2);
        assert_abs_diff_eq!(g.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights[0], 1.0, epsilon = 1e-15);

        let g = GaussLegendre::new(3);
        assert_abs_diff_eq!(g.nodes[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights[0], 5.0 / 9.0, epsilon = 1e-15);

        let g = GaussLegendre::new(1);
        assert_eq!(g.nodes, vec![0.0]);
        assert_abs_diff_eq!(g.weights[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..12 {
            let g = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let got = g.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let want = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert_abs_diff_eq!(got, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn high_order_weights_sum_to_two() {
        for n in [64, 128, 257] {
            let g = GaussLegendre::new(n);
            assert_abs_diff_eq!(g.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn bloch_rule_is_normalized_and_states_are_unit() {
        let rule = bloch_rule(6, 5);
        assert_abs_diff_eq!(
            rule.iter().map(|n| n.weight).sum::<f64>(),
            1.0,
            epsilon = 1e-14
        );
        for n in &rule {
            assert_abs_diff_eq!(
                n.first.norm_sqr() + n.second.norm_sqr(),
                1.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn bloch_moments() {
        // <|a|^2> = 1/2, <|a|^4> = 1/3 over the uniform measure.
        let rule = bloch_rule(8, 2);
        let m2: f64 = rule.iter().map(|n| n.weight * n.first.norm_sqr()).sum();
        let m4: f64 = rule
            .iter()
            .map(|n| n.weight * n.first.norm_sqr().powi(2))
            .sum();
        assert_abs_diff_eq!(m2, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(m4, 1.0 / 3.0, epsilon = 1e-14);
        // <Re a^2>: azimuthal average of cos 2Φ vanishes
        let rule = bloch_rule(8, 16);
        let m: f64 = rule.iter().map(|n| n.weight * (n.first * n.first).re).sum();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_stops_once_stable() {
        let r = adaptive(2, 1024, |n| {
            [GaussLegendre::new(n).integrate(0.0, 1.0, |x| (3.0 * x).exp())]
        });
        assert_abs_diff_eq!(r.value[0], ((3.0f64).exp() - 1.0) / 3.0, epsilon = 1e-12);
        assert!(r.change < QUADRATURE_TOLERANCE);
        assert!(r.order <= 32);
    }
}
