use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes from Newton iteration on `P_n` seeded with the
    /// Chebyshev-like asymptotic guesses.
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = mid - half * z;
            nodes[n - 1 - i] = mid + half * z;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let g = GaussLegendre::new(64, 1.0, 2.0);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes[0] > 1.0 && g.nodes[63] < 2.0);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let g = GaussLegendre::new(64, 1.0, 2.0);
        // Degree 127 is the exactness limit; check a few degrees below it.
        for p in [1, 7, 40, 120] {
            let exact = (2f64.powi(p + 1) - 1.0) / (p + 1) as f64;
            let got = g.integrate(|r| r.powi(p));
            assert!((got - exact).abs() < 1e-12 * exact, "degree {p}");
        }
    }

    #[test]
    fn oscillatory_integrand() {
        let g = GaussLegendre::new(64, 1.0, 2.0);
        let k: f64 = 30.0;
        let exact = ((2.0 * k).sin() - k.sin()) / k;
        assert!((g.integrate(|r| (k * r).cos()) - exact).abs() < 1e-13);
    }
}
