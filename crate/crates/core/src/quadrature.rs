//! Gauss-Legendre rules on [0,1] and collapsed-coordinate rules on the
//! reference triangle.

use thiserror::Error;

/// Highest polynomial degree the rules here are built for.
pub const MAX_DEGREE: usize = 30;

/// Triangle rule degree used by assembly, estimation and error integrals.
pub const TRIANGLE_DEGREE: usize = 6;
/// Edge rule degree used everywhere.
pub const EDGE_DEGREE: usize = 7;

#[derive(Debug, Error, PartialEq)]
#[error("no {kind} quadrature of degree {degree} (maximum {MAX_DEGREE})")]
pub struct UnsupportedDegree {
    pub kind: &'static str,
    pub degree: usize,
}

/// Rule on the reference triangle (0,0),(1,0),(0,1). Points are barycentric.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on [0,1]; points are edge parameters.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

impl EdgeRule {
    pub fn new(degree: usize) -> Result<EdgeRule, UnsupportedDegree> {
        if degree > MAX_DEGREE {
            return Err(UnsupportedDegree { kind: "edge", degree });
        }
        let n = degree / 2 + 1;
        let (x, w) = gauss_legendre(n);
        Ok(EdgeRule {
            points: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
            degree,
        })
    }

    /// Physical points and weights on the segment `a`–`b`.
    pub fn on_segment(&self, a: [f64; 2], b: [f64; 2]) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        self.points.iter().zip(&self.weights).map(move |(&t, &w)| {
            ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len)
        })
    }
}

impl TriangleRule {
    /// Conical product rule: Gauss-Legendre in both directions with the
    /// Duffy collapse, which raises the integrand degree by one.
    pub fn new(degree: usize) -> Result<TriangleRule, UnsupportedDegree> {
        if degree > MAX_DEGREE {
            return Err(UnsupportedDegree {
                kind: "triangle",
                degree,
            });
        }
        let n = (degree + 1) / 2 + 1;
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let v = 0.5 * (x[j] + 1.0);
                let (s, t) = (u, (1.0 - u) * v);
                points.push([1.0 - s - t, s, t]);
                weights.push(0.25 * w[i] * w[j] * (1.0 - u));
            }
        }
        Ok(TriangleRule {
            points,
            weights,
            degree,
        })
    }

    /// Physical points and weights on the triangle `p` of area `area`.
    pub fn on_triangle<'a>(
        &'a self,
        p: &'a [[f64; 2]; 3],
        area: f64,
    ) -> impl Iterator<Item = ([f64; 2], f64)> + 'a {
        self.points.iter().zip(&self.weights).map(move |(b, &w)| {
            let x = b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0];
            let y = b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1];
            ([x, y], 2.0 * area * w)
        })
    }
}

/// The rules used by the discretisation.
#[derive(Debug, Clone)]
pub struct Rules {
    pub triangle: TriangleRule,
    pub edge: EdgeRule,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            triangle: TriangleRule::new(TRIANGLE_DEGREE).unwrap(),
            edge: EdgeRule::new(EDGE_DEGREE).unwrap(),
        }
    }
}
