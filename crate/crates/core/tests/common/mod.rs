//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;

use wgfem::mesh::{signed_area, Point};
use wgfem::quadrature::Rules;
use wgfem::system::{element_kernels, ElementKernel};
use wgfem::{bisect, DofLayout, Mesh, SpaceOrder, WgFunction};

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// A counter-clockwise triangle with all angles above ~5°, scaled randomly.
pub fn random_triangle(rng: &mut StdRng) -> [Point; 3] {
    loop {
        let scale = 10f64.powf(rng.gen_range(-2.0..0.5));
        let shift = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let mut p = [[0.0; 2]; 3];
        for q in p.iter_mut() {
            *q = [shift[0] + scale * rng.gen_range(-1.0..1.0), shift[1] + scale * rng.gen_range(-1.0..1.0)];
        }
        if signed_area(&p) < 0.0 {
            p.swap(1, 2);
        }
        if min_angle(&p) > 5f64.to_radians() {
            return p;
        }
    }
}

pub fn min_angle(p: &[Point; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let a = p[i];
            let b = p[(i + 1) % 3];
            let c = p[(i + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
            cos.clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `rounds` uniform bisection sweeps of `mesh`.
pub fn refine_uniform(mut mesh: Mesh, rounds: usize) -> Mesh {
    for _ in 0..rounds {
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        mesh = bisect(&mesh, &all).unwrap();
    }
    mesh
}

pub fn layout(mesh: Mesh) -> Arc<DofLayout> {
    Arc::new(DofLayout::build(Arc::new(mesh), SpaceOrder::ONE).unwrap())
}

/// Random element of V_h⁰ (zero on boundary edge DOFs), unit Euclidean norm.
pub fn random_homogeneous(layout: &Arc<DofLayout>, rng: &mut StdRng) -> WgFunction {
    let mut c: Vec<f64> = (0..layout.total())
        .map(|i| if layout.is_constrained(i) { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect();
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= n);
    WgFunction::from_coeffs(layout.clone(), c)
}

/// `s(v, v)` summed over the mesh.
pub fn stabilizer(kernels: &[ElementKernel], v: &WgFunction) -> f64 {
    kernels.iter().enumerate().map(|(t, k)| k.stabilizer_value(&v.local(t))).sum()
}

/// `Σ_τ ‖∇_w v - ∇v_0‖²_τ` by quadrature.
pub fn weak_minus_strong_gradient(kernels: &[ElementKernel], v: &WgFunction, rules: &Rules) -> f64 {
    let mut sum = 0.0;
    for (t, k) in kernels.iter().enumerate() {
        let local = v.local(t);
        let f = &k.frame;
        for (x, w) in rules.triangle.on_triangle(&f.points, f.area()) {
            let gw = k.ops.gradient_at(&local, x);
            let g0 = f.interior_gradient(v.interior(t), 1, x);
            for i in 0..2 {
                for j in 0..2 {
                    sum += w * (gw[i][j] - g0[i][j]).powi(2);
                }
            }
        }
    }
    sum
}

/// `Σ_e h_e⁻¹ ‖[v_0]‖²_e`: jumps of the interior traces on interior edges,
/// the trace itself on boundary edges.
pub fn interior_jump_norm(kernels: &[ElementKernel], v: &WgFunction, rules: &Rules) -> f64 {
    let mesh = v.layout().mesh().clone();
    let mut sum = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = mesh.edge_points(e);
        let mut n2 = 0.0;
        for (x, w) in rules.edge.on_segment(a, b) {
            let t1 = edge.first.triangle;
            let mut j = kernels[t1].frame.interior_value(v.interior(t1), 1, x);
            if let Some(s) = edge.second {
                let o = kernels[s.triangle].frame.interior_value(v.interior(s.triangle), 1, x);
                j = [j[0] - o[0], j[1] - o[1]];
            }
            n2 += w * (j[0] * j[0] + j[1] * j[1]);
        }
        sum += n2 / mesh.edge_length(e);
    }
    sum
}

/// Largest ratios `‖∇_w v - ∇v_0‖² / s(v,v)` and `Σ h_e⁻¹‖[v_0]‖² / s(v,v)`
/// over `samples` random `v ∈ V_h⁰`.
pub fn measured_constants(mesh: Mesh, samples: usize, rng: &mut StdRng) -> (f64, f64) {
    let rules = Rules::default();
    let l = layout(mesh);
    let kernels = element_kernels(&l, &rules).unwrap();
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for _ in 0..samples {
        let v = random_homogeneous(&l, rng);
        let s = stabilizer(&kernels, &v);
        c1 = c1.max(weak_minus_strong_gradient(&kernels, &v, &rules) / s);
        c2 = c2.max(interior_jump_norm(&kernels, &v, &rules) / s);
    }
    (c1, c2)
}

/// Minimal Dörfler cardinality by exhaustive search over all subsets.
pub fn dorfler_min_cardinality(eta: &[f64], theta: f64) -> usize {
    let total: f64 = eta.iter().sum();
    let n = eta.len();
    let mut best = n;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| eta[i]).sum();
        if s >= theta * total {
            best = k;
        }
    }
    best
}

/// `(f, v_0)` by quadrature, independent of the assembled load vector.
pub fn load_functional(kernels: &[ElementKernel], f: &dyn Fn(Point) -> [f64; 2], v: &WgFunction, rules: &Rules) -> f64 {
    let mut sum = 0.0;
    for (t, k) in kernels.iter().enumerate() {
        let fr = &k.frame;
        for (x, w) in rules.triangle.on_triangle(&fr.points, fr.area()) {
            let fx = f(x);
            let v0 = fr.interior_value(v.interior(t), 1, x);
            sum += w * (fx[0] * v0[0] + fx[1] * v0[1]);
        }
    }
    sum
}

/// Smallest diameter among triangles having `vertex` as a corner.
pub fn min_diameter_at(mesh: &Mesh, vertex: usize) -> f64 {
    mesh.triangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.vertices.contains(&vertex))
        .map(|(i, _)| mesh.geom(i).diameter)
        .fold(f64::INFINITY, f64::min)
}
