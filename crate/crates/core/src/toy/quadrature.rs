//! Gauss-Legendre rules and adaptive polar integration over a disk.

use std::f64::consts::PI;

use crate::error::{AbcError, Result};

/// Upper bound on radial × angular nodes before giving up.
pub const MAX_DISK_NODES: usize = 1 << 20;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Roots of `P_n` are found by Newton iteration from the Tricomi initial
/// guesses; weights are `2 / ((1 - x²) P'_n(x)²)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P'_n(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral of two integrands over a disk, evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskIntegral {
    pub first: f64,
    pub second: f64,
    pub nodes: usize,
}

/// Integrate `f(x, y) -> (g1, g2)` over the disk of the given centre and
/// radius using Gauss-Legendre in the radius and the trapezoid rule in the
/// angle. Both node counts double until successive values change by at most
/// `rel_tol · |first|` (the first integrand sets the scale for both).
pub fn integrate_disk<F>(centre: [f64; 2], radius: f64, rel_tol: f64, f: F) -> Result<DiskIntegral>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let mut n_radial = 8;
    let mut n_angular = 16;
    let mut previous: Option<(f64, f64)> = None;
    while n_radial * n_angular <= MAX_DISK_NODES {
        let (g1, g2) = polar_rule(centre, radius, n_radial, n_angular, &f);
        if let Some((p1, p2)) = previous {
            let scale = g1.abs();
            if (g1 - p1).abs() <= rel_tol * scale && (g2 - p2).abs() <= rel_tol * scale {
                return Ok(DiskIntegral {
                    first: g1,
                    second: g2,
                    nodes: n_radial * n_angular,
                });
            }
        }
        previous = Some((g1, g2));
        n_radial *= 2;
        n_angular *= 2;
    }
    Err(AbcError::QuadratureNotConverged {
        nodes: MAX_DISK_NODES,
    })
}

fn polar_rule<F>(
    centre: [f64; 2],
    radius: f64,
    n_radial: usize,
    n_angular: usize,
    f: &F,
) -> (f64, f64)
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let (xs, ws) = gauss_legendre(n_radial);
    let dtheta = 2.0 * PI / n_angular as f64;
    let angles: Vec<(f64, f64)> = (0..n_angular)
        .map(|j| (j as f64 * dtheta).sin_cos())
        .collect();
    let mut total1 = 0.0;
    let mut total2 = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let r = 0.5 * radius * (x + 1.0);
        let mut ring1 = 0.0;
        let mut ring2 = 0.0;
        for &(sin, cos) in &angles {
            let (a, b) = f(centre[0] + r * cos, centre[1] + r * sin);
            ring1 += a;
            ring2 += b;
        }
        let weight = 0.5 * radius * w * r * dtheta;
        total1 += weight * ring1;
        total2 += weight * ring2;
    }
    (total1, total2)
}
