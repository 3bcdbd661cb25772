//! Reference values computed without the finite element code.
#![allow(dead_code)]

/// Classical RK4 step for `y' = f(x, y)`.
fn rk4<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    x: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(x + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(x + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// First `x > 0` where component `idx` changes sign, refined by linear interpolation.
fn first_crossing<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    idx: usize,
    h: f64,
    x_max: f64,
) -> Option<(f64, [f64; N])> {
    let mut x = 0.0;
    let mut y = y0;
    // Step off the start so a zero initial value does not count.
    y = rk4(&f, x, &y, h);
    x += h;
    while x < x_max {
        let yn = rk4(&f, x, &y, h);
        if y[idx] != 0.0 && yn[idx].signum() != y[idx].signum() {
            let w = y[idx] / (y[idx] - yn[idx]);
            let mut mid = y;
            for i in 0..N {
                mid[i] += w * (yn[i] - y[i]);
            }
            return Some((x + w * h, mid));
        }
        y = yn;
        x += h;
    }
    None
}

/// First Dirichlet eigenvalue of `−(|u'|^{p−2}u')' = λ|u|^{p−2}u` on `(0, 1)`,
/// by shooting on `λ` until the flux vanishes at `x = 1/2`.
pub fn p_laplacian_eigenvalue(p: f64) -> f64 {
    let flux_zero = |lambda: f64| {
        // y = (u, w) with w = |u'|^{p−2}u'.
        let rhs = move |_x: f64, y: &[f64; 2]| {
            let du = y[1].abs().powf(1.0 / (p - 1.0)) * y[1].signum();
            [du, -lambda * y[0].abs().powf(p - 1.0) * y[0].signum()]
        };
        first_crossing(rhs, [0.0, 1.0], 1, 1e-5, 10.0).map_or(f64::INFINITY, |(x, _)| x)
    };
    let (mut lo, mut hi) = (1.0, 1000.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if flux_zero(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(p−1)π_p^p` with `π_p = 2π/(p sin(π/p))`.
pub fn p_laplacian_eigenvalue_closed_form(p: f64) -> f64 {
    let pi_p = 2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin());
    (p - 1.0) * pi_p.powf(p)
}

/// Energy `¼∫u'²` of the positive solution of `−u″ = u³`, `u(0) = u(1) = 0`.
///
/// `U″ = −U³, U(0) = 0, U'(0) = 1` has first zero `X`; the solution is
/// `u(x) = X·U(Xx)` and `¼∫₀¹u'² = ¼X³∫₀^X U'²`.
pub fn cubic_ground_energy() -> f64 {
    let rhs = |_x: f64, y: &[f64; 3]| [y[1], -y[0].powi(3), y[1] * y[1]];
    let (x, y) = first_crossing(rhs, [0.0, 1.0, 0.0], 0, 1e-5, 100.0).expect("U has a zero");
    0.25 * x.powi(3) * y[2]
}

/// The `k`-th solution is `k` rescaled copies of the ground state: energy `k⁴E₁`.
pub fn cubic_excited_energy(k: u32) -> f64 {
    (k as f64).powi(4) * cubic_ground_energy()
}

/// Peak value `max u` of the positive solution.
pub fn cubic_ground_amplitude() -> f64 {
    let rhs = |_x: f64, y: &[f64; 2]| [y[1], -y[0].powi(3)];
    let (x_top, y) = first_crossing(rhs, [0.0, 1.0], 1, 1e-5, 100.0).expect("U' has a zero");
    2.0 * x_top * y[0]
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
