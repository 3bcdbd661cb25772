//! First eigenpair of the Dirichlet `p`-Laplacian, discrete Sobolev embedding
//! constants, the subspace ladder used for multiplicity, and the radius `r_m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypotheses::Verdict;
use crate::linalg::{dot, mass, BandMatrix, Riesz};
use crate::mesh::{grad_on, neumaier_sum, norm_lr, Field, Mesh};
use crate::models::{sobolev_conjugate, Conjugate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda: f64,
    pub phi: Field,
    pub residual: f64,
    pub iterations: usize,
}

/// `∫|∇ξ|^p` and its nodal gradient.
fn grad_power(mesh: &Mesh, x: &[f64], p: f64) -> (f64, Vec<f64>) {
    let mut d = vec![0.0; mesh.n_nodes()];
    let mut terms = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let g = grad_on(mesh, e, x);
        let meas = mesh.element_measures()[e];
        let n = g[0].hypot(g[1]);
        terms.push(meas * n.powf(p));
        if n > 0.0 {
            let c = p * meas * n.powf(p - 2.0);
            for (&node, dg) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
                d[node] += c * (g[0] * dg[0] + g[1] * dg[1]);
            }
        }
    }
    (neumaier_sum(terms), d)
}

/// `∫|ξ|^r` by the mesh quadrature and its nodal gradient.
fn lebesgue_power(mesh: &Mesh, x: &[f64], r: f64) -> (f64, Vec<f64>) {
    let q = mesh.quadrature();
    let mut d = vec![0.0; mesh.n_nodes()];
    let mut terms = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let el = mesh.element(e);
        let meas = mesh.element_measures()[e];
        let mut acc = 0.0;
        for (b, w) in q.bary.iter().zip(&q.weights) {
            let val: f64 = el.iter().enumerate().map(|(k, &n)| b[k] * x[n]).sum();
            let a = val.abs();
            acc += w * a.powf(r);
            if a > 0.0 {
                let c = r * meas * w * a.powf(r - 2.0) * val;
                for (k, &n) in el.iter().enumerate() {
                    d[n] += c * b[k];
                }
            }
        }
        terms.push(meas * acc);
    }
    (neumaier_sum(terms), d)
}

/// `α ln ∫|∇ξ|^p − β ln ∫|ξ|^r`, zero-homogeneous when `αp = βr`.
struct LogRatio<'a> {
    mesh: &'a Mesh,
    p: f64,
    r: f64,
    alpha: f64,
    beta: f64,
}

impl LogRatio<'_> {
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (n, dn) = grad_power(self.mesh, x, self.p);
        let (d, dd) = lebesgue_power(self.mesh, x, self.r);
        let f = self.alpha * n.ln() - self.beta * d.ln();
        let mut g: Vec<f64> = dn
            .iter()
            .zip(&dd)
            .map(|(a, b)| self.alpha * a / n - self.beta * b / d)
            .collect();
        for (i, gi) in g.iter_mut().enumerate() {
            if self.mesh.is_boundary(i) {
                *gi = 0.0;
            }
        }
        (f, g)
    }
}

/// Linear constraints `⟨c_j, ξ⟩ = 0` with the `H¹₀`-orthogonal projector.
struct Constraints {
    c: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    gram_inv: DMatrix<f64>,
}

impl Constraints {
    fn new(riesz: &Riesz, c: Vec<Vec<f64>>) -> Result<Self> {
        let z: Vec<Vec<f64>> = c.iter().map(|cj| riesz.represent(cj)).collect();
        let k = c.len();
        let gram = DMatrix::from_fn(k, k, |i, j| dot(&c[i], &z[j]));
        let gram_inv = gram
            .try_inverse()
            .ok_or(Error::Singular { row: 0, pivot: 0.0 })?;
        Ok(Constraints { c, z, gram_inv })
    }

    fn project(&self, x: &mut [f64]) {
        if self.c.is_empty() {
            return;
        }
        let b = DVector::from_iterator(self.c.len(), self.c.iter().map(|cj| dot(cj, x)));
        let y = &self.gram_inv * b;
        for (zj, yj) in self.z.iter().zip(y.iter()) {
            for (xi, zi) in x.iter_mut().zip(zj) {
                *xi -= yj * zi;
            }
        }
    }
}

struct MinResult {
    x: Vec<f64>,
    f: f64,
    residual: f64,
    iterations: usize,
}

/// Nonlinear conjugate gradients in the `H¹₀` metric for zero-homogeneous objectives,
/// with a derivative-based line search that stays accurate near the optimum.
fn minimize(
    obj: &LogRatio,
    riesz: &Riesz,
    x0: Vec<f64>,
    cons: Option<&Constraints>,
    tol: f64,
    max_iter: usize,
) -> Result<MinResult> {
    let precond = |df: &[f64]| {
        let mut g = riesz.represent(df);
        if let Some(c) = cons {
            c.project(&mut g);
        }
        g
    };
    let mut x = x0;
    if let Some(c) = cons {
        c.project(&mut x);
    }
    let (mut f, mut df) = obj.eval(&x);
    let mut g = precond(&df);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut gdf_prev = dot(&g, &df);
    let mut t_prev: Option<f64> = None;
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let xnorm = riesz.norm(&x);
        residual = dot(&g, &df).max(0.0).sqrt() * xnorm;
        if residual <= tol {
            return Ok(MinResult {
                x,
                f,
                residual,
                iterations: it,
            });
        }
        let gdf_now = dot(&g, &df);
        let mut slope = dot(&df, &d);
        if !(slope < -1e-6 * gdf_now) {
            d = g.iter().map(|v| -v).collect();
            slope = -gdf_now;
        }
        let dnorm = riesz.norm(&d);
        let t0 = t_prev
            .unwrap_or(0.05 * xnorm / dnorm)
            .min(0.5 * xnorm / dnorm);
        let (mut t, mut fx, mut dfx) = line_search(obj, &x, &d, f, slope, t0);
        if t == 0.0 && slope != -gdf_now {
            d = g.iter().map(|v| -v).collect();
            slope = -gdf_now;
            let t0 = 0.05 * xnorm / riesz.norm(&d);
            (t, fx, dfx) = line_search(obj, &x, &d, f, slope, t0);
        }
        if t == 0.0 {
            // The tangential slope is below roundoff; the quotient error is O(residual²).
            if residual <= tol.sqrt() {
                return Ok(MinResult {
                    x,
                    f,
                    residual,
                    iterations: it,
                });
            }
            return Err(Error::Convergence {
                what: "ratio minimization line search",
                iterations: it,
                last: residual,
            });
        }
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * di;
        }
        t_prev = Some(t);
        if let Some(c) = cons {
            // Roundoff drift is amplified when a step nearly cancels the iterate.
            let before = riesz.norm(&x);
            let old = x.clone();
            c.project(&mut x);
            let moved: Vec<f64> = x.iter().zip(&old).map(|(a, b)| a - b).collect();
            if riesz.norm(&moved) > 1e-12 * before {
                (fx, dfx) = obj.eval(&x);
                gdf_prev = f64::INFINITY;
            }
        }
        f = fx;
        let g_new = precond(&dfx);
        let gdf = dot(&g_new, &dfx);
        let beta = ((gdf - dot(&g_new, &df)) / gdf_prev).max(0.0);
        df = dfx;
        g = g_new;
        gdf_prev = gdf;
        for (di, gi) in d.iter_mut().zip(&g) {
            *di = -gi + beta * *di;
        }
        // Keep the iterate at unit scale; the objective does not see it.
        let s = norm_lr(obj.mesh, &x, obj.r).unwrap_or(1.0);
        if !(0.5..=2.0).contains(&s) {
            x.iter_mut().for_each(|v| *v /= s);
            d.iter_mut().for_each(|v| *v /= s);
            df.iter_mut().for_each(|v| *v *= s);
            g.iter_mut().for_each(|v| *v /= s);
            t_prev = None;
        }
    }
    Err(Error::Convergence {
        what: "ratio minimization",
        iterations: max_iter,
        last: residual,
    })
}

/// Finds `t > 0` with `φ(t) ≤ φ(0)` and `|φ'(t)| ≤ 0.1|φ'(0)|`, or the best step seen.
fn line_search(
    obj: &LogRatio,
    x: &[f64],
    d: &[f64],
    f0: f64,
    slope0: f64,
    t0: f64,
) -> (f64, f64, Vec<f64>) {
    let at = |t: f64| {
        let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let (f, g) = obj.eval(&y);
        let s = dot(&g, d);
        (f, g, s)
    };
    let ok_value = |f: f64| f.is_finite() && f <= f0 + 1e-14 * f0.abs();
    let mut lo = (0.0, slope0);
    let mut hi: Option<(f64, f64)> = None;
    let mut t = t0;
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..60 {
        let (f, g, s) = at(t);
        if ok_value(f) {
            if s.abs() <= 0.1 * slope0.abs() {
                return (t, f, g);
            }
            if best.as_ref().is_none_or(|b| f < b.1) {
                best = Some((t, f, g));
            }
        }
        if !ok_value(f) || s > 0.0 {
            hi = Some((t, s));
        } else {
            lo = (t, s);
        }
        t = match hi {
            None => 2.0 * t,
            Some((th, sh)) => {
                let (tl, sl) = lo;
                let sec = if sh.is_finite() && sh > 0.0 && sl < 0.0 {
                    tl - sl * (th - tl) / (sh - sl)
                } else {
                    0.5 * (tl + th)
                };
                // Safeguard the secant step inside the bracket.
                let w = th - tl;
                sec.clamp(tl + 0.1 * w, th - 0.1 * w)
            }
        };
    }
    match best {
        Some(b) => b,
        None => (0.0, f0, Vec::new()),
    }
}

fn positive_bump(mesh: &Mesh) -> Vec<f64> {
    (0..mesh.n_nodes())
        .map(|i| if mesh.is_boundary(i) { 0.0 } else { 1.0 })
        .collect()
}

/// Minimizes `∫|∇ξ|^p / ∫|ξ|^p` from the all-ones interior field.
pub fn first_eigenpair(p: f64, mesh: &Mesh, tol: f64) -> Result<SpectralResult> {
    first_eigenpair_from(p, mesh, tol, positive_bump(mesh))
}

/// As [`first_eigenpair`] from a caller-supplied start.
pub fn first_eigenpair_from(
    p: f64,
    mesh: &Mesh,
    tol: f64,
    init: Vec<f64>,
) -> Result<SpectralResult> {
    if !(p > 1.0) {
        return Err(invalid(format!(
            "eigenvalue exponent must exceed 1, got {p}"
        )));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    mesh.check_field(&init)?;
    let riesz = Riesz::new(mesh)?;
    let obj = LogRatio {
        mesh,
        p,
        r: p,
        alpha: 1.0,
        beta: 1.0,
    };
    let res = minimize(&obj, &riesz, init, None, tol, 50_000)?;
    let mut phi = res.x;
    let s = norm_lr(mesh, &phi, p)?;
    let sign = if phi.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    phi.iter_mut().for_each(|v| *v *= sign / s);
    let lambda = rayleigh_quotient(mesh, &phi, p);
    Ok(SpectralResult {
        lambda,
        phi: Field::new(phi),
        residual: res.residual,
        iterations: res.iterations,
    })
}

/// `∫|∇ξ|^p / ∫|ξ|^p`.
pub fn rayleigh_quotient(mesh: &Mesh, x: &[f64], p: f64) -> f64 {
    grad_power(mesh, x, p).0 / lebesgue_power(mesh, x, p).0
}

/// Largest `|ξ|_r/‖ξ‖_W` over the discrete space.
pub fn embedding_constant(p: f64, r: f64, mesh: &Mesh) -> Result<f64> {
    if !(p > 1.0) {
        return Err(invalid(format!("exponent must exceed 1, got {p}")));
    }
    let ps = sobolev_conjugate(p, mesh.dim());
    let admissible = r >= 1.0
        && match ps {
            Conjugate::Finite(v) => r <= v,
            Conjugate::Infinite => r.is_finite(),
        };
    if !admissible {
        return Err(invalid(format!(
            "r = {r} outside [1, p*] = [1, {}]",
            ps.as_f64()
        )));
    }
    let riesz = Riesz::new(mesh)?;
    // Minimize (1/p)ln‖∇ξ‖ᵖ − (1/r)ln|ξ|ʳ = −ln(|ξ|_r/‖ξ‖_W).
    let obj = LogRatio {
        mesh,
        p,
        r,
        alpha: 1.0 / p,
        beta: 1.0 / r,
    };
    let res = minimize(&obj, &riesz, positive_bump(mesh), None, 1e-7, 50_000)?;
    Ok((-res.f).exp())
}

/// Nested subspaces `V_k = span{ψ₁,…,ψ_k}` and their ladder values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceLadder {
    pub p: f64,
    pub basis: Vec<Field>,
    /// `lambda_hat[k]` is the least `p`-Rayleigh quotient on the mass-orthogonal
    /// complement of `V_k` (0-based; `lambda_hat[0] = λ₁`).
    pub lambda_hat: Vec<f64>,
}

/// Lowest `k` discrete Dirichlet-Laplacian modes by block inverse iteration.
pub fn laplacian_modes(mesh: &Mesh, k: usize) -> Result<(Vec<f64>, Vec<Field>)> {
    let riesz = Riesz::new(mesh)?;
    let mm = mass(mesh);
    let n = mesh.interior_nodes().len();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 ≤ modes ≤ {n}, got {k}")));
    }
    let b = (k + 4).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let kmat = riesz.stiffness_matrix();
    let mut prev = vec![f64::INFINITY; k];
    let mut vals = Vec::new();
    let mut vecs = Vec::new();
    for it in 0..2000 {
        // x ← K⁻¹Mx, then Rayleigh–Ritz on span(x).
        for col in x.iter_mut() {
            let mx = riesz.scatter(&mm.matvec(col));
            *col = riesz.gather(&riesz.represent(&mx));
        }
        (vals, vecs) = rayleigh_ritz(kmat, &mm, &x)?;
        x = vecs.clone();
        let done = vals
            .iter()
            .take(k)
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs());
        prev = vals[..k].to_vec();
        if done && it > 2 {
            break;
        }
    }
    let fields = vecs[..k]
        .iter()
        .map(|c| {
            let mut f = riesz.scatter(c);
            // Fix the sign by the first clearly nonzero value.
            let big = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lead = f
                .iter()
                .find(|v| v.abs() > 1e-6 * big)
                .copied()
                .unwrap_or(1.0);
            let s = lead.signum();
            f.iter_mut().for_each(|v| *v *= s);
            Field::new(f)
        })
        .collect();
    Ok((vals[..k].to_vec(), fields))
}

fn rayleigh_ritz(
    k: &BandMatrix,
    m: &BandMatrix,
    x: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let b = x.len();
    let kx: Vec<Vec<f64>> = x.iter().map(|c| k.matvec(c)).collect();
    let mx: Vec<Vec<f64>> = x.iter().map(|c| m.matvec(c)).collect();
    let ka = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&x[i], &kx[j]) + dot(&x[j], &kx[i])));
    let ma = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&x[i], &mx[j]) + dot(&x[j], &mx[i])));
    let l = ma
        .cholesky()
        .ok_or(Error::Singular { row: 0, pivot: 0.0 })?
        .l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { row: 0, pivot: 0.0 })?;
    let c = &linv * ka * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let coeffs = linv.transpose() * &eig.eigenvectors;
    let n = x[0].len();
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| {
            let mut v = vec![0.0; n];
            for (j, xj) in x.iter().enumerate() {
                let c = coeffs[(j, i)];
                for (vi, xi) in v.iter_mut().zip(xj) {
                    *vi += c * xi;
                }
            }
            v
        })
        .collect();
    Ok((vals, vecs))
}

/// Mass-matrix pairing `∫fg` as a dual vector of `g`.
fn mass_dual(mesh: &Mesh, mm: &BandMatrix, f: &[f64]) -> Vec<f64> {
    let interior = mesh.interior_nodes();
    let gathered: Vec<f64> = interior.iter().map(|&n| f[n]).collect();
    let mut out = vec![0.0; mesh.n_nodes()];
    for (&n, v) in interior.iter().zip(mm.matvec(&gathered)) {
        out[n] = v;
    }
    out
}

/// Uniform nodal noise smoothed by `passes` applications of `K⁻¹M`.
pub(crate) fn random_smooth_field<R: Rng>(
    mesh: &Mesh,
    riesz: &Riesz,
    mm: &BandMatrix,
    rng: &mut R,
    passes: usize,
) -> Vec<f64> {
    let mut w: Vec<f64> = (0..mesh.n_nodes())
        .map(|n| {
            if mesh.is_boundary(n) {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect();
    for _ in 0..passes {
        w = riesz.represent(&mass_dual(mesh, mm, &w));
    }
    w
}

/// `ψ₁ = φ₁`, `ψ₂..ψ_m` the Laplacian modes `2..m`, and
/// `lambda_hat[k] = min{∫|∇w|^p/∫|w|^p : ∫wψ_j = 0, j ≤ k}`.
pub fn subspace_ladder(p: f64, mesh: &Mesh, m: usize) -> Result<SubspaceLadder> {
    let n = mesh.interior_nodes().len();
    if m == 0 || m > n {
        return Err(invalid(format!("ladder depth must be in 1..={n}, got {m}")));
    }
    let first = first_eigenpair(p, mesh, 1e-9)?;
    let (_, modes) = laplacian_modes(mesh, m)?;
    let mut basis = vec![first.phi.clone()];
    basis.extend(modes.into_iter().skip(1));
    let mut lambda_hat = vec![first.lambda];
    let riesz = Riesz::new(mesh)?;
    let mm = mass(mesh);
    let obj = LogRatio {
        mesh,
        p,
        r: p,
        alpha: 1.0,
        beta: 1.0,
    };
    for k in 1..m {
        let cons = Constraints::new(
            &riesz,
            basis[..k].iter().map(|b| mass_dual(mesh, &mm, b)).collect(),
        )?;
        let res = minimize(&obj, &riesz, basis[k].to_vec(), Some(&cons), 1e-8, 50_000)?;
        lambda_hat.push(res.f.exp());
    }
    Ok(SubspaceLadder {
        p,
        basis,
        lambda_hat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderCheck {
    pub m: usize,
    pub threshold: f64,
    pub min_quotient: f64,
    pub samples: usize,
    pub verdict: Verdict,
}

/// Samples smooth random fields mass-orthogonal to `V_m` and compares their
/// quotient with `lambda_hat[m]`, allowing relative slack `rel_tol`.
pub fn ladder_inequality_check(
    ladder: &SubspaceLadder,
    mesh: &Mesh,
    m: usize,
    n_samples: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<LadderCheck> {
    if m >= ladder.lambda_hat.len() {
        return Err(invalid(format!(
            "ladder has {} values, complement index {m} needs one more",
            ladder.lambda_hat.len()
        )));
    }
    let riesz = Riesz::new(mesh)?;
    let mm = mass(mesh);
    let cons = Constraints::new(
        &riesz,
        ladder.basis[..m]
            .iter()
            .map(|b| mass_dual(mesh, &mm, b))
            .collect(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = ladder.lambda_hat[m];
    let mut min_q = f64::INFINITY;
    for i in 0..n_samples {
        // Alternate rough and smoothed samples.
        let mut w = random_smooth_field(mesh, &riesz, &mm, &mut rng, i % 4);
        cons.project(&mut w);
        let q = rayleigh_quotient(mesh, &w, ladder.p);
        if q.is_finite() {
            min_q = min_q.min(q);
        }
    }
    let ok = min_q >= threshold * (1.0 - rel_tol);
    Ok(LadderCheck {
        m,
        threshold,
        min_quotient: min_q,
        samples: n_samples,
        verdict: if ok {
            Verdict::SampledPass
        } else {
            Verdict::Fail
        },
    })
}

/// `r` with `r/p + (q̄ − r)/s = 1` for interpolation between `L^p` and `L^s`.
pub fn interpolation_exponent(p: f64, qbar: f64, s: Conjugate) -> f64 {
    match s {
        Conjugate::Finite(s) => (1.0 - qbar / s) / (1.0 / p - 1.0 / s),
        Conjugate::Infinite => p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub m: usize,
    pub r_m: f64,
    pub lambda_bar_m: f64,
    pub mu_bar0: f64,
    pub c3: f64,
}

/// `r_m = (μ̄₀ λ̄_m / (2^{p+1} C₃))^{1/(q−p)}` with `p = min p_i`, `q = max q̄_i`,
/// `λ̄_m = min{λ̂_{1,m+1}^{r₁/p₁}, λ̂_{2,m+1}^{r₂/p₂}}`.
#[allow(clippy::too_many_arguments)]
pub fn multiplicity_radius(
    m: usize,
    mu0: f64,
    p: [f64; 2],
    qbar: [f64; 2],
    lambda_next: [f64; 2],
    r: [f64; 2],
    c3: f64,
) -> Result<RadiusReport> {
    let pm = p[0].min(p[1]);
    let q = qbar[0].max(qbar[1]);
    if !(q > pm) {
        return Err(invalid(format!("need q > p, got q = {q}, p = {pm}")));
    }
    if !(c3 > 0.0 && mu0 > 0.0) {
        return Err(invalid("C₃ and μ₀ must be positive"));
    }
    let mu_bar0 = (mu0 / p[0]).min(mu0 / p[1]);
    let lambda_bar_m = lambda_next[0]
        .powf(r[0] / p[0])
        .min(lambda_next[1].powf(r[1] / p[1]));
    Ok(RadiusReport {
        m,
        r_m: radius_formula(mu_bar0, lambda_bar_m, pm, q, c3),
        lambda_bar_m,
        mu_bar0,
        c3,
    })
}

pub fn radius_formula(mu_bar0: f64, lambda_bar: f64, p: f64, q: f64, c3: f64) -> f64 {
    (mu_bar0 * lambda_bar / (2f64.powf(p + 1.0) * c3)).powf(1.0 / (q - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_interval_mesh, norm_w};
    use std::f64::consts::PI;

    #[test]
    fn laplace_eigenvalue_interval() {
        let m = build_interval_mesh(200, 1.0).unwrap();
        let r = first_eigenpair(2.0, &m, 1e-9).unwrap();
        assert!((r.lambda / (PI * PI) - 1.0).abs() < 0.01, "{}", r.lambda);
        assert!((norm_lr(&m, &r.phi, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.interior_nodes().iter().all(|&i| r.phi[i] > 0.0));
        assert!((rayleigh_quotient(&m, &r.phi, 2.0) - r.lambda).abs() < 1e-10 * r.lambda);
    }

    #[test]
    fn p3_eigenvalue_interval() {
        let m = build_interval_mesh(400, 1.0).unwrap();
        let r = first_eigenpair(3.0, &m, 1e-8).unwrap();
        // (p−1)π_p^p with π_p = 2π/(p sin(π/p))
        let pi_p = 2.0 * PI / (3.0 * (PI / 3.0).sin());
        let exact = 2.0 * pi_p.powi(3);
        assert!(
            (r.lambda / exact - 1.0).abs() < 5e-3,
            "{} vs {exact} in {} its",
            r.lambda,
            r.iterations
        );
        let flipped =
            first_eigenpair_from(3.0, &m, 1e-8, r.phi.iter().map(|v| -v).collect()).unwrap();
        assert!((flipped.lambda - r.lambda).abs() < 1e-9 * r.lambda);
    }

    #[test]
    fn laplacian_modes_interval() {
        let m = build_interval_mesh(100, 1.0).unwrap();
        let (vals, _) = laplacian_modes(&m, 4).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((v / exact - 1.0).abs() < 0.01, "{k}: {v}");
        }
    }

    #[test]
    fn embedding_r_equals_p() {
        let m = build_interval_mesh(100, 1.0).unwrap();
        let tau = embedding_constant(2.0, 2.0, &m).unwrap();
        let l = first_eigenpair(2.0, &m, 1e-9).unwrap().lambda;
        assert!((tau - l.powf(-0.5)).abs() < 1e-6 * tau);
        let tau4 = embedding_constant(2.0, 4.0, &m).unwrap();
        let s = Field::interpolate(&m, |x| (PI * x[0]).sin());
        let witness = norm_lr(&m, &s, 4.0).unwrap() / norm_w(&m, &s, 2.0).unwrap();
        assert!(tau4 >= witness);
        let sq = crate::mesh::build_rect_mesh(4, 4).unwrap();
        assert!(embedding_constant(2.0, 2.0, &sq).is_ok());
        assert!(embedding_constant(1.5, 7.0, &sq).is_err());
    }

    #[test]
    fn ladder_base_case_and_linear_spectrum() {
        let m = build_interval_mesh(100, 1.0).unwrap();
        let l1 = subspace_ladder(2.0, &m, 1).unwrap();
        assert_eq!(l1.basis.len(), 1);
        assert_eq!(l1.lambda_hat.len(), 1);
        let l = subspace_ladder(2.0, &m, 4).unwrap();
        for (k, v) in l.lambda_hat.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((v / exact - 1.0).abs() < 0.02, "{k}: {v}");
        }
    }

    #[test]
    fn radius_examples() {
        let r = radius_formula(0.5, 10.0, 2.0, 4.0, 1.0);
        assert!((r - (5.0f64 / 8.0).sqrt()).abs() < 1e-15);
        let r2 = radius_formula(0.5, 20.0, 2.0, 4.0, 1.0);
        assert!((r2 / r - 2f64.sqrt()).abs() < 1e-14);
        assert!(
            multiplicity_radius(1, 1.0, [2.0, 2.0], [2.0, 2.0], [1.0, 1.0], [2.0, 2.0], 1.0)
                .is_err()
        );
    }
}
