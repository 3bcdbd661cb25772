//! Symmetric multiplicity: a local minimax search over the subspaces spanned
//! by previously found solutions and one new ladder direction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{model_exponents, newton_polish, pair_inner, pair_norm, SolveConfig, SolveResult};
use crate::diagnostics::CpsTrace;
use crate::energy::{Functional, State};
use crate::error::{invalid, Error, Result};
use crate::mesh::Field;
use crate::models::{apow, Site};
use crate::spectrum::{
    embedding_constant, interpolation_exponent, multiplicity_radius, RadiusReport, SubspaceLadder,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityResult {
    pub results: Vec<SolveResult>,
    pub radii: Vec<RadiusReport>,
    pub warnings: Vec<String>,
}

/// `J` restricted to `span(basis)` as a function of the coefficients.
struct Restricted<'a> {
    f: &'a Functional<'a>,
    basis: Vec<State>,
}

impl Restricted<'_> {
    fn point(&self, t: &[f64]) -> State {
        let mut s = self.basis[0].scaled(t[0]);
        for (b, ti) in self.basis.iter().zip(t).skip(1) {
            s = s.axpy(*ti, b);
        }
        s
    }

    fn value(&self, t: &[f64]) -> Result<f64> {
        self.f.value(&self.point(t))
    }

    fn grad(&self, t: &[f64]) -> Result<DVector<f64>> {
        let c = self.f.differential(&self.point(t))?;
        Ok(DVector::from_iterator(
            t.len(),
            self.basis.iter().map(|b| c.pair(&b.u, &b.v)),
        ))
    }

    /// Local maximum of `J` on the span with `t₀ > 0`, from `t`.
    fn maximize(&self, t: &mut Vec<f64>) -> Result<bool> {
        let k = t.len();
        let gram = DMatrix::from_fn(k, k, |i, j| {
            pair_inner(self.f, &self.basis[i], &self.basis[j])
        });
        let gram_chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| invalid("degenerate span"))?;
        let mut j = self.value(t)?;
        for _ in 0..200 {
            let g = self.grad(t)?;
            let scale: f64 = t.iter().map(|x| x.abs()).fold(1.0, f64::max);
            if g.norm() <= 1e-11 * (1.0 + j.abs()) / scale {
                return Ok(true);
            }
            let h = 1e-6 * scale;
            let mut hess = DMatrix::zeros(k, k);
            for c in 0..k {
                let mut tp = t.clone();
                let mut tm = t.clone();
                tp[c] += h;
                tm[c] -= h;
                let d = (self.grad(&tp)? - self.grad(&tm)?) / (2.0 * h);
                hess.set_column(c, &d);
            }
            let hess = 0.5 * (&hess + hess.transpose());
            let step = match (-&hess).cholesky() {
                Some(ch) => ch.solve(&g),
                None => gram_chol.solve(&g),
            };
            let mut lambda = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = t
                    .iter()
                    .zip(step.iter())
                    .map(|(a, b)| a + lambda * b)
                    .collect();
                if trial[0] > 0.0 {
                    if let Ok(jt) = self.value(&trial) {
                        if jt >= j {
                            *t = trial;
                            j = jt;
                            moved = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !moved {
                return Ok(g.norm() <= 1e-6 * (1.0 + j.abs()) / scale);
            }
        }
        Ok(false)
    }
}

/// Largest `t > 0` maximizing `J(t·dir)`, or `None` if `J` keeps growing.
fn ray_maximum(f: &Functional, dir: &State) -> Result<Option<f64>> {
    let mut t = 1e-2;
    let mut prev = f.value(&dir.scaled(t))?;
    for _ in 0..80 {
        let next = f.value(&dir.scaled(2.0 * t))?;
        if next < prev {
            // Maximum lies in [t/2, 2t].
            let (mut lo, mut hi) = (0.5 * t, 2.0 * t);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..100 {
                let a = hi - g * (hi - lo);
                let b = lo + g * (hi - lo);
                if f.value(&dir.scaled(a))? >= f.value(&dir.scaled(b))? {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = next;
        t *= 2.0;
    }
    Ok(None)
}

/// Projects `v` onto the `H¹₀`-orthogonal complement of `support` and normalizes.
fn orthonormalize(f: &Functional, v: &State, support: &[State]) -> Option<State> {
    let mut v = v.clone();
    if !support.is_empty() {
        let k = support.len();
        let gram = DMatrix::from_fn(k, k, |i, j| pair_inner(f, &support[i], &support[j]));
        let rhs = DVector::from_iterator(k, support.iter().map(|w| pair_inner(f, w, &v)));
        let coef = gram.cholesky()?.solve(&rhs);
        for (w, c) in support.iter().zip(coef.iter()) {
            v = v.axpy(-c, w);
        }
    }
    let n = pair_norm(f, &v);
    (n > 1e-12).then(|| v.scaled(1.0 / n))
}

/// Local minimax from direction `seed` with `support` as the peak-selection span.
pub(crate) fn local_minimax(
    f: &Functional,
    support: &[State],
    seed: &State,
    config: &SolveConfig,
    trace: &mut CpsTrace,
) -> Result<Option<State>> {
    let Some(mut v) = orthonormalize(f, seed, support) else {
        return Ok(None);
    };
    let Some(t0) = ray_maximum(f, &v)? else {
        return Ok(None);
    };
    let mut t = vec![t0];
    t.extend(std::iter::repeat_n(0.0, support.len()));
    let mut basis = vec![v.clone()];
    basis.extend(support.iter().cloned());
    let mut r = Restricted { f, basis };
    r.maximize(&mut t)?;
    let mut peak = r.point(&t);
    let mut j = f.value(&peak)?;
    let mut alpha = 1.0;
    let mut switch: Option<f64> = None;
    let budget = config.max_iters.min(3000);
    for _ in 0..budget {
        let c = f.differential(&peak)?;
        let cps = f.cps_from(&c, &peak);
        trace.record(f.mesh, &peak, j, cps, alpha);
        if cps <= config.tol_cps {
            return Ok(Some(peak));
        }
        let threshold = *switch.get_or_insert(cps * config.newton_switch);
        if cps <= threshold {
            let mut polish = trace.clone();
            if let Some(s) = newton_polish(f, &peak, config, &mut polish)? {
                *trace = polish;
                return Ok(Some(s));
            }
            switch = Some(threshold * 0.1);
        }
        let g = f.gradient(&c, peak.p1, peak.p2);
        let g2 = c.pair(&g.u, &g.v);
        // Move the direction, not the peak: v(s) = (v − s·g)/‖v − s·g‖.
        let mut accepted = false;
        let mut a = (2.0 * alpha).min(1.0);
        for _ in 0..config.max_backtracks {
            let s = a / t[0];
            if let Some(vn) = orthonormalize(f, &v.axpy(-s, &g), support) {
                let mut tn = t.clone();
                let mut rn = Restricted {
                    f,
                    basis: std::iter::once(vn.clone())
                        .chain(support.iter().cloned())
                        .collect(),
                };
                if rn.maximize(&mut tn).unwrap_or(false) {
                    let pn = rn.point(&tn);
                    if let Ok(jn) = f.value(&pn) {
                        if jn < j - config.armijo_c * a * g2 {
                            v = vn;
                            t = tn;
                            std::mem::swap(&mut r, &mut rn);
                            peak = pn;
                            j = jn;
                            alpha = a;
                            accepted = true;
                            break;
                        }
                    }
                }
            }
            a *= config.armijo_shrink;
        }
        if !accepted {
            let mut polish = trace.clone();
            let out = newton_polish(f, &peak, config, &mut polish)?;
            if out.is_some() {
                *trace = polish;
            }
            return Ok(out);
        }
    }
    Ok(None)
}

/// `r_m` for `m = 1..=count` from the ladders, when the exponents allow it.
pub fn multiplicity_radii(
    f: &Functional,
    ladders: [&SubspaceLadder; 2],
    count: usize,
) -> Result<Vec<RadiusReport>> {
    let model = f.model;
    let ex = model_exponents(model)?;
    let p = [model.p1, model.p2];
    let qbar = [ex.qbar1, ex.qbar2];
    let stars = [ex.p1_star, ex.p2_star];
    let mut r = [0.0; 2];
    let mut products = [0.0f64; 2];
    for i in 0..2 {
        // With an infinite conjugate, interpolate against L^{2q̄} instead.
        let upper = match stars[i] {
            crate::models::Conjugate::Finite(s) => s,
            crate::models::Conjugate::Infinite => 2.0 * qbar[i],
        };
        r[i] = interpolation_exponent(p[i], qbar[i], crate::models::Conjugate::Finite(upper));
        let tau = embedding_constant(p[i], upper, f.mesh)?;
        products[i] = tau.powf(qbar[i] - r[i]);
    }
    let c1 = growth_constant(f, qbar);
    let c3 = c1 * products[0].max(products[1]);
    let mu0 = model.a.mu0().min(model.b.mu0());
    let mut out = Vec::new();
    for m in 1..=count {
        let (Some(l1), Some(l2)) = (ladders[0].lambda_hat.get(m), ladders[1].lambda_hat.get(m))
        else {
            break;
        };
        out.push(multiplicity_radius(m, mu0, p, qbar, [*l1, *l2], r, c3)?);
    }
    Ok(out)
}

/// Sampled `sup G/(|u|^{q̄₁}+|v|^{q̄₂})` over `|(u,v)| ≥ 1`.
fn growth_constant(f: &Functional, qbar: [f64; 2]) -> f64 {
    let site = Site::at(f.mesh.barycenter(0));
    let g0 = f.model.g.g(&site, 0.0, 0.0);
    let mut worst = f64::MIN_POSITIVE;
    for k in 0..=40 {
        let rad = 10f64.powf(k as f64 / 10.0);
        for j in 0..64 {
            let a = std::f64::consts::TAU * j as f64 / 64.0;
            let (u, v) = (rad * a.cos(), rad * a.sin());
            let den = apow(u, qbar[0]) + apow(v, qbar[1]);
            worst = worst.max((f.model.g.g(&site, u, v) - g0) / den);
        }
    }
    worst
}

fn ladder_seeds(ladders: [&SubspaceLadder; 2], m: usize, p1: f64, p2: f64) -> Vec<State> {
    let mut out = Vec::new();
    for k in m..(m + 3) {
        let (Some(a), Some(b)) = (ladders[0].basis.get(k - 1), ladders[1].basis.get(k - 1)) else {
            break;
        };
        let z = Field::zeros(a.len());
        out.push(State::new(a.clone(), z.clone(), p1, p2));
        out.push(State::new(a.clone(), b.clone(), p1, p2));
        out.push(State::new(z, b.clone(), p1, p2));
    }
    out
}

/// Up to `count` distinct critical points (one per `±` pair), sorted by level.
pub fn symmetric_multiplicity(
    f: &Functional,
    ladders: [&SubspaceLadder; 2],
    count: usize,
    config: &SolveConfig,
) -> Result<MultiplicityResult> {
    config.validate()?;
    if !f.model.is_even() {
        return Err(Error::Config(
            "multiplicity search needs an even model (h5 and g5)".into(),
        ));
    }
    let depth = ladders[0].basis.len().min(ladders[1].basis.len());
    if depth < count {
        return Err(invalid(format!(
            "ladder depth {depth} is below the requested count {count}"
        )));
    }
    let (p1, p2) = (f.model.p1, f.model.p2);
    let dedupe = config.dedupe_distance.unwrap_or(1e-2 * f.mesh.diameter());
    let radii = multiplicity_radii(f, ladders, count).unwrap_or_default();
    let mut found: Vec<SolveResult> = Vec::new();
    let mut warnings = Vec::new();
    for m in 1..=count {
        let mut got = false;
        for seed in ladder_seeds(ladders, m, p1, p2) {
            let support: Vec<State> = found.iter().map(|r| r.state.clone()).collect();
            let mut trace = CpsTrace::new();
            let Some(s) = local_minimax(f, &support, &seed, config, &mut trace)? else {
                continue;
            };
            let level = f.value(&s)?;
            let cps = f.cps_quantity(&s)?;
            let distinct = found.iter().all(|r| {
                s.distance_w(&r.state, f.mesh) >= dedupe
                    && s.distance_w(&r.state.neg(), f.mesh) >= dedupe
            });
            if cps > config.tol_cps || !(level > 0.0) || !distinct {
                continue;
            }
            let (ru, rv) = f.residual_check(&s)?;
            found.push(SolveResult {
                iterations: trace.len().saturating_sub(1),
                state: s,
                level,
                cps_final: cps,
                classification: super::Classification::Converged,
                residual: [ru, rv],
                trace,
            });
            got = true;
            break;
        }
        if !got {
            warnings.push(format!("no new critical point from the mode-{m} seeds"));
        }
    }
    found.sort_by(|a, b| a.level.total_cmp(&b.level));
    if found.len() < count {
        warnings.push(format!(
            "found {} of {count} requested critical points",
            found.len()
        ));
    }
    Ok(MultiplicityResult {
        results: found,
        radii,
        warnings,
    })
}
