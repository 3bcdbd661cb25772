//! Damped Newton iteration on `dJ = 0` with a banded finite-difference Hessian.

use super::SolveConfig;
use crate::diagnostics::CpsTrace;
use crate::energy::{Cotangent, Functional, State};
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::mesh::Field;

/// Interleaved interior unknowns `[u_k, v_k]` for interior node `k`.
fn gather(f: &Functional, du: &[f64], dv: &[f64]) -> Vec<f64> {
    let interior = f.mesh.interior_nodes();
    let mut out = Vec::with_capacity(2 * interior.len());
    for &n in interior {
        out.push(du[n]);
        out.push(dv[n]);
    }
    out
}

fn apply(f: &Functional, s: &State, delta: &[f64], scale: f64) -> State {
    let mut u = s.u.to_vec();
    let mut v = s.v.to_vec();
    for (k, &n) in f.mesh.interior_nodes().iter().enumerate() {
        u[n] += scale * delta[2 * k];
        v[n] += scale * delta[2 * k + 1];
    }
    State::new(Field::new(u), Field::new(v), s.p1, s.p2)
}

fn residual(f: &Functional, c: &Cotangent) -> Vec<f64> {
    gather(f, &c.du, &c.dv)
}

/// Central-difference Hessian of `J`, one color per residue class of
/// columns modulo `2·bw + 1`.
fn hessian(f: &Functional, s: &State) -> Result<BandMatrix> {
    let n = 2 * f.mesh.interior_nodes().len();
    let bw = 2 * f.mesh.node_bandwidth() + 1;
    let colors = (2 * bw + 1).min(n);
    let scale = 1.0 + crate::mesh::norm_linf(&s.u).max(crate::mesh::norm_linf(&s.v));
    let h = 1e-5 * scale;
    let mut hm = BandMatrix::zeros(n, bw, bw);
    for c in 0..colors {
        let mut delta = vec![0.0; n];
        for j in (c..n).step_by(colors) {
            delta[j] = h;
        }
        let plus = residual(f, &f.differential(&apply(f, s, &delta, 1.0))?);
        let minus = residual(f, &f.differential(&apply(f, s, &delta, -1.0))?);
        for j in (c..n).step_by(colors) {
            let lo = j.saturating_sub(bw);
            let hi = (j + bw).min(n - 1);
            for i in lo..=hi {
                hm.set(i, j, (plus[i] - minus[i]) / (2.0 * h));
            }
        }
    }
    Ok(hm)
}

/// Polishes `s` to `cps ≤ tol_cps`. Returns `None` when the iteration stalls
/// or the Hessian is singular; each accepted step is appended to `trace`.
pub fn newton_polish(
    f: &Functional,
    s: &State,
    config: &SolveConfig,
    trace: &mut CpsTrace,
) -> Result<Option<State>> {
    let mut s = s.clone();
    let mut c = f.differential(&s)?;
    let mut merit = f.dual_norm(&c).total;
    for _ in 0..40 {
        if f.cps_from(&c, &s) <= config.tol_cps {
            return Ok(Some(s));
        }
        let lu = match hessian(f, &s)?.factor() {
            Ok(lu) => lu,
            Err(Error::Singular { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let delta = lu.solve(&residual(f, &c));
        if delta.iter().any(|d| !d.is_finite()) {
            return Ok(None);
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = apply(f, &s, &delta, -lambda);
            if let Ok(ct) = f.differential(&trial) {
                let mt = f.dual_norm(&ct).total;
                if mt < (1.0 - 1e-4 * lambda) * merit {
                    s = trial;
                    c = ct;
                    merit = mt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Round-off floor: accept only if already converged.
            return Ok((f.cps_from(&c, &s) <= config.tol_cps).then_some(s));
        }
        let j = f.value(&s)?;
        trace.record(f.mesh, &s, j, f.cps_from(&c, &s), lambda);
    }
    Ok((f.cps_from(&c, &s) <= config.tol_cps).then_some(s))
}
