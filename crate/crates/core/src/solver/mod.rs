//! Mountain-pass geometry certificates, the path-deformation solver, Newton
//! polishing and the symmetric multiplicity search.

mod geometry;
mod multiplicity;
mod newton;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::CpsTrace;
use crate::energy::{Cotangent, Functional, State};
use crate::error::{invalid, Error, Result};
use crate::mesh::Field;
use crate::models::{derive_exponents, GrowthExponents, Model};

pub use geometry::{verify_geometry, GeometryReport};
pub use multiplicity::{multiplicity_radii, symmetric_multiplicity, MultiplicityResult};
pub use newton::newton_polish;

use multiplicity::local_minimax;

/// Sweeps without a new best CPS value before the path maximum is refined.
const STALL_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub tol_cps: f64,
    pub max_iters: usize,
    pub path_points: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub max_backtracks: usize,
    pub seed: u64,
    /// `None` means `10⁻²·diameter`.
    pub dedupe_distance: Option<f64>,
    /// Newton polishing starts once the CPS quantity has dropped by this factor.
    pub newton_switch: f64,
    pub divergence_bound: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol_cps: 1e-6,
            max_iters: 10_000,
            path_points: 21,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            max_backtracks: 50,
            seed: 0,
            dedupe_distance: None,
            newton_switch: 1e-2,
            divergence_bound: 1e6,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.tol_cps,
            self.armijo_c,
            self.armijo_shrink,
            self.newton_switch,
            self.divergence_bound,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::Config(
                "solver tolerances and limits must be positive".into(),
            ));
        }
        if self.armijo_c >= 1.0 || self.armijo_shrink >= 1.0 {
            return Err(Error::Config("Armijo constants must lie in (0, 1)".into()));
        }
        if self.path_points < 3 {
            return Err(Error::Config(format!(
                "path needs at least 3 points, got {}",
                self.path_points
            )));
        }
        if let Some(d) = self.dedupe_distance {
            if !(d > 0.0) {
                return Err(Error::Config("dedupe distance must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub state: State,
    pub level: f64,
    pub cps_final: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub residual: [f64; 2],
    pub trace: CpsTrace,
}

/// Growth exponents of the model's nonlinearity.
pub fn model_exponents(model: &Model) -> Result<GrowthExponents> {
    let g = &model.g.growth;
    derive_exponents(model.p1, model.p2, model.n, g.q1, g.q2, g.s1, g.s2)
}

/// `H¹₀` inner product of pairs, the metric of the descent and the path.
pub(crate) fn pair_inner(f: &Functional, a: &State, b: &State) -> f64 {
    f.riesz().inner(&a.u, &b.u) + f.riesz().inner(&a.v, &b.v)
}

pub(crate) fn pair_norm(f: &Functional, a: &State) -> f64 {
    pair_inner(f, a, a).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentStep {
    pub state: State,
    pub energy: f64,
    pub step: f64,
    pub cps: f64,
}

/// One `H¹₀`-preconditioned steepest-descent step with Armijo backtracking.
pub fn descend(f: &Functional, s: &State, config: &SolveConfig) -> Result<DescentStep> {
    let j0 = f.value(s)?;
    let c = f.differential(s)?;
    descend_from(f, s, j0, &c, 1.0, config)
}

pub(crate) fn descend_from(
    f: &Functional,
    s: &State,
    j0: f64,
    c: &Cotangent,
    step0: f64,
    config: &SolveConfig,
) -> Result<DescentStep> {
    let cps = f.cps_from(c, s);
    if cps <= config.tol_cps {
        return Ok(DescentStep {
            state: s.clone(),
            energy: j0,
            step: 0.0,
            cps,
        });
    }
    let g = f.gradient(c, s.p1, s.p2);
    let g2 = c.pair(&g.u, &g.v);
    let mut alpha = step0;
    for _ in 0..config.max_backtracks {
        let trial = s.axpy(-alpha, &g);
        if let Ok(j) = f.value(&trial) {
            if j <= j0 - config.armijo_c * alpha * g2 {
                return Ok(DescentStep {
                    state: trial,
                    energy: j,
                    step: alpha,
                    cps,
                });
            }
        }
        alpha *= config.armijo_shrink;
    }
    Err(Error::StepFailure {
        backtracks: config.max_backtracks,
    })
}

/// Re-spaces interior path points uniformly in arc length, endpoints fixed.
/// Returns the indices whose state changed.
fn redistribute(f: &Functional, path: &mut [State]) -> Vec<usize> {
    let n = path.len();
    let mut arc = vec![0.0; n];
    for i in 1..n {
        arc[i] = arc[i - 1] + pair_norm(f, &path[i].axpy(-1.0, &path[i - 1]));
    }
    let total = arc[n - 1];
    if !(total > 0.0) {
        return Vec::new();
    }
    let old = path.to_vec();
    let mut seg = 0;
    for (i, slot) in path.iter_mut().enumerate().take(n - 1).skip(1) {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 1 < n - 1 && arc[seg + 1] < target {
            seg += 1;
        }
        let len = arc[seg + 1] - arc[seg];
        let w = if len > 0.0 {
            ((target - arc[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let a = &old[seg];
        let b = &old[seg + 1];
        *slot = a.axpy(w, &b.axpy(-1.0, a));
    }
    (1..n - 1).collect()
}

fn energies_of(f: &Functional, states: &[State]) -> Result<Vec<f64>> {
    states.par_iter().map(|s| f.value(s)).collect()
}

fn finish(
    f: &Functional,
    state: State,
    level: f64,
    cps: f64,
    classification: Classification,
    trace: CpsTrace,
) -> Result<SolveResult> {
    let (ru, rv) = f.residual_check(&state)?;
    Ok(SolveResult {
        iterations: trace.len().saturating_sub(1),
        state,
        level,
        cps_final: cps,
        classification,
        residual: [ru, rv],
        trace,
    })
}

/// Path-deformation minimax from `0` to the geometry's `e`, followed by Newton
/// polishing of the path maximum once the CPS quantity is small.
pub fn mountain_pass(
    f: &Functional,
    geometry: &GeometryReport,
    config: &SolveConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let e = &geometry.e_state;
    e.validate(f.mesh)?;
    let n = config.path_points;
    let mut path: Vec<State> = (0..n)
        .map(|i| e.scaled(i as f64 / (n - 1) as f64))
        .collect();
    let mut energies = energies_of(f, &path)?;
    let mut trace = CpsTrace::new();
    let mut alpha: f64 = 1.0;
    let mut switch: Option<f64> = None;
    let mut last_step = 0.0;
    let mut best: Option<(State, f64, f64)> = None;
    let mut stall = 0usize;
    while trace.len() < config.max_iters {
        let k = (1..n - 1)
            .max_by(|&a, &b| energies[a].total_cmp(&energies[b]))
            .ok_or_else(|| invalid("path has no interior points"))?;
        let (sk, jk) = (path[k].clone(), energies[k]);
        let c = f.differential(&sk)?;
        let cps = f.cps_from(&c, &sk);
        trace.record(f.mesh, &sk, jk, cps, last_step);
        if jk < 0.5 * geometry.rho0 {
            return Err(Error::GeometryViolation {
                level: jk,
                rho0: geometry.rho0,
            });
        }
        if sk.norm_x(f.mesh) > config.divergence_bound {
            return finish(f, sk, jk, cps, Classification::Diverged, trace);
        }
        if cps <= config.tol_cps {
            return finish(f, sk, jk, cps, Classification::Converged, trace);
        }
        if best.as_ref().is_none_or(|b| cps < b.2) {
            best = Some((sk.clone(), jk, cps));
            stall = 0;
        } else {
            stall += 1;
        }
        let threshold = *switch.get_or_insert(cps * config.newton_switch);
        if cps <= threshold || stall >= STALL_SWEEPS {
            // Newton from the path maximum, then the ray-peak minimax from its direction.
            let accept = |s: &State| -> Result<Option<(f64, f64)>> {
                let level = f.value(s)?;
                let ok = level >= geometry.rho0 - 10.0 * config.tol_cps
                    && s.norm_w(f.mesh) >= 0.5 * geometry.r0;
                Ok(ok.then_some((level, f.cps_quantity(s)?)))
            };
            let mut polish_trace = trace.clone();
            if let Some(s) = newton_polish(f, &sk, config, &mut polish_trace)? {
                if let Some((level, cps_s)) = accept(&s)? {
                    return finish(f, s, level, cps_s, Classification::Converged, polish_trace);
                }
            }
            let mut lmm_trace = trace.clone();
            if let Some(s) = local_minimax(f, &[], &sk, config, &mut lmm_trace)? {
                if let Some((level, cps_s)) = accept(&s)? {
                    return finish(f, s, level, cps_s, Classification::Converged, lmm_trace);
                }
            }
            switch = Some(threshold * 0.1);
            stall = 0;
        }
        match descend_from(f, &sk, jk, &c, (2.0 * alpha).min(1.0), config) {
            Ok(step) => {
                alpha = step.step;
                last_step = step.step;
                path[k] = step.state;
                energies[k] = step.energy;
            }
            Err(Error::StepFailure { .. }) => break,
            Err(e) => return Err(e),
        }
        let moved = redistribute(f, &mut path);
        let states: Vec<State> = moved.iter().map(|&i| path[i].clone()).collect();
        for (i, j) in moved.into_iter().zip(energies_of(f, &states)?) {
            energies[i] = j;
        }
    }
    let (s, j, cps) = best.unwrap_or_else(|| (e.clone(), f64::NAN, f64::NAN));
    finish(f, s, j, cps, Classification::MaxIters, trace)
}

/// `(u, 0)` with `u = R φ/|φ|_∞`.
pub fn scaled_mode(phi: &Field, radius: f64, p1: f64, p2: f64, second: bool) -> Result<State> {
    let m = crate::mesh::norm_linf(phi);
    if !(m > 0.0) {
        return Err(invalid("eigenfunction vanishes identically"));
    }
    let f = phi.scaled(radius / m);
    let z = Field::zeros(phi.len());
    Ok(if second {
        State::new(z, f, p1, p2)
    } else {
        State::new(f, z, p1, p2)
    })
}
