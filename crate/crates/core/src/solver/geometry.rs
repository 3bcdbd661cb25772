//! Sampled certificate for the mountain-pass geometry: the sphere radius `R₀`,
//! the level `ϱ₀` on it, and a far point `e` with `J(e) < ϱ₀`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{model_exponents, scaled_mode};
use crate::energy::{Functional, State};
use crate::error::{Error, Result};
use crate::hypotheses::check_g3_margin;
use crate::linalg::mass;
use crate::mesh::{norm_w, Field, Mesh};
use crate::models::{apow, Model, Site};
use crate::spectrum::{embedding_constant, random_smooth_field, SpectralResult};

pub const SPHERE_SAMPLES: usize = 1000;
const MAX_DOUBLINGS: usize = 60;

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub lambda_bar: f64,
    pub sigma_star: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub rho0: f64,
    pub e_state: State,
    pub e_energy: f64,
    /// Which component carries `e`: `"u"` or `"v"`.
    pub e_component: String,
    /// `(t, J(tū))` for every doubling tried.
    pub doublings: Vec<[f64; 2]>,
    pub sphere_min_J: f64,
    pub sphere_samples: usize,
    pub sphere_violations: usize,
    pub lambda1: [f64; 2],
    pub tau: [f64; 2],
    pub qbar: [f64; 2],
    pub margins: BTreeMap<String, f64>,
}

fn probe_sites(mesh: &Mesh) -> Vec<Site> {
    let n = mesh.n_elements();
    let step = (n / 8).max(1);
    (0..n)
        .step_by(step)
        .map(|e| Site::at(mesh.barycenter(e)))
        .collect()
}

/// Least `σ* ≥ 0` with `G − G(x,0,0) ≤ λ̄(|u|^{p₁}+|v|^{p₂}) + σ*(|u|^{q̄₁}+|v|^{q̄₂})` on the samples.
fn sigma_star(model: &Model, lambda_bar: f64, qbar: [f64; 2], sites: &[Site], seed: u64) -> f64 {
    let mut pts = Vec::new();
    for k in -40..=40 {
        let rad = 10f64.powf(k as f64 / 10.0);
        for j in 0..64 {
            let a = std::f64::consts::TAU * j as f64 / 64.0;
            pts.push((rad * a.cos(), rad * a.sin()));
        }
        pts.push((rad, 0.0));
        pts.push((0.0, rad));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.extend((0..2000).map(|_| (rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0))));
    let mut worst = 0.0f64;
    for site in sites {
        let g0 = model.g.g(site, 0.0, 0.0);
        for &(u, v) in &pts {
            let den = apow(u, qbar[0]) + apow(v, qbar[1]);
            if den == 0.0 {
                continue;
            }
            let excess =
                model.g.g(site, u, v) - g0 - lambda_bar * (apow(u, model.p1) + apow(v, model.p2));
            worst = worst.max(excess / den);
        }
    }
    worst
}

/// `min_{a+b=R} c₁aᵖ¹ + c₂bᵖ²` by golden section (the function is convex in `a`).
fn sphere_floor(c: [f64; 2], p: [f64; 2], r: f64) -> f64 {
    let h = |a: f64| c[0] * a.powf(p[0]) + c[1] * (r - a).max(0.0).powf(p[1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, r);
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if h(a) <= h(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    h(0.5 * (lo + hi)).min(h(0.0)).min(h(r))
}

pub fn verify_geometry(
    f: &Functional,
    spectral: [&SpectralResult; 2],
    seed: u64,
) -> Result<GeometryReport> {
    let (mesh, model) = (f.mesh, f.model);
    let (p1, p2) = (model.p1, model.p2);
    let lambda1 = [spectral[0].lambda, spectral[1].lambda];
    let sites = probe_sites(mesh);
    let g3 = check_g3_margin(model, lambda1[0], lambda1[1], &sites);
    if !g3.verdict.holds() {
        return Err(Error::GeometryUnavailable(format!(
            "g3 fails: small-amplitude ratio {} is not below {}",
            g3.estimate, g3.bound
        )));
    }
    let lambda_bar = g3.lambda_bar;
    let ex = model_exponents(model)?;
    let qbar = [ex.qbar1, ex.qbar2];
    let sigma = sigma_star(model, lambda_bar, qbar, &sites, seed);
    let tau = [
        embedding_constant(p1, qbar[0], mesh)?,
        embedding_constant(p2, qbar[1], mesh)?,
    ];
    let mu0 = model.a.mu0().min(model.b.mu0());
    let coeffs = |r0: f64| {
        [
            mu0 / p1
                - lambda_bar / lambda1[0]
                - sigma * tau[0].powf(qbar[0]) * r0.powf(qbar[0] - p1),
            mu0 / p2
                - lambda_bar / lambda1[1]
                - sigma * tau[1].powf(qbar[1]) * r0.powf(qbar[1] - p2),
        ]
    };
    let (r0, rho0) = if sigma == 0.0 {
        let c = coeffs(1.0);
        (
            1.0,
            if c[0] > 0.0 && c[1] > 0.0 {
                sphere_floor(c, [p1, p2], 1.0)
            } else {
                0.0
            },
        )
    } else {
        (-120..=60)
            .map(|k| 10f64.powf(k as f64 / 20.0))
            .filter_map(|r0| {
                let c = coeffs(r0);
                (c[0] > 0.0 && c[1] > 0.0).then(|| (r0, sphere_floor(c, [p1, p2], r0)))
            })
            .fold(
                (f64::NAN, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
    };
    if !(rho0 > 0.0) {
        return Err(Error::GeometryUnavailable(format!(
            "no radius keeps both coercivity constants positive (σ* = {sigma})"
        )));
    }
    let c = coeffs(r0);

    // Far point: double t along the first eigenfunction of one component.
    let mut doublings = Vec::new();
    let mut found = None;
    for (idx, name) in [(0usize, "u"), (1usize, "v")] {
        let dir = scaled_mode(&spectral[idx].phi, 1.0, p1, p2, idx == 1)?;
        let mut t = 1.0;
        let mut last = f64::NAN;
        for _ in 0..MAX_DOUBLINGS {
            let s = dir.scaled(t);
            let j = f.value(&s)?;
            if idx == 0 {
                doublings.push([t, j]);
            }
            last = j;
            if j < rho0 && j < 0.0 && s.norm_w(mesh) > r0 {
                found = Some((s, j, name));
                break;
            }
            t *= 2.0;
        }
        if found.is_some() {
            break;
        }
        if idx == 1 {
            return Err(Error::SuperlinearityNotDetected {
                doublings: MAX_DOUBLINGS,
                last_energy: last,
            });
        }
    }
    let (e_state, e_energy, e_component) = found.expect("loop either finds e or returns");

    // Sphere samples with ‖u‖_{W₁} + ‖v‖_{W₂} = R₀.
    let riesz = f.riesz();
    let mm = mass(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5be7e);
    let mut samples = Vec::with_capacity(SPHERE_SAMPLES);
    for i in 0..SPHERE_SAMPLES {
        let w = random_smooth_field(mesh, riesz, &mm, &mut rng, 1 + i % 3);
        let z = random_smooth_field(mesh, riesz, &mm, &mut rng, 1 + (i / 3) % 3);
        let frac = match i {
            0 => 1.0,
            1 => 0.0,
            _ => rng.gen_range(0.0..=1.0),
        };
        let (nw, nz) = (norm_w(mesh, &w, p1)?, norm_w(mesh, &z, p2)?);
        let u = Field::new(w).scaled(frac * r0 / nw);
        let v = Field::new(z).scaled((1.0 - frac) * r0 / nz);
        samples.push(State::new(u, v, p1, p2));
    }
    let values: Vec<f64> = samples
        .par_iter()
        .map(|s| f.value(s))
        .collect::<Result<_>>()?;
    let sphere_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = values.iter().filter(|&&j| !(j >= rho0)).count();

    let mut margins = BTreeMap::new();
    margins.insert("g3".to_string(), g3.bound - g3.estimate);
    margins.insert("geo21_u".to_string(), c[0]);
    margins.insert("geo21_v".to_string(), c[1]);
    margins.insert("sphere".to_string(), sphere_min - rho0);
    margins.insert("e_level".to_string(), rho0 - e_energy);
    Ok(GeometryReport {
        lambda_bar,
        sigma_star: sigma,
        r0,
        rho0,
        e_state,
        e_energy,
        e_component: e_component.to_string(),
        doublings,
        sphere_min_J: sphere_min,
        sphere_samples: SPHERE_SAMPLES,
        sphere_violations: violations,
        lambda1,
        tau,
        qbar,
        margins,
    })
}
