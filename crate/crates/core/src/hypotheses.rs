//! Structural hypotheses on `A`, `B`, `G`: exact verdicts for the built-in
//! families, sampled verdicts otherwise, and the corollary parameter checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    coupled_bound, derive_exponents, sobolev_conjugate, CoefficientModel, GrowthExponents, Model,
    NonlinearityModel, Site,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    SampledPass,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self != Verdict::Fail
    }

    fn from_bool(ok: bool, sampled: bool) -> Self {
        match (ok, sampled) {
            (false, _) => Verdict::Fail,
            (true, false) => Verdict::Pass,
            (true, true) => Verdict::SampledPass,
        }
    }
}

/// Counterexample or explanation attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
}

impl Witness {
    fn text(detail: impl Into<String>) -> Self {
        Witness {
            detail: detail.into(),
            point: None,
        }
    }

    fn at(detail: impl Into<String>, u: f64, v: f64) -> Self {
        Witness {
            detail: detail.into(),
            point: Some([u, v]),
        }
    }
}

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn midpoint(&self) -> Option<f64> {
        (!self.is_empty()).then_some(0.5 * (self.lo + self.hi))
    }
}

/// `[1/q, 1/(p+γ))`: `θ` values compatible with both the coefficient and the
/// superlinearity conditions of the power families.
pub fn theta_window(p: f64, gamma: f64, q: f64) -> Window {
    Window {
        lo: 1.0 / q,
        hi: 1.0 / (p + gamma),
    }
}

/// Constants derived along the hypothesis chain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
    /// `γ_i = max{p_i(1−μ₁), (1−p_iθ_i−μ₂)/θ_i}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_bound: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_windows: Option<[Window; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<GrowthExponents>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1_hat: Option<f64>,
    /// Which condition set supports the multiplicity statement: `g4`, `g6+g7`, `both`, `none`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity_route: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub verdicts: BTreeMap<String, Verdict>,
    pub witnesses: BTreeMap<String, Witness>,
    pub derived: Derived,
}

impl HypothesisReport {
    fn set(&mut self, name: &str, verdict: Verdict, witness: Option<Witness>) {
        self.verdicts.insert(name.to_string(), verdict);
        match witness {
            Some(w) => {
                self.witnesses.insert(name.to_string(), w);
            }
            None => debug_assert!(verdict != Verdict::Fail, "fail without witness: {name}"),
        }
    }

    fn set_bool(&mut self, name: &str, ok: bool, sampled: bool, witness: Witness) {
        let v = Verdict::from_bool(ok, sampled);
        self.set(
            name,
            v,
            (!ok || !witness.detail.is_empty()).then_some(witness),
        );
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.verdicts.get(name).copied()
    }

    pub fn overall_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.holds())
    }

    pub fn failed(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| **v == Verdict::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Adds `other`'s entries; derived constants already present are kept.
    pub fn merge(&mut self, other: HypothesisReport) {
        self.verdicts.extend(other.verdicts);
        self.witnesses.extend(other.witnesses);
        let d = &mut self.derived;
        let o = other.derived;
        d.mu0 = d.mu0.or(o.mu0);
        d.mu1 = d.mu1.or(o.mu1);
        d.mu2 = d.mu2.or(o.mu2);
        d.gamma_bound = d.gamma_bound.or(o.gamma_bound);
        d.theta = d.theta.or(o.theta);
        d.theta_windows = d.theta_windows.or(o.theta_windows);
        d.exponents = d.exponents.or(o.exponents);
        d.sigma_hat = d.sigma_hat.or(o.sigma_hat);
        d.sigma1_hat = d.sigma1_hat.or(o.sigma1_hat);
        if d.multiplicity_route.is_none() {
            d.multiplicity_route = o.multiplicity_route;
        }
    }
}

/// Sampling region and sites for checks that cannot be decided in closed form.
#[derive(Debug, Clone)]
pub struct Sampler {
    /// Half-width of the `(u,v)` box.
    pub half_width: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub sites: Vec<Site>,
    /// Use sampling even where an exact verdict is available.
    pub force_sampled: bool,
}

impl Sampler {
    /// Box `|u|,|v| ≤ max(10, 2R)`.
    pub fn for_radius(r: f64, seed: u64) -> Self {
        Sampler {
            half_width: (2.0 * r).max(10.0),
            n_samples: 4000,
            seed,
            sites: vec![Site::at([0.0; 2])],
            force_sampled: false,
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Points with `|(u,v)| ≥ r`: axis probes, asymptotic rays, then uniform box samples.
    fn outer_points(&self, r: f64, salt: u64) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        let mut radii: Vec<f64> = [1.0, 1.5, 2.0, 4.0].iter().map(|k| k * r).collect();
        radii.extend((1..=8).map(|k| 10f64.powi(k)));
        for &rad in &radii {
            for k in 0..16 {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                let (s, c) = a.sin_cos();
                let (u, v) = (rad * c, rad * s);
                pts.push((clean(u, rad), clean(v, rad)));
            }
        }
        let mut rng = self.rng(salt);
        let h = self.half_width;
        while pts.len() < radii.len() * 16 + self.n_samples {
            let (u, v) = (rng.gen_range(-h..=h), rng.gen_range(-h..=h));
            if u.hypot(v) >= r {
                pts.push((u, v));
            }
        }
        pts
    }

    fn scalars(&self, r: f64, salt: u64) -> Vec<f64> {
        let mut out: Vec<f64> = (1..=8)
            .flat_map(|k| [10f64.powi(k), -10f64.powi(k)])
            .collect();
        out.extend([r, -r, 2.0 * r, -2.0 * r]);
        let mut rng = self.rng(salt);
        let h = self.half_width;
        out.extend((0..self.n_samples / 4).map(|_| rng.gen_range(-h..=h)));
        out
    }
}

/// Snaps round-off from `cos(π/2)` etc. to exact zero so axis probes stay on the axes.
fn clean(x: f64, scale: f64) -> f64 {
    if x.abs() < 1e-12 * scale {
        0.0
    } else {
        x
    }
}

fn coefficient_effective_gamma(a: &CoefficientModel) -> f64 {
    a.effective_gamma()
}

/// `(h2)`–`(h5)` for the coefficient pair.
pub fn check_structure(
    a: &CoefficientModel,
    b: &CoefficientModel,
    p1: f64,
    p2: f64,
    theta: [f64; 2],
    r: f64,
    sampler: Option<&Sampler>,
) -> Result<HypothesisReport> {
    let mut rep = HypothesisReport::default();
    let exact = a.is_power() && b.is_power() && !sampler.is_some_and(|s| s.force_sampled);
    let ps = [p1, p2];
    let coeffs = [a, b];
    rep.derived.theta = Some(theta);
    if exact {
        let mu0 = a.mu0().min(b.mu0());
        rep.derived.mu0 = Some(mu0);
        rep.set_bool("h2", mu0 > 0.0, false, Witness::text(format!("μ₀ = {mu0}")));
        // A_u·u = γA₂|u|^γ ≥ 0, so μ₁ = 1 is admissible.
        rep.derived.mu1 = Some(1.0);
        rep.set(
            "h3",
            Verdict::Pass,
            Some(Witness::text("A_u·u ≥ 0; μ₁ = 1")),
        );
        let mut mu2 = f64::INFINITY;
        let mut fail = None;
        for i in 0..2 {
            let g = coefficient_effective_gamma(coeffs[i]);
            let c = 1.0 - ps[i] * theta[i] - g * theta[i];
            mu2 = mu2.min(c);
            if !(theta[i] > 0.0 && c > 0.0) && fail.is_none() {
                fail = Some(Witness::text(format!(
                    "θ{} = {} ∉ (0, 1/(p{}+γ{})) = (0, {})",
                    i + 1,
                    theta[i],
                    i + 1,
                    i + 1,
                    1.0 / (ps[i] + g)
                )));
            }
        }
        match fail {
            None => {
                rep.derived.mu2 = Some(mu2);
                rep.set(
                    "h4",
                    Verdict::Pass,
                    Some(Witness::text(format!("μ₂ = {mu2}"))),
                );
            }
            Some(w) => rep.set("h4", Verdict::Fail, Some(w)),
        }
        rep.set("h5", Verdict::Pass, None);
    } else {
        let s = sampler
            .ok_or_else(|| Error::Config("custom coefficient requires a sampling box".into()))?;
        let mut mu0_seen = f64::INFINITY;
        let mut mu1 = 1.0f64;
        let mut mu2 = f64::INFINITY;
        let mut w2 = None;
        let mut w5 = None;
        for (i, c) in coeffs.iter().enumerate() {
            let mut sites = c.sample_sites();
            sites.extend(s.sites.iter().copied());
            let us = s.scalars(r, 11 + i as u64);
            for site in &sites {
                for &u in &us {
                    let av = c.evaluate(site, u);
                    let du = c.derivative(site, u);
                    mu0_seen = mu0_seen.min(av);
                    if av < c.mu0() && w2.is_none() {
                        w2 = Some(Witness::at(format!("A = {av} < μ₀ = {}", c.mu0()), u, 0.0));
                    }
                    if u.abs() >= r {
                        mu1 = mu1.min(1.0 + du * u / (ps[i] * av));
                    }
                    mu2 = mu2.min(1.0 - ps[i] * theta[i] - theta[i] * du * u / av);
                    if (c.evaluate(site, -u) - av).abs() > 1e-12 * av.abs().max(1.0) && w5.is_none()
                    {
                        w5 = Some(Witness::at("A(x,−u) ≠ A(x,u)", u, 0.0));
                    }
                }
            }
        }
        rep.derived.mu0 = Some(mu0_seen);
        let ok2 = w2.is_none() && a.mu0() > 0.0 && b.mu0() > 0.0;
        rep.set_bool(
            "h2",
            ok2,
            true,
            w2.unwrap_or_else(|| Witness::text(format!("min sampled A, B = {mu0_seen}"))),
        );
        rep.set_bool("h3", mu1 > 0.0, true, Witness::text(format!("μ₁ = {mu1}")));
        if mu1 > 0.0 {
            rep.derived.mu1 = Some(mu1);
        }
        let ok4 = mu2 > 0.0
            && theta[0] * p1 < 1.0
            && theta[1] * p2 < 1.0
            && theta[0] > 0.0
            && theta[1] > 0.0;
        rep.set_bool(
            "h4",
            ok4,
            true,
            Witness::text(format!("sampled μ₂ = {mu2}")),
        );
        if ok4 {
            rep.derived.mu2 = Some(mu2);
        }
        let even = a.is_even() && b.is_even() && w5.is_none();
        rep.set_bool(
            "h5",
            even,
            true,
            w5.unwrap_or_else(|| {
                Witness::text(if a.is_even() && b.is_even() {
                    ""
                } else {
                    "coefficient declared non-even"
                })
            }),
        );
    }
    if let (Some(mu1), Some(mu2)) = (rep.derived.mu1, rep.derived.mu2) {
        let gb = |i: usize| (ps[i] * (1.0 - mu1)).max((1.0 - ps[i] * theta[i] - mu2) / theta[i]);
        rep.derived.gamma_bound = Some([gb(0), gb(1)]);
    }
    Ok(rep)
}

/// `0 < G ≤ θ₁G_u·u + θ₂G_v·v` at sampled points with `|(u,v)| ≥ R`.
pub fn check_ar_sampled(g: &NonlinearityModel, sampler: &Sampler) -> (Verdict, Option<Witness>) {
    let [t1, t2] = g.theta;
    for site in &sampler.sites {
        for (u, v) in sampler.outer_points(g.r, 21) {
            let (gv, gu, gvv) = g.eval(site, u, v);
            let rhs = t1 * gu * u + t2 * gvv * v;
            if !(gv > 0.0) {
                return (
                    Verdict::Fail,
                    Some(Witness::at(format!("G = {gv} is not positive"), u, v)),
                );
            }
            if gv > rhs + 1e-12 * gv.abs() {
                return (
                    Verdict::Fail,
                    Some(Witness::at(
                        format!("G = {gv} > θ₁G_u·u + θ₂G_v·v = {rhs}"),
                        u,
                        v,
                    )),
                );
            }
        }
    }
    (Verdict::SampledPass, None)
}

/// `G(t^{θ₁}u, t^{θ₂}v) ≥ t·G(u,v)` over `t_grid × samples`.
pub fn check_superhomogeneity(
    g: &NonlinearityModel,
    t_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> (Verdict, Option<Witness>, usize) {
    let mut s = Sampler::for_radius(g.r, seed);
    s.n_samples = n_samples;
    let mut rng = s.rng(31);
    let h = s.half_width;
    let mut pts = Vec::with_capacity(n_samples);
    while pts.len() < n_samples {
        let (u, v) = (rng.gen_range(-h..=h), rng.gen_range(-h..=h));
        if u.hypot(v) >= g.r {
            pts.push((u, v));
        }
    }
    let site = Site::at([0.0; 2]);
    let mut checked = 0;
    for &t in t_grid {
        for &(u, v) in &pts {
            checked += 1;
            let lhs = g.g(&site, t.powf(g.theta[0]) * u, t.powf(g.theta[1]) * v);
            let rhs = t * g.g(&site, u, v);
            if lhs < rhs - 1e-12 * rhs.abs() {
                let w = Witness::at(format!("t = {t}: G(t^θ·) = {lhs} < tG = {rhs}"), u, v);
                return (Verdict::Fail, Some(w), checked);
            }
        }
    }
    (Verdict::SampledPass, None, checked)
}

/// `limsup_{(u,v)→0} G/(|u|^{p₁}+|v|^{p₂})` against `μ₀ min{λ₁₁/p₁, λ₂₁/p₂}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G3Margin {
    pub estimate: f64,
    pub bound: f64,
    pub lambda_bar: f64,
    pub verdict: Verdict,
}

pub fn check_g3_margin(model: &Model, lambda11: f64, lambda21: f64, sites: &[Site]) -> G3Margin {
    let mu0 = model.a.mu0().min(model.b.mu0());
    let bound = mu0 * (lambda11 / model.p1).min(lambda21 / model.p2);
    let default_site = [Site::at([0.0; 2])];
    let sites = if sites.is_empty() {
        &default_site[..]
    } else {
        sites
    };
    let mut shell_max = Vec::new();
    for k in 1..=6 {
        let rad = 10f64.powi(-k);
        let mut m = f64::NEG_INFINITY;
        for site in sites {
            let g00 = model.g.g(site, 0.0, 0.0);
            for j in 0..256 {
                let a = std::f64::consts::TAU * j as f64 / 256.0;
                let (u, v) = (clean(rad * a.cos(), rad), clean(rad * a.sin(), rad));
                let den = u.abs().powf(model.p1) + v.abs().powf(model.p2);
                m = m.max((model.g.g(site, u, v) - g00) / den);
            }
        }
        shell_max.push(m);
    }
    let estimate = shell_max[4].max(shell_max[5]);
    let ok = estimate < bound;
    let lambda_bar = if ok {
        0.5 * (estimate.max(0.0) + bound)
    } else {
        f64::NAN
    };
    G3Margin {
        estimate,
        bound,
        lambda_bar,
        verdict: Verdict::from_bool(ok, true),
    }
}

/// Exact `(g3)` verdict for built-in families: `G = o(|u|^{p₁}+|v|^{p₂})` near zero.
fn g3_exact(model: &Model) -> Option<bool> {
    let (p1, p2) = (model.p1, model.p2);
    if let Some(p) = model.g.power_params() {
        let pure1 = p.w1 == 0.0 || p.q1 > p1;
        let pure2 = p.w2 == 0.0 || p.q2 > p2;
        let cross = p.c_star == 0.0 || p.gamma3 / p1 + p.gamma4 / p2 > 1.0;
        return (pure1 && pure2 && cross).then_some(true);
    }
    if let Some(p) = model.g.log_params() {
        let ok = p.q1 > p1
            && p.q2 > p2
            && p.gamma3 / p1 + 2.0 / p2 > 1.0
            && 2.0 / p1 + p.gamma4 / p2 > 1.0;
        return ok.then_some(true);
    }
    None
}

/// `(g0)`–`(g2)`, `(g4)`–`(g7)` and, where exact, `(g3)`.
pub fn check_nonlinearity(model: &Model, sampler: &Sampler) -> HypothesisReport {
    let g = &model.g;
    let mut rep = HypothesisReport::default();
    let exact = !sampler.force_sampled && g.family_tag() != "custom";
    let [t1, t2] = g.theta;
    let r = g.r;

    // (g0)
    if exact {
        rep.set("g0", Verdict::Pass, None);
    } else {
        let mut bad = None;
        for site in &sampler.sites {
            let (g00, gu, gv) = g.eval(site, 0.0, 0.0);
            if !(g00.is_finite() && gu == 0.0 && gv == 0.0) {
                bad = Some(Witness::at(
                    format!("G_u, G_v at origin = {gu}, {gv}"),
                    0.0,
                    0.0,
                ));
            }
        }
        let ok = bad.is_none();
        rep.set_bool("g0", ok, true, bad.unwrap_or_else(|| Witness::text("")));
    }

    // (g1): exponent windows, plus a sampled σ̂.
    let gr = g.growth;
    match derive_exponents(model.p1, model.p2, model.n, gr.q1, gr.q2, gr.s1, gr.s2) {
        Ok(e) => {
            rep.derived.exponents = Some(e);
            rep.set("crit_exp", Verdict::Pass, None);
            rep.set("crit_expi", Verdict::Pass, None);
            rep.set("g1", Verdict::from_bool(true, !exact), None);
        }
        Err(Error::WindowEmpty { condition, detail }) => {
            if condition == "crit_exp" {
                rep.set(
                    "crit_exp",
                    Verdict::Fail,
                    Some(Witness::text(detail.clone())),
                );
            } else {
                rep.set("crit_exp", Verdict::Pass, None);
                rep.set(
                    "crit_expi",
                    Verdict::Fail,
                    Some(Witness::text(detail.clone())),
                );
            }
            rep.set(
                "g1",
                Verdict::Fail,
                Some(Witness::text(format!("{condition}: {detail}"))),
            );
        }
        Err(e) => rep.set("g1", Verdict::Fail, Some(Witness::text(e.to_string()))),
    }
    let (sigma, sigma1) = sample_sigma(g, sampler);
    rep.derived.sigma_hat = Some(sigma);
    rep.derived.sigma1_hat = Some(sigma1);

    // (g2)
    let g2 = if exact { g2_exact(g) } else { None };
    match g2 {
        Some((v, w)) => rep.set("g2", v, w),
        None => {
            let (v, w) = check_ar_sampled(g, sampler);
            rep.set("g2", v, w);
        }
    }

    // (g3) only when decidable without eigenvalues.
    if exact {
        if let Some(ok) = g3_exact(model) {
            rep.set_bool("g3", ok, false, Witness::text("limsup = 0 at the origin"));
        }
    }

    // (g4)
    let g4 = if exact { g4_exact(g) } else { None };
    let (v4, w4) = g4.unwrap_or_else(|| g4_sampled(g, sampler));
    rep.set("g4", v4, w4);

    // (g5)
    if exact {
        rep.set("g5", Verdict::Pass, None);
    } else {
        let mut bad = None;
        'outer: for site in &sampler.sites {
            for (u, v) in sampler.outer_points(0.0, 51).into_iter().take(2000) {
                if g.g(site, -u, -v) != g.g(site, u, v) {
                    bad = Some(Witness::at("G(x,−u,−v) ≠ G(x,u,v)", u, v));
                    break 'outer;
                }
            }
        }
        let ok = g.is_even() && bad.is_none();
        rep.set_bool(
            "g5",
            ok,
            true,
            bad.unwrap_or_else(|| {
                Witness::text(if g.is_even() { "" } else { "declared non-even" })
            }),
        );
    }

    // (g6)
    let g6 = if exact { g6_exact(g) } else { None };
    let (v6, w6) = g6.unwrap_or_else(|| g6_sampled(g, sampler));
    rep.set("g6", v6, w6);

    // (g7)
    rep.set_bool(
        "g7",
        t1 == t2,
        false,
        Witness::text(if t1 == t2 {
            String::new()
        } else {
            format!("θ₁ = {t1} ≠ θ₂ = {t2}")
        }),
    );

    let route4 = rep.verdict("g4").is_some_and(|v| v.holds());
    let route67 = rep.verdict("g6").is_some_and(|v| v.holds())
        && rep.verdict("g7").is_some_and(|v| v.holds());
    rep.derived.multiplicity_route = Some(
        match (route4, route67) {
            (true, true) => "both",
            (true, false) => "g4",
            (false, true) => "g6+g7",
            (false, false) => "none",
        }
        .to_string(),
    );
    let _ = r;
    rep
}

fn sample_sigma(g: &NonlinearityModel, s: &Sampler) -> (f64, f64) {
    let gr = g.growth;
    let mut sigma = 0.0f64;
    let mut g00 = 0.0f64;
    for site in &s.sites {
        g00 = g00.max(g.g(site, 0.0, 0.0).abs());
        for (u, v) in s.outer_points(0.0, 41) {
            let (_, gu, gv) = g.eval(site, u, v);
            let (au, av) = (u.abs(), v.abs());
            let d1 = 1.0 + au.powf(gr.q1 - 1.0) + av.powf(gr.s1);
            let d2 = 1.0 + au.powf(gr.s2) + av.powf(gr.q2 - 1.0);
            sigma = sigma.max(gu.abs() / d1).max(gv.abs() / d2);
        }
    }
    (sigma, sigma.max(g00))
}

fn g2_exact(g: &NonlinearityModel) -> Option<(Verdict, Option<Witness>)> {
    let [t1, t2] = g.theta;
    let r = g.r;
    if let Some(p) = g.power_params() {
        if p.w1 > 0.0 && t1 < 1.0 / p.q1 {
            let w = Witness::at(format!("θ₁ = {t1} < 1/q₁ = {}", 1.0 / p.q1), r, 0.0);
            return Some((Verdict::Fail, Some(w)));
        }
        if p.w2 > 0.0 && t2 < 1.0 / p.q2 {
            let w = Witness::at(format!("θ₂ = {t2} < 1/q₂ = {}", 1.0 / p.q2), 0.0, r);
            return Some((Verdict::Fail, Some(w)));
        }
        if p.w1 == 0.0 {
            return Some((
                Verdict::Fail,
                Some(Witness::at("G vanishes on the u-axis", r, 0.0)),
            ));
        }
        if p.w2 == 0.0 {
            return Some((
                Verdict::Fail,
                Some(Witness::at("G vanishes on the v-axis", 0.0, r)),
            ));
        }
        if p.c_star >= 0.0 && t1 * p.gamma3 + t2 * p.gamma4 >= 1.0 {
            return Some((Verdict::Pass, None));
        }
        return None;
    }
    if let Some(p) = g.log_params() {
        if t1 < 1.0 / p.q1 {
            let w = Witness::at(format!("θ₁ = {t1} < 1/q₁ = {}", 1.0 / p.q1), r, 0.0);
            return Some((Verdict::Fail, Some(w)));
        }
        if t2 < 1.0 / p.q2 {
            let w = Witness::at(format!("θ₂ = {t2} < 1/q₂ = {}", 1.0 / p.q2), 0.0, r);
            return Some((Verdict::Fail, Some(w)));
        }
        if t1 >= 1.0 / p.gamma3 && t2 >= 1.0 / p.gamma4 {
            return Some((Verdict::Pass, None));
        }
        return None;
    }
    None
}

fn g4_exact(g: &NonlinearityModel) -> Option<(Verdict, Option<Witness>)> {
    let [t1, t2] = g.theta;
    let (q1, q2, w1, w2, c_ok) = if let Some(p) = g.power_params() {
        (p.q1, p.q2, p.w1, p.w2, p.c_star >= 0.0)
    } else {
        let p = g.log_params()?;
        (p.q1, p.q2, 1.0, 1.0, true)
    };
    // Along the axes G/(|u|^{1/θ₁}) = w₁|u|^{q₁−1/θ₁}.
    if w1 == 0.0 || 1.0 / t1 > q1 {
        return Some((
            Verdict::Fail,
            Some(Witness::at("ratio → 0 along the u-axis", 1e8, 0.0)),
        ));
    }
    if w2 == 0.0 || 1.0 / t2 > q2 {
        return Some((
            Verdict::Fail,
            Some(Witness::at("ratio → 0 along the v-axis", 0.0, 1e8)),
        ));
    }
    // G ≥ w₁|u|^{q₁} + w₂|v|^{q₂} once the coupling is nonnegative.
    c_ok.then_some((Verdict::Pass, None))
}

fn g4_sampled(g: &NonlinearityModel, s: &Sampler) -> (Verdict, Option<Witness>) {
    let [t1, t2] = g.theta;
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    for site in &s.sites {
        for k in 4..=8 {
            let rad = 10f64.powi(k);
            for j in 0..64 {
                let a = std::f64::consts::TAU * j as f64 / 64.0;
                let (u, v) = (clean(rad * a.cos(), rad), clean(rad * a.sin(), rad));
                let ratio = g.g(site, u, v) / (u.abs().powf(1.0 / t1) + v.abs().powf(1.0 / t2));
                if ratio < worst.0 {
                    worst = (ratio, u, v);
                }
            }
        }
    }
    if worst.0 > 1e-10 {
        (Verdict::SampledPass, None)
    } else {
        let w = Witness::at(
            format!("ratio {} at large radius", worst.0),
            worst.1,
            worst.2,
        );
        (Verdict::Fail, Some(w))
    }
}

fn g6_exact(g: &NonlinearityModel) -> Option<(Verdict, Option<Witness>)> {
    let r = g.r;
    if let Some(p) = g.power_params() {
        if p.w1 == 0.0 {
            return Some((
                Verdict::Fail,
                Some(Witness::at("G = 0 on the sphere", 0.0, r)),
            ));
        }
        if p.w2 == 0.0 {
            return Some((
                Verdict::Fail,
                Some(Witness::at("G = 0 on the sphere", r, 0.0)),
            ));
        }
        return (p.c_star >= 0.0).then_some((Verdict::Pass, None));
    }
    // Every term of the log family is nonnegative and the pure powers vanish only at 0.
    g.log_params().map(|_| (Verdict::Pass, None))
}

fn g6_sampled(g: &NonlinearityModel, s: &Sampler) -> (Verdict, Option<Witness>) {
    let r = g.r;
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    for site in &s.sites {
        for j in 0..4096 {
            let a = std::f64::consts::TAU * j as f64 / 4096.0;
            let (u, v) = (clean(r * a.cos(), r), clean(r * a.sin(), r));
            let val = g.g(site, u, v);
            if val < worst.0 {
                worst = (val, u, v);
            }
        }
    }
    if worst.0 > 0.0 {
        (Verdict::SampledPass, None)
    } else {
        (
            Verdict::Fail,
            Some(Witness::at(
                format!("G = {} on the sphere", worst.0),
                worst.1,
                worst.2,
            )),
        )
    }
}

fn push(rep: &mut HypothesisReport, name: &str, ok: bool, detail: String) {
    rep.set_bool(
        name,
        ok,
        false,
        Witness::text(if ok { String::new() } else { detail }),
    );
}

/// Parameter conditions for the coupled power family.
#[allow(clippy::too_many_arguments)]
pub fn check_corollary1(
    p1: f64,
    p2: f64,
    n: usize,
    gammas: [f64; 4],
    q1: f64,
    q2: f64,
    c_star: f64,
) -> HypothesisReport {
    let [g1, g2, g3, g4] = gammas;
    let mut rep = HypothesisReport::default();
    let (p1s, p2s) = (sobolev_conjugate(p1, n), sobolev_conjugate(p2, n));
    push(
        &mut rep,
        "ex05",
        g1 > 1.0 && g2 > 1.0,
        format!("need γ₁, γ₂ > 1, got {g1}, {g2}"),
    );
    push(
        &mut rep,
        "ex13",
        q1 > 1.0 && q2 > 1.0 && g3 > 1.0 && g4 > 1.0,
        format!("need q₁, q₂, γ₃, γ₄ > 1, got {q1}, {q2}, {g3}, {g4}"),
    );
    push(
        &mut rep,
        "ex17",
        g3 < q1 && g4 < q2,
        format!("need γ₃ < q₁, γ₄ < q₂, got {g3}, {q1}, {g4}, {q2}"),
    );
    let ratio = g3 / q1 + g4 / q2;
    push(
        &mut rep,
        "ex12",
        c_star >= 0.0 && ratio >= 1.0,
        format!("need c★ ≥ 0 and γ₃/q₁ + γ₄/q₂ ≥ 1, got c★ = {c_star}, sum = {ratio}"),
    );
    let ok11 = p1 + g1 < q1 && p1s.exceeds(q1) && p2 + g2 < q2 && p2s.exceeds(q2);
    push(
        &mut rep,
        "cor11",
        ok11,
        format!(
            "need p+γ < q < p*: {} < {q1} < {}, {} < {q2} < {}",
            p1 + g1,
            p1s.as_f64(),
            p2 + g2,
            p2s.as_f64()
        ),
    );
    let s1 = g4 * (q1 - 1.0) / (q1 - g3);
    let s2 = g3 * (q2 - 1.0) / (q2 - g4);
    let b1 = coupled_bound(p1, n, p1s, p2s);
    let b2 = coupled_bound(p2, n, p2s, p1s);
    let ok12 = g3 < q1 && g4 < q2 && s1 < b1 && s2 < b2;
    push(
        &mut rep,
        "cor12",
        ok12,
        format!("need {s1} < {b1} and {s2} < {b2}"),
    );
    rep
}

/// Parameter conditions for the logarithmic family.
pub fn check_corollary2(
    p1: f64,
    p2: f64,
    n: usize,
    gammas: [f64; 4],
    q1: f64,
    q2: f64,
) -> HypothesisReport {
    let [g1, g2, g3, g4] = gammas;
    let mut rep = HypothesisReport::default();
    let (p1s, p2s) = (sobolev_conjugate(p1, n), sobolev_conjugate(p2, n));
    push(
        &mut rep,
        "ex05",
        g1 > 1.0 && g2 > 1.0,
        format!("need γ₁, γ₂ > 1, got {g1}, {g2}"),
    );
    push(
        &mut rep,
        "ex26",
        q1 > 1.0 && q2 > 1.0 && g3 > 1.0 && g4 > 1.0,
        format!("need q₁, q₂, γ₃, γ₄ > 1, got {q1}, {q2}, {g3}, {g4}"),
    );
    let ok21 =
        p1 + g1 < g3 && g3 < q1 && p1s.exceeds(q1) && p2 + g2 < g4 && g4 < q2 && p2s.exceeds(q2);
    push(
        &mut rep,
        "cor21",
        ok21,
        format!(
            "need p+γ < γ' < q < p*: {} < {g3} < {q1} < {}, {} < {g4} < {q2} < {}",
            p1 + g1,
            p1s.as_f64(),
            p2 + g2,
            p2s.as_f64()
        ),
    );
    let b3 = coupled_bound(p2, n, p2s, p1s);
    let b4 = coupled_bound(p1, n, p1s, p2s);
    push(
        &mut rep,
        "cor22",
        g3 < b3 && g4 < b4,
        format!("need γ₃ = {g3} < {b3} and γ₄ = {g4} < {b4}"),
    );
    rep
}

/// Full chain for a model: coefficient structure, potential, and the
/// family's corollary conditions when a declaration is attached.
pub fn check_model(model: &Model, sampler: &Sampler) -> Result<HypothesisReport> {
    let mut rep = check_structure(
        &model.a,
        &model.b,
        model.p1,
        model.p2,
        model.g.theta,
        model.g.r,
        Some(sampler),
    )?;
    rep.merge(check_nonlinearity(model, sampler));
    if let Some(d) = &model.decl {
        let gammas = [d.gamma1, d.gamma2, d.gamma3, d.gamma4];
        let lower = d.theta_lower();
        let ge = [model.a.effective_gamma(), model.b.effective_gamma()];
        rep.derived.theta_windows = Some([
            theta_window(model.p1, ge[0], 1.0 / lower[0]),
            theta_window(model.p2, ge[1], 1.0 / lower[1]),
        ]);
        let cor = match d.family {
            crate::models::Family::Power => {
                check_corollary1(d.p1, d.p2, d.n, gammas, d.q1, d.q2, d.c_star.unwrap_or(0.0))
            }
            crate::models::Family::Log => check_corollary2(d.p1, d.p2, d.n, gammas, d.q1, d.q2),
        };
        rep.merge(cor);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{power_coefficient, power_nonlinearity, ModelDecl, PowerParams};

    #[test]
    fn theta_windows() {
        let w = theta_window(2.0, 1.5, 4.0);
        assert!(!w.is_empty() && (w.lo - 0.25).abs() < 1e-15 && (w.hi - 2.0 / 7.0).abs() < 1e-15);
        assert!(theta_window(2.0, 1.5, 3.5).is_empty());
        let w = theta_window(2.0, 2.0, 5.0);
        assert_eq!((w.lo, w.hi), (0.2, 0.25));
    }

    #[test]
    fn h4_power_family() {
        let a = power_coefficient(1.0, 1.0, 1.5).unwrap();
        let rep = check_structure(&a, &a, 2.0, 2.0, [0.25, 0.25], 1.0, None).unwrap();
        assert_eq!(rep.verdict("h4"), Some(Verdict::Pass));
        assert!((rep.derived.mu2.unwrap() - 0.125).abs() < 1e-15);
        let rep = check_structure(&a, &a, 2.0, 2.0, [0.3, 0.25], 1.0, None).unwrap();
        assert_eq!(rep.verdict("h4"), Some(Verdict::Fail));
        assert!(rep.witnesses.contains_key("h4"));
        let c = power_coefficient(1.0, 0.0, 1.5).unwrap();
        let rep = check_structure(&c, &c, 2.0, 2.0, [0.45, 0.45], 1.0, None).unwrap();
        assert_eq!(rep.verdict("h3"), Some(Verdict::Pass));
        assert_eq!(rep.verdict("h4"), Some(Verdict::Pass));
    }

    #[test]
    fn custom_coefficient_needs_sampler() {
        let a = crate::models::CoefficientModel::custom(
            std::sync::Arc::new(|_, _| 1.0),
            std::sync::Arc::new(|_, _| 0.0),
            1.0,
            true,
        );
        assert!(matches!(
            check_structure(&a, &a, 2.0, 2.0, [0.25; 2], 1.0, None),
            Err(Error::Config(_))
        ));
        let s = Sampler::for_radius(1.0, 0);
        let rep = check_structure(&a, &a, 2.0, 2.0, [0.25; 2], 1.0, Some(&s)).unwrap();
        assert_eq!(rep.verdict("h4"), Some(Verdict::SampledPass));
    }

    #[test]
    fn corollary1_examples() {
        let rep = check_corollary1(2.0, 2.0, 3, [1.5, 1.5, 2.0, 2.1], 4.0, 4.0, 1.0);
        assert!(rep.overall_pass(), "{:?}", rep.failed());
        let rep = check_corollary1(2.0, 2.0, 3, [1.5, 1.5, 2.0, 2.1], 6.0, 4.0, 1.0);
        assert!(rep.failed().contains(&"cor11"));
        let rep = check_corollary1(2.0, 2.0, 3, [1.5, 1.5, 2.0, 2.5], 4.0, 4.0, 1.0);
        assert_eq!(rep.failed(), vec!["cor12"]);
    }

    #[test]
    fn corollary2_examples() {
        let rep = check_corollary2(2.0, 2.0, 3, [1.1, 1.1, 3.2, 3.2], 5.0, 5.0);
        assert!(rep.overall_pass(), "{:?}", rep.failed());
        let rep = check_corollary2(2.0, 2.0, 3, [1.1, 1.1, 3.4, 3.2], 5.0, 5.0);
        assert_eq!(rep.failed(), vec!["cor22"]);
        let rep = check_corollary2(2.0, 2.0, 3, [1.1, 1.1, 3.0, 3.2], 5.0, 5.0);
        assert_eq!(rep.failed(), vec!["cor21"]);
    }

    #[test]
    fn ar_sampled_examples() {
        let p = PowerParams::new(4.0, 4.0, 2.0, 2.0, 0.0);
        let g = power_nonlinearity(p, [0.25, 0.25], 1.0).unwrap();
        let s = Sampler::for_radius(1.0, 0);
        assert_eq!(check_ar_sampled(&g, &s).0, Verdict::SampledPass);
        let g = power_nonlinearity(p, [0.125, 0.25], 1.0).unwrap();
        let (v, w) = check_ar_sampled(&g, &s);
        assert_eq!(v, Verdict::Fail);
        let pt = w.unwrap().point.unwrap();
        assert!(pt[0] >= 1.0 && pt[1] == 0.0, "{pt:?}");
    }

    #[test]
    fn cor1_model_passes_everything() {
        let m = ModelDecl::cor1().build().unwrap();
        let rep = check_model(&m, &Sampler::for_radius(1.0, 0)).unwrap();
        assert!(rep.overall_pass(), "{:?}", rep.failed());
        assert_eq!(rep.derived.multiplicity_route.as_deref(), Some("both"));
        let (v, _, n) = check_superhomogeneity(&m.g, &[1.0, 2.0, 4.0, 8.0], 1000, 0);
        assert_eq!((v, n), (Verdict::SampledPass, 4000));
    }

    #[test]
    fn report_json_round_trip() {
        let m = ModelDecl::cor1().build().unwrap();
        let rep = check_model(&m, &Sampler::for_radius(1.0, 3)).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        let back: HypothesisReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
    }
}
