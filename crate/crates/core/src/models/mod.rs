//! Coefficients `A`, `B`, the potential `G` with its partials, the built-in
//! model families, and the exponent bookkeeping tied to Sobolev conjugates.

mod decl;
mod exponents;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mesh::Mesh;

pub use decl::{Family, Model, ModelDecl};
pub(crate) use exponents::coupled_bound;
pub use exponents::{derive_exponents, sobolev_conjugate, Conjugate, GrowthExponents};

/// Evaluation point handed to model evaluators.
///
/// `element`/`bary` locate the point on a mesh so nodal profiles can be
/// interpolated; `x` is the physical position for closure-based models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: [f64; 2],
    pub element: Option<usize>,
    pub bary: [f64; 3],
}

impl Site {
    pub fn at(x: [f64; 2]) -> Self {
        Site {
            x,
            element: None,
            bary: [0.0; 3],
        }
    }

    pub fn on_mesh(mesh: &Mesh, e: usize, bary: [f64; 3]) -> Self {
        Site {
            x: mesh.point(e, &bary),
            element: Some(e),
            bary,
        }
    }
}

/// `x`-dependent coefficient such as `A₁(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Nodal values gathered per element, interpolated linearly.
    Nodal(Arc<Vec<[f64; 3]>>),
}

impl Profile {
    pub fn nodal(mesh: &Mesh, values: &[f64]) -> Result<Self> {
        mesh.check_field(values)?;
        let per_element = (0..mesh.n_elements())
            .map(|e| {
                // Segments repeat their last value; its barycentric weight is zero.
                let el = mesh.element(e);
                let mut v = [values[el[el.len() - 1]]; 3];
                for (k, &n) in el.iter().enumerate() {
                    v[k] = values[n];
                }
                v
            })
            .collect();
        Ok(Profile::Nodal(Arc::new(per_element)))
    }

    #[inline]
    pub fn value(&self, site: &Site) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Nodal(v) => {
                let e = site.element.expect("nodal profile evaluated off-mesh");
                let w = &v[e];
                site.bary[0] * w[0] + site.bary[1] * w[1] + site.bary[2] * w[2]
            }
        }
    }

    /// Extreme values; exact since interpolation is a convex combination.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Profile::Constant(c) => (*c, *c),
            Profile::Nodal(v) => v
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                }),
        }
    }

    /// Sites where the profile attains each of its nodal values.
    pub fn sample_sites(&self) -> Vec<Site> {
        match self {
            Profile::Constant(_) => vec![Site::at([0.0; 2])],
            Profile::Nodal(v) => (0..v.len())
                .flat_map(|e| {
                    (0..3).map(move |k| {
                        let mut bary = [0.0; 3];
                        bary[k] = 1.0;
                        Site {
                            x: [0.0; 2],
                            element: Some(e),
                            bary,
                        }
                    })
                })
                .collect(),
        }
    }
}

impl From<f64> for Profile {
    fn from(c: f64) -> Self {
        Profile::Constant(c)
    }
}

pub type ScalarFn = Arc<dyn Fn(&Site, f64) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&Site, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum CoefficientKind {
    Power {
        a1: Profile,
        a2: Profile,
        gamma: f64,
    },
    Custom {
        value: ScalarFn,
        derivative: ScalarFn,
    },
}

/// `A(x,u)` with its derivative `A_u(x,u)` and structural metadata.
#[derive(Clone)]
pub struct CoefficientModel {
    kind: CoefficientKind,
    mu0: f64,
    gamma: f64,
    even: bool,
}

impl fmt::Debug for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("family", &self.family_tag())
            .field("mu0", &self.mu0)
            .field("gamma", &self.gamma)
            .finish()
    }
}

/// `A₁(x) + A₂(x)|u|^γ` with `A₁ ≥ μ₀ > 0`, `A₂ ≥ 0`, `γ > 1`.
pub fn power_coefficient(
    a1: impl Into<Profile>,
    a2: impl Into<Profile>,
    gamma: f64,
) -> Result<CoefficientModel> {
    let (a1, a2) = (a1.into(), a2.into());
    if !(gamma > 1.0) {
        return Err(invalid(format!(
            "coefficient exponent must satisfy γ > 1, got {gamma}"
        )));
    }
    let (mu0, _) = a1.bounds();
    if !(mu0 > 0.0) {
        return Err(invalid(format!(
            "A₁ must be bounded below by μ₀ > 0, min is {mu0}"
        )));
    }
    if a2.bounds().0 < 0.0 {
        return Err(invalid("A₂ must be nonnegative"));
    }
    Ok(CoefficientModel {
        kind: CoefficientKind::Power { a1, a2, gamma },
        mu0,
        gamma,
        even: true,
    })
}

/// `A ≡ c`.
pub fn constant_coefficient(c: f64) -> Result<CoefficientModel> {
    power_coefficient(c, 0.0, 2.0)
}

impl CoefficientModel {
    /// Closure-backed coefficient; `mu0` and `even` are declared, then sampled by the checker.
    pub fn custom(value: ScalarFn, derivative: ScalarFn, mu0: f64, even: bool) -> Self {
        CoefficientModel {
            kind: CoefficientKind::Custom { value, derivative },
            mu0,
            gamma: 0.0,
            even,
        }
    }

    #[inline]
    pub fn evaluate(&self, site: &Site, u: f64) -> f64 {
        match &self.kind {
            CoefficientKind::Power { a1, a2, gamma } => {
                a1.value(site) + a2.value(site) * apow(u, *gamma)
            }
            CoefficientKind::Custom { value, .. } => value(site, u),
        }
    }

    #[inline]
    pub fn derivative(&self, site: &Site, u: f64) -> f64 {
        match &self.kind {
            CoefficientKind::Power { a2, gamma, .. } => {
                gamma * a2.value(site) * spow(u, gamma - 1.0)
            }
            CoefficientKind::Custom { derivative, .. } => derivative(site, u),
        }
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Growth exponent seen by the `(h4)` window: zero when `A₂ ≡ 0`.
    pub fn effective_gamma(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Power { a2, gamma, .. } if a2.bounds().1 > 0.0 => *gamma,
            CoefficientKind::Power { .. } => 0.0,
            CoefficientKind::Custom { .. } => self.gamma,
        }
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_power(&self) -> bool {
        matches!(self.kind, CoefficientKind::Power { .. })
    }

    /// `(A₁, A₂)` profiles of a power family.
    pub fn power_profiles(&self) -> Option<(&Profile, &Profile)> {
        match &self.kind {
            CoefficientKind::Power { a1, a2, .. } => Some((a1, a2)),
            CoefficientKind::Custom { .. } => None,
        }
    }

    pub fn family_tag(&self) -> &'static str {
        match self.kind {
            CoefficientKind::Power { .. } => "power",
            CoefficientKind::Custom { .. } => "custom",
        }
    }

    pub fn sample_sites(&self) -> Vec<Site> {
        match &self.kind {
            CoefficientKind::Power { a1, a2, .. } => {
                let mut s = a1.sample_sites();
                if matches!(a2, Profile::Nodal(_)) && !matches!(a1, Profile::Nodal(_)) {
                    s = a2.sample_sites();
                }
                s
            }
            CoefficientKind::Custom { .. } => vec![Site::at([0.0; 2])],
        }
    }
}

/// Parameters of `w₁|u|^{q₁} + c★|u|^{γ₃}|v|^{γ₄} + w₂|v|^{q₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub q1: f64,
    pub q2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub c_star: f64,
    /// Weights on the pure-power terms; the classical family has both equal to one.
    pub w1: f64,
    pub w2: f64,
}

impl PowerParams {
    pub fn new(q1: f64, q2: f64, gamma3: f64, gamma4: f64, c_star: f64) -> Self {
        PowerParams {
            q1,
            q2,
            gamma3,
            gamma4,
            c_star,
            w1: 1.0,
            w2: 1.0,
        }
    }
}

/// Parameters of `|u|^{q₁} + |u|^{γ₃}lg(v²+1) + lg(u²+1)|v|^{γ₄} + |v|^{q₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    pub q1: f64,
    pub q2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
}

#[derive(Clone)]
enum NonlinearityKind {
    Power(PowerParams),
    Log(LogParams),
    Custom { g: PairFn, gu: PairFn, gv: PairFn },
}

/// Growth data attached to a potential: `|G_u| ≤ σ(1+|u|^{q₁−1}+|v|^{s₁})` and symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthData {
    pub q1: f64,
    pub q2: f64,
    pub s1: f64,
    pub s2: f64,
}

/// Potential `G(x,u,v)` with partials and declared structural metadata.
#[derive(Clone)]
pub struct NonlinearityModel {
    kind: NonlinearityKind,
    pub growth: GrowthData,
    pub theta: [f64; 2],
    pub r: f64,
    pub even: bool,
}

impl fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityModel")
            .field("family", &self.family_tag())
            .field("growth", &self.growth)
            .field("theta", &self.theta)
            .field("r", &self.r)
            .finish()
    }
}

fn check_theta_r(theta: [f64; 2], r: f64) -> Result<()> {
    if !(theta[0] > 0.0 && theta[1] > 0.0) {
        return Err(invalid(format!("θ must be positive, got {theta:?}")));
    }
    if !(r >= 1.0) {
        return Err(invalid(format!("R must be at least 1, got {r}")));
    }
    Ok(())
}

/// The power family with coupling `c★|u|^{γ₃}|v|^{γ₄}`.
pub fn power_nonlinearity(p: PowerParams, theta: [f64; 2], r: f64) -> Result<NonlinearityModel> {
    if !(p.q1 > 1.0 && p.q2 > 1.0 && p.gamma3 > 1.0 && p.gamma4 > 1.0) {
        return Err(invalid(format!(
            "(ex13) requires q₁, q₂, γ₃, γ₄ > 1, got {}, {}, {}, {}",
            p.q1, p.q2, p.gamma3, p.gamma4
        )));
    }
    if !(p.gamma3 < p.q1 && p.gamma4 < p.q2) {
        return Err(invalid(format!(
            "(ex17) requires γ₃ < q₁ and γ₄ < q₂, got γ₃ = {}, q₁ = {}, γ₄ = {}, q₂ = {}",
            p.gamma3, p.q1, p.gamma4, p.q2
        )));
    }
    if !(p.w1 >= 0.0 && p.w2 >= 0.0) {
        return Err(invalid("power weights must be nonnegative"));
    }
    check_theta_r(theta, r)?;
    // Without coupling there is no cross growth to account for.
    let (s1, s2) = if p.c_star == 0.0 {
        (0.0, 0.0)
    } else {
        (
            p.gamma4 * (p.q1 - 1.0) / (p.q1 - p.gamma3),
            p.gamma3 * (p.q2 - 1.0) / (p.q2 - p.gamma4),
        )
    };
    let growth = GrowthData {
        q1: p.q1,
        q2: p.q2,
        s1,
        s2,
    };
    Ok(NonlinearityModel {
        kind: NonlinearityKind::Power(p),
        growth,
        theta,
        r,
        even: true,
    })
}

/// The logarithmic coupling family.
pub fn log_nonlinearity(p: LogParams, theta: [f64; 2], r: f64) -> Result<NonlinearityModel> {
    if !(p.q1 > 1.0 && p.q2 > 1.0 && p.gamma3 > 1.0 && p.gamma4 > 1.0) {
        return Err(invalid(format!(
            "(ex26) requires q₁, q₂, γ₃, γ₄ > 1, got {}, {}, {}, {}",
            p.q1, p.q2, p.gamma3, p.gamma4
        )));
    }
    if !(p.gamma3 < p.q1 && p.gamma4 < p.q2) {
        return Err(invalid(format!(
            "(ex27) requires γ₃ < q₁ and γ₄ < q₂, got γ₃ = {}, q₁ = {}, γ₄ = {}, q₂ = {}",
            p.gamma3, p.q1, p.gamma4, p.q2
        )));
    }
    check_theta_r(theta, r)?;
    Ok(NonlinearityModel {
        kind: NonlinearityKind::Log(p),
        growth: GrowthData {
            q1: p.q1,
            q2: p.q2,
            s1: p.gamma4,
            s2: p.gamma3,
        },
        theta,
        r,
        even: true,
    })
}

impl NonlinearityModel {
    /// Closure-backed potential with declared metadata.
    pub fn custom(
        g: PairFn,
        gu: PairFn,
        gv: PairFn,
        growth: GrowthData,
        theta: [f64; 2],
        r: f64,
        even: bool,
    ) -> Self {
        NonlinearityModel {
            kind: NonlinearityKind::Custom { g, gu, gv },
            growth,
            theta,
            r,
            even,
        }
    }

    /// `G ≡ 0`.
    pub fn zero() -> Self {
        let z: PairFn = Arc::new(|_, _, _| 0.0);
        NonlinearityModel::custom(
            z.clone(),
            z.clone(),
            z,
            GrowthData {
                q1: 1.0,
                q2: 1.0,
                s1: 0.0,
                s2: 0.0,
            },
            [0.25, 0.25],
            1.0,
            true,
        )
    }

    pub fn family_tag(&self) -> &'static str {
        match self.kind {
            NonlinearityKind::Power(_) => "power",
            NonlinearityKind::Log(_) => "log",
            NonlinearityKind::Custom { .. } => "custom",
        }
    }

    pub fn power_params(&self) -> Option<&PowerParams> {
        match &self.kind {
            NonlinearityKind::Power(p) => Some(p),
            _ => None,
        }
    }

    pub fn log_params(&self) -> Option<&LogParams> {
        match &self.kind {
            NonlinearityKind::Log(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    #[inline]
    pub fn g(&self, site: &Site, u: f64, v: f64) -> f64 {
        self.eval(site, u, v).0
    }

    #[inline]
    pub fn gu(&self, site: &Site, u: f64, v: f64) -> f64 {
        self.eval(site, u, v).1
    }

    #[inline]
    pub fn gv(&self, site: &Site, u: f64, v: f64) -> f64 {
        self.eval(site, u, v).2
    }

    /// `(G, G_u, G_v)` at one point.
    #[inline]
    pub fn eval(&self, site: &Site, u: f64, v: f64) -> (f64, f64, f64) {
        match &self.kind {
            NonlinearityKind::Power(p) => {
                let (au3, av4) = (apow(u, p.gamma3), apow(v, p.gamma4));
                let g = p.w1 * apow(u, p.q1) + p.c_star * au3 * av4 + p.w2 * apow(v, p.q2);
                let gu = p.w1 * p.q1 * spow(u, p.q1 - 1.0)
                    + p.gamma3 * p.c_star * spow(u, p.gamma3 - 1.0) * av4;
                let gv = p.gamma4 * p.c_star * au3 * spow(v, p.gamma4 - 1.0)
                    + p.w2 * p.q2 * spow(v, p.q2 - 1.0);
                (g, gu, gv)
            }
            NonlinearityKind::Log(p) => {
                let (lu, lv) = ((u * u).ln_1p(), (v * v).ln_1p());
                let (au3, av4) = (apow(u, p.gamma3), apow(v, p.gamma4));
                let g = apow(u, p.q1) + au3 * lv + lu * av4 + apow(v, p.q2);
                let gu = p.q1 * spow(u, p.q1 - 1.0)
                    + p.gamma3 * spow(u, p.gamma3 - 1.0) * lv
                    + 2.0 * u / (u * u + 1.0) * av4;
                let gv = au3 * 2.0 * v / (v * v + 1.0)
                    + p.gamma4 * lu * spow(v, p.gamma4 - 1.0)
                    + p.q2 * spow(v, p.q2 - 1.0);
                (g, gu, gv)
            }
            NonlinearityKind::Custom { g, gu, gv } => {
                (g(site, u, v), gu(site, u, v), gv(site, u, v))
            }
        }
    }
}

/// `|t|^a` with `0^a = 0` for `a > 0`.
#[inline]
pub fn apow(t: f64, a: f64) -> f64 {
    if t == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        t.abs().powf(a)
    }
}

/// `sign(t)|t|^a`, i.e. `|t|^{a−1}t`.
#[inline]
pub fn spow(t: f64, a: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Site {
        Site::at([0.3, 0.0])
    }

    #[test]
    fn power_coefficient_examples() {
        let s = origin();
        let a = power_coefficient(1.0, 0.0, 2.0).unwrap();
        assert_eq!(a.evaluate(&s, 5.0), 1.0);
        assert_eq!(a.derivative(&s, 5.0), 0.0);
        let a = power_coefficient(1.0, 1.0, 2.0).unwrap();
        assert!((a.evaluate(&s, 3.0) - 10.0).abs() < 1e-12);
        assert!((a.derivative(&s, 3.0) - 6.0).abs() < 1e-12);
        let a = power_coefficient(2.0, 1.0, 1.5).unwrap();
        assert!((a.evaluate(&s, -4.0) - 10.0).abs() < 1e-12);
        assert!((a.derivative(&s, -4.0) + 3.0).abs() < 1e-12);
        assert!(power_coefficient(1.0, 1.0, 1.0).is_err());
        assert!(power_coefficient(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn power_nonlinearity_examples() {
        let s = origin();
        let g =
            power_nonlinearity(PowerParams::new(4.0, 4.0, 2.0, 2.0, 1.0), [0.25; 2], 1.0).unwrap();
        assert_eq!(g.eval(&s, 0.0, 0.0), (0.0, 0.0, 0.0));
        let (v, gu, gv) = g.eval(&s, 1.0, 1.0);
        assert!((v - 3.0).abs() < 1e-12 && (gu - 6.0).abs() < 1e-12 && (gv - 6.0).abs() < 1e-12);
        let g =
            power_nonlinearity(PowerParams::new(4.0, 4.0, 2.0, 2.1, 1.0), [0.25; 2], 1.0).unwrap();
        assert!((g.growth.s1 - 3.15).abs() < 1e-12);
    }

    #[test]
    fn power_nonlinearity_rejects_violations() {
        let e = power_nonlinearity(PowerParams::new(4.0, 4.0, 1.0, 2.0, 1.0), [0.25; 2], 1.0)
            .unwrap_err()
            .to_string();
        assert!(e.contains("ex13"), "{e}");
        let e = power_nonlinearity(PowerParams::new(4.0, 4.0, 4.5, 2.0, 1.0), [0.25; 2], 1.0)
            .unwrap_err()
            .to_string();
        assert!(e.contains("ex17"), "{e}");
    }

    #[test]
    fn log_nonlinearity_examples() {
        let s = origin();
        let p = LogParams {
            q1: 4.0,
            q2: 4.0,
            gamma3: 2.0,
            gamma4: 2.0,
        };
        let g = log_nonlinearity(p, [0.25; 2], 1.0).unwrap();
        assert_eq!(g.eval(&s, 0.0, 0.0), (0.0, 0.0, 0.0));
        let (v, gu, gv) = g.eval(&s, 1.0, 0.0);
        assert!((v - 1.0).abs() < 1e-12 && (gu - 4.0).abs() < 1e-12 && gv.abs() < 1e-12);
        let gu = g.gu(&s, 1.0, 1.0);
        assert!((gu - (5.0 + 2.0 * 2f64.ln())).abs() < 1e-12);
        assert_eq!((g.growth.s1, g.growth.s2), (2.0, 2.0));
    }

    #[test]
    fn nodal_profile_interpolates() {
        let m = crate::mesh::build_interval_mesh(2, 1.0).unwrap();
        let p = Profile::nodal(&m, &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(p.bounds(), (1.0, 3.0));
        let s = Site::on_mesh(&m, 1, [0.5, 0.5, 0.0]);
        assert!((p.value(&s) - 2.5).abs() < 1e-15);
        let a = power_coefficient(p, 0.0, 2.0).unwrap();
        assert_eq!(a.mu0(), 1.0);
    }
}
