//! The energy `J`, its differential, the discrete dual norm, the CPS
//! quantity and the truncation maps.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Riesz;
use crate::mesh::{grad_on, neumaier_sum, norm_linf, norm_w, Field, Mesh};
use crate::models::{Model, Site};

/// Element count above which assembly fans out over threads.
const PAR_THRESHOLD: usize = 4096;

/// A pair `(u, v)` of Dirichlet fields with their exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub p1: f64,
    pub p2: f64,
}

impl State {
    pub fn new(u: Field, v: Field, p1: f64, p2: f64) -> Self {
        State { u, v, p1, p2 }
    }

    pub fn zeros(mesh: &Mesh, p1: f64, p2: f64) -> Self {
        State::new(
            Field::zeros(mesh.n_nodes()),
            Field::zeros(mesh.n_nodes()),
            p1,
            p2,
        )
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        mesh.check_field(&self.u)?;
        mesh.check_field(&self.v)?;
        if !(self.u.is_dirichlet(mesh) && self.v.is_dirichlet(mesh)) {
            return Err(invalid("state is not zero on the boundary"));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> State {
        State::new(self.u.scaled(c), self.v.scaled(c), self.p1, self.p2)
    }

    pub fn neg(&self) -> State {
        self.scaled(-1.0)
    }

    /// `self + c·dir`.
    pub fn axpy(&self, c: f64, dir: &State) -> State {
        State::new(
            self.u.axpy(c, &dir.u),
            self.v.axpy(c, &dir.v),
            self.p1,
            self.p2,
        )
    }

    /// `(‖u‖_{W₁}, ‖v‖_{W₂})`.
    pub fn norms_w(&self, mesh: &Mesh) -> (f64, f64) {
        (
            norm_w(mesh, &self.u, self.p1).unwrap_or(f64::NAN),
            norm_w(mesh, &self.v, self.p2).unwrap_or(f64::NAN),
        )
    }

    /// `‖(u,v)‖_W = ‖u‖_{W₁} + ‖v‖_{W₂}`.
    pub fn norm_w(&self, mesh: &Mesh) -> f64 {
        let (a, b) = self.norms_w(mesh);
        a + b
    }

    /// `‖(u,v)‖_X = ‖(u,v)‖_W + |u|_∞ + |v|_∞`.
    pub fn norm_x(&self, mesh: &Mesh) -> f64 {
        self.norm_w(mesh) + norm_linf(&self.u) + norm_linf(&self.v)
    }

    /// `‖u−u'‖_{W₁} + ‖v−v'‖_{W₂}`.
    pub fn distance_w(&self, other: &State, mesh: &Mesh) -> f64 {
        self.axpy(-1.0, other).norm_w(mesh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub term_a: f64,
    pub term_b: f64,
    pub term_g: f64,
    pub total: f64,
}

/// Nodal representation of `dJ(u,v)`: values of the pairing with each hat function.
#[derive(Debug, Clone, PartialEq)]
pub struct Cotangent {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl Cotangent {
    pub fn zeros(n: usize) -> Self {
        Cotangent {
            du: vec![0.0; n],
            dv: vec![0.0; n],
        }
    }

    /// `dJ[(w, z)]`.
    pub fn pair(&self, w: &[f64], z: &[f64]) -> f64 {
        neumaier_sum(
            self.du
                .iter()
                .zip(w)
                .map(|(a, b)| a * b)
                .chain(self.dv.iter().zip(z).map(|(a, b)| a * b)),
        )
    }
}

/// Dual norm of a cotangent with its per-component parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualNorm {
    pub total: f64,
    pub part_u: f64,
    pub part_v: f64,
}

/// Evaluation context: a mesh, a model, cached quadrature sites and the Riesz map.
pub struct Functional<'a> {
    pub mesh: &'a Mesh,
    pub model: &'a Model,
    riesz: Riesz,
    centers: Vec<Site>,
    quad_sites: Vec<Site>,
    center_weight: f64,
}

#[derive(Default, Clone, Copy)]
struct LocalTerms {
    a: f64,
    b: f64,
    g: f64,
}

impl<'a> Functional<'a> {
    pub fn new(mesh: &'a Mesh, model: &'a Model) -> Result<Self> {
        let riesz = Riesz::new(mesh)?;
        let d1 = mesh.stride() as f64;
        let cb = if mesh.stride() == 2 {
            [0.5, 0.5, 0.0]
        } else {
            [1.0 / 3.0; 3]
        };
        let centers = (0..mesh.n_elements())
            .map(|e| Site::on_mesh(mesh, e, cb))
            .collect();
        let quad_sites = (0..mesh.n_elements())
            .flat_map(|e| {
                mesh.quadrature()
                    .bary
                    .iter()
                    .map(move |b| Site::on_mesh(mesh, e, *b))
            })
            .collect();
        Ok(Functional {
            mesh,
            model,
            riesz,
            centers,
            quad_sites,
            center_weight: 1.0 / d1,
        })
    }

    pub fn riesz(&self) -> &Riesz {
        &self.riesz
    }

    fn check(&self, s: &State) -> Result<()> {
        self.mesh.check_field(&s.u)?;
        self.mesh.check_field(&s.v)?;
        if s.p1 != self.model.p1 || s.p2 != self.model.p2 {
            return Err(invalid(format!(
                "state exponents ({}, {}) differ from the model's ({}, {})",
                s.p1, s.p2, self.model.p1, self.model.p2
            )));
        }
        Ok(())
    }

    fn local_energy(&self, e: usize, u: &[f64], v: &[f64]) -> LocalTerms {
        let m = self.mesh;
        let meas = m.element_measures()[e];
        let el = m.element(e);
        let (p1, p2) = (self.model.p1, self.model.p2);
        let gu = grad_on(m, e, u);
        let gv = grad_on(m, e, v);
        let uc = el.iter().map(|&n| u[n]).sum::<f64>() * self.center_weight;
        let vc = el.iter().map(|&n| v[n]).sum::<f64>() * self.center_weight;
        let site = &self.centers[e];
        let ta = self.model.a.evaluate(site, uc) * gu[0].hypot(gu[1]).powf(p1) / p1;
        let tb = self.model.b.evaluate(site, vc) * gv[0].hypot(gv[1]).powf(p2) / p2;
        let q = self.mesh.quadrature();
        let base = e * q.len();
        let mut tg = 0.0;
        for (k, (b, w)) in q.bary.iter().zip(&q.weights).enumerate() {
            let (mut uq, mut vq) = (0.0, 0.0);
            for (j, &n) in el.iter().enumerate() {
                uq += b[j] * u[n];
                vq += b[j] * v[n];
            }
            let site = &self.quad_sites[base + k];
            tg += w * (self.model.g.g(site, uq, vq) - self.model.g.g(site, 0.0, 0.0));
        }
        LocalTerms {
            a: meas * ta,
            b: meas * tb,
            g: meas * tg,
        }
    }

    pub fn energy(&self, s: &State) -> Result<EnergyBreakdown> {
        self.check(s)?;
        let n = self.mesh.n_elements();
        let f = |e: usize| self.local_energy(e, &s.u, &s.v);
        let terms: Vec<LocalTerms> = if n >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        };
        for (e, t) in terms.iter().enumerate() {
            if !(t.a.is_finite() && t.b.is_finite() && t.g.is_finite()) {
                return Err(Error::Evaluation {
                    element: e,
                    what: "energy density",
                });
            }
        }
        let term_a = neumaier_sum(terms.iter().map(|t| t.a));
        let term_b = neumaier_sum(terms.iter().map(|t| t.b));
        let term_g = neumaier_sum(terms.iter().map(|t| t.g));
        Ok(EnergyBreakdown {
            term_a,
            term_b,
            term_g,
            total: term_a + term_b - term_g,
        })
    }

    /// Convenience for `energy(s).total`.
    pub fn value(&self, s: &State) -> Result<f64> {
        Ok(self.energy(s)?.total)
    }

    /// Element contributions `[du; 3], [dv; 3]`.
    fn local_differential(&self, e: usize, u: &[f64], v: &[f64]) -> ([f64; 3], [f64; 3]) {
        let m = self.mesh;
        let meas = m.element_measures()[e];
        let el = m.element(e);
        let grads = m.basis_gradients(e);
        let (p1, p2) = (self.model.p1, self.model.p2);
        let site = &self.centers[e];
        let mut du = [0.0; 3];
        let mut dv = [0.0; 3];
        for (field, p, coef, out) in [
            (u, p1, &self.model.a, &mut du),
            (v, p2, &self.model.b, &mut dv),
        ] {
            let g = grad_on(m, e, field);
            let norm = g[0].hypot(g[1]);
            let c = el.iter().map(|&n| field[n]).sum::<f64>() * self.center_weight;
            let (av, ad) = (coef.evaluate(site, c), coef.derivative(site, c));
            let flux = if norm > 0.0 {
                av * norm.powf(p - 2.0)
            } else {
                0.0
            };
            let lower = ad * norm.powf(p) / p * self.center_weight;
            for (k, dg) in grads.iter().enumerate() {
                out[k] += meas * (flux * (g[0] * dg[0] + g[1] * dg[1]) + lower);
            }
        }
        let q = m.quadrature();
        let base = e * q.len();
        for (k, (b, w)) in q.bary.iter().zip(&q.weights).enumerate() {
            let (mut uq, mut vq) = (0.0, 0.0);
            for (j, &n) in el.iter().enumerate() {
                uq += b[j] * u[n];
                vq += b[j] * v[n];
            }
            let (_, gu, gv) = self.model.g.eval(&self.quad_sites[base + k], uq, vq);
            for j in 0..el.len() {
                du[j] -= meas * w * gu * b[j];
                dv[j] -= meas * w * gv * b[j];
            }
        }
        (du, dv)
    }

    /// `dJ(u,v)` against every interior hat function; boundary entries are zero.
    pub fn differential(&self, s: &State) -> Result<Cotangent> {
        self.check(s)?;
        let m = self.mesh;
        let n = m.n_elements();
        let f = |e: usize| self.local_differential(e, &s.u, &s.v);
        let locals: Vec<([f64; 3], [f64; 3])> = if n >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        };
        let mut c = Cotangent::zeros(m.n_nodes());
        for (e, (du, dv)) in locals.iter().enumerate() {
            for (k, &node) in m.element(e).iter().enumerate() {
                if !(du[k].is_finite() && dv[k].is_finite()) {
                    return Err(Error::Evaluation {
                        element: e,
                        what: "differential",
                    });
                }
                if !m.is_boundary(node) {
                    c.du[node] += du[k];
                    c.dv[node] += dv[k];
                }
            }
        }
        Ok(c)
    }

    /// Product-ball dual norm: per-component `H¹₀` duals combined Euclidean-wise.
    pub fn dual_norm(&self, c: &Cotangent) -> DualNorm {
        let (pu, _) = self.riesz.dual_norm(&c.du);
        let (pv, _) = self.riesz.dual_norm(&c.dv);
        DualNorm {
            total: pu.hypot(pv),
            part_u: pu,
            part_v: pv,
        }
    }

    /// Riesz representatives of both components: the steepest-ascent direction.
    pub fn gradient(&self, c: &Cotangent, p1: f64, p2: f64) -> State {
        State::new(
            Field::new(self.riesz.represent(&c.du)),
            Field::new(self.riesz.represent(&c.dv)),
            p1,
            p2,
        )
    }

    /// `‖dJ(s)‖·(1 + ‖u‖_{W₁} + |u|_∞ + ‖v‖_{W₂} + |v|_∞)`.
    pub fn cps_quantity(&self, s: &State) -> Result<f64> {
        let c = self.differential(s)?;
        Ok(self.cps_from(&c, s))
    }

    pub fn cps_from(&self, c: &Cotangent, s: &State) -> f64 {
        self.dual_norm(c).total * (1.0 + s.norm_x(self.mesh))
    }

    /// Per-equation weak residuals, identical to the dual-norm parts of `dJ`.
    pub fn residual_check(&self, s: &State) -> Result<(f64, f64)> {
        let d = self.dual_norm(&self.differential(s)?);
        Ok((d.part_u, d.part_v))
    }

    /// CSV `node,x[,y],u,v,du,dv`.
    pub fn write_csv<W: Write>(&self, s: &State, c: &Cotangent, mut w: W) -> Result<()> {
        let two_d = self.mesh.dim() == 2;
        writeln!(
            w,
            "{}",
            if two_d {
                "node,x,y,u,v,du,dv"
            } else {
                "node,x,u,v,du,dv"
            }
        )?;
        for (i, x) in self.mesh.nodes().iter().enumerate() {
            if two_d {
                write!(w, "{i},{:.16e},{:.16e}", x[0], x[1])?;
            } else {
                write!(w, "{i},{:.16e}", x[0])?;
            }
            writeln!(
                w,
                ",{:.16e},{:.16e},{:.16e},{:.16e}",
                s.u[i], s.v[i], c.du[i], c.dv[i]
            )?;
        }
        Ok(())
    }
}

/// One-shot `J(s)`.
pub fn energy(s: &State, model: &Model, mesh: &Mesh) -> Result<EnergyBreakdown> {
    Functional::new(mesh, model)?.energy(s)
}

/// One-shot `dJ(s)`.
pub fn differential(s: &State, model: &Model, mesh: &Mesh) -> Result<Cotangent> {
    Functional::new(mesh, model)?.differential(s)
}

fn clamp(t: f64, k: f64) -> f64 {
    t.clamp(-k, k)
}

/// Nodal `T_k t = t` if `|t| ≤ k`, `k·t/|t|` otherwise.
pub fn truncate(s: &State, k: f64) -> Result<State> {
    if !(k > 0.0) {
        return Err(invalid(format!(
            "truncation level must be positive, got {k}"
        )));
    }
    let f = |x: &Field| Field::new(x.iter().map(|&t| clamp(t, k)).collect());
    Ok(State::new(f(&s.u), f(&s.v), s.p1, s.p2))
}

/// Nodal `R_k t = t − T_k t`.
pub fn remainder(s: &State, k: f64) -> Result<State> {
    if !(k > 0.0) {
        return Err(invalid(format!(
            "truncation level must be positive, got {k}"
        )));
    }
    let f = |x: &Field| Field::new(x.iter().map(|&t| t - clamp(t, k)).collect());
    Ok(State::new(f(&s.u), f(&s.v), s.p1, s.p2))
}

/// Largest sampled ratio of `||ξ|^{r−2}ξ − |η|^{r−2}η|` to `|ξ−η|(|ξ|+|η|)^{r−2}`
/// (`r ≥ 2`) or `|ξ−η|^{r−1}` (`1 < r < 2`), over pairs in the unit disc.
pub fn vector_difference_bound(r: f64, n_samples: usize, seed: u64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(invalid(format!("exponent must exceed 1, got {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disc = || loop {
        let p = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        if p[0] * p[0] + p[1] * p[1] <= 1.0 {
            return p;
        }
    };
    let map = |x: [f64; 2]| {
        let n = x[0].hypot(x[1]);
        let c = if n > 0.0 { n.powf(r - 2.0) } else { 0.0 };
        [c * x[0], c * x[1]]
    };
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let (a, b) = (disc(), disc());
        worst = worst.max(difference_ratio(r, a, b, map));
    }
    Ok(worst)
}

/// The ratio at one pair; zero when `ξ = η`.
pub fn difference_ratio(
    r: f64,
    a: [f64; 2],
    b: [f64; 2],
    map: impl Fn([f64; 2]) -> [f64; 2],
) -> f64 {
    let (ma, mb) = (map(a), map(b));
    let num = (ma[0] - mb[0]).hypot(ma[1] - mb[1]);
    let d = (a[0] - b[0]).hypot(a[1] - b[1]);
    if d == 0.0 {
        return 0.0;
    }
    let den = if r >= 2.0 {
        d * (a[0].hypot(a[1]) + b[0].hypot(b[1])).powf(r - 2.0)
    } else {
        d.powf(r - 1.0)
    };
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_interval_mesh;
    use crate::models::{constant_coefficient, ModelDecl, NonlinearityModel};
    use std::f64::consts::PI;

    fn laplace_model() -> Model {
        let a = constant_coefficient(1.0).unwrap();
        Model {
            p1: 2.0,
            p2: 2.0,
            n: 1,
            a: a.clone(),
            b: a,
            g: NonlinearityModel::zero(),
            decl: None,
        }
    }

    #[test]
    fn zero_state_has_zero_energy_and_differential() {
        let m = build_interval_mesh(20, 1.0).unwrap();
        let model = ModelDecl::cor1().build().unwrap();
        let f = Functional::new(&m, &model).unwrap();
        let s = State::zeros(&m, 2.0, 2.0);
        assert_eq!(f.energy(&s).unwrap().total, 0.0);
        let c = f.differential(&s).unwrap();
        assert!(c.du.iter().chain(&c.dv).all(|&x| x == 0.0));
        assert_eq!(f.cps_quantity(&s).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_energy_of_sine() {
        let m = build_interval_mesh(200, 1.0).unwrap();
        let model = laplace_model();
        let u = Field::interpolate(&m, |x| (PI * x[0]).sin());
        let s = State::new(u, Field::zeros(m.n_nodes()), 2.0, 2.0);
        let e = energy(&s, &model, &m).unwrap();
        assert!((e.total / (PI * PI / 4.0) - 1.0).abs() < 5e-3);
        assert_eq!(e.total, e.term_a + e.term_b - e.term_g);
    }

    #[test]
    fn linear_case_is_weak_laplacian() {
        let m = build_interval_mesh(10, 1.0).unwrap();
        let model = laplace_model();
        let u = Field::interpolate_dirichlet(&m, |x| x[0] * (1.0 - x[0]) * (3.0 + x[0]));
        let s = State::new(u.clone(), Field::zeros(m.n_nodes()), 2.0, 2.0);
        let c = differential(&s, &model, &m).unwrap();
        let f = Functional::new(&m, &model).unwrap();
        let k = f.riesz().stiffness_matrix().matvec(&f.riesz().gather(&u));
        let ku = f.riesz().scatter(&k);
        for (a, b) in c.du.iter().zip(&ku) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_example() {
        let m = build_interval_mesh(4, 1.0).unwrap();
        let u = Field::new(vec![0.0, 5.0, -1.0, -7.0, 0.0]);
        let s = State::new(u, Field::zeros(m.n_nodes()), 2.0, 2.0);
        let t = truncate(&s, 2.0).unwrap();
        let r = remainder(&s, 2.0).unwrap();
        assert_eq!(t.u.values(), &[0.0, 2.0, -1.0, -2.0, 0.0]);
        assert_eq!(r.u.values(), &[0.0, 3.0, 0.0, -5.0, 0.0]);
        assert!(truncate(&s, 0.0).is_err());
    }

    #[test]
    fn difference_ratio_examples() {
        assert!((vector_difference_bound(2.0, 1000, 1).unwrap() - 1.0).abs() < 1e-12);
        let r3 = vector_difference_bound(3.0, 100_000, 2).unwrap();
        assert!(r3.is_finite() && r3 > 0.0);
        let id = |x: [f64; 2]| x;
        assert_eq!(difference_ratio(3.0, [0.3, 0.1], [0.3, 0.1], id), 0.0);
    }
}
