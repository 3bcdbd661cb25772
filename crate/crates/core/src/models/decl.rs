//! Plain-text model declarations (`key = value` per line).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    log_nonlinearity, power_coefficient, power_nonlinearity, CoefficientModel, LogParams,
    NonlinearityModel, PowerParams,
};
use crate::error::{Error, Result};
use crate::hypotheses::theta_window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Power,
    Log,
}

/// Parsed declaration; optional keys stay `None` until [`ModelDecl::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDecl {
    pub family: Family,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub c_star: Option<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
}

const KEYS: &[&str] = &[
    "family", "p1", "p2", "q1", "q2", "gamma1", "gamma2", "gamma3", "gamma4", "c_star", "theta1",
    "theta2", "R", "N", "a1", "a2", "b1", "b2", "w1", "w2",
];

/// Problem data: exponents, coefficients and potential.
#[derive(Debug, Clone)]
pub struct Model {
    pub p1: f64,
    pub p2: f64,
    /// Dimension used for Sobolev conjugates and the growth windows.
    pub n: usize,
    pub a: CoefficientModel,
    pub b: CoefficientModel,
    pub g: NonlinearityModel,
    pub decl: Option<ModelDecl>,
}

impl Model {
    pub fn is_even(&self) -> bool {
        self.a.is_even() && self.b.is_even() && self.g.is_even()
    }
}

impl ModelDecl {
    /// Coupled power family `|u|⁴ + |u|²|v|^{2.1} + |v|⁴`, `N = 3`, `p = 2`, `γ₁ = γ₂ = 1.5`.
    pub fn cor1() -> Self {
        ModelDecl {
            family: Family::Power,
            p1: 2.0,
            p2: 2.0,
            q1: 4.0,
            q2: 4.0,
            gamma1: 1.5,
            gamma2: 1.5,
            gamma3: 2.0,
            gamma4: 2.1,
            c_star: Some(1.0),
            theta1: None,
            theta2: None,
            r: None,
            n: 3,
            a1: None,
            a2: None,
            b1: None,
            b2: None,
            w1: None,
            w2: None,
        }
    }

    /// `A ≡ B ≡ 1`, `G = u⁴/4`: the scalar problem `−u″ = u³` embedded in the system.
    pub fn cubic1d() -> Self {
        ModelDecl {
            family: Family::Power,
            p1: 2.0,
            p2: 2.0,
            q1: 4.0,
            q2: 4.0,
            gamma1: 2.0,
            gamma2: 2.0,
            gamma3: 2.0,
            gamma4: 2.0,
            c_star: Some(0.0),
            theta1: None,
            theta2: None,
            r: None,
            n: 1,
            a1: None,
            a2: Some(0.0),
            b1: None,
            b2: Some(0.0),
            w1: Some(0.25),
            w2: Some(0.0),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected key = value, got {line:?}"),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!(
                    "unknown key {k:?} at line {}",
                    i + 1
                )));
            }
            if kv.insert(k, (i + 1, v)).is_some() {
                return Err(Error::Config(format!(
                    "duplicate key {k:?} at line {}",
                    i + 1
                )));
            }
        }
        let num = |k: &str| -> Result<Option<f64>> {
            match kv.get(k) {
                None => Ok(None),
                Some(&(line, v)) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("{k}: not a finite number: {v:?}"),
                    }),
            }
        };
        let req = |k: &str| -> Result<f64> {
            num(k)?.ok_or_else(|| Error::Config(format!("missing required key {k:?}")))
        };
        let family = match kv.get("family").map(|x| x.1) {
            Some("power") => Family::Power,
            Some("log") => Family::Log,
            Some(other) => return Err(Error::Config(format!("unknown family {other:?}"))),
            None => return Err(Error::Config("missing required key \"family\"".into())),
        };
        if family == Family::Log {
            for k in ["c_star", "w1", "w2"] {
                if kv.contains_key(k) {
                    return Err(Error::Config(format!(
                        "key {k:?} does not apply to the log family"
                    )));
                }
            }
        }
        let n = req("N")?;
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(Error::Config(format!(
                "N must be a positive integer, got {n}"
            )));
        }
        Ok(ModelDecl {
            family,
            p1: req("p1")?,
            p2: req("p2")?,
            q1: req("q1")?,
            q2: req("q2")?,
            gamma1: req("gamma1")?,
            gamma2: req("gamma2")?,
            gamma3: req("gamma3")?,
            gamma4: req("gamma4")?,
            c_star: num("c_star")?,
            theta1: num("theta1")?,
            theta2: num("theta2")?,
            r: num("R")?,
            n: n as usize,
            a1: num("a1")?,
            a2: num("a2")?,
            b1: num("b1")?,
            b2: num("b2")?,
            w1: num("w1")?,
            w2: num("w2")?,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let fam = match self.family {
            Family::Power => "power",
            Family::Log => "log",
        };
        let _ = writeln!(s, "family = {fam}");
        let req = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("q1", self.q1),
            ("q2", self.q2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
        ];
        for (k, v) in req {
            let _ = writeln!(s, "{k} = {v}");
        }
        let opt = [
            ("c_star", self.c_star),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("R", self.r),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
            ("w1", self.w1),
            ("w2", self.w2),
        ];
        for (k, v) in opt {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        let _ = writeln!(s, "N = {}", self.n);
        s
    }

    /// Lower ends of the `θ` windows: `1/q_i` (power) or `1/γ₃`, `1/γ₄` (log).
    pub fn theta_lower(&self) -> [f64; 2] {
        match self.family {
            Family::Power => [1.0 / self.q1, 1.0 / self.q2],
            Family::Log => [1.0 / self.gamma3, 1.0 / self.gamma4],
        }
    }

    fn effective_gammas(&self) -> [f64; 2] {
        let g1 = if self.a2.unwrap_or(1.0) > 0.0 {
            self.gamma1
        } else {
            0.0
        };
        let g2 = if self.b2.unwrap_or(1.0) > 0.0 {
            self.gamma2
        } else {
            0.0
        };
        [g1, g2]
    }

    /// `θ` actually used: declared, else the midpoint of the admissible window,
    /// else its lower end when the window is empty.
    pub fn resolved_theta(&self) -> [f64; 2] {
        let lower = self.theta_lower();
        let gam = self.effective_gammas();
        let mut out = [0.0; 2];
        for i in 0..2 {
            let declared = if i == 0 { self.theta1 } else { self.theta2 };
            let p = if i == 0 { self.p1 } else { self.p2 };
            out[i] = declared.unwrap_or_else(|| {
                let w = theta_window(p, gam[i], 1.0 / lower[i]);
                w.midpoint().unwrap_or(w.lo)
            });
        }
        out
    }

    pub fn build(&self) -> Result<Model> {
        if !(self.p1 > 1.0 && self.p2 > 1.0) {
            return Err(Error::Config(format!(
                "need p1, p2 > 1, got {}, {}",
                self.p1, self.p2
            )));
        }
        let cfg = |e: Error| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        };
        let a = power_coefficient(self.a1.unwrap_or(1.0), self.a2.unwrap_or(1.0), self.gamma1)
            .map_err(cfg)?;
        let b = power_coefficient(self.b1.unwrap_or(1.0), self.b2.unwrap_or(1.0), self.gamma2)
            .map_err(cfg)?;
        let theta = self.resolved_theta();
        let r = self.r.unwrap_or(1.0);
        let g = match self.family {
            Family::Power => {
                let mut p = PowerParams::new(
                    self.q1,
                    self.q2,
                    self.gamma3,
                    self.gamma4,
                    self.c_star.unwrap_or(0.0),
                );
                p.w1 = self.w1.unwrap_or(1.0);
                p.w2 = self.w2.unwrap_or(1.0);
                power_nonlinearity(p, theta, r)
            }
            Family::Log => log_nonlinearity(
                LogParams {
                    q1: self.q1,
                    q2: self.q2,
                    gamma3: self.gamma3,
                    gamma4: self.gamma4,
                },
                theta,
                r,
            ),
        }
        .map_err(cfg)?;
        Ok(Model {
            p1: self.p1,
            p2: self.p2,
            n: self.n,
            a,
            b,
            g,
            decl: Some(self.clone()),
        })
    }
}
