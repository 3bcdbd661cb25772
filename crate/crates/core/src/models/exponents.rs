use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Sobolev conjugate exponent, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conjugate {
    Finite(f64),
    Infinite,
}

impl Conjugate {
    pub fn is_finite(&self) -> bool {
        matches!(self, Conjugate::Finite(_))
    }

    /// `1/p*`, zero in the infinite case.
    pub fn recip(&self) -> f64 {
        match self {
            Conjugate::Finite(v) => 1.0 / v,
            Conjugate::Infinite => 0.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Conjugate::Finite(v) => *v,
            Conjugate::Infinite => f64::INFINITY,
        }
    }

    pub fn exceeds(&self, x: f64) -> bool {
        match self {
            Conjugate::Finite(v) => x < *v,
            Conjugate::Infinite => x.is_finite(),
        }
    }
}

impl Serialize for Conjugate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Conjugate::Finite(v) => s.serialize_f64(*v),
            Conjugate::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Conjugate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Conjugate::Finite(v)),
            Raw::Text(t) if t == "inf" => Ok(Conjugate::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// `Np/(N−p)` for `p < N`, infinite otherwise.
pub fn sobolev_conjugate(p: f64, n: usize) -> Conjugate {
    let nf = n as f64;
    if p < nf {
        Conjugate::Finite(nf * p / (nf - p))
    } else {
        Conjugate::Infinite
    }
}

/// Exponent bookkeeping for the subcritical growth windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthExponents {
    pub p1: f64,
    pub p2: f64,
    pub n: usize,
    pub p1_star: Conjugate,
    pub p2_star: Conjugate,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    pub s6: f64,
    pub qbar1: f64,
    pub qbar2: f64,
}

/// Right side of the coupled window `s < (p/N)(1 − 1/p*)p_other*`.
pub(crate) fn coupled_bound(p: f64, n: usize, p_star: Conjugate, other_star: Conjugate) -> f64 {
    let c = p / n as f64 * (1.0 - p_star.recip());
    match other_star {
        Conjugate::Finite(o) => c * o,
        Conjugate::Infinite => f64::INFINITY,
    }
}

/// Splits `|u||v|^s` into `|u|^a + |v|^b` with `b = s·a/(a−1)`.
///
/// With a finite conjugate the split exponent is the midpoint of the
/// admissible interval; otherwise any `a > 1` works and `a = 1 + s` is used.
fn split(p: f64, n: usize, s: f64, p_star: Conjugate, other_star: Conjugate) -> (f64, f64) {
    let a = match p_star {
        Conjugate::Finite(ps) => {
            let lo = match other_star {
                Conjugate::Finite(o) => p * o / (p * o - n as f64 * s),
                Conjugate::Infinite => 1.0,
            };
            0.5 * (lo + ps)
        }
        Conjugate::Infinite => {
            if s > 0.0 {
                1.0 + s
            } else {
                2.0
            }
        }
    };
    let b = if s == 0.0 { 0.0 } else { s * a / (a - 1.0) };
    (a, b)
}

pub fn derive_exponents(
    p1: f64,
    p2: f64,
    n: usize,
    q1: f64,
    q2: f64,
    s1: f64,
    s2: f64,
) -> Result<GrowthExponents> {
    if !(p1 > 1.0 && p2 > 1.0) || n == 0 {
        return Err(invalid(format!(
            "need p₁, p₂ > 1 and N ≥ 1, got {p1}, {p2}, {n}"
        )));
    }
    if !(s1 >= 0.0 && s2 >= 0.0) {
        return Err(invalid("s₁, s₂ must be nonnegative"));
    }
    let (p1s, p2s) = (sobolev_conjugate(p1, n), sobolev_conjugate(p2, n));
    for (i, q, ps) in [(1, q1, p1s), (2, q2, p2s)] {
        if !(q >= 1.0 && ps.exceeds(q)) {
            return Err(Error::WindowEmpty {
                condition: "crit_exp".into(),
                detail: format!("q{i} = {q} must satisfy 1 ≤ q{i} < p{i}* = {}", ps.as_f64()),
            });
        }
    }
    for (i, s, p, ps, os) in [(1, s1, p1, p1s, p2s), (2, s2, p2, p2s, p1s)] {
        let bound = coupled_bound(p, n, ps, os);
        if !(s < bound) {
            return Err(Error::WindowEmpty {
                condition: "crit_expi".into(),
                detail: format!("s{i} = {s} must be < {bound}"),
            });
        }
    }
    let (s3, s4) = split(p1, n, s1, p1s, p2s);
    let (s5, s6) = split(p2, n, s2, p2s, p1s);
    Ok(GrowthExponents {
        p1,
        p2,
        n,
        p1_star: p1s,
        p2_star: p2s,
        s1,
        s2,
        s3,
        s4,
        s5,
        s6,
        qbar1: q1.max(s3).max(s6),
        qbar2: q2.max(s4).max(s5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(sobolev_conjugate(2.0, 3), Conjugate::Finite(6.0));
        assert_eq!(sobolev_conjugate(2.0, 2), Conjugate::Infinite);
        assert_eq!(sobolev_conjugate(1.5, 2), Conjugate::Finite(6.0));
    }

    #[test]
    fn split_midpoint() {
        let g = derive_exponents(2.0, 2.0, 3, 4.0, 4.0, 1.0, 1.0).unwrap();
        assert!((g.s3 - 11.0 / 3.0).abs() < 1e-14);
        assert!((g.s4 - 11.0 / 8.0).abs() < 1e-14);
        assert_eq!(g.qbar1, 4.0);
    }

    #[test]
    fn zero_coupling_growth() {
        let g = derive_exponents(2.0, 2.0, 3, 4.0, 4.0, 0.0, 0.0).unwrap();
        assert_eq!(g.s4, 0.0);
        assert!(g.s3 > 1.0 && g.s3 < 6.0);
    }

    #[test]
    fn coupled_window_violation() {
        match derive_exponents(2.0, 2.0, 3, 4.0, 4.0, 4.0, 1.0) {
            Err(Error::WindowEmpty { condition, .. }) => assert_eq!(condition, "crit_expi"),
            other => panic!("{other:?}"),
        }
        match derive_exponents(2.0, 2.0, 3, 6.0, 4.0, 1.0, 1.0) {
            Err(Error::WindowEmpty { condition, .. }) => assert_eq!(condition, "crit_exp"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cor1_set_qbar() {
        let s1 = 2.1 * 3.0 / 2.0;
        let s2 = 2.0 * 3.0 / 1.9;
        let g = derive_exponents(2.0, 2.0, 3, 4.0, 4.0, s1, s2).unwrap();
        assert!(g.qbar1 > 4.0 && g.qbar1 < 6.0);
        assert!(g.qbar2 > 4.0 && g.qbar2 < 6.0);
    }

    #[test]
    fn conjugate_json() {
        let s = serde_json::to_string(&[Conjugate::Finite(6.0), Conjugate::Infinite]).unwrap();
        assert_eq!(s, "[6.0,\"inf\"]");
        let back: Vec<Conjugate> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Conjugate::Finite(6.0), Conjugate::Infinite]);
    }
}
