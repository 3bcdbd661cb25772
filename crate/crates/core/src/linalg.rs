//! Banded matrices, LU with partial pivoting, and the discrete `H¹₀` Riesz map.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Rows keep `kl` extra super-diagonals so the LU factors fit in place.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Factorizes in place.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::Singular {
                    row: k,
                    pivot: best,
                });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / d;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// LU factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let n = m.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + m.kl).min(n - 1) {
                x[i] -= m.data[m.idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + m.ku + m.kl).min(n - 1) {
                s -= m.data[m.idx(i, j)] * x[j];
            }
            x[i] = s / m.data[m.idx(i, i)];
        }
        x
    }
}

/// Assembles `Σ_e local(e)[a][b]` over interior degrees of freedom.
fn assemble_interior(mesh: &Mesh, local: impl Fn(usize, usize, usize) -> f64) -> BandMatrix {
    let n = mesh.interior_nodes().len();
    let bw = mesh.node_bandwidth();
    let mut k = BandMatrix::zeros(n, bw, bw);
    for e in 0..mesh.n_elements() {
        let el = mesh.element(e);
        for (a, &na) in el.iter().enumerate() {
            let Some(ia) = mesh.dof_of_node(na) else {
                continue;
            };
            for (b, &nb) in el.iter().enumerate() {
                let Some(ib) = mesh.dof_of_node(nb) else {
                    continue;
                };
                k.add(ia, ib, local(e, a, b));
            }
        }
    }
    k
}

/// `∫∇φ_a·∇φ_b` on interior nodes.
pub fn stiffness(mesh: &Mesh) -> BandMatrix {
    assemble_interior(mesh, |e, a, b| {
        let g = mesh.basis_gradients(e);
        mesh.element_measures()[e] * (g[a][0] * g[b][0] + g[a][1] * g[b][1])
    })
}

/// `∫φ_a φ_b` on interior nodes with the mesh quadrature rule.
pub fn mass(mesh: &Mesh) -> BandMatrix {
    let q = mesh.quadrature();
    assemble_interior(mesh, |e, a, b| {
        let s: f64 = q
            .bary
            .iter()
            .zip(&q.weights)
            .map(|(l, w)| w * l[a] * l[b])
            .sum();
        mesh.element_measures()[e] * s
    })
}

/// Discrete `H¹₀` inner product `∫∇w·∇z` and its inverse on nodal duals.
#[derive(Debug, Clone)]
pub struct Riesz {
    stiffness: BandMatrix,
    lu: BandLu,
    interior: Vec<usize>,
    n_nodes: usize,
}

impl Riesz {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let k = stiffness(mesh);
        if k.n() == 0 {
            return Err(Error::InvalidArgument("mesh has no interior nodes".into()));
        }
        let lu = k.clone().factor()?;
        Ok(Riesz {
            stiffness: k,
            lu,
            interior: mesh.interior_nodes().to_vec(),
            n_nodes: mesh.n_nodes(),
        })
    }

    pub fn gather(&self, nodal: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&n| nodal[n]).collect()
    }

    pub fn scatter(&self, dofs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes];
        for (&n, &v) in self.interior.iter().zip(dofs) {
            out[n] = v;
        }
        out
    }

    /// Nodal field `r` with `∫∇r·∇w = dual[w]` for all admissible `w`.
    pub fn represent(&self, dual: &[f64]) -> Vec<f64> {
        self.scatter(&self.lu.solve(&self.gather(dual)))
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let ka = self.stiffness.matvec(&self.gather(a));
        ka.iter().zip(self.gather(b)).map(|(x, y)| x * y).sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `sup{dual[w] : ‖w‖_{H¹₀} ≤ 1}` and the maximizing Riesz field.
    pub fn dual_norm(&self, dual: &[f64]) -> (f64, Vec<f64>) {
        let r = self.represent(dual);
        let s: f64 = self.interior.iter().map(|&n| dual[n] * r[n]).sum();
        (s.max(0.0).sqrt(), r)
    }

    pub fn stiffness_matrix(&self) -> &BandMatrix {
        &self.stiffness
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
