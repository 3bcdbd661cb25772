//! Piecewise-linear meshes on intervals and polygons, nodal fields, and the
//! discrete norms `‖·‖_W`, `|·|_r` and `|·|_∞`.
//!
//! Gradients are constant per element. Integrals of point-dependent
//! integrands use a fixed per-element rule (three Gauss points on segments,
//! the six-point degree-four rule on triangles), so `|f|^r` is integrated
//! exactly for integer `r ≤ 5` on sign-definite elements.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::ops::{Deref, DerefMut};

use crate::error::{invalid, Error, Result};

/// Per-element quadrature rule in barycentric coordinates, weights summing to one.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    fn gauss3_segment() -> Self {
        let a = 0.5 * (1.0 - (0.6f64).sqrt());
        let b = 0.5 * (1.0 + (0.6f64).sqrt());
        QuadRule {
            bary: vec![[1.0 - a, a, 0.0], [0.5, 0.5, 0.0], [1.0 - b, b, 0.0]],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
        }
    }

    fn six_point_triangle() -> Self {
        let (a, wa) = (0.445_948_490_915_965, 0.223_381_589_678_011);
        let (b, wb) = (0.091_576_213_509_771, 0.109_951_743_655_322);
        let mut bary = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (s, w) in [(a, wa), (b, wb)] {
            let t = 1.0 - 2.0 * s;
            bary.extend([[s, s, t], [s, t, s], [t, s, s]]);
            weights.extend([w; 3]);
        }
        QuadRule { bary, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Conforming simplicial mesh of a domain in one or two dimensions.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    conn: Vec<usize>,
    boundary: Vec<bool>,
    measures: Vec<f64>,
    basis_grads: Vec<[f64; 2]>,
    dof_of_node: Vec<Option<usize>>,
    interior: Vec<usize>,
    quad: QuadRule,
}

impl Mesh {
    /// Assembles a mesh from raw data, validating element measures.
    pub fn new(
        dim: usize,
        nodes: Vec<[f64; 2]>,
        elements: Vec<Vec<usize>>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if boundary.len() != nodes.len() {
            return Err(Error::ShapeMismatch {
                expected: nodes.len(),
                got: boundary.len(),
            });
        }
        let stride = dim + 1;
        let mut conn = Vec::with_capacity(elements.len() * stride);
        let mut measures = Vec::with_capacity(elements.len());
        let mut basis_grads = Vec::with_capacity(elements.len() * stride);
        for (e, el) in elements.iter().enumerate() {
            if el.len() != stride {
                return Err(invalid(format!(
                    "element {e} has {} vertices, expected {stride}",
                    el.len()
                )));
            }
            if let Some(&bad) = el.iter().find(|&&i| i >= nodes.len()) {
                return Err(invalid(format!(
                    "element {e} references missing node {bad}"
                )));
            }
            let (m, g) = simplex_geometry(dim, &nodes, el);
            if !(m > 0.0) {
                return Err(invalid(format!("element {e} has non-positive measure {m}")));
            }
            conn.extend_from_slice(el);
            measures.push(m);
            basis_grads.extend_from_slice(&g[..stride]);
        }
        let mut dof_of_node = vec![None; nodes.len()];
        let mut interior = Vec::new();
        for (i, &b) in boundary.iter().enumerate() {
            if !b {
                dof_of_node[i] = Some(interior.len());
                interior.push(i);
            }
        }
        let quad = if dim == 1 {
            QuadRule::gauss3_segment()
        } else {
            QuadRule::six_point_triangle()
        };
        Ok(Mesh {
            dim,
            nodes,
            conn,
            boundary,
            measures,
            basis_grads,
            dof_of_node,
            interior,
            quad,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.measures.len()
    }

    /// Vertices per element.
    pub fn stride(&self) -> usize {
        self.dim + 1
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let s = self.stride();
        &self.conn[e * s..(e + 1) * s]
    }

    /// Gradients of the element's hat functions, aligned with [`Mesh::element`].
    pub fn basis_gradients(&self, e: usize) -> &[[f64; 2]] {
        let s = self.stride();
        &self.basis_grads[e * s..(e + 1) * s]
    }

    pub fn element_measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn measure(&self) -> f64 {
        neumaier_sum(self.measures.iter().copied())
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    /// Interior (free) node indices in increasing order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn quadrature(&self) -> &QuadRule {
        &self.quad
    }

    /// Physical coordinates of a point given in barycentric coordinates of `e`.
    pub fn point(&self, e: usize, bary: &[f64; 3]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (k, &n) in self.element(e).iter().enumerate() {
            x[0] += bary[k] * self.nodes[n][0];
            x[1] += bary[k] * self.nodes[n][1];
        }
        x
    }

    pub fn barycenter(&self, e: usize) -> [f64; 2] {
        let w = 1.0 / self.stride() as f64;
        self.point(e, &[w, w, w])
    }

    /// Largest index distance between two nodes sharing an element.
    pub fn node_bandwidth(&self) -> usize {
        let mut bw = 0;
        for e in 0..self.n_elements() {
            let el = self.element(e);
            for &a in el {
                for &b in el {
                    bw = bw.max(a.abs_diff(b));
                }
            }
        }
        bw
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for n in &self.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(n[d]);
                hi[d] = hi[d].max(n[d]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    pub fn check_field(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: self.n_nodes(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Writes the plain-text mesh format.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim, self.n_nodes(), self.n_elements())?;
        for n in &self.nodes {
            if self.dim == 1 {
                writeln!(w, "{:e}", n[0])?;
            } else {
                writeln!(w, "{:e} {:e}", n[0], n[1])?;
            }
        }
        for e in 0..self.n_elements() {
            let line: Vec<String> = self.element(e).iter().map(|i| i.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        let b: Vec<String> = (0..self.n_nodes())
            .filter(|&i| self.boundary[i])
            .map(|i| i.to_string())
            .collect();
        writeln!(w, "{}", b.join(" "))?;
        Ok(())
    }

    /// Reads the plain-text mesh format written by [`Mesh::write_text`].
    pub fn read_text<R: Read>(r: R) -> Result<Self> {
        let lines: Vec<String> = BufReader::new(r).lines().collect::<std::io::Result<_>>()?;
        let mut it = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = it.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let head = parse_nums::<usize>(header, hl + 1)?;
        if head.len() != 3 {
            return Err(Error::Parse {
                line: hl + 1,
                msg: "header must be `dim n_nodes n_elements`".into(),
            });
        }
        let (dim, nn, ne) = (head[0], head[1], head[2]);
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, l) = it.next().ok_or(Error::Parse {
                line: lines.len(),
                msg: "truncated node block".into(),
            })?;
            let xs = parse_nums::<f64>(l, ln + 1)?;
            if xs.len() != dim {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("expected {dim} coordinates"),
                });
            }
            nodes.push([xs[0], if dim == 2 { xs[1] } else { 0.0 }]);
        }
        let mut elements = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = it.next().ok_or(Error::Parse {
                line: lines.len(),
                msg: "truncated element block".into(),
            })?;
            elements.push(parse_nums::<usize>(l, ln + 1)?);
        }
        let mut boundary = vec![false; nn];
        for (ln, l) in it {
            for b in parse_nums::<usize>(l, ln + 1)? {
                if b >= nn {
                    return Err(Error::Parse {
                        line: ln + 1,
                        msg: format!("boundary index {b} out of range"),
                    });
                }
                boundary[b] = true;
            }
        }
        Mesh::new(dim, nodes, elements, boundary)
    }
}

fn parse_nums<T: std::str::FromStr>(line: &str, ln: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<T>().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("cannot parse `{t}`"),
            })
        })
        .collect()
}

fn simplex_geometry(dim: usize, nodes: &[[f64; 2]], el: &[usize]) -> (f64, [[f64; 2]; 3]) {
    if dim == 1 {
        let h = nodes[el[1]][0] - nodes[el[0]][0];
        (h, [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0; 2]])
    } else {
        let [x0, y0] = nodes[el[0]];
        let [x1, y1] = nodes[el[1]];
        let [x2, y2] = nodes[el[2]];
        let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        (
            0.5 * det,
            [
                [(y1 - y2) / det, (x2 - x1) / det],
                [(y2 - y0) / det, (x0 - x2) / det],
                [(y0 - y1) / det, (x1 - x0) / det],
            ],
        )
    }
}

/// Uniform mesh of `(0, length)` with `n_cells` segments.
pub fn build_interval_mesh(n_cells: usize, length: f64) -> Result<Mesh> {
    if n_cells < 2 {
        return Err(invalid(format!(
            "n_cells must be at least 2, got {n_cells}"
        )));
    }
    if !(length > 0.0) {
        return Err(invalid(format!("length must be positive, got {length}")));
    }
    let h = length / n_cells as f64;
    let nodes: Vec<[f64; 2]> = (0..=n_cells)
        .map(|i| [if i == n_cells { length } else { i as f64 * h }, 0.0])
        .collect();
    let elements = (0..n_cells).map(|i| vec![i, i + 1]).collect();
    let mut boundary = vec![false; n_cells + 1];
    boundary[0] = true;
    boundary[n_cells] = true;
    Mesh::new(1, nodes, elements, boundary)
}

/// Unit square split into `nx × ny` cells, each cut into two right triangles.
pub fn build_rect_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(invalid(format!(
            "nx and ny must be at least 2, got {nx}x{ny}"
        )));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            elements.push(vec![a, b, c]);
            elements.push(vec![a, c, d]);
        }
    }
    Mesh::new(2, nodes, elements, boundary)
}

/// Nodal values of a piecewise-linear function.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(n: usize) -> Self {
        Field {
            values: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field {
            values: mesh.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    /// Nodal interpolant of `f` with boundary values forced to zero.
    pub fn interpolate_dirichlet(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field {
            values: mesh
                .nodes()
                .iter()
                .zip(mesh.boundary_mask())
                .map(|(&x, &b)| if b { 0.0 } else { f(x) })
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_dirichlet(&self, mesh: &Mesh) -> bool {
        self.values
            .iter()
            .zip(mesh.boundary_mask())
            .all(|(&v, &b)| !b || v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c·other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        Field {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// One value per line, aligned with node order.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::with_capacity(self.values.len() * 24);
        for v in &self.values {
            writeln!(s, "{v:.16e}").expect("string write");
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: Read>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("cannot parse `{t}`"),
            })?);
        }
        Ok(Field { values })
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}

/// Exact gradient of the interpolant on each element (second entry zero in 1-D).
pub fn element_gradient(mesh: &Mesh, f: &[f64]) -> Result<Vec<[f64; 2]>> {
    mesh.check_field(f)?;
    Ok((0..mesh.n_elements())
        .map(|e| grad_on(mesh, e, f))
        .collect())
}

#[inline]
pub(crate) fn grad_on(mesh: &Mesh, e: usize, f: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (&n, dg) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
        g[0] += f[n] * dg[0];
        g[1] += f[n] * dg[1];
    }
    g
}

/// `∫|∇f|^p`, summed element by element in mesh order.
pub fn gradient_power_integral(mesh: &Mesh, f: &[f64], p: f64) -> Result<f64> {
    mesh.check_field(f)?;
    Ok(neumaier_sum((0..mesh.n_elements()).map(|e| {
        let g = grad_on(mesh, e, f);
        mesh.measures[e] * (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p)
    })))
}

/// `∫|f|^r` by the mesh quadrature rule.
pub fn power_integral(mesh: &Mesh, f: &[f64], r: f64) -> Result<f64> {
    mesh.check_field(f)?;
    let q = &mesh.quad;
    Ok(neumaier_sum((0..mesh.n_elements()).map(|e| {
        let el = mesh.element(e);
        let mut acc = 0.0;
        for (b, w) in q.bary.iter().zip(&q.weights) {
            let val: f64 = el.iter().enumerate().map(|(k, &n)| b[k] * f[n]).sum();
            acc += w * val.abs().powf(r);
        }
        mesh.measures[e] * acc
    })))
}

/// `‖f‖_W = (∫|∇f|^p)^{1/p}`.
pub fn norm_w(mesh: &Mesh, f: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(invalid(format!("W-norm exponent must exceed 1, got {p}")));
    }
    Ok(gradient_power_integral(mesh, f, p)?.powf(1.0 / p))
}

/// `|f|_r = (∫|f|^r)^{1/r}`.
pub fn norm_lr(mesh: &Mesh, f: &[f64], r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid(format!("L^r exponent must be at least 1, got {r}")));
    }
    Ok(power_integral(mesh, f, r)?.powf(1.0 / r))
}

/// Max nodal absolute value, exact for piecewise-linear fields.
pub fn norm_linf(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Compensated summation, independent of thread scheduling.
pub fn neumaier_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Parses the mesh mini-grammar `interval:<n>[:<length>]` and `square:<nx>x<ny>`.
pub fn parse_mesh_spec(spec: &str) -> Result<Mesh> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("unrecognized mesh spec `{spec}`"));
    match parts.as_slice() {
        ["interval", n] => build_interval_mesh(n.parse().map_err(|_| bad())?, 1.0),
        ["interval", n, l] => {
            build_interval_mesh(n.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?)
        }
        ["square", dims] => {
            let (a, b) = dims.split_once('x').ok_or_else(bad)?;
            build_rect_mesh(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
        }
        _ => {
            let file = std::fs::File::open(spec).map_err(|_| bad())?;
            Mesh::read_text(file)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_two_cells() {
        let m = build_interval_mesh(2, 1.0).unwrap();
        assert_eq!(m.n_nodes(), 3);
        let xs: Vec<f64> = m.nodes().iter().map(|n| n[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        assert_eq!(m.boundary_mask(), &[true, false, true]);
    }

    #[test]
    fn interval_measures() {
        let m = build_interval_mesh(4, 1.0).unwrap();
        assert!(m.element_measures().iter().all(|&h| h == 0.25));
        assert_eq!(m.measure(), 1.0);
        let m = build_interval_mesh(100, 2.0).unwrap();
        assert!((m.measure() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_cells_rejected() {
        assert!(matches!(
            build_interval_mesh(1, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_rect_mesh(1, 4).is_err());
    }

    #[test]
    fn square_counts_and_boundary() {
        let m = build_rect_mesh(2, 2).unwrap();
        assert_eq!((m.n_nodes(), m.n_elements()), (9, 8));
        assert!((m.measure() - 1.0).abs() < 1e-15);
        let m = build_rect_mesh(3, 3).unwrap();
        assert_eq!(m.boundary_mask().iter().filter(|&&b| b).count(), 12);
        let m = build_rect_mesh(32, 32).unwrap();
        assert!((m.measure() - 1.0).abs() < 1e-12);
        assert!(m.element_measures().iter().all(|&a| a > 0.0));
    }

    #[test]
    fn gradients_of_affine_fields() {
        let m = build_interval_mesh(7, 1.0).unwrap();
        let f = Field::interpolate(&m, |x| x[0]);
        for g in element_gradient(&m, &f).unwrap() {
            assert!((g[0] - 1.0).abs() < 1e-12);
        }
        let c = Field::interpolate(&m, |_| 3.5);
        assert!(element_gradient(&m, &c)
            .unwrap()
            .iter()
            .all(|g| g[0].abs() < 1e-12));

        let s = build_rect_mesh(5, 4).unwrap();
        let f = Field::interpolate(&s, |x| x[0] + 2.0 * x[1]);
        for g in element_gradient(&s, &f).unwrap() {
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn w_norm_of_sine() {
        let m = build_interval_mesh(200, 1.0).unwrap();
        let f = Field::interpolate_dirichlet(&m, |x| (PI * x[0]).sin());
        assert_eq!(norm_w(&m, &Field::zeros(201), 2.0).unwrap(), 0.0);
        let w = norm_w(&m, &f, 2.0).unwrap();
        assert!((w / (PI * PI / 2.0).sqrt() - 1.0).abs() < 5e-3);
        assert!(norm_w(&m, &f, 1.0).is_err());
    }

    #[test]
    fn lr_norms() {
        let m = build_interval_mesh(200, 1.0).unwrap();
        let one = Field::interpolate(&m, |_| 1.0);
        for r in [1.0, 2.0, 3.7] {
            assert!((norm_lr(&m, &one, r).unwrap() - 1.0).abs() < 1e-12);
        }
        let f = Field::interpolate_dirichlet(&m, |x| (PI * x[0]).sin());
        assert!((norm_lr(&m, &f, 2.0).unwrap() / 0.5f64.sqrt() - 1.0).abs() < 5e-3);
        assert_eq!(norm_linf(&[0.0, -3.0, 2.0, 0.0]), 3.0);
        assert!(norm_lr(&m, &f, 0.5).is_err());
    }

    #[test]
    fn mesh_text_roundtrip() {
        let m = build_rect_mesh(3, 2).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh::read_text(&buf[..]).unwrap();
        assert_eq!(back.n_nodes(), m.n_nodes());
        assert_eq!(back.n_elements(), m.n_elements());
        assert_eq!(back.boundary_mask(), m.boundary_mask());
        assert_eq!(back.nodes(), m.nodes());
    }

    #[test]
    fn mesh_spec_grammar() {
        assert_eq!(parse_mesh_spec("interval:10").unwrap().n_nodes(), 11);
        assert!((parse_mesh_spec("interval:10:3").unwrap().measure() - 3.0).abs() < 1e-12);
        assert_eq!(parse_mesh_spec("square:4x3").unwrap().n_elements(), 24);
        assert!(matches!(parse_mesh_spec("disk:5"), Err(Error::Config(_))));
    }
}
