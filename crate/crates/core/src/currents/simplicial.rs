use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::Frame;
use crate::error::{ensure_finite, Error, Result};

/// Vertices with oriented edges and triangles.
///
/// Every edge of a triangle is present. Edges added implicitly are oriented
/// from the lower to the higher vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    d: usize,
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl SimplicialComplex {
    pub fn new(
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let d = vertices.first().map_or(0, Vec::len);
        for v in &vertices {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            ensure_finite("vertex", v)?;
        }
        let n = vertices.len();
        let check = |s: &[usize]| -> Result<()> {
            if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidArgument(format!(
                    "vertex index {bad} out of range ({n} vertices)"
                )));
            }
            for (i, a) in s.iter().enumerate() {
                if s[i + 1..].contains(a) {
                    return Err(Error::InvalidArgument(format!(
                        "simplex {s:?} repeats a vertex"
                    )));
                }
            }
            Ok(())
        };
        if !triangles.is_empty() && d < 2 {
            return Err(Error::InvalidArgument(
                "triangles need an ambient dimension of at least 2".into(),
            ));
        }
        let mut cx = SimplicialComplex {
            d,
            vertices,
            edges: Vec::new(),
            triangles: Vec::new(),
            edge_index: HashMap::new(),
        };
        for e in edges {
            check(&e)?;
            cx.insert_edge(e);
        }
        for t in triangles {
            check(&t)?;
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                cx.insert_edge([a.min(b), a.max(b)]);
            }
            cx.triangles.push(t);
        }
        Ok(cx)
    }

    fn insert_edge(&mut self, e: [usize; 2]) {
        let key = (e[0].min(e[1]), e[0].max(e[1]));
        if !self.edge_index.contains_key(&key) {
            self.edge_index.insert(key, self.edges.len());
            self.edges.push(e);
        }
    }

    /// `n × n` cells over `[x0, x0 + side] × [y0, y0 + side]`, each split
    /// into two counterclockwise triangles.
    pub fn grid(n: usize, side: f64, origin: [f64; 2]) -> Result<Self> {
        if n == 0 || !(side > 0.0) {
            return Err(Error::InvalidArgument(
                "grid needs at least one cell and positive side".into(),
            ));
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let h = side / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(vec![origin[0] + h * i as f64, origin[1] + h * j as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, e) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, e]);
            }
        }
        SimplicialComplex::new(vertices, Vec::new(), triangles)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn count(&self, k: usize) -> usize {
        match k {
            0 => self.vertices.len(),
            1 => self.edges.len(),
            2 => self.triangles.len(),
            _ => 0,
        }
    }

    pub fn simplex(&self, k: usize, i: usize) -> Vec<usize> {
        match k {
            0 => vec![i],
            1 => self.edges[i].to_vec(),
            2 => self.triangles[i].to_vec(),
            _ => panic!("grade {k} simplices are not stored"),
        }
    }

    /// Edge with the given endpoints and the sign relating the requested
    /// orientation to the stored one.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<(usize, f64)> {
        let i = *self.edge_index.get(&(a.min(b), a.max(b)))?;
        let sign = if self.edges[i] == [a, b] { 1.0 } else { -1.0 };
        Some((i, sign))
    }

    /// Columns `v_1 - v_0, …, v_k - v_0`; its k-vector is `k!·vol·τ`.
    pub fn frame(&self, k: usize, i: usize) -> Result<Frame> {
        if k == 0 {
            return Ok(Frame::empty(self.d));
        }
        let s = self.simplex(k, i);
        let base = &self.vertices[s[0]];
        let cols: Vec<Vec<f64>> = s[1..]
            .iter()
            .map(|&v| self.vertices[v].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        Frame::new(&cols)
    }

    /// k-dimensional volume of a simplex (1 for vertices).
    pub fn volume(&self, k: usize, i: usize) -> f64 {
        match self.frame(k, i) {
            Ok(f) => f.volume() / factorial(k),
            Err(_) => 0.0,
        }
    }

    /// Centroid of a simplex.
    pub fn barycenter(&self, k: usize, i: usize) -> Vec<f64> {
        let s = self.simplex(k, i);
        let mut c = vec![0.0; self.d];
        for &v in &s {
            for (a, b) in c.iter_mut().zip(&self.vertices[v]) {
                *a += b / s.len() as f64;
            }
        }
        c
    }

    /// Signed faces of a k-simplex: `∂[v_0…v_k] = Σ (-1)^i [v_0…v̂_i…v_k]`.
    pub fn boundary_entries(&self, k: usize, i: usize) -> Vec<(usize, f64)> {
        match k {
            1 => {
                let [a, b] = self.edges[i];
                vec![(b, 1.0), (a, -1.0)]
            }
            2 => {
                let [a, b, c] = self.triangles[i];
                [(b, c, 1.0), (a, c, -1.0), (a, b, 1.0)]
                    .into_iter()
                    .map(|(p, q, s)| {
                        let (e, sign) = self.find_edge(p, q).expect("triangle edges are stored");
                        (e, s * sign)
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[derive(Serialize, Deserialize)]
struct ComplexRepr {
    vertices: Vec<Vec<f64>>,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    triangles: Vec<[usize; 3]>,
}

impl Serialize for SimplicialComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexRepr {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            triangles: self.triangles.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimplicialComplex {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ComplexRepr::deserialize(de)?;
        SimplicialComplex::new(r.vertices, r.edges, r.triangles).map_err(D::Error::custom)
    }
}

/// Real coefficients on the k-simplices of a shared complex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialChain {
    complex: Arc<SimplicialComplex>,
    k: usize,
    coeffs: Vec<f64>,
}

impl SimplicialChain {
    pub fn new(complex: Arc<SimplicialComplex>, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        if k > 2 {
            return Err(Error::InvalidArgument(format!(
                "chains of grade {k} are not supported"
            )));
        }
        if coeffs.len() != complex.count(k) {
            return Err(Error::DimensionMismatch {
                expected: complex.count(k),
                got: coeffs.len(),
            });
        }
        ensure_finite("chain coefficients", &coeffs)?;
        Ok(SimplicialChain { complex, k, coeffs })
    }

    pub fn zero(complex: Arc<SimplicialComplex>, k: usize) -> Result<Self> {
        let n = complex.count(k);
        SimplicialChain::new(complex, k, vec![0.0; n])
    }

    /// Unit coefficient on simplex `i`.
    pub fn elementary(complex: Arc<SimplicialComplex>, k: usize, i: usize) -> Result<Self> {
        let mut c = SimplicialChain::zero(complex, k)?;
        if i >= c.coeffs.len() {
            return Err(Error::InvalidArgument(format!("no {k}-simplex {i}")));
        }
        c.coeffs[i] = 1.0;
        Ok(c)
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn boundary(&self) -> Result<SimplicialChain> {
        if self.k == 0 {
            return Err(Error::InvalidArgument(
                "the boundary of a 0-chain is undefined".into(),
            ));
        }
        let mut out = vec![0.0; self.complex.count(self.k - 1)];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (j, s) in self.complex.boundary_entries(self.k, i) {
                out[j] += s * c;
            }
        }
        SimplicialChain::new(Arc::clone(&self.complex), self.k - 1, out)
    }

    /// `Σ |c_i| vol(σ_i)`.
    pub fn mass(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * self.complex.volume(self.k, i))
            .sum()
    }

    fn check_compatible(&self, other: &SimplicialChain) -> Result<()> {
        if !Arc::ptr_eq(&self.complex, &other.complex) && self.complex != other.complex {
            return Err(Error::InvalidArgument("chains live on different complexes".into()));
        }
        if self.k != other.k {
            return Err(Error::GradeMismatch {
                expected: self.k,
                got: other.k,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SimplicialChain) -> Result<SimplicialChain> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        SimplicialChain::new(Arc::clone(&self.complex), self.k, coeffs)
    }

    pub fn scale(&self, c: f64) -> SimplicialChain {
        SimplicialChain {
            complex: Arc::clone(&self.complex),
            k: self.k,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    complex: SimplicialComplex,
    k: usize,
    coeffs: Vec<f64>,
}

impl Serialize for SimplicialChain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChainRepr {
            complex: (*self.complex).clone(),
            k: self.k,
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimplicialChain {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ChainRepr::deserialize(de)?;
        SimplicialChain::new(Arc::new(r.complex), r.k, r.coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Arc<SimplicialComplex> {
        Arc::new(
            SimplicialComplex::new(
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![],
                vec![[0, 1, 2]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn triangle_boundary() {
        let cx = triangle();
        let t = SimplicialChain::elementary(Arc::clone(&cx), 2, 0).unwrap();
        let b = t.boundary().unwrap();
        // edges stored as [0,1], [1,2], [0,2]
        let expect = |a: usize, c: usize| cx.find_edge(a, c).unwrap();
        let mut got = vec![0.0; 3];
        for (p, q) in [(0, 1), (1, 2), (2, 0)] {
            let (e, s) = expect(p, q);
            got[e] += s;
        }
        assert_eq!(b.coeffs(), got.as_slice());
        assert!(b.boundary().unwrap().is_zero());
        assert!((cx.volume(2, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_boundary_cancels_diagonal() {
        let cx = Arc::new(SimplicialComplex::grid(1, 1.0, [0.0, 0.0]).unwrap());
        let sq = SimplicialChain::new(Arc::clone(&cx), 2, vec![1.0, 1.0]).unwrap();
        let b = sq.boundary().unwrap();
        let (diag, _) = cx.find_edge(0, 3).unwrap();
        assert_eq!(b.coeffs()[diag], 0.0);
        assert_eq!(b.coeffs().iter().filter(|c| c.abs() == 1.0).count(), 4);
        assert!((b.mass() - 4.0).abs() < 1e-15);
        assert!(b.boundary().unwrap().is_zero());
    }

    #[test]
    fn grid_triangles_are_positive() {
        let cx = SimplicialComplex::grid(3, 2.0, [-1.0, -1.0]).unwrap();
        for i in 0..cx.count(2) {
            let f = cx.frame(2, i).unwrap();
            let m = f.matrix();
            assert!(m[(0, 0)] * m[(1, 1)] - m[(1, 0)] * m[(0, 1)] > 0.0);
        }
        let total: f64 = (0..cx.count(2)).map(|i| cx.volume(2, i)).sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(SimplicialComplex::new(vec![vec![0.0, 0.0]], vec![[0, 1]], vec![]).is_err());
        assert!(SimplicialComplex::new(vec![vec![0.0, 0.0]; 3], vec![], vec![[0, 1, 1]]).is_err());
        let cx = triangle();
        assert!(SimplicialChain::new(Arc::clone(&cx), 1, vec![1.0]).is_err());
        assert!(SimplicialChain::zero(cx, 0).unwrap().boundary().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cx = Arc::new(SimplicialComplex::grid(2, 1.0, [0.0, 0.0]).unwrap());
        let c = SimplicialChain::new(Arc::clone(&cx), 1, (0..cx.count(1)).map(|i| i as f64).collect())
            .unwrap();
        let back = SimplicialChain::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
