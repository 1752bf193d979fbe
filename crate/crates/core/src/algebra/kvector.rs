use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::multi_index::{binomial, lex_masks, mask_rank, merge_sign, MultiIndex, MAX_DIM};
use crate::error::{ensure_finite, Error, Result};

/// Marker for the two flavours of graded element.
pub trait Kind: Clone + Copy + fmt::Debug + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;
}

/// Elements of `Λ_k R^d`, written in the basis `e_I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector;

/// Elements of `Λ^k R^d`, written in the dual basis `dx_I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covector;

impl Kind for Vector {
    const NAME: &'static str = "k-vector";
}

impl Kind for Covector {
    const NAME: &'static str = "k-covector";
}

/// Dense coefficient array over `I(d, k)` in lexicographic order.
#[derive(Clone, PartialEq)]
pub struct Graded<K: Kind> {
    d: usize,
    k: usize,
    coeffs: Vec<f64>,
    _kind: PhantomData<K>,
}

pub type KVector = Graded<Vector>;
pub type KCovector = Graded<Covector>;

impl<K: Kind> Graded<K> {
    pub fn zeros(d: usize, k: usize) -> Result<Self> {
        check_shape(d, k)?;
        Ok(Graded {
            d,
            k,
            coeffs: vec![0.0; binomial(d, k)],
            _kind: PhantomData,
        })
    }

    pub fn from_coeffs(d: usize, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_shape(d, k)?;
        if coeffs.len() != binomial(d, k) {
            return Err(Error::DimensionMismatch {
                expected: binomial(d, k),
                got: coeffs.len(),
            });
        }
        ensure_finite(K::NAME, &coeffs)?;
        Ok(Graded {
            d,
            k,
            coeffs,
            _kind: PhantomData,
        })
    }

    /// Basis element `e_I` (or `dx_I`).
    pub fn basis(index: MultiIndex) -> Self {
        let mut out = Self::zeros(index.dim(), index.grade()).expect("multi-index is valid");
        out.coeffs[index.rank()] = 1.0;
        out
    }

    /// Builds from `(index, coefficient)` pairs; repeated indices accumulate.
    pub fn from_terms<I>(d: usize, k: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut out = Self::zeros(d, k)?;
        for (idx, c) in terms {
            if idx.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: idx.dim(),
                });
            }
            if idx.grade() != k {
                return Err(Error::GradeMismatch {
                    expected: k,
                    got: idx.grade(),
                });
            }
            out.coeffs[idx.rank()] += c;
        }
        ensure_finite(K::NAME, &out.coeffs)?;
        Ok(out)
    }

    /// A 1-vector from its components.
    pub fn from_components(v: &[f64]) -> Result<Self> {
        Self::from_coeffs(v.len(), 1, v.to_vec())
    }

    /// Grade-0 element with value `c`.
    pub fn scalar(d: usize, c: f64) -> Result<Self> {
        Self::from_coeffs(d, 0, vec![c])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, index: &MultiIndex) -> f64 {
        if index.dim() != self.d || index.grade() != self.k {
            return 0.0;
        }
        self.coeffs[index.rank()]
    }

    /// Iterates `(index, coefficient)` in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        lex_masks(self.d, self.k)
            .into_iter()
            .zip(self.coeffs.iter().copied())
            .map(move |(m, c)| (MultiIndex::from_mask(self.d, m), c))
    }

    pub(crate) fn mask_terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        lex_masks(self.d, self.k)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Sum of coefficient products, `Σ a_I b_I`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other.d, other.k)?;
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    /// `|v| = sqrt(<v, v>)`.
    pub fn euclidean_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    /// Exterior product; the result has grade `j + k`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.k + other.k > self.d {
            return Err(Error::GradeOverflow {
                j: self.k,
                k: other.k,
                d: self.d,
            });
        }
        let mut out = Self::zeros(self.d, self.k + other.k)?;
        for (ma, a) in self.mask_terms().filter(|(_, a)| *a != 0.0) {
            for (mb, b) in other.mask_terms().filter(|(_, b)| *b != 0.0) {
                if let Some(sign) = merge_sign(ma, mb) {
                    out.coeffs[mask_rank(self.d, ma | mb)] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn check_same(&self, d: usize, k: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: d,
            });
        }
        if self.k != k {
            return Err(Error::GradeMismatch {
                expected: self.k,
                got: k,
            });
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Graded {
            d: self.d,
            k: self.k,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            _kind: PhantomData,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            (self.d, self.k),
            (other.d, other.k),
            "graded elements of different shape"
        );
        Graded {
            d: self.d,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            _kind: PhantomData,
        }
    }

    fn recast<L: Kind>(&self) -> Graded<L> {
        Graded {
            d: self.d,
            k: self.k,
            coeffs: self.coeffs.clone(),
            _kind: PhantomData,
        }
    }
}

impl KVector {
    /// The covector with the same coefficients (the Euclidean isomorphism).
    pub fn to_covector(&self) -> KCovector {
        self.recast()
    }
}

impl KCovector {
    pub fn to_vector(&self) -> KVector {
        self.recast()
    }

    /// Pairing `<w, v>` of a covector with a vector.
    pub fn apply(&self, v: &KVector) -> Result<f64> {
        self.check_same(v.d, v.k)?;
        Ok(dot(&self.coeffs, &v.coeffs))
    }
}

/// `<v, w>` for two elements of the same kind.
pub fn inner<K: Kind>(v: &Graded<K>, w: &Graded<K>) -> Result<f64> {
    v.dot(w)
}

/// Exterior product of two k-vectors.
pub fn wedge<K: Kind>(u: &Graded<K>, v: &Graded<K>) -> Result<Graded<K>> {
    u.wedge(v)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_shape(d: usize, k: usize) -> Result<()> {
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    if k > d {
        return Err(Error::GradeOverflow { j: k, k: 0, d });
    }
    Ok(())
}

impl<K: Kind> Add for &Graded<K> {
    type Output = Graded<K>;
    fn add(self, rhs: Self) -> Graded<K> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<K: Kind> Sub for &Graded<K> {
    type Output = Graded<K>;
    fn sub(self, rhs: Self) -> Graded<K> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<K: Kind> Neg for &Graded<K> {
    type Output = Graded<K>;
    fn neg(self) -> Graded<K> {
        self.map(|a| -a)
    }
}

impl<K: Kind> Mul<&Graded<K>> for f64 {
    type Output = Graded<K>;
    fn mul(self, rhs: &Graded<K>) -> Graded<K> {
        rhs.scale(self)
    }
}

impl<K: Kind> fmt::Debug for Graded<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis = if K::NAME == Vector::NAME { "e" } else { "dx" };
        write!(f, "{}(d={}, k={}; ", K::NAME, self.d, self.k)?;
        let mut first = true;
        for (idx, c) in self.terms().filter(|(_, c)| *c != 0.0) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·{basis}{}", idx)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// Sparse JSON form: `{"d": 4, "k": 2, "coeffs": {"1,2": 1.0, "3,4": 1.0}}`.
#[derive(Serialize, Deserialize)]
struct SparseRepr {
    d: usize,
    k: usize,
    coeffs: BTreeMap<String, f64>,
}

impl<K: Kind> Serialize for Graded<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .terms()
            .filter(|(_, c)| *c != 0.0)
            .map(|(i, c)| (i.key(), c))
            .collect();
        SparseRepr {
            d: self.d,
            k: self.k,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de, K: Kind> Deserialize<'de> for Graded<K> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SparseRepr::deserialize(de)?;
        let terms = repr
            .coeffs
            .iter()
            .map(|(key, &c)| MultiIndex::parse(repr.d, key).map(|i| (i, c)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Graded::from_terms(repr.d, repr.k, terms).map_err(D::Error::custom)
    }
}
