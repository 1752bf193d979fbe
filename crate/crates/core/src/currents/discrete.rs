use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::algebra::Frame;
use crate::error::{ensure_finite, Error, Result};
use crate::forms::{FormField, SmoothMap};

/// A weighted Dirac mass carrying an (unnormalized) orientation frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
    #[serde(default = "empty_frame")]
    pub frame: Frame,
}

fn empty_frame() -> Frame {
    Frame::empty(0)
}

impl Atom {
    pub fn new(x: Vec<f64>, w: f64, frame: Frame) -> Self {
        Atom { x, w, frame }
    }

    /// A grade-0 atom.
    pub fn point(x: Vec<f64>, w: f64) -> Self {
        let d = x.len();
        Atom {
            x,
            w,
            frame: Frame::empty(d),
        }
    }
}

/// `T = Σ_i w_i δ_{x_i} ∧ ξ_i` with `ξ_i` the k-vector of the atom's frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteCurrent {
    d: usize,
    k: usize,
    atoms: Vec<Atom>,
}

impl DiscreteCurrent {
    pub fn new(d: usize, k: usize, atoms: Vec<Atom>) -> Result<Self> {
        if k > d {
            return Err(Error::GradeOverflow { j: k, k: 0, d });
        }
        let mut atoms = atoms;
        for a in atoms.iter_mut() {
            if a.x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.x.len(),
                });
            }
            ensure_finite("atom position", &a.x)?;
            ensure_finite("atom weight", &[a.w])?;
            if a.frame.grade() != k {
                return Err(Error::GradeMismatch {
                    expected: k,
                    got: a.frame.grade(),
                });
            }
            if k == 0 {
                a.frame = Frame::empty(d);
            } else if a.frame.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.frame.dim(),
                });
            }
        }
        Ok(DiscreteCurrent { d, k, atoms })
    }

    pub fn zero(d: usize, k: usize) -> Self {
        DiscreteCurrent {
            d,
            k,
            atoms: Vec::new(),
        }
    }

    /// `w · δ_x` as a 0-current.
    pub fn dirac(x: Vec<f64>, w: f64) -> Result<Self> {
        let d = x.len();
        DiscreteCurrent::new(d, 0, vec![Atom::point(x, w)])
    }

    /// A weighted point cloud as a 0-current.
    pub fn from_points(points: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let d = points.first().map_or(0, Vec::len);
        let atoms = points
            .iter()
            .zip(weights)
            .map(|(x, &w)| Atom::point(x.clone(), w))
            .collect();
        DiscreteCurrent::new(d, 0, atoms)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// `T(ω) = Σ w_i <ω(x_i), ξ_i>`.
    pub fn evaluate<F: FormField + ?Sized>(&self, form: &F) -> Result<f64> {
        if form.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: form.dim(),
            });
        }
        if form.grade() != self.k {
            return Err(Error::GradeMismatch {
                expected: self.k,
                got: form.grade(),
            });
        }
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.w * form.apply(&a.x, &a.frame)?;
        }
        Ok(acc)
    }

    /// `M(T) = Σ |w_i| |ξ_i|`; exact because every atom orientation is simple.
    ///
    /// Atoms are not merged, so coincident atoms of opposite sign both count.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.abs() * a.frame.volume()).sum()
    }

    /// `g_♯T`: points through `g`, frame columns through `∇g`.
    pub fn pushforward<G: SmoothMap + ?Sized>(&self, g: &G) -> Result<DiscreteCurrent> {
        if g.domain_dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: g.domain_dim(),
            });
        }
        let m = g.codomain_dim();
        if self.k > m {
            return Err(Error::GradeOverflow { j: self.k, k: 0, d: m });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let frame = if self.k == 0 {
                    Frame::empty(m)
                } else {
                    a.frame.push_through(&g.jacobian(&a.x)?)?
                };
                Ok(Atom::new(g.eval(&a.x)?, a.w, frame))
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteCurrent::new(m, self.k, atoms)
    }

    /// Pushforward under `x ↦ λx`; the k-vectors scale by `λ^k`.
    pub fn dilate(&self, lambda: f64) -> Result<DiscreteCurrent> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                x: a.x.iter().map(|v| v * lambda).collect(),
                w: a.w,
                frame: a.frame.scale_columns(lambda),
            })
            .collect();
        Ok(DiscreteCurrent {
            d: self.d,
            k: self.k,
            atoms,
        })
    }

    pub fn scale(&self, c: f64) -> DiscreteCurrent {
        DiscreteCurrent {
            d: self.d,
            k: self.k,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    w: a.w * c,
                    ..a.clone()
                })
                .collect(),
        }
    }

    /// Formal sum; atoms are concatenated, not merged.
    pub fn try_add(&self, other: &DiscreteCurrent) -> Result<DiscreteCurrent> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        if self.k != other.k {
            return Err(Error::GradeMismatch {
                expected: self.k,
                got: other.k,
            });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(DiscreteCurrent {
            d: self.d,
            k: self.k,
            atoms,
        })
    }

    pub fn try_sub(&self, other: &DiscreteCurrent) -> Result<DiscreteCurrent> {
        self.try_add(&other.scale(-1.0))
    }

    /// Polar form `‖T‖ ∧ T⃗`: frames rescaled to unit k-volume with their
    /// volume folded into the weight. Degenerate atoms are dropped.
    pub fn polar(&self) -> DiscreteCurrent {
        let atoms = self
            .atoms
            .iter()
            .filter_map(|a| {
                let vol = a.frame.volume();
                if vol == 0.0 {
                    return None;
                }
                let frame = if self.k == 0 {
                    a.frame.clone()
                } else {
                    // rescale one column so the k-volume is 1
                    let mut m = a.frame.matrix().clone();
                    m.column_mut(0).scale_mut(1.0 / vol);
                    Frame::from_matrix(m).ok()?
                };
                Some(Atom {
                    x: a.x.clone(),
                    w: a.w * vol,
                    frame,
                })
            })
            .collect();
        DiscreteCurrent {
            d: self.d,
            k: self.k,
            atoms,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl<'de> Deserialize<'de> for DiscreteCurrent {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            d: usize,
            k: usize,
            atoms: Vec<Atom>,
        }
        let r = Repr::deserialize(de)?;
        DiscreteCurrent::new(r.d, r.k, r.atoms).map_err(D::Error::custom)
    }
}

impl Add for &DiscreteCurrent {
    type Output = DiscreteCurrent;
    /// Panics on mismatched dimension or grade; see [`DiscreteCurrent::try_add`].
    fn add(self, rhs: &DiscreteCurrent) -> DiscreteCurrent {
        self.try_add(rhs).expect("currents of different shape")
    }
}

impl Sub for &DiscreteCurrent {
    type Output = DiscreteCurrent;
    fn sub(self, rhs: &DiscreteCurrent) -> DiscreteCurrent {
        self.try_sub(rhs).expect("currents of different shape")
    }
}

impl Neg for &DiscreteCurrent {
    type Output = DiscreteCurrent;
    fn neg(self) -> DiscreteCurrent {
        self.scale(-1.0)
    }
}
