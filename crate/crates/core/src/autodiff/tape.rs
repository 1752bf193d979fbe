//! Reverse-mode differentiation over a tape of matrix-valued nodes.
//!
//! Backward rules are written with the same recorded operations as the
//! forward pass, so a gradient is itself a node on the tape and can be
//! differentiated again. Second derivatives (gradient penalties) and
//! Jacobian-vector products via two extra reverse passes both rely on this.
//!
//! ```
//! use currentkit::autodiff::Tape;
//! use ndarray::arr2;
//!
//! let tape = Tape::new();
//! let x = tape.leaf(arr2(&[[3.0]]));
//! let y = x * x;
//! let dy = tape.grad(y, &[x]).unwrap()[0];
//! assert_eq!(dy.scalar(), 6.0);
//! let d2y = tape.grad(dy, &[x]).unwrap()[0];
//! assert_eq!(d2y.scalar(), 2.0);
//! ```

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;

use ndarray::{s, Array2, Axis};

use crate::error::{Error, Result};

pub type Tensor = Array2<f64>;

#[derive(Clone)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Scale(usize, f64),
    AddScalar(usize),
    MatMul(usize, usize),
    Transpose(usize),
    /// Elementwise product with a constant array; derivatives of the mask
    /// are zero (used for piecewise-linear activations).
    Mask(usize, Rc<Tensor>),
    Exp(usize),
    Sin(usize),
    Cos(usize),
    Recip(usize),
    Sqrt(usize),
    /// Sum-reduce to this node's shape.
    SumTo(usize),
    /// Broadcast to this node's shape.
    Broadcast(usize),
    /// Columns `start..start + cols` of the parent.
    SliceCols(usize, usize),
    /// Parent placed at column `start` of a zero matrix of this node's width.
    PadCols(usize, usize),
}

impl Op {
    fn parents(&self) -> [Option<usize>; 2] {
        use Op::*;
        match *self {
            Leaf => [None, None],
            Add(a, b) | Sub(a, b) | Mul(a, b) | MatMul(a, b) => [Some(a), Some(b)],
            Scale(a, _) | AddScalar(a) | Transpose(a) | Mask(a, _) | Exp(a) | Sin(a)
            | Cos(a) | Recip(a) | Sqrt(a) | SumTo(a) | Broadcast(a) | SliceCols(a, _)
            | PadCols(a, _) => [Some(a), None],
        }
    }
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
}

/// Records one evaluation. Create a fresh tape per training step.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records an input. Every leaf can be differentiated against.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(Op::Leaf, value)
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.leaf(Array2::from_elem((1, 1), value))
    }

    pub fn zeros(&self, rows: usize, cols: usize) -> Var<'_> {
        self.leaf(Array2::zeros((rows, cols)))
    }

    fn push(&self, op: Op, value: Tensor) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Rc::new(value),
            op,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    fn value_of(&self, id: usize) -> Rc<Tensor> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    fn check_owned(&self, v: &Var<'_>) -> Result<()> {
        if !std::ptr::eq(self, v.tape) || v.id >= self.len() {
            return Err(Error::InvalidArgument(
                "variable is not recorded on this tape".into(),
            ));
        }
        Ok(())
    }

    /// Gradient of `sum(output)` with respect to each of `wrt`.
    ///
    /// The returned variables are recorded on the tape and may be
    /// differentiated again.
    pub fn grad<'t>(&'t self, output: Var<'t>, wrt: &[Var<'t>]) -> Result<Vec<Var<'t>>> {
        let (r, c) = output.shape();
        let seed = self.leaf(Array2::ones((r, c)));
        self.grad_seeded(output, seed, wrt)
    }

    /// Vector-Jacobian product: gradient of `<seed, output>` with respect to
    /// each of `wrt`.
    pub fn grad_seeded<'t>(
        &'t self,
        output: Var<'t>,
        seed: Var<'t>,
        wrt: &[Var<'t>],
    ) -> Result<Vec<Var<'t>>> {
        self.check_owned(&output)?;
        self.check_owned(&seed)?;
        if seed.shape() != output.shape() {
            return Err(Error::Shape(format!(
                "seed shape {:?} differs from output shape {:?}",
                seed.shape(),
                output.shape()
            )));
        }
        for w in wrt {
            self.check_owned(w)?;
        }
        let n = output.id + 1;
        let mut needs = vec![false; n];
        for w in wrt.iter().filter(|w| w.id < n) {
            needs[w.id] = true;
        }
        {
            let nodes = self.nodes.borrow();
            for i in 0..n {
                if !needs[i] {
                    needs[i] = nodes[i].op.parents().iter().flatten().any(|&p| needs[p]);
                }
            }
        }

        let mut adj: Vec<Option<Var<'t>>> = vec![None; n];
        adj[output.id] = Some(seed);
        for i in (0..n).rev() {
            let Some(g) = adj[i] else { continue };
            if !needs[i] {
                continue;
            }
            let op = self.nodes.borrow()[i].op.clone();
            let node = Var { tape: self, id: i };
            let mut emit = |p: usize, contrib: &dyn Fn() -> Var<'t>| {
                if needs[p] {
                    let c = contrib();
                    adj[p] = Some(match adj[p] {
                        None => c,
                        Some(acc) => acc + c,
                    });
                }
            };
            let var = |id| Var { tape: self, id };
            match op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    emit(a, &|| g);
                    emit(b, &|| g);
                }
                Op::Sub(a, b) => {
                    emit(a, &|| g);
                    emit(b, &|| -g);
                }
                Op::Mul(a, b) => {
                    emit(a, &|| g * var(b));
                    emit(b, &|| g * var(a));
                }
                Op::Scale(a, c) => emit(a, &|| g.scale(c)),
                Op::AddScalar(a) => emit(a, &|| g),
                Op::MatMul(a, b) => {
                    emit(a, &|| g.matmul(var(b).t()));
                    emit(b, &|| var(a).t().matmul(g));
                }
                Op::Transpose(a) => emit(a, &|| g.t()),
                Op::Mask(a, ref m) => emit(a, &|| g.mask_with(Rc::clone(m))),
                Op::Exp(a) => emit(a, &|| g * node),
                Op::Sin(a) => emit(a, &|| g * var(a).cos()),
                Op::Cos(a) => emit(a, &|| -(g * var(a).sin())),
                Op::Recip(a) => emit(a, &|| -(g * node * node)),
                Op::Sqrt(a) => emit(a, &|| g * node.recip().scale(0.5)),
                Op::SumTo(a) => {
                    let (r, c) = var(a).shape();
                    emit(a, &|| g.broadcast_to(r, c))
                }
                Op::Broadcast(a) => {
                    let (r, c) = var(a).shape();
                    emit(a, &|| g.sum_to(r, c))
                }
                Op::SliceCols(a, start) => {
                    let (_, c) = var(a).shape();
                    emit(a, &|| g.pad_cols(start, c))
                }
                Op::PadCols(a, start) => {
                    let (_, c) = var(a).shape();
                    emit(a, &|| g.slice_cols(start, c))
                }
            }
        }
        Ok(wrt
            .iter()
            .map(|w| match adj.get(w.id).copied().flatten() {
                Some(g) => g,
                None => {
                    let (r, c) = w.shape();
                    self.zeros(r, c)
                }
            })
            .collect())
    }

    /// Jacobian-vector product `J·v` of `y = f(x)` through two extra reverse
    /// passes: `u ↦ uᵀJ` is linear in a dummy cotangent `u`, and
    /// differentiating `<uᵀJ, v>` with respect to `u` yields `J v`.
    ///
    /// For row-batched inputs whose rows are processed independently, the
    /// Jacobian is block diagonal and the result holds one product per row.
    pub fn jvp<'t>(&'t self, y: Var<'t>, x: Var<'t>, v: Var<'t>) -> Result<Var<'t>> {
        if v.shape() != x.shape() {
            return Err(Error::Shape(format!(
                "tangent shape {:?} differs from input shape {:?}",
                v.shape(),
                x.shape()
            )));
        }
        let (r, c) = y.shape();
        let u = self.zeros(r, c);
        let ut_j = self.grad_seeded(y, u, &[x])?[0];
        Ok(self.grad_seeded(ut_j, v, &[u])?[0])
    }
}

impl<'t> Var<'t> {
    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn value(&self) -> Rc<Tensor> {
        self.tape.value_of(self.id)
    }

    pub fn shape(&self) -> (usize, usize) {
        let v = self.value();
        (v.nrows(), v.ncols())
    }

    /// The single entry of a `1 × 1` node.
    pub fn scalar(&self) -> f64 {
        let v = self.value();
        assert_eq!(v.dim(), (1, 1), "scalar() on a non-scalar node");
        v[[0, 0]]
    }

    fn unary(self, op: Op, f: impl FnOnce(&Tensor) -> Tensor) -> Var<'t> {
        let value = f(&self.value());
        self.tape.push(op, value)
    }

    fn binary(self, other: Var<'t>, op: Op, f: impl FnOnce(&Tensor, &Tensor) -> Tensor) -> Var<'t> {
        assert!(std::ptr::eq(self.tape, other.tape), "variables from different tapes");
        let value = f(&self.value(), &other.value());
        self.tape.push(op, value)
    }

    fn same_shape(&self, other: &Var<'t>, what: &str) {
        assert_eq!(
            self.shape(),
            other.shape(),
            "{what}: operand shapes differ"
        );
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        self.unary(Op::Scale(self.id, c), |a| a * c)
    }

    pub fn add_scalar(self, c: f64) -> Var<'t> {
        self.unary(Op::AddScalar(self.id), |a| a + c)
    }

    pub fn matmul(self, other: Var<'t>) -> Var<'t> {
        let (_, k) = self.shape();
        let (k2, _) = other.shape();
        assert_eq!(k, k2, "matmul: inner dimensions differ");
        self.binary(other, Op::MatMul(self.id, other.id), |a, b| a.dot(b))
    }

    pub fn t(self) -> Var<'t> {
        self.unary(Op::Transpose(self.id), |a| a.t().to_owned())
    }

    pub(crate) fn mask_with(self, mask: Rc<Tensor>) -> Var<'t> {
        assert_eq!(mask.dim(), self.value().dim(), "mask shape differs");
        let m = Rc::clone(&mask);
        self.unary(Op::Mask(self.id, mask), move |a| a * &*m)
    }

    /// Elementwise product with a constant array (no gradient to the mask).
    pub fn mask(self, mask: Tensor) -> Var<'t> {
        self.mask_with(Rc::new(mask))
    }

    pub fn exp(self) -> Var<'t> {
        self.unary(Op::Exp(self.id), |a| a.mapv(f64::exp))
    }

    pub fn sin(self) -> Var<'t> {
        self.unary(Op::Sin(self.id), |a| a.mapv(f64::sin))
    }

    pub fn cos(self) -> Var<'t> {
        self.unary(Op::Cos(self.id), |a| a.mapv(f64::cos))
    }

    pub fn recip(self) -> Var<'t> {
        self.unary(Op::Recip(self.id), |a| a.mapv(f64::recip))
    }

    pub fn sqrt(self) -> Var<'t> {
        self.unary(Op::Sqrt(self.id), |a| a.mapv(f64::sqrt))
    }

    pub fn square(self) -> Var<'t> {
        self * self
    }

    /// Sum-reduces to `(rows, cols)`, each of which must be 1 or unchanged.
    pub fn sum_to(self, rows: usize, cols: usize) -> Var<'t> {
        let (r, c) = self.shape();
        assert!(
            (rows == r || rows == 1) && (cols == c || cols == 1),
            "sum_to: cannot reduce {r}×{c} to {rows}×{cols}"
        );
        if (rows, cols) == (r, c) {
            return self;
        }
        self.unary(Op::SumTo(self.id), |a| {
            let mut out = a.clone();
            if rows == 1 && r != 1 {
                out = out.sum_axis(Axis(0)).insert_axis(Axis(0));
            }
            if cols == 1 && c != 1 {
                out = out.sum_axis(Axis(1)).insert_axis(Axis(1));
            }
            out
        })
    }

    /// Total sum as a `1 × 1` node.
    pub fn sum(self) -> Var<'t> {
        self.sum_to(1, 1)
    }

    /// Mean of all entries as a `1 × 1` node.
    pub fn mean(self) -> Var<'t> {
        let (r, c) = self.shape();
        self.sum().scale(1.0 / (r * c) as f64)
    }

    /// Repeats singleton axes to reach `(rows, cols)`.
    pub fn broadcast_to(self, rows: usize, cols: usize) -> Var<'t> {
        let (r, c) = self.shape();
        assert!(
            (r == rows || r == 1) && (c == cols || c == 1),
            "broadcast_to: cannot expand {r}×{c} to {rows}×{cols}"
        );
        if (rows, cols) == (r, c) {
            return self;
        }
        self.unary(Op::Broadcast(self.id), |a| {
            a.broadcast((rows, cols))
                .expect("checked broadcast")
                .to_owned()
        })
    }

    pub fn slice_cols(self, start: usize, len: usize) -> Var<'t> {
        let (_, c) = self.shape();
        assert!(start + len <= c, "slice_cols out of range");
        self.unary(Op::SliceCols(self.id, start), |a| {
            a.slice(s![.., start..start + len]).to_owned()
        })
    }

    pub fn pad_cols(self, start: usize, total: usize) -> Var<'t> {
        let (r, c) = self.shape();
        assert!(start + c <= total, "pad_cols out of range");
        self.unary(Op::PadCols(self.id, start), |a| {
            let mut out = Array2::zeros((r, total));
            out.slice_mut(s![.., start..start + c]).assign(a);
            out
        })
    }

    /// Side-by-side concatenation.
    pub fn concat_cols(self, other: Var<'t>) -> Var<'t> {
        let (_, c1) = self.shape();
        let (_, c2) = other.shape();
        self.pad_cols(0, c1 + c2) + other.pad_cols(c1, c1 + c2)
    }

    /// Row-wise inner products of two `n × m` nodes, as `n × 1`.
    pub fn row_dot(self, other: Var<'t>) -> Var<'t> {
        let (r, _) = self.shape();
        (self * other).sum_to(r, 1)
    }

    /// Row-wise Euclidean norms, as `n × 1`.
    pub fn row_norm(self) -> Var<'t> {
        self.row_dot(self).sqrt()
    }

    pub fn relu(self) -> Var<'t> {
        let m = self.value().mapv(|x| if x > 0.0 { 1.0 } else { 0.0 });
        self.mask(m)
    }

    pub fn leaky_relu(self, slope: f64) -> Var<'t> {
        let m = self.value().mapv(|x| if x > 0.0 { 1.0 } else { slope });
        self.mask(m)
    }

    pub fn abs(self) -> Var<'t> {
        let m = self.value().mapv(|x| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 });
        self.mask(m)
    }

    /// `elu(x) = max(x, 0) + exp(min(x, 0)) - 1`; the derivative
    /// `exp(min(x, 0))` is continuous.
    pub fn elu(self) -> Var<'t> {
        let neg = self.value().mapv(|x| if x > 0.0 { 0.0 } else { 1.0 });
        self.relu() + self.mask(neg).exp().add_scalar(-1.0)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.same_shape(&rhs, "add");
        self.binary(rhs, Op::Add(self.id, rhs.id), |a, b| a + b)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.same_shape(&rhs, "sub");
        self.binary(rhs, Op::Sub(self.id, rhs.id), |a, b| a - b)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.same_shape(&rhs, "mul");
        self.binary(rhs, Op::Mul(self.id, rhs.id), |a, b| a * b)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var#{}{:?}", self.id, self.shape())
    }
}
