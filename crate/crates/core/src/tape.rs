//! Reverse-mode differentiation over dense f64 vector primitives.
//!
//! A [`Tape`] is an append-only record of primitives; node order is
//! topological by construction. Every node holds a value vector (scalars are
//! length-1 vectors) and enough operand information for its adjoint rule.
//! One tape serves one training step and is confined to a single thread.
//!
//! Clamp primitives use straight-through gradients: identity inside the safe
//! region, zero once the clamp binds.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::ParamStore;
use crate::vecmath::{dot, norm};

/// Handle to a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var {
    id: usize,
    len: usize,
}

impl Var {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_scalar(&self) -> bool {
        self.len == 1
    }
}

#[derive(Clone, Copy, Debug)]
pub enum UnaryFn {
    Tanh,
    Tan,
    Atanh,
    Atan,
    Exp,
    Ln,
    Sqrt,
    Sigmoid,
    Sinh,
    Cosh,
    Recip,
    LeakyRelu(f64),
}

impl UnaryFn {
    fn apply(&self, x: f64) -> f64 {
        match self {
            UnaryFn::Tanh => x.tanh(),
            UnaryFn::Tan => x.tan(),
            UnaryFn::Atanh => x.atanh(),
            UnaryFn::Atan => x.atan(),
            UnaryFn::Exp => x.exp(),
            UnaryFn::Ln => x.ln(),
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            UnaryFn::Sinh => x.sinh(),
            UnaryFn::Cosh => x.cosh(),
            UnaryFn::Recip => 1.0 / x,
            UnaryFn::LeakyRelu(s) => {
                if x > 0.0 {
                    x
                } else {
                    s * x
                }
            }
        }
    }

    /// Derivative given input x and output y = f(x).
    fn derivative(&self, x: f64, y: f64) -> f64 {
        match self {
            UnaryFn::Tanh => 1.0 - y * y,
            UnaryFn::Tan => 1.0 + y * y,
            UnaryFn::Atanh => 1.0 / (1.0 - x * x),
            UnaryFn::Atan => 1.0 / (1.0 + x * x),
            UnaryFn::Exp => y,
            UnaryFn::Ln => 1.0 / x,
            UnaryFn::Sqrt => 0.5 / y.max(1e-300),
            UnaryFn::Sigmoid => y * (1.0 - y),
            UnaryFn::Sinh => x.cosh(),
            UnaryFn::Cosh => x.sinh(),
            UnaryFn::Recip => -y * y,
            UnaryFn::LeakyRelu(s) => {
                if x > 0.0 {
                    1.0
                } else {
                    *s
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Op {
    /// Input; `name` is set for trainable parameters.
    Leaf { name: Option<String> },
    Constant,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    AddConst(usize),
    MulConst(usize, f64),
    /// value = v * s with s a scalar node, broadcast over v.
    ScaleBy { v: usize, s: usize },
    Dot(usize, usize),
    Sum(usize),
    /// Euclidean norm; gradient is x/‖x‖ with the norm floored away from zero.
    Norm(usize),
    /// y = M x (or Mᵀ x when `transpose`), M row-major rows×cols.
    MatVec { m: usize, x: usize, rows: usize, cols: usize, transpose: bool },
    Unary { a: usize, f: UnaryFn },
    /// Straight-through |x| ≤ bound clamp.
    ClampAbs { a: usize, bound: f64 },
    /// Straight-through x ≥ lo clamp.
    ClampMin { a: usize, lo: f64 },
    /// Straight-through |x| ≥ lo clamp that preserves sign (zero maps to +lo).
    ClampMagnitude { a: usize, lo: f64 },
    /// Renormalize v to at most the scalar node `max_norm`; straight-through.
    ClampNorm { v: usize, max_norm: usize },
    Concat(Vec<usize>),
    Slice { a: usize, start: usize },
}

struct Node {
    op: Op,
    val: Vec<f64>,
}

/// Append-only record of forward primitives.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.id].val
    }

    pub fn scalar(&self, v: Var) -> f64 {
        debug_assert!(v.is_scalar());
        self.nodes[v.id].val[0]
    }

    fn push(&mut self, op: Op, val: Vec<f64>) -> Var {
        let id = self.nodes.len();
        let len = val.len();
        self.nodes.push(Node { op, val });
        Var { id, len }
    }

    pub fn leaf(&mut self, val: Vec<f64>) -> Var {
        self.push(Op::Leaf { name: None }, val)
    }

    /// Trainable leaf; gradients are reported under `name`.
    pub fn leaf_named(&mut self, name: &str, val: Vec<f64>) -> Var {
        self.push(Op::Leaf { name: Some(name.to_string()) }, val)
    }

    pub fn constant(&mut self, val: Vec<f64>) -> Var {
        self.push(Op::Constant, val)
    }

    pub fn constant_scalar(&mut self, x: f64) -> Var {
        self.constant(vec![x])
    }

    /// Binds every parameter in the store as a named leaf, in store order.
    pub fn bind(&mut self, store: &ParamStore) -> HashMap<String, Var> {
        let mut bound = HashMap::new();
        for (name, tensor) in store.iter() {
            let var = self.leaf_named(name, tensor.data().to_vec());
            bound.insert(name.to_string(), var);
        }
        bound
    }

    fn check_same_len(&self, a: Var, b: Var) {
        assert_eq!(a.len, b.len, "operand length mismatch on tape");
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.check_same_len(a, b);
        let val = crate::vecmath::add(self.value(a), self.value(b));
        self.push(Op::Add(a.id, b.id), val)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.check_same_len(a, b);
        let val = crate::vecmath::sub(self.value(a), self.value(b));
        self.push(Op::Sub(a.id, b.id), val)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.check_same_len(a, b);
        let val: Vec<f64> =
            self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        self.push(Op::Mul(a.id, b.id), val)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.check_same_len(a, b);
        let val: Vec<f64> =
            self.value(a).iter().zip(self.value(b)).map(|(x, y)| x / y).collect();
        self.push(Op::Div(a.id, b.id), val)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        let val = crate::vecmath::scale(self.value(a), -1.0);
        self.push(Op::Neg(a.id), val)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let val: Vec<f64> = self.value(a).iter().map(|x| x + c).collect();
        self.push(Op::AddConst(a.id), val)
    }

    pub fn mul_const(&mut self, a: Var, c: f64) -> Var {
        let val = crate::vecmath::scale(self.value(a), c);
        self.push(Op::MulConst(a.id, c), val)
    }

    pub fn scale_by(&mut self, v: Var, s: Var) -> Var {
        assert!(s.is_scalar(), "scale_by takes a scalar node");
        let sv = self.scalar(s);
        let val = crate::vecmath::scale(self.value(v), sv);
        self.push(Op::ScaleBy { v: v.id, s: s.id }, val)
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        self.check_same_len(a, b);
        let val = dot(self.value(a), self.value(b));
        self.push(Op::Dot(a.id, b.id), vec![val])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let val = self.value(a).iter().sum();
        self.push(Op::Sum(a.id), vec![val])
    }

    pub fn norm(&mut self, a: Var) -> Var {
        let val = norm(self.value(a));
        self.push(Op::Norm(a.id), vec![val])
    }

    pub fn sq_norm(&mut self, a: Var) -> Var {
        self.dot(a, a)
    }

    pub fn matvec(&mut self, m: Var, rows: usize, cols: usize, x: Var) -> Var {
        assert_eq!(m.len, rows * cols, "matrix node length mismatch");
        assert_eq!(x.len, cols, "matvec input length mismatch");
        let val = crate::vecmath::matvec(self.value(m), rows, cols, self.value(x));
        self.push(Op::MatVec { m: m.id, x: x.id, rows, cols, transpose: false }, val)
    }

    /// y = Mᵀ x for M row-major rows×cols (x has length rows, y length cols).
    pub fn matvec_t(&mut self, m: Var, rows: usize, cols: usize, x: Var) -> Var {
        assert_eq!(m.len, rows * cols, "matrix node length mismatch");
        assert_eq!(x.len, rows, "matvec_t input length mismatch");
        let val = crate::vecmath::matvec_t(self.value(m), rows, cols, self.value(x));
        self.push(Op::MatVec { m: m.id, x: x.id, rows, cols, transpose: true }, val)
    }

    pub fn unary(&mut self, a: Var, f: UnaryFn) -> Var {
        let val: Vec<f64> = self.value(a).iter().map(|x| f.apply(*x)).collect();
        self.push(Op::Unary { a: a.id, f }, val)
    }

    pub fn clamp_abs(&mut self, a: Var, bound: f64) -> Var {
        let val: Vec<f64> = self.value(a).iter().map(|x| x.clamp(-bound, bound)).collect();
        self.push(Op::ClampAbs { a: a.id, bound }, val)
    }

    pub fn clamp_min(&mut self, a: Var, lo: f64) -> Var {
        let val: Vec<f64> = self.value(a).iter().map(|x| x.max(lo)).collect();
        self.push(Op::ClampMin { a: a.id, lo }, val)
    }

    /// Keeps |x| ≥ lo while preserving sign; used to guard denominators.
    pub fn clamp_magnitude(&mut self, a: Var, lo: f64) -> Var {
        let val: Vec<f64> = self
            .value(a)
            .iter()
            .map(|x| if x.abs() >= lo { *x } else if *x < 0.0 { -lo } else { lo })
            .collect();
        self.push(Op::ClampMagnitude { a: a.id, lo }, val)
    }

    pub fn clamp_norm(&mut self, v: Var, max_norm: Var) -> Var {
        assert!(max_norm.is_scalar());
        let n = norm(self.value(v));
        let m = self.scalar(max_norm);
        let val = if n > m {
            crate::vecmath::scale(self.value(v), m / n)
        } else {
            self.value(v).to_vec()
        };
        self.push(Op::ClampNorm { v: v.id, max_norm: max_norm.id }, val)
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut val = Vec::with_capacity(parts.iter().map(|p| p.len).sum());
        for p in parts {
            val.extend_from_slice(self.value(*p));
        }
        self.push(Op::Concat(parts.iter().map(|p| p.id).collect()), val)
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        assert!(start + len <= a.len, "slice out of range");
        let val = self.value(a)[start..start + len].to_vec();
        self.push(Op::Slice { a: a.id, start }, val)
    }

    /// Numerically stable softmax over a vector node. The max shift is
    /// detached; softmax is shift-invariant so gradients are unaffected.
    pub fn softmax(&mut self, a: Var) -> Var {
        let m = self.value(a).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shifted = self.add_const(a, -m);
        let e = self.unary(shifted, UnaryFn::Exp);
        let s = self.sum(e);
        let inv = self.unary(s, UnaryFn::Recip);
        self.scale_by(e, inv)
    }

    /// Numerically stable log-sum-exp of a vector node (detached max shift).
    pub fn logsumexp(&mut self, a: Var) -> Var {
        let m = self.value(a).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shifted = self.add_const(a, -m);
        let e = self.unary(shifted, UnaryFn::Exp);
        let s = self.sum(e);
        let l = self.unary(s, UnaryFn::Ln);
        self.add_const(l, m)
    }

    /// Reverse sweep from a scalar loss; returns one adjoint per node.
    pub fn backward(&self, loss: Var) -> Result<Vec<Vec<f64>>> {
        if !loss.is_scalar() {
            return Err(Error::Gradient(format!(
                "backward seed must be scalar, got length {}",
                loss.len
            )));
        }
        let mut adj: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.val.len()]).collect();
        adj[loss.id][0] = 1.0;
        for id in (0..=loss.id).rev() {
            if adj[id].iter().all(|g| *g == 0.0) {
                continue;
            }
            let g = std::mem::take(&mut adj[id]);
            let node = &self.nodes[id];
            match &node.op {
                Op::Leaf { .. } | Op::Constant => {
                    // restored below; leaves keep their accumulated adjoint
                }
                Op::Add(a, b) => {
                    accumulate(&mut adj[*a], &g);
                    accumulate(&mut adj[*b], &g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut adj[*a], &g);
                    for (ga, gi) in adj[*b].iter_mut().zip(&g) {
                        *ga -= gi;
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[*a].val, &self.nodes[*b].val);
                    for i in 0..g.len() {
                        adj[*a][i] += g[i] * bv[i];
                    }
                    for i in 0..g.len() {
                        adj[*b][i] += g[i] * av[i];
                    }
                }
                Op::Div(a, b) => {
                    let bv = &self.nodes[*b].val;
                    let out = &node.val;
                    for i in 0..g.len() {
                        adj[*a][i] += g[i] / bv[i];
                    }
                    for i in 0..g.len() {
                        adj[*b][i] -= g[i] * out[i] / bv[i];
                    }
                }
                Op::Neg(a) => {
                    for (ga, gi) in adj[*a].iter_mut().zip(&g) {
                        *ga -= gi;
                    }
                }
                Op::AddConst(a) => accumulate(&mut adj[*a], &g),
                Op::MulConst(a, c) => {
                    for (ga, gi) in adj[*a].iter_mut().zip(&g) {
                        *ga += c * gi;
                    }
                }
                Op::ScaleBy { v, s } => {
                    let sv = self.nodes[*s].val[0];
                    let vv = &self.nodes[*v].val;
                    for i in 0..g.len() {
                        adj[*v][i] += g[i] * sv;
                    }
                    adj[*s][0] += dot(&g, vv);
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (&self.nodes[*a].val, &self.nodes[*b].val);
                    let gs = g[0];
                    for i in 0..av.len() {
                        adj[*a][i] += gs * bv[i];
                    }
                    for i in 0..bv.len() {
                        adj[*b][i] += gs * av[i];
                    }
                }
                Op::Sum(a) => {
                    let gs = g[0];
                    for ga in adj[*a].iter_mut() {
                        *ga += gs;
                    }
                }
                Op::Norm(a) => {
                    let av = &self.nodes[*a].val;
                    let n = node.val[0].max(crate::geometry::ZERO_EPS);
                    let gs = g[0];
                    for i in 0..av.len() {
                        adj[*a][i] += gs * av[i] / n;
                    }
                }
                Op::MatVec { m, x, rows, cols, transpose } => {
                    let mv = &self.nodes[*m].val;
                    let xv = &self.nodes[*x].val;
                    if !transpose {
                        // y = M x: dM[r,c] += g[r] x[c]; dx += Mᵀ g
                        for r in 0..*rows {
                            let gr = g[r];
                            if gr != 0.0 {
                                for c in 0..*cols {
                                    adj[*m][r * cols + c] += gr * xv[c];
                                }
                            }
                        }
                        let gx = crate::vecmath::matvec_t(mv, *rows, *cols, &g);
                        accumulate(&mut adj[*x], &gx);
                    } else {
                        // y = Mᵀ x: dM[r,c] += x[r] g[c]; dx += M g
                        for r in 0..*rows {
                            let xr = xv[r];
                            if xr != 0.0 {
                                for c in 0..*cols {
                                    adj[*m][r * cols + c] += xr * g[c];
                                }
                            }
                        }
                        let gx = crate::vecmath::matvec(mv, *rows, *cols, &g);
                        accumulate(&mut adj[*x], &gx);
                    }
                }
                Op::Unary { a, f } => {
                    let av = &self.nodes[*a].val;
                    for i in 0..g.len() {
                        adj[*a][i] += g[i] * f.derivative(av[i], node.val[i]);
                    }
                }
                Op::ClampAbs { a, bound } => {
                    let av = &self.nodes[*a].val;
                    for i in 0..g.len() {
                        if av[i].abs() < *bound {
                            adj[*a][i] += g[i];
                        }
                    }
                }
                Op::ClampMin { a, lo } => {
                    let av = &self.nodes[*a].val;
                    for i in 0..g.len() {
                        if av[i] > *lo {
                            adj[*a][i] += g[i];
                        }
                    }
                }
                Op::ClampMagnitude { a, lo } => {
                    let av = &self.nodes[*a].val;
                    for i in 0..g.len() {
                        if av[i].abs() > *lo {
                            adj[*a][i] += g[i];
                        }
                    }
                }
                Op::ClampNorm { v, max_norm } => {
                    let vv = &self.nodes[*v].val;
                    let m = self.nodes[*max_norm].val[0];
                    if norm(vv) <= m {
                        accumulate(&mut adj[*v], &g);
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let plen = self.nodes[*p].val.len();
                        for i in 0..plen {
                            adj[*p][i] += g[off + i];
                        }
                        off += plen;
                    }
                }
                Op::Slice { a, start } => {
                    for i in 0..g.len() {
                        adj[*a][start + i] += g[i];
                    }
                }
            }
            adj[id] = g;
        }
        Ok(adj)
    }

    /// Gradients of a scalar loss with respect to every named leaf.
    /// Leaves unreachable from the loss report zero gradients.
    pub fn gradients(&self, loss: Var) -> Result<HashMap<String, Vec<f64>>> {
        let adj = self.backward(loss)?;
        let mut out = HashMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Op::Leaf { name: Some(name) } = &node.op {
                out.insert(name.clone(), adj[id].clone());
            }
        }
        Ok(out)
    }
}

fn accumulate(acc: &mut [f64], g: &[f64]) {
    for (a, gi) in acc.iter_mut().zip(g) {
        *a += gi;
    }
}

/// Compares analytic gradients against central finite differences for every
/// parameter coordinate; returns the worst |g_a − g_n| / max(1, |g_n|).
///
/// `build` must construct the same scalar loss from any parameter values.
pub fn grad_check<F>(build: F, params: &ParamStore, eps: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &HashMap<String, Var>) -> Result<Var>,
{
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::invalid(format!("grad_check eps {eps} outside [1e-7, 1e-3]")));
    }
    let eval = |store: &ParamStore| -> Result<f64> {
        let mut tape = Tape::new();
        let bound = tape.bind(store);
        let loss = build(&mut tape, &bound)?;
        if !loss.is_scalar() {
            return Err(Error::Gradient("grad_check loss must be scalar".into()));
        }
        let v = tape.scalar(loss);
        if !v.is_finite() {
            return Err(Error::Gradient(format!("non-finite loss {v} in grad_check")));
        }
        Ok(v)
    };

    let mut tape = Tape::new();
    let bound = tape.bind(params);
    let loss = build(&mut tape, &bound)?;
    let analytic = tape.gradients(loss)?;

    let mut worst: f64 = 0.0;
    for (name, tensor) in params.iter() {
        let ga = analytic
            .get(name)
            .ok_or_else(|| Error::Gradient(format!("missing gradient for {name}")))?;
        for j in 0..tensor.data().len() {
            let mut plus = params.clone();
            plus.tensor_mut(name)?.data_mut()[j] += eps;
            let mut minus = params.clone();
            minus.tensor_mut(name)?.data_mut()[j] -= eps;
            let gn = (eval(&plus)? - eval(&minus)?) / (2.0 * eps);
            let err = (ga[j] - gn).abs() / gn.abs().max(1.0);
            if err > worst {
                worst = err;
            }
        }
    }
    Ok(worst)
}
