//! Deferred expression trees with a pattern-rewrite pass.
//!
//! An [`ExprNode`] describes a compound expression over matrices without
//! computing anything; nodes hold references to their operand matrices,
//! never copies. Before evaluation, a rewrite pass recognizes the compound
//! shapes that have fused kernels — the trace of a transpose-product and the
//! diagonal of a sum — and the evaluators dispatch those sites directly to
//! [`crate::kernels::trace_fused_atb`] and
//! [`crate::kernels::diagmat_fused_add`], skipping the intermediate
//! matrices. Everything else evaluates bottom-up with the eager kernels.

use crate::error::{Error, Result};
use crate::hybrid::SpMat;
use crate::instrument;
use crate::kernels::{
    diagmat_fused_add, scalar_mul, sp_add, sp_mul, trace, trace_fused_atb, transpose_csc,
};
use crate::storage::CscStorage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryOp {
    Transpose,
    ScalarMul(f64),
    DiagMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Mul,
}

/// A deferred expression. Leaves borrow their matrices; interior nodes own
/// their children.
#[derive(Debug, Clone)]
pub enum ExprNode<'a> {
    Leaf(&'a SpMat),
    Unary {
        op: UnaryOp,
        child: Box<ExprNode<'a>>,
    },
    Binary {
        op: BinaryOp,
        left: Box<ExprNode<'a>>,
        right: Box<ExprNode<'a>>,
    },
}

/// Structural equality: leaves compare by reference identity, interior nodes
/// by operator and children.
impl PartialEq for ExprNode<'_> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ExprNode::Leaf(a), ExprNode::Leaf(b)) => std::ptr::eq(*a, *b),
            (ExprNode::Unary { op: oa, child: ca }, ExprNode::Unary { op: ob, child: cb }) => {
                oa == ob && ca == cb
            }
            (
                ExprNode::Binary {
                    op: oa,
                    left: la,
                    right: ra,
                },
                ExprNode::Binary {
                    op: ob,
                    left: lb,
                    right: rb,
                },
            ) => oa == ob && la == lb && ra == rb,
            _ => false,
        }
    }
}

impl<'a> ExprNode<'a> {
    pub fn leaf(m: &'a SpMat) -> Self {
        ExprNode::Leaf(m)
    }

    pub fn transpose(self) -> Self {
        ExprNode::Unary {
            op: UnaryOp::Transpose,
            child: Box::new(self),
        }
    }

    pub fn scale(self, k: f64) -> Self {
        ExprNode::Unary {
            op: UnaryOp::ScalarMul(k),
            child: Box::new(self),
        }
    }

    pub fn diagmat(self) -> Self {
        ExprNode::Unary {
            op: UnaryOp::DiagMat,
            child: Box::new(self),
        }
    }
}

/// `a + b` builds a deferred sum node.
impl<'a> std::ops::Add for ExprNode<'a> {
    type Output = ExprNode<'a>;

    fn add(self, rhs: Self) -> Self::Output {
        ExprNode::Binary {
            op: BinaryOp::Add,
            left: Box::new(self),
            right: Box::new(rhs),
        }
    }
}

/// `a * b` builds a deferred product node.
impl<'a> std::ops::Mul for ExprNode<'a> {
    type Output = ExprNode<'a>;

    fn mul(self, rhs: Self) -> Self::Output {
        ExprNode::Binary {
            op: BinaryOp::Mul,
            left: Box::new(self),
            right: Box::new(rhs),
        }
    }
}

/// Computes the result shape of the tree, or a mismatch error naming the
/// offending node by its path from the root.
pub fn infer_shape(e: &ExprNode) -> Result<(usize, usize)> {
    fn go(e: &ExprNode, path: &str) -> Result<(usize, usize)> {
        match e {
            ExprNode::Leaf(m) => Ok(m.shape()),
            ExprNode::Unary { op, child } => {
                let (rows, cols) = go(child, &format!("{path}.child"))?;
                Ok(match op {
                    UnaryOp::Transpose => (cols, rows),
                    UnaryOp::ScalarMul(_) => (rows, cols),
                    UnaryOp::DiagMat => {
                        let d = rows.min(cols);
                        (d, d)
                    }
                })
            }
            ExprNode::Binary { op, left, right } => {
                let l = go(left, &format!("{path}.left"))?;
                let r = go(right, &format!("{path}.right"))?;
                match op {
                    BinaryOp::Add => {
                        if l != r {
                            return Err(Error::ExprShapeMismatch {
                                path: path.to_string(),
                                detail: format!(
                                    "add requires equal shapes, got {}x{} and {}x{}",
                                    l.0, l.1, r.0, r.1
                                ),
                            });
                        }
                        Ok(l)
                    }
                    BinaryOp::Mul => {
                        if l.1 != r.0 {
                            return Err(Error::ExprShapeMismatch {
                                path: path.to_string(),
                                detail: format!(
                                    "mul requires inner dimensions to agree, got {}x{} and {}x{}",
                                    l.0, l.1, r.0, r.1
                                ),
                            });
                        }
                        Ok((l.0, r.1))
                    }
                }
            }
        }
    }
    go(e, "root")
}

/// The evaluation context a tree is rewritten for: a plain matrix value, or
/// consumption by `trace` / `diagmat`, which unlock the fused patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Value,
    Trace,
    DiagMat,
}

/// A fusable site recognized by the rewriter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fusion {
    /// `trace(transpose(a) * b)` dispatched as per-column dot products.
    TraceTransposeMul,
    /// `diagmat(a + b)` dispatched as diagonal-only addition.
    DiagMatAdd,
}

/// Rewriter output: the simplified tree plus the fusion annotations found,
/// in top-down discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewritten<'a> {
    expr: ExprNode<'a>,
    annotations: Vec<Fusion>,
}

impl<'a> Rewritten<'a> {
    pub fn expr(&self) -> &ExprNode<'a> {
        &self.expr
    }

    pub fn into_expr(self) -> ExprNode<'a> {
        self.expr
    }

    pub fn annotations(&self) -> &[Fusion] {
        &self.annotations
    }
}

/// Single top-down rewrite pass: eliminates `transpose(transpose(x))`,
/// then annotates the fusable sites (`goal`-level trace-of-transpose-product
/// or diagmat-of-sum, plus any `diagmat(a + b)` nodes inside the tree).
/// Non-matching trees pass through unchanged, and the pass is idempotent.
pub fn rewrite<'a>(e: ExprNode<'a>, goal: Goal) -> Rewritten<'a> {
    let expr = simplify(e);
    let mut annotations = Vec::new();
    match (goal, &expr) {
        (
            Goal::Trace,
            ExprNode::Binary {
                op: BinaryOp::Mul,
                left,
                right: _,
            },
        ) => {
            if matches!(
                **left,
                ExprNode::Unary {
                    op: UnaryOp::Transpose,
                    ..
                }
            ) {
                annotations.push(Fusion::TraceTransposeMul);
            }
        }
        (
            Goal::DiagMat,
            ExprNode::Binary {
                op: BinaryOp::Add, ..
            },
        ) => {
            annotations.push(Fusion::DiagMatAdd);
        }
        _ => {}
    }
    collect_inner_fusions(&expr, &mut annotations);
    Rewritten { expr, annotations }
}

fn simplify(e: ExprNode) -> ExprNode {
    match e {
        ExprNode::Leaf(m) => ExprNode::Leaf(m),
        ExprNode::Unary {
            op: UnaryOp::Transpose,
            child,
        } => {
            let child = simplify(*child);
            if let ExprNode::Unary {
                op: UnaryOp::Transpose,
                child: inner,
            } = child
            {
                *inner
            } else {
                ExprNode::Unary {
                    op: UnaryOp::Transpose,
                    child: Box::new(child),
                }
            }
        }
        ExprNode::Unary { op, child } => ExprNode::Unary {
            op,
            child: Box::new(simplify(*child)),
        },
        ExprNode::Binary { op, left, right } => ExprNode::Binary {
            op,
            left: Box::new(simplify(*left)),
            right: Box::new(simplify(*right)),
        },
    }
}

fn collect_inner_fusions(e: &ExprNode, out: &mut Vec<Fusion>) {
    match e {
        ExprNode::Leaf(_) => {}
        ExprNode::Unary { op, child } => {
            if *op == UnaryOp::DiagMat
                && matches!(
                    **child,
                    ExprNode::Binary {
                        op: BinaryOp::Add,
                        ..
                    }
                )
            {
                out.push(Fusion::DiagMatAdd);
            }
            collect_inner_fusions(child, out);
        }
        ExprNode::Binary { left, right, .. } => {
            collect_inner_fusions(left, out);
            collect_inner_fusions(right, out);
        }
    }
}

/// Operand for a kernel call: a borrowed leaf matrix or an evaluated
/// intermediate.
enum Operand<'a> {
    Borrowed(&'a SpMat),
    Owned(SpMat),
}

impl std::ops::Deref for Operand<'_> {
    type Target = SpMat;

    fn deref(&self) -> &SpMat {
        match self {
            Operand::Borrowed(m) => m,
            Operand::Owned(m) => m,
        }
    }
}

fn eval_operand<'a>(e: &ExprNode<'a>, fuse: bool) -> Result<Operand<'a>> {
    match e {
        ExprNode::Leaf(m) => Ok(Operand::Borrowed(m)),
        _ => Ok(Operand::Owned(eval_node(e, fuse)?)),
    }
}

fn eval_node(e: &ExprNode, fuse: bool) -> Result<SpMat> {
    match e {
        ExprNode::Leaf(m) => Ok((*m).clone()),
        ExprNode::Unary { op, child } => match op {
            UnaryOp::Transpose => {
                let operand = eval_operand(child, fuse)?;
                Ok(transpose_csc(&operand))
            }
            UnaryOp::ScalarMul(k) => {
                let operand = eval_operand(child, fuse)?;
                Ok(scalar_mul(&operand, *k))
            }
            UnaryOp::DiagMat => {
                if fuse {
                    if let ExprNode::Binary {
                        op: BinaryOp::Add,
                        left,
                        right,
                    } = &**child
                    {
                        instrument::record_fused_dispatch();
                        let a = eval_operand(left, fuse)?;
                        let b = eval_operand(right, fuse)?;
                        return diagmat_fused_add(&a, &b);
                    }
                    if let ExprNode::Leaf(m) = &**child {
                        return Ok(diag_matrix_of(m));
                    }
                }
                Ok(diag_matrix_of(&eval_node(child, fuse)?))
            }
        },
        ExprNode::Binary { op, left, right } => {
            let l = eval_operand(left, fuse)?;
            let r = eval_operand(right, fuse)?;
            match op {
                BinaryOp::Add => sp_add(&l, &r),
                BinaryOp::Mul => sp_mul(&l, &r),
            }
        }
    }
}

/// Square diagonal matrix holding `m`'s main diagonal, built from element
/// lookups only.
fn diag_matrix_of(m: &SpMat) -> SpMat {
    let dim = m.n_rows().min(m.n_cols());
    let mut values = Vec::new();
    let mut rows = Vec::new();
    let mut col_offsets = vec![0usize; dim + 1];
    for i in 0..dim {
        let v = m.get(i, i).expect("diagonal position is in bounds");
        if v != 0.0 {
            values.push(v);
            rows.push(i);
        }
        col_offsets[i + 1] = values.len();
    }
    SpMat::from_csc(CscStorage::from_parts_unchecked(
        dim,
        dim,
        values,
        rows,
        col_offsets,
    ))
}

/// Evaluates the tree to a matrix, rewriting recognized compound patterns
/// into fused kernels first.
pub fn eval(e: &ExprNode) -> Result<SpMat> {
    infer_shape(e)?;
    let rewritten = rewrite(e.clone(), Goal::Value);
    eval_node(rewritten.expr(), true)
}

/// Fully eager evaluation with no rewriting; the forced-fallback path.
pub fn eval_unfused(e: &ExprNode) -> Result<SpMat> {
    infer_shape(e)?;
    eval_node(e, false)
}

/// Trace of the tree's value. The `transpose(a) * b` pattern dispatches to
/// the fused kernel without materializing any intermediate matrix; all other
/// trees evaluate and then sum the diagonal.
pub fn eval_trace(e: &ExprNode) -> Result<f64> {
    let (n_rows, n_cols) = infer_shape(e)?;
    if n_rows != n_cols {
        return Err(Error::NonSquareTrace { n_rows, n_cols });
    }
    let rewritten = rewrite(e.clone(), Goal::Trace);
    if rewritten.annotations().first() == Some(&Fusion::TraceTransposeMul) {
        if let ExprNode::Binary {
            op: BinaryOp::Mul,
            left,
            right,
        } = rewritten.expr()
        {
            if let ExprNode::Unary {
                op: UnaryOp::Transpose,
                child,
            } = &**left
            {
                instrument::record_fused_dispatch();
                let a = eval_operand(child, true)?;
                let b = eval_operand(right, true)?;
                return trace_fused_atb(&a, &b);
            }
        }
        unreachable!("TraceTransposeMul annotation implies the pattern");
    }
    let m = eval_node(rewritten.expr(), true)?;
    Ok(trace(&m))
}

/// Forced-fallback trace: evaluate eagerly, then sum the diagonal.
pub fn eval_trace_unfused(e: &ExprNode) -> Result<f64> {
    let (n_rows, n_cols) = infer_shape(e)?;
    if n_rows != n_cols {
        return Err(Error::NonSquareTrace { n_rows, n_cols });
    }
    let m = eval_node(e, false)?;
    Ok(trace(&m))
}

/// Diagonal matrix of the tree's value. A top-level sum dispatches to the
/// fused diagonal-only addition; a bare leaf reads its diagonal directly;
/// anything else evaluates and then extracts.
pub fn eval_diagmat(e: &ExprNode) -> Result<SpMat> {
    infer_shape(e)?;
    let rewritten = rewrite(e.clone(), Goal::DiagMat);
    match rewritten.expr() {
        ExprNode::Binary {
            op: BinaryOp::Add,
            left,
            right,
        } => {
            instrument::record_fused_dispatch();
            let a = eval_operand(left, true)?;
            let b = eval_operand(right, true)?;
            diagmat_fused_add(&a, &b)
        }
        ExprNode::Leaf(m) => Ok(diag_matrix_of(m)),
        other => {
            let m = eval_node(other, true)?;
            Ok(diag_matrix_of(&m))
        }
    }
}

/// Forced-fallback diagmat: evaluate eagerly, then extract the diagonal.
pub fn eval_diagmat_unfused(e: &ExprNode) -> Result<SpMat> {
    infer_shape(e)?;
    let m = eval_node(e, false)?;
    Ok(diag_matrix_of(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels;

    fn example_matrix() -> SpMat {
        SpMat::from_csc(
            CscStorage::from_parts(
                5,
                4,
                vec![9.0, 8.0, 7.0, 6.0, 5.0, 4.0],
                vec![1, 0, 3, 1, 2, 4],
                vec![0, 1, 3, 5, 6],
            )
            .unwrap(),
        )
    }

    #[test]
    fn infer_shape_rules() {
        let a = SpMat::new(5, 4);
        let b = SpMat::new(4, 7);
        assert_eq!(
            infer_shape(&ExprNode::leaf(&a).transpose()).unwrap(),
            (4, 5)
        );
        assert_eq!(
            infer_shape(&(ExprNode::leaf(&a) * ExprNode::leaf(&b))).unwrap(),
            (5, 7)
        );

        let c = SpMat::new(4, 5);
        let err = infer_shape(&(ExprNode::leaf(&a) + ExprNode::leaf(&c))).unwrap_err();
        match err {
            Error::ExprShapeMismatch { path, .. } => assert_eq!(path, "root"),
            other => panic!("unexpected error {other:?}"),
        }

        let nested = ExprNode::leaf(&a) * (ExprNode::leaf(&b) + ExprNode::leaf(&a));
        match infer_shape(&nested).unwrap_err() {
            Error::ExprShapeMismatch { path, .. } => assert_eq!(path, "root.right"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn eval_leaf_identity() {
        let a = example_matrix();
        assert_eq!(eval(&ExprNode::leaf(&a)).unwrap(), a);
    }

    #[test]
    fn eval_matches_manual_kernels() {
        let a = example_matrix();
        let b = kernels::scalar_mul(&a, 3.0);
        let tree = (ExprNode::leaf(&a) + ExprNode::leaf(&b)).scale(0.5);
        let via_expr = eval(&tree).unwrap();
        let manual = kernels::scalar_mul(&kernels::sp_add(&a, &b).unwrap(), 0.5);
        assert_eq!(via_expr, manual);
        assert_eq!(eval_unfused(&tree).unwrap(), manual);
    }

    #[test]
    fn eval_trace_fused_dispatch() {
        let a = example_matrix();
        let tree = ExprNode::leaf(&a).transpose() * ExprNode::leaf(&a);
        let before = instrument::fused_dispatches();
        let t = eval_trace(&tree).unwrap();
        assert_eq!(t, 271.0);
        assert_eq!(instrument::fused_dispatches(), before + 1);
        assert_eq!(eval_trace_unfused(&tree).unwrap(), 271.0);
    }

    #[test]
    fn eval_trace_fallbacks() {
        let eye = SpMat::speye(7, 7).unwrap();
        let before = instrument::fused_dispatches();
        assert_eq!(eval_trace(&ExprNode::leaf(&eye)).unwrap(), 7.0);
        assert_eq!(instrument::fused_dispatches(), before);

        // Product without a transpose stays on the fallback path.
        let a = SpMat::sprandu(6, 6, 0.4, 3).unwrap();
        let b = SpMat::sprandu(6, 6, 0.4, 4).unwrap();
        let tree = ExprNode::leaf(&a) * ExprNode::leaf(&b);
        let fused = eval_trace(&tree).unwrap();
        let unfused = eval_trace_unfused(&tree).unwrap();
        assert!((fused - unfused).abs() <= 1e-10 * fused.abs().max(unfused.abs()));
        assert_eq!(instrument::fused_dispatches(), before);

        let rect = ExprNode::leaf(&a).transpose();
        let wide = SpMat::new(6, 9);
        let bad = rect * ExprNode::leaf(&wide);
        assert!(matches!(
            eval_trace(&bad),
            Err(Error::NonSquareTrace { .. })
        ));
    }

    #[test]
    fn eval_diagmat_paths() {
        let a = SpMat::sprandu(8, 8, 0.3, 11).unwrap();
        let b = SpMat::sprandu(8, 8, 0.3, 12).unwrap();

        let sum_tree = ExprNode::leaf(&a) + ExprNode::leaf(&b);
        let before = instrument::fused_dispatches();
        let fused = eval_diagmat(&sum_tree).unwrap();
        assert_eq!(instrument::fused_dispatches(), before + 1);
        assert_eq!(fused, eval_diagmat_unfused(&sum_tree).unwrap());

        let eye = SpMat::speye(5, 5).unwrap();
        assert_eq!(eval_diagmat(&ExprNode::leaf(&eye)).unwrap(), eye);

        let mul_tree = ExprNode::leaf(&a) * ExprNode::leaf(&b);
        let via_fused_path = eval_diagmat(&mul_tree).unwrap();
        let via_fallback = eval_diagmat_unfused(&mul_tree).unwrap();
        assert_eq!(via_fused_path, via_fallback);
    }

    #[test]
    fn rewrite_annotations() {
        let a = example_matrix();
        let b = example_matrix();
        let tree = ExprNode::leaf(&a).transpose() * ExprNode::leaf(&b);

        let with_trace = rewrite(tree.clone(), Goal::Trace);
        assert_eq!(with_trace.annotations(), &[Fusion::TraceTransposeMul]);

        let without_context = rewrite(tree.clone(), Goal::Value);
        assert!(without_context.annotations().is_empty());

        // Idempotence: rewriting the rewritten tree changes nothing.
        let again = rewrite(with_trace.expr().clone(), Goal::Trace);
        assert_eq!(again, with_trace);
    }

    #[test]
    fn rewrite_eliminates_double_transpose() {
        let a = example_matrix();
        let tree = ExprNode::leaf(&a).transpose().transpose();
        let rewritten = rewrite(tree, Goal::Value);
        assert_eq!(*rewritten.expr(), ExprNode::leaf(&a));

        let triple = ExprNode::leaf(&a).transpose().transpose().transpose();
        let rewritten = rewrite(triple, Goal::Value);
        assert_eq!(*rewritten.expr(), ExprNode::leaf(&a).transpose());
    }

    #[test]
    fn rewrite_finds_inner_diagmat_sites() {
        let a = SpMat::speye(4, 4).unwrap();
        let b = SpMat::speye(4, 4).unwrap();
        let inner = (ExprNode::leaf(&a) + ExprNode::leaf(&b)).diagmat();
        let tree = inner * ExprNode::leaf(&a);
        let rewritten = rewrite(tree, Goal::Value);
        assert_eq!(rewritten.annotations(), &[Fusion::DiagMatAdd]);
    }

    #[test]
    fn eval_never_mutates_operands() {
        let a = SpMat::sprandu(10, 10, 0.2, 5).unwrap();
        let b = SpMat::sprandu(10, 10, 0.2, 6).unwrap();
        let a_before: Vec<_> = a.triplet_iter().collect();
        let b_before: Vec<_> = b.triplet_iter().collect();
        let tree = (ExprNode::leaf(&a) + ExprNode::leaf(&b)) * ExprNode::leaf(&a).transpose();
        let _ = eval(&tree).unwrap();
        let _ = eval_trace(&tree).unwrap();
        assert_eq!(a.triplet_iter().collect::<Vec<_>>(), a_before);
        assert_eq!(b.triplet_iter().collect::<Vec<_>>(), b_before);
    }
}
