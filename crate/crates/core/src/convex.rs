//! Convex functions with exact subgradient oracles, simple-set projections,
//! and the Polyak half-space step used by every constraint update.
//!
//! The function family is closed: affine, convex quadratic, shifted Euclidean
//! norm, pointwise max of members, and a lift composition that applies a
//! member to a leading coordinate block plus one linear coordinate. No user
//! callbacks, so subgradient bounds can be certified by sampling.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Movement tolerance for Dykstra projection onto intersections; tight
/// enough that the output is nonexpansive and idempotent to 1e-12.
const INTERSECTION_TOL: f64 = 1e-14;
const INTERSECTION_MAX_CYCLES: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    /// a'y + b
    Affine { a: Array1<f64>, b: f64 },
    /// 0.5 y'Py + a'y + b with P symmetric positive semidefinite
    Quadratic {
        p: Array2<f64>,
        a: Array1<f64>,
        b: f64,
    },
    /// ||y - center|| - radius
    NormShift { center: Array1<f64>, radius: f64 },
    /// max over branches; ties broken toward the lowest branch index
    Max(Vec<ConvexFunction>),
    /// inner applied to the first inner.dimension coordinates, plus an
    /// optional `coeff * y[coord]` term; this is how constraints on the
    /// x-block extend to the epigraph variable (x, t)
    Lifted {
        inner: Box<ConvexFunction>,
        coord: Option<(usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFunction {
    dimension: usize,
    form: Form,
}

impl ConvexFunction {
    pub fn affine(a: Array1<f64>, b: f64) -> Self {
        ConvexFunction {
            dimension: a.len(),
            form: Form::Affine { a, b },
        }
    }

    /// Constant function, encoded as affine with zero slope.
    pub fn constant(dimension: usize, b: f64) -> Self {
        ConvexFunction::affine(Array1::zeros(dimension), b)
    }

    pub fn quadratic(p: Array2<f64>, a: Array1<f64>, b: f64) -> Result<Self> {
        let n = a.len();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.nrows().max(p.ncols()),
            });
        }
        if !is_positive_semidefinite(&p) {
            return Err(Error::NotPositiveSemidefinite);
        }
        Ok(ConvexFunction {
            dimension: n,
            form: Form::Quadratic { p, a, b },
        })
    }

    pub fn norm_shift(center: Array1<f64>, radius: f64) -> Self {
        ConvexFunction {
            dimension: center.len(),
            form: Form::NormShift { center, radius },
        }
    }

    pub fn max_of(branches: Vec<ConvexFunction>) -> Result<Self> {
        let dim = branches.first().ok_or(Error::EmptyMax)?.dimension;
        for br in &branches {
            if br.dimension != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: br.dimension,
                });
            }
        }
        Ok(ConvexFunction {
            dimension: dim,
            form: Form::Max(branches),
        })
    }

    /// Extend `inner` to `dimension` coordinates: the value is
    /// `inner(y[..inner.dimension]) + coeff * y[coord]` when a linear
    /// coordinate is given.
    pub fn lifted(inner: ConvexFunction, dimension: usize, coord: Option<(usize, f64)>) -> Result<Self> {
        if inner.dimension > dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: inner.dimension,
            });
        }
        if let Some((idx, _)) = coord {
            if idx >= dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: idx,
                });
            }
        }
        Ok(ConvexFunction {
            dimension,
            form: Form::Lifted {
                inner: Box::new(inner),
                coord,
            },
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    fn check_dim(&self, y: &Array1<f64>) -> Result<()> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Exact function value.
    pub fn evaluate(&self, y: &Array1<f64>) -> Result<f64> {
        self.check_dim(y)?;
        Ok(self.value(y))
    }

    fn value(&self, y: &Array1<f64>) -> f64 {
        match &self.form {
            Form::Affine { a, b } => a.dot(y) + b,
            Form::Quadratic { p, a, b } => {
                let py = p.dot(y);
                0.5 * y.dot(&py) + a.dot(y) + b
            }
            Form::NormShift { center, radius } => {
                let mut sq = 0.0;
                for (yi, ci) in y.iter().zip(center.iter()) {
                    let r = yi - ci;
                    sq += r * r;
                }
                sq.sqrt() - radius
            }
            Form::Max(branches) => {
                let mut best = f64::NEG_INFINITY;
                for br in branches {
                    let v = br.value(y);
                    if v > best {
                        best = v;
                    }
                }
                best
            }
            Form::Lifted { inner, coord } => {
                let head = y.slice(ndarray::s![..inner.dimension]).to_owned();
                let mut v = inner.value(&head);
                if let Some((idx, coeff)) = coord {
                    v += coeff * y[*idx];
                }
                v
            }
        }
    }

    /// One element of the subdifferential at `y`.
    ///
    /// Deterministic selections: the active branch with the lowest index for
    /// pointwise max, and the first unit direction for a norm at its center.
    pub fn subgradient(&self, y: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_dim(y)?;
        Ok(self.subgrad(y))
    }

    fn subgrad(&self, y: &Array1<f64>) -> Array1<f64> {
        match &self.form {
            Form::Affine { a, .. } => a.clone(),
            Form::Quadratic { p, a, .. } => p.dot(y) + a,
            Form::NormShift { center, .. } => {
                let r = y - center;
                let norm = r.dot(&r).sqrt();
                if norm > 0.0 {
                    r / norm
                } else {
                    let mut d = Array1::zeros(self.dimension);
                    d[0] = 1.0;
                    d
                }
            }
            Form::Max(branches) => {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0;
                for (i, br) in branches.iter().enumerate() {
                    let v = br.value(y);
                    if v > best {
                        best = v;
                        best_idx = i;
                    }
                }
                branches[best_idx].subgrad(y)
            }
            Form::Lifted { inner, coord } => {
                let head = y.slice(ndarray::s![..inner.dimension]).to_owned();
                let g = inner.subgrad(&head);
                let mut out = Array1::zeros(self.dimension);
                out.slice_mut(ndarray::s![..inner.dimension]).assign(&g);
                if let Some((idx, coeff)) = coord {
                    out[*idx] += coeff;
                }
                out
            }
        }
    }

    /// Shift the function down by a constant: returns f - shift.
    pub fn shifted_down(&self, shift: f64) -> ConvexFunction {
        let form = match &self.form {
            Form::Affine { a, b } => Form::Affine {
                a: a.clone(),
                b: b - shift,
            },
            Form::Quadratic { p, a, b } => Form::Quadratic {
                p: p.clone(),
                a: a.clone(),
                b: b - shift,
            },
            Form::NormShift { center, radius } => Form::NormShift {
                center: center.clone(),
                radius: radius + shift,
            },
            Form::Max(branches) => {
                Form::Max(branches.iter().map(|br| br.shifted_down(shift)).collect())
            }
            Form::Lifted { inner, coord } => Form::Lifted {
                inner: Box::new(inner.shifted_down(shift)),
                coord: *coord,
            },
        };
        ConvexFunction {
            dimension: self.dimension,
            form,
        }
    }
}

/// One Polyak step against the constraint h(y) <= 0:
/// `y - beta * h(y)_+ / ||d||^2 * d` with `d` a subgradient at `y` when the
/// constraint is violated. When `h(y)_+ = 0` the direction is the given
/// nonzero fallback and the step is a no-op.
pub fn polyak_step(
    h: &ConvexFunction,
    y: &Array1<f64>,
    beta: f64,
    fallback: &Array1<f64>,
) -> Result<Array1<f64>> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if fallback.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroFallback);
    }
    h.check_dim(y)?;
    polyak_step_unchecked(h, y, beta)
}

/// Same update without the argument validation; shared by the engine so both
/// the specialized and the generic round use identical arithmetic.
pub(crate) fn polyak_step_unchecked(
    h: &ConvexFunction,
    y: &Array1<f64>,
    beta: f64,
) -> Result<Array1<f64>> {
    let val = h.value(y);
    if val <= 0.0 {
        return Ok(y.clone());
    }
    let d = h.subgrad(y);
    let denom = d.dot(&d);
    if denom == 0.0 {
        return Err(Error::ZeroSubgradient);
    }
    let coef = beta * val / denom;
    let mut out = y.clone();
    out.scaled_add(-coef, &d);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// lower <= y <= upper componentwise; bounds may be infinite
    Box {
        lower: Array1<f64>,
        upper: Array1<f64>,
    },
    /// ||y - center|| <= radius
    Ball { center: Array1<f64>, radius: f64 },
    /// a'y <= b
    HalfSpace { a: Array1<f64>, b: f64 },
    /// finite intersection, projected by Dykstra's alternating method
    Intersection(Vec<SimpleSet>),
}

/// A closed convex set with a cheap Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleSet {
    dimension: usize,
    kind: SetKind,
}

impl SimpleSet {
    pub fn box_set(lower: Array1<f64>, upper: Array1<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidBounds);
        }
        Ok(SimpleSet {
            dimension: lower.len(),
            kind: SetKind::Box { lower, upper },
        })
    }

    /// The whole space, as a box with infinite bounds.
    pub fn free(dimension: usize) -> Self {
        SimpleSet {
            dimension,
            kind: SetKind::Box {
                lower: Array1::from_elem(dimension, f64::NEG_INFINITY),
                upper: Array1::from_elem(dimension, f64::INFINITY),
            },
        }
    }

    pub fn ball(center: Array1<f64>, radius: f64) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::NegativeRadius(radius));
        }
        Ok(SimpleSet {
            dimension: center.len(),
            kind: SetKind::Ball { center, radius },
        })
    }

    pub fn half_space(a: Array1<f64>, b: f64) -> Result<Self> {
        if a.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroNormal);
        }
        Ok(SimpleSet {
            dimension: a.len(),
            kind: SetKind::HalfSpace { a, b },
        })
    }

    pub fn intersection(pieces: Vec<SimpleSet>) -> Result<Self> {
        let dim = pieces.first().ok_or(Error::EmptyIntersection)?.dimension;
        for s in &pieces {
            if s.dimension != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dimension,
                });
            }
        }
        Ok(SimpleSet {
            dimension: dim,
            kind: SetKind::Intersection(pieces),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    fn check_dim(&self, y: &Array1<f64>) -> Result<()> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the set. Closed form for box, ball and
    /// half-space; Dykstra's alternating projections for intersections.
    pub fn project(&self, y: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_dim(y)?;
        match &self.kind {
            SetKind::Intersection(pieces) => dykstra(pieces, y),
            _ => Ok(self.project_elementary(y)),
        }
    }

    fn project_elementary(&self, y: &Array1<f64>) -> Array1<f64> {
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut out = y.clone();
                for ((v, l), u) in out.iter_mut().zip(lower.iter()).zip(upper.iter()) {
                    *v = v.clamp(*l, *u);
                }
                out
            }
            SetKind::Ball { center, radius } => {
                let r = y - center;
                let norm = r.dot(&r).sqrt();
                if norm <= *radius {
                    y.clone()
                } else {
                    center + &(r * (*radius / norm))
                }
            }
            SetKind::HalfSpace { a, b } => {
                let excess = a.dot(y) - b;
                if excess <= 0.0 {
                    y.clone()
                } else {
                    let mut out = y.clone();
                    out.scaled_add(-excess / a.dot(a), a);
                    out
                }
            }
            SetKind::Intersection(_) => unreachable!("handled in project"),
        }
    }

    /// Membership within tolerance.
    pub fn contains(&self, y: &Array1<f64>, tol: f64) -> bool {
        self.violation(y) <= tol
    }

    /// Worst constraint violation; 0 inside the set.
    pub fn violation(&self, y: &Array1<f64>) -> f64 {
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut worst: f64 = 0.0;
                for ((v, l), u) in y.iter().zip(lower.iter()).zip(upper.iter()) {
                    worst = worst.max(l - v).max(v - u);
                }
                worst
            }
            SetKind::Ball { center, radius } => {
                let r = y - center;
                (r.dot(&r).sqrt() - radius).max(0.0)
            }
            SetKind::HalfSpace { a, b } => (a.dot(y) - b).max(0.0),
            SetKind::Intersection(pieces) => pieces
                .iter()
                .map(|s| s.violation(y))
                .fold(0.0, f64::max),
        }
    }

    /// Componentwise bounding interval, if every piece contributes one.
    /// Used by the grid oracle to bracket its search.
    pub fn bounds(&self) -> Option<(Array1<f64>, Array1<f64>)> {
        match &self.kind {
            SetKind::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            SetKind::Ball { center, radius } => Some((
                center.mapv(|c| c - radius),
                center.mapv(|c| c + radius),
            )),
            SetKind::HalfSpace { .. } => None,
            SetKind::Intersection(pieces) => {
                let mut lo = Array1::from_elem(self.dimension, f64::NEG_INFINITY);
                let mut hi = Array1::from_elem(self.dimension, f64::INFINITY);
                let mut any = false;
                for s in pieces {
                    if let Some((l, u)) = s.bounds() {
                        any = true;
                        for i in 0..self.dimension {
                            lo[i] = lo[i].max(l[i]);
                            hi[i] = hi[i].min(u[i]);
                        }
                    }
                }
                if any {
                    Some((lo, hi))
                } else {
                    None
                }
            }
        }
    }

    /// Cartesian product with R^extra: constraints keep acting on the
    /// leading block, the new trailing coordinates are unconstrained.
    pub fn cylinder_extend(&self, extra: usize) -> Result<SimpleSet> {
        let dim = self.dimension + extra;
        match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut lo = Array1::from_elem(dim, f64::NEG_INFINITY);
                let mut hi = Array1::from_elem(dim, f64::INFINITY);
                lo.slice_mut(ndarray::s![..self.dimension]).assign(lower);
                hi.slice_mut(ndarray::s![..self.dimension]).assign(upper);
                SimpleSet::box_set(lo, hi)
            }
            SetKind::HalfSpace { a, b } => {
                let mut a2 = Array1::zeros(dim);
                a2.slice_mut(ndarray::s![..self.dimension]).assign(a);
                SimpleSet::half_space(a2, *b)
            }
            SetKind::Intersection(pieces) => {
                let lifted = pieces
                    .iter()
                    .map(|s| s.cylinder_extend(extra))
                    .collect::<Result<Vec<_>>>()?;
                SimpleSet::intersection(lifted)
            }
            SetKind::Ball { .. } => Err(Error::UnsupportedLift(
                "a ball crossed with a free block is not one of the simple kinds".into(),
            )),
        }
    }
}

/// Dykstra's alternating projections: converges to the exact Euclidean
/// projection onto the intersection since every piece projects exactly.
fn dykstra(pieces: &[SimpleSet], y: &Array1<f64>) -> Result<Array1<f64>> {
    let mut x = y.clone();
    let mut corrections = vec![Array1::<f64>::zeros(y.len()); pieces.len()];
    for _cycle in 0..INTERSECTION_MAX_CYCLES {
        let before = x.clone();
        for (piece, corr) in pieces.iter().zip(corrections.iter_mut()) {
            let shifted = &x + &*corr;
            let projected = match &piece.kind {
                SetKind::Intersection(inner) => dykstra(inner, &shifted)?,
                _ => piece.project_elementary(&shifted),
            };
            *corr = &shifted - &projected;
            x = projected;
        }
        let moved = (&x - &before).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if moved <= INTERSECTION_TOL {
            return Ok(x);
        }
    }
    let residual = pieces.iter().map(|s| s.violation(&x)).fold(0.0, f64::max);
    Err(Error::ProjectionStalled {
        residual,
        iterations: INTERSECTION_MAX_CYCLES,
    })
}

/// Symmetric PSD test by cyclic Jacobi eigenvalue iteration; adequate for the
/// desk-scale matrices this crate handles.
fn is_positive_semidefinite(p: &Array2<f64>) -> bool {
    let n = p.nrows();
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(p[[i, j]].abs());
            if (p[[i, j]] - p[[j, i]]).abs() > 1e-9 * (1.0 + scale) {
                return false;
            }
        }
    }
    if scale == 0.0 {
        return true;
    }
    let mut a = p.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if a[[i, j]].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[[j, j]] - a[[i, i]]) / (2.0 * a[[i, j]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let aik = a[[i, k]];
                    let ajk = a[[j, k]];
                    a[[i, k]] = c * aik - s * ajk;
                    a[[j, k]] = s * aik + c * ajk;
                }
                for k in 0..n {
                    let aki = a[[k, i]];
                    let akj = a[[k, j]];
                    a[[k, i]] = c * aki - s * akj;
                    a[[k, j]] = s * aki + c * akj;
                }
            }
        }
    }
    let min_eig = (0..n).map(|i| a[[i, i]]).fold(f64::INFINITY, f64::min);
    min_eig >= -1e-9 * (1.0 + scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unit(dim: usize) -> Array1<f64> {
        let mut v = Array1::zeros(dim);
        v[0] = 1.0;
        v
    }

    #[test]
    fn affine_evaluation() {
        let f = ConvexFunction::affine(array![1.0, 0.0], 0.0);
        assert_eq!(f.evaluate(&array![2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(f.subgradient(&array![7.0, -1.0]).unwrap(), array![1.0, 0.0]);
    }

    #[test]
    fn quadratic_evaluation() {
        // 0.5 * 2 * y^2 = y^2
        let f = ConvexFunction::quadratic(array![[2.0]], array![0.0], 0.0).unwrap();
        assert_eq!(f.evaluate(&array![3.0]).unwrap(), 9.0);
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        let err = ConvexFunction::quadratic(array![[1.0, 0.0], [0.0, -1.0]], array![0.0, 0.0], 0.0);
        assert!(matches!(err, Err(Error::NotPositiveSemidefinite)));
        // semidefinite is fine
        assert!(ConvexFunction::quadratic(array![[1.0, 0.0], [0.0, 0.0]], array![0.0, 0.0], 0.0).is_ok());
    }

    #[test]
    fn max_of_two_affines() {
        // max{y1 - 1, -y1 - 1} at 0.5 -> -0.5
        let f = ConvexFunction::max_of(vec![
            ConvexFunction::affine(array![1.0], -1.0),
            ConvexFunction::affine(array![-1.0], -1.0),
        ])
        .unwrap();
        assert_eq!(f.evaluate(&array![0.5]).unwrap(), -0.5);
    }

    #[test]
    fn max_ties_break_low() {
        // max{y, 2y} at 0: both branches are 0, branch 0 wins
        let f = ConvexFunction::max_of(vec![
            ConvexFunction::affine(array![1.0], 0.0),
            ConvexFunction::affine(array![2.0], 0.0),
        ])
        .unwrap();
        assert_eq!(f.subgradient(&array![0.0]).unwrap(), array![1.0]);
    }

    #[test]
    fn norm_gradient_matches_finite_differences() {
        // ||y|| - 1 at (3, 4) -> (0.6, 0.8); cross-check with central differences
        let f = ConvexFunction::norm_shift(array![0.0, 0.0], 1.0);
        let y = array![3.0, 4.0];
        let g = f.subgradient(&y).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-12);
        assert!((g[1] - 0.8).abs() < 1e-12);
        let h = 1e-6;
        for i in 0..2 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let fd = (f.evaluate(&yp).unwrap() - f.evaluate(&ym).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "coord {i}: fd {fd} vs {})", g[i]);
        }
    }

    #[test]
    fn norm_at_center_uses_first_unit() {
        let f = ConvexFunction::norm_shift(array![1.0, 2.0], 0.5);
        let g = f.subgradient(&array![1.0, 2.0]).unwrap();
        assert_eq!(g, array![1.0, 0.0]);
    }

    #[test]
    fn lifted_keeps_block_structure() {
        // f(x) = x^2 on the first coordinate of (x, t1, t2), minus t1
        let inner = ConvexFunction::quadratic(array![[2.0]], array![0.0], 0.0).unwrap();
        let f = ConvexFunction::lifted(inner, 3, Some((1, -1.0))).unwrap();
        let y = array![3.0, 4.0, 9.0];
        assert_eq!(f.evaluate(&y).unwrap(), 5.0);
        let g = f.subgradient(&y).unwrap();
        assert_eq!(g, array![6.0, -1.0, 0.0]);
    }

    #[test]
    fn polyak_step_exact_halfspace_when_beta_one() {
        // h(y) = y1: from (2, 3) with beta = 1 lands on (0, 3),
        // the closed-form projection onto {y1 <= 0}
        let h = ConvexFunction::affine(array![1.0, 0.0], 0.0);
        let out = polyak_step(&h, &array![2.0, 3.0], 1.0, &unit(2)).unwrap();
        assert!((out[0] - 0.0).abs() < 1e-15);
        assert!((out[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn polyak_step_noop_when_feasible() {
        let h = ConvexFunction::affine(array![1.0, 0.0], 0.0);
        let y = array![-1.0, 5.0];
        let out = polyak_step(&h, &y, 1.3, &unit(2)).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn polyak_step_half_beta() {
        let h = ConvexFunction::affine(array![1.0, 0.0], 0.0);
        let out = polyak_step(&h, &array![2.0, 3.0], 0.5, &unit(2)).unwrap();
        assert_eq!(out, array![1.0, 3.0]);
    }

    #[test]
    fn polyak_step_validates_arguments() {
        let h = ConvexFunction::affine(array![1.0], 0.0);
        assert!(matches!(
            polyak_step(&h, &array![1.0], 2.0, &unit(1)),
            Err(Error::BetaOutOfRange(_))
        ));
        assert!(matches!(
            polyak_step(&h, &array![1.0], 1.0, &Array1::zeros(1)),
            Err(Error::ZeroFallback)
        ));
    }

    #[test]
    fn polyak_step_rejects_unattainable_constraint() {
        // h(y) = y^2 + 1 > 0 everywhere; at its minimizer the subgradient is 0
        let h = ConvexFunction::quadratic(array![[2.0]], array![0.0], 1.0).unwrap();
        assert!(matches!(
            polyak_step(&h, &array![0.0], 1.0, &unit(1)),
            Err(Error::ZeroSubgradient)
        ));
    }

    #[test]
    fn box_projection_clamps() {
        let s = SimpleSet::box_set(array![-1.0, -1.0], array![1.0, 1.0]).unwrap();
        let out = s.project(&array![2.0, -3.0]).unwrap();
        assert_eq!(out, array![1.0, -1.0]);
    }

    #[test]
    fn ball_projection_scales_radially() {
        let s = SimpleSet::ball(array![0.0, 0.0], 1.0).unwrap();
        let out = s.project(&array![3.0, 4.0]).unwrap();
        assert!((out[0] - 0.6).abs() < 1e-15);
        assert!((out[1] - 0.8).abs() < 1e-15);
        assert!((out.dot(&out).sqrt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_points_are_fixed() {
        let sets = vec![
            SimpleSet::box_set(array![-1.0, -1.0], array![1.0, 1.0]).unwrap(),
            SimpleSet::ball(array![0.0, 0.0], 2.0).unwrap(),
            SimpleSet::half_space(array![1.0, 1.0], 5.0).unwrap(),
        ];
        let y = array![0.3, -0.4];
        for s in &sets {
            assert_eq!(s.project(&y).unwrap(), y);
        }
    }

    #[test]
    fn intersection_projection_matches_hand_value() {
        // box [0,1]^2 with half-space x + y <= 1, projecting (3, 3):
        // the nearest feasible point is (0.5, 0.5)
        let s = SimpleSet::intersection(vec![
            SimpleSet::box_set(array![0.0, 0.0], array![1.0, 1.0]).unwrap(),
            SimpleSet::half_space(array![1.0, 1.0], 1.0).unwrap(),
        ])
        .unwrap();
        let out = s.project(&array![3.0, 3.0]).unwrap();
        assert!((out[0] - 0.5).abs() < 1e-9);
        assert!((out[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn free_box_projection_is_identity() {
        let s = SimpleSet::free(3);
        let y = array![1e12, -4.0, 0.0];
        assert_eq!(s.project(&y).unwrap(), y);
    }

    #[test]
    fn cylinder_extension() {
        let x = SimpleSet::box_set(array![-1.0], array![1.0]).unwrap();
        let theta = x.cylinder_extend(2).unwrap();
        assert_eq!(theta.dimension(), 3);
        let out = theta.project(&array![5.0, 7.0, -9.0]).unwrap();
        assert_eq!(out, array![1.0, 7.0, -9.0]);
        let ball = SimpleSet::ball(array![0.0], 1.0).unwrap();
        assert!(matches!(
            ball.cylinder_extend(1),
            Err(Error::UnsupportedLift(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = ConvexFunction::affine(array![1.0, 2.0], 0.0);
        assert!(matches!(
            f.evaluate(&array![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let s = SimpleSet::free(2);
        assert!(matches!(
            s.project(&array![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
