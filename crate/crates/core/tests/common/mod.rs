//! Shared generators for the randomized suites.
#![allow(dead_code)] // each test binary uses a different subset

use ndarray::{Array1, Array2};
use rand::rngs::StdRng;
use rand::Rng;

use drfp::convex::ConvexFunction;

/// Random member of the convex family: affine, quadratic (PSD via A'A),
/// shifted norm, or (when depth allows) a pointwise max of those.
pub fn random_function(rng: &mut StdRng, dim: usize, depth: usize) -> ConvexFunction {
    let pick = if depth == 0 {
        rng.random_range(0..3)
    } else {
        rng.random_range(0..4)
    };
    match pick {
        0 => {
            let mut a = Array1::from_shape_fn(dim, |_| rng.random_range(-2.0..2.0));
            if a.iter().all(|v: &f64| v.abs() < 1e-3) {
                a[0] = 1.0;
            }
            ConvexFunction::affine(a, rng.random_range(-1.0..1.0))
        }
        1 => {
            let root = Array2::from_shape_fn((dim, dim), |_| rng.random_range(-1.0..1.0));
            let p = root.t().dot(&root);
            let a = Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
            ConvexFunction::quadratic(p, a, rng.random_range(-1.0..1.0)).unwrap()
        }
        2 => {
            let center = Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
            ConvexFunction::norm_shift(center, rng.random_range(-0.5..1.0))
        }
        _ => {
            let branches = (0..rng.random_range(2..4))
                .map(|_| random_function(rng, dim, depth - 1))
                .collect();
            ConvexFunction::max_of(branches).unwrap()
        }
    }
}

/// Like `random_function` but with slopes bounded away from zero and
/// strongly convex quadratics, so first-order solvers resolve the optimum
/// within a fixed budget; used where a numeric oracle must converge.
pub fn random_function_well_scaled(rng: &mut StdRng, dim: usize, depth: usize) -> ConvexFunction {
    let pick = if depth == 0 {
        rng.random_range(0..3)
    } else {
        rng.random_range(0..4)
    };
    match pick {
        0 => {
            let a = Array1::from_shape_fn(dim, |_| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * rng.random_range(0.25..2.0)
            });
            ConvexFunction::affine(a, rng.random_range(-1.0..1.0))
        }
        1 => {
            let root = Array2::from_shape_fn((dim, dim), |_| rng.random_range(-1.0..1.0));
            let mut p = root.t().dot(&root);
            for i in 0..dim {
                p[[i, i]] += 0.25;
            }
            let a = Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
            ConvexFunction::quadratic(p, a, rng.random_range(-1.0..1.0)).unwrap()
        }
        2 => {
            let center = Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
            ConvexFunction::norm_shift(center, rng.random_range(-0.5..1.0))
        }
        _ => {
            let branches = (0..rng.random_range(2..4))
                .map(|_| random_function_well_scaled(rng, dim, depth - 1))
                .collect();
            ConvexFunction::max_of(branches).unwrap()
        }
    }
}

/// A random function together with a point where it is nonpositive,
/// obtained by shifting the function down at that point.
pub fn random_function_with_feasible_point(
    rng: &mut StdRng,
    dim: usize,
    depth: usize,
) -> (ConvexFunction, Array1<f64>) {
    let z = Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
    let f = random_function(rng, dim, depth);
    let margin = rng.random_range(0.0..1.0);
    let shift = f.evaluate(&z).unwrap().max(0.0) + margin;
    (f.shifted_down(shift), z)
}

pub fn random_point(rng: &mut StdRng, dim: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| rng.random_range(-scale..scale))
}
