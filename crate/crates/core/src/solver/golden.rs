//! Derivative-free one-dimensional minimization.

use crate::scalar::{lit, Real};

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Runs until the bracket is narrower than `tol_x` or `max_evals` function
/// evaluations have been spent. Returns `(x_min, f_min)`; on ties the smaller
/// coordinate wins.
pub fn golden_section_min<F: Real>(
    mut f: impl FnMut(F) -> F,
    mut a: F,
    mut b: F,
    tol_x: F,
    max_evals: usize,
) -> (F, F) {
    debug_assert!(a <= b);
    let resp = lit::<F>(2.0 - 1.618_033_988_749_895);

    let mut x1 = a + resp * (b - a);
    let mut x2 = b - resp * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2usize;

    while evals < max_evals && (b - a) > tol_x {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + resp * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - resp * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
