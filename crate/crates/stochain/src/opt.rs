//! One-dimensional search primitives: golden-section minimization on a
//! bracket found by geometric expansion.

const INV_GOLD: f64 = 0.381_966_011_250_105_1; // 2 - phi

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. The interval is shrunk until its width is below
/// `tol` (absolute) or the iteration cap is hit; `f` is assumed unimodal on
/// the bracket.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    debug_assert!(b >= a);
    let mut x1 = a + INV_GOLD * (b - a);
    let mut x2 = b - INV_GOLD * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (b - a) > tol && iters < 300 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_GOLD * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_GOLD * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Expand geometrically from `start` until `f` stops decreasing or `cap` is
/// reached; returns the right bracket endpoint.
///
/// Suitable for quasiconvex objectives that eventually rise (or for concave
/// maximization via negation). The returned endpoint is `>= start` and
/// `<= cap`.
pub(crate) fn expand_right_while_decreasing(f: impl Fn(f64) -> f64, start: f64, cap: f64) -> f64 {
    let mut hi = start.min(cap);
    let mut f_hi = f(hi);
    loop {
        let next = (hi * 2.0).min(cap);
        if next <= hi {
            return hi;
        }
        let f_next = f(next);
        if f_next >= f_hi {
            return next; // past the minimum; bracket closed
        }
        hi = next;
        f_hi = f_next;
        if hi >= cap {
            return hi;
        }
    }
}
