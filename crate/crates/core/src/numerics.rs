//! Shared scalar numerics: adaptive quadrature, bracketed minimization and
//! monotone root finding.

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.  Interval halving continues until the classic Richardson estimate
/// of the local error is below the locally apportioned tolerance.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if depth == 0 || err.abs() <= 15.0 * tol {
            left + right + err / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }

    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Minimizes `f` over `[lo, hi]` by a coarse grid scan followed by
/// golden-section refinement of the best bracket.  The grid scan guards
/// against shallow secondary dips; golden section then converges to relative
/// tolerance `rel_tol` on the argument.  Returns `(argmin, min)`.
pub fn grid_golden_min(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    rel_tol: f64,
) -> (f64, f64) {
    assert!(hi > lo && grid >= 2);
    let step = (hi - lo) / grid as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=grid {
        let v = f(lo + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    golden_section_min(f, a, b, rel_tol)
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
pub fn golden_section_min(
    f: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let scale = a.abs().max(b.abs()).max(1e-300);
    while (b - a) > rel_tol * scale {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Finds the root of a nondecreasing function `g` on `[lo, hi]` by bisection,
/// down to an interval of width `tol`.  Requires `g(lo) <= 0 <= g(hi)`; the
/// endpoints are returned directly when they already satisfy the equation.
pub fn bisect_nondecreasing(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let glo = g(lo);
    let ghi = g(hi);
    assert!(
        glo <= 0.0 && ghi >= 0.0,
        "root not bracketed: g({lo}) = {glo}, g({hi}) = {ghi}"
    );
    if glo == 0.0 {
        return lo;
    }
    if ghi == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // float resolution reached
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
