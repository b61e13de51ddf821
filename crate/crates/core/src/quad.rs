//! Small quadrature helpers for the closed-form-free integrals (polynomial
//! forcing weights, bump-profile norms, derivative windows).

/// Composite Simpson rule with `panels` subintervals (forced even).
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = panels.max(2) & !1usize;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson rule with panel doubling until the relative change drops below
/// `rel_tol` (or a hard panel cap is reached).
pub(crate) fn simpson_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut panels = 64usize;
    let mut prev = simpson(&f, a, b, panels);
    loop {
        panels *= 2;
        let next = simpson(&f, a, b, panels);
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) || panels >= (1 << 22) {
            return next;
        }
        prev = next;
    }
}
