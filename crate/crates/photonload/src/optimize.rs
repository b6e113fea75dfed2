//! Golden-section search for unimodal scalar objectives.

/// Maximize a unimodal function on `[lo, hi]` to relative tolerance
/// `rel_tol` on the argument. Returns `(x_max, f(x_max))`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > rel_tol * (a.abs() + b.abs()) * 0.5 {
        if fc > fd {
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
    let fx = f(x);
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3).powi(2) + 2.0, 0.0, 10.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn handles_peak_at_boundary() {
        let (x, _) = golden_section_max(|x| -x, 1.0, 2.0, 1e-9);
        assert!((x - 1.0).abs() < 1e-6);
    }
}
