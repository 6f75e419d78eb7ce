//! Scalar root finding and maximisation used by the transfer-time searches.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns `None` if `f(lo)` and `f(hi)` have the same sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
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
    0.5 * (a + b)
}

/// Global maximiser of `f` on `[lo, hi]`: a uniform scan of `samples` points
/// locates the best bracket, golden-section search refines it.
pub fn scan_and_refine_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize, tol: f64) -> f64 {
    assert!(samples >= 3, "need at least three samples");
    let step = (hi - lo) / (samples - 1) as f64;
    let (best, _) = (0..samples)
        .map(|i| (i, f(lo + step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    golden_section_max(f, a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9).is_none());
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let x = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn scan_picks_global_peak() {
        let f = |x: f64| (x).sin() + 0.5 * (3.0 * x).sin();
        let x = scan_and_refine_max(f, 0.0, 6.0, 1000, 1e-12);
        // derivative cos x + 1.5 cos 3x vanishes at the peak
        assert!((x.cos() + 1.5 * (3.0 * x).cos()).abs() < 1e-6);
        let brute = (0..=600_000).map(|i| f(i as f64 * 1e-5)).fold(f64::NEG_INFINITY, f64::max);
        assert!(f(x) >= brute - 1e-12);
    }
}
