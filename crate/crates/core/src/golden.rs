//! One-dimensional golden-section search, shared by the hyperparameter
//! fitter and the acquisition optimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximize `f` over `[lo, hi]` with `iters` golden-section reductions.
///
/// Returns the best evaluated interior point and its value. Non-finite values
/// are treated as `-inf`. The bracket endpoints themselves are never probed.
pub fn maximize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let (mut best_x, mut best_f) = if fd > fc { (d, fd) } else { (c, fc) };
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
            if fc > best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
            if fd > best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let (x, v) = maximize(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 40);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v <= 0.0);
    }

    #[test]
    fn handles_kink() {
        let (x, _) = maximize(|x| -(x - 0.5f64).abs(), 0.0, 1.0, 30);
        assert!((x - 0.5).abs() < 1e-4);
    }

    #[test]
    fn non_finite_values_lose() {
        let (x, v) = maximize(|x| if x < 0.5 { f64::NAN } else { -x }, 0.0, 1.0, 30);
        assert!(x >= 0.5);
        assert!(v.is_finite());
    }
}
