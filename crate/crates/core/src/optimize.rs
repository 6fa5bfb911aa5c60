//! One-dimensional search primitives shared by the mode, modal-midpoint and
//! Bayes-act routines.

use std::cmp::Ordering;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximizer of `f` on `[a, b]`.
///
/// Converges to a local maximum; the caller is responsible for bracketing
/// a unimodal piece of `f`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
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
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Golden-section search for a minimizer of `f` on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> f64 {
    golden_max(|x| -f(x), a, b, xtol)
}

/// Result of bisecting on the sign of a slope function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignRoot {
    /// A single crossing from positive to negative slope.
    Crossing(f64),
    /// The slope vanishes on an interval wider than the tolerance.
    Plateau { lo: f64, hi: f64 },
    /// `slope(lo) > 0 > slope(hi)` did not hold.
    NotBracketed,
}

/// Locate a crossing of `slope` from `+` to `-` inside `[lo, hi]` by
/// bisection on its sign only.
///
/// Working with signs rather than values keeps the search meaningful where
/// the objective is flat to machine precision but its derivative still has a
/// definite sign.
pub fn bisect_sign<S: Fn(f64) -> Ordering>(slope: S, mut lo: f64, mut hi: f64, xtol: f64) -> SignRoot {
    if slope(lo) != Ordering::Greater || slope(hi) != Ordering::Less {
        return SignRoot::NotBracketed;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match slope(mid) {
            Ordering::Greater => lo = mid,
            Ordering::Less => hi = mid,
            Ordering::Equal => {
                let left = mid - xtol;
                let right = mid + xtol;
                let flat_left = left > lo && slope(left) == Ordering::Equal;
                let flat_right = right < hi && slope(right) == Ordering::Equal;
                if flat_left || flat_right {
                    return SignRoot::Plateau {
                        lo: zero_edge(&slope, lo, mid),
                        hi: zero_edge_right(&slope, mid, hi),
                    };
                }
                return SignRoot::Crossing(mid);
            }
        }
        if hi - lo <= f64::EPSILON * (lo.abs().max(hi.abs()).max(1e-300)) {
            break;
        }
    }
    SignRoot::Crossing(0.5 * (lo + hi))
}

// Leftmost point of the zero-slope run containing `zero`, given slope(pos) > 0.
fn zero_edge<S: Fn(f64) -> Ordering>(slope: &S, mut pos: f64, mut zero: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (pos + zero);
        if slope(mid) == Ordering::Equal {
            zero = mid;
        } else {
            pos = mid;
        }
    }
    zero
}

fn zero_edge_right<S: Fn(f64) -> Ordering>(slope: &S, mut zero: f64, mut neg: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (zero + neg);
        if slope(mid) == Ordering::Equal {
            zero = mid;
        } else {
            neg = mid;
        }
    }
    zero
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_min(|x| (x - 1.25).powi(2), -3.0, 4.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-8);
    }

    #[test]
    fn sign_bisection_is_exact_for_step_slopes() {
        let r = bisect_sign(|x: f64| 0.3f64.partial_cmp(&x).unwrap(), -1.0, 2.0, 1e-12);
        match r {
            SignRoot::Crossing(x) => assert!((x - 0.3).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plateau_detected() {
        let slope = |x: f64| {
            if x < -0.5 {
                Ordering::Greater
            } else if x > 0.5 {
                Ordering::Less
            } else {
                Ordering::Equal
            }
        };
        match bisect_sign(slope, -2.0, 2.0, 1e-9) {
            SignRoot::Plateau { lo, hi } => {
                assert!((lo + 0.5).abs() < 1e-9 && (hi - 0.5).abs() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbracketed() {
        assert_eq!(
            bisect_sign(|_| Ordering::Less, 0.0, 1.0, 1e-9),
            SignRoot::NotBracketed
        );
    }
}
