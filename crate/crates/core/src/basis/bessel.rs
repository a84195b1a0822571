//! Spherical Bessel functions of the first kind and their positive roots.

use std::f64::consts::PI;

use super::BasisError;
use crate::ingest::{MAX_DEGREE, MAX_ROOTS};

/// `j_l(x)` for `l <= 16`, `x >= 0`.
pub fn spherical_bessel(l: usize, x: f64) -> Result<f64, BasisError> {
    if l > MAX_DEGREE {
        return Err(BasisError::DegreeOutOfRange(l));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(BasisError::ArgumentOutOfRange(x));
    }
    Ok(sph_jn(l, x))
}

/// Unchecked `j_l(x)`.
///
/// Small arguments use the power series, `x > l` the (stable) upward
/// recurrence from `j_0, j_1`, and the region in between Miller's downward
/// recurrence normalized against whichever of `j_0`, `j_1` is larger.
pub(crate) fn sph_jn(l: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        return series(l, x);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = (j0 - c) / x;
    if x > l as f64 {
        let (mut prev, mut cur) = (j0, j1);
        for n in 1..l {
            let next = (2 * n + 1) as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    miller(l, x, j0, j1)
}

fn series(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!!
    let mut lead = 1.0;
    for i in 1..=l {
        lead *= x / (2 * i + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= y / (k * (2 * l + 2 * k + 1)) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller(l: usize, x: f64, j0: f64, j1: f64) -> f64 {
    let start = 2 * l.max(x.ceil() as usize) + 40;
    let (mut above, mut cur) = (0.0f64, 1e-300f64);
    let mut at_l = 0.0;
    for n in (1..=start).rev() {
        // cur holds f_n, above holds f_{n+1}
        let below = (2 * n + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        if n - 1 == l {
            at_l = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            at_l *= 1e-250;
        }
    }
    // cur = f_0, above = f_1
    if j0.abs() >= j1.abs() {
        at_l * (j0 / cur)
    } else {
        at_l * (j1 / above)
    }
}

/// First `n_max` positive roots of `j_l` for every `l <= l_max`.
///
/// Order 0 is `n π`; higher orders are bracketed by consecutive roots of
/// order `l - 1` (the two families interlace) and bisected to full precision.
/// `roots[l][n-1]` is the `n`-th root of order `l`.
pub fn bessel_roots(l_max: usize, n_max: usize) -> Result<Vec<Vec<f64>>, BasisError> {
    if l_max > MAX_DEGREE {
        return Err(BasisError::DegreeOutOfRange(l_max));
    }
    if n_max == 0 || n_max > MAX_ROOTS {
        return Err(BasisError::RootCountOutOfRange(n_max));
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(l_max + 1);
    table.push((1..=n_max + l_max).map(|n| n as f64 * PI).collect());
    for l in 1..=l_max {
        let prev = &table[l - 1];
        let want = n_max + l_max - l;
        let roots = (0..want).map(|i| bisect(l, prev[i], prev[i + 1])).collect();
        table.push(roots);
    }
    for row in &mut table {
        row.truncate(n_max);
    }
    Ok(table)
}

fn bisect(l: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = sph_jn(l, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = sph_jn(l, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if sph_jn(l, lo).abs() <= sph_jn(l, hi).abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn closed_j1(x: f64) -> f64 {
        x.sin() / (x * x) - x.cos() / x
    }

    #[test]
    fn small_examples() {
        assert_eq!(spherical_bessel(0, 0.0).unwrap(), 1.0);
        assert_eq!(spherical_bessel(3, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(spherical_bessel(0, PI).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(spherical_bessel(1, PI).unwrap(), 1.0 / PI, epsilon = 1e-15);
        assert!(matches!(spherical_bessel(17, 1.0), Err(BasisError::DegreeOutOfRange(17))));
        assert!(matches!(spherical_bessel(1, -1.0), Err(BasisError::ArgumentOutOfRange(_))));
    }

    #[test]
    fn branches_agree_with_closed_forms() {
        // j2 = (3/x² - 1) sin x / x - 3 cos x / x²
        let j2 = |x: f64| (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
        for &x in &[0.5, 0.99, 1.0, 1.7, 2.0, 3.3, 8.0, 40.0] {
            assert_abs_diff_eq!(sph_jn(1, x), closed_j1(x), epsilon = 1e-14);
            assert_abs_diff_eq!(sph_jn(2, x), j2(x), epsilon = 1e-13);
        }
    }

    #[test]
    fn order_zero_roots_are_multiples_of_pi() {
        let t = bessel_roots(3, 10).unwrap();
        for n in 1..=10 {
            assert!((t[0][n - 1] - n as f64 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_vanish_and_interlace() {
        let t = bessel_roots(16, 64).unwrap();
        for (l, row) in t.iter().enumerate() {
            assert_eq!(row.len(), 64);
            for (n, &z) in row.iter().enumerate() {
                assert!(sph_jn(l, z).abs() < 1e-12, "j_{l}({z}) = {}", sph_jn(l, z));
                if n > 0 {
                    assert!(row[n - 1] < z);
                }
                if l > 0 && n + 1 < row.len() {
                    assert!(t[l - 1][n] < z && z < t[l - 1][n + 1]);
                }
            }
            if l > 0 {
                assert!(t[l - 1][0] < row[0]);
            }
        }
    }

    #[test]
    fn first_root_of_order_one() {
        // independent Newton solve on tan x = x, i.e. sin x - x cos x = 0
        let mut x: f64 = 4.5;
        for _ in 0..50 {
            let f = x.sin() - x * x.cos();
            let df = x * x.sin();
            x -= f / df;
        }
        let t = bessel_roots(1, 1).unwrap();
        assert_abs_diff_eq!(t[1][0], x, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1][0], 4.4934094579, epsilon = 1e-9);
    }

    #[test]
    fn table_limits() {
        assert!(bessel_roots(17, 3).is_err());
        assert!(bessel_roots(2, 65).is_err());
        assert!(bessel_roots(2, 0).is_err());
    }
}
