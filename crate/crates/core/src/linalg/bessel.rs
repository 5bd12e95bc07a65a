use crate::scalar::Real;

/// `J_0(x), ..., J_{n_max}(x)` by Miller's downward recurrence, normalised
/// with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence<T: Real>(x: T, n_max: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    if x == T::zero() {
        out[0] = T::one();
        return out;
    }
    let ax = x.abs().as_f64();
    let start = {
        let s = n_max.max(ax as usize) + 30 + (2.0 * ax.sqrt()) as usize + (ax.cbrt() * 10.0) as usize;
        s + (s % 2)
    };
    let two = T::lit(2.0);
    let big = T::lit(1e100_f64.min(T::max_value().as_f64().sqrt()));
    let mut j_next = T::zero();
    let mut j_cur = T::lit(1e-30_f64.max(T::min_positive_value().as_f64().sqrt()));
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        let j_prev = two * T::from_usize_lossy(k) / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if k - 1 <= n_max {
            out[k - 1] = j_cur;
        }
        if (k - 1) % 2 == 0 {
            norm += if k - 1 == 0 { j_cur } else { two * j_cur };
        }
        if j_cur.abs() > big {
            j_cur /= big;
            j_next /= big;
            norm /= big;
            for v in out.iter_mut() {
                *v /= big;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let j = bessel_j_sequence(1.0f64, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        let j = bessel_j_sequence(10.0f64, 2);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-13);
    }

    #[test]
    fn negative_argument_parity() {
        let a = bessel_j_sequence(3.7f64, 6);
        let b = bessel_j_sequence(-3.7f64, 6);
        for (n, (x, y)) in a.iter().zip(&b).enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x - sign * y).abs() < 1e-14);
        }
    }

    #[test]
    fn large_argument_sum_rule() {
        // Σ J_n^2 (n from -inf..inf) = 1.
        let j = bessel_j_sequence(250.0f64, 400);
        let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
