//! Small numerical helpers shared across modules.

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise (tree) summation. Error grows like `O(log n)` instead of `O(n)`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of a strided view `xs[offset], xs[offset + stride], ...`.
pub fn pairwise_sum_strided(xs: &[f64], offset: usize, stride: usize) -> f64 {
    let n = if xs.len() > offset { (xs.len() - offset).div_ceil(stride) } else { 0 };
    strided_rec(xs, offset, stride, n)
}

fn strided_rec(xs: &[f64], start: usize, stride: usize, count: usize) -> f64 {
    if count <= PAIRWISE_BLOCK {
        return (0..count).map(|k| xs[start + k * stride]).sum();
    }
    let half = count / 2;
    strided_rec(xs, start, stride, half) + strided_rec(xs, start + half * stride, stride, count - half)
}

/// Euclidean norm.
pub fn norm2(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two equally sized slices.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pairwise_sum(&xs), 10.5);
    }

    #[test]
    fn pairwise_beats_naive_on_long_input() {
        // 1 followed by many tiny values: naive summation drops all of them.
        let mut xs = vec![1e-16; 1 << 20];
        xs[0] = 1.0;
        let exact = 1.0 + ((1 << 20) - 1) as f64 * 1e-16;
        let naive: f64 = xs.iter().sum();
        let pw = pairwise_sum(&xs);
        assert!((pw - exact).abs() < (naive - exact).abs());
        assert!((pw - exact).abs() < 1e-14);
    }

    #[test]
    fn strided_sum_picks_column() {
        let xs = [1.0, 10.0, 2.0, 20.0, 3.0, 30.0];
        assert_eq!(pairwise_sum_strided(&xs, 0, 2), 6.0);
        assert_eq!(pairwise_sum_strided(&xs, 1, 2), 60.0);
        let long: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum_strided(&long, 1, 10), (0..100).map(|k| (1 + 10 * k) as f64).sum::<f64>());
    }
}
