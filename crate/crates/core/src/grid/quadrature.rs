//! One-dimensional rules and compensated summation.

/// Legendre polynomials `P_{n-1}(x)` and `P_n(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    if n == 0 {
        return (0.0, 1.0);
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Gauss-Radau rule on `[-1, 1]` with the right endpoint as a node.
///
/// Returns `(nodes, weights)` in increasing node order. Exact for
/// polynomials up to degree `2n - 2`. The interior nodes are the roots of
/// `P_{n-1} - P_n`, found by Newton iteration from Chebyshev-Radau guesses.
pub fn right_radau(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Radau rule needs at least one node");
    if n == 1 {
        return (vec![1.0], vec![2.0]);
    }
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in (1..n).rev() {
        let mut x = (2.0 * std::f64::consts::PI * i as f64 / (2.0 * nf - 1.0)).cos();
        for _ in 0..100 {
            let (pm, p) = legendre_pair(n, x);
            let q = pm - p;
            // Derivatives from (x^2 - 1) P_k' = k (x P_k - P_{k-1}).
            let (pmm, _) = legendre_pair(n - 1, x);
            let dp = nf * (x * p - pm) / (x * x - 1.0);
            let dpm = (nf - 1.0) * (x * pm - pmm) / (x * x - 1.0);
            let step = q / (dpm - dp);
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (pm, _) = legendre_pair(n, x);
        nodes.push(x);
        weights.push((1.0 + x) / (nf * nf * pm * pm));
    }
    nodes.push(1.0);
    weights.push(2.0 / (nf * nf));
    (nodes, weights)
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes in increasing order. Exact for
/// polynomials up to degree `2n - 1`; neither endpoint is a node.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one node");
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (pm, p) = legendre_pair(n, x);
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Neumaier-compensated sum, accumulated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_to_degree_2n_minus_1() {
        for n in 1..=16 {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]) && x[0] > -1.0 && x[n - 1] < 1.0);
            for k in 0..2 * n {
                let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn radau_weights_sum_to_interval_length() {
        for n in 1..=20 {
            let (x, w) = right_radau(n);
            assert_eq!(x.len(), n);
            assert!((compensated_sum(w.iter().copied()) - 2.0).abs() < 1e-13, "n = {n}");
            assert!(w.iter().all(|&wi| wi > 0.0));
            assert_eq!(*x.last().unwrap(), 1.0);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn radau_is_exact_to_degree_2n_minus_2() {
        for n in 2..=12 {
            let (x, w) = right_radau(n);
            for deg in 0..=(2 * n - 2) {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert!((approx - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
    }
}
