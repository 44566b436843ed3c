//! Small quadrature helpers shared by the energy and time grids.

/// Composite trapezoid weights on arbitrary increasing nodes.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = nodes[k + 1] - nodes[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// Running trapezoid integral, `out[i] = ∫_{x_0}^{x_i} f`.
pub fn cumulative_trapezoid(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..nodes.len() {
        acc += 0.5 * (nodes[k] - nodes[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    out
}

/// Composite Simpson rule for `f` on `[a, b]` with `2 * half_panels` intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, half_panels: usize) -> f64 {
    let n = 2 * half_panels.max(1);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// True if `xs` is strictly increasing and finite.
pub fn strictly_increasing(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let nodes = [0.0, 0.1, 0.5, 2.0];
        let w = trapezoid_weights(&nodes);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert_eq!(w[0], 0.05);
    }

    #[test]
    fn cumulative_matches_total() {
        let nodes: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = nodes.iter().map(|x| 2.0 * x).collect();
        let c = cumulative_trapezoid(&nodes, &values);
        assert!((c[10] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - x, 0.0, 2.0, 3);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
