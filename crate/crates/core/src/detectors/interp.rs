/// Vertex offset of the parabola through `(-1, y_left)`, `(0, y_center)`,
/// `(1, y_right)`. Returns 0 when the three points are collinear.
///
/// For a genuine local extremum the offset lies in `[-0.5, 0.5]`; the result
/// is clamped to that range.
pub fn parabolic_interpolate(y_left: f64, y_center: f64, y_right: f64) -> f64 {
    let denom = 2.0 * (y_left - 2.0 * y_center + y_right);
    if denom == 0.0 || !denom.is_finite() {
        return 0.0;
    }
    ((y_left - y_right) / denom).clamp(-0.5, 0.5)
}

/// Refines an integer index of `values` with [`parabolic_interpolate`].
/// Edges are returned unrefined.
pub(crate) fn refine(values: &[f64], index: usize) -> (f64, f64) {
    if index == 0 || index + 1 >= values.len() {
        return (index as f64, values[index]);
    }
    let (l, c, r) = (values[index - 1], values[index], values[index + 1]);
    let delta = parabolic_interpolate(l, c, r);
    // value of the fitted parabola at its vertex
    let peak = c - 0.25 * (l - r) * delta;
    (index as f64 + delta, peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_symmetric() {
        assert_eq!(parabolic_interpolate(1.0, 0.0, 1.0), 0.0);
        assert_eq!(parabolic_interpolate(2.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn test_asymmetric_minimum() {
        // y = 0.75x² - 0.25x - 1 passes through (-1, 0), (0, -1), (1, -0.5);
        // its vertex is at x = 0.25 / 1.5 = 1/6.
        let d = parabolic_interpolate(0.0, -1.0, -0.5);
        assert!((d - 1.0 / 6.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn test_degenerate() {
        assert_eq!(parabolic_interpolate(1.0, 1.0, 1.0), 0.0);
        assert_eq!(parabolic_interpolate(0.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn test_recovers_vertex_of_sampled_parabola() {
        let vertex = 10.3;
        let values: Vec<f64> = (0..20).map(|i| -(i as f64 - vertex).powi(2) + 5.0).collect();
        let (x, y) = refine(&values, 10);
        assert!((x - vertex).abs() < 1e-12);
        assert!((y - 5.0).abs() < 1e-12);
    }
}
