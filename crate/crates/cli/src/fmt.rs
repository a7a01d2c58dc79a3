/// Shortest decimal that parses back to the same `f64`.
///
/// Plain notation in the usual range, scientific outside it, so tiny
/// p-values stay short.
pub fn float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
