//! Composite Gauss-Legendre quadrature on a segment.
//!
//! An 8-point rule per panel integrates the trigonometric polynomials this
//! crate meets (degrees up to a few tens) to machine accuracy with a handful
//! of panels, which keeps the characteristic-cone integrals of the wave
//! representation cheap and certifiable against the diagonal inverse.

#[allow(unused_imports)]
use num_traits::Float;

/// Abscissae of the 8-point Gauss-Legendre rule on `[-1, 1]`, positive half.
const GL8_X: [f64; 4] = [
    0.18343464249564980,
    0.52553240991632899,
    0.79666647741362674,
    0.96028985649753623,
];

/// Weights paired with [`GL8_X`].
const GL8_W: [f64; 4] = [
    0.36268378337836198,
    0.31370664587788729,
    0.22238103445337447,
    0.10122853629037626,
];

/// Integrates `f` over `[a, b]` with `panels` composite 8-point panels.
///
/// `a > b` yields the signed integral; zero panels are clamped to one.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for i in 0..4 {
            let dx = half * GL8_X[i];
            s += GL8_W[i] * (f(mid + dx) + f(mid - dx));
        }
        total += s * half;
    }
    total
}

/// Panel count for a segment of length `len` at the given node density,
/// eight nodes per panel.
pub fn panels_for(len: f64, nodes_per_unit: usize) -> usize {
    let nodes = len.abs() * nodes_per_unit as f64 / 8.0;
    (nodes.ceil() as usize).max(1)
}
