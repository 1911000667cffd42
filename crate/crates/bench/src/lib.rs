//! Benchmark inputs shared by the criterion targets.

use qtfa::{gen_paper_example, quaternion_embed, ComplexSignal, QuaternionSignal};

/// The two-hyperbolic-chirp example and its embedding.
pub fn hyperbolic() -> (ComplexSignal, QuaternionSignal) {
    let f = gen_paper_example("two_hyperbolic_chirps").expect("built-in example");
    let fp = quaternion_embed(&f);
    (f, fp)
}

/// A chirp-like quaternion signal of arbitrary length.
pub fn chirp(n: usize) -> QuaternionSignal {
    let dt = 1.0 / n as f64;
    let samples = (0..n)
        .map(|m| {
            let t = m as f64 * dt;
            let phase = 2.0 * std::f64::consts::PI * (40.0 * t + 0.1 * n as f64 * t * t);
            qtfa::Quaternion::new(0.8, 0.3, 0.0, -0.2) * qtfa::Quaternion::exp_axis(qtfa::Axis::J, phase)
        })
        .collect();
    QuaternionSignal::new(samples, dt).expect("positive dt")
}
