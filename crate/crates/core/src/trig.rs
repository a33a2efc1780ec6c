//! Cancellation-free evaluation of the trigonometric combinations that
//! appear in the sphere's Jacobi fields and in the MTW closed form.

// unused whenever std is linked elsewhere in the build
#[allow(unused_imports)]
use num_traits::Float;

const SMALL_RATIO: f64 = 1e-4;
const SMALL_CANCEL: f64 = 0.2;

/// `sin r / r`
pub fn sinc(r: f64) -> f64 {
    if r.abs() < SMALL_RATIO {
        let r2 = r * r;
        1.0 - r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0 * (1.0 - r2 / 72.0)))
    } else {
        r.sin() / r
    }
}

/// `r cos r / sin r`
pub fn r_cot(r: f64) -> f64 {
    if r.abs() < SMALL_RATIO {
        let r2 = r * r;
        1.0 - r2 / 3.0 - r2 * r2 / 45.0 - 2.0 * r2 * r2 * r2 / 945.0 - r2 * r2 * r2 * r2 / 4725.0
    } else {
        r * r.cos() / r.sin()
    }
}

/// `sin r − r cos r`, which behaves like `r³/3` at the origin.
pub fn sin_minus_r_cos(r: f64) -> f64 {
    if r.abs() < SMALL_CANCEL {
        // Σ_{k≥1} (−1)^{k+1} 2k/(2k+1)! r^{2k+1}
        let r2 = r * r;
        let mut term = r; // r^{2k+1}/(2k+1)! at k = 0
        let mut acc = 0.0;
        for k in 1..12 {
            term *= r2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * (2 * k) as f64 * term;
        }
        acc
    } else {
        r.sin() - r * r.cos()
    }
}

/// `r − sin r cos r`, which behaves like `2r³/3` at the origin.
pub fn r_minus_sin_cos(r: f64) -> f64 {
    if r.abs() < SMALL_CANCEL {
        // Σ_{k≥1} (−1)^{k+1} 4^k/(2k+1)! r^{2k+1}
        let r2 = r * r;
        let mut term = r;
        let mut acc = 0.0;
        for k in 1..12 {
            term *= 4.0 * r2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * term;
        }
        acc
    } else {
        r - r.sin() * r.cos()
    }
}

/// `½ (r sin 2r + 3 cos 2r + 4r² − 3)`, which behaves like `r⁴/3` at the origin.
pub fn trig_positivity(r: f64) -> f64 {
    if r.abs() < 0.5 {
        // Σ_{m≥2} (−1)^m 2^{2m−1} (3 − m)/(2m)! r^{2m}
        let r2 = r * r;
        let mut pow = 1.0; // (2r)^{2m}/(2m)!
        let mut acc = 0.0;
        for m in 1..16 {
            pow *= 4.0 * r2 / ((2 * m - 1) as f64 * (2 * m) as f64);
            if m < 2 {
                continue;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * 0.5 * (3.0 - m as f64) * pow;
        }
        acc
    } else {
        0.5 * (r * (2.0 * r).sin() + 3.0 * (2.0 * r).cos() + 4.0 * r * r - 3.0)
    }
}
