//! One-dimensional profiles with closed-form first and second derivatives.

/// Value with first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, d1: 0.0, d2: 0.0 };
    pub const ONE: Jet = Jet { v: 1.0, d1: 0.0, d2: 0.0 };

    /// Chain rule for `self(a * y + b)` differentiated in `y`.
    fn affine(self, a: f64) -> Jet {
        Jet { v: self.v, d1: self.d1 * a, d2: self.d2 * a * a }
    }
}

// Below this the exponential factors underflow anyway.
const FLAT: f64 = 1.0 / 700.0;

/// `e^{-1/z}` for `z > 0`, zero otherwise.
fn psi(z: f64) -> Jet {
    if z <= FLAT {
        return Jet::ZERO;
    }
    let v = (-1.0 / z).exp();
    let z2 = z * z;
    Jet { v, d1: v / z2, d2: v * (1.0 / (z2 * z2) - 2.0 / (z2 * z)) }
}

/// Smooth step: 0 for `z <= 0`, 1 for `z >= 1`, C-infinity in between.
pub fn smooth_step(z: f64) -> Jet {
    if z <= 0.0 {
        return Jet::ZERO;
    }
    if z >= 1.0 {
        return Jet::ONE;
    }
    let a = psi(z);
    let b0 = psi(1.0 - z);
    let b = Jet { v: b0.v, d1: -b0.d1, d2: b0.d2 };
    let d = Jet { v: a.v + b.v, d1: a.d1 + b.d1, d2: a.d2 + b.d2 };
    let num1 = a.d1 * d.v - a.v * d.d1;
    let v = a.v / d.v;
    let d1 = num1 / (d.v * d.v);
    let d2 = (a.d2 * d.v - a.v * d.d2) / (d.v * d.v) - 2.0 * d.d1 * num1 / (d.v * d.v * d.v);
    Jet { v, d1, d2 }
}

/// Even plateau: 1 on `|y| <= inner`, 0 on `|y| >= outer`.
pub fn plateau(y: f64, inner: f64, outer: f64) -> Jet {
    let width = outer - inner;
    let s = smooth_step((outer - y.abs()) / width);
    let sign = if y < 0.0 { 1.0 } else { -1.0 };
    s.affine(sign / width)
}

/// Mollifier `exp(-1/(1 - z^2))` on `|z| < 1`, zero outside.
pub fn mollifier(z: f64) -> Jet {
    let q = 1.0 - z * z;
    if q <= FLAT {
        return Jet::ZERO;
    }
    let v = (-1.0 / q).exp();
    let q2 = q * q;
    Jet { v, d1: -2.0 * z * v / q2, d2: v * (6.0 * z.powi(4) - 2.0) / (q2 * q2) }
}

/// Mollifier centred at `center` with half-width `radius`.
pub fn bump(y: f64, center: f64, radius: f64) -> Jet {
    mollifier((y - center) / radius).affine(1.0 / radius)
}

/// `1 + cos(k t)` on `|t| <= 2r/3` with `k = 3 pi / (2 r)`, zero outside.
/// C^{1,1}: value and slope vanish at the edge.
pub fn cosine_cap(t: f64, r: f64) -> Jet {
    if t.abs() > 2.0 * r / 3.0 {
        return Jet::ZERO;
    }
    let k = cap_frequency(r);
    let (s, c) = (k * t).sin_cos();
    Jet { v: 1.0 + c, d1: -k * s, d2: -k * k * c }
}

pub fn cap_frequency(r: f64) -> f64 {
    1.5 * std::f64::consts::PI / r
}

/// `cosine_cap'(t) / t`, continuous through `t = 0`.
pub fn cosine_cap_slope_over_t(t: f64, r: f64) -> f64 {
    if t.abs() > 2.0 * r / 3.0 {
        return 0.0;
    }
    let k = cap_frequency(r);
    let kt = k * t;
    let sinc = if kt.abs() < 1e-4 { 1.0 - kt * kt / 6.0 } else { kt.sin() / kt };
    -k * k * sinc
}
