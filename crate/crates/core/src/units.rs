//! Unit conversions used across the crate.

/// Standard gravity, in m/s². One gram-force is 1e-3 kg times this.
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Newtons per gram-force.
pub const NEWTONS_PER_GF: f64 = STANDARD_GRAVITY * 1e-3;

#[inline]
pub fn gf_to_newtons(gf: f64) -> f64 {
    gf * NEWTONS_PER_GF
}

#[inline]
pub fn newtons_to_gf(n: f64) -> f64 {
    n / NEWTONS_PER_GF
}

#[inline]
pub fn mm_to_m(mm: f64) -> f64 {
    mm * 1e-3
}

#[inline]
pub fn m_to_mm(m: f64) -> f64 {
    m * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_force_round_trip() {
        assert_eq!(gf_to_newtons(1000.0), 9.80665);
        assert!((newtons_to_gf(gf_to_newtons(250.0)) - 250.0).abs() < 1e-12);
    }
}
