use serde::{Deserialize, Serialize};

/// Largest exponent passed to `exp` before clamping.
pub const EXP_CLAMP: f64 = 700.0;

/// `exp(s)` with `s` clamped to `±EXP_CLAMP`; the flag reports clamping.
pub fn exp_clamped(s: f64) -> (f64, bool) {
    if s > EXP_CLAMP {
        (EXP_CLAMP.exp(), true)
    } else if s < -EXP_CLAMP {
        ((-EXP_CLAMP).exp(), true)
    } else {
        (s.exp(), false)
    }
}

/// Penalty `ψ` of an augmented Lagrangian, normalized so `ψ(0) = 0` and
/// `ψ'(0) = 1`, together with its convex conjugate `ψ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PenaltySpec {
    /// `ψ(s) = s + s²/2`, `ψ*(t) = (t − 1)²/2`.
    Quadratic,
    /// `ψ(s) = eˢ − 1`, `ψ*(t) = t(ln t − 1) + 1`.
    #[default]
    Exponential,
}

impl PenaltySpec {
    pub fn value(self, s: f64) -> f64 {
        match self {
            Self::Quadratic => s + 0.5 * s * s,
            Self::Exponential => s.exp_m1(),
        }
    }

    pub fn derivative(self, s: f64) -> f64 {
        match self {
            Self::Quadratic => 1.0 + s,
            Self::Exponential => s.exp(),
        }
    }

    pub fn second_derivative(self, s: f64) -> f64 {
        match self {
            Self::Quadratic => 1.0,
            Self::Exponential => s.exp(),
        }
    }

    /// `ψ*(t)`, `+∞` outside the domain.
    pub fn conjugate(self, t: f64) -> f64 {
        match self {
            Self::Quadratic => 0.5 * (t - 1.0) * (t - 1.0),
            Self::Exponential => {
                if t > 0.0 {
                    t * (t.ln() - 1.0) + 1.0
                } else if t == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `∇ψ*(t)`, the inverse of `∇ψ`.
    pub fn conjugate_derivative(self, t: f64) -> f64 {
        match self {
            Self::Quadratic => t - 1.0,
            Self::Exponential => t.ln(),
        }
    }

    pub fn conjugate_second_derivative(self, t: f64) -> f64 {
        match self {
            Self::Quadratic => 1.0,
            Self::Exponential => 1.0 / t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Golden-section search for sup_s { s t − ψ(s) } on [lo, hi].
    fn numeric_conjugate(p: PenaltySpec, t: f64) -> f64 {
        let phi = |s: f64| s * t - p.value(s);
        let (mut lo, mut hi) = (-60.0_f64, 60.0_f64);
        let g = (5.0_f64.sqrt() - 1.0) / 2.0;
        for _ in 0..300 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if phi(a) < phi(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        phi(0.5 * (lo + hi))
    }

    #[test]
    fn normalization_at_zero() {
        for p in [PenaltySpec::Quadratic, PenaltySpec::Exponential] {
            assert!(p.value(0.0).abs() <= 1e-12);
            assert!((p.derivative(0.0) - 1.0).abs() <= 1e-12);
            let h = 1e-6;
            let fd = (p.value(h) - p.value(-h)) / (2.0 * h);
            assert!((fd - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn conjugate_matches_numeric_supremum() {
        for p in [PenaltySpec::Quadratic, PenaltySpec::Exponential] {
            for i in 1..=100 {
                let t = 0.1 * i as f64;
                let err = (p.conjugate(t) - numeric_conjugate(p, t)).abs();
                assert!(err <= 1e-7, "{p:?} t={t} err={err:e}");
            }
        }
    }

    #[test]
    fn entropy_domain() {
        let p = PenaltySpec::Exponential;
        assert_eq!(p.conjugate(0.0), 1.0);
        assert_eq!(p.conjugate(-0.5), f64::INFINITY);
        assert!((p.conjugate(1.0)).abs() <= 1e-15);
    }

    #[test]
    fn inverse_gradient_identity() {
        for p in [PenaltySpec::Quadratic, PenaltySpec::Exponential] {
            for i in 0..=100 {
                let s = -5.0 + 0.1 * i as f64;
                let back = p.conjugate_derivative(p.derivative(s));
                assert!((back - s).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn exp_clamp_flags_overflow() {
        assert_eq!(exp_clamped(1.0), (1.0_f64.exp(), false));
        let (v, clipped) = exp_clamped(1e4);
        assert!(clipped && v.is_finite());
        let (v, clipped) = exp_clamped(-1e4);
        assert!(clipped && v > 0.0);
    }
}
