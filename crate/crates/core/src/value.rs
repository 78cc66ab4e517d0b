use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A nonnegative quantity that may be infinite.
///
/// `Huge` holds a finite value too large for an f64, stored through its
/// natural log. `Infinite` is a true +infinity (e.g. chi-square when the
/// integral diverges, or the energy of colliding particles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Huge { ln: f64 },
    Infinite,
}

impl Extended {
    /// exp(l), spilling into `Huge` past the f64 range.
    pub fn from_ln(l: f64) -> Self {
        if l == f64::INFINITY {
            Extended::Infinite
        } else if l < 709.0 {
            Extended::Finite(l.exp())
        } else {
            Extended::Huge { ln: l }
        }
    }

    /// expm1(l), spilling into `Huge` past the f64 range.
    pub fn from_ln_1p(l: f64) -> Self {
        if l == f64::INFINITY {
            Extended::Infinite
        } else if l < 709.0 {
            Extended::Finite(l.exp_m1())
        } else {
            Extended::Huge { ln: l }
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Natural log of the value (`+inf` for `Infinite`).
    pub fn ln(self) -> f64 {
        match self {
            Extended::Finite(v) => v.ln(),
            Extended::Huge { ln } => ln,
            Extended::Infinite => f64::INFINITY,
        }
    }

    /// Lossy conversion; `Huge` and `Infinite` both map to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            _ => f64::INFINITY,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Extended::Finite(_) => 0,
            Extended::Huge { .. } => 1,
            Extended::Infinite => 2,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Huge { ln: a }, Extended::Huge { ln: b }) => a.partial_cmp(b),
            _ => self.rank().partial_cmp(&other.rank()),
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Extended::Infinite
        } else {
            Extended::Finite(v)
        }
    }
}

impl fmt::Display for Extended {
    /// Finite values print as the shortest round-trip decimal. `Huge` values
    /// print in scientific notation with a 17-digit mantissa.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Extended::Finite(v) => write!(f, "{}", fmt_f64(v)),
            Extended::Huge { ln } => {
                let l10 = ln / std::f64::consts::LN_10;
                let e = l10.floor();
                let m = 10f64.powf(l10 - e);
                write!(f, "{m:.16}e{}", e as i64)
            }
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e-5, 1e16) so that extreme values stay short.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_ranks_kinds() {
        assert!(Extended::Finite(1e300) < Extended::Huge { ln: 800.0 });
        assert!(Extended::Huge { ln: 1e6 } < Extended::Infinite);
        assert!(Extended::Finite(1.0) < Extended::Finite(2.0));
    }

    #[test]
    fn huge_display_is_decimal() {
        let v = Extended::Huge { ln: 1000.5 * std::f64::consts::LN_10 };
        assert!(v.to_string().starts_with("3.16227766"));
        assert!(v.to_string().ends_with("e1000"));
        assert_eq!(Extended::Finite(0.1).to_string(), "0.1");
        assert_eq!(Extended::Infinite.to_string(), "inf");
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(2.5e20), "2.5e20");
        assert_eq!(fmt_f64(-3.0), "-3");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}
