use std::fmt;

use serde::{Serialize, Serializer};

/// A real number or one of the two infinities.
///
/// Divergent integrals, the MGF outside its domain and the rate function
/// off its effective domain are reported as `PosInf` rather than as an
/// overflowed `f64`. The derived ordering places `NegInf < Finite(_) < PosInf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps IEEE infinities to the sentinels. NaN is kept as a finite NaN.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(x) => fmt::Display::fmt(x, f),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => serializer.serialize_str("inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinities_at_the_ends() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
    }

    #[test]
    fn round_trips_ieee_infinities() {
        assert_eq!(ExtReal::from_f64(f64::INFINITY), ExtReal::PosInf);
        assert_eq!(ExtReal::from_f64(f64::NEG_INFINITY), ExtReal::NegInf);
        assert_eq!(ExtReal::PosInf.to_f64(), f64::INFINITY);
        assert_eq!(ExtReal::from_f64(2.5).finite(), Some(2.5));
    }
}
