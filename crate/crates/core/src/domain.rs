use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, RksError};

/// Box `[lo, hi]^d` in which kernel arguments live. Either bound may be
/// infinite; in JSON an infinite bound is written as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(RksError::invalid(format!(
                "empty or malformed domain [{lo}, {hi}]"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub const fn unit() -> Self {
        Domain { lo: 0.0, hi: 1.0 }
    }

    pub const fn real_line() -> Self {
        Domain {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .all(|&v| v.is_finite() && v >= self.lo && v <= self.hi)
    }

    pub fn check(&self, point: &[f64]) -> Result<()> {
        if self.contains(point) {
            Ok(())
        } else {
            Err(RksError::OutOfDomain {
                point: point.to_vec(),
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let bound = |v: f64| if v.is_finite() { Some(v) } else { None };
        [bound(self.lo), bound(self.hi)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[Option<f64>; 2]>::deserialize(d)?;
        Domain::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_uses_null_for_infinite_bounds() {
        let s = serde_json::to_string(&Domain::real_line()).unwrap();
        assert_eq!(s, "[null,null]");
        let d: Domain = serde_json::from_str("[0.0, null]").unwrap();
        assert_eq!(d.lo, 0.0);
        assert!(d.hi.is_infinite());
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(serde_json::from_str::<Domain>("[2, 1]").is_err());
    }

    #[test]
    fn containment_is_per_coordinate() {
        let d = Domain::unit();
        assert!(d.contains(&[0.0, 1.0, 0.5]));
        assert!(!d.contains(&[0.5, 1.5]));
        assert!(!d.contains(&[f64::NAN]));
        assert!(d.check(&[-0.1]).is_err());
    }
}
