use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A natural number extended with a greatest element `Omega`.
///
/// Used wherever a count may be "infinite" at full scale: class sizes
/// (colors), multiplicities, capped invariant entries. Only comparison
/// and capping are ever needed, no arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Fin(u32),
    Omega,
}

impl ExtNat {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            ExtNat::Fin(n) => Some(n),
            ExtNat::Omega => None,
        }
    }

    /// Collapse values at or above the threshold to `Omega`.
    pub fn capped(self, threshold: u32) -> ExtNat {
        match self {
            ExtNat::Fin(n) if n < threshold => ExtNat::Fin(n),
            _ => ExtNat::Omega,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtNat::*;
        match (self, other) {
            (Fin(a), Fin(b)) => a.cmp(b),
            (Fin(_), Omega) => std::cmp::Ordering::Less,
            (Omega, Fin(_)) => std::cmp::Ordering::Greater,
            (Omega, Omega) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNat::Fin(n) => s.serialize_u32(*n),
            ExtNat::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .filter(|&n| n <= u32::MAX as u64)
                .map(|n| ExtNat::Fin(n as u32))
                .ok_or_else(|| D::Error::custom("expected a small nonnegative integer")),
            serde_json::Value::String(s) if s == "omega" => Ok(ExtNat::Omega),
            _ => Err(D::Error::custom("expected an integer or \"omega\"")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_is_greatest() {
        assert!(ExtNat::Fin(u32::MAX) < ExtNat::Omega);
        assert!(ExtNat::Fin(0) < ExtNat::Fin(1));
    }

    #[test]
    fn capping() {
        assert_eq!(ExtNat::Fin(4).capped(5), ExtNat::Fin(4));
        assert_eq!(ExtNat::Fin(5).capped(5), ExtNat::Omega);
        assert_eq!(ExtNat::Omega.capped(5), ExtNat::Omega);
    }

    #[test]
    fn json_round_trip() {
        let v: ExtNat = serde_json::from_str("\"omega\"").unwrap();
        assert_eq!(v, ExtNat::Omega);
        let v: ExtNat = serde_json::from_str("7").unwrap();
        assert_eq!(v, ExtNat::Fin(7));
        assert_eq!(serde_json::to_string(&ExtNat::Omega).unwrap(), "\"omega\"");
    }
}
