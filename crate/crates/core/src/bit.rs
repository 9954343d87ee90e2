//! Binary label values used across labels, verdicts, and rewards.

use std::fmt;

use serde::de::{Deserializer, Error as DeError, Unexpected};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A 0/1 label value. Serializes as a bare JSON integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bit(u8);

impl Bit {
    pub const ZERO: Bit = Bit(0);
    pub const ONE: Bit = Bit(1);

    pub fn new(value: u8) -> Result<Self, BitDomainError> {
        match value {
            0 | 1 => Ok(Bit(value)),
            other => Err(BitDomainError(i64::from(other))),
        }
    }

    pub fn as_u8(self) -> u8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    pub fn is_one(self) -> bool {
        self.0 == 1
    }
}

impl From<bool> for Bit {
    fn from(value: bool) -> Self {
        if value {
            Bit::ONE
        } else {
            Bit::ZERO
        }
    }
}

impl TryFrom<i64> for Bit {
    type Error = BitDomainError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Bit::ZERO),
            1 => Ok(Bit::ONE),
            other => Err(BitDomainError(other)),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("value {0} is outside the bit domain {{0, 1}}")]
pub struct BitDomainError(pub i64);

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = i64::deserialize(deserializer)?;
        Bit::try_from(raw)
            .map_err(|_| D::Error::invalid_value(Unexpected::Signed(raw), &"0 or 1"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_only_zero_and_one() {
        assert_eq!(Bit::new(0).unwrap(), Bit::ZERO);
        assert_eq!(Bit::new(1).unwrap(), Bit::ONE);
        assert!(Bit::new(2).is_err());
        assert!(Bit::try_from(-1i64).is_err());
    }

    #[test]
    fn serde_round_trip_as_integer() {
        let json = serde_json::to_string(&Bit::ONE).unwrap();
        assert_eq!(json, "1");
        let back: Bit = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Bit::ONE);
        assert!(serde_json::from_str::<Bit>("2").is_err());
        assert!(serde_json::from_str::<Bit>("true").is_err());
    }
}
