//! Compact string encodings for per-photon sequences in transcripts.
//!
//! Bases are written one character per photon: `+` rectilinear, `x`
//! diagonal. Eve's records use `.` for a passed photon, `h`/`v` for a
//! rectilinear measurement reading 0/1, and `p`/`m` for a diagonal
//! measurement reading 0/1.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::EveRecord;
use crate::quantum::Basis;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BasisString(pub Vec<Basis>);

impl Serialize for BasisString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.iter().map(|b| b.symbol()).collect::<String>())
    }
}

impl<'de> Deserialize<'de> for BasisString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .map(|c| {
                Basis::from_symbol(c)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad basis symbol {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BasisString)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EveTrace(pub Vec<EveRecord>);

impl Serialize for EveTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.iter().map(|r| r.symbol()).collect::<String>())
    }
}

impl<'de> Deserialize<'de> for EveTrace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .map(|c| {
                EveRecord::from_symbol(c)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad eve symbol {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(EveTrace)
    }
}
