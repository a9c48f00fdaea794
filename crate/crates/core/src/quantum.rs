//! The four-state polarization alphabet and basis-dependent measurement.
//!
//! Intercept-resend attacks never leave this alphabet, so states are modelled
//! as discrete values rather than Hilbert-space vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result};
use crate::rng::RandomStream;

pub type Bit = bool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Rectilinear => Basis::Diagonal,
            Basis::Diagonal => Basis::Rectilinear,
        }
    }

    /// Draws `Rectilinear` with probability `p_rectilinear`.
    pub fn draw(p_rectilinear: f64, rng: &mut RandomStream) -> Basis {
        if rng.bernoulli(p_rectilinear) {
            Basis::Rectilinear
        } else {
            Basis::Diagonal
        }
    }

    pub(crate) fn symbol(self) -> char {
        match self {
            Basis::Rectilinear => '+',
            Basis::Diagonal => 'x',
        }
    }

    pub(crate) fn from_symbol(c: char) -> Option<Basis> {
        match c {
            '+' => Some(Basis::Rectilinear),
            'x' => Some(Basis::Diagonal),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Rectilinear => "rectilinear",
            Basis::Diagonal => "diagonal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Horizontal,
    Vertical,
    Diag45,
    Diag135,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [
        Polarization::Horizontal,
        Polarization::Vertical,
        Polarization::Diag45,
        Polarization::Diag135,
    ];

    pub fn basis(self) -> Basis {
        match self {
            Polarization::Horizontal | Polarization::Vertical => Basis::Rectilinear,
            Polarization::Diag45 | Polarization::Diag135 => Basis::Diagonal,
        }
    }

    /// Horizontal and 45° carry 0; vertical and 135° carry 1.
    pub fn bit(self) -> Bit {
        matches!(self, Polarization::Vertical | Polarization::Diag135)
    }

    /// The orthogonal state in the same basis.
    pub fn flipped(self) -> Polarization {
        encode(!self.bit(), self.basis())
    }
}

pub fn encode(bit: Bit, basis: Basis) -> Polarization {
    match (basis, bit) {
        (Basis::Rectilinear, false) => Polarization::Horizontal,
        (Basis::Rectilinear, true) => Polarization::Vertical,
        (Basis::Diagonal, false) => Polarization::Diag45,
        (Basis::Diagonal, true) => Polarization::Diag135,
    }
}

/// Measures `photon` along `basis`. A matched basis reads the bit exactly; a
/// mismatched one yields a fair coin and collapses the photon onto the
/// measured basis. No randomness is consumed in the matched case.
pub fn measure(photon: Polarization, basis: Basis, rng: &mut RandomStream) -> (Bit, Polarization) {
    if photon.basis() == basis {
        (photon.bit(), photon)
    } else {
        let outcome = rng.bit();
        (outcome, encode(outcome, basis))
    }
}

/// Flips the photon within its basis with probability `eta`.
pub fn apply_noise(photon: Polarization, eta: f64, rng: &mut RandomStream) -> Result<Polarization> {
    check_probability("eta", eta)?;
    Ok(if rng.bernoulli(eta) {
        photon.flipped()
    } else {
        photon
    })
}
