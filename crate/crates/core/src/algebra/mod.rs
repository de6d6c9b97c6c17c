//! Bilinear-group arithmetic over two interchangeable backends.
//!
//! * [`BackendId::Curve`] is the BLS12-381 pairing (type 3, asymmetric).
//! * [`BackendId::Transparent`] is a toy group of prime order `p` whose
//!   elements are stored as their discrete logarithms. Exponentiation
//!   multiplies logs, the group operation adds them and the pairing
//!   multiplies the logs of its two arguments. It is useless for secrecy and
//!   exactly right as a test oracle: every relation the scheme relies on can
//!   be checked with integer arithmetic mod `p`.
//!
//! Both backends expose the same types, so everything above this module is
//! written once.

mod dlog;
mod element;
pub(crate) mod prime;
mod scalar;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use dlog::{bounded_dlog, MAX_DLOG_BOUND};
pub use element::{pairing, Element, G1Elem, G2Elem, GroupKind, GtElem, G1, G2, Gt};
pub use prime::is_prime;
pub use scalar::{Scalar, CURVE_SCALAR_WIDTH, TRANSPARENT_WIDTH};

/// Smallest prime accepted for the transparent backend.
pub const MIN_TRANSPARENT_PRIME: u64 = 11;

/// Highest security level the curve backend is rated for.
pub const CURVE_SECURITY_LEVEL: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("transparent modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("transparent modulus {0} is below the minimum of {MIN_TRANSPARENT_PRIME}")]
    ModulusTooSmall(u64),
    #[error("the transparent backend needs a prime modulus")]
    MissingModulus,
    #[error("curve backend cannot provide {requested}-bit security (max {CURVE_SECURITY_LEVEL})")]
    UnsupportedLevel { requested: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands belong to different group parameters")]
    ParamsMismatch,
    #[error("no exponent in [0, {bound}] matches the target")]
    NotFound { bound: u64 },
    #[error("invalid discrete-log bound {0}")]
    InvalidBound(u64),
    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),
    #[error("{0} encoding is not a valid group element")]
    NotOnCurve(&'static str),
}

/// Which group implementation backs a set of parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendId {
    Transparent,
    Curve,
}

impl BackendId {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendId::Transparent => "transparent",
            BackendId::Curve => "curve",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BackendId::Transparent => 0,
            BackendId::Curve => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<BackendId> {
        match code {
            0 => Some(BackendId::Transparent),
            1 => Some(BackendId::Curve),
            _ => None,
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transparent" => Ok(BackendId::Transparent),
            "curve" => Ok(BackendId::Curve),
            other => Err(format!("unknown backend `{other}` (expected transparent or curve)")),
        }
    }
}

/// Identifies the concrete group an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Domain {
    Transparent(u64),
    Curve,
}

/// Public parameters: the group order, both source-group generators and
/// `z = e(g1, g2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub security_level: u32,
    pub(crate) domain: Domain,
    pub g1: G1Elem,
    pub g2: G2Elem,
    pub z: GtElem,
}

impl GroupParams {
    pub fn backend_id(&self) -> BackendId {
        match self.domain {
            Domain::Transparent(_) => BackendId::Transparent,
            Domain::Curve => BackendId::Curve,
        }
    }

    /// The modulus of the transparent backend.
    pub fn transparent_prime(&self) -> Option<u64> {
        match self.domain {
            Domain::Transparent(p) => Some(p),
            Domain::Curve => None,
        }
    }

    /// Bit length of the group order `p`.
    pub fn order_bits(&self) -> u32 {
        match self.domain {
            Domain::Transparent(p) => 64 - p.leading_zeros(),
            Domain::Curve => {
                use ark_ff::PrimeField;
                ark_bls12_381::Fr::MODULUS_BIT_SIZE
            }
        }
    }

    /// Width of an encoded scalar.
    pub fn scalar_width(&self) -> usize {
        match self.domain {
            Domain::Transparent(_) => TRANSPARENT_WIDTH,
            Domain::Curve => CURVE_SCALAR_WIDTH,
        }
    }

    /// `g1^s`
    pub fn g1_pow(&self, s: &Scalar) -> Result<G1Elem, AlgebraError> {
        self.g1.exp(s)
    }

    /// `g2^s`
    pub fn g2_pow(&self, s: &Scalar) -> Result<G2Elem, AlgebraError> {
        self.g2.exp(s)
    }

    /// `z^s`
    pub fn z_pow(&self, s: &Scalar) -> Result<GtElem, AlgebraError> {
        self.z.exp(s)
    }

    /// `z^m` for a small integer `m`; the exponent encoding used for
    /// integer-valued messages.
    pub fn encode_integer(&self, m: u64) -> GtElem {
        self.z
            .exp(&Scalar::from_u64(self, m))
            .expect("scalar built from these params")
    }
}

/// Builds the public parameters for the requested backend.
///
/// The curve backend is BLS12-381, whose 255-bit prime order is rated for
/// 128-bit security; higher levels are refused. The transparent backend uses
/// `transparent_prime` as the group order with every generator at exponent 1,
/// so that `e(g1, g2) = z` reads `1 · 1 = 1`.
pub fn setup_group(
    security_level: u32,
    backend: BackendId,
    transparent_prime: Option<u64>,
) -> Result<GroupParams, AlgebraError> {
    let domain = match backend {
        BackendId::Transparent => {
            let p = transparent_prime.ok_or(AlgebraError::MissingModulus)?;
            if !is_prime(p) {
                return Err(AlgebraError::CompositeModulus(p));
            }
            if p < MIN_TRANSPARENT_PRIME {
                return Err(AlgebraError::ModulusTooSmall(p));
            }
            Domain::Transparent(p)
        }
        BackendId::Curve => {
            if security_level > CURVE_SECURITY_LEVEL {
                return Err(AlgebraError::UnsupportedLevel {
                    requested: security_level,
                });
            }
            Domain::Curve
        }
    };
    let mut params = GroupParams {
        security_level,
        domain,
        g1: G1Elem::transparent(1, 0),
        g2: G2Elem::transparent(1, 0),
        z: GtElem::transparent(1, 0),
    };
    params.g1 = G1Elem::generator(&params);
    params.g2 = G2Elem::generator(&params);
    params.z = pairing(&params.g1, &params.g2)?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_setup() {
        let params = setup_group(128, BackendId::Curve, None).unwrap();
        assert!(params.order_bits() >= 250);
        assert_eq!(pairing(&params.g1, &params.g2).unwrap(), params.z);
        assert!(!params.z.is_identity());
        assert_eq!(params.backend_id(), BackendId::Curve);
    }

    #[test]
    fn transparent_setup() {
        let params = setup_group(0, BackendId::Transparent, Some(11)).unwrap();
        assert_eq!(params.transparent_prime(), Some(11));
        assert_eq!(params.g1.dlog(), Some(1));
        assert_eq!(params.g2.dlog(), Some(1));
        assert_eq!(params.z.dlog(), Some(1));
    }

    #[test]
    fn setup_errors() {
        assert_eq!(
            setup_group(0, BackendId::Transparent, Some(12)),
            Err(AlgebraError::CompositeModulus(12))
        );
        assert_eq!(
            setup_group(0, BackendId::Transparent, Some(7)),
            Err(AlgebraError::ModulusTooSmall(7))
        );
        assert_eq!(
            setup_group(0, BackendId::Transparent, None),
            Err(AlgebraError::MissingModulus)
        );
        assert_eq!(
            setup_group(192, BackendId::Curve, None),
            Err(AlgebraError::UnsupportedLevel { requested: 192 })
        );
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [BackendId::Transparent, BackendId::Curve] {
            assert_eq!(b.as_str().parse::<BackendId>().unwrap(), b);
            assert_eq!(BackendId::from_code(b.code()), Some(b));
        }
        assert!("edwards".parse::<BackendId>().is_err());
    }
}
