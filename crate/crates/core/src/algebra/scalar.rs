use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ark_bls12_381::Fr;
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use rand::{Rng, RngCore};

use super::prime::{add_mod, mul_mod, pow_mod, sub_mod};
use super::{AlgebraError, Domain, GroupParams};

/// Width in bytes of an encoded transparent scalar or element.
pub const TRANSPARENT_WIDTH: usize = 8;
/// Width in bytes of an encoded curve scalar.
pub const CURVE_SCALAR_WIDTH: usize = 32;

/// An integer modulo the group order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar(pub(crate) ScalarRepr);

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum ScalarRepr {
    Transparent { p: u64, value: u64 },
    Curve(Fr),
}

impl Scalar {
    /// Reduces `v` modulo the group order.
    pub fn from_u64(params: &GroupParams, v: u64) -> Scalar {
        match params.domain {
            Domain::Transparent(p) => Scalar(ScalarRepr::Transparent { p, value: v % p }),
            Domain::Curve => Scalar(ScalarRepr::Curve(Fr::from(v))),
        }
    }

    pub fn zero(params: &GroupParams) -> Scalar {
        Scalar::from_u64(params, 0)
    }

    pub fn one(params: &GroupParams) -> Scalar {
        Scalar::from_u64(params, 1)
    }

    /// Uniform sample from `[1, p-1]`.
    pub fn random_nonzero<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> Scalar {
        match params.domain {
            Domain::Transparent(p) => Scalar(ScalarRepr::Transparent {
                p,
                value: rng.gen_range(1..p),
            }),
            Domain::Curve => loop {
                let v = Fr::rand(rng);
                if !v.is_zero() {
                    return Scalar(ScalarRepr::Curve(v));
                }
            },
        }
    }

    /// Uniform sample from `[0, p-1]`.
    pub fn random<R: RngCore + ?Sized>(params: &GroupParams, rng: &mut R) -> Scalar {
        match params.domain {
            Domain::Transparent(p) => Scalar(ScalarRepr::Transparent {
                p,
                value: rng.gen_range(0..p),
            }),
            Domain::Curve => Scalar(ScalarRepr::Curve(Fr::rand(rng))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.0 {
            ScalarRepr::Transparent { value, .. } => value == 0,
            ScalarRepr::Curve(v) => v.is_zero(),
        }
    }

    /// The integer value, when it fits in a `u64`. Always `Some` on the
    /// transparent backend.
    pub fn to_u64(&self) -> Option<u64> {
        match self.0 {
            ScalarRepr::Transparent { value, .. } => Some(value),
            ScalarRepr::Curve(v) => {
                let limbs = v.into_bigint().0;
                limbs[1..].iter().all(|&l| l == 0).then_some(limbs[0])
            }
        }
    }

    pub fn inverse(&self) -> Result<Scalar, AlgebraError> {
        match self.0 {
            ScalarRepr::Transparent { p, value } => {
                if value == 0 {
                    return Err(AlgebraError::ZeroInverse);
                }
                Ok(Scalar(ScalarRepr::Transparent {
                    p,
                    value: pow_mod(value, p - 2, p),
                }))
            }
            ScalarRepr::Curve(v) => v
                .inverse()
                .map(|inv| Scalar(ScalarRepr::Curve(inv)))
                .ok_or(AlgebraError::ZeroInverse),
        }
    }

    /// Fixed-width big-endian encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self.0 {
            ScalarRepr::Transparent { value, .. } => value.to_be_bytes().to_vec(),
            ScalarRepr::Curve(v) => v.into_bigint().to_bytes_be(),
        }
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Scalar, AlgebraError> {
        match params.domain {
            Domain::Transparent(p) => {
                let arr: [u8; TRANSPARENT_WIDTH] = bytes.try_into().map_err(|_| {
                    AlgebraError::MalformedEncoding(format!(
                        "scalar must be {TRANSPARENT_WIDTH} bytes, got {}",
                        bytes.len()
                    ))
                })?;
                let value = u64::from_be_bytes(arr);
                if value >= p {
                    return Err(AlgebraError::MalformedEncoding(format!(
                        "scalar {value} is not below the group order {p}"
                    )));
                }
                Ok(Scalar(ScalarRepr::Transparent { p, value }))
            }
            Domain::Curve => {
                if bytes.len() != CURVE_SCALAR_WIDTH {
                    return Err(AlgebraError::MalformedEncoding(format!(
                        "scalar must be {CURVE_SCALAR_WIDTH} bytes, got {}",
                        bytes.len()
                    )));
                }
                let v = Fr::from_be_bytes_mod_order(bytes);
                let s = Scalar(ScalarRepr::Curve(v));
                if s.to_bytes() != bytes {
                    return Err(AlgebraError::MalformedEncoding(
                        "scalar is not below the group order".into(),
                    ));
                }
                Ok(s)
            }
        }
    }

    fn binary(
        self,
        rhs: Scalar,
        small: fn(u64, u64, u64) -> u64,
        curve: fn(Fr, Fr) -> Fr,
        op: &str,
    ) -> Scalar {
        match (self.0, rhs.0) {
            (ScalarRepr::Transparent { p, value: a }, ScalarRepr::Transparent { p: q, value: b })
                if p == q =>
            {
                Scalar(ScalarRepr::Transparent {
                    p,
                    value: small(a, b, p),
                })
            }
            (ScalarRepr::Curve(a), ScalarRepr::Curve(b)) => Scalar(ScalarRepr::Curve(curve(a, b))),
            _ => panic!("scalar {op} across different group parameters"),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, add_mod, |a, b| a + b, "addition")
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, sub_mod, |a, b| a - b, "subtraction")
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, mul_mod, |a, b| a * b, "multiplication")
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self.0 {
            ScalarRepr::Transparent { p, value } => Scalar(ScalarRepr::Transparent {
                p,
                value: sub_mod(0, value, p),
            }),
            ScalarRepr::Curve(v) => Scalar(ScalarRepr::Curve(-v)),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ScalarRepr::Transparent { p, value } => write!(f, "Scalar({value} mod {p})"),
            ScalarRepr::Curve(_) => write!(f, "Scalar(0x{})", hex::encode(self.to_bytes())),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ScalarRepr::Transparent { value, .. } => write!(f, "{value}"),
            ScalarRepr::Curve(_) => write!(f, "0x{}", hex::encode(self.to_bytes())),
        }
    }
}
