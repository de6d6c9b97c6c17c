use std::fmt;
use std::marker::PhantomData;

use ark_bls12_381::{Bls12_381, Fr, G1Projective, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::PrimeGroup;
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, SerializationError, Validate};

use super::prime::{add_mod, mul_mod, sub_mod};
use super::scalar::{ScalarRepr, TRANSPARENT_WIDTH};
use super::{AlgebraError, Domain, GroupParams, Scalar};

mod sealed {
    pub trait Sealed {}
    impl Sealed for super::G1 {}
    impl Sealed for super::G2 {}
    impl Sealed for super::Gt {}
}

/// One of the three prime-order groups of the bilinear setting.
pub trait GroupKind: sealed::Sealed + 'static {
    /// Curve backend representation.
    type Point: PrimeGroup<ScalarField = Fr> + CanonicalSerialize + CanonicalDeserialize;
    const NAME: &'static str;
    /// Compressed encoding width on the curve backend.
    const CURVE_WIDTH: usize;
}

/// Source group one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G1 {}
/// Source group two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G2 {}
/// Target group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gt {}

impl GroupKind for G1 {
    type Point = G1Projective;
    const NAME: &'static str = "G1";
    const CURVE_WIDTH: usize = 48;
}

impl GroupKind for G2 {
    type Point = G2Projective;
    const NAME: &'static str = "G2";
    const CURVE_WIDTH: usize = 96;
}

impl GroupKind for Gt {
    type Point = PairingOutput<Bls12_381>;
    const NAME: &'static str = "Gt";
    const CURVE_WIDTH: usize = 576;
}

/// An element of one of the groups. On the transparent backend the element
/// is stored as its discrete logarithm with respect to the group generator.
pub struct Element<C: GroupKind>(pub(crate) Repr<C>);

pub(crate) enum Repr<C: GroupKind> {
    Transparent { p: u64, dlog: u64, _group: PhantomData<C> },
    Curve(C::Point),
}

/// Element of source group one (client public keys, first ciphertext half).
pub type G1Elem = Element<G1>;
/// Element of source group two (target public key, re-encryption keys).
pub type G2Elem = Element<G2>;
/// Element of the target group (messages).
pub type GtElem = Element<Gt>;

impl<C: GroupKind> Element<C> {
    pub(crate) fn transparent(p: u64, dlog: u64) -> Self {
        Element(Repr::Transparent {
            p,
            dlog: dlog % p,
            _group: PhantomData,
        })
    }

    pub(crate) fn domain(&self) -> Domain {
        match self.0 {
            Repr::Transparent { p, .. } => Domain::Transparent(p),
            Repr::Curve(_) => Domain::Curve,
        }
    }

    pub fn generator(params: &GroupParams) -> Self {
        match params.domain {
            Domain::Transparent(p) => Self::transparent(p, 1),
            Domain::Curve => Element(Repr::Curve(C::Point::generator())),
        }
    }

    pub fn identity(params: &GroupParams) -> Self {
        match params.domain {
            Domain::Transparent(p) => Self::transparent(p, 0),
            Domain::Curve => Element(Repr::Curve(C::Point::zero())),
        }
    }

    pub fn is_identity(&self) -> bool {
        match &self.0 {
            Repr::Transparent { dlog, .. } => *dlog == 0,
            Repr::Curve(c) => c.is_zero(),
        }
    }

    /// The discrete logarithm relative to the generator. Only the
    /// transparent backend knows it.
    pub fn dlog(&self) -> Option<u64> {
        match self.0 {
            Repr::Transparent { dlog, .. } => Some(dlog),
            Repr::Curve(_) => None,
        }
    }

    /// Raises the element to the power `s`.
    pub fn exp(&self, s: &Scalar) -> Result<Self, AlgebraError> {
        match (&self.0, s.0) {
            (Repr::Transparent { p, dlog, .. }, ScalarRepr::Transparent { p: q, value })
                if *p == q =>
            {
                Ok(Self::transparent(*p, mul_mod(*dlog, value, *p)))
            }
            (Repr::Curve(c), ScalarRepr::Curve(v)) => Ok(Element(Repr::Curve(*c * v))),
            _ => Err(AlgebraError::ParamsMismatch),
        }
    }

    /// The group operation.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        match (&self.0, &other.0) {
            (Repr::Transparent { p, dlog: a, .. }, Repr::Transparent { p: q, dlog: b, .. })
                if p == q =>
            {
                Ok(Self::transparent(*p, add_mod(*a, *b, *p)))
            }
            (Repr::Curve(a), Repr::Curve(b)) => Ok(Element(Repr::Curve(*a + b))),
            _ => Err(AlgebraError::ParamsMismatch),
        }
    }

    pub fn inverse(&self) -> Self {
        match &self.0 {
            Repr::Transparent { p, dlog, .. } => Self::transparent(*p, sub_mod(0, *dlog, *p)),
            Repr::Curve(c) => Element(Repr::Curve(-*c)),
        }
    }

    /// `self · other⁻¹`
    pub fn div(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(&other.inverse())
    }

    /// Canonical fixed-width encoding: compressed points on the curve backend,
    /// the big-endian discrete log on the transparent backend.
    pub fn to_bytes(&self) -> Vec<u8> {
        match &self.0 {
            Repr::Transparent { dlog, .. } => dlog.to_be_bytes().to_vec(),
            Repr::Curve(c) => {
                let mut out = Vec::with_capacity(C::CURVE_WIDTH);
                c.serialize_compressed(&mut out)
                    .expect("serializing into a Vec cannot fail");
                out
            }
        }
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<Self, AlgebraError> {
        match params.domain {
            Domain::Transparent(p) => {
                let arr: [u8; TRANSPARENT_WIDTH] = bytes.try_into().map_err(|_| {
                    AlgebraError::MalformedEncoding(format!(
                        "{} element must be {TRANSPARENT_WIDTH} bytes, got {}",
                        C::NAME,
                        bytes.len()
                    ))
                })?;
                let dlog = u64::from_be_bytes(arr);
                if dlog >= p {
                    return Err(AlgebraError::MalformedEncoding(format!(
                        "{} exponent {dlog} is not below the group order {p}",
                        C::NAME
                    )));
                }
                Ok(Self::transparent(p, dlog))
            }
            Domain::Curve => {
                if bytes.len() != C::CURVE_WIDTH {
                    return Err(AlgebraError::MalformedEncoding(format!(
                        "{} element must be {} bytes, got {}",
                        C::NAME,
                        C::CURVE_WIDTH,
                        bytes.len()
                    )));
                }
                let c = C::Point::deserialize_with_mode(bytes, Compress::Yes, Validate::Yes).map_err(
                    |e| match e {
                        SerializationError::InvalidData => AlgebraError::NotOnCurve(C::NAME),
                        other => AlgebraError::MalformedEncoding(format!("{}: {other}", C::NAME)),
                    },
                )?;
                let elem = Element(Repr::Curve(c));
                if elem.to_bytes() != bytes {
                    return Err(AlgebraError::MalformedEncoding(format!(
                        "non-canonical {} encoding",
                        C::NAME
                    )));
                }
                Ok(elem)
            }
        }
    }
}

/// The bilinear map `e: G1 × G2 → Gt`.
pub fn pairing(a: &G1Elem, b: &G2Elem) -> Result<GtElem, AlgebraError> {
    match (&a.0, &b.0) {
        (Repr::Transparent { p, dlog: x, .. }, Repr::Transparent { p: q, dlog: y, .. })
            if p == q =>
        {
            Ok(GtElem::transparent(*p, mul_mod(*x, *y, *p)))
        }
        (Repr::Curve(x), Repr::Curve(y)) => Ok(Element(Repr::Curve(Bls12_381::pairing(*x, *y)))),
        _ => Err(AlgebraError::ParamsMismatch),
    }
}

impl<C: GroupKind> Clone for Element<C> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<C: GroupKind> Copy for Element<C> {}

impl<C: GroupKind> Clone for Repr<C> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<C: GroupKind> Copy for Repr<C> {}

impl<C: GroupKind> PartialEq for Element<C> {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Transparent { p, dlog: a, .. }, Repr::Transparent { p: q, dlog: b, .. }) => {
                p == q && a == b
            }
            (Repr::Curve(a), Repr::Curve(b)) => a == b,
            _ => false,
        }
    }
}

impl<C: GroupKind> Eq for Element<C> {}

impl<C: GroupKind> fmt::Debug for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Transparent { p, dlog, .. } => write!(f, "{}(g^{dlog} mod {p})", C::NAME),
            Repr::Curve(_) => {
                let bytes = self.to_bytes();
                write!(f, "{}(0x{}…)", C::NAME, hex::encode(&bytes[..8]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{setup_group, BackendId};

    fn p11() -> GroupParams {
        setup_group(0, BackendId::Transparent, Some(11)).unwrap()
    }

    #[test]
    fn exp_bookkeeping() {
        let params = p11();
        let s = |v| Scalar::from_u64(&params, v);
        let g = G1Elem::generator(&params).exp(&s(3)).unwrap();
        assert_eq!(g.exp(&s(2)).unwrap().dlog(), Some(6));
        assert_eq!(g.exp(&s(1)).unwrap(), g);
        assert!(g.exp(&s(0)).unwrap().is_identity());
    }

    #[test]
    fn target_group_products() {
        let params = p11();
        let z = |v| GtElem::generator(&params).exp(&Scalar::from_u64(&params, v)).unwrap();
        assert_eq!(z(8).mul(&z(1)).unwrap(), z(9));
        let id = GtElem::identity(&params);
        assert_eq!(z(5).mul(&id).unwrap(), z(5));
        assert_eq!(z(5).mul(&z(5).inverse()).unwrap(), id);
        assert_eq!(z(9).div(&z(2)).unwrap(), z(7));
    }

    #[test]
    fn pairing_examples() {
        let params = p11();
        let s = |v| Scalar::from_u64(&params, v);
        let a = params.g1.exp(&s(6)).unwrap();
        let b = params.g2.exp(&s(5)).unwrap();
        assert_eq!(pairing(&a, &b).unwrap().dlog(), Some(8));
        assert_eq!(pairing(&params.g1, &params.g2).unwrap(), params.z);
        assert!(pairing(&G1Elem::identity(&params), &b).unwrap().is_identity());
    }

    #[test]
    fn params_mismatch_is_reported() {
        let a = p11();
        let b = setup_group(0, BackendId::Transparent, Some(13)).unwrap();
        let c = setup_group(128, BackendId::Curve, None).unwrap();
        assert_eq!(a.z.mul(&b.z), Err(AlgebraError::ParamsMismatch));
        assert_eq!(a.z.mul(&c.z), Err(AlgebraError::ParamsMismatch));
        assert_eq!(
            a.g1.exp(&Scalar::one(&b)),
            Err(AlgebraError::ParamsMismatch)
        );
        assert_eq!(pairing(&a.g1, &c.g2), Err(AlgebraError::ParamsMismatch));
    }

    #[test]
    fn curve_identity_and_generator() {
        let params = setup_group(128, BackendId::Curve, None).unwrap();
        let s = Scalar::from_u64(&params, 12345);
        let x = params.g1.exp(&s).unwrap();
        assert_eq!(x.exp(&Scalar::one(&params)).unwrap(), x);
        assert!(x.exp(&Scalar::zero(&params)).unwrap().is_identity());
        assert!(pairing(&G1Elem::identity(&params), &params.g2)
            .unwrap()
            .is_identity());
        assert_eq!(params.g1.dlog(), None);
    }

    #[test]
    fn curve_encodings_reject_garbage() {
        let params = setup_group(128, BackendId::Curve, None).unwrap();
        assert_eq!(params.g1.to_bytes().len(), 48);
        assert_eq!(params.g2.to_bytes().len(), 96);
        assert_eq!(params.z.to_bytes().len(), 576);
        assert!(G1Elem::from_bytes(&params, &[0xff; 48]).is_err());
        assert!(G2Elem::from_bytes(&params, &[0x11; 96]).is_err());
        assert!(GtElem::from_bytes(&params, &[0x01; 576]).is_err());
        assert!(matches!(
            G1Elem::from_bytes(&params, &[0; 3]),
            Err(AlgebraError::MalformedEncoding(_))
        ));
        // x = 1 with the compression flag set is not on the curve
        let mut bogus = [0u8; 48];
        bogus[0] = 0x80;
        bogus[47] = 1;
        assert!(G1Elem::from_bytes(&params, &bogus).is_err());
    }

    #[test]
    fn transparent_encoding_rejects_out_of_range() {
        let params = p11();
        assert!(matches!(
            GtElem::from_bytes(&params, &[0xff; 8]),
            Err(AlgebraError::MalformedEncoding(_))
        ));
        let z7 = params.z.exp(&Scalar::from_u64(&params, 7)).unwrap();
        assert_eq!(z7.to_bytes(), vec![0, 0, 0, 0, 0, 0, 0, 7]);
    }
}
