//! Homomorphic threshold proxy re-encryption and the multiparty cloud
//! computation (MCC) protocol built on it.
//!
//! Clients encrypt their data under their own keys and park it in a cloud. A
//! trusted dealer later creates a target key whose inverse is Shamir-shared
//! among the clients; each client hands the cloud a re-encryption key, the
//! cloud moves every ciphertext under the target key, multiplies them
//! together and returns the product, which only all clients together can
//! decrypt.
//!
//! The crate is layered bottom-up:
//!
//! * [`algebra`]: pairing groups, with a transparent toy backend that doubles
//!   as a test oracle;
//! * [`shamir`]: sharing of the target key and Lagrange interpolation at zero;
//! * [`htpre`]: the encryption scheme itself;
//! * [`envelope`]: canonical byte and JSON encodings of keys and ciphertexts;
//! * [`protocol`]: the four-phase MCC protocol between dealer, clients and
//!   cloud.
//!
//! ```
//! use mcc_core::algebra::{setup_group, BackendId};
//! use mcc_core::{htpre, rng};
//!
//! let params = setup_group(0, BackendId::Transparent, Some(1_000_003)).unwrap();
//! let mut rng = rng::seeded(1);
//! let alice = htpre::keygen(&params, htpre::ClientId(1), &mut rng);
//! let m = params.encode_integer(42);
//! let ct = htpre::enc(&params, &m, &alice.public(), &mut rng).unwrap();
//! assert_eq!(htpre::dec(&params, &ct, &alice).unwrap(), m);
//! ```

pub mod algebra;
pub mod envelope;
pub mod htpre;
pub mod protocol;
pub mod rng;
pub mod shamir;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/sharing.md")]
    mod sharing {}
    #[doc = include_str!("../../../book/src/scheme.md")]
    mod scheme {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
}
