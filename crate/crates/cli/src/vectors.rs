//! Deterministic test vectors for the nine scheme algorithms.
//!
//! Every record carries all of its inputs, randomness included, so a
//! verifier re-executes it without any RNG. Values are lowercase hex of the
//! canonical scalar and element encodings; integers are 8-byte big-endian.

use std::collections::BTreeMap;

use mcc_core::algebra::{setup_group, BackendId, Element, GroupKind, GroupParams, Scalar};
use mcc_core::htpre::{self, Ciphertext, ClientId, KeyPair, PublicKey, ReEncCiphertext, ReEncryptionKey};
use mcc_core::shamir::SecretShare;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const VECTOR_VERSION: u32 = 1;

/// Algorithms every vector file covers.
pub const ALGORITHMS: [&str; 9] = [
    "setup",
    "keygen",
    "thkeygen",
    "proxykeygen",
    "enc",
    "proxyenc",
    "homeval",
    "dec",
    "thdec",
];

/// Random chains appended after the fixed worked example.
const RANDOM_CHAINS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("malformed vector file: {0}")]
    Malformed(String),
    #[error("record {index} ({algorithm}) diverges: {detail}")]
    Divergence {
        index: usize,
        algorithm: String,
        detail: String,
    },
    #[error("digest mismatch: file says {expected}, content hashes to {actual}")]
    DigestMismatch { expected: String, actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorHeader {
    pub version: u32,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorRecord {
    pub algorithm: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub header: VectorHeader,
    pub records: Vec<VectorRecord>,
    /// SHA-256 over the compact JSON of header and records.
    pub digest: String,
}

#[derive(Serialize)]
struct Signed<'a> {
    header: &'a VectorHeader,
    records: &'a [VectorRecord],
}

fn digest_of(header: &VectorHeader, records: &[VectorRecord]) -> String {
    let bytes = serde_json::to_vec(&Signed { header, records }).expect("vectors serialize");
    hex::encode(Sha256::digest(bytes))
}

impl VectorFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("vectors serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<VectorFile, VectorError> {
        serde_json::from_str(text).map_err(|e| VectorError::Malformed(e.to_string()))
    }

    pub fn params(&self) -> Result<GroupParams, VectorError> {
        let h = &self.header;
        if h.version != VECTOR_VERSION {
            return Err(VectorError::Malformed(format!("unsupported version {}", h.version)));
        }
        let backend: BackendId = h.backend.parse().map_err(VectorError::Malformed)?;
        if backend == BackendId::Curve && h.prime.is_some() {
            return Err(VectorError::Malformed("curve vectors carry no prime".into()));
        }
        setup_group(default_level(backend), backend, h.prime)
            .map_err(|e| VectorError::Malformed(e.to_string()))
    }
}

fn default_level(backend: BackendId) -> u32 {
    match backend {
        BackendId::Transparent => 0,
        BackendId::Curve => 128,
    }
}

type Fields = BTreeMap<String, String>;

struct Builder<'a> {
    params: &'a GroupParams,
    records: Vec<VectorRecord>,
}

impl Builder<'_> {
    /// Runs `algorithm` on `inputs` and stores the record.
    fn push(&mut self, algorithm: &str, inputs: Fields) -> Fields {
        let outputs = execute(self.params, algorithm, &inputs)
            .unwrap_or_else(|e| panic!("generating {algorithm}: {e}"));
        self.records.push(VectorRecord {
            algorithm: algorithm.to_string(),
            inputs,
            outputs: outputs.clone(),
        });
        outputs
    }
}

fn fields<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> Fields {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn scalar_hex(s: &Scalar) -> String {
    hex::encode(s.to_bytes())
}

fn elem_hex<C: GroupKind>(e: &Element<C>) -> String {
    hex::encode(e.to_bytes())
}

/// One chain through all nine algorithms with the given secrets.
fn chain(
    b: &mut Builder<'_>,
    alpha: Scalar,
    alpha0: Scalar,
    higher: &[Scalar],
    r: Scalar,
    m: Scalar,
    other: (Scalar, Scalar),
) {
    let p = b.params;
    let kg = b.push("keygen", fields([("alpha", scalar_hex(&alpha))]));
    let mut th_in = fields([("alpha0", scalar_hex(&alpha0))]);
    for (n, c) in higher.iter().enumerate() {
        th_in.insert(format!("b{}", n + 1), scalar_hex(c));
    }
    let th = b.push("thkeygen", th_in);
    let rk = b.push(
        "proxykeygen",
        fields([("alpha", scalar_hex(&alpha)), ("spk", th["spk"].clone())]),
    );
    let msg = p.z_pow(&m).expect("same params");
    let ct = b.push(
        "enc",
        fields([("pk", kg["pk"].clone()), ("m", elem_hex(&msg)), ("r", scalar_hex(&r))]),
    );
    b.push(
        "dec",
        fields([
            ("alpha", scalar_hex(&alpha)),
            ("c1", ct["c1"].clone()),
            ("c2", ct["c2"].clone()),
        ]),
    );
    let re = b.push(
        "proxyenc",
        fields([
            ("c1", ct["c1"].clone()),
            ("c2", ct["c2"].clone()),
            ("rk", rk["rk"].clone()),
        ]),
    );
    let mut td_in = fields([("c1", re["c1"].clone()), ("c2", re["c2"].clone())]);
    for i in 1..=higher.len() + 1 {
        let key = format!("share{i}");
        td_in.insert(key.clone(), th[&key].clone());
    }
    b.push("thdec", td_in.clone());
    // a second re-encrypted ciphertext built directly in the target group
    let (x, y) = other;
    let second = ReEncCiphertext {
        c1: p.z_pow(&x).expect("same params"),
        c2: p.z_pow(&y).expect("same params"),
    };
    let hv = b.push(
        "homeval",
        fields([
            ("in1.c1", re["c1"].clone()),
            ("in1.c2", re["c2"].clone()),
            ("in2.c1", elem_hex(&second.c1)),
            ("in2.c2", elem_hex(&second.c2)),
        ]),
    );
    td_in.insert("c1".into(), hv["c1"].clone());
    td_in.insert("c2".into(), hv["c2"].clone());
    b.push("thdec", td_in);
}

/// Builds the vector file for one backend. `prime` is required for, and
/// only accepted by, the transparent backend.
pub fn generate(backend: BackendId, prime: Option<u64>, seed: u64) -> Result<VectorFile, VectorError> {
    let header = VectorHeader {
        version: VECTOR_VERSION,
        backend: backend.to_string(),
        prime: match backend {
            BackendId::Transparent => prime,
            BackendId::Curve => None,
        },
        seed,
    };
    if backend == BackendId::Curve && prime.is_some() {
        return Err(VectorError::Malformed("the curve backend takes no prime".into()));
    }
    let params = setup_group(default_level(backend), backend, prime)
        .map_err(|e| VectorError::Malformed(e.to_string()))?;
    let mut b = Builder {
        params: &params,
        records: Vec::new(),
    };
    let s = |v: u64| Scalar::from_u64(&params, v);

    b.push(
        "setup",
        fields([("level", hex::encode(u64::from(default_level(backend)).to_be_bytes()))]),
    );
    // the small worked example: α=3, α0=4, b1=5, r=2, M=z^7, second input (z^1, z^5)
    chain(&mut b, s(3), s(4), &[s(5)], s(2), s(7), (s(1), s(5)));

    let mut rng = mcc_core::rng::seeded(seed);
    for _ in 0..RANDOM_CHAINS {
        let k = rng.gen_range(2..=4);
        let higher: Vec<Scalar> = (1..k).map(|_| Scalar::random(&params, &mut rng)).collect();
        chain(
            &mut b,
            Scalar::random_nonzero(&params, &mut rng),
            Scalar::random_nonzero(&params, &mut rng),
            &higher,
            Scalar::random_nonzero(&params, &mut rng),
            Scalar::random(&params, &mut rng),
            (Scalar::random(&params, &mut rng), Scalar::random(&params, &mut rng)),
        );
    }

    let records = b.records;
    let digest = digest_of(&header, &records);
    Ok(VectorFile {
        header,
        records,
        digest,
    })
}

/// Outcome of a successful verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub records: usize,
    pub per_algorithm: BTreeMap<String, usize>,
}

/// Re-executes every record and checks the digest. The first divergent
/// record is reported before any digest problem.
pub fn verify(file: &VectorFile) -> Result<VerifyReport, VectorError> {
    let params = file.params()?;
    let mut per_algorithm = BTreeMap::new();
    for (index, rec) in file.records.iter().enumerate() {
        let diverge = |detail: String| VectorError::Divergence {
            index,
            algorithm: rec.algorithm.clone(),
            detail,
        };
        let got = execute(&params, &rec.algorithm, &rec.inputs).map_err(diverge)?;
        if got != rec.outputs {
            let field = got
                .iter()
                .find(|(k, v)| rec.outputs.get(*k) != Some(v))
                .map(|(k, _)| k.clone())
                .or_else(|| rec.outputs.keys().find(|k| !got.contains_key(*k)).cloned())
                .unwrap_or_default();
            return Err(diverge(format!("output `{field}` differs")));
        }
        *per_algorithm.entry(rec.algorithm.clone()).or_insert(0) += 1;
    }
    let actual = digest_of(&file.header, &file.records);
    if actual != file.digest {
        return Err(VectorError::DigestMismatch {
            expected: file.digest.clone(),
            actual,
        });
    }
    Ok(VerifyReport {
        records: file.records.len(),
        per_algorithm,
    })
}

/// Parses and verifies the text of a vector file.
pub fn verify_text(text: &str) -> Result<VerifyReport, VectorError> {
    verify(&VectorFile::from_json(text)?)
}

struct Inputs<'a> {
    params: &'a GroupParams,
    map: &'a Fields,
}

impl Inputs<'_> {
    fn bytes(&self, key: &str) -> Result<Vec<u8>, String> {
        let s = self.map.get(key).ok_or_else(|| format!("missing input `{key}`"))?;
        mcc_core::envelope::decode_hex(s).map_err(|e| format!("input `{key}`: {e}"))
    }

    fn scalar(&self, key: &str) -> Result<Scalar, String> {
        Scalar::from_bytes(self.params, &self.bytes(key)?).map_err(|e| format!("input `{key}`: {e}"))
    }

    fn elem<C: GroupKind>(&self, key: &str) -> Result<Element<C>, String> {
        Element::from_bytes(self.params, &self.bytes(key)?).map_err(|e| format!("input `{key}`: {e}"))
    }

    fn u64(&self, key: &str) -> Result<u64, String> {
        let b: [u8; 8] = self
            .bytes(key)?
            .try_into()
            .map_err(|_| format!("input `{key}` must be 8 bytes"))?;
        Ok(u64::from_be_bytes(b))
    }

    /// Highest `n` such that `prefix1 .. prefix{n}` (with `suffix`) all exist.
    fn count(&self, prefix: &str, suffix: &str) -> usize {
        (1..)
            .take_while(|i| self.map.contains_key(&format!("{prefix}{i}{suffix}")))
            .count()
    }

    /// Rejects any input name outside `allowed`.
    fn only(&self, allowed: &[String]) -> Result<(), String> {
        match self.map.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(format!("unexpected input `{k}`")),
            None => Ok(()),
        }
    }
}

fn names(fixed: &[&str], numbered: impl IntoIterator<Item = String>) -> Vec<String> {
    fixed.iter().map(|s| s.to_string()).chain(numbered).collect()
}

const OWNER: ClientId = ClientId(1);

/// Runs one algorithm on hex-encoded inputs.
pub fn execute(params: &GroupParams, algorithm: &str, inputs: &Fields) -> Result<Fields, String> {
    let inp = Inputs { params, map: inputs };
    let err = |e: htpre::HtpreError| e.to_string();
    let mut out = Fields::new();
    match algorithm {
        "setup" => {
            inp.only(&names(&["level"], []))?;
            let level = u32::try_from(inp.u64("level")?).map_err(|e| e.to_string())?;
            let fresh = htpre::setup(level, params.backend_id(), params.transparent_prime())
                .map_err(err)?;
            out.insert("g1".into(), elem_hex(&fresh.g1));
            out.insert("g2".into(), elem_hex(&fresh.g2));
            out.insert("z".into(), elem_hex(&fresh.z));
        }
        "keygen" => {
            inp.only(&names(&["alpha"], []))?;
            let kp = KeyPair::from_secret(params, OWNER, inp.scalar("alpha")?).map_err(err)?;
            out.insert("pk".into(), elem_hex(&kp.pk));
        }
        "thkeygen" => {
            let n = inp.count("b", "");
            inp.only(&names(&["alpha0"], (1..=n).map(|i| format!("b{i}"))))?;
            let higher = (1..=n)
                .map(|i| inp.scalar(&format!("b{i}")))
                .collect::<Result<Vec<_>, _>>()?;
            let t = htpre::thkeygen_with(params, inp.scalar("alpha0")?, &higher).map_err(err)?;
            out.insert("spk".into(), elem_hex(&t.spk));
            for s in &t.shares {
                out.insert(format!("share{}", s.index), scalar_hex(&s.value));
            }
        }
        "proxykeygen" => {
            inp.only(&names(&["alpha", "spk"], []))?;
            let kp = KeyPair::from_secret(params, OWNER, inp.scalar("alpha")?).map_err(err)?;
            let rk = htpre::proxykeygen(params, &kp, &inp.elem("spk")?).map_err(err)?;
            out.insert("rk".into(), elem_hex(&rk.rk));
        }
        "enc" => {
            inp.only(&names(&["pk", "m", "r"], []))?;
            let pk = PublicKey {
                owner: OWNER,
                pk: inp.elem("pk")?,
            };
            let ct = htpre::enc_with_randomness(params, &inp.elem("m")?, &pk, &inp.scalar("r")?)
                .map_err(err)?;
            out.insert("c1".into(), elem_hex(&ct.c1));
            out.insert("c2".into(), elem_hex(&ct.c2));
        }
        "proxyenc" => {
            inp.only(&names(&["c1", "c2", "rk"], []))?;
            let ct = Ciphertext {
                owner: OWNER,
                c1: inp.elem("c1")?,
                c2: inp.elem("c2")?,
            };
            let rk = ReEncryptionKey {
                owner: OWNER,
                rk: inp.elem("rk")?,
            };
            let re = htpre::proxyenc(params, &ct, &rk).map_err(err)?;
            out.insert("c1".into(), elem_hex(&re.c1));
            out.insert("c2".into(), elem_hex(&re.c2));
        }
        "homeval" => {
            let n = inp.count("in", ".c1");
            let allowed = (1..=n).flat_map(|i| [format!("in{i}.c1"), format!("in{i}.c2")]);
            inp.only(&names(&[], allowed))?;
            let cts = (1..=n)
                .map(|i| {
                    Ok(ReEncCiphertext {
                        c1: inp.elem(&format!("in{i}.c1"))?,
                        c2: inp.elem(&format!("in{i}.c2"))?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            let r = htpre::homeval_mul(params, &cts).map_err(err)?;
            out.insert("c1".into(), elem_hex(&r.c1));
            out.insert("c2".into(), elem_hex(&r.c2));
        }
        "dec" => {
            inp.only(&names(&["alpha", "c1", "c2"], []))?;
            let kp = KeyPair::from_secret(params, OWNER, inp.scalar("alpha")?).map_err(err)?;
            let ct = Ciphertext {
                owner: OWNER,
                c1: inp.elem("c1")?,
                c2: inp.elem("c2")?,
            };
            out.insert("m".into(), elem_hex(&htpre::dec(params, &ct, &kp).map_err(err)?));
        }
        "thdec" => {
            let k = inp.count("share", "");
            inp.only(&names(&["c1", "c2"], (1..=k).map(|i| format!("share{i}"))))?;
            let ct = ReEncCiphertext {
                c1: inp.elem("c1")?,
                c2: inp.elem("c2")?,
            };
            let mut partials = Vec::with_capacity(k);
            for i in 1..=k {
                let share = SecretShare {
                    index: i as u64,
                    value: inp.scalar(&format!("share{i}"))?,
                };
                let w = htpre::thdec_share(params, &ct, &share).map_err(err)?;
                out.insert(format!("w{i}"), elem_hex(&w.w));
                partials.push(w);
            }
            let m = htpre::thdec_combine(params, &ct, &partials, k.max(1)).map_err(err)?;
            out.insert("m".into(), elem_hex(&m));
        }
        other => return Err(format!("unknown algorithm `{other}`")),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_every_algorithm() {
        let f = generate(BackendId::Transparent, Some(11), 1).unwrap();
        for a in ALGORITHMS {
            assert!(f.records.iter().any(|r| r.algorithm == a), "{a}");
        }
        assert_eq!(verify(&f).unwrap().records, f.records.len());
    }

    #[test]
    fn worked_example_values() {
        let f = generate(BackendId::Transparent, Some(11), 1).unwrap();
        let rec = |alg: &str| f.records.iter().find(|r| r.algorithm == alg).unwrap();
        let h = |v: u64| hex::encode(v.to_be_bytes());
        assert_eq!(rec("keygen").outputs["pk"], h(3));
        assert_eq!(rec("proxykeygen").outputs["rk"], h(5));
        assert_eq!(rec("enc").outputs["c1"], h(6));
        assert_eq!(rec("enc").outputs["c2"], h(9));
        assert_eq!(rec("proxyenc").outputs["c1"], h(8));
        assert_eq!(rec("thkeygen").outputs["share1"], h(8));
        assert_eq!(rec("thkeygen").outputs["share2"], h(2));
        assert_eq!(rec("thdec").outputs["w1"], h(9));
        assert_eq!(rec("thdec").outputs["w2"], h(5));
        assert_eq!(rec("thdec").outputs["m"], h(7));
        assert_eq!(rec("dec").outputs["m"], h(7));
        // (z^8, z^9) ⊗ (z^1, z^5) = (z^9, z^3)
        assert_eq!(rec("homeval").outputs["c1"], h(9));
        assert_eq!(rec("homeval").outputs["c2"], h(3));
    }

    #[test]
    fn unknown_inputs_are_rejected() {
        let params = setup_group(0, BackendId::Transparent, Some(11)).unwrap();
        let mut inputs = fields([("alpha", hex::encode(3u64.to_be_bytes()))]);
        assert!(execute(&params, "keygen", &inputs).is_ok());
        inputs.insert("alphb".into(), hex::encode(3u64.to_be_bytes()));
        assert!(execute(&params, "keygen", &inputs).is_err());
        assert!(execute(&params, "keygen2", &Fields::new()).is_err());
    }

    #[test]
    fn curve_takes_no_prime() {
        assert!(generate(BackendId::Curve, Some(11), 0).is_err());
    }
}
