use std::collections::BTreeMap;

use mcc_core::algebra::{bounded_dlog, setup_group, BackendId, GroupParams, GtElem, Scalar};
use mcc_core::envelope::{self, Object};
use mcc_core::htpre::ClientId;
use mcc_core::protocol::{
    audit, transcript_jsonl, FunctionDescriptor, InProcessTransport, Message, MessageKind, Phase,
    Role, Schedule, Transport, World, WorldOptions,
};
use proptest::prelude::*;

fn transparent(p: u64) -> GroupParams {
    setup_group(0, BackendId::Transparent, Some(p)).unwrap()
}

fn curve() -> GroupParams {
    setup_group(128, BackendId::Curve, None).unwrap()
}

fn ids(k: u32) -> Vec<ClientId> {
    (1..=k).map(ClientId).collect()
}

fn run(params: &GroupParams, msgs: &[u64], options: WorldOptions) -> (World, BTreeMap<ClientId, GtElem>) {
    let inputs = msgs.iter().map(|&m| params.encode_integer(m)).collect();
    let mut w = World::new(params.clone(), inputs, options).unwrap();
    let out = w.run(&FunctionDescriptor::product(ids(msgs.len() as u32))).unwrap();
    (w, out)
}

#[test]
fn empty_world_has_empty_transcript() {
    let params = transparent(11);
    let w = World::new(params.clone(), vec![params.z, params.z], WorldOptions::default()).unwrap();
    assert!(w.transcript().is_empty());
    assert_eq!(w.phase(), Phase::Setup);
}

#[test]
fn three_client_sum_on_both_backends() {
    for params in [transparent(2_147_483_647), curve()] {
        let (w, out) = run(&params, &[2, 3, 5], WorldOptions::seeded(11));
        for m in out.values() {
            assert_eq!(bounded_dlog(&params, m, 100), Ok(10));
        }
        audit::check_all(&w).unwrap();
    }
}

#[test]
fn plaintexts_never_travel() {
    let params = transparent(2_147_483_647);
    let (w, _) = run(&params, &[1234, 98765, 4242], WorldOptions::seeded(3));
    let plain: Vec<Vec<u8>> = w.clients().iter().map(|c| c.plaintext.to_bytes()).collect();
    for msg in w.transcript() {
        let (_, obj) = envelope::decode(&msg.payload).unwrap();
        if let Object::Message(m) = obj {
            panic!("plaintext-typed object in transit: {m:?}");
        }
        if let Object::Ciphertext(ct) = obj {
            assert!(!plain.contains(&ct.c2.to_bytes()));
        }
    }
}

#[test]
fn dealer_secret_never_travels() {
    let params = transparent(2_147_483_647);
    let (w, _) = run(&params, &[1, 2, 3], WorldOptions::seeded(4));
    let alpha0 = w.third_party().target.as_ref().unwrap().alpha0;
    for msg in w.transcript() {
        let (_, obj) = envelope::decode(&msg.payload).unwrap();
        assert!(!matches!(obj, Object::TargetKey(_) | Object::KeyPair(_)));
        if let Object::Share(s) = obj {
            assert_ne!(s.value, alpha0);
        }
    }
}

#[test]
fn cloud_receives_no_partials() {
    let (w, _) = run(&transparent(1_000_003), &[4, 5], WorldOptions::seeded(5));
    assert!(w
        .transcript()
        .iter()
        .filter(|m| m.kind == MessageKind::PartialDecryption)
        .all(|m| matches!(m.to, Role::Client(_)) && m.from != m.to));
    assert_eq!(
        w.transcript()
            .iter()
            .filter(|m| m.kind == MessageKind::PartialDecryption)
            .count(),
        2
    );
}

#[test]
fn same_seed_same_transcript() {
    let params = transparent(1_000_003);
    let (a, out_a) = run(&params, &[7, 8, 9], WorldOptions::seeded(42));
    let (b, out_b) = run(&params, &[7, 8, 9], WorldOptions::seeded(42));
    assert_eq!(transcript_jsonl(a.transcript()), transcript_jsonl(b.transcript()));
    assert_eq!(out_a, out_b);
    assert_eq!(a.cloud().store.ciphertexts, b.cloud().store.ciphertexts);
    let (c, _) = run(&params, &[7, 8, 9], WorldOptions::seeded(43));
    assert_ne!(transcript_jsonl(a.transcript()), transcript_jsonl(c.transcript()));
}

#[test]
fn kinds_appear_in_phase_order() {
    let (w, _) = run(&transparent(1_000_003), &[1, 2, 3], WorldOptions::seeded(6));
    audit::check_phase_order(w.transcript()).unwrap();
    let phases: Vec<Phase> = w.transcript().iter().map(|m| m.kind.phase()).collect();
    assert_eq!(phases.first(), Some(&Phase::Setup));
    assert_eq!(phases.last(), Some(&Phase::Decryption));
}

#[test]
fn shuffled_delivery_gives_the_same_result() {
    let params = transparent(1_000_003);
    let (_, fifo) = run(&params, &[3, 1, 4, 1, 5], WorldOptions::seeded(9));
    for s in 0..10 {
        let options = WorldOptions {
            schedule: Schedule::Shuffled(s),
            ..WorldOptions::seeded(9)
        };
        let (w, out) = run(&params, &[3, 1, 4, 1, 5], options);
        assert_eq!(out, fifo);
        audit::check_all(&w).unwrap();
    }
}

#[test]
fn store_is_untouched_by_later_phases() {
    let params = transparent(1_000_003);
    let inputs: Vec<GtElem> = [1, 2, 3].iter().map(|&m| params.encode_integer(m)).collect();
    let mut w = World::new(params, inputs, WorldOptions::seeded(10)).unwrap();
    w.run_setup_phase().unwrap();
    let uploaded: Vec<Vec<u8>> = w
        .cloud()
        .store
        .ciphertexts
        .values()
        .map(|ct| [ct.c1.to_bytes(), ct.c2.to_bytes()].concat())
        .collect();
    w.run_preparation_phase().unwrap();
    w.run_evaluation_phase(&FunctionDescriptor::product(ids(3))).unwrap();
    w.run_decryption_phase().unwrap();
    let after: Vec<Vec<u8>> = w
        .cloud()
        .store
        .ciphertexts
        .values()
        .map(|ct| [ct.c1.to_bytes(), ct.c2.to_bytes()].concat())
        .collect();
    assert_eq!(uploaded, after);
    audit::check_store_integrity(&w).unwrap();
}

#[test]
fn weighted_sum() {
    let params = transparent(1_000_003);
    let inputs: Vec<GtElem> = [2, 3, 5].iter().map(|&m| params.encode_integer(m)).collect();
    let mut w = World::new(params.clone(), inputs, WorldOptions::seeded(12)).unwrap();
    let f = FunctionDescriptor::integer_sum(ids(3)).with_exponent(ClientId(3), 10);
    let out = w.run(&f).unwrap();
    assert!(out.values().all(|m| bounded_dlog(&params, m, 1000) == Ok(55)));
}

/// Delivers like the default transport but records one extra cloud-bound
/// message carrying client 1's key share once decryption starts.
struct LeakyTransport {
    inner: InProcessTransport,
    log: Vec<Message>,
    leak: Option<Vec<u8>>,
}

impl Transport for LeakyTransport {
    fn send(&mut self, from: Role, to: Role, kind: MessageKind, payload: Vec<u8>) {
        self.inner.send(from, to, kind, payload);
        self.log.extend(self.inner.log().last().cloned());
        if kind == MessageKind::PartialDecryption {
            if let Some(leak) = self.leak.take() {
                self.log.push(Message {
                    seq: self.log.len() as u64,
                    from,
                    to: Role::Cloud,
                    kind: MessageKind::RegisterRekey,
                    payload: leak,
                });
            }
        }
    }

    fn next_delivery(&mut self) -> Option<Message> {
        self.inner.next_delivery()
    }

    fn log(&self) -> &[Message] {
        &self.log
    }
}

#[test]
fn audit_flags_a_leak() {
    let params = transparent(2_147_483_647);
    let inputs = vec![params.encode_integer(10), params.encode_integer(20)];
    let transport = LeakyTransport {
        inner: InProcessTransport::default(),
        log: Vec::new(),
        leak: None,
    };
    let mut w = World::with_transport(params.clone(), inputs, WorldOptions::seeded(13), transport).unwrap();
    w.run_setup_phase().unwrap();
    w.run_preparation_phase().unwrap();
    w.run_evaluation_phase(&FunctionDescriptor::product(ids(2))).unwrap();
    audit::check_all(&w).unwrap();
    // the dealer's own view of client 1's share, re-sent to the cloud
    let share = w.client(ClientId(1)).unwrap().share.unwrap();
    let leak = envelope::encode(&params, &Object::Share(share));
    w.transport_mut().leak = Some(leak);
    w.run_decryption_phase().unwrap();
    let err = audit::check_cloud_ignorance(&w).unwrap_err();
    assert!(err.detail.contains("share"), "{err}");
    assert!(audit::check_all(&w).is_err());
}

fn integer_oracle(msgs: &[u64], p: u64) -> u64 {
    msgs.iter().fold(0, |acc, m| (acc + m) % p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn transparent_end_to_end(msgs in prop::collection::vec(0u64..1_000_003, 2..=8), seed: u64) {
        let params = transparent(1_000_003);
        let (w, out) = run(&params, &msgs, WorldOptions::seeded(seed));
        let expected = params.z_pow(&Scalar::from_u64(&params, integer_oracle(&msgs, 1_000_003))).unwrap();
        prop_assert_eq!(out.len(), msgs.len());
        prop_assert!(out.values().all(|m| *m == expected));
        prop_assert!(audit::check_all(&w).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn curve_end_to_end(msgs in prop::collection::vec(0u64..50, 2..=8), seed: u64) {
        let params = curve();
        let (w, out) = run(&params, &msgs, WorldOptions::seeded(seed));
        let expected = params.encode_integer(msgs.iter().sum());
        prop_assert!(out.values().all(|m| *m == expected));
        prop_assert!(audit::check_all(&w).is_ok());
    }
}
