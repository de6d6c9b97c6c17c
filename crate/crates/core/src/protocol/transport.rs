use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::{MessageKind, Role};
use crate::rng::DeterministicRng;

/// One delivered message. `seq` is the position in the global send order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub seq: u64,
    pub from: Role,
    pub to: Role,
    pub kind: MessageKind,
    pub payload: Vec<u8>,
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} {} -> {} {} ({} bytes)",
            self.seq,
            self.from,
            self.to,
            self.kind,
            self.payload.len()
        )
    }
}

/// A reliable, authenticated point-to-point channel between roles.
/// Confidentiality and authentication are assumed, not implemented.
pub trait Transport {
    fn send(&mut self, from: Role, to: Role, kind: MessageKind, payload: Vec<u8>);

    /// Sends the same payload to every recipient in `to`.
    fn broadcast(&mut self, from: Role, to: &[Role], kind: MessageKind, payload: &[u8]) {
        for &r in to {
            self.send(from, r, kind, payload.to_vec());
        }
    }

    /// Next message to hand to its recipient, if any is pending.
    fn next_delivery(&mut self) -> Option<Message>;

    /// Every message sent so far, in send order.
    fn log(&self) -> &[Message];
}

/// Order in which [`InProcessTransport`] delivers pending messages.
#[derive(Debug, Clone)]
pub enum Schedule {
    /// First in, first out.
    Fifo,
    /// Uniformly random pending message.
    Shuffled(u64),
}

#[derive(Debug)]
pub struct InProcessTransport {
    pending: VecDeque<Message>,
    log: Vec<Message>,
    shuffle: Option<DeterministicRng>,
}

impl InProcessTransport {
    pub fn new(schedule: Schedule) -> Self {
        InProcessTransport {
            pending: VecDeque::new(),
            log: Vec::new(),
            shuffle: match schedule {
                Schedule::Fifo => None,
                Schedule::Shuffled(seed) => Some(crate::rng::seeded(seed)),
            },
        }
    }
}

impl Default for InProcessTransport {
    fn default() -> Self {
        InProcessTransport::new(Schedule::Fifo)
    }
}

impl Transport for InProcessTransport {
    fn send(&mut self, from: Role, to: Role, kind: MessageKind, payload: Vec<u8>) {
        let msg = Message {
            seq: self.log.len() as u64,
            from,
            to,
            kind,
            payload,
        };
        self.log.push(msg.clone());
        self.pending.push_back(msg);
    }

    fn next_delivery(&mut self) -> Option<Message> {
        match &mut self.shuffle {
            None => self.pending.pop_front(),
            Some(rng) if !self.pending.is_empty() => {
                let i = rng.gen_range(0..self.pending.len());
                self.pending.remove(i)
            }
            Some(_) => None,
        }
    }

    fn log(&self) -> &[Message] {
        &self.log
    }
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    seq: u64,
    from: String,
    to: String,
    kind: &'a str,
    payload_hex: String,
}

/// Line-delimited JSON, one message per line.
pub fn transcript_jsonl(messages: &[Message]) -> String {
    let mut out = String::new();
    for m in messages {
        let line = TranscriptLine {
            seq: m.seq,
            from: m.from.to_string(),
            to: m.to.to_string(),
            kind: m.kind.name(),
            payload_hex: hex::encode(&m.payload),
        };
        out.push_str(&serde_json::to_string(&line).expect("transcript line serializes"));
        out.push('\n');
    }
    out
}
