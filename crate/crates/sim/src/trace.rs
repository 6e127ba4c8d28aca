//! Length-prefixed binary event log.
//!
//! Every message the router handled — delivered, late, or suppressed — is
//! one record: `u32 record_len` followed by a fixed header and the payload's
//! canonical encoding. Party ids are shifted by one so the server is 0 and
//! client `i` is `i + 1`. The log is self-delimiting, so a reader can replay
//! or tail it without the config that produced it.

use aggsum_core::crypto::CryptoError;

use crate::event::{Party, SimEvent};

pub const KIND_REPORT: u8 = 1;
pub const KIND_REQUEST: u8 = 2;
pub const KIND_VOTE: u8 = 3;
pub const KIND_RECON: u8 = 4;
pub const KIND_RESPONSE: u8 = 5;
pub const KIND_DKG: u8 = 6;
pub const KIND_TRANSFER: u8 = 7;

pub const FLAG_DROPPED: u8 = 1;
pub const FLAG_TAMPERED: u8 = 2;
pub const FLAG_LATE: u8 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub at_us: u64,
    pub from: u64,
    pub to: u64,
    pub kind: u8,
    pub flags: u8,
    pub payload: Vec<u8>,
}

fn party_code(p: Party) -> u64 {
    match p {
        Party::Server => 0,
        Party::Client(id) => id + 1,
    }
}

/// Serialize one routed event. `late` is decided by the router at drain time.
pub fn record_for(ev: &SimEvent, kind: u8, payload: Vec<u8>, late: bool) -> TraceRecord {
    let mut flags = 0;
    if ev.dropped {
        flags |= FLAG_DROPPED;
    }
    if ev.tampered {
        flags |= FLAG_TAMPERED;
    }
    if late {
        flags |= FLAG_LATE;
    }
    TraceRecord {
        at_us: ev.at_us,
        from: party_code(ev.from),
        to: party_code(ev.to),
        kind,
        flags,
        payload,
    }
}

pub fn append(out: &mut Vec<u8>, rec: &TraceRecord) {
    let body_len = 8 + 8 + 8 + 1 + 1 + rec.payload.len();
    out.extend_from_slice(&(body_len as u32).to_be_bytes());
    out.extend_from_slice(&rec.at_us.to_be_bytes());
    out.extend_from_slice(&rec.from.to_be_bytes());
    out.extend_from_slice(&rec.to.to_be_bytes());
    out.push(rec.kind);
    out.push(rec.flags);
    out.extend_from_slice(&rec.payload);
}

pub fn read_all(bytes: &[u8]) -> Result<Vec<TraceRecord>, CryptoError> {
    let mut recs = Vec::new();
    let mut rest = bytes;
    while !rest.is_empty() {
        if rest.len() < 4 {
            return Err(CryptoError::Malformed("truncated trace length"));
        }
        let len = u32::from_be_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        rest = &rest[4..];
        if rest.len() < len || len < 26 {
            return Err(CryptoError::Malformed("truncated trace record"));
        }
        let (body, tail) = rest.split_at(len);
        recs.push(TraceRecord {
            at_us: u64::from_be_bytes(body[..8].try_into().expect("8 bytes")),
            from: u64::from_be_bytes(body[8..16].try_into().expect("8 bytes")),
            to: u64::from_be_bytes(body[16..24].try_into().expect("8 bytes")),
            kind: body[24],
            flags: body[25],
            payload: body[26..].to_vec(),
        });
        rest = tail;
    }
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_and_rejects_truncation() {
        let recs = vec![
            TraceRecord {
                at_us: 12,
                from: 0,
                to: 5,
                kind: KIND_REQUEST,
                flags: 0,
                payload: vec![1, 2, 3],
            },
            TraceRecord {
                at_us: 40,
                from: 5,
                to: 0,
                kind: KIND_VOTE,
                flags: FLAG_LATE,
                payload: Vec::new(),
            },
        ];
        let mut buf = Vec::new();
        for r in &recs {
            append(&mut buf, r);
        }
        assert_eq!(read_all(&buf).unwrap(), recs);
        assert!(read_all(&buf[..buf.len() - 1]).is_err());
        assert!(read_all(&buf[..3]).is_err());
    }
}
