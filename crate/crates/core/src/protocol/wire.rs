//! Canonical byte encodings for protocol messages.
//!
//! Every message type has one fixed field order with length prefixes where a
//! field is variable-sized; integers are big-endian, round numbers always 8
//! bytes. Signing and cross-check equality both operate on these bytes, so
//! two messages are "identical" exactly when their encodings are.

use crate::crypto::elgamal::{Ciphertext, PartialDecryption};
use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::sig::Signature;
use crate::crypto::CryptoError;
use crate::protocol::dleq::DleqProof;
use crate::protocol::types::*;
use crate::Round;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_be_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CryptoError> {
        if self.buf.len() < n {
            return Err(CryptoError::Malformed("message truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, CryptoError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CryptoError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CryptoError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn scalar(&mut self) -> Result<Scalar, CryptoError> {
        Scalar::from_bytes(self.take(32)?.try_into().unwrap())
    }

    fn group(&mut self) -> Result<GroupElement, CryptoError> {
        GroupElement::from_bytes(self.take(32)?.try_into().unwrap())
    }

    fn ciphertext(&mut self) -> Result<Ciphertext, CryptoError> {
        Ciphertext::from_bytes(self.take(64)?.try_into().unwrap())
    }

    fn signature(&mut self) -> Result<Signature, CryptoError> {
        Ok(Signature::from_bytes(self.take(64)?.try_into().unwrap()))
    }

    fn bytes(&mut self) -> Result<Vec<u8>, CryptoError> {
        let len = self.u32()? as usize;
        Ok(self.take(len)?.to_vec())
    }

    fn finish(self) -> Result<(), CryptoError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CryptoError::Malformed("trailing bytes after message"))
        }
    }
}

/// Canonical bytes of a decryption request; this is the signing target for
/// the cross-check, so it covers the round number and every label.
pub fn request_bytes(req: &DecryptionRequest) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + req.labels.len() * 9);
    put_u64(&mut out, req.t);
    put_u32(&mut out, req.labels.len() as u32);
    for (id, label) in &req.labels {
        put_u64(&mut out, *id);
        out.push(match label {
            Label::Online => 1,
            Label::Offline => 0,
        });
    }
    out
}

pub fn decode_request(bytes: &[u8]) -> Result<DecryptionRequest, CryptoError> {
    let mut r = Reader::new(bytes);
    let t = r.u64()?;
    let n = r.u32()? as usize;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.u64()?;
        let label = match r.u8()? {
            1 => Label::Online,
            0 => Label::Offline,
            _ => return Err(CryptoError::Malformed("unknown label byte")),
        };
        labels.push((id, label));
    }
    r.finish()?;
    Ok(DecryptionRequest { t, labels })
}

/// The (ciphertext ∥ round) bytes a client signs for each neighbor envelope,
/// and that everyone verifies.
pub fn neighbor_sig_bytes(ct: &Ciphertext, t: Round) -> Vec<u8> {
    let mut out = Vec::with_capacity(72);
    out.extend_from_slice(&ct.to_bytes());
    put_u64(&mut out, t);
    out
}

pub fn encode_masked_vector(mv: &MaskedVector) -> Vec<u8> {
    let mut out = Vec::new();
    put_u64(&mut out, mv.client);
    put_u64(&mut out, mv.t);
    put_u32(&mut out, mv.payload.len() as u32);
    for w in &mv.payload {
        put_u32(&mut out, *w);
    }
    put_u32(&mut out, mv.mask_shares.len() as u32);
    for s in &mv.mask_shares {
        put_u64(&mut out, s.decryptor);
        put_u32(&mut out, s.ct.len() as u32);
        out.extend_from_slice(&s.ct);
    }
    put_u32(&mut out, mv.neighbor_cts.len() as u32);
    for n in &mv.neighbor_cts {
        put_u64(&mut out, n.neighbor);
        out.extend_from_slice(&n.ct.to_bytes());
        out.extend_from_slice(&n.sig.to_bytes());
    }
    out
}

pub fn decode_masked_vector(bytes: &[u8]) -> Result<MaskedVector, CryptoError> {
    let mut r = Reader::new(bytes);
    let client = r.u64()?;
    let t = r.u64()?;
    let d = r.u32()? as usize;
    let mut payload = Vec::with_capacity(d);
    for _ in 0..d {
        payload.push(r.u32()?);
    }
    let n_shares = r.u32()? as usize;
    let mut mask_shares = Vec::with_capacity(n_shares);
    for _ in 0..n_shares {
        let decryptor = r.u64()?;
        let ct = r.bytes()?;
        mask_shares.push(MaskShareCt { decryptor, ct });
    }
    let n_nbr = r.u32()? as usize;
    let mut neighbor_cts = Vec::with_capacity(n_nbr);
    for _ in 0..n_nbr {
        let neighbor = r.u64()?;
        let ct = r.ciphertext()?;
        let sig = r.signature()?;
        neighbor_cts.push(NeighborCt { neighbor, ct, sig });
    }
    r.finish()?;
    Ok(MaskedVector {
        client,
        t,
        payload,
        mask_shares,
        neighbor_cts,
    })
}

pub fn encode_request_bundle(b: &RequestBundle) -> Vec<u8> {
    let mut out = Vec::new();
    let req = request_bytes(&b.req);
    put_u32(&mut out, req.len() as u32);
    out.extend_from_slice(&req);
    put_u32(&mut out, b.online_shares.len() as u32);
    for (client, shares) in &b.online_shares {
        put_u64(&mut out, *client);
        put_u32(&mut out, shares.len() as u32);
        for s in shares {
            put_u64(&mut out, s.decryptor);
            put_u32(&mut out, s.ct.len() as u32);
            out.extend_from_slice(&s.ct);
        }
    }
    put_u32(&mut out, b.offline_pairs.len() as u32);
    for p in &b.offline_pairs {
        put_u64(&mut out, p.owner);
        put_u64(&mut out, p.reporter);
        out.extend_from_slice(&p.ct.to_bytes());
        out.extend_from_slice(&p.sig.to_bytes());
    }
    out
}

pub fn decode_request_bundle(bytes: &[u8]) -> Result<RequestBundle, CryptoError> {
    let mut r = Reader::new(bytes);
    let req = decode_request(&r.bytes()?)?;
    let n_online = r.u32()? as usize;
    let mut online_shares = Vec::with_capacity(n_online);
    for _ in 0..n_online {
        let client = r.u64()?;
        let n = r.u32()? as usize;
        let mut shares = Vec::with_capacity(n);
        for _ in 0..n {
            let decryptor = r.u64()?;
            let ct = r.bytes()?;
            shares.push(MaskShareCt { decryptor, ct });
        }
        online_shares.push((client, shares));
    }
    let n_off = r.u32()? as usize;
    let mut offline_pairs = Vec::with_capacity(n_off);
    for _ in 0..n_off {
        let owner = r.u64()?;
        let reporter = r.u64()?;
        let ct = r.ciphertext()?;
        let sig = r.signature()?;
        offline_pairs.push(OfflineAttachment {
            owner,
            reporter,
            ct,
            sig,
        });
    }
    r.finish()?;
    Ok(RequestBundle {
        req,
        online_shares,
        offline_pairs,
    })
}

pub fn encode_signed_request(sr: &SignedRequest) -> Vec<u8> {
    let mut out = Vec::new();
    put_u64(&mut out, sr.decryptor);
    let req = request_bytes(&sr.req);
    put_u32(&mut out, req.len() as u32);
    out.extend_from_slice(&req);
    out.extend_from_slice(&sr.sig.to_bytes());
    out
}

pub fn decode_signed_request(bytes: &[u8]) -> Result<SignedRequest, CryptoError> {
    let mut r = Reader::new(bytes);
    let decryptor = r.u64()?;
    let req = decode_request(&r.bytes()?)?;
    let sig = r.signature()?;
    r.finish()?;
    Ok(SignedRequest {
        decryptor,
        req,
        sig,
    })
}

pub fn encode_response(resp: &DecryptorResponse) -> Vec<u8> {
    let mut out = Vec::new();
    put_u64(&mut out, resp.decryptor);
    put_u32(&mut out, resp.share_index);
    put_u64(&mut out, resp.t);
    put_u32(&mut out, resp.mask_shares.len() as u32);
    for s in &resp.mask_shares {
        put_u64(&mut out, s.client);
        out.extend_from_slice(&s.value.to_bytes());
    }
    put_u32(&mut out, resp.partials.len() as u32);
    for p in &resp.partials {
        put_u64(&mut out, p.owner);
        put_u64(&mut out, p.reporter);
        put_u32(&mut out, p.partial.index);
        out.extend_from_slice(&p.partial.value.to_bytes());
        match &p.proof {
            None => out.push(0),
            Some(proof) => {
                out.push(1);
                out.extend_from_slice(&proof.to_bytes());
            }
        }
    }
    out
}

pub fn decode_response(bytes: &[u8]) -> Result<DecryptorResponse, CryptoError> {
    let mut r = Reader::new(bytes);
    let decryptor = r.u64()?;
    let share_index = r.u32()?;
    let t = r.u64()?;
    let n_shares = r.u32()? as usize;
    let mut mask_shares = Vec::with_capacity(n_shares);
    for _ in 0..n_shares {
        let client = r.u64()?;
        let value = r.scalar()?;
        mask_shares.push(RecoveredMaskShare { client, value });
    }
    let n_partials = r.u32()? as usize;
    let mut partials = Vec::with_capacity(n_partials);
    for _ in 0..n_partials {
        let owner = r.u64()?;
        let reporter = r.u64()?;
        let index = r.u32()?;
        let value = r.group()?;
        let proof = match r.u8()? {
            0 => None,
            1 => Some(DleqProof::from_bytes(r.take(96)?.try_into().unwrap())?),
            _ => return Err(CryptoError::Malformed("unknown proof marker")),
        };
        partials.push(PartialWithProof {
            owner,
            reporter,
            partial: PartialDecryption { index, value },
            proof,
        });
    }
    r.finish()?;
    Ok(DecryptorResponse {
        decryptor,
        share_index,
        t,
        mask_shares,
        partials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{elgamal, group::Scalar, shamir::Share, sig::SigningKey};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample_ct(rng: &mut ChaCha20Rng) -> Ciphertext {
        let (_, pk) = elgamal::keygen(rng);
        let p = GroupElement::mul_base(&Scalar::random_nonzero(rng));
        elgamal::encrypt(&pk, &p, rng).unwrap()
    }

    #[test]
    fn masked_vector_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = SigningKey::generate(&mut rng);
        let ct = sample_ct(&mut rng);
        let sig = sk.sign(&neighbor_sig_bytes(&ct, 4));
        let mv = MaskedVector {
            client: 9,
            t: 4,
            payload: vec![1, u32::MAX, 0, 7],
            mask_shares: vec![MaskShareCt {
                decryptor: 2,
                ct: vec![0xAB; 60],
            }],
            neighbor_cts: vec![NeighborCt {
                neighbor: 11,
                ct,
                sig,
            }],
        };
        let bytes = encode_masked_vector(&mv);
        let back = decode_masked_vector(&bytes).unwrap();
        assert_eq!(encode_masked_vector(&back), bytes);
        assert_eq!(back.client, 9);
        assert_eq!(back.payload, mv.payload);
        assert!(decode_masked_vector(&bytes[..bytes.len() - 1]).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(decode_masked_vector(&extended).is_err());
    }

    #[test]
    fn request_encoding_is_canonical_and_roundtrips() {
        let req = DecryptionRequest {
            t: 3,
            labels: vec![(1, Label::Online), (5, Label::Offline), (6, Label::Online)],
        };
        let bytes = request_bytes(&req);
        // 8 (t) + 4 (count) + 3·9 (entries).
        assert_eq!(bytes.len(), 39);
        let back = decode_request(&bytes).unwrap();
        assert!(back == req);
        // A flipped label changes the bytes, which is what cross-check equality
        // hangs on.
        let mut other = req.clone();
        other.labels[2].1 = Label::Offline;
        assert_ne!(request_bytes(&other), bytes);
    }

    #[test]
    fn bundle_and_response_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let ct = sample_ct(&mut rng);
        let sk = SigningKey::generate(&mut rng);
        let bundle = RequestBundle {
            req: DecryptionRequest {
                t: 7,
                labels: vec![(0, Label::Offline), (3, Label::Online)],
            },
            online_shares: vec![(
                3,
                vec![
                    MaskShareCt {
                        decryptor: 1,
                        ct: vec![1, 2, 3],
                    },
                    MaskShareCt {
                        decryptor: 4,
                        ct: vec![],
                    },
                ],
            )],
            offline_pairs: vec![OfflineAttachment {
                owner: 0,
                reporter: 3,
                ct,
                sig: sk.sign(b"x"),
            }],
        };
        let bytes = encode_request_bundle(&bundle);
        let back = decode_request_bundle(&bytes).unwrap();
        assert_eq!(encode_request_bundle(&back), bytes);

        let share = Share {
            index: 2,
            value: Scalar::from_u64(77),
        };
        let c0 = GroupElement::mul_base(&Scalar::from_u64(5));
        let partial = elgamal::partial_decrypt(&share, &c0);
        let y1 = GroupElement::mul_base(&share.value);
        let proof =
            super::super::dleq::prove(&share.value, &c0, &y1, &partial.value, &mut rng);
        let resp = DecryptorResponse {
            decryptor: 4,
            share_index: 2,
            t: 7,
            mask_shares: vec![RecoveredMaskShare {
                client: 3,
                value: Scalar::from_u64(9),
            }],
            partials: vec![
                PartialWithProof {
                    owner: 0,
                    reporter: 3,
                    partial: partial.clone(),
                    proof: Some(proof),
                },
                PartialWithProof {
                    owner: 0,
                    reporter: 3,
                    partial,
                    proof: None,
                },
            ],
        };
        let bytes = encode_response(&resp);
        let back = decode_response(&bytes).unwrap();
        assert_eq!(encode_response(&back), bytes);
    }

    #[test]
    fn signed_request_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = SigningKey::generate(&mut rng);
        let req = DecryptionRequest {
            t: 1,
            labels: vec![(2, Label::Online)],
        };
        let sr = SignedRequest {
            decryptor: 6,
            sig: sk.sign(&request_bytes(&req)),
            req,
        };
        let bytes = encode_signed_request(&sr);
        let back = decode_signed_request(&bytes).unwrap();
        assert_eq!(encode_signed_request(&back), bytes);
    }
}
