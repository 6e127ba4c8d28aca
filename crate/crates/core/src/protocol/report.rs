//! Client side of the report step.

use rand::{CryptoRng, RngCore};

use crate::crypto::elgamal;
use crate::crypto::group::{FixedBaseTable, GroupElement, Scalar};
use crate::crypto::prf::prf;
use crate::crypto::prg::{apply_mask, Sign};
use crate::crypto::{aead, group_to_seed, hash_to_group, shamir, Seed};
use crate::graph::find_neighbors;
use crate::protocol::types::*;
use crate::protocol::wire::neighbor_sig_bytes;
use crate::{ClientId, Round};

/// Domain tag for mapping a round-scoped pair seed onto a group element. The
/// pairwise mask seed is the hash of that element, so whoever ends up with
/// the element — both endpoints, or the server after a threshold decryption —
/// derives the same mask.
pub const PAIR_POINT_DOMAIN: &str = "aggsum/pair-point";

/// The group element carrying the pairwise seed for (i, j) in round t, as
/// derived by either endpoint.
pub fn pair_point(session: &mut ClientSession, dir: &Directory, j: ClientId, t: Round) -> GroupElement {
    let s = session.round_pair_seed(dir, j, t);
    hash_to_group(PAIR_POINT_DOMAIN, s.as_bytes())
}

/// The additive mask seed hidden in a pair point, optionally bound to the
/// model digest the masked vector claims to be an update for.
pub fn seed_from_point(point: &GroupElement, model_hash: Option<&[u8]>) -> Seed {
    let base = group_to_seed(point);
    match model_hash {
        None => base,
        Some(mh) => prf(&base, mh),
    }
}

/// Sign convention for the pairwise mask between `me` and `other`: the
/// lower-id endpoint adds, the higher-id endpoint subtracts, so the two
/// contributions cancel in the aggregate.
pub fn pair_sign(me: ClientId, other: ClientId) -> Sign {
    if me < other {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Run the report step for one client. Returns `Ok(None)` when the client is
/// not in this round's cohort (it stays silent), otherwise the masked vector
/// to send. `x` must have the configured width and is consumed by value —
/// masking happens in place.
pub fn client_report<R: RngCore + CryptoRng>(
    session: &mut ClientSession,
    sctx: &SessionContext,
    dir: &Directory,
    pk_table: &FixedBaseTable,
    t: Round,
    x: Vec<u32>,
    rng: &mut R,
) -> Result<Option<MaskedVector>, ProtocolError> {
    let me = session.id();
    let ctx = sctx.round_context(t);
    let members = ctx.choose_set()?;
    if members.binary_search(&me).is_err() {
        return Ok(None);
    }
    if x.len() != sctx.config.dim as usize {
        return Err(ProtocolError::DimMismatch {
            want: sctx.config.dim,
            got: x.len(),
        });
    }

    let mut payload = x;

    // Individual mask: a fresh scalar whose canonical bytes seed the PRG, so
    // decryptors can reconstruct it from Shamir shares in the field.
    let m_scalar = Scalar::random_nonzero(rng);
    let m_seed = Seed::from_bytes(m_scalar.to_bytes());
    apply_mask(&mut payload, &m_seed, Sign::Plus);

    // Pairwise masks plus their escrow ciphertexts, one per neighbor.
    let neighbors = find_neighbors(&sctx.v, &members, me, sctx.config.rho)?;
    let mut neighbor_cts = Vec::with_capacity(neighbors.len());
    for j in neighbors {
        let point = pair_point(session, dir, j, t);
        let seed = seed_from_point(&point, sctx.model_hash.as_deref());
        apply_mask(&mut payload, &seed, pair_sign(me, j));
        let ct = elgamal::encrypt_with_table(pk_table, &point, rng)?;
        let sig = session.keys.sig.sign(&neighbor_sig_bytes(&ct, t));
        neighbor_cts.push(NeighborCt {
            neighbor: j,
            ct,
            sig,
        });
    }

    // Escrow the individual mask: one sealed Shamir share per decryptor, in
    // roster order so share index u goes to the u-th decryptor.
    let shares = shamir::share(
        &m_scalar,
        sctx.config.ell,
        sctx.config.decryptors,
        rng,
    )?;
    let mask_shares = sctx
        .decryptors
        .iter()
        .zip(&shares)
        .map(|(&u, s)| {
            let key = session.sym_key(dir, u);
            MaskShareCt {
                decryptor: u,
                ct: aead::seal(&key, t, &s.value.to_bytes(), rng),
            }
        })
        .collect();

    Ok(Some(MaskedVector {
        client: me,
        t,
        payload,
        mask_shares,
        neighbor_cts,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProtocolConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tiny_sctx(rng: &mut ChaCha20Rng) -> (SessionContext, Vec<ClientKeys>, GroupElement) {
        let config = ProtocolConfig {
            n_total: 8,
            rounds: 3,
            cohort_size: 8,
            dim: 16,
            delta: 0.34,
            delta_d: 0.25,
            eta: 0.0,
            eta_d: 0.0,
            decryptors: 4,
            ell: 1,
            rho: 0,
            transfer_period: 0,
            kappa: 8,
            lambda: 256,
            k_min: 1,
            timeout_report_us: 250_000,
            timeout_check_us: 150_000,
            timeout_recon_us: 250_000,
            timeout_dkg_us: 200_000,
        };
        let keys: Vec<ClientKeys> = (0..8).map(|i| ClientKeys::generate(i, rng)).collect();
        let (_, pk) = elgamal::keygen(rng);
        let sctx = SessionContext {
            config,
            v: Seed::from_bytes([5; 32]),
            pk,
            decryptors: vec![0, 2, 5, 7],
            model_hash: None,
        };
        (sctx, keys, pk)
    }

    #[test]
    fn report_shape_and_masking() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (sctx, keys, pk) = tiny_sctx(&mut rng);
        let dir = Directory::publish(&keys);
        let table = FixedBaseTable::new(&pk);
        let mut sessions: Vec<ClientSession> =
            keys.into_iter().map(ClientSession::new).collect();

        let x: Vec<u32> = (0..16).collect();
        let mv = client_report(
            &mut sessions[3],
            &sctx,
            &dir,
            &table,
            1,
            x.clone(),
            &mut rng,
        )
        .unwrap()
        .unwrap();
        assert_eq!(mv.client, 3);
        assert_eq!(mv.payload.len(), 16);
        // Complete graph (rho = 0) over 8 members: 7 neighbors, 4 decryptors.
        assert_eq!(mv.neighbor_cts.len(), 7);
        assert_eq!(mv.mask_shares.len(), 4);
        // Masked payload should not equal the input (2^-512-ish fluke odds).
        assert_ne!(mv.payload, x);
    }

    #[test]
    fn wrong_width_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let (sctx, keys, pk) = tiny_sctx(&mut rng);
        let dir = Directory::publish(&keys);
        let table = FixedBaseTable::new(&pk);
        let mut session = ClientSession::new(ClientKeys::generate(3, &mut rng));
        // Re-key client 3 so the directory stays aligned; only the error path
        // matters here.
        let err = client_report(&mut session, &sctx, &dir, &table, 1, vec![0; 3], &mut rng)
            .unwrap_err();
        assert_eq!(err, ProtocolError::DimMismatch { want: 16, got: 3 });
    }

    #[test]
    fn pairwise_masks_cancel_between_endpoints() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let (sctx, keys, _) = tiny_sctx(&mut rng);
        let dir = Directory::publish(&keys);
        let mut a = ClientSession::new(ClientKeys {
            id: keys[1].id,
            dh: keys[1].dh,
            enc: keys[1].enc,
            sig: keys[1].sig.clone(),
        });
        let mut b = ClientSession::new(ClientKeys {
            id: keys[6].id,
            dh: keys[6].dh,
            enc: keys[6].enc,
            sig: keys[6].sig.clone(),
        });
        let p_ab = pair_point(&mut a, &dir, 6, 2);
        let p_ba = pair_point(&mut b, &dir, 1, 2);
        assert_eq!(p_ab, p_ba);
        let seed = seed_from_point(&p_ab, sctx.model_hash.as_deref());
        let mut acc = vec![0u32; 8];
        apply_mask(&mut acc, &seed, pair_sign(1, 6));
        apply_mask(&mut acc, &seed, pair_sign(6, 1));
        assert_eq!(acc, vec![0; 8]);
        // Different rounds give unlinked points.
        assert_ne!(pair_point(&mut a, &dir, 6, 3), p_ab);
    }
}
