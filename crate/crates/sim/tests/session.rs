//! Whole-session runs through the simulator: honest behaviour, determinism,
//! and each scripted attack with the outcome it must force.

use std::collections::BTreeSet;

use aggsum_core::crypto::group::GroupElement;
use aggsum_core::crypto::shamir;
use aggsum_core::params::ProtocolConfig;
use aggsum_sim::{
    run_session, AbortReason, ClientBehavior, DkgSummary, DropoutPlan, Outcome, RoundDropouts,
    ServerBehavior, SessionAbort, SessionOutcome, SimParams, World,
};

/// Small enough to run everywhere in this file, large enough that every
/// moving part (dropout budgets, committee quorums, pairwise recovery) is
/// exercised: 24 clients, cohorts of 12, a committee of 4 with ℓ = 1.
fn small_config() -> ProtocolConfig {
    ProtocolConfig {
        n_total: 24,
        rounds: 4,
        cohort_size: 12,
        dim: 16,
        delta: 0.25,
        delta_d: 0.1,
        eta: 0.1,
        eta_d: 0.1,
        decryptors: 4,
        ell: 1,
        rho: 1,
        transfer_period: 0,
        kappa: 6,
        lambda: 256,
        k_min: 2,
        timeout_report_us: 250_000,
        timeout_check_us: 150_000,
        timeout_recon_us: 250_000,
        timeout_dkg_us: 200_000,
    }
}

fn honest(seed: u64) -> SimParams {
    SimParams::honest(small_config(), seed)
}

/// One scripted reporter dropout per round, chosen outside the committee so
/// offline-pair recovery is exercised while all four decryptors serve.
fn one_dropout_per_round(seed: u64) -> DropoutPlan {
    let probe = World::new(honest(seed)).expect("valid config");
    let committee: BTreeSet<_> = probe.committee().iter().copied().collect();
    let plan = (1..=small_config().rounds)
        .map(|t| {
            let victim = probe
                .cohort(t)
                .into_iter()
                .find(|id| !committee.contains(id))
                .expect("cohort larger than committee");
            RoundDropouts {
                reporters: BTreeSet::from([victim]),
                decryptors: BTreeSet::new(),
            }
        })
        .collect();
    DropoutPlan::Scripted(plan)
}

#[test]
fn honest_session_completes_with_exact_sums() {
    let report = run_session(honest(11)).expect("valid config");
    assert_eq!(report.outcome, SessionOutcome::Completed);
    assert_eq!(report.setup.dkg_finished, 4);
    assert_eq!(report.rounds.len(), 4);
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::SumOk, "round {}", r.t);
        assert_eq!(r.oracle_match, Some(true), "round {}", r.t);
        assert_eq!(r.rt_count, 3);
        assert!(r.tau >= 0.75, "round {} kept only {:.2}", r.t, r.tau);
        assert!(r.bytes_server_in > 0 && r.bytes_server_out > 0);
    }
    assert!(report.audit.clean());
}

#[test]
fn same_seed_replays_the_same_bytes() {
    let mut params = honest(42);
    params.capture_trace = true;
    let a = run_session(params.clone()).unwrap();
    let b = run_session(params.clone()).unwrap();
    assert!(!a.trace.is_empty());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.trace, b.trace);

    params.seed = 43;
    let c = run_session(params).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn plain_cohort_members_speak_exactly_once_per_round() {
    let mut world = World::new(honest(7)).unwrap();
    world.setup().unwrap();
    for t in 1..=4 {
        let rt = world.run_round(t).rt_count;
        assert_eq!(rt, 3, "round {t} took {rt} exchanges");
        assert_eq!(world.last_round_nondecryptor_msgs(), 1, "round {t}");
    }
}

#[test]
fn equivocating_labels_starve_the_quorum() {
    let mut params = honest(5);
    params.adversary.server = ServerBehavior::EquivocateLabels;
    let report = run_session(params).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::Abort(AbortReason::Quorum), "round {}", r.t);
        assert_eq!(r.rt_count, 2, "no reconstruction leg after a failed check");
    }
    assert!(report.audit.clean(), "aborting must not leak the masks");
}

#[test]
fn split_qualification_views_abort_setup() {
    let mut params = honest(9);
    params.adversary.server = ServerBehavior::SplitQual;

    let mut world = World::new(params.clone()).unwrap();
    let abort = world.setup().expect_err("no half may reach the vote quorum");
    assert_eq!(abort, SessionAbort::PkQuorum { got: 0, need: 3 });
    for (id, outcome) in world.dkg_outcomes() {
        assert!(
            matches!(outcome, DkgSummary::Aborted(_)),
            "party {id} ended with {outcome:?}"
        );
    }

    let report = run_session(params).unwrap();
    assert!(matches!(
        report.outcome,
        SessionOutcome::Aborted(SessionAbort::PkQuorum { got: 0, need: 3 })
    ));
    assert!(report.rounds.is_empty());
}

#[test]
fn replayed_attachments_are_ignored_item_by_item() {
    let mut params = honest(13);
    params.adversary.server = ServerBehavior::ReplayCrossRound;
    params.dropouts = one_dropout_per_round(13);
    let report = run_session(params).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::SumOk, "round {}", r.t);
        assert_eq!(r.oracle_match, Some(true), "round {}", r.t);
    }
    assert!(report.audit.clean());
}

#[test]
fn tampered_partials_poison_the_sum_without_proofs() {
    let mut params = honest(21);
    params.adversary.corrupt_committee_slots = vec![0];
    params.adversary.clients = ClientBehavior::BadPartials;
    params.dropouts = one_dropout_per_round(21);
    params.robust = false;
    let report = run_session(params).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    for r in &report.rounds {
        assert_eq!(
            r.oracle_match,
            Some(false),
            "round {}: a shifted partial must corrupt the recovered masks",
            r.t
        );
        assert!(r.excluded_decryptors.is_empty(), "nothing detects the shift");
    }
}

#[test]
fn proofs_of_decryption_evict_the_tamperer() {
    let probe = World::new(honest(21)).unwrap();
    let crook = probe.committee()[0];

    let mut params = honest(21);
    params.adversary.corrupt_committee_slots = vec![0];
    params.adversary.clients = ClientBehavior::BadPartials;
    params.dropouts = one_dropout_per_round(21);
    params.robust = true;
    let report = run_session(params).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::SumOk, "round {}", r.t);
        assert_eq!(r.oracle_match, Some(true), "round {}", r.t);
        assert_eq!(r.excluded_decryptors, vec![crook], "round {}", r.t);
    }
}

#[test]
fn a_decryptor_can_sit_out_a_round_and_return() {
    let probe = World::new(honest(17)).unwrap();
    let sleeper = probe.committee()[1];

    let mut plan = vec![RoundDropouts::default(); 4];
    plan[0].decryptors = BTreeSet::from([sleeper]);
    let mut params = honest(17);
    params.dropouts = DropoutPlan::Scripted(plan);

    let report = run_session(params).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::SumOk, "round {}", r.t);
        assert_eq!(r.oracle_match, Some(true), "round {}", r.t);
    }
}

#[test]
fn handover_preserves_the_key_and_the_service() {
    let mut config = small_config();
    config.transfer_period = 1;
    let report = run_session(SimParams::honest(config.clone(), 29)).unwrap();
    assert_eq!(report.outcome, SessionOutcome::Completed);
    assert_eq!(report.transfers.len(), 3, "after rounds 1, 2 and 3");
    for tr in &report.transfers {
        assert_eq!(tr.holders, 4, "transfer after round {}", tr.after_round);
    }
    for r in &report.rounds {
        assert_eq!(r.outcome, Outcome::SumOk, "round {}", r.t);
        assert_eq!(r.oracle_match, Some(true), "round {}", r.t);
    }

    // Same thing step by step: the group key is untouched and the fresh
    // shares still interpolate to its secret.
    let mut world = World::new(SimParams::honest(config, 29)).unwrap();
    world.setup().unwrap();
    let pk = world.public_key();
    let before: Vec<_> = world.committee().to_vec();
    world.run_round(1);
    world.run_transfer(1).unwrap();
    assert_eq!(world.public_key(), pk);
    assert_ne!(world.committee(), before, "a fresh committee was elected");
    let shares = world.committee_shares();
    let sk = shamir::recon(&shares[..2], 1).unwrap();
    assert_eq!(GroupElement::mul_base(&sk), pk);
}
