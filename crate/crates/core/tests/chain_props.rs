//! Whole-chain properties checked over randomly generated multi-node runs.

use proptest::prelude::*;
use ssd_core::audit::{compute_accounting, generate_bank_report, reconcile, reconcile_signed, Period};
use ssd_core::chain::{
    apply_transaction, replay, replay_bytes, BlockContext, BlockRejection, TransactionPayload, TxEffect,
    TxStatus,
};
use ssd_core::canonical::to_canonical_json;
use ssd_core::crypto::verify;
use ssd_core::payment::compute_pay_code;
use ssd_core::sim::{random_script, run_simulation, RandomScriptParams, SimReport};
use ssd_core::TokenAmount;

fn run(seed: u64, rounds: u64) -> (ssd_core::sim::ScenarioScript, SimReport) {
    let script = random_script(RandomScriptParams {
        seed,
        rounds,
        txs_per_round: 5,
        ..Default::default()
    });
    let report = run_simulation(3, &script).unwrap();
    (script, report)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn agreement_determinism_linkage(seed in any::<u64>()) {
        let (_, report) = run(seed, 12);
        prop_assert!(report.all_agree());

        let blocks = report.blocks();
        for w in blocks.windows(2) {
            prop_assert_eq!(w[1].prev_hash, w[0].hash());
        }
        let a = replay(&report.genesis, blocks).unwrap();
        let b = replay(&report.genesis, blocks).unwrap();
        prop_assert_eq!(a.state().to_canonical_json(), b.state().to_canonical_json());
        prop_assert_eq!(a.state().state_root(), report.final_roots()[0]);
    }

    #[test]
    fn execution_walk(seed in any::<u64>()) {
        let (_, report) = run(seed, 15);
        let g = &report.genesis;
        let owner = g.owner;
        let mut state = g.initial_state().unwrap();
        let mut collected: u128 = 0;
        let mut burned: u128 = 0;
        for block in &report.blocks()[1..] {
            let ctx = BlockContext { block_time: block.block_time, proposer: block.proposer, fee: g.fee };
            for (tx, receipt) in block.txs.iter().zip(&block.receipts) {
                let before = state.clone();
                let owner_before = state.tokens.balance_of(&owner);
                let res = apply_transaction(&mut state, tx, &ctx);
                match res {
                    Err(e) => {
                        prop_assert_eq!(receipt.status, TxStatus::Rejected);
                        prop_assert_eq!(receipt.reason.as_deref(), Some(e.code()));
                        prop_assert_eq!(&state, &before);
                    }
                    Ok(effect) => {
                        prop_assert_eq!(receipt.status, TxStatus::Applied);
                        if let TxEffect::Payment(p) = effect {
                            let price = before.stamps.get(&p.stamp_code).unwrap().stamp_price;
                            prop_assert_eq!(state.tokens.balance_of(&owner).0, owner_before.0 + price.0);
                            prop_assert_eq!(
                                before.tokens.balance_of(&p.payer).0 - state.tokens.balance_of(&p.payer).0,
                                price.0
                            );
                            collected += price.0 as u128;
                        }
                        if let TransactionPayload::Burn { amount } = tx.payload {
                            burned += amount.0 as u128;
                        }
                    }
                }
            }
            prop_assert_eq!(state.state_root(), block.state_root);
            prop_assert!(compute_accounting(g, &state).identity_holds());
            prop_assert_eq!(state.tokens.balance_of(&owner).0 as u128, collected - burned);
        }
        for p in state.payments.iter() {
            prop_assert!(p.check_invariants().is_ok());
            prop_assert_eq!(
                compute_pay_code(&p.doc_hash, &p.payer, &p.stamp_code, p.time_stamp).unwrap(),
                p.pay_code
            );
            prop_assert!(verify(&p.doc_hash, &p.payer_signature, &p.payer));
            prop_assert!(state.stamps.get(&p.stamp_code).is_ok());
        }
    }

    #[test]
    fn reconciliation_soundness(seed in any::<u64>(), field in 0usize..4, bump in 1u64..1000) {
        let (script, report) = run(seed, 10);
        let g = &report.genesis;
        let bank = script.actor_key("bank0").unwrap();
        let period = Period::new(script.start_time, script.block_time(10)).unwrap();
        let honest = generate_bank_report(g, &bank.address(), period, report.blocks()).unwrap();
        prop_assert!(reconcile(g, &honest, report.blocks()).matches);
        let signed = honest.clone().sign(&bank);
        prop_assert!(reconcile_signed(g, &signed, report.blocks()).matches);

        let mut tampered = signed.clone();
        match field {
            0 => tampered.report.reported_tokens_sold = TokenAmount(honest.reported_tokens_sold.0 + bump),
            1 => tampered.report.tx_count += bump,
            2 => tampered.report.period.end += bump,
            _ => tampered.report.bank = script.actor_address("bank1").unwrap(),
        }
        let r = reconcile_signed(g, &tampered, report.blocks());
        prop_assert!(!r.matches);
        prop_assert!(r.reason.is_some());
    }

    #[test]
    fn corrupted_log_fails_at_its_height(seed in any::<u64>(), line_pick in any::<prop::sample::Index>(), pos in any::<prop::sample::Index>(), byte in any::<u8>()) {
        let (_, report) = run(seed, 6);
        let lines: Vec<String> = report.blocks().iter().map(to_canonical_json).collect();
        let h = line_pick.index(lines.len());
        let mut raw = lines[h].clone().into_bytes();
        let i = pos.index(raw.len());
        prop_assume!(raw[i] != byte && byte != b'\n');
        raw[i] = byte;
        let mut log = Vec::new();
        for (j, l) in lines.iter().enumerate() {
            if j == h { log.extend_from_slice(&raw) } else { log.extend_from_slice(l.as_bytes()) }
            log.push(b'\n');
        }
        let err = replay_bytes(&report.genesis, &log).unwrap_err();
        prop_assert_eq!(err.height, h as u64);
        let _: &BlockRejection = &err.reason;
    }
}
