//! Cross-checks the funder walk against an independently written oracle on
//! synthetic transaction graphs, and exercises the DB-growth property.

use evm_lift::types::Address;
use fundsource::{
    trace_fund_source, AddressLabelDB, FixtureGraph, FundSourceCategory, Transfer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_DEPTH: u32 = 10;

/// Reference walk, written against the raw transfer list rather than the
/// provider: chronologically sort all value-bearing transfers once, then
/// take the first inflow for each hop by linear scan.
fn oracle_trace(
    transfers: &[Transfer],
    labels: &[(Address, FundSourceCategory)],
    deployer: Address,
    max_depth: u32,
) -> FundSourceCategory {
    let mut sorted: Vec<&Transfer> = transfers.iter().filter(|t| t.value > 0).collect();
    sorted.sort_by_key(|t| (t.block, t.index));
    let mut seen = vec![deployer];
    let mut current = deployer;
    for _ in 0..max_depth {
        let Some(hop) = sorted.iter().find(|t| t.fundee == current) else {
            return FundSourceCategory::Unknown;
        };
        let funder = hop.funder;
        if let Some(&(_, cat)) = labels.iter().find(|(a, _)| *a == funder) {
            if cat != FundSourceCategory::Unknown {
                return cat;
            }
        }
        if seen.contains(&funder) {
            return FundSourceCategory::Unknown;
        }
        seen.push(funder);
        current = funder;
    }
    FundSourceCategory::Unknown
}

fn addr(n: u8) -> Address {
    Address([n; 20])
}

fn random_world(
    rng: &mut ChaCha8Rng,
) -> (Vec<Transfer>, Vec<(Address, FundSourceCategory)>, Address) {
    let pool = 24u8;
    let n_transfers = rng.random_range(30..120usize);
    let mut transfers = Vec::with_capacity(n_transfers);
    for _ in 0..n_transfers {
        let funder = addr(rng.random_range(1..=pool));
        let mut fundee = addr(rng.random_range(1..=pool));
        while fundee == funder {
            fundee = addr(rng.random_range(1..=pool));
        }
        transfers.push(Transfer {
            funder,
            fundee,
            block: rng.random_range(0..50),
            index: rng.random_range(0..10),
            value: rng.random_range(0..5),
        });
    }
    let mut labels = Vec::new();
    for n in 1..=pool {
        if rng.random_bool(0.2) {
            let cat = match rng.random_range(0..4u8) {
                0 => FundSourceCategory::Safe,
                1 => FundSourceCategory::Anonymous,
                2 => FundSourceCategory::Bridge,
                _ => FundSourceCategory::Unknown,
            };
            labels.push((addr(n), cat));
        }
    }
    let deployer = addr(rng.random_range(1..=pool));
    (transfers, labels, deployer)
}

fn build_db(labels: &[(Address, FundSourceCategory)]) -> AddressLabelDB {
    let mut db = AddressLabelDB::new();
    for (i, (a, c)) in labels.iter().enumerate() {
        db.insert(*a, format!("entity{i}"), *c);
    }
    db
}

#[test]
fn walk_matches_oracle_on_synthetic_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf00d);
    for case in 0..50 {
        let (transfers, labels, deployer) = random_world(&mut rng);
        let graph = FixtureGraph::from_transfers(transfers.clone());
        let db = build_db(&labels);

        let got = trace_fund_source(deployer, &graph, &db, MAX_DEPTH);
        let want = oracle_trace(&transfers, &labels, deployer, MAX_DEPTH);
        assert_eq!(got.category, want, "case {case} diverged from oracle");
        assert!(got.path.len() as u32 <= MAX_DEPTH);

        // determinism for a fixed snapshot
        let again = trace_fund_source(deployer, &graph, &db, MAX_DEPTH);
        assert_eq!(got, again);

        // the text form answers identically
        let reparsed = FixtureGraph::parse(&graph.to_text()).unwrap();
        let via_text = trace_fund_source(deployer, &reparsed, &db, MAX_DEPTH);
        assert_eq!(got.category, via_text.category, "case {case}: text round-trip changed the verdict");
    }
}

#[test]
fn growing_the_db_never_demotes_to_unknown() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    let mut checked = 0u32;
    for _ in 0..200 {
        let (transfers, labels, deployer) = random_world(&mut rng);
        let graph = FixtureGraph::from_transfers(transfers);
        let base = build_db(&labels);
        let before = trace_fund_source(deployer, &graph, &base, MAX_DEPTH);
        if before.category == FundSourceCategory::Unknown {
            continue;
        }
        checked += 1;
        let mut bigger = base.clone();
        for n in 1..=24u8 {
            if bigger.label_address(&addr(n)).is_none() && rng.random_bool(0.5) {
                let cat = match rng.random_range(0..4u8) {
                    0 => FundSourceCategory::Safe,
                    1 => FundSourceCategory::Anonymous,
                    2 => FundSourceCategory::Bridge,
                    _ => FundSourceCategory::Unknown,
                };
                bigger.insert(addr(n), "late", cat);
            }
        }
        let after = trace_fund_source(deployer, &graph, &bigger, MAX_DEPTH);
        assert_ne!(
            after.category,
            FundSourceCategory::Unknown,
            "a larger DB demoted a definite result"
        );
        // and the resolution point can only move earlier
        assert!(after.path.len() <= before.path.len());
    }
    assert!(checked >= 20, "only {checked} definite base cases; generator drifted");
}

#[test]
fn depth_and_cycle_rules_on_fixture_text() {
    // a 3-cycle feeding the deployer, everything unlabeled
    let mut text = String::new();
    let hex20 = |n: u8| format!("0x{}", [n; 20].iter().map(|b| format!("{b:02x}")).collect::<String>());
    text.push_str(&format!("{} -> {} block=1 index=0 value=9\n", hex20(2), hex20(1)));
    text.push_str(&format!("{} -> {} block=1 index=1 value=9\n", hex20(3), hex20(2)));
    text.push_str(&format!("{} -> {} block=1 index=2 value=9\n", hex20(4), hex20(3)));
    text.push_str(&format!("{} -> {} block=1 index=3 value=9\n", hex20(2), hex20(4)));
    let graph = FixtureGraph::parse(&text).unwrap();
    let trace = trace_fund_source(addr(1), &graph, &AddressLabelDB::new(), 100);
    assert_eq!(trace.category, FundSourceCategory::Unknown);
    assert_eq!(trace.path.len(), 4, "walk should stop on revisiting 0x02..");

    // chain long enough to exhaust the budget exactly
    let mut text = String::new();
    for n in 1..=12u8 {
        text.push_str(&format!(
            "{} -> {} block={} index=0 value=1\n",
            hex20(n + 1),
            hex20(n),
            n
        ));
    }
    let graph = FixtureGraph::parse(&text).unwrap();
    let mut db = AddressLabelDB::new();
    db.insert(addr(13), "Exchange", FundSourceCategory::Safe);
    let at_10 = trace_fund_source(addr(1), &graph, &db, 10);
    assert_eq!(at_10.category, FundSourceCategory::Unknown);
    let at_12 = trace_fund_source(addr(1), &graph, &db, 12);
    assert_eq!(at_12.category, FundSourceCategory::Safe);
}
