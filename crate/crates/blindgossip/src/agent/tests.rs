use super::*;
use crate::arith::{fuse_plain, PlainGossip};
use crate::pre::{ExponentGroup, Supersingular};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn params() -> ModulusParams {
    ModulusParams::new(248, 16, 80).unwrap()
}

fn agents_with<B: PairingGroup>(group: B, inputs: &[u64], red: Option<Reduction>, seed: u64) -> Vec<Agent<B>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    setup(Pre::new(group), params(), red, inputs, &KeyDistribution::Dynamic, &mut rng).unwrap()
}

fn keys<B: PairingGroup>(agents: &[Agent<B>]) -> Vec<&SecretKey> {
    agents.iter().map(|a| a.secret_key()).collect()
}

fn last_steps(schedule: &[(usize, usize)], n: usize) -> Vec<Option<usize>> {
    let mut last = vec![None; n];
    for (k, &(i, j)) in schedule.iter().enumerate() {
        last[i] = Some(k);
        last[j] = Some(k);
    }
    last
}

/// Runs `schedule` on both the protocol and the oracle, checking every agent after every step.
fn run_against_oracle<B: PairingGroup>(agents: &mut [Agent<B>], schedule: &[(usize, usize)], red: Option<Reduction>, seed: u64) -> PlainGossip {
    let inputs: Vec<u64> = agents.iter().map(|a| a.input()).collect();
    let mut oracle = PlainGossip::new(&inputs, params(), red);
    let last = last_steps(schedule, agents.len());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for (k, &(i, j)) in schedule.iter().enumerate() {
        let finals = (last[i] == Some(k), last[j] == Some(k));
        let mut rj = ChaCha20Rng::seed_from_u64(rng.gen());
        let wire = update_step(agents, i, j, finals, &mut rng, &mut rj).unwrap();
        oracle.step(i, j);
        let q_bits = agents[0].directory().pre.group().order_bits();
        assert!(wire.total_bits() < step_bit_bound(q_bits, 248));
        let sks: Vec<SecretKey> = agents.iter().map(|a| a.secret_key().clone()).collect();
        let sk_refs: Vec<&SecretKey> = sks.iter().collect();
        for (a, agent) in agents.iter().enumerate() {
            assert_eq!(&unmask(agent, &sk_refs), oracle.shadow(a), "step {k} agent {a}");
            if agent.last_partner().is_some() {
                assert_ne!(agent.masked_numerator(), &oracle.shadow(a).numerator, "unmasked at rest");
            }
        }
    }
    oracle
}

#[test]
fn key_distribution_counts() {
    let dyn3 = agents_with(ExponentGroup::new(), &[1, 2, 3], None, 1);
    for a in &dyn3 {
        assert_eq!(a.rekey_counts(), (2, 2));
        assert!(!a.has_rekey(a.id(), (a.id() + 1) % 3));
    }
    let dyn2 = agents_with(ExponentGroup::new(), &[1, 2], None, 1);
    assert_eq!(dyn2[0].rekey_counts(), (0, 1));
    // Ring of five: foreign keys only between the two neighbours, counted by enumeration.
    let neighbours: Vec<Vec<usize>> = (0..5).map(|i| vec![(i + 4) % 5, (i + 1) % 5]).collect();
    let expected: Vec<usize> = neighbours
        .iter()
        .map(|nb| nb.iter().flat_map(|a| nb.iter().map(move |b| (a, b))).filter(|(a, b)| a != b).count())
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let ring = setup(Pre::new(ExponentGroup::new()), params(), None, &[1; 5], &KeyDistribution::Static { neighbours }, &mut rng)
        .unwrap();
    for (a, e) in ring.iter().zip(expected) {
        assert_eq!(a.rekey_counts().0, e);
        assert_eq!(e, 2);
    }
}

#[test]
fn static_keys_reject_non_neighbour_forwarding() {
    let neighbours = vec![vec![1], vec![0, 2], vec![1]];
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut agents =
        setup(Pre::new(ExponentGroup::new()), params(), None, &[1, 2, 3], &KeyDistribution::Static { neighbours }, &mut rng)
            .unwrap();
    let mut r2 = ChaCha20Rng::seed_from_u64(4);
    update_step(&mut agents, 0, 1, (false, false), &mut rng, &mut r2).unwrap();
    // Agent 1 forwards 0's mask to 2 with rk_{0->2}, which it holds as a neighbour of both.
    update_step(&mut agents, 1, 2, (false, false), &mut rng, &mut r2).unwrap();
    // Agent 2 now holds a mask from 1; forwarding it to 0 needs rk_{1->0}, which 2 lacks.
    let err = agents[2].update_part1(0, &mut rng).unwrap_err();
    assert_eq!(err, ProtocolError::MissingReKey { agent: 2, from: 1, to: 0 });
}

#[test]
fn single_step_matches_fuse_plain() {
    let mut agents = agents_with(ExponentGroup::new(), &[10, 20, 7], None, 5);
    let mut r1 = ChaCha20Rng::seed_from_u64(6);
    let mut r2 = ChaCha20Rng::seed_from_u64(7);
    let before = agents[2].masked_numerator().clone();
    let wire = update_step(&mut agents, 0, 1, (false, false), &mut r1, &mut r2).unwrap();
    let sks = keys(&agents);
    let s0 = unmask(&agents[0], &sks);
    let expected = fuse_plain(&RationalState::initial(10), &RationalState::initial(20), &params());
    assert_eq!(s0, expected);
    assert_eq!(unmask(&agents[1], &sks), expected);
    assert_eq!(agents[0].denom_exp(), 1);
    assert_eq!(agents[2].masked_numerator(), &before);
    assert_eq!(wire.rounds(), 2);
    // Bootstrap: no envelope to forward.
    assert_eq!(agents[0].census(), Census { updates: 1, reencryptions: 0, l2_encryptions: 1, l1_decryptions: 0 });
    update_step(&mut agents, 1, 2, (false, false), &mut r1, &mut r2).unwrap();
    assert_eq!(agents[1].census(), Census { updates: 2, reencryptions: 1, l2_encryptions: 2, l1_decryptions: 0 });
    assert_eq!(agents[2].census(), Census { updates: 1, reencryptions: 0, l2_encryptions: 1, l1_decryptions: 1 });
}

#[test]
fn random_runs_match_oracle_including_repeats() {
    for seed in 0..6u64 {
        let n = 2 + (seed as usize % 4);
        let mut rng = ChaCha20Rng::seed_from_u64(100 + seed);
        let inputs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1 << 16)).collect();
        let mut agents = agents_with(ExponentGroup::new(), &inputs, None, seed);
        let schedule: Vec<(usize, usize)> = (0..30)
            .map(|_| {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                (i, j)
            })
            .collect();
        let oracle = run_against_oracle(&mut agents, &schedule, None, seed);
        assert!(oracle.exact_mean_conserved());
    }
}

#[test]
fn pairing_backend_step() {
    let mut agents = agents_with(Supersingular::new(), &[3, 9, 12], None, 8);
    run_against_oracle(&mut agents, &[(0, 1), (1, 2), (2, 0), (1, 2)], None, 9);
}

#[test]
fn reduction_variant_matches_shifted_oracle() {
    let red = Reduction { ell1: 6, shift: 3 };
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let inputs: Vec<u64> = (0..4).map(|_| rng.gen_range(0..1 << 16)).collect();
    let mut agents = agents_with(ExponentGroup::new(), &inputs, Some(red), 12);
    let schedule: Vec<(usize, usize)> = (0..60).map(|k| [(0, 1), (2, 3), (1, 2), (3, 0), (0, 2)][k % 5]).collect();
    let oracle = run_against_oracle(&mut agents, &schedule, Some(red), 13);
    assert!(agents.iter().all(|a| a.denom_exp() <= red.ell1));
    assert!(!oracle.wrapped());
    for a in 0..4 {
        assert!(oracle.drift(a).cmp_value(oracle.drift_bound(a)).is_le());
    }
}

#[test]
fn reduction_preconditions() {
    let p = params();
    let bound = 248 - 16 - 80 - 1;
    assert_eq!(
        check_reduction(&p, &Reduction { ell1: bound as u32, shift: 1 }),
        Err(ProtocolError::ReductionBound { ell1: bound as u32, bound })
    );
    assert!(check_reduction(&p, &Reduction { ell1: bound as u32 - 1, shift: 1 }).is_ok());
    assert!(check_reduction(&p, &Reduction { ell1: 8, shift: 0 }).is_ok());
    assert!(check_reduction(&p, &Reduction { ell1: 8, shift: 8 }).is_err());
}

#[test]
fn zero_shift_is_the_plain_update() {
    let mut agents = agents_with(ExponentGroup::new(), &[4, 9, 1], Some(Reduction { ell1: 2, shift: 0 }), 30);
    assert_eq!(agents[0].directory().reduction, None);
    run_against_oracle(&mut agents, &[(0, 1), (1, 2), (0, 2), (0, 1)], None, 31);
}

#[test]
fn busy_and_ordering_errors() {
    let mut agents = agents_with(ExponentGroup::new(), &[1, 2, 3], None, 14);
    let mut rng = ChaCha20Rng::seed_from_u64(15);
    let m = agents[0].update_part1(1, &mut rng).unwrap();
    assert_eq!(agents[0].update_part1(2, &mut rng).unwrap_err(), ProtocolError::Busy(0));
    let mut r2 = ChaCha20Rng::seed_from_u64(16);
    assert_eq!(update_step(&mut agents, 0, 2, (false, false), &mut rng, &mut r2).unwrap_err(), ProtocolError::Busy(0));
    assert!(matches!(agents[2].update_part2(&m, false, &mut rng), Err(ProtocolError::OutOfOrder { agent: 2, .. })));
    assert!(agents[0].update_part1(0, &mut rng).is_err());
}

#[test]
fn messages_round_trip_and_reject_garbage() {
    let mut agents = agents_with(ExponentGroup::new(), &[1, 2, 3], None, 17);
    let mut rng = ChaCha20Rng::seed_from_u64(18);
    let mut r2 = ChaCha20Rng::seed_from_u64(19);
    update_step(&mut agents, 0, 1, (false, false), &mut rng, &mut r2).unwrap();
    let dir = Arc::clone(&agents[0].dir);
    let (g, p) = (dir.pre.group(), &dir.params);
    let m1 = agents[0].update_part1(2, &mut rng).unwrap();
    let bytes = m1.encode(g, p);
    assert_eq!(UpdateMsg1::decode(g, p, &bytes).unwrap(), m1);
    let mut long = bytes.clone();
    long.push(0);
    assert!(UpdateMsg1::<ExponentGroup>::decode(g, p, &long).is_err());
    assert!(UpdateMsg1::<ExponentGroup>::decode(g, p, &bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn final_update_width_overflow() {
    let p = ModulusParams::new(100, 16, 80).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(20);
    let mut agents = setup(Pre::new(ExponentGroup::new()), p, None, &[1, 2], &KeyDistribution::Dynamic, &mut rng).unwrap();
    let mut r2 = ChaCha20Rng::seed_from_u64(21);
    // 16 + e + 80 + 1 <= 100 allows e <= 3.
    for _ in 0..2 {
        update_step(&mut agents, 0, 1, (false, false), &mut rng, &mut r2).unwrap();
    }
    update_step(&mut agents, 0, 1, (true, true), &mut rng, &mut r2).unwrap();
    let err = update_step(&mut agents, 0, 1, (true, true), &mut rng, &mut r2).unwrap_err();
    assert_eq!(err, ProtocolError::WidthOverflow { needed: 101, available: 100 });
    assert!(!agents[0].is_busy() && !agents[1].is_busy());
}

#[test]
fn decisions_match_plaintext() {
    let mut rng = ChaCha20Rng::seed_from_u64(22);
    for trial in 0..12u64 {
        let n = 2 + (trial as usize % 4);
        let inputs: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1 << 16)).collect();
        let mut agents = agents_with(ExponentGroup::new(), &inputs, None, trial);
        let schedule: Vec<(usize, usize)> = (0..(trial as usize % 7))
            .map(|_| {
                let i = rng.gen_range(0..n);
                (i, (i + rng.gen_range(1..n)) % n)
            })
            .collect();
        let oracle = run_against_oracle(&mut agents, &schedule, None, trial);
        let thresholds: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1 << 16)).collect();
        let mut decided = vec![None; n];
        for plan in plan_decisions(&agents) {
            let run = run_decision_plan(&agents, &plan, &thresholds, 80, &mut rng).unwrap();
            for (a, b) in run.results {
                assert!(decided[a].replace(b).is_none(), "agent {a} decided twice");
            }
        }
        for a in 0..n {
            assert_eq!(decided[a], Some(decide_plain_oracle(&oracle, a, thresholds[a])));
        }
    }
}

fn decide_plain_oracle(oracle: &PlainGossip, a: usize, thr: u64) -> bool {
    crate::arith::decide_plain(oracle.shadow(a), thr)
}

#[test]
fn decision_needs_a_statistical_mask() {
    let mut agents = agents_with(ExponentGroup::new(), &[5, 6], None, 23);
    let mut rng = ChaCha20Rng::seed_from_u64(24);
    let mut r2 = ChaCha20Rng::seed_from_u64(25);
    update_step(&mut agents, 0, 1, (false, false), &mut rng, &mut r2).unwrap();
    let plan = plan_decisions(&agents);
    assert_eq!(plan, vec![DecisionPlan::Dual { garbler: 1, evaluator: 0 }]);
    assert_eq!(
        run_decision_plan(&agents, &plan[0], &[3, 3], 80, &mut rng).unwrap_err(),
        ProtocolError::NoDecisionMask { garbler: 1, evaluator: 0 }
    );
    update_step(&mut agents, 0, 1, (true, true), &mut rng, &mut r2).unwrap();
    assert!(matches!(run_decision_plan(&agents, &plan[0], &[1 << 16, 3], 80, &mut rng), Err(ProtocolError::Threshold { .. })));
    // Both hold 22/4 = 5.5.
    let run = run_decision_plan(&agents, &plan[0], &[6, 5], 80, &mut rng).unwrap();
    assert_eq!(run.results, vec![(0, true), (1, false)]);
    assert_eq!(run.width, 16 + 2);
}
