use blindgossip::simnet::{PlannedSchedule, Topology};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn complete_four_pair_frequencies_are_uniform() {
    let t = Topology::complete(4);
    let draws = 100_000u64;
    let plan = PlannedSchedule::generate(&t, draws, ChaCha20Rng::seed_from_u64(44));
    assert_eq!(plan.pairs.len() as u64, draws);
    let mut counts = vec![0u64; t.edges().len()];
    for &(i, j) in &plan.pairs {
        let e = (i.min(j), i.max(j));
        counts[t.edges().iter().position(|&x| x == e).expect("edge")] += 1;
    }
    let p = 1.0 / counts.len() as f64;
    let expected = draws as f64 * p;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for &c in &counts {
        assert!((c as f64 - expected).abs() < 3.0 * sigma, "{counts:?}");
    }
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((counts.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
}

#[test]
fn initiator_side_is_balanced() {
    let plan = PlannedSchedule::generate(&Topology::complete(2), 20_000, ChaCha20Rng::seed_from_u64(5));
    let first = plan.pairs.iter().filter(|p| p.0 == 0).count() as f64;
    // Binomial(20000, 1/2): 3 sigma is about 212.
    assert!((first - 10_000.0).abs() < 212.0, "{first}");
}
