use globalcoin::harness::{emit_csv, run_trial_episode, trajectory_from};
use globalcoin::{
    run_episode, run_sweep, run_trajectory, AdaptiveAdversary, Adversary, AdversaryAction,
    AdversaryKind, AdviceVector, Direction, HiddenPolicy, MwuParams, NonAdaptiveAdversary,
    SimConfig, SolverConfig, WeightVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Passes through to an inner adversary and keeps each round's final advice.
struct Recorder<A> {
    inner: A,
    rounds: Vec<(Direction, Vec<Direction>)>,
}

impl<A: Adversary> Adversary for Recorder<A> {
    fn act(
        &mut self,
        weights: &WeightVector,
        hidden: Direction,
        advice: &mut AdviceVector,
        eta: f64,
    ) -> globalcoin::Result<AdversaryAction> {
        let action = self.inner.act(weights, hidden, advice, eta)?;
        self.rounds.push((hidden, advice.as_slice().to_vec()));
        Ok(action)
    }

    fn corrupted(&self) -> &[usize] {
        self.inner.corrupted()
    }
}

#[test]
fn final_weights_follow_the_product_form() {
    let n = 60;
    let params = MwuParams::with_defaults(n).unwrap();
    for seed in 0..10 {
        let mut rec = Recorder {
            inner: NonAdaptiveAdversary::new(n, (0..6).collect(), SolverConfig::default()).unwrap(),
            rounds: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ep = run_episode(&params, HiddenPolicy::Uniform, &mut rec, &mut rng).unwrap();
        assert_eq!(rec.rounds.len(), ep.rounds);
        // Work in log space: long episodes shrink weights by many orders.
        let mut log_w = vec![0.0f64; n];
        for (d, advice) in &rec.rounds {
            for (lw, a) in log_w.iter_mut().zip(advice) {
                *lw += if a == d { params.eta.ln_1p() } else { (-params.eta).ln_1p() };
            }
        }
        let scale = ep.weight_scale_log2 as f64 * std::f64::consts::LN_2;
        for (i, &w) in ep.final_weights.as_slice().iter().enumerate() {
            let got = w.ln() + scale;
            assert!((got - log_w[i]).abs() < 1e-9 * (1.0 + log_w[i].abs()), "expert {i}: {got} vs {}", log_w[i]);
        }
    }
}

#[test]
fn adaptive_corruption_stays_within_budget() {
    let n = 9;
    let params = MwuParams::new(n, MwuParams::with_defaults(n).unwrap().eta, 3000).unwrap();
    for seed in 0..5 {
        let mut adv = AdaptiveAdversary::new(n, 2, u64::MAX, SolverConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ep = run_episode(&params, HiddenPolicy::Uniform, &mut adv, &mut rng).unwrap();
        let counts: Vec<usize> = ep.trace.iter().map(|r| r.corrupted_count).collect();
        assert!(counts.windows(2).all(|c| c[0] <= c[1]));
        assert!(counts.iter().all(|&c| c <= 2));
        assert!(ep.trace.iter().all(|r| r.volatile <= 3));
        assert!(ep.trace.iter().all(|r| !r.claimed_flip || r.output == -r.hidden));
    }
}

#[test]
fn honest_sweep_stays_near_two_rounds() {
    let configs: Vec<SimConfig> = (1..=10)
        .map(|k| SimConfig {
            seed: 5,
            ..SimConfig::new(100 * k, AdversaryKind::None)
        })
        .collect();
    for row in run_sweep(&configs).unwrap() {
        assert!((1.0..=4.0).contains(&row.mean_rounds), "n={} mean {}", row.n, row.mean_rounds);
        assert_eq!(row.errored_trials, 0);
    }
}

#[test]
fn sweep_csv_round_trips() {
    let configs: Vec<SimConfig> = [50, 100]
        .iter()
        .map(|&n| SimConfig {
            trials: 4,
            seed: 2,
            ..SimConfig::new(n, AdversaryKind::NonAdaptive)
        })
        .collect();
    let rows = run_sweep(&configs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    emit_csv(&rows, &path).unwrap();

    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["n", "tau", "adversary", "trials", "mean_rounds", "std_rounds", "errored_trials", "seed"]);
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(&rows) {
        assert_eq!(rec[0].parse::<usize>().unwrap(), row.n);
        assert_eq!(rec[1].parse::<usize>().unwrap(), row.tau);
        assert_eq!(&rec[2], "nonadaptive");
        let mean: f64 = rec[4].parse().unwrap();
        assert!((mean - row.mean_rounds).abs() <= 1e-11 * row.mean_rounds.abs());
    }
}

#[test]
fn trajectory_rows_average_the_episode_logs() {
    let cfg = SimConfig {
        trials: 6,
        seed: 3,
        ..SimConfig::new(1000, AdversaryKind::NonAdaptive)
    };
    let episodes: Vec<_> = (0..6).map(|t| run_trial_episode(&cfg, t).unwrap()).collect();
    let rows = run_trajectory(&cfg).unwrap();
    assert_eq!(rows, trajectory_from(&episodes));

    let first: f64 = episodes.iter().map(|e| e.trace[0].corrupted_weight).sum::<f64>() / 6.0;
    assert!((rows[0].mean_corrupted_weight - first).abs() < 1e-9);
    let eta = cfg.params().unwrap().eta;
    // Every corrupted expert either gains or loses a factor of eta in round 1.
    assert!(rows[0].mean_corrupted_weight >= 100.0 * (1.0 - eta) - 1e-9);
    assert!(rows[0].mean_corrupted_weight <= 100.0 * (1.0 + eta) + 1e-9);
    let longest = episodes.iter().map(|e| e.rounds).max().unwrap();
    assert_eq!(rows.len(), longest);
    assert_eq!(rows.last().unwrap().contributing_trials, episodes.iter().filter(|e| e.rounds == longest).count());
}
