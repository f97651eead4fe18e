mod common;

use season_info::harness::{make_split, make_splits, run_protocol, run_protocol_jobs, ProtocolConfig};
use season_info::synth::{bayes_accuracy, generate_season, Strengths, SynthSpec};
use season_info::Outcome;

#[test]
fn training_frequency_is_binomial() {
    // 32 teams x 16 games = 256 games, NFL-sized
    let spec = SynthSpec::logistic(32, 16, Strengths::Sampled { sd: 0.7 }, 0.2, 7.0, 2012);
    let (season, _) = generate_season(&spec).unwrap();
    assert_eq!(season.games().len(), 256);
    let cfg = ProtocolConfig { x_grid: vec![0.125], replicates: 100, master_seed: 99, ..Default::default() };
    let splits = make_splits(&season, &cfg).unwrap();
    assert_eq!(splits.len(), 100);

    let mut counts = std::collections::HashMap::new();
    for s in &splits {
        assert_eq!(s.train.len(), 32);
        for g in &s.train {
            *counts.entry(g.game_id.as_str()).or_insert(0usize) += 1;
        }
    }
    let total: usize = counts.values().sum();
    assert_eq!(total, 3200);
    let (mean, sd) = (12.5, (100.0f64 * 0.125 * 0.875).sqrt());
    let mut outside_3sd = 0;
    for g in season.games() {
        let c = *counts.get(g.game_id.as_str()).unwrap_or(&0) as f64;
        assert!((c - mean).abs() <= 4.5 * sd, "game {} drawn {c} times", g.game_id);
        if (c - mean).abs() > 3.0 * sd {
            outside_3sd += 1;
        }
    }
    // about 0.5% of games are expected beyond 3 sd
    assert!(outside_3sd <= 5, "{outside_3sd} games beyond 3 sd");
}

#[test]
fn splits_are_order_independent() {
    let spec = SynthSpec::logistic(8, 10, Strengths::Sampled { sd: 1.0 }, 0.2, 7.0, 5);
    let (season, _) = generate_season(&spec).unwrap();
    let cfg = ProtocolConfig { x_grid: vec![0.25, 0.5], replicates: 5, master_seed: 1, ..Default::default() };
    let all = make_splits(&season, &cfg).unwrap();
    // regenerate a single cell out of order
    let lone = make_split(&season, 0.5, 3, 1).unwrap();
    assert_eq!(all[5 + 3], lone);
}

#[test]
fn protocol_is_reproducible_across_thread_counts() {
    let spec = SynthSpec::logistic(10, 20, Strengths::Sampled { sd: 1.0 }, 0.3, 8.0, 17);
    let (season, _) = generate_season(&spec).unwrap();
    let cfg = ProtocolConfig { replicates: 12, master_seed: 3, ..Default::default() };
    let a = run_protocol_jobs(&season, &cfg, 1).unwrap();
    let b = run_protocol_jobs(&season, &cfg, 4).unwrap();
    let c = run_protocol(&season, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    for p in &a {
        for v in [p.mean_bt_acc, p.mean_mov_acc, p.baseline_acc] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(p.sd_bt_acc >= 0.0 && p.sd_mov_acc >= 0.0);
        assert!((p.games_per_team - p.fraction * 20.0).abs() < 1e-12);
    }
}

#[test]
fn huge_spread_is_nearly_perfectly_predictable() {
    let spec = SynthSpec::logistic(5, 82, Strengths::Explicit(vec![-8.0, -4.0, 0.0, 4.0, 8.0]), 0.3, 10.0, 41);
    let bayes = bayes_accuracy(&spec).unwrap();
    assert!(bayes > 0.98, "bayes accuracy {bayes}");
    let (season, _) = generate_season(&spec).unwrap();
    let cfg = ProtocolConfig { x_grid: vec![0.875], replicates: 100, master_seed: 8, ..Default::default() };
    let curve = run_protocol(&season, &cfg).unwrap();
    assert!(curve[0].mean_bt_acc >= 0.95, "{:?}", curve[0]);
}

#[test]
fn baseline_tracks_season_home_rate() {
    let spec = SynthSpec::logistic(20, 30, Strengths::Sampled { sd: 0.5 }, 0.4, 8.0, 23);
    let (season, _) = generate_season(&spec).unwrap();
    let n = season.games().len() as f64;
    let credit: f64 = season
        .games()
        .iter()
        .map(|g| match g.outcome() {
            Outcome::HomeWin => 1.0,
            Outcome::Tie => 0.5,
            Outcome::HomeLoss => 0.0,
        })
        .sum();
    let season_rate = credit / n;
    let cfg = ProtocolConfig { replicates: 100, master_seed: 4, ..Default::default() };
    for p in run_protocol(&season, &cfg).unwrap() {
        assert!(
            (p.baseline_acc - season_rate).abs() <= 3.0 * p.se_baseline(),
            "fraction {}: {} vs {season_rate}",
            p.fraction,
            p.baseline_acc
        );
    }
}

#[test]
fn information_grows_with_training_fraction() {
    let spec = SynthSpec::logistic(12, 40, Strengths::Sampled { sd: 1.0 }, 0.3, 8.0, 31);
    let (season, _) = generate_season(&spec).unwrap();
    let cfg = ProtocolConfig { replicates: 100, master_seed: 6, ..Default::default() };
    let curve = run_protocol(&season, &cfg).unwrap();
    let (first, last) = (&curve[0], &curve[curve.len() - 1]);
    assert!(last.mean_bt_acc >= first.mean_bt_acc - 2.0 * first.se_bt());
    assert!(last.mean_mov_acc >= first.mean_mov_acc - 2.0 * first.se_mov());
}
