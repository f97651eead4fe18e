mod common;

use common::*;
use season_info::models::{fit_bt, fit_mov, BtProblem};

#[test]
fn three_team_twelve_games_matches_grid_search() {
    // A is strong, C weak, with a couple of upsets and one tie
    let results = [
        ("A", "B", 3, 1),
        ("B", "A", 2, 4),
        ("A", "C", 5, 0),
        ("C", "A", 1, 3),
        ("B", "C", 2, 1),
        ("C", "B", 2, 0),
        ("A", "B", 1, 2),
        ("B", "C", 3, 3),
        ("C", "A", 0, 2),
        ("A", "C", 4, 1),
        ("B", "A", 3, 2),
        ("C", "B", 1, 4),
    ];
    let games = results
        .iter()
        .enumerate()
        .map(|(i, &(h, a, hs, aws))| game(i, h, a, hs, aws))
        .collect();
    let inst = Instance { teams: vec!["A".into(), "B".into(), "C".into()], games };
    let expected = BtOracle::new(&inst, 1.0).solve_params(0.05);

    let fit = fit_bt(&inst.games, &inst.team_set(), 1.0, 1e-8, 100).unwrap();
    assert!(fit.converged);
    for (got, want) in fit.params().iter().zip(&expected) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    // predictions agree with the oracle parameters too
    for g in &inst.games {
        let idx = |t: &str| inst.teams.iter().position(|x| x == t).unwrap();
        let eta = expected[idx(&g.home)] - expected[idx(&g.away)] + expected[3];
        let p = 1.0 / (1.0 + (-eta).exp());
        assert!((fit.predict(g) - p).abs() < 1e-6);
    }
}

#[test]
fn home_sweep_has_finite_positive_home_advantage() {
    // double round robin, home team wins every game: strengths stay at zero by
    // symmetry and the home advantage solves n(1 - pi) = penalty * alpha
    let teams = ["A", "B", "C"];
    let mut games = Vec::new();
    for h in teams {
        for a in teams {
            if h != a {
                games.push(game(games.len(), h, a, 3, 1));
            }
        }
    }
    let inst = Instance { teams: teams.iter().map(|s| s.to_string()).collect(), games };
    let n = inst.games.len() as f64;
    let alpha = bisect_decreasing(|a| n * (1.0 - 1.0 / (1.0 + (-a).exp())) - a, 0.0, 20.0);

    let fit = fit_bt(&inst.games, &inst.team_set(), 1.0, 1e-8, 100).unwrap();
    assert!(fit.converged);
    assert!(fit.home_adv.is_finite() && fit.home_adv > 0.0);
    assert!((fit.home_adv - alpha).abs() < 1e-8, "{} vs {alpha}", fit.home_adv);
    for t in teams {
        assert!(fit.strength(t).abs() < 1e-10);
    }
}

#[test]
fn random_instances_match_oracles() {
    for seed in 0..20u64 {
        let inst = random_instance(1000 + seed, 4, 20);
        let penalty = [0.5, 1.0, 2.0][seed as usize % 3];
        let expected = BtOracle::new(&inst, penalty).solve_params(0.5);
        let fit = fit_bt(&inst.games, &inst.team_set(), penalty, 1e-8, 100).unwrap();
        for (got, want) in fit.params().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-6, "seed {seed}: {got} vs {want}");
        }

        let mov = fit_mov(&inst.games, &inst.team_set(), 0.1).unwrap();
        for (got, want) in mov.params().iter().zip(mov_oracle(&inst, 0.1)) {
            assert!((got - want).abs() < 1e-8, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..20u64 {
        let inst = random_instance(5000 + seed, 4, 20);
        let fit = fit_bt(&inst.games, &inst.team_set(), 1.0, 1e-8, 100).unwrap();
        let problem = BtProblem::new(&inst.games, &inst.team_set(), 1.0).unwrap();
        let params = fit.params();
        let grad = problem.gradient(&params);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm <= 1e-8);
        assert!(fit.final_gradient_norm <= 1e-8);

        // away from the optimum the comparison is not trivially 0 = 0
        let shifted: Vec<f64> = params.iter().enumerate().map(|(i, p)| p + 0.3 * (i as f64 - 1.0)).collect();
        for x in [&params, &shifted] {
            let analytic = problem.gradient(x);
            let numeric = fd_gradient(|p| problem.objective(p), x, 1e-5);
            for (a, n) in analytic.iter().zip(&numeric) {
                assert!((a - n).abs() < 1e-4, "seed {seed}: {a} vs {n}");
            }
        }
    }
}

#[test]
fn mov_random_four_team_instance() {
    let inst = random_instance(77, 4, 20);
    let fit = fit_mov(&inst.games, &inst.team_set(), 0.1).unwrap();
    let want = mov_oracle(&inst, 0.1);
    for (got, want) in fit.params().iter().zip(&want) {
        assert!((got - want).abs() < 1e-8);
    }
    assert!(fit.strengths().values().sum::<f64>().abs() < 1e-10);
}
