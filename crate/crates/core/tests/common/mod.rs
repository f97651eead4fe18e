//! Test-only reference implementations. Nothing here calls into the fitting
//! code it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use season_info::Game;

/// A small paired-comparison instance with teams named `A`, `B`, ...
#[derive(Debug, Clone)]
pub struct Instance {
    pub teams: Vec<String>,
    pub games: Vec<Game>,
}

impl Instance {
    pub fn team_set(&self) -> std::collections::BTreeSet<String> {
        self.teams.iter().cloned().collect()
    }

    fn index(&self, team: &str) -> usize {
        self.teams.iter().position(|t| t == team).unwrap()
    }
}

pub fn game(id: usize, home: &str, away: &str, hs: u32, aws: u32) -> Game {
    let date = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap() + chrono::Days::new(id as u64);
    Game::new(format!("g{id:03}"), date, home, away, hs, aws)
}

/// Random instance with `2..=max_teams` teams and `1..=max_games` games.
/// Scores are drawn so that every team mix of wins, losses and the odd tie occurs.
pub fn random_instance(seed: u64, max_teams: usize, max_games: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_teams);
    let teams: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let m = rng.random_range(1..=max_games);
    let games = (0..m)
        .map(|id| {
            let h = rng.random_range(0..n);
            let mut a = rng.random_range(0..n - 1);
            if a >= h {
                a += 1;
            }
            let hs = rng.random_range(0..8);
            let aws = rng.random_range(0..8);
            game(id, &teams[h], &teams[a], hs, aws)
        })
        .collect();
    Instance { teams, games }
}

// ---------------------------------------------------------------------------
// Bradley-Terry: brute-force penalized likelihood maximization
// ---------------------------------------------------------------------------

/// Penalized BT log-likelihood written out directly, with strengths expanded
/// from the free coordinates (the last team's strength is minus the sum of the others).
pub struct BtOracle<'a> {
    inst: &'a Instance,
    penalty: f64,
}

impl<'a> BtOracle<'a> {
    pub fn new(inst: &'a Instance, penalty: f64) -> Self {
        BtOracle { inst, penalty }
    }

    /// Free coordinates: strengths of all but the last team, then home advantage.
    pub fn dim(&self) -> usize {
        self.inst.teams.len()
    }

    pub fn expand(&self, free: &[f64]) -> (Vec<f64>, f64) {
        let n = self.inst.teams.len();
        let mut beta: Vec<f64> = free[..n - 1].to_vec();
        beta.push(-free[..n - 1].iter().sum::<f64>());
        (beta, free[n - 1])
    }

    pub fn loglik(&self, beta: &[f64], alpha: f64) -> f64 {
        let mut ll = 0.0;
        for g in &self.inst.games {
            if g.home_score == g.away_score {
                continue;
            }
            let eta = beta[self.inst.index(&g.home)] - beta[self.inst.index(&g.away)] + alpha;
            let p = 1.0 / (1.0 + (-eta).exp());
            ll += if g.home_score > g.away_score { p.ln() } else { (1.0 - p).ln() };
        }
        ll - 0.5 * self.penalty * (beta.iter().map(|b| b * b).sum::<f64>() + alpha * alpha)
    }

    pub fn value(&self, free: &[f64]) -> f64 {
        let (beta, alpha) = self.expand(free);
        self.loglik(&beta, alpha)
    }

    /// Grid search over `[-3, 3]^d` at `step`, then golden-section line
    /// maximization along Powell conjugate directions until nothing moves.
    pub fn maximize(&self, step: f64) -> (Vec<f64>, f64) {
        let d = self.dim();
        let ticks = (6.0 / step).round() as usize + 1;
        let mut best = vec![0.0; d];
        let mut best_val = f64::NEG_INFINITY;
        let mut cursor = vec![0usize; d];
        loop {
            let point: Vec<f64> = cursor.iter().map(|&c| -3.0 + c as f64 * step).collect();
            let v = self.value(&point);
            if v > best_val {
                best_val = v;
                best = point;
            }
            let mut k = 0;
            while k < d {
                cursor[k] += 1;
                if cursor[k] < ticks {
                    break;
                }
                cursor[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }

        // Powell's conjugate directions, each line maximized by golden section
        let mut x = best;
        let mut dirs: Vec<Vec<f64>> = (0..d)
            .map(|k| (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        for _ in 0..500 {
            let start = x.clone();
            let start_val = self.value(&x);
            for dir in &dirs {
                x = self.line_max(&x, dir, step);
            }
            let shift: Vec<f64> = x.iter().zip(&start).map(|(a, b)| a - b).collect();
            let len = shift.iter().map(|s| s * s).sum::<f64>().sqrt();
            if len < 1e-12 || self.value(&x) - start_val < 1e-15 {
                // confirm with plain coordinate lines before stopping
                let before = x.clone();
                for k in 0..d {
                    let e: Vec<f64> = (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
                    x = self.line_max(&x, &e, step);
                }
                let moved = x.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if moved < 1e-11 {
                    break;
                }
                continue;
            }
            let unit: Vec<f64> = shift.iter().map(|s| s / len).collect();
            x = self.line_max(&x, &unit, step);
            dirs.remove(0);
            dirs.push(unit);
        }
        let v = self.value(&x);
        (x, v)
    }

    /// Maximize along `x + t * dir`, growing the bracket until the maximum is interior.
    fn line_max(&self, x: &[f64], dir: &[f64], radius: f64) -> Vec<f64> {
        let at = |t: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, b)| a + t * b).collect() };
        let mut r = radius;
        let t = loop {
            let t = golden_max(|t| self.value(&at(t)), -r, r, 1e-13);
            if t.abs() < 0.9 * r || r > 100.0 {
                break t;
            }
            r *= 4.0;
        };
        let cand = at(t);
        if self.value(&cand) >= self.value(x) {
            cand
        } else {
            x.to_vec()
        }
    }

    /// Strengths in team order plus home advantage, like `BtFit::params`.
    pub fn solve_params(&self, step: f64) -> Vec<f64> {
        let (x, _) = self.maximize(step);
        let (mut beta, alpha) = self.expand(&x);
        beta.push(alpha);
        beta
    }
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Root of a decreasing function on `[lo, hi]` by bisection.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Margin of victory: dense normal equations with a sum-to-zero multiplier
// ---------------------------------------------------------------------------

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Penalized least squares for the margin model, with the zero-sum constraint
/// imposed through a Lagrange multiplier. Returns strengths then home advantage.
pub fn mov_oracle(inst: &Instance, penalty: f64) -> Vec<f64> {
    let n = inst.teams.len();
    let p = n + 1;
    let rows: Vec<(Vec<f64>, f64)> = inst
        .games
        .iter()
        .map(|g| {
            let mut x = vec![0.0; p];
            x[inst.index(&g.home)] += 1.0;
            x[inst.index(&g.away)] -= 1.0;
            x[n] = 1.0;
            (x, f64::from(g.home_score) - f64::from(g.away_score))
        })
        .collect();
    let mut kkt = vec![vec![0.0; p + 1]; p + 1];
    let mut rhs = vec![0.0; p + 1];
    for (x, y) in &rows {
        for i in 0..p {
            for j in 0..p {
                kkt[i][j] += x[i] * x[j];
            }
            rhs[i] += x[i] * y;
        }
    }
    for i in 0..n {
        kkt[i][i] += penalty;
        kkt[i][p] = 1.0;
        kkt[p][i] = 1.0;
    }
    let sol = gauss_solve(kkt, rhs);
    sol[..p].to_vec()
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[k] += h;
            dn[k] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
