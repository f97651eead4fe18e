//! Home-advantage paired-comparison models.
//!
//! Two models are fitted to a set of games:
//!
//! * a Bradley-Terry model for the binary result, where the log-odds of a home
//!   win is `strength[home] - strength[away] + home_adv`;
//! * a margin-of-victory model, where the expected home margin is
//!   `strength[home] - strength[away] + home_adv` on the points scale.
//!
//! Both are ridge-penalized and reported with strengths that sum to zero.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::ingest::{Game, Outcome};

pub const DEFAULT_PENALTY: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100;

const MAX_STEP_HALVINGS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("training set is empty")]
    EmptyTrain,
    #[error("team '{0}' is not in the team set")]
    UnknownTeam(String),
    #[error("penalty must be {expected}, got {got}")]
    InvalidPenalty { got: f64, expected: &'static str },
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("cannot score an empty prediction list")]
    Empty,
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Sorted team roster with a name -> position lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamIndex {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl TeamIndex {
    pub fn new(teams: &BTreeSet<String>) -> Self {
        let names: Vec<String> = teams.iter().cloned().collect();
        let lookup = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        TeamIndex { names, lookup }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, team: &str) -> Option<usize> {
        self.lookup.get(team).copied()
    }

    fn require(&self, team: &str) -> Result<usize, FitError> {
        self.get(team).ok_or_else(|| FitError::UnknownTeam(team.to_string()))
    }
}

fn center(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
}

fn strength_map(teams: &TeamIndex, strengths: &[f64]) -> BTreeMap<String, f64> {
    teams.names.iter().cloned().zip(strengths.iter().copied()).collect()
}

/// Penalized Bradley-Terry log-likelihood over a fixed training set.
///
/// The parameter vector is laid out as `[strength_0, ..., strength_{n-1}, home_adv]`
/// with teams in sorted order. Tied games carry no binary result and are skipped.
#[derive(Debug, Clone)]
pub struct BtProblem {
    teams: TeamIndex,
    // (home, away, home won)
    games: Vec<(usize, usize, bool)>,
    penalty: f64,
}

impl BtProblem {
    pub fn new<G: Borrow<Game>>(train: &[G], teams: &BTreeSet<String>, penalty: f64) -> Result<Self, FitError> {
        if train.is_empty() {
            return Err(FitError::EmptyTrain);
        }
        if !(penalty > 0.0 && penalty.is_finite()) {
            return Err(FitError::InvalidPenalty { got: penalty, expected: "positive and finite" });
        }
        let teams = TeamIndex::new(teams);
        let mut games = Vec::with_capacity(train.len());
        for g in train {
            let g = g.borrow();
            let h = teams.require(&g.home)?;
            let a = teams.require(&g.away)?;
            match g.outcome() {
                Outcome::HomeWin => games.push((h, a, true)),
                Outcome::HomeLoss => games.push((h, a, false)),
                Outcome::Tie => {}
            }
        }
        Ok(BtProblem { teams, games, penalty })
    }

    pub fn dim(&self) -> usize {
        self.teams.len() + 1
    }

    pub fn teams(&self) -> &TeamIndex {
        &self.teams
    }

    /// Number of decided (non-tied) games used by the likelihood.
    pub fn decided_games(&self) -> usize {
        self.games.len()
    }

    pub fn objective(&self, params: &[f64]) -> f64 {
        let n = self.teams.len();
        let alpha = params[n];
        let mut ll = 0.0;
        for &(h, a, won) in &self.games {
            let eta = params[h] - params[a] + alpha;
            // log(pi) = -softplus(-eta), log(1 - pi) = -softplus(eta)
            ll -= if won { softplus(-eta) } else { softplus(eta) };
        }
        let ridge: f64 = params.iter().map(|p| p * p).sum();
        ll - 0.5 * self.penalty * ridge
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let n = self.teams.len();
        let alpha = params[n];
        let mut grad: Vec<f64> = params.iter().map(|p| -self.penalty * p).collect();
        for &(h, a, won) in &self.games {
            let pi = logistic(params[h] - params[a] + alpha);
            let r = if won { 1.0 - pi } else { -pi };
            grad[h] += r;
            grad[a] -= r;
            grad[n] += r;
        }
        grad
    }

    /// Negative Hessian (observed information plus ridge), positive definite.
    fn information(&self, params: &[f64]) -> DMatrix<f64> {
        let n = self.teams.len();
        let alpha = params[n];
        let mut info = DMatrix::<f64>::zeros(n + 1, n + 1);
        for &(h, a, _) in &self.games {
            let pi = logistic(params[h] - params[a] + alpha);
            let w = pi * (1.0 - pi);
            info[(h, h)] += w;
            info[(a, a)] += w;
            info[(h, a)] -= w;
            info[(a, h)] -= w;
            info[(h, n)] += w;
            info[(n, h)] += w;
            info[(a, n)] -= w;
            info[(n, a)] -= w;
            info[(n, n)] += w;
        }
        for i in 0..=n {
            info[(i, i)] += self.penalty;
        }
        info
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtFit {
    teams: TeamIndex,
    strengths: Vec<f64>,
    pub home_adv: f64,
    pub penalty: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
}

impl BtFit {
    /// Fitted strength, 0 for teams the fit has never seen.
    pub fn strength(&self, team: &str) -> f64 {
        self.teams.get(team).map_or(0.0, |i| self.strengths[i])
    }

    pub fn strengths(&self) -> BTreeMap<String, f64> {
        strength_map(&self.teams, &self.strengths)
    }

    /// `[strength_0, ..., strength_{n-1}, home_adv]` in sorted team order.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.strengths.clone();
        p.push(self.home_adv);
        p
    }

    pub fn predict(&self, game: &Game) -> f64 {
        logistic(self.strength(&game.home) - self.strength(&game.away) + self.home_adv)
    }
}

/// Fit the penalized Bradley-Terry model by damped Newton iterations.
///
/// Maximizes `sum_g [W_g ln pi_g + (1 - W_g) ln(1 - pi_g)] - penalty/2 * (|beta|^2 + alpha^2)`.
/// The ridge term makes the objective strictly concave, so the maximizer is
/// unique and finite even when the data are separated; it also pins the
/// strengths to a zero sum, which is re-imposed after every step.
pub fn fit_bt<G: Borrow<Game>>(
    train: &[G],
    teams: &BTreeSet<String>,
    penalty: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BtFit, FitError> {
    let problem = BtProblem::new(train, teams, penalty)?;
    let n = problem.teams.len();
    let mut params = vec![0.0; n + 1];
    let mut objective = problem.objective(&params);
    let mut iterations = 0;

    let (converged, gradient_norm) = loop {
        let grad = problem.gradient(&params);
        let gnorm = norm(&grad);
        if gnorm <= tol {
            break (true, gnorm);
        }
        if iterations == max_iter {
            break (false, gnorm);
        }
        let step = problem
            .information(&params)
            .cholesky()
            .expect("ridge-penalized information matrix is positive definite")
            .solve(&DVector::from_vec(grad));

        // objective differences below this are rounding noise
        let slack = 64.0 * f64::EPSILON * (1.0 + objective.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_STEP_HALVINGS {
            let mut cand: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + t * d).collect();
            center(&mut cand[..n]);
            let cand_obj = problem.objective(&cand);
            if cand_obj >= objective - slack {
                accepted = Some((cand, cand_obj));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, cand_obj)) => {
                params = cand;
                objective = cand_obj;
            }
            None => break (false, gnorm),
        }
    };

    if !converged {
        return Err(FitError::NotConverged { iterations, gradient_norm });
    }
    let home_adv = params.pop().expect("parameter vector holds home advantage");
    Ok(BtFit {
        teams: problem.teams,
        strengths: params,
        home_adv,
        penalty,
        converged,
        iterations,
        final_gradient_norm: gradient_norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovFit {
    teams: TeamIndex,
    strengths: Vec<f64>,
    pub home_adv: f64,
    /// Root-mean-square training residual, in points.
    pub residual_sd: f64,
    pub penalty: f64,
}

impl MovFit {
    pub fn strength(&self, team: &str) -> f64 {
        self.teams.get(team).map_or(0.0, |i| self.strengths[i])
    }

    pub fn strengths(&self) -> BTreeMap<String, f64> {
        strength_map(&self.teams, &self.strengths)
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = self.strengths.clone();
        p.push(self.home_adv);
        p
    }

    pub fn predict(&self, game: &Game) -> f64 {
        self.strength(&game.home) - self.strength(&game.away) + self.home_adv
    }
}

/// Fit the margin-of-victory model by penalized least squares.
///
/// Minimizes `sum_g (margin_g - (delta_home - delta_away + lambda))^2 + penalty * |delta|^2`.
/// With `penalty > 0` the normal equations are positive definite and solved by
/// Cholesky. With `penalty == 0` the result is the `penalty -> 0` limit: the
/// least-squares solution with the smallest `|delta|`, which also has a zero
/// strength sum and zero strength for teams absent from `train`.
pub fn fit_mov<G: Borrow<Game>>(train: &[G], teams: &BTreeSet<String>, penalty: f64) -> Result<MovFit, FitError> {
    if train.is_empty() {
        return Err(FitError::EmptyTrain);
    }
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(FitError::InvalidPenalty { got: penalty, expected: "non-negative and finite" });
    }
    let index = TeamIndex::new(teams);
    let n = index.len();
    let mut rows = Vec::with_capacity(train.len());
    for g in train {
        let g = g.borrow();
        rows.push((index.require(&g.home)?, index.require(&g.away)?, g.margin() as f64));
    }

    let mut xtx = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut xty = DVector::<f64>::zeros(n + 1);
    for &(h, a, y) in &rows {
        xtx[(h, h)] += 1.0;
        xtx[(a, a)] += 1.0;
        xtx[(h, a)] -= 1.0;
        xtx[(a, h)] -= 1.0;
        xtx[(h, n)] += 1.0;
        xtx[(n, h)] += 1.0;
        xtx[(a, n)] -= 1.0;
        xtx[(n, a)] -= 1.0;
        xtx[(n, n)] += 1.0;
        xty[h] += y;
        xty[a] -= y;
        xty[n] += y;
    }

    let mut theta = if penalty > 0.0 {
        let mut sys = xtx;
        for i in 0..n {
            sys[(i, i)] += penalty;
        }
        sys.cholesky()
            .expect("penalized normal equations are positive definite")
            .solve(&xty)
    } else {
        min_strength_norm_solution(xtx, xty, n)
    };

    center(&mut theta.as_mut_slice()[..n]);
    let params: Vec<f64> = theta.iter().copied().collect();
    let sse: f64 = rows
        .iter()
        .map(|&(h, a, y)| {
            let r = y - (params[h] - params[a] + params[n]);
            r * r
        })
        .sum();
    Ok(MovFit {
        teams: index,
        home_adv: params[n],
        strengths: params[..n].to_vec(),
        residual_sd: (sse / rows.len() as f64).sqrt(),
        penalty,
    })
}

/// Least-squares solution of `xtx * theta = xty` minimizing the norm of the
/// strength block (the first `n` coordinates).
fn min_strength_norm_solution(xtx: DMatrix<f64>, xty: DVector<f64>, n: usize) -> DVector<f64> {
    let dim = xtx.nrows();
    let eig = SymmetricEigen::new(xtx);
    let max_ev = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let cutoff = max_ev * 1e-10 * dim as f64;

    let mut particular = DVector::<f64>::zeros(dim);
    let mut null_cols = Vec::new();
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        if ev.abs() > cutoff {
            particular += v * (v.dot(&xty) / ev);
        } else {
            null_cols.push(v.into_owned());
        }
    }
    if null_cols.is_empty() {
        return particular;
    }
    // Move along the null space to minimize |delta|: min_c |P_delta (particular + N c)|.
    let null = DMatrix::from_columns(&null_cols);
    let null_delta = null.rows(0, n).into_owned();
    let target = -particular.rows(0, n).into_owned();
    let coef = null_delta
        .svd(true, true)
        .solve(&target, 1e-12)
        .expect("SVD was computed with both factors");
    particular + null * coef
}

/// Bradley-Terry decision rule: home win iff the predicted probability exceeds 0.5.
pub fn bt_predicts_home_win(prob: f64) -> bool {
    prob > 0.5
}

/// Margin decision rule: home win iff the predicted margin is positive.
pub fn mov_predicts_home_win(margin: f64) -> bool {
    margin > 0.0
}

pub fn predict_bt(fit: &BtFit, game: &Game) -> f64 {
    fit.predict(game)
}

pub fn predict_mov(fit: &MovFit, game: &Game) -> f64 {
    fit.predict(game)
}

/// Credit for one prediction: 1 for a correct call, 0 for a wrong one and
/// 0.5 for any prediction of a tied game.
pub fn prediction_credit(predicted_home_win: bool, actual: Outcome) -> f64 {
    match actual {
        Outcome::Tie => 0.5,
        Outcome::HomeWin if predicted_home_win => 1.0,
        Outcome::HomeLoss if !predicted_home_win => 1.0,
        _ => 0.0,
    }
}

/// Fraction of games correctly predicted, ties earning half credit.
pub fn info_metric(predictions: &[(bool, Outcome)]) -> Result<f64, MetricError> {
    if predictions.is_empty() {
        return Err(MetricError::Empty);
    }
    let credit: f64 = predictions.iter().map(|&(p, o)| prediction_credit(p, o)).sum();
    Ok(credit / predictions.len() as f64)
}
