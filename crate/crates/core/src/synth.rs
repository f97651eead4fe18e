//! Synthetic seasons drawn from a known paired-comparison model.
//!
//! Each game's home margin is `round(mov_scale * (s_home - s_away + home_adv) + noise)`
//! with Gaussian noise of sd `mov_noise_sd`; the result follows from the sign of
//! the rounded margin, and a zero margin is a tie. Strengths and home advantage
//! live on the logit scale. Choosing `mov_noise_sd = LOGISTIC_PROBIT_SCALE * mov_scale`
//! makes the home-win probability track `logistic(s_home - s_away + home_adv)`
//! closely.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};
use thiserror::Error;

use crate::ingest::{Game, League, Season};

/// Ratio between the standard logistic and standard normal scales that best
/// matches their CDFs.
pub const LOGISTIC_PROBIT_SCALE: f64 = 1.702;

const STRENGTH_STREAM: u64 = 1;
const SCHEDULE_STREAM: u64 = 2;
const OUTCOME_STREAM: u64 = 3;
const MAX_SCHEDULE_ATTEMPTS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Config(String),
    #[error("could not build a schedule for {n_teams} teams with {games_per_team} games each")]
    InfeasibleSchedule { n_teams: usize, games_per_team: usize },
    #[error("strengths are sampled; realize them before asking for the Bayes accuracy")]
    UnrealizedStrengths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strengths {
    /// One logit-scale strength per team, in team order.
    Explicit(Vec<f64>),
    /// Independent Normal(0, sd) draws, fixed by `seed`.
    Sampled { sd: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_teams: usize,
    pub games_per_team: usize,
    pub strengths: Strengths,
    pub home_adv: f64,
    pub mov_scale: f64,
    pub mov_noise_sd: f64,
    pub seed: u64,
}

/// Ground truth written next to a generated season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub n_teams: usize,
    pub games_per_team: usize,
    pub strengths: BTreeMap<String, f64>,
    pub home_adv: f64,
    pub mov_scale: f64,
    pub mov_noise_sd: f64,
}

impl SynthSpec {
    /// Spec with noise sd set so that win probabilities follow the logistic link.
    pub fn logistic(n_teams: usize, games_per_team: usize, strengths: Strengths, home_adv: f64, mov_scale: f64, seed: u64) -> Self {
        SynthSpec {
            n_teams,
            games_per_team,
            strengths,
            home_adv,
            mov_scale,
            mov_noise_sd: LOGISTIC_PROBIT_SCALE * mov_scale,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.n_teams < 2 {
            return bad(format!("need at least 2 teams, got {}", self.n_teams));
        }
        if self.games_per_team < 1 {
            return bad("games per team must be at least 1".into());
        }
        if !(self.n_teams * self.games_per_team).is_multiple_of(2) {
            return bad(format!(
                "teams x games per team must be even, got {} x {}",
                self.n_teams, self.games_per_team
            ));
        }
        if !(self.mov_scale > 0.0 && self.mov_scale.is_finite()) {
            return bad(format!("margin scale must be positive, got {}", self.mov_scale));
        }
        if !(self.mov_noise_sd > 0.0 && self.mov_noise_sd.is_finite()) {
            return bad(format!("margin noise sd must be positive, got {}", self.mov_noise_sd));
        }
        if !self.home_adv.is_finite() {
            return bad("home advantage must be finite".into());
        }
        match &self.strengths {
            Strengths::Explicit(s) if s.len() != self.n_teams => {
                bad(format!("{} strengths given for {} teams", s.len(), self.n_teams))
            }
            Strengths::Explicit(s) if s.iter().any(|v| !v.is_finite()) => bad("strengths must be finite".into()),
            Strengths::Sampled { sd } if !(*sd >= 0.0 && sd.is_finite()) => {
                bad(format!("strength sd must be non-negative, got {sd}"))
            }
            _ => Ok(()),
        }
    }

    pub fn team_ids(&self) -> Vec<String> {
        let width = self.n_teams.to_string().len();
        (1..=self.n_teams).map(|i| format!("T{i:0width$}")).collect()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Copy with sampled strengths replaced by their draws.
    pub fn realized(&self) -> Result<SynthSpec, SynthError> {
        self.validate()?;
        let strengths = match &self.strengths {
            Strengths::Explicit(s) => s.clone(),
            Strengths::Sampled { sd } => {
                let mut rng = self.rng(STRENGTH_STREAM);
                let dist = Normal::new(0.0, *sd).map_err(|e| SynthError::Config(e.to_string()))?;
                (0..self.n_teams).map(|_| dist.sample(&mut rng)).collect()
            }
        };
        Ok(SynthSpec { strengths: Strengths::Explicit(strengths), ..self.clone() })
    }

    fn explicit_strengths(&self) -> Result<&[f64], SynthError> {
        match &self.strengths {
            Strengths::Explicit(s) => Ok(s),
            Strengths::Sampled { .. } => Err(SynthError::UnrealizedStrengths),
        }
    }

    /// `(P(home win), P(tie), P(home loss))` for a logit-scale edge `home - away + home_adv`.
    pub fn outcome_probabilities(&self, edge: f64) -> (f64, f64, f64) {
        let std = NormalDist::standard();
        let mean = self.mov_scale * edge;
        // the rounded margin is positive iff the raw margin is >= 0.5
        let win = std.cdf((mean - 0.5) / self.mov_noise_sd);
        let loss = std.cdf((-0.5 - mean) / self.mov_noise_sd);
        (win, (1.0 - win - loss).max(0.0), loss)
    }
}

/// Random pairing in which every team plays exactly `games_per_team` games.
///
/// Team slots are shuffled and paired off; a pair that matches a team with
/// itself is repaired by swapping with a slot elsewhere.
fn build_schedule(n_teams: usize, games_per_team: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, SynthError> {
    let total = n_teams * games_per_team;
    for _ in 0..MAX_SCHEDULE_ATTEMPTS {
        let mut slots: Vec<usize> = (0..n_teams).flat_map(|t| std::iter::repeat_n(t, games_per_team)).collect();
        slots.shuffle(rng);
        let mut ok = true;
        for p in 0..total / 2 {
            let (i, j) = (2 * p, 2 * p + 1);
            if slots[i] != slots[j] {
                continue;
            }
            let start = rng.random_range(0..total);
            let swap = (0..total).map(|o| (start + o) % total).find(|&q| {
                q / 2 != p && slots[q] != slots[i] && slots[q ^ 1] != slots[j]
            });
            match swap {
                Some(q) => slots.swap(j, q),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(slots.chunks_exact(2).map(|c| (c[0], c[1])).collect());
        }
    }
    Err(SynthError::InfeasibleSchedule { n_teams, games_per_team })
}

/// Generate one synthetic season together with its ground truth.
pub fn generate_season(spec: &SynthSpec) -> Result<(Season, Truth), SynthError> {
    let spec = spec.realized()?;
    let strengths = spec.explicit_strengths()?;
    let ids = spec.team_ids();

    let mut sched_rng = spec.rng(SCHEDULE_STREAM);
    let pairs = build_schedule(spec.n_teams, spec.games_per_team, &mut sched_rng)?;

    let mut rng = spec.rng(OUTCOME_STREAM);
    let noise = Normal::new(0.0, spec.mov_noise_sd).map_err(|e| SynthError::Config(e.to_string()))?;
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid start date");
    let per_day = (spec.n_teams / 2).max(1);
    let base_max = (2.0 * spec.mov_scale).round().max(1.0) as u32;

    let games = pairs
        .into_iter()
        .enumerate()
        .map(|(idx, (t1, t2))| {
            let (home, away) = if rng.random_bool(0.5) { (t1, t2) } else { (t2, t1) };
            let edge = strengths[home] - strengths[away] + spec.home_adv;
            let margin = (spec.mov_scale * edge + noise.sample(&mut rng)).round();
            let margin = margin.clamp(-1e6, 1e6) as i64;
            let base = rng.random_range(0..=base_max);
            let (hs, aws) = if margin >= 0 {
                (base + margin as u32, base)
            } else {
                (base, base + margin.unsigned_abs() as u32)
            };
            let date = start + Days::new((idx / per_day) as u64);
            Game::new(format!("g{:05}", idx + 1), date, ids[home].clone(), ids[away].clone(), hs, aws)
        })
        .collect();

    let season = Season::new(League::Other, format!("synthetic-{}", spec.seed), games)
        .map_err(|e| SynthError::Config(e.to_string()))?;
    let truth = Truth {
        seed: spec.seed,
        n_teams: spec.n_teams,
        games_per_team: spec.games_per_team,
        strengths: ids.into_iter().zip(strengths.iter().copied()).collect(),
        home_adv: spec.home_adv,
        mov_scale: spec.mov_scale,
        mov_noise_sd: spec.mov_noise_sd,
    };
    Ok((season, truth))
}

/// Expected accuracy of predicting with the generating parameters, averaged over
/// all ordered (home, away) pairs, ties earning half credit.
pub fn bayes_accuracy(spec: &SynthSpec) -> Result<f64, SynthError> {
    spec.validate()?;
    let s = spec.explicit_strengths()?;
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            if i == j {
                continue;
            }
            let (win, tie, loss) = spec.outcome_probabilities(si - sj + spec.home_adv);
            total += win.max(loss) + 0.5 * tie;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn spec(n: usize, gpt: usize, seed: u64) -> SynthSpec {
        SynthSpec::logistic(n, gpt, Strengths::Sampled { sd: 0.8 }, 0.3, 10.0, seed)
    }

    #[test]
    fn counts_and_determinism() {
        let s = spec(4, 6, 7);
        let (season, truth) = generate_season(&s).unwrap();
        assert_eq!(season.games().len(), 12);
        assert_eq!(truth.strengths.len(), 4);
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for g in season.games() {
            *counts.entry(g.home.as_str()).or_default() += 1;
            *counts.entry(g.away.as_str()).or_default() += 1;
        }
        assert!(counts.values().all(|&c| c == 6));
        assert_eq!(generate_season(&s).unwrap(), (season, truth));
    }

    #[test]
    fn odd_slot_count_rejected() {
        let s = spec(5, 3, 1);
        assert!(matches!(generate_season(&s), Err(SynthError::Config(_))));
        assert!(matches!(generate_season(&spec(1, 2, 1)), Err(SynthError::Config(_))));
    }

    #[test]
    fn two_team_schedules_work() {
        let (season, _) = generate_season(&spec(2, 7 * 2, 3)).unwrap();
        assert_eq!(season.games().len(), 14);
    }

    #[test]
    fn bayes_trivial_cases() {
        let flat = SynthSpec::logistic(5, 4, Strengths::Explicit(vec![0.0; 5]), 0.0, 10.0, 0);
        assert!((bayes_accuracy(&flat).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(bayes_accuracy(&spec(4, 2, 0)).unwrap_err(), SynthError::UnrealizedStrengths);
    }

    #[test]
    fn realized_keeps_draws() {
        let s = spec(6, 2, 11);
        let r = s.realized().unwrap();
        let (_, truth) = generate_season(&s).unwrap();
        match r.strengths {
            Strengths::Explicit(v) => assert_eq!(v, truth.strengths.values().copied().collect::<Vec<_>>()),
            _ => unreachable!(),
        }
    }
}
