//! Cross-league summaries of accuracy curves: odds ratios against the
//! home-pick baseline, per-game slopes through the coin-flip intercept,
//! informativeness ratios and single-breakpoint piecewise-linear fits.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::harness::CurvePoint;
use crate::ingest::League;

/// Training fraction used for the odds-ratio table.
pub const OR_FRACTION: f64 = 0.875;
/// Column fractions of the per-game slope table.
pub const SLOPE_FRACTIONS: [f64; 4] = [0.25, 0.375, 0.5, 0.875];
/// Accuracy of a model that knows nothing.
pub const NO_INFORMATION_ACCURACY: f64 = 0.5;
/// Number of grid intervals the breakpoint search spans over the x-range.
pub const BREAKPOINT_GRID_INTERVALS: usize = 1000;
/// A breakpoint that lowers the SSE by no more than this is not reported as meaningful.
pub const MIN_BREAKPOINT_SSE_GAIN: f64 = 1e-12;

const FRACTION_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("probability {0} must lie strictly between 0 and 1")]
    ProbabilityOutOfRange(f64),
    #[error("no curve points at or below fraction {0}")]
    NoQualifyingPoints(f64),
    #[error("games-per-team value {0} must be positive")]
    NonPositiveX(f64),
    #[error("ratio denominator is zero")]
    ZeroDenominator,
    #[error("breakpoint fit needs at least 4 distinct x values, got {0}")]
    TooFewPoints(usize),
}

pub fn same_fraction(a: f64, b: f64) -> bool {
    (a - b).abs() < FRACTION_EPS
}

/// Odds of the model's accuracy divided by the odds of the baseline's.
pub fn odds_ratio(model_acc: f64, baseline_acc: f64) -> Result<f64, AnalysisError> {
    for p in [model_acc, baseline_acc] {
        if !(p > 0.0 && p < 1.0) {
            return Err(AnalysisError::ProbabilityOutOfRange(p));
        }
    }
    Ok((model_acc / (1.0 - model_acc)) / (baseline_acc / (1.0 - baseline_acc)))
}

/// A point on an accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyPoint {
    pub fraction: f64,
    pub games_per_team: f64,
    pub accuracy: f64,
}

/// Least-squares slope of accuracy against games per team, with the line
/// forced through 0.5 at zero games, over points with `fraction <= max_fraction`.
/// Returned in percentage points per game.
pub fn constrained_slope(points: &[AccuracyPoint], max_fraction: f64) -> Result<f64, AnalysisError> {
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut used = 0;
    for p in points.iter().filter(|p| p.fraction <= max_fraction + FRACTION_EPS) {
        if p.games_per_team.is_nan() || p.games_per_team <= 0.0 {
            return Err(AnalysisError::NonPositiveX(p.games_per_team));
        }
        sxy += p.games_per_team * (p.accuracy - NO_INFORMATION_ACCURACY);
        sxx += p.games_per_team * p.games_per_team;
        used += 1;
    }
    if used == 0 {
        return Err(AnalysisError::NoQualifyingPoints(max_fraction));
    }
    Ok(100.0 * sxy / sxx)
}

pub fn informativeness_ratio(slope_a: f64, slope_b: f64) -> Result<f64, AnalysisError> {
    if slope_b == 0.0 {
        return Err(AnalysisError::ZeroDenominator);
    }
    Ok(slope_a / slope_b)
}

/// Continuous two-segment fit `y = intercept + slope_left * x + (slope_right - slope_left) * max(0, x - psi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakpointFit {
    pub psi: f64,
    pub intercept: f64,
    pub slope_left: f64,
    pub slope_right: f64,
    pub sse: f64,
    pub single_line_sse: f64,
    /// Resolution of the breakpoint search.
    pub grid_step: f64,
    /// False when the hinge buys no more than [`MIN_BREAKPOINT_SSE_GAIN`] over one line.
    pub meaningful: bool,
}

impl BreakpointFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope_left * x + (self.slope_right - self.slope_left) * (x - self.psi).max(0.0)
    }
}

fn single_line_sse(points: &[(f64, f64)]) -> f64 {
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for &(x, y) in points {
        let row = Vector2::new(1.0, x);
        ata += row * row.transpose();
        atb += row * y;
    }
    let coef = ata.lu().solve(&atb).expect("two distinct x values make the line fit full rank");
    points.iter().map(|&(x, y)| (y - coef[0] - coef[1] * x).powi(2)).sum()
}

fn hinge_fit(points: &[(f64, f64)], psi: f64) -> Option<(Vector3<f64>, f64)> {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for &(x, y) in points {
        let row = Vector3::new(1.0, x, (x - psi).max(0.0));
        ata += row * row.transpose();
        atb += row * y;
    }
    let coef = ata.lu().solve(&atb)?;
    let sse = points
        .iter()
        .map(|&(x, y)| (y - coef[0] - coef[1] * x - coef[2] * (x - psi).max(0.0)).powi(2))
        .sum();
    Some((coef, sse))
}

/// Single-breakpoint continuous piecewise-linear least-squares fit.
///
/// The breakpoint is searched on a grid of step `(x_max - x_min) / 1000` strictly
/// inside the x-range; at each candidate the three line coefficients are the
/// exact conditional least-squares solution. The global SSE minimizer wins,
/// ties going to the smaller breakpoint.
pub fn fit_breakpoint(points: &[(f64, f64)]) -> Result<BreakpointFit, AnalysisError> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 4 {
        return Err(AnalysisError::TooFewPoints(xs.len()));
    }
    let (x_min, x_max) = (xs[0], xs[xs.len() - 1]);
    let step = (x_max - x_min) / BREAKPOINT_GRID_INTERVALS as f64;

    let mut best: Option<(f64, Vector3<f64>, f64)> = None;
    for j in 1..BREAKPOINT_GRID_INTERVALS {
        let psi = x_min + j as f64 * step;
        if let Some((coef, sse)) = hinge_fit(points, psi) {
            if best.as_ref().is_none_or(|b| sse < b.2) {
                best = Some((psi, coef, sse));
            }
        }
    }
    let (psi, coef, sse) = best.expect("at least one interior candidate has a full-rank hinge fit");
    let line_sse = single_line_sse(points);
    Ok(BreakpointFit {
        psi,
        intercept: coef[0],
        slope_left: coef[1],
        slope_right: coef[1] + coef[2],
        sse,
        single_line_sse: line_sse,
        grid_step: step,
        meaningful: line_sse - sse > MIN_BREAKPOINT_SSE_GAIN,
    })
}

/// Curves of one season, as read back from a curve file or produced by the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonCurve {
    pub season: String,
    pub points: Vec<CurvePoint>,
}

/// Season-averaged curve point; `min_mov_acc`/`max_mov_acc` give the range across seasons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledPoint {
    pub fraction: f64,
    pub seasons: usize,
    pub games_per_team: f64,
    pub mean_bt_acc: f64,
    pub mean_mov_acc: f64,
    pub min_mov_acc: f64,
    pub max_mov_acc: f64,
    pub baseline_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub fraction: f64,
    pub pp_per_game: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub league: League,
    pub seasons_used: Vec<String>,
    /// MOV odds ratio at 87.5% training, from season-pooled accuracy and baseline.
    pub or_mov_875: Option<f64>,
    pub or_bt_875: Option<f64>,
    pub per_season_or_mov: BTreeMap<String, f64>,
    pub slopes: Vec<SlopeEntry>,
    pub pooled_curve: Vec<PooledPoint>,
    pub breakpoint: Option<BreakpointFit>,
}

impl SummaryReport {
    pub fn slope(&self, fraction: f64) -> Option<f64> {
        self.slopes.iter().find(|s| same_fraction(s.fraction, fraction)).map(|s| s.pp_per_game)
    }
}

/// Average the per-season curves fraction by fraction.
pub fn pool_curves(curves: &[SeasonCurve]) -> Vec<PooledPoint> {
    let mut fractions: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.fraction)).collect();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup_by(|a, b| same_fraction(*a, *b));

    fractions
        .into_iter()
        .map(|f| {
            let pts: Vec<&CurvePoint> = curves
                .iter()
                .filter_map(|c| c.points.iter().find(|p| same_fraction(p.fraction, f)))
                .collect();
            let n = pts.len() as f64;
            let mean = |get: fn(&CurvePoint) -> f64| pts.iter().map(|p| get(p)).sum::<f64>() / n;
            PooledPoint {
                fraction: f,
                seasons: pts.len(),
                games_per_team: mean(|p| p.games_per_team),
                mean_bt_acc: mean(|p| p.mean_bt_acc),
                mean_mov_acc: mean(|p| p.mean_mov_acc),
                min_mov_acc: pts.iter().map(|p| p.mean_mov_acc).fold(f64::INFINITY, f64::min),
                max_mov_acc: pts.iter().map(|p| p.mean_mov_acc).fold(f64::NEG_INFINITY, f64::max),
                baseline_acc: mean(|p| p.baseline_acc),
            }
        })
        .collect()
}

/// Build the per-league report from that league's season curves.
pub fn summarize_league(league: League, curves: &[SeasonCurve]) -> Result<SummaryReport, AnalysisError> {
    let pooled = pool_curves(curves);

    let at_or = pooled.iter().find(|p| same_fraction(p.fraction, OR_FRACTION));
    let or_mov_875 = at_or.map(|p| odds_ratio(p.mean_mov_acc, p.baseline_acc)).transpose()?;
    let or_bt_875 = at_or.map(|p| odds_ratio(p.mean_bt_acc, p.baseline_acc)).transpose()?;

    let mut per_season_or_mov = BTreeMap::new();
    for c in curves {
        if let Some(p) = c.points.iter().find(|p| same_fraction(p.fraction, OR_FRACTION)) {
            per_season_or_mov.insert(c.season.clone(), odds_ratio(p.mean_mov_acc, p.baseline_acc)?);
        }
    }

    let mov_points: Vec<AccuracyPoint> = pooled
        .iter()
        .map(|p| AccuracyPoint { fraction: p.fraction, games_per_team: p.games_per_team, accuracy: p.mean_mov_acc })
        .collect();
    let mut slopes = Vec::new();
    for &f in &SLOPE_FRACTIONS {
        match constrained_slope(&mov_points, f) {
            Ok(s) => slopes.push(SlopeEntry { fraction: f, pp_per_game: s }),
            Err(AnalysisError::NoQualifyingPoints(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let xy: Vec<(f64, f64)> = mov_points.iter().map(|p| (p.games_per_team, p.accuracy)).collect();
    let breakpoint = match fit_breakpoint(&xy) {
        Ok(b) => Some(b),
        Err(AnalysisError::TooFewPoints(_)) => None,
        Err(e) => return Err(e),
    };

    Ok(SummaryReport {
        league,
        seasons_used: curves.iter().map(|c| c.season.clone()).collect(),
        or_mov_875,
        or_bt_875,
        per_season_or_mov,
        slopes,
        pooled_curve: pooled,
        breakpoint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub numerator: League,
    pub denominator: League,
    pub numerator_fraction: f64,
    pub denominator_fraction: f64,
    pub ratio: f64,
}

/// Informativeness ratios for every ordered pair of distinct leagues and every
/// pairing of slope columns. Pairs with a zero denominator slope are skipped.
pub fn informativeness_ratios(reports: &[SummaryReport]) -> Vec<RatioEntry> {
    let mut out = Vec::new();
    for a in reports {
        for b in reports {
            if a.league == b.league {
                continue;
            }
            for sa in &a.slopes {
                for sb in &b.slopes {
                    if let Ok(ratio) = informativeness_ratio(sa.pp_per_game, sb.pp_per_game) {
                        out.push(RatioEntry {
                            numerator: a.league,
                            denominator: b.league,
                            numerator_fraction: sa.fraction,
                            denominator_fraction: sb.fraction,
                            ratio,
                        });
                    }
                }
            }
        }
    }
    out
}
