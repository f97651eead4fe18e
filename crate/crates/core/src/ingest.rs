//! Season game logs: the canonical CSV schema and its in-memory form.
//!
//! The only accepted input is a UTF-8 CSV with the header
//! `date,home,away,home_score,away_score`. Every data row becomes one
//! [`Game`]; the win indicator and margin are derived from the scores.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CANONICAL_HEADER: [&str; 5] = ["date", "home", "away", "home_score", "away_score"];

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("season contains no games")]
    EmptySeason,
    #[error("duplicate game id {0}")]
    DuplicateGameId(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum League {
    Nfl,
    Nba,
    Nhl,
    Mlb,
    Other,
}

impl League {
    pub const ALL: [League; 5] = [League::Nfl, League::Nba, League::Nhl, League::Mlb, League::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            League::Nfl => "NFL",
            League::Nba => "NBA",
            League::Nhl => "NHL",
            League::Mlb => "MLB",
            League::Other => "OTHER",
        }
    }
}

impl fmt::Display for League {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for League {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NFL" => Ok(League::Nfl),
            "NBA" => Ok(League::Nba),
            "NHL" => Ok(League::Nhl),
            "MLB" => Ok(League::Mlb),
            "OTHER" => Ok(League::Other),
            _ => Err(format!("unknown league '{s}' (expected NFL, NBA, NHL, MLB or OTHER)")),
        }
    }
}

/// Result of a game from the home team's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    HomeWin,
    HomeLoss,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub game_id: String,
    pub date: NaiveDate,
    pub home: String,
    pub away: String,
    pub home_score: u32,
    pub away_score: u32,
}

impl Game {
    pub fn new(
        game_id: impl Into<String>,
        date: NaiveDate,
        home: impl Into<String>,
        away: impl Into<String>,
        home_score: u32,
        away_score: u32,
    ) -> Self {
        Game {
            game_id: game_id.into(),
            date,
            home: home.into(),
            away: away.into(),
            home_score,
            away_score,
        }
    }

    /// 1 when the home team outscored the visitor, otherwise 0 (ties included).
    pub fn home_win(&self) -> u8 {
        u8::from(self.home_score > self.away_score)
    }

    /// Home score minus away score.
    pub fn margin(&self) -> i64 {
        i64::from(self.home_score) - i64::from(self.away_score)
    }

    pub fn outcome(&self) -> Outcome {
        match self.home_score.cmp(&self.away_score) {
            std::cmp::Ordering::Greater => Outcome::HomeWin,
            std::cmp::Ordering::Less => Outcome::HomeLoss,
            std::cmp::Ordering::Equal => Outcome::Tie,
        }
    }

    pub fn is_tie(&self) -> bool {
        self.home_score == self.away_score
    }
}

/// One league-year of regular-season games.
///
/// Construction validates the invariants: at least one game, unique game ids
/// and distinct home/away teams. `teams` is derived from the games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Season {
    league: League,
    label: String,
    games: Vec<Game>,
    teams: BTreeSet<String>,
}

impl Season {
    pub fn new(league: League, label: impl Into<String>, games: Vec<Game>) -> Result<Self, IngestError> {
        if games.is_empty() {
            return Err(IngestError::EmptySeason);
        }
        let mut ids = HashSet::with_capacity(games.len());
        let mut teams = BTreeSet::new();
        for (idx, g) in games.iter().enumerate() {
            if g.home == g.away {
                return Err(IngestError::Malformed {
                    line: idx as u64 + 2,
                    message: format!("home and away team are both '{}'", g.home),
                });
            }
            if !ids.insert(g.game_id.as_str()) {
                return Err(IngestError::DuplicateGameId(g.game_id.clone()));
            }
            teams.insert(g.home.clone());
            teams.insert(g.away.clone());
        }
        Ok(Season {
            league,
            label: label.into(),
            games,
            teams,
        })
    }

    pub fn league(&self) -> League {
        self.league
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn games(&self) -> &[Game] {
        &self.games
    }

    pub fn teams(&self) -> &BTreeSet<String> {
        &self.teams
    }

    /// Average number of games each team plays: 2|G|/|teams|.
    pub fn games_per_team(&self) -> f64 {
        2.0 * self.games.len() as f64 / self.teams.len() as f64
    }

    pub fn summary(&self) -> SeasonSummary {
        summarize_season(self)
    }

    /// Serialize back to the canonical CSV (LF line endings).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), IngestError> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        wtr.write_record(CANONICAL_HEADER)?;
        for g in &self.games {
            wtr.write_record([
                g.date.format(DATE_FORMAT).to_string(),
                g.home.clone(),
                g.away.clone(),
                g.home_score.to_string(),
                g.away_score.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("canonical CSV is UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeasonSummary {
    pub num_games: usize,
    pub num_teams: usize,
    pub home_win_fraction: f64,
    pub tie_fraction: f64,
    pub games_per_team: f64,
}

pub fn summarize_season(season: &Season) -> SeasonSummary {
    let n = season.games.len() as f64;
    let wins = season.games.iter().filter(|g| g.margin() > 0).count() as f64;
    let ties = season.games.iter().filter(|g| g.is_tie()).count() as f64;
    SeasonSummary {
        num_games: season.games.len(),
        num_teams: season.teams.len(),
        home_win_fraction: wins / n,
        tie_fraction: ties / n,
        games_per_team: season.games_per_team(),
    }
}

fn game_id_for_row(row: usize) -> String {
    format!("g{:05}", row + 1)
}

/// Parse a canonical CSV game log into a [`Season`].
///
/// Game ids are assigned from the data-row ordinal (`g00001`, `g00002`, ...),
/// so re-parsing a serialized season reproduces it exactly. Errors carry the
/// 1-based physical line number of the offending row.
pub fn parse_season<R: Read>(source: R, league: League, season_label: &str) -> Result<Season, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(IngestError::EmptySeason),
        Some(r) => r?,
    };
    let header_fields: Vec<&str> = header.iter().collect();
    let header_ok = header_fields.len() == CANONICAL_HEADER.len()
        && header_fields
            .iter()
            .zip(CANONICAL_HEADER)
            // a UTF-8 byte order mark may precede the first field
            .all(|(got, want)| got.trim_start_matches('\u{feff}') == want);
    if !header_ok {
        return Err(IngestError::Malformed {
            line: header.position().map_or(1, |p| p.line()),
            message: format!("expected header '{}', found '{}'", CANONICAL_HEADER.join(","), header_fields.join(",")),
        });
    }

    let mut games = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| IngestError::Malformed { line, message };

        if record.len() != CANONICAL_HEADER.len() {
            return Err(bad(format!("expected 5 columns, found {}", record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|e| bad(format!("invalid date '{}': {e}", &record[0])))?;
        let home = &record[1];
        let away = &record[2];
        if home.is_empty() || away.is_empty() {
            return Err(bad("empty team id".to_string()));
        }
        if home == away {
            return Err(bad(format!("home and away team are both '{home}'")));
        }
        let score = |field: &str, name: &str| {
            field
                .parse::<u32>()
                .map_err(|_| bad(format!("{name} '{field}' is not a non-negative integer")))
        };
        let home_score = score(&record[3], "home_score")?;
        let away_score = score(&record[4], "away_score")?;
        games.push(Game::new(game_id_for_row(games.len()), date, home, away, home_score, away_score));
    }

    Season::new(league, season_label, games)
}
