use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Map, Value};

use season_info::analysis::{
    informativeness_ratios, same_fraction, summarize_league, SeasonCurve, SummaryReport, OR_FRACTION,
    SLOPE_FRACTIONS,
};
use season_info::harness::{run_protocol, run_protocol_jobs, HarnessError, ProtocolConfig};
use season_info::ingest::summarize_season;
use season_info::report::{format_sig, read_curve_csv, write_curve_csv, CurveRow};
use season_info::synth::{bayes_accuracy, generate_season, Strengths, SynthError, SynthSpec};
use season_info::{parse_season, League, Season};

use crate::output::{commit, json_bytes, rounded_json, sha256_hex, stage};
use crate::{CliError, CurveArgs, Format, ProtocolArgs, SummaryArgs, SynthArgs, ValidateArgs};

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn harness_error(e: HarnessError) -> CliError {
    match e {
        HarnessError::Config(m) => CliError::Usage(m),
        HarnessError::AllReplicatesFailed { .. } => CliError::Fit(e.to_string()),
        HarnessError::Metric(_) => CliError::Data(e.to_string()),
    }
}

fn synth_error(e: SynthError) -> CliError {
    match e {
        SynthError::Config(_) | SynthError::InfeasibleSchedule { .. } => CliError::Usage(e.to_string()),
        SynthError::UnrealizedStrengths => CliError::Data(e.to_string()),
    }
}

fn protocol_config(p: &ProtocolArgs) -> Result<ProtocolConfig, CliError> {
    if p.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let config = ProtocolConfig {
        x_grid: p.x_grid.clone(),
        replicates: p.replicates,
        master_seed: p.seed,
        bt_penalty: p.bt_penalty,
        mov_penalty: p.mov_penalty,
        ..Default::default()
    };
    config.validate().map_err(harness_error)?;
    Ok(config)
}

fn manifest(command: &str, config: Option<&ProtocolConfig>, inputs: Value, results: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("created_utc".into(), json!(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)));
    m.insert("command".into(), json!(command));
    if let Some(c) = config {
        m.insert("config".into(), serde_json::to_value(c).expect("config serializes"));
    }
    m.insert("inputs".into(), inputs);
    m.extend(results);
    Value::Object(m)
}

fn curve_rows_json(rows: &[CurveRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut v = rounded_json(&r.point);
            if let Value::Object(m) = &mut v {
                m.insert("league".into(), json!(r.league));
                m.insert("season".into(), json!(r.season));
            }
            v
        })
        .collect();
    Value::Array(rows)
}

pub fn curve(a: &CurveArgs) -> Result<(), CliError> {
    let config = protocol_config(&a.protocol)?;
    if !a.season.is_empty() && a.season.len() != a.inputs.len() {
        return Err(CliError::Usage(format!(
            "{} season labels given for {} input files",
            a.season.len(),
            a.inputs.len()
        )));
    }

    let mut seasons: Vec<Season> = Vec::new();
    let mut digests = Vec::new();
    for (i, path) in a.inputs.iter().enumerate() {
        let label = match a.season.get(i) {
            Some(l) => l.clone(),
            None => path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
        };
        if seasons.iter().any(|s| s.label() == label) {
            return Err(CliError::Usage(format!("season label '{label}' used twice; pass --season")));
        }
        let bytes = read_input(path)?;
        let season = parse_season(bytes.as_slice(), a.league, &label)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        config
            .validate_for(&season)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        digests.push(json!({ "path": path.display().to_string(), "season": label, "sha256": sha256_hex(&bytes) }));
        seasons.push(season);
    }

    let mut rows = Vec::new();
    for season in &seasons {
        let points = match a.protocol.jobs {
            Some(j) => run_protocol_jobs(season, &config, j),
            None => run_protocol(season, &config),
        }
        .map_err(|e| match harness_error(e) {
            CliError::Fit(m) => CliError::Fit(format!("season {}: {m}", season.label())),
            other => other,
        })?;
        rows.extend(points.into_iter().map(|point| CurveRow {
            league: a.league,
            season: season.label().to_string(),
            point,
        }));
    }

    let body = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, &rows).map_err(|e| CliError::Data(e.to_string()))?;
            buf
        }
        Format::Json => json_bytes(&curve_rows_json(&rows)),
    };
    let mut staged = vec![stage(&a.out, &body)?];
    if let Some(path) = &a.manifest {
        let mut results = Map::new();
        results.insert("league".into(), json!(a.league));
        results.insert("curves".into(), curve_rows_json(&rows));
        let m = manifest("curve", Some(&config), Value::Array(digests), results);
        staged.push(stage(path, &json_bytes(&m))?);
    }
    commit(staged)
}

fn at_or_fraction(report: &SummaryReport) -> Option<&season_info::analysis::PooledPoint> {
    report.pooled_curve.iter().find(|p| same_fraction(p.fraction, OR_FRACTION))
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn table1(reports: &[SummaryReport]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["league", "seasons", "mov_acc", "bt_acc", "baseline_acc", "or_mov", "or_bt"]).map_err(io)?;
    for r in reports {
        let p = at_or_fraction(r);
        w.write_record([
            r.league.as_str().to_string(),
            r.seasons_used.len().to_string(),
            opt(p.map(|p| p.mean_mov_acc)),
            opt(p.map(|p| p.mean_bt_acc)),
            opt(p.map(|p| p.baseline_acc)),
            opt(r.or_mov_875),
            opt(r.or_bt_875),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

fn table2(reports: &[SummaryReport]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Data(e.to_string());
    let mut header = vec!["league".to_string()];
    header.extend(SLOPE_FRACTIONS.iter().map(|f| format!("slope_{}", 100.0 * f)));
    w.write_record(&header).map_err(io)?;
    for r in reports {
        let mut rec = vec![r.league.as_str().to_string()];
        rec.extend(SLOPE_FRACTIONS.iter().map(|&f| opt(r.slope(f))));
        w.write_record(&rec).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

pub fn summary(a: &SummaryArgs) -> Result<(), CliError> {
    let mut by_league: BTreeMap<League, Vec<SeasonCurve>> = BTreeMap::new();
    let mut digests = Vec::new();
    for path in &a.inputs {
        let bytes = read_input(path)?;
        let rows = read_curve_csv(bytes.as_slice()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for row in rows {
            let curves = by_league.entry(row.league).or_default();
            let idx = match curves.iter().position(|c| c.season == row.season) {
                Some(i) => i,
                None => {
                    curves.push(SeasonCurve { season: row.season.clone(), points: Vec::new() });
                    curves.len() - 1
                }
            };
            let curve = &mut curves[idx];
            if curve.points.iter().any(|p| same_fraction(p.fraction, row.point.fraction)) {
                return Err(CliError::Data(format!(
                    "{}: {} season {} has fraction {} more than once",
                    path.display(),
                    row.league,
                    row.season,
                    row.point.fraction
                )));
            }
            curve.points.push(row.point);
        }
        digests.push(json!({ "path": path.display().to_string(), "sha256": sha256_hex(&bytes) }));
    }

    let reports = by_league
        .iter()
        .map(|(league, curves)| summarize_league(*league, curves).map_err(|e| CliError::Data(format!("{league}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let ratios = informativeness_ratios(&reports);

    let mut results = Map::new();
    results.insert("reports".into(), rounded_json(&reports));
    results.insert("informativeness_ratios".into(), rounded_json(&ratios));
    let summary_json = Value::Object(results.clone());

    fs::create_dir_all(&a.out).map_err(|source| CliError::Io { path: a.out.clone(), source })?;
    let mut staged = vec![
        stage(&a.out.join("summary.json"), &json_bytes(&summary_json))?,
        stage(&a.out.join("table1_odds_ratios.csv"), &table1(&reports)?)?,
        stage(&a.out.join("table2_slopes.csv"), &table2(&reports)?)?,
    ];
    if let Some(path) = &a.manifest {
        let m = manifest("summary", None, Value::Array(digests), results);
        staged.push(stage(path, &json_bytes(&m))?);
    }
    commit(staged)
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let strengths = match &a.strengths {
        Some(s) => Strengths::Explicit(s.clone()),
        None => Strengths::Sampled { sd: a.strength_sd },
    };
    let mut spec = SynthSpec::logistic(a.teams, a.games_per_team, strengths, a.home_adv, a.mov_scale, a.seed);
    if let Some(sd) = a.noise_sd {
        spec.mov_noise_sd = sd;
    }
    let (season, truth) = generate_season(&spec).map_err(synth_error)?;
    let bayes = bayes_accuracy(&spec.realized().map_err(synth_error)?).map_err(synth_error)?;

    let mut truth_json = rounded_json(&truth);
    if let Value::Object(m) = &mut truth_json {
        m.insert("bayes_accuracy".into(), rounded_json(&bayes));
    }
    let truth_path = a.truth.clone().unwrap_or_else(|| a.out.with_extension("truth.json"));
    if truth_path == a.out {
        return Err(CliError::Usage("--truth and --out name the same file".into()));
    }
    commit(vec![
        stage(&a.out, season.to_csv_string().as_bytes())?,
        stage(&truth_path, &json_bytes(&truth_json))?,
    ])
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let mut failed = 0;
    for path in &a.inputs {
        let label = path.display().to_string();
        let parsed = read_input(path).and_then(|bytes| {
            parse_season(bytes.as_slice(), a.league, &label).map_err(|e| CliError::Data(format!("{label}: {e}")))
        });
        match parsed {
            Ok(season) => {
                let s = summarize_season(&season);
                println!(
                    "{label}: ok, {} games, {} teams, {} games per team, home win rate {}, tie rate {}",
                    s.num_games,
                    s.num_teams,
                    format_sig(s.games_per_team),
                    format_sig(s.home_win_fraction),
                    format_sig(s.tie_fraction)
                );
            }
            Err(e) => {
                eprintln!("{e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} of {} files failed validation", a.inputs.len())));
    }
    Ok(())
}

