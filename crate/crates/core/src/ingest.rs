//! Loading and validation of the master roster and per-season points files,
//! roster filtering, and construction of the per-player 114-gameweek matrix.
//!
//! The master file carries no id column; stable pids are assigned by file
//! order (1-based) and are the id space the season files refer to. Names are
//! carried for reporting only — the pid is the sole join key.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

/// Gameweeks per season; three seasons make the 114-value player series.
pub const SEASON_LEN: usize = 38;
pub const N_SEASONS: usize = 3;
pub const SERIES_LEN: usize = SEASON_LEN * N_SEASONS;
pub const SEASON_BOUNDARIES: [usize; N_SEASONS] = [0, 38, 76];

#[derive(Debug)]
pub enum IngestError {
    Io { path: String, source: std::io::Error },
    /// Structural problem in an input file; `line` is 1-based (header = 1).
    Parse { line: usize, msg: String },
    /// Data that parses but contradicts itself.
    Integrity { msg: String },
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io { path, source } => write!(f, "cannot read '{path}': {source}"),
            IngestError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            IngestError::Integrity { msg } => write!(f, "integrity error: {msg}"),
        }
    }
}

impl std::error::Error for IngestError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Glk,
    Def,
    Mid,
    Fwd,
}

impl Position {
    pub const ALL: [Position; 4] = [Position::Glk, Position::Def, Position::Mid, Position::Fwd];

    pub fn code(&self) -> &'static str {
        match self {
            Position::Glk => "GLK",
            Position::Def => "DEF",
            Position::Mid => "MID",
            Position::Fwd => "FWD",
        }
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GLK" => Ok(Position::Glk),
            "DEF" => Ok(Position::Def),
            "MID" => Ok(Position::Mid),
            "FWD" => Ok(Position::Fwd),
            other => Err(format!("unknown position '{other}'")),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Season {
    S2013_14,
    S2014_15,
    S2015_16,
}

impl Season {
    pub const ALL: [Season; 3] = [Season::S2013_14, Season::S2014_15, Season::S2015_16];
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Season::S2013_14 => "2013-14",
            Season::S2014_15 => "2014-15",
            Season::S2015_16 => "2015-16",
        };
        f.write_str(label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerRecord {
    pub id: u32,
    pub first_name: String,
    pub surname: String,
    pub position: Position,
    pub team: String,
    /// Cost in millions, always a multiple of 0.1.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonPointsRow {
    pub name: String,
    pub gameweek: u32,
    pub pid: u32,
    pub team: String,
    pub weekly_points: i32,
    pub running_sum: i32,
}

/// Roster partition after the three-season presence filter.
#[derive(Debug, Clone)]
pub struct Roster {
    pub active: Vec<PlayerRecord>,
    /// Joined after the first season: no history to model.
    pub removed_new: Vec<PlayerRecord>,
    /// Left during the window: nothing to forecast.
    pub removed_dormant: Vec<PlayerRecord>,
}

/// Per-player chronological series of 114 gameweek scores (3 x 38),
/// zero-filled where a player was absent. Row order matches `players`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointsMatrix {
    pub players: Vec<PlayerRecord>,
    pub values: Vec<Vec<i32>>,
}

impl PointsMatrix {
    pub fn row_as_f64(&self, idx: usize) -> Vec<f64> {
        self.values[idx].iter().map(|&v| v as f64).collect()
    }
}

fn cost_is_granular(cost: f64) -> bool {
    cost >= 0.0 && (cost * 10.0 - (cost * 10.0).round()).abs() <= 1e-9
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    let mut buf = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut buf))
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    Ok(buf)
}

fn csv_reader(data: &str, delimiter: u8) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(data.as_bytes())
}

fn check_header(record: &csv::StringRecord, expected: &[&str]) -> Result<(), IngestError> {
    let got: Vec<String> = record.iter().map(|f| f.trim().to_ascii_lowercase()).collect();
    if got != expected {
        return Err(IngestError::Parse {
            line: 1,
            msg: format!("header mismatch: expected {expected:?}, got {got:?}"),
        });
    }
    Ok(())
}

const MASTER_HEADER: [&str; 5] = ["first_name", "surname", "position", "team", "cost"];
const SEASON_HEADER: [&str; 6] = ["name", "gameweek", "pid", "team", "weekly_points", "running_sum"];

/// Loads the master roster. Costs arrive in raw units and are scaled to
/// millions; empty name fields become `"-"`; pids are assigned by file order.
pub fn load_master(path: &Path, delimiter: u8) -> Result<Vec<PlayerRecord>, IngestError> {
    let data = read_file(path)?;
    let mut reader = csv_reader(&data, delimiter);
    let mut players = Vec::new();
    let mut line = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse { line: line + 1, msg: e.to_string() })?;
        line += 1;
        if line == 1 {
            check_header(&record, &MASTER_HEADER)?;
            continue;
        }
        if record.len() != MASTER_HEADER.len() {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected {} columns, got {}", MASTER_HEADER.len(), record.len()),
            });
        }
        let name_or_dash = |s: &str| {
            let t = s.trim();
            if t.is_empty() { "-".to_string() } else { t.to_string() }
        };
        let position = Position::from_str(&record[2])
            .map_err(|msg| IngestError::Parse { line, msg })?;
        let raw_cost: f64 = record[4].trim().parse().map_err(|_| IngestError::Parse {
            line,
            msg: format!("unparseable cost '{}'", &record[4]),
        })?;
        let cost = raw_cost / 1_000_000.0;
        if !cost_is_granular(cost) {
            return Err(IngestError::Parse {
                line,
                msg: format!("cost {cost} is not a non-negative multiple of 0.1M"),
            });
        }
        players.push(PlayerRecord {
            id: players.len() as u32 + 1,
            first_name: name_or_dash(&record[0]),
            surname: name_or_dash(&record[1]),
            position,
            team: record[3].trim().to_string(),
            cost,
        });
    }
    Ok(players)
}

/// Loads one season's points rows, grouped by pid and sorted by gameweek,
/// with the per-player running sums checked against the weekly points.
pub fn load_season_points(
    path: &Path,
    season: Season,
    delimiter: u8,
) -> Result<Vec<SeasonPointsRow>, IngestError> {
    let data = read_file(path)?;
    if data.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv_reader(&data, delimiter);
    let mut rows = Vec::new();
    let mut line = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse { line: line + 1, msg: e.to_string() })?;
        line += 1;
        if line == 1 {
            check_header(&record, &SEASON_HEADER)?;
            continue;
        }
        if record.len() != SEASON_HEADER.len() {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected {} columns, got {}", SEASON_HEADER.len(), record.len()),
            });
        }
        let parse_int = |idx: usize, what: &str| -> Result<i64, IngestError> {
            record[idx].trim().parse().map_err(|_| IngestError::Parse {
                line,
                msg: format!("unparseable {what} '{}'", &record[idx]),
            })
        };
        let gameweek = parse_int(1, "gameweek")?;
        if !(1..=SEASON_LEN as i64).contains(&gameweek) {
            return Err(IngestError::Parse {
                line,
                msg: format!("gameweek {gameweek} outside [1, {SEASON_LEN}]"),
            });
        }
        let pid = parse_int(2, "pid")?;
        if pid <= 0 {
            return Err(IngestError::Parse { line, msg: format!("pid {pid} must be positive") });
        }
        rows.push(SeasonPointsRow {
            name: record[0].trim().to_string(),
            gameweek: gameweek as u32,
            pid: pid as u32,
            team: record[3].trim().to_string(),
            weekly_points: parse_int(4, "weekly_points")? as i32,
            running_sum: parse_int(5, "running_sum")? as i32,
        });
    }

    rows.sort_by_key(|r| (r.pid, r.gameweek));
    let mut cumulative: BTreeMap<u32, i32> = BTreeMap::new();
    let mut last_gw: BTreeMap<u32, u32> = BTreeMap::new();
    for row in &rows {
        if last_gw.get(&row.pid) == Some(&row.gameweek) {
            return Err(IngestError::Integrity {
                msg: format!(
                    "duplicate row for pid {} gameweek {} in season {season}",
                    row.pid, row.gameweek
                ),
            });
        }
        last_gw.insert(row.pid, row.gameweek);
        let sum = cumulative.entry(row.pid).or_insert(0);
        *sum += row.weekly_points;
        if *sum != row.running_sum {
            return Err(IngestError::Integrity {
                msg: format!(
                    "running sum mismatch for pid {} at gameweek {} in season {season}: \
                     expected {}, file says {}",
                    row.pid, row.gameweek, *sum, row.running_sum
                ),
            });
        }
    }
    Ok(rows)
}

fn normalized_name(name: &str) -> Option<String> {
    let t = name.trim().to_ascii_lowercase();
    if t.is_empty() || t == "-" {
        None
    } else {
        Some(t)
    }
}

/// Zero-filled 114-value series for one player from their per-season rows.
pub(crate) fn zero_filled_row(per_season: [&[&SeasonPointsRow]; N_SEASONS]) -> Vec<i32> {
    let mut row = vec![0i32; SERIES_LEN];
    for (k, rows) in per_season.iter().enumerate() {
        for r in rows.iter() {
            row[SEASON_BOUNDARIES[k] + (r.gameweek as usize - 1)] = r.weekly_points;
        }
    }
    row
}

/// Classifies the roster and builds the points matrix.
///
/// A player with no rows in the earliest season is `removed_new` (history
/// unavailable); otherwise, one with no rows in the latest season is
/// `removed_dormant` (left the league). The rest are active and get a
/// zero-filled 114-value series. Season rows whose pid is not in the master
/// set belong to players outside the current catalogue and are ignored.
pub fn build_matrix(
    master: &[PlayerRecord],
    seasons: &[Vec<SeasonPointsRow>; N_SEASONS],
) -> Result<(Roster, PointsMatrix), IngestError> {
    // One pid must not wear two names (missing names aside).
    let mut seen_names: BTreeMap<u32, String> = BTreeMap::new();
    for season in seasons {
        for row in season {
            if let Some(name) = normalized_name(&row.name) {
                match seen_names.get(&row.pid) {
                    Some(existing) if *existing != name => {
                        return Err(IngestError::Integrity {
                            msg: format!(
                                "pid {} appears as both '{existing}' and '{name}'",
                                row.pid
                            ),
                        });
                    }
                    None => {
                        seen_names.insert(row.pid, name);
                    }
                    _ => {}
                }
            }
        }
    }

    let mut by_pid: [BTreeMap<u32, Vec<&SeasonPointsRow>>; N_SEASONS] = Default::default();
    for (k, season) in seasons.iter().enumerate() {
        for row in season {
            by_pid[k].entry(row.pid).or_default().push(row);
        }
    }

    let mut roster = Roster {
        active: Vec::new(),
        removed_new: Vec::new(),
        removed_dormant: Vec::new(),
    };
    let mut values = Vec::new();
    for player in master {
        let present_first = by_pid[0].contains_key(&player.id);
        let present_last = by_pid[N_SEASONS - 1].contains_key(&player.id);
        if !present_first {
            roster.removed_new.push(player.clone());
        } else if !present_last {
            roster.removed_dormant.push(player.clone());
        } else {
            let empty: Vec<&SeasonPointsRow> = Vec::new();
            let per_season = [
                by_pid[0].get(&player.id).unwrap_or(&empty).as_slice(),
                by_pid[1].get(&player.id).unwrap_or(&empty).as_slice(),
                by_pid[2].get(&player.id).unwrap_or(&empty).as_slice(),
            ];
            values.push(zero_filled_row(per_season));
            roster.active.push(player.clone());
        }
    }

    let matrix = PointsMatrix { players: roster.active.clone(), values };
    Ok((roster, matrix))
}

/// Appearance counts per pid for one season's rows (used for the
/// points-per-match estimate downstream).
pub fn appearances(rows: &[SeasonPointsRow]) -> BTreeMap<u32, u32> {
    let mut counts = BTreeMap::new();
    for row in rows {
        *counts.entry(row.pid).or_insert(0) += 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// Matrix / roster artifacts
// ---------------------------------------------------------------------------

/// Writes the matrix as `pid,gw1..gw114`.
pub fn write_matrix_csv<W: std::io::Write>(writer: W, matrix: &PointsMatrix) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["pid".to_string()];
    header.extend((1..=SERIES_LEN).map(|i| format!("gw{i}")));
    w.write_record(&header).map_err(csv_io_error)?;
    for (player, row) in matrix.players.iter().zip(&matrix.values) {
        let mut record = vec![player.id.to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(csv_io_error)?;
    }
    w.flush().map_err(|e| IngestError::Io { path: "<matrix>".into(), source: e })?;
    Ok(())
}

fn csv_io_error(e: csv::Error) -> IngestError {
    IngestError::Parse { line: 0, msg: e.to_string() }
}

/// Reads a matrix written by [`write_matrix_csv`], joined back to a roster
/// for the player details.
pub fn read_matrix_csv(path: &Path, roster: &[RosterEntry]) -> Result<PointsMatrix, IngestError> {
    let data = read_file(path)?;
    let mut reader = csv_reader(&data, b',');
    let by_pid: BTreeMap<u32, &RosterEntry> =
        roster.iter().map(|e| (e.player.id, e)).collect();
    let mut players = Vec::new();
    let mut values = Vec::new();
    let mut line = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse { line: line + 1, msg: e.to_string() })?;
        line += 1;
        if line == 1 {
            if record.len() != SERIES_LEN + 1 {
                return Err(IngestError::Parse {
                    line,
                    msg: format!("matrix header must have {} columns", SERIES_LEN + 1),
                });
            }
            continue;
        }
        let pid: u32 = record[0].trim().parse().map_err(|_| IngestError::Parse {
            line,
            msg: format!("unparseable pid '{}'", &record[0]),
        })?;
        let entry = by_pid.get(&pid).ok_or_else(|| IngestError::Integrity {
            msg: format!("matrix pid {pid} not present in roster"),
        })?;
        let mut row = Vec::with_capacity(SERIES_LEN);
        for i in 1..record.len() {
            row.push(record[i].trim().parse().map_err(|_| IngestError::Parse {
                line,
                msg: format!("unparseable points value '{}'", &record[i]),
            })?);
        }
        if row.len() != SERIES_LEN {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected {SERIES_LEN} gameweek values, got {}", row.len()),
            });
        }
        players.push(entry.player.clone());
        values.push(row);
    }
    Ok(PointsMatrix { players, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RosterStatus {
    Active,
    RemovedNew,
    RemovedDormant,
}

impl RosterStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RosterStatus::Active => "active",
            RosterStatus::RemovedNew => "removed_new",
            RosterStatus::RemovedDormant => "removed_dormant",
        }
    }
}

impl FromStr for RosterStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "active" => Ok(RosterStatus::Active),
            "removed_new" => Ok(RosterStatus::RemovedNew),
            "removed_dormant" => Ok(RosterStatus::RemovedDormant),
            other => Err(format!("unknown roster status '{other}'")),
        }
    }
}

/// One row of the roster classification artifact.
#[derive(Debug, Clone)]
pub struct RosterEntry {
    pub player: PlayerRecord,
    pub status: RosterStatus,
    /// Appearances in the latest observed season (0 for removed players).
    pub matches_last_season: u32,
}

/// Writes the roster classification as
/// `pid,first_name,surname,position,team,cost,status,matches_last_season`.
pub fn write_roster_csv<W: std::io::Write>(
    writer: W,
    roster: &Roster,
    last_season_appearances: &BTreeMap<u32, u32>,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "pid", "first_name", "surname", "position", "team", "cost", "status",
        "matches_last_season",
    ])
    .map_err(csv_io_error)?;
    let groups = [
        (&roster.active, RosterStatus::Active),
        (&roster.removed_new, RosterStatus::RemovedNew),
        (&roster.removed_dormant, RosterStatus::RemovedDormant),
    ];
    let mut rows: Vec<(&PlayerRecord, RosterStatus)> = Vec::new();
    for (players, status) in groups {
        rows.extend(players.iter().map(|p| (p, status)));
    }
    rows.sort_by_key(|(p, _)| p.id);
    for (player, status) in rows {
        let matches = last_season_appearances.get(&player.id).copied().unwrap_or(0);
        w.write_record([
            player.id.to_string(),
            player.first_name.clone(),
            player.surname.clone(),
            player.position.to_string(),
            player.team.clone(),
            format!("{:.1}", player.cost),
            status.label().to_string(),
            matches.to_string(),
        ])
        .map_err(csv_io_error)?;
    }
    w.flush().map_err(|e| IngestError::Io { path: "<roster>".into(), source: e })?;
    Ok(())
}

/// Reads a roster artifact written by [`write_roster_csv`].
pub fn read_roster_csv(path: &Path) -> Result<Vec<RosterEntry>, IngestError> {
    let data = read_file(path)?;
    let mut reader = csv_reader(&data, b',');
    let mut entries = Vec::new();
    let mut line = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Parse { line: line + 1, msg: e.to_string() })?;
        line += 1;
        if line == 1 {
            continue;
        }
        if record.len() != 8 {
            return Err(IngestError::Parse {
                line,
                msg: format!("expected 8 columns, got {}", record.len()),
            });
        }
        let parse_err = |msg: String| IngestError::Parse { line, msg };
        entries.push(RosterEntry {
            player: PlayerRecord {
                id: record[0].trim().parse().map_err(|_| parse_err("bad pid".into()))?,
                first_name: record[1].to_string(),
                surname: record[2].to_string(),
                position: Position::from_str(&record[3]).map_err(parse_err)?,
                team: record[4].to_string(),
                cost: record[5].trim().parse().map_err(|_| parse_err("bad cost".into()))?,
            },
            status: RosterStatus::from_str(record[6].trim()).map_err(parse_err)?,
            matches_last_season: record[7]
                .trim()
                .parse()
                .map_err(|_| parse_err("bad matches_last_season".into()))?,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn season_row(pid: u32, gw: u32, pts: i32, sum: i32) -> SeasonPointsRow {
        SeasonPointsRow {
            name: format!("Player{pid}"),
            gameweek: gw,
            pid,
            team: "AAA".into(),
            weekly_points: pts,
            running_sum: sum,
        }
    }

    #[test]
    fn load_master_scales_cost_and_fills_missing_names() {
        let f = write_temp(
            "first_name,surname,position,team,cost\n\
             Toby,Alderweireld,DEF,TOT,6500000\n\
             ,Abdi,MID,WAT,5000000\n",
        );
        let players = load_master(f.path(), b',').unwrap();
        assert_eq!(players.len(), 2);
        assert_eq!(players[0].cost, 6.5);
        assert_eq!(players[0].position, Position::Def);
        assert_eq!(players[0].id, 1);
        assert_eq!(players[1].first_name, "-");
        assert_eq!(players[1].cost, 5.0);
        assert_eq!(players[1].id, 2);
    }

    #[test]
    fn load_master_rejects_unknown_position() {
        let f = write_temp("first_name,surname,position,team,cost\nX,Y,STR,AAA,100\n");
        let err = load_master(f.path(), b',').unwrap_err();
        match err {
            IngestError::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("unknown position"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_master_rejects_wrong_column_count_and_bad_cost() {
        let f = write_temp("first_name,surname,position,team,cost\nX,Y,DEF,AAA\n");
        assert!(matches!(
            load_master(f.path(), b','),
            Err(IngestError::Parse { line: 2, .. })
        ));

        let f = write_temp("first_name,surname,position,team,cost\nX,Y,DEF,AAA,notanumber\n");
        assert!(matches!(
            load_master(f.path(), b','),
            Err(IngestError::Parse { line: 2, .. })
        ));

        // 6512345 raw is not a 0.1M multiple.
        let f = write_temp("first_name,surname,position,team,cost\nX,Y,DEF,AAA,6512345\n");
        assert!(matches!(
            load_master(f.path(), b','),
            Err(IngestError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn load_master_missing_file_names_path() {
        let err = load_master(Path::new("/no/such/master.csv"), b',').unwrap_err();
        assert!(err.to_string().contains("/no/such/master.csv"));
    }

    #[test]
    fn load_master_tab_delimiter() {
        let f = write_temp("first_name\tsurname\tposition\tteam\tcost\nA\tB\tFWD\tAAA\t4500000\n");
        let players = load_master(f.path(), b'\t').unwrap();
        assert_eq!(players[0].cost, 4.5);
    }

    #[test]
    fn load_season_accepts_consistent_running_sums() {
        // The sparse-appearance pattern with a negative week.
        let f = write_temp(
            "name,gameweek,pid,team,weekly_points,running_sum\n\
             Zverotic,12,562,FUL,1,1\n\
             Zverotic,13,562,FUL,1,2\n\
             Zverotic,19,562,FUL,-1,1\n",
        );
        let rows = load_season_points(f.path(), Season::S2014_15, b',').unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].running_sum, 1);
    }

    #[test]
    fn load_season_rejects_base_case_mismatch() {
        let f = write_temp(
            "name,gameweek,pid,team,weekly_points,running_sum\nStones,24,524,EVE,2,16\n",
        );
        let err = load_season_points(f.path(), Season::S2014_15, b',').unwrap_err();
        match err {
            IngestError::Integrity { msg } => {
                assert!(msg.contains("pid 524"), "{msg}");
                assert!(msg.contains("gameweek 24"), "{msg}");
            }
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn load_season_empty_file_is_empty_list() {
        let f = write_temp("");
        assert!(load_season_points(f.path(), Season::S2013_14, b',').unwrap().is_empty());
    }

    #[test]
    fn load_season_rejects_bad_gameweek_and_duplicates() {
        let f = write_temp("name,gameweek,pid,team,weekly_points,running_sum\nA,39,1,AAA,1,1\n");
        assert!(matches!(
            load_season_points(f.path(), Season::S2013_14, b','),
            Err(IngestError::Parse { line: 2, .. })
        ));

        let f = write_temp(
            "name,gameweek,pid,team,weekly_points,running_sum\n\
             A,5,1,AAA,1,1\n\
             A,5,1,AAA,2,3\n",
        );
        assert!(matches!(
            load_season_points(f.path(), Season::S2013_14, b','),
            Err(IngestError::Integrity { .. })
        ));
    }

    fn player(id: u32, position: Position) -> PlayerRecord {
        PlayerRecord {
            id,
            first_name: format!("F{id}"),
            surname: format!("Player{id}"),
            position,
            team: "AAA".into(),
            cost: 5.0,
        }
    }

    #[test]
    fn build_matrix_places_points_chronologically() {
        // First five gameweeks of the earliest season land in columns 0..5.
        let master = vec![player(236, Position::Fwd)];
        let pts = [3, 4, 1, 2, 0];
        let mut sum = 0;
        let s1: Vec<SeasonPointsRow> = pts
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                sum += p;
                let mut r = season_row(236, i as u32 + 1, p, sum);
                r.name = "Sturridge".into();
                r
            })
            .collect();
        let s3 = vec![{
            let mut r = season_row(236, 1, 2, 2);
            r.name = "Sturridge".into();
            r
        }];
        let (roster, matrix) = build_matrix(&master, &[s1, Vec::new(), s3]).unwrap();
        assert_eq!(roster.active.len(), 1);
        assert_eq!(&matrix.values[0][..5], &[3, 4, 1, 2, 0]);
        assert_eq!(matrix.values[0][76], 2);
        assert_eq!(matrix.values[0].iter().filter(|&&v| v != 0).count(), 5);
    }

    #[test]
    fn zero_fill_covers_absent_gameweeks() {
        // Rows only at gameweeks 12, 13, 19 of one season: the other 111
        // positions stay zero.
        let rows = [season_row(7, 12, 1, 1), season_row(7, 13, 1, 2), season_row(7, 19, -1, 1)];
        let refs: Vec<&SeasonPointsRow> = rows.iter().collect();
        let row = zero_filled_row([&refs, &[], &[]]);
        assert_eq!(row.len(), SERIES_LEN);
        assert_eq!(row[11], 1);
        assert_eq!(row[12], 1);
        assert_eq!(row[18], -1);
        assert_eq!(row.iter().filter(|&&v| v == 0).count(), 111);
    }

    #[test]
    fn build_matrix_classifies_new_and_dormant() {
        let master = vec![
            player(1, Position::Glk), // active
            player(2, Position::Def), // absent from season 1 -> new
            player(3, Position::Mid), // absent from season 3 -> dormant
        ];
        let s1 = vec![season_row(1, 1, 2, 2), season_row(3, 1, 5, 5)];
        let s2 = Vec::new();
        let s3 = vec![season_row(1, 1, 1, 1), season_row(2, 1, 4, 4)];
        let (roster, matrix) = build_matrix(&master, &[s1, s2, s3]).unwrap();
        assert_eq!(roster.active.len(), 1);
        assert_eq!(roster.removed_new.len(), 1);
        assert_eq!(roster.removed_new[0].id, 2);
        assert_eq!(roster.removed_dormant.len(), 1);
        assert_eq!(roster.removed_dormant[0].id, 3);
        assert_eq!(matrix.players.len(), 1);
        // Partition property.
        assert_eq!(
            roster.active.len() + roster.removed_new.len() + roster.removed_dormant.len(),
            master.len()
        );
    }

    #[test]
    fn build_matrix_rejects_conflicting_names_for_one_pid() {
        let master = vec![player(1, Position::Glk)];
        let mut r1 = season_row(1, 1, 2, 2);
        r1.name = "Smith".into();
        let mut r3 = season_row(1, 1, 1, 1);
        r3.name = "Jones".into();
        let err = build_matrix(&master, &[vec![r1], Vec::new(), vec![r3]]).unwrap_err();
        assert!(matches!(err, IngestError::Integrity { .. }));
    }

    #[test]
    fn build_matrix_row_sums_match_final_running_sums() {
        let master = vec![player(9, Position::Mid)];
        let mk = |pts: &[i32]| -> Vec<SeasonPointsRow> {
            let mut sum = 0;
            pts.iter()
                .enumerate()
                .map(|(i, &p)| {
                    sum += p;
                    season_row(9, i as u32 + 1, p, sum)
                })
                .collect()
        };
        let seasons = [mk(&[1, 2, 3]), mk(&[5, -1]), mk(&[2, 2, 2, 2])];
        let finals: Vec<i32> = seasons
            .iter()
            .map(|s| s.last().map(|r| r.running_sum).unwrap_or(0))
            .collect();
        let (_, matrix) = build_matrix(&master, &seasons).unwrap();
        for (k, expected) in finals.iter().enumerate() {
            let got: i32 = matrix.values[0][38 * k..38 * (k + 1)].iter().sum();
            assert_eq!(got, *expected, "season {k}");
        }
    }

    #[test]
    fn build_matrix_idempotent_on_output_equivalent_inputs() {
        let master = vec![player(1, Position::Def), player(2, Position::Fwd)];
        let mk = |pid: u32, pts: &[i32]| -> Vec<SeasonPointsRow> {
            let mut sum = 0;
            pts.iter()
                .enumerate()
                .map(|(i, &p)| {
                    sum += p;
                    season_row(pid, i as u32 + 1, p, sum)
                })
                .collect()
        };
        let seasons = [
            [mk(1, &[1, 0, 4]), mk(2, &[2])].concat(),
            [mk(1, &[2]), mk(2, &[3, 3])].concat(),
            [mk(1, &[5]), mk(2, &[1, 1, 1])].concat(),
        ];
        let (_, first) = build_matrix(&master, &seasons).unwrap();

        // Regenerate season rows from the matrix itself (every gameweek
        // present, zero weeks included) and rebuild.
        let mut regenerated: [Vec<SeasonPointsRow>; 3] = Default::default();
        for (idx, p) in first.players.iter().enumerate() {
            for k in 0..N_SEASONS {
                let mut sum = 0;
                for gw in 0..SEASON_LEN {
                    let pts = first.values[idx][38 * k + gw];
                    sum += pts;
                    regenerated[k].push(season_row(p.id, gw as u32 + 1, pts, sum));
                }
            }
        }
        let (_, second) = build_matrix(&master, &regenerated).unwrap();
        assert_eq!(first.values, second.values);
        assert_eq!(first.players, second.players);
    }

    #[test]
    fn matrix_csv_round_trip() {
        let master = vec![player(1, Position::Def)];
        let s = vec![season_row(1, 2, 7, 7)];
        let (roster, matrix) = build_matrix(&master, &[s.clone(), Vec::new(), s]).unwrap();

        let mut matrix_bytes = Vec::new();
        write_matrix_csv(&mut matrix_bytes, &matrix).unwrap();
        let mut roster_bytes = Vec::new();
        write_roster_csv(&mut roster_bytes, &roster, &BTreeMap::new()).unwrap();

        let mf = write_temp(std::str::from_utf8(&matrix_bytes).unwrap());
        let rf = write_temp(std::str::from_utf8(&roster_bytes).unwrap());
        let entries = read_roster_csv(rf.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].status, RosterStatus::Active);
        let back = read_matrix_csv(mf.path(), &entries).unwrap();
        assert_eq!(back.values, matrix.values);
    }
}
