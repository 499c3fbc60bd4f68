//! Deterministic synthetic data in the ingest file formats.
//!
//! The default fixture has 584 catalogued players of whom exactly 326
//! survive the three-season presence filter (258 joined late or left early,
//! the ~44% elimination rate the pipeline is sized for). Player series mix a
//! seasonal wave with noise and sparse appearances, plus three deliberate
//! edge cases: an all-zero scorer, a perfectly constant scorer, and a player
//! with a handful of appearances.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::prelude::*;

use crate::ingest::{Position, SEASON_LEN};

#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub total: usize,
    pub active: usize,
    pub removed_new: usize,
    pub removed_dormant: usize,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        // 258 of 584 removed, matching the documented elimination rate.
        FixtureSpec { total: 584, active: 326, removed_new: 129, removed_dormant: 129, seed: 7 }
    }
}

impl FixtureSpec {
    /// A fast roster for tests: 40 players, 30 active — enough position and
    /// price slack that the default budget always fields a squad.
    pub fn small(seed: u64) -> Self {
        FixtureSpec { total: 40, active: 30, removed_new: 5, removed_dormant: 5, seed }
    }
}

/// Generated file contents, ready to write or parse directly.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub master_csv: String,
    pub season_csvs: [String; 3],
}

pub struct FixturePaths {
    pub master: PathBuf,
    pub seasons: [PathBuf; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Active,
    /// No rows in the earliest season.
    JoinedLate,
    /// Rows only in the middle season (classified with the late joiners).
    MiddleOnly,
    /// No rows in the latest season.
    LeftEarly,
}

const TEAMS: [&str; 20] = [
    "ARS", "AVL", "BOU", "BUR", "CHE", "CRY", "EVE", "HUL", "LEI", "LIV", "MCI", "MUN", "NEW",
    "NOR", "SOU", "STK", "SUN", "SWA", "TOT", "WAT",
];

struct PlayerPlan {
    pid: u32,
    blank_first_name: bool,
    position: Position,
    team: &'static str,
    cost_tenths: u32,
    status: Status,
    /// 0 = normal, 1 = all-zero scorer, 2 = constant scorer, 3 = sparse.
    special: u8,
}

fn position_counts(total: usize) -> [usize; 4] {
    let glk = (total / 10).max(3);
    let def = total * 32 / 100;
    let mid = total * 38 / 100;
    let fwd = total - glk - def - mid;
    [glk, def, mid, fwd]
}

fn cost_tenths_for(position: Position, rng: &mut StdRng) -> u32 {
    match position {
        Position::Glk => rng.gen_range(40..=55),
        Position::Def => rng.gen_range(40..=65),
        Position::Mid => rng.gen_range(45..=100),
        Position::Fwd => rng.gen_range(45..=130),
    }
}

fn plan_players(spec: &FixtureSpec) -> Vec<PlayerPlan> {
    assert_eq!(
        spec.total,
        spec.active + spec.removed_new + spec.removed_dormant,
        "fixture counts must partition the total"
    );
    assert!(spec.removed_new >= 2, "need room for the middle-only players");
    let mut rng = StdRng::seed_from_u64(spec.seed);

    let mut positions = Vec::with_capacity(spec.total);
    for (idx, count) in position_counts(spec.total).iter().enumerate() {
        positions.extend(std::iter::repeat_n(Position::ALL[idx], *count));
    }
    positions.shuffle(&mut rng);

    let mut statuses = Vec::with_capacity(spec.total);
    statuses.extend(std::iter::repeat_n(Status::Active, spec.active));
    statuses.extend(std::iter::repeat_n(Status::JoinedLate, spec.removed_new - 2));
    statuses.extend(std::iter::repeat_n(Status::MiddleOnly, 2));
    statuses.extend(std::iter::repeat_n(Status::LeftEarly, spec.removed_dormant));
    statuses.shuffle(&mut rng);

    // The active pool must be able to field a full squad. Repair by swapping
    // statuses between positions when a position is starved.
    let need = [2usize, 5, 5, 3];
    for (pos_idx, position) in Position::ALL.iter().enumerate() {
        loop {
            let have = positions
                .iter()
                .zip(&statuses)
                .filter(|(p, s)| *p == position && **s == Status::Active)
                .count();
            if have >= need[pos_idx] {
                break;
            }
            let take_from = positions
                .iter()
                .zip(statuses.iter())
                .position(|(p, s)| *p == *position && *s != Status::Active)
                .expect("not enough players of a position to field a squad");
            let give_to = positions
                .iter()
                .zip(statuses.iter())
                .position(|(p, s)| *p != *position && *s == Status::Active)
                .expect("no active player available to swap");
            statuses.swap(take_from, give_to);
        }
    }

    let mut specials_left = [1u8, 2, 3].into_iter();
    let mut plans = Vec::with_capacity(spec.total);
    for i in 0..spec.total {
        let pid = i as u32 + 1;
        let special = if statuses[i] == Status::Active {
            specials_left.next().unwrap_or(0)
        } else {
            0
        };
        plans.push(PlayerPlan {
            pid,
            blank_first_name: pid % 97 == 3,
            position: positions[i],
            team: TEAMS[i % TEAMS.len()],
            cost_tenths: cost_tenths_for(positions[i], &mut rng),
            status: statuses[i],
            special,
        });
    }
    plans
}

/// (gameweek, points) pairs for one player-season.
fn season_scores(plan: &PlayerPlan, season_idx: usize, present: bool) -> Vec<(u32, i32)> {
    match plan.special {
        1 => return (1..=SEASON_LEN as u32).map(|gw| (gw, 0)).collect(),
        2 => return (1..=SEASON_LEN as u32).map(|gw| (gw, 2)).collect(),
        3 => {
            // A benchwarmer: a few appearances, nothing else.
            return match season_idx {
                0 => vec![(12, 1), (13, 1), (19, -1)],
                1 => vec![(5, 2), (6, 0)],
                _ => vec![(30, 1)],
            };
        }
        _ => {}
    }
    if !present {
        return Vec::new();
    }

    let mut rng =
        StdRng::seed_from_u64(plan.pid as u64 ^ (season_idx as u64 + 1).wrapping_mul(0x9E37_79B9));
    let base = match plan.position {
        Position::Glk => 2.4,
        Position::Def => 2.8,
        Position::Mid => 3.2,
        Position::Fwd => 3.4,
    } + rng.gen_range(-1.2..1.6);
    let amplitude = rng.gen_range(0.0..1.5);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let p_appear = rng.gen_range(0.55..0.95);

    let mut scores = Vec::new();
    for gw in 1..=SEASON_LEN as u32 {
        if rng.gen::<f64>() > p_appear {
            continue;
        }
        let wave = amplitude * (std::f64::consts::TAU * gw as f64 / 12.0 + phase).sin();
        let noise = rng.gen_range(-1.8..1.8);
        let pts = (base + wave + noise).round() as i32;
        scores.push((gw, pts.clamp(-2, 14)));
    }
    if scores.is_empty() {
        // The presence filter needs at least one row in this season.
        scores.push((1, base.round().clamp(0.0, 14.0) as i32));
    }
    scores
}

fn seasons_present(plan: &PlayerPlan, season_idx: usize, rng: &mut StdRng) -> bool {
    match (plan.status, season_idx) {
        (Status::Active, 1) => rng.gen::<f64>() < 0.9,
        (Status::Active, _) => true,
        (Status::JoinedLate, 0) => false,
        (Status::JoinedLate, 1) => rng.gen::<f64>() < 0.5,
        (Status::JoinedLate, _) => true,
        (Status::MiddleOnly, s) => s == 1,
        (Status::LeftEarly, 0) => true,
        (Status::LeftEarly, 1) => rng.gen::<f64>() < 0.6,
        (Status::LeftEarly, _) => false,
    }
}

/// Builds the master and season files for the given spec. Same spec, same
/// bytes.
pub fn generate(spec: &FixtureSpec) -> Fixture {
    let plans = plan_players(spec);
    let mut presence_rng = StdRng::seed_from_u64(spec.seed.wrapping_add(0xA55));

    let mut master = String::from("first_name,surname,position,team,cost\n");
    for plan in &plans {
        let first = if plan.blank_first_name { "" } else { "Fn" };
        let _ = writeln!(
            master,
            "{}{},Sur{},{},{},{}",
            first,
            if plan.blank_first_name { String::new() } else { plan.pid.to_string() },
            plan.pid,
            plan.position,
            plan.team,
            plan.cost_tenths as u64 * 100_000
        );
    }

    let mut seasons: [String; 3] = [
        String::from("name,gameweek,pid,team,weekly_points,running_sum\n"),
        String::from("name,gameweek,pid,team,weekly_points,running_sum\n"),
        String::from("name,gameweek,pid,team,weekly_points,running_sum\n"),
    ];
    for plan in &plans {
        for (season_idx, out) in seasons.iter_mut().enumerate() {
            let present = seasons_present(plan, season_idx, &mut presence_rng);
            let mut running = 0i32;
            for (gw, pts) in season_scores(plan, season_idx, present) {
                running += pts;
                let _ = writeln!(
                    out,
                    "Sur{},{},{},{},{},{}",
                    plan.pid, gw, plan.pid, plan.team, pts, running
                );
            }
        }
    }

    Fixture { master_csv: master, season_csvs: seasons }
}

/// Generates and writes the fixture files under `dir`.
pub fn write_to_dir(dir: &Path, spec: &FixtureSpec) -> std::io::Result<FixturePaths> {
    std::fs::create_dir_all(dir)?;
    let fixture = generate(spec);
    let master = dir.join("master.csv");
    std::fs::write(&master, &fixture.master_csv)?;
    let names = ["season_2013_14.csv", "season_2014_15.csv", "season_2015_16.csv"];
    let mut seasons = Vec::new();
    for (name, content) in names.iter().zip(&fixture.season_csvs) {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        seasons.push(path);
    }
    Ok(FixturePaths { master, seasons: seasons.try_into().unwrap() })
}
