//! Exact 15-player squad selection under the budget and positional rules,
//! plus the derived value metrics (points per match, cost per point, and
//! their normalised blend).
//!
//! The optimiser is a dynamic program over exact position counts and the
//! budget in 0.1M ticks. Candidates are sorted by pid and swept from the
//! highest pid down so that reconstruction can walk forward taking the
//! smallest pids first; that yields the documented tie-breaks exactly:
//! maximum points, then minimum total cost, then the lexicographically
//! smallest pid set.

use std::collections::BTreeMap;
use std::fmt;

use crate::ingest::Position;
use crate::stats::minmax_scale;

/// Hard cap for the enumeration oracle.
const BRUTE_FORCE_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum SquadError {
    NonGranularCost { pid: u32, cost: f64 },
    NotEnoughPlayers { position: Position, have: usize, need: usize },
    BudgetTooSmall { budget: f64, min_cost: f64 },
    Infeasible,
    TooLarge { n: usize, max: usize },
}

impl fmt::Display for SquadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SquadError::NonGranularCost { pid, cost } => {
                write!(f, "candidate {pid} has cost {cost} that is not a 0.1M multiple")
            }
            SquadError::NotEnoughPlayers { position, have, need } => {
                write!(f, "infeasible: only {have} {position} candidates for {need} slots")
            }
            SquadError::BudgetTooSmall { budget, min_cost } => {
                write!(
                    f,
                    "infeasible: cheapest legal squad costs {min_cost:.1} above budget {budget:.1}"
                )
            }
            SquadError::Infeasible => write!(f, "infeasible: no squad satisfies the constraints"),
            SquadError::TooLarge { n, max } => {
                write!(f, "brute force refused: {n} candidates exceed the cap of {max}")
            }
        }
    }
}

impl std::error::Error for SquadError {}

/// One selectable player: forecast season points, cost, position.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub pid: u32,
    pub points: f64,
    pub cost: f64,
    pub position: Position,
}

#[derive(Debug, Clone)]
pub struct SquadConstraints {
    pub budget: f64,
    pub need_glk: usize,
    pub need_def: usize,
    pub need_mid: usize,
    pub need_fwd: usize,
}

impl Default for SquadConstraints {
    fn default() -> Self {
        SquadConstraints { budget: 100.0, need_glk: 2, need_def: 5, need_mid: 5, need_fwd: 3 }
    }
}

impl SquadConstraints {
    pub fn with_budget(budget: f64) -> Self {
        SquadConstraints { budget, ..SquadConstraints::default() }
    }

    fn need(&self, position: Position) -> usize {
        match position {
            Position::Glk => self.need_glk,
            Position::Def => self.need_def,
            Position::Mid => self.need_mid,
            Position::Fwd => self.need_fwd,
        }
    }

    fn total_slots(&self) -> usize {
        self.need_glk + self.need_def + self.need_mid + self.need_fwd
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquadSolution {
    /// Chosen pids, ascending.
    pub selected: Vec<u32>,
    /// Selection indicator aligned with the candidate order passed in.
    pub y: Vec<bool>,
    pub total_points: f64,
    pub total_cost: f64,
}

fn cost_ticks(c: &Candidate) -> Result<usize, SquadError> {
    let scaled = c.cost * 10.0;
    if c.cost < 0.0 || (scaled - scaled.round()).abs() > 1e-9 {
        return Err(SquadError::NonGranularCost { pid: c.pid, cost: c.cost });
    }
    Ok(scaled.round() as usize)
}

/// Cheapest-per-position feasibility probe, for a better diagnostic than a
/// bare "infeasible".
fn check_feasible(candidates: &[Candidate], constraints: &SquadConstraints) -> Result<(), SquadError> {
    let mut min_total = 0usize;
    for position in Position::ALL {
        let need = constraints.need(position);
        let mut costs: Vec<usize> = candidates
            .iter()
            .filter(|c| c.position == position)
            .map(cost_ticks)
            .collect::<Result<_, _>>()?;
        if costs.len() < need {
            return Err(SquadError::NotEnoughPlayers { position, have: costs.len(), need });
        }
        costs.sort_unstable();
        min_total += costs[..need].iter().sum::<usize>();
    }
    let budget_ticks = (constraints.budget * 10.0 + 1e-9).floor().max(0.0) as usize;
    if min_total > budget_ticks {
        return Err(SquadError::BudgetTooSmall {
            budget: constraints.budget,
            min_cost: min_total as f64 / 10.0,
        });
    }
    Ok(())
}

/// Dense index over (remaining slots per position, remaining exact spend).
#[derive(Clone, Copy)]
struct StateSpace {
    dims: [usize; 4],
    ticks: usize,
}

impl StateSpace {
    fn len(&self) -> usize {
        self.dims.iter().product::<usize>() * (self.ticks + 1)
    }

    #[inline]
    fn index(&self, counts: [usize; 4], b: usize) -> usize {
        (((counts[0] * self.dims[1] + counts[1]) * self.dims[2] + counts[2]) * self.dims[3]
            + counts[3])
            * (self.ticks + 1)
            + b
    }
}

fn position_index(p: Position) -> usize {
    match p {
        Position::Glk => 0,
        Position::Def => 1,
        Position::Mid => 2,
        Position::Fwd => 3,
    }
}

/// Exact optimum by dynamic programming; state space is roughly
/// 3 x 6 x 6 x 4 x 1001 at the default constraints, swept once per
/// candidate with one choice bit retained per (candidate, state).
pub fn solve_exact(
    candidates: &[Candidate],
    constraints: &SquadConstraints,
) -> Result<SquadSolution, SquadError> {
    check_feasible(candidates, constraints)?;

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| candidates[i].pid);
    let items: Vec<(usize, usize, usize, f64)> = order
        .iter()
        .map(|&i| {
            let c = &candidates[i];
            Ok((i, position_index(c.position), cost_ticks(c)?, c.points))
        })
        .collect::<Result<_, SquadError>>()?;

    let needs = [
        constraints.need_glk,
        constraints.need_def,
        constraints.need_mid,
        constraints.need_fwd,
    ];
    // No legal squad spends more than the costliest per-position picks, so a
    // slack budget does not inflate the state space.
    let max_spend: usize = (0..4)
        .map(|p| {
            let mut costs: Vec<usize> =
                items.iter().filter(|it| it.1 == p).map(|it| it.2).collect();
            costs.sort_unstable_by(|a, b| b.cmp(a));
            costs[..needs[p]].iter().sum::<usize>()
        })
        .sum();
    let budget_ticks = (constraints.budget * 10.0 + 1e-9).floor().max(0.0) as usize;
    let space = StateSpace {
        dims: [needs[0] + 1, needs[1] + 1, needs[2] + 1, needs[3] + 1],
        ticks: budget_ticks.min(max_spend),
    };

    let n_states = space.len();
    let mut next = vec![f64::NEG_INFINITY; n_states];
    next[space.index([0, 0, 0, 0], 0)] = 0.0;
    let mut current = vec![f64::NEG_INFINITY; n_states];

    let words_per_item = n_states.div_ceil(64);
    let mut take_bits = vec![0u64; items.len() * words_per_item];

    // Suffix sweep: after processing item k (highest pid first), `next`
    // holds the best completion using only items k.. for every state.
    for (k, &(_, pos, ticks, points)) in items.iter().enumerate().rev() {
        let bits = &mut take_bits[k * words_per_item..(k + 1) * words_per_item];
        for g in 0..space.dims[0] {
            for d in 0..space.dims[1] {
                for m in 0..space.dims[2] {
                    for f in 0..space.dims[3] {
                        let counts = [g, d, m, f];
                        let base = space.index(counts, 0);
                        let reduced_base = if counts[pos] > 0 {
                            let mut r = counts;
                            r[pos] -= 1;
                            Some(space.index(r, 0))
                        } else {
                            None
                        };
                        for b in 0..=space.ticks {
                            let skip = next[base + b];
                            let take = match reduced_base {
                                Some(rb) if b >= ticks => next[rb + b - ticks] + points,
                                _ => f64::NEG_INFINITY,
                            };
                            if take > f64::NEG_INFINITY && take >= skip {
                                current[base + b] = take;
                                let s = base + b;
                                bits[s / 64] |= 1u64 << (s % 64);
                            } else {
                                current[base + b] = skip;
                            }
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut next, &mut current);
    }

    // Best final cell: maximum points, then the smallest exact spend.
    let full = space.index(needs, 0);
    let mut best_b = None;
    let mut best_points = f64::NEG_INFINITY;
    for b in 0..=space.ticks {
        let v = next[full + b];
        if v > best_points {
            best_points = v;
            best_b = Some(b);
        }
    }
    let Some(mut b) = best_b else {
        return Err(SquadError::Infeasible);
    };
    let total_cost = b as f64 / 10.0;

    // Forward walk taking the earliest pid whenever taking still reaches the
    // optimum: the lexicographically smallest optimal set.
    let mut counts = needs;
    let mut y = vec![false; candidates.len()];
    let mut selected = Vec::with_capacity(constraints.total_slots());
    for (k, &(original_idx, pos, ticks, _)) in items.iter().enumerate() {
        let s = space.index(counts, b);
        let bit = take_bits[k * words_per_item + s / 64] >> (s % 64) & 1;
        if bit == 1 {
            y[original_idx] = true;
            selected.push(candidates[original_idx].pid);
            counts[pos] -= 1;
            b -= ticks;
        }
    }
    debug_assert_eq!(counts, [0, 0, 0, 0]);
    debug_assert_eq!(b, 0);

    Ok(SquadSolution { selected, y, total_points: best_points, total_cost })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(combo.clone());
        // Advance the rightmost index that still has room.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Exhaustive oracle: enumerates every position-exact combination, filters
/// by budget, and applies the same tie-breaks as [`solve_exact`].
pub fn solve_brute_force(
    candidates: &[Candidate],
    constraints: &SquadConstraints,
) -> Result<SquadSolution, SquadError> {
    if candidates.len() > BRUTE_FORCE_MAX {
        return Err(SquadError::TooLarge { n: candidates.len(), max: BRUTE_FORCE_MAX });
    }
    check_feasible(candidates, constraints)?;

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| candidates[i].pid);
    let ticks: Vec<usize> =
        order.iter().map(|&i| cost_ticks(&candidates[i])).collect::<Result<_, _>>()?;
    let budget_ticks = (constraints.budget * 10.0 + 1e-9).floor().max(0.0) as usize;

    let mut per_position: [Vec<usize>; 4] = Default::default();
    for (sorted_idx, &orig) in order.iter().enumerate() {
        per_position[position_index(candidates[orig].position)].push(sorted_idx);
    }
    let needs = [
        constraints.need_glk,
        constraints.need_def,
        constraints.need_mid,
        constraints.need_fwd,
    ];
    let position_choices: Vec<Vec<Vec<usize>>> = (0..4)
        .map(|p| {
            combinations(per_position[p].len(), needs[p])
                .into_iter()
                .map(|combo| combo.into_iter().map(|j| per_position[p][j]).collect())
                .collect()
        })
        .collect();

    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for glk in &position_choices[0] {
        for def in &position_choices[1] {
            for mid in &position_choices[2] {
                for fwd in &position_choices[3] {
                    let mut chosen: Vec<usize> =
                        [glk.as_slice(), def, mid, fwd].concat();
                    chosen.sort_unstable();
                    let cost: usize = chosen.iter().map(|&i| ticks[i]).sum();
                    if cost > budget_ticks {
                        continue;
                    }
                    // Right-associated sum in ascending pid order, matching
                    // the DP's accumulation exactly.
                    let points = chosen
                        .iter()
                        .rev()
                        .fold(0.0, |acc, &i| candidates[order[i]].points + acc);
                    let better = match &best {
                        None => true,
                        Some((bp, bc, bsel)) => {
                            points > *bp
                                || (points == *bp && cost < *bc)
                                || (points == *bp && cost == *bc && chosen < *bsel)
                        }
                    };
                    if better {
                        best = Some((points, cost, chosen));
                    }
                }
            }
        }
    }

    let Some((points, cost, chosen)) = best else {
        return Err(SquadError::Infeasible);
    };
    let mut y = vec![false; candidates.len()];
    let mut selected = Vec::with_capacity(chosen.len());
    for &sorted_idx in &chosen {
        let orig = order[sorted_idx];
        y[orig] = true;
        selected.push(candidates[orig].pid);
    }
    Ok(SquadSolution { selected, y, total_points: points, total_cost: cost as f64 / 10.0 })
}

// ---------------------------------------------------------------------------
// Value metrics
// ---------------------------------------------------------------------------

/// Per-player report row; absent metrics stay absent rather than erroring.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub pid: u32,
    pub points: f64,
    pub matches: u32,
    pub ppm: Option<f64>,
    pub cpp: Option<f64>,
    pub cpi: Option<f64>,
}

/// Points per match and cost per point; the blended index is filled in later
/// by [`cpi_scores`] because it needs the whole eligible set.
pub fn compute_metrics(pid: u32, points: f64, matches: u32, cost: f64) -> MetricRow {
    let ppm = (matches > 0).then(|| points / matches as f64);
    let cpp = (points > 0.0).then(|| cost / points);
    MetricRow { pid, points, matches, ppm, cpp, cpi: None }
}

/// Fills the cost-point index over the eligible rows (more than 20 matches):
/// `0.5 * minmax(ppm) + 0.5 * (1 - minmax(cpp))`. An all-equal component
/// degenerates to 0.5, like the underlying scaler.
///
/// Scores are relative to the eligible cohort passed in: the same row can
/// score differently inside a different set, because the min-max basis is
/// the cohort itself.
pub fn cpi_scores(rows: &mut [MetricRow]) {
    let eligible: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.matches > 20 && r.ppm.is_some() && r.cpp.is_some())
        .map(|(i, _)| i)
        .collect();
    if eligible.is_empty() {
        return;
    }
    let ppms: Vec<f64> = eligible.iter().map(|&i| rows[i].ppm.unwrap()).collect();
    let cpps: Vec<f64> = eligible.iter().map(|&i| rows[i].cpp.unwrap()).collect();
    let (ppm_scaled, _) = minmax_scale(&ppms);
    let (cpp_scaled, _) = minmax_scale(&cpps);
    for (slot, &i) in eligible.iter().enumerate() {
        rows[i].cpi = Some(0.5 * ppm_scaled[slot] + 0.5 * (1.0 - cpp_scaled[slot]));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub position: Position,
    pub pid: u32,
    pub cpi: f64,
    pub cpp: Option<f64>,
}

/// Per-position top-k listing by descending index, ties by lower cost per
/// point then pid. Rows without an index never appear.
pub fn rank_report(
    rows: &[MetricRow],
    position_of: &BTreeMap<u32, Position>,
    top_k: usize,
) -> Vec<RankEntry> {
    let mut out = Vec::new();
    for position in Position::ALL {
        let mut entries: Vec<RankEntry> = rows
            .iter()
            .filter(|r| position_of.get(&r.pid) == Some(&position))
            .filter_map(|r| {
                r.cpi.map(|cpi| RankEntry { position, pid: r.pid, cpi, cpp: r.cpp })
            })
            .collect();
        entries.sort_by(|a, b| {
            b.cpi
                .partial_cmp(&a.cpi)
                .unwrap()
                .then(
                    a.cpp
                        .unwrap_or(f64::INFINITY)
                        .partial_cmp(&b.cpp.unwrap_or(f64::INFINITY))
                        .unwrap(),
                )
                .then(a.pid.cmp(&b.pid))
        });
        entries.truncate(top_k);
        out.extend(entries);
    }
    out
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

/// Squad rows plus the two-line summary block.
pub struct SquadCsvRow {
    pub pid: u32,
    pub first_name: String,
    pub surname: String,
    pub team: String,
    pub position: Position,
    pub cost: f64,
    pub predicted_points: f64,
}

/// Writes `pid,first_name,surname,team,position,cost,predicted_points` rows
/// followed by a `total_points,total_cost` summary pair.
pub fn write_squad_csv<W: std::io::Write>(
    writer: W,
    rows: &[SquadCsvRow],
    total_points: f64,
    total_cost: f64,
) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record([
        "pid", "first_name", "surname", "team", "position", "cost", "predicted_points",
    ])?;
    for r in rows {
        w.write_record([
            r.pid.to_string(),
            r.first_name.clone(),
            r.surname.clone(),
            r.team.clone(),
            r.position.to_string(),
            format!("{:.1}", r.cost),
            format!("{:.3}", r.predicted_points),
        ])?;
    }
    w.write_record(["total_points", "total_cost"])?;
    w.write_record([format!("{total_points:.3}"), format!("{total_cost:.1}")])?;
    w.flush()?;
    Ok(())
}

/// Writes `pid,points,matches,ppm,cpp,cpi`; absent metrics are empty fields.
pub fn write_metrics_csv<W: std::io::Write>(
    writer: W,
    rows: &[MetricRow],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["pid", "points", "matches", "ppm", "cpp", "cpi"])?;
    let fmt3 = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.pid.to_string(),
            format!("{:.3}", r.points),
            r.matches.to_string(),
            fmt3(r.ppm),
            fmt3(r.cpp),
            fmt3(r.cpi),
        ])?;
    }
    w.flush()?;
    Ok(())
}
