//! Sequential per-window branch-and-price with the rest of the month frozen.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnp::{solve_bnp, BnpParams, BnpSetup};
use crate::error::{Error, Result};
use crate::master::Column;
use crate::model::{check_roster, roster_objective, Instance, ObjectiveBreakdown, PairingId, PilotId, Roster, Schedule};
use crate::network::{build_all_networks, compute_windows, FreezeMask, WindowMode, WindowSpec};

pub const DEFAULT_WINDOW_LEN: u32 = 10;
pub const DEFAULT_OVERLAP: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowingParams {
    pub window_len: u32,
    pub overlap: u32,
    pub mode: WindowMode,
    pub bnp: BnpParams,
}

impl WindowingParams {
    pub fn new(mode: WindowMode) -> Self {
        Self { window_len: DEFAULT_WINDOW_LEN, overlap: DEFAULT_OVERLAP, mode, bnp: BnpParams::alg_basic() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub window: WindowSpec,
    pub imposed: usize,
    pub window_objective: f64,
    pub kept_incumbent: bool,
    pub branch_steps: usize,
    pub cg_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub roster: Roster,
    pub objective: ObjectiveBreakdown,
    pub windows: Vec<WindowRecord>,
    pub log: Vec<String>,
}

/// Freeze mask of window `index`. Pairings the incumbent assigned before
/// the window stay with their pilot; under win_ml the initial roster's
/// pairings after the window stay too, and pairings the initial roster gave
/// to a pilot but an earlier window took away are forbidden for that pilot.
pub fn freeze_mask_for(
    instance: &Instance,
    windows: &[WindowSpec],
    index: usize,
    incumbent: &Roster,
    initial: Option<&Roster>,
    mode: WindowMode,
) -> FreezeMask {
    let window = windows[index];
    let mut mask = FreezeMask::open(mode, window);
    let departure = |w: PairingId| instance.pairing(w).map(|p| p.departure_day()).unwrap_or(0);
    let current = incumbent.assignment();
    for (&w, &k) in &current {
        if departure(w) < window.first_day {
            mask.imposed.insert((k, w));
        }
    }
    if mode == WindowMode::WinMl {
        if let Some(initial) = initial {
            let previous_last = index.checked_sub(1).map(|i| windows[i].last_day).unwrap_or(0);
            for (w, k) in initial.assignment() {
                let d = departure(w);
                if d > window.last_day {
                    mask.imposed.insert((k, w));
                } else if d <= previous_last && current.get(&w) != Some(&k) {
                    mask.forbidden.insert((k, w));
                }
            }
        }
    }
    mask
}

fn empty_roster(instance: &Instance) -> Roster {
    Roster::from_schedules(instance, instance.pilots.iter().map(|k| Schedule::empty(k.id)).collect())
}

pub fn solve_windowed(instance: &Instance, params: &WindowingParams, initial: Option<&Roster>) -> Result<WindowOutcome> {
    params.bnp.validate()?;
    let windows = compute_windows(instance.horizon_days, params.window_len, params.overlap)?;
    let mut incumbent = match (params.mode, initial) {
        (WindowMode::WinMl, None) => {
            return Err(Error::Parameter("win_ml needs an initial roster".into()));
        }
        (_, Some(r)) => {
            let report = check_roster(instance, r);
            if !report.is_feasible() {
                return Err(Error::InfeasibleRoster(report.to_string()));
            }
            r.clone()
        }
        (WindowMode::WinBasic, None) => empty_roster(instance),
    };
    let initial = if params.mode == WindowMode::WinMl { initial } else { None };
    let mut incumbent_value = roster_objective(instance, &incumbent)?.objective;
    let base = build_all_networks(instance)?;
    let mut records = Vec::new();
    let mut log = Vec::new();

    for (i, window) in windows.iter().enumerate() {
        let started = Instant::now();
        let mask = freeze_mask_for(instance, &windows, i, &incumbent, initial, params.mode);
        let mut networks = Vec::with_capacity(instance.pilots.len());
        let mut static_penalty = Vec::with_capacity(instance.pilots.len());
        let mut restrictions = Vec::with_capacity(instance.pilots.len());
        for (k, net) in instance.pilots.iter().zip(&base) {
            let r = mask.restriction_for(instance, k.id)?;
            static_penalty.push(instance.rules.missed_day_off_penalty * r.imposed.len() as f64);
            networks.push(match net.restrict(instance, &r) {
                Ok(n) => Some(n),
                Err(Error::FreezeConflict(e)) => {
                    log::warn!("window {}: pilot {} has no feasible path: {e}", i + 1, k.id);
                    None
                }
                Err(e) => return Err(e),
            });
            restrictions.push(r);
        }
        let use_warm = params.mode == WindowMode::WinMl || i > 0;
        let mut warm_columns = Vec::new();
        if use_warm {
            for s in incumbent.schedules.iter().filter(|s| !s.is_empty()) {
                let Some(k) = instance.pilot_idx(s.pilot) else { continue };
                let r = &restrictions[k];
                let pairings: BTreeSet<PairingId> = s.pairings().collect();
                if pairings.iter().any(|w| r.removed.contains(w)) || !r.imposed.is_subset(&pairings) {
                    continue;
                }
                warm_columns.push(Column::from_schedule(instance, s)?);
            }
        }
        let setup = BnpSetup { networks, warm_columns, static_penalty };
        let out = solve_bnp(instance, &setup, &params.bnp)?;
        let value = out.objective.objective;
        let kept = value < incumbent_value - 1e-9;
        if !kept {
            incumbent = out.roster;
            incumbent_value = value;
        }
        let rec = WindowRecord {
            window: *window,
            imposed: mask.imposed.len(),
            window_objective: value,
            kept_incumbent: kept,
            branch_steps: out.branch_steps,
            cg_iterations: out.cg_iterations,
            seconds: started.elapsed().as_secs_f64(),
        };
        let line = format!(
            "window {} days {}-{} imposed={} forbidden={} objective={:.6} kept_incumbent={} branches={} cg_iters={} secs={:.3}",
            i + 1,
            window.first_day,
            window.last_day,
            rec.imposed,
            mask.forbidden.len(),
            value,
            kept,
            rec.branch_steps,
            rec.cg_iterations,
            rec.seconds
        );
        log::info!("{line}");
        log.push(line);
        records.push(rec);
    }
    let objective = roster_objective(instance, &incumbent)?;
    Ok(WindowOutcome { roster: incumbent, objective, windows: records, log })
}

/// Pairings imposed by a mask, grouped by pilot.
pub fn imposed_by_pilot(mask: &FreezeMask) -> BTreeMap<PilotId, BTreeSet<PairingId>> {
    let mut out: BTreeMap<PilotId, BTreeSet<PairingId>> = BTreeMap::new();
    for &(k, w) in &mask.imposed {
        out.entry(k).or_default().insert(w);
    }
    out
}
