//! Restricted master problem over a pool of pilot schedules, with slack
//! variables for uncovered pairings and missed preassigned days off.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lp::{self, LpColumn, LpProblem};
use crate::model::{
    check_schedule, schedule_satisfaction, Activity, Instance, PairingId, PilotId, Roster, Schedule,
};
use crate::network::{ArcKind, SubproblemNetwork};
use crate::rcspp::enumerate_feasible_paths;

/// Dual values of the covering, preassignment and one-schedule-per-pilot rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Duals {
    /// Indexed like `Instance::pairings`.
    pub alpha: Vec<f64>,
    pub beta: BTreeMap<(PilotId, u32), f64>,
    /// Indexed like `Instance::pilots`.
    pub gamma: Vec<f64>,
}

impl Duals {
    pub fn zero(instance: &Instance) -> Self {
        Self {
            alpha: vec![0.0; instance.pairings.len()],
            beta: instance
                .pilots
                .iter()
                .flat_map(|k| k.preassigned_days_off.iter().map(move |&q| ((k.id, q), 0.0)))
                .collect(),
            gamma: vec![0.0; instance.pilots.len()],
        }
    }
}

/// A feasible full-month schedule for one pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub pilot: PilotId,
    pub pilot_index: usize,
    pub schedule: Schedule,
    pub cost: f64,
    /// Instance indices of the covered pairings, ascending.
    pub pairings: Vec<usize>,
    /// Preassigned days off granted, ascending.
    pub preassigned: Vec<u32>,
    /// Back-to-back pairing pairs with no day off in between.
    pub successions: Vec<(PairingId, PairingId)>,
}

impl Column {
    pub fn from_path(instance: &Instance, net: &SubproblemNetwork, path: &[usize]) -> Self {
        let pilot_index = instance.pilot_idx(net.pilot).expect("network pilot in instance");
        let pilot = &instance.pilots[pilot_index];
        let mut pairings = Vec::new();
        let mut successions = Vec::new();
        let mut last_pairing = None;
        let mut connected = false;
        for &a in path {
            match net.arcs[a].kind {
                ArcKind::Pairing(w) => {
                    if connected {
                        successions.push((last_pairing.expect("connection follows a pairing"), w));
                    }
                    pairings.push(net.arcs[a].pairing_index.expect("pairing arc"));
                    last_pairing = Some(w);
                    connected = false;
                }
                ArcKind::PairingConnection => connected = true,
                _ => connected = false,
            }
        }
        let schedule = net.path_to_schedule(path);
        let preassigned = granted_days(instance, pilot.id, &schedule);
        pairings.sort_unstable();
        Self {
            pilot: net.pilot,
            pilot_index,
            cost: path.iter().map(|&a| net.arcs[a].cost).sum(),
            schedule,
            pairings,
            preassigned,
            successions,
        }
    }

    /// Builds a column from an explicit schedule, rejecting infeasible ones.
    pub fn from_schedule(instance: &Instance, schedule: &Schedule) -> Result<Self> {
        let pilot_index = instance
            .pilot_idx(schedule.pilot)
            .ok_or_else(|| Error::Contract(format!("unknown pilot {}", schedule.pilot)))?;
        let pilot = &instance.pilots[pilot_index];
        let violations = check_schedule(instance, pilot, schedule, &instance.rules);
        if let Some(v) = violations.first() {
            return Err(Error::Contract(format!("schedule of {} is infeasible: {v}", pilot.id)));
        }
        let mut schedule = schedule.clone();
        schedule.sort(instance);
        let mut pairings: Vec<usize> =
            schedule.pairings().map(|w| instance.pairing_idx(w).expect("checked")).collect();
        pairings.sort_unstable();
        Ok(Self {
            pilot: pilot.id,
            pilot_index,
            cost: schedule_satisfaction(instance, pilot, &schedule)?,
            preassigned: granted_days(instance, pilot.id, &schedule),
            successions: schedule.successions(instance),
            schedule,
            pairings,
        })
    }

    pub fn reduced_cost(&self, instance: &Instance, duals: &Duals) -> f64 {
        let mut rc = self.cost - duals.gamma[self.pilot_index];
        for &w in &self.pairings {
            rc -= duals.alpha[w];
        }
        for &q in &self.preassigned {
            rc -= duals.beta.get(&(self.pilot, q)).copied().unwrap_or(0.0);
        }
        let _ = instance;
        rc
    }

    fn key(&self) -> (PilotId, Vec<usize>, Vec<u32>, u64) {
        (self.pilot, self.pairings.clone(), self.preassigned.clone(), self.cost.to_bits())
    }

    pub fn contains_pairing(&self, idx: usize) -> bool {
        self.pairings.binary_search(&idx).is_ok()
    }

    pub fn has_succession(&self, a: PairingId, b: PairingId) -> bool {
        self.successions.contains(&(a, b))
    }
}

/// Preassigned days the schedule leaves free of pairings. An empty schedule
/// stands for the static column and grants nothing.
fn granted_days(instance: &Instance, pilot: PilotId, schedule: &Schedule) -> Vec<u32> {
    if schedule.is_empty() {
        return Vec::new();
    }
    let Some(k) = instance.pilot(pilot) else { return Vec::new() };
    let working: BTreeSet<u32> = schedule
        .activities
        .iter()
        .filter(|a| matches!(a, Activity::Pairing(_)))
        .flat_map(|a| a.covered_days(instance))
        .collect();
    k.preassigned_days_off.iter().copied().filter(|q| !working.contains(q)).collect()
}

#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    uids: Vec<u64>,
    keys: HashSet<(PilotId, Vec<usize>, Vec<u32>, u64)>,
    next_uid: u64,
}

impl ColumnPool {
    /// Adds a column unless an identical (pilot, footprint, cost) one exists.
    pub fn add(&mut self, column: Column) -> bool {
        if !self.keys.insert(column.key()) {
            return false;
        }
        self.columns.push(column);
        self.uids.push(self.next_uid);
        self.next_uid += 1;
        true
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn uid(&self, i: usize) -> u64 {
        self.uids[i]
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Column) -> bool) -> usize {
        let before = self.columns.len();
        let mut cols = Vec::new();
        let mut uids = Vec::new();
        for (c, u) in std::mem::take(&mut self.columns).into_iter().zip(std::mem::take(&mut self.uids)) {
            if keep(&c) {
                cols.push(c);
                uids.push(u);
            } else {
                self.keys.remove(&c.key());
            }
        }
        self.columns = cols;
        self.uids = uids;
        before - self.columns.len()
    }

    fn remove_at(&mut self, i: usize) -> Column {
        self.uids.remove(i);
        let c = self.columns.remove(i);
        self.keys.remove(&c.key());
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum VarKey {
    PairingSlack(usize),
    DayOffSlack(usize, u32),
    Static(usize),
    Column(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Succession {
    Imposed { pilot: PilotId, a: PairingId, b: PairingId },
    Forbidden { pilot: PilotId, a: PairingId, b: PairingId },
}

/// Restricted master problem state: the pool, fixed columns and the
/// branching decisions taken so far.
#[derive(Debug, Clone)]
pub struct RmpState {
    pub pool: ColumnPool,
    pub fixed: Vec<Column>,
    pub successions: Vec<Succession>,
    /// Extra objective penalty on each pilot's static column.
    pub static_penalty: Vec<f64>,
    pairing_fixed: Vec<bool>,
    pilot_fixed: Vec<bool>,
    basis: Option<Vec<VarKey>>,
}

pub fn build_initial_rmp(instance: &Instance, warm_columns: &[Column]) -> Result<RmpState> {
    let mut state = RmpState {
        pool: ColumnPool::default(),
        fixed: Vec::new(),
        successions: Vec::new(),
        static_penalty: vec![0.0; instance.pilots.len()],
        pairing_fixed: vec![false; instance.pairings.len()],
        pilot_fixed: vec![false; instance.pilots.len()],
        basis: None,
    };
    for c in warm_columns {
        let k = &instance.pilots[c.pilot_index];
        let v = check_schedule(instance, k, &c.schedule, &instance.rules);
        if let Some(v) = v.first() {
            return Err(Error::Contract(format!("warm column for {} rejected: {v}", c.pilot)));
        }
        state.pool.add(c.clone());
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmpSolution {
    /// Objective including the fixed columns.
    pub objective: f64,
    /// Parallel to the pool's columns.
    pub column_values: Vec<f64>,
    pub pairing_slack: BTreeMap<usize, f64>,
    pub dayoff_slack: BTreeMap<(PilotId, u32), f64>,
    /// Value of each pilot's static column (zero for fixed pilots).
    pub static_values: Vec<f64>,
    pub duals: Duals,
    pub pivots: usize,
}

impl RmpSolution {
    pub fn is_integral(&self, tol: f64) -> bool {
        let frac = |v: &f64| v.min(1.0 - v) > tol;
        !self.column_values.iter().any(frac)
            && !self.static_values.iter().any(frac)
            && !self.pairing_slack.values().any(frac)
            && !self.dayoff_slack.values().any(frac)
    }
}

impl RmpState {
    pub fn is_pilot_fixed(&self, idx: usize) -> bool {
        self.pilot_fixed[idx]
    }

    pub fn is_pairing_fixed(&self, idx: usize) -> bool {
        self.pairing_fixed[idx]
    }

    pub fn fixed_objective(&self) -> f64 {
        self.fixed.iter().map(|c| c.cost).sum()
    }

    fn layout(&self, instance: &Instance) -> (Vec<usize>, Vec<(usize, u32)>, Vec<usize>) {
        let pairings: Vec<usize> =
            (0..instance.pairings.len()).filter(|&i| !self.pairing_fixed[i]).collect();
        let pilots: Vec<usize> = (0..instance.pilots.len()).filter(|&k| !self.pilot_fixed[k]).collect();
        let preassigned: Vec<(usize, u32)> = pilots
            .iter()
            .flat_map(|&k| instance.pilots[k].preassigned_days_off.iter().map(move |&q| (k, q)))
            .collect();
        (pairings, preassigned, pilots)
    }

    fn build_lp(&self, instance: &Instance) -> (LpProblem, Vec<VarKey>, Rows) {
        let (pairings, preassigned, pilots) = self.layout(instance);
        let rules = &instance.rules;
        let mut row_of_pairing = HashMap::new();
        let mut row_of_q = HashMap::new();
        let mut row_of_pilot = HashMap::new();
        for (r, &w) in pairings.iter().enumerate() {
            row_of_pairing.insert(w, r);
        }
        let off = pairings.len();
        for (r, &(k, q)) in preassigned.iter().enumerate() {
            row_of_q.insert((k, q), off + r);
        }
        let off = off + preassigned.len();
        for (r, &k) in pilots.iter().enumerate() {
            row_of_pilot.insert(k, off + r);
        }
        let m = off + pilots.len();
        let mut cols = Vec::new();
        let mut keys = Vec::new();
        for &w in &pairings {
            let n = instance.pairings[w].n_flights() as f64;
            cols.push(LpColumn { cost: -rules.unassigned_flight_penalty * n, entries: vec![(row_of_pairing[&w], 1.0)] });
            keys.push(VarKey::PairingSlack(w));
        }
        for &(k, q) in &preassigned {
            cols.push(LpColumn { cost: -rules.missed_day_off_penalty, entries: vec![(row_of_q[&(k, q)], 1.0)] });
            keys.push(VarKey::DayOffSlack(k, q));
        }
        for &k in &pilots {
            cols.push(LpColumn { cost: -self.static_penalty[k], entries: vec![(row_of_pilot[&k], 1.0)] });
            keys.push(VarKey::Static(k));
        }
        for (i, c) in self.pool.columns().iter().enumerate() {
            let Some(&pr) = row_of_pilot.get(&c.pilot_index) else { continue };
            let mut entries = Vec::with_capacity(c.pairings.len() + c.preassigned.len() + 1);
            for &w in &c.pairings {
                entries.push((row_of_pairing[&w], 1.0));
            }
            for &q in &c.preassigned {
                entries.push((row_of_q[&(c.pilot_index, q)], 1.0));
            }
            entries.push((pr, 1.0));
            cols.push(LpColumn { cost: c.cost, entries });
            keys.push(VarKey::Column(self.pool.uid(i)));
        }
        let rows = Rows { pairings, preassigned, pilots };
        (LpProblem { rhs: vec![1.0; m], columns: cols }, keys, rows)
    }

    /// Column fixing: pins the pool column to 1 and drops every pool column of
    /// the same pilot or sharing a pairing.
    pub fn fix_column(&mut self, column_index: usize) -> Result<Column> {
        if column_index >= self.pool.len() {
            return Err(Error::Decision(format!("no column {column_index} in the pool")));
        }
        let c = self.pool.columns()[column_index].clone();
        if self.pilot_fixed[c.pilot_index] || c.pairings.iter().any(|&w| self.pairing_fixed[w]) {
            return Err(Error::Decision(format!("column for {} clashes with earlier fixings", c.pilot)));
        }
        let c = self.pool.remove_at(column_index);
        self.pilot_fixed[c.pilot_index] = true;
        for &w in &c.pairings {
            self.pairing_fixed[w] = true;
        }
        let covered: HashSet<usize> = c.pairings.iter().copied().collect();
        self.pool.retain(|o| o.pilot_index != c.pilot_index && !o.pairings.iter().any(|w| covered.contains(w)));
        self.fixed.push(c.clone());
        self.basis = None;
        Ok(c)
    }

    /// Intertask fixing for a pilot: imposing keeps only that pilot's
    /// columns where `a` and `b` are flown back to back or not at all, and
    /// removes both pairings from everyone else; forbidding drops the pilot's
    /// columns containing the succession.
    pub fn apply_intertask(&mut self, instance: &Instance, decision: Succession) -> Result<usize> {
        let (pilot, a, b) = match decision {
            Succession::Imposed { pilot, a, b } | Succession::Forbidden { pilot, a, b } => (pilot, a, b),
        };
        let (Some(ka), Some(ia), Some(ib)) =
            (instance.pilot_idx(pilot), instance.pairing_idx(a), instance.pairing_idx(b))
        else {
            return Err(Error::Decision("succession refers to unknown ids".into()));
        };
        if self.pilot_fixed[ka] || self.pairing_fixed[ia] || self.pairing_fixed[ib] {
            return Err(Error::Decision(format!("succession {a}->{b} touches fixed elements")));
        }
        for s in &self.successions {
            match (*s, decision) {
                (Succession::Imposed { pilot: p, a: x, b: y }, Succession::Imposed { .. }) => {
                    let shares = x == a || y == b || x == b || y == a;
                    if shares && !(p == pilot && (y == a || x == b)) {
                        return Err(Error::Decision(format!("succession {a}->{b} clashes with {x}->{y}")));
                    }
                }
                (Succession::Imposed { pilot: p, a: x, b: y }, Succession::Forbidden { .. })
                | (Succession::Forbidden { pilot: p, a: x, b: y }, Succession::Imposed { .. }) => {
                    if p == pilot && x == a && y == b {
                        return Err(Error::Decision(format!("succession {a}->{b} both imposed and forbidden")));
                    }
                }
                _ => {}
            }
        }
        let removed = match decision {
            Succession::Imposed { .. } => self.pool.retain(|c| {
                if c.pilot_index == ka {
                    let flown = c.has_succession(a, b);
                    c.contains_pairing(ia) == flown && c.contains_pairing(ib) == flown
                } else {
                    !c.contains_pairing(ia) && !c.contains_pairing(ib)
                }
            }),
            Succession::Forbidden { .. } => {
                self.pool.retain(|c| c.pilot_index != ka || !c.has_succession(a, b))
            }
        };
        self.successions.push(decision);
        Ok(removed)
    }

    /// Pairings that pricing must not offer to the given pilot, and the
    /// successions imposed on or forbidden for it.
    pub fn pricing_restriction(&self, instance: &Instance, pilot_index: usize) -> crate::network::Restriction {
        let pilot = instance.pilots[pilot_index].id;
        let mut r = crate::network::Restriction::default();
        for (i, w) in instance.pairings.iter().enumerate() {
            if self.pairing_fixed[i] {
                r.removed.insert(w.id);
            }
        }
        for s in &self.successions {
            match *s {
                Succession::Imposed { pilot: p, a, b } if p == pilot => r.imposed_successions.push((a, b)),
                Succession::Imposed { a, b, .. } => {
                    r.removed.insert(a);
                    r.removed.insert(b);
                }
                Succession::Forbidden { pilot: p, a, b } if p == pilot => r.forbidden_successions.push((a, b)),
                Succession::Forbidden { .. } => {}
            }
        }
        r
    }

    /// Writes the current LP in CPLEX LP text format.
    pub fn dump_lp(&self, instance: &Instance) -> String {
        let (lp, keys, rows) = self.build_lp(instance);
        let name = |k: &VarKey| match *k {
            VarKey::PairingSlack(w) => format!("s_{}", instance.pairings[w].id),
            VarKey::DayOffSlack(k, q) => format!("y_{}_{q}", instance.pilots[k].id),
            VarKey::Static(k) => format!("e_{}", instance.pilots[k].id),
            VarKey::Column(u) => format!("x_{u}"),
        };
        let mut s = String::from("\\ restricted master problem\nMaximize\n obj:");
        for (c, k) in lp.columns.iter().zip(&keys) {
            let _ = write!(s, " {:+} {}", c.cost, name(k));
        }
        let _ = write!(s, "\nSubject To\n");
        let mut row_terms: Vec<Vec<String>> = vec![Vec::new(); lp.rows()];
        for (c, k) in lp.columns.iter().zip(&keys) {
            for &(r, v) in &c.entries {
                row_terms[r].push(format!("{:+} {}", v, name(k)));
            }
        }
        for (r, terms) in row_terms.iter().enumerate() {
            let label = rows.label(instance, r);
            let _ = writeln!(s, " {label}: {} = {}", terms.join(" "), lp.rhs[r]);
        }
        s.push_str("Bounds\n");
        for k in &keys {
            let _ = writeln!(s, " 0 <= {} <= 1", name(k));
        }
        s.push_str("End\n");
        s
    }
}

struct Rows {
    pairings: Vec<usize>,
    preassigned: Vec<(usize, u32)>,
    pilots: Vec<usize>,
}

impl Rows {
    fn label(&self, instance: &Instance, r: usize) -> String {
        if r < self.pairings.len() {
            return format!("cover_{}", instance.pairings[self.pairings[r]].id);
        }
        let r = r - self.pairings.len();
        if r < self.preassigned.len() {
            let (k, q) = self.preassigned[r];
            return format!("off_{}_{q}", instance.pilots[k].id);
        }
        format!("one_{}", instance.pilots[self.pilots[r - self.preassigned.len()]].id)
    }
}

/// Solves the LP relaxation of the current restricted master.
pub fn solve_rmp_lp(instance: &Instance, state: &mut RmpState) -> Result<RmpSolution> {
    let (lp, keys, rows) = state.build_lp(instance);
    let n_slack = rows.pairings.len() + rows.preassigned.len() + rows.pilots.len();
    let fallback: Vec<usize> = (0..n_slack).collect();
    let warm: Option<Vec<usize>> = state.basis.as_ref().and_then(|b| {
        let pos: HashMap<VarKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        b.iter().map(|k| pos.get(k).copied()).collect()
    });
    let sol = lp::solve(&lp, warm.as_deref(), &fallback)?;
    state.basis = Some(sol.basis.iter().map(|&j| keys[j]).collect());

    let mut duals = Duals::zero(instance);
    for (r, &w) in rows.pairings.iter().enumerate() {
        duals.alpha[w] = sol.duals[r];
    }
    let off = rows.pairings.len();
    for (r, &(k, q)) in rows.preassigned.iter().enumerate() {
        duals.beta.insert((instance.pilots[k].id, q), sol.duals[off + r]);
    }
    let off = off + rows.preassigned.len();
    for (r, &k) in rows.pilots.iter().enumerate() {
        duals.gamma[k] = sol.duals[off + r];
    }

    let mut column_values = vec![0.0; state.pool.len()];
    let mut pairing_slack = BTreeMap::new();
    let mut dayoff_slack = BTreeMap::new();
    let mut static_values = vec![0.0; instance.pilots.len()];
    let uid_pos: HashMap<u64, usize> = (0..state.pool.len()).map(|i| (state.pool.uid(i), i)).collect();
    for (j, key) in keys.iter().enumerate() {
        let v = sol.x[j];
        match *key {
            VarKey::PairingSlack(w) => {
                pairing_slack.insert(w, v);
            }
            VarKey::DayOffSlack(k, q) => {
                dayoff_slack.insert((instance.pilots[k].id, q), v);
            }
            VarKey::Static(k) => static_values[k] = v,
            VarKey::Column(u) => column_values[uid_pos[&u]] = v,
        }
    }
    Ok(RmpSolution {
        objective: sol.objective + state.fixed_objective(),
        column_values,
        pairing_slack,
        dayoff_slack,
        static_values,
        duals,
        pivots: sol.pivots,
    })
}

/// Integer roster read off an integral master solution.
pub fn roster_from_solution(instance: &Instance, state: &RmpState, sol: &RmpSolution) -> Roster {
    let mut schedules: Vec<Schedule> = state.fixed.iter().map(|c| c.schedule.clone()).collect();
    for (c, &v) in state.pool.columns().iter().zip(&sol.column_values) {
        if v > 0.5 {
            schedules.push(c.schedule.clone());
        }
    }
    let have: HashSet<PilotId> = schedules.iter().map(|s| s.pilot).collect();
    for k in &instance.pilots {
        if !have.contains(&k.id) {
            schedules.push(Schedule::empty(k.id));
        }
    }
    Roster::from_schedules(instance, schedules)
}

pub const BRUTE_FORCE_MAX_PILOTS: usize = 4;
pub const BRUTE_FORCE_MAX_PAIRINGS: usize = 8;
pub const BRUTE_FORCE_MAX_HORIZON: u32 = 10;

/// Exact optimum by enumerating every feasible schedule per pilot and every
/// compatible combination. Only for tiny instances.
pub fn brute_force_solve(instance: &Instance) -> Result<(f64, Roster)> {
    if instance.pilots.len() > BRUTE_FORCE_MAX_PILOTS
        || instance.pairings.len() > BRUTE_FORCE_MAX_PAIRINGS
        || instance.horizon_days > BRUTE_FORCE_MAX_HORIZON
    {
        return Err(Error::Size(format!(
            "{} pilots, {} pairings, {} days (limits {BRUTE_FORCE_MAX_PILOTS}, {BRUTE_FORCE_MAX_PAIRINGS}, {BRUTE_FORCE_MAX_HORIZON})",
            instance.pilots.len(),
            instance.pairings.len(),
            instance.horizon_days
        )));
    }
    let rules = &instance.rules;
    // Options per pilot: (gain over the all-slack roster, pairing mask, schedule).
    let mut options: Vec<Vec<(f64, u32, Schedule)>> = Vec::new();
    for k in &instance.pilots {
        let net = crate::network::build_network(instance, k)?;
        let mut best: HashMap<u32, (f64, Schedule)> = HashMap::new();
        best.insert(0, (0.0, Schedule::empty(k.id)));
        for path in enumerate_feasible_paths(&net, usize::MAX) {
            let col = Column::from_path(instance, &net, &path);
            let mut mask = 0u32;
            let mut flights = 0usize;
            for &w in &col.pairings {
                mask |= 1 << w;
                flights += instance.pairings[w].n_flights();
            }
            let gain = col.cost
                + rules.unassigned_flight_penalty * flights as f64
                + rules.missed_day_off_penalty * col.preassigned.len() as f64;
            let entry = best.entry(mask).or_insert((f64::NEG_INFINITY, Schedule::empty(k.id)));
            if gain > entry.0 {
                *entry = (gain, col.schedule);
            }
        }
        let mut opts: Vec<(f64, u32, Schedule)> = best.into_iter().map(|(m, (g, s))| (g, m, s)).collect();
        opts.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        options.push(opts);
    }
    let suffix_bound: Vec<f64> = {
        let mut v = vec![0.0; options.len() + 1];
        for i in (0..options.len()).rev() {
            v[i] = v[i + 1] + options[i].first().map(|o| o.0).unwrap_or(0.0).max(0.0);
        }
        v
    };
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_choice = vec![0usize; options.len()];
    let mut choice = vec![0usize; options.len()];
    search(&options, &suffix_bound, 0, 0, 0.0, &mut choice, &mut best_gain, &mut best_choice);

    let schedules: Vec<Schedule> =
        best_choice.iter().enumerate().map(|(k, &o)| options[k][o].2.clone()).collect();
    let roster = Roster::from_schedules(instance, schedules);
    let value = crate::model::roster_objective(instance, &roster)?.objective;
    Ok((value, roster))
}

#[allow(clippy::too_many_arguments)]
fn search(
    options: &[Vec<(f64, u32, Schedule)>],
    bound: &[f64],
    k: usize,
    used: u32,
    gain: f64,
    choice: &mut Vec<usize>,
    best: &mut f64,
    best_choice: &mut Vec<usize>,
) {
    if k == options.len() {
        if gain > *best {
            *best = gain;
            best_choice.clone_from(choice);
        }
        return;
    }
    if gain + bound[k] <= *best {
        return;
    }
    for (i, (g, mask, _)) in options[k].iter().enumerate() {
        if mask & used != 0 {
            continue;
        }
        if gain + g + bound[k + 1] <= *best {
            // Options are sorted by gain, so nothing further can help.
            break;
        }
        choice[k] = i;
        search(options, bound, k + 1, used | mask, gain + g, choice, best, best_choice);
    }
}
