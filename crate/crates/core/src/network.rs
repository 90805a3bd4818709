//! Per-pilot acyclic pricing networks.
//!
//! A source-to-sink path is a full-month schedule. Midnight nodes split the
//! month into days; pairings are entered from the midnight of their start day
//! or directly from a compatible predecessor, and left towards a rest day, a
//! preferred vacation, a direct successor or the end of the month.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::master::Duals;
use crate::model::{
    Activity, Instance, Pairing, PairingId, Pilot, PilotId, RuleParams, Schedule,
    MINUTES_PER_DAY, VACATION_DAYS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Source,
    Sink,
    PairingStart(PairingId),
    PairingEnd(PairingId),
    Midnight(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub time_minute: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcKind {
    RosterStart,
    RosterEnd,
    Rest(u32),
    Vacation(u32),
    Pairing(PairingId),
    MidnightStart,
    PairingConnection,
    PostpairingRest(u32),
    PostpairingVacation(u32),
}

impl ArcKind {
    pub fn name(&self) -> &'static str {
        match self {
            ArcKind::RosterStart => "roster_start",
            ArcKind::RosterEnd => "roster_end",
            ArcKind::Rest(_) => "rest",
            ArcKind::Vacation(_) => "vacation",
            ArcKind::Pairing(_) => "pairing",
            ArcKind::MidnightStart => "midnight_start",
            ArcKind::PairingConnection => "pairing_connection",
            ArcKind::PostpairingRest(_) => "postpairing_rest",
            ArcKind::PostpairingVacation(_) => "postpairing_vacation",
        }
    }

    /// Days off granted by the arc, as a half-open day range.
    pub fn off_days(&self) -> std::ops::Range<u32> {
        match *self {
            ArcKind::Rest(d) | ArcKind::PostpairingRest(d) => d..d + 1,
            ArcKind::Vacation(o) | ArcKind::PostpairingVacation(o) => o..o + VACATION_DAYS,
            _ => 0..0,
        }
    }

    pub fn activity(&self) -> Option<Activity> {
        match *self {
            ArcKind::Rest(d) | ArcKind::PostpairingRest(d) => Some(Activity::DayOff(d)),
            ArcKind::Vacation(o) | ArcKind::PostpairingVacation(o) => Some(Activity::Vacation(o)),
            ArcKind::Pairing(w) => Some(Activity::Pairing(w)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResourceDelta {
    pub days_off: u32,
    pub flight_minutes: u32,
    /// Added to the consecutive-duty count, after an optional reset.
    pub consecutive: i32,
    pub resets_consecutive: bool,
}

/// Resource state carried along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResourceVector {
    pub time_minutes: u32,
    pub days_off_remaining: u32,
    pub flight_minutes: u32,
    pub consecutive_duties: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceLimits {
    pub days_off_required: u32,
    pub max_flight_minutes: u32,
    pub max_consecutive: u32,
}

impl ResourceLimits {
    pub fn from_rules(rules: &RuleParams) -> Self {
        Self {
            days_off_required: rules.min_days_off,
            max_flight_minutes: rules.max_flight_minutes(),
            max_consecutive: rules.max_consecutive_duties,
        }
    }

    pub fn initial(&self) -> ResourceVector {
        ResourceVector {
            time_minutes: 0,
            days_off_remaining: self.days_off_required,
            flight_minutes: 0,
            consecutive_duties: 0,
        }
    }

    /// Extends `r` along an arc ending at `head_time`; `None` if a window is
    /// violated. Lower bounds clamp instead of pruning.
    #[inline]
    pub fn extend(&self, r: &ResourceVector, d: &ResourceDelta, head_time: u32) -> Option<ResourceVector> {
        let flight = r.flight_minutes + d.flight_minutes;
        if flight > self.max_flight_minutes {
            return None;
        }
        let base = if d.resets_consecutive { 0 } else { r.consecutive_duties as i32 };
        let consec = (base + d.consecutive).max(0) as u32;
        if consec > self.max_consecutive {
            return None;
        }
        Some(ResourceVector {
            time_minutes: head_time.max(r.time_minutes),
            days_off_remaining: r.days_off_remaining.saturating_sub(d.days_off),
            flight_minutes: flight,
            consecutive_duties: consec,
        })
    }

    #[inline]
    pub fn sink_ok(&self, r: &ResourceVector) -> bool {
        r.days_off_remaining == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub kind: ArcKind,
    pub cost: f64,
    pub reduced_cost: f64,
    pub delta: ResourceDelta,
    /// Index of the pairing in the instance, for pairing arcs.
    pub pairing_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SubproblemNetwork {
    pub pilot: PilotId,
    pub horizon_days: u32,
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    pub limits: ResourceLimits,
    pub source: usize,
    pub sink: usize,
    out_arcs: Vec<Vec<usize>>,
    topo: Vec<usize>,
    preassigned: BTreeSet<u32>,
}

impl SubproblemNetwork {
    pub fn out_arcs(&self, node: usize) -> &[usize] {
        &self.out_arcs[node]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn pairing_arc(&self, id: PairingId) -> Option<usize> {
        self.arcs.iter().position(|a| a.kind == ArcKind::Pairing(id))
    }

    pub fn pairings(&self) -> impl Iterator<Item = PairingId> + '_ {
        self.arcs.iter().filter_map(|a| match a.kind {
            ArcKind::Pairing(w) => Some(w),
            _ => None,
        })
    }

    pub fn count_arcs(&self, name: &str) -> usize {
        self.arcs.iter().filter(|a| a.kind.name() == name).count()
    }

    fn from_parts(
        pilot: PilotId,
        horizon_days: u32,
        limits: ResourceLimits,
        preassigned: BTreeSet<u32>,
        nodes: Vec<Node>,
        arcs: Vec<Arc>,
    ) -> Result<Self> {
        let source = nodes.iter().position(|n| n.kind == NodeKind::Source);
        let sink = nodes.iter().position(|n| n.kind == NodeKind::Sink);
        let (Some(source), Some(sink)) = (source, sink) else {
            return Err(Error::Build("network lost its source or sink".into()));
        };
        let mut net = Self {
            pilot,
            horizon_days,
            nodes,
            arcs,
            limits,
            source,
            sink,
            out_arcs: Vec::new(),
            topo: Vec::new(),
            preassigned,
        };
        net.index()?;
        Ok(net)
    }

    fn index(&mut self) -> Result<()> {
        let n = self.nodes.len();
        self.out_arcs = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (i, a) in self.arcs.iter().enumerate() {
            self.out_arcs[a.tail].push(i);
            indeg[a.head] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            topo.push(v);
            for &a in &self.out_arcs[v] {
                let h = self.arcs[a].head;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    queue.push_back(h);
                }
            }
        }
        if topo.len() != n {
            return Err(Error::Build(format!("network of {} contains a cycle", self.pilot)));
        }
        self.topo = topo;
        Ok(())
    }

    /// Keeps the arcs accepted by `keep`, then drops every node and arc that no
    /// longer lies on a source-to-sink path.
    pub fn filtered(&self, mut keep: impl FnMut(&Arc) -> bool) -> Result<Self> {
        let kept: Vec<bool> = self.arcs.iter().map(|a| keep(a)).collect();
        let n = self.nodes.len();
        let mut fwd = vec![false; n];
        fwd[self.source] = true;
        for &v in &self.topo {
            if !fwd[v] {
                continue;
            }
            for &a in &self.out_arcs[v] {
                if kept[a] {
                    fwd[self.arcs[a].head] = true;
                }
            }
        }
        let mut bwd = vec![false; n];
        bwd[self.sink] = true;
        for &v in self.topo.iter().rev() {
            for &a in &self.out_arcs[v] {
                if kept[a] && bwd[self.arcs[a].head] {
                    bwd[v] = true;
                }
            }
        }
        let alive: Vec<bool> = (0..n).map(|v| fwd[v] && bwd[v]).collect();
        if !alive[self.source] {
            return Err(Error::FreezeConflict(format!(
                "no source-to-sink path remains for pilot {}",
                self.pilot
            )));
        }
        let mut remap = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for v in 0..n {
            if alive[v] {
                remap[v] = nodes.len();
                nodes.push(self.nodes[v].clone());
            }
        }
        let arcs = self
            .arcs
            .iter()
            .zip(&kept)
            .filter(|(a, &k)| k && alive[a.tail] && alive[a.head])
            .map(|(a, _)| Arc { tail: remap[a.tail], head: remap[a.head], ..a.clone() })
            .collect();
        Self::from_parts(
            self.pilot,
            self.horizon_days,
            self.limits,
            self.preassigned.clone(),
            nodes,
            arcs,
        )
    }

    /// Loads reduced costs: pairing arcs lose their coverage dual, arcs
    /// granting preassigned days off lose those days' duals and the roster
    /// start arc loses the pilot's convexity dual.
    pub fn apply_duals(&mut self, instance: &Instance, duals: &Duals) -> Result<()> {
        if duals.alpha.len() != instance.pairings.len() {
            return Err(Error::Contract("pairing duals do not cover the instance".into()));
        }
        let pilot_idx = instance
            .pilot_idx(self.pilot)
            .ok_or_else(|| Error::Contract(format!("unknown pilot {}", self.pilot)))?;
        let gamma = *duals
            .gamma
            .get(pilot_idx)
            .ok_or_else(|| Error::Contract("pilot duals do not cover the instance".into()))?;
        let mut beta = std::collections::BTreeMap::new();
        for &q in &self.preassigned {
            let b = duals.beta.get(&(self.pilot, q)).ok_or_else(|| {
                Error::Contract(format!("missing dual for preassigned day {q} of {}", self.pilot))
            })?;
            beta.insert(q, *b);
        }
        for arc in &mut self.arcs {
            let mut rc = arc.cost;
            match arc.kind {
                ArcKind::Pairing(_) => rc -= duals.alpha[arc.pairing_index.expect("pairing arc")],
                ArcKind::RosterStart => rc -= gamma,
                kind => {
                    for d in kind.off_days() {
                        if let Some(b) = beta.get(&d) {
                            rc -= b;
                        }
                    }
                }
            }
            arc.reduced_cost = rc;
        }
        Ok(())
    }

    pub fn reset_reduced_costs(&mut self) {
        for a in &mut self.arcs {
            a.reduced_cost = a.cost;
        }
    }

    /// Schedule induced by a source-to-sink arc sequence.
    pub fn path_to_schedule(&self, path: &[usize]) -> Schedule {
        Schedule {
            pilot: self.pilot,
            activities: path.iter().filter_map(|&a| self.arcs[a].kind.activity()).collect(),
        }
    }

    /// Applies pairing-level restrictions: removed pairings disappear,
    /// imposed pairings must be flown, imposed successions must be flown back
    /// to back and forbidden successions lose their connection arc.
    pub fn restrict(&self, instance: &Instance, r: &Restriction) -> Result<Self> {
        let mut intervals = Vec::new();
        for &w in &r.imposed {
            if r.removed.contains(&w) {
                return Err(Error::FreezeConflict(format!("pairing {w} both imposed and removed")));
            }
            let p = instance.pairing(w).ok_or(Error::FreezeConflict(format!("unknown pairing {w}")))?;
            if self.pairing_arc(w).is_none() {
                return Err(Error::FreezeConflict(format!(
                    "pilot {} cannot fly imposed pairing {w}",
                    self.pilot
                )));
            }
            intervals.push((w, p.start_minute, p.end_minute));
        }
        let node_pairing = |v: usize| match self.nodes[v].kind {
            NodeKind::PairingStart(w) | NodeKind::PairingEnd(w) => Some(w),
            _ => None,
        };
        self.filtered(|a| {
            if let ArcKind::Pairing(w) = a.kind {
                if r.removed.contains(&w) {
                    return false;
                }
            }
            let (t0, t1) = (self.nodes[a.tail].time_minute, self.nodes[a.head].time_minute);
            for &(w, s, e) in &intervals {
                if a.kind != ArcKind::Pairing(w) && t0 < e && t1 > s {
                    return false;
                }
            }
            if a.kind == ArcKind::PairingConnection {
                let (from, to) = (node_pairing(a.tail), node_pairing(a.head));
                if let (Some(x), Some(y)) = (from, to) {
                    if r.forbidden_successions.contains(&(x, y)) {
                        return false;
                    }
                }
            }
            for &(x, y) in &r.imposed_successions {
                let leaves_x = self.nodes[a.tail].kind == NodeKind::PairingEnd(x);
                let enters_y = self.nodes[a.head].kind == NodeKind::PairingStart(y);
                if leaves_x != enters_y {
                    return false;
                }
            }
            true
        })
    }

    /// Text dump with one line per node and per arc.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "network {} nodes {} arcs {}",
            self.pilot,
            self.nodes.len(),
            self.arcs.len()
        );
        for (i, n) in self.nodes.iter().enumerate() {
            let day = n.time_minute / MINUTES_PER_DAY + 1;
            let kind = match n.kind {
                NodeKind::Source => "source".to_string(),
                NodeKind::Sink => "sink".to_string(),
                NodeKind::PairingStart(w) => format!("pairing_start {w}"),
                NodeKind::PairingEnd(w) => format!("pairing_end {w}"),
                NodeKind::Midnight(d) => format!("midnight {d}"),
            };
            let _ = writeln!(s, "node {i} {kind} day={day} t={}", n.time_minute);
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let _ = writeln!(s, "arc {i} {}->{} {}", a.tail, a.head, ArcLabel(a));
        }
        s
    }
}

struct ArcLabel<'a>(&'a Arc);

impl fmt::Display for ArcLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0;
        write!(f, "{}", a.kind.name())?;
        match a.kind {
            ArcKind::Rest(d) | ArcKind::PostpairingRest(d) => write!(f, "({d})")?,
            ArcKind::Vacation(o) | ArcKind::PostpairingVacation(o) => write!(f, "({o})")?,
            ArcKind::Pairing(w) => write!(f, "({w})")?,
            _ => {}
        }
        let reset = if a.delta.resets_consecutive { "reset" } else { "" };
        write!(
            f,
            " cost={} rc={} off={} flight={} consec={}{:+}",
            a.cost, a.reduced_cost, a.delta.days_off, a.delta.flight_minutes, reset, a.delta.consecutive
        )
    }
}

/// Pairing-level restrictions applied to one pilot's network.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Restriction {
    pub removed: HashSet<PairingId>,
    pub imposed: BTreeSet<PairingId>,
    pub imposed_successions: Vec<(PairingId, PairingId)>,
    pub forbidden_successions: Vec<(PairingId, PairingId)>,
}

impl Restriction {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
            && self.imposed.is_empty()
            && self.imposed_successions.is_empty()
            && self.forbidden_successions.is_empty()
    }
}

fn connection_allowed(a: &Pairing, b: &Pairing, rules: &RuleParams) -> bool {
    let (ea, sb) = (a.end_day(), b.start_day());
    (sb == ea || sb == ea + 1)
        && b.start_minute >= a.end_minute
        && b.start_minute - a.end_minute >= rules.min_rest_minutes()
}

pub fn build_network(instance: &Instance, pilot: &Pilot) -> Result<SubproblemNetwork> {
    let h = instance.horizon_days;
    if pilot.preassigned_days_off.iter().any(|&q| q == 0 || q > h) {
        return Err(Error::Build(format!("pilot {} has preassigned days outside the horizon", pilot.id)));
    }
    if pilot.preassigned_days_off.len() as u32 > h {
        return Err(Error::Build(format!("pilot {} has too many preassigned days", pilot.id)));
    }
    let rules = &instance.rules;
    let limits = ResourceLimits::from_rules(rules);
    let mut nodes = Vec::new();
    let mut arcs = Vec::new();
    let add_node = |nodes: &mut Vec<Node>, kind, time_minute| {
        nodes.push(Node { kind, time_minute });
        nodes.len() - 1
    };
    let source = add_node(&mut nodes, NodeKind::Source, 0);
    // midnight[d] for d = 1..=h+1; index 0 unused.
    let mut midnight = vec![usize::MAX; h as usize + 2];
    for d in 1..=h + 1 {
        midnight[d as usize] = add_node(&mut nodes, NodeKind::Midnight(d), (d - 1) * MINUTES_PER_DAY);
    }
    let sink = add_node(&mut nodes, NodeKind::Sink, h * MINUTES_PER_DAY);

    let zero = ResourceDelta::default();
    let off = |days: u32| ResourceDelta { days_off: days, resets_consecutive: true, ..zero };
    let mk = |tail, head, kind, cost: f64, delta| Arc {
        tail,
        head,
        kind,
        cost,
        reduced_cost: cost,
        delta,
        pairing_index: None,
    };

    arcs.push(mk(source, midnight[1], ArcKind::RosterStart, 0.0, zero));
    arcs.push(mk(midnight[h as usize + 1], sink, ArcKind::RosterEnd, 0.0, zero));
    for d in 1..=h {
        arcs.push(mk(midnight[d as usize], midnight[d as usize + 1], ArcKind::Rest(d), 0.0, off(1)));
    }
    let mut vacations: Vec<(u32, f64)> = Vec::new();
    for v in &pilot.preferred_vacations {
        if v.start_day >= 1 && v.start_day + VACATION_DAYS - 1 <= h {
            if let Some(entry) = vacations.iter_mut().find(|(o, _)| *o == v.start_day) {
                entry.1 += v.weight;
            } else {
                vacations.push((v.start_day, v.weight));
            }
        }
    }
    vacations.sort_by_key(|&(o, _)| o);
    for &(o, weight) in &vacations {
        arcs.push(mk(
            midnight[o as usize],
            midnight[(o + VACATION_DAYS) as usize],
            ArcKind::Vacation(o),
            weight,
            off(VACATION_DAYS),
        ));
    }

    let eligible: Vec<usize> = (0..instance.pairings.len())
        .filter(|&i| {
            let w = &instance.pairings[i];
            w.base == pilot.base
                && w.end_day() <= h
                && !pilot.preassigned_days_off.iter().any(|&q| w.covers_day(q))
        })
        .collect();
    let mut start_node = vec![usize::MAX; instance.pairings.len()];
    let mut end_node = vec![usize::MAX; instance.pairings.len()];
    for &i in &eligible {
        let w = &instance.pairings[i];
        start_node[i] = add_node(&mut nodes, NodeKind::PairingStart(w.id), w.start_minute);
        end_node[i] = add_node(&mut nodes, NodeKind::PairingEnd(w.id), w.end_minute);
    }
    for &i in &eligible {
        let w = &instance.pairings[i];
        let (s, e) = (start_node[i], end_node[i]);
        let (sd, ed) = (w.start_day(), w.end_day());
        arcs.push(mk(midnight[sd as usize], s, ArcKind::MidnightStart, 0.0, zero));
        arcs.push(Arc {
            pairing_index: Some(i),
            ..mk(
                s,
                e,
                ArcKind::Pairing(w.id),
                pilot.pairing_value(w),
                ResourceDelta {
                    flight_minutes: w.work_minutes,
                    consecutive: w.duty_days.len() as i32,
                    ..zero
                },
            )
        });
        if ed == h {
            arcs.push(mk(e, sink, ArcKind::RosterEnd, 0.0, zero));
        }
        if ed < h {
            arcs.push(mk(e, midnight[ed as usize + 2], ArcKind::PostpairingRest(ed + 1), 0.0, off(1)));
        }
        let o = ed + 1;
        if let Some(&(_, weight)) = vacations.iter().find(|&&(v, _)| v == o) {
            arcs.push(mk(
                e,
                midnight[(o + VACATION_DAYS) as usize],
                ArcKind::PostpairingVacation(o),
                weight,
                off(VACATION_DAYS),
            ));
        }
        for &j in &eligible {
            let b = &instance.pairings[j];
            if i != j && connection_allowed(w, b, rules) {
                let overlap = w.duty_days.intersection(&b.duty_days).count() as i32;
                arcs.push(mk(
                    e,
                    start_node[j],
                    ArcKind::PairingConnection,
                    0.0,
                    ResourceDelta { consecutive: -overlap, ..zero },
                ));
            }
        }
    }
    let net = SubproblemNetwork::from_parts(
        pilot.id,
        h,
        limits,
        pilot.preassigned_days_off.clone(),
        nodes,
        arcs,
    )?;
    net.filtered(|_| true)
}

pub fn build_all_networks(instance: &Instance) -> Result<Vec<SubproblemNetwork>> {
    use rayon::prelude::*;
    instance.pilots.par_iter().map(|k| build_network(instance, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    pub index: usize,
    pub first_day: u32,
    pub last_day: u32,
}

impl WindowSpec {
    pub fn contains_day(&self, day: u32) -> bool {
        (self.first_day..=self.last_day).contains(&day)
    }
}

pub fn compute_windows(horizon_days: u32, window_len: u32, overlap: u32) -> Result<Vec<WindowSpec>> {
    if window_len == 0 || overlap >= window_len || window_len > horizon_days {
        return Err(Error::Parameter(format!(
            "need 0 <= overlap < window_len <= horizon (got {overlap}, {window_len}, {horizon_days})"
        )));
    }
    let step = window_len - overlap;
    let mut out = Vec::new();
    let mut first = 1;
    loop {
        let last = (first + window_len - 1).min(horizon_days);
        out.push(WindowSpec { index: out.len(), first_day: first, last_day: last });
        if last == horizon_days {
            return Ok(out);
        }
        first += step;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    WinBasic,
    WinMl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreezeMask {
    pub mode: WindowMode,
    pub window: WindowSpec,
    pub imposed: BTreeSet<(PilotId, PairingId)>,
    pub forbidden: BTreeSet<(PilotId, PairingId)>,
}

impl FreezeMask {
    pub fn open(mode: WindowMode, window: WindowSpec) -> Self {
        Self { mode, window, imposed: BTreeSet::new(), forbidden: BTreeSet::new() }
    }

    pub fn imposed_on(&self, pilot: PilotId) -> BTreeSet<PairingId> {
        self.imposed.iter().filter(|(k, _)| *k == pilot).map(|&(_, w)| w).collect()
    }

    /// Pairing restriction for one pilot: pairings departing outside the
    /// window, imposed on another pilot or forbidden are removed.
    pub fn restriction_for(&self, instance: &Instance, pilot: PilotId) -> Result<Restriction> {
        let imposed = self.imposed_on(pilot);
        let taken: HashSet<PairingId> = self.imposed.iter().map(|&(_, w)| w).collect();
        if self.imposed.iter().any(|e| self.forbidden.contains(e)) {
            return Err(Error::FreezeConflict("a pairing is both imposed and forbidden".into()));
        }
        let mut removed = HashSet::new();
        for w in &instance.pairings {
            if imposed.contains(&w.id) {
                continue;
            }
            let free = self.window.contains_day(w.departure_day())
                && !taken.contains(&w.id)
                && !self.forbidden.contains(&(pilot, w.id));
            if !free {
                removed.insert(w.id);
            }
        }
        Ok(Restriction { removed, imposed, ..Default::default() })
    }
}

pub fn restrict_for_window(
    instance: &Instance,
    network: &SubproblemNetwork,
    mask: &FreezeMask,
) -> Result<SubproblemNetwork> {
    let r = mask.restriction_for(instance, network.pilot)?;
    network.restrict(instance, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance, pairing};
    use crate::model::{FlightPreference, FlightId, RuleParams, VacationPreference};

    fn rules() -> RuleParams {
        RuleParams { min_days_off: 2, ..RuleParams::default() }
    }

    #[test]
    fn windows() {
        let w = compute_windows(31, 10, 3).unwrap();
        let spans: Vec<_> = w.iter().map(|w| (w.first_day, w.last_day)).collect();
        assert_eq!(spans, [(1, 10), (8, 17), (15, 24), (22, 31)]);
        let w = compute_windows(10, 10, 3).unwrap();
        assert_eq!(w.len(), 1);
        let w = compute_windows(31, 15, 7).unwrap();
        let spans: Vec<_> = w.iter().map(|w| (w.first_day, w.last_day)).collect();
        assert_eq!(spans, [(1, 15), (9, 23), (17, 31)]);
        assert!(compute_windows(31, 10, 10).is_err());
        assert!(compute_windows(9, 10, 3).is_err());
    }

    /// Hand count for a 7-day month with a 2-day pairing on days 2-3 and a
    /// 1-day pairing on day 5 (compatible, 2-day gap):
    /// nodes: source, sink, 8 midnights, 2x2 pairing nodes = 14;
    /// arcs: roster_start, roster_end, 7 rest, 2 midnight_start, 2 pairing,
    /// 2 postpairing_rest, 0 connections = 15.
    #[test]
    fn hand_counted_fixture() {
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(7, vec![k.clone()], vec![pairing(1, 2, 2, 8, 3), pairing(2, 5, 1, 8, 3)], rules());
        let net = build_network(&inst, &k).unwrap();
        assert_eq!(net.nodes.len(), 14);
        assert_eq!(net.arcs.len(), 15);
        assert_eq!(net.count_arcs("rest"), 7);
        assert_eq!(net.count_arcs("postpairing_rest"), 2);
        assert_eq!(net.count_arcs("pairing_connection"), 0);
        assert_eq!(net.count_arcs("vacation"), 0);
    }

    #[test]
    fn connections_need_minimum_rest() {
        let k = Pilot::new(PilotId(0), "B");
        // a ends day 1 at 10:15, b starts day 2 at 07:15 (21 h) and c starts
        // day 1 at 21:15 (11 h).
        let a = pairing(1, 1, 1, 8, 2);
        let b = pairing(2, 2, 1, 8, 2);
        let c = pairing(3, 1, 1, 22, 1);
        let inst = instance(7, vec![k.clone()], vec![a, b, c], rules());
        let net = build_network(&inst, &k).unwrap();
        let conns: Vec<(NodeKind, NodeKind)> = net
            .arcs
            .iter()
            .filter(|a| a.kind == ArcKind::PairingConnection)
            .map(|a| (net.nodes[a.tail].kind, net.nodes[a.head].kind))
            .collect();
        assert!(conns.contains(&(NodeKind::PairingEnd(PairingId(1)), NodeKind::PairingStart(PairingId(2)))));
        assert!(!conns.contains(&(NodeKind::PairingEnd(PairingId(1)), NodeKind::PairingStart(PairingId(3)))));
    }

    #[test]
    fn preassigned_day_removes_covering_pairings() {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preassigned_days_off.insert(3);
        let inst = instance(7, vec![k.clone()], vec![pairing(1, 2, 2, 8, 3), pairing(2, 5, 1, 8, 3)], rules());
        let net = build_network(&inst, &k).unwrap();
        let ws: Vec<_> = net.pairings().collect();
        assert_eq!(ws, vec![PairingId(2)]);
    }

    #[test]
    fn vacation_arcs_and_duals() {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preassigned_days_off.insert(4);
        k.preferred_vacations.push(VacationPreference { start_day: 3, weight: 20.0 });
        k.preferred_flights.push(FlightPreference { flight: FlightId(10), weight: 7.0 });
        let inst = instance(7, vec![k.clone()], vec![pairing(1, 1, 1, 8, 3)], rules());
        let mut net = build_network(&inst, &k).unwrap();
        assert_eq!(net.count_arcs("vacation"), 1);
        let duals = Duals {
            alpha: vec![2.5],
            beta: [((k.id, 4), 11.0)].into(),
            gamma: vec![-5.0],
        };
        net.apply_duals(&inst, &duals).unwrap();
        for a in &net.arcs {
            let expected = match a.kind {
                ArcKind::Vacation(3) => 20.0 - 11.0,
                ArcKind::Rest(4) => -11.0,
                ArcKind::Pairing(_) => 7.0 - 2.5,
                ArcKind::RosterStart => 5.0,
                _ => a.cost,
            };
            assert_eq!(a.reduced_cost, expected, "{:?}", a.kind);
        }
        let missing = Duals { alpha: vec![0.0], beta: Default::default(), gamma: vec![0.0] };
        assert!(matches!(net.apply_duals(&inst, &missing), Err(Error::Contract(_))));
    }

    #[test]
    fn imposed_pairing_is_on_every_path() {
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(
            10,
            vec![k.clone()],
            vec![pairing(1, 1, 1, 8, 2), pairing(2, 3, 2, 8, 2), pairing(3, 4, 1, 8, 2), pairing(4, 7, 2, 8, 2)],
            rules(),
        );
        let net = build_network(&inst, &k).unwrap();
        let r = Restriction { imposed: [PairingId(2)].into(), ..Default::default() };
        let sub = net.restrict(&inst, &r).unwrap();
        assert!(sub.arcs.len() < net.arcs.len());
        assert!(sub.pairing_arc(PairingId(3)).is_none());
        for path in crate::rcspp::enumerate_paths(&sub, 100_000) {
            let s = sub.path_to_schedule(&path);
            assert!(s.pairings().any(|w| w == PairingId(2)));
        }
    }

    #[test]
    fn succession_restrictions() {
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(
            10,
            vec![k.clone()],
            vec![pairing(1, 1, 1, 8, 2), pairing(2, 2, 1, 8, 2), pairing(3, 2, 1, 9, 2)],
            rules(),
        );
        let net = build_network(&inst, &k).unwrap();
        let imp = Restriction { imposed_successions: vec![(PairingId(1), PairingId(2))], ..Default::default() };
        let sub = net.restrict(&inst, &imp).unwrap();
        for path in crate::rcspp::enumerate_paths(&sub, 100_000) {
            let s = sub.path_to_schedule(&path);
            let has1 = s.pairings().any(|w| w == PairingId(1));
            assert_eq!(has1, s.successions(&inst).contains(&(PairingId(1), PairingId(2))));
        }
        let forb = Restriction { forbidden_successions: vec![(PairingId(1), PairingId(2))], ..Default::default() };
        let sub = net.restrict(&inst, &forb).unwrap();
        for path in crate::rcspp::enumerate_paths(&sub, 100_000) {
            let s = sub.path_to_schedule(&path);
            assert!(!s.successions(&inst).contains(&(PairingId(1), PairingId(2))));
        }
    }

    #[test]
    fn window_mask_fig_scenarios() {
        // Windows of 2 days with 1 day overlap; pairings start on days 1, 3, 4.
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(
            7,
            vec![k.clone()],
            vec![pairing(1, 1, 2, 8, 2), pairing(3, 3, 2, 8, 2), pairing(4, 4, 1, 8, 2)],
            rules(),
        );
        let windows = compute_windows(7, 2, 1).unwrap();
        let net = build_network(&inst, &k).unwrap();

        // Without an initial roster, window 2 (days 2-3): pairing 1 was
        // assigned before and is imposed; the day-3 pairing is free; the
        // day-4 pairing belongs to a future window.
        let mut mask = FreezeMask::open(WindowMode::WinBasic, windows[1]);
        mask.imposed.insert((k.id, PairingId(1)));
        let sub = restrict_for_window(&inst, &net, &mask).unwrap();
        assert!(sub.pairing_arc(PairingId(1)).is_some());
        assert!(sub.pairing_arc(PairingId(3)).is_some());
        assert!(sub.pairing_arc(PairingId(4)).is_none());
        // rest days 1-2 clash with pairing 1 and day 3 is only reachable through it.
        assert_eq!(sub.count_arcs("rest"), 4);

        // With an initial roster, window 1: the day-3 pairing is imposed and
        // the conflicting day-4 pairing disappears; pairing 1 stays free.
        let mut mask = FreezeMask::open(WindowMode::WinMl, windows[0]);
        mask.imposed.insert((k.id, PairingId(3)));
        let sub = restrict_for_window(&inst, &net, &mask).unwrap();
        assert!(sub.pairing_arc(PairingId(3)).is_some());
        assert!(sub.pairing_arc(PairingId(4)).is_none());
        assert!(sub.pairing_arc(PairingId(1)).is_some());

        let full = WindowSpec { index: 0, first_day: 1, last_day: 7 };
        let sub = restrict_for_window(&inst, &net, &FreezeMask::open(WindowMode::WinBasic, full)).unwrap();
        assert_eq!(sub.arcs.len(), net.arcs.len());
        assert_eq!(sub.nodes.len(), net.nodes.len());
    }

    #[test]
    fn imposing_an_unreachable_pairing_conflicts() {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preassigned_days_off.insert(2);
        let inst = instance(7, vec![k.clone()], vec![pairing(1, 2, 1, 8, 2)], rules());
        let net = build_network(&inst, &k).unwrap();
        let r = Restriction { imposed: [PairingId(1)].into(), ..Default::default() };
        assert!(matches!(net.restrict(&inst, &r), Err(Error::FreezeConflict(_))));
    }
}
