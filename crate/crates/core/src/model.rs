//! Domain types for rostering instances, pilot schedules and rosters, together
//! with the satisfaction objective and the feasibility rules every solver in
//! this crate is checked against.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MINUTES_PER_DAY: u32 = 1440;

/// Calendar day (1-based) containing the given minute of the month.
#[inline]
pub fn day_of_minute(minute: u32) -> u32 {
    minute / MINUTES_PER_DAY + 1
}

/// Minute at which the given (1-based) day starts.
#[inline]
pub fn day_start_minute(day: u32) -> u32 {
    (day - 1) * MINUTES_PER_DAY
}

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(FlightId, "F");
id_type!(PairingId, "W");
id_type!(PilotId, "K");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flight {
    pub id: FlightId,
    pub departure_minute: u32,
    pub arrival_minute: u32,
    pub origin: String,
    pub destination: String,
}

impl Flight {
    pub fn duration_minutes(&self) -> u32 {
        self.arrival_minute - self.departure_minute
    }
}

/// A sequence of connected flights leaving from and returning to a base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub id: PairingId,
    pub base: String,
    pub flights: Vec<Flight>,
    pub start_minute: u32,
    pub end_minute: u32,
    /// Calendar days with at least one departure.
    pub duty_days: BTreeSet<u32>,
    /// Flight time plus briefing and debriefing credit.
    pub work_minutes: u32,
}

impl Pairing {
    pub fn n_flights(&self) -> usize {
        self.flights.len()
    }

    pub fn start_day(&self) -> u32 {
        day_of_minute(self.start_minute)
    }

    pub fn end_day(&self) -> u32 {
        day_of_minute(self.end_minute)
    }

    /// Day of the first flight departure; this decides which window a
    /// pairing belongs to.
    pub fn departure_day(&self) -> u32 {
        self.flights
            .first()
            .map(|f| day_of_minute(f.departure_minute))
            .unwrap_or_else(|| self.start_day())
    }

    pub fn span_days(&self) -> std::ops::RangeInclusive<u32> {
        self.start_day()..=self.end_day()
    }

    pub fn covers_day(&self, day: u32) -> bool {
        self.span_days().contains(&day)
    }

    pub fn flight_minutes(&self) -> u32 {
        self.flights.iter().map(Flight::duration_minutes).sum()
    }

    pub fn duration_days(&self) -> u32 {
        self.end_day() - self.start_day() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPreference {
    pub flight: FlightId,
    pub weight: f64,
}

/// A preferred three-day vacation starting on `start_day`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacationPreference {
    pub start_day: u32,
    pub weight: f64,
}

pub const VACATION_DAYS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pilot {
    pub id: PilotId,
    pub base: String,
    #[serde(default)]
    pub preferred_flights: Vec<FlightPreference>,
    #[serde(default)]
    pub preferred_vacations: Vec<VacationPreference>,
    #[serde(default)]
    pub preassigned_days_off: BTreeSet<u32>,
}

impl Pilot {
    pub fn new(id: PilotId, base: impl Into<String>) -> Self {
        Self {
            id,
            base: base.into(),
            preferred_flights: Vec::new(),
            preferred_vacations: Vec::new(),
            preassigned_days_off: BTreeSet::new(),
        }
    }

    pub fn flight_weight(&self, flight: FlightId) -> f64 {
        self.preferred_flights
            .iter()
            .filter(|p| p.flight == flight)
            .map(|p| p.weight)
            .sum()
    }

    pub fn vacation_weight(&self, start_day: u32) -> Option<f64> {
        let mut found = None;
        for v in self.preferred_vacations.iter().filter(|v| v.start_day == start_day) {
            *found.get_or_insert(0.0) += v.weight;
        }
        found
    }

    /// Sum of the weights of this pilot's preferred flights operated in `pairing`.
    pub fn pairing_value(&self, pairing: &Pairing) -> f64 {
        if self.preferred_flights.is_empty() {
            return 0.0;
        }
        pairing.flights.iter().map(|f| self.flight_weight(f.id)).sum()
    }

    pub fn preference_total(&self) -> f64 {
        self.preferred_flights.iter().map(|p| p.weight).sum::<f64>()
            + self.preferred_vacations.iter().map(|v| v.weight).sum::<f64>()
    }
}

/// Scheduling rules and objective penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Maximum number of consecutive duty days.
    pub max_consecutive_duties: u32,
    /// Minimum number of days off in the horizon.
    pub min_days_off: u32,
    /// Minimum rest between two pairings, in hours.
    pub min_rest_hours: u32,
    /// Maximum credited flight time in the horizon, in hours.
    pub max_flight_hours: u32,
    /// Penalty per flight of an unassigned pairing.
    pub unassigned_flight_penalty: f64,
    /// Penalty per preassigned day off that is not granted.
    pub missed_day_off_penalty: f64,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self {
            max_consecutive_duties: 6,
            min_days_off: 10,
            min_rest_hours: 12,
            max_flight_hours: 85,
            unassigned_flight_penalty: 100.0,
            missed_day_off_penalty: 1_000_000.0,
        }
    }
}

impl RuleParams {
    pub fn min_rest_minutes(&self) -> u32 {
        self.min_rest_hours * 60
    }

    pub fn max_flight_minutes(&self) -> u32 {
        self.max_flight_hours * 60
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.max_consecutive_duties > 0
            && self.min_days_off > 0
            && self.min_rest_hours > 0
            && self.max_flight_hours > 0
            && self.unassigned_flight_penalty > 0.0
            && self.missed_day_off_penalty > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ModelError::Invalid("rule parameters must be strictly positive".into()))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("unknown pilot {0}")]
    UnknownPilot(PilotId),
    #[error("unknown pairing {0}")]
    UnknownPairing(PairingId),
    #[error("schedule belongs to pilot {schedule} but was scored for pilot {pilot}")]
    PilotMismatch { pilot: PilotId, schedule: PilotId },
    #[error("pairing {0} is covered more than once")]
    PairingCoveredTwice(PairingId),
}

/// Default per-pilot preference budget.
pub const DEFAULT_PREFERENCE_BUDGET: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub horizon_days: u32,
    pub bases: Vec<String>,
    pub pilots: Vec<Pilot>,
    pub pairings: Vec<Pairing>,
    pub rules: RuleParams,
    pairing_index: HashMap<PairingId, usize>,
    pilot_index: HashMap<PilotId, usize>,
}

impl Instance {
    /// Builds an instance and checks its structural invariants.
    pub fn new(
        horizon_days: u32,
        bases: Vec<String>,
        pilots: Vec<Pilot>,
        pairings: Vec<Pairing>,
        rules: RuleParams,
    ) -> Result<Self, ModelError> {
        let mut inst = Self {
            horizon_days,
            bases,
            pilots,
            pairings,
            rules,
            pairing_index: HashMap::new(),
            pilot_index: HashMap::new(),
        };
        inst.reindex()?;
        inst.validate()?;
        Ok(inst)
    }

    fn reindex(&mut self) -> Result<(), ModelError> {
        self.pairing_index.clear();
        self.pilot_index.clear();
        for (i, w) in self.pairings.iter().enumerate() {
            if self.pairing_index.insert(w.id, i).is_some() {
                return Err(ModelError::Invalid(format!("duplicate pairing id {}", w.id)));
            }
        }
        for (i, k) in self.pilots.iter().enumerate() {
            if self.pilot_index.insert(k.id, i).is_some() {
                return Err(ModelError::Invalid(format!("duplicate pilot id {}", k.id)));
            }
        }
        Ok(())
    }

    /// Replaces the pilot list (e.g. after scenario generation).
    pub fn with_pilots(mut self, pilots: Vec<Pilot>) -> Result<Self, ModelError> {
        self.pilots = pilots;
        self.reindex()?;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rules(mut self, rules: RuleParams) -> Result<Self, ModelError> {
        rules.validate()?;
        self.rules = rules;
        Ok(self)
    }

    pub fn pairing_idx(&self, id: PairingId) -> Option<usize> {
        self.pairing_index.get(&id).copied()
    }

    pub fn pilot_idx(&self, id: PilotId) -> Option<usize> {
        self.pilot_index.get(&id).copied()
    }

    pub fn pairing(&self, id: PairingId) -> Option<&Pairing> {
        self.pairing_idx(id).map(|i| &self.pairings[i])
    }

    pub fn pilot(&self, id: PilotId) -> Option<&Pilot> {
        self.pilot_idx(id).map(|i| &self.pilots[i])
    }

    pub fn total_flight_minutes(&self) -> u64 {
        self.pairings.iter().map(|w| w.flight_minutes() as u64).sum()
    }

    pub fn total_flights(&self) -> usize {
        self.pairings.iter().map(Pairing::n_flights).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Invalid(msg));
        if !(28..=31).contains(&self.horizon_days) && !(1..28).contains(&self.horizon_days) {
            return bad(format!("horizon of {} days is not supported", self.horizon_days));
        }
        self.rules.validate()?;
        let horizon_end = self.horizon_days * MINUTES_PER_DAY;
        let bases: BTreeSet<&str> = self.bases.iter().map(String::as_str).collect();
        for w in &self.pairings {
            if !bases.contains(w.base.as_str()) {
                return bad(format!("pairing {} has unknown base {}", w.id, w.base));
            }
            if w.flights.is_empty() {
                return bad(format!("pairing {} has no flights", w.id));
            }
            for f in &w.flights {
                if f.arrival_minute <= f.departure_minute {
                    return bad(format!("flight {} arrives before it departs", f.id));
                }
                if f.arrival_minute >= horizon_end {
                    return bad(format!("flight {} lies outside the horizon", f.id));
                }
            }
            for pair in w.flights.windows(2) {
                if pair[0].destination != pair[1].origin
                    || pair[1].departure_minute < pair[0].arrival_minute
                {
                    return bad(format!("pairing {} flights are not connected", w.id));
                }
            }
            let first = &w.flights[0];
            let last = &w.flights[w.flights.len() - 1];
            if first.origin != w.base || last.destination != w.base {
                return bad(format!("pairing {} does not start and end at its base", w.id));
            }
            if w.start_minute > first.departure_minute || w.end_minute < last.arrival_minute {
                return bad(format!("pairing {} span does not contain its flights", w.id));
            }
            if w.end_minute >= horizon_end {
                return bad(format!("pairing {} ends outside the horizon", w.id));
            }
            let duty: BTreeSet<u32> =
                w.flights.iter().map(|f| day_of_minute(f.departure_minute)).collect();
            if duty != w.duty_days {
                return bad(format!("pairing {} duty days are inconsistent", w.id));
            }
        }
        for k in &self.pilots {
            if !bases.contains(k.base.as_str()) {
                return bad(format!("pilot {} has unknown base {}", k.id, k.base));
            }
            for v in &k.preferred_vacations {
                if v.start_day < 1 || v.start_day + VACATION_DAYS - 1 > self.horizon_days {
                    return bad(format!("pilot {} vacation outside horizon", k.id));
                }
            }
            if k.preassigned_days_off.iter().any(|&d| d < 1 || d > self.horizon_days) {
                return bad(format!("pilot {} preassigned day outside horizon", k.id));
            }
            if k.preferred_flights.iter().any(|p| p.weight < 0.0)
                || k.preferred_vacations.iter().any(|v| v.weight < 0.0)
            {
                return bad(format!("pilot {} has a negative preference weight", k.id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Pairing(PairingId),
    DayOff(u32),
    /// Three-day vacation starting on the given day.
    Vacation(u32),
}

impl Activity {
    pub fn covered_days(&self, instance: &Instance) -> Vec<u32> {
        match *self {
            Activity::Pairing(id) => instance
                .pairing(id)
                .map(|w| w.span_days().collect())
                .unwrap_or_default(),
            Activity::DayOff(d) => vec![d],
            Activity::Vacation(d) => (d..d + VACATION_DAYS).collect(),
        }
    }

    fn start_key(&self, instance: &Instance) -> u32 {
        match *self {
            Activity::Pairing(id) => instance.pairing(id).map(|w| w.start_minute).unwrap_or(0),
            Activity::DayOff(d) | Activity::Vacation(d) => day_start_minute(d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub pilot: PilotId,
    pub activities: Vec<Activity>,
}

impl Schedule {
    /// The "no schedule" marker: the pilot receives nothing and every
    /// preassigned day off is reported as missed.
    pub fn empty(pilot: PilotId) -> Self {
        Self { pilot, activities: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn pairings(&self) -> impl Iterator<Item = PairingId> + '_ {
        self.activities.iter().filter_map(|a| match a {
            Activity::Pairing(id) => Some(*id),
            _ => None,
        })
    }

    pub fn sort(&mut self, instance: &Instance) {
        self.activities.sort_by_key(|a| (a.start_key(instance), *a));
    }

    /// Consecutive pairing pairs with no day off in between.
    pub fn successions(&self, instance: &Instance) -> Vec<(PairingId, PairingId)> {
        let mut out = Vec::new();
        for pair in self.activities.windows(2) {
            if let (Activity::Pairing(a), Activity::Pairing(b)) = (pair[0], pair[1]) {
                if let (Some(wa), Some(wb)) = (instance.pairing(a), instance.pairing(b)) {
                    if wb.start_day() <= wa.end_day() + 1 {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Roster {
    pub schedules: Vec<Schedule>,
    pub unassigned_pairings: BTreeSet<PairingId>,
    pub missed_preassigned: BTreeSet<(PilotId, u32)>,
}

impl Roster {
    pub fn schedule_of(&self, pilot: PilotId) -> Option<&Schedule> {
        self.schedules.iter().find(|s| s.pilot == pilot)
    }

    /// Pairing to pilot assignment.
    pub fn assignment(&self) -> BTreeMap<PairingId, PilotId> {
        let mut map = BTreeMap::new();
        for s in &self.schedules {
            for w in s.pairings() {
                map.insert(w, s.pilot);
            }
        }
        map
    }

    /// Builds a roster from one schedule per pilot, deriving the unassigned
    /// pairings and the missed preassigned days.
    pub fn from_schedules(instance: &Instance, mut schedules: Vec<Schedule>) -> Self {
        schedules.sort_by_key(|s| instance.pilot_idx(s.pilot).unwrap_or(usize::MAX));
        let assigned: BTreeSet<PairingId> = schedules.iter().flat_map(|s| s.pairings()).collect();
        let unassigned_pairings = instance
            .pairings
            .iter()
            .map(|w| w.id)
            .filter(|id| !assigned.contains(id))
            .collect();
        let mut missed_preassigned = BTreeSet::new();
        for s in schedules.iter().filter(|s| s.is_empty()) {
            if let Some(k) = instance.pilot(s.pilot) {
                for &q in &k.preassigned_days_off {
                    missed_preassigned.insert((k.id, q));
                }
            }
        }
        Self { schedules, unassigned_pairings, missed_preassigned }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub satisfaction_total: f64,
    pub flight_penalty: f64,
    pub dayoff_penalty: f64,
    pub objective: f64,
}

impl ObjectiveBreakdown {
    pub fn new(satisfaction_total: f64, flight_penalty: f64, dayoff_penalty: f64) -> Self {
        Self {
            satisfaction_total,
            flight_penalty,
            dayoff_penalty,
            objective: satisfaction_total - flight_penalty - dayoff_penalty,
        }
    }
}

/// Satisfaction a schedule brings to its pilot: granted preferred flights plus
/// preferred vacations taken on their exact start day.
pub fn schedule_satisfaction(
    instance: &Instance,
    pilot: &Pilot,
    schedule: &Schedule,
) -> Result<f64, ModelError> {
    if pilot.id != schedule.pilot {
        return Err(ModelError::PilotMismatch { pilot: pilot.id, schedule: schedule.pilot });
    }
    let mut total = 0.0;
    let mut vacations = BTreeSet::new();
    for a in &schedule.activities {
        match *a {
            Activity::Pairing(id) => {
                let w = instance.pairing(id).ok_or(ModelError::UnknownPairing(id))?;
                total += pilot.pairing_value(w);
            }
            Activity::Vacation(d) => {
                vacations.insert(d);
            }
            Activity::DayOff(_) => {}
        }
    }
    for d in vacations {
        total += pilot.vacation_weight(d).unwrap_or(0.0);
    }
    Ok(total)
}

pub fn roster_objective(
    instance: &Instance,
    roster: &Roster,
) -> Result<ObjectiveBreakdown, ModelError> {
    let mut covered = BTreeSet::new();
    let mut satisfaction = 0.0;
    for s in &roster.schedules {
        let pilot = instance.pilot(s.pilot).ok_or(ModelError::UnknownPilot(s.pilot))?;
        for w in s.pairings() {
            if !covered.insert(w) {
                return Err(ModelError::PairingCoveredTwice(w));
            }
        }
        satisfaction += schedule_satisfaction(instance, pilot, s)?;
    }
    let mut unassigned_flights = 0usize;
    for &w in &roster.unassigned_pairings {
        let p = instance.pairing(w).ok_or(ModelError::UnknownPairing(w))?;
        if covered.contains(&w) {
            return Err(ModelError::PairingCoveredTwice(w));
        }
        unassigned_flights += p.n_flights();
    }
    let rules = &instance.rules;
    Ok(ObjectiveBreakdown::new(
        satisfaction,
        rules.unassigned_flight_penalty * unassigned_flights as f64,
        rules.missed_day_off_penalty * roster.missed_preassigned.len() as f64,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MaxConsecutiveDuties { day: u32, run: u32 },
    FlightTimeExceeded { minutes: u32 },
    InsufficientDaysOff { days_off: u32, required: u32 },
    InsufficientRest { before: PairingId, after: PairingId, gap_minutes: i64 },
    PreassignedDayWorked { day: u32 },
    OverlappingActivities { day: u32 },
    OutsideHorizon { day: u32 },
    UnknownPairing { pairing: PairingId },
    BaseMismatch { pairing: PairingId },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::MaxConsecutiveDuties { .. } => "max_consecutive_duties",
            Violation::FlightTimeExceeded { .. } => "flight_time_exceeded",
            Violation::InsufficientDaysOff { .. } => "insufficient_days_off",
            Violation::InsufficientRest { .. } => "insufficient_rest",
            Violation::PreassignedDayWorked { .. } => "preassigned_day_worked",
            Violation::OverlappingActivities { .. } => "overlapping_activities",
            Violation::OutsideHorizon { .. } => "outside_horizon",
            Violation::UnknownPairing { .. } => "unknown_pairing",
            Violation::BaseMismatch { .. } => "base_mismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MaxConsecutiveDuties { day, run } => {
                write!(f, "{} consecutive duties ending day {day}", run)
            }
            Violation::FlightTimeExceeded { minutes } => {
                write!(f, "flight time {minutes} min exceeds the limit")
            }
            Violation::InsufficientDaysOff { days_off, required } => {
                write!(f, "{days_off} days off, {required} required")
            }
            Violation::InsufficientRest { before, after, gap_minutes } => {
                write!(f, "{gap_minutes} min rest between {before} and {after}")
            }
            Violation::PreassignedDayWorked { day } => write!(f, "works preassigned day off {day}"),
            Violation::OverlappingActivities { day } => write!(f, "activities overlap on day {day}"),
            Violation::OutsideHorizon { day } => write!(f, "activity on day {day} outside horizon"),
            Violation::UnknownPairing { pairing } => write!(f, "unknown pairing {pairing}"),
            Violation::BaseMismatch { pairing } => write!(f, "pairing {pairing} at another base"),
        }?;
        write!(f, " [{}]", self.name())
    }
}

/// Checks one schedule against the rostering rules. Days that are neither
/// inside a pairing span nor explicitly scheduled count as days off.
pub fn check_schedule(
    instance: &Instance,
    pilot: &Pilot,
    schedule: &Schedule,
    rules: &RuleParams,
) -> Vec<Violation> {
    let horizon = instance.horizon_days;
    let mut out = Vec::new();
    let mut occupied = vec![0u8; horizon as usize + 2];
    let mut working = vec![false; horizon as usize + 2];
    let mut duty = vec![false; horizon as usize + 2];
    let mut pairings: Vec<&Pairing> = Vec::new();
    let mut flight_minutes = 0u32;

    for a in &schedule.activities {
        let days = match *a {
            Activity::Pairing(id) => match instance.pairing(id) {
                Some(w) => {
                    if w.base != pilot.base {
                        out.push(Violation::BaseMismatch { pairing: id });
                    }
                    flight_minutes += w.work_minutes;
                    pairings.push(w);
                    for d in w.duty_days.iter() {
                        if (*d as usize) < duty.len() {
                            duty[*d as usize] = true;
                        }
                    }
                    w.span_days().collect::<Vec<_>>()
                }
                None => {
                    out.push(Violation::UnknownPairing { pairing: id });
                    continue;
                }
            },
            _ => a.covered_days(instance),
        };
        for d in days {
            if d < 1 || d > horizon {
                out.push(Violation::OutsideHorizon { day: d });
                continue;
            }
            if matches!(a, Activity::Pairing(_)) {
                working[d as usize] = true;
            }
            occupied[d as usize] = occupied[d as usize].saturating_add(1);
        }
    }

    // Two pairings may share the day one ends and the next starts.
    pairings.sort_by_key(|w| (w.start_minute, w.id));
    let mut shared_days = BTreeSet::new();
    for pair in pairings.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let gap = b.start_minute as i64 - a.end_minute as i64;
        if gap < rules.min_rest_minutes() as i64 {
            out.push(Violation::InsufficientRest { before: a.id, after: b.id, gap_minutes: gap });
        }
        if gap >= 0 && a.end_day() == b.start_day() {
            shared_days.insert(a.end_day());
        }
    }
    for d in 1..=horizon {
        let limit = if shared_days.contains(&d) { 2 } else { 1 };
        if occupied[d as usize] > limit {
            out.push(Violation::OverlappingActivities { day: d });
        }
    }

    if flight_minutes > rules.max_flight_minutes() {
        out.push(Violation::FlightTimeExceeded { minutes: flight_minutes });
    }

    let days_off = (1..=horizon).filter(|&d| !working[d as usize]).count() as u32;
    if days_off < rules.min_days_off {
        out.push(Violation::InsufficientDaysOff { days_off, required: rules.min_days_off });
    }

    // Duty days accumulate until a day off; non-duty days inside a pairing
    // span neither count nor reset the run.
    let mut run = 0u32;
    let mut reported = false;
    for d in 1..=horizon {
        if !working[d as usize] {
            run = 0;
            reported = false;
        } else if duty[d as usize] {
            run += 1;
            if run > rules.max_consecutive_duties && !reported {
                out.push(Violation::MaxConsecutiveDuties { day: d, run });
                reported = true;
            }
        }
    }

    for &q in &pilot.preassigned_days_off {
        if q >= 1 && q <= horizon && working[q as usize] {
            out.push(Violation::PreassignedDayWorked { day: q });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RosterIssue {
    MissingPilot { pilot: PilotId },
    DuplicatePilot { pilot: PilotId },
    UnknownPilot { pilot: PilotId },
    UnknownPairing { pairing: PairingId },
    PairingCoveredTwice { pairing: PairingId },
    PairingNotAccounted { pairing: PairingId },
    UnassignedButScheduled { pairing: PairingId },
    MissedPreassignedMismatch { pilot: PilotId, day: u32 },
}

impl fmt::Display for RosterIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RosterIssue::MissingPilot { pilot } => write!(f, "pilot {pilot} has no schedule"),
            RosterIssue::DuplicatePilot { pilot } => write!(f, "pilot {pilot} appears twice"),
            RosterIssue::UnknownPilot { pilot } => write!(f, "unknown pilot {pilot}"),
            RosterIssue::UnknownPairing { pairing } => write!(f, "unknown pairing {pairing}"),
            RosterIssue::PairingCoveredTwice { pairing } => {
                write!(f, "pairing {pairing} assigned more than once")
            }
            RosterIssue::PairingNotAccounted { pairing } => {
                write!(f, "pairing {pairing} neither assigned nor listed unassigned")
            }
            RosterIssue::UnassignedButScheduled { pairing } => {
                write!(f, "pairing {pairing} listed unassigned but scheduled")
            }
            RosterIssue::MissedPreassignedMismatch { pilot, day } => {
                write!(f, "missed preassigned day {day} of {pilot} is inconsistent")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RosterReport {
    pub structural: Vec<RosterIssue>,
    pub violations: BTreeMap<PilotId, Vec<Violation>>,
}

impl RosterReport {
    pub fn coverage_ok(&self) -> bool {
        self.structural.is_empty()
    }

    pub fn is_feasible(&self) -> bool {
        self.structural.is_empty() && self.violations.values().all(Vec::is_empty)
    }

    pub fn violation_count(&self) -> usize {
        self.structural.len() + self.violations.values().map(Vec::len).sum::<usize>()
    }
}

impl fmt::Display for RosterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.structural {
            writeln!(f, "roster: {issue}")?;
        }
        for (k, vs) in &self.violations {
            for v in vs {
                writeln!(f, "{k}: {v}")?;
            }
        }
        if self.is_feasible() {
            writeln!(f, "feasible")?;
        }
        Ok(())
    }
}

pub fn check_roster(instance: &Instance, roster: &Roster) -> RosterReport {
    let mut report = RosterReport::default();
    let mut seen_pilots = BTreeSet::new();
    let mut covered = BTreeSet::new();
    for s in &roster.schedules {
        let Some(pilot) = instance.pilot(s.pilot) else {
            report.structural.push(RosterIssue::UnknownPilot { pilot: s.pilot });
            continue;
        };
        if !seen_pilots.insert(s.pilot) {
            report.structural.push(RosterIssue::DuplicatePilot { pilot: s.pilot });
            continue;
        }
        for w in s.pairings() {
            if instance.pairing(w).is_none() {
                report.structural.push(RosterIssue::UnknownPairing { pairing: w });
            } else if !covered.insert(w) {
                report.structural.push(RosterIssue::PairingCoveredTwice { pairing: w });
            }
        }
        let v = check_schedule(instance, pilot, s, &instance.rules);
        if !v.is_empty() {
            report.violations.insert(s.pilot, v);
        }
        let empty = s.is_empty();
        for &q in &pilot.preassigned_days_off {
            if empty != roster.missed_preassigned.contains(&(s.pilot, q)) {
                report
                    .structural
                    .push(RosterIssue::MissedPreassignedMismatch { pilot: s.pilot, day: q });
            }
        }
    }
    for &(k, q) in &roster.missed_preassigned {
        let listed = instance.pilot(k).is_some_and(|p| p.preassigned_days_off.contains(&q));
        if !listed {
            report.structural.push(RosterIssue::MissedPreassignedMismatch { pilot: k, day: q });
        }
    }
    for k in &instance.pilots {
        if !seen_pilots.contains(&k.id) {
            report.structural.push(RosterIssue::MissingPilot { pilot: k.id });
        }
    }
    for &w in &roster.unassigned_pairings {
        if instance.pairing(w).is_none() {
            report.structural.push(RosterIssue::UnknownPairing { pairing: w });
        } else if covered.contains(&w) {
            report.structural.push(RosterIssue::UnassignedButScheduled { pairing: w });
        }
    }
    for w in &instance.pairings {
        if !covered.contains(&w.id) && !roster.unassigned_pairings.contains(&w.id) {
            report.structural.push(RosterIssue::PairingNotAccounted { pairing: w.id });
        }
    }
    report
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn pilot_with_prefs() -> Pilot {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preferred_flights.push(FlightPreference { flight: FlightId(10), weight: 30.0 });
        k.preferred_flights.push(FlightPreference { flight: FlightId(20), weight: 10.0 });
        k.preferred_flights.push(FlightPreference { flight: FlightId(30), weight: 15.0 });
        k.preferred_vacations.push(VacationPreference { start_day: 5, weight: 20.0 });
        k
    }

    #[test]
    fn satisfaction_examples() {
        let k = pilot_with_prefs();
        let inst = instance(
            10,
            vec![k.clone()],
            vec![pairing(1, 1, 1, 8, 2), pairing(2, 2, 1, 8, 2), pairing(3, 3, 1, 8, 2)],
            small_rules(),
        );
        let empty = Schedule::empty(k.id);
        assert_eq!(schedule_satisfaction(&inst, &k, &empty).unwrap(), 0.0);

        let s = Schedule {
            pilot: k.id,
            activities: vec![Activity::Pairing(PairingId(1)), Activity::Vacation(5)],
        };
        assert_eq!(schedule_satisfaction(&inst, &k, &s).unwrap(), 50.0);

        let s = Schedule {
            pilot: k.id,
            activities: vec![
                Activity::Pairing(PairingId(2)),
                Activity::Pairing(PairingId(3)),
                Activity::Vacation(6),
            ],
        };
        assert_eq!(schedule_satisfaction(&inst, &k, &s).unwrap(), 25.0);

        let other = Schedule::empty(PilotId(9));
        assert!(matches!(
            schedule_satisfaction(&inst, &k, &other),
            Err(ModelError::PilotMismatch { .. })
        ));
    }

    #[test]
    fn objective_penalties() {
        let mut w1 = pairing(1, 1, 3, 8, 1);
        let w2 = pairing(2, 5, 4, 8, 1);
        assert_eq!((w1.n_flights(), w2.n_flights()), (3, 4));
        w1.base = "B".into();
        let inst = instance(10, vec![Pilot::new(PilotId(0), "B")], vec![w1, w2], small_rules());
        let roster = Roster {
            schedules: vec![Schedule { pilot: PilotId(0), activities: vec![Activity::DayOff(1)] }],
            unassigned_pairings: [PairingId(1), PairingId(2)].into(),
            missed_preassigned: BTreeSet::new(),
        };
        let obj = roster_objective(&inst, &roster).unwrap();
        assert_eq!(obj.objective, -700.0);

        let b = ObjectiveBreakdown::new(500.0, 200.0, 1_000_000.0);
        assert_eq!(b.objective, -999_700.0);
        let b = ObjectiveBreakdown::new(1234.0, 0.0, 0.0);
        assert_eq!(b.objective, 1234.0);
    }

    #[test]
    fn objective_rejects_double_coverage() {
        let inst = instance(
            10,
            vec![Pilot::new(PilotId(0), "B"), Pilot::new(PilotId(1), "B")],
            vec![pairing(1, 1, 1, 8, 2)],
            small_rules(),
        );
        let s = |k| Schedule { pilot: PilotId(k), activities: vec![Activity::Pairing(PairingId(1))] };
        let roster = Roster { schedules: vec![s(0), s(1)], ..Default::default() };
        assert_eq!(
            roster_objective(&inst, &roster),
            Err(ModelError::PairingCoveredTwice(PairingId(1)))
        );
        let report = check_roster(&inst, &roster);
        assert!(report
            .structural
            .contains(&RosterIssue::PairingCoveredTwice { pairing: PairingId(1) }));
        let roster = Roster { schedules: vec![Schedule::empty(PilotId(7))], ..Default::default() };
        assert_eq!(roster_objective(&inst, &roster), Err(ModelError::UnknownPilot(PilotId(7))));
    }

    #[test]
    fn seven_consecutive_duties() {
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(14, vec![k.clone()], vec![pairing(1, 1, 7, 8, 1)], small_rules());
        let s = Schedule { pilot: k.id, activities: vec![Activity::Pairing(PairingId(1))] };
        let v = check_schedule(&inst, &k, &s, &inst.rules);
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["max_consecutive_duties"]);
    }

    #[test]
    fn flight_time_limit() {
        let k = Pilot::new(PilotId(0), "B");
        // 5 days x 17 h of block = 85 h; plus 60 min credit = 86 h.
        let mut w = pairing(1, 1, 5, 4, 17);
        w.end_minute = w.flights.last().unwrap().arrival_minute + 15;
        let inst = instance(20, vec![k.clone()], vec![w], small_rules());
        let s = Schedule { pilot: k.id, activities: vec![Activity::Pairing(PairingId(1))] };
        let v = check_schedule(&inst, &k, &s, &inst.rules);
        assert_eq!(v, vec![Violation::FlightTimeExceeded { minutes: 86 * 60 }]);
    }

    #[test]
    fn insufficient_rest() {
        let k = Pilot::new(PilotId(0), "B");
        // first ends 08:00+2h+15m = 10:15, second starts next day 21:15 - 45m
        let a = pairing(1, 1, 1, 8, 2);
        let mut b = pairing(2, 1, 1, 22, 1);
        // move b so that the gap is exactly 11 h
        let shift = (a.end_minute + 11 * 60) as i64 - b.start_minute as i64;
        for f in &mut b.flights {
            f.departure_minute = (f.departure_minute as i64 + shift) as u32;
            f.arrival_minute = (f.arrival_minute as i64 + shift) as u32;
        }
        b.start_minute = (b.start_minute as i64 + shift) as u32;
        b.end_minute = (b.end_minute as i64 + shift) as u32;
        b.duty_days = b.flights.iter().map(|f| day_of_minute(f.departure_minute)).collect();
        let inst = instance(10, vec![k.clone()], vec![a, b], small_rules());
        let s = Schedule {
            pilot: k.id,
            activities: vec![Activity::Pairing(PairingId(1)), Activity::Pairing(PairingId(2))],
        };
        let v = check_schedule(&inst, &k, &s, &inst.rules);
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["insufficient_rest"]);
    }

    #[test]
    fn roster_structure_checks() {
        let inst = instance(
            10,
            vec![Pilot::new(PilotId(0), "B"), Pilot::new(PilotId(1), "B")],
            vec![pairing(1, 1, 2, 8, 2)],
            small_rules(),
        );
        let roster = Roster {
            schedules: vec![Schedule {
                pilot: PilotId(0),
                activities: vec![Activity::Pairing(PairingId(1))],
            }],
            ..Default::default()
        };
        let report = check_roster(&inst, &roster);
        assert_eq!(report.structural, vec![RosterIssue::MissingPilot { pilot: PilotId(1) }]);
        assert!(!report.is_feasible());
    }

    #[test]
    fn relaxing_rules_never_adds_violations() {
        let k = Pilot::new(PilotId(0), "B");
        let inst = instance(
            14,
            vec![k.clone()],
            vec![pairing(1, 1, 4, 8, 9), pairing(2, 5, 4, 8, 9)],
            RuleParams { min_days_off: 8, max_flight_hours: 60, ..RuleParams::default() },
        );
        let s = Schedule {
            pilot: k.id,
            activities: vec![Activity::Pairing(PairingId(1)), Activity::Pairing(PairingId(2))],
        };
        let strict = check_schedule(&inst, &k, &s, &inst.rules);
        assert!(strict.len() >= 3);
        let relaxed = RuleParams {
            min_days_off: 6,
            max_flight_hours: 100,
            max_consecutive_duties: 8,
            min_rest_hours: 6,
            ..inst.rules.clone()
        };
        let loose = check_schedule(&inst, &k, &s, &relaxed);
        assert!(loose.len() < strict.len());
        assert!(loose.iter().all(|v| strict.iter().any(|s| s.name() == v.name())));
    }
}
