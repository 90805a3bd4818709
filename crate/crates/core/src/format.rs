//! Versioned JSON documents for instances, rosters and policies.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    day_of_minute, Activity, Flight, FlightPreference, Instance, ObjectiveBreakdown, Pairing,
    PairingId, Pilot, PilotId, Roster, RuleParams, Schedule, VacationPreference,
};

pub const INSTANCE_KIND: &str = "crewroster-instance";
pub const ROSTER_KIND: &str = "crewroster-roster";
pub const POLICY_KIND: &str = "crewroster-policy";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn parse_doc<T: DeserializeOwned>(text: &str, kind: &'static str) -> Result<T> {
    let header: Header = from_str_with_path(text)?;
    if header.format != kind {
        return Err(Error::DocumentKind { expected: kind, found: header.format });
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Version { kind, found: header.version, expected: FORMAT_VERSION });
    }
    from_str_with_path(text)
}

fn from_str_with_path<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })
}

fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairingDoc {
    id: PairingId,
    base: String,
    start_minute: u32,
    end_minute: u32,
    work_minutes: u32,
    flights: Vec<Flight>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PilotDoc {
    id: PilotId,
    base: String,
    #[serde(default)]
    preferred_flights: Vec<FlightPreference>,
    #[serde(default)]
    preferred_vacations: Vec<VacationPreference>,
    #[serde(default)]
    preassigned_days_off: BTreeSet<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: String,
    version: u32,
    horizon_days: u32,
    bases: Vec<String>,
    rules: RuleParams,
    pilots: Vec<PilotDoc>,
    pairings: Vec<PairingDoc>,
}

pub fn write_instance(instance: &Instance) -> String {
    let doc = InstanceDoc {
        format: INSTANCE_KIND.into(),
        version: FORMAT_VERSION,
        horizon_days: instance.horizon_days,
        bases: instance.bases.clone(),
        rules: instance.rules.clone(),
        pilots: instance
            .pilots
            .iter()
            .map(|k| PilotDoc {
                id: k.id,
                base: k.base.clone(),
                preferred_flights: k.preferred_flights.clone(),
                preferred_vacations: k.preferred_vacations.clone(),
                preassigned_days_off: k.preassigned_days_off.clone(),
            })
            .collect(),
        pairings: instance
            .pairings
            .iter()
            .map(|w| PairingDoc {
                id: w.id,
                base: w.base.clone(),
                start_minute: w.start_minute,
                end_minute: w.end_minute,
                work_minutes: w.work_minutes,
                flights: w.flights.clone(),
            })
            .collect(),
    };
    to_pretty(&doc)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = parse_doc(text, INSTANCE_KIND)?;
    let pairings = doc
        .pairings
        .into_iter()
        .map(|p| Pairing {
            duty_days: p.flights.iter().map(|f| day_of_minute(f.departure_minute)).collect(),
            id: p.id,
            base: p.base,
            flights: p.flights,
            start_minute: p.start_minute,
            end_minute: p.end_minute,
            work_minutes: p.work_minutes,
        })
        .collect();
    let pilots = doc
        .pilots
        .into_iter()
        .map(|k| Pilot {
            id: k.id,
            base: k.base,
            preferred_flights: k.preferred_flights,
            preferred_vacations: k.preferred_vacations,
            preassigned_days_off: k.preassigned_days_off,
        })
        .collect();
    Ok(Instance::new(doc.horizon_days, doc.bases, pilots, pairings, doc.rules)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MissedDoc {
    pilot: PilotId,
    day: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RosterDoc {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<ObjectiveBreakdown>,
    schedules: Vec<Schedule>,
    unassigned_pairings: BTreeSet<PairingId>,
    missed_preassigned: Vec<MissedDoc>,
}

/// Serializes a roster; the objective breakdown, when given, is informational.
pub fn write_roster(roster: &Roster, objective: Option<&ObjectiveBreakdown>) -> String {
    let doc = RosterDoc {
        format: ROSTER_KIND.into(),
        version: FORMAT_VERSION,
        objective: objective.copied(),
        schedules: roster.schedules.clone(),
        unassigned_pairings: roster.unassigned_pairings.clone(),
        missed_preassigned: roster
            .missed_preassigned
            .iter()
            .map(|&(pilot, day)| MissedDoc { pilot, day })
            .collect(),
    };
    to_pretty(&doc)
}

/// Parses a roster and checks that every id it mentions exists in `instance`.
pub fn parse_roster(text: &str, instance: &Instance) -> Result<Roster> {
    let doc: RosterDoc = parse_doc(text, ROSTER_KIND)?;
    let roster = Roster {
        schedules: doc.schedules,
        unassigned_pairings: doc.unassigned_pairings,
        missed_preassigned: doc.missed_preassigned.iter().map(|m| (m.pilot, m.day)).collect(),
    };
    check_references(&roster, instance)?;
    Ok(roster)
}

/// Objective breakdown stored alongside a roster, if any.
pub fn roster_reported_objective(text: &str) -> Result<Option<ObjectiveBreakdown>> {
    let doc: RosterDoc = parse_doc(text, ROSTER_KIND)?;
    Ok(doc.objective)
}

fn check_references(roster: &Roster, instance: &Instance) -> Result<()> {
    let known_pairing = |id: PairingId, at: &str| {
        if instance.pairing(id).is_none() {
            Err(Error::Reference(format!("{at} references unknown pairing {id}")))
        } else {
            Ok(())
        }
    };
    for s in &roster.schedules {
        if instance.pilot(s.pilot).is_none() {
            return Err(Error::Reference(format!("schedule for unknown pilot {}", s.pilot)));
        }
        for a in &s.activities {
            match *a {
                Activity::Pairing(id) => known_pairing(id, &format!("schedule of {}", s.pilot))?,
                Activity::DayOff(d) | Activity::Vacation(d) => {
                    if d == 0 || d > instance.horizon_days {
                        return Err(Error::Reference(format!(
                            "schedule of {} references day {d} outside the horizon",
                            s.pilot
                        )));
                    }
                }
            }
        }
    }
    for &w in &roster.unassigned_pairings {
        known_pairing(w, "unassigned set")?;
    }
    for &(k, _) in &roster.missed_preassigned {
        if instance.pilot(k).is_none() {
            return Err(Error::Reference(format!("missed day listed for unknown pilot {k}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub format: String,
    pub version: u32,
    pub architecture: Vec<usize>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
}

pub fn write_policy(architecture: &[usize], weights: &[f64], fitness: Option<f64>) -> String {
    to_pretty(&PolicyDoc {
        format: POLICY_KIND.into(),
        version: FORMAT_VERSION,
        architecture: architecture.to_vec(),
        weights: weights.to_vec(),
        fitness,
    })
}

pub fn parse_policy(text: &str) -> Result<PolicyDoc> {
    parse_doc(text, POLICY_KIND)
}

/// Solver parameters as a bare JSON object (no document header).
pub fn parse_params(text: &str) -> Result<crate::bnp::BnpParams> {
    let params: crate::bnp::BnpParams = from_str_with_path(text)?;
    params.validate()?;
    Ok(params)
}

pub fn write_params(params: &crate::bnp::BnpParams) -> String {
    to_pretty(params)
}
