//! Monthly pilot rostering: per-pilot resource-constrained pricing networks,
//! a column-generation master with heuristic depth-first branching, an
//! overlapping-window decomposition and a learned sequential-assignment
//! warm start.

pub mod bnp;
pub mod error;
pub mod format;
pub mod generator;
pub mod lp;
pub mod master;
pub mod metrics;
pub mod model;
pub mod network;
pub mod rcspp;
pub mod runner;
pub mod seqasg;
pub mod windowing;

pub use error::{Error, Result};
pub use model::{
    check_roster, check_schedule, roster_objective, schedule_satisfaction, Activity, Flight,
    FlightId, Instance, ObjectiveBreakdown, Pairing, PairingId, Pilot, PilotId, Roster,
    RosterReport, RuleParams, Schedule, Violation,
};
