//! Synthetic instance and preference-scenario generation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    day_of_minute, day_start_minute, Flight, FlightId, FlightPreference, Instance, Pairing,
    PairingId, Pilot, PilotId, RuleParams, VacationPreference, VACATION_DAYS,
};

pub const BRIEFING_MINUTES: u32 = 45;
pub const DEBRIEFING_MINUTES: u32 = 15;
const TURN_MINUTES: u32 = 45;
const MAX_DAY_BLOCK_MINUTES: u32 = 660;
const MIN_LEG_MINUTES: u32 = 30;
/// Pairings of at least this many days count as long.
pub const LONG_PAIRING_DAYS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotCount {
    Fixed(u32),
    /// Size the crew so the average monthly flight time per pilot is this many hours.
    TargetHours(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub horizon_days: u32,
    pub n_bases: u32,
    pub n_airports: u32,
    pub n_pairings: u32,
    pub min_pairing_days: u32,
    pub max_pairing_days: u32,
    pub long_pairing_fraction: f64,
    pub total_flight_minutes: u64,
    pub pilots: PilotCount,
    #[serde(default)]
    pub rules: RuleParams,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            horizon_days: 30,
            n_bases: 3,
            n_airports: 12,
            n_pairings: 250,
            min_pairing_days: 1,
            max_pairing_days: 5,
            long_pairing_fraction: 0.3,
            total_flight_minutes: 234_000,
            pilots: PilotCount::Fixed(60),
            rules: RuleParams::default(),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Generation(m.to_string()));
        if self.n_bases == 0 || self.n_bases > self.n_airports {
            return err("need 1 <= n_bases <= n_airports");
        }
        if self.n_pairings == 0 {
            return err("n_pairings must be positive");
        }
        if !(0.0..=1.0).contains(&self.long_pairing_fraction) {
            return err("long_pairing_fraction must lie in [0, 1]");
        }
        if self.min_pairing_days == 0 || self.min_pairing_days > self.max_pairing_days {
            return err("need 1 <= min_pairing_days <= max_pairing_days");
        }
        if self.max_pairing_days > self.horizon_days {
            return err("pairings longer than the horizon");
        }
        if self.max_pairing_days > 1 && self.n_airports == self.n_bases {
            return err("multi-day pairings need at least one non-base airport");
        }
        if self.n_airports < 2 {
            return err("need at least two airports");
        }
        let n_long = self.n_long();
        if n_long > 0 && self.max_pairing_days < LONG_PAIRING_DAYS {
            return err("long pairings requested but max_pairing_days < 4");
        }
        if n_long < self.n_pairings as usize && self.min_pairing_days >= LONG_PAIRING_DAYS {
            return err("short pairings requested but min_pairing_days >= 4");
        }
        if let PilotCount::TargetHours(h) = self.pilots {
            if !(h > 0.0) {
                return err("target hours must be positive");
            }
        }
        self.rules.validate().map_err(|e| Error::Generation(e.to_string()))?;
        Ok(())
    }

    fn n_long(&self) -> usize {
        (self.long_pairing_fraction * self.n_pairings as f64).round() as usize
    }
}

/// Crew size giving an average monthly flight time of `target_hours`, with
/// half-way cases rounded to even.
pub fn pilots_for_target_hours(total_flight_minutes: u64, target_hours: f64) -> Result<u32> {
    if !(target_hours > 0.0) {
        return Err(Error::Parameter("target_hours must be positive".into()));
    }
    let ratio = total_flight_minutes as f64 / (target_hours * 60.0);
    Ok(ratio.round_ties_even() as u32)
}

pub fn airport_code(i: u32) -> String {
    format!("A{i:02}")
}

struct PairingDraft {
    base: u32,
    first_day: u32,
    days: u32,
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_pairings as usize;
    let n_long = spec.n_long();

    let short_max = spec.max_pairing_days.min(LONG_PAIRING_DAYS - 1);
    let long_min = spec.min_pairing_days.max(LONG_PAIRING_DAYS);
    let mut lengths: Vec<u32> = (0..n)
        .map(|i| {
            if i < n_long {
                rng.gen_range(long_min..=spec.max_pairing_days)
            } else {
                rng.gen_range(spec.min_pairing_days..=short_max)
            }
        })
        .collect();
    lengths.shuffle(&mut rng);

    let drafts: Vec<PairingDraft> = lengths
        .iter()
        .map(|&days| PairingDraft {
            base: rng.gen_range(0..spec.n_bases),
            first_day: rng.gen_range(1..=spec.horizon_days - days + 1),
            days,
        })
        .collect();

    let total_days: u32 = drafts.iter().map(|d| d.days).sum();
    let mean_day = spec.total_flight_minutes as f64 / total_days as f64;
    if mean_day > 0.9 * MAX_DAY_BLOCK_MINUTES as f64 {
        return Err(Error::Generation(format!(
            "{} flight minutes cannot fit into {} duty days",
            spec.total_flight_minutes, total_days
        )));
    }
    // Per-duty-day block minutes, jittered then rescaled to the target.
    let jitter: Vec<f64> = (0..total_days).map(|_| rng.gen_range(0.6..1.4)).collect();
    let scale = spec.total_flight_minutes as f64 / jitter.iter().sum::<f64>();
    let mut day_minutes: Vec<u32> = jitter
        .iter()
        .map(|j| ((j * scale).round() as u32).clamp(2 * MIN_LEG_MINUTES, MAX_DAY_BLOCK_MINUTES))
        .collect();
    rebalance(&mut day_minutes, spec.total_flight_minutes);

    let mut pairings = Vec::with_capacity(n);
    let mut cursor = 0usize;
    let mut next_flight = 0u32;
    for draft in &drafts {
        let minutes = &day_minutes[cursor..cursor + draft.days as usize];
        cursor += draft.days as usize;
        pairings.push(build_pairing(spec, &mut rng, draft, minutes, &mut next_flight));
    }
    pairings.sort_by_key(|w: &Pairing| (w.start_minute, w.base.clone(), w.end_minute));
    // Renumber pairings and flights chronologically.
    let mut fid = 0u32;
    for (i, w) in pairings.iter_mut().enumerate() {
        w.id = PairingId(i as u32);
        for f in &mut w.flights {
            f.id = FlightId(fid);
            fid += 1;
        }
    }

    let bases: Vec<String> = (0..spec.n_bases).map(airport_code).collect();
    let total: u64 = pairings.iter().map(|w| w.flight_minutes() as u64).sum();
    let n_pilots = match spec.pilots {
        PilotCount::Fixed(k) => k,
        PilotCount::TargetHours(h) => pilots_for_target_hours(total, h)?,
    };
    let pilots = allocate_pilots(&bases, &pairings, n_pilots);
    Instance::new(spec.horizon_days, bases, pilots, pairings, spec.rules.clone())
        .map_err(|e| Error::Generation(e.to_string()))
}

/// Nudges individual day totals until they sum exactly to `target`, while
/// staying inside the per-day bounds.
fn rebalance(day_minutes: &mut [u32], target: u64) {
    let mut sum: i64 = day_minutes.iter().map(|&m| m as i64).sum();
    let target = target as i64;
    let mut i = 0usize;
    let len = day_minutes.len();
    let mut stalled = 0usize;
    while sum != target && stalled < len {
        let m = &mut day_minutes[i % len];
        let room = if sum < target {
            (MAX_DAY_BLOCK_MINUTES - *m) as i64
        } else {
            -((*m - 2 * MIN_LEG_MINUTES) as i64)
        };
        let step = (target - sum).clamp(room.min(0), room.max(0));
        if step == 0 {
            stalled += 1;
        } else {
            stalled = 0;
            *m = (*m as i64 + step) as u32;
            sum += step;
        }
        i += 1;
    }
}

fn build_pairing(
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    draft: &PairingDraft,
    day_minutes: &[u32],
    next_flight: &mut u32,
) -> Pairing {
    let base = draft.base;
    let outstation = |rng: &mut ChaCha8Rng, avoid: u32| loop {
        let a = rng.gen_range(0..spec.n_airports);
        if a != avoid && a >= spec.n_bases {
            return a;
        }
    };
    let mut stops = vec![base];
    for _ in 1..draft.days {
        let prev = *stops.last().unwrap();
        stops.push(outstation(rng, prev));
    }
    stops.push(base);

    let mut flights = Vec::new();
    for (i, &block) in day_minutes.iter().enumerate() {
        let day = draft.first_day + i as u32;
        let (from, to) = (stops[i], stops[i + 1]);
        let mut legs = ((block as f64 / 180.0).round() as u32).clamp(1, 4);
        if from == to {
            legs = legs.max(2);
        }
        let legs = legs.min(block / MIN_LEG_MINUTES).max(1);
        let mut route = vec![from];
        for l in 1..legs {
            let cur = *route.last().unwrap();
            let a = loop {
                let a = rng.gen_range(0..spec.n_airports);
                if a != cur && !(l + 1 == legs && a == to) {
                    break a;
                }
            };
            route.push(a);
        }
        route.push(to);

        let shares: Vec<f64> = (0..legs).map(|_| rng.gen_range(0.7..1.3)).collect();
        let total_share: f64 = shares.iter().sum();
        let spare = block - legs * MIN_LEG_MINUTES;
        let mut durations: Vec<u32> = shares
            .iter()
            .map(|s| MIN_LEG_MINUTES + (spare as f64 * s / total_share).floor() as u32)
            .collect();
        let assigned: u32 = durations.iter().sum();
        *durations.last_mut().unwrap() += block - assigned;

        let mut t = day_start_minute(day) + 360 + rng.gen_range(0..=180);
        for (l, dur) in durations.into_iter().enumerate() {
            flights.push(Flight {
                id: FlightId(*next_flight),
                departure_minute: t,
                arrival_minute: t + dur,
                origin: airport_code(route[l]),
                destination: airport_code(route[l + 1]),
            });
            *next_flight += 1;
            t += dur + TURN_MINUTES;
        }
    }
    let flown: u32 = flights.iter().map(Flight::duration_minutes).sum();
    Pairing {
        id: PairingId(0),
        base: airport_code(base),
        start_minute: flights[0].departure_minute - BRIEFING_MINUTES,
        end_minute: flights.last().unwrap().arrival_minute + DEBRIEFING_MINUTES,
        duty_days: flights.iter().map(|f| day_of_minute(f.departure_minute)).collect(),
        work_minutes: flown + BRIEFING_MINUTES + DEBRIEFING_MINUTES,
        flights,
    }
}

/// Splits the crew over bases in proportion to each base's flying, using
/// largest remainders.
fn allocate_pilots(bases: &[String], pairings: &[Pairing], n_pilots: u32) -> Vec<Pilot> {
    let load: Vec<f64> = bases
        .iter()
        .map(|b| {
            pairings.iter().filter(|w| &w.base == b).map(|w| w.flight_minutes() as f64).sum()
        })
        .collect();
    let total: f64 = load.iter().sum::<f64>().max(1.0);
    let exact: Vec<f64> = load.iter().map(|l| l / total * n_pilots as f64).collect();
    let mut counts: Vec<u32> = exact.iter().map(|e| e.floor() as u32).collect();
    let mut order: Vec<usize> = (0..bases.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = n_pilots - counts.iter().sum::<u32>();
    for &i in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    let mut pilots = Vec::new();
    for (b, &c) in bases.iter().zip(&counts) {
        for _ in 0..c {
            pilots.push(Pilot::new(PilotId(pilots.len() as u32), b.clone()));
        }
    }
    pilots
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub preference_budget: f64,
    pub n_preferred_flights_per_pilot: u32,
    pub n_preferred_vacations_per_pilot: u32,
    pub preassigned_off_probability: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            preference_budget: crate::model::DEFAULT_PREFERENCE_BUDGET,
            n_preferred_flights_per_pilot: 8,
            n_preferred_vacations_per_pilot: 1,
            preassigned_off_probability: 0.5,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.preassigned_off_probability) {
            return Err(Error::Generation("probability must lie in [0, 1]".into()));
        }
        if !(self.preference_budget >= 0.0) {
            return Err(Error::Generation("preference budget must be non-negative".into()));
        }
        Ok(())
    }
}

/// Draws preferences and preassigned days off for every pilot, replacing any
/// that are already present.
pub fn generate_scenario(instance: &Instance, spec: &ScenarioSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5ce7_a210_0f1e_d5e5);
    let horizon = instance.horizon_days;
    // Shared popularity makes pilots compete for the same trips.
    let popularity = LogNormal::new(0.0, 1.0).expect("valid lognormal");
    let appeal: Vec<f64> = instance.pairings.iter().map(|_| popularity.sample(&mut rng)).collect();

    let mut pilots = Vec::with_capacity(instance.pilots.len());
    for k in &instance.pilots {
        let mut pilot = Pilot::new(k.id, k.base.clone());
        let candidates: Vec<usize> =
            (0..instance.pairings.len()).filter(|&i| instance.pairings[i].base == k.base).collect();

        let mut flights = BTreeSet::new();
        let wanted = spec.n_preferred_flights_per_pilot as usize;
        let available: usize = candidates.iter().map(|&i| instance.pairings[i].n_flights()).sum();
        let mut attempts = 0;
        while flights.len() < wanted.min(available) && attempts < 50 * wanted.max(1) {
            attempts += 1;
            let Ok(&i) = candidates.choose_weighted(&mut rng, |&i| appeal[i]) else { break };
            let w = &instance.pairings[i];
            flights.insert(w.flights[rng.gen_range(0..w.n_flights())].id);
        }

        let mut vacations = BTreeSet::new();
        if horizon >= VACATION_DAYS {
            let last_start = horizon - VACATION_DAYS + 1;
            let wanted = (spec.n_preferred_vacations_per_pilot).min(last_start) as usize;
            while vacations.len() < wanted {
                vacations.insert(rng.gen_range(1..=last_start));
            }
        }

        let raw: Vec<f64> =
            (0..flights.len() + vacations.len()).map(|_| rng.gen_range(1.0..10.0)).collect();
        let raw_total: f64 = raw.iter().sum();
        let weight = |i: usize| {
            if raw_total > 0.0 {
                (spec.preference_budget * raw[i] / raw_total).floor()
            } else {
                0.0
            }
        };
        for (i, f) in flights.into_iter().enumerate() {
            pilot.preferred_flights.push(FlightPreference { flight: f, weight: weight(i) });
        }
        let offset = pilot.preferred_flights.len();
        for (i, d) in vacations.into_iter().enumerate() {
            pilot
                .preferred_vacations
                .push(VacationPreference { start_day: d, weight: weight(offset + i) });
        }

        if rng.gen_bool(spec.preassigned_off_probability) {
            let len = rng.gen_range(1..=3u32).min(horizon);
            let start = rng.gen_range(1..=horizon - len + 1);
            pilot.preassigned_days_off = (start..start + len).collect();
        }
        pilots.push(pilot);
    }
    instance.clone().with_pilots(pilots).map_err(|e| Error::Generation(e.to_string()))
}

/// Scenario `i` of a suite: a fresh instance plus fresh preferences.
pub fn generate_suite_member(
    generator: &GeneratorSpec,
    scenario: &ScenarioSpec,
    index: u32,
) -> Result<Instance> {
    let g = GeneratorSpec { seed: generator.seed.wrapping_add(index as u64), ..generator.clone() };
    let s = ScenarioSpec { seed: scenario.seed.wrapping_add(index as u64), ..scenario.clone() };
    generate_scenario(&generate_instance(&g)?, &s)
}

/// Every sixth scenario is held out, giving a 25/5 split over 30 scenarios.
pub fn is_test_scenario(index: u32) -> bool {
    index % 6 == 5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MINUTES_PER_DAY;
    use proptest::prelude::*;

    fn long_fraction(inst: &Instance) -> f64 {
        let long = inst.pairings.iter().filter(|w| w.duration_days() >= LONG_PAIRING_DAYS).count();
        long as f64 / inst.pairings.len() as f64
    }

    #[test]
    fn deterministic() {
        let spec = GeneratorSpec { n_pairings: 60, total_flight_minutes: 56_000, pilots: PilotCount::Fixed(15), ..Default::default() };
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        assert_eq!(a, b);
        let other = generate_instance(&GeneratorSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn industrial_scale_targets() {
        let spec = GeneratorSpec {
            seed: 5,
            horizon_days: 30,
            n_pairings: 1800,
            n_airports: 40,
            long_pairing_fraction: 0.57,
            total_flight_minutes: 1_037_333,
            pilots: PilotCount::TargetHours(60.0),
            ..Default::default()
        };
        let inst = generate_instance(&spec).unwrap();
        let total = inst.total_flight_minutes() as f64;
        assert!((total / 1_037_333.0 - 1.0).abs() <= 0.05, "total {total}");
        let f = long_fraction(&inst);
        assert!((0.47..=0.67).contains(&f), "long fraction {f}");
        let avg_hours = total / 60.0 / inst.pilots.len() as f64;
        assert_eq!(avg_hours.round(), 60.0);
    }

    #[test]
    fn pilot_counts() {
        assert_eq!(pilots_for_target_hours(1_037_333, 60.0).unwrap(), 288);
        assert_eq!(pilots_for_target_hours(1_037_333, 65.0).unwrap(), 266);
        assert_eq!(pilots_for_target_hours(1_037_333, 70.0).unwrap(), 247);
        // Exact half rounds to even.
        assert_eq!(pilots_for_target_hours(150, 1.0).unwrap(), 2);
        assert_eq!(pilots_for_target_hours(210, 1.0).unwrap(), 4);
        assert!(pilots_for_target_hours(100, 0.0).is_err());
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let too_long = GeneratorSpec { horizon_days: 3, ..Default::default() };
        assert!(matches!(generate_instance(&too_long), Err(Error::Generation(_))));
        let too_dense = GeneratorSpec { total_flight_minutes: 50_000_000, ..Default::default() };
        assert!(matches!(generate_instance(&too_dense), Err(Error::Generation(_))));
    }

    fn small() -> Instance {
        let spec = GeneratorSpec { n_pairings: 40, pilots: PilotCount::Fixed(12), total_flight_minutes: 40_000, ..Default::default() };
        generate_instance(&spec).unwrap()
    }

    #[test]
    fn scenario_budget_and_determinism() {
        let inst = small();
        let spec = ScenarioSpec { seed: 3, ..Default::default() };
        let a = generate_scenario(&inst, &spec).unwrap();
        assert_eq!(a, generate_scenario(&inst, &spec).unwrap());
        for k in &a.pilots {
            assert!(k.preference_total() <= spec.preference_budget + 1e-9);
            assert!(k.preassigned_days_off.len() <= 3);
        }
        let zero = generate_scenario(&inst, &ScenarioSpec { preference_budget: 0.0, ..spec.clone() }).unwrap();
        assert!(zero.pilots.iter().all(|k| k.preference_total() == 0.0));
        let none = generate_scenario(&inst, &ScenarioSpec { preassigned_off_probability: 0.0, ..spec }).unwrap();
        assert!(none.pilots.iter().all(|k| k.preassigned_days_off.is_empty()));
    }

    #[test]
    fn split_is_25_5() {
        let test = (0..30).filter(|&i| is_test_scenario(i)).count();
        assert_eq!(test, 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generated_instances_are_valid(seed in 0u64..1000, n in 5u32..80, frac in 0.0f64..1.0) {
            let spec = GeneratorSpec {
                seed,
                n_pairings: n,
                long_pairing_fraction: frac,
                total_flight_minutes: n as u64 * 700,
                pilots: PilotCount::Fixed(8),
                ..Default::default()
            };
            let inst = generate_instance(&spec).unwrap();
            prop_assert!(inst.validate().is_ok());
            prop_assert_eq!(inst.pairings.len(), n as usize);
            for w in &inst.pairings {
                prop_assert!(w.end_minute < inst.horizon_days * MINUTES_PER_DAY);
                prop_assert_eq!(w.work_minutes, w.flight_minutes() + 60);
            }
            let total = inst.total_flight_minutes() as f64;
            prop_assert!((total / spec.total_flight_minutes as f64 - 1.0).abs() <= 0.05);
            let f = long_fraction(&inst);
            prop_assert!((f - frac).abs() <= 0.1 + 0.5 / n as f64);
        }

        #[test]
        fn pilot_count_is_antitone(total in 1u64..5_000_000, h in 1.0f64..100.0, dh in 0.0f64..50.0) {
            let a = pilots_for_target_hours(total, h).unwrap();
            let b = pilots_for_target_hours(total, h + dh).unwrap();
            prop_assert!(b <= a);
        }
    }
}
