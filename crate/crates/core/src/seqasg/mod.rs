//! Day-by-day constructive rostering: each day, available pilots are matched
//! to the pairings departing that day by maximum total utility, where the
//! utility of an assignment comes from a small policy network trained with
//! CMA-ES.

pub mod cmaes;
pub mod features;
pub mod matching;
pub mod policy;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{check_schedule, roster_objective, Activity, Instance, Roster, Schedule};

pub use features::{features, Action, RosterState};
pub use policy::{PolicyNet, ARCHITECTURE, N_FEATURES, N_PARAMS};

/// Added to pairing edges so that a pairing wins ties with idling.
const PAIRING_TIE_BONUS: f64 = 1e-9;

fn utility(instance: &Instance, state: &RosterState, policy: &PolicyNet, k: usize, action: Action) -> Result<f64> {
    let u = policy.forward(&features(instance, state, k, action)?);
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::Numeric("policy produced a non-finite utility".into()))
    }
}

/// Assigns today's actions and advances to the next day. Returns the total
/// utility of the chosen actions.
pub fn run_day(instance: &Instance, state: &mut RosterState, policy: &PolicyNet) -> Result<f64> {
    let d = state.day;
    let available: Vec<usize> = (0..instance.pilots.len()).filter(|&k| state.is_available(k)).collect();
    let mut own: BTreeMap<usize, (Action, f64)> = BTreeMap::new();
    for &k in &available {
        let mut best = (Action::DayOff, utility(instance, state, policy, k, Action::DayOff)?);
        if state.action_feasible(instance, k, Action::Vacation) {
            let u = utility(instance, state, policy, k, Action::Vacation)?;
            if u > best.1 {
                best = (Action::Vacation, u);
            }
        }
        own.insert(k, best);
    }

    let today: Vec<usize> = state.departing_on(d).iter().copied().filter(|&i| state.assigned[i].is_none()).collect();
    let mut bases: Vec<&str> = today.iter().map(|&i| instance.pairings[i].base.as_str()).collect();
    bases.sort_unstable();
    bases.dedup();
    let mut chosen: Vec<(usize, Action, f64)> = Vec::new();
    let mut matched_pilots = Vec::new();
    for base in bases {
        let pilots: Vec<usize> = available.iter().copied().filter(|&k| instance.pilots[k].base == base).collect();
        let pairings: Vec<usize> = today.iter().copied().filter(|&i| instance.pairings[i].base == base).collect();
        let mut weights = Vec::with_capacity(pilots.len());
        let mut utilities = Vec::with_capacity(pilots.len());
        for &k in &pilots {
            let mut row = Vec::with_capacity(pairings.len());
            let mut urow = Vec::with_capacity(pairings.len());
            for &i in &pairings {
                if state.action_feasible(instance, k, Action::Pairing(i)) {
                    let u = utility(instance, state, policy, k, Action::Pairing(i))?;
                    row.push(Some(u - own[&k].1 + PAIRING_TIE_BONUS));
                    urow.push(u);
                } else {
                    row.push(None);
                    urow.push(0.0);
                }
            }
            weights.push(row);
            utilities.push(urow);
        }
        for (r, m) in matching::max_weight_matching(&weights).into_iter().enumerate() {
            if let Some(c) = m {
                chosen.push((pilots[r], Action::Pairing(pairings[c]), utilities[r][c]));
                matched_pilots.push(pilots[r]);
            }
        }
    }
    for (&k, &(a, u)) in &own {
        if !matched_pilots.contains(&k) {
            chosen.push((k, a, u));
        }
    }
    chosen.sort_by_key(|c| c.0);
    let mut total = 0.0;
    for (k, a, u) in chosen {
        state.apply(instance, k, a, u);
        total += u;
    }
    state.day += 1;
    Ok(total)
}

/// Drops a pilot's lowest-utility pairings until its schedule passes the
/// checker; freed days become days off.
fn repair(instance: &Instance, k: usize, st: &mut features::PilotState) -> Schedule {
    let pilot = &instance.pilots[k];
    let mut schedule = Schedule { pilot: pilot.id, activities: st.activities.clone() };
    while !check_schedule(instance, pilot, &schedule, &instance.rules).is_empty() {
        let Some(pos) = st
            .pairing_utilities
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
        else {
            break;
        };
        let (w, _) = st.pairing_utilities.remove(pos);
        let days: Vec<u32> = instance.pairing(w).map(|p| p.span_days().collect()).unwrap_or_default();
        schedule.activities.retain(|a| *a != Activity::Pairing(w));
        schedule.activities.extend(days.into_iter().map(Activity::DayOff));
        log::debug!("seqasg repair: dropped {w} from {}", pilot.id);
    }
    schedule.sort(instance);
    schedule
}

pub fn run_seqasg(instance: &Instance, policy: &PolicyNet) -> Result<Roster> {
    let mut state = RosterState::new(instance);
    while state.day <= instance.horizon_days {
        run_day(instance, &mut state, policy)?;
    }
    let schedules = state.pilots.iter_mut().enumerate().map(|(k, st)| repair(instance, k, st)).collect();
    Ok(Roster::from_schedules(instance, schedules))
}

/// Mean roster objective of the policy over the scenarios.
pub fn policy_fitness(scenarios: &[Instance], policy: &PolicyNet) -> Result<f64> {
    if scenarios.is_empty() {
        return Err(Error::Parameter("fitness needs at least one scenario".into()));
    }
    let mut sum = 0.0;
    for inst in scenarios {
        let roster = run_seqasg(inst, policy)?;
        sum += roster_objective(inst, &roster)?.objective;
    }
    Ok(sum / scenarios.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub population: usize,
    pub max_generations: usize,
    pub sigma0: f64,
    pub seed: u64,
    pub stagnation_generations: usize,
    /// Percent.
    pub stagnation_tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let c = cmaes::CmaesConfig::for_dim(N_PARAMS, 0);
        Self {
            population: c.population,
            max_generations: c.max_generations,
            sigma0: c.sigma0,
            seed: 0,
            stagnation_generations: c.stagnation_generations,
            stagnation_tolerance: c.stagnation_tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: PolicyNet,
    pub fitness: f64,
    pub generations: usize,
    pub history: Vec<cmaes::GenerationRecord>,
}

pub fn train_cmaes(scenarios: &[Instance], config: &TrainConfig) -> Result<TrainOutcome> {
    if scenarios.is_empty() {
        return Err(Error::Parameter("training needs at least one scenario".into()));
    }
    let cfg = cmaes::CmaesConfig {
        population: config.population,
        sigma0: config.sigma0,
        max_generations: config.max_generations,
        stagnation_generations: config.stagnation_generations,
        stagnation_tolerance: config.stagnation_tolerance,
        seed: config.seed,
    };
    let result = cmaes::maximize(N_PARAMS, &[0.0; N_PARAMS], &cfg, |w| {
        PolicyNet::new(w.to_vec())
            .and_then(|p| policy_fitness(scenarios, &p))
            .unwrap_or(f64::NEG_INFINITY)
    })?;
    for r in &result.history {
        log::info!("train gen={} best={:.3} mean={:.3} best_ever={:.3} sigma={:.4}", r.generation, r.best, r.mean, r.best_ever, r.sigma);
    }
    Ok(TrainOutcome {
        policy: PolicyNet::new(result.best)?,
        fitness: result.best_fitness,
        generations: result.generations,
        history: result.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance, pairing, small_rules};
    use crate::model::{check_roster, FlightId, FlightPreference, Pilot, PilotId};

    fn one_pilot(base: &str) -> Instance {
        let k = Pilot::new(PilotId(0), base);
        crate::model::Instance::new(7, vec!["B".into(), "C".into()], vec![k], vec![pairing(1, 2, 1, 8, 2)], small_rules()).unwrap()
    }

    #[test]
    fn single_feasible_pairing_is_matched() {
        let inst = one_pilot("B");
        let mut w = vec![0.0; N_PARAMS];
        w[80] = 1.0;
        let roster = run_seqasg(&inst, &PolicyNet::new(w).unwrap()).unwrap();
        assert!(roster.unassigned_pairings.is_empty());
        assert!(check_roster(&inst, &roster).is_feasible());
    }

    #[test]
    fn other_base_leaves_pairing_unassigned() {
        let inst = one_pilot("C");
        let roster = run_seqasg(&inst, &PolicyNet::zeros()).unwrap();
        assert_eq!(roster.unassigned_pairings.len(), 1);
        assert!(check_roster(&inst, &roster).is_feasible());
    }

    #[test]
    fn preassigned_day_gets_a_day_off() {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preassigned_days_off.insert(2);
        let inst = instance(7, vec![k], vec![pairing(1, 2, 1, 8, 2)], small_rules());
        let mut st = RosterState::new(&inst);
        run_day(&inst, &mut st, &PolicyNet::zeros()).unwrap();
        run_day(&inst, &mut st, &PolicyNet::zeros()).unwrap();
        assert_eq!(st.pilots[0].activities[1], Activity::DayOff(2));
        assert_eq!(st.assigned[0], None);
    }

    fn fixture(seed: u64) -> Instance {
        use crate::generator::{generate_instance, generate_scenario, GeneratorSpec, PilotCount, ScenarioSpec};
        let g = GeneratorSpec {
            seed,
            horizon_days: 14,
            n_bases: 2,
            n_airports: 6,
            n_pairings: 30,
            total_flight_minutes: 27_000,
            pilots: PilotCount::Fixed(8),
            rules: crate::model::RuleParams { min_days_off: 4, ..Default::default() },
            ..Default::default()
        };
        generate_scenario(&generate_instance(&g).unwrap(), &ScenarioSpec { seed, ..Default::default() }).unwrap()
    }

    #[test]
    fn random_policies_give_valid_rosters() {
        for seed in 0..6 {
            let inst = fixture(seed);
            let roster = run_seqasg(&inst, &PolicyNet::random(seed, 1.0)).unwrap();
            let report = check_roster(&inst, &roster);
            assert!(report.is_feasible(), "seed {seed}: {report}");
            for k in &inst.pilots {
                let s = roster.schedule_of(k.id).unwrap();
                for q in &k.preassigned_days_off {
                    assert!(s.activities.contains(&Activity::DayOff(*q)) || s.activities.iter().any(|a| matches!(a, Activity::Vacation(o) if (*o..*o + 3).contains(q))));
                }
            }
        }
    }

    #[test]
    fn zero_policy_is_deterministic() {
        let inst = fixture(3);
        let a = run_seqasg(&inst, &PolicyNet::zeros()).unwrap();
        let b = run_seqasg(&inst, &PolicyNet::zeros()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_generation_returns_best_initial_candidate() {
        let scen = vec![fixture(1)];
        let cfg = TrainConfig { max_generations: 1, seed: 4, ..TrainConfig::default() };
        let out = train_cmaes(&scen, &cfg).unwrap();
        assert_eq!(out.generations, 1);
        assert_eq!(out.fitness, out.history[0].best);
        assert_eq!(policy_fitness(&scen, &out.policy).unwrap(), out.fitness);
    }

    #[test]
    fn training_never_loses_the_initial_best() {
        let scen = vec![fixture(2), fixture(5)];
        let cfg = TrainConfig { max_generations: 8, seed: 1, ..TrainConfig::default() };
        let out = train_cmaes(&scen, &cfg).unwrap();
        assert!(out.fitness >= out.history[0].best);
    }

    /// Two pilots, two overlapping pairings each preferred by a different
    /// pilot: a policy that values the preference feature assigns each pilot
    /// the pairing it likes, which is the unique optimum.
    #[test]
    fn training_recovers_a_dominant_policy() {
        let mut k0 = Pilot::new(PilotId(0), "B");
        let mut k1 = Pilot::new(PilotId(1), "B");
        k0.preferred_flights.push(FlightPreference { flight: FlightId(10), weight: 40.0 });
        k1.preferred_flights.push(FlightPreference { flight: FlightId(20), weight: 60.0 });
        k0.preferred_flights.push(FlightPreference { flight: FlightId(30), weight: 25.0 });
        k1.preferred_flights.push(FlightPreference { flight: FlightId(40), weight: 35.0 });
        let inst = instance(
            9,
            vec![k0, k1],
            vec![pairing(1, 2, 1, 8, 2), pairing(2, 2, 1, 9, 2), pairing(3, 5, 1, 8, 2), pairing(4, 5, 1, 9, 2)],
            small_rules(),
        );
        let mut w = vec![0.0; N_PARAMS];
        w[10] = 1.0; // preference feature into hidden unit 0
        w[5] = 0.01; // pairing indicator
        w[56] = 1.0; // hidden 0 -> second layer unit 0
        w[76] = 1.0; // second layer unit 0 -> output
        let dominant = PolicyNet::new(w).unwrap();
        let scen = vec![inst];
        let target = policy_fitness(&scen, &dominant).unwrap();
        assert_eq!(target, 160.0);
        let out = train_cmaes(&scen, &TrainConfig { seed: 7, ..TrainConfig::default() }).unwrap();
        assert!(out.fitness >= 0.95 * target, "{} vs {target}", out.fitness);
    }
}
