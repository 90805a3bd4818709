//! Column generation with a rolling-improvement stopping rule and depth-first
//! heuristic branching (column fixing, then intertask fixing) down to an
//! integer roster. There is no backtracking.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master::{
    build_initial_rmp, roster_from_solution, solve_rmp_lp, Column, RmpSolution, RmpState, Succession,
};
use crate::model::{roster_objective, Instance, ObjectiveBreakdown, PairingId, PilotId, Roster};
use crate::network::{build_all_networks, SubproblemNetwork};
use crate::rcspp::{solve_pricing, PricingParams};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const MAX_DECISIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BnpParams {
    /// Rolling window, in pricing iterations, of the improvement test.
    pub n_iter: u32,
    /// Minimum improvement over the window, in percent.
    pub m_iter: f64,
    pub cfix_select_threshold: f64,
    pub itimpose_select_threshold: f64,
    pub dominance_resources: usize,
    pub max_columns_per_pilot: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    crate::rcspp::DEFAULT_EPSILON
}

impl BnpParams {
    pub fn alg_basic() -> Self {
        Self {
            n_iter: 500,
            m_iter: 0.05,
            cfix_select_threshold: 0.70,
            itimpose_select_threshold: 0.70,
            dominance_resources: 3,
            max_columns_per_pilot: crate::rcspp::DEFAULT_MAX_COLUMNS,
            epsilon: default_epsilon(),
        }
    }

    pub fn alg_fast() -> Self {
        Self { n_iter: 4, m_iter: 1.0, dominance_resources: 1, ..Self::alg_basic() }
    }

    /// Column generation runs until no improving column exists.
    pub fn exact() -> Self {
        Self { n_iter: u32::MAX, m_iter: 0.0, ..Self::alg_basic() }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if self.n_iter == 0 {
            return Err(Error::Parameter("n_iter must be at least 1".into()));
        }
        if !unit(self.cfix_select_threshold) || !unit(self.itimpose_select_threshold) {
            return Err(Error::Parameter("selection thresholds must lie in (0, 1]".into()));
        }
        if !(self.m_iter >= 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::Parameter("m_iter must be >= 0 and epsilon > 0".into()));
        }
        if !(1..=3).contains(&self.dominance_resources) || self.max_columns_per_pilot == 0 {
            return Err(Error::Parameter(
                "dominance_resources must be 1..=3 and max_columns_per_pilot >= 1".into(),
            ));
        }
        Ok(())
    }

    fn pricing(&self) -> PricingParams {
        PricingParams {
            dominance_resources: self.dominance_resources,
            max_columns: self.max_columns_per_pilot,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecisionKind {
    FixColumn(Box<Column>),
    ImposeSuccession { pilot: PilotId, a: PairingId, b: PairingId },
    ForbidSuccession { pilot: PilotId, a: PairingId, b: PairingId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecision {
    pub kind: DecisionKind,
    pub score: f64,
}

/// Per-pilot pricing networks, warm columns and static-column penalties for
/// one branch-and-price run.
#[derive(Debug, Clone)]
pub struct BnpSetup {
    /// Indexed like `Instance::pilots`; `None` leaves only the static column.
    pub networks: Vec<Option<SubproblemNetwork>>,
    pub warm_columns: Vec<Column>,
    pub static_penalty: Vec<f64>,
}

impl BnpSetup {
    pub fn full(instance: &Instance) -> Result<Self> {
        Ok(Self {
            networks: build_all_networks(instance)?.into_iter().map(Some).collect(),
            warm_columns: Vec::new(),
            static_penalty: vec![0.0; instance.pilots.len()],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub columns_added: usize,
    /// True when stopped because no improving column was found.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct BnpOutcome {
    pub roster: Roster,
    pub objective: ObjectiveBreakdown,
    pub root_lp: f64,
    pub root_cg_iterations: usize,
    /// LP value at the end of each column-generation phase.
    pub lp_trace: Vec<f64>,
    pub cg_iterations: usize,
    pub branch_steps: usize,
    pub columns_generated: usize,
    pub log: Vec<String>,
}

struct Pricer<'a> {
    instance: &'a Instance,
    base: &'a [Option<SubproblemNetwork>],
    restricted: Vec<Option<SubproblemNetwork>>,
}

impl<'a> Pricer<'a> {
    fn new(instance: &'a Instance, base: &'a [Option<SubproblemNetwork>], state: &RmpState) -> Self {
        let mut p = Self { instance, base, restricted: Vec::new() };
        p.refresh(state);
        p
    }

    fn refresh(&mut self, state: &RmpState) {
        let inst = self.instance;
        self.restricted = self
            .base
            .par_iter()
            .enumerate()
            .map(|(k, net)| {
                let net = net.as_ref()?;
                if state.is_pilot_fixed(k) {
                    return None;
                }
                let r = state.pricing_restriction(inst, k);
                if r.is_empty() {
                    return Some(net.clone());
                }
                match net.restrict(inst, &r) {
                    Ok(n) => Some(n),
                    Err(e) => {
                        log::debug!("pilot {} has no pricing path left: {e}", inst.pilots[k].id);
                        None
                    }
                }
            })
            .collect();
    }

    fn price(&self, sol: &RmpSolution, params: &PricingParams) -> Result<Vec<Column>> {
        let per_pilot: Vec<Result<Vec<Column>>> = self
            .restricted
            .par_iter()
            .map(|net| {
                let Some(net) = net else { return Ok(Vec::new()) };
                let mut net = net.clone();
                net.apply_duals(self.instance, &sol.duals)?;
                Ok(solve_pricing(self.instance, &net, params).into_iter().map(|p| p.column).collect())
            })
            .collect();
        let mut out = Vec::new();
        for cols in per_pilot {
            out.extend(cols?);
        }
        Ok(out)
    }
}

fn note(log: &mut Vec<String>, line: String) {
    log::debug!("{line}");
    log.push(line);
}

/// Rolling-improvement test: true when the objective gained less than
/// `m_iter` percent over the last `n_iter` LP solves.
fn stalled(history: &[f64], params: &BnpParams) -> bool {
    let n = params.n_iter as usize;
    if history.len() <= n {
        return false;
    }
    let old = history[history.len() - 1 - n];
    let new = history[history.len() - 1];
    let denom = old.abs().max(1e-9);
    100.0 * (new - old) / denom < params.m_iter
}

fn column_generation(
    instance: &Instance,
    state: &mut RmpState,
    pricer: &Pricer,
    params: &BnpParams,
    log: &mut Vec<String>,
) -> Result<(RmpSolution, CgStats)> {
    let pricing = params.pricing();
    let mut history = Vec::new();
    let mut stats = CgStats { iterations: 0, columns_added: 0, converged: false };
    loop {
        let sol = solve_rmp_lp(instance, state)?;
        stats.iterations += 1;
        history.push(sol.objective);
        if stalled(&history, params) {
            note(log, format!("cg iter={} lp={:.6} stop=improvement", stats.iterations, sol.objective));
            return Ok((sol, stats));
        }
        let mut added = 0;
        for c in pricer.price(&sol, &pricing)? {
            if state.pool.add(c) {
                added += 1;
            }
        }
        stats.columns_added += added;
        note(log, format!(
            "cg iter={} lp={:.6} added={added} pool={}",
            stats.iterations,
            sol.objective,
            state.pool.len()
        ));
        if added == 0 {
            stats.converged = true;
            return Ok((sol, stats));
        }
    }
}

fn is_fractional(v: f64) -> bool {
    v > INTEGRALITY_TOL && v < 1.0 - INTEGRALITY_TOL
}

/// Picks one to three branching decisions for a fractional solution.
pub fn select_branch(
    instance: &Instance,
    state: &RmpState,
    sol: &RmpSolution,
    params: &BnpParams,
) -> Result<Vec<BranchDecision>> {
    let cols = state.pool.columns();
    let mut fractional: Vec<(usize, f64)> =
        sol.column_values.iter().copied().enumerate().filter(|&(_, v)| is_fractional(v)).collect();
    if fractional.is_empty() {
        return Err(Error::Contract("branching requested on an integer solution".into()));
    }
    fractional.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut out: Vec<BranchDecision> = Vec::new();
    let mut used_pilots = Vec::new();
    let mut used_pairings = Vec::new();
    for &(i, v) in &fractional {
        if v < params.cfix_select_threshold || out.len() == MAX_DECISIONS {
            break;
        }
        let c = &cols[i];
        if used_pilots.contains(&c.pilot_index) || c.pairings.iter().any(|w| used_pairings.contains(w)) {
            continue;
        }
        used_pilots.push(c.pilot_index);
        used_pairings.extend(c.pairings.iter().copied());
        out.push(BranchDecision { kind: DecisionKind::FixColumn(Box::new(c.clone())), score: v });
    }
    if !out.is_empty() {
        return Ok(out);
    }

    let mut flows: BTreeMap<(usize, PairingId, PairingId), f64> = BTreeMap::new();
    for &(i, v) in &fractional {
        for &(a, b) in &cols[i].successions {
            *flows.entry((cols[i].pilot_index, a, b)).or_insert(0.0) += v;
        }
    }
    flows.retain(|&(k, a, b), f| {
        *f < 1.0 - INTEGRALITY_TOL
            && !state.successions.contains(&Succession::Imposed { pilot: instance.pilots[k].id, a, b })
    });
    let max_flow = flows.values().copied().fold(0.0, f64::max);
    if max_flow > 0.0 {
        let mut cands: Vec<(f64, u32, PilotId, PairingId, PairingId)> = flows
            .iter()
            .map(|(&(k, a, b), &f)| {
                let start = instance.pairing(a).map(|w| w.start_minute).unwrap_or(u32::MAX);
                (f / max_flow, start, instance.pilots[k].id, a, b)
            })
            .filter(|c| c.0 >= params.itimpose_select_threshold)
            .collect();
        cands.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)).then(x.3.cmp(&y.3)).then(x.4.cmp(&y.4)));
        let mut touched: Vec<PairingId> = Vec::new();
        let mut chosen: Vec<(PilotId, PairingId, PairingId)> = Vec::new();
        for (score, _, pilot, a, b) in cands {
            if out.len() == MAX_DECISIONS {
                break;
            }
            if touched.contains(&a) || touched.contains(&b) {
                continue;
            }
            // Successions imposed on one pilot must fit in a single schedule.
            let together = fractional.iter().any(|&(i, _)| {
                let c = &cols[i];
                c.pilot == pilot
                    && c.has_succession(a, b)
                    && chosen.iter().filter(|x| x.0 == pilot).all(|x| c.has_succession(x.1, x.2))
            });
            if !together {
                continue;
            }
            touched.extend([a, b]);
            chosen.push((pilot, a, b));
            out.push(BranchDecision { kind: DecisionKind::ImposeSuccession { pilot, a, b }, score });
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }

    let (i, v) = fractional[0];
    Ok(vec![BranchDecision { kind: DecisionKind::FixColumn(Box::new(cols[i].clone())), score: v }])
}

/// Applies decisions in order, skipping ones that clash with those already
/// applied. Returns how many took effect.
pub fn apply_decisions(instance: &Instance, state: &mut RmpState, decisions: &[BranchDecision]) -> usize {
    let mut applied = 0;
    for d in decisions {
        let r = match &d.kind {
            DecisionKind::FixColumn(c) => match state.pool.columns().iter().position(|x| x == c.as_ref()) {
                Some(i) => state.fix_column(i).map(|_| ()),
                None => Err(Error::Decision("column no longer in the pool".into())),
            },
            DecisionKind::ImposeSuccession { pilot, a, b } => state
                .apply_intertask(instance, Succession::Imposed { pilot: *pilot, a: *a, b: *b })
                .map(|_| ()),
            DecisionKind::ForbidSuccession { pilot, a, b } => state
                .apply_intertask(instance, Succession::Forbidden { pilot: *pilot, a: *a, b: *b })
                .map(|_| ()),
        };
        match r {
            Ok(()) => applied += 1,
            Err(e) => log::debug!("skipped decision: {e}"),
        }
    }
    applied
}

fn describe(d: &BranchDecision) -> String {
    match &d.kind {
        DecisionKind::FixColumn(c) => format!("fix {} ({} pairings) v={:.4}", c.pilot, c.pairings.len(), d.score),
        DecisionKind::ImposeSuccession { pilot, a, b } => format!("impose {pilot} {a}->{b} s={:.4}", d.score),
        DecisionKind::ForbidSuccession { pilot, a, b } => format!("forbid {pilot} {a}->{b} s={:.4}", d.score),
    }
}

pub fn solve_bnp(instance: &Instance, setup: &BnpSetup, params: &BnpParams) -> Result<BnpOutcome> {
    params.validate()?;
    if setup.networks.len() != instance.pilots.len() || setup.static_penalty.len() != instance.pilots.len() {
        return Err(Error::Contract("setup must hold one network and penalty per pilot".into()));
    }
    let started = Instant::now();
    let mut state = build_initial_rmp(instance, &setup.warm_columns)?;
    state.static_penalty.clone_from(&setup.static_penalty);
    let mut pricer = Pricer::new(instance, &setup.networks, &state);
    let mut log = Vec::new();
    let mut lp_trace = Vec::new();
    let mut cg_iterations = 0;
    let mut branch_steps = 0;
    let mut columns_generated = 0;
    let mut root_lp = None;
    let mut root_cg_iterations = None;
    loop {
        let (sol, stats) = column_generation(instance, &mut state, &pricer, params, &mut log)?;
        cg_iterations += stats.iterations;
        columns_generated += stats.columns_added;
        lp_trace.push(sol.objective);
        root_lp.get_or_insert(sol.objective);
        root_cg_iterations.get_or_insert(stats.iterations);
        if !sol.column_values.iter().any(|&v| is_fractional(v)) {
            let roster = roster_from_solution(instance, &state, &sol);
            let objective = roster_objective(instance, &roster)?;
            note(&mut log, format!(
                "done branches={branch_steps} cg_iters={cg_iterations} objective={:.6} secs={:.3}",
                objective.objective,
                started.elapsed().as_secs_f64()
            ));
            return Ok(BnpOutcome {
                roster,
                objective,
                root_lp: root_lp.unwrap_or(sol.objective),
                root_cg_iterations: root_cg_iterations.unwrap_or(stats.iterations),
                lp_trace,
                cg_iterations,
                branch_steps,
                columns_generated,
                log,
            });
        }
        let decisions = select_branch(instance, &state, &sol, params)?;
        let mut applied = apply_decisions(instance, &mut state, &decisions);
        if applied == 0 {
            // Every selected decision clashed; fix the most fractional-heavy column.
            let (i, _) = sol
                .column_values
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| is_fractional(v))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                .expect("solution is fractional");
            state.fix_column(i)?;
            applied = 1;
        }
        branch_steps += 1;
        note(&mut log, format!(
            "branch step={branch_steps} lp={:.6} applied={applied} [{}]",
            sol.objective,
            decisions.iter().map(describe).collect::<Vec<_>>().join("; ")
        ));
        pricer.refresh(&state);
    }
}

/// Full-horizon solve from scratch.
pub fn solve_full(instance: &Instance, params: &BnpParams) -> Result<BnpOutcome> {
    solve_bnp(instance, &BnpSetup::full(instance)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::brute_force_solve;
    use crate::model::fixtures::{instance, pairing, small_rules};
    use crate::model::{check_roster, FlightId, FlightPreference, Pilot, RuleParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(7..=10);
        let n_pairings = rng.gen_range(3..=8);
        let pairings: Vec<_> = (1..=n_pairings)
            .map(|i| {
                let days = rng.gen_range(1..=3u32);
                let first = rng.gen_range(1..=h - days + 1);
                pairing(i, first, days, rng.gen_range(6..=14), rng.gen_range(1..=4))
            })
            .collect();
        let pilots = (0..rng.gen_range(2..=4))
            .map(|k| {
                let mut p = Pilot::new(PilotId(k), "B");
                for w in &pairings {
                    for f in &w.flights {
                        if rng.gen_bool(0.3) {
                            p.preferred_flights.push(FlightPreference { flight: f.id, weight: rng.gen_range(1..=20) as f64 });
                        }
                    }
                }
                if rng.gen_bool(0.3) {
                    p.preassigned_days_off.insert(rng.gen_range(1..=h));
                }
                p
            })
            .collect();
        let mut rules = small_rules();
        rules.max_consecutive_duties = 4;
        rules.max_flight_hours = 30;
        instance(h, pilots, pairings, rules)
    }

    #[test]
    fn presets_validate() {
        BnpParams::alg_basic().validate().unwrap();
        BnpParams::alg_fast().validate().unwrap();
        BnpParams::exact().validate().unwrap();
        let bad = BnpParams { cfix_select_threshold: 0.0, ..BnpParams::alg_basic() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rolling_improvement_rule() {
        let p = BnpParams { n_iter: 2, m_iter: 1.0, ..BnpParams::alg_basic() };
        assert!(!stalled(&[100.0, 100.5], &p));
        assert!(stalled(&[100.0, 100.5, 100.9], &p));
        assert!(!stalled(&[100.0, 100.5, 101.5], &p));
        assert!(!stalled(&[1.0; 1000], &BnpParams::exact()));
    }

    #[test]
    fn integral_root_needs_no_branching() {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preferred_flights.push(FlightPreference { flight: FlightId(10), weight: 5.0 });
        let inst = instance(7, vec![k], vec![pairing(1, 2, 1, 8, 2)], small_rules());
        let out = solve_full(&inst, &BnpParams::exact()).unwrap();
        assert_eq!(out.branch_steps, 0);
        assert_eq!(out.objective.objective, 5.0);
        assert!(out.roster.unassigned_pairings.is_empty());
    }

    #[test]
    fn column_fixing_selection() {
        let inst = tiny(3);
        let setup = BnpSetup::full(&inst).unwrap();
        let mut state = build_initial_rmp(&inst, &[]).unwrap();
        let mut pool = Vec::new();
        for net in setup.networks.iter().flatten() {
            for p in crate::rcspp::enumerate_feasible_paths(net, 50) {
                pool.push(Column::from_path(&inst, net, &p));
            }
        }
        for c in pool {
            state.pool.add(c);
        }
        let sol = solve_rmp_lp(&inst, &mut state).unwrap();
        // Pretend a fractional solution: three columns of distinct pilots with
        // disjoint pairings.
        let mut picked: Vec<usize> = Vec::new();
        for (i, c) in state.pool.columns().iter().enumerate() {
            let ok = picked.iter().all(|&j| {
                let o = &state.pool.columns()[j];
                o.pilot_index != c.pilot_index && !o.pairings.iter().any(|w| c.contains_pairing(*w))
            });
            if ok && picked.len() < 3 {
                picked.push(i);
            }
        }
        let mut fake = sol.clone();
        fake.column_values = vec![0.0; state.pool.len()];
        let values = [0.85, 0.72, 0.64];
        for (&i, &v) in picked.iter().zip(&values) {
            fake.column_values[i] = v;
        }
        let d = select_branch(&inst, &state, &fake, &BnpParams::alg_basic()).unwrap();
        let scores: Vec<f64> = d.iter().map(|d| d.score).collect();
        assert_eq!(scores, values[..picked.len().min(2)].to_vec());
        assert!(d.iter().all(|d| matches!(d.kind, DecisionKind::FixColumn(_))));

        fake.column_values = vec![0.0; state.pool.len()];
        assert!(matches!(select_branch(&inst, &state, &fake, &BnpParams::alg_basic()), Err(Error::Contract(_))));
    }

    #[test]
    fn intertask_selection_normalizes_by_max_flow() {
        // Three pilots with successions of flows 0.6, 0.48 and 0.3 on distinct pairings.
        let pilots: Vec<Pilot> = (0..3).map(|k| Pilot::new(PilotId(k), "B")).collect();
        let ws: Vec<_> = (0..6).map(|i| pairing(i + 1, 1 + 2 * (i / 2) + i % 2, 1, 8, 1)).collect();
        let inst = instance(9, pilots.clone(), ws, small_rules());
        let mut state = build_initial_rmp(&inst, &[]).unwrap();
        let flows = [0.6, 0.48, 0.3];
        for (i, k) in pilots.iter().enumerate() {
            let a = PairingId(2 * i as u32 + 1);
            let b = PairingId(2 * i as u32 + 2);
            state.pool.add(Column {
                pilot: k.id,
                pilot_index: i,
                schedule: crate::model::Schedule::empty(k.id),
                cost: i as f64,
                pairings: vec![2 * i, 2 * i + 1],
                preassigned: vec![],
                successions: vec![(a, b)],
            });
        }
        let mut sol = solve_rmp_lp(&inst, &mut state).unwrap();
        sol.column_values = flows.to_vec();
        let d = select_branch(&inst, &state, &sol, &BnpParams::alg_basic()).unwrap();
        let got: Vec<(f64, PairingId)> = d
            .iter()
            .map(|d| match d.kind {
                DecisionKind::ImposeSuccession { a, .. } => (d.score, a),
                _ => panic!("expected intertask decisions"),
            })
            .collect();
        assert_eq!(got.len(), 2);
        assert!((got[0].0 - 1.0).abs() < 1e-12 && got[0].1 == PairingId(1));
        assert!((got[1].0 - 0.8).abs() < 1e-12 && got[1].1 == PairingId(3));

        // Equal flows: earliest start wins.
        sol.column_values = vec![0.4, 0.4, 0.4];
        let d = select_branch(&inst, &state, &sol, &BnpParams::alg_basic()).unwrap();
        assert_eq!(d.len(), 3);
        assert!(matches!(d[0].kind, DecisionKind::ImposeSuccession { a: PairingId(1), .. }));
    }

    #[test]
    fn one_pilot_gets_only_successions_that_share_a_column() {
        let k = Pilot::new(PilotId(0), "B");
        let ws: Vec<_> = (0..6).map(|i| pairing(i + 1, 1 + i, 1, 8, 1)).collect();
        let inst = instance(9, vec![k.clone()], ws, small_rules());
        let mut state = build_initial_rmp(&inst, &[]).unwrap();
        let column = |pairings: Vec<usize>, successions: Vec<(u32, u32)>| Column {
            pilot: k.id,
            pilot_index: 0,
            schedule: crate::model::Schedule::empty(k.id),
            cost: 0.0,
            pairings,
            preassigned: vec![],
            successions: successions.into_iter().map(|(a, b)| (PairingId(a), PairingId(b))).collect(),
        };
        state.pool.add(column(vec![0, 1, 2, 3], vec![(1, 2), (3, 4)]));
        state.pool.add(column(vec![0, 1, 4, 5], vec![(1, 2), (5, 6)]));
        let mut sol = solve_rmp_lp(&inst, &mut state).unwrap();
        sol.column_values = vec![0.5, 0.5];
        let d = select_branch(&inst, &state, &sol, &BnpParams::alg_basic()).unwrap();
        let got: Vec<(PairingId, PairingId)> = d
            .iter()
            .map(|d| match d.kind {
                DecisionKind::ImposeSuccession { a, b, .. } => (a, b),
                _ => panic!("expected intertask decisions"),
            })
            .collect();
        // 1->2 has flow 1.0 and is integral, so it is not a candidate; 3->4
        // and 5->6 never appear in one schedule.
        assert_eq!(got, vec![(PairingId(3), PairingId(4))]);
    }

    #[test]
    fn fast_stopping_rule_stops_no_later() {
        use crate::generator::{generate_instance, generate_scenario, GeneratorSpec, PilotCount, ScenarioSpec};
        let g = GeneratorSpec {
            horizon_days: 14,
            n_pairings: 40,
            total_flight_minutes: 36_000,
            pilots: PilotCount::Fixed(10),
            rules: RuleParams { min_days_off: 4, ..RuleParams::default() },
            ..Default::default()
        };
        let inst = generate_scenario(&generate_instance(&g).unwrap(), &ScenarioSpec::default()).unwrap();
        let basic = BnpParams::alg_basic();
        let fast_rule = BnpParams { n_iter: 4, m_iter: 1.0, ..basic.clone() };
        let a = solve_full(&inst, &basic).unwrap();
        let b = solve_full(&inst, &fast_rule).unwrap();
        assert!(b.root_cg_iterations <= a.root_cg_iterations);
        assert!(check_roster(&inst, &b.roster).is_feasible());
        let fast = solve_full(&inst, &BnpParams::alg_fast()).unwrap();
        assert!(check_roster(&inst, &fast.roster).is_feasible());
    }

    #[test]
    fn exact_mode_against_brute_force() {
        for seed in 0..8 {
            let inst = tiny(seed);
            let (best, _) = brute_force_solve(&inst).unwrap();
            let out = solve_full(&inst, &BnpParams::exact()).unwrap();
            assert!(check_roster(&inst, &out.roster).is_feasible(), "seed {seed}");
            assert!(out.root_lp >= best - 1e-6, "seed {seed}: root {} < {best}", out.root_lp);
            assert!(out.objective.objective <= out.root_lp + 1e-6);
            assert!(out.objective.objective <= best + 1e-6);
        }
    }

    #[test]
    fn deterministic() {
        let inst = tiny(42);
        let a = solve_full(&inst, &BnpParams::alg_basic()).unwrap();
        let b = solve_full(&inst, &BnpParams::alg_basic()).unwrap();
        assert_eq!(a.roster, b.roster);
        assert_eq!(a.lp_trace, b.lp_trace);
    }
}
