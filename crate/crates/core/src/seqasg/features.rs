use crate::error::{Error, Result};
use crate::model::{Activity, Instance, PairingId, DEFAULT_PREFERENCE_BUDGET, VACATION_DAYS};

use super::policy::N_FEATURES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Instance index of the pairing.
    Pairing(usize),
    DayOff,
    Vacation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PilotState {
    /// Last day taken by a pairing or vacation already assigned.
    pub busy_until: u32,
    pub last_pairing_end_minute: Option<u32>,
    /// End day of the last pairing, 0 if none.
    pub last_work_day: u32,
    pub flight_minutes: u32,
    /// Duty days in the run ending on `last_work_day`.
    pub consecutive: u32,
    pub days_off: u32,
    pub activities: Vec<Activity>,
    pub pairing_utilities: Vec<(PairingId, f64)>,
}

/// Partial roster built day by day.
#[derive(Debug, Clone, PartialEq)]
pub struct RosterState {
    pub day: u32,
    pub pilots: Vec<PilotState>,
    /// Pilot index of each assigned pairing.
    pub assigned: Vec<Option<usize>>,
    departing: Vec<Vec<usize>>,
}

impl RosterState {
    pub fn new(instance: &Instance) -> Self {
        let mut departing = vec![Vec::new(); instance.horizon_days as usize + 2];
        for (i, w) in instance.pairings.iter().enumerate() {
            let d = w.start_day() as usize;
            if d < departing.len() {
                departing[d].push(i);
            }
        }
        Self {
            day: 1,
            pilots: vec![PilotState::default(); instance.pilots.len()],
            assigned: vec![None; instance.pairings.len()],
            departing,
        }
    }

    /// Pairings starting on `day`, ascending by instance index.
    pub fn departing_on(&self, day: u32) -> &[usize] {
        self.departing.get(day as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_available(&self, k: usize) -> bool {
        self.pilots[k].busy_until < self.day
    }

    fn consecutive_before(&self, k: usize) -> u32 {
        let p = &self.pilots[k];
        if p.last_work_day > 0 && p.last_work_day + 1 == self.day {
            p.consecutive
        } else {
            0
        }
    }

    /// Whether the action can be taken today without making a rule
    /// violation certain later in the month.
    pub fn action_feasible(&self, instance: &Instance, k: usize, action: Action) -> bool {
        if !self.is_available(k) {
            return false;
        }
        let pilot = &instance.pilots[k];
        let d = self.day;
        let h = instance.horizon_days;
        let preassigned_today = pilot.preassigned_days_off.contains(&d);
        match action {
            Action::DayOff => d <= h,
            Action::Vacation => {
                !preassigned_today && pilot.vacation_weight(d).is_some() && d + VACATION_DAYS - 1 <= h
            }
            Action::Pairing(i) => {
                let Some(w) = instance.pairings.get(i) else { return false };
                let rules = &instance.rules;
                let st = &self.pilots[k];
                if preassigned_today
                    || self.assigned[i].is_some()
                    || w.start_day() != d
                    || w.base != pilot.base
                    || w.end_day() > h
                    || w.span_days().any(|x| pilot.preassigned_days_off.contains(&x))
                {
                    return false;
                }
                if let Some(end) = st.last_pairing_end_minute {
                    if w.start_minute < end || w.start_minute - end < rules.min_rest_minutes() {
                        return false;
                    }
                }
                st.flight_minutes + w.work_minutes <= rules.max_flight_minutes()
                    && self.consecutive_before(k) + w.duty_days.len() as u32 <= rules.max_consecutive_duties
                    && st.days_off + (h - w.end_day()) >= rules.min_days_off
            }
        }
    }

    pub fn apply(&mut self, instance: &Instance, k: usize, action: Action, utility: f64) {
        let d = self.day;
        let cons = self.consecutive_before(k);
        let st = &mut self.pilots[k];
        match action {
            Action::DayOff => {
                st.activities.push(Activity::DayOff(d));
                st.days_off += 1;
                st.busy_until = d;
            }
            Action::Vacation => {
                st.activities.push(Activity::Vacation(d));
                st.days_off += VACATION_DAYS;
                st.busy_until = d + VACATION_DAYS - 1;
            }
            Action::Pairing(i) => {
                let w = &instance.pairings[i];
                st.activities.push(Activity::Pairing(w.id));
                st.pairing_utilities.push((w.id, utility));
                st.flight_minutes += w.work_minutes;
                st.consecutive = cons + w.duty_days.len() as u32;
                st.last_work_day = w.end_day();
                st.last_pairing_end_minute = Some(w.end_minute);
                st.busy_until = w.end_day();
                self.assigned[i] = Some(k);
            }
        }
    }
}

/// The 13 state-action features, each in [0, 1].
pub fn features(instance: &Instance, state: &RosterState, k: usize, action: Action) -> Result<[f64; N_FEATURES]> {
    if !state.action_feasible(instance, k, action) {
        return Err(Error::Contract(format!(
            "action {action:?} is not available to {} on day {}",
            instance.pilots[k].id, state.day
        )));
    }
    let pilot = &instance.pilots[k];
    let st = &state.pilots[k];
    let rules = &instance.rules;
    let h = instance.horizon_days as f64;
    let d = state.day;
    let unit = |x: f64| x.clamp(0.0, 1.0);
    let ratio = |a: f64, b: f64| if b > 0.0 { unit(a / b) } else { 0.0 };

    let owed = rules.min_days_off.saturating_sub(st.days_off) as f64;
    let (duration, flight_hours, value) = match action {
        Action::Pairing(i) => {
            let w = &instance.pairings[i];
            (w.duration_days() as f64, w.flight_minutes() as f64 / 60.0, pilot.pairing_value(w))
        }
        Action::DayOff => (1.0, 0.0, 0.0),
        Action::Vacation => (VACATION_DAYS as f64, 0.0, pilot.vacation_weight(d).unwrap_or(0.0)),
    };
    let at_base = |i: &usize| instance.pairings[*i].base == pilot.base;
    let today = state.departing_on(d).iter().filter(|i| at_base(i) && state.assigned[**i].is_none()).count();
    let open_ahead: usize = (d..=instance.horizon_days)
        .map(|x| state.departing_on(x).iter().filter(|i| at_base(i) && state.assigned[**i].is_none()).count())
        .sum();

    let mut x = [0.0; N_FEATURES];
    x[0] = ratio((d - 1) as f64, h);
    x[1] = ratio(st.flight_minutes as f64, rules.max_flight_minutes() as f64);
    x[2] = ratio(state.consecutive_before(k) as f64, rules.max_consecutive_duties as f64);
    x[3] = ratio(owed, rules.min_days_off as f64);
    x[4] = ratio(h - (d - 1) as f64, h);
    x[5] = matches!(action, Action::Pairing(_)) as u8 as f64;
    x[6] = (action == Action::DayOff) as u8 as f64;
    x[7] = (action == Action::Vacation) as u8 as f64;
    x[8] = unit(duration / 5.0);
    x[9] = unit(flight_hours / 40.0);
    x[10] = unit(value / DEFAULT_PREFERENCE_BUDGET);
    x[11] = ratio(today as f64, open_ahead as f64);
    x[12] = pilot.preassigned_days_off.contains(&(d + 1)) as u8 as f64;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance, pairing, small_rules};
    use crate::model::{FlightId, FlightPreference, Pilot, PilotId, VacationPreference};

    fn fixture() -> Instance {
        let mut k = Pilot::new(PilotId(0), "B");
        k.preferred_flights.push(FlightPreference { flight: FlightId(11), weight: 30.0 });
        k.preferred_vacations.push(VacationPreference { start_day: 1, weight: 12.0 });
        k.preassigned_days_off.insert(2);
        let mut other = Pilot::new(PilotId(1), "B");
        other.preassigned_days_off.insert(1);
        instance(7, vec![k, other], vec![pairing(1, 1, 2, 8, 3), pairing(2, 3, 1, 8, 3)], small_rules())
    }

    #[test]
    fn fresh_day_off_features() {
        let inst = fixture();
        let st = RosterState::new(&inst);
        let x = features(&inst, &st, 0, Action::DayOff).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!((x[1], x[2]), (0.0, 0.0));
        assert_eq!(x[3], 1.0);
        assert_eq!(x[4], 1.0);
        assert_eq!(&x[5..8], &[0.0, 1.0, 0.0]);
        assert_eq!(x[8], 0.2);
        assert_eq!(x[12], 1.0);
        assert_eq!(x, features(&inst, &st, 0, Action::DayOff).unwrap());
    }

    #[test]
    fn preference_feature_is_weight_over_budget() {
        let mut inst = fixture();
        // Pilot 0 cannot take pairing 1 (covers day 2); use a pilot without
        // preassigned days but the same preferences.
        let mut k = inst.pilots[0].clone();
        k.preassigned_days_off.clear();
        let other = inst.pilots[1].clone();
        inst = inst.with_pilots(vec![k, other]).unwrap();
        let st = RosterState::new(&inst);
        let x = features(&inst, &st, 0, Action::Pairing(0)).unwrap();
        assert_eq!(x[10], 30.0 / DEFAULT_PREFERENCE_BUDGET);
        assert_eq!(&x[5..8], &[1.0, 0.0, 0.0]);
        let v = features(&inst, &st, 0, Action::Vacation).unwrap();
        assert_eq!(v[10], 12.0 / DEFAULT_PREFERENCE_BUDGET);
    }

    #[test]
    fn unavailable_actions_are_contract_errors() {
        let inst = fixture();
        let st = RosterState::new(&inst);
        // Pairing 1 spans day 2, a preassigned day off of pilot 0.
        assert!(matches!(features(&inst, &st, 0, Action::Pairing(0)), Err(Error::Contract(_))));
        // Pilot 1 is preassigned off today.
        assert!(!st.action_feasible(&inst, 1, Action::Pairing(0)));
        assert!(st.action_feasible(&inst, 1, Action::DayOff));
        assert!(!st.action_feasible(&inst, 1, Action::Vacation));
    }

    #[test]
    fn apply_tracks_resources() {
        let mut inst = fixture();
        let mut k = inst.pilots[0].clone();
        k.preassigned_days_off.clear();
        let other = inst.pilots[1].clone();
        inst = inst.with_pilots(vec![k, other]).unwrap();
        let mut st = RosterState::new(&inst);
        st.apply(&inst, 0, Action::Pairing(0), 1.0);
        assert_eq!(st.pilots[0].busy_until, 2);
        assert_eq!(st.pilots[0].consecutive, 2);
        st.day = 3;
        assert_eq!(st.consecutive_before(0), 2);
        assert!(st.action_feasible(&inst, 0, Action::Pairing(1)));
        st.apply(&inst, 0, Action::Pairing(1), 0.5);
        assert_eq!(st.pilots[0].consecutive, 3);
        assert_eq!(st.assigned, vec![Some(0), Some(0)]);
    }
}
