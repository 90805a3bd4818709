//! Runs one named method on one instance and times it.

use std::time::Instant;

use crate::bnp::{solve_full, BnpParams};
use crate::error::{Error, Result};
use crate::metrics::Method;
use crate::model::{roster_objective, Instance, ObjectiveBreakdown, Roster};
use crate::network::WindowMode;
use crate::seqasg::{run_seqasg, PolicyNet};
use crate::windowing::{solve_windowed, WindowingParams, DEFAULT_OVERLAP, DEFAULT_WINDOW_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    /// Replaces the method's preset; unused by seqasg.
    pub params: Option<BnpParams>,
    pub window_len: u32,
    pub overlap: u32,
    /// Required by win_ml and seqasg.
    pub policy: Option<PolicyNet>,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self { params: None, window_len: DEFAULT_WINDOW_LEN, overlap: DEFAULT_OVERLAP, policy: None }
    }
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub roster: Roster,
    pub objective: ObjectiveBreakdown,
    /// Wall-clock seconds of the solve, including seqAsg for win_ml.
    pub seconds: f64,
    pub log: Vec<String>,
}

pub fn run_method(instance: &Instance, method: Method, config: &MethodConfig) -> Result<MethodRun> {
    let policy = || {
        config
            .policy
            .as_ref()
            .ok_or_else(|| Error::Parameter(format!("method {method} needs a policy")))
    };
    let windowing = |mode| WindowingParams {
        window_len: config.window_len,
        overlap: config.overlap,
        mode,
        bnp: config.params.clone().unwrap_or_else(BnpParams::alg_basic),
    };
    let start = Instant::now();
    let (roster, log) = match method {
        Method::AlgBasic | Method::AlgFast => {
            let preset = if method == Method::AlgFast { BnpParams::alg_fast() } else { BnpParams::alg_basic() };
            let out = solve_full(instance, config.params.as_ref().unwrap_or(&preset))?;
            (out.roster, out.log)
        }
        Method::WinBasic => {
            let out = solve_windowed(instance, &windowing(WindowMode::WinBasic), None)?;
            (out.roster, out.log)
        }
        Method::WinMl => {
            let initial = run_seqasg(instance, policy()?)?;
            let out = solve_windowed(instance, &windowing(WindowMode::WinMl), Some(&initial))?;
            (out.roster, out.log)
        }
        Method::Seqasg => (run_seqasg(instance, policy()?)?, Vec::new()),
    };
    let seconds = start.elapsed().as_secs_f64();
    let objective = roster_objective(instance, &roster)?;
    Ok(MethodRun { method, roster, objective, seconds, log })
}
