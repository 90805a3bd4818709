//! Forward labeling for maximum reduced-cost resource-feasible paths.

use crate::master::Column;
use crate::model::Instance;
use crate::network::{ResourceVector, SubproblemNetwork};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_COLUMNS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingParams {
    /// How many of (days off, flight time, consecutive duties) take part in
    /// dominance, in that order.
    pub dominance_resources: usize,
    pub max_columns: usize,
    pub epsilon: f64,
}

impl Default for PricingParams {
    fn default() -> Self {
        Self { dominance_resources: 3, max_columns: DEFAULT_MAX_COLUMNS, epsilon: DEFAULT_EPSILON }
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    rc: f64,
    res: ResourceVector,
    arc: u32,
    parent: u32,
}

const ROOT: u32 = u32::MAX;

#[inline]
fn dominates(a: &Label, b: &Label, n: usize) -> bool {
    a.rc >= b.rc
        && (n < 1 || a.res.days_off_remaining <= b.res.days_off_remaining)
        && (n < 2 || a.res.flight_minutes <= b.res.flight_minutes)
        && (n < 3 || a.res.consecutive_duties <= b.res.consecutive_duties)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedPath {
    pub arcs: Vec<usize>,
    pub reduced_cost: f64,
    pub cost: f64,
}

/// Best resource-feasible source-to-sink paths by reduced cost. Returns at
/// most `max_columns` paths with reduced cost above `epsilon`, best first,
/// ties broken by arc sequence.
pub fn solve_pricing_paths(net: &SubproblemNetwork, params: &PricingParams) -> Vec<PricedPath> {
    let n = params.dominance_resources.min(3);
    let mut arena: Vec<Label> = Vec::new();
    // Each bucket is kept sorted by decreasing reduced cost.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); net.nodes.len()];
    arena.push(Label { rc: 0.0, res: net.limits.initial(), arc: ROOT, parent: ROOT });
    buckets[net.source].push(0);
    let mut sink_labels: Vec<u32> = Vec::new();

    for &v in net.topological_order() {
        if v == net.sink {
            continue;
        }
        let here = std::mem::take(&mut buckets[v]);
        for &lid in &here {
            let l = arena[lid as usize];
            for &a in net.out_arcs(v) {
                let arc = &net.arcs[a];
                let head_time = net.nodes[arc.head].time_minute;
                let Some(res) = net.limits.extend(&l.res, &arc.delta, head_time) else {
                    continue;
                };
                let cand = Label { rc: l.rc + arc.reduced_cost, res, arc: a as u32, parent: lid };
                if arc.head == net.sink {
                    if net.limits.sink_ok(&res) {
                        arena.push(cand);
                        sink_labels.push(arena.len() as u32 - 1);
                    }
                    continue;
                }
                insert_label(&mut arena, &mut buckets[arc.head], cand, n);
            }
        }
        buckets[v] = here;
    }

    let mut best: Vec<(f64, Vec<usize>)> = sink_labels
        .iter()
        .filter(|&&id| arena[id as usize].rc > params.epsilon)
        .map(|&id| (arena[id as usize].rc, trace(&arena, id)))
        .collect();
    best.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    best.truncate(params.max_columns);
    best.into_iter()
        .map(|(rc, arcs)| PricedPath {
            cost: arcs.iter().map(|&a| net.arcs[a].cost).sum(),
            reduced_cost: rc,
            arcs,
        })
        .collect()
}

fn insert_label(arena: &mut Vec<Label>, bucket: &mut Vec<u32>, cand: Label, n: usize) {
    // Labels with at least the candidate's reduced cost form a prefix.
    let split = bucket.partition_point(|&id| arena[id as usize].rc >= cand.rc);
    if bucket[..split].iter().any(|&id| dominates(&arena[id as usize], &cand, n)) {
        return;
    }
    let id = arena.len() as u32;
    arena.push(cand);
    let mut tail: Vec<u32> = bucket[split..]
        .iter()
        .copied()
        .filter(|&other| !dominates(&cand, &arena[other as usize], n))
        .collect();
    bucket.truncate(split);
    bucket.push(id);
    bucket.append(&mut tail);
    debug_assert!(bucket.windows(2).all(|w| arena[w[0] as usize].rc >= arena[w[1] as usize].rc));
}

fn trace(arena: &[Label], mut id: u32) -> Vec<usize> {
    let mut arcs = Vec::new();
    while id != ROOT {
        let l = &arena[id as usize];
        if l.arc == ROOT {
            break;
        }
        arcs.push(l.arc as usize);
        id = l.parent;
    }
    arcs.reverse();
    arcs
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedColumn {
    pub column: Column,
    pub reduced_cost: f64,
}

/// Pricing for one pilot, returning ready-made columns.
pub fn solve_pricing(
    instance: &Instance,
    net: &SubproblemNetwork,
    params: &PricingParams,
) -> Vec<PricedColumn> {
    solve_pricing_paths(net, params)
        .into_iter()
        .map(|p| PricedColumn {
            column: Column::from_path(instance, net, &p.arcs),
            reduced_cost: p.reduced_cost,
        })
        .collect()
}

/// Every source-to-sink path, ignoring resources (stops after `limit`).
pub fn enumerate_paths(net: &SubproblemNetwork, limit: usize) -> Vec<Vec<usize>> {
    fn walk(net: &SubproblemNetwork, v: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if v == net.sink {
            out.push(stack.clone());
            return;
        }
        for &a in net.out_arcs(v) {
            stack.push(a);
            walk(net, net.arcs[a].head, stack, out, limit);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    walk(net, net.source, &mut Vec::new(), &mut out, limit);
    out
}

/// Every resource-feasible source-to-sink path (stops after `limit`).
pub fn enumerate_feasible_paths(net: &SubproblemNetwork, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    walk_feasible(net, net.source, net.limits.initial(), &mut stack, &mut out, limit);
    out
}

fn walk_feasible(
    net: &SubproblemNetwork,
    v: usize,
    res: ResourceVector,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if v == net.sink {
        if net.limits.sink_ok(&res) {
            out.push(stack.clone());
        }
        return;
    }
    for &a in net.out_arcs(v) {
        let arc = &net.arcs[a];
        let Some(next) = net.limits.extend(&res, &arc.delta, net.nodes[arc.head].time_minute) else {
            continue;
        };
        stack.push(a);
        walk_feasible(net, arc.head, next, stack, out, limit);
        stack.pop();
    }
}
