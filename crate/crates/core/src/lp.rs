//! Dense revised primal simplex for `max c'x  s.t.  Ax = b, x >= 0`, started
//! from a caller-supplied feasible basis. Sized for restricted master
//! problems: a few hundred rows and many sparse columns.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const DEGENERATE_STREAK: usize = 50;
const PERTURBATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LpColumn {
    pub cost: f64,
    /// (row, coefficient) pairs with distinct rows.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub rhs: Vec<f64>,
    pub columns: Vec<LpColumn>,
}

impl LpProblem {
    pub fn rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
    /// Basic column per row position.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingRule {
    /// Most positive reduced cost. A long degenerate run first perturbs the
    /// basis, and a second one switches to Bland for the rest of the solve.
    Dantzig,
    Bland,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    m: usize,
    binv: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    xb: Vec<f64>,
    /// Working right-hand side; differs from the problem's while perturbed.
    rhs: Vec<f64>,
    perturbed: bool,
    /// Reduced-cost tolerance scaled by the largest cost magnitude.
    opt_tol: f64,
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, basis: &[usize]) -> Option<Self> {
        let m = p.rows();
        if basis.len() != m || basis.iter().any(|&j| j >= p.columns.len()) {
            return None;
        }
        let mut is_basic = vec![false; p.columns.len()];
        for &j in basis {
            if std::mem::replace(&mut is_basic[j], true) {
                return None;
            }
        }
        let cost_scale = p.columns.iter().map(|c| c.cost.abs()).fold(1.0, f64::max);
        let mut s = Self {
            p,
            m,
            binv: vec![0.0; m * m],
            basis: basis.to_vec(),
            is_basic,
            xb: vec![0.0; m],
            rhs: p.rhs.clone(),
            perturbed: false,
            opt_tol: OPT_TOL * cost_scale,
        };
        if !s.refactor() {
            return None;
        }
        if s.xb.iter().any(|&v| v < -1e-7) {
            return None;
        }
        Some(s)
    }

    /// Recomputes B^-1 by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(r, v) in &self.p.columns[j].entries {
                a[r * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return false;
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[col * m + k];
                        inv[r * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        }
        true
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            let c = self.p.columns[j].cost;
            if c != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yi, r) in y.iter_mut().zip(row) {
                    *yi += c * r;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let col = &self.p.columns[j];
        col.cost - col.entries.iter().map(|&(r, v)| y[r] * v).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for &(r, v) in &self.p.columns[j].entries {
            for i in 0..m {
                u[i] += self.binv[i * m + r] * v;
            }
        }
        u
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / u[r];
        for i in 0..m {
            self.xb[i] -= theta * u[i];
        }
        self.xb[r] = theta;
        let ur = u[r];
        for k in 0..m {
            self.binv[r * m + k] /= ur;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = u[i];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        for v in &mut self.xb {
            if v.abs() < FEAS_TOL {
                *v = 0.0;
            }
        }
    }

    /// Lifts every basic value by a small distinct amount, moving the
    /// right-hand side to match.
    fn perturb(&mut self) {
        for pos in 0..self.m {
            let delta = PERTURBATION * (1.0 + ((pos * 2_654_435_761) % 1000) as f64 / 1000.0);
            self.xb[pos] += delta;
            for &(r, v) in &self.p.columns[self.basis[pos]].entries {
                self.rhs[r] += delta * v;
            }
        }
        self.perturbed = true;
    }

    /// Restores the true right-hand side and repairs primal feasibility with
    /// dual simplex pivots; the basis stays dual feasible throughout.
    fn unperturb(&mut self, max_pivots: usize) -> Result<usize> {
        self.rhs.clone_from(&self.p.rhs);
        self.perturbed = false;
        if !self.refactor() {
            return Err(Error::Numeric("basis became singular".into()));
        }
        let m = self.m;
        let mut pivots = 0;
        loop {
            let Some((r, &xr)) = self.xb.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) else {
                return Ok(pivots);
            };
            if xr >= -FEAS_TOL {
                return Ok(pivots);
            }
            let y = self.duals();
            let row = &self.binv[r * m..(r + 1) * m];
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..self.p.columns.len() {
                if self.is_basic[j] {
                    continue;
                }
                let alpha: f64 = self.p.columns[j].entries.iter().map(|&(i, v)| row[i] * v).sum();
                if alpha < -PIVOT_TOL {
                    let t = self.reduced_cost(j, &y).min(0.0) / alpha;
                    let better = match enter {
                        None => true,
                        Some((_, bt, ba)) => t < bt - 1e-12 || (t <= bt + 1e-12 && alpha < ba),
                    };
                    if better {
                        enter = Some((j, t, alpha));
                    }
                }
            }
            let Some((q, _, _)) = enter else {
                return Err(Error::Numeric("linear program is infeasible".into()));
            };
            let u = self.ftran(q);
            self.pivot(r, q, &u);
            pivots += 1;
            if pivots % REFACTOR_EVERY == 0 && !self.refactor() {
                return Err(Error::Numeric("basis became singular".into()));
            }
            if pivots >= max_pivots {
                return Err(Error::Numeric(format!("dual cleanup stalled after {pivots} pivots")));
            }
        }
    }

    fn run(&mut self, rule: PricingRule, max_pivots: usize) -> Result<usize> {
        let mut pivots = 0usize;
        let mut since_refactor = 0usize;
        let mut degenerate = 0usize;
        let mut bland = rule == PricingRule::Bland;
        let mut may_perturb = rule == PricingRule::Dantzig;
        loop {
            let y = self.duals();
            if degenerate >= DEGENERATE_STREAK && !bland {
                if may_perturb {
                    log::trace!("simplex perturbs the basis after {pivots} pivots");
                    self.perturb();
                    may_perturb = false;
                } else {
                    log::trace!("simplex switches to Bland's rule after {pivots} pivots");
                    bland = true;
                }
                degenerate = 0;
            }
            let mut enter = None;
            let mut best = self.opt_tol;
            for j in 0..self.p.columns.len() {
                if self.is_basic[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                if d > best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = enter else {
                if self.perturbed {
                    pivots += self.unperturb(max_pivots)?;
                    since_refactor = 0;
                    continue;
                }
                return Ok(pivots);
            };
            let u = self.ftran(q);
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.m {
                if u[i] > PIVOT_TOL {
                    let t = self.xb[i].max(0.0) / u[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            t < ratio - 1e-12
                                || (t <= ratio + 1e-12
                                    && if bland {
                                        self.basis[i] < self.basis[l]
                                    } else {
                                        u[i] > u[l]
                                    })
                        }
                    };
                    if better {
                        ratio = t;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            if ratio <= FEAS_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, &u);
            pivots += 1;
            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                since_refactor = 0;
                if !self.refactor() {
                    return Err(Error::Numeric("basis became singular".into()));
                }
            }
            if pivots >= max_pivots {
                return Err(Error::Numeric(format!("simplex stalled after {pivots} pivots")));
            }
        }
    }

    fn solution(&mut self, pivots: usize) -> LpSolution {
        self.refactor();
        let mut x = vec![0.0; self.p.columns.len()];
        for (pos, &j) in self.basis.iter().enumerate() {
            x[j] = self.xb[pos].max(0.0);
        }
        let objective = self.p.columns.iter().zip(&x).map(|(c, v)| c.cost * v).sum();
        LpSolution { x, duals: self.duals(), objective, basis: self.basis.clone(), pivots }
    }
}

/// Solves the problem from `warm_basis` when it is a feasible basis, else
/// from `fallback_basis`. A stalled run is retried from the fallback with
/// Bland's rule.
pub fn solve(problem: &LpProblem, warm_basis: Option<&[usize]>, fallback_basis: &[usize]) -> Result<LpSolution> {
    let max_pivots = 50 * (problem.rows() + problem.columns.len()) + 1000;
    let warm = warm_basis.and_then(|b| Simplex::new(problem, b));
    let mut first = match warm {
        Some(s) => s,
        None => Simplex::new(problem, fallback_basis)
            .ok_or_else(|| Error::Numeric("fallback basis is singular or infeasible".into()))?,
    };
    match first.run(PricingRule::Dantzig, max_pivots) {
        Ok(p) => Ok(first.solution(p)),
        Err(e) => {
            log::warn!("simplex retry with Bland's rule: {e}");
            let mut s = Simplex::new(problem, fallback_basis)
                .ok_or_else(|| Error::Numeric("fallback basis is singular or infeasible".into()))?;
            let p = s.run(PricingRule::Bland, 20 * max_pivots)?;
            Ok(s.solution(p))
        }
    }
}

/// Reduced cost of a column under the given duals.
pub fn reduced_cost(column: &LpColumn, duals: &[f64]) -> f64 {
    column.cost - column.entries.iter().map(|&(r, v)| duals[r] * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Best basic feasible solution by enumerating all bases.
    fn vertex_oracle(p: &LpProblem) -> f64 {
        let m = p.rows();
        let n = p.columns.len();
        let mut best = f64::NEG_INFINITY;
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            let mut b = DMatrix::<f64>::zeros(m, m);
            for (pos, &j) in idx.iter().enumerate() {
                for &(r, v) in &p.columns[j].entries {
                    b[(r, pos)] = v;
                }
            }
            if let Some(x) = b.clone().lu().solve(&DVector::from_vec(p.rhs.clone())) {
                if x.iter().all(|&v| v >= -1e-9) && (&b * &x - DVector::from_vec(p.rhs.clone())).norm() < 1e-8 {
                    let obj: f64 = idx.iter().zip(x.iter()).map(|(&j, v)| p.columns[j].cost * v).sum();
                    best = best.max(obj);
                }
            }
            // next combination
            let mut i = m;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < n - m + i {
                    idx[i] += 1;
                    for k in i + 1..m {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn random_problem(seed: u64) -> LpProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..=4);
        let mut columns: Vec<LpColumn> = (0..m)
            .map(|i| LpColumn { cost: -rng.gen_range(5.0..20.0), entries: vec![(i, 1.0)] })
            .collect();
        for _ in 0..rng.gen_range(2..=6) {
            let entries: Vec<(usize, f64)> =
                (0..m).filter(|_| rng.gen_bool(0.5)).map(|r| (r, 1.0)).collect();
            if !entries.is_empty() {
                columns.push(LpColumn { cost: rng.gen_range(-5.0..10.0), entries });
            }
        }
        LpProblem { rhs: vec![1.0; m], columns }
    }

    #[test]
    fn matches_vertex_enumeration() {
        for seed in 0..200 {
            let p = random_problem(seed);
            let slack: Vec<usize> = (0..p.rows()).collect();
            let sol = solve(&p, None, &slack).unwrap();
            let oracle = vertex_oracle(&p);
            assert!((sol.objective - oracle).abs() < 1e-7, "seed {seed}: {} vs {oracle}", sol.objective);
            for c in &p.columns {
                assert!(reduced_cost(c, &sol.duals) <= 1e-7);
            }
            for (j, c) in p.columns.iter().enumerate() {
                if sol.x[j] > 1e-7 {
                    assert!(reduced_cost(c, &sol.duals).abs() < 1e-7);
                }
            }
            let dual_obj: f64 = sol.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
            assert!((dual_obj - sol.objective).abs() < 1e-7);
        }
    }

    #[test]
    fn hand_solved_three_variable_lp() {
        // One pilot, one pairing covered by a column worth 10; slack -100.
        // Rows: pairing, pilot. Columns: slack s, static column, schedule.
        let p = LpProblem {
            rhs: vec![1.0, 1.0],
            columns: vec![
                LpColumn { cost: -100.0, entries: vec![(0, 1.0)] },
                LpColumn { cost: 0.0, entries: vec![(1, 1.0)] },
                LpColumn { cost: 10.0, entries: vec![(0, 1.0), (1, 1.0)] },
            ],
        };
        let sol = solve(&p, None, &[0, 1]).unwrap();
        assert!((sol.objective - 10.0).abs() < 1e-12);
        assert!((sol.x[2] - 1.0).abs() < 1e-12 && sol.x[0].abs() < 1e-12);
        let (alpha, gamma) = (sol.duals[0], sol.duals[1]);
        assert!((alpha + gamma - 10.0).abs() < 1e-9);
        assert!(gamma >= -1e-9 && alpha >= -100.0 - 1e-9);
    }

    #[test]
    fn warm_start_resumes() {
        let p = random_problem(7);
        let slack: Vec<usize> = (0..p.rows()).collect();
        let cold = solve(&p, None, &slack).unwrap();
        let warm = solve(&p, Some(&cold.basis), &slack).unwrap();
        assert_eq!(warm.pivots, 0);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
        // An infeasible warm basis falls back silently.
        let bogus = vec![p.columns.len() - 1; p.rows()];
        assert!(solve(&p, Some(&bogus), &slack).is_ok());
    }

    /// Set partitioning with big slack penalties and many tied integer costs,
    /// degenerate enough to trigger the perturbation path.
    fn degenerate_problem(seed: u64) -> LpProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 40;
        let mut columns: Vec<LpColumn> =
            (0..m).map(|i| LpColumn { cost: -1_000_000.0, entries: vec![(i, 1.0)] }).collect();
        for _ in 0..1500 {
            let start = rng.gen_range(0..m);
            let len = rng.gen_range(1..=4).min(m - start);
            let entries: Vec<(usize, f64)> = (start..start + len).map(|r| (r, 1.0)).collect();
            columns.push(LpColumn { cost: rng.gen_range(0..4) as f64 * len as f64, entries });
        }
        LpProblem { rhs: vec![1.0; m], columns }
    }

    #[test]
    fn degenerate_problems_carry_an_optimality_certificate() {
        for seed in 0..5 {
            let p = degenerate_problem(seed);
            let slack: Vec<usize> = (0..p.rows()).collect();
            let sol = solve(&p, None, &slack).unwrap();
            let mut ax = vec![0.0; p.rows()];
            for (c, &x) in p.columns.iter().zip(&sol.x) {
                assert!(x >= 0.0);
                for &(r, v) in &c.entries {
                    ax[r] += v * x;
                }
            }
            for (a, b) in ax.iter().zip(&p.rhs) {
                assert!((a - b).abs() < 1e-7, "seed {seed}: row value {a}");
            }
            for (c, &x) in p.columns.iter().zip(&sol.x) {
                let d = reduced_cost(c, &sol.duals);
                assert!(d <= 1e-3, "seed {seed}: reduced cost {d}");
                if x > 1e-7 {
                    assert!(d.abs() < 1e-3);
                }
            }
            let dual_obj: f64 = sol.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
            assert!((dual_obj - sol.objective).abs() < 1e-6, "seed {seed}");

            let mut bland = Simplex::new(&p, &slack).unwrap();
            let pivots = bland.run(PricingRule::Bland, 10_000_000).unwrap();
            assert!((bland.solution(pivots).objective - sol.objective).abs() < 1e-6);
        }
    }
}
