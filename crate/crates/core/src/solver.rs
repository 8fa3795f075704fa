//! Numerical discovery of Hadamard matrices on the seed parameterization.
//!
//! [`solve_hadamard`] runs damped Gauss–Newton (Levenberg) iterations on the
//! moduli residuals from random starts; [`trace_family`] follows a solution
//! family by fixing one free phase on a grid and re-solving for the rest.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::{dephase, equivalent_within, invariant_fingerprint, wrap_phase, EXHAUSTIVE_MAX_ORDER};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::moduli::{analyze, numerical_rank, residual_vector, singular_values, ResidualReport};
use crate::unitary_param::{free_angle_count, hadamard_seed, ParamPoint};

/// Finite-difference step of the solver's Jacobian.
const FD_STEP: f64 = 1e-6;
/// Extra iterations after the tolerance is first met.
// Extra steps once `tol` is met. Near branch crossings the residual is
// quadratic in the distance and the iteration only converges linearly, so
// polishing runs to the floor rather than for a fixed count.
const POLISH_ITERATIONS: usize = 40;
const POLISH_FLOOR: f64 = 1e-15;
/// Matrices closer than this (after equivalence) are duplicates.
const DEDUP_EPS: f64 = 1e-6;
/// Phase shift used to move a degenerate solution to a generic point.
const REGULARIZE_SHIFT: f64 = 0.25;
const REGULARIZE_MAX_ATTEMPTS: usize = 16;
/// Largest admissible entry jump between consecutive trace points.
const TRACE_MAX_JUMP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub n: usize,
    pub max_restarts: usize,
    pub max_iterations: usize,
    pub tol: f64,
    pub rng_seed: u64,
    pub damping_init: f64,
}

impl SolveConfig {
    pub fn new(n: usize, rng_seed: u64) -> Self {
        SolveConfig { n, max_restarts: 200, max_iterations: 500, tol: 1e-10, rng_seed, damping_init: 1e-3 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Domain(format!("solver needs n >= 3, got {}", self.n)));
        }
        if self.max_restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Domain("restart and iteration budgets must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1e-6) {
            return Err(Error::Domain(format!("tol = {} must lie in (0, 1e-6)", self.tol)));
        }
        if !(self.damping_init > 0.0 && self.damping_init.is_finite()) {
            return Err(Error::Domain("damping_init must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub point: ParamPoint,
    pub report: ResidualReport,
    pub matrix: CMatrix,
    /// Local dimension in the seed coordinates. Overcounts when an angle sits
    /// on the edge of its chart (0 or π/2), where some phases drop out.
    pub family_dim: usize,
}

impl Solution {
    /// Builds the solution record of a point that solves the system.
    pub fn at(point: ParamPoint) -> Result<Self> {
        let report = analyze(&point)?;
        let matrix = hadamard_seed(&point)?;
        let family_dim = report.family_dim.expect("filled by analyze");
        Ok(Solution { point, report, matrix, family_dim })
    }
}

/// Solutions plus restart statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub attempted: usize,
    pub converged: usize,
    pub solutions: Vec<Solution>,
}

/// Outcome of one damped least-squares run.
#[derive(Debug, Clone)]
struct LmOutcome {
    x: Vec<f64>,
    max_abs: f64,
    converged: bool,
}

struct Problem {
    n: usize,
    n_angles: usize,
    /// Index into the flat vector that is held fixed.
    fixed: Option<usize>,
}

impl Problem {
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = residual_vector(&ParamPoint::from_vec(self.n, x)?)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite residual".into()));
        }
        Ok(r)
    }

    fn project(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = if k < self.n_angles { v.clamp(0.0, FRAC_PI_2) } else { wrap_phase(*v) };
        }
    }

    fn free(&self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&k| Some(k) != self.fixed).collect()
    }

    fn jacobian(&self, x: &[f64], free: &[usize], rows: usize) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(rows, free.len());
        let mut xp = x.to_vec();
        for (c, &k) in free.iter().enumerate() {
            xp[k] = x[k] + FD_STEP;
            let fp = self.residual(&xp)?;
            xp[k] = x[k] - FD_STEP;
            let fm = self.residual(&xp)?;
            xp[k] = x[k];
            for r in 0..rows {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * FD_STEP);
            }
        }
        Ok(jac)
    }
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg iterations: solve `(JᵀJ + λI)δ = −Jᵀr`, accept when the
/// squared residual drops, `λ ÷ 10` on success and `× 10` on failure.
fn levenberg(
    prob: &Problem,
    x0: &[f64],
    max_iterations: usize,
    tol: f64,
    damping_init: f64,
    polish: usize,
) -> Result<LmOutcome> {
    let mut x = x0.to_vec();
    prob.project(&mut x);
    let mut r = prob.residual(&x)?;
    let mut cost = sum_sq(&r);
    let free = prob.free(x.len());
    let rows = r.len();
    let mut lambda = damping_init;
    let mut polish_left = polish;
    for _ in 0..max_iterations {
        let m = max_abs(&r);
        if m <= tol {
            if polish_left == 0 || m <= POLISH_FLOOR {
                break;
            }
            polish_left -= 1;
        }
        if free.is_empty() {
            break;
        }
        let jac = prob.jacobian(&x, &free, rows)?;
        let jt = jac.transpose();
        let h = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = h.clone();
            for d in 0..free.len() {
                a[(d, d)] += lambda;
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let mut xn = x.clone();
            for (c, &k) in free.iter().enumerate() {
                xn[k] += step[c];
            }
            prob.project(&mut xn);
            let rn = prob.residual(&xn)?;
            let cn = sum_sq(&rn);
            if cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    let m = max_abs(&r);
    Ok(LmOutcome { x, max_abs: m, converged: m <= tol })
}

/// Whether the rank reading at `x` is trustworthy: a clear gap in the
/// singular values and no angle on the boundary of its chart.
fn is_clean(point: &ParamPoint) -> Result<bool> {
    if point.free_angles.iter().any(|&a| !(1e-4..=FRAC_PI_2 - 1e-4).contains(&a)) {
        return Ok(false);
    }
    if point.dim() == 0 {
        return Ok(true);
    }
    let sv = singular_values(&crate::moduli::jacobian_fd(point, FD_STEP)?);
    let rank = numerical_rank(&sv);
    let top = sv[0];
    if rank == 0 {
        return Ok(false);
    }
    let kept_ok = sv[rank - 1] >= 1e-4 * top;
    let dropped_ok = sv.get(rank).is_none_or(|&s| s <= 1e-8 * top);
    Ok(kept_ok && dropped_ok)
}

/// Moves a converged but degenerate point to a nearby generic point of the
/// same solution set: one coordinate is shifted and held fixed while the
/// rest are re-solved. Phases are tried before angles. Returns the input
/// when no shifted point is clean.
fn regularize(cfg: &SolveConfig, x: Vec<f64>) -> Result<Vec<f64>> {
    let n = cfg.n;
    let n_angles = free_angle_count(n);
    if is_clean(&ParamPoint::from_vec(n, &x)?)? {
        return Ok(x);
    }
    let coords = (n_angles..x.len()).chain(0..n_angles);
    let mut attempts = 0;
    for k in coords {
        for shift in [REGULARIZE_SHIFT, -REGULARIZE_SHIFT] {
            if attempts == REGULARIZE_MAX_ATTEMPTS {
                return Ok(x);
            }
            attempts += 1;
            let prob = Problem { n, n_angles, fixed: Some(k) };
            let mut start = x.clone();
            start[k] += shift;
            let out = levenberg(&prob, &start, cfg.max_iterations, cfg.tol, cfg.damping_init, POLISH_ITERATIONS)?;
            if out.converged && is_clean(&ParamPoint::from_vec(n, &out.x)?)? {
                return Ok(out.x);
            }
        }
    }
    Ok(x)
}

/// Independent generator for restart `index`.
fn restart_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_restart(cfg: &SolveConfig, index: usize) -> Result<Option<Vec<f64>>> {
    let n_angles = free_angle_count(cfg.n);
    let mut rng = restart_rng(cfg.rng_seed, index);
    let x0 = ParamPoint::random(cfg.n, &mut rng).to_vec();
    let prob = Problem { n: cfg.n, n_angles, fixed: None };
    let out = levenberg(&prob, &x0, cfg.max_iterations, cfg.tol, cfg.damping_init, POLISH_ITERATIONS)?;
    if !out.converged {
        return Ok(None);
    }
    Ok(Some(regularize(cfg, out.x)?))
}

/// Deduplicating collector: two solutions are the same when their matrices
/// are equivalent (exhaustive search up to order 6) or, above that, when
/// their dephased cores agree entrywise.
struct Dedup {
    kept: Vec<(Vec<f64>, CMatrix)>,
}

impl Dedup {
    fn is_new(&mut self, m: &CMatrix) -> Result<bool> {
        let n = m.n();
        if n <= EXHAUSTIVE_MAX_ORDER {
            let fp = invariant_fingerprint(m);
            for (kfp, km) in &self.kept {
                let close = kfp.iter().zip(&fp).all(|(a, b)| (a - b).abs() <= DEDUP_EPS);
                if close && equivalent_within(km, m, DEDUP_EPS)?.is_some() {
                    return Ok(false);
                }
            }
            self.kept.push((fp, m.clone()));
        } else {
            let core = dephase(m)?.core;
            if self.kept.iter().any(|(_, km)| km.max_abs_diff(&core) <= DEDUP_EPS) {
                return Ok(false);
            }
            self.kept.push((Vec::new(), core));
        }
        Ok(true)
    }
}

/// Random-restart search; see [`solve_hadamard_report`].
pub fn solve_hadamard(cfg: &SolveConfig) -> Result<Vec<Solution>> {
    Ok(solve_hadamard_report(cfg)?.solutions)
}

/// Runs `max_restarts` independent restarts (concurrently, merged in
/// restart order), keeps the converged points, and drops equivalent
/// duplicates. Output depends only on the configuration.
pub fn solve_hadamard_report(cfg: &SolveConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let outcomes: Vec<Result<Option<Vec<f64>>>> =
        (0..cfg.max_restarts).into_par_iter().map(|i| run_restart(cfg, i)).collect();
    let mut converged = 0;
    let mut dedup = Dedup { kept: Vec::new() };
    let mut solutions = Vec::new();
    for outcome in outcomes {
        let Some(x) = outcome? else { continue };
        converged += 1;
        let sol = Solution::at(ParamPoint::from_vec(cfg.n, &x)?)?;
        if dedup.is_new(&sol.matrix)? {
            solutions.push(sol);
        }
    }
    Ok(SolveReport { n: cfg.n, attempted: cfg.max_restarts, converged, solutions })
}

/// A traced chain; `failed_at` is the grid index where convergence was
/// lost, if it was.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub phase_index: usize,
    pub grid: Vec<f64>,
    pub chain: Vec<Solution>,
    pub failed_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub max_iterations: usize,
    pub tol: f64,
    pub damping_init: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { max_iterations: 500, tol: 1e-10, damping_init: 1e-3 }
    }
}

/// `start.0 + k·step` for `k = 0, 1, …` while within `to` (inclusive up
/// to a small slack).
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 || !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::Domain(format!("bad grid from {from} to {to} step {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Error::Domain("grid too large".into()));
    }
    Ok((0..count).map(|k| from + k as f64 * step).collect())
}

/// Follows the family through `start` along free phase `phase_index`.
pub fn trace_family(start: &Solution, phase_index: usize, grid: &[f64]) -> Result<TraceResult> {
    trace_family_with(start, phase_index, grid, &TraceConfig::default())
}

pub fn trace_family_with(
    start: &Solution,
    phase_index: usize,
    grid: &[f64],
    cfg: &TraceConfig,
) -> Result<TraceResult> {
    let point = &start.point;
    point.validate()?;
    let n = point.n;
    if start.family_dim < 1 {
        return Err(Error::Domain("start solution is isolated (family_dim = 0)".into()));
    }
    if phase_index >= point.free_phases.len() {
        return Err(Error::Domain(format!(
            "phase index {phase_index} out of range 0..{}",
            point.free_phases.len()
        )));
    }
    let n_angles = free_angle_count(n);
    let k = n_angles + phase_index;
    let prob = Problem { n, n_angles, fixed: Some(k) };
    let mut x = point.to_vec();
    let mut prev = hadamard_seed(point)?;
    let mut chain = Vec::with_capacity(grid.len());
    for (gi, &t) in grid.iter().enumerate() {
        let mut guess = x.clone();
        guess[k] = wrap_phase(t);
        let fail = |msg: String| TraceResult {
            phase_index,
            grid: grid.to_vec(),
            chain: Vec::new(),
            failed_at: Some(gi),
            diagnostic: Some(msg),
        };
        let out = levenberg(&prob, &guess, cfg.max_iterations, cfg.tol, cfg.damping_init, POLISH_ITERATIONS)?;
        if !out.converged {
            let mut res = fail(format!("no convergence at t = {t} (max residual {:e})", out.max_abs));
            res.chain = chain;
            return Ok(res);
        }
        let next = out.x;
        let sol = Solution::at(ParamPoint::from_vec(n, &next)?)?;
        let jump = sol.matrix.max_abs_diff(&prev);
        if gi > 0 && jump > TRACE_MAX_JUMP {
            let mut res = fail(format!("jump of {jump} between consecutive points at t = {t}"));
            res.chain = chain;
            return Ok(res);
        }
        prev = sol.matrix.clone();
        x = next;
        chain.push(sol);
    }
    Ok(TraceResult { phase_index, grid: grid.to_vec(), chain, failed_at: None, diagnostic: None })
}

/// Free phases ordered by the share of the Jacobian's null space carried by
/// their coordinate, largest first; empty for isolated solutions.
pub fn trace_phase_order(sol: &Solution) -> Result<Vec<usize>> {
    let point = &sol.point;
    if sol.family_dim == 0 || point.free_phases.is_empty() {
        return Ok(Vec::new());
    }
    let jac = crate::moduli::jacobian_fd(point, FD_STEP)?;
    let dim = jac.ncols();
    let svd = jac.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let null_rows = &order[dim - sol.family_dim.min(dim)..];
    let n_angles = point.free_angles.len();
    let weight = |p: usize| null_rows.iter().map(|&r| vt[(r, n_angles + p)].powi(2)).sum::<f64>();
    let mut phases: Vec<usize> = (0..point.free_phases.len()).collect();
    phases.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));
    Ok(phases)
}

/// Traces a full period along each free phase in [`trace_phase_order`]
/// and returns the first complete chain, or the longest partial one.
pub fn trace_full_period(sol: &Solution, step: f64) -> Result<TraceResult> {
    let mut best: Option<TraceResult> = None;
    for k in trace_phase_order(sol)? {
        let grid = full_period_grid(sol.point.free_phases[k], step);
        let t = trace_family(sol, k, &grid)?;
        if t.failed_at.is_none() {
            return Ok(t);
        }
        if best.as_ref().is_none_or(|b| t.chain.len() > b.chain.len()) {
            best = Some(t);
        }
    }
    best.ok_or_else(|| Error::Domain("solution is isolated; nothing to trace".into()))
}

/// `TAU`-periodic grid starting at the traced phase's current value.
pub fn full_period_grid(start_value: f64, step: f64) -> Vec<f64> {
    let count = (TAU / step).ceil() as usize + 1;
    (0..count).map(|k| start_value + k as f64 * step).collect()
}
