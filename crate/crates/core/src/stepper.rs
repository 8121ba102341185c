//! Classical fourth-order Runge-Kutta integration with diagnostics and
//! safety stops.

use crate::error::{Error, Result};
use crate::evolution::rhs;
use crate::model::{diagnostics, DiagnosticsRecord, GraphState, PhysicalParams};
use crate::quadrature::QuadratureConfig;

/// Right-hand side values for one stage with their error budget.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRhs {
    pub values: Vec<f64>,
    pub budget: f64,
}

impl StageRhs {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Anything that can drive a step: the physical right-hand side or a test
/// problem.
pub trait Evaluator {
    fn rhs(&self, state: &GraphState) -> Result<StageRhs>;

    /// Called on every stage state before its right-hand side.
    fn admissible(&self, _state: &GraphState) -> Result<()> {
        Ok(())
    }
}

impl<F: Fn(&GraphState) -> Result<StageRhs>> Evaluator for F {
    fn rhs(&self, state: &GraphState) -> Result<StageRhs> {
        self(state)
    }
}

/// The contour equation of `params` in its geometry.
#[derive(Debug, Clone, Copy)]
pub struct Physics<'a> {
    pub params: &'a PhysicalParams,
    pub quad: &'a QuadratureConfig,
}

impl Evaluator for Physics<'_> {
    fn rhs(&self, state: &GraphState) -> Result<StageRhs> {
        let r = rhs(self.params, state, self.quad)?;
        Ok(StageRhs { values: r.values, budget: r.budget })
    }

    fn admissible(&self, state: &GraphState) -> Result<()> {
        state.check_admissible(self.params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: GraphState,
    pub stages: [StageRhs; 4],
}

impl Step {
    pub fn budget(&self) -> f64 {
        self.stages.iter().map(|s| s.budget).fold(0.0, f64::max)
    }
}

fn stage<E: Evaluator>(eval: &E, state: &GraphState, k: usize) -> Result<StageRhs> {
    let wrap = |e: Error| match e {
        Error::GapCollapse(_) | Error::StripAmplitude(_) => Error::StageConstraintViolated { stage: k, reason: e.to_string() },
        other => other,
    };
    eval.admissible(state).map_err(wrap)?;
    eval.rhs(state).map_err(wrap)
}

fn axpy(state: &GraphState, a: f64, k: &StageRhs, t: f64) -> Result<GraphState> {
    let v = state.values().iter().zip(&k.values).map(|(f, d)| f + a * d).collect();
    state.with_values(v, t)
}

pub fn rk4_step<E: Evaluator>(state: &GraphState, dt: f64, eval: &E) -> Result<Step> {
    let k1 = stage(eval, state, 1)?;
    rk4_step_from(state, dt, eval, k1)
}

/// As `rk4_step`, given the first stage.
pub fn rk4_step_from<E: Evaluator>(state: &GraphState, dt: f64, eval: &E, k1: StageRhs) -> Result<Step> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let t = state.time();
    let k2 = stage(eval, &axpy(state, 0.5 * dt, &k1, t + 0.5 * dt)?, 2)?;
    let k3 = stage(eval, &axpy(state, 0.5 * dt, &k2, t + 0.5 * dt)?, 3)?;
    let k4 = stage(eval, &axpy(state, dt, &k3, t + dt)?, 4)?;
    let v = state
        .values()
        .iter()
        .enumerate()
        .map(|(i, f)| f + dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]))
        .collect();
    Ok(Step { state: state.with_values(v, t + dt)?, stages: [k1, k2, k3, k4] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TimeReached,
    GapCollapse,
    SlopeBlowup,
    BudgetExceeded,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub diagnostics: DiagnosticsRecord,
    /// Largest stage budget of the step that produced this state (for the
    /// initial state, of its own right-hand side).
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub series: Vec<RunRecord>,
    pub final_state: GraphState,
    pub termination: Termination,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every this many steps (and at the end).
    pub output_every: usize,
    pub slope_cap: f64,
    /// A stage is refused when its budget exceeds this times its sup norm.
    pub budget_factor: f64,
    pub quad: QuadratureConfig,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: 1e-3,
            t_end: 1.0,
            output_every: 1,
            slope_cap: 50.0,
            budget_factor: 1e-4,
            quad: QuadratureConfig::default(),
        }
    }
}

impl StepperConfig {
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

fn classify(e: &Error) -> Option<Termination> {
    match e {
        Error::GapCollapse(_) => Some(Termination::GapCollapse),
        Error::StageConstraintViolated { .. } | Error::StripAmplitude(_) => Some(Termination::GapCollapse),
        Error::NonFinite(_) => Some(Termination::NonFinite),
        Error::ToleranceNotMet { .. } => Some(Termination::BudgetExceeded),
        _ => None,
    }
}

fn over_budget(s: &StageRhs, factor: f64) -> bool {
    s.budget > factor * s.sup_norm()
}

/// Integrates the contour equation of `params` from `initial`.
pub fn run(params: &PhysicalParams, initial: &GraphState, cfg: &StepperConfig) -> Result<RunResult> {
    run_with(params, initial, cfg, &Physics { params, quad: &cfg.quad })
}

pub fn run_with<E: Evaluator>(
    params: &PhysicalParams,
    initial: &GraphState,
    cfg: &StepperConfig,
    eval: &E,
) -> Result<RunResult> {
    cfg.quad.validate()?;
    if !(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) || cfg.output_every == 0 {
        return Err(Error::InvalidParameter("dt > 0, t_end >= 0 and output_every >= 1 required".into()));
    }
    eval.admissible(initial)?;
    let n = cfg.n_steps();
    let record = |s: &GraphState, budget: f64| -> Result<RunRecord> {
        Ok(RunRecord { diagnostics: diagnostics(s, params)?, budget })
    };
    let mut state = initial.clone();
    let mut k1 = match eval.rhs(&state) {
        Ok(k) => k,
        Err(e) => match classify(&e) {
            Some(t) => return Ok(RunResult { series: vec![record(&state, 0.0)?], final_state: state, termination: t, steps: 0 }),
            None => return Err(e),
        },
    };
    let mut series = vec![record(&state, k1.budget)?];
    let mut last_budget = k1.budget;
    let mut termination = Termination::TimeReached;
    let mut steps = 0;
    let t0 = initial.time();
    while steps < n {
        if over_budget(&k1, cfg.budget_factor) {
            termination = Termination::BudgetExceeded;
            break;
        }
        let step = match rk4_step_from(&state, cfg.dt, eval, k1.clone()) {
            Ok(s) => s,
            Err(e) => match classify(&e) {
                Some(t) => {
                    termination = t;
                    break;
                }
                None => return Err(e),
            },
        };
        if step.stages[1..].iter().any(|s| over_budget(s, cfg.budget_factor)) {
            termination = Termination::BudgetExceeded;
            break;
        }
        let t = t0 + (steps + 1) as f64 * cfg.dt;
        let next = step.state.with_values(step.state.values().to_vec(), t)?;
        if next.values().iter().any(|v| !v.is_finite()) {
            termination = Termination::NonFinite;
            break;
        }
        if let Err(e) = eval.admissible(&next) {
            match classify(&e) {
                Some(t) => {
                    termination = t;
                    break;
                }
                None => return Err(e),
            }
        }
        steps += 1;
        state = next;
        last_budget = step.budget();
        let slope = state.slopes().iter().map(|p| p.abs()).fold(0.0, f64::max);
        let stop = if !slope.is_finite() {
            Some(Termination::NonFinite)
        } else if slope > cfg.slope_cap {
            Some(Termination::SlopeBlowup)
        } else {
            None
        };
        if stop.is_some() || steps % cfg.output_every == 0 || steps == n {
            series.push(record(&state, last_budget)?);
        }
        if let Some(t) = stop {
            termination = t;
            break;
        }
        if steps == n {
            break;
        }
        k1 = match stage(eval, &state, 1) {
            Ok(k) => k,
            Err(e) => match classify(&e) {
                Some(t) => {
                    termination = t;
                    break;
                }
                None => return Err(e),
            },
        };
    }
    if series.last().map(|r| r.diagnostics.time) != Some(state.time()) {
        series.push(record(&state, last_budget)?);
    }
    Ok(RunResult { series, final_state: state, termination, steps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalOrder {
    Observed {
        /// Sup-norm differences between the dt and dt/2, and dt/2 and dt/4 runs.
        errors: [f64; 2],
        ratio: f64,
        order: f64,
    },
    /// Both differences vanish (for instance a steady state).
    NotApplicable,
}

/// Self-convergence of the time integrator: runs with dt, dt/2 and dt/4 to
/// the same final time.
pub fn temporal_order(params: &PhysicalParams, initial: &GraphState, cfg: &StepperConfig) -> Result<TemporalOrder> {
    let finals = [1.0, 2.0, 4.0].map(|d| {
        let c = StepperConfig { dt: cfg.dt / d, output_every: usize::MAX, ..*cfg };
        run(params, initial, &c)
    });
    let mut f = Vec::with_capacity(3);
    for r in finals {
        let r = r?;
        if r.termination != Termination::TimeReached {
            return Err(Error::InvalidParameter(format!("order study run stopped early: {:?}", r.termination)));
        }
        f.push(r.final_state);
    }
    let diff = |a: &GraphState, b: &GraphState| {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let errors = [diff(&f[0], &f[1]), diff(&f[1], &f[2])];
    if errors[0] == 0.0 && errors[1] == 0.0 {
        return Ok(TemporalOrder::NotApplicable);
    }
    let ratio = errors[0] / errors[1];
    Ok(TemporalOrder::Observed { errors, ratio, order: ratio.log2() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_graph, Geometry, GridSpec, Preset};

    #[test]
    fn rk4_polynomial_on_decay() {
        let g = build_initial_graph(&Preset::Flat(1.0), &GridSpec::new(16), Geometry::Torus).unwrap();
        let decay = |s: &GraphState| Ok(StageRhs { values: s.values().iter().map(|v| -v).collect(), budget: 0.0 });
        let step = rk4_step(&g, 0.1, &decay).unwrap();
        let want = 1.0 - 0.1 + 0.005 - 0.1f64.powi(3) / 6.0 + 0.1f64.powi(4) / 24.0;
        assert!(step.state.values().iter().all(|v| (v - want).abs() < 1e-15));
        assert!((want - (-0.1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let g = build_initial_graph(&Preset::Case1, &GridSpec::new(32), Geometry::Torus).unwrap();
        let zero = |s: &GraphState| Ok(StageRhs { values: vec![0.0; s.len()], budget: 0.0 });
        let step = rk4_step(&g, 0.01, &zero).unwrap();
        assert_eq!(step.state.values(), g.values());
        assert!(rk4_step(&g, 0.0, &zero).is_err());
    }
}
