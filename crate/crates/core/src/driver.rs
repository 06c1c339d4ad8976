//! Time loop with an output schedule.
//!
//! Steps are clipped so the state lands exactly on every output time. A
//! clipped step may be arbitrarily short; only the step the bounds select is
//! checked against `dt_min`.

use crate::error::Error;
use crate::model::Model;
use crate::state::FieldState;
use crate::timestep::{self, StepPolicy, StepReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_end: f64,
    /// Raster snapshots at `0, Δ, 2Δ, …` and at `t_end`.
    pub snapshot_every: Option<f64>,
    /// Series rows at `0, Δ, 2Δ, …` and at `t_end`.
    pub series_every: Option<f64>,
    /// Stops early after this many steps.
    pub max_steps: Option<usize>,
}

impl Schedule {
    pub fn until(t_end: f64) -> Self {
        Schedule {
            t_end,
            snapshot_every: None,
            series_every: None,
            max_steps: None,
        }
    }

    /// Output times of one cadence, `t_end` included.
    pub fn times(every: f64, t_end: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let t = k as f64 * every;
            if t >= t_end {
                break;
            }
            out.push(t);
            k += 1;
        }
        out.push(t_end);
        out
    }
}

/// What the loop hands to the sink.
#[derive(Debug)]
pub enum Event<'a> {
    Step {
        step: usize,
        report: &'a StepReport,
    },
    Output {
        step: usize,
        state: &'a FieldState,
        snapshot: bool,
        series: bool,
    },
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: FieldState,
    pub steps: usize,
}

/// A failed run together with the last state that was valid.
#[derive(Debug)]
pub struct Abort {
    pub error: Error,
    pub last: FieldState,
    pub step: usize,
}

struct Cadence {
    every: Option<f64>,
    k: usize,
}

impl Cadence {
    fn next(&self, t_end: f64) -> f64 {
        match self.every {
            Some(e) => (self.k as f64 * e).min(t_end),
            None => t_end,
        }
    }

    fn passes(&mut self, t: f64, t_end: f64) -> bool {
        let Some(e) = self.every else {
            return false;
        };
        if t < self.next(t_end) {
            return false;
        }
        while self.k as f64 * e <= t {
            self.k += 1;
        }
        true
    }
}

pub fn run(
    model: &Model,
    initial: FieldState,
    policy: &StepPolicy,
    schedule: &Schedule,
    mut sink: impl FnMut(Event) -> crate::Result<()>,
) -> Result<RunSummary, Abort> {
    let t_end = schedule.t_end;
    let mut snaps = Cadence {
        every: schedule.snapshot_every.filter(|&e| e > 0.0),
        k: 0,
    };
    let mut series = Cadence {
        every: schedule.series_every.filter(|&e| e > 0.0),
        k: 0,
    };
    let mut state = initial;
    let mut step = 0usize;
    let abort = |error: Error, last: &FieldState, step: usize| Abort {
        error,
        last: last.clone(),
        step,
    };

    let emit = |state: &FieldState,
                    step: usize,
                    snaps: &mut Cadence,
                    series: &mut Cadence,
                    sink: &mut dyn FnMut(Event) -> crate::Result<()>|
     -> crate::Result<()> {
        let snapshot = snaps.passes(state.t, t_end);
        let row = series.passes(state.t, t_end);
        if snapshot || row {
            sink(Event::Output {
                step,
                state,
                snapshot,
                series: row,
            })?;
        }
        Ok(())
    };

    emit(&state, 0, &mut snaps, &mut series, &mut sink).map_err(|e| abort(e, &state, 0))?;
    while state.t < t_end {
        if schedule.max_steps.is_some_and(|m| step >= m) {
            break;
        }
        let stop = snaps.next(t_end).min(series.next(t_end)).min(t_end);
        let dt = timestep::select_dt(model, &state, policy).map_err(|e| abort(e, &state, step))?;
        let remaining = stop - state.t;
        let clipped = state.t + dt >= stop;
        let (mut next, mut report) = timestep::advance_with_dt(model, &state, if clipped { remaining } else { dt })
            .map_err(|e| abort(e, &state, step))?;
        if clipped {
            next.t = stop;
            report.t = stop;
        }
        step += 1;
        sink(Event::Step { step, report: &report }).map_err(|e| abort(e, &next, step))?;
        state = next;
        emit(&state, step, &mut snaps, &mut series, &mut sink).map_err(|e| abort(e, &state, step))?;
    }
    Ok(RunSummary { state, steps: step })
}
