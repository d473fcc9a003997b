//! Maximum multinomial likelihood estimation.

mod counts;
mod em;
mod likelihood;

pub use counts::GridCounts;
pub use em::{
    e_step, fit_mml, fit_mml_detailed, fit_mml_on_grid, initial_states, m_step, run_em, write_trace, EStepWeights,
    EmConfig, EmRun, EmState, MStepOutcome, MmlFit, TraceRecord, MONOTONE_SLACK,
};
pub use likelihood::{j_fn, loglik_values, multinomial_loglik};
