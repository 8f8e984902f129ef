//! Exhaustive ground truth for tiny widths.
//!
//! Walks the whole `2^(4w)` state space and keeps every state that emits
//! the zero at `zero_index` and the following `window` words. It shares no
//! code with the attack beyond the generator itself.

use rayon::prelude::*;
use thiserror::Error;

use crate::attack::AttackReport;
use crate::generator::{GeneratorInstance, Keystream, State};
use crate::word::Word;

/// Default state budget: the full `w = 4` space.
pub const DEFAULT_BUDGET: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("BudgetExceeded: {needed} states needed but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub consistent_states: Vec<State>,
    pub window: usize,
    pub states_scanned: u64,
}

/// Every state consistent with `ks[zero_index..=zero_index + window]`.
pub fn brute_force_consistent_states<I: GeneratorInstance + ?Sized>(
    ks: &Keystream,
    zero_index: usize,
    instance: &I,
    window: usize,
    budget: u64,
) -> Result<OracleResult, OracleError> {
    let spec = instance.spec();
    let w = spec.width();
    if w > 8 {
        return Err(OracleError::InvalidArgument(format!(
            "exhaustive search is limited to w <= 8, got {w}"
        )));
    }
    let needed = 1u128 << (4 * w);
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    if ks.spec() != spec {
        return Err(OracleError::InvalidArgument(
            "keystream width mismatch".into(),
        ));
    }
    if zero_index >= ks.len() || ks.len() - zero_index - 1 < window {
        return Err(OracleError::InvalidArgument(format!(
            "window of {window} words after index {zero_index} exceeds keystream length {}",
            ks.len()
        )));
    }
    let expected = &ks.words()[zero_index..=zero_index + window];
    let side = 1u64 << w;
    let matches = |x: State| -> bool {
        let mut s = x;
        for (i, &want) in expected.iter().enumerate() {
            if i > 0 {
                s = instance.t1(&s);
            }
            if instance.output(&s) != want {
                return false;
            }
        }
        true
    };
    // Partitioned on `a`; par_iter collects in order so the result is sorted.
    let consistent_states: Vec<State> = (0..side)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut found = Vec::new();
            for b in 0..side {
                for c in 0..side {
                    for d in 0..side {
                        let x = State::new(a as Word, b, c, d);
                        if matches(x) {
                            found.push(x);
                        }
                    }
                }
            }
            found
        })
        .collect();
    Ok(OracleResult {
        consistent_states,
        window,
        states_scanned: needed as u64,
    })
}

/// True iff the attack recovered exactly the oracle's state set.
pub fn compare_with_report(
    report: &AttackReport,
    oracle: &OracleResult,
) -> Result<bool, OracleError> {
    if report.verified_window != oracle.window {
        return Err(OracleError::InvalidArgument(format!(
            "verification windows differ: attack {} vs oracle {}",
            report.verified_window, oracle.window
        )));
    }
    Ok(report.recovered == oracle.consistent_states)
}
