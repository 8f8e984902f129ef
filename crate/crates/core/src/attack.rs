//! Internal-state recovery for generalized TF-1 generators.
//!
//! The output is `S(t2(A)) * (f(A) | 1)`. The second factor is odd, hence
//! invertible mod `2^w`, so a zero output word forces `t2(A) = 0` for the
//! state `A` that produced it. From there:
//!
//! 1. Enumerate every prefix of `k = w/2 + 1` columns with `t2 = 0` on those
//!    columns (about `2^(3k)` of them). Column `k` of `t2` after one more
//!    update is the LSB of the next output word, so each candidate is
//!    stepped forward through truncated updates and compared with the
//!    keystream one LSB at a time. A wrong candidate dies after about two
//!    steps on average.
//! 2. For each survivor, enumerate the remaining high columns consistent
//!    with `t2(A) = 0` and verify each full state against the keystream.
//!
//! One counted operation is a stage-1 filter step (truncated update,
//! truncated `t2`, one bit compare) or a stage-2 verification step (full
//! update and output compare). The total lands near `16 * 2^(1.5w)`.
//!
//! Stage 1 is split into a fixed set of chunks (ranges of `a_low` in
//! trivial mode, first-column branches in DFS mode) and stage 2 runs per
//! survivor. Chunk results are merged in chunk order and sorted, so reports
//! do not depend on the worker count.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::ThreadPool;
use thiserror::Error;

use crate::error::Error;
use crate::generator::{ColumnPrefix, GeneratorInstance, Keystream, State};
use crate::word::{low_mask, Word, WordSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error(
        "NeedMoreKeystream: no zero output word in {len} words; \
         expect to need about 2^{width} = {expected} words"
    )]
    NeedMoreKeystream {
        len: usize,
        width: u32,
        expected: u128,
    },
    #[error("InsufficientTail: zero output at index {zero_index} is the last keystream word")]
    InsufficientTail { zero_index: usize },
    #[error(
        "SurvivorOverflow: {survivors} stage-1 survivors exceed the cap of {max} \
         (horizon {horizon}); supply a longer tail or raise the horizon"
    )]
    SurvivorOverflow {
        survivors: usize,
        max: usize,
        horizon: usize,
    },
    #[error(
        "ParamsMismatch: no state at any of {positions_tried} zero positions reproduces the \
         keystream; the keystream is inconsistent with the instance or constants"
    )]
    ParamsMismatch { positions_tried: usize },
    #[error(transparent)]
    Config(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Direct enumeration of `(a, b, target - a, d)`; TF-1's `t2 = a + c` only.
    Trivial,
    /// Column-by-column depth-first search; any instance.
    Dfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackConfig {
    /// Stage-1 filter length in keystream bits; `None` means `3k`.
    pub filter_horizon: Option<usize>,
    pub verify_words: usize,
    pub max_survivors: usize,
    pub max_zero_positions: usize,
    pub mode: EnumerationMode,
    pub workers: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            filter_horizon: None,
            verify_words: 4,
            max_survivors: 4096,
            max_zero_positions: 8,
            mode: EnumerationMode::Trivial,
            workers: 1,
        }
    }
}

impl AttackConfig {
    fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be at least 1")));
        if self.filter_horizon == Some(0) {
            return bad("filter horizon");
        }
        if self.verify_words == 0 {
            return bad("verify_words");
        }
        if self.max_survivors == 0 {
            return bad("max_survivors");
        }
        if self.max_zero_positions == 0 {
            return bad("max_zero_positions");
        }
        if self.workers == 0 {
            return bad("workers");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounters {
    pub stage1_candidates: u64,
    pub stage1_filter_steps: u64,
    pub stage1_survivors: u64,
    pub stage2_candidates: u64,
    pub stage2_verifications: u64,
}

impl OpCounters {
    pub fn merge(&mut self, other: &OpCounters) {
        self.stage1_candidates += other.stage1_candidates;
        self.stage1_filter_steps += other.stage1_filter_steps;
        self.stage1_survivors += other.stage1_survivors;
        self.stage2_candidates += other.stage2_candidates;
        self.stage2_verifications += other.stage2_verifications;
    }

    /// Counted operations: filter steps plus verification steps.
    pub fn total_ops(&self) -> u64 {
        self.stage1_filter_steps + self.stage2_verifications
    }

    pub fn mean_filter_steps(&self) -> f64 {
        if self.stage1_candidates == 0 {
            0.0
        } else {
            self.stage1_filter_steps as f64 / self.stage1_candidates as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub zero_index: usize,
    /// States at `zero_index` that reproduce the whole tail, sorted ascending.
    pub recovered: Vec<State>,
    /// Summed over every zero position tried.
    pub counters: OpCounters,
    pub elapsed: Duration,
    pub predicted_ops: u128,
    /// Stage-1 filter length used at `zero_index`.
    pub horizon: usize,
    /// Set when the configured horizon was cut down to the available tail.
    pub horizon_clamped: bool,
    /// Number of words after `zero_index` every recovered state reproduces.
    pub verified_window: usize,
    pub positions_tried: usize,
}

impl AttackReport {
    /// Equality on everything except the elapsed time.
    pub fn same_outcome(&self, other: &AttackReport) -> bool {
        AttackReport {
            elapsed: Duration::ZERO,
            ..self.clone()
        } == AttackReport {
            elapsed: Duration::ZERO,
            ..other.clone()
        }
    }
}

/// `16 * 2^(1.5w)`, exact.
pub fn predicted_work(spec: WordSpec) -> u128 {
    1u128 << (4 + 3 * spec.width() / 2)
}

/// Number of stage-1 columns, `w/2 + 1`.
pub fn stage1_columns(spec: WordSpec) -> u32 {
    spec.half() + 1
}

/// Ascending indices of zero words, at most `limit` of them.
pub fn find_zero_outputs(ks: &Keystream, limit: usize) -> Vec<usize> {
    ks.words()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == 0)
        .map(|(i, _)| i)
        .take(limit)
        .collect()
}

/// All `k`-column prefixes with `(a + c) mod 2^k = target`: `a`, `b`, `d`
/// free and `c = target - a`. Yields `2^(3k)` prefixes, `a` outermost and
/// `d` innermost.
#[derive(Debug, Clone)]
pub struct TrivialPreimages {
    k: u32,
    mask: u64,
    target: Word,
    a_end: u64,
    a: u64,
    b: u64,
    d: u64,
    done: bool,
}

pub fn enumerate_trivial_preimages(k: u32, target: Word) -> TrivialPreimages {
    TrivialPreimages::for_a_range(k, target, 0, low_mask(k))
}

impl TrivialPreimages {
    /// Only the prefixes with `a_low` in `a_start..=a_last`.
    pub fn for_a_range(k: u32, target: Word, a_start: u64, a_last: u64) -> Self {
        assert!((1..=64).contains(&k), "column count {k} out of range");
        let mask = low_mask(k);
        Self {
            k,
            mask,
            target: target & mask,
            a_end: a_last,
            a: a_start,
            b: 0,
            d: 0,
            done: a_start > a_last,
        }
    }
}

impl Iterator for TrivialPreimages {
    type Item = ColumnPrefix;

    #[inline]
    fn next(&mut self) -> Option<ColumnPrefix> {
        if self.done {
            return None;
        }
        let out = ColumnPrefix::from_parts(
            self.k,
            self.a,
            self.b,
            self.target.wrapping_sub(self.a) & self.mask,
            self.d,
        );
        if self.d < self.mask {
            self.d += 1;
        } else if self.b < self.mask {
            self.d = 0;
            self.b += 1;
        } else if self.a < self.a_end {
            self.d = 0;
            self.b = 0;
            self.a += 1;
        } else {
            self.done = true;
        }
        Some(out)
    }
}

/// Depth-first enumeration of prefixes satisfying `t2 = target` on columns
/// `l..=k`, extending a known `(l-1)`-column prefix.
///
/// At each column all sixteen one-bit extensions of `(a, b, c, d)` are
/// tried and only those matching the target bit in that column are
/// descended into. Memory is one frame per column.
pub struct DfsPreimages<'a, I: ?Sized> {
    instance: &'a I,
    end: u32,
    target: Word,
    stack: Vec<(ColumnPrefix, u8)>,
    nodes: u64,
}

/// `target` is read column-wise; only its bits in columns `l..=k` matter.
pub fn enumerate_preimages_dfs<'a, I: GeneratorInstance + ?Sized>(
    instance: &'a I,
    l: u32,
    k: u32,
    known: ColumnPrefix,
    target: Word,
) -> Result<DfsPreimages<'a, I>, Error> {
    let width = instance.spec().width();
    if l == 0 || l > k || k > width {
        return Err(Error::InvalidArgument(format!(
            "column range {l}..={k} is invalid for width {width}"
        )));
    }
    if known.columns() != l - 1 {
        return Err(Error::InvalidArgument(format!(
            "known prefix has {} columns, expected {}",
            known.columns(),
            l - 1
        )));
    }
    let mut stack = Vec::with_capacity((k - l + 1) as usize);
    stack.push((known, 0));
    Ok(DfsPreimages {
        instance,
        end: k,
        target,
        stack,
        nodes: 0,
    })
}

impl<I: GeneratorInstance + ?Sized> DfsPreimages<'_, I> {
    /// One-column extensions tested so far.
    pub fn nodes_tested(&self) -> u64 {
        self.nodes
    }
}

impl<I: GeneratorInstance + ?Sized> Iterator for DfsPreimages<'_, I> {
    type Item = ColumnPrefix;

    fn next(&mut self) -> Option<ColumnPrefix> {
        while let Some(top) = self.stack.last_mut() {
            if top.1 == 16 {
                self.stack.pop();
                continue;
            }
            let child = top.0.push_column(top.1);
            top.1 += 1;
            self.nodes += 1;
            let col = child.columns() - 1;
            if (self.instance.t2_trunc(&child) ^ self.target) >> col & 1 != 0 {
                continue;
            }
            if child.columns() == self.end {
                return Some(child);
            }
            self.stack.push((child, 0));
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOutcome {
    pub survives: bool,
    pub steps_used: usize,
}

#[inline]
fn filter_unchecked<I: GeneratorInstance + ?Sized>(
    prefix: &ColumnPrefix,
    instance: &I,
    half: u32,
    tail_lsbs: &[u8],
) -> FilterOutcome {
    let mut p = *prefix;
    for (i, &bit) in tail_lsbs.iter().enumerate() {
        p = instance.t1_trunc(&p);
        if (instance.t2_trunc(&p) >> half) as u8 & 1 != bit {
            return FilterOutcome {
                survives: false,
                steps_used: i + 1,
            };
        }
    }
    FilterOutcome {
        survives: true,
        steps_used: tail_lsbs.len(),
    }
}

/// Steps a `(w/2 + 1)`-column candidate forward and compares its predicted
/// output LSBs with `tail_lsbs[..horizon]`, stopping at the first mismatch.
/// A zero horizon accepts every candidate.
pub fn filter_candidate<I: GeneratorInstance + ?Sized>(
    prefix: &ColumnPrefix,
    instance: &I,
    tail_lsbs: &[u8],
    horizon: usize,
) -> Result<FilterOutcome, Error> {
    let spec = instance.spec();
    if prefix.columns() != stage1_columns(spec) {
        return Err(Error::InvalidArgument(format!(
            "candidate has {} columns, expected {}",
            prefix.columns(),
            stage1_columns(spec)
        )));
    }
    if horizon > tail_lsbs.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} exceeds the {} available tail bits",
            tail_lsbs.len()
        )));
    }
    Ok(filter_unchecked(
        prefix,
        instance,
        spec.half(),
        &tail_lsbs[..horizon],
    ))
}

/// Regenerates `n_words` outputs after `zero_index` and compares them with
/// the keystream; also requires a zero at `zero_index` that `state` emits.
pub fn verify_state<I: GeneratorInstance + ?Sized>(
    state: &State,
    instance: &I,
    ks: &Keystream,
    zero_index: usize,
    n_words: usize,
) -> Result<bool, Error> {
    if zero_index >= ks.len() || ks.len() - zero_index - 1 < n_words {
        return Err(Error::InvalidArgument(format!(
            "window of {n_words} words after index {zero_index} exceeds keystream length {}",
            ks.len()
        )));
    }
    Ok(verify_counted(state, instance, ks.words(), zero_index, n_words).0)
}

/// Returns the verdict and the number of update steps spent.
#[inline]
fn verify_counted<I: GeneratorInstance + ?Sized>(
    state: &State,
    instance: &I,
    words: &[Word],
    zero_index: usize,
    n_words: usize,
) -> (bool, u64) {
    if words[zero_index] != 0 || instance.output(state) != 0 {
        return (false, 0);
    }
    let mut x = *state;
    for (i, &expected) in words[zero_index + 1..=zero_index + n_words]
        .iter()
        .enumerate()
    {
        x = instance.t1(&x);
        if instance.output(&x) != expected {
            return (false, i as u64 + 1);
        }
    }
    (true, n_words as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stage2Outcome {
    /// Sorted states reproducing the whole tail.
    pub states: Vec<State>,
    pub candidates: u64,
    pub verifications: u64,
}

/// Completes a stage-1 survivor to full states with `t2 = 0` and keeps
/// those that reproduce `cfg.verify_words` words, then the full tail.
pub fn stage2_complete<I: GeneratorInstance + ?Sized>(
    survivor: &ColumnPrefix,
    instance: &I,
    ks: &Keystream,
    zero_index: usize,
    cfg: &AttackConfig,
) -> Result<Stage2Outcome, Error> {
    let spec = instance.spec();
    if zero_index >= ks.len() {
        return Err(Error::InvalidArgument(format!(
            "zero index {zero_index} is outside the keystream"
        )));
    }
    if cfg.mode == EnumerationMode::Trivial && !instance.t2_is_sum() {
        return Err(Error::InvalidArgument(
            "trivial enumeration requires t2 = a + c".into(),
        ));
    }
    if survivor.columns() == 0 || survivor.columns() > spec.width() {
        return Err(Error::InvalidArgument(
            "survivor column count out of range".into(),
        ));
    }
    let tail = ks.len() - zero_index - 1;
    Ok(complete_survivor(
        survivor,
        instance,
        ks.words(),
        zero_index,
        cfg.verify_words.min(tail),
        tail,
        cfg.mode,
    ))
}

fn complete_survivor<I: GeneratorInstance + ?Sized>(
    survivor: &ColumnPrefix,
    instance: &I,
    words: &[Word],
    zero_index: usize,
    verify_words: usize,
    tail: usize,
    mode: EnumerationMode,
) -> Stage2Outcome {
    let spec = instance.spec();
    let mut out = Stage2Outcome::default();
    let check = |x: State, out: &mut Stage2Outcome| {
        out.candidates += 1;
        let (ok, steps) = verify_counted(&x, instance, words, zero_index, verify_words);
        out.verifications += steps;
        if ok && tail > verify_words {
            let (ok, steps) = verify_counted(&x, instance, words, zero_index, tail);
            out.verifications += steps;
            if ok {
                out.states.push(x);
            }
        } else if ok {
            out.states.push(x);
        }
    };
    let known = survivor.columns();
    if known == spec.width() {
        check(survivor.as_state(), &mut out);
    } else {
        match mode {
            EnumerationMode::Trivial => {
                let free = spec.width() - known;
                let top = low_mask(free);
                for ah in 0..=top {
                    let a = survivor.a | ah << known;
                    let c = spec.neg(a);
                    for bh in 0..=top {
                        let b = survivor.b | bh << known;
                        for dh in 0..=top {
                            check(State::new(a, b, c, survivor.d | dh << known), &mut out);
                        }
                    }
                }
            }
            EnumerationMode::Dfs => {
                let dfs = enumerate_preimages_dfs(instance, known + 1, spec.width(), *survivor, 0)
                    .expect("survivor columns validated");
                for p in dfs {
                    check(p.as_state(), &mut out);
                }
            }
        }
    }
    out.states.sort_unstable();
    out
}

struct Stage1Chunk {
    survivors: Vec<ColumnPrefix>,
    candidates: u64,
    steps: u64,
}

fn filter_into<I: GeneratorInstance + ?Sized>(
    candidates: impl Iterator<Item = ColumnPrefix>,
    instance: &I,
    tail_lsbs: &[u8],
    cap: usize,
) -> Stage1Chunk {
    let half = instance.spec().half();
    let mut chunk = Stage1Chunk {
        survivors: Vec::new(),
        candidates: 0,
        steps: 0,
    };
    for p in candidates {
        let f = filter_unchecked(&p, instance, half, tail_lsbs);
        chunk.candidates += 1;
        chunk.steps += f.steps_used as u64;
        if f.survives {
            chunk.survivors.push(p);
            if chunk.survivors.len() > cap {
                break;
            }
        }
    }
    chunk
}

/// Runs `n` indexed jobs, on `pool` when given, collecting results in index order.
fn run_indexed<T, F>(pool: Option<&ThreadPool>, n: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match pool {
        Some(pool) => pool.install(|| (0..n).into_par_iter().map(&job).collect()),
        None => (0..n).map(job).collect(),
    }
}

const TRIVIAL_CHUNKS: u64 = 256;

fn stage1<I: GeneratorInstance + ?Sized>(
    instance: &I,
    mode: EnumerationMode,
    tail_lsbs: &[u8],
    cap: usize,
    pool: Option<&ThreadPool>,
) -> (Vec<ColumnPrefix>, OpCounters) {
    let k = stage1_columns(instance.spec());
    let chunks: Vec<Stage1Chunk> = match mode {
        EnumerationMode::Trivial => {
            let a_count = 1u64 << k;
            let per = a_count.div_ceil(TRIVIAL_CHUNKS);
            let n = a_count.div_ceil(per) as usize;
            run_indexed(pool, n, |i| {
                let start = i as u64 * per;
                let last = (start + per - 1).min(a_count - 1);
                let it = TrivialPreimages::for_a_range(k, 0, start, last);
                filter_into(it, instance, tail_lsbs, cap)
            })
        }
        EnumerationMode::Dfs => run_indexed(pool, 16, |bits| {
            let first = ColumnPrefix::empty().push_column(bits as u8);
            if instance.t2_trunc(&first) & 1 != 0 {
                return filter_into(std::iter::empty(), instance, tail_lsbs, cap);
            }
            if k == 1 {
                return filter_into(std::iter::once(first), instance, tail_lsbs, cap);
            }
            let dfs = enumerate_preimages_dfs(instance, 2, k, first, 0)
                .expect("stage-1 column range is valid");
            filter_into(dfs, instance, tail_lsbs, cap)
        }),
    };
    let mut counters = OpCounters::default();
    let mut survivors = Vec::new();
    for c in chunks {
        counters.stage1_candidates += c.candidates;
        counters.stage1_filter_steps += c.steps;
        survivors.extend(c.survivors);
    }
    survivors.sort_unstable();
    counters.stage1_survivors = survivors.len() as u64;
    (survivors, counters)
}

/// Recovers the state at the first usable zero output of `ks`.
///
/// Zero positions are tried in order, up to `cfg.max_zero_positions`; the
/// first one with at least one verified state wins.
pub fn recover<I: GeneratorInstance + ?Sized>(
    ks: &Keystream,
    instance: &I,
    cfg: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    let started = Instant::now();
    let spec = instance.spec();
    cfg.validate()?;
    if ks.spec() != spec {
        return Err(Error::InvalidArgument(format!(
            "keystream width {} does not match instance width {}",
            ks.spec().width(),
            spec.width()
        ))
        .into());
    }
    if cfg.mode == EnumerationMode::Trivial && !instance.t2_is_sum() {
        return Err(Error::InvalidArgument(
            "trivial enumeration requires an instance with t2 = a + c; use dfs".into(),
        )
        .into());
    }
    let zeros = find_zero_outputs(ks, cfg.max_zero_positions);
    if zeros.is_empty() {
        return Err(AttackError::NeedMoreKeystream {
            len: ks.len(),
            width: spec.width(),
            expected: 1u128 << spec.width(),
        });
    }
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let k = stage1_columns(spec);
    let words = ks.words();
    let mut counters = OpCounters::default();

    for (tried, &z) in zeros.iter().enumerate() {
        let tail = words.len() - z - 1;
        if tail == 0 {
            return Err(if tried == 0 {
                AttackError::InsufficientTail { zero_index: z }
            } else {
                AttackError::ParamsMismatch {
                    positions_tried: tried,
                }
            });
        }
        let wanted = cfg.filter_horizon.unwrap_or(3 * k as usize);
        let horizon = wanted.min(tail);
        let tail_lsbs: Vec<u8> = words[z + 1..=z + horizon]
            .iter()
            .map(|w| (w & 1) as u8)
            .collect();

        let (survivors, c1) = stage1(
            instance,
            cfg.mode,
            &tail_lsbs,
            cfg.max_survivors,
            pool.as_ref(),
        );
        counters.merge(&c1);
        if survivors.len() > cfg.max_survivors {
            return Err(AttackError::SurvivorOverflow {
                survivors: survivors.len(),
                max: cfg.max_survivors,
                horizon,
            });
        }

        let verify_words = cfg.verify_words.min(tail);
        let outcomes = run_indexed(pool.as_ref(), survivors.len(), |i| {
            complete_survivor(
                &survivors[i],
                instance,
                words,
                z,
                verify_words,
                tail,
                cfg.mode,
            )
        });
        let mut recovered = Vec::new();
        for o in outcomes {
            counters.stage2_candidates += o.candidates;
            counters.stage2_verifications += o.verifications;
            recovered.extend(o.states);
        }
        if !recovered.is_empty() {
            recovered.sort_unstable();
            recovered.dedup();
            return Ok(AttackReport {
                zero_index: z,
                recovered,
                counters,
                elapsed: started.elapsed(),
                predicted_ops: predicted_work(spec),
                horizon,
                horizon_clamped: horizon < wanted,
                verified_window: tail,
                positions_tried: tried + 1,
            });
        }
    }
    Err(AttackError::ParamsMismatch {
        positions_tried: zeros.len(),
    })
}
