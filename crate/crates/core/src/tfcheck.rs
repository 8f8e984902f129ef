//! Checks of the properties the attack leans on: the T-function structure
//! of the update and output maps, consistency of truncated evaluation, and
//! a few measured statistics of the keystream.
//!
//! Randomized checks draw trial `i` from `SplitMix64::for_index(seed, i)`,
//! so a report depends only on the seed and the trial count.

use crate::error::{Error, Result};
use crate::generator::{
    demo_generalized_instance, update, ColumnPrefix, GeneratorInstance, Keystream, State, Tf1,
    Tf1Params,
};
use crate::mix::SplitMix64;
use crate::word::{low_mask, Word, WordSpec};

/// Which map a T-function check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The TF-1 update.
    T1,
    /// `a + c`.
    T2,
    /// `(a + c) xor (b & d)` from the demo instance.
    T2Demo,
}

/// A pair of inputs showing a violation at `columns` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub x: State,
    pub y: State,
    pub columns: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropertyReport {
    pub trials: u64,
    pub failures: u64,
    pub first_witness: Option<Witness>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, witness: Option<Witness>) {
        self.trials += 1;
        if let Some(w) = witness {
            self.failures += 1;
            self.first_witness.get_or_insert(w);
        }
    }
}

/// Output types whose low columns can be compared.
pub trait Columns {
    fn agree_low(&self, other: &Self, columns: u32) -> bool;
}

impl Columns for Word {
    fn agree_low(&self, other: &Self, columns: u32) -> bool {
        (self ^ other) & low_mask(columns) == 0
    }
}

impl Columns for State {
    fn agree_low(&self, other: &Self, columns: u32) -> bool {
        ColumnPrefix::of(self, columns) == ColumnPrefix::of(other, columns)
    }
}

/// Checks that `map` is a T-function on random input pairs sharing a prefix.
///
/// Each trial draws `X`, `k` in `1..=w`, and `Y` equal to `X` on columns
/// `1..=k` with random higher columns; it fails if `map(X)` and `map(Y)`
/// differ anywhere in columns `1..=k`.
pub fn check_tfunction_with<O, F>(
    spec: WordSpec,
    trials: u64,
    rng_seed: u64,
    map: F,
) -> PropertyReport
where
    O: Columns,
    F: Fn(&State) -> O,
{
    let mut report = PropertyReport {
        trials: 0,
        failures: 0,
        first_witness: None,
    };
    for i in 0..trials {
        let mut rng = SplitMix64::for_index(rng_seed, i);
        let x = rng.state(spec);
        let k = 1 + rng.below(spec.width() as u64) as u32;
        let noise = rng.state(spec);
        let keep = low_mask(k);
        let blend = |lo: Word, hi: Word| (lo & keep) | (hi & !keep & spec.mask());
        let y = State::new(
            blend(x.a, noise.a),
            blend(x.b, noise.b),
            blend(x.c, noise.c),
            blend(x.d, noise.d),
        );
        let ok = map(&x).agree_low(&map(&y), k);
        report.record((!ok).then_some(Witness { x, y, columns: k }));
    }
    report
}

pub fn check_tfunction_property(
    target: Target,
    params: &Tf1Params,
    trials: u64,
    rng_seed: u64,
) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let spec = params.spec();
    let tf1 = Tf1::new(*params);
    let demo = demo_generalized_instance(*params);
    Ok(match target {
        Target::T1 => check_tfunction_with(spec, trials, rng_seed, |x| update(x, params)),
        Target::T2 => check_tfunction_with(spec, trials, rng_seed, |x| tf1.t2(x)),
        Target::T2Demo => check_tfunction_with(spec, trials, rng_seed, |x| demo.t2(x)),
    })
}

/// Verifies `t1_trunc` and `t2_trunc` against prefixes of full evaluation
/// for random `(X, l)`.
pub fn check_truncation_consistency<I: GeneratorInstance + ?Sized>(
    instance: &I,
    trials: u64,
    rng_seed: u64,
) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let spec = instance.spec();
    let mut report = PropertyReport {
        trials: 0,
        failures: 0,
        first_witness: None,
    };
    for i in 0..trials {
        let mut rng = SplitMix64::for_index(rng_seed, i);
        let x = rng.state(spec);
        let l = 1 + rng.below(spec.width() as u64) as u32;
        let prefix = ColumnPrefix::of(&x, l);
        let ok = instance.t1_trunc(&prefix) == ColumnPrefix::of(&instance.t1(&x), l)
            && instance.t2_trunc(&prefix) == instance.t2(&x) & low_mask(l);
        report.record((!ok).then_some(Witness {
            x,
            y: prefix.as_state(),
            columns: l,
        }));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFrequency {
    pub zeros: u64,
    pub rate: f64,
}

pub fn zero_frequency(ks: &Keystream) -> Result<ZeroFrequency> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("keystream is empty".into()));
    }
    let zeros = ks.words().iter().filter(|&&w| w == 0).count() as u64;
    Ok(ZeroFrequency {
        zeros,
        rate: zeros as f64 / ks.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleProbe {
    pub cycle_found: bool,
    pub cycle_length: Option<u64>,
}

/// Floyd cycle detection on the update map from `seed`.
///
/// `max_steps` bounds the number of slow-pointer steps before the pointers
/// meet; measuring the cycle length afterwards costs at most as many again.
pub fn cycle_probe(seed: State, params: &Tf1Params, max_steps: u64) -> Result<CycleProbe> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let step = |x: &State| update(x, params);
    let mut slow = step(&seed);
    let mut fast = step(&step(&seed));
    let mut steps = 1;
    while slow != fast {
        if steps >= max_steps {
            return Ok(CycleProbe {
                cycle_found: false,
                cycle_length: None,
            });
        }
        slow = step(&slow);
        fast = step(&step(&fast));
        steps += 1;
    }
    let mut length = 1;
    let mut walker = step(&slow);
    while walker != slow {
        walker = step(&walker);
        length += 1;
    }
    Ok(CycleProbe {
        cycle_found: true,
        cycle_length: Some(length),
    })
}
