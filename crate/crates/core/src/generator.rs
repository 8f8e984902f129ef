//! The TF-1 generator and the generalized generator-instance contract.
//!
//! A generalized instance is an update T-function `t1` on the four-word
//! state, an output T-function `t2`, and an arbitrary function `f`. After
//! every update it emits `S(t2(A)) * (f(A) | 1) mod 2^w`, where `S` swaps
//! word halves. TF-1 itself uses `t2(A) = a + c` and `f(A) = S(b + d)`.
//!
//! The attack works on column prefixes (the low `l` bits of all four
//! words). Because `t1` and `t2` are T-functions, evaluating them with
//! arithmetic mod `2^l` yields exactly the low `l` columns of the full
//! result; the `*_trunc` methods expose that.

use std::fmt;

use crate::error::{Error, Result};
use crate::word::{low_mask, Word, WordSpec};

/// Internal state `(a, b, c, d)`. Ordering is lexicographic on the tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State {
    pub a: Word,
    pub b: Word,
    pub c: Word,
    pub d: Word,
}

impl State {
    pub const fn new(a: Word, b: Word, c: Word, d: Word) -> Self {
        Self { a, b, c, d }
    }

    pub fn words(&self) -> [Word; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn validate(&self, spec: WordSpec) -> Result<Self> {
        for w in self.words() {
            spec.check(w)?;
        }
        Ok(*self)
    }

    /// `a:b:c:d` in fixed-width lowercase hex.
    pub fn to_hex(&self, spec: WordSpec) -> String {
        let n = spec.hex_digits();
        format!(
            "{:0n$x}:{:0n$x}:{:0n$x}:{:0n$x}",
            self.a, self.b, self.c, self.d
        )
    }
}

/// The constants `C1`, `C3` and `C` of the TF-1 update.
///
/// `C2` is listed among the generator constants in the original description
/// but is used by none of its formulas, so it has no field here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tf1Params {
    pub c1: Word,
    pub c3: Word,
    pub c: Word,
    spec: WordSpec,
}

impl Tf1Params {
    pub const DEFAULT_C1: u64 = 0x84D4_C8D2_E5B6_D6D5;
    pub const DEFAULT_C3: u64 = 0x9E37_79B9_7F4A_7C15;
    pub const DEFAULT_C: u64 = 0xB5AD_4ECE_DA1C_E2A9;

    pub fn new(spec: WordSpec, c1: Word, c3: Word, c: Word) -> Result<Self> {
        Ok(Self {
            c1: spec.check(c1)?,
            c3: spec.check(c3)?,
            c: spec.check(c)?,
            spec,
        })
    }

    /// Arbitrary default constants truncated to `w` bits, with `C` forced odd.
    pub fn defaults(spec: WordSpec) -> Self {
        Self {
            c1: spec.reduce(Self::DEFAULT_C1),
            c3: spec.reduce(Self::DEFAULT_C3),
            c: spec.reduce(Self::DEFAULT_C) | 1,
            spec,
        }
    }

    pub fn spec(&self) -> WordSpec {
        self.spec
    }

    /// `C1:C3:C` in fixed-width hex.
    pub fn to_hex(&self) -> String {
        let n = self.spec.hex_digits();
        format!("{:0n$x}:{:0n$x}:{:0n$x}", self.c1, self.c3, self.c)
    }
}

/// The low `l` columns of each state word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnPrefix {
    l: u32,
    pub a: Word,
    pub b: Word,
    pub c: Word,
    pub d: Word,
}

impl ColumnPrefix {
    pub fn new(l: u32, a: Word, b: Word, c: Word, d: Word) -> Result<Self> {
        if l > 64 {
            return Err(Error::ColumnOutOfRange {
                column: l,
                width: 64,
            });
        }
        let m = low_mask(l);
        for v in [a, b, c, d] {
            if v & !m != 0 {
                return Err(Error::ValueOutOfRange { value: v, width: l });
            }
        }
        Ok(Self { l, a, b, c, d })
    }

    /// The empty prefix (no known columns).
    pub const fn empty() -> Self {
        Self {
            l: 0,
            a: 0,
            b: 0,
            c: 0,
            d: 0,
        }
    }

    /// The first `l` columns of `state`.
    pub fn of(state: &State, l: u32) -> Self {
        let m = low_mask(l);
        Self {
            l,
            a: state.a & m,
            b: state.b & m,
            c: state.c & m,
            d: state.d & m,
        }
    }

    #[inline]
    pub(crate) const fn from_parts(l: u32, a: Word, b: Word, c: Word, d: Word) -> Self {
        Self { l, a, b, c, d }
    }

    #[inline]
    pub fn columns(&self) -> u32 {
        self.l
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        low_mask(self.l)
    }

    /// Appends column `l+1`; bits 0..=3 of `bits` go to `a`, `b`, `c`, `d`.
    #[inline]
    pub fn push_column(&self, bits: u8) -> Self {
        let sh = self.l;
        let bit = |i: u8| ((bits >> i) & 1) as u64;
        Self {
            l: self.l + 1,
            a: self.a | bit(0) << sh,
            b: self.b | bit(1) << sh,
            c: self.c | bit(2) << sh,
            d: self.d | bit(3) << sh,
        }
    }

    /// The prefix read as a full state (unknown high columns set to zero).
    #[inline]
    pub fn as_state(&self) -> State {
        State::new(self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for ColumnPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:x}:{:x}:{:x}:{:x}",
            self.l, self.a, self.b, self.c, self.d
        )
    }
}

/// An output sequence together with its word width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keystream {
    spec: WordSpec,
    words: Vec<Word>,
}

impl Keystream {
    pub fn new(spec: WordSpec, words: Vec<Word>) -> Result<Self> {
        for &w in &words {
            spec.check(w)?;
        }
        Ok(Self { spec, words })
    }

    pub fn spec(&self) -> WordSpec {
        self.spec
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn into_words(self) -> Vec<Word> {
        self.words
    }
}

/// A generalized TF-1 generator.
///
/// Implementors must make `t1` and `t2` T-functions and keep the truncated
/// forms consistent with them: for every state `X` and `l`,
/// `t1_trunc(prefix_l(X)) == prefix_l(t1(X))` and
/// `t2_trunc(prefix_l(X)) == t2(X) mod 2^l`.
pub trait GeneratorInstance: Sync {
    fn spec(&self) -> WordSpec;

    /// The update function.
    fn t1(&self, state: &State) -> State;

    /// The T-function inside the half swap of the output.
    fn t2(&self, state: &State) -> Word;

    /// The unrestricted factor of the output.
    fn f(&self, state: &State) -> Word;

    fn t1_trunc(&self, prefix: &ColumnPrefix) -> ColumnPrefix;

    fn t2_trunc(&self, prefix: &ColumnPrefix) -> Word;

    /// True when `t2(a, b, c, d) = a + c`, which admits direct preimage
    /// enumeration.
    fn t2_is_sum(&self) -> bool {
        false
    }

    fn output(&self, state: &State) -> Word {
        let spec = self.spec();
        spec.mul(spec.swap_halves(self.t2(state)), self.f(state) | 1)
    }
}

/// The four update rows evaluated mod `mask + 1`.
#[inline(always)]
fn update_rows(state: &State, params: &Tf1Params, mask: u64) -> State {
    let State { a, b, c, d } = *state;
    let p = a & b & c & d;
    let s = (params.c.wrapping_add(p) ^ p) & mask;
    let c2 = c << 1;
    let a2 = a << 1;
    let b_c1 = b | params.c1;
    let d_c3 = d | params.c3;
    State {
        a: (a ^ s ^ c2.wrapping_mul(b_c1)) & mask,
        b: (b ^ (s & a) ^ c2.wrapping_mul(d_c3)) & mask,
        c: (c ^ (s & a & b) ^ a2.wrapping_mul(d_c3)) & mask,
        d: (d ^ (s & a & b & c) ^ a2.wrapping_mul(b_c1)) & mask,
    }
}

/// `s = (C + p) xor p` where `p = a & b & c & d`.
pub fn compute_s(state: &State, params: &Tf1Params) -> Word {
    let spec = params.spec();
    let p = state.a & state.b & state.c & state.d;
    spec.add(params.c, p) ^ p
}

/// One TF-1 update step.
pub fn update(state: &State, params: &Tf1Params) -> State {
    update_rows(state, params, params.spec().mask())
}

/// The low `l` columns of `update(X)` for any `X` extending `prefix`.
pub fn truncated_update(prefix: &ColumnPrefix, params: &Tf1Params) -> ColumnPrefix {
    let next = update_rows(&prefix.as_state(), params, prefix.mask());
    ColumnPrefix::from_parts(prefix.l, next.a, next.b, next.c, next.d)
}

/// `a + c mod 2^w`.
pub fn t2_tf1(state: &State, spec: WordSpec) -> Word {
    spec.add(state.a, state.c)
}

/// The TF-1 output `S(a + c) * (S(b + d) | 1) mod 2^w`.
pub fn output_word(state: &State, spec: WordSpec) -> Word {
    let high = spec.swap_halves(spec.add(state.a, state.c));
    let low = spec.swap_halves(spec.add(state.b, state.d));
    spec.mul(high, low | 1)
}

/// Low `l` bits of `t2` for any extension of `prefix`.
pub fn truncated_t2<I: GeneratorInstance + ?Sized>(prefix: &ColumnPrefix, instance: &I) -> Word {
    instance.t2_trunc(prefix)
}

/// Outputs `o_1..o_n`; `o_i` is emitted by the state after the `i`-th update.
pub fn generate<I: GeneratorInstance + ?Sized>(seed: State, instance: &I, n: usize) -> Keystream {
    let mut words = Vec::with_capacity(n);
    let mut state = seed;
    for _ in 0..n {
        state = instance.t1(&state);
        words.push(instance.output(&state));
    }
    Keystream {
        spec: instance.spec(),
        words,
    }
}

/// LSB of the output that follows the state extending `prefix`.
///
/// The output's odd factor preserves the LSB of `S(t2)`, which is column
/// `w/2 + 1` of `t2`. That column is known once `w/2 + 1` columns of the
/// current state are.
pub fn predicted_output_lsb<I: GeneratorInstance + ?Sized>(
    prefix: &ColumnPrefix,
    instance: &I,
) -> Result<u8> {
    let spec = instance.spec();
    let need = spec.half() + 1;
    if prefix.columns() < need {
        return Err(Error::InsufficientColumns {
            have: prefix.columns(),
            need,
        });
    }
    if prefix.columns() > spec.width() {
        return Err(Error::ColumnOutOfRange {
            column: prefix.columns(),
            width: spec.width(),
        });
    }
    let next = instance.t1_trunc(prefix);
    Ok(((instance.t2_trunc(&next) >> spec.half()) & 1) as u8)
}

/// The TF-1 generator as a [`GeneratorInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tf1 {
    pub params: Tf1Params,
}

impl Tf1 {
    pub fn new(params: Tf1Params) -> Self {
        Self { params }
    }
}

impl GeneratorInstance for Tf1 {
    fn spec(&self) -> WordSpec {
        self.params.spec()
    }

    #[inline]
    fn t1(&self, state: &State) -> State {
        update(state, &self.params)
    }

    #[inline]
    fn t2(&self, state: &State) -> Word {
        t2_tf1(state, self.params.spec())
    }

    fn f(&self, state: &State) -> Word {
        let spec = self.params.spec();
        spec.swap_halves(spec.add(state.b, state.d))
    }

    #[inline]
    fn t1_trunc(&self, prefix: &ColumnPrefix) -> ColumnPrefix {
        truncated_update(prefix, &self.params)
    }

    #[inline]
    fn t2_trunc(&self, prefix: &ColumnPrefix) -> Word {
        prefix.a.wrapping_add(prefix.c) & prefix.mask()
    }

    fn t2_is_sum(&self) -> bool {
        true
    }

    fn output(&self, state: &State) -> Word {
        output_word(state, self.params.spec())
    }
}

/// A generalized instance that is not TF-1: same update,
/// `t2'(A) = (a + c) xor (b & d)` and `f'(A) = b xor d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoInstance {
    pub params: Tf1Params,
}

impl GeneratorInstance for DemoInstance {
    fn spec(&self) -> WordSpec {
        self.params.spec()
    }

    #[inline]
    fn t1(&self, state: &State) -> State {
        update(state, &self.params)
    }

    #[inline]
    fn t2(&self, state: &State) -> Word {
        let spec = self.params.spec();
        spec.add(state.a, state.c) ^ (state.b & state.d)
    }

    fn f(&self, state: &State) -> Word {
        state.b ^ state.d
    }

    #[inline]
    fn t1_trunc(&self, prefix: &ColumnPrefix) -> ColumnPrefix {
        truncated_update(prefix, &self.params)
    }

    #[inline]
    fn t2_trunc(&self, prefix: &ColumnPrefix) -> Word {
        (prefix.a.wrapping_add(prefix.c) ^ (prefix.b & prefix.d)) & prefix.mask()
    }
}

pub fn demo_generalized_instance(params: Tf1Params) -> DemoInstance {
    DemoInstance { params }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix::SplitMix64;

    fn spec(w: u32) -> WordSpec {
        WordSpec::new(w).unwrap()
    }

    /// Row-by-row evaluation in u128 with explicit `% 2^w`, written
    /// independently of `update_rows`.
    fn reference_update(x: State, p: &Tf1Params) -> State {
        let m: u128 = 1u128 << p.spec().width();
        let (a, b, c, d) = (x.a as u128, x.b as u128, x.c as u128, x.d as u128);
        let (c1, c3, cc) = (p.c1 as u128, p.c3 as u128, p.c as u128);
        let and4 = a & b & c & d;
        let s = ((cc + and4) % m) ^ and4;
        let prod = |x: u128, y: u128| ((2 * x % m) * y) % m;
        State::new(
            (a ^ s ^ prod(c, b | c1)) as u64,
            (b ^ (s & a) ^ prod(c, d | c3)) as u64,
            (c ^ (s & a & b) ^ prod(a, d | c3)) as u64,
            (d ^ (s & a & b & c) ^ prod(a, b | c1)) as u64,
        )
    }

    #[test]
    fn s_examples() {
        let p = Tf1Params::new(spec(8), 0, 0, 0x53).unwrap();
        assert_eq!(compute_s(&State::new(0, 0xFF, 0xFF, 0xFF), &p), 0x53);
        assert_eq!(compute_s(&State::new(0xFF, 0xFF, 0xFF, 0xFF), &p), 0xAD);
        let p4 = Tf1Params::new(spec(4), 0, 0, 1).unwrap();
        assert_eq!(compute_s(&State::new(0xF, 0xF, 0xF, 0xF), &p4), 0xF);
    }

    #[test]
    fn update_examples() {
        let p = Tf1Params::new(spec(4), 5, 3, 1).unwrap();
        assert_eq!(update(&State::default(), &p), State::new(1, 0, 0, 0));
        assert_eq!(update(&State::new(1, 0, 0, 0), &p), State::new(0, 1, 6, 10));
        let d = Tf1Params::defaults(spec(32));
        assert_eq!(update(&State::default(), &d), State::new(d.c, 0, 0, 0));
    }

    #[test]
    fn update_matches_reference() {
        let mut rng = SplitMix64::new(3);
        for w in [4, 6, 8, 16, 32, 48, 64] {
            let s = spec(w);
            for _ in 0..2000 {
                let p = Tf1Params::new(s, rng.word(s), rng.word(s), rng.word(s)).unwrap();
                let x = rng.state(s);
                assert_eq!(update(&x, &p), reference_update(x, &p), "w={w} x={x:?}");
            }
        }
    }

    #[test]
    fn defaults_are_truncated_and_odd() {
        for w in (4..=64).step_by(2) {
            let p = Tf1Params::defaults(spec(w));
            assert_eq!(p.c & 1, 1);
            assert!(p.c1 <= p.spec().mask() && p.c3 <= p.spec().mask());
        }
        let p = Tf1Params::defaults(spec(8));
        assert_eq!((p.c1, p.c3, p.c), (0xD5, 0x15, 0xA9));
    }

    #[test]
    fn params_reject_wide_constants() {
        assert!(Tf1Params::new(spec(8), 0x100, 0, 0).is_err());
    }

    #[test]
    fn t2_and_output_examples() {
        let s = spec(8);
        assert_eq!(t2_tf1(&State::default(), s), 0);
        assert_eq!(t2_tf1(&State::new(0xFF, 0, 0x01, 0), s), 0);
        assert_eq!(t2_tf1(&State::new(0x12, 0, 0x34, 0), s), 0x46);
        assert_eq!(output_word(&State::new(1, 0, 0, 0), s), 0x10);
        assert_eq!(output_word(&State::new(0x12, 0x05, 0x34, 0x0B), s), 0x64);
        assert_eq!(output_word(&State::new(0x80, 0x33, 0x80, 0x77), s), 0);
    }

    #[test]
    fn generate_examples() {
        let s = spec(8);
        let inst = Tf1::new(Tf1Params::new(s, 0xD5, 0x15, 0x01).unwrap());
        assert!(generate(State::default(), &inst, 0).is_empty());
        assert_eq!(generate(State::default(), &inst, 1).words(), &[0x10]);
        let seed = State::new(1, 2, 3, 4);
        assert_eq!(generate(seed, &inst, 100), generate(seed, &inst, 100));
        // The seed itself emits nothing: o_1 comes from update(seed).
        let ks = generate(seed, &inst, 2);
        let s1 = update(&seed, &inst.params);
        assert_eq!(ks.words()[0], output_word(&s1, s));
        assert_eq!(ks.words()[1], output_word(&update(&s1, &inst.params), s));
    }

    #[test]
    fn truncated_update_edges() {
        let s = spec(8);
        let p = Tf1Params::defaults(s);
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let x = rng.state(s);
            let full = ColumnPrefix::of(&x, 8);
            assert_eq!(truncated_update(&full, &p).as_state(), update(&x, &p));
        }
        let one = truncated_update(&ColumnPrefix::of(&State::default(), 1), &p);
        assert_eq!((one.a, one.b, one.c, one.d), (1, 0, 0, 0));
    }

    #[test]
    fn shared_prefix_updates_agree() {
        let s = spec(4);
        let p = Tf1Params::new(s, 5, 3, 1).unwrap();
        let x = State::new(0b0101, 0b1110, 0b0011, 0b1000);
        let y = State::new(0b1101, 0b0110, 0b1011, 0b0000);
        let (ux, uy) = (update(&x, &p), update(&y, &p));
        assert_eq!(ColumnPrefix::of(&ux, 3), ColumnPrefix::of(&uy, 3));
    }

    #[test]
    fn truncated_t2_examples() {
        let s = spec(8);
        let inst = Tf1::new(Tf1Params::defaults(s));
        let pre = ColumnPrefix::new(5, 0x1F, 0x03, 0x1E, 0x00).unwrap();
        assert_eq!(truncated_t2(&pre, &inst), (0x1F + 0x1E) & 0x1F);
        let x = State::new(0x9C, 0x11, 0x72, 0xEE);
        assert_eq!(truncated_t2(&ColumnPrefix::of(&x, 8), &inst), t2_tf1(&x, s));
        for l in 1..=8 {
            let m = low_mask(l);
            let c = 0x5A & m;
            let a = c.wrapping_neg() & m;
            let pre = ColumnPrefix::new(l, a, 0, c, 0).unwrap();
            assert_eq!(truncated_t2(&pre, &inst), 0);
        }
    }

    #[test]
    fn predicted_lsb_needs_enough_columns() {
        let s = spec(8);
        let inst = Tf1::new(Tf1Params::defaults(s));
        let short = ColumnPrefix::of(&State::new(1, 2, 3, 4), 4);
        assert_eq!(
            predicted_output_lsb(&short, &inst),
            Err(Error::InsufficientColumns { have: 4, need: 5 })
        );
        let p1 = Tf1::new(Tf1Params::new(s, 0xD5, 0x15, 0x01).unwrap());
        let zero = ColumnPrefix::of(&State::default(), 8);
        assert_eq!(predicted_output_lsb(&zero, &p1), Ok(0));
    }

    #[test]
    fn lsb_bridge_matches_full_evaluation() {
        let mut rng = SplitMix64::new(11);
        for w in [8u32, 16] {
            let s = spec(w);
            let tf1 = Tf1::new(Tf1Params::defaults(s));
            let demo = demo_generalized_instance(Tf1Params::defaults(s));
            for _ in 0..10_000 {
                let x = rng.state(s);
                let pre = ColumnPrefix::of(&x, s.half() + 1);
                let truth = tf1.output(&tf1.t1(&x)) & 1;
                assert_eq!(predicted_output_lsb(&pre, &tf1).unwrap() as u64, truth);
                let truth = demo.output(&demo.t1(&x)) & 1;
                assert_eq!(predicted_output_lsb(&pre, &demo).unwrap() as u64, truth);
            }
        }
    }

    #[test]
    fn demo_examples() {
        let s = spec(4);
        let demo = demo_generalized_instance(Tf1Params::defaults(s));
        assert_eq!(demo.t2(&State::new(0, 0xF, 0, 0)), 0);
        assert_eq!(demo.t2(&State::new(1, 3, 0, 2)), 3);
        let mut rng = SplitMix64::new(17);
        let s16 = spec(16);
        let demo = demo_generalized_instance(Tf1Params::defaults(s16));
        for _ in 0..10_000 {
            let x = rng.state(s16);
            let l = 1 + rng.below(16) as u32;
            let pre = ColumnPrefix::of(&x, l);
            assert_eq!(demo.t2_trunc(&pre), demo.t2(&x) & low_mask(l));
        }
    }

    #[test]
    fn output_zero_iff_sum_zero_exhaustive_w4() {
        let s = spec(4);
        for packed in 0u32..1 << 16 {
            let x = State::new(
                (packed & 0xF) as u64,
                (packed >> 4 & 0xF) as u64,
                (packed >> 8 & 0xF) as u64,
                (packed >> 12) as u64,
            );
            assert_eq!(output_word(&x, s) == 0, t2_tf1(&x, s) == 0);
        }
    }

    #[test]
    fn prefix_construction() {
        assert!(ColumnPrefix::new(3, 8, 0, 0, 0).is_err());
        assert!(ColumnPrefix::new(65, 0, 0, 0, 0).is_err());
        let p = ColumnPrefix::empty()
            .push_column(0b1010)
            .push_column(0b0101);
        assert_eq!(p, ColumnPrefix::new(2, 0b10, 0b01, 0b10, 0b01).unwrap());
    }

    #[test]
    fn state_hex() {
        let s = spec(8);
        assert_eq!(State::new(1, 0, 0xAB, 0xF).to_hex(s), "01:00:ab:0f");
    }
}
