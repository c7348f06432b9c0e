//! Locally decodable codes.
//!
//! The checker writes `E(x)` to public memory and recovers single message bits
//! from a handful of codeword positions. [`LocallyDecodableCode`] separates
//! choosing *which* positions to read from combining the answers, so the caller
//! can route every read through [`crate::checker::PublicMemory`] and count it.
//!
//! [`HadamardCode`] is the concrete instance: `m = 2ⁿ`, `q = 2`, relative
//! distance `1/2`. Position `a` of the codeword holds `⟨x, a⟩ mod 2`, where
//! message bit `i` (0-based, written left to right) pairs with bit `n-1-i` of
//! the integer `a`. So for `n = 3`, `x = 101` packs to `0b101` and position
//! `0b011` holds `x₂ ⊕ x₃`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A message `x ∈ {0,1}ⁿ`. Serialized as a `"0101"` string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Message(Vec<bool>);

/// A codeword `E(x) ∈ {0,1}^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword(Vec<bool>);

macro_rules! bit_string {
    ($ty:ident) => {
        impl $ty {
            pub fn new(bits: Vec<bool>) -> Result<Self> {
                if bits.is_empty() {
                    return Err(Error::Empty);
                }
                Ok($ty(bits))
            }

            pub fn bits(&self) -> &[bool] {
                &self.0
            }

            pub fn into_bits(self) -> Vec<bool> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn get(&self, index: usize) -> Option<bool> {
                self.0.get(index).copied()
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $ty::new(parse_bits(s)?)
            }
        }

        impl TryFrom<String> for $ty {
            type Error = Error;

            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }

        impl From<$ty> for String {
            fn from(v: $ty) -> String {
                v.to_string()
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for &b in &self.0 {
                    f.write_str(if b { "1" } else { "0" })?;
                }
                Ok(())
            }
        }
    };
}

bit_string!(Message);
bit_string!(Codeword);

impl Message {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Message::new((0..n).map(|_| rng.random::<bool>()).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Message::new(vec![false; n])
    }
}

/// Parses a string of `'0'`/`'1'` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidBit(other)),
        })
        .collect()
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Parameters of a `(q, δ, ε)` locally decodable code.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Message length.
    pub n: usize,
    /// Codeword length.
    pub m: usize,
    /// Maximum codeword reads per local decode.
    pub q: usize,
    /// Relative minimum distance between distinct codewords.
    pub delta: f64,
    /// Corruption radius, as a fraction of `m`, within which decoding is guaranteed.
    pub delta_dec: f64,
    /// Decoder advantage: success probability is at least `1/2 + eps_dec` within radius.
    pub eps_dec: f64,
}

impl CodeParams {
    /// Largest number of corrupted positions covered by the decoding guarantee.
    pub fn decoding_radius_bits(&self) -> usize {
        (self.delta_dec * self.m as f64 + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("code.n", "message length must be at least 1"));
        }
        if self.m < self.n {
            return Err(Error::config("code.m", "codeword shorter than message"));
        }
        if self.q == 0 {
            return Err(Error::config("code.q", "query budget must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config("code.delta", "must lie in (0, 1]"));
        }
        if !(self.delta_dec >= 0.0 && self.delta_dec < self.delta / 2.0) {
            return Err(Error::config("code.delta_dec", "must lie in [0, delta/2)"));
        }
        if !(self.eps_dec > 0.0 && self.eps_dec <= 0.5) {
            return Err(Error::config("code.eps_dec", "must lie in (0, 1/2]"));
        }
        Ok(())
    }
}

/// A code that can recover one message bit from at most `q` codeword positions.
pub trait LocallyDecodableCode {
    fn params(&self) -> CodeParams;

    fn encode(&self, msg: &Message) -> Result<Codeword>;

    /// Positions the local decoder will read for message bit `index` (0-based).
    fn decode_query_plan<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> Result<Vec<usize>>;

    /// Combines the answers read at `plan` into a guess for message bit `index`.
    fn decode_from_answers(&self, index: usize, plan: &[usize], answers: &[bool]) -> Result<bool>;

    /// Distance shared by every pair of distinct codewords, when the code has one.
    fn constant_distance(&self) -> Option<usize> {
        None
    }
}

/// The Hadamard code: `E(x)_a = ⟨x, a⟩ mod 2` over all `a ∈ {0,1}ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardCode {
    n: usize,
    delta_dec: f64,
}

impl HadamardCode {
    /// Messages beyond this length would need codewords of more than 2²⁴ bits.
    pub const MAX_N: usize = 24;
    pub const DEFAULT_DELTA_DEC: f64 = 0.125;

    pub fn new(n: usize) -> Result<Self> {
        Self::with_radius(n, Self::DEFAULT_DELTA_DEC)
    }

    pub fn with_radius(n: usize, delta_dec: f64) -> Result<Self> {
        if n == 0 || n > Self::MAX_N {
            return Err(Error::config(
                "n",
                format!("Hadamard code supports 1 ≤ n ≤ {}", Self::MAX_N),
            ));
        }
        // Failure probability is at most 2·delta_dec, so the advantage vanishes at 1/4.
        if !(0.0..0.25).contains(&delta_dec) {
            return Err(Error::config("code.delta_dec", "must lie in [0, 1/4)"));
        }
        Ok(HadamardCode { n, delta_dec })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        1 << self.n
    }

    /// The mask `e_i` selecting message bit `i`.
    pub fn unit_mask(&self, index: usize) -> usize {
        1 << (self.n - 1 - index)
    }

    /// The two positions read for bit `index` when the decoder samples `mask`.
    pub fn plan_for_mask(&self, index: usize, mask: usize) -> Result<[usize; 2]> {
        self.check_index(index)?;
        if mask >= self.m() {
            return Err(Error::IndexOutOfRange {
                index: mask,
                len: self.m(),
            });
        }
        Ok([mask, mask ^ self.unit_mask(index)])
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.n {
            return Err(Error::IndexOutOfRange { index, len: self.n });
        }
        Ok(())
    }

    fn pack(&self, msg: &Message) -> usize {
        msg.bits()
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }
}

impl LocallyDecodableCode for HadamardCode {
    fn params(&self) -> CodeParams {
        CodeParams {
            n: self.n,
            m: self.m(),
            q: 2,
            delta: 0.5,
            delta_dec: self.delta_dec,
            eps_dec: 0.5 - 2.0 * self.delta_dec,
        }
    }

    fn encode(&self, msg: &Message) -> Result<Codeword> {
        if msg.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: msg.len(),
            });
        }
        let x = self.pack(msg);
        Codeword::new(
            (0..self.m())
                .map(|a| (x & a).count_ones() % 2 == 1)
                .collect(),
        )
    }

    fn decode_query_plan<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> Result<Vec<usize>> {
        let mask = rng.random_range(0..self.m());
        Ok(self.plan_for_mask(index, mask)?.to_vec())
    }

    fn decode_from_answers(&self, index: usize, plan: &[usize], answers: &[bool]) -> Result<bool> {
        self.check_index(index)?;
        if plan.len() != answers.len() {
            return Err(Error::LengthMismatch {
                expected: plan.len(),
                actual: answers.len(),
            });
        }
        match plan {
            [a, b] if *a < self.m() && *b < self.m() && a ^ b == self.unit_mask(index) => {
                Ok(answers[0] ^ answers[1])
            }
            _ => Err(Error::MalformedPlan(format!(
                "expected two positions differing in the mask of bit {index}, got {plan:?}"
            ))),
        }
    }

    fn constant_distance(&self) -> Option<usize> {
        Some(self.m() / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn msg(s: &str) -> Message {
        s.parse().unwrap()
    }

    /// Direct evaluation of `⟨x, a⟩ mod 2` over bit strings, written
    /// independently of the packed-integer encoder.
    fn brute_hadamard(x: &str) -> String {
        let n = x.len();
        (0..1usize << n)
            .map(|a| {
                let a_bits = format!("{a:0n$b}");
                let parity = x
                    .chars()
                    .zip(a_bits.chars())
                    .filter(|&(xi, ai)| xi == '1' && ai == '1')
                    .count()
                    % 2;
                if parity == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    #[test]
    fn encode_matches_hand_computed_codeword() {
        assert_eq!(brute_hadamard("101"), "01011010");
        let code = HadamardCode::new(3).unwrap();
        assert_eq!(code.encode(&msg("101")).unwrap().to_string(), "01011010");
    }

    #[test]
    fn encode_matches_brute_force_for_all_small_messages() {
        for n in 1..=6 {
            let code = HadamardCode::new(n).unwrap();
            for x in 0..1usize << n {
                let s = format!("{x:0n$b}");
                assert_eq!(
                    code.encode(&msg(&s)).unwrap().to_string(),
                    brute_hadamard(&s)
                );
            }
        }
    }

    #[test]
    fn zero_message_encodes_to_zero_codeword() {
        for n in 1..=10 {
            let code = HadamardCode::new(n).unwrap();
            let cw = code.encode(&Message::zeros(n).unwrap()).unwrap();
            assert_eq!(cw.len(), 1 << n);
            assert!(cw.bits().iter().all(|b| !b));
        }
    }

    #[test]
    fn distinct_messages_are_half_distance_apart() {
        let code = HadamardCode::new(3).unwrap();
        let a = code.encode(&msg("100")).unwrap();
        let b = code.encode(&msg("001")).unwrap();
        assert_eq!(hamming_distance(a.bits(), b.bits()).unwrap(), 4);
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let code = HadamardCode::new(3).unwrap();
        assert_eq!(
            code.encode(&msg("10")),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 2
            })
        );
    }

    #[test]
    fn plan_for_mask_flips_the_target_bit() {
        let code = HadamardCode::new(3).unwrap();
        // Second message bit (0-based index 1) has e = 010.
        assert_eq!(code.plan_for_mask(1, 0b011).unwrap(), [0b011, 0b001]);
        for n in 1..=5 {
            let code = HadamardCode::new(n).unwrap();
            for j in 0..n {
                assert_eq!(code.plan_for_mask(j, 0).unwrap(), [0, code.unit_mask(j)]);
            }
        }
    }

    #[test]
    fn plans_never_exceed_query_budget() {
        let code = HadamardCode::new(6).unwrap();
        let q = code.params().q;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for draw in 0..1000 {
            let plan = code.decode_query_plan(draw % 6, &mut rng).unwrap();
            assert!(plan.len() <= q);
            assert!(plan.iter().all(|&p| p < code.m()));
        }
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        let code = HadamardCode::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            code.decode_query_plan(3, &mut rng),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
        assert!(code
            .decode_from_answers(3, &[0, 1], &[false, false])
            .is_err());
    }

    #[test]
    fn answers_must_align_with_plan() {
        let code = HadamardCode::new(3).unwrap();
        assert!(matches!(
            code.decode_from_answers(0, &[0, 4], &[true]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            code.decode_from_answers(0, &[0, 1], &[true, false]),
            Err(Error::MalformedPlan(_))
        ));
    }

    #[test]
    fn uncorrupted_decoding_is_exact() {
        let code = HadamardCode::new(4).unwrap();
        for x in 0..16usize {
            let m = msg(&format!("{x:04b}"));
            let cw = code.encode(&m).unwrap();
            for j in 0..4 {
                for mask in 0..16 {
                    let plan = code.plan_for_mask(j, mask).unwrap();
                    let answers: Vec<bool> = plan.iter().map(|&p| cw.bits()[p]).collect();
                    assert_eq!(
                        code.decode_from_answers(j, &plan, &answers).unwrap(),
                        m.bits()[j]
                    );
                }
            }
        }
    }

    #[test]
    fn single_flip_on_three_bit_message_keeps_three_quarters_success() {
        // x = 101, first bit, every single-position corruption, every mask.
        let code = HadamardCode::new(3).unwrap();
        let x = msg("101");
        let cw = code.encode(&x).unwrap();
        for flip in 0..8 {
            let mut y = cw.bits().to_vec();
            y[flip] = !y[flip];
            let ok = (0..8)
                .filter(|&mask| {
                    let plan = code.plan_for_mask(0, mask).unwrap();
                    let answers = [y[plan[0]], y[plan[1]]];
                    code.decode_from_answers(0, &plan, &answers).unwrap() == x.bits()[0]
                })
                .count();
            assert_eq!(ok, 6, "flip at {flip}");
            assert!(ok as f64 / 8.0 >= 0.5 + code.params().eps_dec);
        }
    }

    #[test]
    fn params_satisfy_their_own_invariants() {
        for n in 1..=12 {
            let p = HadamardCode::new(n).unwrap().params();
            p.validate().unwrap();
            assert_eq!(p.m, 1 << n);
            assert_eq!(p.eps_dec, 0.25);
        }
        assert_eq!(
            HadamardCode::new(3)
                .unwrap()
                .params()
                .decoding_radius_bits(),
            1
        );
        assert_eq!(
            HadamardCode::new(8)
                .unwrap()
                .params()
                .decoding_radius_bits(),
            32
        );
    }

    #[test]
    fn radius_must_leave_an_advantage() {
        assert!(HadamardCode::with_radius(4, 0.25).is_err());
        assert!(HadamardCode::with_radius(4, -0.1).is_err());
        assert!(HadamardCode::new(0).is_err());
    }

    #[test]
    fn bit_strings_parse_and_display() {
        assert_eq!(msg("0110").to_string(), "0110");
        assert_eq!("".parse::<Message>(), Err(Error::Empty));
        assert_eq!("01x".parse::<Codeword>(), Err(Error::InvalidBit('x')));
    }
}
