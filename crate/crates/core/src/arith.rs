//! Exact integer primitives: integer square roots, squareness and the sign type.
//!
//! Every comparison against √n in this crate goes through these helpers as an
//! integer inequality. Nothing here touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision nonnegative integer.
pub type Nat = BigUint;

/// Floor of the square root: the unique `r` with `r² ≤ v < (r+1)²`.
///
/// Newton iteration starting above the root; the sequence decreases strictly
/// until it reaches ⌊√v⌋, after which the final clamp loops are no-ops.
pub fn isqrt(v: &Nat) -> Nat {
    if v.is_zero() {
        return Nat::zero();
    }
    // 2^ceil(bits/2) > √v
    let mut x = Nat::one() << v.bits().div_ceil(2);
    loop {
        let y = (&x + v / &x) >> 1u32;
        if y >= x {
            break;
        }
        x = y;
    }
    while &x * &x > *v {
        x -= 1u32;
    }
    loop {
        let next = &x + 1u32;
        if &next * &next <= *v {
            x = next;
        } else {
            break;
        }
    }
    x
}

pub fn is_square(v: &Nat) -> bool {
    let r = isqrt(v);
    &r * &r == *v
}

/// `isqrt` on machine words, for the hot loops of the brute-force oracle.
pub fn isqrt_u128(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let bits = 128 - v.leading_zeros();
    let mut x: u128 = 1 << bits.div_ceil(2);
    loop {
        let y = (x + v / x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(x).is_none_or(|sq| sq > v) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= v) {
        x += 1;
    }
    x
}

// Quadratic residue filters; a square must pass all three.
const fn residue_table<const M: usize>() -> [bool; M] {
    let mut t = [false; M];
    let mut i = 0;
    while i < M {
        t[(i * i) % M] = true;
        i += 1;
    }
    t
}

static QR64: [bool; 64] = residue_table::<64>();
static QR63: [bool; 63] = residue_table::<63>();
static QR65: [bool; 65] = residue_table::<65>();

pub fn is_square_u128(v: u128) -> bool {
    if !QR64[(v % 64) as usize] || !QR63[(v % 63) as usize] || !QR65[(v % 65) as usize] {
        return false;
    }
    let r = isqrt_u128(v);
    r * r == v
}

/// A sign in {+1, −1}, serialized as the integer itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// Sign of `a − b`; `None` when they are equal.
    pub fn of_difference(a: &Nat, b: &Nat) -> Option<Sign> {
        match a.cmp(b) {
            Ordering::Greater => Some(Sign::Plus),
            Ordering::Less => Some(Sign::Minus),
            Ordering::Equal => None,
        }
    }

    pub fn apply(self, v: BigInt) -> BigInt {
        match self {
            Sign::Plus => v,
            Sign::Minus => -v,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_i64(v).ok_or_else(|| serde::de::Error::custom(format!("sign must be 1 or -1, got {v}")))
    }
}

/// `|m² − n|` together with the sign of `m² − n`. `None` only when `m² = n`.
pub fn signed_gap(n: &Nat, m: &Nat) -> Option<(Nat, Sign)> {
    let sq = m * m;
    let sign = Sign::of_difference(&sq, n)?;
    let gap = match sign {
        Sign::Plus => sq - n,
        Sign::Minus => n - sq,
    };
    Some((gap, sign))
}

/// Serde adapter writing big naturals as decimal strings.
pub mod decimal {
    use super::Nat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Nat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("not a decimal natural: {s:?}")))
    }

    /// Strict decimal parse: digits only, no sign, no whitespace.
    pub fn parse(s: &str) -> Option<Nat> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Nat::parse_bytes(s.as_bytes(), 10)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&nat(29)), nat(5));
        assert_eq!(isqrt(&nat(0)), nat(0));
        assert_eq!(isqrt(&nat(1_000_000_000_000_000_000)), nat(1_000_000_000));
    }

    #[test]
    fn isqrt_bracket_sweep() {
        for v in 0u64..=200_000 {
            let r = isqrt(&nat(v));
            let r1 = &r + 1u32;
            assert!(&r * &r <= nat(v) && &r1 * &r1 > nat(v), "v={v}");
        }
    }

    #[test]
    fn isqrt_huge_values() {
        let big = Nat::from(10u32).pow(301) + 12345u32;
        let r = isqrt(&big);
        assert_eq!(r, big.sqrt());
        let sq = Nat::from(987_654_321_987u64).pow(6);
        assert_eq!(isqrt(&sq), Nat::from(987_654_321_987u64).pow(3));
        assert_eq!(isqrt(&(&sq - 1u32)), Nat::from(987_654_321_987u64).pow(3) - 1u32);
    }

    #[test]
    fn is_square_examples() {
        assert!(!is_square(&nat(29)));
        assert!(is_square(&nat(36)));
        assert!(is_square(&nat(1)));
        assert!(is_square(&nat(0)));
    }

    #[test]
    fn is_square_matches_scan() {
        let mut squares = vec![false; 1_000_001];
        let mut i = 0usize;
        while i * i <= 1_000_000 {
            squares[i * i] = true;
            i += 1;
        }
        for (v, &expected) in squares.iter().enumerate() {
            assert_eq!(is_square(&nat(v as u64)), expected, "v={v}");
            assert_eq!(is_square_u128(v as u128), expected, "v={v}");
        }
    }

    #[test]
    fn isqrt_u128_edges() {
        assert_eq!(isqrt_u128(u128::MAX), u64::MAX as u128);
        assert_eq!(isqrt_u128((u64::MAX as u128) * (u64::MAX as u128)), u64::MAX as u128);
        assert!(is_square_u128((u64::MAX as u128) * (u64::MAX as u128)));
        assert!(!is_square_u128(u128::MAX));
    }

    #[test]
    fn sign_product() {
        assert_eq!(Sign::Minus * Sign::Minus, Sign::Plus);
        assert_eq!(Sign::Minus * Sign::Plus, Sign::Minus);
        assert_eq!(signed_gap(&nat(29), &nat(5)), Some((nat(4), Sign::Minus)));
        assert_eq!(signed_gap(&nat(29), &nat(7)), Some((nat(20), Sign::Plus)));
        assert_eq!(signed_gap(&nat(36), &nat(6)), None);
    }

    #[test]
    fn decimal_parse_is_strict() {
        assert_eq!(decimal::parse("0029"), Some(nat(29)));
        assert_eq!(decimal::parse("-1"), None);
        assert_eq!(decimal::parse(""), None);
        assert_eq!(decimal::parse(" 2"), None);
    }
}
