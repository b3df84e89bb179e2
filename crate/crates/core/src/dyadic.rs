//! Exact non-negative dyadic rationals.
//!
//! Every distance produced by the adversarial graph families is a sum of
//! distinct powers of two (possibly negative exponents), with magnitudes up
//! to roughly `2^(m^2+2)`. A binary float cannot distinguish `2^443` from
//! `2^443 + 1`, yet the set-membership thresholds of the search algorithms
//! hinge on exactly such comparisons, so all graph-metric arithmetic runs on
//! this type. The only operations the algorithms need are addition,
//! subtraction of a smaller value, halving/doubling and total-order
//! comparison; all of them are exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{CheckedSub, One, Zero};

use crate::metric::Distance;

/// Non-negative dyadic rational `mantissa * 2^exponent`.
///
/// Normal form: the mantissa is odd, or the value is zero with exponent 0.
/// The normal form is unique, so derived equality is value equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigUint,
    exponent: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mantissa: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mantissa: BigUint::one(), exponent: 0 }
    }

    /// Exactly `2^exp` for any integer `exp`, positive or negative.
    pub fn pow2(exp: i64) -> Self {
        Dyadic { mantissa: BigUint::one(), exponent: exp }
    }

    pub fn from_u64(value: u64) -> Self {
        Self::normalized(BigUint::from(value), 0)
    }

    /// Builds `mantissa * 2^exponent`, reducing to normal form.
    pub fn new(mantissa: BigUint, exponent: i64) -> Self {
        Self::normalized(mantissa, exponent)
    }

    fn normalized(mantissa: BigUint, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        match mantissa.trailing_zeros() {
            Some(0) | None => Dyadic { mantissa, exponent },
            Some(tz) => Dyadic {
                mantissa: mantissa >> tz,
                exponent: exponent + tz as i64,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn add(&self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let exp = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << u64::try_from(self.exponent - exp).expect("exponent gap");
        let b = &rhs.mantissa << u64::try_from(rhs.exponent - exp).expect("exponent gap");
        Self::normalized(a + b, exp)
    }

    /// `self - rhs`, or `None` when the result would be negative.
    pub fn checked_sub(&self, rhs: &Dyadic) -> Option<Dyadic> {
        if rhs.is_zero() {
            return Some(self.clone());
        }
        if self.is_zero() {
            return None;
        }
        let exp = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << u64::try_from(self.exponent - exp).expect("exponent gap");
        let b = &rhs.mantissa << u64::try_from(rhs.exponent - exp).expect("exponent gap");
        a.checked_sub(&b).map(|m| Self::normalized(m, exp))
    }

    /// `|self - rhs|`.
    pub fn abs_diff(&self, rhs: &Dyadic) -> Dyadic {
        match self.cmp(rhs) {
            Ordering::Less => rhs.checked_sub(self).expect("rhs >= self"),
            _ => self.checked_sub(rhs).expect("self >= rhs"),
        }
    }

    pub fn halve(&self) -> Dyadic {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic { mantissa: self.mantissa.clone(), exponent: self.exponent - 1 }
    }

    pub fn double(&self) -> Dyadic {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic { mantissa: self.mantissa.clone(), exponent: self.exponent + 1 }
    }

    /// Smallest integer `k` with `2^k >= self`. Panics on zero.
    pub fn ceil_log2(&self) -> i64 {
        assert!(!self.is_zero(), "ceil_log2 of zero");
        if self.mantissa.is_one() {
            self.exponent
        } else {
            // An odd mantissa >= 3 satisfies 2^(bits-1) < m < 2^bits.
            self.exponent + self.mantissa.bits() as i64
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {}
        }
        // Positions of the leading bits decide unless they coincide.
        let hi_a = self.exponent + self.mantissa.bits() as i64;
        let hi_b = other.exponent + other.mantissa.bits() as i64;
        if hi_a != hi_b {
            return hi_a.cmp(&hi_b);
        }
        let exp = self.exponent.min(other.exponent);
        let a = &self.mantissa << u64::try_from(self.exponent - exp).expect("exponent gap");
        let b = &other.mantissa << u64::try_from(other.exponent - exp).expect("exponent gap");
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::add(self, rhs)
    }
}

impl From<u64> for Dyadic {
    fn from(value: u64) -> Self {
        Dyadic::from_u64(value)
    }
}

impl fmt::Display for Dyadic {
    /// Canonical decimal-free textual form `m*2^e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({})", self)
    }
}

/// Error from parsing the `m*2^e` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDyadicError {
    pub input: String,
}

impl fmt::Display for ParseDyadicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid dyadic literal {:?}, expected m*2^e", self.input)
    }
}

impl std::error::Error for ParseDyadicError {}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError { input: s.to_string() };
        let (mant, exp) = s.split_once("*2^").ok_or_else(err)?;
        let mantissa: BigUint = mant.trim().parse().map_err(|_| err())?;
        let exponent: i64 = exp.trim().parse().map_err(|_| err())?;
        Ok(Dyadic::normalized(mantissa, exponent))
    }
}

impl Distance for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        Dyadic::add(self, rhs)
    }
    fn halve(&self) -> Self {
        Dyadic::halve(self)
    }
    fn pow2(exp: i64) -> Self {
        Dyadic::pow2(exp)
    }
    fn ceil_log2(&self) -> i64 {
        Dyadic::ceil_log2(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dy(v: u64) -> Dyadic {
        Dyadic::from_u64(v)
    }

    #[test]
    fn pow2_basics() {
        assert_eq!(Dyadic::pow2(0), dy(1));
        assert_eq!(Dyadic::pow2(10), dy(1024));
        assert_eq!(Dyadic::pow2(-1).double(), dy(1));
        assert_eq!(Dyadic::pow2(-1).to_string(), "1*2^-1");
    }

    #[test]
    fn huge_magnitude_comparison_is_exact() {
        // 2^443 + 1 > 2^443: the comparison a float mantissa cannot make.
        let big = Dyadic::pow2(443);
        let bigger = big.add(&dy(1));
        assert_eq!(bigger.cmp(&big), Ordering::Greater);
        assert_eq!(dy(1).cmp(&dy(1)), Ordering::Equal);
        let a = Dyadic::pow2(5);
        let b = a.add(&Dyadic::pow2(-3));
        assert_eq!(a.cmp(&b), Ordering::Less);
    }

    #[test]
    fn subtraction_and_normal_form() {
        let a = Dyadic::pow2(12);
        let b = Dyadic::pow2(11);
        assert_eq!(a.checked_sub(&b), Some(Dyadic::pow2(11)));
        assert_eq!(b.checked_sub(&a), None);
        assert_eq!(a.checked_sub(&a), Some(Dyadic::zero()));
        // 6 * 2^3 normalizes to 3 * 2^4.
        let six_eights = Dyadic::new(BigUint::from(6u32), 3);
        assert_eq!(six_eights.to_string(), "3*2^4");
        assert_eq!(six_eights, dy(48));
    }

    #[test]
    fn geometric_sum_stays_below_next_power() {
        // pow2(i) + ... + pow2(j) < pow2(j+1), the margin the separation
        // condition of the leveled trees relies on.
        for (i, j) in [(-8i64, 5i64), (0, 0), (3, 40), (-64, -60)] {
            let mut sum = Dyadic::zero();
            for t in i..=j {
                sum = sum.add(&Dyadic::pow2(t));
            }
            assert!(sum < Dyadic::pow2(j + 1), "sum {} vs {}", sum, Dyadic::pow2(j + 1));
            assert!(sum >= Dyadic::pow2(j));
        }
    }

    #[test]
    fn ceil_log2_cases() {
        assert_eq!(dy(1).ceil_log2(), 0);
        assert_eq!(dy(2).ceil_log2(), 1);
        assert_eq!(dy(3).ceil_log2(), 2);
        assert_eq!(dy(4).ceil_log2(), 2);
        assert_eq!(dy(5).ceil_log2(), 3);
        assert_eq!(Dyadic::pow2(-7).ceil_log2(), -7);
        assert_eq!(Dyadic::pow2(443).add(&dy(1)).ceil_log2(), 444);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<Dyadic>().is_err());
        assert!("5".parse::<Dyadic>().is_err());
        assert!("-1*2^3".parse::<Dyadic>().is_err());
        assert!("1*2^x".parse::<Dyadic>().is_err());
        assert_eq!("9*2^-3".parse::<Dyadic>().unwrap().to_string(), "9*2^-3");
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        // Exponents spanning [-64, 2048] per the serialization contract.
        (any::<u64>(), -64i64..=2048).prop_map(|(m, e)| Dyadic::new(BigUint::from(m), e))
    }

    proptest! {
        #[test]
        fn roundtrip_display_parse(d in arb_dyadic()) {
            let back: Dyadic = d.to_string().parse().unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn addition_commutes(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
        }

        #[test]
        fn addition_associates(a in arb_dyadic(), b in arb_dyadic(), c in arb_dyadic()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn sub_inverts_add(a in arb_dyadic(), b in arb_dyadic()) {
            prop_assert_eq!(a.add(&b).checked_sub(&b), Some(a.clone()));
        }

        #[test]
        fn halve_then_double_is_identity(a in arb_dyadic()) {
            prop_assert_eq!(a.halve().double(), a.clone());
            prop_assert_eq!(a.halve().add(&a.halve()), a);
        }

        #[test]
        fn order_respects_addition(a in arb_dyadic(), b in arb_dyadic()) {
            if !b.is_zero() {
                prop_assert!(a.add(&b) > a);
            }
        }

        #[test]
        fn ceil_log2_is_tight(a in arb_dyadic()) {
            if !a.is_zero() {
                let k = a.ceil_log2();
                prop_assert!(Dyadic::pow2(k) >= a);
                prop_assert!(Dyadic::pow2(k - 1) < a);
            }
        }
    }
}
