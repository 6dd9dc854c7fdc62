//! Exact rational fractions and the weak-link exponent.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest denominator kept for `alpha` when it is given as a decimal.
pub const ALPHA_MAX_DENOMINATOR: i64 = 1000;

/// A time fraction: exact rational value with a cached `f64`.
#[derive(Debug, Clone)]
pub struct Fraction {
    exact: BigRational,
    value: f64,
}

impl Fraction {
    pub fn from_exact(exact: BigRational) -> Self {
        let value = exact.to_f64().unwrap_or(f64::NAN);
        Self { exact, value }
    }

    pub fn zero() -> Self {
        Self::from_exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_exact(BigRational::one())
    }

    /// `num / den`. Panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_exact(BigRational::new(num.into(), den.into()))
    }

    /// The exact decimal that `x` prints as (shortest round-trip form).
    pub fn from_f64(x: f64) -> Self {
        Self::from_exact(decimal_to_rational(&format!("{x}")).expect("finite f64"))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn add(&self, other: &Fraction) -> Fraction {
        Self::from_exact(&self.exact + &other.exact)
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Fraction {}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exact)
    }
}

/// Parses `"p/q"` or a plain decimal such as `"0.25"` / `"-1.5e-3"`.
pub fn parse_fraction(s: &str) -> Result<Fraction, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Fraction::from_exact(BigRational::new(p, q)));
    }
    decimal_to_rational(s).map(Fraction::from_exact)
}

/// Exact value of a decimal literal, exponent allowed.
fn decimal_to_rational(s: &str) -> Result<BigRational, String> {
    let bad = || format!("not a number: {s:?}");
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Weak-link power exponent, stored as a reduced `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alpha {
    ratio: Ratio<i64>,
}

/// Result of reading an `alpha`: `exact` is false when a decimal had to be
/// approximated by the closest fraction with a denominator up to 1000.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaParse {
    pub alpha: Alpha,
    pub exact: bool,
}

impl Alpha {
    /// `p / q`. Panics when `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self {
            ratio: Ratio::new(p, q),
        }
    }

    /// Converts a float through its decimal form; see [`AlphaParse`].
    pub fn from_f64(x: f64) -> AlphaParse {
        from_rational(&decimal_to_rational(&format!("{x}")).expect("finite alpha"))
    }

    pub fn numer(&self) -> i64 {
        *self.ratio.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.ratio.denom()
    }

    pub fn value(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn exact(&self) -> BigRational {
        BigRational::new(self.numer().into(), self.denom().into())
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ratio)
    }
}

/// Parses `"p/q"` (kept exactly) or a decimal (see [`Alpha::from_f64`]).
pub fn parse_alpha(s: &str) -> Result<AlphaParse, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| format!("bad alpha numerator in {s:?}"))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| format!("bad alpha denominator in {s:?}"))?;
        if q == 0 {
            return Err(format!("zero denominator in alpha {s:?}"));
        }
        return Ok(AlphaParse {
            alpha: Alpha::ratio(p, q),
            exact: true,
        });
    }
    Ok(from_rational(&decimal_to_rational(s)?))
}

fn from_rational(r: &BigRational) -> AlphaParse {
    if let (Some(p), Some(q)) = (r.numer().to_i64(), r.denom().to_i64()) {
        if q <= ALPHA_MAX_DENOMINATOR {
            return AlphaParse {
                alpha: Alpha::ratio(p, q),
                exact: true,
            };
        }
    }
    let alpha = best_approximation(r, ALPHA_MAX_DENOMINATOR);
    log::warn!("alpha {r} approximated by {alpha}");
    AlphaParse {
        alpha,
        exact: false,
    }
}

/// Closest fraction to `r` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
fn best_approximation(r: &BigRational, max_den: i64) -> Alpha {
    let neg = r.is_negative();
    let target = r.abs();
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut x = target.clone();
    let max = BigInt::from(max_den);
    loop {
        let a = x.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max {
            // semiconvergent with the largest admissible partial quotient
            let k = (&max - &q0) / &q1;
            let ps = &p0 + &k * &p1;
            let qs = &q0 + &k * &q1;
            let semi = BigRational::new(ps.clone(), qs.clone());
            let conv = BigRational::new(p1.clone(), q1.clone());
            let (p, q) = if (&semi - &target).abs() < (&conv - &target).abs() {
                (ps, qs)
            } else {
                (p1, q1)
            };
            return finish(neg, p, q);
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &x - BigRational::from_integer(a);
        if frac.is_zero() {
            return finish(neg, p1, q1);
        }
        x = frac.recip();
    }
}

fn finish(neg: bool, p: BigInt, q: BigInt) -> Alpha {
    let p = p.to_i64().expect("bounded numerator");
    Alpha::ratio(
        if neg { -p } else { p },
        q.to_i64().expect("bounded denominator"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_floats_become_their_printed_decimal() {
        assert_eq!(Fraction::from_f64(0.1), Fraction::ratio(1, 10));
        assert_eq!(Fraction::from_f64(0.5), Fraction::ratio(1, 2));
        assert_eq!(Fraction::from_f64(1e-7), Fraction::ratio(1, 10_000_000));
        assert_eq!(Fraction::from_f64(-2.0), Fraction::ratio(-2, 1));
    }

    #[test]
    fn fraction_strings() {
        assert_eq!(parse_fraction("1/3").unwrap(), Fraction::ratio(1, 3));
        assert_eq!(parse_fraction("0.25").unwrap(), Fraction::ratio(1, 4));
        assert_eq!(parse_fraction("2.5e-1").unwrap(), Fraction::ratio(1, 4));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("abc").is_err());
        assert!(parse_fraction(".").is_err());
    }

    #[test]
    fn alpha_decimals_with_small_denominators_are_exact() {
        let a = parse_alpha("0.75").unwrap();
        assert!(a.exact);
        assert_eq!((a.alpha.numer(), a.alpha.denom()), (3, 4));
        let b = Alpha::from_f64(0.125);
        assert_eq!((b.alpha.numer(), b.alpha.denom()), (1, 8));
    }

    #[test]
    fn alpha_with_long_decimal_is_approximated() {
        let a = Alpha::from_f64(1.0 / 3.0);
        assert!(!a.exact);
        assert_eq!((a.alpha.numer(), a.alpha.denom()), (1, 3));
        let pi = Alpha::from_f64(std::f64::consts::PI);
        assert_eq!((pi.alpha.numer(), pi.alpha.denom()), (355, 113));
    }

    #[test]
    fn alpha_ratio_string_is_kept() {
        let a = parse_alpha("2/3").unwrap();
        assert!(a.exact);
        assert_eq!(a.alpha, Alpha::ratio(2, 3));
        assert!((a.alpha.value() - 2.0 / 3.0).abs() < 1e-15);
    }
}
