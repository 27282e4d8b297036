//! Exact rational probabilities.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary non-negative rational used for raw edge weights and masses
/// before they are known to lie in `[0, 1]`.
pub type Ratio = BigRational;

/// A probability stored as a reduced fraction in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(Ratio);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProbError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("probability out of range: {0}")]
    OutOfRange(String),
    #[error("malformed number {0:?}")]
    Malformed(String),
}

impl Prob {
    pub fn zero() -> Self {
        Prob(Ratio::zero())
    }

    pub fn one() -> Self {
        Prob(Ratio::one())
    }

    pub fn new(numer: u64, denom: u64) -> Result<Self, ProbError> {
        if denom == 0 {
            return Err(ProbError::ZeroDenominator);
        }
        Self::from_ratio(Ratio::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_ratio(r: Ratio) -> Result<Self, ProbError> {
        if r.is_negative() || r > Ratio::one() {
            return Err(ProbError::OutOfRange(format_ratio(&r)));
        }
        Ok(Prob(r))
    }

    pub fn as_ratio(&self) -> &Ratio {
        &self.0
    }

    pub fn into_ratio(self) -> Ratio {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// `self / other`. Fails when `other` is zero or the quotient exceeds 1.
    pub fn ratio_to(&self, other: &Prob) -> Result<Prob, ProbError> {
        if other.is_zero() {
            return Err(ProbError::ZeroDenominator);
        }
        Prob::from_ratio(&self.0 / &other.0)
    }

    /// Absolute difference, always in `[0, 1]`.
    pub fn abs_diff(&self, other: &Prob) -> Prob {
        Prob((&self.0 - &other.0).abs())
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    /// Decimal rendering with `sig` significant digits, trailing zeros trimmed.
    pub fn to_sig_digits(&self, sig: u32) -> String {
        ratio_to_sig_digits(&self.0, sig)
    }

    /// Percentage with up to `sig` significant digits, e.g. `5.52%`.
    pub fn to_percent(&self, sig: u32) -> String {
        let scaled = &self.0 * Ratio::from_integer(BigInt::from(100));
        format!("{}%", ratio_to_sig_digits(&scaled, sig))
    }

    /// Whether a decimal expansion of `self` terminates within `sig` significant digits.
    pub fn is_exact_at(&self, sig: u32) -> bool {
        let s = self.to_sig_digits(sig);
        parse_decimal(&s).map(|r| r == self.0).unwrap_or(false)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(&self.0))
    }
}

impl Mul for &Prob {
    type Output = Prob;
    fn mul(self, rhs: &Prob) -> Prob {
        Prob(&self.0 * &rhs.0)
    }
}

impl Mul for Prob {
    type Output = Prob;
    fn mul(self, rhs: Prob) -> Prob {
        Prob(self.0 * rhs.0)
    }
}

impl FromStr for Prob {
    type Err = ProbError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Prob::from_ratio(parse_ratio(s)?)
    }
}

impl serde::Serialize for Prob {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Always `num/den`, including integers (`1/1`).
pub fn format_ratio(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `3/5`, `0.92`, `.5`, `1`, or `92%` into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Ratio, ProbError> {
    let malformed = || ProbError::Malformed(s.to_string());
    if let Some(body) = s.strip_suffix('%') {
        let r = parse_decimal(body).ok_or_else(malformed)?;
        return Ok(r / Ratio::from_integer(BigInt::from(100)));
    }
    if let Some((n, d)) = s.split_once('/') {
        if !is_digits(n) || !is_digits(d) {
            return Err(malformed());
        }
        let n: BigInt = n.parse().map_err(|_| malformed())?;
        let d: BigInt = d.parse().map_err(|_| malformed())?;
        if d.is_zero() {
            return Err(ProbError::ZeroDenominator);
        }
        return Ok(Ratio::new(n, d));
    }
    parse_decimal(s).ok_or_else(malformed)
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_decimal(s: &str) -> Option<Ratio> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !(int.is_empty() || is_digits(int)) || !(frac.is_empty() || is_digits(frac)) {
        return None;
    }
    if s.ends_with('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Ratio::new(numer, denom))
}

pub(crate) fn ratio_to_f64(r: &Ratio) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Round-half-up decimal with `sig` significant digits, computed exactly.
pub(crate) fn ratio_to_sig_digits(r: &Ratio, sig: u32) -> String {
    let sig = sig.max(1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let r = r.abs();
    let ten = BigInt::from(10);
    // exponent e such that 10^e <= r < 10^(e+1)
    let mut e: i64 = r.numer().to_string().len() as i64 - r.denom().to_string().len() as i64;
    loop {
        let lo = pow10(e);
        if r < lo {
            e -= 1;
            continue;
        }
        if r >= pow10(e + 1) {
            e += 1;
            continue;
        }
        break;
    }
    // scale so that `sig` digits sit left of the point
    let shift = sig as i64 - 1 - e;
    let scaled = &r * pow10(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = q;
    if &rem * BigInt::from(2) >= *scaled.denom() {
        digits += BigInt::one();
    }
    // rounding may carry into an extra digit (9.995 -> 10.00)
    let mut shift = shift;
    if digits.to_string().len() as u32 > sig {
        digits /= &ten;
        shift -= 1;
    }
    let s = digits.to_string();
    let mut out = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{s}{zeros}")
    } else if (shift as usize) < s.len() {
        let (a, b) = s.split_at(s.len() - shift as usize);
        format!("{a}.{b}")
    } else {
        let zeros = "0".repeat(shift as usize - s.len());
        format!("0.{zeros}{s}")
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    if negative {
        out.insert(0, '-');
    }
    out
}

fn pow10(e: i64) -> Ratio {
    let p = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Ratio::from_integer(p)
    } else {
        Ratio::new(BigInt::one(), p)
    }
}

/// Least common multiple of the denominators of `rs`.
pub(crate) fn common_denominator<'a>(rs: impl IntoIterator<Item = &'a Ratio>) -> BigUint {
    rs.into_iter().fold(BigUint::one(), |acc, r| {
        let d = r.denom().magnitude();
        acc.lcm(d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Prob {
        s.parse().unwrap()
    }

    #[test]
    fn percent_decimal_fraction_agree() {
        assert_eq!(p("92%"), p("0.92"));
        assert_eq!(p("0.92"), p("23/25"));
        assert_eq!(p("6.0%"), p("3/50"));
    }

    #[test]
    fn lowest_terms() {
        let x = p("50/100");
        assert_eq!(x.numer(), &BigInt::from(1));
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(x.to_string(), "1/2");
        assert_eq!(Prob::one().to_string(), "1/1");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!("3/2".parse::<Prob>(), Err(ProbError::OutOfRange(_))));
        assert!(matches!("1/0".parse::<Prob>(), Err(ProbError::ZeroDenominator)));
        for bad in ["", ".", "1.", "a", "1/", "/2", "-1", "1e3", "%"] {
            assert!(parse_ratio(bad).is_err(), "{bad:?} accepted");
        }
        assert_eq!(parse_ratio(".5").unwrap(), Ratio::new(1.into(), 2.into()));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(p("23/117").to_sig_digits(12), "0.196581196581");
        assert_eq!(p("23/117").to_sig_digits(6), "0.196581");
        assert_eq!(p("23/117").to_sig_digits(4), "0.1966");
        assert_eq!(p("69/1250").to_sig_digits(12), "0.0552");
        assert_eq!(p("1").to_sig_digits(12), "1");
        assert_eq!(p("0").to_sig_digits(12), "0");
        assert_eq!(p("9995/10000").to_sig_digits(3), "1");
        assert_eq!(p("2/3").to_sig_digits(4), "0.6667");
        assert_eq!(p("1/1000000").to_sig_digits(2), "0.000001");
    }

    #[test]
    fn percentages() {
        assert_eq!(p("69/1250").to_percent(4), "5.52%");
        assert_eq!(p("3/50").to_percent(4), "6%");
        assert_eq!(p("1/3").to_percent(4), "33.33%");
        assert_eq!(p("1").to_percent(4), "100%");
        assert_eq!(p("0").to_percent(4), "0%");
    }

    #[test]
    fn exactness() {
        assert!(p("69/1250").is_exact_at(12));
        assert!(!p("23/117").is_exact_at(12));
    }

    #[test]
    fn ratio_and_diff() {
        assert_eq!(p("69/1250").ratio_to(&p("351/1250")).unwrap(), p("23/117"));
        assert!(p("1/2").ratio_to(&p("1/4")).is_err());
        assert!(p("1/2").ratio_to(&Prob::zero()).is_err());
        assert_eq!(p("1/4").abs_diff(&p("3/4")), p("1/2"));
    }

    #[test]
    fn lcm_of_denominators() {
        let rs = [parse_ratio("1/4").unwrap(), parse_ratio("1/6").unwrap()];
        assert_eq!(common_denominator(&rs), BigUint::from(12u32));
    }
}
