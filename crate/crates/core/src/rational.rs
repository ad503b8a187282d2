//! Exact weights.
//!
//! All valuations are kept as arbitrary-precision rationals. Matching
//! algorithms work on integers, so a family of weights is brought to a
//! common denominator with [`scale_to_integers`] before solving.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{KegError, Result};

pub type Weight = BigRational;

pub fn int(v: i64) -> Weight {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Weight {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-1.25"`, `"0.5"` or `"2/3"` exactly.
pub fn parse_weight(s: &str) -> Result<Weight> {
    let t = s.trim();
    let bad = || KegError::BadNumber(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10), fp.len());
    Ok(BigRational::new(num, den))
}

/// Decimal string when the expansion terminates, `p/q` otherwise.
pub fn format_weight(w: &Weight) -> String {
    if w.is_integer() {
        return w.numer().to_string();
    }
    let mut d = w.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", w.numer(), w.denom());
    }
    let places = twos.max(fives);
    let scaled = (w * BigRational::from_integer(num_traits::pow(BigInt::from(10), places)))
        .to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if s.len() <= places {
        s = format!("{}{}", "0".repeat(places + 1 - s.len()), s);
    }
    let (a, b) = s.split_at(s.len() - places);
    format!("{}{}.{}", if neg { "-" } else { "" }, a, b)
}

pub fn to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

/// Multiplies every weight by the least common denominator.
pub fn scale_to_integers<'a, I>(weights: I) -> Result<Vec<i128>>
where
    I: IntoIterator<Item = &'a Weight>,
{
    let ws: Vec<&Weight> = weights.into_iter().collect();
    let mut lcm = BigInt::one();
    for w in &ws {
        lcm = lcm.lcm(w.denom());
    }
    ws.iter()
        .map(|w| {
            let v = w.numer() * (&lcm / w.denom());
            v.to_i128().ok_or(KegError::WeightOverflow)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_weight("3").unwrap(), int(3));
        assert_eq!(parse_weight("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_weight("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_weight("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse_weight(".5").unwrap(), ratio(1, 2));
        assert!(parse_weight("1e3").is_err());
        assert!(parse_weight("").is_err());
        assert!(parse_weight("1/0").is_err());
    }

    #[test]
    fn formats_terminating_and_repeating() {
        assert_eq!(format_weight(&int(12)), "12");
        assert_eq!(format_weight(&ratio(1, 4)), "0.25");
        assert_eq!(format_weight(&ratio(-3, 40)), "-0.075");
        assert_eq!(format_weight(&ratio(2, 3)), "2/3");
        for w in [ratio(7, 8), ratio(2, 3), int(-4), ratio(123, 1000)] {
            assert_eq!(parse_weight(&format_weight(&w)).unwrap(), w);
        }
    }

    #[test]
    fn scaling_uses_common_denominator() {
        let ws = [ratio(1, 2), ratio(2, 3), int(1)];
        assert_eq!(scale_to_integers(ws.iter()).unwrap(), vec![3, 4, 6]);
    }
}
