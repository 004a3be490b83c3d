//! High-precision transcendental values for rational arguments.
//!
//! Values are computed with `astro-float` at a working precision well above
//! 64 decimal digits and then rounded to 64 significant digits.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_traits::Zero;

use super::coeff::{parse_decimal, Rational};

const WORKING_BITS: usize = 320;
const DIGITS: usize = 64;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kind {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

pub(crate) fn eval(kind: Kind, x: &Rational) -> Rational {
    let rm = RoundingMode::ToEven;
    let p = WORKING_BITS;
    let mut cc = Consts::new().expect("astro-float constant cache");
    let num = BigFloat::parse(&x.numer().to_string(), Radix::Dec, p, rm, &mut cc);
    let den = BigFloat::parse(&x.denom().to_string(), Radix::Dec, p, rm, &mut cc);
    let arg = num.div(&den, p, rm);
    let out = match kind {
        Kind::Sin => arg.sin(p, rm, &mut cc),
        Kind::Cos => arg.cos(p, rm, &mut cc),
        Kind::Exp => arg.exp(p, rm, &mut cc),
        Kind::Ln => arg.ln(p, rm, &mut cc),
        Kind::Sqrt => arg.sqrt(p, rm),
    };
    if out.is_zero() {
        return Rational::zero();
    }
    let text = out
        .format(Radix::Dec, rm, &mut cc)
        .expect("formatting a finite value");
    round_significant(&text, DIGITS)
        .unwrap_or_else(|| panic!("unparseable high-precision value `{text}`"))
}

/// Rounds a scientific decimal string to `digits` significant digits and
/// returns its exact rational value.
fn round_significant(text: &str, digits: usize) -> Option<Rational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let mut all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).collect();
    let mut point = int_part.len() as i64 + exp;
    // strip leading zeros so that significance counts from the first nonzero digit
    while all.first() == Some(&b'0') && all.len() > 1 {
        all.remove(0);
        point -= 1;
    }
    if all.len() > digits {
        let round_up = all[digits] >= b'5';
        all.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    all.insert(0, b'1');
                    all.pop();
                    point += 1;
                    break;
                }
                i -= 1;
                if all[i] == b'9' {
                    all[i] = b'0';
                } else {
                    all[i] += 1;
                    break;
                }
            }
        }
    }
    let digits_str = String::from_utf8(all).ok()?;
    let scale = point - digits_str.len() as i64;
    let literal = format!("{}{}e{}", if neg { "-" } else { "" }, digits_str, scale);
    parse_decimal(&literal)
}
