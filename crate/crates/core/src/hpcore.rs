//! Arbitrary-precision numeric context.
//!
//! Every routine in this crate takes a [`NumericContext`] explicitly. The
//! context fixes the number of decimal digits and the matching binary
//! precision handed to MPFR, which rounds every elementary operation
//! (`+ - * /`, `sqrt`, `exp`, `ln`) correctly to nearest. Two contexts with
//! the same digit count therefore produce bit-identical results for the same
//! sequence of operations.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float, Integer};

use crate::error::{Error, Result};

/// Arbitrary-precision real number. The precision travels with the value.
pub type HpReal = Float;

/// Smallest working precision accepted by [`NumericContext::new`].
pub const MIN_DIGITS: u32 = 30;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Immutable working-precision configuration shared by all modules.
#[derive(Debug, Clone)]
pub struct NumericContext {
    digits: u32,
    prec: u32,
    pi: Float,
    e: Float,
}

impl NumericContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::PrecisionTooLow {
                digits,
                min: MIN_DIGITS,
            });
        }
        // A few guard bits so that the last requested decimal digit is sound.
        let prec = (f64::from(digits) * LOG2_10).ceil() as u32 + 8;
        let pi = Float::with_val(prec, Constant::Pi);
        let e = Float::with_val(prec, 1).exp();
        Ok(Self { digits, prec, pi, e })
    }

    /// Decimal digits of working precision.
    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision in bits.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn real<T>(&self, value: T) -> HpReal
    where
        Float: Assign<T>,
    {
        Float::with_val(self.prec, value)
    }

    pub fn zero(&self) -> HpReal {
        Float::new(self.prec)
    }

    pub fn one(&self) -> HpReal {
        self.real(1)
    }

    /// `num / den` rounded once.
    pub fn ratio(&self, num: i64, den: i64) -> HpReal {
        let mut x = self.real(num);
        x /= den;
        x
    }

    pub fn pi(&self) -> HpReal {
        self.pi.clone()
    }

    pub fn e(&self) -> HpReal {
        self.e.clone()
    }

    /// `10^(-k)`.
    pub fn tolerance(&self, k: i32) -> HpReal {
        self.real(10).pow(-k)
    }

    /// Parses a decimal (`"0.5"`, `"1e-3"`) or rational (`"1/3"`) literal.
    pub fn parse(&self, text: &str) -> Result<HpReal> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num = self.parse(num)?;
            let den = self.parse(den)?;
            if den.is_zero() {
                return Err(Error::InvalidParameter(format!("zero denominator in {text:?}")));
            }
            return Ok(num / den);
        }
        let parsed = Float::parse(text)
            .map_err(|e| Error::InvalidParameter(format!("cannot parse {text:?} as a number: {e}")))?;
        Ok(self.real(parsed))
    }

    /// Rounds `x` (possibly at another precision) to this context.
    pub fn round(&self, x: &HpReal) -> HpReal {
        self.real(x)
    }
}

/// Exact `n!` rounded once to the working precision.
pub fn factorial(n: u32, ctx: &NumericContext) -> HpReal {
    ctx.real(&exact_factorial(n))
}

pub(crate) fn exact_factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Renders `x` with at most `significant` significant digits, trailing zeros
/// removed. Exponents from -6 up to the digit count print positionally
/// (`0.5`, `123.25`), anything else as `d.ddde±x`. The output is fully
/// deterministic.
pub fn format_real(x: &HpReal, significant: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let significant = significant.max(1);
    let (negative, digits, exp) = x.to_sign_string_exp(10, Some(significant));
    let digits = digits.trim_end_matches('0');
    // value = 0.DIGITS * 10^exp
    let exp = exp.unwrap_or(0) as i64;
    let sign = if negative { "-" } else { "" };
    let n = digits.len() as i64;
    if (-5..=significant as i64).contains(&exp) {
        let body = if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), digits)
        } else if exp >= n {
            format!("{}{}", digits, "0".repeat((exp - n) as usize))
        } else {
            format!("{}.{}", &digits[..exp as usize], &digits[exp as usize..])
        };
        return format!("{sign}{body}");
    }
    let (head, tail) = digits.split_at(1);
    let mantissa = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    format!("{sign}{mantissa}e{}", exp - 1)
}

/// Number of significant digits used for text output at this context.
pub fn display_digits(ctx: &NumericContext) -> usize {
    ctx.digits().min(50) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(matches!(
            NumericContext::new(10),
            Err(Error::PrecisionTooLow { digits: 10, .. })
        ));
        assert!(NumericContext::new(30).is_ok());
    }

    #[test]
    fn context_digits_and_constants() {
        let ctx = NumericContext::new(100).unwrap();
        assert_eq!(ctx.digits(), 100);
        assert!(ctx.prec() as f64 >= 100.0 * LOG2_10);
        let pi = format_real(&ctx.pi(), 40);
        assert_eq!(pi, "3.141592653589793238462643383279502884197");
        let ctx = NumericContext::new(400).unwrap();
        assert_eq!(ctx.digits(), 400);
        let e = format_real(&ctx.e(), 30);
        assert_eq!(e, "2.71828182845904523536028747135");
    }

    #[test]
    fn factorial_values() {
        let ctx = NumericContext::new(50).unwrap();
        assert_eq!(factorial(0, &ctx), 1);
        assert_eq!(factorial(5, &ctx), 120);
        // Independent oracle: plain integer product.
        let oracle: u64 = (1..=20u64).product();
        assert_eq!(oracle, 2_432_902_008_176_640_000);
        assert_eq!(factorial(20, &ctx), ctx.real(oracle));
    }

    #[test]
    fn stirling_sandwich_holds() {
        let ctx = NumericContext::new(60).unwrap();
        for n in 1..=100u32 {
            let nf = ctx.real(n);
            // n^{n+1/2} e^{-n}
            let core = nf.clone().pow(nf.clone() + 0.5f64) * (-nf.clone()).exp();
            let lower = (ctx.pi() * 2u32).sqrt() * &core;
            // equality at n = 1, so allow one rounding
            let upper = ctx.e() * &core * (ctx.one() + ctx.tolerance(55));
            let f = factorial(n, &ctx);
            assert!(lower <= f && f <= upper, "n = {n}");
        }
    }

    #[test]
    fn deterministic_digit_strings() {
        let a = NumericContext::new(80).unwrap();
        let b = NumericContext::new(80).unwrap();
        let run = |ctx: &NumericContext| {
            let x = ctx.ratio(7, 3).sqrt().exp().ln() / ctx.pi();
            format_real(&x, 80)
        };
        assert_eq!(run(&a), run(&b));
        assert_eq!(run(&a), run(&a));
    }

    #[test]
    fn parse_forms() {
        let ctx = NumericContext::new(40).unwrap();
        assert_eq!(ctx.parse("0.5").unwrap(), 0.5);
        assert_eq!(ctx.parse("2").unwrap(), 2);
        let third = ctx.parse("1/3").unwrap();
        assert!((third * 3u32 - 1u32).abs() < ctx.tolerance(39));
        assert!(ctx.parse("abc").is_err());
        assert!(ctx.parse("1/0").is_err());
    }

    #[test]
    fn format_trims_zeros() {
        let ctx = NumericContext::new(40).unwrap();
        assert_eq!(format_real(&ctx.ratio(1, 2), 20), "0.5");
        assert_eq!(format_real(&ctx.ratio(-1, 8), 20), "-0.125");
        assert_eq!(format_real(&ctx.real(1200), 20), "1200");
        assert_eq!(format_real(&ctx.ratio(2465, 20), 20), "123.25");
        assert_eq!(format_real(&ctx.ratio(1, 1_000_000), 20), "0.000001");
        assert_eq!(format_real(&ctx.ratio(1, 10_000_000), 20), "1e-7");
        assert_eq!(format_real(&ctx.ratio(-3, 100_000_000), 20), "-3e-8");
        assert_eq!(format_real(&ctx.ratio(1, 3), 5), "0.33333");
        assert_eq!(format_real(&ctx.real(123456), 3), "1.23e5");
        assert_eq!(format_real(&(ctx.real(10).pow(30u32) * 7u32), 40), "7000000000000000000000000000000");
        assert_eq!(format_real(&ctx.zero(), 20), "0");
        assert_eq!(format_real(&ctx.real(-3), 10), "-3");
    }
}
