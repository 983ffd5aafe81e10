//! Exact arithmetic in the localized ring `A = Z[L, L^-1, 1/(1-L^-n)]` and
//! its rationalization `Q ⊗ A`.
//!
//! An element is stored as `L^shift * num(L) / prod_m Phi_m(L)^{k_m}` where
//! `Phi_m` is the m-th cyclotomic polynomial. Denominator factors only ever
//! come from expanding products of `(L^n - 1) = prod_{m|n} Phi_m(L)`, so the
//! factored form gives a unique canonical representative: `num` has nonzero
//! constant term (trailing powers of L are absorbed into `shift`) and is
//! coprime to every `Phi_m` in the denominator.

pub mod poly;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use poly::{cyclotomic, pow_minus_one_factors, q_int, QPoly, Q};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LringError {
    #[error("evaluation point must satisfy q > 1, got {0}")]
    QOutOfRange(String),
    #[error("division does not stay inside the ring: divisor numerator {0} is not monomial-times-cyclotomic")]
    InexactDivision(String),
    #[error("malformed rational literal {0:?}")]
    BadRational(String),
}

/// Cache of cyclotomic polynomials; Phi_m for the m that actually occur.
fn phi(m: u32) -> QPoly {
    static CACHE: Mutex<Option<BTreeMap<u32, QPoly>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let cache = guard.get_or_insert_with(BTreeMap::new);
    cache.entry(m).or_insert_with(|| cyclotomic(m)).clone()
}

fn euler_phi(m: u32) -> u32 {
    let mut result = m;
    let mut n = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Canonical element of `Q ⊗ A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LElement {
    shift: i64,
    num: QPoly,
    /// m -> multiplicity of Phi_m in the denominator
    cyclo: BTreeMap<u32, u32>,
}

impl LElement {
    pub fn zero() -> Self {
        LElement {
            shift: 0,
            num: QPoly::zero(),
            cyclo: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        LElement {
            shift: 0,
            num: QPoly::one(),
            cyclo: BTreeMap::new(),
        }
    }

    /// The class of the affine line.
    pub fn l() -> Self {
        Self::l_pow(1)
    }

    /// L^k for any integer k.
    pub fn l_pow(k: i64) -> Self {
        LElement {
            shift: k,
            num: QPoly::one(),
            cyclo: BTreeMap::new(),
        }
    }

    pub fn from_rational(c: Q) -> Self {
        LElement {
            shift: 0,
            num: QPoly::constant(c),
            cyclo: BTreeMap::new(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(q_int(n))
    }

    /// 1 - L^-n (n >= 1), the reciprocal of a ring generator.
    pub fn one_minus_l_negpow(n: u32) -> Self {
        assert!(n >= 1);
        LElement::one().sub(&LElement::l_pow(-(n as i64)))
    }

    /// 1 / (1 - L^-n) = L^n / (L^n - 1).
    pub fn inv_one_minus_l_negpow(n: u32) -> Self {
        assert!(n >= 1);
        let mut cyclo = BTreeMap::new();
        for m in pow_minus_one_factors(n) {
            *cyclo.entry(m).or_insert(0) += 1;
        }
        LElement {
            shift: n as i64,
            num: QPoly::one(),
            cyclo,
        }
        .canonicalized()
    }

    fn canonicalized(mut self) -> Self {
        if self.num.is_zero() {
            return LElement::zero();
        }
        // Absorb trailing powers of L into the shift.
        let trailing = self.num.0.iter().take_while(|c| c.is_zero()).count();
        if trailing > 0 {
            self.num = QPoly::from_coeffs(self.num.0[trailing..].to_vec());
            self.shift += trailing as i64;
        }
        // Cancel cyclotomic factors dividing the numerator.
        let indices: Vec<u32> = self.cyclo.keys().copied().collect();
        for m in indices {
            let p = phi(m);
            let mult = self.cyclo[&m];
            let mut remaining = mult;
            while remaining > 0 {
                match self.num.div_exact(&p) {
                    Some(q) => {
                        self.num = q;
                        remaining -= 1;
                    }
                    None => break,
                }
            }
            if remaining == 0 {
                self.cyclo.remove(&m);
            } else if remaining != mult {
                self.cyclo.insert(m, remaining);
            }
        }
        // Phi_m(0) = +-1 for m >= 2 but Phi_1(0) = -1; cancellation cannot
        // introduce trailing zeros because num(0) != 0 is preserved by exact
        // division by polynomials with nonzero constant term.
        debug_assert!(!self.num.constant_term().is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.cyclo.is_empty() && self.num == QPoly::one()
    }

    pub fn add(&self, other: &LElement) -> LElement {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let shift = self.shift.min(other.shift);
        // common denominator: max multiplicity per cyclotomic index
        let mut denom: BTreeMap<u32, u32> = self.cyclo.clone();
        for (&m, &k) in other.cyclo.iter() {
            let e = denom.entry(m).or_insert(0);
            *e = (*e).max(k);
        }
        let complement = |from: &BTreeMap<u32, u32>| -> QPoly {
            let mut p = QPoly::one();
            for (&m, &k) in denom.iter() {
                let have = from.get(&m).copied().unwrap_or(0);
                for _ in have..k {
                    p = p.mul(&phi(m));
                }
            }
            p
        };
        let a = self
            .num
            .mul(&complement(&self.cyclo))
            .shift_up((self.shift - shift) as usize);
        let b = other
            .num
            .mul(&complement(&other.cyclo))
            .shift_up((other.shift - shift) as usize);
        LElement {
            shift,
            num: a.add(&b),
            cyclo: denom,
        }
        .canonicalized()
    }

    pub fn neg(&self) -> LElement {
        LElement {
            shift: self.shift,
            num: self.num.neg(),
            cyclo: self.cyclo.clone(),
        }
    }

    pub fn sub(&self, other: &LElement) -> LElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LElement) -> LElement {
        if self.is_zero() || other.is_zero() {
            return LElement::zero();
        }
        let mut cyclo = self.cyclo.clone();
        for (&m, &k) in other.cyclo.iter() {
            *cyclo.entry(m).or_insert(0) += k;
        }
        LElement {
            shift: self.shift + other.shift,
            num: self.num.mul(&other.num),
            cyclo,
        }
        .canonicalized()
    }

    pub fn scale(&self, c: &Q) -> LElement {
        LElement {
            shift: self.shift,
            num: self.num.scale(c),
            cyclo: self.cyclo.clone(),
        }
        .canonicalized()
    }

    pub fn pow(&self, k: u32) -> LElement {
        let mut acc = LElement::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division. Fails unless the divisor's numerator is a rational
    /// constant times a product of cyclotomics (so the quotient stays in the
    /// ring). Every divisor arising from sphere normalizations has this form.
    pub fn div(&self, other: &LElement) -> Result<LElement, LringError> {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Ok(LElement::zero());
        }
        // Factor the divisor numerator into cyclotomics.
        let mut rest = other.num.clone();
        let mut num_factors: BTreeMap<u32, u32> = BTreeMap::new();
        let deg = rest.degree().unwrap_or(0) as u32;
        let mut m = 1u32;
        // phi(m) <= deg(rest) is necessary for Phi_m to divide; m <= 2*deg^2+2
        // bounds the scan (phi(m) >= sqrt(m/2)).
        let m_limit = 2 * deg * deg + 2;
        while m <= m_limit {
            if euler_phi(m) <= deg {
                let p = phi(m);
                while let Some(q) = rest.div_exact(&p) {
                    rest = q;
                    *num_factors.entry(m).or_insert(0) += 1;
                    if rest.degree() == Some(0) {
                        break;
                    }
                }
            }
            if rest.degree() == Some(0) {
                break;
            }
            m += 1;
        }
        if rest.degree() != Some(0) {
            return Err(LringError::InexactDivision(format!("{:?}", other.num)));
        }
        let unit = rest.constant_term();
        let mut cyclo = self.cyclo.clone();
        for (&m, &k) in num_factors.iter() {
            *cyclo.entry(m).or_insert(0) += k;
        }
        let mut num = self.num.scale(&(Q::one() / unit));
        for (&m, &k) in other.cyclo.iter() {
            for _ in 0..k {
                num = num.mul(&phi(m));
            }
        }
        Ok(LElement {
            shift: self.shift - other.shift,
            num,
            cyclo,
        }
        .canonicalized())
    }

    /// Degree in L; None encodes -infinity (the degree of 0).
    pub fn deg_l(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let den: i64 = self
            .cyclo
            .iter()
            .map(|(&m, &k)| euler_phi(m) as i64 * k as i64)
            .sum();
        Some(self.num.degree().unwrap() as i64 + self.shift - den)
    }

    /// The ring morphism generated by L -> q, defined for q > 1.
    pub fn theta_q(&self, q: &Q) -> Result<Q, LringError> {
        if *q <= Q::one() {
            return Err(LringError::QOutOfRange(q.to_string()));
        }
        if self.is_zero() {
            return Ok(Q::zero());
        }
        let mut value = self.num.eval(q);
        for (&m, &k) in self.cyclo.iter() {
            let d = phi(m).eval(q);
            for _ in 0..k {
                value = value / d.clone();
            }
        }
        let qp = pow_q(q, self.shift);
        Ok(value * qp)
    }

    /// Membership in the positive cone: theta_q(x) >= 0 for every real q > 1.
    ///
    /// Cyclotomic polynomials are strictly positive on (1, inf), so after
    /// clearing the denominator and the L^shift prefactor this reduces to
    /// nonnegativity of the numerator on (1, inf), decided by exact root
    /// isolation after the substitution q = 1 + t.
    pub fn is_nonneg(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let shifted = self.num.compose_x_plus_one();
        poly::nonneg_on_positive_axis(&shifted)
    }

    /// Partial order on A: x <= y iff y - x is in the positive cone.
    ///
    /// The source text states the defining difference in the opposite
    /// orientation; this implementation uses the standard one.
    pub fn le(&self, other: &LElement) -> bool {
        other.sub(self).is_nonneg()
    }

    /// True iff the element lies in A itself (no rational denominators):
    /// integer coefficients once written over the (L^n - 1)-denominator.
    pub fn is_integral(&self) -> bool {
        // Clear the denominator completely and check integer coefficients of
        // num * prod Phi_m^{k_m}'s complement... integrality in A is subtler;
        // we use the practical criterion: all numerator coefficients integral.
        self.num.0.iter().all(|c| c.denom().is_one())
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn numerator(&self) -> &QPoly {
        &self.num
    }

    pub fn cyclo_factors(&self) -> &BTreeMap<u32, u32> {
        &self.cyclo
    }
}

fn pow_q(q: &Q, k: i64) -> Q {
    let mut acc = Q::one();
    let (base, reps) = if k >= 0 {
        (q.clone(), k)
    } else {
        (Q::one() / q, -k)
    };
    for _ in 0..reps {
        acc = acc * &base;
    }
    acc
}

impl fmt::Display for LElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<String> = Vec::new();
        for (i, c) in self.num.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.shift + i as i64;
            let lpart = match e {
                0 => String::new(),
                1 => "L".to_string(),
                _ => format!("L^{}", e),
            };
            let term = if lpart.is_empty() {
                rational_to_string(c)
            } else if c.is_one() {
                lpart
            } else if *c == -Q::one() {
                format!("-{}", lpart)
            } else {
                format!("{} {}", rational_to_string(c), lpart)
            };
            terms.push(term);
        }
        let num_s = terms.join(" + ").replace("+ -", "- ");
        if self.cyclo.is_empty() {
            write!(f, "{}", num_s)
        } else {
            let den: Vec<String> = self
                .cyclo
                .iter()
                .map(|(&m, &k)| {
                    if k == 1 {
                        format!("Phi_{}", m)
                    } else {
                        format!("Phi_{}^{}", m, k)
                    }
                })
                .collect();
            write!(f, "({}) / ({})", num_s, den.join(" "))
        }
    }
}

fn rational_to_string(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn rational_from_string(s: &str) -> Result<Q, LringError> {
    let parse_int =
        |t: &str| BigInt::from_str(t.trim()).map_err(|_| LringError::BadRational(s.to_string()));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(LringError::BadRational(s.to_string()));
            }
            Ok(Q::new(parse_int(n)?, d))
        }
        None => Ok(Q::from_integer(parse_int(s)?)),
    }
}

#[derive(Serialize, Deserialize)]
struct LElementRepr {
    shift: i64,
    num: Vec<String>,
    cyclo: BTreeMap<String, u32>,
}

impl Serialize for LElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LElementRepr {
            shift: self.shift,
            num: self.num.0.iter().map(rational_to_string).collect(),
            cyclo: self
                .cyclo
                .iter()
                .map(|(m, k)| (m.to_string(), *k))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = LElementRepr::deserialize(deserializer)?;
        let mut coeffs = Vec::with_capacity(repr.num.len());
        for s in &repr.num {
            coeffs.push(rational_from_string(s).map_err(D::Error::custom)?);
        }
        let mut cyclo = BTreeMap::new();
        for (m, k) in repr.cyclo {
            let m: u32 = m.parse().map_err(D::Error::custom)?;
            if m < 1 {
                return Err(D::Error::custom("cyclotomic index must be >= 1"));
            }
            cyclo.insert(m, k);
        }
        Ok(LElement {
            shift: repr.shift,
            num: QPoly::from_coeffs(coeffs),
            cyclo,
        }
        .canonicalized())
    }
}

/// Exact rational q = p^f used for specialization; must exceed 1.
pub fn rational_q(q: u64) -> Q {
    Q::from_integer(BigInt::from(q))
}

/// Convenience: theta_q at an integer point, as f64 (test diagnostics only).
pub fn theta_q_f64(x: &LElement, q: u64) -> f64 {
    x.theta_q(&rational_q(q))
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn inverse_pair() {
        let x = LElement::l().mul(&LElement::l_pow(-1));
        assert!(x.is_one());
    }

    #[test]
    fn geometric_telescoping() {
        // 1/(1-L^-1) + (-L^-1)/(1-L^-1) = 1
        let g = LElement::inv_one_minus_l_negpow(1);
        let h = LElement::l_pow(-1).neg().mul(&g);
        assert!(g.add(&h).is_one());
    }

    #[test]
    fn cyclotomic_cancellation() {
        // 1/(1-L^-2) * (1-L^-1) = L/(L+1)
        let x = LElement::inv_one_minus_l_negpow(2).mul(&LElement::one_minus_l_negpow(1));
        let expected = LElement {
            shift: 1,
            num: QPoly::one(),
            cyclo: [(2u32, 1u32)].into_iter().collect(),
        };
        assert_eq!(x, expected);
        for qq in [2i64, 3, 5] {
            let qv = q(qq, 1);
            let lhs = x.theta_q(&qv).unwrap();
            let rhs = q(qq, 1) / q(qq + 1, 1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn degrees() {
        let x = LElement::l().mul(&LElement::l().add(&LElement::one())); // L^2 + L
        assert_eq!(x.deg_l(), Some(2));
        for n in 1..=6u32 {
            assert_eq!(LElement::inv_one_minus_l_negpow(n).deg_l(), Some(0));
        }
        // L^-3 (L-1)/(L^2-1) = L^-3 / (L+1), degree -4
        let num = LElement::l().sub(&LElement::one());
        let den = LElement::l_pow(2).sub(&LElement::one());
        let x = LElement::l_pow(-3).mul(&num).div(&den).unwrap();
        assert_eq!(x.deg_l(), Some(-4));
        assert_eq!(LElement::zero().deg_l(), None);
    }

    #[test]
    fn deg_multiplicative() {
        let a = LElement::inv_one_minus_l_negpow(3).mul(&LElement::l_pow(2));
        let b = LElement::l_pow(-5).sub(&LElement::one());
        assert_eq!(
            a.mul(&b).deg_l().unwrap(),
            a.deg_l().unwrap() + b.deg_l().unwrap()
        );
    }

    #[test]
    fn theta_basics() {
        assert_eq!(LElement::l().theta_q(&q(2, 1)).unwrap(), q(2, 1));
        assert_eq!(
            LElement::inv_one_minus_l_negpow(1)
                .theta_q(&q(3, 1))
                .unwrap(),
            q(3, 2)
        );
        // (1-L^-1) L^-5 at q=5 -> (4/5) * 5^-5
        let x = LElement::one_minus_l_negpow(1).mul(&LElement::l_pow(-5));
        assert_eq!(x.theta_q(&q(5, 1)).unwrap(), q(4, 5) * q(1, 3125));
        assert!(LElement::one().theta_q(&q(1, 1)).is_err());
    }

    #[test]
    fn positivity() {
        assert!(LElement::l().sub(&LElement::one()).is_nonneg());
        assert!(!LElement::one().sub(&LElement::l()).is_nonneg());
        // L^2 - 3L + 1 has a root ~2.618 inside (1, inf)
        let x = LElement::l_pow(2)
            .sub(&LElement::l().scale(&q(3, 1)))
            .add(&LElement::one());
        assert!(!x.is_nonneg());
        // 1/(1-L^-2) is positive
        assert!(LElement::inv_one_minus_l_negpow(2).is_nonneg());
        assert!(LElement::zero().is_nonneg());
    }

    #[test]
    fn order_orientation() {
        assert!(LElement::one().le(&LElement::l()));
        assert!(!LElement::l().le(&LElement::one()));
    }

    #[test]
    fn json_roundtrip() {
        let x = LElement::inv_one_minus_l_negpow(6)
            .mul(&LElement::l_pow(-7))
            .scale(&q(3, 2))
            .sub(&LElement::one());
        let s = serde_json::to_string(&x).unwrap();
        let y: LElement = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn division_roundtrip() {
        let a = LElement::one_minus_l_negpow(3).mul(&LElement::l_pow(4));
        let b = LElement::inv_one_minus_l_negpow(2);
        let c = a.mul(&b);
        assert_eq!(c.div(&b).unwrap(), a);
        assert_eq!(c.div(&a).unwrap(), b);
    }
}
