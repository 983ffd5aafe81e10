//! Dense univariate polynomials over Q, plus the cyclotomic table and the
//! Sturm-sequence machinery used by the positivity test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Coefficients low -> high, trailing zeros stripped. The zero polynomial is
/// the empty vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly(pub Vec<Q>);

impl QPoly {
    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly(vec![Q::one()])
    }

    pub fn constant(c: Q) -> Self {
        let mut p = QPoly(vec![c]);
        p.trim();
        p
    }

    /// x^k
    pub fn monomial(k: usize) -> Self {
        let mut v = vec![Q::zero(); k + 1];
        v[k] = Q::one();
        QPoly(v)
    }

    pub fn from_coeffs(v: Vec<Q>) -> Self {
        let mut p = QPoly(v);
        p.trim();
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.0.first().cloned().unwrap_or_else(Q::zero)
    }

    fn trim(&mut self) {
        while matches!(self.0.last(), Some(c) if c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![Q::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            v[i] += c;
        }
        QPoly::from_coeffs(v)
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![Q::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            v[i] -= c;
        }
        QPoly::from_coeffs(v)
    }

    pub fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![Q::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(v)
    }

    pub fn scale(&self, c: &Q) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly(self.0.iter().map(|a| a * c).collect())
    }

    /// x^k * self
    pub fn shift_up(&self, k: usize) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![Q::zero(); k];
        v.extend(self.0.iter().cloned());
        QPoly(v)
    }

    /// Euclidean division, (quotient, remainder).
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead_inv = Q::one() / divisor.leading();
        let mut rem = self.clone();
        let mut quot = vec![Q::zero(); self.0.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.leading() * &lead_inv;
            let k = rd - dd;
            quot[k] = c.clone();
            let sub = divisor.scale(&c).shift_up(k);
            rem = rem.sub(&sub);
        }
        (QPoly::from_coeffs(quot), rem)
    }

    /// Exact division; None if the remainder is nonzero.
    pub fn div_exact(&self, divisor: &QPoly) -> Option<QPoly> {
        let (q, r) = self.div_rem(divisor);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let inv = Q::one() / a.leading();
            a.scale(&inv)
        }
    }

    pub fn derivative(&self) -> QPoly {
        if self.0.len() <= 1 {
            return QPoly::zero();
        }
        let v = self
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * q_int(i as i64))
            .collect();
        QPoly::from_coeffs(v)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Substitute x -> x + 1.
    pub fn compose_x_plus_one(&self) -> QPoly {
        let mut acc = QPoly::zero();
        let xp1 = QPoly::from_coeffs(vec![Q::one(), Q::one()]);
        for c in self.0.iter().rev() {
            acc = acc.mul(&xp1).add(&QPoly::constant(c.clone()));
        }
        acc
    }
}

/// Cyclotomic polynomial Phi_m, by the classical recursive division
/// x^m - 1 = prod_{d | m} Phi_d.
pub fn cyclotomic(m: u32) -> QPoly {
    assert!(m >= 1);
    let mut num = QPoly::monomial(m as usize).sub(&QPoly::one());
    for d in 1..m {
        if m % d == 0 {
            let phi_d = cyclotomic(d);
            num = num.div_exact(&phi_d).expect("cyclotomic division is exact");
        }
    }
    num
}

/// x^n - 1 as a cyclotomic factor multiset {m: 1 for m | n}.
pub fn pow_minus_one_factors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn sign(q: &Q) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

fn sign_changes(signs: &[i32]) -> usize {
    let mut count = 0;
    let mut last = 0;
    for &s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots of `p` in the open interval (0, +inf),
/// via a Sturm sequence. `p` must not vanish at 0 (divide out x^k first).
pub fn sturm_roots_in_positive_axis(p: &QPoly) -> usize {
    assert!(!p.constant_term().is_zero(), "p(0) must be nonzero");
    let squarefree = {
        let g = p.gcd(&p.derivative());
        if g.degree() == Some(0) {
            p.clone()
        } else {
            p.div_exact(&g).expect("gcd divides")
        }
    };
    let mut chain = vec![squarefree.clone(), squarefree.derivative()];
    while !chain.last().unwrap().is_zero() {
        let n = chain.len();
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        chain.push(r.neg());
    }
    chain.pop();
    let at_zero: Vec<i32> = chain.iter().map(|f| sign(&f.constant_term())).collect();
    let at_inf: Vec<i32> = chain.iter().map(|f| sign(&f.leading())).collect();
    sign_changes(&at_zero) - sign_changes(&at_inf)
}

/// True iff p(t) >= 0 for every real t > 0, decided exactly.
///
/// Sign changes can only happen at roots of odd multiplicity, so it is
/// enough that the odd-multiplicity part has no positive root and that one
/// sample value is nonnegative.
pub fn nonneg_on_positive_axis(p: &QPoly) -> bool {
    if p.is_zero() {
        return true;
    }
    // Factor out t^k (a positive factor on t > 0).
    let k = p.0.iter().take_while(|c| c.is_zero()).count();
    let reduced = QPoly::from_coeffs(p.0[k..].to_vec());
    // sign shortcuts: all coefficients nonnegative means positive values on
    // t > 0; a negative leading coefficient forces negativity at infinity
    if reduced.0.iter().all(|c| !c.is_negative()) {
        return true;
    }
    if reduced.leading().is_negative() {
        return false;
    }
    // Odd-multiplicity part: p / gcd(p, p') keeps each root once; iterate to
    // extract parity. Simpler: square-free part f; p changes sign at a root r
    // of f iff r has odd multiplicity in p. Compute multiplicity parity via
    // repeated division.
    let g = reduced.gcd(&reduced.derivative());
    let squarefree = if g.degree() == Some(0) {
        reduced.clone()
    } else {
        reduced.div_exact(&g).expect("gcd divides")
    };
    if squarefree.constant_term().is_zero() {
        // 0 is a root of the square-free part; t^k extraction already
        // removed it from `reduced`, so this cannot happen.
        unreachable!("zero root after trailing-power extraction");
    }
    let odd_part = odd_multiplicity_part(&reduced, &squarefree);
    if !odd_part.constant_term().is_zero() && sturm_roots_in_positive_axis(&odd_part) > 0 {
        return false;
    }
    // No sign change on (0, inf): sample the sign as t -> inf.
    reduced.leading().is_positive()
}

/// Product of the irreducible factors of `p` occurring with odd multiplicity.
/// `squarefree` is the square-free part of `p`.
fn odd_multiplicity_part(p: &QPoly, squarefree: &QPoly) -> QPoly {
    // Yun-style: repeatedly strip one copy of each remaining factor and track
    // parity by how many times each square-free layer divides.
    let mut current = p.clone();
    let mut layer = squarefree.clone();
    let mut odd = QPoly::one();
    let mut parity_flip = true;
    while let Some(d) = layer.degree() {
        if d == 0 {
            break;
        }
        // factors dividing `current` exactly once more than the next layer
        let next_current = current.div_exact(&layer).expect("layer divides");
        let next_layer = next_current.gcd(&layer);
        let finished = layer.div_exact(&next_layer).expect("gcd divides");
        if parity_flip {
            odd = odd.mul(&finished);
        }
        // Factors in `finished` had multiplicity = current layer index.
        current = next_current;
        layer = next_layer;
        parity_flip = !parity_flip;
    }
    odd
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> QPoly {
        QPoly::from_coeffs(coeffs.iter().map(|&c| q_int(c)).collect())
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), p(&[-1, 1]));
        assert_eq!(cyclotomic(2), p(&[1, 1]));
        assert_eq!(cyclotomic(3), p(&[1, 1, 1]));
        assert_eq!(cyclotomic(4), p(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), p(&[1, -1, 1]));
        assert_eq!(cyclotomic(12), p(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn divrem_roundtrip() {
        let a = p(&[1, 2, 0, 1, 5]);
        let b = p(&[3, 1, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn sturm_counts() {
        // (x-2)(x-3) has two roots > 0
        assert_eq!(sturm_roots_in_positive_axis(&p(&[6, -5, 1])), 2);
        // x^2 + 1 has none
        assert_eq!(sturm_roots_in_positive_axis(&p(&[1, 0, 1])), 0);
        // x^2 - 3x + 1: roots 0.38.., 2.61..
        assert_eq!(sturm_roots_in_positive_axis(&p(&[1, -3, 1])), 2);
    }

    #[test]
    fn nonneg_detects_square() {
        // (x-1)^2 >= 0 everywhere
        assert!(nonneg_on_positive_axis(&p(&[1, -2, 1])));
        // x - 1 changes sign at 1 > 0
        assert!(!nonneg_on_positive_axis(&p(&[-1, 1])));
        // x(x-1)^2 on t>0: nonnegative
        assert!(nonneg_on_positive_axis(&p(&[0, 1, -2, 1])));
        // -(x-1)^2
        assert!(!nonneg_on_positive_axis(&p(&[-1, 2, -1])));
    }
}
