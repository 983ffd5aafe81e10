//! Arithmetic in small finite fields F_q (q = p^f <= 121) via exp/log tables
//! over a generator of the multiplicative group.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power <= {1}")]
    BadOrder(u64, u64),
}

pub const MAX_FIELD: u64 = 121;

/// F_q with elements encoded 0 = zero, 1..q-1 = g^(i-1) for a generator g.
/// Only the multiplicative structure and subfield embedding of the prime
/// field are exposed; that is all binomial systems need.
#[derive(Debug, Clone)]
pub struct FiniteField {
    pub q: u64,
    pub p: u64,
    pub f: u32,
    /// additive table in the power encoding: add[i][j]
    add: Vec<Vec<u32>>,
    /// image of the prime field 0..p-1 in the power encoding
    prime_embed: Vec<u32>,
}

fn factor_prime_power(q: u64) -> Option<(u64, u32)> {
    for p in 2..=q {
        if q % p == 0 {
            let mut n = q;
            let mut f = 0;
            while n % p == 0 {
                n /= p;
                f += 1;
            }
            return if n == 1 { Some((p, f)) } else { None };
        }
    }
    None
}

impl FiniteField {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q < 2 || q > MAX_FIELD {
            return Err(FieldError::BadOrder(q, MAX_FIELD));
        }
        let Some((p, f)) = factor_prime_power(q) else {
            return Err(FieldError::BadOrder(q, MAX_FIELD));
        };
        // Represent elements as polynomials over F_p modulo an irreducible
        // of degree f, found by scanning. Then build exp/log tables.
        let irred = find_irreducible(p, f);
        let qm = q as usize;
        let poly_mul = |a: u64, b: u64| -> u64 { polymod_mul(a, b, p, f, &irred) };
        // find a generator
        let mut gen = 0u64;
        'cand: for c in 1..q {
            let mut seen = vec![false; qm];
            let mut x = 1u64;
            let mut count = 0;
            loop {
                if seen[x as usize] {
                    break;
                }
                seen[x as usize] = true;
                count += 1;
                x = poly_mul(x, c);
            }
            if count == q - 1 {
                gen = c;
                break 'cand;
            }
        }
        assert!(gen != 0, "no generator found");
        // exp table: exp[i] = gen^i in polynomial encoding
        let mut exp = vec![0u64; qm - 1];
        exp[0] = 1;
        for i in 1..qm - 1 {
            exp[i] = poly_mul(exp[i - 1], gen);
        }
        let mut log = vec![u32::MAX; qm];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        // addition table in power encoding: code 0 => zero, code i>0 => gen^(i-1)
        let decode = |code: u32| -> u64 {
            if code == 0 {
                0
            } else {
                exp[(code - 1) as usize]
            }
        };
        let encode = |v: u64| -> u32 {
            if v == 0 {
                0
            } else {
                log[v as usize] + 1
            }
        };
        let mut add = vec![vec![0u32; qm]; qm];
        #[allow(clippy::needless_range_loop)]
        for i in 0..qm {
            for j in 0..qm {
                let s = poly_add(decode(i as u32), decode(j as u32), p, f);
                add[i][j] = encode(s);
            }
        }
        let prime_embed = (0..p)
            .map(|k| {
                // k * 1 in the field: sum of k ones
                let mut acc = 0u32;
                for _ in 0..k {
                    acc = add[acc as usize][encode(1) as usize];
                }
                acc
            })
            .collect();
        Ok(FiniteField {
            q,
            p,
            f,
            add,
            prime_embed,
        })
    }

    pub fn zero(&self) -> u32 {
        0
    }

    pub fn one(&self) -> u32 {
        1
    }

    pub fn is_zero(&self, a: u32) -> bool {
        a == 0
    }

    /// Discrete log of a nonzero element (power of the generator).
    pub fn dlog(&self, a: u32) -> u64 {
        assert!(a != 0);
        (a - 1) as u64
    }

    /// Element g^k.
    pub fn from_dlog(&self, k: i64) -> u32 {
        let m = (self.q - 1) as i64;
        (k.rem_euclid(m) as u32) + 1
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.from_dlog(self.dlog(a) as i64 + self.dlog(b) as i64)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize][b as usize]
    }

    pub fn neg(&self, a: u32) -> u32 {
        // -1 = g^((q-1)/2) for odd q; find it via prime field embed
        let minus_one = self.int(self.p - 1);
        self.mul(minus_one, a)
    }

    pub fn pow(&self, a: u32, e: i64) -> u32 {
        if a == 0 {
            assert!(e > 0, "0^nonpositive");
            return 0;
        }
        self.from_dlog(self.dlog(a) as i64 * e)
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0);
        self.from_dlog(-(self.dlog(a) as i64))
    }

    /// Embed an integer (mod p).
    pub fn int(&self, k: u64) -> u32 {
        self.prime_embed[(k % self.p) as usize]
    }

    /// All elements (codes), zero first.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..(self.q as u32)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = u32> {
        1..(self.q as u32)
    }

    /// Number of g-th roots of unity: gcd(g, q-1).
    pub fn roots_of_unity(&self, g: u64) -> u64 {
        num_integer::gcd(g, self.q - 1)
    }
}

/// polynomial encoding: digits base p, degree < f
fn poly_add(a: u64, b: u64, p: u64, f: u32) -> u64 {
    let mut out = 0u64;
    let mut mul = 1u64;
    let (mut a, mut b) = (a, b);
    for _ in 0..f {
        let da = a % p;
        let db = b % p;
        out += ((da + db) % p) * mul;
        a /= p;
        b /= p;
        mul *= p;
    }
    out
}

fn polymod_mul(a: u64, b: u64, p: u64, f: u32, irred: &[u64]) -> u64 {
    // schoolbook multiply then reduce by irred (monic of degree f)
    let fa = digits(a, p, f);
    let fb = digits(b, p, f);
    let mut prod = vec![0u64; (2 * f - 1) as usize];
    for (i, &x) in fa.iter().enumerate() {
        for (j, &y) in fb.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // reduce: x^f = -(irred[0..f]) (irred has f+1 entries, monic)
    for i in (f as usize..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..f as usize {
            let sub = (c * irred[j]) % p;
            prod[i - f as usize + j] = (prod[i - f as usize + j] + p - sub) % p;
        }
    }
    let mut out = 0u64;
    let mut mul = 1u64;
    for i in 0..f as usize {
        out += prod[i] * mul;
        mul *= p;
    }
    out
}

fn digits(a: u64, p: u64, f: u32) -> Vec<u64> {
    let mut a = a;
    (0..f)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

/// Monic irreducible of degree f over F_p (coefficients low -> high, len f+1),
/// found by scanning candidates and excluding monic divisors of degree up to
/// f/2 by trial division.
fn find_irreducible(p: u64, f: u32) -> Vec<u64> {
    if f == 1 {
        return vec![0, 1]; // x
    }
    let total = p.pow(f);
    'cand: for c in 0..total {
        let mut coeffs = digits(c, p, f);
        coeffs.push(1);
        for deg in 1..=(f / 2) {
            for d in 0..p.pow(deg) {
                let mut divisor = digits(d, p, deg);
                divisor.push(1);
                if poly_divides_mod_p(&divisor, &coeffs, p) {
                    continue 'cand;
                }
            }
        }
        return coeffs;
    }
    unreachable!("irreducible polynomial exists");
}

/// Does the monic polynomial `d` divide `a` over F_p?
fn poly_divides_mod_p(d: &[u64], a: &[u64], p: u64) -> bool {
    let mut rem: Vec<u64> = a.to_vec();
    let dd = d.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p;
        let k = rem.len() - 1 - dd;
        if lead != 0 {
            for i in 0..=dd {
                let sub = (lead * d[i]) % p;
                rem[k + i] = (rem[k + i] + p * p - sub) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}
