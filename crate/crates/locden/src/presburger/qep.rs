//! Eventual quasi-exponential-polynomial functions of one integer variable:
//! per residue class j mod e, for n >= threshold, a finite sum of terms
//! `h * w^a * L^(b*w)` with `w = (n - j) / e`.

use super::PresburgerError;
use crate::lring::poly::{q_int, Q};
use crate::lring::LElement;
use num_traits::One;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LSeqTerm {
    pub h: LElement,
    pub a: u32,
    pub b: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QepFunction {
    pub period: i64,
    pub threshold: i64,
    /// classes[j] describes n ≡ j (mod period)
    pub classes: Vec<Vec<LSeqTerm>>,
}

fn merge_terms(terms: Vec<LSeqTerm>) -> Vec<LSeqTerm> {
    let mut map: std::collections::BTreeMap<(u32, i64), LElement> = Default::default();
    for t in terms {
        let entry = map.entry((t.a, t.b)).or_insert_with(LElement::zero);
        *entry = entry.add(&t.h);
    }
    map.into_iter()
        .filter(|(_, h)| !h.is_zero())
        .map(|((a, b), h)| LSeqTerm { h, a, b })
        .collect()
}

impl QepFunction {
    pub fn zero() -> Self {
        QepFunction {
            period: 1,
            threshold: 0,
            classes: vec![Vec::new()],
        }
    }

    pub fn constant(h: LElement) -> Self {
        QepFunction {
            period: 1,
            threshold: 0,
            classes: vec![vec![LSeqTerm { h, a: 0, b: 0 }]],
        }
    }

    pub fn normalize(mut self) -> Self {
        self.classes = self.classes.into_iter().map(merge_terms).collect();
        self.reduce_period()
    }

    /// Reduce the period to the smallest divisor with identical class data.
    fn reduce_period(mut self) -> Self {
        'outer: for e in 1..self.period {
            if self.period % e != 0 {
                continue;
            }
            // class j mod period must match class j mod e re-expanded
            for j in 0..self.period {
                let expanded = reindex_class(&self.classes[(j % e) as usize], e, (j - (j % e)) / e, self.period / e);
                let direct = self.classes[j as usize].clone();
                if merge_terms(expanded) != merge_terms(direct) {
                    continue 'outer;
                }
            }
            self.classes.truncate(e as usize);
            self.period = e;
            break;
        }
        self
    }

    /// Exact value at n (requires n >= threshold).
    pub fn value_at(&self, n: i64) -> LElement {
        assert!(
            n >= self.threshold,
            "QEP value requested below threshold ({} < {})",
            n,
            self.threshold
        );
        self.value_at_unchecked(n)
    }

    /// Evaluate the class formula without the threshold guard (the caller
    /// asserts validity by other means).
    pub fn value_at_unchecked(&self, n: i64) -> LElement {
        let j = n.rem_euclid(self.period);
        let w = (n - j) / self.period;
        let mut acc = LElement::zero();
        for t in &self.classes[j as usize] {
            let mut wpow = Q::one();
            for _ in 0..t.a {
                wpow *= q_int(w);
            }
            acc = acc.add(&t.h.scale(&wpow).mul(&LElement::l_pow(t.b * w)));
        }
        acc
    }

    pub fn add(&self, other: &QepFunction) -> QepFunction {
        let e = num_integer::lcm(self.period, other.period);
        let threshold = self.threshold.max(other.threshold);
        let mut classes = vec![Vec::new(); e as usize];
        for j in 0..e {
            let mut terms = Vec::new();
            for src in [self, other] {
                let j0 = j % src.period;
                terms.extend(reindex_class(
                    &src.classes[j0 as usize],
                    src.period,
                    (j - j0) / src.period,
                    e / src.period,
                ));
            }
            classes[j as usize] = terms;
        }
        QepFunction {
            period: e,
            threshold,
            classes,
        }
        .normalize()
    }

    pub fn scale(&self, c: &LElement) -> QepFunction {
        QepFunction {
            period: self.period,
            threshold: self.threshold,
            classes: self
                .classes
                .iter()
                .map(|cl| {
                    cl.iter()
                        .map(|t| LSeqTerm {
                            h: t.h.mul(c),
                            a: t.a,
                            b: t.b,
                        })
                        .collect()
                })
                .collect(),
        }
        .normalize()
    }

    pub fn scale_rational(&self, c: &Q) -> QepFunction {
        self.scale(&LElement::from_rational(c.clone()))
    }

    pub fn sub(&self, other: &QepFunction) -> QepFunction {
        self.add(&other.scale(&LElement::from_int(-1)))
    }

    /// g(n) = f(n + c)
    pub fn shift_arg(&self, c: i64) -> QepFunction {
        let e = self.period;
        let mut classes = vec![Vec::new(); e as usize];
        for j in 0..e {
            // g on class j uses f at n+c ≡ j+c (mod e)
            let jf = (j + c).rem_euclid(e);
            // n = j + e w (n >= threshold - c), f-argument n + c = jf + e wf,
            // wf = (j + c - jf)/e + w
            let off = (j + c - jf) / e;
            classes[j as usize] =
                shift_terms(&self.classes[jf as usize], off);
        }
        QepFunction {
            period: e,
            threshold: self.threshold - c,
            classes,
        }
        .normalize()
    }

    /// Multiply pointwise by L^(k*n).
    pub fn mul_l_linear(&self, k: i64) -> QepFunction {
        let e = self.period;
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(j, cl)| {
                cl.iter()
                    .map(|t| LSeqTerm {
                        h: t.h.mul(&LElement::l_pow(k * j as i64)),
                        a: t.a,
                        b: t.b + k * e,
                    })
                    .collect()
            })
            .collect();
        QepFunction {
            period: e,
            threshold: self.threshold,
            classes,
        }
        .normalize()
    }

    /// Bounded iff every term has b <= 0, and b = 0 implies a = 0.
    pub fn is_bounded(&self) -> bool {
        self.classes
            .iter()
            .flatten()
            .all(|t| t.b < 0 || (t.b == 0 && t.a == 0))
    }

    /// Mean value at infinity: the average over classes of the (0,0)-terms.
    pub fn mean_value(&self) -> Result<LElement, PresburgerError> {
        if !self.is_bounded() {
            return Err(PresburgerError::Unbounded);
        }
        let mut acc = LElement::zero();
        for limit in self.class_limits() {
            acc = acc.add(&limit);
        }
        Ok(acc.scale(&Q::new(1.into(), self.period.into())))
    }

    /// Per-class limits d_j (for bounded functions).
    pub fn class_limits(&self) -> Vec<LElement> {
        self.classes
            .iter()
            .map(|cl| {
                cl.iter()
                    .find(|t| t.a == 0 && t.b == 0)
                    .map(|t| t.h.clone())
                    .unwrap_or_else(LElement::zero)
            })
            .collect()
    }

    /// Equality of the eventual functions (ignores threshold differences).
    pub fn eventually_equal(&self, other: &QepFunction) -> bool {
        let a = self.clone().normalize();
        let b = other.clone().normalize();
        let e = num_integer::lcm(a.period, b.period);
        for j in 0..e {
            let ta = merge_terms(reindex_class(
                &a.classes[(j % a.period) as usize],
                a.period,
                (j - j % a.period) / a.period,
                e / a.period,
            ));
            let tb = merge_terms(reindex_class(
                &b.classes[(j % b.period) as usize],
                b.period,
                (j - j % b.period) / b.period,
                e / b.period,
            ));
            if ta != tb {
                return false;
            }
        }
        true
    }
}

/// Re-express terms on class j0 (mod e0) as terms on the subclass
/// j0 + e0*r (mod e0*k): with n = (j0 + e0 r) + (e0 k) w', the old index is
/// w = r + k w'.
fn reindex_class(terms: &[LSeqTerm], _e0: i64, r: i64, k: i64) -> Vec<LSeqTerm> {
    let mut out = Vec::new();
    for t in terms {
        // h (r + k w')^a L^{b(r + k w')}
        let lconst = LElement::l_pow(t.b * r);
        for i in 0..=t.a {
            let binom = binomial(t.a, i);
            // (r + kw')^a = sum_i C(a,i) r^(a-i) k^i w'^i
            let mut coeff = Q::from_integer(binom.into());
            for _ in 0..(t.a - i) {
                coeff *= q_int(r);
            }
            for _ in 0..i {
                coeff *= q_int(k);
            }
            if coeff == Q::from_integer(0.into()) {
                continue;
            }
            out.push(LSeqTerm {
                h: t.h.scale(&coeff).mul(&lconst),
                a: i,
                b: t.b * k,
            });
        }
    }
    out
}

/// terms(w + off)
fn shift_terms(terms: &[LSeqTerm], off: i64) -> Vec<LSeqTerm> {
    let mut out = Vec::new();
    for t in terms {
        let lconst = LElement::l_pow(t.b * off);
        for i in 0..=t.a {
            let mut coeff = Q::from_integer(binomial(t.a, i).into());
            for _ in 0..(t.a - i) {
                coeff *= q_int(off);
            }
            if coeff == Q::from_integer(0.into()) {
                continue;
            }
            out.push(LSeqTerm {
                h: t.h.scale(&coeff).mul(&lconst),
                a: i,
                b: t.b,
            });
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}
