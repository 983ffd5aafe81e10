//! Quantifier-free Presburger sets in Z^s, cell normalization, and exact
//! summation of exponential-polynomial integrands over them.
//!
//! A set is a disjunction of conjunctions of linear inequalities
//! `sum a_i z_i + c >= 0` and congruences `sum a_i z_i ≡ r (mod m)`.
//! Normalization produces disjoint variable-ordered cells: per variable an
//! optional integer-affine lower/upper bound in the earlier variables and a
//! single congruence with constant residue.

mod cells;
mod qep;
mod sum;

pub use cells::{normalize, Cell, VarBound};
pub use qep::{LSeqTerm, QepFunction};
pub use sum::{sum_over, sum_over_closed, Integrand, Monomial};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresburgerError {
    #[error("summand diverges: variable {var} is summed toward an infinite bound with nonnegative L-exponent")]
    NonSummable { var: usize },
    #[error("function is unbounded; mean value at infinity undefined")]
    Unbounded,
    #[error("empty variable range in cell")]
    EmptyCell,
}

/// Affine integer form `coeffs . z + constant` over a fixed variable list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl Affine {
    pub fn constant(s: usize, c: i64) -> Self {
        Affine {
            coeffs: vec![0; s],
            constant: c,
        }
    }

    pub fn var(s: usize, i: usize) -> Self {
        let mut coeffs = vec![0; s];
        coeffs[i] = 1;
        Affine { coeffs, constant: 0 }
    }

    pub fn eval(&self, z: &[i64]) -> i64 {
        self.coeffs
            .iter()
            .zip(z)
            .map(|(&a, &x)| a * x)
            .sum::<i64>()
            + self.constant
    }

    /// Evaluate on a prefix of the variables; coefficients past the prefix
    /// must be zero.
    pub fn eval_prefix(&self, z: &[i64]) -> i64 {
        debug_assert!(self.coeffs[z.len()..].iter().all(|&a| a == 0));
        self.coeffs[..z.len()]
            .iter()
            .zip(z)
            .map(|(&a, &x)| a * x)
            .sum::<i64>()
            + self.constant
    }

    pub fn add(&self, other: &Affine) -> Affine {
        Affine {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: self.constant + other.constant,
        }
    }

    pub fn sub(&self, other: &Affine) -> Affine {
        Affine {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            constant: self.constant - other.constant,
        }
    }

    pub fn scale(&self, c: i64) -> Affine {
        Affine {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            constant: self.constant * c,
        }
    }

    pub fn plus_const(&self, c: i64) -> Affine {
        Affine {
            coeffs: self.coeffs.clone(),
            constant: self.constant + c,
        }
    }

    pub fn neg(&self) -> Affine {
        self.scale(-1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0)
    }

    /// Highest variable index with nonzero coefficient.
    pub fn top_var(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&a| a != 0)
    }
}

/// Atomic constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Atom {
    /// form >= 0
    Ge(Affine),
    /// form ≡ r (mod m), m >= 1
    Cong { form: Affine, rem: i64, modulus: i64 },
}

impl Atom {
    pub fn holds(&self, z: &[i64]) -> bool {
        match self {
            Atom::Ge(f) => f.eval(z) >= 0,
            Atom::Cong { form, rem, modulus } => (form.eval(z) - rem).rem_euclid(*modulus) == 0,
        }
    }

    fn negate(&self) -> Vec<Vec<Atom>> {
        match self {
            // !(f >= 0) <=> -f - 1 >= 0
            Atom::Ge(f) => vec![vec![Atom::Ge(f.neg().plus_const(-1))]],
            Atom::Cong { form, rem, modulus } => (0..*modulus)
                .filter(|r| (r - rem).rem_euclid(*modulus) != 0)
                .map(|r| {
                    vec![Atom::Cong {
                        form: form.clone(),
                        rem: r,
                        modulus: *modulus,
                    }]
                })
                .collect(),
        }
    }
}

/// Quantifier-free set: disjunction of conjunctions of atoms over s variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresburgerSet {
    pub dim: usize,
    pub disjuncts: Vec<Vec<Atom>>,
}

impl PresburgerSet {
    pub fn everything(dim: usize) -> Self {
        PresburgerSet {
            dim,
            disjuncts: vec![Vec::new()],
        }
    }

    pub fn empty(dim: usize) -> Self {
        PresburgerSet {
            dim,
            disjuncts: Vec::new(),
        }
    }

    pub fn from_conjunction(dim: usize, atoms: Vec<Atom>) -> Self {
        PresburgerSet {
            dim,
            disjuncts: vec![atoms],
        }
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        assert_eq!(z.len(), self.dim);
        self.disjuncts
            .iter()
            .any(|conj| conj.iter().all(|a| a.holds(z)))
    }

    pub fn union(&self, other: &PresburgerSet) -> PresburgerSet {
        assert_eq!(self.dim, other.dim);
        let mut disjuncts = self.disjuncts.clone();
        disjuncts.extend(other.disjuncts.iter().cloned());
        PresburgerSet {
            dim: self.dim,
            disjuncts,
        }
    }

    pub fn intersect(&self, other: &PresburgerSet) -> PresburgerSet {
        assert_eq!(self.dim, other.dim);
        let mut disjuncts = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let mut conj = a.clone();
                conj.extend(b.iter().cloned());
                disjuncts.push(conj);
            }
        }
        PresburgerSet {
            dim: self.dim,
            disjuncts,
        }
    }

    /// Complement as a quantifier-free set. The produced disjuncts are
    /// pairwise disjoint: the negation of a conjunction `A1 ∧ .. ∧ Ak`
    /// expands by the first failing atom, `∨_i (A1 ∧ .. ∧ A_{i-1} ∧ ¬A_i)`,
    /// and atom negations are themselves disjoint (distinct residues for
    /// congruences). Intersections of disjoint families stay disjoint, so
    /// `difference` yields disjoint pieces, which normalization relies on.
    pub fn complement(&self) -> PresburgerSet {
        let mut result = PresburgerSet::everything(self.dim);
        for conj in &self.disjuncts {
            let mut neg = PresburgerSet::empty(self.dim);
            for (i, atom) in conj.iter().enumerate() {
                for negated in atom.negate() {
                    let mut clause: Vec<Atom> = conj[..i].to_vec();
                    clause.extend(negated);
                    neg.disjuncts.push(clause);
                }
            }
            result = result.intersect(&neg);
        }
        result
    }

    pub fn difference(&self, other: &PresburgerSet) -> PresburgerSet {
        self.intersect(&other.complement())
    }

    fn map_forms(&self, f: impl Fn(&Affine) -> Affine, dim: usize) -> PresburgerSet {
        PresburgerSet {
            dim,
            disjuncts: self
                .disjuncts
                .iter()
                .map(|conj| {
                    conj.iter()
                        .map(|a| match a {
                            Atom::Ge(g) => Atom::Ge(f(g)),
                            Atom::Cong { form, rem, modulus } => Atom::Cong {
                                form: f(form),
                                rem: *rem,
                                modulus: *modulus,
                            },
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Add leading variables (shift all existing variable indices up).
    pub fn prepend_vars(&self, count: usize) -> PresburgerSet {
        self.map_forms(
            |f| {
                let mut coeffs = vec![0; count];
                coeffs.extend(f.coeffs.iter().copied());
                Affine {
                    coeffs,
                    constant: f.constant,
                }
            },
            self.dim + count,
        )
    }

    /// Add trailing variables (dimension grows, forms keep their indices).
    pub fn append_vars(&self, count: usize) -> PresburgerSet {
        self.map_forms(
            |f| {
                let mut coeffs = f.coeffs.clone();
                coeffs.extend(std::iter::repeat(0).take(count));
                Affine {
                    coeffs,
                    constant: f.constant,
                }
            },
            self.dim + count,
        )
    }

    /// Substitute a concrete value for variable `idx`, removing it.
    pub fn substitute(&self, idx: usize, value: i64) -> PresburgerSet {
        self.map_forms(
            |f| {
                let mut coeffs = f.coeffs.clone();
                let a = coeffs.remove(idx);
                Affine {
                    coeffs,
                    constant: f.constant + a * value,
                }
            },
            self.dim - 1,
        )
    }

    /// Apply an integer change of variables z = M w + c (columns of `m` give
    /// the coefficient of each new variable), producing constraints on w.
    pub fn pullback(&self, m: &[Vec<i64>], c: &[i64], new_dim: usize) -> PresburgerSet {
        assert_eq!(m.len(), self.dim);
        assert_eq!(c.len(), self.dim);
        self.map_forms(
            |f| {
                let mut coeffs = vec![0i64; new_dim];
                let mut constant = f.constant;
                for (i, &a) in f.coeffs.iter().enumerate() {
                    for j in 0..new_dim {
                        coeffs[j] += a * m[i][j];
                    }
                    constant += a * c[i];
                }
                Affine { coeffs, constant }
            },
            new_dim,
        )
    }
}

#[cfg(test)]
pub(crate) fn ge(coeffs: Vec<i64>, c: i64) -> Atom {
    Atom::Ge(Affine {
        coeffs,
        constant: c,
    })
}

#[cfg(test)]
pub(crate) fn cong(coeffs: Vec<i64>, rem: i64, modulus: i64) -> Atom {
    Atom::Cong {
        form: Affine {
            coeffs,
            constant: 0,
        },
        rem,
        modulus,
    }
}
