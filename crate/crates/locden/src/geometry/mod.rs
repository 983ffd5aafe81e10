//! The computable definable-set fragment: monomial cells, their measures,
//! deformations, tangent cones, cones with multiplicities, and stabilization.
//!
//! A monomial cell in K^n of dimension d is the image of
//! `u in (K^x)^d  |->  x_j = gamma_j * u^{alpha_j}` (some coordinates
//! identically zero), restricted by a Presburger condition on ord(u) and a
//! binomial condition on ac(u). Auxiliary residue variables may extend the
//! angular system: with `Exists` semantics they cut the support, with
//! `Weighted` semantics they weight each point by the fiber class
//! (cones with multiplicities).

pub mod cone;
pub mod measure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presburger::{PresburgerError, PresburgerSet};
use crate::residue::{BinomialSystem, ResidueError, UnitConst};
use crate::zlattice::{smith_normal_form, ZMat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("exponent matrix has rank {rank} < dim {dim}; the cell would have lower dimension")]
    RankDeficient { rank: usize, dim: usize },
    #[error("cell is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error("no recession direction reaches the origin")]
    DegenerateRecession,
    #[error("support is not invariant under the lambda action")]
    NotACone,
    #[error("tangent cone did not stabilize within {0} doublings")]
    StabilizationBoundExceeded(u32),
    #[error("direction search box exhausted; raise the search bound")]
    DirectionBoxExceeded,
}

/// gamma = t^ord * unit, with ac(unit) recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarConstant {
    pub ord: i64,
    pub ac: UnitConst,
}

impl ScalarConstant {
    pub fn one() -> Self {
        ScalarConstant {
            ord: 0,
            ac: UnitConst::One,
        }
    }

    pub fn t_pow(k: i64) -> Self {
        ScalarConstant {
            ord: k,
            ac: UnitConst::One,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coord {
    Zero,
    Monomial { gamma: ScalarConstant, exps: Vec<i64> },
}

impl Coord {
    pub fn monomial(gamma: ScalarConstant, exps: Vec<i64>) -> Self {
        Coord::Monomial { gamma, exps }
    }

    pub fn simple(exps: Vec<i64>) -> Self {
        Coord::Monomial {
            gamma: ScalarConstant::one(),
            exps,
        }
    }
}

/// Aux-variable semantics in the angular system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuxSemantics {
    /// each support point weighted by the class of its aux fiber
    Weighted,
    /// aux variables are existential witnesses (support only)
    Exists,
}

/// Deck data: the finite kernel of the originating parametrization and how it
/// acts on the cell's parameters and aux variables. Orbit classes in the
/// measure are taken with respect to this action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckData {
    /// dimension of the originating parameter torus
    pub d0: usize,
    /// the kernel is T[lattice]: zeta with zeta^v = 1 for all rows v
    pub kernel_lattice: Vec<Vec<i64>>,
    /// zeta acts on param i by multiplication with zeta^{param_link[i]}
    pub param_link: Vec<Vec<i64>>,
    /// zeta acts on aux j by multiplication with zeta^{aux_link[j]}
    pub aux_link: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialCell {
    pub ambient: usize,
    /// number of parameters = dimension of the cell
    pub dim: usize,
    /// length = ambient
    pub coords: Vec<Coord>,
    /// ord(u) constraints, over dim variables
    pub theta: PresburgerSet,
    /// angular constraints over (params .. aux)
    pub angular: BinomialSystem,
    pub aux: usize,
    pub aux_semantics: AuxSemantics,
    pub deck: DeckData,
    /// SNF divisors (> 1) of the exponent lattice: the generic fiber count of
    /// the parametrization is prod rho_d over these (filled by validate)
    pub fiber_rho: Vec<u32>,
}

impl MonomialCell {
    /// A plain cell: no aux variables, deck = own exponent lattice acting
    /// directly on the parameters.
    pub fn new(
        ambient: usize,
        dim: usize,
        coords: Vec<Coord>,
        theta: PresburgerSet,
        angular: BinomialSystem,
    ) -> Self {
        let kernel_lattice = coords
            .iter()
            .filter_map(|c| match c {
                Coord::Monomial { exps, .. } => Some(exps.clone()),
                Coord::Zero => None,
            })
            .collect();
        let param_link = (0..dim)
            .map(|i| {
                let mut row = vec![0i64; dim];
                row[i] = 1;
                row
            })
            .collect();
        MonomialCell {
            ambient,
            dim,
            coords,
            theta,
            angular,
            aux: 0,
            aux_semantics: AuxSemantics::Exists,
            deck: DeckData {
                d0: dim,
                kernel_lattice,
                param_link,
                aux_link: Vec::new(),
            },
            fiber_rho: Vec::new(),
        }
    }

    /// The cell supported only at the origin.
    pub fn origin(ambient: usize) -> Self {
        MonomialCell::new(
            ambient,
            0,
            vec![Coord::Zero; ambient],
            PresburgerSet::everything(0),
            BinomialSystem::torus(0),
        )
    }

    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.ambient)
            .filter(|&j| matches!(self.coords[j], Coord::Monomial { .. }))
            .collect()
    }

    /// Exponent matrix: one row per nonzero coordinate, dim columns.
    pub fn exponent_matrix(&self) -> ZMat {
        let rows: Vec<Vec<i64>> = self
            .coords
            .iter()
            .filter_map(|c| match c {
                Coord::Monomial { exps, .. } => Some(exps.clone()),
                Coord::Zero => None,
            })
            .collect();
        if rows.is_empty() {
            ZMat::new(0, self.dim)
        } else {
            ZMat::from_rows(&rows)
        }
    }

    /// ord gamma_j and alpha_j for nonzero coordinate j.
    pub fn coord_ord_data(&self, j: usize) -> Option<(i64, &[i64])> {
        match &self.coords[j] {
            Coord::Monomial { gamma, exps } => Some((gamma.ord, exps)),
            Coord::Zero => None,
        }
    }

    /// Structural + rank validation; fills `fiber_rho`.
    pub fn validate(mut self) -> Result<Self, GeometryError> {
        if self.coords.len() != self.ambient {
            return Err(GeometryError::Malformed(format!(
                "{} coordinates in ambient {}",
                self.coords.len(),
                self.ambient
            )));
        }
        for c in &self.coords {
            if let Coord::Monomial { exps, .. } = c {
                if exps.len() != self.dim {
                    return Err(GeometryError::Malformed(
                        "exponent vector length != dim".into(),
                    ));
                }
            }
        }
        if self.theta.dim != self.dim {
            return Err(GeometryError::Malformed(
                "ord-constraint dimension != dim".into(),
            ));
        }
        if self.angular.nvars() != self.dim + self.aux {
            return Err(GeometryError::Malformed(
                "angular system variable count != dim + aux".into(),
            ));
        }
        if self.angular.zero_flags.iter().any(|&z| z) {
            return Err(GeometryError::Malformed(
                "angular variables must be nonzero (units)".into(),
            ));
        }
        self.angular.validate()?;
        if self.dim > 0 {
            let m = self.exponent_matrix();
            let snf = smith_normal_form(&m);
            if snf.rank < self.dim {
                return Err(GeometryError::RankDeficient {
                    rank: snf.rank,
                    dim: self.dim,
                });
            }
            self.fiber_rho = snf
                .divisors
                .iter()
                .filter(|&&d| d > 1)
                .map(|&d| d as u32)
                .collect();
        }
        Ok(self)
    }

    /// Shift every coordinate's order by `k` (the effect of scaling the cell
    /// by a scalar of ord k and ac 1).
    pub fn scaled_by_ord(&self, k: i64) -> MonomialCell {
        let mut out = self.clone();
        for c in &mut out.coords {
            if let Coord::Monomial { gamma, .. } = c {
                gamma.ord += k;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinableSet {
    pub ambient: usize,
    pub cells: Vec<MonomialCell>,
}

impl DefinableSet {
    pub fn new(ambient: usize, cells: Vec<MonomialCell>) -> Self {
        DefinableSet { ambient, cells }
    }

    pub fn dim(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    pub fn validate(self) -> Result<Self, GeometryError> {
        let ambient = self.ambient;
        let cells = self
            .cells
            .into_iter()
            .map(|c| {
                if c.ambient != ambient {
                    return Err(GeometryError::Malformed("mixed ambient dimensions".into()));
                }
                c.validate()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DefinableSet { ambient, cells })
    }

    pub fn union(&self, other: &DefinableSet) -> DefinableSet {
        assert_eq!(self.ambient, other.ambient);
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        DefinableSet {
            ambient: self.ambient,
            cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// The scaling group Lambda_{n,m} = { lambda : ord(lambda) ≡ 0 mod n,
/// ac_m(lambda) = 1 }.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaGroup {
    pub n: i64,
    pub m: i64,
}

impl LambdaGroup {
    pub fn new(n: i64, m: i64) -> Self {
        assert!(n >= 1 && m >= 1);
        LambdaGroup { n, m }
    }

    /// Lambda_{n',m'} ⊆ Lambda_{n,m} iff n | n' and m <= m'.
    pub fn includes(&self, finer: &LambdaGroup) -> bool {
        finer.n % self.n == 0 && self.m <= finer.m
    }
}

impl std::fmt::Display for LambdaGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Lambda_{{{},{}}}", self.n, self.m)
    }
}

/// A tangent cone whose cells carry multiplicity data in their weighted aux
/// blocks. The support (aux read existentially) equals the tangent cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeWithMultiplicities {
    pub support: DefinableSet,
    pub lambda: LambdaGroup,
}

impl ConeWithMultiplicities {
    /// The underlying support set (aux variables demoted to witnesses).
    pub fn support_set(&self) -> DefinableSet {
        let cells = self
            .support
            .cells
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.aux_semantics = AuxSemantics::Exists;
                c
            })
            .collect();
        DefinableSet {
            ambient: self.support.ambient,
            cells,
        }
    }
}

/// Constructors for the standing examples used across the test suites.
pub mod corpus {
    use super::*;
    use crate::presburger::{Affine, Atom};

    fn theta_ge0(dim: usize) -> PresburgerSet {
        PresburgerSet::from_conjunction(
            dim,
            (0..dim).map(|i| Atom::Ge(Affine::var(dim, i))).collect(),
        )
    }

    /// The valuation ring O_K in K: x = u, ord u >= 0.
    pub fn unit_ball() -> DefinableSet {
        DefinableSet::new(
            1,
            vec![MonomialCell::new(
                1,
                1,
                vec![Coord::simple(vec![1])],
                theta_ge0(1),
                BinomialSystem::torus(1),
            )],
        )
    }

    /// {x : ord x ≡ r mod m, ord x >= 0}
    pub fn ord_congruence(r: i64, m: i64) -> DefinableSet {
        let atoms = vec![
            Atom::Ge(Affine::var(1, 0)),
            Atom::Cong {
                form: Affine::var(1, 0),
                rem: r,
                modulus: m,
            },
        ];
        DefinableSet::new(
            1,
            vec![MonomialCell::new(
                1,
                1,
                vec![Coord::simple(vec![1])],
                PresburgerSet::from_conjunction(1, atoms),
                BinomialSystem::torus(1),
            )],
        )
    }

    /// K^x together with the origin (all of K).
    pub fn full_line() -> DefinableSet {
        DefinableSet::new(
            1,
            vec![
                MonomialCell::new(
                    1,
                    1,
                    vec![Coord::simple(vec![1])],
                    PresburgerSet::everything(1),
                    BinomialSystem::torus(1),
                ),
                MonomialCell::origin(1),
            ],
        )
    }

    /// The cusp x1 = u^3, x2 = u^2 (so x1^2 = x2^3), ord u >= 0.
    pub fn cusp() -> DefinableSet {
        DefinableSet::new(
            2,
            vec![MonomialCell::new(
                2,
                1,
                vec![Coord::simple(vec![3]), Coord::simple(vec![2])],
                theta_ge0(1),
                BinomialSystem::torus(1),
            )],
        )
    }

    /// x1 = u^2, x2 = u^4 (two-sheeted over its first coordinate).
    pub fn square_quartic() -> DefinableSet {
        DefinableSet::new(
            2,
            vec![MonomialCell::new(
                2,
                1,
                vec![Coord::simple(vec![2]), Coord::simple(vec![4])],
                theta_ge0(1),
                BinomialSystem::torus(1),
            )],
        )
    }

    /// The punctured line x2 = c x1 with ord(c) = c_ord.
    pub fn line(c_ord: i64) -> DefinableSet {
        DefinableSet::new(
            2,
            vec![
                MonomialCell::new(
                    2,
                    1,
                    vec![
                        Coord::simple(vec![1]),
                        Coord::monomial(ScalarConstant::t_pow(c_ord), vec![1]),
                    ],
                    PresburgerSet::everything(1),
                    BinomialSystem::torus(1),
                ),
                MonomialCell::origin(2),
            ],
        )
    }

    /// O_K^d as a product cell.
    pub fn unit_polydisk(d: usize) -> DefinableSet {
        let coords = (0..d)
            .map(|i| {
                let mut e = vec![0i64; d];
                e[i] = 1;
                Coord::simple(e)
            })
            .collect();
        DefinableSet::new(
            d,
            vec![MonomialCell::new(
                d,
                d,
                coords,
                theta_ge0(d),
                BinomialSystem::torus(d),
            )],
        )
    }

    /// K^d: product cells over every support pattern, plus the origin.
    pub fn full_space(d: usize) -> DefinableSet {
        let mut cells = Vec::new();
        for mask in 1u32..(1 << d) {
            let support: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
            let k = support.len();
            let coords = (0..d)
                .map(|j| {
                    if let Some(pos) = support.iter().position(|&s| s == j) {
                        let mut e = vec![0i64; k];
                        e[pos] = 1;
                        Coord::simple(e)
                    } else {
                        Coord::Zero
                    }
                })
                .collect();
            cells.push(MonomialCell::new(
                d,
                k,
                coords,
                PresburgerSet::everything(k),
                BinomialSystem::torus(k),
            ));
        }
        cells.push(MonomialCell::origin(d));
        DefinableSet::new(d, cells)
    }

    /// The cusp cell with the extra angular constraint ac(u) = 1.
    pub fn cusp_ac_one() -> DefinableSet {
        let mut sys = BinomialSystem::torus(1);
        sys.equations.push(crate::residue::BinomialEquation {
            exps: vec![1],
            rhs: UnitConst::One,
        });
        DefinableSet::new(
            2,
            vec![MonomialCell::new(
                2,
                1,
                vec![Coord::simple(vec![3]), Coord::simple(vec![2])],
                theta_ge0(1),
                sys,
            )],
        )
    }

    /// dim-2 cell in K^3 with a redundant third coordinate x3 = u1
    /// (several valid coordinate projections).
    pub fn redundant_plane() -> DefinableSet {
        DefinableSet::new(
            3,
            vec![MonomialCell::new(
                3,
                2,
                vec![
                    Coord::simple(vec![1, 0]),
                    Coord::simple(vec![0, 1]),
                    Coord::simple(vec![1, 0]),
                ],
                theta_ge0(2),
                BinomialSystem::torus(2),
            )],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_counts() {
        let cusp = corpus::cusp().validate().unwrap();
        assert!(cusp.cells[0].fiber_rho.is_empty()); // gcd(3,2)=1
        let sq = corpus::square_quartic().validate().unwrap();
        assert_eq!(sq.cells[0].fiber_rho, vec![2]); // kernel mu_2
        let disk = corpus::unit_polydisk(2).validate().unwrap();
        assert!(disk.cells[0].fiber_rho.is_empty());
    }

    #[test]
    fn rank_deficiency_detected() {
        // two params but both coordinates only use u1
        let bad = MonomialCell::new(
            2,
            2,
            vec![Coord::simple(vec![1, 0]), Coord::simple(vec![2, 0])],
            PresburgerSet::everything(2),
            BinomialSystem::torus(2),
        );
        assert!(matches!(
            bad.validate(),
            Err(GeometryError::RankDeficient { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn lambda_inclusion() {
        let big = LambdaGroup::new(2, 1);
        assert!(big.includes(&LambdaGroup::new(6, 1)));
        assert!(big.includes(&LambdaGroup::new(2, 3)));
        assert!(!big.includes(&LambdaGroup::new(3, 1)));
        assert!(!LambdaGroup::new(2, 2).includes(&LambdaGroup::new(4, 1)));
    }
}
