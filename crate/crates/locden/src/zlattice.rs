//! Small integer matrix routines: Smith and Hermite normal forms, lattice
//! membership and quotient invariants. Everything here works on matrices of
//! the sizes produced by monomial cells (a handful of rows and columns), with
//! i128 intermediates.

/// Row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<i128>,
}

impl ZMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        ZMat {
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut m = ZMat::new(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v as i128;
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMat::new(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn row(&self, i: usize) -> &[i128] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.a.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.rows {
            self.a.swap(k * self.cols + i, k * self.cols + j);
        }
    }

    /// row_i += c * row_j
    fn add_row(&mut self, i: usize, j: usize, c: i128) {
        for k in 0..self.cols {
            let v = self[(j, k)];
            self[(i, k)] += c * v;
        }
    }

    fn add_col(&mut self, i: usize, j: usize, c: i128) {
        for k in 0..self.rows {
            let v = self[(k, j)];
            self[(k, i)] += c * v;
        }
    }

    fn neg_row(&mut self, i: usize) {
        for k in 0..self.cols {
            self[(i, k)] = -self[(i, k)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for ZMat {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.a[i * self.cols + j]
    }
}

/// Result of the Smith normal form `U * A * V = D`.
pub struct Snf {
    /// Nonzero diagonal entries d_1 | d_2 | ..., all positive.
    pub divisors: Vec<i128>,
    pub u: ZMat,
    pub v: ZMat,
    pub rank: usize,
}

pub fn smith_normal_form(input: &ZMat) -> Snf {
    let mut d = input.clone();
    let mut u = ZMat::identity(d.rows);
    let mut v = ZMat::identity(d.cols);
    let n = d.rows.min(d.cols);
    let mut t = 0;
    while t < n {
        // find a pivot with minimal absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..d.rows {
            for j in t..d.cols {
                if d[(i, j)] != 0
                    && pivot.map_or(true, |(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        // clear row and column t
        loop {
            let mut dirty = false;
            for i in (t + 1)..d.rows {
                if d[(i, t)] != 0 {
                    let q = div_round(d[(i, t)], d[(t, t)]);
                    d.add_row(i, t, -q);
                    u.add_row(i, t, -q);
                    if d[(i, t)] != 0 {
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..d.cols {
                if d[(t, j)] != 0 {
                    let q = div_round(d[(t, j)], d[(t, t)]);
                    d.add_col(j, t, -q);
                    v.add_col(j, t, -q);
                    if d[(t, j)] != 0 {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        // divisibility condition: d_t must divide every remaining entry
        let mut fixed = true;
        'scan: for i in (t + 1)..d.rows {
            for j in (t + 1)..d.cols {
                if d[(i, j)] % d[(t, t)] != 0 {
                    d.add_row(t, i, 1);
                    u.add_row(t, i, 1);
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if fixed {
            if d[(t, t)] < 0 {
                d.neg_row(t);
                u.neg_row(t);
            }
            t += 1;
        }
    }
    let mut divisors = Vec::new();
    for i in 0..n {
        if d[(i, i)] != 0 {
            divisors.push(d[(i, i)]);
        }
    }
    let rank = divisors.len();
    Snf {
        divisors,
        u,
        v,
        rank,
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    // round-to-nearest division keeps entries small
    let q = a.div_euclid(b);
    let r = a.rem_euclid(b);
    if 2 * r.abs() > b.abs() {
        q + 1
    } else {
        q
    }
}

/// The invariants of the finitely generated abelian group Z^cols / rowspan(A):
/// (free rank, torsion invariant factors > 1).
pub fn cokernel_invariants(a: &ZMat) -> (usize, Vec<u64>) {
    let snf = smith_normal_form(a);
    let torsion: Vec<u64> = snf
        .divisors
        .iter()
        .filter(|&&d| d > 1)
        .map(|&d| d as u64)
        .collect();
    (a.cols - snf.rank, torsion)
}

/// Invariants (free rank, torsion factors > 1) of the subquotient
/// (L1 + L2) / L2 of Z^n, where L1 = rowspan(a1), L2 = rowspan(a2).
pub fn subquotient_invariants(a1: &ZMat, a2: &ZMat) -> (usize, Vec<u64>) {
    assert_eq!(a1.cols, a2.cols);
    let n = a1.cols;
    // (L1+L2)/L2 = ker(Z^n/L2 -> Z^n/(L1+L2)) has the same invariants as
    // coker(L2 -> L1+L2)^dual-free part... compute directly:
    // invariants of (L1+L2)/L2 = invariants of Z^{r1 rows} mapping by
    // "a1 rows modulo L2". Use: (L1+L2)/L2 ≅ L1 / (L1 ∩ L2). We compute it as
    // the image of L1 in Z^n/L2, i.e. the group generated by the rows of a1
    // inside the cokernel of a2, presented by stacking.
    // Presentation: generators g_1..g_{r1} (rows of a1), relations: any integer
    // combination of generators lying in L2. Relations lattice:
    //   R = { x in Z^{r1} : x * a1 ∈ L2 }.
    // Then (L1+L2)/L2 ≅ Z^{r1} / R.
    let relations = solve_membership_lattice(a1, a2);
    let rel_rows: Vec<Vec<i64>> = relations
        .iter()
        .map(|v| v.iter().map(|&x| x as i64).collect())
        .collect();
    let rel = if rel_rows.is_empty() {
        ZMat::new(0, a1.rows)
    } else {
        ZMat::from_rows(&rel_rows)
    };
    let _ = n;
    cokernel_invariants(&rel)
}

/// Basis rows of the preimage lattice { x in Z^{map.rows} : x * map ∈
/// rowspan(target) }.
pub fn preimage_lattice(map: &ZMat, target: &ZMat) -> ZMat {
    if map.rows == 0 {
        return ZMat::new(0, 0);
    }
    let basis = solve_membership_lattice(map, target);
    let rows: Vec<Vec<i64>> = basis
        .iter()
        .map(|v| v.iter().map(|&x| x as i64).collect())
        .collect();
    if rows.is_empty() {
        ZMat::new(0, map.rows)
    } else {
        ZMat::from_rows(&rows)
    }
}

/// Basis of { x in Z^{r1} : x * a1 ∈ rowspan(a2) }.
fn solve_membership_lattice(a1: &ZMat, a2: &ZMat) -> Vec<Vec<i128>> {
    // x * a1 ∈ rowspan(a2)  <=>  exists y: x * a1 + y * a2 = 0.
    // Solve the homogeneous system over Z for (x, y) and project to x:
    // kernel of the stacked matrix [a1; a2]^T acting on (x,y) row vectors.
    let r1 = a1.rows;
    let r2 = a2.rows;
    let n = a1.cols;
    let mut stacked = ZMat::new(r1 + r2, n);
    for i in 0..r1 {
        for j in 0..n {
            stacked[(i, j)] = a1[(i, j)];
        }
    }
    for i in 0..r2 {
        for j in 0..n {
            stacked[(r1 + i, j)] = a2[(i, j)];
        }
    }
    // Row-vector kernel: { z in Z^{r1+r2} : z * stacked = 0 }.
    // With U * stacked * V = D, z * stacked = 0 iff (z U^{-1}) D = 0, i.e.
    // w D = 0 where w = z U^{-1}... easier: kernel rows = rows of U beyond the
    // rank: U * stacked = D * V^{-1} has zero rows past rank.
    let snf = smith_normal_form(&stacked);
    let mut basis = Vec::new();
    for i in snf.rank..(r1 + r2) {
        let urow: Vec<i128> = (0..(r1 + r2)).map(|j| snf.u[(i, j)]).collect();
        basis.push(urow[..r1].to_vec());
    }
    basis
}

/// Does `v` lie in the lattice spanned by the rows of `a`? If so, return the
/// coefficient vector.
pub fn in_row_lattice(a: &ZMat, v: &[i128]) -> Option<Vec<i128>> {
    assert_eq!(a.cols, v.len());
    // Solve x * a = v over Z: with U a V = D, x a = v <=> x U^{-1} D = v V,
    // set w := x U^{-1}: w D = v V: w_i = (vV)_i / d_i, and (vV)_i = 0 past rank.
    let snf = smith_normal_form(a);
    let vv: Vec<i128> = (0..a.cols)
        .map(|j| (0..a.cols).map(|k| v[k] * snf.v[(k, j)]).sum())
        .collect();
    let mut w = vec![0i128; a.rows];
    for i in 0..a.cols.min(a.rows) {
        if i < snf.rank {
            if vv[i] % snf.divisors[i] != 0 {
                return None;
            }
            w[i] = vv[i] / snf.divisors[i];
        }
    }
    for j in snf.rank..a.cols {
        if vv[j] != 0 {
            return None;
        }
    }
    // x = w U
    let x: Vec<i128> = (0..a.rows)
        .map(|j| (0..a.rows).map(|k| w[k] * snf.u[(k, j)]).sum())
        .collect();
    // verify (guards against rank < rows bookkeeping mistakes)
    for j in 0..a.cols {
        let s: i128 = (0..a.rows).map(|i| x[i] * a[(i, j)]).sum();
        if s != v[j] {
            return None;
        }
    }
    Some(x)
}

/// Basis (as rows) of the saturation of the row span of `a` inside Z^n:
/// the smallest direct summand of Z^n containing it.
pub fn saturation_basis(a: &ZMat) -> ZMat {
    // U a V = D. The saturation is spanned by the first `rank` rows of
    // D' V^{-1} with D' the diagonal of ones... Concretely: rowspan(a) has
    // basis rows of (U^{-1} D) V^{-1}-free form; the saturation replaces d_i
    // by 1. rows_i of saturation = e_i V^{-1} for i < rank.
    let snf = smith_normal_form(a);
    let vinv = invert_unimodular(&snf.v);
    let mut out = ZMat::new(snf.rank, a.cols);
    for i in 0..snf.rank {
        for j in 0..a.cols {
            out[(i, j)] = vinv[(i, j)];
        }
    }
    out
}

/// Inverse of a unimodular matrix (|det| = 1).
pub fn invert_unimodular(m: &ZMat) -> ZMat {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let snf = smith_normal_form(m);
    assert!(
        snf.divisors.iter().all(|&d| d == 1) && snf.rank == n,
        "matrix is not unimodular"
    );
    // U m V = I  =>  m^{-1} = V U
    let mut out = ZMat::new(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = (0..n).map(|k| snf.v[(i, k)] * snf.u[(k, j)]).sum();
        }
    }
    out
}

/// Express each row of `b` in terms of the rows of `basis` (which must be a
/// basis of a lattice containing rowspan(b)).
pub fn express_in_basis(basis: &ZMat, b: &ZMat) -> Option<ZMat> {
    let mut out = ZMat::new(b.rows, basis.rows);
    for i in 0..b.rows {
        let coeffs = in_row_lattice(basis, b.row(i))?;
        for j in 0..basis.rows {
            out[(i, j)] = coeffs[j];
        }
    }
    Some(out)
}

/// gcd of a slice (nonnegative; 0 for empty/all-zero).
pub fn gcd_all(values: impl IntoIterator<Item = i128>) -> i128 {
    let mut g: i128 = 0;
    for v in values {
        g = gcd(g, v.abs());
    }
    g
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        0
    } else {
        (a / gcd(a, b)) * b
    }
}
