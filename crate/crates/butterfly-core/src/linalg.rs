//! Dense complex matrices and the two independent nullspace routes.
//!
//! Everything here is sized for the tiny systems this simulator produces
//! (nulling constraints are 8 x n^2 with n <= 3 in practice, cut matrices a
//! few rows each), so the routines favor clarity and numerical soundness over
//! scalability.
//!
//! Rank and nullspace are computed two genuinely different ways:
//!
//! * [`nullspace_qr`]: Householder QR with column pivoting applied to the
//!   adjoint, an orthogonal factorization whose trailing Q columns span the
//!   nullspace to machine precision;
//! * [`nullspace_rowreduce`]: Gauss-Jordan elimination with partial pivoting
//!   and free-variable back-substitution.
//!
//! Callers cross-check the two (dimension equality plus principal angle)
//! rather than trusting either alone.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C1;
        }
        m
    }

    /// Build from a row-major slice; panics when the length is not
    /// `rows * cols`.
    pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        CMat {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Row-major view of all entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in mul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec length mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| libm::sqrt(z.norm_sqr()))
            .fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        let cols = self.cols;
        &mut self.data[r * cols + c]
    }
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

/// Hermitian inner product `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Rotate a vector so its largest-magnitude entry is real and positive, then
/// normalize to unit length. Pins down the arbitrary phase of a nullspace
/// vector so repeated runs serialize identically.
pub fn canonicalize_phase(v: &[Complex64]) -> Vec<Complex64> {
    let norm = vec_norm(v);
    if norm == 0.0 {
        return v.to_vec();
    }
    let mut best = 0usize;
    let mut best_mag = 0.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    let pivot = v[best];
    let phase = pivot / Complex64::new(libm::sqrt(pivot.norm_sqr()), 0.0);
    v.iter().map(|z| z / phase / norm).collect()
}

// ---------------------------------------------------------------------------
// Nullspace computation
// ---------------------------------------------------------------------------

/// Which algorithm produced a nullspace result.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NullspaceMethod {
    /// Householder QR with column pivoting on the adjoint.
    QrFactorization,
    /// Gauss-Jordan row reduction with free-variable back-substitution.
    RowReduction,
}

/// A numerical nullspace: orthonormal basis plus the evidence for the rank
/// decision.
#[derive(Clone, Debug)]
pub struct NullspaceResult {
    pub method: NullspaceMethod,
    /// Numerical rank of the input matrix.
    pub rank: usize,
    /// Orthonormal basis vectors of the nullspace (may be empty).
    pub basis: Vec<Vec<Complex64>>,
    /// Magnitude witness used for the rank decision (singular-value
    /// surrogates: pivot column norms for QR, pivot magnitudes for row
    /// reduction), sorted descending.
    pub witness: Vec<f64>,
    /// Absolute threshold actually applied: `rel_tol * witness[0]`.
    pub threshold: f64,
}

impl NullspaceResult {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Failure modes of the dense routines.
#[derive(Clone, PartialEq, Debug)]
pub enum LinalgError {
    /// Relative tolerance must be a finite positive number below 1.
    InvalidTolerance { rel_tol: f64 },
    /// The input matrix had no entries.
    EmptyMatrix,
    /// A non-finite entry makes rank decisions meaningless.
    NonFiniteEntry,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::InvalidTolerance { rel_tol } => {
                write!(f, "invalid relative tolerance {rel_tol}: need 0 < tol < 1")
            }
            LinalgError::EmptyMatrix => write!(f, "matrix has no entries"),
            LinalgError::NonFiniteEntry => write!(f, "matrix contains a non-finite entry"),
        }
    }
}

impl core::error::Error for LinalgError {}

fn check_inputs(m: &CMat, rel_tol: f64) -> Result<(), LinalgError> {
    if !(rel_tol.is_finite() && rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(LinalgError::InvalidTolerance { rel_tol });
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    if m.data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LinalgError::NonFiniteEntry);
    }
    Ok(())
}

/// Nullspace of `m` via Householder QR with column pivoting on `m^H`.
///
/// Factoring `m^H P = Q R` gives `m = P R^H Q^H`, so the columns of `Q`
/// beyond the numerical rank are mapped by `m` onto (conjugated) zero rows of
/// `R^H`: they span the nullspace, are orthonormal by construction, and the
/// pivot column norms `|R[k][k]|` (descending by pivoting) witness the rank
/// decision at threshold `rel_tol * |R[0][0]|`.
pub fn nullspace_qr(m: &CMat, rel_tol: f64) -> Result<NullspaceResult, LinalgError> {
    check_inputs(m, rel_tol)?;
    let a = m.hermitian();
    let (nrows, ncols) = (a.rows(), a.cols()); // nrows = m.cols(), ncols = m.rows()
    let steps = nrows.min(ncols);

    let mut r = a;
    let mut q = CMat::identity(nrows);
    let mut pivots: Vec<f64> = Vec::with_capacity(steps);

    // Trailing squared column norms, updated as the factorization proceeds.
    let mut col_norm2: Vec<f64> = (0..ncols)
        .map(|c| (0..nrows).map(|rr| r[(rr, c)].norm_sqr()).sum())
        .collect();

    for k in 0..steps {
        // Column pivoting: bring the largest remaining column forward.
        let mut best = k;
        for c in (k + 1)..ncols {
            if col_norm2[c] > col_norm2[best] {
                best = c;
            }
        }
        if best != k {
            for rr in 0..nrows {
                let tmp = r[(rr, k)];
                r[(rr, k)] = r[(rr, best)];
                r[(rr, best)] = tmp;
            }
            col_norm2.swap(k, best);
        }

        // Householder vector for the trailing part of column k.
        let x0 = r[(k, k)];
        let normx = libm::sqrt((k..nrows).map(|rr| r[(rr, k)].norm_sqr()).sum::<f64>());
        pivots.push(normx);
        if normx == 0.0 {
            continue;
        }
        let x0_abs = libm::sqrt(x0.norm_sqr());
        let phase = if x0_abs == 0.0 { C1 } else { x0 / Complex64::new(x0_abs, 0.0) };
        let alpha = -phase * normx;
        let mut v: Vec<Complex64> = (k..nrows).map(|rr| r[(rr, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            let tau = 2.0 / vnorm2;
            // Apply H = I - tau v v^H to the trailing block of R from the left.
            for c in k..ncols {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| vi.conj() * r[(k + i, c)])
                    .sum();
                let f = dot * tau;
                for (i, vi) in v.iter().enumerate() {
                    let val = r[(k + i, c)] - f * vi;
                    r[(k + i, c)] = val;
                }
            }
            // Accumulate Q <- Q H (reflectors applied from the right).
            for rr in 0..nrows {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| q[(rr, k + i)] * vi)
                    .sum();
                let f = dot * tau;
                for (i, vi) in v.iter().enumerate() {
                    let val = q[(rr, k + i)] - f * vi.conj();
                    q[(rr, k + i)] = val;
                }
            }
        }
        r[(k, k)] = alpha;
        for rr in (k + 1)..nrows {
            r[(rr, k)] = C0;
        }
        // Downdate trailing column norms.
        for c in (k + 1)..ncols {
            col_norm2[c] = (k + 1..nrows).map(|rr| r[(rr, c)].norm_sqr()).sum();
        }
    }

    let max_pivot = pivots.iter().copied().fold(0.0, f64::max);
    let threshold = rel_tol * max_pivot;
    let rank = pivots.iter().filter(|&&p| p > threshold).count();

    // Nullspace of m = trailing columns of Q (beyond the rank), plus any
    // dimensions past the reflector count when nrows > steps.
    let mut basis = Vec::new();
    for c in rank..nrows {
        let col: Vec<Complex64> = (0..nrows).map(|rr| q[(rr, c)]).collect();
        basis.push(canonicalize_phase(&col));
    }

    let mut witness = pivots;
    witness.sort_by(|a, b| b.partial_cmp(a).unwrap());

    Ok(NullspaceResult {
        method: NullspaceMethod::QrFactorization,
        rank,
        basis,
        witness,
        threshold,
    })
}

/// Nullspace of `m` via Gaussian row reduction.
///
/// Eliminates with partial (largest-magnitude) pivoting to row echelon form,
/// reads the free columns, back-substitutes one basis vector per free column,
/// applies one step of iterative refinement against the original matrix, and
/// orthonormalizes the result with modified Gram-Schmidt. The recorded pivot
/// magnitudes witness the rank decision.
pub fn nullspace_rowreduce(m: &CMat, rel_tol: f64) -> Result<NullspaceResult, LinalgError> {
    check_inputs(m, rel_tol)?;
    let (nrows, ncols) = (m.rows(), m.cols());
    let mut a = m.clone();

    // Scale reference: the largest column 2-norm is within sqrt(ncols) of the
    // largest singular value, which is all a relative threshold needs.
    let scale = (0..ncols)
        .map(|c| libm::sqrt((0..nrows).map(|r| a[(r, c)].norm_sqr()).sum::<f64>()))
        .fold(0.0, f64::max);
    let threshold = rel_tol * scale;

    // Forward elimination, recording the row operations so the same
    // reduction can later be replayed on a residual vector.
    enum RowOp {
        Swap(usize, usize),
        /// row `target` -= multiplier * row `pivot`
        Eliminate {
            target: usize,
            pivot: usize,
            multiplier: Complex64,
        },
    }
    let mut ops: Vec<RowOp> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pivot_mags: Vec<f64> = Vec::new();
    let mut row = 0usize;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        // Partial pivoting within the column.
        let mut best = row;
        let mut best_mag = libm::sqrt(a[(row, col)].norm_sqr());
        for r in (row + 1)..nrows {
            let mag = libm::sqrt(a[(r, col)].norm_sqr());
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag <= threshold {
            continue; // free column
        }
        if best != row {
            for c in 0..ncols {
                let tmp = a[(row, c)];
                a[(row, c)] = a[(best, c)];
                a[(best, c)] = tmp;
            }
            ops.push(RowOp::Swap(row, best));
        }
        pivot_cols.push(col);
        pivot_mags.push(best_mag);
        // Eliminate below the pivot only; rows above stay untouched so the
        // factor stays an echelon form suitable for back-substitution.
        for r in (row + 1)..nrows {
            let multiplier = a[(r, col)] / a[(row, col)];
            if multiplier != C0 {
                for c in col..ncols {
                    let val = a[(r, c)] - multiplier * a[(row, c)];
                    a[(r, c)] = val;
                }
            }
            a[(r, col)] = C0;
            ops.push(RowOp::Eliminate {
                target: r,
                pivot: row,
                multiplier,
            });
        }
        row += 1;
    }

    let rank = pivot_cols.len();
    let free_cols: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();

    // Back-substitution against the echelon form: fill the pivot entries of
    // `v` (whose free entries are already set) so that U v + rhs = 0, where
    // `rhs` has been reduced by the recorded row operations. Free columns
    // left of a pivot keep reduced entries, so the sum runs over every
    // column with a nonzero value, not just those right of the pivot.
    let back_substitute = |v: &mut Vec<Complex64>, rhs: &[Complex64]| {
        for prow in (0..rank).rev() {
            let pcol = pivot_cols[prow];
            let mut acc = rhs[prow];
            for c in 0..ncols {
                if c != pcol && a[(prow, c)] != C0 && v[c] != C0 {
                    acc += a[(prow, c)] * v[c];
                }
            }
            v[pcol] = -acc / a[(prow, pcol)];
        }
    };
    let reduce_rhs = |r: &mut Vec<Complex64>| {
        for op in &ops {
            match *op {
                RowOp::Swap(i, j) => r.swap(i, j),
                RowOp::Eliminate {
                    target,
                    pivot,
                    multiplier,
                } => {
                    let delta = multiplier * r[pivot];
                    r[target] -= delta;
                }
            }
        }
    };

    // One basis vector per free column: free variable 1, the others 0, pivot
    // variables by back-substitution, then one iterative-refinement step
    // against the original matrix to shed elimination rounding.
    let zeros_rhs = vec![C0; nrows.max(1)];
    let mut raw: Vec<Vec<Complex64>> = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![C0; ncols];
        v[fc] = C1;
        back_substitute(&mut v, &zeros_rhs);

        let mut residual = m.matvec(&v);
        reduce_rhs(&mut residual);
        let mut delta = vec![C0; ncols];
        back_substitute(&mut delta, &residual);
        for (vi, di) in v.iter_mut().zip(&delta) {
            // delta carries corrections only in pivot positions; the free
            // positions stay at their exact 0/1 values.
            *vi += di;
        }

        raw.push(v);
    }

    // Modified Gram-Schmidt with re-orthogonalization.
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(raw.len());
    for mut v in raw {
        for _ in 0..2 {
            for b in &basis {
                let coef = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= coef * bi;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for z in &mut v {
                *z *= Complex64::new(inv, 0.0);
            }
            basis.push(canonicalize_phase(&v));
        }
    }

    let mut witness = pivot_mags;
    witness.sort_by(|a, b| b.partial_cmp(a).unwrap());

    Ok(NullspaceResult {
        method: NullspaceMethod::RowReduction,
        rank,
        basis,
        witness,
        threshold,
    })
}

/// Numerical rank at relative tolerance `rel_tol`, via the QR route.
pub fn rank(m: &CMat, rel_tol: f64) -> Result<usize, LinalgError> {
    Ok(nullspace_qr(m, rel_tol)?.rank)
}

/// Principal angle (radians) between two one-dimensional subspaces.
///
/// Small angles are computed through the sine (the norm of `v`'s component
/// orthogonal to `u`), because `acos` near 1 cannot resolve angles below
/// `sqrt(eps)` and the solver cross-check needs resolution well under 1e-8.
pub fn principal_angle_1d(u: &[Complex64], v: &[Complex64]) -> f64 {
    assert_eq!(u.len(), v.len(), "principal angle needs equal-length vectors");
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    assert!(nu > 0.0 && nv > 0.0, "principal angle of a zero vector");
    let coef = inner(u, v) / Complex64::new(nu * nu, 0.0);
    let cosine = (libm::sqrt(coef.norm_sqr()) * nu / nv).clamp(0.0, 1.0);
    if cosine < 0.7 {
        return libm::acos(cosine);
    }
    // Residual of v after projecting out the u direction, phase included.
    let residual: f64 = v
        .iter()
        .zip(u)
        .map(|(vi, ui)| (vi - coef * ui).norm_sqr())
        .sum();
    libm::asin((libm::sqrt(residual) / nv).clamp(0.0, 1.0))
}

/// Largest principal angle (radians) between two equal-dimension subspaces
/// given by orthonormal bases, computed through the sine: the Frobenius
/// norm of `V` after projecting out `span(U)` bounds `sin` of the largest
/// angle from above (tightly for small angles, which is where the solver
/// cross-check lives).
pub fn principal_angle(u_basis: &[Vec<Complex64>], v_basis: &[Vec<Complex64>]) -> f64 {
    assert_eq!(u_basis.len(), v_basis.len(), "principal angle needs equal dimensions");
    assert!(!u_basis.is_empty(), "principal angle of empty subspaces");
    if u_basis.len() == 1 {
        return principal_angle_1d(&u_basis[0], &v_basis[0]);
    }
    let mut residual_sq = 0.0;
    for v in v_basis {
        let mut r = v.clone();
        for u in u_basis {
            let coef = inner(u, v);
            for (ri, ui) in r.iter_mut().zip(u) {
                *ri -= coef * ui;
            }
        }
        residual_sq += r.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    libm::asin(libm::sqrt(residual_sq).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    const TOL: f64 = 1e-9;

    fn random_mat(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut r = rng::stream(seed, "test/linalg", 0);
        let data: Vec<Complex64> = (0..rows * cols).map(|_| rng::complex_gaussian(&mut r)).collect();
        CMat::from_rows(rows, cols, &data)
    }

    /// `a` with an extra column appended that is a known combination of two
    /// existing columns, so the exact nullspace is known.
    fn rank_deficient_with_known_null(seed: u64) -> (CMat, Vec<Complex64>) {
        let a = random_mat(6, 5, seed);
        let c1 = Complex64::new(0.75, -0.25);
        let c2 = Complex64::new(-0.5, 1.0);
        let mut data = Vec::new();
        for r in 0..6 {
            data.extend_from_slice(a.row(r));
            data.push(c1 * a[(r, 1)] + c2 * a[(r, 3)]);
        }
        let m = CMat::from_rows(6, 6, &data);
        // Null vector: c1 * e1 + c2 * e3 - e5.
        let mut null = vec![C0; 6];
        null[1] = c1;
        null[3] = c2;
        null[5] = -C1;
        (m, null)
    }

    fn assert_basis_is_orthonormal(basis: &[Vec<Complex64>]) {
        for (i, u) in basis.iter().enumerate() {
            assert!((vec_norm(u) - 1.0).abs() < 1e-12, "basis vector {i} not unit");
            for v in basis.iter().skip(i + 1) {
                let dot = libm::sqrt(inner(u, v).norm_sqr());
                assert!(dot < 1e-10, "basis vectors not orthogonal: |<u,v>| = {dot}");
            }
        }
    }

    fn assert_annihilates(m: &CMat, basis: &[Vec<Complex64>], label: &str) {
        let scale = m.frobenius_norm();
        for b in basis {
            let residual = vec_norm(&m.matvec(b));
            assert!(
                residual <= TOL * scale,
                "{label}: |M b| = {residual:.3e} exceeds {TOL:.0e} * |M| = {:.3e}",
                TOL * scale
            );
        }
    }

    #[test]
    fn full_rank_matrix_has_empty_nullspace() {
        for seed in 0..20 {
            let m = random_mat(5, 5, seed);
            let qr = nullspace_qr(&m, TOL).unwrap();
            let rr = nullspace_rowreduce(&m, TOL).unwrap();
            assert_eq!(qr.rank, 5, "seed {seed}: QR rank");
            assert_eq!(rr.rank, 5, "seed {seed}: row-reduction rank");
            assert!(qr.basis.is_empty());
            assert!(rr.basis.is_empty());
        }
    }

    #[test]
    fn wide_random_matrix_has_expected_nullity() {
        for seed in 100..120 {
            let m = random_mat(8, 9, seed);
            for res in [nullspace_qr(&m, TOL).unwrap(), nullspace_rowreduce(&m, TOL).unwrap()] {
                assert_eq!(res.rank, 8, "seed {seed}: {:?} rank", res.method);
                assert_eq!(res.dim(), 1, "seed {seed}: {:?} nullity", res.method);
                assert_basis_is_orthonormal(&res.basis);
                assert_annihilates(&m, &res.basis, "wide random");
            }
        }
    }

    #[test]
    fn constructed_rank_deficiency_is_detected_exactly() {
        for seed in 200..220 {
            let (m, known_null) = rank_deficient_with_known_null(seed);
            for res in [nullspace_qr(&m, TOL).unwrap(), nullspace_rowreduce(&m, TOL).unwrap()] {
                assert_eq!(res.rank, 5, "seed {seed}: {:?}", res.method);
                assert_eq!(res.dim(), 1);
                assert_annihilates(&m, &res.basis, "constructed deficiency");
                let angle = principal_angle_1d(&res.basis[0], &known_null);
                assert!(
                    angle < 1e-10,
                    "seed {seed}: {:?} nullspace is {angle:.3e} rad away from the true one",
                    res.method
                );
            }
        }
    }

    #[test]
    fn both_routes_agree_on_random_wide_systems() {
        for seed in 300..400 {
            let m = random_mat(8, 9, seed);
            let qr = nullspace_qr(&m, TOL).unwrap();
            let rr = nullspace_rowreduce(&m, TOL).unwrap();
            assert_eq!(qr.dim(), rr.dim(), "seed {seed}: dimensions disagree");
            let angle = principal_angle_1d(&qr.basis[0], &rr.basis[0]);
            assert!(
                angle <= 1e-8,
                "seed {seed}: routes disagree by {angle:.3e} rad"
            );
        }
    }

    #[test]
    fn zero_matrix_nullspace_is_everything() {
        let m = CMat::zeros(8, 9);
        let qr = nullspace_qr(&m, TOL).unwrap();
        let rr = nullspace_rowreduce(&m, TOL).unwrap();
        for res in [qr, rr] {
            assert_eq!(res.rank, 0, "{:?}", res.method);
            assert_eq!(res.dim(), 9, "{:?}", res.method);
            assert_basis_is_orthonormal(&res.basis);
        }
    }

    #[test]
    fn duplicated_rows_reduce_the_rank() {
        let base = random_mat(4, 6, 7);
        let mut data = Vec::new();
        for r in 0..4 {
            data.extend_from_slice(base.row(r));
        }
        data.extend_from_slice(base.row(0));
        data.extend_from_slice(base.row(2));
        let m = CMat::from_rows(6, 6, &data);
        for res in [nullspace_qr(&m, TOL).unwrap(), nullspace_rowreduce(&m, TOL).unwrap()] {
            assert_eq!(res.rank, 4, "{:?}", res.method);
            assert_eq!(res.dim(), 2, "{:?}", res.method);
            assert_basis_is_orthonormal(&res.basis);
            assert_annihilates(&m, &res.basis, "duplicated rows");
        }
    }

    #[test]
    fn witness_is_sorted_descending_and_thresholded() {
        let (m, _) = rank_deficient_with_known_null(42);
        for res in [nullspace_qr(&m, TOL).unwrap(), nullspace_rowreduce(&m, TOL).unwrap()] {
            for w in res.witness.windows(2) {
                assert!(w[0] >= w[1] - 1e-15, "{:?}: witness not descending", res.method);
            }
            assert!(res.threshold > 0.0);
            // Rank-many witnesses above threshold (QR also records the
            // sub-threshold pivots; row reduction stops at the rank).
            assert!(res.witness.iter().filter(|&&p| p > res.threshold).count() >= res.rank);
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let m = random_mat(3, 3, 1);
        for bad in [0.0, -1e-9, 1.0, f64::NAN] {
            assert!(matches!(
                nullspace_qr(&m, bad),
                Err(LinalgError::InvalidTolerance { .. })
            ));
            assert!(matches!(
                nullspace_rowreduce(&m, bad),
                Err(LinalgError::InvalidTolerance { .. })
            ));
        }
        assert!(matches!(nullspace_qr(&CMat::zeros(0, 4), TOL), Err(LinalgError::EmptyMatrix)));
        let mut nan = CMat::zeros(2, 2);
        nan[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(nullspace_qr(&nan, TOL), Err(LinalgError::NonFiniteEntry)));
        assert!(matches!(
            nullspace_rowreduce(&nan, TOL),
            Err(LinalgError::NonFiniteEntry)
        ));
    }

    #[test]
    fn canonical_phase_makes_the_leading_entry_real_positive() {
        let v = vec![
            Complex64::new(0.1, -0.2),
            Complex64::new(-1.5, 2.0),
            Complex64::new(0.3, 0.0),
        ];
        let c = canonicalize_phase(&v);
        assert!((vec_norm(&c) - 1.0).abs() < 1e-12);
        assert!(c[1].im.abs() < 1e-12, "largest entry must become real");
        assert!(c[1].re > 0.0, "largest entry must become positive");
        // The subspace is unchanged.
        assert!(principal_angle_1d(&v, &c) < 1e-12);
    }

    #[test]
    fn mul_and_hermitian_satisfy_adjoint_identity() {
        let a = random_mat(4, 3, 77);
        let b = random_mat(3, 5, 78);
        let lhs = a.mul(&b).hermitian();
        let rhs = b.hermitian().mul(&a.hermitian());
        for r in 0..lhs.rows() {
            for c in 0..lhs.cols() {
                assert!((lhs[(r, c)] - rhs[(r, c)]).norm_sqr() < 1e-20);
            }
        }
    }
}
