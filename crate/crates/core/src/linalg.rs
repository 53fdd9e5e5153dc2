//! Small fixed-shape complex matrices.
//!
//! Shapes are const generics, so a 2×2 channel, a 3×2 block and a 6×6
//! equivalent system are all `CMat` with the dimension checked at compile
//! time. Storage lives on the stack; every operation is a pure function.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Condition estimates at or above this are treated as singular.
pub const COND_LIMIT: f64 = 1e12;

/// Relative eigenvalue gap below which `eig2x2` refuses to decompose.
pub const EIG_GAP: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix with `R` rows and `C` columns.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat<const R: usize, const C: usize> {
    e: [[C64; C]; R],
}

pub type M2 = CMat<2, 2>;
pub type CVec<const R: usize> = CMat<R, 1>;

impl<const R: usize, const C: usize> Default for CMat<R, C> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const R: usize, const C: usize> fmt::Debug for CMat<R, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat<{R},{C}> [")?;
        for r in 0..R {
            write!(f, "  ")?;
            for col in 0..C {
                let z = self.e[r][col];
                write!(f, "{:>+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<const R: usize, const C: usize> CMat<R, C> {
    pub const fn zeros() -> Self {
        Self { e: [[ZERO; C]; R] }
    }

    pub const fn from_rows(e: [[C64; C]; R]) -> Self {
        Self { e }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for r in 0..R {
            for col in 0..C {
                m.e[r][col] = f(r, col);
            }
        }
        m
    }

    /// Builds from row-major entries.
    pub fn from_slice(entries: &[C64]) -> Result<Self> {
        if entries.len() != R * C {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {R}x{C} matrix",
                entries.len()
            )));
        }
        Ok(Self::from_fn(|r, col| entries[r * C + col]))
    }

    pub const fn rows(&self) -> usize {
        R
    }

    pub const fn cols(&self) -> usize {
        C
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        self.e.iter().flat_map(|row| row.iter().copied())
    }

    pub fn as_rows(&self) -> &[[C64; C]; R] {
        &self.e
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> CMat<C, R> {
        CMat::from_fn(|r, col| self.e[col][r].conj())
    }

    pub fn transpose(&self) -> CMat<C, R> {
        CMat::from_fn(|r, col| self.e[col][r])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(|r, col| self.e[r][col].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(|r, col| self.e[r][col] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::from_fn(|r, col| self.e[r][col] * s)
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn col(&self, j: usize) -> CVec<R> {
        CMat::from_fn(|r, _| self.e[r][j])
    }

    pub fn row(&self, i: usize) -> CMat<1, C> {
        CMat::from_fn(|_, col| self.e[i][col])
    }

    pub fn set_col(&mut self, j: usize, v: &CVec<R>) {
        for r in 0..R {
            self.e[r][j] = v.e[r][0];
        }
    }

    pub fn set_row(&mut self, i: usize, v: &CMat<1, C>) {
        self.e[i] = v.e[0];
    }

    /// Copies `src` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn set_block<const A: usize, const B: usize>(&mut self, r0: usize, c0: usize, src: &CMat<A, B>) {
        assert!(r0 + A <= R && c0 + B <= C, "block out of range");
        for r in 0..A {
            for col in 0..B {
                self.e[r0 + r][c0 + col] = src.e[r][col];
            }
        }
    }

    pub fn block<const A: usize, const B: usize>(&self, r0: usize, c0: usize) -> CMat<A, B> {
        assert!(r0 + A <= R && c0 + B <= C, "block out of range");
        CMat::from_fn(|r, col| self.e[r0 + r][c0 + col])
    }

    /// Stacks the columns into one vector (`N` must equal `R * C`).
    pub fn vecm<const N: usize>(&self) -> CVec<N> {
        assert_eq!(N, R * C, "vecm output length");
        CMat::from_fn(|k, _| self.e[k % R][k / R])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<const N: usize> CMat<N, N> {
    pub fn identity() -> Self {
        Self::from_fn(|r, col| if r == col { ONE } else { ZERO })
    }

    pub fn diag(d: [C64; N]) -> Self {
        Self::from_fn(|r, col| if r == col { d[r] } else { ZERO })
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|k| self.e[k][k]).sum()
    }
}

impl<const R: usize> CMat<R, 1> {
    pub fn from_col(v: [C64; R]) -> Self {
        Self::from_fn(|r, _| v[r])
    }

    /// `selfᴴ · other`.
    pub fn inner(&self, other: &Self) -> C64 {
        (0..R).map(|r| self.e[r][0].conj() * other.e[r][0]).sum()
    }

    #[inline]
    pub fn at(&self, r: usize) -> C64 {
        self.e[r][0]
    }
}

impl<const R: usize, const C: usize> Index<(usize, usize)> for CMat<R, C> {
    type Output = C64;
    #[inline]
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        &self.e[r][col]
    }
}

impl<const R: usize, const C: usize> IndexMut<(usize, usize)> for CMat<R, C> {
    #[inline]
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        &mut self.e[r][col]
    }
}

impl<const R: usize, const C: usize> Add for CMat<R, C> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::from_fn(|r, col| self.e[r][col] + o.e[r][col])
    }
}

impl<const R: usize, const C: usize> Sub for CMat<R, C> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|r, col| self.e[r][col] - o.e[r][col])
    }
}

impl<const R: usize, const C: usize> Neg for CMat<R, C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|r, col| -self.e[r][col])
    }
}

impl<const R: usize, const K: usize, const C: usize> Mul<CMat<K, C>> for CMat<R, K> {
    type Output = CMat<R, C>;
    #[inline]
    fn mul(self, o: CMat<K, C>) -> CMat<R, C> {
        let mut out = CMat::<R, C>::zeros();
        for r in 0..R {
            for k in 0..K {
                let a = self.e[r][k];
                for col in 0..C {
                    out.e[r][col] += a * o.e[k][col];
                }
            }
        }
        out
    }
}

/// `[[a, b], [−b*, a*]]`.
pub fn alamouti_embed(a: C64, b: C64) -> M2 {
    M2::from_rows([[a, b], [-b.conj(), a.conj()]])
}

/// `[[a, b], [b*, −a*]]`: an Alamouti matrix with its columns exchanged.
pub fn swapped_alamouti_embed(a: C64, b: C64) -> M2 {
    M2::from_rows([[a, b], [b.conj(), -a.conj()]])
}

pub fn is_alamouti(m: &M2, tol: f64) -> bool {
    (m[(1, 1)] - m[(0, 0)].conj()).norm() <= tol && (m[(1, 0)] + m[(0, 1)].conj()).norm() <= tol
}

pub fn is_swapped_alamouti(m: &M2, tol: f64) -> bool {
    (m[(1, 0)] - m[(0, 1)].conj()).norm() <= tol && (m[(1, 1)] + m[(0, 0)].conj()).norm() <= tol
}

/// Alamouti component of a 2×2 matrix: every 2×2 complex matrix splits
/// uniquely into an Alamouti part plus a swapped-Alamouti part.
pub fn alamouti_part(m: &M2) -> M2 {
    let a = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
    let b = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
    alamouti_embed(a, b)
}

/// Closed-form inverse of a 2×2 matrix.
pub fn inverse2(m: &M2) -> Result<M2> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let n2 = m.frob_norm_sq();
    // ‖M‖·‖M⁻¹‖ = ‖M‖² / |det| for 2×2 in the Frobenius norm.
    let cond = if det.norm() > 0.0 { n2 / det.norm() } else { f64::INFINITY };
    if !(cond < COND_LIMIT) {
        return Err(Error::SingularMatrix(cond));
    }
    let inv_det = det.inv();
    Ok(M2::from_rows([
        [m[(1, 1)] * inv_det, -m[(0, 1)] * inv_det],
        [-m[(1, 0)] * inv_det, m[(0, 0)] * inv_det],
    ]))
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse<const N: usize>(m: &CMat<N, N>) -> Result<CMat<N, N>> {
    let mut a = *m;
    let mut inv = CMat::<N, N>::identity();
    for k in 0..N {
        let mut piv = k;
        let mut best = a.e[k][k].norm_sqr();
        for r in k + 1..N {
            let v = a.e[r][k].norm_sqr();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::SingularMatrix(f64::INFINITY));
        }
        a.e.swap(k, piv);
        inv.e.swap(k, piv);
        let p = a.e[k][k].inv();
        for col in 0..N {
            a.e[k][col] *= p;
            inv.e[k][col] *= p;
        }
        for r in 0..N {
            if r == k {
                continue;
            }
            let f = a.e[r][k];
            if f == ZERO {
                continue;
            }
            for col in 0..N {
                let ak = a.e[k][col];
                let ik = inv.e[k][col];
                a.e[r][col] -= f * ak;
                inv.e[r][col] -= f * ik;
            }
        }
    }
    let cond = m.frob_norm() * inv.frob_norm();
    if !(cond < COND_LIMIT) {
        return Err(Error::SingularMatrix(cond));
    }
    Ok(inv)
}

/// Kronecker product; output dimensions must be the products of the inputs'.
pub fn kron<const A: usize, const B: usize, const P: usize, const Q: usize, const R: usize, const S: usize>(
    x: &CMat<A, B>,
    y: &CMat<P, Q>,
) -> CMat<R, S> {
    assert!(R == A * P && S == B * Q, "kron output shape");
    CMat::from_fn(|r, col| x.e[r / P][col / Q] * y.e[r % P][col % Q])
}

/// `I₃ ⊗ m`, the block-diagonal operator of a 2×2 channel over three slots.
pub fn kron_i3(m: &M2) -> CMat<6, 6> {
    let mut out = CMat::<6, 6>::zeros();
    for t in 0..3 {
        out.set_block(2 * t, 2 * t, m);
    }
    out
}

/// Eigen-decomposition of a 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eig2 {
    pub lambda1: C64,
    pub lambda2: C64,
    pub u1: CVec<2>,
    pub u2: CVec<2>,
    pub kappa: C64,
}

impl Eig2 {
    /// `[u1 u2]`.
    pub fn vectors(&self) -> M2 {
        M2::from_rows([[self.u1.at(0), self.u2.at(0)], [self.u1.at(1), self.u2.at(1)]])
    }
}

fn eig_order(a: C64, b: C64) -> std::cmp::Ordering {
    // Descending by modulus, then real part, then imaginary part.
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

fn eigvec2(a: &M2, lambda: C64) -> CVec<2> {
    // Either row of (A − λI) gives a null vector; use the better conditioned.
    let v1 = [a[(0, 1)], lambda - a[(0, 0)]];
    let v2 = [lambda - a[(1, 1)], a[(1, 0)]];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let s = 1.0 / n.sqrt();
    CVec::from_col([v[0] * s, v[1] * s])
}

pub fn eig2x2(a: &M2) -> Result<Eig2> {
    let scale = a.frob_norm();
    let half_tr = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let half_diff = (a[(0, 0)] - a[(1, 1)]) * 0.5;
    let root = (half_diff * half_diff + a[(0, 1)] * a[(1, 0)]).sqrt();
    if !(2.0 * root.norm() > EIG_GAP * scale) {
        return Err(Error::DegenerateEigenvalues);
    }
    let p = half_tr + root;
    let m = half_tr - root;
    // The larger root is accurate; recover the other from the determinant.
    let (big, small) = if p.norm() >= m.norm() { (p, m) } else { (m, p) };
    let small = if big.norm() > 0.0 { det / big } else { small };
    let (l1, l2) = if eig_order(big, small).is_le() { (big, small) } else { (small, big) };
    if l2.norm() == 0.0 {
        return Err(Error::DegenerateEigenvalues);
    }
    Ok(Eig2 {
        lambda1: l1,
        lambda2: l2,
        u1: eigvec2(a, l1),
        u2: eigvec2(a, l2),
        kappa: l1 / l2,
    })
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
pub fn hermitian_eigenvalues<const N: usize>(h: &CMat<N, N>) -> [f64; N] {
    let mut a = *h;
    let norm = a.frob_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..N {
            for q in p + 1..N {
                off += a.e[p][q].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * norm {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a.e[p][q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a.e[p][p].re;
                let aqq = a.e[q][q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = diag(1, e^{-iφ}) · [[c, s], [−s, c]] acting on (p, q).
                let j00 = C64::new(cs, 0.0);
                let j01 = C64::new(sn, 0.0);
                let j10 = -phase.conj() * sn;
                let j11 = phase.conj() * cs;
                for k in 0..N {
                    let akp = a.e[k][p];
                    let akq = a.e[k][q];
                    a.e[k][p] = akp * j00 + akq * j10;
                    a.e[k][q] = akp * j01 + akq * j11;
                }
                for k in 0..N {
                    let apk = a.e[p][k];
                    let aqk = a.e[q][k];
                    a.e[p][k] = j00.conj() * apk + j10.conj() * aqk;
                    a.e[q][k] = j01.conj() * apk + j11.conj() * aqk;
                }
            }
        }
    }
    let mut out = [0.0; N];
    for k in 0..N {
        out[k] = a.e[k][k].re;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Smallest singular value.
pub fn svd_smallest<const R: usize, const C: usize>(m: &CMat<R, C>) -> f64 {
    let lam = if R >= C {
        let g = m.herm() * *m;
        hermitian_eigenvalues(&g)[0]
    } else {
        let g = *m * m.herm();
        hermitian_eigenvalues(&g)[0]
    };
    lam.max(0.0).sqrt()
}

/// Orthonormal basis (as columns) of the column span of `a`, by modified
/// Gram-Schmidt with one re-orthogonalization pass. Columns whose residual
/// falls below `rel_tol · ‖a‖` are skipped; the returned count is the rank.
pub fn orthonormal_columns<const R: usize, const C: usize>(a: &CMat<R, C>, rel_tol: f64) -> (CMat<R, C>, usize) {
    let mut q = CMat::<R, C>::zeros();
    let mut rank = 0;
    let tol = rel_tol * a.frob_norm();
    for j in 0..C {
        let mut v = a.col(j);
        for _pass in 0..2 {
            for k in 0..rank {
                let qk = q.col(k);
                let proj = qk.inner(&v);
                v = v - qk.scale(proj);
            }
        }
        let n = v.frob_norm();
        if n > tol {
            q.set_col(rank, &v.scale_re(1.0 / n));
            rank += 1;
        }
    }
    (q, rank)
}

/// Rows `u` (orthonormal) with `u · a = 0`; `K` must equal `R − rank(a)`.
pub fn left_null_basis<const R: usize, const C: usize, const K: usize>(a: &CMat<R, C>) -> Result<CMat<K, R>> {
    let (q, rank) = orthonormal_columns(a, 1e-10);
    if rank + K != R {
        return Err(Error::Conditioning("left null space has unexpected dimension"));
    }
    let mut basis: Vec<CVec<R>> = (0..rank).map(|k| q.col(k)).collect();
    let mut out = CMat::<K, R>::zeros();
    let mut found = 0;
    for e in 0..R {
        if found == K {
            break;
        }
        let mut v = CVec::<R>::zeros();
        v.e[e][0] = ONE;
        for _pass in 0..2 {
            for b in &basis {
                let proj = b.inner(&v);
                v = v - b.scale(proj);
            }
        }
        let n = v.frob_norm();
        if n > 1e-6 {
            let v = v.scale_re(1.0 / n);
            basis.push(v);
            out.set_row(found, &v.herm());
            found += 1;
        }
    }
    if found != K {
        return Err(Error::Conditioning("could not complete the null-space basis"));
    }
    Ok(out)
}

/// Relative distance of `v` from the column span of `span`:
/// `‖v − Π v‖ / ‖v‖` (zero for `v = 0`).
pub fn span_residual<const R: usize, const C: usize>(span: &CMat<R, C>, v: &CVec<R>) -> f64 {
    let vn = v.frob_norm();
    if vn == 0.0 {
        return 0.0;
    }
    let (q, rank) = orthonormal_columns(span, 1e-12);
    let mut r = *v;
    for k in 0..rank {
        let qk = q.col(k);
        let proj = qk.inner(&r);
        r = r - qk.scale(proj);
    }
    r.frob_norm() / vn
}

/// `h1ᴴ Π⊥ h1` where `Π⊥` projects onto the orthogonal complement of the
/// span of `others`: the post-zero-forcing SNR of `h1` under white noise.
pub fn projector_gamma<const R: usize, const C: usize>(h1: &CVec<R>, others: &CMat<R, C>) -> f64 {
    let (q, rank) = orthonormal_columns(others, 1e-12);
    let mut r = *h1;
    for k in 0..rank {
        let qk = q.col(k);
        let proj = qk.inner(&r);
        r = r - qk.scale(proj);
    }
    r.frob_norm_sq()
}
