//! Dense complex matrices and the small set of decompositions the simulator
//! needs: matrix exponentials, Hermitian eigendecomposition, principal square
//! roots, and the closed-form propagator for traceless two-level generators.
//!
//! Everything here targets the tiny dimensions of dilated qubit registers
//! (2, 4, 8), so the implementations favour determinism and clarity over
//! asymptotic cleverness: cyclic Jacobi for `eigh`, scaled Taylor series for
//! `expm`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const IM: C64 = C64::new(0.0, 1.0);

/// Square complex matrix in row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimMismatch(row.len(), dim));
            }
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    /// 2x2 convenience constructor, row major.
    pub fn two_by_two(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { dim: 2, data: vec![a, b, c, d] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Determinant of a 2x2 matrix.
    pub fn det2(&self) -> Result<C64> {
        if self.dim != 2 {
            return Err(Error::DimMismatch(self.dim, 2));
        }
        Ok(self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude; handy for entrywise comparisons.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn scaled_re(&self, factor: f64) -> Self {
        self.scaled(C64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::StateDimMismatch { state_dim: v.len(), op_dim: self.dim });
        }
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                out[i] += self[(i, j)] * v[j];
            }
        }
        Ok(out)
    }

    /// Kronecker product; `self` indexes the slower (more significant) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim;
        let m = other.dim;
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// ||M - M^dagger||_F, zero for Hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// Replace M by (M + M^dagger)/2.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.adjoint()).scaled_re(0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::two_by_two(re(0.0), re(1.0), re(1.0), re(0.0))
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::two_by_two(re(0.0), -IM, IM, re(0.0))
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::two_by_two(re(1.0), re(0.0), re(0.0), re(-1.0))
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::two_by_two(re(h), re(h), re(h), re(-h))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are real (stored with zero imaginary part) and sorted in
/// ascending order; eigenvectors are the matching columns of `eigenvectors`.
/// Each column is phase-fixed so its largest-magnitude component is real and
/// positive, which keeps the decomposition bit-reproducible across runs.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Rebuild V f(lambda) V^dagger for a real scalar function f.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for k in 0..n {
            let fk = f(self.eigenvalues[k].re);
            if fk == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += re(fk) * v[(i, k)] * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

const HERMITICITY_RTOL: f64 = 1e-10;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn eigh(m: &ComplexMatrix) -> Result<Spectrum> {
    let n = m.dim();
    let scale = m.frobenius_norm().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_RTOL * scale {
        return Err(Error::NotHermitian { defect });
    }
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n);

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..60 {
        if off(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / re(mag);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                // Stable root of t^2 - 2 tau t - 1 = 0, the choice that
                // annihilates a[(p, q)] under this rotation convention.
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary plane rotation J: diagonal c, J[p][q] = -s*phase,
                // J[q][p] = s*conj(phase); A <- J^dagger A J, V <- V J.
                let (cp, sp) = (re(c), re(s));
                let jpq = -sp * phase;
                let jqp = sp * phase.conj();
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cp + aiq * jqp;
                    a[(i, q)] = aip * jpq + aiq * cp;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = cp * apj + jqp.conj() * aqj;
                    a[(q, j)] = jpq.conj() * apj + cp * aqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cp + viq * jqp;
                    v[(i, q)] = vip * jpq + viq * cp;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        eigenvalues.push(re(a[(k, k)].re));
        // Phase convention: largest-magnitude component real positive.
        let mut best = 0;
        let mut best_mag = 0.0;
        for i in 0..n {
            let mag = v[(i, k)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        let anchor = v[(best, k)];
        let phase = if best_mag > 0.0 { anchor.conj() / re(best_mag) } else { re(1.0) };
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)] * phase;
        }
    }

    Ok(Spectrum { eigenvalues, eigenvectors: vectors })
}

/// e^{scale * A} by scaling-and-squaring with a Taylor kernel.
///
/// The argument is halved until its 1-norm is below 1/4, the series is summed
/// to machine precision, and the result squared back up; for the operator
/// norms this crate produces the relative error stays below 1e-12.
pub fn expm(a: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    if !a.is_finite() || !scale.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix exponential argument".into()));
    }
    let n = a.dim();
    let mut one_norm: f64 = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| a[(i, j)].norm() * scale.abs()).sum();
        one_norm = one_norm.max(row);
    }
    let squarings = if one_norm > 0.25 { (one_norm / 0.25).log2().ceil() as u32 } else { 0 };
    let b = a.scaled_re(scale / f64::powi(2.0, squarings as i32));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=64u32 {
        term = term.mul(&b).scaled_re(1.0 / k as f64);
        result = result.add(&term);
        if term.frobenius_norm() <= 1e-17 * result.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    Ok(result)
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn principal_sqrt_hpd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eigh(m)?;
    let min_eig = spec.eigenvalues.first().map(|z| z.re).unwrap_or(0.0);
    if min_eig <= 1e-12 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok(spec.map_eigenvalues(f64::sqrt))
}

/// Square root of a positive *semi*-definite Hermitian matrix.
///
/// Eigenvalues in [-clip_tol, 0) are treated as zero; anything below
/// -clip_tol is a genuine violation and reported via the returned min
/// eigenvalue.
pub fn sqrt_psd(m: &ComplexMatrix, clip_tol: f64) -> Result<(ComplexMatrix, f64)> {
    let spec = eigh(m)?;
    let min_eig = spec.eigenvalues.first().map(|z| z.re).unwrap_or(0.0);
    if min_eig < -clip_tol {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok((spec.map_eigenvalues(|x| x.max(0.0).sqrt()), min_eig))
}

/// ||U U^dagger - I||_F.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    u.mul(&u.adjoint()).sub(&ComplexMatrix::identity(u.dim())).frobenius_norm()
}

const TRACELESS_ATOL: f64 = 1e-12;

/// Closed-form propagator e^{-i H t} for a traceless 2x2 generator.
///
/// With H^2 = c I (c = -det H by Cayley-Hamilton) the exponential is
/// cos(sqrt(c) t) I - i sin(sqrt(c) t)/sqrt(c) H; complex trigonometric
/// functions cover the oscillatory, exponential, and degenerate regimes in
/// one expression.
pub fn two_level_propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if h.dim() != 2 {
        return Err(Error::DimMismatch(h.dim(), 2));
    }
    let trace_abs = h.trace().norm();
    if trace_abs > TRACELESS_ATOL {
        return Err(Error::UnsupportedHamiltonian { trace_abs });
    }
    let c = -h.det2()?;
    let w = c.sqrt();
    let wt = w * re(t);
    let (cos_part, sinc_part) = if wt.norm() < 1e-6 {
        // Series limits around w -> 0: cos(wt) and t*sinc(wt).
        let wt2 = wt * wt;
        (re(1.0) - wt2 * re(0.5) + wt2 * wt2 * re(1.0 / 24.0), re(t) * (re(1.0) - wt2 * re(1.0 / 6.0)))
    } else {
        (wt.cos(), wt.sin() / w)
    };
    let id = ComplexMatrix::identity(2);
    Ok(id.scaled(cos_part).sub(&h.scaled(IM * sinc_part)))
}
