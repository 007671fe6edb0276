//! Internal dense conic layer: symmetric vectorization, cone operations, and
//! Nesterov-Todd scalings for products of a nonnegative orthant with small
//! dense PSD blocks.
//!
//! Problems are posed in the standard form
//! `min c'x  s.t.  A x = b,  x in K`
//! with `K = R_+^p x S_+^{n_1} x ...`; PSD blocks are stored in scaled `svec`
//! coordinates so that inner products of symmetric matrices are plain dot
//! products.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{cst, Scalar};

pub(crate) fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Scaled column-major upper-triangle vectorization (off-diagonal x sqrt 2).
pub(crate) fn svec<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    let n = m.nrows();
    let s2 = cst::<T>(std::f64::consts::SQRT_2);
    let mut v = DVector::zeros(svec_len(n));
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            v[k] = if i == j { m[(i, j)] } else { s2 * m[(i, j)] };
            k += 1;
        }
    }
    v
}

pub(crate) fn smat<T: Scalar>(v: &[T], n: usize) -> DMatrix<T> {
    let inv_s2 = cst::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, j)] = v[k];
            } else {
                m[(i, j)] = inv_s2 * v[k];
                m[(j, i)] = m[(i, j)];
            }
            k += 1;
        }
    }
    m
}

/// Cone layout: `orthant` leading nonnegative scalars, then PSD blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ConeLayout {
    pub orthant: usize,
    pub psd: Vec<usize>,
}

impl ConeLayout {
    pub fn vec_len(&self) -> usize {
        self.orthant + self.psd.iter().map(|&n| svec_len(n)).sum::<usize>()
    }

    pub fn barrier_degree(&self) -> usize {
        self.orthant + self.psd.iter().sum::<usize>()
    }

    /// Cone identity element (ones / identity matrices).
    pub fn identity<T: Scalar>(&self) -> DVector<T> {
        let mut e = DVector::zeros(self.vec_len());
        for i in 0..self.orthant {
            e[i] = T::one();
        }
        let mut off = self.orthant;
        for &n in &self.psd {
            let mut k = 0;
            for j in 0..n {
                for i in 0..=j {
                    if i == j {
                        e[off + k] = T::one();
                    }
                    k += 1;
                }
            }
            off += svec_len(n);
        }
        e
    }

    fn psd_block<'a, T>(&self, v: &'a DVector<T>, idx: usize) -> &'a [T] {
        let mut off = self.orthant;
        for &n in &self.psd[..idx] {
            off += svec_len(n);
        }
        &v.as_slice()[off..off + svec_len(self.psd[idx])]
    }

}

/// Nesterov-Todd scaling at a strictly interior pair `(x, z)`.
///
/// For each PSD block, `r`/`rinv` satisfy `r' Z r = r^-1 X r^-T = diag(lam)`;
/// for the orthant `d = sqrt(x / z)` and `lam = sqrt(x z)`.
pub(crate) struct NtScaling<T> {
    orthant_d: DVector<T>,
    psd: Vec<PsdScaling<T>>,
    /// Scaled point lambda in vectorized coordinates.
    pub lambda: DVector<T>,
    layout: ConeLayout,
}

struct PsdScaling<T> {
    r: DMatrix<T>,
    rinv: DMatrix<T>,
    /// Diagonal of the scaled point.
    diag: DVector<T>,
}

impl<T: Scalar> NtScaling<T> {
    pub fn compute(layout: &ConeLayout, x: &DVector<T>, z: &DVector<T>) -> Option<Self> {
        let mut orthant_d = DVector::zeros(layout.orthant);
        let mut lambda = DVector::zeros(layout.vec_len());
        for i in 0..layout.orthant {
            if x[i] <= T::zero() || z[i] <= T::zero() {
                return None;
            }
            orthant_d[i] = (x[i] / z[i]).sqrt();
            lambda[i] = (x[i] * z[i]).sqrt();
        }
        let mut psd = Vec::with_capacity(layout.psd.len());
        let mut off = layout.orthant;
        for (k, &n) in layout.psd.iter().enumerate() {
            let xm = smat(layout.psd_block(x, k), n);
            let zm = smat(layout.psd_block(z, k), n);
            let lx = nalgebra::Cholesky::new(xm)?;
            let lz = nalgebra::Cholesky::new(zm)?;
            let lx = lx.l();
            let lz = lz.l();
            let prod = lz.transpose() * &lx;
            let svd = prod.svd(true, true);
            let u = svd.u.as_ref()?;
            let vt = svd.v_t.as_ref()?;
            let sig = &svd.singular_values;
            let mut sig_isqrt = DMatrix::zeros(n, n);
            for i in 0..n {
                if sig[i] <= T::zero() {
                    return None;
                }
                sig_isqrt[(i, i)] = T::one() / sig[i].sqrt();
            }
            let r = &lx * vt.transpose() * &sig_isqrt;
            let rinv = sig_isqrt * u.transpose() * lz.transpose();
            let mut diag = DVector::zeros(n);
            let mut kk = 0;
            for j in 0..n {
                for i in 0..=j {
                    if i == j {
                        lambda[off + kk] = sig[j];
                    }
                    kk += 1;
                }
            }
            for i in 0..n {
                diag[i] = sig[i];
            }
            psd.push(PsdScaling { r, rinv, diag });
            off += svec_len(n);
        }
        Some(NtScaling { orthant_d, psd, lambda, layout: layout.clone() })
    }

    fn map_psd(
        &self,
        v: &DVector<T>,
        f: impl Fn(&PsdScaling<T>, DMatrix<T>) -> DMatrix<T>,
    ) -> DVector<T> {
        let mut out = v.clone();
        let mut off = self.layout.orthant;
        for (k, &n) in self.layout.psd.iter().enumerate() {
            let m = smat(&v.as_slice()[off..off + svec_len(n)], n);
            let mapped = f(&self.psd[k], m);
            let sv = svec(&mapped);
            out.rows_mut(off, svec_len(n)).copy_from(&sv);
            off += svec_len(n);
        }
        out
    }

    /// `W u` (orthant: `d .* u`; PSD: `R' U R`).
    pub fn apply_w(&self, u: &DVector<T>) -> DVector<T> {
        let mut out = self.map_psd(u, |s, m| s.r.transpose() * m * &s.r);
        for i in 0..self.layout.orthant {
            out[i] = self.orthant_d[i] * u[i];
        }
        out
    }

    /// `W' u` (orthant: `d .* u`; PSD: `R U R'`).
    pub fn apply_wt(&self, u: &DVector<T>) -> DVector<T> {
        let mut out = self.map_psd(u, |s, m| &s.r * m * s.r.transpose());
        for i in 0..self.layout.orthant {
            out[i] = self.orthant_d[i] * u[i];
        }
        out
    }

    /// `W^-T u` (orthant: `u ./ d`; PSD: `R^-1 U R^-T`).
    pub fn apply_winv_t(&self, u: &DVector<T>) -> DVector<T> {
        let mut out = self.map_psd(u, |s, m| &s.rinv * m * s.rinv.transpose());
        for i in 0..self.layout.orthant {
            out[i] = u[i] / self.orthant_d[i];
        }
        out
    }

    /// `H u = W' W u`.
    pub fn apply_h(&self, u: &DVector<T>) -> DVector<T> {
        self.apply_wt(&self.apply_w(u))
    }

    /// Jordan product `lam o u` at the scaled point.
    pub fn lambda_prod(&self, u: &DVector<T>) -> DVector<T> {
        let half = cst::<T>(0.5);
        let mut out = u.clone();
        for i in 0..self.layout.orthant {
            out[i] = self.lambda[i] * u[i];
        }
        let mut off = self.layout.orthant;
        for (k, &n) in self.layout.psd.iter().enumerate() {
            let d = &self.psd[k].diag;
            let mut kk = 0;
            for j in 0..n {
                for i in 0..=j {
                    out[off + kk] = half * (d[i] + d[j]) * u[off + kk];
                    kk += 1;
                }
            }
            off += svec_len(n);
        }
        out
    }

    /// Inverse Jordan product `lam^-1 o u` (divide by the eigenvalue means).
    pub fn lambda_div(&self, u: &DVector<T>) -> DVector<T> {
        let half = cst::<T>(0.5);
        let mut out = u.clone();
        for i in 0..self.layout.orthant {
            out[i] = u[i] / self.lambda[i];
        }
        let mut off = self.layout.orthant;
        for (k, &n) in self.layout.psd.iter().enumerate() {
            let d = &self.psd[k].diag;
            let mut kk = 0;
            for j in 0..n {
                for i in 0..=j {
                    out[off + kk] = u[off + kk] / (half * (d[i] + d[j]));
                    kk += 1;
                }
            }
            off += svec_len(n);
        }
        out
    }

    /// Jordan product `u o v` (orthant componentwise, PSD `(UV + VU)/2`).
    pub fn jordan(&self, u: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        let half = cst::<T>(0.5);
        let mut out = DVector::zeros(u.len());
        for i in 0..self.layout.orthant {
            out[i] = u[i] * v[i];
        }
        let mut off = self.layout.orthant;
        for &n in &self.layout.psd {
            let um = smat(&u.as_slice()[off..off + svec_len(n)], n);
            let vm = smat(&v.as_slice()[off..off + svec_len(n)], n);
            let prod = (&um * &vm + &vm * &um) * half;
            out.rows_mut(off, svec_len(n)).copy_from(&svec(&prod));
            off += svec_len(n);
        }
        out
    }

    /// Largest step `t` with `lam + t d` in the cone (`None` = unbounded).
    pub fn step_to_boundary(&self, d: &DVector<T>) -> Option<T> {
        let mut bound: Option<T> = None;
        let mut tighten = |t: T| {
            bound = Some(match bound {
                None => t,
                Some(b) => b.min(t),
            });
        };
        for i in 0..self.layout.orthant {
            if d[i] < T::zero() {
                tighten(-self.lambda[i] / d[i]);
            }
        }
        let mut off = self.layout.orthant;
        for (k, &n) in self.layout.psd.iter().enumerate() {
            let dm = smat(&d.as_slice()[off..off + svec_len(n)], n);
            let diag = &self.psd[k].diag;
            let mut scaled = dm;
            for i in 0..n {
                for j in 0..n {
                    scaled[(i, j)] /= (diag[i] * diag[j]).sqrt();
                }
            }
            let eigs = scaled.symmetric_eigenvalues();
            for e in eigs.iter() {
                if *e < T::zero() {
                    tighten(-T::one() / *e);
                }
            }
            off += svec_len(n);
        }
        bound
    }
}
