//! Seeded random ensembles used by the verification suites.
//!
//! Every generator draws from a caller-owned [`EnsembleRng`], so a single
//! `u64` seed fixes an entire suite.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{spectral_matrix, LieAlgebraData};
use crate::error::{Error, Result};
use crate::geometry::{FieldRole, FieldSet, Lattice2D, LieOneForm, LorentzFrame};
use crate::matrix::Matrix;
use crate::scalar::Real;

pub type EnsembleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> EnsembleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws until a candidate passes; bounded so a bad generator cannot hang.
const MAX_REDRAWS: usize = 1000;

fn uniform<R: Real>(rng: &mut EnsembleRng, lo: f64, hi: f64) -> R {
    R::lit(rng.random_range(lo..hi))
}

/// Symmetric Lorentzian metric with `h00 < 0 < h11` and an off-diagonal
/// part small enough that `det h < 0` holds with margin.
pub fn random_metric<R: Real>(rng: &mut EnsembleRng) -> Result<LorentzFrame<R>> {
    let h00: f64 = -rng.random_range(0.5..2.0);
    let h11: f64 = rng.random_range(0.5..2.0);
    let h01 = rng.random_range(-0.5..0.5) * (-h00 * h11).sqrt();
    LorentzFrame::new([[R::lit(h00), R::lit(h01)], [R::lit(h01), R::lit(h11)]])
}

/// One-form with independent uniform `[-1, 1)` components.
pub fn random_oneform<R: Real>(rng: &mut EnsembleRng, lattice: Lattice2D<R>, dim: usize) -> Result<LieOneForm<R>> {
    let data = (0..lattice.sites() * dim * 2).map(|_| uniform(rng, -1.0, 1.0)).collect();
    LieOneForm::from_vec(lattice, dim, data)
}

/// Smooth dual field: per component a sum of three low Fourier modes that
/// are periodic on the lattice's domain, rescaled so that the largest
/// spectral radius of `lambda(A)` over the lattice equals `target_radius`.
/// When `lambda` vanishes identically (abelian algebras) the largest
/// component magnitude is set to `target_radius` instead.
pub fn random_smooth_field<R: Real>(
    rng: &mut EnsembleRng,
    lattice: Lattice2D<R>,
    algebra: &LieAlgebraData<R>,
    target_radius: f64,
) -> Result<FieldSet<R>> {
    const MODES: usize = 3;
    let dim = algebra.dim();
    let [n0, n1] = lattice.extents();
    let [d0, d1] = lattice.spacing().map(|d| d.as_f64());
    let (l0, l1) = (n0 as f64 * d0, n1 as f64 * d1);
    let mut modes = Vec::with_capacity(dim * MODES);
    for _ in 0..dim * MODES {
        let k0 = rng.random_range(0..3) as f64;
        let k1 = rng.random_range(-2..3) as f64;
        let amp: f64 = rng.random_range(-1.0..1.0);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let offset: f64 = rng.random_range(-0.5..0.5);
        modes.push((k0, k1, amp, phase, offset));
    }
    let tau = std::f64::consts::TAU;
    let raw = FieldSet::from_fn(lattice, dim, FieldRole::Dual, |x0, x1| {
        let (x0, x1) = (x0.as_f64(), x1.as_f64());
        (0..dim)
            .map(|k| {
                let v: f64 = modes[k * MODES..(k + 1) * MODES]
                    .iter()
                    .map(|&(k0, k1, amp, phase, offset)| amp * ((tau * (k0 * x0 / l0 + k1 * x1 / l1)) + phase).sin() + offset)
                    .sum();
                R::lit(v)
            })
            .collect()
    })?;
    let mut rho = R::zero();
    for site in 0..lattice.sites() {
        let s = spectral_matrix(algebra, raw.at(site))?;
        rho = rho.max(s.spectral_radius.unwrap_or_else(R::zero));
    }
    // Abelian algebras have lambda = 0; normalize the amplitude instead.
    let reference = if rho > R::zero() { rho } else { raw.max_abs() };
    if !(reference > R::zero()) {
        return Err(Error::Config("smooth field ensemble drew an all-zero field".into()));
    }
    let s = R::lit(target_radius) / reference;
    FieldSet::from_vec(lattice, dim, FieldRole::Dual, raw.as_slice().iter().map(|&x| x * s).collect())
}

/// Rectangle `(start, width, height)` with both sides at least one link,
/// lying inside the lattice without touching a periodic seam.
pub fn random_rectangle<R: Real>(rng: &mut EnsembleRng, lattice: &Lattice2D<R>) -> ((usize, usize), usize, usize) {
    let [n0, n1] = lattice.extents();
    let w = rng.random_range(1..n0);
    let h = rng.random_range(1..n1);
    let start = (rng.random_range(0..n0 - w), rng.random_range(0..n1 - h));
    (start, w, h)
}

fn random_matrix<R: Real>(rng: &mut EnsembleRng, n: usize, diag: f64, spread: f64) -> Matrix<R> {
    Matrix::from_fn(n, |i, j| {
        let off: R = uniform(rng, -spread, spread);
        if i == j {
            R::lit(diag) + off
        } else {
            off
        }
    })
}

fn conditioned<R: Real>(m: &Matrix<R>, limit: f64) -> bool {
    matches!(m.inverse_checked("ensemble"), Ok((_, c)) if c.as_f64() <= limit)
}

/// Pair `(A, B)` for the binomial inverse identity. `A`, `B` and `A + B`
/// are all kept below condition number `100`.
pub fn random_binomial_pair<R: Real>(rng: &mut EnsembleRng, n: usize) -> Result<(Matrix<R>, Matrix<R>)> {
    const LIMIT: f64 = 100.0;
    for _ in 0..MAX_REDRAWS {
        let sa = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = random_matrix(rng, n, 2.0 * sa, 1.0);
        let b = random_matrix(rng, n, 1.0, 1.0);
        if conditioned(&a, LIMIT) && conditioned(&b, LIMIT) && conditioned(&(&a + &b), LIMIT) {
            return Ok((a, b));
        }
    }
    Err(Error::Config("binomial ensemble: no well-conditioned pair found".into()))
}

/// Pair `(C, T)` for the solve-kernel specialization: `T` symmetric and
/// invertible, `C` invertible, and `lambda^2 = (C T^-1)^2` with both
/// `lambda^2` and `1 - lambda^2` below condition number `100`. The identity
/// passes through both inverses, so its rounding error grows with the
/// product of the two conditions.
pub fn random_kernel_pair<R: Real>(rng: &mut EnsembleRng, n: usize) -> Result<(Matrix<R>, Matrix<R>)> {
    const LIMIT: f64 = 100.0;
    for _ in 0..MAX_REDRAWS {
        let m = random_matrix::<R>(rng, n, 1.5, 0.5);
        let t = &m + &m.transpose();
        let c = random_matrix(rng, n, 0.0, 1.0);
        if !conditioned(&t, LIMIT) || !conditioned(&c, LIMIT) {
            continue;
        }
        let (tinv, _) = t.inverse_checked("T")?;
        let lam = &c * &tinv;
        let x = &lam * &lam;
        if conditioned(&x, LIMIT) && conditioned(&(&Matrix::identity(n) - &x), LIMIT) {
            return Ok((c, t));
        }
    }
    Err(Error::Config("kernel ensemble: no well-conditioned pair found".into()))
}
