//! Discretized 2D Lorentzian base manifold.
//!
//! Storage order is fixed: site-major with `site = i0 * N1 + i1`, then form
//! component `alpha` (for one-forms), then generator index. Dense files and
//! golden values depend on this layout.
//!
//! Hodge convention on one-forms: `(*w)_a = w^b eps_{ba}` with
//! `w^b = h^{bc} w_c` and `eps_{01} = -eps_{10} = sqrt(|det h|)`. In
//! signature `(-, +)` this satisfies `** = +1`.

use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraData;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice2D<R: Real> {
    extents: [usize; 2],
    spacing: [R; 2],
    boundary: Boundary,
}

impl<R: Real> Lattice2D<R> {
    pub fn new(extents: [usize; 2], spacing: [R; 2], boundary: Boundary) -> Result<Self> {
        if extents.iter().any(|&n| n < 3) {
            return Err(Error::Lattice(format!(
                "extents {extents:?}: at least 3 sites per axis are required"
            )));
        }
        if spacing.iter().any(|&d| !(d > R::zero()) || !d.is_finite()) {
            return Err(Error::Lattice("spacings must be positive and finite".into()));
        }
        Ok(Self {
            extents,
            spacing,
            boundary,
        })
    }

    /// Lattice covering `[0, len0) x [0, len1)` periodically with `n` sites
    /// per axis.
    pub fn periodic_square(n: usize, lengths: [R; 2]) -> Result<Self> {
        let nn = R::from_usize_lossy(n);
        Self::new([n, n], [lengths[0] / nn, lengths[1] / nn], Boundary::Periodic)
    }

    pub fn extents(&self) -> [usize; 2] {
        self.extents
    }

    pub fn spacing(&self) -> [R; 2] {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn sites(&self) -> usize {
        self.extents[0] * self.extents[1]
    }

    #[inline]
    pub fn site_index(&self, i0: usize, i1: usize) -> usize {
        i0 * self.extents[1] + i1
    }

    #[inline]
    pub fn site_coords(&self, site: usize) -> (usize, usize) {
        (site / self.extents[1], site % self.extents[1])
    }

    /// Coordinates `(x0, x1)` of a site; the origin sits at site `(0, 0)`.
    #[inline]
    pub fn position(&self, i0: usize, i1: usize) -> [R; 2] {
        [
            R::from_usize_lossy(i0) * self.spacing[0],
            R::from_usize_lossy(i1) * self.spacing[1],
        ]
    }

    pub fn plaquette_area(&self) -> R {
        self.spacing[0] * self.spacing[1]
    }

    /// Refines by an integer factor over the same coordinate domain.
    /// Periodic lattices scale the site count; clamped ones keep both end
    /// points.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::Lattice("refinement factor must be positive".into()));
        }
        let f = R::from_usize_lossy(factor);
        let extents = match self.boundary {
            Boundary::Periodic => [self.extents[0] * factor, self.extents[1] * factor],
            Boundary::Clamped => [
                (self.extents[0] - 1) * factor + 1,
                (self.extents[1] - 1) * factor + 1,
            ],
        };
        Self::new(extents, [self.spacing[0] / f, self.spacing[1] / f], self.boundary)
    }

    /// Neighbor of `(i0, i1)` one step along `axis` in direction `sign`, if
    /// it exists (wraps on periodic lattices).
    pub fn neighbor(&self, site: (usize, usize), axis: usize, forward: bool) -> Option<(usize, usize)> {
        let n = self.extents[axis];
        let cur = if axis == 0 { site.0 } else { site.1 };
        let next = match (forward, self.boundary) {
            (true, Boundary::Periodic) => (cur + 1) % n,
            (false, Boundary::Periodic) => (cur + n - 1) % n,
            (true, Boundary::Clamped) if cur + 1 < n => cur + 1,
            (false, Boundary::Clamped) if cur > 0 => cur - 1,
            _ => return None,
        };
        Some(if axis == 0 { (next, site.1) } else { (site.0, next) })
    }

    /// Second-order first-derivative stencil along `axis` at a site:
    /// `(neighbor index along axis, weight)` triples.
    fn stencil(&self, axis: usize, at: usize) -> [(usize, R); 3] {
        let n = self.extents[axis];
        let h2 = R::lit(2.0) * self.spacing[axis];
        let z = R::zero();
        match self.boundary {
            Boundary::Periodic => [
                ((at + n - 1) % n, -R::one() / h2),
                ((at + 1) % n, R::one() / h2),
                (at, z),
            ],
            Boundary::Clamped if at == 0 => [
                (0, R::lit(-3.0) / h2),
                (1, R::lit(4.0) / h2),
                (2, R::lit(-1.0) / h2),
            ],
            Boundary::Clamped if at == n - 1 => [
                (n - 1, R::lit(3.0) / h2),
                (n - 2, R::lit(-4.0) / h2),
                (n - 3, R::lit(1.0) / h2),
            ],
            Boundary::Clamped => [(at - 1, -R::one() / h2), (at + 1, R::one() / h2), (at, z)],
        }
    }

    /// Applies the derivative stencil along `axis` to a site-major array
    /// with `width` values per site and `offset` into each site's block.
    fn partial(&self, data: &[R], stride: usize, offset: usize, width: usize, axis: usize, out: &mut [R], out_stride: usize, out_offset: usize) {
        let [n0, n1] = self.extents;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let at = if axis == 0 { i0 } else { i1 };
                let dst = self.site_index(i0, i1) * out_stride + out_offset;
                for c in 0..width {
                    out[dst + c] = R::zero();
                }
                for (idx, w) in self.stencil(axis, at) {
                    if w == R::zero() {
                        continue;
                    }
                    let src_site = if axis == 0 {
                        self.site_index(idx, i1)
                    } else {
                        self.site_index(i0, idx)
                    };
                    let src = src_site * stride + offset;
                    for c in 0..width {
                        out[dst + c] += w * data[src + c];
                    }
                }
            }
        }
    }
}

/// Constant Lorentzian metric on the base manifold and everything the Hodge
/// star needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFrame<R: Real> {
    h: [[R; 2]; 2],
    h_inv: [[R; 2]; 2],
    h_prime: R,
    epsilon: [[R; 2]; 2],
    hodge: [[R; 2]; 2],
}

impl<R: Real> LorentzFrame<R> {
    pub fn new(h: [[R; 2]; 2]) -> Result<Self> {
        if h.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("metric"));
        }
        let asym = (h[0][1] - h[1][0]).abs();
        let scale = h.iter().flatten().fold(R::zero(), |a, b| a.max(b.abs()));
        if asym > R::identity_tol() * scale {
            return Err(Error::Config("metric must be symmetric".into()));
        }
        let off = (h[0][1] + h[1][0]) * R::lit(0.5);
        let h = [[h[0][0], off], [off, h[1][1]]];
        let det = h[0][0] * h[1][1] - off * off;
        if !(det < R::zero()) {
            return Err(Error::NotLorentzian(det.as_f64()));
        }
        let h_inv = [[h[1][1] / det, -off / det], [-off / det, h[0][0] / det]];
        let h_prime = det.abs().sqrt();
        let epsilon = [[R::zero(), h_prime], [-h_prime, R::zero()]];
        // (*w)_a = sum_c S[a][c] w_c with S[a][c] = sum_b h^{bc} eps_{ba}
        let mut hodge = [[R::zero(); 2]; 2];
        for (a, row) in hodge.iter_mut().enumerate() {
            for (c, s) in row.iter_mut().enumerate() {
                *s = (0..2).fold(R::zero(), |acc, b| acc + h_inv[b][c] * epsilon[b][a]);
            }
        }
        Ok(Self {
            h,
            h_inv,
            h_prime,
            epsilon,
            hodge,
        })
    }

    /// `h = diag(-1, 1)`.
    pub fn minkowski() -> Self {
        Self::new([[-R::one(), R::zero()], [R::zero(), R::one()]]).expect("Minkowski is Lorentzian")
    }

    pub fn metric(&self) -> [[R; 2]; 2] {
        self.h
    }

    pub fn inverse(&self) -> [[R; 2]; 2] {
        self.h_inv
    }

    /// `h' = sqrt(|det h|)`.
    pub fn volume_factor(&self) -> R {
        self.h_prime
    }

    /// Densitized `eps_{ab}`.
    pub fn epsilon(&self) -> [[R; 2]; 2] {
        self.epsilon
    }

    /// Matrix of the Hodge star on one-form components.
    pub fn hodge_matrix(&self) -> [[R; 2]; 2] {
        self.hodge
    }

    #[inline]
    pub fn hodge_components(&self, w: [R; 2]) -> [R; 2] {
        [
            self.hodge[0][0] * w[0] + self.hodge[0][1] * w[1],
            self.hodge[1][0] * w[0] + self.hodge[1][1] * w[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    /// Dual (Lagrange multiplier) scalars `A_k`.
    Dual,
    /// Exponential coordinates `phi^m` of the group-valued map.
    Original,
}

/// Per-site multiplet of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet<R: Real> {
    lattice: Lattice2D<R>,
    dim: usize,
    role: FieldRole,
    data: Vec<R>,
}

impl<R: Real> FieldSet<R> {
    pub fn from_vec(lattice: Lattice2D<R>, dim: usize, role: FieldRole, data: Vec<R>) -> Result<Self> {
        if data.len() != lattice.sites() * dim {
            return Err(Error::DimensionMismatch {
                what: "field data",
                expected: lattice.sites() * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("field data"));
        }
        Ok(Self {
            lattice,
            dim,
            role,
            data,
        })
    }

    pub fn zeros(lattice: Lattice2D<R>, dim: usize, role: FieldRole) -> Self {
        Self {
            lattice,
            dim,
            role,
            data: vec![R::zero(); lattice.sites() * dim],
        }
    }

    /// Samples `f(x0, x1)` (returning `dim` values) at every site.
    pub fn from_fn(lattice: Lattice2D<R>, dim: usize, role: FieldRole, mut f: impl FnMut(R, R) -> Vec<R>) -> Result<Self> {
        let [n0, n1] = lattice.extents();
        let mut data = Vec::with_capacity(lattice.sites() * dim);
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let [x0, x1] = lattice.position(i0, i1);
                let v = f(x0, x1);
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        what: "sampled multiplet",
                        expected: dim,
                        found: v.len(),
                    });
                }
                data.extend(v);
            }
        }
        Self::from_vec(lattice, dim, role, data)
    }

    pub fn lattice(&self) -> &Lattice2D<R> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn as_slice(&self) -> &[R] {
        &self.data
    }

    #[inline]
    pub fn at(&self, site: usize) -> &[R] {
        &self.data[site * self.dim..(site + 1) * self.dim]
    }

    pub fn with_role(mut self, role: FieldRole) -> Self {
        self.role = role;
        self
    }

    pub fn max_abs(&self) -> R {
        max_abs(&self.data)
    }
}

/// Lie-algebra-valued one-form: components `w^m_a` per site.
#[derive(Debug, Clone, PartialEq)]
pub struct LieOneForm<R: Real> {
    lattice: Lattice2D<R>,
    dim: usize,
    data: Vec<R>,
}

impl<R: Real> LieOneForm<R> {
    pub fn zeros(lattice: Lattice2D<R>, dim: usize) -> Self {
        Self {
            lattice,
            dim,
            data: vec![R::zero(); lattice.sites() * 2 * dim],
        }
    }

    pub fn from_vec(lattice: Lattice2D<R>, dim: usize, data: Vec<R>) -> Result<Self> {
        if data.len() != lattice.sites() * 2 * dim {
            return Err(Error::DimensionMismatch {
                what: "one-form data",
                expected: lattice.sites() * 2 * dim,
                found: data.len(),
            });
        }
        Ok(Self { lattice, dim, data })
    }

    /// Samples `f(x0, x1) -> (w_0, w_1)`, each of length `dim`.
    pub fn from_fn(lattice: Lattice2D<R>, dim: usize, mut f: impl FnMut(R, R) -> [Vec<R>; 2]) -> Self {
        let mut out = Self::zeros(lattice, dim);
        let [n0, n1] = lattice.extents();
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let [x0, x1] = lattice.position(i0, i1);
                let site = lattice.site_index(i0, i1);
                let [w0, w1] = f(x0, x1);
                out.component_mut(site, 0).copy_from_slice(&w0);
                out.component_mut(site, 1).copy_from_slice(&w1);
            }
        }
        out
    }

    pub fn lattice(&self) -> &Lattice2D<R> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[R] {
        &self.data
    }

    /// Generator vector of component `alpha` at a site.
    #[inline]
    pub fn component(&self, site: usize, alpha: usize) -> &[R] {
        let start = (site * 2 + alpha) * self.dim;
        &self.data[start..start + self.dim]
    }

    #[inline]
    pub fn component_mut(&mut self, site: usize, alpha: usize) -> &mut [R] {
        let start = (site * 2 + alpha) * self.dim;
        &mut self.data[start..start + self.dim]
    }

    /// Pointwise map over sites: `f(site, w_0, w_1) -> (v_0, v_1)`.
    pub fn map_sites(&self, mut f: impl FnMut(usize, &[R], &[R]) -> [Vec<R>; 2]) -> Self {
        let mut out = Self::zeros(self.lattice, self.dim);
        for site in 0..self.lattice.sites() {
            let [a, b] = f(site, self.component(site, 0), self.component(site, 1));
            out.component_mut(site, 0).copy_from_slice(&a);
            out.component_mut(site, 1).copy_from_slice(&b);
        }
        out
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(R, R) -> R) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        Self {
            lattice: self.lattice,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: R) -> Self {
        Self {
            lattice: self.lattice,
            dim: self.dim,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> R {
        max_abs(&self.data)
    }

    /// Restricts to a single generator `m`, as a one-generator form.
    pub fn generator(&self, m: usize) -> Self {
        let mut out = Self::zeros(self.lattice, 1);
        for site in 0..self.lattice.sites() {
            for alpha in 0..2 {
                out.component_mut(site, alpha)[0] = self.component(site, alpha)[m];
            }
        }
        out
    }

    /// Places a one-generator form along generator `m` of a `dim`-dimensional
    /// algebra.
    pub fn embed(&self, dim: usize, m: usize) -> Self {
        let mut out = Self::zeros(self.lattice, dim);
        for site in 0..self.lattice.sites() {
            for alpha in 0..2 {
                out.component_mut(site, alpha)[m] = self.component(site, alpha)[0];
            }
        }
        out
    }
}

/// Coefficient of `dx^0 ^ dx^1`, per site and generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LieTwoForm<R: Real> {
    lattice: Lattice2D<R>,
    dim: usize,
    data: Vec<R>,
}

impl<R: Real> LieTwoForm<R> {
    pub fn zeros(lattice: Lattice2D<R>, dim: usize) -> Self {
        Self {
            lattice,
            dim,
            data: vec![R::zero(); lattice.sites() * dim],
        }
    }

    pub fn lattice(&self) -> &Lattice2D<R> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[R] {
        &self.data
    }

    #[inline]
    pub fn at(&self, site: usize) -> &[R] {
        &self.data[site * self.dim..(site + 1) * self.dim]
    }

    #[inline]
    pub fn at_mut(&mut self, site: usize) -> &mut [R] {
        &mut self.data[site * self.dim..(site + 1) * self.dim]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            lattice: self.lattice,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn max_abs(&self) -> R {
        max_abs(&self.data)
    }
}

pub(crate) fn max_abs<R: Real>(data: &[R]) -> R {
    data.iter().fold(R::zero(), |a, &b| a.max(b.abs()))
}

/// Hodge star of a Lie-valued one-form, generator by generator.
pub fn hodge_oneform<R: Real>(w: &LieOneForm<R>, frame: &LorentzFrame<R>) -> LieOneForm<R> {
    let s = frame.hodge_matrix();
    w.map_sites(|_, w0, w1| {
        let a = w0.iter().zip(w1).map(|(&x, &y)| s[0][0] * x + s[0][1] * y).collect();
        let b = w0.iter().zip(w1).map(|(&x, &y)| s[1][0] * x + s[1][1] * y).collect();
        [a, b]
    })
}

/// Exterior derivative of a scalar multiplet by second-order stencils.
pub fn d_scalar<R: Real>(f: &FieldSet<R>) -> LieOneForm<R> {
    let lat = f.lattice;
    let n = f.dim;
    let mut out = LieOneForm::zeros(lat, n);
    for axis in 0..2 {
        lat.partial(&f.data, n, 0, n, axis, &mut out.data, 2 * n, axis * n);
    }
    out
}

/// `d w` with coefficient `d_0 w_1 - d_1 w_0`, same stencils as
/// [`d_scalar`].
pub fn d_oneform<R: Real>(w: &LieOneForm<R>) -> LieTwoForm<R> {
    let lat = w.lattice;
    let n = w.dim;
    let mut d0w1 = vec![R::zero(); lat.sites() * n];
    let mut d1w0 = vec![R::zero(); lat.sites() * n];
    lat.partial(&w.data, 2 * n, n, n, 0, &mut d0w1, n, 0);
    lat.partial(&w.data, 2 * n, 0, n, 1, &mut d1w0, n, 0);
    LieTwoForm {
        lattice: lat,
        dim: n,
        data: d0w1.iter().zip(&d1w0).map(|(&a, &b)| a - b).collect(),
    }
}

fn check_shapes<R: Real>(w: &LieOneForm<R>, v: &LieOneForm<R>, dim: usize) -> Result<()> {
    if w.lattice != v.lattice || w.data.len() != v.data.len() {
        return Err(Error::DimensionMismatch {
            what: "one-form shapes",
            expected: w.data.len(),
            found: v.data.len(),
        });
    }
    if w.dim != dim {
        return Err(Error::DimensionMismatch {
            what: "one-form generator count",
            expected: dim,
            found: w.dim,
        });
    }
    Ok(())
}

/// Full bracket wedge `[w ^ v]`: coefficient `C^l_{mn} (w^m_0 v^n_1 - w^m_1 v^n_0)`.
pub fn bracket_wedge<R: Real>(w: &LieOneForm<R>, v: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<LieTwoForm<R>> {
    let n = algebra.dim();
    check_shapes(w, v, n)?;
    check_shapes(v, w, n)?;
    let mut out = LieTwoForm::zeros(w.lattice, n);
    if algebra.is_abelian() {
        return Ok(out);
    }
    for site in 0..w.lattice.sites() {
        let (w0, w1) = (w.component(site, 0), w.component(site, 1));
        let (v0, v1) = (v.component(site, 0), v.component(site, 1));
        let a = algebra.bracket(w0, v1);
        let b = algebra.bracket(w1, v0);
        for (o, (x, y)) in out.at_mut(site).iter_mut().zip(a.into_iter().zip(b)) {
            *o = x - y;
        }
    }
    Ok(out)
}

/// Half bracket wedge `1/2 [w ^ v]`, so that `wedge_bracket(w, w)` is the
/// `w ^ w` term of the curvature `dw + w ^ w` (coefficient
/// `C^l_{mn} w^m_0 w^n_1`).
pub fn wedge_bracket<R: Real>(w: &LieOneForm<R>, v: &LieOneForm<R>, algebra: &LieAlgebraData<R>) -> Result<LieTwoForm<R>> {
    let mut out = bracket_wedge(w, v, algebra)?;
    let half = R::lit(0.5);
    out.data.iter_mut().for_each(|x| *x *= half);
    Ok(out)
}

/// Plain wedge of two scalar one-forms, `w_0 v_1 - w_1 v_0`.
#[inline]
pub fn wedge_scalar<R: Real>(w: [R; 2], v: [R; 2]) -> R {
    w[0] * v[1] - w[1] * v[0]
}

/// Metric-contracted wedge `g_{mn} w^m ^ v^n`, per site.
pub fn wedge_contracted<R: Real>(w: &LieOneForm<R>, v: &LieOneForm<R>, g: &crate::matrix::Matrix<R>) -> Result<Vec<R>> {
    check_shapes(w, v, g.dim())?;
    Ok((0..w.lattice.sites())
        .map(|site| {
            let gv1 = g.mul_vec(v.component(site, 1));
            let gv0 = g.mul_vec(v.component(site, 0));
            let a: R = w.component(site, 0).iter().zip(&gv1).map(|(&x, &y)| x * y).sum();
            let b: R = w.component(site, 1).iter().zip(&gv0).map(|(&x, &y)| x * y).sum();
            a - b
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Configuration block
// ---------------------------------------------------------------------------

/// JSON lattice/metric block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub extents: [usize; 2],
    pub spacing: [f64; 2],
    pub boundary: Boundary,
    #[serde(default = "default_metric")]
    pub metric: [[f64; 2]; 2],
}

fn default_metric() -> [[f64; 2]; 2] {
    [[-1.0, 0.0], [0.0, 1.0]]
}

impl LatticeConfig {
    pub fn build<R: Real>(&self) -> Result<(Lattice2D<R>, LorentzFrame<R>)> {
        let lattice = Lattice2D::new(self.extents, [R::lit(self.spacing[0]), R::lit(self.spacing[1])], self.boundary)?;
        let h = self.metric.map(|row| row.map(R::lit));
        Ok((lattice, LorentzFrame::new(h)?))
    }
}
