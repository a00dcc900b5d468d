use serde::Serialize;

use crate::geometry::Lattice2D;
use crate::scalar::Real;

/// Norms of a pointwise residual field plus where it peaks.
///
/// `l2_norm` is the root mean square over all entries, so it is comparable
/// across resolutions. `relative` is `max_norm / scale`, defined as `0` when
/// both vanish.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport<R: Real> {
    pub name: String,
    pub max_norm: R,
    pub l2_norm: R,
    pub scale: R,
    pub relative: R,
    pub worst_site: Option<(usize, usize)>,
    pub worst_entry: Option<usize>,
    /// Raw residual, `width` entries per site (site-major).
    #[serde(skip)]
    pub pointwise: Vec<R>,
    #[serde(skip)]
    pub width: usize,
}

impl<R: Real> ResidualReport<R> {
    /// Residual over lattice sites, `width` entries per site.
    pub fn from_field(name: impl Into<String>, lattice: &Lattice2D<R>, width: usize, values: Vec<R>, scale: R) -> Self {
        let mut r = Self::from_values(name, values, scale);
        r.width = width;
        if let Some(idx) = r.worst_entry {
            r.worst_site = Some(lattice.site_coords(idx / width.max(1)));
            r.worst_entry = Some(idx % width.max(1));
        }
        r
    }

    /// Residual with no lattice structure (e.g. matrix identities).
    pub fn from_values(name: impl Into<String>, values: Vec<R>, scale: R) -> Self {
        let mut max = R::zero();
        let mut worst = None;
        let mut sq = R::zero();
        for (i, &v) in values.iter().enumerate() {
            let a = v.abs();
            sq += a * a;
            if a > max || (a.is_nan() && !max.is_nan()) {
                max = a;
                worst = Some(i);
            }
        }
        let l2 = if values.is_empty() {
            R::zero()
        } else {
            (sq / R::from_usize_lossy(values.len())).sqrt()
        };
        Self {
            name: name.into(),
            max_norm: max,
            l2_norm: l2,
            scale,
            relative: relative(max, scale),
            worst_site: None,
            worst_entry: worst,
            width: 1,
            pointwise: values,
        }
    }

    pub fn rescaled(mut self, scale: R) -> Self {
        self.scale = scale;
        self.relative = relative(self.max_norm, scale);
        self
    }

    /// Largest absolute entry at each site.
    pub fn per_site_max(&self) -> Vec<R> {
        self.pointwise
            .chunks(self.width.max(1))
            .map(|c| c.iter().fold(R::zero(), |a, &b| a.max(b.abs())))
            .collect()
    }
}

pub(crate) fn relative<R: Real>(value: R, scale: R) -> R {
    if value == R::zero() {
        R::zero()
    } else if scale > R::zero() {
        value / scale
    } else {
        R::infinity()
    }
}
