//! Pointwise Minkowski geometry on R^{1+n}: shifted null coordinates about a
//! center event, null-cone exteriors, chronological relations, and the
//! (T, N) frame adapted to the hyperboloids f = const.
//!
//! Conventions: metric signature (-, +, ..., +), geometric units c = 1.
//! For a center P, the shifted coordinates are t_P = t - t(P), x_P = x - x(P),
//! r_P = |x_P|, u_P = (t_P - r_P)/2, v_P = (t_P + r_P)/2, f_P = -u_P v_P.

use crate::error::{Error, Result};

/// An event (t, x) in R^{1+n}.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: Vec<f64>,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: Vec<f64>) -> Self {
        assert!(!x.is_empty(), "spatial dimension must be at least 1");
        assert!(t.is_finite() && x.iter().all(|c| c.is_finite()));
        SpacetimePoint { t, x }
    }

    /// Convenience constructor for 1+1 dimensions.
    pub fn on_line(t: f64, x: f64) -> Self {
        Self::new(t, vec![x])
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Shifted null data of a point relative to a center.
#[derive(Clone, Copy, Debug)]
pub struct NullCoords {
    /// shifted radius r_P >= 0
    pub r: f64,
    /// retarded coordinate u_P = (t_P - r_P)/2
    pub u: f64,
    /// advanced coordinate v_P = (t_P + r_P)/2
    pub v: f64,
    /// hyperbolic function f_P = -u_P v_P
    pub f: f64,
}

impl NullCoords {
    /// Reconstruct (t_P, r_P) from the null pair.
    pub fn reconstruct(&self) -> (f64, f64) {
        (self.u + self.v, self.v - self.u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChronologicalRelation {
    Future,
    Past,
    None,
}

/// Coefficients of the cone-adapted frame vectors in the (d_u, d_v) basis:
/// T = (1/2) f^{-1/2} (-u d_u + v d_v),  N = (1/2) f^{-1/2} (u d_u + v d_v).
#[derive(Clone, Copy, Debug)]
pub struct ConeFrame {
    pub t_coeffs: (f64, f64),
    pub n_coeffs: (f64, f64),
}

pub fn null_coords(p: &SpacetimePoint, center: &SpacetimePoint) -> NullCoords {
    assert_eq!(p.dim(), center.dim(), "dimension mismatch");
    let t = p.t - center.t;
    let r2: f64 = p
        .x
        .iter()
        .zip(center.x.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let r = r2.sqrt();
    let u = 0.5 * (t - r);
    let v = 0.5 * (t + r);
    NullCoords { r, u, v, f: -u * v }
}

/// True iff p lies in D_P = { f_P > 0 }, the open exterior of the null cone
/// about the center. Points on the cone (f_P = 0) are excluded.
pub fn in_cone_exterior(p: &SpacetimePoint, center: &SpacetimePoint) -> bool {
    null_coords(p, center).f > 0.0
}

/// Chronological relation of p to q: future iff f_q(p) < 0 and t_q(p) > 0.
pub fn chronological_relation(p: &SpacetimePoint, q: &SpacetimePoint) -> ChronologicalRelation {
    let nc = null_coords(p, q);
    let t = p.t - q.t;
    if nc.f < 0.0 && t > 0.0 {
        ChronologicalRelation::Future
    } else if nc.f < 0.0 && t < 0.0 {
        ChronologicalRelation::Past
    } else {
        ChronologicalRelation::None
    }
}

/// The (T, N) frame at a cone-exterior point; rejects f_P <= 0.
pub fn cone_frame(p: &SpacetimePoint, center: &SpacetimePoint) -> Result<ConeFrame> {
    let nc = null_coords(p, center);
    cone_frame_from_null(nc.u, nc.v)
}

/// Same frame directly from null coordinates.
pub fn cone_frame_from_null(u: f64, v: f64) -> Result<ConeFrame> {
    let f = -u * v;
    if f <= 0.0 {
        return Err(Error::OutsideCone { f });
    }
    let s = 0.5 / f.sqrt();
    Ok(ConeFrame {
        t_coeffs: (-s * u, s * v),
        n_coeffs: (s * u, s * v),
    })
}

impl ConeFrame {
    /// Apply the frame vector T to a scalar with null-coordinate gradient
    /// (df/du, df/dv).
    pub fn t_derivative(&self, du: f64, dv: f64) -> f64 {
        self.t_coeffs.0 * du + self.t_coeffs.1 * dv
    }

    pub fn n_derivative(&self, du: f64, dv: f64) -> f64 {
        self.n_coeffs.0 * du + self.n_coeffs.1 * dv
    }
}
