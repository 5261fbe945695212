//! The epsilon-warped geometry: warped radius and metric coefficients in
//! null coordinates, the conformal map relating the warped and flat
//! pictures, the Carleman weights and conjugation functions, and the
//! nonzero Christoffel symbols and Hessian components used by the
//! pointwise estimate checks.
//!
//! All quantities live on the cone exterior D = { -uv > 0 } and are
//! expressed in null coordinates (u, v) with the angular sphere carrying
//! the warped radius rho = r + 2 eps f.

use crate::error::{Error, Result};
use crate::jet::Jet3;

/// Warping factor and spatial dimension.
#[derive(Clone, Copy, Debug)]
pub struct WarpParams {
    pub epsilon: f64,
    pub n: usize,
}

impl WarpParams {
    pub fn new(epsilon: f64, n: usize) -> Self {
        assert!(n >= 1 && epsilon.is_finite());
        WarpParams { epsilon, n }
    }
}

/// Concretization of the parameter hierarchy a >= n^2, eps << b << 1/R:
/// eps <= b / (EPS_OVER_B_PER_N n) and b <= 1 / (B_TIMES_R R).
pub const EPS_OVER_B_PER_N: f64 = 100.0;
pub const B_TIMES_R: f64 = 10.0;

/// Carleman parameter triple (a, b, eps) with the domain radius bound R.
#[derive(Clone, Copy, Debug)]
pub struct CarlemanParams {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub radius: f64,
    pub n: usize,
}

impl CarlemanParams {
    pub fn new(a: f64, b: f64, epsilon: f64, radius: f64, n: usize) -> Result<Self> {
        let p = CarlemanParams { a, b, epsilon, radius, n };
        p.validate()?;
        Ok(p)
    }

    /// Default admissible choice for a given radius bound and dimension:
    /// a = n^2, b = 1/(10R), eps = b/(100n).
    pub fn admissible(radius: f64, n: usize) -> Self {
        let b = 1.0 / (B_TIMES_R * radius);
        CarlemanParams {
            a: (n * n) as f64,
            b,
            epsilon: b / (EPS_OVER_B_PER_N * n as f64),
            radius,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if !(self.a > 0.0 && self.b > 0.0 && self.epsilon > 0.0 && self.radius > 0.0) {
            return Err(Error::InvalidParams(
                "carleman parameters must be positive".into(),
            ));
        }
        if self.a < nf * nf {
            return Err(Error::InvalidParams(format!(
                "a = {} below n^2 = {}",
                self.a,
                nf * nf
            )));
        }
        if self.epsilon > self.b / (EPS_OVER_B_PER_N * nf) {
            return Err(Error::InvalidParams(format!(
                "epsilon = {} exceeds b/({}n) = {}",
                self.epsilon,
                EPS_OVER_B_PER_N,
                self.b / (EPS_OVER_B_PER_N * nf)
            )));
        }
        if self.b > 1.0 / (B_TIMES_R * self.radius) {
            return Err(Error::InvalidParams(format!(
                "b = {} exceeds 1/({}R) = {}",
                self.b,
                B_TIMES_R,
                1.0 / (B_TIMES_R * self.radius)
            )));
        }
        Ok(())
    }

    pub fn warp(&self) -> WarpParams {
        WarpParams { epsilon: self.epsilon, n: self.n }
    }
}

/// Pointwise warped-geometry scalars at (u, v).
#[derive(Clone, Copy, Debug)]
pub struct WarpedScalars {
    pub r: f64,
    pub f: f64,
    /// warped radius rho = r + 2 eps f
    pub rho: f64,
    /// h = 1/2 + eps f / (2 rho)
    pub h: f64,
    /// w = (n-1)/4 + (n-2) eps f / (2 rho)
    pub w: f64,
    /// conformal factor xi = (1 + eps u)(1 - eps v)
    pub xi: f64,
    /// F(f) = -a (log f + 2 b f^{1/2}); NaN without Carleman parameters
    pub f_conj: f64,
    /// F'(f) = -a (f^{-1} + b f^{-1/2})
    pub f_conj_prime: f64,
    /// A(f) = a^2 f^{-1} + b a (2a - 1/2) f^{-1/2} + b^2 a^2
    pub a_fn: f64,
}

fn raw_rho(u: f64, v: f64, epsilon: f64) -> f64 {
    (v - u) + 2.0 * epsilon * (-u * v)
}

/// Evaluate the warped scalar family; F, F', A require f > 0 and Carleman
/// parameters (they are NaN when `carleman` is None and an error when f <= 0
/// with parameters supplied).
pub fn warped_scalars(
    u: f64,
    v: f64,
    warp: WarpParams,
    carleman: Option<&CarlemanParams>,
) -> Result<WarpedScalars> {
    let eps = warp.epsilon;
    let f = -u * v;
    let r = v - u;
    let rho = raw_rho(u, v, eps);
    let h = 0.5 + eps * f / (2.0 * rho);
    let nf = warp.n as f64;
    let w = (nf - 1.0) / 4.0 + (nf - 2.0) * eps * f / (2.0 * rho);
    let xi = (1.0 + eps * u) * (1.0 - eps * v);
    let (f_conj, f_conj_prime, a_fn) = match carleman {
        None => (f64::NAN, f64::NAN, f64::NAN),
        Some(p) => {
            if f <= 0.0 {
                return Err(Error::OutsideCone { f });
            }
            let sf = f.sqrt();
            (
                -p.a * (f.ln() + 2.0 * p.b * sf),
                -p.a * (1.0 / f + p.b / sf),
                p.a * p.a / f + p.b * p.a * (2.0 * p.a - 0.5) / sf + p.b * p.b * p.a * p.a,
            )
        }
    };
    Ok(WarpedScalars { r, f, rho, h, w, xi, f_conj, f_conj_prime, a_fn })
}

/// (f A(f))' = (1/2) b a (2a - 1/2) f^{-1/2} + b^2 a^2.
pub fn f_a_prime(f: f64, p: &CarlemanParams) -> f64 {
    0.5 * p.b * p.a * (2.0 * p.a - 0.5) / f.sqrt() + p.b * p.b * p.a * p.a
}

/// Warped wave operator applied to f: (n+1)/2 + (n-1) eps f / rho.
pub fn box_f(u: f64, v: f64, warp: WarpParams) -> f64 {
    let nf = warp.n as f64;
    let f = -u * v;
    let rho = raw_rho(u, v, warp.epsilon);
    (nf + 1.0) / 2.0 + (nf - 1.0) * warp.epsilon * f / rho
}

/// Warped wave operator applied to f/rho.
pub fn box_f_over_rho(u: f64, v: f64, warp: WarpParams) -> f64 {
    let nf = warp.n as f64;
    let eps = warp.epsilon;
    let f = -u * v;
    let rho = raw_rho(u, v, eps);
    (nf - 1.0) / (2.0 * rho) * (1.0 - 2.0 * eps * f / rho) - (nf - 3.0) * f / (rho * rho * rho)
}

/// Warped wave operator applied to w.
pub fn box_w(u: f64, v: f64, warp: WarpParams) -> f64 {
    let nf = warp.n as f64;
    let eps = warp.epsilon;
    let f = -u * v;
    let rho = raw_rho(u, v, eps);
    -(nf - 2.0) * eps / (2.0 * rho)
        * ((nf - 3.0) * f / (rho * rho) - (nf - 1.0) / 2.0 * (1.0 - 2.0 * eps * f / rho))
}

/// Closed forms for the first derivatives of f/rho:
/// d_u (f/rho) = -v^2/rho^2, d_v (f/rho) = u^2/rho^2.
pub fn f_over_rho_derivs(u: f64, v: f64, epsilon: f64) -> (f64, f64) {
    let rho = raw_rho(u, v, epsilon);
    (-v * v / (rho * rho), u * u / (rho * rho))
}

/// Result of the conformal map Phi-bar and its factor.
#[derive(Clone, Copy, Debug)]
pub struct ConformalImage {
    pub u_bar: f64,
    pub v_bar: f64,
    pub xi: f64,
}

/// Phi-bar(u, v) = (u/(1 + eps u), v/(1 - eps v)); rejects singular
/// denominators.
pub fn conformal_map(u: f64, v: f64, epsilon: f64) -> Result<ConformalImage> {
    let du = 1.0 + epsilon * u;
    let dv = 1.0 - epsilon * v;
    if du == 0.0 || dv == 0.0 {
        return Err(Error::InvalidParams(format!(
            "conformal map singular at (u, v) = ({u}, {v}) for eps = {epsilon}"
        )));
    }
    Ok(ConformalImage { u_bar: u / du, v_bar: v / dv, xi: du * dv })
}

/// Inverse map: u = u_bar/(1 - eps u_bar), v = v_bar/(1 + eps v_bar).
pub fn conformal_map_inverse(u_bar: f64, v_bar: f64, epsilon: f64) -> Result<(f64, f64)> {
    let du = 1.0 - epsilon * u_bar;
    let dv = 1.0 + epsilon * v_bar;
    if du == 0.0 || dv == 0.0 {
        return Err(Error::InvalidParams("inverse conformal map singular".into()));
    }
    Ok((u_bar / du, v_bar / dv))
}

/// The flat-picture Carleman weight
/// zeta^P = { f/xi exp[ 2 b f^{1/2} / ((1 - eps u)^{1/2} (1 + eps v)^{1/2}) ] }^{2a},
/// evaluated in shifted null coordinates about the center.
pub fn carleman_weight_shifted(u: f64, v: f64, p: &CarlemanParams) -> Result<f64> {
    let f = -u * v;
    if f <= 0.0 {
        return Err(Error::OutsideCone { f });
    }
    let eps = p.epsilon;
    let xi = (1.0 + eps * u) * (1.0 - eps * v);
    let denom = ((1.0 - eps * u) * (1.0 + eps * v)).sqrt();
    let base = f / xi * (2.0 * p.b * f.sqrt() / denom).exp();
    Ok(base.powf(2.0 * p.a))
}

/// The warped-picture weight zeta_{a,b} = f^{2a} e^{4 a b f^{1/2}}.
pub fn warped_weight(f: f64, p: &CarlemanParams) -> Result<f64> {
    if f <= 0.0 {
        return Err(Error::OutsideCone { f });
    }
    Ok(f.powf(2.0 * p.a) * (4.0 * p.a * p.b * f.sqrt()).exp())
}

/// Nonzero Christoffel symbols of the warped metric in null coordinates,
/// reported through their scalar multipliers:
/// Gamma^u_{ab} = c_u_sph * g_{ab}, Gamma^v_{ab} = c_v_sph * g_{ab},
/// Gamma^a_{ub} = c_sph_u * delta^a_b, Gamma^a_{vb} = c_sph_v * delta^a_b.
#[derive(Clone, Copy, Debug)]
pub struct WarpedChristoffels {
    pub c_u_sph: f64,
    pub c_v_sph: f64,
    pub c_sph_u: f64,
    pub c_sph_v: f64,
}

pub fn warped_christoffels(u: f64, v: f64, epsilon: f64) -> Result<WarpedChristoffels> {
    let rho = raw_rho(u, v, epsilon);
    if rho == 0.0 {
        return Err(Error::ZeroRadius);
    }
    Ok(WarpedChristoffels {
        c_u_sph: (1.0 - 2.0 * epsilon * u) / (2.0 * rho),
        c_v_sph: -(1.0 + 2.0 * epsilon * v) / (2.0 * rho),
        c_sph_u: -(1.0 + 2.0 * epsilon * v) / rho,
        c_sph_v: (1.0 - 2.0 * epsilon * u) / rho,
    })
}

/// Components of the warped Hessian of f and the modified deformation
/// tensor pi.
#[derive(Clone, Copy, Debug)]
pub struct HessianF {
    /// nabla_{uv} f (identically -1)
    pub uv: f64,
    /// spherical multiplier: nabla_{ab} f = (1/2 + eps f / rho) g_{ab}
    pub sph: f64,
    /// frame values nabla_{TT} f and nabla_{NN} f (need f > 0)
    pub tt: f64,
    pub nn: f64,
    /// box f
    pub box_f: f64,
    /// pi_{TT} = eps f / (2 rho) = -pi_{NN}; pi_{ab} = pi_{TT} g_{ab}
    pub pi_tt: f64,
}

pub fn warped_hessian_f(u: f64, v: f64, warp: WarpParams) -> Result<HessianF> {
    let eps = warp.epsilon;
    let f = -u * v;
    let rho = raw_rho(u, v, eps);
    if rho == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let (tt, nn) = if f > 0.0 {
        // frame contraction of the (u,v) block through T, N
        (-0.5, 0.5)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(HessianF {
        uv: -1.0,
        sph: 0.5 + eps * f / rho,
        tt,
        nn,
        box_f: box_f(u, v, warp),
        pi_tt: eps * f / (2.0 * rho),
    })
}

/// Warped wave operator applied to an axially symmetric scalar given as a
/// jet in (u, v, theta); `cot_theta` supplies the angular connection term
/// (0 for n = 1 or 2, cot(theta) for the meridian parametrization on S^2).
pub fn box_scalar(j: &Jet3, u: f64, v: f64, warp: WarpParams, cot_theta: f64) -> f64 {
    let nf = warp.n as f64;
    let eps = warp.epsilon;
    let rho = raw_rho(u, v, eps);
    let mut out = -j.hess[0][1]
        - (nf - 1.0) / (2.0 * rho) * ((1.0 - 2.0 * eps * u) * j.grad[0] - (1.0 + 2.0 * eps * v) * j.grad[1]);
    if warp.n >= 2 {
        // angular Laplacian of the symmetric mode, scaled by rho^{-2}
        out += (j.hess[2][2] + cot_theta * j.grad[2]) / (rho * rho);
    }
    out
}

/// Jets of the basic radial scalars in the (u, v, theta) variables.
pub fn jet_f(u: f64, v: f64) -> Jet3 {
    let ju = Jet3::var(u, 0);
    let jv = Jet3::var(v, 1);
    -(ju * jv)
}

pub fn jet_rho(u: f64, v: f64, epsilon: f64) -> Jet3 {
    let ju = Jet3::var(u, 0);
    let jv = Jet3::var(v, 1);
    (jv - ju) + (-(ju * jv)) * (2.0 * epsilon)
}

pub fn jet_w(u: f64, v: f64, warp: WarpParams) -> Jet3 {
    let nf = warp.n as f64;
    let f = jet_f(u, v);
    let rho = jet_rho(u, v, warp.epsilon);
    Jet3::constant((nf - 1.0) / 4.0) + f / rho * ((nf - 2.0) * warp.epsilon / 2.0)
}

/// exp(-F) = f^a e^{2 a b sqrt(f)} as a jet (the half-weight entering the
/// reversed current).
pub fn jet_exp_minus_f_conj(u: f64, v: f64, p: &CarlemanParams) -> Jet3 {
    let f = jet_f(u, v);
    (f.ln() * p.a + f.sqrt() * (2.0 * p.a * p.b)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sample_exterior(rng: &mut impl Rng, r_max: f64) -> (f64, f64) {
        // 0 < -u < r, 0 < v < r with r < r_max, kept away from the cone so
        // finite-difference comparisons stay clean
        loop {
            let u = -rng.gen_range(0.05..r_max / 2.0);
            let v = rng.gen_range(0.05..r_max / 2.0);
            if -u * v > 1e-2 * r_max * r_max / 4.0 {
                return (u, v);
            }
        }
    }

    #[test]
    fn unwarped_reduction() {
        let w = warped_scalars(-0.7, 0.9, WarpParams::new(0.0, 3), None).unwrap();
        assert_eq!(w.rho, w.r);
        assert_eq!(w.h, 0.5);
        assert_eq!(w.w, (3.0 - 1.0) / 4.0);
        assert_eq!(w.xi, 1.0);
    }

    #[test]
    fn conjugation_derivative_values() {
        // F' = -a (1/f + b f^{-1/2}); at a=4, b=0.5, f=1: -6
        let p = CarlemanParams { a: 4.0, b: 0.5, epsilon: 1e-4, radius: 0.1, n: 1 };
        let w = warped_scalars(-1.0, 1.0, p.warp(), Some(&p)).unwrap();
        assert!((w.f_conj_prime + 6.0).abs() < 1e-14);

        // A = a^2/f at b = 0: a=1, f=2 -> 0.5
        let p = CarlemanParams { a: 1.0, b: 0.0, epsilon: 0.0, radius: 1.0, n: 1 };
        let w = warped_scalars(-1.0, 2.0, WarpParams::new(0.0, 1), Some(&p)).unwrap();
        assert!((w.a_fn - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(CarlemanParams::new(1.0, 0.1, 1e-4, 1.0, 1).is_ok());
        // a below n^2
        assert!(CarlemanParams::new(3.0, 0.05, 1e-5, 1.0, 2).is_err());
        // epsilon too large relative to b
        assert!(CarlemanParams::new(4.0, 0.05, 0.01, 1.0, 2).is_err());
        // b too large relative to 1/R
        assert!(CarlemanParams::new(4.0, 0.2, 1e-5, 1.0, 2).is_err());
        let p = CarlemanParams::admissible(2.0, 3);
        assert!(p.validate().is_ok());
        assert_eq!(p.a, 9.0);
    }

    #[test]
    fn conformal_map_values() {
        let im = conformal_map(-1.0, 2.0, 0.1).unwrap();
        assert!((im.xi - 0.72).abs() < 1e-15);
        assert!((im.u_bar + 1.0 / 0.9).abs() < 1e-15);
        assert!((im.v_bar - 2.5).abs() < 1e-15);
        // f(Phi(u,v)) = f / xi
        let f_image = -im.u_bar * im.v_bar;
        assert!((f_image - 2.0 / 0.72).abs() < 1e-14);

        let id = conformal_map(-1.0, 2.0, 0.0).unwrap();
        assert_eq!((id.u_bar, id.v_bar, id.xi), (-1.0, 2.0, 1.0));
    }

    #[test]
    fn conformal_identities_random_sweep() {
        // f o Phi = xi^{-1} f and rho o Phi = xi^{-1} r over 1e3 samples
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let r_cap = 1.0;
        let eps = 1.0 / (10.0 * r_cap) / 100.0; // admissible scale
        for _ in 0..1000 {
            let (u, v) = sample_exterior(&mut rng, r_cap);
            let im = conformal_map(u, v, eps).unwrap();
            let f = -u * v;
            let lhs = -im.u_bar * im.v_bar;
            let rhs = f / im.xi;
            assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.abs().max(1.0));
            let rho_image = raw_rho(im.u_bar, im.v_bar, eps);
            let rhs2 = (v - u) / im.xi;
            assert!((rho_image - rhs2).abs() <= 1e-13 * rhs2.abs().max(1.0));
            // inverse round-trip
            let (u2, v2) = conformal_map_inverse(im.u_bar, im.v_bar, eps).unwrap();
            assert!((u2 - u).abs() < 1e-13 && (v2 - v).abs() < 1e-13);
        }
    }

    #[test]
    fn comparison_bounds_prop() {
        // ratios (-u o Phi)/(-u), (v o Phi)/v, (f o Phi)/f in [1/2, 2] and
        // |d_u xi|, |d_v xi| within [eps/2, 2 eps] for eps <= 1/(10 R)
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let r_cap = 2.0;
        let eps = 1.0 / (10.0 * r_cap);
        for _ in 0..1000 {
            let (u, v) = sample_exterior(&mut rng, r_cap);
            let im = conformal_map(u, v, eps).unwrap();
            for ratio in [im.u_bar / u, im.v_bar / v, (-im.u_bar * im.v_bar) / (-u * v)] {
                assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
            }
            let dxi_u = eps * (1.0 - eps * v);
            let dxi_v = -eps * (1.0 + eps * u);
            assert!((0.5 * eps..=2.0 * eps).contains(&dxi_u.abs()));
            assert!((0.5 * eps..=2.0 * eps).contains(&dxi_v.abs()));
        }
    }

    #[test]
    fn weight_values_and_relation() {
        // parameter-zero reduction: eps = 0, b = 0, a = 1, f = 2 -> zeta = 4
        let p = CarlemanParams { a: 1.0, b: 0.0, epsilon: 0.0, radius: 1.0, n: 1 };
        let z = carleman_weight_shifted(-1.0, 2.0, &p).unwrap();
        assert!((z - 4.0).abs() < 1e-14);

        // warped weight at f=1, a=2, b=0.1: e^{0.8}
        let p = CarlemanParams { a: 2.0, b: 0.1, epsilon: 1e-4, radius: 0.5, n: 1 };
        let z = warped_weight(1.0, &p).unwrap();
        assert!((z - 0.8f64.exp()).abs() < 1e-14);

        // e^{-2F} = zeta_{a,b} over 1e3 random f
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        let p = CarlemanParams::admissible(1.0, 2);
        for _ in 0..1000 {
            let f: f64 = rng.gen_range(1e-3..1.0);
            let w = warped_scalars(-f.sqrt(), f.sqrt(), p.warp(), Some(&p)).unwrap();
            let lhs = (-2.0 * w.f_conj).exp();
            let rhs = warped_weight(f, &p).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }

    #[test]
    fn shifted_weight_matches_warped_weight_through_map() {
        // zeta^P equals zeta_{a,b}(f o Phi) with the exponential taken at the
        // (1 - eps u)(1 + eps v) combination.
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let p = CarlemanParams::admissible(1.0, 1);
        for _ in 0..500 {
            let (u, v) = sample_exterior(&mut rng, 1.0);
            let lhs = carleman_weight_shifted(u, v, &p).unwrap();
            let f = -u * v;
            let xi = (1.0 + p.epsilon * u) * (1.0 - p.epsilon * v);
            let denom = ((1.0 - p.epsilon * u) * (1.0 + p.epsilon * v)).sqrt();
            let rhs = (f / xi).powf(2.0 * p.a) * (4.0 * p.a * p.b * f.sqrt() / denom).exp();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }

    #[test]
    fn christoffel_values() {
        // eps = 0: Gamma^a_{vb} multiplier = 1/r
        let c = warped_christoffels(-1.0, 1.0, 0.0).unwrap();
        assert!((c.c_sph_v - 0.5).abs() < 1e-15);
        // eps = 0.1 at u=-1, v=1: rho = 2.2, Gamma^a_{ub} = -(1 + 0.2)/2.2
        let c = warped_christoffels(-1.0, 1.0, 0.1).unwrap();
        assert!((c.c_sph_u + 1.2 / 2.2).abs() < 1e-15);
        assert!((c.c_u_sph - 1.2 / 4.4).abs() < 1e-15);
        assert!((c.c_v_sph + 1.2 / 4.4).abs() < 1e-15);
    }

    #[test]
    fn hessian_values() {
        let h = warped_hessian_f(-1.0, 1.0, WarpParams::new(0.0, 3)).unwrap();
        assert_eq!(h.uv, -1.0);
        assert_eq!(h.tt, -0.5);
        assert_eq!(h.nn, 0.5);
        assert!((h.box_f - 2.0).abs() < 1e-15);
        // pi sign pattern
        let h = warped_hessian_f(-0.8, 1.1, WarpParams::new(0.1, 2)).unwrap();
        assert!(h.pi_tt > 0.0);
        let expected = 0.1 * 0.88 / (2.0 * raw_rho(-0.8, 1.1, 0.1));
        assert!((h.pi_tt - expected).abs() < 1e-15);
    }

    #[test]
    fn gradient_identity_frame_algebra() {
        // grad f . grad f = f via 2 g^{uv} d_u f d_v f at 1e3 exterior points
        let mut rng = rand::rngs::StdRng::seed_from_u64(10);
        for _ in 0..1000 {
            let (u, v) = sample_exterior(&mut rng, 2.0);
            let lhs = 2.0 * (-0.5) * (-v) * (-u);
            assert!((lhs - (-u * v)).abs() <= 1e-12 * (-u * v).max(1.0));
        }
    }

    #[test]
    fn f_over_rho_derivative_closed_vs_fd() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        for &eps in &[0.0, 0.02, 0.05] {
            for _ in 0..200 {
                let (u, v) = sample_exterior(&mut rng, 1.5);
                let g = |uu: f64, vv: f64| (-uu * vv) / raw_rho(uu, vv, eps);
                let h = 1e-5;
                let fd_u = (g(u + h, v) - g(u - h, v)) / (2.0 * h);
                let fd_v = (g(u, v + h) - g(u, v - h)) / (2.0 * h);
                let (du, dv) = f_over_rho_derivs(u, v, eps);
                assert!((du - fd_u).abs() < 1e-7 * du.abs().max(1.0));
                assert!((dv - fd_v).abs() < 1e-7 * dv.abs().max(1.0));
            }
        }
    }

    #[test]
    fn box_formulas_against_fd_assembled_laplacian() {
        // box(f/rho) and box(w) closed forms vs the FD operator assembled from
        // the Christoffel contraction, with Richardson halving.
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        for &(eps, n) in &[(0.0, 1), (0.02, 2), (0.05, 3)] {
            let warp = WarpParams::new(eps, n);
            for _ in 0..100 {
                let (u, v) = sample_exterior(&mut rng, 1.5);
                let r = v - u;
                let h0 = 1e-4 * r.max(1.0);
                for (name, g, closed) in [
                    (
                        "f/rho",
                        Box::new(move |uu: f64, vv: f64| (-uu * vv) / raw_rho(uu, vv, eps))
                            as Box<dyn Fn(f64, f64) -> f64>,
                        box_f_over_rho(u, v, warp),
                    ),
                    (
                        "w",
                        Box::new(move |uu: f64, vv: f64| {
                            let nf = n as f64;
                            (nf - 1.0) / 4.0
                                + (nf - 2.0) * eps * (-uu * vv) / (2.0 * raw_rho(uu, vv, eps))
                        }),
                        box_w(u, v, warp),
                    ),
                ] {
                    let fd_box = |h: f64| {
                        let duv = (g(u + h, v + h) - g(u + h, v - h) - g(u - h, v + h)
                            + g(u - h, v - h))
                            / (4.0 * h * h);
                        let du = (g(u + h, v) - g(u - h, v)) / (2.0 * h);
                        let dv = (g(u, v + h) - g(u, v - h)) / (2.0 * h);
                        let nf = n as f64;
                        let rho = raw_rho(u, v, eps);
                        -duv
                            - (nf - 1.0) / (2.0 * rho)
                                * ((1.0 - 2.0 * eps * u) * du - (1.0 + 2.0 * eps * v) * dv)
                    };
                    let e0 = (fd_box(h0) - closed).abs();
                    let e1 = (fd_box(h0 / 2.0) - closed).abs();
                    assert!(e0 < 1e-6, "{name}: residual {e0} at h = {h0}");
                    if e0 > 1e-11 {
                        let ratio = e0 / e1.max(1e-300);
                        assert!(ratio > 2.0, "{name}: Richardson ratio {ratio}");
                    }
                }
            }
        }
    }

    #[test]
    fn rho_lower_bound_for_nonnegative_eps() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(14);
        for _ in 0..1000 {
            let (u, v) = sample_exterior(&mut rng, 2.0);
            for eps in [0.0, 0.01, 0.05] {
                let f = -u * v;
                assert!(f.sqrt() < raw_rho(u, v, eps));
            }
        }
    }
}
