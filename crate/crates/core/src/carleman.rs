//! Pointwise verification machinery for the conjugated-operator identity,
//! the pointwise Carleman inequalities, and the conformal wave identity.
//!
//! Test functions come from a fixed catalog of (u, v)-analytic radial parts
//! times symmetric angular modes, evaluated as second-order jets so that the
//! operator sides are assembled from closed-form derivatives. Only the
//! covariant divergence of the currents uses finite differences (of the
//! analytically assembled current components), which is what carries the
//! O(h^2) error that the Richardson companions measure.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::warped::{
    box_w, f_a_prime, jet_exp_minus_f_conj, jet_w, warped_scalars, CarlemanParams, WarpParams,
};

/// Default relative finite-difference step for divergence assembly.
pub fn default_fd_step(r: f64) -> f64 {
    1e-4 * r.max(1.0)
}

/// Points closer to the cone than this are rejected by the identity checks.
pub const F_MIN_IDENTITY: f64 = 1e-3;

/// Angular dependence of a catalog function.
#[derive(Clone, Copy, Debug)]
pub enum AngularMode {
    /// no angular dependence (any n)
    None,
    /// cos(m theta) on the circle (n = 2)
    Circle { m: u32 },
    /// cos(theta) along the polar angle on S^2 (n = 3, axisymmetric l = 1)
    Meridian,
}

type RadialJetFn = Arc<dyn Fn(Jet3, Jet3) -> Jet3 + Send + Sync>;

/// An analytic test function psi(u, v, theta) = q(u, v) Y(theta) with
/// closed-form derivatives to second order.
#[derive(Clone)]
pub struct TestFn {
    pub name: String,
    radial: RadialJetFn,
    pub angular: AngularMode,
}

impl TestFn {
    pub fn new(
        name: impl Into<String>,
        radial: impl Fn(Jet3, Jet3) -> Jet3 + Send + Sync + 'static,
        angular: AngularMode,
    ) -> Self {
        TestFn { name: name.into(), radial: Arc::new(radial), angular }
    }

    /// Jet of psi at (u, v, theta); variables are indexed (u, v, theta).
    pub fn jet(&self, u: f64, v: f64, theta: f64) -> Jet3 {
        let ju = Jet3::var(u, 0);
        let jv = Jet3::var(v, 1);
        let q = (self.radial)(ju, jv);
        match self.angular {
            AngularMode::None => q,
            AngularMode::Circle { m } => {
                let jt = Jet3::var(theta, 2);
                q * (jt * m as f64).cos()
            }
            AngularMode::Meridian => {
                let jt = Jet3::var(theta, 2);
                q * jt.cos()
            }
        }
    }

    /// Is the angular mode admissible in dimension n?
    pub fn admissible_in(&self, n: usize) -> bool {
        match self.angular {
            AngularMode::None => true,
            AngularMode::Circle { .. } => n == 2,
            AngularMode::Meridian => n == 3,
        }
    }
}

/// The angular connection coefficient entering the symmetric-mode Laplacian
/// and divergence: 0 except for the S^2 meridian parametrization.
fn cot_term(angular: AngularMode, theta: f64, n: usize) -> f64 {
    match (angular, n) {
        (AngularMode::Meridian, 3) => 1.0 / theta.tan(),
        _ => 0.0,
    }
}

/// The fixed test-function catalog for dimension n (radial entries plus the
/// angular modes that exist in that dimension).
pub fn catalog(n: usize) -> Vec<TestFn> {
    let mut out = vec![
        TestFn::new("poly_u2v", |u, v| u * u * v, AngularMode::None),
        TestFn::new(
            "poly_mixed",
            |u, v| u * v * v - 3.0 * u + v * 0.5 + 1.0,
            AngularMode::None,
        ),
        TestFn::new(
            "trig",
            |u, v| (u * 1.3 + 0.4).sin() * (v * 0.7).cos(),
            AngularMode::None,
        ),
        TestFn::new("exp", |u, v| (u * 0.3 - v * 0.2).exp(), AngularMode::None),
        TestFn::new(
            "rational",
            |u, v| (u * u + v * v + 1.0).recip(),
            AngularMode::None,
        ),
    ];
    if n == 2 {
        out.push(TestFn::new(
            "circle_m1",
            |u, v| u * v * v + v * 0.3,
            AngularMode::Circle { m: 1 },
        ));
        out.push(TestFn::new(
            "circle_m2",
            |u, v| (u * 0.9).sin() * v,
            AngularMode::Circle { m: 2 },
        ));
    }
    if n == 3 {
        out.push(TestFn::new(
            "meridian_l1",
            |u, v| u * u - v + 2.0,
            AngularMode::Meridian,
        ));
    }
    out
}

/// A random trig test function q = sin(alpha u + p) cos(beta v + q).
pub fn random_trig(rng: &mut impl Rng) -> TestFn {
    let alpha = rng.gen_range(0.3..2.0);
    let beta = rng.gen_range(0.3..2.0);
    let p = rng.gen_range(0.0..std::f64::consts::TAU);
    let q = rng.gen_range(0.0..std::f64::consts::TAU);
    TestFn::new(
        format!("trig_a{alpha:.3}_b{beta:.3}"),
        move |u, v| (u * alpha + p).sin() * (v * beta + q).cos(),
        AngularMode::None,
    )
}

/// A sample point in the cone exterior.
#[derive(Clone, Copy, Debug)]
pub struct ExteriorPoint {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
}

/// Draw exterior points with f in [f_min, ~r_max^2/4) and r < r_max, with the
/// angular parameter kept away from coordinate poles.
pub fn sample_exterior(rng: &mut impl Rng, r_max: f64, f_min: f64) -> ExteriorPoint {
    loop {
        let u = -rng.gen_range(1e-3..0.5 * r_max);
        let v = rng.gen_range(1e-3..0.5 * r_max);
        if -u * v >= f_min {
            return ExteriorPoint { u, v, theta: rng.gen_range(0.4..std::f64::consts::PI - 0.4) };
        }
    }
}

// Frame contractions of a jet at a point.
struct FrameData {
    psi: f64,
    sw_psi: f64,
    t_psi: f64,
    n_psi: f64,
    /// conjugated normal, tilde-N psi = N psi + (n-1)/(4 sqrt f) psi
    nt_psi: f64,
    /// g^{ab} nasla_a psi nasla_b psi = psi_theta^2 / rho^2 (n >= 2)
    ang_grad2: f64,
    box_psi: f64,
}

fn frame_data(j: &Jet3, u: f64, v: f64, warp: WarpParams, cot: f64, w: f64) -> FrameData {
    let f = -u * v;
    let sf = f.sqrt();
    let rho = (v - u) + 2.0 * warp.epsilon * f;
    let s_psi = 0.5 * (u * j.grad[0] + v * j.grad[1]);
    let nf = warp.n as f64;
    let n_psi = s_psi / sf;
    FrameData {
        psi: j.val,
        sw_psi: s_psi + w * j.val,
        t_psi: 0.5 / sf * (-u * j.grad[0] + v * j.grad[1]),
        n_psi,
        nt_psi: n_psi + (nf - 1.0) / (4.0 * sf) * j.val,
        ang_grad2: if warp.n >= 2 { j.grad[2] * j.grad[2] / (rho * rho) } else { 0.0 },
        box_psi: crate::warped::box_scalar(j, u, v, warp, cot),
    }
}

/// The conjugated operator L psi = box psi + 2 F' Sw psi + (A + eps f F'/rho) psi,
/// assembled from closed forms.
fn conjugated_operator(
    j: &Jet3,
    u: f64,
    v: f64,
    p: &CarlemanParams,
    cot: f64,
) -> Result<(f64, FrameData)> {
    let warp = p.warp();
    let sc = warped_scalars(u, v, warp, Some(p))?;
    let fd = frame_data(j, u, v, warp, cot, sc.w);
    let l = fd.box_psi
        + 2.0 * sc.f_conj_prime * fd.sw_psi
        + (sc.a_fn + warp.epsilon * sc.f / sc.rho * sc.f_conj_prime) * fd.psi;
    Ok((l, fd))
}

/// Lower-index current components (P_u, P_v, P_theta) of the Carleman
/// current for the given jet, at (u, v, theta).
fn current_components(j: &Jet3, u: f64, v: f64, p: &CarlemanParams) -> [f64; 3] {
    let warp = p.warp();
    let f = -u * v;
    let w_j = jet_w(u, v, warp);
    let rho = (v - u) + 2.0 * warp.epsilon * f;
    let s_psi = 0.5 * (u * j.grad[0] + v * j.grad[1]);
    let w = w_j.val;
    let grad2 = -j.grad[0] * j.grad[1]
        + if warp.n >= 2 { j.grad[2] * j.grad[2] / (rho * rho) } else { 0.0 };
    let a_fn = p.a * p.a / f + p.b * p.a * (2.0 * p.a - 0.5) / f.sqrt() + p.b * p.b * p.a * p.a;
    let psi2 = j.val * j.val;
    let p_u = s_psi * j.grad[0] - 0.5 * (-v) * grad2
        + w * j.val * j.grad[0]
        + 0.5 * (a_fn * (-v) - w_j.grad[0]) * psi2;
    let p_v = s_psi * j.grad[1] - 0.5 * (-u) * grad2
        + w * j.val * j.grad[1]
        + 0.5 * (a_fn * (-u) - w_j.grad[1]) * psi2;
    let p_theta = if warp.n >= 2 { (s_psi + w * j.val) * j.grad[2] } else { 0.0 };
    [p_u, p_v, p_theta]
}

/// Covariant divergence of the current by centered finite differences of the
/// analytically assembled components, Christoffel contraction in closed form.
fn current_divergence(
    jet_at: &dyn Fn(f64, f64, f64) -> Jet3,
    pt: ExteriorPoint,
    p: &CarlemanParams,
    h: f64,
) -> f64 {
    let warp = p.warp();
    let (u, v, theta) = (pt.u, pt.v, pt.theta);
    let comp = |uu: f64, vv: f64, tt: f64| current_components(&jet_at(uu, vv, tt), uu, vv, p);
    let c0 = comp(u, v, theta);
    let du_pv = (comp(u + h, v, theta)[1] - comp(u - h, v, theta)[1]) / (2.0 * h);
    let dv_pu = (comp(u, v + h, theta)[0] - comp(u, v - h, theta)[0]) / (2.0 * h);
    let nf = warp.n as f64;
    let f = -u * v;
    let rho = (v - u) + 2.0 * warp.epsilon * f;
    let mut div = -0.5 * (du_pv + dv_pu)
        - (nf - 1.0) / (2.0 * rho)
            * ((1.0 - 2.0 * warp.epsilon * u) * c0[0] - (1.0 + 2.0 * warp.epsilon * v) * c0[1]);
    if warp.n >= 2 {
        let ht = h;
        let dt_pt = (comp(u, v, theta + ht)[2] - comp(u, v, theta - ht)[2]) / (2.0 * ht);
        // the cot term is the meridian connection; zero on the circle
        let cot = if warp.n == 3 { 1.0 / theta.tan() } else { 0.0 };
        div += (dt_pt + cot * c0[2]) / (rho * rho);
    }
    div
}

// structural gate only: hierarchy-violating parameters are allowed through
// so the margin checks can serve as negative controls
fn check_point(pt: ExteriorPoint, p: &CarlemanParams) -> Result<()> {
    let f = -pt.u * pt.v;
    if f < F_MIN_IDENTITY {
        return Err(Error::OutsideCone { f });
    }
    if !(p.a > 0.0 && p.b >= 0.0 && p.radius > 0.0) {
        return Err(Error::InvalidParams(
            "carleman parameters must have a > 0, b >= 0, R > 0".into(),
        ));
    }
    Ok(())
}

/// Absolute residual of an identity check together with the magnitude of the
/// terms entering it; `relative()` is the scale-aware residual used by the
/// sweep reports.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResidual {
    pub abs: f64,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        self.abs / self.scale.max(1.0)
    }
}

/// Residual of the pointwise conjugated-operator identity
/// -L psi Sw psi + div P = -2F'|Sw psi|^2
///   + (eps f / 2 rho)(|T psi|^2 + |nasla psi|^2 - |N psi|^2)
///   - (eps f / rho) F' psi Sw psi + (1/2)[(fA)' + (eps f/rho) A - box w] psi^2.
/// The divergence side uses finite differences with step h, so the residual
/// decays at second order in h.
pub fn pointwise_identity_residual(
    psi: &TestFn,
    pt: ExteriorPoint,
    p: &CarlemanParams,
    h: f64,
) -> Result<IdentityResidual> {
    check_point(pt, p)?;
    let warp = p.warp();
    let cot = cot_term(psi.angular, pt.theta, warp.n);
    let j = psi.jet(pt.u, pt.v, pt.theta);
    let (l_psi, fd) = conjugated_operator(&j, pt.u, pt.v, p, cot)?;
    let sc = warped_scalars(pt.u, pt.v, warp, Some(p))?;
    let div = current_divergence(&|u, v, t| psi.jet(u, v, t), pt, p, h);

    let eps_f_rho = warp.epsilon * sc.f / sc.rho;
    let terms = [
        -l_psi * fd.sw_psi,
        div,
        -2.0 * sc.f_conj_prime * fd.sw_psi * fd.sw_psi,
        0.5 * eps_f_rho * (fd.t_psi * fd.t_psi + fd.ang_grad2 - fd.n_psi * fd.n_psi),
        -eps_f_rho * sc.f_conj_prime * fd.psi * fd.sw_psi,
        0.5 * (f_a_prime(sc.f, p) + eps_f_rho * sc.a_fn - box_w(pt.u, pt.v, warp))
            * fd.psi
            * fd.psi,
    ];
    let lhs = terms[0] + terms[1];
    let rhs = terms[2] + terms[3] + terms[4] + terms[5];
    let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    Ok(IdentityResidual { abs: (lhs - rhs).abs(), scale })
}

/// Margin (LHS - RHS) of the conjugated pointwise inequality
/// (f/4a)|L psi|^2 + div P >= (eps f/2 rho)(|T psi|^2 + |nasla psi|^2)
///   + (a/4)|tilde-N psi|^2 + (b a^2 / 4) f^{-1/2} psi^2.
/// Nonnegative (up to the FD error in div P) for admissible parameters.
pub fn pointwise_inequality_margin(
    psi: &TestFn,
    pt: ExteriorPoint,
    p: &CarlemanParams,
    h: f64,
) -> Result<f64> {
    check_point(pt, p)?;
    let warp = p.warp();
    let cot = cot_term(psi.angular, pt.theta, warp.n);
    let j = psi.jet(pt.u, pt.v, pt.theta);
    let (l_psi, fd) = conjugated_operator(&j, pt.u, pt.v, p, cot)?;
    let sc = warped_scalars(pt.u, pt.v, warp, Some(p))?;
    let div = current_divergence(&|u, v, t| psi.jet(u, v, t), pt, p, h);

    let lhs = sc.f / (4.0 * p.a) * l_psi * l_psi + div;
    let rhs = 0.5 * warp.epsilon * sc.f / sc.rho * (fd.t_psi * fd.t_psi + fd.ang_grad2)
        + 0.25 * p.a * fd.nt_psi * fd.nt_psi
        + 0.25 * p.b * p.a * p.a / sc.f.sqrt() * fd.psi * fd.psi;
    Ok(lhs - rhs)
}

/// Margin of the unconjugated (reversed) pointwise inequality
/// (f e^{-2F} / 4a)|box phi|^2 + div P* >=
///   (eps / 16 rho) e^{-2F} (|u d_u phi|^2 + |v d_v phi|^2 + f |nasla phi|^2)
///   + (b a^2 / 8) f^{-1/2} e^{-2F} phi^2,
/// where P* is the Carleman current of e^{-F} phi.
pub fn pointwise_inequality_margin_rev(
    phi: &TestFn,
    pt: ExteriorPoint,
    p: &CarlemanParams,
    h: f64,
) -> Result<f64> {
    check_point(pt, p)?;
    let warp = p.warp();
    let cot = cot_term(phi.angular, pt.theta, warp.n);
    let j = phi.jet(pt.u, pt.v, pt.theta);
    let sc = warped_scalars(pt.u, pt.v, warp, Some(p))?;
    let weight = (-2.0 * sc.f_conj).exp();
    let box_phi = crate::warped::box_scalar(&j, pt.u, pt.v, warp, cot);
    let conj_at = |u: f64, v: f64, t: f64| jet_exp_minus_f_conj(u, v, p) * phi.jet(u, v, t);
    let div = current_divergence(&conj_at, pt, p, h);

    let lhs = sc.f * weight / (4.0 * p.a) * box_phi * box_phi + div;
    let ang2 = if warp.n >= 2 { j.grad[2] * j.grad[2] / (sc.rho * sc.rho) } else { 0.0 };
    let rhs = warp.epsilon / (16.0 * sc.rho)
        * weight
        * ((pt.u * j.grad[0]).powi(2) + (pt.v * j.grad[1]).powi(2) + sc.f * ang2)
        + 0.125 * p.b * p.a * p.a / sc.f.sqrt() * weight * j.val * j.val;
    Ok(lhs - rhs)
}

/// Finite-difference warped wave operator on a closed-form radial scalar.
fn box_fd_radial(g: &dyn Fn(f64, f64) -> f64, u: f64, v: f64, warp: WarpParams, h: f64) -> f64 {
    let duv =
        (g(u + h, v + h) - g(u + h, v - h) - g(u - h, v + h) + g(u - h, v - h)) / (4.0 * h * h);
    let du = (g(u + h, v) - g(u - h, v)) / (2.0 * h);
    let dv = (g(u, v + h) - g(u, v - h)) / (2.0 * h);
    let nf = warp.n as f64;
    let eps = warp.epsilon;
    let rho = (v - u) + 2.0 * eps * (-u * v);
    -duv - (nf - 1.0) / (2.0 * rho) * ((1.0 - 2.0 * eps * u) * du - (1.0 + 2.0 * eps * v) * dv)
}

/// Residual of the conformal wave identity
/// [box-bar + (n-1)^2 eps / (2 rho o Phi)](xi^{(n-1)/2} phi-bar) = xi^{(n+3)/2} box phi,
/// with phi = phi-bar o Phi and all second derivatives taken by finite
/// differences (radial test functions).
pub fn conf_wave_residual(
    phi_bar: &TestFn,
    u: f64,
    v: f64,
    epsilon: f64,
    n: usize,
    h: f64,
) -> Result<f64> {
    let f = -u * v;
    if f < F_MIN_IDENTITY {
        return Err(Error::OutsideCone { f });
    }
    let image = crate::warped::conformal_map(u, v, epsilon)?;
    let warp = WarpParams::new(epsilon, n);
    let nf = n as f64;

    // chi-bar on the warped side: (xi o Phi^{-1})^{(n-1)/2} phi-bar
    let chi_bar = |ub: f64, vb: f64| -> f64 {
        let xi_tilde = 1.0 / ((1.0 - epsilon * ub) * (1.0 + epsilon * vb));
        xi_tilde.powf((nf - 1.0) / 2.0) * phi_bar.jet(ub, vb, 1.0).val
    };
    let rho_image = (image.v_bar - image.u_bar) + 2.0 * epsilon * (-image.u_bar * image.v_bar);
    let lhs = box_fd_radial(&chi_bar, image.u_bar, image.v_bar, warp, h)
        + (nf - 1.0) * (nf - 1.0) * epsilon / (2.0 * rho_image)
            * chi_bar(image.u_bar, image.v_bar);

    // flat side: phi = phi-bar o Phi, flat wave operator (eps = 0 geometry)
    let phi = |uu: f64, vv: f64| -> f64 {
        let im = crate::warped::conformal_map(uu, vv, epsilon).unwrap();
        phi_bar.jet(im.u_bar, im.v_bar, 1.0).val
    };
    let flat = WarpParams::new(0.0, n);
    let rhs = image.xi.powf((nf + 3.0) / 2.0) * box_fd_radial(&phi, u, v, flat, h);
    Ok((lhs - rhs).abs())
}

/// Check the boundary-current identity P*(N) = (1/2) zeta_{a,b} Nf |N phi|^2
/// on the timelike surface { v - u = r0 } for phi = (v - u - r0) g(u, v).
/// Both sides are closed-form; returns (lhs, rhs).
pub fn boundary_current_identity(
    g: &TestFn,
    tau_uv: f64,
    r0: f64,
    p: &CarlemanParams,
) -> Result<(f64, f64)> {
    // parametrize the surface point by u = tau_uv - r0/2... use u free:
    let u = tau_uv;
    let v = u + r0;
    let f = -u * v;
    if f <= F_MIN_IDENTITY {
        return Err(Error::OutsideCone { f });
    }
    let phi_at = |uu: f64, vv: f64, t: f64| -> Jet3 {
        let ju = Jet3::var(uu, 0);
        let jv = Jet3::var(vv, 1);
        let sigma = jv - ju - r0;
        sigma * g.jet(uu, vv, t)
    };
    let conj = |uu: f64, vv: f64, t: f64| jet_exp_minus_f_conj(uu, vv, p) * phi_at(uu, vv, t);
    let comps = current_components(&conj(u, v, 1.0), u, v, p);
    // unit normal to { v - u = r0 }: N = (-1/2) d_u + (1/2) d_v
    let lhs = -0.5 * comps[0] + 0.5 * comps[1];

    let j = phi_at(u, v, 1.0);
    let n_phi = -0.5 * j.grad[0] + 0.5 * j.grad[1];
    let n_f = 0.5 * (v - u);
    let zeta = crate::warped::warped_weight(f, p)?;
    let rhs = 0.5 * zeta * n_f * n_phi * n_phi;
    Ok((lhs, rhs))
}
