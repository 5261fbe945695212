//! 1+1D generalized timelike cylinders bounded by two timelike curves
//! lambda_1 < lambda_2, their Minkowski boundary normals, observation-region
//! scans, and the optimal-timespan solvers for null rays bouncing between
//! the curves.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::minkowski::{null_coords, SpacetimePoint};

/// Timelike safety margin: boundary speeds must satisfy |lambda'| <= 1 - ETA.
pub const TIMELIKE_MARGIN: f64 = 1e-6;

const RAY_MAX_SPAN: f64 = 1e3;

/// Natural cubic spline through strictly increasing knots.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    ts: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 3 {
            return Err(Error::InvalidParams(
                "spline needs at least 3 knots".into(),
            ));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParams(
                    "spline knots must have strictly increasing times".into(),
                ));
            }
        }
        let n = knots.len();
        let ts: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        // solve the natural-spline tridiagonal system for second derivatives
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = ts[i] - ts[i - 1];
            let h1 = ts[i + 1] - ts[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        let mut m = vec![0.0; n];
        // Thomas sweep
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for i in 1..n {
            let denom = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / denom;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / denom;
        }
        m[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = dp[i] - cp[i] * m[i + 1];
        }
        Ok(CubicSpline { ts, ys, m })
    }

    fn segment(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i.clamp(1, self.ts.len() - 1) - 1,
        }
    }

    /// Value, first, and second derivative. Evaluation outside the knot range
    /// extrapolates the end cubic.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - t) / h, (t - t0) / h);
        let (y0, y1, m0, m1) = (self.ys[i], self.ys[i + 1], self.m[i], self.m[i + 1]);
        let val = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        (val, d1, d2)
    }
}

/// One boundary curve descriptor: ell(tau) = (tau, lambda(tau)).
#[derive(Clone, Debug)]
pub enum BoundaryCurve {
    Linear { slope: f64, intercept: f64 },
    Sampled(CubicSpline),
}

impl BoundaryCurve {
    pub fn linear(slope: f64, intercept: f64) -> Self {
        BoundaryCurve::Linear { slope, intercept }
    }

    pub fn position(&self, tau: f64) -> f64 {
        match self {
            BoundaryCurve::Linear { slope, intercept } => slope * tau + intercept,
            BoundaryCurve::Sampled(s) => s.eval(tau).0,
        }
    }

    pub fn velocity(&self, tau: f64) -> f64 {
        match self {
            BoundaryCurve::Linear { slope, .. } => *slope,
            BoundaryCurve::Sampled(s) => s.eval(tau).1,
        }
    }

    pub fn acceleration(&self, tau: f64) -> f64 {
        match self {
            BoundaryCurve::Linear { .. } => 0.0,
            BoundaryCurve::Sampled(s) => s.eval(tau).2,
        }
    }

    /// lambda(tau) as a jet in variables where `ti` is the time index.
    pub fn jet<const N: usize>(&self, tau: Jet<N>, ti: usize) -> Jet<N> {
        let (val, d1, d2) = match self {
            BoundaryCurve::Linear { slope, intercept } => {
                (slope * tau.val + intercept, *slope, 0.0)
            }
            BoundaryCurve::Sampled(s) => s.eval(tau.val),
        };
        // tau is the bare time variable in all uses; compose directly
        let mut out = Jet::<N>::constant(val);
        out.grad[ti] = d1 * tau.grad[ti];
        out.hess[ti][ti] = d2 * tau.grad[ti] * tau.grad[ti] + d1 * tau.hess[ti][ti];
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A 1+1D moving domain lambda_1(tau) < x < lambda_2(tau) with both bounding
/// curves timelike on the working window.
#[derive(Clone, Debug)]
pub struct Gtc1D {
    pub lambda1: BoundaryCurve,
    pub lambda2: BoundaryCurve,
    pub window: (f64, f64),
}

impl Gtc1D {
    /// Validates ordering and the timelike margin on the working window
    /// (densely sampled for spline curves).
    pub fn new(lambda1: BoundaryCurve, lambda2: BoundaryCurve, window: (f64, f64)) -> Result<Self> {
        if !(window.0 < window.1) {
            return Err(Error::EmptyWindow(format!(
                "window [{}, {}] is empty",
                window.0, window.1
            )));
        }
        let dom = Gtc1D { lambda1, lambda2, window };
        let samples = 2048;
        for k in 0..=samples {
            let tau = window.0 + (window.1 - window.0) * k as f64 / samples as f64;
            for side in [Side::Left, Side::Right] {
                let speed = dom.curve(side).velocity(tau).abs();
                if speed > 1.0 - TIMELIKE_MARGIN {
                    return Err(Error::TimelikeMarginViolated {
                        tau,
                        speed,
                        margin: TIMELIKE_MARGIN,
                    });
                }
            }
            let (l1, l2) = (dom.lambda1.position(tau), dom.lambda2.position(tau));
            if l1 >= l2 {
                return Err(Error::CurvesCross { tau, l1, l2 });
            }
        }
        Ok(dom)
    }

    pub fn curve(&self, side: Side) -> &BoundaryCurve {
        match side {
            Side::Left => &self.lambda1,
            Side::Right => &self.lambda2,
        }
    }

    pub fn width(&self, tau: f64) -> f64 {
        self.lambda2.position(tau) - self.lambda1.position(tau)
    }

    pub fn boundary_point(&self, side: Side, tau: f64) -> SpacetimePoint {
        SpacetimePoint::on_line(tau, self.curve(side).position(tau))
    }

    /// Largest boundary speed over the window (dense sampling).
    pub fn max_speed(&self) -> f64 {
        let samples = 2048;
        let mut m: f64 = 0.0;
        for k in 0..=samples {
            let tau = self.window.0 + (self.window.1 - self.window.0) * k as f64 / samples as f64;
            m = m
                .max(self.lambda1.velocity(tau).abs())
                .max(self.lambda2.velocity(tau).abs());
        }
        m
    }

    pub fn min_width(&self) -> f64 {
        let samples = 2048;
        let mut m = f64::INFINITY;
        for k in 0..=samples {
            let tau = self.window.0 + (self.window.1 - self.window.0) * k as f64 / samples as f64;
            m = m.min(self.width(tau));
        }
        m
    }
}

/// Outward Minkowski unit normal at a boundary point, as (nu_t, nu).
#[derive(Clone, Copy, Debug)]
pub struct BoundaryNormal {
    pub nu_t: f64,
    pub nu: f64,
    pub side: Side,
}

impl BoundaryNormal {
    /// Minkowski norm deficit -nu_t^2 + nu^2 - 1 (zero for a unit normal).
    pub fn unit_deficit(&self) -> f64 {
        -self.nu_t * self.nu_t + self.nu * self.nu - 1.0
    }
}

/// On ell_1: N = -(lambda_1', 1)/sqrt(1 - lambda_1'^2);
/// on ell_2: N = (lambda_2', 1)/sqrt(1 - lambda_2'^2).
pub fn boundary_normal_1d(dom: &Gtc1D, side: Side, tau: f64) -> Result<BoundaryNormal> {
    let speed = dom.curve(side).velocity(tau);
    if speed.abs() >= 1.0 {
        return Err(Error::TimelikeMarginViolated {
            tau,
            speed: speed.abs(),
            margin: 0.0,
        });
    }
    let scale = 1.0 / (1.0 - speed * speed).sqrt();
    let (nu_t, nu) = match side {
        Side::Left => (-speed * scale, -scale),
        Side::Right => (speed * scale, scale),
    };
    Ok(BoundaryNormal { nu_t, nu, side })
}

/// Directional derivatives of the shifted scalars along the outward normal:
/// N r_P = nu x_P / r_P, N f_P = (r_P N r_P - t_P nu_t)/2, N t_P = nu_t.
pub fn normal_derivatives(
    dom: &Gtc1D,
    side: Side,
    tau: f64,
    center: &SpacetimePoint,
) -> Result<(f64, f64, f64)> {
    let normal = boundary_normal_1d(dom, side, tau)?;
    let p = dom.boundary_point(side, tau);
    let t_p = p.t - center.t;
    let x_p = p.x[0] - center.x[0];
    let r_p = x_p.abs();
    if r_p == 0.0 {
        return Err(Error::ZeroRadius);
    }
    let n_r = normal.nu * x_p / r_p;
    let n_f = 0.5 * (r_p * n_r - t_p * normal.nu_t);
    Ok((n_f, n_r, normal.nu_t))
}

/// One boundary sample of a region scan.
#[derive(Clone, Debug)]
pub struct RegionSample {
    pub side: Side,
    pub tau: f64,
    pub t: f64,
    pub x: f64,
    pub f_p: f64,
    pub n_f: f64,
    pub n_r: f64,
    pub s: f64,
    pub cos_theta: f64,
    pub in_gamma_plus: bool,
    pub in_gamma_p_delta: bool,
    pub in_gamma_dagger: bool,
}

/// Scan both boundary curves over the window: at each sample, evaluate f_P,
/// N f_P, N r_P, the exterior-estimate quantity
/// S = (1 - delta^2 r_P / R_+) N f_P + (delta^2 f_P / R_+) N r_P,
/// the normal angle cos(theta), and membership in the three observation
/// regions. R_+ is the sup of r_P over a dense sample of U cap D_P.
pub fn region_scan(
    dom: &Gtc1D,
    center: &SpacetimePoint,
    delta: f64,
    window: (f64, f64),
    samples_per_side: usize,
) -> Result<Vec<RegionSample>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(window.0 < window.1) || samples_per_side == 0 {
        return Err(Error::EmptyWindow("region scan window".into()));
    }
    let r_plus = sup_r_over_domain(dom, center, window, 10_000)?;
    let mut out = Vec::with_capacity(2 * (samples_per_side + 1));
    for side in [Side::Left, Side::Right] {
        for k in 0..=samples_per_side {
            let tau = window.0 + (window.1 - window.0) * k as f64 / samples_per_side as f64;
            let p = dom.boundary_point(side, tau);
            let nc = null_coords(&p, center);
            let normal = boundary_normal_1d(dom, side, tau)?;
            let t_p = p.t - center.t;
            let (n_f, n_r, nu_t) = if nc.r > 0.0 {
                let x_p = p.x[0] - center.x[0];
                let n_r = normal.nu * x_p / nc.r;
                (0.5 * (nc.r * n_r - t_p * normal.nu_t), n_r, normal.nu_t)
            } else {
                (f64::NAN, f64::NAN, normal.nu_t)
            };
            let s = (1.0 - delta * delta * nc.r / r_plus) * n_f
                + delta * delta * nc.f / r_plus * n_r;
            let cos_theta = n_r / (1.0 + nu_t * nu_t).sqrt();
            let exterior = nc.f > 0.0;
            // Gamma_{P,delta}: cos(theta) > (1-delta^2)^{sgn(t_P nu_t)}
            //                  * t_P nu_t / (r_P sqrt(1 + nu_t^2))
            let in_gamma_p_delta = exterior && {
                let q = t_p * nu_t;
                let base = 1.0 - delta * delta;
                let factor = if q > 0.0 {
                    base
                } else if q < 0.0 {
                    1.0 / base
                } else {
                    1.0
                };
                cos_theta > factor * q / (nc.r * (1.0 + nu_t * nu_t).sqrt())
            };
            out.push(RegionSample {
                side,
                tau,
                t: p.t,
                x: p.x[0],
                f_p: nc.f,
                n_f,
                n_r,
                s,
                cos_theta,
                in_gamma_plus: exterior && s > 0.0,
                in_gamma_p_delta,
                in_gamma_dagger: exterior && n_f > 0.0,
            });
        }
    }
    Ok(out)
}

/// sup of r_P over a dense rectangular sample of U cap D_P within the window.
pub fn sup_r_over_domain(
    dom: &Gtc1D,
    center: &SpacetimePoint,
    window: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let nt = (samples as f64).sqrt().ceil() as usize;
    let mut r_plus: f64 = 0.0;
    let mut hit = false;
    for k in 0..=nt {
        let tau = window.0 + (window.1 - window.0) * k as f64 / nt as f64;
        let (l1, l2) = (dom.lambda1.position(tau), dom.lambda2.position(tau));
        for j in 0..=nt {
            let x = l1 + (l2 - l1) * j as f64 / nt as f64;
            let nc = null_coords(&SpacetimePoint::on_line(tau, x), center);
            if nc.f > 0.0 {
                hit = true;
                r_plus = r_plus.max(nc.r);
            }
        }
    }
    if !hit {
        return Err(Error::EmptyWindow(
            "U cap D_P is empty on the scan window".into(),
        ));
    }
    Ok(r_plus)
}

/// The CSV schema for region scans.
pub const REGION_CSV_HEADER: &str =
    "tau,t,x,fP,NfP,NrP,S,costheta,in_gamma_plus,in_gamma_Pdelta,in_gamma_dagger";

pub fn region_csv_row(s: &RegionSample, fmt: impl Fn(f64) -> String) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        fmt(s.tau),
        fmt(s.t),
        fmt(s.x),
        fmt(s.f_p),
        fmt(s.n_f),
        fmt(s.n_r),
        fmt(s.s),
        fmt(s.cos_theta),
        s.in_gamma_plus as u8,
        s.in_gamma_p_delta as u8,
        s.in_gamma_dagger as u8
    )
}

/// Optimal observability timespans for the window starting at tau_minus.
#[derive(Clone, Copy, Debug)]
pub struct OptimalTimes {
    /// leftward null ray from (tau_-, lambda_2) to ell_1
    pub t_minus: f64,
    /// rightward null ray from the ell_1 arrival on to ell_2
    pub t_plus: f64,
    /// one-sided optimal timespan T = T_- + T_+
    pub t_onesided: f64,
    /// two-sided times: leftward ray to ell_1, rightward ray to ell_2
    pub t1: f64,
    pub t2: f64,
}

/// Travel time of a null ray leaving (tau0, x0) with velocity dir (+1 or -1)
/// until it meets the given curve; bisection on the strictly monotone
/// crossing function, bracket grown by doubling.
pub fn null_ray_hit(curve: &BoundaryCurve, tau0: f64, x0: f64, dir: f64, dt0: f64) -> Result<f64> {
    let cross = |t: f64| -> f64 { dir * (x0 + dir * t - curve.position(tau0 + t)) };
    // cross(0) < 0 when the ray starts strictly on the domain side of the curve;
    // |lambda'| < 1 makes cross strictly increasing.
    let mut hi = dt0.max(1e-12);
    let mut lo = 0.0;
    while cross(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > RAY_MAX_SPAN {
            return Err(Error::NoIntersection {
                tau: tau0,
                max_span: RAY_MAX_SPAN,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cross(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve the null-ray crossing times defining the optimal timespans:
/// T_- : lambda_2(tau_-) - T = lambda_1(tau_- + T),
/// T_+ : lambda_1(tau_- + T_-) + T = lambda_2(tau_- + T_- + T),
/// T_1 = T_-, and T_2 : lambda_1(tau_-) + T = lambda_2(tau_- + T).
pub fn optimal_times_1d(dom: &Gtc1D, tau_minus: f64) -> Result<OptimalTimes> {
    let dt0 = 1e-3 * dom.width(tau_minus).max(1e-9);
    let x2 = dom.lambda2.position(tau_minus);
    let t_minus = null_ray_hit(&dom.lambda1, tau_minus, x2, -1.0, dt0)?;
    let x1_arrival = dom.lambda1.position(tau_minus + t_minus);
    let t_plus = null_ray_hit(&dom.lambda2, tau_minus + t_minus, x1_arrival, 1.0, dt0)?;
    let x1 = dom.lambda1.position(tau_minus);
    let t2 = null_ray_hit(&dom.lambda2, tau_minus, x1, 1.0, dt0)?;
    Ok(OptimalTimes {
        t_minus,
        t_plus,
        t_onesided: t_minus + t_plus,
        t1: t_minus,
        t2,
    })
}

/// Closed-form optimal timespans for linear boundaries lambda_i = h_i tau.
/// Valid for both separating (h1 < h2, tau_- > 0) and closing
/// (h2 < h1, tau_- < 0) configurations.
pub fn optimal_times_linear(h1: f64, h2: f64, tau_minus: f64) -> OptimalTimes {
    let gap = (h2 - h1) * tau_minus;
    let t_minus = gap / (1.0 + h1);
    let t_plus = gap * (1.0 + h2) / ((1.0 + h1) * (1.0 - h2));
    OptimalTimes {
        t_minus,
        t_plus,
        t_onesided: 2.0 * gap / ((1.0 + h1) * (1.0 - h2)),
        t1: t_minus,
        t2: gap / (1.0 - h2),
    }
}

/// An n-D boundary supplied as a pre-sampled point cloud with user-provided
/// Minkowski outward unit normals; supports region evaluation only.
#[derive(Clone, Debug)]
pub struct SampledBoundary {
    pub points: Vec<SpacetimePoint>,
    /// normals as (nu_t, nu vector), Minkowski-unit and outward
    pub normals: Vec<(f64, Vec<f64>)>,
}

#[derive(Clone, Debug)]
pub struct SampledRegionValue {
    pub f_p: f64,
    pub n_f: f64,
    pub n_r: f64,
    pub s: f64,
    pub cos_theta: f64,
    pub in_gamma_plus: bool,
    pub in_gamma_dagger: bool,
}

impl SampledBoundary {
    pub fn region_eval(
        &self,
        center: &SpacetimePoint,
        delta: f64,
        r_plus: f64,
    ) -> Result<Vec<SampledRegionValue>> {
        if self.points.len() != self.normals.len() {
            return Err(Error::InvalidParams(
                "boundary points and normals must pair up".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.points.len());
        for (p, (nu_t, nu)) in self.points.iter().zip(self.normals.iter()) {
            let nc = null_coords(p, center);
            if nc.r == 0.0 {
                return Err(Error::ZeroRadius);
            }
            let t_p = p.t - center.t;
            let dot: f64 = nu
                .iter()
                .zip(p.x.iter().zip(center.x.iter()))
                .map(|(nv, (a, b))| nv * (a - b))
                .sum();
            let n_r = dot / nc.r;
            let n_f = 0.5 * (nc.r * n_r - t_p * nu_t);
            let s = (1.0 - delta * delta * nc.r / r_plus) * n_f
                + delta * delta * nc.f / r_plus * n_r;
            out.push(SampledRegionValue {
                f_p: nc.f,
                n_f,
                n_r,
                s,
                cos_theta: n_r / (1.0 + nu_t * nu_t).sqrt(),
                in_gamma_plus: nc.f > 0.0 && s > 0.0,
                in_gamma_dagger: nc.f > 0.0 && n_f > 0.0,
            });
        }
        Ok(out)
    }
}
