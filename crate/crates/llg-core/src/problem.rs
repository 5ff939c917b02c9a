//! Benchmark problem registry.
//!
//! Two manufactured problems carry full analytic bundles (solution, time
//! derivative, gradient, Laplacian) with the forcing synthesized so the
//! closed-form field solves the equation exactly; two more prescribe only an
//! external field and are used for reference-solution comparisons. All
//! derivatives are closed-form; [`validate_bundle`] cross-checks them against
//! finite differences once, so solver runs never differentiate numerically.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::num::{cross3, dot3, norm3, real, sub3, Real};

pub type SpaceFn<T> = Arc<dyn Fn([T; 2]) -> [T; 3] + Send + Sync>;
pub type SpaceTimeFn<T> = Arc<dyn Fn(T, [T; 2]) -> [T; 3] + Send + Sync>;
pub type SpaceTimeGradFn<T> = Arc<dyn Fn(T, [T; 2]) -> [[T; 2]; 3] + Send + Sync>;

/// Closed-form solution data: `m(t, x)`, its time derivative, spatial
/// gradient (one `[d/dx, d/dy]` row per component) and Laplacian.
#[derive(Clone)]
pub struct ExactBundle<T> {
    pub m: SpaceTimeFn<T>,
    pub dm_dt: SpaceTimeFn<T>,
    pub grad_m: SpaceTimeGradFn<T>,
    pub lap_m: SpaceTimeFn<T>,
}

#[derive(Clone)]
pub struct Problem<T> {
    pub name: String,
    /// Gilbert damping parameter.
    pub alpha: T,
    /// Squared exchange length in front of the Laplacian.
    pub lambda_sq: T,
    pub t_end: T,
    pub m0: SpaceFn<T>,
    /// External field `f(t, x)`.
    pub field: SpaceTimeFn<T>,
    pub exact: Option<ExactBundle<T>>,
}

impl<T: fmt::Debug> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("lambda_sq", &self.lambda_sq)
            .field("t_end", &self.t_end)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Synthesizes the external field that makes the bundle an exact solution:
/// `f = alpha dm/dt + m x dm/dt - lambda^2 lap m`.
///
/// Both `dm/dt` and `m x dm/dt` are orthogonal to `m` pointwise, so the
/// projected strong form holds identically with this right-hand side.
pub fn f_from_exact<T: Real>(alpha: T, lambda_sq: T, bundle: &ExactBundle<T>) -> SpaceTimeFn<T> {
    let m = Arc::clone(&bundle.m);
    let dm = Arc::clone(&bundle.dm_dt);
    let lap = Arc::clone(&bundle.lap_m);
    Arc::new(move |t, x| {
        let mv = m(t, x);
        let dv = dm(t, x);
        let lv = lap(t, x);
        let c = cross3(mv, dv);
        [
            alpha * dv[0] + c[0] - lambda_sq * lv[0],
            alpha * dv[1] + c[1] - lambda_sq * lv[1],
            alpha * dv[2] + c[2] - lambda_sq * lv[2],
        ]
    })
}

/// In-plane cubic profile rotating about the second axis:
/// `m = (-p sin(3 pi t / T), sqrt(1 - p^2), -p cos(3 pi t / T))` with
/// `p(x) = x1^3 - 3 x1^2 / 2 + 1/4`. `p` ranges over [-1/4, 1/4] and has
/// vanishing normal derivative on the boundary.
pub fn cubic<T: Real>() -> Problem<T> {
    let t_end = real::<T>(0.2);
    let alpha = real::<T>(0.2);
    let lambda_sq = T::one();
    let omega = real::<T>(3.0) * T::PI() / t_end;

    let p = |x: T| x * x * x - real::<T>(1.5) * x * x + real::<T>(0.25);
    let dp = |x: T| real::<T>(3.0) * x * x - real::<T>(3.0) * x;
    let ddp = |x: T| real::<T>(6.0) * x - real::<T>(3.0);

    let m: SpaceTimeFn<T> = Arc::new(move |t, x| {
        let (pv, th) = (p(x[0]), omega * t);
        [-pv * th.sin(), (T::one() - pv * pv).sqrt(), -pv * th.cos()]
    });
    let dm_dt: SpaceTimeFn<T> = Arc::new(move |t, x| {
        let (pv, th) = (p(x[0]), omega * t);
        [-pv * omega * th.cos(), T::zero(), pv * omega * th.sin()]
    });
    let grad_m: SpaceTimeGradFn<T> = Arc::new(move |t, x| {
        let (pv, dpv, th) = (p(x[0]), dp(x[0]), omega * t);
        let qv = (T::one() - pv * pv).sqrt();
        [
            [-dpv * th.sin(), T::zero()],
            [-pv * dpv / qv, T::zero()],
            [-dpv * th.cos(), T::zero()],
        ]
    });
    let lap_m: SpaceTimeFn<T> = Arc::new(move |t, x| {
        let (pv, dpv, ddpv, th) = (p(x[0]), dp(x[0]), ddp(x[0]), omega * t);
        let qv = (T::one() - pv * pv).sqrt();
        let dq = -pv * dpv / qv;
        let ddq = (-dpv * dpv - pv * ddpv - dq * dq) / qv;
        [-ddpv * th.sin(), ddq, -ddpv * th.cos()]
    });

    let exact = ExactBundle {
        m: Arc::clone(&m),
        dm_dt,
        grad_m,
        lap_m,
    };
    let field = f_from_exact(alpha, lambda_sq, &exact);
    Problem {
        name: "cubic".to_string(),
        alpha,
        lambda_sq,
        t_end,
        m0: {
            let m = Arc::clone(&m);
            Arc::new(move |x| m(T::zero(), x))
        },
        field,
        exact: Some(exact),
    }
}

/// Shared sub-expressions of the bump solution at one `(t, x)`.
struct BumpCore<T> {
    u1: T,
    u2: T,
    d: T,
    q: T,
    g: T,
    gdot: T,
    /// `exp(-g / q)`
    e: T,
}

fn bump_core<T: Real>(t: T, x: [T; 2], t_chi: T, guard: T) -> Option<BumpCore<T>> {
    let half = real::<T>(0.5);
    let u1 = x[0] - half;
    let u2 = x[1] - half;
    let d = u1 * u1 + u2 * u2;
    let q = real::<T>(0.25) - d;
    if q <= T::zero() {
        return None;
    }
    let g = t_chi / (t_chi - t);
    if g / q > guard {
        // The exponential underflows; every derived quantity is an exact
        // zero of the constant branch.
        return None;
    }
    Some(BumpCore {
        u1,
        u2,
        d,
        q,
        g,
        gdot: g * g / t_chi,
        e: (-g / q).exp(),
    })
}

/// Localized bump spiraling toward the poles, sharp in both space and time:
/// `m = (D E u1, D E u2, sqrt(1 - D^2 E^2 d))` inside the disk `d < 1/4`
/// and `(0,0,1)` outside, with `E = exp(-g(t)/(1/4-d))`,
/// `g(t) = (T+chi)/(T+chi-t)` and `d = |x - (1/2,1/2)|^2`. The default is
/// `chi = 0.1`; smaller `chi` sharpens the blow-up of `g` near the final
/// time.
pub fn bump_chi<T: Real>(chi: T) -> Problem<T> {
    let t_end = real::<T>(0.2);
    let alpha = real::<T>(0.2);
    let lambda_sq = T::one();
    let big_d = real::<T>(400.0);
    let t_chi = t_end + chi;
    // Beyond this value of g/q the exponential is far below the smallest
    // normal number; switch to the constant branch before its cofactors
    // (negative powers of q) can overflow.
    let guard = -T::min_positive_value().ln() * real::<T>(0.97);

    let m: SpaceTimeFn<T> = Arc::new(move |t, x| match bump_core(t, x, t_chi, guard) {
        None => [T::zero(), T::zero(), T::one()],
        Some(c) => {
            let de = big_d * c.e;
            let s = de * de * c.d;
            [
                de * c.u1,
                de * c.u2,
                (T::one() - s).max(T::zero()).sqrt(),
            ]
        }
    });
    let dm_dt: SpaceTimeFn<T> = Arc::new(move |t, x| match bump_core(t, x, t_chi, guard) {
        None => [T::zero(); 3],
        Some(c) => {
            let de = big_d * c.e;
            let w = de * de;
            let m3 = (T::one() - w * c.d).max(T::zero()).sqrt();
            let r = c.gdot / c.q;
            [-de * c.u1 * r, -de * c.u2 * r, w * c.d * r / m3]
        }
    });
    let grad_m: SpaceTimeGradFn<T> = Arc::new(move |t, x| match bump_core(t, x, t_chi, guard) {
        None => [[T::zero(); 2]; 3],
        Some(c) => {
            let de = big_d * c.e;
            let w = de * de;
            let m3 = (T::one() - w * c.d).max(T::zero()).sqrt();
            let q2 = c.q * c.q;
            let two_g = real::<T>(2.0) * c.g;
            let z = T::one() - two_g * c.d / q2;
            let wz = w * z / m3;
            [
                [
                    de * (T::one() - two_g * c.u1 * c.u1 / q2),
                    -de * two_g * c.u1 * c.u2 / q2,
                ],
                [
                    -de * two_g * c.u1 * c.u2 / q2,
                    de * (T::one() - two_g * c.u2 * c.u2 / q2),
                ],
                [-wz * c.u1, -wz * c.u2],
            ]
        }
    });
    let lap_m: SpaceTimeFn<T> = Arc::new(move |t, x| match bump_core(t, x, t_chi, guard) {
        None => [T::zero(); 3],
        Some(c) => {
            let de = big_d * c.e;
            let w = de * de;
            let m3 = (T::one() - w * c.d).max(T::zero()).sqrt();
            let (q2, q3, q4) = (c.q * c.q, c.q * c.q * c.q, c.q * c.q * c.q * c.q);
            let four = real::<T>(4.0);
            let eight = real::<T>(8.0);
            let z = T::one() - real::<T>(2.0) * c.g * c.d / q2;
            // Horizontal components share the radial profile.
            let radial =
                de * c.g * (-eight / q2 - eight * c.d / q3 + four * c.g * c.d / q4);
            // Third component through S = W d: m3 = sqrt(1 - S).
            let lap_s = four * w * z
                - eight * c.g * c.d * w * ((z + T::one()) / q2 + real::<T>(2.0) * c.d / q3);
            let grad_s_sq = four * w * w * z * z * c.d;
            let lap_m3 = -lap_s / (real::<T>(2.0) * m3)
                - grad_s_sq / (four * m3 * m3 * m3);
            [radial * c.u1, radial * c.u2, lap_m3]
        }
    });

    let exact = ExactBundle {
        m: Arc::clone(&m),
        dm_dt,
        grad_m,
        lap_m,
    };
    let field = f_from_exact(alpha, lambda_sq, &exact);
    let chi64 = chi.to_f64().unwrap_or(f64::NAN);
    Problem {
        name: if (chi64 - 0.1).abs() < 1e-12 {
            "bump".to_string()
        } else {
            format!("bump-chi:{chi64}")
        },
        alpha,
        lambda_sq,
        t_end,
        m0: {
            let m = Arc::clone(&m);
            Arc::new(move |x| m(T::zero(), x))
        },
        field,
        exact: Some(exact),
    }
}

pub fn bump<T: Real>() -> Problem<T> {
    bump_chi(real::<T>(0.1))
}

/// High-frequency initial oscillation driven by a temporal pulse
/// `f = (0, 0, sech(10(t - 1/2)))`. No exact solution; convergence is
/// measured against a fine-time reference run.
pub fn pulse<T: Real>() -> Problem<T> {
    let four = real::<T>(4.0);
    let scale = real::<T>(1.04).sqrt().recip();
    Problem {
        name: "pulse".to_string(),
        alpha: real::<T>(0.25),
        lambda_sq: T::one(),
        t_end: T::one(),
        m0: Arc::new(move |x| {
            let s = four * (x[0] + x[1]);
            [real::<T>(0.2) * scale, s.sin() * scale, s.cos() * scale]
        }),
        field: Arc::new(|t, _| {
            let a = real::<T>(10.0) * (t - real::<T>(0.5));
            [T::zero(), T::zero(), a.cosh().recip()]
        }),
        exact: None,
    }
}

/// Constant initial state `(0, 1, 0)` under the time-constant radial field
/// `f = (x, y, 0)/|(x, y)|`. The field is extended to the corner `(0, 0)`
/// along the diagonal; no mesh node other than that corner is near the
/// singularity.
pub fn radial<T: Real>() -> Problem<T> {
    Problem {
        name: "radial".to_string(),
        alpha: real::<T>(0.2),
        lambda_sq: T::one(),
        t_end: real::<T>(0.2),
        m0: Arc::new(|_| [T::zero(), T::one(), T::zero()]),
        field: Arc::new(|_, x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if r < real::<T>(1e-14) {
                let s = real::<T>(0.5).sqrt();
                [s, s, T::zero()]
            } else {
                [x[0] / r, x[1] / r, T::zero()]
            }
        }),
        exact: None,
    }
}

/// Constant equilibrium: `m = (0, 0, 1)` everywhere, no applied field. The
/// exact solution is the initial state; every error and rate column of a
/// convergence study degenerates to zero.
pub fn stationary<T: Real>() -> Problem<T> {
    let m: SpaceTimeFn<T> = Arc::new(|_, _| [T::zero(), T::zero(), T::one()]);
    let zero: SpaceTimeFn<T> = Arc::new(|_, _| [T::zero(); 3]);
    Problem {
        name: "stationary".to_string(),
        alpha: real::<T>(0.2),
        lambda_sq: T::one(),
        t_end: real::<T>(0.2),
        m0: Arc::new(|_| [T::zero(), T::zero(), T::one()]),
        field: Arc::clone(&zero),
        exact: Some(ExactBundle {
            m,
            dm_dt: Arc::clone(&zero),
            grad_m: Arc::new(|_, _| [[T::zero(); 2]; 3]),
            lap_m: zero,
        }),
    }
}

/// Resolves a problem from its CLI identifier: `cubic`, `bump`,
/// `bump-chi:<value>`, `pulse`, `radial` or `stationary`.
pub fn by_name<T: Real>(name: &str) -> Result<Problem<T>, Error> {
    if let Some(chi) = name.strip_prefix("bump-chi:") {
        let chi: f64 = chi
            .parse()
            .map_err(|_| Error::InvalidInput(format!("invalid chi value in {name:?}")))?;
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "chi must be positive and finite, got {chi}"
            )));
        }
        return Ok(bump_chi(real::<T>(chi)));
    }
    match name {
        "cubic" => Ok(cubic()),
        "bump" => Ok(bump()),
        "pulse" => Ok(pulse()),
        "radial" => Ok(radial()),
        "stationary" => Ok(stationary()),
        _ => Err(Error::InvalidInput(format!(
            "unknown problem {name:?}; expected cubic, bump, bump-chi:<value>, pulse, radial \
             or stationary"
        ))),
    }
}

/// Worst-case mismatches observed by [`validate_bundle`].
#[derive(Debug, Clone, Copy)]
pub struct BundleReport<T> {
    pub samples: usize,
    pub max_unit_defect: T,
    pub max_orthogonality: T,
    pub max_dt_mismatch: T,
    pub max_grad_mismatch: T,
    pub max_lap_mismatch: T,
    pub max_llg_residual: T,
}

fn rel_mismatch<T: Real>(got: T, want: T) -> T {
    (got - want).abs() / T::one().max(got.abs()).max(want.abs())
}

/// Cross-checks an exact bundle at random space-time samples: unit length,
/// `m . dm/dt = 0`, central finite differences of the time derivative and
/// gradient (step 1e-6), a five-point stencil for the Laplacian, and the
/// pointwise residual of the projected strong form with the synthesized
/// forcing. Tolerances are calibrated for `f64`.
pub fn validate_bundle<T: Real>(
    problem: &Problem<T>,
    samples: usize,
    seed: u64,
) -> Result<BundleReport<T>, Error> {
    let bundle = problem.exact.as_ref().ok_or_else(|| {
        Error::InvalidInput(format!("problem {:?} has no exact bundle", problem.name))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BundleReport {
        samples,
        max_unit_defect: T::zero(),
        max_orthogonality: T::zero(),
        max_dt_mismatch: T::zero(),
        max_grad_mismatch: T::zero(),
        max_lap_mismatch: T::zero(),
        max_llg_residual: T::zero(),
    };
    let ht = real::<T>(1e-6);
    let hx = real::<T>(1e-6);
    let hl = real::<T>(1e-4);
    let two = real::<T>(2.0);

    for _ in 0..samples {
        let t = real::<T>(rng.gen_range(0.0..=1.0)) * problem.t_end;
        let x = [
            real::<T>(rng.gen_range(0.001..0.999)),
            real::<T>(rng.gen_range(0.001..0.999)),
        ];
        let m = (bundle.m)(t, x);
        let dm = (bundle.dm_dt)(t, x);
        let gm = (bundle.grad_m)(t, x);
        let lm = (bundle.lap_m)(t, x);

        report.max_unit_defect = report.max_unit_defect.max((norm3(m) - T::one()).abs());
        report.max_orthogonality = report.max_orthogonality.max(dot3(m, dm).abs());

        let mp = (bundle.m)(t + ht, x);
        let mm = (bundle.m)(t - ht, x);
        for c in 0..3 {
            let fd = (mp[c] - mm[c]) / (two * ht);
            report.max_dt_mismatch = report.max_dt_mismatch.max(rel_mismatch(fd, dm[c]));
        }

        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += hx;
            xm[dir] -= hx;
            let vp = (bundle.m)(t, xp);
            let vm = (bundle.m)(t, xm);
            for c in 0..3 {
                let fd = (vp[c] - vm[c]) / (two * hx);
                report.max_grad_mismatch =
                    report.max_grad_mismatch.max(rel_mismatch(fd, gm[c][dir]));
            }
        }

        let mut stencil = [T::zero(); 3];
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += hl;
            xm[dir] -= hl;
            let vp = (bundle.m)(t, xp);
            let vm = (bundle.m)(t, xm);
            for c in 0..3 {
                stencil[c] += (vp[c] - two * m[c] + vm[c]) / (hl * hl);
            }
        }
        for c in 0..3 {
            report.max_lap_mismatch = report.max_lap_mismatch.max(rel_mismatch(stencil[c], lm[c]));
        }

        // Residual of alpha dm + m x dm = P(m)(lambda^2 lap m + f).
        let f = (problem.field)(t, x);
        let h = [
            problem.lambda_sq * lm[0] + f[0],
            problem.lambda_sq * lm[1] + f[1],
            problem.lambda_sq * lm[2] + f[2],
        ];
        let mh = dot3(m, h);
        let proj = [h[0] - mh * m[0], h[1] - mh * m[1], h[2] - mh * m[2]];
        let c = cross3(m, dm);
        let lhs = [
            problem.alpha * dm[0] + c[0],
            problem.alpha * dm[1] + c[1],
            problem.alpha * dm[2] + c[2],
        ];
        report.max_llg_residual = report.max_llg_residual.max(norm3(sub3(lhs, proj)));
    }

    let checks: [(&str, T, T); 6] = [
        ("unit length", report.max_unit_defect, real::<T>(1e-12)),
        ("orthogonality", report.max_orthogonality, real::<T>(1e-10)),
        ("time derivative", report.max_dt_mismatch, real::<T>(1e-5)),
        ("gradient", report.max_grad_mismatch, real::<T>(1e-5)),
        ("laplacian", report.max_lap_mismatch, real::<T>(1e-3)),
        ("llg residual", report.max_llg_residual, real::<T>(1e-10)),
    ];
    for (what, got, tol) in checks {
        if !(got <= tol) {
            return Err(Error::Invariant(format!(
                "bundle validation of {:?} failed: {what} mismatch {got:e} exceeds {tol:e}",
                problem.name
            )));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_bundle_passes_validation() {
        let p = cubic::<f64>();
        let report = validate_bundle(&p, 500, 0x5eed).unwrap();
        assert_eq!(report.samples, 500);
    }

    #[test]
    fn bump_bundle_passes_validation() {
        let p = bump::<f64>();
        validate_bundle(&p, 500, 0x5eed).unwrap();
    }

    #[test]
    fn sharper_bump_chi_bundles_pass_validation() {
        for chi in [0.01, 1.0] {
            let p = bump_chi::<f64>(chi);
            validate_bundle(&p, 300, 7).unwrap();
        }
    }

    #[test]
    fn cubic_matches_frozen_time_zero_state() {
        let p = cubic::<f64>();
        let bundle = p.exact.as_ref().unwrap();
        for x1 in [0.0, 0.3, 0.8, 1.0] {
            let pv = x1 * x1 * x1 - 1.5 * x1 * x1 + 0.25;
            let m = (bundle.m)(0.0, [x1, 0.4]);
            assert!((m[0] - 0.0).abs() < 1e-15);
            assert!((m[1] - (1.0 - pv * pv).sqrt()).abs() < 1e-15);
            assert!((m[2] + pv).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_is_constant_outside_the_disk_and_at_the_center() {
        let p = bump::<f64>();
        let bundle = p.exact.as_ref().unwrap();
        // d >= 1/4 at all three points (the second sits exactly on the circle).
        for x in [[0.0, 0.0], [1.0, 0.5], [0.5, 0.0]] {
            let m = (bundle.m)(0.1, x);
            assert_eq!(m, [0.0, 0.0, 1.0]);
            assert_eq!((bundle.dm_dt)(0.1, x), [0.0; 3]);
            assert_eq!((bundle.lap_m)(0.1, x), [0.0; 3]);
        }
        let m = (bundle.m)(0.05, [0.5, 0.5]);
        assert!((m[0]).abs() < 1e-15 && (m[1]).abs() < 1e-15);
        assert!((m[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pulse_field_matches_frozen_values() {
        let p = pulse::<f64>();
        let at_peak = (p.field)(0.5, [0.3, 0.3]);
        assert_eq!(at_peak[0], 0.0);
        assert_eq!(at_peak[1], 0.0);
        assert!((at_peak[2] - 1.0).abs() < 1e-15, "sech(0) = 1");
        let at_zero = (p.field)(0.0, [0.3, 0.3]);
        let want = 2.0 / (5.0f64.exp() + (-5.0f64).exp());
        assert!((at_zero[2] - want).abs() < 1e-15);
        assert!((at_zero[2] - 0.013476).abs() < 1e-6);
    }

    #[test]
    fn pulse_initial_state_is_unit_length() {
        let p = pulse::<f64>();
        for x in [[0.0, 0.0], [0.37, 0.81], [1.0, 1.0]] {
            assert!((norm3((p.m0)(x)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn radial_field_is_unit_and_diagonal_at_corner() {
        let p = radial::<f64>();
        let f = (p.field)(0.0, [1.0, 0.0]);
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1].abs() < 1e-15);
        let corner = (p.field)(0.0, [0.0, 0.0]);
        assert!((corner[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((corner[1] - 0.5f64.sqrt()).abs() < 1e-15);
        for x in [[0.2, 0.9], [0.5, 0.1]] {
            assert!((norm3((p.field)(0.0, x)) - 1.0).abs() < 1e-14);
        }
        assert_eq!((p.m0)([0.7, 0.2]), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn forcing_vanishes_for_stationary_harmonic_solutions() {
        let m: SpaceTimeFn<f64> = Arc::new(|_, _| [0.0, 0.0, 1.0]);
        let zero: SpaceTimeFn<f64> = Arc::new(|_, _| [0.0; 3]);
        let bundle = ExactBundle {
            m,
            dm_dt: Arc::clone(&zero),
            grad_m: Arc::new(|_, _| [[0.0; 2]; 3]),
            lap_m: zero,
        };
        let f = f_from_exact(0.2, 1.0, &bundle);
        assert_eq!(f(0.13, [0.4, 0.9]), [0.0; 3]);
    }

    #[test]
    fn by_name_resolves_identifiers() {
        assert_eq!(by_name::<f64>("cubic").unwrap().name, "cubic");
        assert_eq!(by_name::<f64>("bump").unwrap().name, "bump");
        assert_eq!(by_name::<f64>("pulse").unwrap().name, "pulse");
        assert_eq!(by_name::<f64>("radial").unwrap().name, "radial");
        let b = by_name::<f64>("bump-chi:0.01").unwrap();
        assert_eq!(b.name, "bump-chi:0.01");
        assert!(by_name::<f64>("vortex").is_err());
        assert!(by_name::<f64>("bump-chi:nope").is_err());
        assert!(by_name::<f64>("bump-chi:-1").is_err());
    }
}
