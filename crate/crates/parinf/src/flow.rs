//! Numerical integration of the compactified flow
//!
//! ```text
//! dq/dtau = (q+p)^3 K_p,   dp/dtau = -(q+p)^3 K_q,   dphi/dtau = -2^{7/2},
//! ```
//!
//! the Poincare return map on {phi = 0} (the angle moves at constant rate,
//! so one return is exactly 2 pi / 2^{7/2} of rescaled time), variational
//! transport with the analytic Jacobian of the field, and finite-order
//! series for the local invariant manifolds.

use crate::mcgehee::{McGeheeState, PHI_RATE, SECTOR_BOUND};
use crate::num::rk::{integrate_ode, OdeOptions, StateVec};
use crate::num::Mat2;
use crate::series::{Caps, FourierTaylorSeries, Parity, COEF_TOL};
use crate::{Error, Result};

/// Steps are refused once q + p drops below this: passages closer to the
/// saddle belong to the Shilnikov machinery, not brute-force integration.
pub const NEAR_SADDLE_GUARD: f64 = 1e-6;

/// A series compiled to a flat term list for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledSeries {
    terms: Vec<(u8, u8, u8, u8, f64)>,
    deg: usize,
    har: usize,
}

impl CompiledSeries {
    pub fn compile(s: &FourierTaylorSeries) -> Self {
        let terms = s
            .iter_coeffs()
            .map(|(l, m, k, p, v)| {
                (
                    l as u8,
                    m as u8,
                    k as u8,
                    matches!(p, Parity::Sin) as u8,
                    v,
                )
            })
            .collect();
        CompiledSeries {
            terms,
            deg: s.caps.degree,
            har: s.caps.harmonic,
        }
    }

    pub fn eval(&self, q: f64, p: f64, t: f64) -> f64 {
        let mut qpow = [1.0f64; 24];
        let mut ppow = [1.0f64; 24];
        for i in 1..=self.deg {
            qpow[i] = qpow[i - 1] * q;
            ppow[i] = ppow[i - 1] * p;
        }
        let mut cosk = [1.0f64; 16];
        let mut sink = [0.0f64; 16];
        if self.har >= 1 {
            let (s1, c1) = t.sin_cos();
            cosk[1] = c1;
            sink[1] = s1;
            for k in 2..=self.har {
                cosk[k] = cosk[k - 1] * c1 - sink[k - 1] * s1;
                sink[k] = sink[k - 1] * c1 + cosk[k - 1] * s1;
            }
        }
        let mut acc = 0.0;
        for &(l, m, k, is_sin, v) in &self.terms {
            let trig = if is_sin == 1 {
                sink[k as usize]
            } else {
                cosk[k as usize]
            };
            acc += v * qpow[l as usize] * ppow[m as usize] * trig;
        }
        acc
    }
}

/// Hamiltonian K with the derivative stencils needed by the variational
/// equations, compiled from a Fourier-Taylor series.
#[derive(Clone, Debug)]
pub struct KField {
    pub series: FourierTaylorSeries,
    k: CompiledSeries,
    kq: CompiledSeries,
    kp: CompiledSeries,
    kqq: CompiledSeries,
    kqp: CompiledSeries,
    kpp: CompiledSeries,
}

impl KField {
    pub fn new(series: FourierTaylorSeries) -> Self {
        let kq = series.derivative_q();
        let kp = series.derivative_p();
        KField {
            k: CompiledSeries::compile(&series),
            kqq: CompiledSeries::compile(&kq.derivative_q()),
            kqp: CompiledSeries::compile(&kq.derivative_p()),
            kpp: CompiledSeries::compile(&kp.derivative_p()),
            kq: CompiledSeries::compile(&kq),
            kp: CompiledSeries::compile(&kp),
            series,
        }
    }

    /// The kernel-only field -qp + I (the Kepler-level truncation).
    pub fn kernel(caps: Caps) -> Self {
        KField::new(FourierTaylorSeries::kernel(caps))
    }

    #[inline]
    pub fn k(&self, q: f64, p: f64, phi: f64) -> f64 {
        self.k.eval(q, p, phi)
    }

    /// (q-dot, p-dot) in rescaled time at angle phi.
    #[inline]
    pub fn velocity(&self, q: f64, p: f64, phi: f64) -> (f64, f64) {
        let w3 = (q + p).powi(3);
        (w3 * self.kp.eval(q, p, phi), -w3 * self.kq.eval(q, p, phi))
    }

    /// Jacobian of the velocity field with respect to (q, p).
    pub fn velocity_jacobian(&self, q: f64, p: f64, phi: f64) -> Mat2 {
        let w2 = (q + p).powi(2);
        let w3 = w2 * (q + p);
        let kq = self.kq.eval(q, p, phi);
        let kp = self.kp.eval(q, p, phi);
        let kqq = self.kqq.eval(q, p, phi);
        let kqp = self.kqp.eval(q, p, phi);
        let kpp = self.kpp.eval(q, p, phi);
        Mat2 {
            a: 3.0 * w2 * kp + w3 * kqp,
            b: 3.0 * w2 * kp + w3 * kpp,
            c: -3.0 * w2 * kq - w3 * kqq,
            d: -3.0 * w2 * kq - w3 * kqp,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, McGeheeState)>,
    pub tolerance: f64,
}

impl Trajectory {
    /// Dump as CSV with columns t, q, p, phi, K.
    pub fn to_csv(&self, field: &KField) -> String {
        let mut s = String::from("t,q,p,phi,K\n");
        for (t, st) in &self.samples {
            let k = field.k(st.q, st.p, st.phi);
            s.push_str(&format!("{t:.12e},{:.12e},{:.12e},{:.12e},{k:.12e}\n", st.q, st.p, st.phi));
        }
        s
    }
}

/// Integrate for a span of rescaled time. phi evolves linearly and is
/// reconstructed from the clock rather than integrated.
pub fn integrate(
    state: &McGeheeState,
    t_span: f64,
    tol: f64,
    field: &KField,
) -> Result<Trajectory> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::InvalidConfig(format!("tol = {tol} outside [1e-14, 1e-6]")));
    }
    if !state.in_sector() {
        return Err(Error::ChartExit { q: state.q, p: state.p });
    }
    let phi0 = state.phi;
    let f = |t: f64, y: &StateVec| {
        let phi = phi0 - PHI_RATE * t;
        let (dq, dp) = field.velocity(y.v[0], y.v[1], phi);
        StateVec::new(&[dq, dp])
    };
    let mut samples = Vec::new();
    let opts = OdeOptions {
        rtol: tol,
        atol: tol * 1e-2,
        h0: (t_span.abs() * 1e-3).max(1e-8),
        ..OdeOptions::default()
    };
    let mut exited = None;
    let res = integrate_ode(
        &f,
        0.0,
        t_span,
        StateVec::new(&[state.q, state.p]),
        &opts,
        |t, y| {
            let st = McGeheeState::new(y.v[0], y.v[1], phi0 - PHI_RATE * t);
            let ok = st.q.abs() <= SECTOR_BOUND && st.p.abs() <= SECTOR_BOUND;
            let near = st.q + st.p < NEAR_SADDLE_GUARD;
            if !ok || near {
                exited = Some((st, near));
                return false;
            }
            samples.push((t, st));
            true
        },
    );
    match res {
        Ok(_) => Ok(Trajectory {
            samples,
            tolerance: tol,
        }),
        Err(Error::ObserverStop { t }) => match exited {
            Some((_, true)) => Err(Error::StepUnderflow { t }),
            Some((st, false)) => Err(Error::ChartExit { q: st.q, p: st.p }),
            None => Err(Error::ObserverStop { t }),
        },
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SectionPoint {
    pub q: f64,
    pub p: f64,
    pub jacobian: Option<Mat2>,
}

impl SectionPoint {
    pub fn new(q: f64, p: f64) -> Self {
        SectionPoint {
            q,
            p,
            jacobian: None,
        }
    }
}

/// Rescaled time of one full turn of the angle.
pub fn return_time() -> f64 {
    2.0 * std::f64::consts::PI / PHI_RATE
}

/// Return map on {phi = 0}: the state after the angle advances by one full
/// period, with the Jacobian co-integrated when requested.
pub fn poincare_map(
    pt: &SectionPoint,
    field: &KField,
    tol: f64,
    with_jacobian: bool,
) -> Result<SectionPoint> {
    poincare_iter(pt, field, tol, with_jacobian, 1, false)
}

/// Inverse return map (integrates the span backwards).
pub fn poincare_map_inverse(
    pt: &SectionPoint,
    field: &KField,
    tol: f64,
    with_jacobian: bool,
) -> Result<SectionPoint> {
    poincare_iter(pt, field, tol, with_jacobian, 1, true)
}

pub fn poincare_iter(
    pt: &SectionPoint,
    field: &KField,
    tol: f64,
    with_jacobian: bool,
    iterations: usize,
    backward: bool,
) -> Result<SectionPoint> {
    let span = return_time() * iterations as f64 * if backward { -1.0 } else { 1.0 };
    let f = |t: f64, y: &StateVec| {
        let phi = -PHI_RATE * t;
        let (dq, dp) = field.velocity(y.v[0], y.v[1], phi);
        if with_jacobian {
            let j = field.velocity_jacobian(y.v[0], y.v[1], phi);
            // columns of the variational matrix: (v2, v3) and (v4, v5)
            StateVec::new(&[
                dq,
                dp,
                j.a * y.v[2] + j.b * y.v[3],
                j.c * y.v[2] + j.d * y.v[3],
                j.a * y.v[4] + j.b * y.v[5],
                j.c * y.v[4] + j.d * y.v[5],
            ])
        } else {
            StateVec::new(&[dq, dp])
        }
    };
    let y0 = if with_jacobian {
        StateVec::new(&[pt.q, pt.p, 1.0, 0.0, 0.0, 1.0])
    } else {
        StateVec::new(&[pt.q, pt.p])
    };
    let opts = OdeOptions {
        rtol: tol,
        atol: tol * 1e-2,
        h0: span.abs() * 1e-3,
        ..OdeOptions::default()
    };
    let mut bad = None;
    let res = integrate_ode(&f, 0.0, span, y0, &opts, |_t, y| {
        let ok = y.v[0].abs() <= SECTOR_BOUND && y.v[1].abs() <= SECTOR_BOUND;
        let near = y.v[0] + y.v[1] < NEAR_SADDLE_GUARD;
        if !ok || near {
            bad = Some((y.v[0], y.v[1]));
            return false;
        }
        true
    });
    let y = match res {
        Ok(y) => y,
        Err(Error::ObserverStop { t }) => {
            let (q, p) = bad.unwrap_or((pt.q, pt.p));
            return if q + p < NEAR_SADDLE_GUARD {
                Err(Error::StepUnderflow { t })
            } else {
                Err(Error::ChartExit { q, p })
            };
        }
        Err(e) => return Err(e),
    };
    Ok(SectionPoint {
        q: y.v[0],
        p: y.v[1],
        jacobian: with_jacobian.then(|| Mat2 {
            a: y.v[2],
            b: y.v[4],
            c: y.v[3],
            d: y.v[5],
        }),
    })
}

/// det(DP) w(P z) / w(z) - 1 with w = (q+p)^{-3}: the singular-area defect
/// of one return-map evaluation.
pub fn area_defect(pt: &SectionPoint, field: &KField, tol: f64) -> Result<f64> {
    let out = poincare_map(pt, field, tol, true)?;
    let jac = out.jacobian.expect("jacobian requested");
    let w_ratio = ((pt.q + pt.p) / (out.q + out.p)).powi(3);
    Ok(jac.det() * w_ratio - 1.0)
}

/// || R P R (P z) - z ||: pointwise defect of the reversibility
/// R o P o R = P^{-1}, R(q, p) = (p, q).
pub fn involution_defect(pt: &SectionPoint, field: &KField, tol: f64) -> Result<f64> {
    let w = poincare_map(pt, field, tol, false)?;
    let rw = SectionPoint::new(w.p, w.q);
    let prw = poincare_map(&rw, field, tol, false)?;
    Ok(((prw.q - pt.p).powi(2) + (prw.p - pt.q).powi(2)).sqrt())
}

/// Solve the graph invariance condition order by order for the local stable
/// manifold {p = gamma(q, phi)}:
///
/// ```text
/// (q+g)^3 K_q(q,g,phi) + g_q (q+g)^3 K_p(q,g,phi) - PHI_RATE g_phi = 0.
/// ```
///
/// Returns the coefficient series of gamma^s. The unstable graph follows by
/// the q <-> p swap (see [`local_unstable_series`]).
pub fn local_manifold_series(
    k_series: &FourierTaylorSeries,
    order: usize,
) -> Result<FourierTaylorSeries> {
    if order > k_series.caps.degree {
        return Err(Error::CapOverflow {
            deg: order,
            cap: k_series.caps.degree,
        });
    }
    if order > 12 {
        return Err(Error::CapOverflow { deg: order, cap: 12 });
    }
    let caps = k_series.caps;
    let mut gamma = FourierTaylorSeries::zero(caps);
    for _ in 0..=caps.degree + 2 {
        let res = invariance_residual(k_series, &gamma)?;
        let update = solve_linearized(&res, caps)?;
        if update.max_abs() < 1e-15 {
            break;
        }
        gamma = gamma.sub(&update)?;
    }
    // truncate to the requested order: the invariance defect of the result
    // is then O(q^{order+1})
    let mut truncated = FourierTaylorSeries::zero(caps);
    for (l, m, k, p, v) in gamma.iter_coeffs() {
        if l <= order {
            truncated.add_to(l, m, k, p, v);
        }
    }
    // sanity: residual orders covered by the solve must be dead
    let res = invariance_residual(k_series, &truncated)?;
    let mut bad = 0.0f64;
    for (l, m, _, _, v) in res.iter_coeffs() {
        debug_assert_eq!(m, 0);
        if l <= order {
            bad = bad.max(v.abs());
        }
    }
    if bad > 1e-9 {
        return Err(Error::ResonanceObstruction {
            what: format!("manifold series residual {bad}"),
        });
    }
    Ok(truncated)
}

/// Unstable graph q = gamma^u(p, phi), via the swap conjugacy.
pub fn local_unstable_series(
    k_series: &FourierTaylorSeries,
    order: usize,
) -> Result<FourierTaylorSeries> {
    let swapped = k_series.swap_qp();
    Ok(local_manifold_series(&swapped, order)?.swap_qp())
}

/// Residual of the invariance identity for a candidate graph (series in
/// (q, phi) with the p slot unused).
pub fn invariance_residual(
    k_series: &FourierTaylorSeries,
    gamma: &FourierTaylorSeries,
) -> Result<FourierTaylorSeries> {
    let caps = k_series.caps;
    let kq_on = compose_on_graph(&k_series.derivative_q(), gamma)?;
    let kp_on = compose_on_graph(&k_series.derivative_p(), gamma)?;
    let q1 = FourierTaylorSeries::monomial(caps, 1, 0, 0, Parity::Cos, 1.0);
    let qg = q1.add(gamma)?;
    let qg3 = qg.mul(&qg)?.mul(&qg)?;
    let gq = gamma.derivative_q();
    let term = qg3.mul(&kq_on)?.add(&qg3.mul(&gq.mul(&kp_on)?)?)?;
    term.sub(&gamma.derivative_t().scale(PHI_RATE))
}

/// Substitute p -> gamma(q, phi) in a series.
fn compose_on_graph(
    s: &FourierTaylorSeries,
    gamma: &FourierTaylorSeries,
) -> Result<FourierTaylorSeries> {
    let caps = s.caps;
    let mut out = FourierTaylorSeries::zero(caps);
    let mut gpow = FourierTaylorSeries::monomial(caps, 0, 0, 0, Parity::Cos, 1.0);
    for m in 0..=caps.degree {
        let mut c_m = FourierTaylorSeries::zero(caps);
        for (l, mm, k, p, v) in s.iter_coeffs() {
            if mm == m {
                c_m.add_to(l, 0, k, p, v);
            }
        }
        if c_m.max_abs() > 0.0 {
            out = out.add(&c_m.mul(&gpow)?)?;
        }
        gpow = gpow.mul(gamma)?;
        if gpow.is_negligible() {
            break;
        }
    }
    Ok(out)
}

/// One sweep of the linearized solve. The linearization of the invariance
/// residual around a graph is L[d] = -q^3 d - q^4 d_q - PHI_RATE d_phi
/// (+ higher order), so the Newton update solves L[d] = R order by order:
/// the order-m mean fixes mean(d_{m-3}) = -mean(R_m)/(m-2), and the
/// oscillatory part integrates d_m' = -(R_m + (m-2) d_{m-3})/PHI_RATE.
fn solve_linearized(res: &FourierTaylorSeries, caps: Caps) -> Result<FourierTaylorSeries> {
    let mut d = FourierTaylorSeries::zero(caps);
    for m in 0..=caps.degree {
        let factor = m as f64 - 2.0; // coefficient of d_{m-3} in -L
        if m >= 5 {
            let mean = res.get(m, 0, 0, Parity::Cos);
            if factor.abs() > 1e-14 {
                d.set(m - 3, 0, 0, Parity::Cos, -mean / factor);
            } else if mean.abs() > COEF_TOL {
                return Err(Error::ResonanceObstruction {
                    what: format!("manifold mean obstruction at order {m}"),
                });
            }
        }
        for k in 1..=caps.harmonic {
            let mut rc = res.get(m, 0, k, Parity::Cos);
            let mut rs = res.get(m, 0, k, Parity::Sin);
            if m >= 3 {
                rc += factor * d.get(m - 3, 0, k, Parity::Cos);
                rs += factor * d.get(m - 3, 0, k, Parity::Sin);
            }
            // d_m = a cos + b sin; d_m' = b k cos - a k sin = -(rc cos + rs sin)/c
            d.set(m, 0, k, Parity::Sin, -rc / (k as f64 * PHI_RATE));
            d.set(m, 0, k, Parity::Cos, rs / (k as f64 * PHI_RATE));
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcgehee::k_series;
    use crate::models::ModelParams;

    fn field() -> KField {
        let p = ModelParams::rc3bp(1e-3, 10.0).unwrap();
        KField::new(k_series(&p, Caps::new(10, 8)).unwrap())
    }

    #[test]
    fn kernel_flow_has_closed_form() {
        // on {p = 0}: dq/dtau = -q^4, q(t) = q0 (1 + 3 q0^3 t)^{-1/3}
        let f = KField::kernel(Caps::new(10, 8));
        let q0 = 0.12;
        let tr = integrate(&McGeheeState::new(q0, 0.0, 0.0), 40.0, 1e-12, &f).unwrap();
        let (t, st) = *tr.samples.last().unwrap();
        let expect = q0 / (1.0 + 3.0 * q0.powi(3) * t).powf(1.0 / 3.0);
        assert!((st.q - expect).abs() < 1e-11, "{} vs {expect}", st.q);
        assert!(st.p.abs() < 1e-14);
    }

    #[test]
    fn kepler_reversibility() {
        // mu = 0: trajectory from (a, a) symmetric under (q,p,t) -> (p,q,-t)
        let p = ModelParams::rc3bp(0.0, 10.0).unwrap();
        let f = KField::new(k_series(&p, Caps::new(10, 8)).unwrap());
        let a = 0.1;
        let fw = integrate(&McGeheeState::new(a, a, 0.0), 2.0, 1e-12, &f).unwrap();
        let bw = integrate(&McGeheeState::new(a, a, 0.0), -2.0, 1e-12, &f).unwrap();
        let (_, sf) = *fw.samples.last().unwrap();
        let (_, sb) = *bw.samples.last().unwrap();
        assert!((sf.q - sb.p).abs() < 1e-10 && (sf.p - sb.q).abs() < 1e-10);
    }

    #[test]
    fn roundtrip_forward_backward() {
        let f = field();
        let start = McGeheeState::new(0.09, 0.11, 0.0);
        let fw = integrate(&start, 1.5, 1e-12, &f).unwrap();
        let (t1, s1) = *fw.samples.last().unwrap();
        let back = integrate(&McGeheeState::new(s1.q, s1.p, s1.phi), -t1, 1e-12, &f).unwrap();
        let (_, s0) = *back.samples.last().unwrap();
        assert!((s0.q - start.q).abs() < 1e-11 && (s0.p - start.p).abs() < 1e-11);
    }

    #[test]
    fn energy_drift_in_autonomous_limit() {
        let p = ModelParams::rc3bp(0.0, 10.0).unwrap();
        let f = KField::new(k_series(&p, Caps::new(10, 8)).unwrap());
        let tol = 1e-12;
        let span = 3.0;
        let tr = integrate(&McGeheeState::new(0.1, 0.12, 0.0), span, tol, &f).unwrap();
        let k0 = f.k(0.1, 0.12, 0.0);
        let mut drift: f64 = 0.0;
        for (_, st) in &tr.samples {
            drift = drift.max((f.k(st.q, st.p, st.phi) - k0).abs());
        }
        assert!(drift <= 100.0 * tol * span, "drift {drift}");
    }

    #[test]
    fn return_map_fixes_origin_asymptotically() {
        // DP -> Id at points approaching O
        let f = field();
        let mut prev = f64::INFINITY;
        for scale in [0.05, 0.02, 0.008] {
            let pt = SectionPoint::new(scale, scale * 0.9);
            let out = poincare_map(&pt, &f, 1e-12, true).unwrap();
            let j = out.jacobian.unwrap();
            let dev = Mat2 {
                a: j.a - 1.0,
                b: j.b,
                c: j.c,
                d: j.d - 1.0,
            }
            .norm();
            assert!(dev < prev + 1e-12);
            prev = dev;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn return_map_jacobian_matches_finite_differences() {
        let f = field();
        let pt = SectionPoint::new(0.1, 0.09);
        let j = poincare_map(&pt, &f, 1e-13, true).unwrap().jacobian.unwrap();
        let h = 1e-6;
        let ppq = poincare_map(&SectionPoint::new(0.1 + h, 0.09), &f, 1e-13, false).unwrap();
        let pmq = poincare_map(&SectionPoint::new(0.1 - h, 0.09), &f, 1e-13, false).unwrap();
        let ppp = poincare_map(&SectionPoint::new(0.1, 0.09 + h), &f, 1e-13, false).unwrap();
        let pmp = poincare_map(&SectionPoint::new(0.1, 0.09 - h), &f, 1e-13, false).unwrap();
        let fd = Mat2 {
            a: (ppq.q - pmq.q) / (2.0 * h),
            b: (ppp.q - pmp.q) / (2.0 * h),
            c: (ppq.p - pmq.p) / (2.0 * h),
            d: (ppp.p - pmp.p) / (2.0 * h),
        };
        let rel = Mat2 {
            a: j.a - fd.a,
            b: j.b - fd.b,
            c: j.c - fd.c,
            d: j.d - fd.d,
        }
        .norm()
            / j.norm();
        assert!(rel < 1e-6, "relative jacobian defect {rel}");
    }

    #[test]
    fn singular_area_preserved() {
        let f = field();
        for &(q, p) in &[(0.1, 0.1), (0.14, 0.07), (0.06, 0.12)] {
            let d = area_defect(&SectionPoint::new(q, p), &f, 1e-13).unwrap();
            assert!(d.abs() < 1e-8, "area defect {d} at ({q},{p})");
        }
    }

    #[test]
    fn involution_holds_for_rc3bp() {
        let f = field();
        for &(q, p) in &[(0.1, 0.1), (0.12, 0.08)] {
            let d = involution_defect(&SectionPoint::new(q, p), &f, 1e-13).unwrap();
            assert!(d < 1e-8, "involution defect {d}");
        }
    }

    #[test]
    fn manifold_series_zero_for_kernel() {
        let g = local_manifold_series(&FourierTaylorSeries::kernel(Caps::new(10, 8)), 8).unwrap();
        assert!(g.max_abs() < 1e-14);
    }

    #[test]
    fn manifold_series_residual_decays_with_order() {
        let f = field();
        let q_test = 1e-2;
        let mut defects = Vec::new();
        for order in [4usize, 6, 8] {
            let g = local_manifold_series(&f.series, order).unwrap();
            let res = invariance_residual(&f.series, &g).unwrap();
            // evaluate the residual at q = q_test (p slot unused)
            let v = res.eval(q_test, 0.0, 0.3).abs();
            defects.push(v);
        }
        assert!(defects[0] > defects[1] && defects[1] >= defects[2] * 0.99);
    }

    #[test]
    fn manifold_series_consistent_with_flow() {
        // points on the graph stay near it under the flow
        let f = field();
        let order = 8;
        let g = local_manifold_series(&f.series, order).unwrap();
        let q0 = 0.05;
        let p0 = g.eval(q0, 0.0, 0.0);
        let tr = integrate(&McGeheeState::new(q0, p0, 0.0), 6.0, 1e-12, &f).unwrap();
        let (_, st) = *tr.samples.last().unwrap();
        let p_graph = g.eval(st.q, 0.0, st.phi);
        // the defect stays at the size of the truncation error
        let budget = 100.0 * q0.powi(order as i32 + 1);
        assert!(
            (st.p - p_graph).abs() < budget,
            "graph defect {} vs budget {budget}",
            (st.p - p_graph).abs()
        );
    }
}
