//! McGehee compactification composed with the pi/4 rotation.
//!
//! The change (r, y) -> (q, p) is x = sqrt(2/r), q = (x - y)/sqrt(2),
//! p = (x + y)/sqrt(2). It pulls dr^dy back to -2^{7/2} (q+p)^{-3} dq^dp and
//! turns the reduced Hamiltonian into K(q, p, phi) = -qp + O_4(q, p), with
//! the degenerate saddle at the origin. Under the rescaled clock the angle
//! advances at the constant rate 2^{7/2} per unit of rescaled time; the
//! local stable manifold is {p = 0} and the unstable one {q = 0} (pinned by
//! dp/ds = +p + h.o.t. near the p axis).

use crate::models::{self, ModelId, ModelParams};
use crate::series::{Caps, FourierTaylorSeries, Parity};
use crate::{Error, Result};

/// |phi-dot| in rescaled time.
pub const PHI_RATE: f64 = 11.313708498984761; // 2^{7/2}

/// Numeric box standing in for the validity sector: all desk experiments
/// stay inside [0, SECTOR_BOUND]^2.
pub const SECTOR_BOUND: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McGeheeState {
    pub q: f64,
    pub p: f64,
    pub phi: f64,
}

impl McGeheeState {
    pub fn new(q: f64, p: f64, phi: f64) -> Self {
        McGeheeState { q, p, phi }
    }

    pub fn in_sector(&self) -> bool {
        self.q + self.p > 0.0
            && self.q.abs() <= SECTOR_BOUND
            && self.p.abs() <= SECTOR_BOUND
    }
}

/// (r, y) -> (q, p). Round-trips with [`from_mcgehee`] to 1e-14.
pub fn to_mcgehee(r: f64, y: f64) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::Domain { r, sep: 0.0 });
    }
    let x = (2.0 / r).sqrt();
    let s2 = std::f64::consts::SQRT_2;
    Ok(((x - y) / s2, (x + y) / s2))
}

/// (q, p) -> (r, y) on the physical branch q + p > 0.
pub fn from_mcgehee(q: f64, p: f64) -> Result<(f64, f64)> {
    let x = (q + p) / std::f64::consts::SQRT_2;
    if x <= 0.0 {
        return Err(Error::ChartExit { q, p });
    }
    Ok((2.0 / (x * x), (p - q) / std::f64::consts::SQRT_2))
}

/// Singular-area weight w = (q+p)^{-3} (the symplectic density up to the
/// constant 2^{7/2}).
pub fn weight(q: f64, p: f64) -> f64 {
    (q + p).powi(-3)
}

/// K(q, p, phi) = H_red(r(q,p), y(q,p), phi): the compactified Hamiltonian.
pub fn eval_k(q: f64, p: f64, phi: f64, params: &ModelParams) -> Result<f64> {
    let (r, y) = from_mcgehee(q, p)?;
    match params.model_id {
        ModelId::Sitnikov => {
            let rho = models::sitnikov_rho(params.eps, phi);
            Ok(0.5 * y * y - 1.0 / (r * r + rho * rho).sqrt())
        }
        _ => models::reduce_jacobi(r, y, phi, params),
    }
}

/// Fourier-Taylor expansion of K for the planar models, built from the
/// multipole series of the potential and the angular-momentum root expanded
/// as a fixed point of G = -W - G^2 (q+p)^4/32.
pub fn k_series(params: &ModelParams, caps: Caps) -> Result<FourierTaylorSeries> {
    if params.model_id == ModelId::Sitnikov {
        return Err(Error::InvalidConfig(
            "k_series covers the planar models; the Sitnikov chart has no Jacobi root".into(),
        ));
    }
    // build at padded caps so that truncated interactions cannot pollute the
    // requested degrees, then crop
    let work = Caps::new(caps.degree + 4, caps.harmonic);
    let j = params.jacobi_j;

    let q1 = FourierTaylorSeries::monomial(work, 1, 0, 0, Parity::Cos, 1.0);
    let p1 = FourierTaylorSeries::monomial(work, 0, 1, 0, Parity::Cos, 1.0);
    let qp_sum = q1.add(&p1)?;
    let qp_sum2 = qp_sum.mul(&qp_sum)?;
    // 1/r = x^2/2 = (q+p)^2/4
    let inv_r = qp_sum2.scale(0.25);
    let minus_qp = q1.mul(&p1)?.scale(-1.0);

    // U as a multipole series in physical radius:
    // sum_n (1/r)^{n+1} sum_k A[n][k] cos(k phi); with 1/r = O_2 the degree
    // cap bounds n by degree/2 - 1
    let n_max = (work.degree / 2).saturating_sub(1).max(2);
    let table = models::multipole_table(params, n_max);
    let mut u_series = FourierTaylorSeries::zero(work);
    let mut inv_r_pow = inv_r.mul(&inv_r)?.mul(&inv_r)?; // (1/r)^3 for n = 2
    for row in table.iter() {
        let mut angular = FourierTaylorSeries::zero(work);
        for (k, &c) in row.iter().enumerate() {
            if c != 0.0 && k <= work.harmonic {
                angular.add_to(0, 0, k, Parity::Cos, c);
            }
        }
        u_series = u_series.add(&inv_r_pow.mul(&angular)?)?;
        inv_r_pow = inv_r_pow.mul(&inv_r)?;
        if inv_r_pow.is_negligible() {
            break;
        }
    }

    // W = y^2/2 - 1/r - U - J = -qp - U - J
    let mut w = minus_qp.sub(&u_series)?;
    w.add_to(0, 0, 0, Parity::Cos, -j);
    // G = -W - G^2 (q+p)^4 / 32, iterated to convergence in the grading
    let c4 = qp_sum2.mul(&qp_sum2)?.scale(1.0 / 32.0);
    let mut g = w.scale(-1.0);
    for _ in 0..(work.degree / 2 + 2) {
        g = w.scale(-1.0).sub(&g.mul(&g)?.mul(&c4)?)?;
    }
    let residual = g.add(&w)?.add(&g.mul(&g)?.mul(&c4)?)?.max_abs();
    if residual > 1e-10 {
        return Err(Error::ReductionInvalid {
            r: 0.0,
            y: 0.0,
            disc: residual,
        });
    }
    // K = J - G
    let mut k = g.scale(-1.0);
    k.add_to(0, 0, 0, Parity::Cos, j);

    // crop to the requested caps
    let mut out = FourierTaylorSeries::zero(caps);
    for (l, m, kk, p, v) in k.iter_coeffs() {
        if l + m <= caps.degree && kk <= caps.harmonic {
            out.add_to(l, m, kk, p, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::rc3bp(1e-3, 10.0).unwrap()
    }

    #[test]
    fn roundtrip_and_diagonal_point() {
        // (r, y) = (2, 0) -> x = 1 -> (q, p) = (1/sqrt2, 1/sqrt2)
        let (q, p) = to_mcgehee(2.0, 0.0).unwrap();
        let s = 1.0 / std::f64::consts::SQRT_2;
        assert!((q - s).abs() < 1e-15 && (p - s).abs() < 1e-15);
        for &(r, y) in &[(2.0, 0.0), (7.5, -0.3), (400.0, 0.02)] {
            let (q, p) = to_mcgehee(r, y).unwrap();
            let (r2, y2) = from_mcgehee(q, p).unwrap();
            assert!((r - r2).abs() < 1e-14 * r && (y - y2).abs() < 1e-14);
        }
    }

    #[test]
    fn area_form_factor_matches_finite_differences() {
        // det DPsi = -2^{7/2}/(q+p)^3; at the diagonal point the factor is 4
        let h = 1e-6;
        for &(q, p) in &[
            (1.0 / std::f64::consts::SQRT_2, 1.0 / std::f64::consts::SQRT_2),
            (0.1, 0.05),
            (0.21, 0.17),
        ] {
            let f = |q: f64, p: f64| from_mcgehee(q, p).unwrap();
            let (rq1, yq1) = f(q + h, p);
            let (rq0, yq0) = f(q - h, p);
            let (rp1, yp1) = f(q, p + h);
            let (rp0, yp0) = f(q, p - h);
            let drdq = (rq1 - rq0) / (2.0 * h);
            let drdp = (rp1 - rp0) / (2.0 * h);
            let dydq = (yq1 - yq0) / (2.0 * h);
            let dydp = (yp1 - yp0) / (2.0 * h);
            let det = drdq * dydp - drdp * dydq;
            let expect = -PHI_RATE / (q + p).powi(3);
            assert!(
                (det - expect).abs() < 1e-6 * expect.abs(),
                "det {det} vs {expect}"
            );
        }
    }

    #[test]
    fn k_vanishes_on_parabolic_set() {
        // mu = 0 parabolic orbits: y^2 = 2/r - J^2/r^2, K = 0 exactly
        let p = ModelParams::rc3bp(0.0, 10.0).unwrap();
        for r in [60.0, 110.0, 900.0] {
            let y = (2.0 / r - (p.jacobi_j / r).powi(2)).sqrt();
            let (q, pp) = to_mcgehee(r, y).unwrap();
            let k = eval_k(q, pp, 0.4, &p).unwrap();
            assert!(k.abs() < 1e-13, "K = {k} on the parabolic set");
        }
    }

    #[test]
    fn k_is_kernel_plus_quartic() {
        // |K + qp| <= C (|q|+|p|)^4 on a grid in [0, 0.2]^2
        let p = params();
        let mut cmax: f64 = 0.0;
        for i in 1..=10 {
            for jj in 1..=10 {
                let q = 0.02 * i as f64;
                let pp = 0.02 * jj as f64;
                let k = eval_k(q, pp, 0.9, &p).unwrap();
                let c = (k + q * pp).abs() / (q + pp).powi(4);
                cmax = cmax.max(c);
            }
        }
        assert!(cmax.is_finite() && cmax < 50.0, "C = {cmax}");
    }

    #[test]
    fn k_even_in_phi() {
        let p = params();
        let k1 = eval_k(0.12, 0.07, 1.3, &p).unwrap();
        let k2 = eval_k(0.12, 0.07, -1.3, &p).unwrap();
        assert!((k1 - k2).abs() < 1e-15);
    }

    #[test]
    fn series_matches_pointwise_k() {
        let p = params();
        let s = k_series(&p, Caps::new(12, 8)).unwrap();
        for &(q, pp) in &[(0.05, 0.03), (0.1, 0.08), (0.02, 0.11)] {
            for phi in [0.0, 1.1, 2.7] {
                let exact = eval_k(q, pp, phi, &p).unwrap();
                let approx = s.eval(q, pp, phi);
                let scale = (q + pp).powi(13); // truncation order
                assert!(
                    (exact - approx).abs() < 2e3 * scale + 1e-15,
                    "series defect {} at ({q},{pp},{phi}), budget {}",
                    (exact - approx).abs(),
                    2e3 * scale
                );
            }
        }
    }

    #[test]
    fn series_has_kernel_form() {
        let p = params();
        let s = k_series(&p, Caps::new(10, 8)).unwrap();
        assert!(s.get(0, 0, 0, Parity::Cos).abs() < 1e-13);
        assert!((s.get(1, 1, 0, Parity::Cos) + 1.0).abs() < 1e-13);
        for (l, m, _, _, v) in s.iter_coeffs() {
            if l + m < 4 && !(l == 1 && m == 1) {
                assert!(v.abs() < 1e-13, "low-order term q^{l} p^{m}: {v}");
            }
        }
        // J^2 (q+p)^4/32 at degree 4: coefficient of q^4 is J^2/32
        let expect = p.jacobi_j * p.jacobi_j / 32.0;
        assert!(
            (s.get(4, 0, 0, Parity::Cos) - expect).abs() < 1e-9 * expect.abs() + 1e-10,
            "got {}, expect {expect}",
            s.get(4, 0, 0, Parity::Cos)
        );
    }

    #[test]
    fn series_swap_and_reflection_symmetric() {
        // K(q,p,phi) = K(p,q,phi) = K(q,p,-phi) for the RC3BP
        let s = k_series(&params(), Caps::new(10, 8)).unwrap();
        assert!(s.sub(&s.swap_qp()).unwrap().max_abs() < 1e-13);
        assert!(s.odd_part_norm() < 1e-13);
    }
}
