//! Order-by-order elimination around the degenerate saddle, and the
//! manifold-straightening transformations.
//!
//! The input Hamiltonian is `N + H1` with `N = -qp + I` and `H1` divisible
//! by (q+p)^3, even in (q, p) and even in t. At each degree the time mean is
//! killed through the polynomial homological equation (after exact division
//! by (q+p)^3) and the oscillatory part through a time primitive; parities
//! alternate exactly as the graded bracket algebra dictates, so no resonant
//! monomial is ever met.

use super::homological::{solve_homological, HomologicalKind};
use super::{FourierTaylorSeries, Parity, COEF_TOL};
use crate::{Error, Result};

/// One generating function of the chain, annotated with the degree it kills.
#[derive(Clone, Debug)]
pub struct Generator {
    pub series: FourierTaylorSeries,
    pub killed_degree: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GeneratorChain {
    pub steps: Vec<Generator>,
}

impl GeneratorChain {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Kill every coefficient class of total degree 2..=target_degree except the
/// kernel term -qp. Returns the transformed Hamiltonian and the chain.
pub fn normal_form(
    h: &FourierTaylorSeries,
    target_degree: usize,
) -> Result<(FourierTaylorSeries, GeneratorChain)> {
    let caps = h.caps;
    if target_degree > caps.degree {
        return Err(Error::CapOverflow {
            deg: target_degree,
            cap: caps.degree,
        });
    }
    let kernel = FourierTaylorSeries::kernel(caps);
    let mut cur = h.clone();
    let mut chain = GeneratorChain::default();

    for d in 2..=target_degree {
        let h1 = cur.sub(&kernel)?;
        let comp = h1.component(d);
        if comp.max_abs() <= COEF_TOL {
            continue;
        }
        let mut f = FourierTaylorSeries::zero(caps);
        let mean = comp.t_mean();
        if mean.max_abs() > COEF_TOL {
            if d < 3 {
                return Err(Error::ResonanceObstruction {
                    what: format!("unkillable mean part at degree {d}"),
                });
            }
            let divided = mean.div_qp3_homogeneous(d)?;
            let f1 = solve_homological(&divided, HomologicalKind::ResonantPoly)?;
            f = f.add(&f1)?;
        }
        let osc = comp.zero_mean_part();
        if osc.max_abs() > COEF_TOL {
            let f2 = solve_homological(&osc, HomologicalKind::PeriodicZeroMean)?;
            f = f.add(&f2)?;
        }
        if f.max_abs() <= COEF_TOL {
            continue;
        }
        cur = cur.lie_transform(&f)?;
        chain.steps.push(Generator {
            series: f,
            killed_degree: d,
        });
        // the killed class must actually be gone
        let res = cur.sub(&kernel)?.component(d).max_abs();
        if res > 1e-9 {
            return Err(Error::ResonanceObstruction {
                what: format!("degree {d} survived elimination (residual {res})"),
            });
        }
    }
    Ok((cur, chain))
}

/// Maximum absolute coefficient over the killable classes (total degree in
/// 2..=target except the monomial q p with k = 0).
pub fn killable_residual(h: &FourierTaylorSeries, target_degree: usize) -> f64 {
    let mut res = 0.0f64;
    for (l, m, k, p, v) in h.iter_coeffs() {
        let d = l + m;
        if d < 2 || d > target_degree {
            continue;
        }
        if l == 1 && m == 1 && k == 0 && p == Parity::Cos {
            continue;
        }
        res = res.max(v.abs());
    }
    res
}

/// Straighten the local stable then unstable manifolds given their graph
/// series p = gamma_s(q, t), q = gamma_u(p, t) (as 1-d series with the
/// second slot unused). Both graphs must start at degree >= 4, which is the
/// situation after the formal elimination steps.
pub fn straighten_manifolds(
    h: &FourierTaylorSeries,
    gamma_s: &FourierTaylorSeries,
    gamma_u: &FourierTaylorSeries,
    order: usize,
) -> Result<FourierTaylorSeries> {
    let caps = h.caps;
    if gamma_s.caps != caps || gamma_u.caps != caps {
        return Err(Error::OrderMismatch {
            what: "gamma caps differ from the Hamiltonian caps".into(),
        });
    }
    for g in [gamma_s, gamma_u] {
        if let Some(d) = g.min_degree() {
            if d < 4 {
                return Err(Error::OrderMismatch {
                    what: format!("manifold graph starts at degree {d} < 4; run the formal steps first"),
                });
            }
        }
    }

    // first step: straighten the stable manifold {p = gamma_s(q, t)}
    let (h2, _p_shift) = straighten_one_side(h, gamma_s, false)?;

    // express the unstable graph in the new variables: q = g~(p, t) solving
    // q = gamma_u(p + P(q, p, t), t); at these orders one substitution sweep
    // is exact within the caps
    let gamma_u_p = swap_to_p_series(gamma_u);
    let mut gamma_u_new = gamma_u_p.clone();
    for _ in 0..3 {
        let w = compose_q(&_p_shift, &gamma_u_new)?;
        gamma_u_new = gamma_u_p.substitute_p(&w.add(&FourierTaylorSeries::zero(caps))?)?;
        if w.is_negligible() {
            break;
        }
    }

    // second step: straighten the unstable manifold (identity on {p = 0})
    let gamma_u_back = swap_to_p_series(&gamma_u_new);
    let (h3, _q_shift) = straighten_one_side(&h2, &gamma_u_back, true)?;

    // post-check: axis coefficients through `order` must vanish
    let mut res = 0.0f64;
    for (l, m, _k, _p, v) in h3.iter_coeffs() {
        if (m == 0 || l == 0) && l + m >= 2 && l + m <= order && !(l == 1 && m == 1) {
            res = res.max(v.abs());
        }
    }
    if res > 1e-9 {
        return Err(Error::ResonanceObstruction {
            what: format!("axis terms survive straightening (residual {res})"),
        });
    }
    Ok(h3)
}

/// One straightening step. For the stable side (`unstable = false`) the graph
/// is p = gamma(q, t) and the change is (q, p) -> (q, p + P); for the
/// unstable side the graph is q = gamma(p, t) and the roles are exchanged.
/// Returns the transformed Hamiltonian and the shift series.
fn straighten_one_side(
    h: &FourierTaylorSeries,
    gamma: &FourierTaylorSeries,
    unstable: bool,
) -> Result<(FourierTaylorSeries, FourierTaylorSeries)> {
    let caps = h.caps;
    if gamma.max_abs() <= COEF_TOL {
        return Ok((h.clone(), FourierTaylorSeries::zero(caps)));
    }
    let g = if unstable { swap_to_p_series(gamma) } else { gamma.clone() };
    // u = gamma / q as a series (gamma = O(q^4) so u = O(q^3))
    let u = shift_down_q(&g)?;
    // dF = (1/(2q^2)) ((1+u)^-2 - 1) = (1/(2q^2)) (-2u + 3u^2 - 4u^3 + ...)
    let mut series_part = FourierTaylorSeries::zero(caps);
    let mut upow = u.clone();
    let mut coef = -2.0;
    for j in 1..=4 {
        series_part = series_part.add(&upow.scale(coef * 0.5))?;
        upow = upow.mul(&u)?;
        coef = -coef / (j as f64) * (j as f64 + 2.0); // (-1)^j (j+1), next term
        if upow.is_negligible() {
            break;
        }
    }
    let df = shift_down_q(&shift_down_q(&series_part)?)?; // divide by q^2
    // F(q, t) = integral of dF in q, then its time derivative for the I slot
    let mut f_int = FourierTaylorSeries::zero(caps);
    for (l, m, k, p, v) in df.iter_coeffs() {
        debug_assert_eq!(m, 0);
        f_int.add_to(l + 1, 0, k, p, v / (l as f64 + 1.0));
    }
    let f_t = f_int.derivative_t();

    // w = 2 (q+p)^2 dF; shift = (q+p) ((1+w)^{-1/2} - 1)
    let qp = FourierTaylorSeries::monomial(caps, 1, 0, 0, Parity::Cos, 1.0)
        .add(&FourierTaylorSeries::monomial(caps, 0, 1, 0, Parity::Cos, 1.0))?;
    let w = qp.mul(&qp)?.mul(&df)?.scale(2.0);
    // (1+w)^{-1/2} - 1 = -w/2 + 3w^2/8 - 5w^3/16 + ...
    let mut bracket = FourierTaylorSeries::zero(caps);
    let mut wpow = w.clone();
    let coefs = [-0.5, 0.375, -0.3125, 0.2734375];
    for &c in &coefs {
        bracket = bracket.add(&wpow.scale(c))?;
        wpow = wpow.mul(&w)?;
        if wpow.is_negligible() {
            break;
        }
    }
    let shift = qp.mul(&bracket)?;

    let transformed = if unstable {
        // change (q, p) -> (q + Q, p), Q built from the p-graph
        let shift_sw = shift.swap_qp();
        h.substitute_q(&shift_sw)?
            .sub(&swap_to_p_series(&f_t).scale(h.i_coef))?
    } else {
        h.substitute_p(&shift)?.sub(&f_t.scale(h.i_coef))?
    };
    Ok((transformed, shift))
}

/// Divide a series by q (every l index down by one); errors on l = 0 terms.
fn shift_down_q(s: &FourierTaylorSeries) -> Result<FourierTaylorSeries> {
    let mut out = FourierTaylorSeries::zero(s.caps);
    for (l, m, k, p, v) in s.iter_coeffs() {
        if l == 0 {
            return Err(Error::OrderMismatch {
                what: "series not divisible by q".into(),
            });
        }
        out.add_to(l - 1, m, k, p, v);
    }
    Ok(out)
}

/// Reinterpret a series in (q, t) as one in (p, t) and vice versa.
fn swap_to_p_series(s: &FourierTaylorSeries) -> FourierTaylorSeries {
    s.swap_qp()
}

/// Evaluate series(q -> inner(p, t), p, t) for `series` depending on q only
/// through powers; used for shift compositions along graphs.
fn compose_q(
    series: &FourierTaylorSeries,
    inner: &FourierTaylorSeries,
) -> Result<FourierTaylorSeries> {
    let caps = series.caps;
    let mut out = FourierTaylorSeries::zero(caps);
    // group by power of q: series = sum_l q^l c_l(p, t)
    let mut qpow = FourierTaylorSeries::monomial(caps, 0, 0, 0, Parity::Cos, 1.0);
    for l in 0..=caps.degree {
        let mut c_l = FourierTaylorSeries::zero(caps);
        for (ll, m, k, p, v) in series.iter_coeffs() {
            if ll == l {
                c_l.add_to(0, m, k, p, v);
            }
        }
        if c_l.max_abs() > 0.0 {
            out = out.add(&c_l.mul(&qpow)?)?;
        }
        qpow = qpow.mul(inner)?;
        if qpow.is_negligible() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::Caps;

    fn caps() -> Caps {
        Caps::new(10, 8)
    }

    #[test]
    fn kernel_is_fixed_point() {
        let n = FourierTaylorSeries::kernel(caps());
        let (out, chain) = normal_form(&n, 10).unwrap();
        assert!(chain.is_empty());
        assert!(out.sub(&n).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn single_step_removes_quartic_cosine() {
        // H = N + q^4 cos t (a zero-mean class): one step must kill it
        let mut h = FourierTaylorSeries::kernel(caps());
        h.add_to(4, 0, 1, Parity::Cos, 0.02);
        let (out, chain) = normal_form(&h, 4).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert!(out.get(4, 0, 1, Parity::Cos).abs() < 1e-14);
    }

    #[test]
    fn divisible_mean_class_is_killed() {
        // H = N + 0.05 (q+p)^3 (q + p) -- an even, (q+p)^3-divisible mean part
        let qp = FourierTaylorSeries::monomial(caps(), 1, 0, 0, Parity::Cos, 1.0)
            .add(&FourierTaylorSeries::monomial(caps(), 0, 1, 0, Parity::Cos, 1.0))
            .unwrap();
        let h = FourierTaylorSeries::kernel(caps())
            .add(&qp.mul_qp3().scale(0.05))
            .unwrap();
        let (out, _) = normal_form(&h, 8).unwrap();
        assert!(
            killable_residual(&out, 8) < 1e-12,
            "residual {}",
            killable_residual(&out, 8)
        );
    }

    #[test]
    fn idempotent_at_fixed_caps() {
        // admissible perturbation: (q+p)^3 (q^2 + p^2) mean part plus a
        // zero-mean even class
        let sq = FourierTaylorSeries::monomial(caps(), 2, 0, 0, Parity::Cos, 1.0)
            .add(&FourierTaylorSeries::monomial(caps(), 0, 2, 0, Parity::Cos, 1.0))
            .unwrap();
        let mut pert = sq.mul_qp3().scale(0.03);
        pert.add_to(4, 2, 2, Parity::Cos, 0.01);
        let h = FourierTaylorSeries::kernel(caps()).add(&pert).unwrap();
        let (out1, _) = normal_form(&h, 9).unwrap();
        let (out2, chain2) = normal_form(&out1, 9).unwrap();
        assert!(chain2.is_empty());
        assert!(out2.sub(&out1).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn straighten_identity_for_zero_graphs() {
        let h = FourierTaylorSeries::kernel(caps());
        let z = FourierTaylorSeries::zero(caps());
        let out = straighten_manifolds(&h, &z, &z, 8).unwrap();
        assert!(out.sub(&h).unwrap().max_abs() < 1e-15);
    }
}
