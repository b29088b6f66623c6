//! Homological-equation solvers for the normal-form steps.

use super::{FourierTaylorSeries, Parity, COEF_TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomologicalKind {
    /// Solve q F_q - p F_p = -h for time-independent homogeneous h free of
    /// q^m p^m monomials.
    ResonantPoly,
    /// Solve F_t = h for h with zero t-mean, choosing the parity-flipping
    /// primitive.
    PeriodicZeroMean,
    /// Solve L_k f = h with L_k f = k q^{3-k} f - q^{4-k} f_q + q^{-k} f_t,
    /// for a series in (q, t) alone, by triangular back-substitution.
    LkTriangular,
}

pub fn solve_homological(
    h: &FourierTaylorSeries,
    kind: HomologicalKind,
) -> Result<FourierTaylorSeries> {
    match kind {
        HomologicalKind::ResonantPoly => solve_resonant_poly(h),
        HomologicalKind::PeriodicZeroMean => h.primitive_t(),
        HomologicalKind::LkTriangular => solve_lk(h, 1),
    }
}

fn solve_resonant_poly(h: &FourierTaylorSeries) -> Result<FourierTaylorSeries> {
    let mut f = FourierTaylorSeries::zero(h.caps);
    for (l, m, k, p, v) in h.iter_coeffs() {
        if k != 0 || p == Parity::Sin {
            return Err(Error::OrderMismatch {
                what: "resonant_poly expects a time-independent input".into(),
            });
        }
        if l == m {
            if v.abs() > COEF_TOL {
                return Err(Error::ResonanceObstruction {
                    what: format!("resonant monomial q^{l} p^{m} with coefficient {v}"),
                });
            }
            continue;
        }
        // (q d_q - p d_p) q^l p^m = (l - m) q^l p^m
        f.set(l, m, 0, Parity::Cos, -v / (l as f64 - m as f64));
    }
    Ok(f)
}

/// Triangular solve of L_k f = h for 1-d series f(q, t). Multiplying by q^k
/// the equation reads f_t + (k - n + 3) f_{n-3} = [q^k h]_n per power of q:
/// means are fixed three orders up, oscillatory parts by integration.
pub fn solve_lk(h: &FourierTaylorSeries, k_op: i32) -> Result<FourierTaylorSeries> {
    let caps = h.caps;
    for (_, m, _, _, _) in h.iter_coeffs() {
        if m != 0 {
            return Err(Error::OrderMismatch {
                what: "L_k acts on series in (q, t) only".into(),
            });
        }
    }
    // rhs_n = coefficient rows of q^k h
    let shift = k_op.max(0) as usize;
    let mut f = FourierTaylorSeries::zero(caps);
    for n in 0..=caps.degree {
        // order-n equation: f_n'(t) + (k - (n as i64 -3)) f_{n-3} = rhs_n
        let rhs_l = n as i64 - shift as i64; // q^k h contributes h_{n-k}
        let factor = k_op as f64 - (n as f64 - 3.0);
        // mean part determines mean(f_{n-3})
        if n >= 3 {
            let mean_rhs = if (0..=caps.degree as i64).contains(&rhs_l) {
                h.get(rhs_l as usize, 0, 0, Parity::Cos)
            } else {
                0.0
            };
            if factor.abs() < 1e-14 {
                if mean_rhs.abs() > COEF_TOL {
                    return Err(Error::ResonanceObstruction {
                        what: format!("L_k mean obstruction at order {n}"),
                    });
                }
            } else {
                f.set(n - 3, 0, 0, Parity::Cos, mean_rhs / factor);
            }
        }
        // oscillatory part of f_n from f_n' = rhs_n - factor f_{n-3}
        for k in 1..=caps.harmonic {
            let (mut rc, mut rs) = (0.0, 0.0);
            if (0..=caps.degree as i64).contains(&rhs_l) {
                rc = h.get(rhs_l as usize, 0, k, Parity::Cos);
                rs = h.get(rhs_l as usize, 0, k, Parity::Sin);
            }
            if n >= 3 {
                rc -= factor * f.get(n - 3, 0, k, Parity::Cos);
                rs -= factor * f.get(n - 3, 0, k, Parity::Sin);
            }
            // f_n' has cos-coef k*b, sin-coef -k*a for f_n = a cos + b sin
            f.set(n, 0, k, Parity::Sin, rc / k as f64);
            f.set(n, 0, k, Parity::Cos, -rs / k as f64);
        }
    }
    Ok(f)
}

/// Apply L_k directly (for verification): L_k f = k q^{3-k} f - q^{4-k} f_q
/// + q^{-k} f_t. Requires k <= 3 so all powers stay polynomial after the
/// triangular structure; entries that would underflow q^0 are dropped, which
/// matches the back-substitution convention.
pub fn apply_lk(f: &FourierTaylorSeries, k_op: i32) -> Result<FourierTaylorSeries> {
    let shift = k_op as usize;
    let mut out = FourierTaylorSeries::zero(f.caps);
    for (l, _m, k, p, v) in f.iter_coeffs() {
        // k q^{3-k} f
        out.add_to(l + 3 - shift, 0, k, p, k_op as f64 * v);
        // - q^{4-k} f_q
        if l >= 1 {
            out.add_to(l + 3 - shift, 0, k, p, -(l as f64) * v);
        }
        // q^{-k} f_t
        if k > 0 && l >= shift {
            match p {
                Parity::Cos => out.add_to(l - shift, 0, k, Parity::Sin, -v * k as f64),
                Parity::Sin => out.add_to(l - shift, 0, k, Parity::Cos, v * k as f64),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Caps;

    fn caps() -> Caps {
        Caps::new(10, 8)
    }

    #[test]
    fn resonant_poly_cubic() {
        // h = q^3: F = -q^3/3 (eigenvalue l - m = 3)
        let h = FourierTaylorSeries::monomial(caps(), 3, 0, 0, Parity::Cos, 1.0);
        let f = solve_homological(&h, HomologicalKind::ResonantPoly).unwrap();
        assert!((f.get(3, 0, 0, Parity::Cos) + 1.0 / 3.0).abs() < 1e-15);
        // verify q F_q - p F_p = -h
        let lhs = f
            .derivative_q()
            .mul(&FourierTaylorSeries::monomial(caps(), 1, 0, 0, Parity::Cos, 1.0))
            .unwrap()
            .sub(
                &f.derivative_p()
                    .mul(&FourierTaylorSeries::monomial(caps(), 0, 1, 0, Parity::Cos, 1.0))
                    .unwrap(),
            )
            .unwrap();
        assert!(lhs.add(&h).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn resonant_monomial_rejected() {
        let h = FourierTaylorSeries::monomial(caps(), 2, 2, 0, Parity::Cos, 1.0);
        assert!(matches!(
            solve_homological(&h, HomologicalKind::ResonantPoly),
            Err(Error::ResonanceObstruction { .. })
        ));
    }

    #[test]
    fn nonzero_mean_rejected() {
        let h = FourierTaylorSeries::monomial(caps(), 1, 1, 0, Parity::Cos, 0.5);
        assert!(solve_homological(&h, HomologicalKind::PeriodicZeroMean).is_err());
    }

    #[test]
    fn lk_solution_satisfies_equation() {
        // build h in the image of L_1 and recover a solution
        let mut rhs = FourierTaylorSeries::zero(caps());
        rhs.set(4, 0, 1, Parity::Cos, 0.8);
        rhs.set(5, 0, 2, Parity::Sin, -0.3);
        rhs.set(6, 0, 0, Parity::Cos, 0.45);
        let f = solve_lk(&rhs, 1).unwrap();
        let back = apply_lk(&f, 1).unwrap();
        // compare on the orders where the triangular solution is complete
        for n in 0..=7 {
            for k in 0..=caps().harmonic {
                for p in [Parity::Cos, Parity::Sin] {
                    let d = (back.get(n, 0, k, p) - rhs.get(n, 0, k, p)).abs();
                    assert!(d < 1e-12, "L1 residual {d} at q^{n}, k={k}");
                }
            }
        }
    }
}
