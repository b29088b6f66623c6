//! Fourier-Taylor series algebra over the singular Poisson bracket
//!
//! ```text
//! {F, G} = (q+p)^3 (F_q G_p - F_p G_q) + (F_t G_I - F_I G_t),
//! ```
//!
//! truncated at a total-degree cap in (q, p) and a harmonic cap in t. The
//! conjugate pair (t, I) enters only through a scalar I-coefficient: the
//! Hamiltonians handled here are of the form `-qp + I + H1(q, p, t)` and no
//! operation ever produces new I-dependence.

mod homological;
mod normalform;

pub use homological::{apply_lk, solve_homological, solve_lk, HomologicalKind};
pub use normalform::{killable_residual, normal_form, straighten_manifolds, Generator, GeneratorChain};

use crate::{Error, Result};

/// Caps: total degree in (q, p) and harmonic order in t.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub degree: usize,
    pub harmonic: usize,
}

impl Caps {
    pub fn new(degree: usize, harmonic: usize) -> Self {
        Caps { degree, harmonic }
    }
}

/// Trig parity tag for a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

/// Truncated sum of c_{l,m,k} q^l p^m cos(k t) / sin(k t), plus `i_coef * I`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTaylorSeries {
    pub caps: Caps,
    /// flattened [l][m][k][cos/sin]
    data: Vec<f64>,
    pub i_coef: f64,
}

/// Coefficients with magnitude below this are treated as killed/absent.
pub const COEF_TOL: f64 = 1e-12;

impl FourierTaylorSeries {
    pub fn zero(caps: Caps) -> Self {
        let n = (caps.degree + 1) * (caps.degree + 1) * (caps.harmonic + 1) * 2;
        FourierTaylorSeries {
            caps,
            data: vec![0.0; n],
            i_coef: 0.0,
        }
    }

    /// The kernel Hamiltonian N = -qp + I.
    pub fn kernel(caps: Caps) -> Self {
        let mut s = Self::zero(caps);
        s.set(1, 1, 0, Parity::Cos, -1.0);
        s.i_coef = 1.0;
        s
    }

    #[inline]
    fn idx(&self, l: usize, m: usize, k: usize, parity: Parity) -> usize {
        let kk = self.caps.harmonic + 1;
        let par = match parity {
            Parity::Cos => 0,
            Parity::Sin => 1,
        };
        ((l * (self.caps.degree + 1) + m) * kk + k) * 2 + par
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize, k: usize, parity: Parity) -> f64 {
        if l > self.caps.degree || m > self.caps.degree || k > self.caps.harmonic {
            return 0.0;
        }
        self.data[self.idx(l, m, k, parity)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: usize, k: usize, parity: Parity, v: f64) {
        let i = self.idx(l, m, k, parity);
        self.data[i] = v;
    }

    #[inline]
    pub fn add_to(&mut self, l: usize, m: usize, k: usize, parity: Parity, v: f64) {
        if l + m > self.caps.degree || k > self.caps.harmonic {
            return; // truncation
        }
        let i = self.idx(l, m, k, parity);
        self.data[i] += v;
    }

    pub fn monomial(caps: Caps, l: usize, m: usize, k: usize, parity: Parity, c: f64) -> Self {
        let mut s = Self::zero(caps);
        s.add_to(l, m, k, parity, c);
        s
    }

    /// Iterate non-negligible coefficients as (l, m, k, parity, value).
    pub fn iter_coeffs(&self) -> impl Iterator<Item = (usize, usize, usize, Parity, f64)> + '_ {
        let deg = self.caps.degree;
        let har = self.caps.harmonic;
        (0..=deg).flat_map(move |l| {
            (0..=deg.saturating_sub(l)).flat_map(move |m| {
                (0..=har).flat_map(move |k| {
                    [Parity::Cos, Parity::Sin].into_iter().filter_map(move |p| {
                        let v = self.get(l, m, k, p);
                        if v != 0.0 {
                            Some((l, m, k, p, v))
                        } else {
                            None
                        }
                    })
                })
            })
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn is_negligible(&self) -> bool {
        self.max_abs() < 1e-300 && self.i_coef == 0.0
    }

    /// Lowest total degree with a coefficient above `COEF_TOL` (ignoring I).
    pub fn min_degree(&self) -> Option<usize> {
        (0..=self.caps.degree).find(|&d| self.component(d).max_abs() > COEF_TOL)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_caps(o)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a += b;
        }
        out.i_coef += o.i_coef;
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_caps(o)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&o.data) {
            *a -= b;
        }
        out.i_coef -= o.i_coef;
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out.i_coef *= c;
        out
    }

    fn check_caps(&self, o: &Self) -> Result<()> {
        if self.caps != o.caps {
            return Err(Error::OrderMismatch {
                what: format!("caps {:?} vs {:?}", self.caps, o.caps),
            });
        }
        Ok(())
    }

    /// Product, truncated at the caps. I-coefficients must vanish (the I slot
    /// is only additive).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_caps(o)?;
        if self.i_coef != 0.0 || o.i_coef != 0.0 {
            return Err(Error::OrderMismatch {
                what: "cannot multiply series carrying an I term".into(),
            });
        }
        let deg = self.caps.degree;
        let har = self.caps.harmonic;
        let mut out = Self::zero(self.caps);
        for (l1, m1, k1, p1, v1) in self.iter_coeffs() {
            for (l2, m2, k2, p2, v2) in o.iter_coeffs() {
                let l = l1 + l2;
                let m = m1 + m2;
                if l + m > deg {
                    continue;
                }
                let v = v1 * v2;
                // trig products: cos a cos b = (cos(a-b)+cos(a+b))/2, etc.
                let (kd, ks) = (k1.abs_diff(k2), k1 + k2);
                match (p1, p2) {
                    (Parity::Cos, Parity::Cos) => {
                        out.add_to(l, m, kd, Parity::Cos, 0.5 * v);
                        if ks <= har {
                            out.add_to(l, m, ks, Parity::Cos, 0.5 * v);
                        }
                    }
                    (Parity::Sin, Parity::Sin) => {
                        out.add_to(l, m, kd, Parity::Cos, 0.5 * v);
                        if ks <= har {
                            out.add_to(l, m, ks, Parity::Cos, -0.5 * v);
                        }
                    }
                    (Parity::Sin, Parity::Cos) => {
                        // sin a cos b = (sin(a+b) + sin(a-b))/2
                        if ks <= har {
                            out.add_to(l, m, ks, Parity::Sin, 0.5 * v);
                        }
                        let sgn = if k1 >= k2 { 1.0 } else { -1.0 };
                        out.add_to(l, m, kd, Parity::Sin, 0.5 * v * sgn);
                    }
                    (Parity::Cos, Parity::Sin) => {
                        if ks <= har {
                            out.add_to(l, m, ks, Parity::Sin, 0.5 * v);
                        }
                        let sgn = if k2 >= k1 { 1.0 } else { -1.0 };
                        out.add_to(l, m, kd, Parity::Sin, 0.5 * v * sgn);
                    }
                }
            }
        }
        // sin(0 t) contributions are identically zero
        for l in 0..=deg {
            for m in 0..=deg - l {
                out.set(l, m, 0, Parity::Sin, 0.0);
            }
        }
        Ok(out)
    }

    pub fn derivative_q(&self) -> Self {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if l >= 1 {
                out.add_to(l - 1, m, k, p, v * l as f64);
            }
        }
        out
    }

    pub fn derivative_p(&self) -> Self {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if m >= 1 {
                out.add_to(l, m - 1, k, p, v * m as f64);
            }
        }
        out
    }

    pub fn derivative_t(&self) -> Self {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if k == 0 {
                continue;
            }
            match p {
                Parity::Cos => out.add_to(l, m, k, Parity::Sin, -v * k as f64),
                Parity::Sin => out.add_to(l, m, k, Parity::Cos, v * k as f64),
            }
        }
        out
    }

    /// Antiderivative in t of the zero-mean part, choosing the primitive
    /// that flips parity (odd for even input).
    pub fn primitive_t(&self) -> Result<Self> {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if k == 0 {
                if v.abs() > COEF_TOL {
                    return Err(Error::ResonanceObstruction {
                        what: format!("nonzero t-mean {v} at q^{l} p^{m}"),
                    });
                }
                continue;
            }
            match p {
                Parity::Cos => out.add_to(l, m, k, Parity::Sin, v / k as f64),
                Parity::Sin => out.add_to(l, m, k, Parity::Cos, -v / k as f64),
            }
        }
        Ok(out)
    }

    /// Multiply by (q+p)^3.
    pub fn mul_qp3(&self) -> Self {
        let mut out = Self::zero(self.caps);
        const BIN3: [f64; 4] = [1.0, 3.0, 3.0, 1.0];
        for (l, m, k, p, v) in self.iter_coeffs() {
            for (j, &b) in BIN3.iter().enumerate() {
                out.add_to(l + 3 - j, m + j, k, p, v * b);
            }
        }
        out
    }

    /// Exact division of a time-independent homogeneous component by
    /// (q+p)^3. Errors if the division leaves a residual above tolerance.
    pub fn div_qp3_homogeneous(&self, degree: usize) -> Result<Self> {
        if degree < 3 {
            return Err(Error::OrderMismatch {
                what: format!("cannot divide degree {degree} by (q+p)^3"),
            });
        }
        let d = degree;
        let mut g = Self::zero(self.caps);
        for m in 0..=(d - 3) {
            let l = d - 3 - m;
            // coefficient of q^{d-m} p^m in (q+p)^3 g
            let mut v = self.get(d - m, m, 0, Parity::Cos);
            if m >= 1 {
                v -= 3.0 * g.get(d - 2 - m, m - 1, 0, Parity::Cos);
            }
            if m >= 2 {
                v -= 3.0 * g.get(d - 1 - m, m - 2, 0, Parity::Cos);
            }
            if m >= 3 {
                v -= g.get(d - m, m - 3, 0, Parity::Cos);
            }
            g.set(l, m, 0, Parity::Cos, v);
        }
        // verify the trailing rows
        let back = g.mul_qp3();
        let scale = self.max_abs().max(1.0);
        for m in 0..=d {
            let l = d - m;
            let res = (back.get(l, m, 0, Parity::Cos) - self.get(l, m, 0, Parity::Cos)).abs();
            if res > 1e-10 * scale {
                return Err(Error::ResonanceObstruction {
                    what: format!("component of degree {d} not divisible by (q+p)^3 (residual {res})"),
                });
            }
        }
        Ok(g)
    }

    /// Homogeneous component of the given total degree.
    pub fn component(&self, degree: usize) -> Self {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if l + m == degree {
                out.add_to(l, m, k, p, v);
            }
        }
        out
    }

    /// Time-mean part (k = 0 harmonics only).
    pub fn t_mean(&self) -> Self {
        let mut out = Self::zero(self.caps);
        for (l, m, k, p, v) in self.iter_coeffs() {
            if k == 0 {
                out.add_to(l, m, 0, p, v);
            }
        }
        out
    }

    pub fn zero_mean_part(&self) -> Self {
        let mut out = self.clone();
        for l in 0..=self.caps.degree {
            for m in 0..=self.caps.degree - l {
                out.set(l, m, 0, Parity::Cos, 0.0);
            }
        }
        out.i_coef = 0.0;
        out
    }

    /// Max |sin coefficient|: zero iff even in t.
    pub fn odd_part_norm(&self) -> f64 {
        self.iter_coeffs()
            .filter(|(_, _, _, p, _)| *p == Parity::Sin)
            .fold(0.0f64, |a, (_, _, _, _, v)| a.max(v.abs()))
    }

    /// Max |cos coefficient| (including means): zero iff odd in t.
    pub fn even_part_norm(&self) -> f64 {
        self.iter_coeffs()
            .filter(|(_, _, _, p, _)| *p == Parity::Cos)
            .fold(0.0f64, |a, (_, _, _, _, v)| a.max(v.abs()))
    }

    /// Poisson bracket `{self, other}` with respect to the singular form.
    pub fn poisson_bracket(&self, o: &Self) -> Result<Self> {
        self.check_caps(o)?;
        let fq = self.derivative_q();
        let fp = self.derivative_p();
        let gq = o.derivative_q();
        let gp = o.derivative_p();
        let mut out = fq.mul(&gp)?.sub(&fp.mul(&gq)?)?.mul_qp3();
        // (F_t G_I - F_I G_t)
        if o.i_coef != 0.0 {
            out = out.add(&self.derivative_t().scale(o.i_coef))?;
        }
        if self.i_coef != 0.0 {
            out = out.sub(&o.derivative_t().scale(self.i_coef))?;
        }
        Ok(out)
    }

    /// Lie transform `H ∘ Φ_F^1 = Σ ad_F^j H / j!`, truncated at the caps.
    /// F must have polynomial part of degree >= 1 (otherwise the adjoint
    /// series need not terminate).
    pub fn lie_transform(&self, f: &Self) -> Result<Self> {
        self.check_caps(f)?;
        if let Some(d) = f.min_degree() {
            if d < 1 {
                return Err(Error::OrderMismatch {
                    what: "generator has degree-0 terms; adjoint series may not terminate".into(),
                });
            }
        }
        let mut acc = self.clone();
        let mut term = self.clone();
        let mut fact = 1.0;
        for j in 1..=80 {
            term = term.poisson_bracket(f)?;
            fact *= j as f64;
            if term.is_negligible() {
                break;
            }
            acc = acc.add(&term.scale(1.0 / fact))?;
            if j == 80 {
                return Err(Error::OrderMismatch {
                    what: "adjoint series did not terminate within the caps".into(),
                });
            }
        }
        Ok(acc)
    }

    /// Substitute p -> p + shift(q, p, t), expanding by Taylor in the p slot.
    /// The shift must have min degree >= 2 so the expansion terminates.
    pub fn substitute_p(&self, shift: &Self) -> Result<Self> {
        self.check_caps(shift)?;
        match shift.min_degree() {
            Some(d) if d < 2 => {
                return Err(Error::OrderMismatch {
                    what: "p-substitution shift must be O_2".into(),
                })
            }
            _ => {}
        }
        let mut out = self.clone();
        let mut dkh = self.clone(); // d^j H / dp^j
        let mut pw = FourierTaylorSeries::monomial(self.caps, 0, 0, 0, Parity::Cos, 1.0);
        let mut fact = 1.0;
        for j in 1..=self.caps.degree {
            dkh = dkh.derivative_p();
            dkh.i_coef = 0.0;
            pw = pw.mul(shift)?;
            fact *= j as f64;
            if pw.is_negligible() || dkh.is_negligible() {
                break;
            }
            out = out.add(&dkh.mul(&pw)?.scale(1.0 / fact))?;
        }
        Ok(out)
    }

    /// Substitute q -> q + shift(q, p, t).
    pub fn substitute_q(&self, shift: &Self) -> Result<Self> {
        self.check_caps(shift)?;
        match shift.min_degree() {
            Some(d) if d < 2 => {
                return Err(Error::OrderMismatch {
                    what: "q-substitution shift must be O_2".into(),
                })
            }
            _ => {}
        }
        let mut out = self.clone();
        let mut dkh = self.clone();
        let mut pw = FourierTaylorSeries::monomial(self.caps, 0, 0, 0, Parity::Cos, 1.0);
        let mut fact = 1.0;
        for j in 1..=self.caps.degree {
            dkh = dkh.derivative_q();
            dkh.i_coef = 0.0;
            pw = pw.mul(shift)?;
            fact *= j as f64;
            if pw.is_negligible() || dkh.is_negligible() {
                break;
            }
            out = out.add(&dkh.mul(&pw)?.scale(1.0 / fact))?;
        }
        Ok(out)
    }

    /// Evaluate the series (ignoring the I slot) at a point.
    pub fn eval(&self, q: f64, p: f64, t: f64) -> f64 {
        let deg = self.caps.degree;
        let har = self.caps.harmonic;
        let mut qp = vec![0.0; (deg + 1) * (deg + 1)];
        let mut ql = 1.0;
        for l in 0..=deg {
            let mut pm = 1.0;
            for m in 0..=deg - l {
                qp[l * (deg + 1) + m] = ql * pm;
                pm *= p;
            }
            ql *= q;
        }
        let mut cos_k = vec![0.0; har + 1];
        let mut sin_k = vec![0.0; har + 1];
        for k in 0..=har {
            let (s, c) = (k as f64 * t).sin_cos();
            cos_k[k] = c;
            sin_k[k] = s;
        }
        let mut acc = 0.0;
        for (l, m, k, par, v) in self.iter_coeffs() {
            let trig = match par {
                Parity::Cos => cos_k[k],
                Parity::Sin => sin_k[k],
            };
            acc += v * qp[l * (deg + 1) + m] * trig;
        }
        acc
    }

    /// Map t -> -t (cos components unchanged, sin components negated).
    pub fn reflect_t(&self) -> Self {
        let mut out = self.clone();
        for (l, m, k, p, v) in self.iter_coeffs() {
            if p == Parity::Sin {
                out.set(l, m, k, Parity::Sin, -v);
            }
        }
        out
    }

    /// Swap q and p.
    pub fn swap_qp(&self) -> Self {
        let mut out = Self::zero(self.caps);
        out.i_coef = self.i_coef;
        for (l, m, k, p, v) in self.iter_coeffs() {
            out.add_to(m, l, k, p, v);
        }
        out
    }

    /// Dump the coefficient table as CSV (columns l, m, k, parity, value).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,m,k,parity,value\n");
        for (l, m, k, p, v) in self.iter_coeffs() {
            let par = match p {
                Parity::Cos => "cos",
                Parity::Sin => "sin",
            };
            s.push_str(&format!("{l},{m},{k},{par},{v:.17e}\n"));
        }
        s
    }
}

/// Membership test for the graded spaces: `E+` (even degree, even in t),
/// `E-` (even degree, odd in t), `D+` (odd degree, even in t), `D-` (odd
/// degree, odd in t). Returns the residual norm outside the class.
pub fn grading_residual(s: &FourierTaylorSeries, even_degree: bool, even_t: bool) -> f64 {
    let mut res = 0.0f64;
    for (l, m, _k, p, v) in s.iter_coeffs() {
        let deg_ok = ((l + m) % 2 == 0) == even_degree;
        let t_ok = (p == Parity::Cos) == even_t;
        if !(deg_ok && t_ok) {
            res = res.max(v.abs());
        }
    }
    res
}
