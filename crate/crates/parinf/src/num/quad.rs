//! Quadrature helpers: composite Simpson, compensated (Kahan) accumulation,
//! and scalar Newton/bisection root finders used throughout the lab.

use crate::Error;

/// Kahan-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompSum {
    s: f64,
    c: f64,
}

impl CompSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s
    }
}

/// Composite Simpson on [a, b] with n subintervals (n rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = CompSum::default();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Simpson weights evaluated on an existing uniform sample grid.
pub fn simpson_samples(vals: &[f64], h: f64) -> f64 {
    assert!(vals.len() >= 3 && vals.len() % 2 == 1, "need odd sample count");
    let mut acc = CompSum::default();
    acc.add(vals[0]);
    acc.add(*vals.last().unwrap());
    for (i, &v) in vals.iter().enumerate().skip(1).take(vals.len() - 2) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    acc.value() * h / 3.0
}

/// Scalar Newton iteration with |f| convergence test.
pub fn newton_scalar<F>(f: F, x0: f64, tol: f64, max_iter: usize) -> Result<f64, Error>
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = x0;
    for _ in 0..max_iter {
        let (v, d) = f(x);
        if !v.is_finite() || !d.is_finite() || d == 0.0 {
            return Err(Error::NewtonDiverged { x });
        }
        let dx = v / d;
        x -= dx;
        if dx.abs() <= tol * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Err(Error::NewtonDiverged { x })
}

/// Bisection on [a, b]; requires a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64, Error> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoBracket { a, b });
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_sine() {
        let v = simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 2000);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn newton_sqrt2() {
        let r = newton_scalar(|x| (x * x - 2.0, 2.0 * x), 1.0, 1e-14, 50).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_cubic() {
        let r = bisect(|x| x * x * x - 8.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-11);
    }
}
