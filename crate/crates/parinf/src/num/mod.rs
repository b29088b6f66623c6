//! Shared numerical infrastructure.

pub mod dd;
pub mod fit;
pub mod quad;
pub mod rk;

/// 2x2 matrix with the handful of operations the lab needs.
#[derive(Clone, Copy, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn identity() -> Self {
        Mat2 {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inv(&self) -> Option<Mat2> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return None;
        }
        Some(Mat2 {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        })
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Real eigenvalues, largest magnitude first. None if complex.
    pub fn eigenvalues(&self) -> Option<(f64, f64)> {
        let tr = self.a + self.d;
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let l1 = 0.5 * (tr + s);
        let l2 = 0.5 * (tr - s);
        if l1.abs() >= l2.abs() {
            Some((l1, l2))
        } else {
            Some((l2, l1))
        }
    }

    /// Unit eigenvector for eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> (f64, f64) {
        // (A - λ) v = 0; pick the better-conditioned row
        let r1 = (self.a - lambda, self.b);
        let r2 = (self.c, self.d - lambda);
        let v = if r1.0.hypot(r1.1) > r2.0.hypot(r2.1) {
            (-r1.1, r1.0)
        } else {
            (-r2.1, r2.0)
        };
        let n = v.0.hypot(v.1);
        (v.0 / n, v.1 / n)
    }

    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_lambda_matrix() {
        // the variational matrix of the transported-vector demo
        let m = Mat2 {
            a: -4.0,
            b: -3.0,
            c: 0.0,
            d: 1.0,
        };
        let (l1, l2) = m.eigenvalues().unwrap();
        assert_eq!(l1, -4.0);
        assert_eq!(l2, 1.0);
        let v = m.eigenvector(1.0);
        // direction (-3, 5)/sqrt(34)
        let expect = (-3.0 / 34f64.sqrt(), 5.0 / 34f64.sqrt());
        let dot = v.0 * expect.0 + v.1 * expect.1;
        assert!((dot.abs() - 1.0).abs() < 1e-14);
    }
}
