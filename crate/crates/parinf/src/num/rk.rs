//! Embedded Dormand-Prince 5(4) integrator with PI step control.
//!
//! Trajectories here are short (one Poincare return, one manifold passage),
//! so local-error control matters more than symplecticity. The state type is
//! a fixed-size vector to keep the hot loop allocation-free.

use crate::Error;

pub const MAX_DIM: usize = 8;

/// Stack-allocated state vector.
#[derive(Clone, Copy, Debug)]
pub struct StateVec {
    pub n: usize,
    pub v: [f64; MAX_DIM],
}

impl StateVec {
    pub fn new(slice: &[f64]) -> Self {
        let mut v = [0.0; MAX_DIM];
        v[..slice.len()].copy_from_slice(slice);
        StateVec { n: slice.len(), v }
    }

    #[inline]
    fn axpy(&self, h: f64, k: &[StateVec], coefs: &[f64]) -> StateVec {
        let mut out = *self;
        for (ki, &c) in k.iter().zip(coefs) {
            if c == 0.0 {
                continue;
            }
            for j in 0..self.n {
                out.v[j] += h * c * ki.v[j];
            }
        }
        out
    }
}

// Dormand-Prince coefficients
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h0: 1e-3,
            h_min: 1e-15,
            max_steps: 2_000_000,
        }
    }
}

/// Integrate dy/dt = f(t, y) from t0 to t1 (t1 may be < t0), landing exactly
/// on t1. `observer` is called after every accepted step; returning false
/// aborts with [`Error::ObserverStop`].
pub fn integrate_ode<F, O>(
    f: &F,
    t0: f64,
    t1: f64,
    y0: StateVec,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<StateVec, Error>
where
    F: Fn(f64, &StateVec) -> StateVec,
    O: FnMut(f64, &StateVec) -> bool,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0.abs().min((t1 - t0).abs()).max(opts.h_min) * dir;
    let mut k = [y0; 7];
    let mut err_prev: f64 = 1.0;
    if !observer(t, &y) {
        return Err(Error::ObserverStop { t });
    }

    for _ in 0..opts.max_steps {
        if (t - t1).abs() < 1e-300 || (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        k[0] = f(t, &y);
        for i in 1..7 {
            let yi = y.axpy(h, &k[..i], &A[i][..i]);
            k[i] = f(t + C[i] * h, &yi);
        }
        let y5 = y.axpy(h, &k, &B5);
        let y4 = y.axpy(h, &k, &B4);
        let mut err: f64 = 0.0;
        for j in 0..y.n {
            let sc = opts.atol + opts.rtol * y.v[j].abs().max(y5.v[j].abs());
            err = err.max(((y5.v[j] - y4.v[j]) / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            if !observer(t, &y) {
                return Err(Error::ObserverStop { t });
            }
            // PI controller
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-10);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h.abs() < opts.h_min {
            return Err(Error::StepUnderflow { t });
        }
    }
    Err(Error::TooManySteps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &StateVec| StateVec::new(&[-y.v[0]]);
        let y = integrate_ode(
            &f,
            0.0,
            2.0,
            StateVec::new(&[1.0]),
            &OdeOptions::default(),
            |_, _| true,
        )
        .unwrap();
        assert!((y.v[0] - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn backward_integration_roundtrip() {
        // harmonic oscillator forward then backward
        let f = |_t: f64, y: &StateVec| StateVec::new(&[y.v[1], -y.v[0]]);
        let opts = OdeOptions::default();
        let y1 =
            integrate_ode(&f, 0.0, 3.0, StateVec::new(&[1.0, 0.0]), &opts, |_, _| true).unwrap();
        let y0 = integrate_ode(&f, 3.0, 0.0, y1, &opts, |_, _| true).unwrap();
        assert!((y0.v[0] - 1.0).abs() < 1e-10);
        assert!(y0.v[1].abs() < 1e-10);
    }
}
