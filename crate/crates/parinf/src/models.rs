//! The three physical models (RC3BP, Sitnikov, RPC4BP) and the reduction of
//! the rotating-frame dynamics to a 1 1/2 degree-of-freedom Hamiltonian on a
//! Jacobi level set.
//!
//! Conventions. The angle variable `phi` is normalized so that it increases
//! along the flow. On the level set the angular momentum solves
//!
//! ```text
//! G^2/(2 r^2) + G + (y^2/2 - 1/r - U(r, phi) - J) = 0
//! ```
//!
//! (root near +J), and the reduced Hamiltonian is `H_red = J - G_tilde`,
//! which agrees with the Kepler-like series
//! `y^2/2 - 1/r + J^2/(2 r^2) - U + r^-2 O(r^-1, y^2)`.

use crate::num::quad::newton_scalar;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelId {
    Rc3bp,
    Sitnikov,
    Rpc4bp,
}

/// Physical parameters. `mu` is the mass ratio (RC3BP: masses 1-mu, mu;
/// RPC4BP: masses 1-2mu, mu, mu), `eps` the Sitnikov eccentricity, `jacobi_j`
/// the Jacobi level and `g0` the rescaled angular momentum of the RPC4BP.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelParams {
    pub model_id: ModelId,
    pub mu: f64,
    pub eps: f64,
    pub jacobi_j: f64,
    pub g0: f64,
}

/// Reduction is rejected below this Jacobi level; the return map needs
/// phi strictly monotone along orbits.
pub const MIN_JACOBI: f64 = 5.0;

impl ModelParams {
    pub fn rc3bp(mu: f64, jacobi_j: f64) -> Result<Self> {
        let p = ModelParams {
            model_id: ModelId::Rc3bp,
            mu,
            eps: 0.0,
            jacobi_j,
            g0: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sitnikov(eps: f64) -> Result<Self> {
        let p = ModelParams {
            model_id: ModelId::Sitnikov,
            mu: 0.5,
            eps,
            jacobi_j: 0.0,
            g0: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rpc4bp(mu: f64, g0: f64) -> Result<Self> {
        let p = ModelParams {
            model_id: ModelId::Rpc4bp,
            mu,
            eps: 0.0,
            jacobi_j: 0.0,
            g0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self.model_id {
            ModelId::Rc3bp => {
                if !(self.mu >= 0.0 && self.mu <= 0.5) {
                    return Err(Error::InvalidConfig(format!("mu = {} not in (0, 1/2]", self.mu)));
                }
                if self.jacobi_j < MIN_JACOBI {
                    return Err(Error::InvalidConfig(format!(
                        "jacobi_J = {} below reduction-validity threshold {}",
                        self.jacobi_j, MIN_JACOBI
                    )));
                }
            }
            ModelId::Sitnikov => {
                if !(0.0..1.0).contains(&self.eps) {
                    return Err(Error::InvalidConfig(format!("eps = {} not in [0,1)", self.eps)));
                }
            }
            ModelId::Rpc4bp => {
                if !(self.mu > 0.0 && self.mu <= 0.5) {
                    return Err(Error::InvalidConfig(format!("mu = {} not in (0, 1/2]", self.mu)));
                }
                if self.g0 <= 0.0 {
                    return Err(Error::InvalidConfig(format!("G0 = {} must be positive", self.g0)));
                }
            }
        }
        Ok(())
    }
}

/// Full polar-coordinates state (pre-reduction).
#[derive(Clone, Copy, Debug)]
pub struct PolarState {
    pub r: f64,
    pub alpha: f64,
    pub y: f64,
    pub g: f64,
}

/// A point of the Jacobi-reduced flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub r: f64,
    pub y: f64,
    pub phi: f64,
}

/// A primary in the rotating frame: (mass, radius, angle).
#[derive(Clone, Copy, Debug)]
pub struct Primary {
    pub mass: f64,
    pub rho: f64,
    pub theta: f64,
}

/// Rotating-frame positions of the primaries for the planar models.
pub fn primaries(params: &ModelParams) -> Vec<Primary> {
    match params.model_id {
        ModelId::Rc3bp => vec![
            Primary {
                mass: 1.0 - params.mu,
                rho: params.mu,
                theta: std::f64::consts::PI,
            },
            Primary {
                mass: params.mu,
                rho: 1.0 - params.mu,
                theta: 0.0,
            },
        ],
        ModelId::Rpc4bp => {
            // Lagrange triangle with side 1 and unit angular velocity:
            // m0 = 1-2mu at (sqrt(3) mu, 0), m1 = m2 = mu at
            // (-sqrt(3)(1/2-mu), +-1/2).
            let mu = params.mu;
            let s3 = 3.0f64.sqrt();
            let b = -s3 * (0.5 - mu);
            let c = 0.5;
            let rho12 = (b * b + c * c).sqrt();
            let theta1 = c.atan2(b);
            vec![
                Primary {
                    mass: 1.0 - 2.0 * mu,
                    rho: s3 * mu,
                    theta: 0.0,
                },
                Primary {
                    mass: mu,
                    rho: rho12,
                    theta: theta1,
                },
                Primary {
                    mass: mu,
                    rho: rho12,
                    theta: -theta1,
                },
            ]
        }
        ModelId::Sitnikov => vec![],
    }
}

/// Distance of the Sitnikov primaries to the axis of motion: Kepler ellipse
/// with unit semimajor axis, rho(t) = 1 - eps cos E, E - eps sin E = t.
/// (The source Hamiltonian only pins rho up to O(eps) normalization; the
/// perihelion distance 1 - eps is matched here.)
pub fn sitnikov_rho(eps: f64, t: f64) -> f64 {
    1.0 - eps * eccentric_anomaly(eps, t).cos()
}

/// d rho / dt along the primary ellipse.
pub fn sitnikov_rho_dot(eps: f64, t: f64) -> f64 {
    let e_an = eccentric_anomaly(eps, t);
    eps * e_an.sin() / (1.0 - eps * e_an.cos())
}

/// Solve the Kepler equation E - eps sin E = M by Newton to 1e-14.
pub fn eccentric_anomaly(eps: f64, mean_anomaly: f64) -> f64 {
    let m = mean_anomaly.rem_euclid(2.0 * std::f64::consts::PI);
    newton_scalar(
        |e_an| (e_an - eps * e_an.sin() - m, 1.0 - eps * e_an.cos()),
        m,
        1e-14,
        60,
    )
    .unwrap_or(m)
}

/// Perturbing potential. Returns `U = V - 1/r` for RC3BP, the full Sitnikov
/// potential `-1/sqrt(z^2 + rho_eps(t)^2)` (with `r` read as z and `phi` as
/// t), and the rescaled `V(r~, phi; mu, G0) = G0^2 U(G0^2 r~, phi)` for the
/// RPC4BP.
pub fn eval_potential(r: f64, phi: f64, params: &ModelParams) -> Result<f64> {
    match params.model_id {
        ModelId::Rc3bp => perturbing_u(r, phi, &primaries(params)),
        ModelId::Sitnikov => {
            let rho = sitnikov_rho(params.eps, phi);
            Ok(-1.0 / (r * r + rho * rho).sqrt())
        }
        ModelId::Rpc4bp => {
            let g0sq = params.g0 * params.g0;
            Ok(g0sq * perturbing_u(g0sq * r, phi, &primaries(params))?)
        }
    }
}

/// Physical (unrescaled) perturbing potential U(r, phi) for the planar
/// models; the Jacobi reduction always works in physical radius.
pub fn physical_u(r: f64, phi: f64, params: &ModelParams) -> Result<f64> {
    match params.model_id {
        ModelId::Sitnikov => Err(Error::InvalidConfig(
            "the Sitnikov chart has no rotating-frame potential".into(),
        )),
        _ => perturbing_u(r, phi, &primaries(params)),
    }
}

fn perturbing_u(r: f64, phi: f64, bodies: &[Primary]) -> Result<f64> {
    let mut v = 0.0;
    for b in bodies {
        let d2 = r * r - 2.0 * r * b.rho * (phi - b.theta).cos() + b.rho * b.rho;
        if d2 <= 1e-12 || r <= b.rho {
            return Err(Error::Domain {
                r,
                sep: d2.max(0.0).sqrt(),
            });
        }
        v += b.mass / d2.sqrt();
    }
    Ok(v - 1.0 / r)
}

/// Angular-momentum root on the Jacobi level: solves
/// `G^2/(2 r^2) + G + (y^2/2 - 1/r - U - J) = 0` near `G = J` by Newton.
pub fn gtilde(r: f64, y: f64, phi: f64, params: &ModelParams) -> Result<f64> {
    let j = params.jacobi_j;
    let u = physical_u(r, phi, params)?;
    let w = 0.5 * y * y - 1.0 / r - u - j;
    let disc = 1.0 - 2.0 * w / (r * r);
    if disc <= 0.0 {
        return Err(Error::ReductionInvalid { r, y, disc });
    }
    let g = newton_scalar(
        |g| (0.5 * g * g / (r * r) + g + w, g / (r * r) + 1.0),
        j,
        1e-15,
        60,
    )
    .map_err(|_| Error::ReductionInvalid { r, y, disc })?;
    // stay on the branch G = J (1 + o(1))
    if (g - j).abs() > 0.5 * j.abs().max(1.0) {
        return Err(Error::ReductionInvalid { r, y, disc });
    }
    Ok(g)
}

/// Reduced Hamiltonian value `H_red = J - G_tilde` on the Jacobi level.
pub fn reduce_jacobi(r: f64, y: f64, phi: f64, params: &ModelParams) -> Result<f64> {
    Ok(params.jacobi_j - gtilde(r, y, phi, params)?)
}

/// Kepler-form truncation `y^2/2 - 1/r + J^2/(2r^2)` used as an accuracy
/// cross-check against the Newton root.
pub fn reduced_series(r: f64, y: f64, params: &ModelParams) -> f64 {
    let j = params.jacobi_j;
    0.5 * y * y - 1.0 / r + 0.5 * j * j / (r * r)
}

/// Multipole data: `U(r, phi) = sum_n r^-(n+1) sum_k A[n][k] cos(k phi)`,
/// starting at n = 2 (the monopole cancels against -1/r, the dipole by the
/// center-of-mass condition). Returns A[n][k] for n = 2..=n_max.
pub fn multipole_table(params: &ModelParams, n_max: usize) -> Vec<Vec<f64>> {
    let bodies = primaries(params);
    let a_half: Vec<f64> = central_binomials(n_max);
    let mut table = Vec::new();
    for n in 2..=n_max {
        let mut row = vec![0.0; n + 1];
        for k in (n % 2..=n).step_by(2) {
            // cosine coefficient of P_n(cos psi)
            let m = (n - k) / 2;
            let p_nk = a_half[m] * a_half[n - m] * if k > 0 { 2.0 } else { 1.0 };
            let mut s = 0.0;
            for b in &bodies {
                s += b.mass * b.rho.powi(n as i32) * (k as f64 * b.theta).cos();
            }
            row[k] = p_nk * s;
        }
        table.push(row);
    }
    table
}

/// a_j = C(2j, j) / 4^j, the half-integer binomial sequence entering the
/// cosine expansion of Legendre polynomials.
pub fn central_binomials(n_max: usize) -> Vec<f64> {
    let mut a = vec![1.0];
    for j in 1..=n_max {
        let prev = a[j - 1];
        a.push(prev * (2.0 * j as f64 - 1.0) / (2.0 * j as f64));
    }
    a
}
