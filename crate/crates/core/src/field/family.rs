use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bump, BUMP_GRAD_MAX};

/// Shape of a test function on the unit ball, before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `(1 - |z|^2)^2`.
    Bump,
    /// `z_k (1 - |z|^2)^2`; odd along axis `k`, picks up jumps.
    Tilted(usize),
    /// `(1 - |z|)_+`; Lipschitz, and in 1D of unit mass at full amplitude.
    Cone,
}

impl Profile {
    fn raw(&self, z: &[f64]) -> f64 {
        let z2: f64 = z.iter().map(|v| v * v).sum();
        match *self {
            Profile::Bump => bump(z2),
            Profile::Tilted(k) => z.get(k).copied().unwrap_or(0.0) * bump(z2),
            Profile::Cone => (1.0 - z2.sqrt()).max(0.0),
        }
    }

    // Sup of |ψ| and |∇ψ| over the unit ball.
    fn bounds(&self, n: usize) -> (f64, f64) {
        match *self {
            Profile::Bump => (1.0, BUMP_GRAD_MAX),
            Profile::Cone => (1.0, 1.0),
            Profile::Tilted(_) => {
                // Radial in the remaining variables, so a 2D section (z_k, ρ) suffices.
                // ∂_k ψ = b - 4 z_k^2 (1-|z|^2), ∂_ρ ψ = -4 z_k ρ (1-|z|^2).
                let m = 2000;
                let (mut sup, mut grad) = (0.0f64, 0.0f64);
                for a in 0..=m {
                    for b in 0..=m {
                        let zk = a as f64 / m as f64;
                        let rho = if n > 1 { b as f64 / m as f64 } else { 0.0 };
                        let s = 1.0 - zk * zk - rho * rho;
                        if s < 0.0 {
                            continue;
                        }
                        sup = sup.max(zk * s * s);
                        let gk = s * s - 4.0 * zk * zk * s;
                        let gr = 4.0 * zk * rho * s;
                        grad = grad.max((gk * gk + gr * gr).sqrt());
                        if n == 1 {
                            break;
                        }
                    }
                }
                // grid sup of a smooth function: pad by the grid-step error
                (sup * 1.01, grad * 1.01)
            }
        }
    }
}

/// A finite set of test functions centered at the evaluation point.
///
/// Each member is `amp * r^{-n} ψ((y - x) / r)` for a scale `r` and a profile
/// `ψ`. With [`TestFamily::grand`] the amplitude keeps every member inside the
/// normalized class `|φ| ≤ r^{-n}`, `|Dφ| ≤ r^{-n-1}`; with
/// [`TestFamily::unit_mass`] the discrete pairing is divided by the discrete
/// mass instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    dim: usize,
    scales: Vec<f64>,
    profiles: Vec<Profile>,
    amplitudes: Vec<f64>,
    unit_mass: bool,
}

impl TestFamily {
    pub fn grand(dim: usize, scales: Vec<f64>, profiles: Vec<Profile>) -> Result<Self> {
        let amplitudes = profiles
            .iter()
            .map(|p| {
                let (s, g) = p.bounds(dim);
                1.0 / s.max(g)
            })
            .collect();
        Self::build(dim, scales, profiles, amplitudes, false)
    }

    pub fn unit_mass(dim: usize, scales: Vec<f64>) -> Result<Self> {
        Self::build(dim, scales, vec![Profile::Bump], vec![1.0], true)
    }

    /// `count` scales from `r_max` down by factors of two, every profile
    /// (bump, cone, one tilt per axis).
    pub fn dyadic_grand(dim: usize, r_max: f64, count: usize) -> Result<Self> {
        let scales = (0..count).map(|k| r_max / 2f64.powi(k as i32)).collect();
        let mut profiles = vec![Profile::Bump, Profile::Cone];
        profiles.extend((0..dim).map(Profile::Tilted));
        Self::grand(dim, scales, profiles)
    }

    fn build(
        dim: usize,
        mut scales: Vec<f64>,
        profiles: Vec<Profile>,
        amplitudes: Vec<f64>,
        unit_mass: bool,
    ) -> Result<Self> {
        if dim == 0 || scales.is_empty() || profiles.is_empty() {
            return Err(Error::Parameter("empty test family".into()));
        }
        if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Parameter("test scales must be positive".into()));
        }
        if profiles.iter().any(|p| matches!(p, Profile::Tilted(k) if *k >= dim)) {
            return Err(Error::Parameter("tilt axis out of range".into()));
        }
        scales.sort_by(|a, b| b.total_cmp(a));
        scales.dedup();
        let fam = TestFamily { dim, scales, profiles, amplitudes, unit_mass };
        if !fam.unit_mass {
            fam.check_normalization()?;
        }
        Ok(fam)
    }

    // Spot-check the class bounds numerically on each member.
    fn check_normalization(&self) -> Result<()> {
        let h = 1e-6;
        for (p, a) in self.profiles.iter().zip(&self.amplitudes) {
            for i in 0..=200 {
                let mut z = vec![0.0; self.dim];
                z[0] = -1.0 + i as f64 / 100.0;
                if self.dim > 1 {
                    z[1] = 0.3 * (1.0 - z[0] * z[0]).max(0.0).sqrt();
                }
                let v = a * p.raw(&z);
                let mut g2 = 0.0;
                for k in 0..self.dim {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[k] += h;
                    zm[k] -= h;
                    let d = a * (p.raw(&zp) - p.raw(&zm)) / (2.0 * h);
                    g2 += d * d;
                }
                if v.abs() > 1.0 + 1e-9 || g2.sqrt() > 1.0 + 1e-6 {
                    return Err(Error::Precondition(format!(
                        "test profile {p:?} leaves the normalized class"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scales in decreasing order.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn is_unit_mass(&self) -> bool {
        self.unit_mass
    }

    pub fn members(&self) -> usize {
        self.scales.len() * self.profiles.len()
    }

    /// Value at offset `y - x` of member (`scale`, profile index `j`).
    pub fn eval(&self, j: usize, scale: f64, offset: &[f64]) -> f64 {
        let z: Vec<f64> = offset.iter().map(|v| v / scale).collect();
        let norm = if self.unit_mass { 1.0 } else { scale.powi(-(self.dim as i32)) };
        self.amplitudes[j] * norm * self.profiles[j].raw(&z)
    }

    /// Family with extra members (union, keeping this family's normalization).
    pub fn extended(&self, more_scales: &[f64]) -> Result<Self> {
        let mut scales = self.scales.clone();
        scales.extend_from_slice(more_scales);
        Self::build(self.dim, scales, self.profiles.clone(), self.amplitudes.clone(), self.unit_mass)
    }
}
