use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricCloud, SampledField, TestFamily};
use crate::error::{Error, Result};
use crate::geometry::{dist, DomainShape};

/// Radii at which ball averages are taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusLadder {
    /// `r0 · 2^(k / per_octave)`, topped by the cap (or the cloud diameter).
    Dyadic { r0: f64, per_octave: u32 },
    /// Every pairwise distance: the exact discrete supremum.
    AllDistances,
}

impl RadiusLadder {
    pub fn dyadic(r0: f64, per_octave: u32) -> Result<Self> {
        if !(r0 > 0.0) || per_octave == 0 {
            return Err(Error::Parameter("ladder needs r0 > 0 and a positive density".into()));
        }
        Ok(RadiusLadder::Dyadic { r0, per_octave })
    }

    /// Starts at half the grid spacing (or a fraction of the diameter), four
    /// radii per octave.
    pub fn default_for(cloud: &MetricCloud) -> Self {
        let r0 = cloud.spacing().map_or_else(
            || cloud.diameter() / (4.0 * (cloud.len().max(1) as f64).powf(1.0 / cloud.dim().max(1) as f64)),
            |h| h / 2.0,
        );
        RadiusLadder::Dyadic { r0: r0.max(f64::MIN_POSITIVE), per_octave: 4 }
    }

    fn radii(&self, limit: f64) -> Vec<f64> {
        match *self {
            RadiusLadder::AllDistances => Vec::new(),
            RadiusLadder::Dyadic { r0, per_octave } => {
                let mut out = vec![0.0];
                let mut k = 0;
                loop {
                    let r = r0 * 2f64.powf(k as f64 / per_octave as f64);
                    if r >= limit {
                        break;
                    }
                    out.push(r);
                    k += 1;
                }
                if limit.is_finite() && limit > 0.0 {
                    out.push(limit);
                }
                out
            }
        }
    }
}

fn check_cloud(f: &SampledField) -> Result<()> {
    if f.cloud().is_empty() {
        return Err(Error::Domain("maximal function on an empty cloud".into()));
    }
    Ok(())
}

/// Hardy–Littlewood maximal function with the default ladder.
/// `cap = f64::INFINITY` lets balls grow to the whole cloud.
pub fn hl_maximal(f: &SampledField, cap: f64) -> Result<SampledField> {
    hl_maximal_with(f, cap, RadiusLadder::default_for(f.cloud()))
}

pub fn hl_maximal_with(f: &SampledField, cap: f64, ladder: RadiusLadder) -> Result<SampledField> {
    let mut out = hl_maximal_many(&[f], |_| cap, ladder)?;
    Ok(out.pop().unwrap())
}

/// Maximal functions of several fields on one cloud, sharing the sorted
/// neighbourhoods. `cap_at(i)` is the radius cap at point `i`.
pub fn hl_maximal_many(
    fields: &[&SampledField],
    cap_at: impl Fn(usize) -> f64 + Sync,
    ladder: RadiusLadder,
) -> Result<Vec<SampledField>> {
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    check_cloud(first)?;
    let cloud = first.cloud().clone();
    if fields.iter().any(|g| g.cloud().len() != cloud.len()) {
        return Err(Error::Parameter("fields live on different clouds".into()));
    }
    let n = cloud.len();
    let diam = cloud.diameter();
    let m = cloud.measures();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let cap = cap_at(i);
            if !(cap >= 0.0) {
                return fields.iter().map(|g| g.values()[i].abs()).collect();
            }
            let x = cloud.point(i);
            let mut order: Vec<(f64, usize)> = (0..n).map(|j| (dist(x, cloud.point(j)), j)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1 != i).cmp(&(b.1 != i))));
            let limit = cap.min(diam);
            let radii = ladder.radii(limit);
            let mut best: Vec<f64> = fields.iter().map(|g| g.values()[i].abs()).collect();
            let mut sums = vec![0.0; fields.len()];
            let mut mass = 0.0;
            let mut r_idx = 0;
            for (k, &(d, j)) in order.iter().enumerate() {
                if d > limit {
                    break;
                }
                if let RadiusLadder::Dyadic { .. } = ladder {
                    while r_idx < radii.len() && radii[r_idx] < d {
                        r_idx += 1;
                    }
                    if r_idx == radii.len() {
                        break;
                    }
                }
                mass += m[j];
                for (s, g) in sums.iter_mut().zip(fields) {
                    *s += m[j] * g.values()[j].abs();
                }
                // a ball ends where the next distance is strictly larger
                // (or, on a ladder, crosses the current radius)
                let closes = match order.get(k + 1) {
                    None => true,
                    Some(&(dn, _)) => match ladder {
                        RadiusLadder::AllDistances => dn > d,
                        RadiusLadder::Dyadic { .. } => dn > radii[r_idx] || dn > limit,
                    },
                };
                if closes {
                    for (b, s) in best.iter_mut().zip(&sums) {
                        *b = b.max(s / mass);
                    }
                }
            }
            best
        })
        .collect();
    fields
        .iter()
        .enumerate()
        .map(|(k, g)| g.with_values(rows.iter().map(|r| r[k]).collect()))
        .collect()
}

/// `(M(g^q))^(1/q)` with an unrestricted ladder.
pub fn power_maximal_composite(g: &SampledField, q: f64, ladder: RadiusLadder) -> Result<SampledField> {
    if !(q > 0.0) {
        return Err(Error::Parameter(format!("exponent must be positive, got {q}")));
    }
    let gq = g.map(|v| v.abs().powf(q));
    Ok(hl_maximal_with(&gq, f64::INFINITY, ladder)?.map(|v| v.powf(1.0 / q)))
}

// Max over members with scale ≤ cap(i) of |pairing|, optionally divided by
// the discrete mass of the member.
fn pair_max(
    f: &SampledField,
    family: &TestFamily,
    cap_at: impl Fn(usize) -> f64 + Sync,
    per_mass: bool,
) -> Result<Vec<f64>> {
    check_cloud(f)?;
    let cloud = f.cloud();
    if family.dim() != cloud.dim() {
        return Err(Error::Parameter("family and cloud dimensions differ".into()));
    }
    let scales = family.scales();
    let np = family.profiles().len();
    let m = cloud.measures();
    let v = f.values();
    Ok((0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let cap = cap_at(i);
            let active: Vec<f64> = scales.iter().copied().filter(|s| *s <= cap).collect();
            let Some(&top) = active.first() else {
                return 0.0;
            };
            let x = cloud.point(i);
            let mut pair = vec![0.0; active.len() * np];
            let mut mass = vec![0.0; active.len() * np];
            let mut off = vec![0.0; x.len()];
            for j in 0..cloud.len() {
                let y = cloud.point(j);
                let d = dist(x, y);
                if d >= top {
                    continue;
                }
                for (o, (a, b)) in off.iter_mut().zip(y.iter().zip(x)) {
                    *o = a - b;
                }
                for (s, &t) in active.iter().enumerate() {
                    if d >= t {
                        break;
                    }
                    for p in 0..np {
                        let phi = family.eval(p, t, &off);
                        pair[s * np + p] += m[j] * v[j] * phi;
                        mass[s * np + p] += m[j] * phi;
                    }
                }
            }
            let mut best = 0.0f64;
            for (k, val) in pair.iter().enumerate() {
                let val = if per_mass {
                    if mass[k] > 0.0 {
                        val / mass[k]
                    } else {
                        0.0
                    }
                } else {
                    *val
                };
                best = best.max(val.abs());
            }
            best
        })
        .collect())
}

/// Sup over the family's scales `t ≤ cap` of `|f * ψ_t(x)|`, each member
/// normalized to unit discrete mass around `x`.
pub fn smooth_maximal(f: &SampledField, family: &TestFamily, cap: f64) -> Result<SampledField> {
    if family.scales().iter().all(|s| *s > cap) {
        return Err(Error::Parameter("no test scale below the cap".into()));
    }
    let vals = pair_max(f, family, |_| cap, true)?;
    f.with_values(vals)
}

#[derive(Debug, Clone, Copy)]
pub enum GrandCap<'a> {
    /// The same radius `r` everywhere.
    Pointwise,
    /// `min(r, d(x, ∂Ω)/2)` at each point; zero outside the domain.
    Boundary(&'a DomainShape),
}

/// Finite-family grand maximal function. Always a lower bound for the
/// supremum over the whole normalized class.
#[derive(Debug, Clone)]
pub struct GrandMaximal {
    pub field: SampledField,
    pub members: usize,
    pub lower_bound: bool,
}

pub fn grand_maximal(f: &SampledField, family: &TestFamily, r: f64, mode: GrandCap<'_>) -> Result<GrandMaximal> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("grand maximal radius must be positive, got {r}")));
    }
    if family.is_unit_mass() {
        return Err(Error::Parameter("grand maximal needs a class-normalized family".into()));
    }
    let caps: Vec<f64> = match mode {
        GrandCap::Pointwise => vec![r; f.len()],
        GrandCap::Boundary(dom) => f
            .cloud()
            .points()
            .iter()
            .map(|x| {
                if dom.contains(x) {
                    Ok(r.min(dom.distance_to_boundary(x)? / 2.0))
                } else {
                    Ok(0.0)
                }
            })
            .collect::<Result<_>>()?,
    };
    let vals = pair_max(f, family, |i| caps[i], false)?;
    Ok(GrandMaximal { field: f.with_values(vals)?, members: family.members(), lower_bound: true })
}
