use super::{DomainKind, DomainShape};
use crate::error::{Error, Result};

/// Reflection across a Lipschitz graph: `(y, t) ↦ (y, 2h(y) - t)`.
///
/// Defined for points below the graph (`t < h(y)`) whose image stays in the
/// window; that set plays the role of the regular neighbourhood.
pub fn lipschitz_reflection(domain: &DomainShape, x: &[f64]) -> Result<Vec<f64>> {
    let DomainKind::LipschitzGraph { y_min, y_max, .. } = &domain.kind else {
        return Err(Error::Domain("reflection needs a Lipschitz-graph domain".into()));
    };
    if x.len() != 2 || !domain.bbox.contains(x) {
        return Err(Error::Domain(format!("{x:?} outside the window")));
    }
    if x[0] < *y_min || x[0] > *y_max {
        return Err(Error::Domain(format!("{x:?} outside the sampled graph base")));
    }
    let h = domain.kind.graph_height(x[0]).expect("graph");
    if !(x[1] < h) {
        return Err(Error::Domain(format!("{x:?} is not below the graph")));
    }
    let image = vec![x[0], 2.0 * h - x[1]];
    if !domain.bbox.contains(&image) {
        return Err(Error::Domain(format!("reflection of {x:?} leaves the window")));
    }
    Ok(image)
}

/// The reflection formula without the side condition; `H(H(x)) = x`.
pub fn reflect_across_graph(domain: &DomainShape, x: &[f64]) -> Option<Vec<f64>> {
    let h = domain.kind.graph_height(x[0])?;
    Some(vec![x[0], 2.0 * h - x[1]])
}

/// `c₁` with `|H(x) - x| ≤ c₁ d(x, ∂Ω)`: the vertical gap `h(y) - t` is at
/// most `sqrt(1 + L²)` times the distance to a graph of slope `L`.
pub fn reflection_constant(domain: &DomainShape) -> Option<f64> {
    match &domain.kind {
        DomainKind::LipschitzGraph { lipschitz, .. } => Some(2.0 * (1.0 + lipschitz * lipschitz).sqrt()),
        _ => None,
    }
}
