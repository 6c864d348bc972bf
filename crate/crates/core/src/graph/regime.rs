use serde::{Deserialize, Serialize};

use super::CommunityLayout;

/// Connectivity regime of a community's live-edge subgraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `p_C > 3 ln|C| / |C|`: connected with high probability.
    Dense,
    /// `p_C >= (1 + eps) / |C|`: has a giant component.
    Tight,
    /// `p_C <= (1 - eps) / |C|`: single nodes influence O(1) nodes.
    Loose,
    Borderline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub epsilon: f64,
    pub labels: Vec<Regime>,
}

/// Labels every community of `layout` by its live-edge probability. Dense
/// communities also satisfy the tight threshold.
pub fn classify_regimes(layout: &CommunityLayout, epsilon: f64) -> RegimeLabel {
    let labels = layout
        .communities()
        .iter()
        .map(|c| {
            let size = c.size as f64;
            let p = c.p_live();
            let tight = p >= (1.0 + epsilon) / size;
            if tight && p > 3.0 * size.ln() / size {
                Regime::Dense
            } else if tight {
                Regime::Tight
            } else if p <= (1.0 - epsilon) / size {
                Regime::Loose
            } else {
                Regime::Borderline
            }
        })
        .collect();
    RegimeLabel { epsilon, labels }
}
