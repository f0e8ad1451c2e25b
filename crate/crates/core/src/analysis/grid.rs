//! Composite detuning grids.
//!
//! Features differ in width by up to 13 decades, so no uniform grid resolves
//! them all. The grid is a coarse uniform sweep of the window plus, for each
//! feature, a block of points `c + w·a·sinh(t)` with t uniform: spacing is
//! about `a·w·Δt` at the center and grows exponentially out to ±`span`·w.

use crate::decomposition::{background_center, background_width, eit_width, nsit_center, nsit_width};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub coarse_points: usize,
    /// Points in each refined block.
    pub feature_points: usize,
    /// Half-extent of each refined block, in feature widths.
    pub span_widths: f64,
    /// Central spacing parameter of the sinh map, in widths per unit t.
    pub sinh_scale: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            coarse_points: 2001,
            feature_points: 801,
            span_widths: 30.0,
            sinh_scale: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchorKind {
    Background,
    Eit,
    SpinExchange,
}

impl AnchorKind {
    pub fn label(self) -> &'static str {
        match self {
            AnchorKind::Background => "background",
            AnchorKind::Eit => "eit",
            AnchorKind::SpinExchange => "nsit",
        }
    }
}

/// A refined block of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub kind: AnchorKind,
    pub center: f64,
    pub width: f64,
}

/// Description of how a grid was built.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub config: GridConfig,
    pub anchors: Vec<Anchor>,
    /// Number of distinct points after merging.
    pub total_points: usize,
}

/// Predicted positions and widths of the features present for `params`.
pub fn feature_anchors(params: &SystemParams) -> Vec<Anchor> {
    let mut out = vec![Anchor {
        kind: AnchorKind::Background,
        center: background_center(params),
        width: background_width(params),
    }];
    if params.control_power() > 0.0 {
        out.push(Anchor {
            kind: AnchorKind::Eit,
            center: -params.alkali_splitting(),
            width: eit_width(params),
        });
        if params.j_exchange > 0.0 {
            out.push(Anchor {
                kind: AnchorKind::SpinExchange,
                center: nsit_center(params),
                width: nsit_width(params),
            });
        }
    }
    out.retain(|a| a.width > 0.0 && a.width.is_finite() && a.center.is_finite());
    out
}

/// Uniform grid of `n` points on [lo, hi], endpoints included.
pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// Refined block around `center`, symmetric by construction.
pub fn sinh_block(center: f64, width: f64, cfg: &GridConfig) -> Vec<f64> {
    let n = cfg.feature_points.max(3) | 1;
    let t_max = (cfg.span_widths / cfg.sinh_scale).asinh();
    let half = n / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = i as f64 - half as f64;
        let t = t_max * k / half as f64;
        out.push(center + width * cfg.sinh_scale * t.sinh());
    }
    out
}

/// Merges the coarse grid and the refined blocks for `anchors` that overlap
/// [lo, hi]. The result is strictly increasing.
pub fn composite_grid(lo: f64, hi: f64, anchors: &[Anchor], cfg: &GridConfig) -> (Vec<f64>, GridSpec) {
    let mut pts = uniform(lo, hi, cfg.coarse_points.max(2));
    let mut used = Vec::new();
    for a in anchors {
        let reach = cfg.span_widths * a.width;
        if a.center + reach < lo || a.center - reach > hi {
            continue;
        }
        used.push(*a);
        pts.extend(sinh_block(a.center, a.width, cfg).into_iter().filter(|x| (lo..=hi).contains(x)));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let spec = GridSpec {
        lo,
        hi,
        config: *cfg,
        anchors: used,
        total_points: pts.len(),
    };
    (pts, spec)
}
