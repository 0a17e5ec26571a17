//! Winding numbers of discretized loops and winding spectra of soups.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::exact::bridge_sheet_probability;
use crate::geometry::{DiscDomain, PlanePoint, Uniformizer};
use crate::rng::{mix64, RngStream};
use crate::sampler::{refine_max_with, segment_distance, ExtremumOptions, Loop, LoopSoup};

/// Largest tolerated distance between the angle sum and an integer.
pub const RESIDUE_BOUND: f64 = 0.01;

/// Winding number together with the distance of the raw angle sum to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub turns: i64,
    pub residue: f64,
}

/// Signed angle swept around `x`, in turns.
pub fn angle_sum_turns(vertices: &[PlanePoint], x: PlanePoint) -> f64 {
    let mut total = 0.0;
    let (mut ar, mut ai) = (vertices[0].re - x.re, vertices[0].im - x.im);
    for v in &vertices[1..] {
        let (br, bi) = (v.re - x.re, v.im - x.im);
        total += (ar * bi - ai * br).atan2(ar * br + ai * bi);
        ar = br;
        ai = bi;
    }
    total / std::f64::consts::TAU
}

/// Winding number of the closed polygon around `x`.
///
/// Fails with [`Error::PointOnPath`] when `x` is within `eps` of a segment,
/// and with [`Error::Numerical`] when the angle sum is not within
/// [`RESIDUE_BOUND`] of an integer.
pub fn winding_number_eps(lp: &Loop, x: PlanePoint, eps: f64) -> Result<Winding> {
    let v = lp.vertices();
    let closest = v
        .windows(2)
        .map(|s| segment_distance(x, s[0], s[1]))
        .fold(f64::INFINITY, f64::min);
    if closest <= eps {
        return Err(Error::PointOnPath {
            distance: closest,
            threshold: eps,
        });
    }
    let turns = angle_sum_turns(v, x);
    let rounded = turns.round();
    let residue = (turns - rounded).abs();
    if residue >= RESIDUE_BOUND {
        return Err(Error::Numerical(format!(
            "winding angle sum {turns} is {residue} away from an integer"
        )));
    }
    Ok(Winding {
        turns: rounded as i64,
        residue,
    })
}

/// [`winding_number_eps`] with the default threshold of `1e-9`.
pub fn winding_number(lp: &Loop, x: PlanePoint) -> Result<Winding> {
    winding_number_eps(lp, x, 1e-9)
}

/// Options for [`resolve_winding`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolveOptions {
    /// Segments passing within this many `sqrt(Δt)` of the point have their
    /// swept angle sampled from the exact bridge law; the others are taken
    /// to sweep their principal angle.
    pub sigmas: f64,
    /// Sheets `|m| <= sheet_search` are weighed exactly; the remaining mass
    /// is spread with the asymptotic `1/m²` tail.
    pub sheet_search: i64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self {
            sigmas: 4.0,
            sheet_search: 32,
        }
    }
}

/// Winding number of the Brownian path underlying `lp` around `x`.
///
/// A straight segment sweeps its principal angle, while the bridge piece it
/// stands for may turn around `x` any number of extra times. Bisection does
/// not settle this: the path comes within `ε` of `x` with probability of
/// order `1 / log(1/ε)` and keeps turning at every smaller scale. Instead,
/// given its endpoints, each close segment draws its number of extra turns
/// from the exact law ([`bridge_sheet_probability`]). Pieces of a bridge
/// are conditionally independent given the vertices, so this is exact.
pub fn resolve_winding<R: Rng + ?Sized>(lp: &Loop, x: PlanePoint, opts: &ResolveOptions, rng: &mut R) -> Result<Winding> {
    let v = lp.vertices();
    let t = lp.times();
    let mut total = 0.0;
    let mut extra = 0i64;
    for i in 0..v.len() - 1 {
        let (a, b) = ((v[i].re - x.re, v[i].im - x.im), (v[i + 1].re - x.re, v[i + 1].im - x.im));
        let theta0 = (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
        total += theta0;
        let dt = t[i + 1] - t[i];
        let d = origin_segment_distance(a, b);
        if d >= opts.sigmas * dt.sqrt() {
            continue;
        }
        let z = a.0.hypot(a.1) * b.0.hypot(b.1) / dt;
        if !(z > 0.0) || theta0.abs() >= std::f64::consts::PI {
            return Err(Error::PointOnPath {
                distance: d,
                threshold: 0.0,
            });
        }
        extra += sample_sheet(z, theta0, opts.sheet_search, rng)?;
    }
    let turns = total / std::f64::consts::TAU;
    let rounded = turns.round();
    let residue = (turns - rounded).abs();
    if residue >= RESIDUE_BOUND {
        return Err(Error::Numerical(format!(
            "winding angle sum {turns} is {residue} away from an integer"
        )));
    }
    Ok(Winding {
        turns: rounded as i64 + extra,
        residue,
    })
}

/// Draws the extra turns `m` of a bridge piece around the origin.
fn sample_sheet<R: Rng + ?Sized>(z: f64, theta0: f64, search: i64, rng: &mut R) -> Result<i64> {
    let u: f64 = rng.random();
    let mut cum = bridge_sheet_probability(z, theta0, 0)?;
    if u < cum {
        return Ok(0);
    }
    for k in 1..=search {
        for m in [k, -k] {
            cum += bridge_sheet_probability(z, theta0, m)?;
            if u < cum {
                return Ok(m);
            }
        }
    }
    let v: f64 = rng.random();
    let k = (search as f64 / (1.0 - v)).floor() as i64 + 1;
    Ok(if rng.random::<bool>() { k } else { -k })
}

fn origin_segment_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (-(a.0 * dx + a.1 * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a.0 + s * dx).hypot(a.1 + s * dy)
}

/// Settings shared by the per-point soup analyses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingOptions {
    pub resolve: ResolveOptions,
    pub use_prefilter: bool,
    /// Refinement that resolves the pullback reach of winding loops;
    /// `None` takes the maximum over the sampled vertices only.
    pub reach: Option<ExtremumOptions>,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self {
            resolve: ResolveOptions::default(),
            use_prefilter: true,
            reach: Some(ExtremumOptions::default()),
        }
    }
}

/// Indices of loops that may wind around `x`.
///
/// A loop is kept when `x` lies in its bounding box grown by the refinement
/// reach (`sigmas * max sqrt(Δt)`). Outside that box no segment is refined
/// and the polygon winds zero times around `x`.
pub fn spatial_prefilter(soup: &LoopSoup, x: PlanePoint) -> Vec<usize> {
    prefilter_with(soup, x, ResolveOptions::default().sigmas)
}

fn prefilter_with(soup: &LoopSoup, x: PlanePoint, sigmas: f64) -> Vec<usize> {
    soup.loops
        .iter()
        .enumerate()
        .filter(|(_, l)| l.bbox().contains_padded(x, sigmas * l.max_step_sigma()))
        .map(|(i, _)| i)
        .collect()
}

/// Stream used to refine loop `index` near `x`: keyed by the soup's seed,
/// replica, loop index and the point, so filtered and unfiltered passes agree.
pub fn refinement_stream(soup: &LoopSoup, index: usize, x: PlanePoint) -> RngStream {
    let label = mix64(index as u64) ^ mix64(x.re.to_bits()).rotate_left(21) ^ mix64(x.im.to_bits()).rotate_left(42);
    RngStream::for_replica(soup.config.seed, soup.config.replica_id).substream(label)
}

/// A loop with nonzero winding around the analysed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingLoop {
    pub index: usize,
    pub turns: i64,
    /// `max |j_x|` along the path, resolved by refinement; the loop lies in
    /// `B(x, δ)` with margin `m` iff this is below `δ (1 - m)`.
    pub pullback_reach: f64,
}

/// All loops of a soup with nonzero winding around one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointWindings {
    pub point: PlanePoint,
    pub loops: Vec<WindingLoop>,
    /// Loops whose winding number was evaluated.
    pub examined: usize,
    /// Loops dropped because the point stayed on the path after refinement.
    pub ill_conditioned: usize,
}

impl PointWindings {
    /// Winding loops not contained in `B(x, δ)` under the given margin.
    pub fn outside(&self, delta: f64, margin: f64) -> impl Iterator<Item = &WindingLoop> {
        let threshold = delta * (1.0 - margin);
        self.loops.iter().filter(move |l| l.pullback_reach >= threshold)
    }

    pub fn spectrum(&self, delta: f64, margin: f64) -> WindingSpectrum {
        let mut counts = BTreeMap::new();
        for l in self.outside(delta, margin) {
            *counts.entry(l.turns).or_insert(0u64) += 1;
        }
        WindingSpectrum {
            point: self.point,
            exclusion_scale: delta,
            counts,
            examined: self.examined,
            ill_conditioned: self.ill_conditioned,
        }
    }

    /// `Σ k` over winding loops outside `B(x, δ)`.
    pub fn total_turns(&self, delta: f64, margin: f64) -> i64 {
        self.outside(delta, margin).map(|l| l.turns).sum()
    }
}

/// Evaluates the winding of every relevant loop of `soup` around `x`,
/// resolving each winding loop's pullback reach to the configured resolution.
pub fn analyze_point(soup: &LoopSoup, x: PlanePoint, opts: &WindingOptions) -> Result<PointWindings> {
    analyze_point_at(soup, x, opts, &[])
}

/// As [`analyze_point`], resolving reaches only against the given
/// containment thresholds `δ (1 - margin)`; every comparison
/// `pullback_reach < θ` with a listed `θ` is as accurate as a full
/// resolution, at a fraction of the cost.
pub fn analyze_point_at(soup: &LoopSoup, x: PlanePoint, opts: &WindingOptions, thresholds: &[f64]) -> Result<PointWindings> {
    let dom: &DiscDomain = &soup.config.domain;
    let uniformizer = Uniformizer::new(dom, x)?;
    let indices: Vec<usize> = if opts.use_prefilter {
        prefilter_with(soup, x, opts.resolve.sigmas)
    } else {
        (0..soup.loops.len()).collect()
    };
    let mut out = PointWindings {
        point: x,
        loops: Vec::new(),
        examined: indices.len(),
        ill_conditioned: 0,
    };
    for i in indices {
        let lp = &soup.loops[i];
        let mut rng = refinement_stream(soup, i, x);
        let reach_of = |lp: &Loop, rng: &mut RngStream| match &opts.reach {
            Some(r) => refine_max_with(lp, |z| uniformizer.modulus(z), |z| uniformizer.stretch(z), thresholds, r, rng).1,
            None => lp.vertices().iter().map(|&v| uniformizer.modulus(v)).fold(0.0, f64::max),
        };
        let outcome = resolve_winding(lp, x, &opts.resolve, &mut rng)
            .map(|w| (w.turns != 0).then(|| (w.turns, reach_of(lp, &mut rng))));
        match outcome {
            Ok(Some((turns, pullback_reach))) => out.loops.push(WindingLoop {
                index: i,
                turns,
                pullback_reach,
            }),
            Ok(None) => {}
            Err(Error::PointOnPath { .. }) | Err(Error::Numerical(_)) => out.ill_conditioned += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Counts of nonzero winding numbers over loops not contained in `B(x, δ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindingSpectrum {
    pub point: PlanePoint,
    pub exclusion_scale: f64,
    /// Only nonzero windings are stored; every stored count is at least 1.
    pub counts: BTreeMap<i64, u64>,
    pub examined: usize,
    pub ill_conditioned: usize,
}

impl WindingSpectrum {
    pub fn count(&self, k: i64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Winding spectrum of `soup` at `x` for exclusion scale `δ ∈ (0, 1]`.
pub fn winding_spectrum(soup: &LoopSoup, x: PlanePoint, delta: f64, margin: f64) -> Result<WindingSpectrum> {
    winding_spectrum_with(soup, x, delta, margin, &WindingOptions::default())
}

pub fn winding_spectrum_with(
    soup: &LoopSoup,
    x: PlanePoint,
    delta: f64,
    margin: f64,
    opts: &WindingOptions,
) -> Result<WindingSpectrum> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain(format!("exclusion scale must lie in (0, 1], got {delta}")));
    }
    Ok(analyze_point_at(soup, x, opts, &[delta * (1.0 - margin)])?.spectrum(delta, margin))
}
