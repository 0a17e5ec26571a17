//! Discretized Brownian bridges and the Poisson loop soup on a disc.
//!
//! Convention: standard planar Brownian motion, transition density
//! `p_t(x, y) = (2πt)^{-1} exp(-|x - y|² / 2t)`. The rooted loop measure
//! then has root–duration intensity `dA(x) dt / (2π t²)`, which the soup
//! realizes on `D × [t_min, t_max]` followed by rejection of loops leaving
//! the domain.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::geometry::{DiscDomain, PlanePoint};
use crate::rng::{mix64, RngStream};

/// Axis-aligned bounding box of a vertex list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min_re: f64,
    pub max_re: f64,
    pub min_im: f64,
    pub max_im: f64,
}

impl BoundingBox {
    fn of(vertices: &[PlanePoint]) -> Self {
        let mut b = BoundingBox {
            min_re: f64::INFINITY,
            max_re: f64::NEG_INFINITY,
            min_im: f64::INFINITY,
            max_im: f64::NEG_INFINITY,
        };
        for v in vertices {
            b.min_re = b.min_re.min(v.re);
            b.max_re = b.max_re.max(v.re);
            b.min_im = b.min_im.min(v.im);
            b.max_im = b.max_im.max(v.im);
        }
        b
    }

    /// True when `x` lies in the box grown by `pad` on every side.
    #[inline]
    pub fn contains_padded(&self, x: PlanePoint, pad: f64) -> bool {
        x.re >= self.min_re - pad
            && x.re <= self.max_re + pad
            && x.im >= self.min_im - pad
            && x.im <= self.max_im + pad
    }
}

/// A rooted, discretized Brownian loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    root: PlanePoint,
    duration: f64,
    vertices: Vec<PlanePoint>,
    times: Vec<f64>,
    bbox: BoundingBox,
    max_step_sigma: f64,
}

impl Loop {
    /// Builds a loop after checking closure and the time grid.
    pub fn new(vertices: Vec<PlanePoint>, times: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 || vertices.len() != times.len() {
            return Err(domain("loop needs matching vertex and time lists of length >= 2"));
        }
        if vertices.first() != vertices.last() {
            return Err(domain("loop is not closed"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("loop times must increase strictly from 0"));
        }
        Ok(Self::assemble(vertices, times))
    }

    fn assemble(vertices: Vec<PlanePoint>, times: Vec<f64>) -> Self {
        let bbox = BoundingBox::of(&vertices);
        let max_step_sigma = times
            .windows(2)
            .map(|w| (w[1] - w[0]).sqrt())
            .fold(0.0, f64::max);
        Self {
            root: vertices[0],
            duration: *times.last().unwrap(),
            vertices,
            times,
            bbox,
            max_step_sigma,
        }
    }

    /// A closed polygon with equally spaced times on `[0, duration]`.
    ///
    /// The first vertex is appended at the end when the input is open.
    pub fn from_polygon(mut vertices: Vec<PlanePoint>, duration: f64) -> Self {
        if vertices.first() != vertices.last() {
            vertices.push(vertices[0]);
        }
        let n = vertices.len() - 1;
        let times = (0..=n).map(|i| duration * i as f64 / n as f64).collect();
        Self::assemble(vertices, times)
    }

    pub fn root(&self) -> PlanePoint {
        self.root
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn vertices(&self) -> &[PlanePoint] {
        &self.vertices
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Largest `sqrt(Δt)` over the segments.
    pub fn max_step_sigma(&self) -> f64 {
        self.max_step_sigma
    }

    /// Same vertices with a new time grid; the grid must keep the endpoints' shape.
    pub fn reparametrized(&self, times: Vec<f64>) -> Result<Self> {
        Self::new(self.vertices.clone(), times)
    }

    /// Applies a map to every vertex, keeping the times.
    pub fn mapped(&self, f: impl Fn(PlanePoint) -> PlanePoint) -> Self {
        Self::assemble(self.vertices.iter().map(|&v| f(v)).collect(), self.times.clone())
    }
}

/// Parameters of a truncated loop soup.
#[derive(Clone, Debug, PartialEq)]
pub struct SoupConfig {
    pub alpha: f64,
    pub domain: DiscDomain,
    pub t_min: f64,
    pub t_max: f64,
    pub steps_per_unit_time: u32,
    pub seed: u64,
    pub replica_id: u64,
    /// Loops with a vertex at modulus `>= radius * (1 - exit_margin)` are rejected.
    pub exit_margin: f64,
}

impl Default for SoupConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            domain: DiscDomain::UNIT,
            t_min: 1e-4,
            t_max: 20.0,
            steps_per_unit_time: 2048,
            seed: 0,
            replica_id: 0,
            exit_margin: 0.0,
        }
    }
}

impl SoupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(domain(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(domain(format!(
                "need 0 < t_min < t_max, got t_min = {}, t_max = {}",
                self.t_min, self.t_max
            )));
        }
        if self.steps_per_unit_time < 2 {
            return Err(domain("steps_per_unit_time must be >= 2"));
        }
        if !(0.0..1.0).contains(&self.exit_margin) {
            return Err(domain("exit_margin must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Number of bridge steps used for a loop of the given duration.
    pub fn steps_for(&self, duration: f64) -> usize {
        let dense = (self.steps_per_unit_time as f64 * duration).ceil() as usize;
        dense.max(16)
    }

    /// `μ`-mass of roots in the domain with durations in `[t_min, t_max]`.
    pub fn intensity_mass(&self) -> f64 {
        self.domain.area() * (1.0 / self.t_min - 1.0 / self.t_max) / (2.0 * std::f64::consts::PI)
    }

    pub fn rng(&self) -> RngStream {
        RngStream::for_replica(self.seed, self.replica_id)
    }
}

/// A finite realization of the soup with its sampling bookkeeping.
#[derive(Clone, Debug)]
pub struct LoopSoup {
    pub config: SoupConfig,
    pub loops: Vec<Loop>,
    /// Poisson number of root–duration candidates.
    pub candidates_drawn: u64,
    /// Candidates whose path was never drawn because it cannot reach the focus.
    pub skipped: u64,
}

impl LoopSoup {
    pub fn accepted(&self) -> usize {
        self.loops.len()
    }

    /// Loops whose path stays inside the concentric disc of the given radius,
    /// with crossings between vertices resolved as in [`sample_soup`].
    pub fn restricted_to(&self, radius: f64) -> Vec<Loop> {
        self.loops
            .iter()
            .enumerate()
            .filter_map(|(i, lp)| {
                let rng = || self.config.rng().substream(mix64(i as u64) ^ RESTRICT_LABEL);
                confine_to(lp.clone(), radius, self.config.domain.radius(), rng)
            })
            .collect()
    }
}

const RESTRICT_LABEL: u64 = 0x7265_7374_7269_6374;

/// Planar Brownian bridge from `x` back to `x` over `[0, t]`, sampled at
/// `n_steps + 1` equally spaced times.
pub fn sample_bridge<R: Rng + ?Sized>(x: PlanePoint, t: f64, n_steps: usize, rng: &mut R) -> Loop {
    assert!(t > 0.0 && n_steps >= 2, "bridge needs t > 0 and at least two steps");
    let dt = t / n_steps as f64;
    let sd = dt.sqrt();
    // Random walk first, then pin the endpoint: B_i = W_i - (i/n) W_n.
    let mut walk = Vec::with_capacity(n_steps + 1);
    walk.push((0.0f64, 0.0f64));
    let (mut wr, mut wi) = (0.0, 0.0);
    for _ in 0..n_steps {
        let gr: f64 = rng.sample(StandardNormal);
        let gi: f64 = rng.sample(StandardNormal);
        wr += sd * gr;
        wi += sd * gi;
        walk.push((wr, wi));
    }
    let inv_n = 1.0 / n_steps as f64;
    let mut vertices = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    for (i, &(a, b)) in walk.iter().enumerate() {
        let s = i as f64 * inv_n;
        vertices.push(PlanePoint::new(x.re + a - s * wr, x.im + b - s * wi));
        times.push(i as f64 * dt);
    }
    vertices[n_steps] = x;
    times[n_steps] = t;
    Loop::assemble(vertices, times)
}

/// Duration with density `∝ t^{-2}` on `[t_min, t_max]`, by inverse CDF.
pub fn duration_from_uniform(u: f64, t_min: f64, t_max: f64) -> f64 {
    1.0 / (1.0 / t_min - u * (1.0 / t_min - 1.0 / t_max))
}

/// A point uniform on the disc.
pub fn uniform_in_disc<R: Rng + ?Sized>(domain: &DiscDomain, rng: &mut R) -> PlanePoint {
    let radius = domain.radius() * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    PlanePoint::new(radius * theta.cos(), radius * theta.sin())
}

/// Root uniform on the domain and duration from the `t^{-2}` law.
pub fn sample_root_and_duration<R: Rng + ?Sized>(config: &SoupConfig, rng: &mut R) -> (PlanePoint, f64) {
    let root = uniform_in_disc(&config.domain, rng);
    let t = duration_from_uniform(rng.random::<f64>(), config.t_min, config.t_max);
    (root, t)
}

/// Region of interest for a sampling run.
///
/// A candidate loop whose root lies farther than
/// `radius + reach_sigmas * sqrt(T)` from `center` is not drawn. The bridge
/// displacement exceeds `k sqrt(T)` with probability at most `4 exp(-k²)`,
/// so with the default `k = 8` such a loop touches the region with
/// probability below `1e-27`; it could neither wind around a point of the
/// region nor affect any ball centred there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Focus {
    pub center: PlanePoint,
    pub radius: f64,
    pub reach_sigmas: f64,
}

impl Focus {
    pub fn point(center: PlanePoint) -> Self {
        Self::disc(center, 0.0)
    }

    pub fn disc(center: PlanePoint, radius: f64) -> Self {
        Self {
            center,
            radius,
            reach_sigmas: 8.0,
        }
    }

    fn may_reach(&self, root: PlanePoint, duration: f64) -> bool {
        root.dist(self.center) < self.radius + self.reach_sigmas * duration.sqrt()
    }
}

/// Keeps the loop iff its path stays inside `|z| < r`.
///
/// Loops that come close to the circle are refined around their largest
/// modulus first, so excursions between vertices are detected.
fn confine_to(lp: Loop, r: f64, scale: f64, rng: impl FnOnce() -> RngStream) -> Option<Loop> {
    let vmax = lp.vertices().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max).sqrt();
    if vmax >= r {
        return None;
    }
    let opts = ExtremumOptions {
        resolution: 1e-5 * scale,
        ..ExtremumOptions::default()
    };
    if vmax + 1.5 * opts.sigmas * lp.max_step_sigma() < r {
        return Some(lp);
    }
    let (refined, max) = refine_max_with(&lp, PlanePoint::norm, |_| 1.0, &[r], &opts, &mut rng());
    (max < r).then_some(refined)
}

fn candidate_count<R: Rng + ?Sized>(config: &SoupConfig, rng: &mut R) -> u64 {
    let mean = config.alpha * config.intensity_mass();
    if mean <= 0.0 {
        return 0;
    }
    let n: f64 = Poisson::new(mean).expect("finite positive Poisson mean").sample(rng);
    n as u64
}

fn sample_soup_inner<R: Rng + ?Sized>(config: &SoupConfig, focus: Option<&Focus>, rng: &mut R) -> Result<LoopSoup> {
    config.validate()?;
    let n = candidate_count(config, rng);
    let mut loops = Vec::new();
    let mut skipped = 0;
    let exit_radius = config.domain.radius() * (1.0 - config.exit_margin);
    for _ in 0..n {
        let (root, t) = sample_root_and_duration(config, rng);
        if let Some(f) = focus {
            if !f.may_reach(root, t) {
                skipped += 1;
                continue;
            }
        }
        let lp = sample_bridge(root, t, config.steps_for(t), rng);
        // Boundary refinement draws from its own stream so that the main
        // stream, and with it every later candidate, does not depend on it.
        let edge_seed: u64 = rng.random();
        if let Some(lp) = confine_to(lp, exit_radius, config.domain.radius(), || RngStream::for_replica(edge_seed, 0)) {
            loops.push(lp);
        }
    }
    Ok(LoopSoup {
        config: config.clone(),
        loops,
        candidates_drawn: n,
        skipped,
    })
}

/// Samples the soup by Poisson thinning: `N ~ Poisson(α M)` root–duration
/// candidates, one bridge each, loops leaving the domain rejected.
pub fn sample_soup<R: Rng + ?Sized>(config: &SoupConfig, rng: &mut R) -> Result<LoopSoup> {
    sample_soup_inner(config, None, rng)
}

/// As [`sample_soup`], drawing paths only for candidates that can reach `focus`.
pub fn sample_soup_focused<R: Rng + ?Sized>(config: &SoupConfig, focus: &Focus, rng: &mut R) -> Result<LoopSoup> {
    sample_soup_inner(config, Some(focus), rng)
}

/// Options for [`refine_near_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions {
    /// Stop bisecting once the segment length and its time scale fall below this.
    pub target_resolution: f64,
    pub max_depth: u32,
    /// A segment is bisected when its distance to the point is below this many `sqrt(Δt)`.
    pub sigmas: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            target_resolution: 1e-6,
            max_depth: 48,
            sigmas: 4.0,
        }
    }
}

/// Distance from `x` to the segment `[a, b]`.
#[inline]
pub fn segment_distance(x: PlanePoint, a: PlanePoint, b: PlanePoint) -> f64 {
    let (dx, dy) = (b.re - a.re, b.im - a.im);
    let (px, py) = (x.re - a.re, x.im - a.im);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - s * dx).hypot(py - s * dy)
}

/// Refines the loop near `x` with the default depth limit.
pub fn refine_near<R: Rng + ?Sized>(lp: &Loop, x: PlanePoint, target_resolution: f64, rng: &mut R) -> Result<Loop> {
    let opts = RefineOptions {
        target_resolution,
        ..RefineOptions::default()
    };
    refine_near_with(lp, x, &opts, rng)
}

/// Bisects, by conditional Gaussian midpoints, every segment passing within
/// `sigmas * sqrt(Δt)` of `x`. The inserted points are exact bridge samples,
/// so the law of the loop is unchanged.
pub fn refine_near_with<R: Rng + ?Sized>(lp: &Loop, x: PlanePoint, opts: &RefineOptions, rng: &mut R) -> Result<Loop> {
    if !(opts.target_resolution > 0.0) {
        return Err(domain("target_resolution must be positive"));
    }
    let needs = |a: PlanePoint, b: PlanePoint, dt: f64| segment_distance(x, a, b) < opts.sigmas * dt.sqrt();
    let touched = lp
        .vertices
        .windows(2)
        .zip(lp.times.windows(2))
        .any(|(v, t)| needs(v[0], v[1], t[1] - t[0]));
    if !touched || opts.max_depth == 0 {
        return Ok(lp.clone());
    }

    let mut vertices = Vec::with_capacity(lp.vertices.len() + 64);
    let mut times = Vec::with_capacity(lp.vertices.len() + 64);
    vertices.push(lp.vertices[0]);
    times.push(lp.times[0]);
    // Explicit stack of pending right halves keeps the output ordered.
    let mut stack: Vec<(PlanePoint, f64, u32)> = Vec::new();
    for i in 0..lp.vertices.len() - 1 {
        let (mut a, mut ta) = (lp.vertices[i], lp.times[i]);
        stack.push((lp.vertices[i + 1], lp.times[i + 1], 0));
        while let Some(&(b, tb, depth)) = stack.last() {
            let dt = tb - ta;
            let fine = a.dist(b).max(dt.sqrt()) < opts.target_resolution;
            if needs(a, b, dt) && !fine {
                if depth >= opts.max_depth {
                    let d = segment_distance(x, a, b);
                    if d < opts.target_resolution {
                        return Err(Error::PointOnPath {
                            distance: d,
                            threshold: opts.target_resolution,
                        });
                    }
                } else {
                    let sd = 0.5 * dt.sqrt();
                    let gr: f64 = rng.sample(StandardNormal);
                    let gi: f64 = rng.sample(StandardNormal);
                    let mid = PlanePoint::new(0.5 * (a.re + b.re) + sd * gr, 0.5 * (a.im + b.im) + sd * gi);
                    let tm = 0.5 * (ta + tb);
                    stack.pop();
                    stack.push((b, tb, depth + 1));
                    stack.push((mid, tm, depth + 1));
                    continue;
                }
            }
            stack.pop();
            vertices.push(b);
            times.push(tb);
            a = b;
            ta = tb;
        }
    }
    Ok(Loop::assemble(vertices, times))
}

/// Options for [`refine_max_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremumOptions {
    /// Stop bisecting once `slope · sqrt(Δt)` falls below this, in units of `f`.
    pub resolution: f64,
    /// A segment is bisected while its endpoints are within this many
    /// `slope · sqrt(Δt)` of the next threshold (or of the running maximum).
    pub sigmas: f64,
    pub max_depth: u32,
}

impl Default for ExtremumOptions {
    fn default() -> Self {
        Self {
            resolution: 1e-5,
            sigmas: 4.0,
            max_depth: 40,
        }
    }
}

/// Refines the loop wherever the path maximum of `f` may hide between
/// vertices and returns the refined loop with `max f` over its vertices.
///
/// With an empty `thresholds` list the maximum itself is resolved to
/// `resolution`. Otherwise only the comparisons `max f < θ` for the given
/// thresholds are resolved: a segment is bisected only while it could lift
/// the running maximum past the next threshold, which is far cheaper.
///
/// `slope(z)` bounds `|∇f|` near `z`; it is inflated by half to cover its
/// variation along a segment. A bridge segment exceeds its endpoints by
/// `k sqrt(Δt)` with probability about `exp(-2k²)`, so with the default
/// `k = 4` a missed crossing has probability `~1e-14` per segment.
pub fn refine_max_with<R: Rng + ?Sized>(
    lp: &Loop,
    f: impl Fn(PlanePoint) -> f64,
    slope: impl Fn(PlanePoint) -> f64,
    thresholds: &[f64],
    opts: &ExtremumOptions,
    rng: &mut R,
) -> (Loop, f64) {
    let values: Vec<f64> = lp.vertices.iter().map(|&v| f(v)).collect();
    let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let target = |best: f64| {
        if thresholds.is_empty() {
            best
        } else {
            thresholds.iter().copied().filter(|&t| t > best).fold(f64::INFINITY, f64::min)
        }
    };
    let reach = |a: PlanePoint, b: PlanePoint, dt: f64| 1.5 * slope(a).max(slope(b)) * dt.sqrt();
    let open = |fa: f64, fb: f64, r: f64, goal: f64| r >= opts.resolution && fa.max(fb) + opts.sigmas * r >= goal;
    let goal = target(best);
    let touched = (0..values.len() - 1).any(|i| {
        let r = reach(lp.vertices[i], lp.vertices[i + 1], lp.times[i + 1] - lp.times[i]);
        open(values[i], values[i + 1], r, goal)
    });
    if !touched {
        return (lp.clone(), best);
    }

    let mut vertices = Vec::with_capacity(lp.vertices.len() + 64);
    let mut times = Vec::with_capacity(lp.vertices.len() + 64);
    vertices.push(lp.vertices[0]);
    times.push(lp.times[0]);
    let mut stack: Vec<(PlanePoint, f64, f64, u32)> = Vec::new();
    let mut goal = goal;
    for i in 0..lp.vertices.len() - 1 {
        let (mut a, mut ta, mut fa) = (lp.vertices[i], lp.times[i], values[i]);
        stack.push((lp.vertices[i + 1], lp.times[i + 1], values[i + 1], 0));
        while let Some(&(b, tb, fb, depth)) = stack.last() {
            let dt = tb - ta;
            if depth < opts.max_depth && open(fa, fb, reach(a, b, dt), goal) {
                let sd = 0.5 * dt.sqrt();
                let gr: f64 = rng.sample(StandardNormal);
                let gi: f64 = rng.sample(StandardNormal);
                let mid = PlanePoint::new(0.5 * (a.re + b.re) + sd * gr, 0.5 * (a.im + b.im) + sd * gi);
                let fm = f(mid);
                if fm > best {
                    best = fm;
                    goal = target(best);
                }
                stack.pop();
                stack.push((b, tb, fb, depth + 1));
                stack.push((mid, 0.5 * (ta + tb), fm, depth + 1));
                continue;
            }
            stack.pop();
            vertices.push(b);
            times.push(tb);
            a = b;
            ta = tb;
            fa = fb;
        }
    }
    (Loop::assemble(vertices, times), best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_is_closed_with_expected_grid() {
        let mut rng = RngStream::for_replica(1, 0);
        let x = PlanePoint::new(0.3, -0.2);
        let lp = sample_bridge(x, 0.5, 20, &mut rng);
        assert_eq!(lp.vertices().len(), 21);
        assert_eq!(lp.vertices()[0], x);
        assert_eq!(*lp.vertices().last().unwrap(), x);
        assert_eq!(lp.times()[0], 0.0);
        assert_eq!(*lp.times().last().unwrap(), 0.5);
        assert!(lp.times().windows(2).all(|w| w[1] > w[0]));
        assert!((lp.max_step_sigma() - (0.5f64 / 20.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn loop_constructor_checks() {
        let a = PlanePoint::new(0.0, 0.0);
        let b = PlanePoint::new(1.0, 0.0);
        assert!(Loop::new(vec![a, b], vec![0.0, 1.0]).is_err());
        assert!(Loop::new(vec![a, b, a], vec![0.0, 0.5, 0.5]).is_err());
        assert!(Loop::new(vec![a, b, a], vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn intensity_mass_example() {
        let cfg = SoupConfig {
            t_min: 0.01,
            t_max: 10.0,
            ..SoupConfig::default()
        };
        assert!((cfg.intensity_mass() - 49.95).abs() < 1e-12);
    }

    #[test]
    fn duration_inverse_cdf() {
        assert_eq!(duration_from_uniform(0.0, 0.01, 10.0), 0.01);
        assert!((duration_from_uniform(1.0, 0.01, 10.0) - 10.0).abs() < 1e-9);
        let median = duration_from_uniform(0.5, 0.01, 10.0);
        assert!((1.0 / median - (100.0 + 0.1) / 2.0).abs() < 1e-9);
        assert!((median - 0.019_980_019_980_02).abs() < 1e-12);
    }

    #[test]
    fn steps_rule() {
        let cfg = SoupConfig::default();
        assert_eq!(cfg.steps_for(1e-4), 16);
        assert_eq!(cfg.steps_for(1.0), 2048);
        assert_eq!(cfg.steps_for(0.5001), 1025);
    }

    #[test]
    fn zero_alpha_gives_empty_soup() {
        let cfg = SoupConfig {
            alpha: 0.0,
            ..SoupConfig::default()
        };
        let soup = sample_soup(&cfg, &mut cfg.rng()).unwrap();
        assert!(soup.loops.is_empty());
        assert_eq!(soup.candidates_drawn, 0);
    }

    #[test]
    fn config_validation() {
        let bad = SoupConfig {
            t_min: 2.0,
            t_max: 1.0,
            ..SoupConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SoupConfig {
            steps_per_unit_time: 1,
            ..SoupConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn soup_loops_stay_inside() {
        let cfg = SoupConfig {
            t_min: 0.01,
            t_max: 2.0,
            steps_per_unit_time: 256,
            seed: 5,
            ..SoupConfig::default()
        };
        let soup = sample_soup(&cfg, &mut cfg.rng()).unwrap();
        assert!(soup.accepted() as u64 <= soup.candidates_drawn);
        for lp in &soup.loops {
            assert!(lp.vertices().iter().all(|v| v.norm() < 1.0));
            assert!(lp.vertices().len() >= 17);
        }
    }

    #[test]
    fn refine_far_loop_is_unchanged() {
        let mut rng = RngStream::for_replica(2, 0);
        let lp = sample_bridge(PlanePoint::new(5.0, 5.0), 0.01, 16, &mut rng);
        let refined = refine_near(&lp, PlanePoint::ORIGIN, 1e-6, &mut rng).unwrap();
        assert_eq!(refined, lp);
    }

    #[test]
    fn refine_depth_zero_is_identity() {
        let mut rng = RngStream::for_replica(2, 0);
        let lp = sample_bridge(PlanePoint::new(0.01, 0.0), 0.01, 16, &mut rng);
        let opts = RefineOptions {
            max_depth: 0,
            ..RefineOptions::default()
        };
        let refined = refine_near_with(&lp, PlanePoint::ORIGIN, &opts, &mut rng).unwrap();
        assert_eq!(refined.vertices(), lp.vertices());
    }

    #[test]
    fn refined_loop_keeps_original_vertices_and_order() {
        let mut rng = RngStream::for_replica(3, 0);
        let lp = sample_bridge(PlanePoint::new(0.02, 0.0), 0.01, 16, &mut rng);
        let refined = refine_near(&lp, PlanePoint::ORIGIN, 1e-4, &mut rng).unwrap();
        assert!(refined.vertices().len() > lp.vertices().len());
        assert!(refined.times().windows(2).all(|w| w[1] > w[0]));
        // Original vertices survive as a subsequence.
        let mut it = refined.vertices().iter();
        for v in lp.vertices() {
            assert!(it.any(|w| w == v));
        }
        // No segment is left close to the point at a coarse scale.
        for (v, t) in refined.vertices().windows(2).zip(refined.times().windows(2)) {
            let dt = t[1] - t[0];
            let fine = v[0].dist(v[1]).max(dt.sqrt()) < 1e-4;
            assert!(fine || segment_distance(PlanePoint::ORIGIN, v[0], v[1]) >= 4.0 * dt.sqrt());
        }
    }

    #[test]
    fn refine_reports_point_on_path() {
        let mut rng = RngStream::for_replica(4, 0);
        let x = PlanePoint::new(0.1, 0.1);
        let lp = Loop::from_polygon(vec![x, PlanePoint::new(0.5, 0.1), PlanePoint::new(0.3, 0.4)], 0.1);
        let opts = RefineOptions {
            target_resolution: 1e-6,
            max_depth: 3,
            sigmas: 4.0,
        };
        assert!(matches!(
            refine_near_with(&lp, x, &opts, &mut rng),
            Err(Error::PointOnPath { .. })
        ));
    }

    #[test]
    fn segment_distance_cases() {
        let a = PlanePoint::new(0.0, 0.0);
        let b = PlanePoint::new(2.0, 0.0);
        assert_eq!(segment_distance(PlanePoint::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(segment_distance(PlanePoint::new(3.0, 0.0), a, b), 1.0);
        assert_eq!(segment_distance(PlanePoint::new(0.0, 2.0), a, a), 2.0);
    }
}
