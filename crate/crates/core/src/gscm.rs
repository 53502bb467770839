//! Geometry-based stochastic channel model: scenario files, trajectory
//! interpolation (modified Akima), LOS blockage, per-region path generation
//! and the discrete time-variant frequency response.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::channel::{path_delay_at, PathKind, PropagationPath, SamplingConfig, StationarityRegion, C0};
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[allow(clippy::should_implement_trait)] // plain method keeps Vec2 Copy-friendly without operator imports
    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
}

/// Modified Akima (makima) piecewise-cubic interpolant in one dimension.
///
/// Tangents blend neighboring secant slopes with weights
/// w = |d(slope)| + |sum(slopes)| / 2, with two mirror-extrapolated slopes
/// added at each end; flat runs where all weights vanish fall back to the
/// centered average.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Makima {
    t: Vec<f64>,
    v: Vec<f64>,
    tangent: Vec<f64>,
}

impl Makima {
    pub(crate) fn new(t: &[f64], v: &[f64]) -> Result<Self> {
        if t.len() != v.len() || t.len() < 2 {
            return Err(Error::InvalidConfig("interpolation needs >= 2 matching points".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("interpolation abscissae must strictly increase".into()));
        }
        let n = t.len();
        // secant slopes padded with two linear-extrapolation slopes per side;
        // m[j + 2] is the real slope of interval j.
        let mut m = vec![0.0; n + 3];
        for j in 0..n - 1 {
            m[j + 2] = (v[j + 1] - v[j]) / (t[j + 1] - t[j]);
        }
        m[1] = 2.0 * m[2] - m[3.min(n)];
        m[0] = 2.0 * m[1] - m[2];
        m[n + 1] = 2.0 * m[n] - m[n - 1];
        m[n + 2] = 2.0 * m[n + 1] - m[n];

        let w = |a: f64, b: f64| (b - a).abs() + (b + a).abs() / 2.0;
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        for i in 0..n {
            f1[i] = w(m[i + 2], m[i + 3]);
            f2[i] = w(m[i], m[i + 1]);
        }
        let max_f12 = f1.iter().zip(&f2).map(|(a, b)| a + b).fold(f64::NEG_INFINITY, f64::max);
        let mut tangent = vec![0.0; n];
        for i in 0..n {
            let f12 = f1[i] + f2[i];
            tangent[i] = if f12 > 1e-9 * max_f12 {
                (f1[i] * m[i + 1] + f2[i] * m[i + 2]) / f12
            } else {
                0.5 * (m[i + 3] + m[i])
            };
        }
        Ok(Self { t: t.to_vec(), v: v.to_vec(), tangent })
    }

    fn interval(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.t[0], *self.t.last().unwrap());
        if t < start || t > end {
            return Err(Error::OutOfSupport { t_s: t, start_s: start, end_s: end });
        }
        let i = match self.t.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(i.min(self.t.len() - 2))
    }

    /// (value, derivative) at t via the cubic Hermite basis.
    pub(crate) fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let i = self.interval(t)?;
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (d0, d1) = (self.tangent[i] * h, self.tangent[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * v1
            + (s3 - s2) * d1;
        let deriv = ((6.0 * s2 - 6.0 * s) * v0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * v1
            + (3.0 * s2 - 2.0 * s) * d1)
            / h;
        Ok((value, deriv))
    }
}

/// A 2-D node track with smooth position and velocity queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    spline_x: Makima,
    spline_y: Makima,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidConfig("trajectory needs >= 2 waypoints".into()));
        }
        if waypoints.iter().any(|w| !(w.t_s.is_finite() && w.x_m.is_finite() && w.y_m.is_finite())) {
            return Err(Error::NonFinite("trajectory waypoint"));
        }
        let t: Vec<f64> = waypoints.iter().map(|w| w.t_s).collect();
        let x: Vec<f64> = waypoints.iter().map(|w| w.x_m).collect();
        let y: Vec<f64> = waypoints.iter().map(|w| w.y_m).collect();
        Ok(Self { spline_x: Makima::new(&t, &x)?, spline_y: Makima::new(&t, &y)?, waypoints })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.waypoints[0].t_s, self.waypoints.last().unwrap().t_s)
    }

    /// Position and velocity at time t.
    pub fn state(&self, t: f64) -> Result<(Vec2, Vec2)> {
        let (x, vx) = self.spline_x.eval(t)?;
        let (y, vy) = self.spline_y.eval(t)?;
        Ok((Vec2::new(x, y), Vec2::new(vx, vy)))
    }

    pub fn position(&self, t: f64) -> Result<Vec2> {
        Ok(self.state(t)?.0)
    }

    pub fn velocity(&self, t: f64) -> Result<Vec2> {
        Ok(self.state(t)?.1)
    }

    /// Rebuild the track with supporting points spaced `dt` apart.
    pub fn resampled(&self, dt: f64) -> Result<Trajectory> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("resample spacing must be positive, got {dt}")));
        }
        let (start, end) = self.support();
        let mut pts = Vec::new();
        let mut t = start;
        while t <= end + 1e-12 {
            let p = self.position(t.min(end))?;
            pts.push(Waypoint { t_s: t.min(end), x_m: p.x, y_m: p.y });
            t += dt;
        }
        if end - pts.last().unwrap().t_s > 1e-9 {
            let p = self.position(end)?;
            pts.push(Waypoint { t_s: end, x_m: p.x, y_m: p.y });
        }
        Trajectory::new(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScattererKind {
    StaticDiscrete,
    MobileDiscrete,
    Diffuse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScattererPosition {
    Fixed(Vec2),
    Moving(Trajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub kind: ScattererKind,
    pub position: ScattererPosition,
    pub gain_db: f64,
    pub seed_tag: u64,
}

impl Scatterer {
    fn state(&self, t: f64) -> Result<(Vec2, Vec2)> {
        match &self.position {
            ScattererPosition::Fixed(p) => Ok((*p, Vec2::new(0.0, 0.0))),
            ScattererPosition::Moving(traj) => traj.state(t),
        }
    }

    fn path_kind(&self) -> PathKind {
        match self.kind {
            ScattererKind::StaticDiscrete => PathKind::StaticDiscrete,
            ScattererKind::MobileDiscrete => PathKind::MobileDiscrete,
            ScattererKind::Diffuse => PathKind::Diffuse,
        }
    }
}

/// Seed-tag namespace for diffuse points expanded from building polylines.
const DIFFUSE_TAG_BASE: u64 = 1 << 32;
/// Key discriminators for the per-scatterer random draws.
const KEY_GAIN: u64 = 1;
const KEY_PHASE: u64 = 2;
const KEY_JITTER: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx: Trajectory,
    pub rx: Trajectory,
    pub scatterers: Vec<Scatterer>,
    /// LOS-blocking polylines (also the diffuse-scatterer anchors).
    pub buildings: Vec<Vec<Vec2>>,
    pub radio: SamplingConfig,
    pub p_tx_dbm: f64,
    pub pathloss_exponent: f64,
    /// Std deviation of the per-scatterer log-normal gain, dB.
    pub gain_sigma_db: f64,
    pub seed: u64,
}

fn sd<T>(r: std::result::Result<T, serde_path_to_error::Error<serde_json::Error>>) -> Result<T> {
    r.map_err(|e| Error::Schema { path: e.path().to_string(), msg: e.inner().to_string() })
}

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema { path: path.to_string(), msg: msg.into() }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    radio: RawRadio,
    nodes: Vec<RawNode>,
    #[serde(default)]
    scatterers: Vec<RawScatterer>,
    #[serde(default)]
    buildings: Vec<Vec<[f64; 2]>>,
    diffuse: Option<RawDiffuse>,
    pathloss_exponent: f64,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    carrier_hz: f64,
    bandwidth_hz: f64,
    t_stat_s: f64,
    t_s: f64,
    rolloff: f64,
    p_tx_dbm: f64,
    #[serde(default = "default_delay_bins")]
    n_delay_bins: usize,
    #[serde(default = "default_gain_sigma")]
    gain_sigma_db: f64,
}

fn default_delay_bins() -> usize {
    64
}

fn default_gain_sigma() -> f64 {
    3.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    waypoints: Vec<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScatterer {
    kind: String,
    position: Option<[f64; 2]>,
    waypoints: Option<Vec<[f64; 3]>>,
    gain_db: f64,
    seed_tag: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiffuse {
    density_per_m: f64,
    gain_db: f64,
    jitter_m: f64,
}

fn parse_trajectory(path: &str, waypoints: &[[f64; 3]]) -> Result<Trajectory> {
    if waypoints.len() < 2 {
        return Err(schema(path, "needs at least 2 waypoints"));
    }
    if waypoints.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(schema(path, "waypoint times must strictly increase"));
    }
    Trajectory::new(waypoints.iter().map(|w| Waypoint { t_s: w[0], x_m: w[1], y_m: w[2] }).collect())
        .map_err(|e| schema(path, e.to_string()))
}

/// Diffuse points spaced 1/density along each building segment, with a
/// seeded uniform jitter on both coordinates.
fn expand_diffuse(buildings: &[Vec<Vec2>], d: &RawDiffuse, seed: u64) -> Result<Vec<Scatterer>> {
    if d.density_per_m < 0.0 || d.jitter_m < 0.0 {
        return Err(schema("diffuse", "density_per_m and jitter_m must be non-negative"));
    }
    let mut out = Vec::new();
    let mut tag = DIFFUSE_TAG_BASE;
    for (b, poly) in buildings.iter().enumerate() {
        for s in 0..poly.len().saturating_sub(1) {
            let (a, bpt) = (poly[s], poly[s + 1]);
            let len = bpt.sub(a).norm();
            let n = (len * d.density_per_m).floor() as usize;
            for i in 0..n {
                let frac = (i as f64 + 0.5) / n as f64;
                let mut rng = keyed_rng(seed, &[KEY_JITTER, b as u64, s as u64, i as u64]);
                let jx: f64 = rng.random_range(-d.jitter_m..=d.jitter_m);
                let jy: f64 = rng.random_range(-d.jitter_m..=d.jitter_m);
                out.push(Scatterer {
                    kind: ScattererKind::Diffuse,
                    position: ScattererPosition::Fixed(Vec2::new(
                        a.x + frac * (bpt.x - a.x) + jx,
                        a.y + frac * (bpt.y - a.y) + jy,
                    )),
                    gain_db: d.gain_db,
                    seed_tag: tag,
                });
                tag += 1;
            }
        }
    }
    Ok(out)
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawScenario = sd(serde_path_to_error::deserialize(&mut de))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let r = &raw.radio;
        if r.bandwidth_hz <= 0.0 || r.carrier_hz <= 0.0 {
            return Err(schema("radio", "carrier_hz and bandwidth_hz must be positive"));
        }
        if r.t_stat_s <= 0.0 || r.t_s <= 0.0 {
            return Err(schema("radio", "t_stat_s and t_s must be positive"));
        }
        let m_samples = (r.t_stat_s / r.t_s).round() as usize;
        if m_samples == 0 {
            return Err(schema("radio.t_s", "t_s larger than t_stat_s"));
        }
        let radio = SamplingConfig {
            t_s: r.t_s,
            t_c: 1.0 / r.bandwidth_hz,
            n_delay_bins: r.n_delay_bins,
            m_samples,
            t_stat: r.t_stat_s,
            rolloff: r.rolloff,
            carrier_hz: r.carrier_hz,
            bandwidth_hz: r.bandwidth_hz,
        };
        radio.validate().map_err(|e| schema("radio", e.to_string()))?;

        let mut tx = None;
        let mut rx = None;
        for (i, node) in raw.nodes.iter().enumerate() {
            let path = format!("nodes[{i}]");
            let traj = parse_trajectory(&format!("{path}.waypoints"), &node.waypoints)?;
            match node.id.as_str() {
                "tx" if tx.is_none() => tx = Some(traj),
                "rx" if rx.is_none() => rx = Some(traj),
                "tx" | "rx" => return Err(schema(&format!("{path}.id"), "duplicate node id")),
                other => {
                    return Err(schema(&format!("{path}.id"), format!("expected \"tx\" or \"rx\", got \"{other}\"")))
                }
            }
        }
        let tx = tx.ok_or_else(|| schema("nodes", "missing node with id \"tx\""))?;
        let rx = rx.ok_or_else(|| schema("nodes", "missing node with id \"rx\""))?;

        let buildings: Vec<Vec<Vec2>> = raw
            .buildings
            .iter()
            .map(|poly| poly.iter().map(|p| Vec2::new(p[0], p[1])).collect())
            .collect();
        for (i, poly) in buildings.iter().enumerate() {
            if poly.len() < 2 {
                return Err(schema(&format!("buildings[{i}]"), "polyline needs at least 2 points"));
            }
        }

        let mut scatterers = Vec::new();
        for (i, s) in raw.scatterers.iter().enumerate() {
            let path = format!("scatterers[{i}]");
            let kind = match s.kind.as_str() {
                "static_discrete" => ScattererKind::StaticDiscrete,
                "mobile_discrete" => ScattererKind::MobileDiscrete,
                "diffuse" => ScattererKind::Diffuse,
                other => {
                    return Err(schema(
                        &format!("{path}.kind"),
                        format!("unknown kind \"{other}\" (expected static_discrete, mobile_discrete or diffuse)"),
                    ))
                }
            };
            let position = match (kind, &s.position, &s.waypoints) {
                (ScattererKind::MobileDiscrete, None, Some(w)) => {
                    ScattererPosition::Moving(parse_trajectory(&format!("{path}.waypoints"), w)?)
                }
                (ScattererKind::MobileDiscrete, _, _) => {
                    return Err(schema(&path, "mobile_discrete requires waypoints and no position"))
                }
                (_, Some(p), None) => ScattererPosition::Fixed(Vec2::new(p[0], p[1])),
                (_, _, _) => return Err(schema(&path, "static scatterer requires position and no waypoints")),
            };
            scatterers.push(Scatterer {
                kind,
                position,
                gain_db: s.gain_db,
                seed_tag: s.seed_tag.unwrap_or(i as u64),
            });
        }
        let mut tags: Vec<u64> = scatterers.iter().map(|s| s.seed_tag).collect();
        tags.sort_unstable();
        if tags.windows(2).any(|w| w[0] == w[1]) {
            return Err(schema("scatterers", "seed_tag values must be unique"));
        }
        if let Some(d) = &raw.diffuse {
            scatterers.extend(expand_diffuse(&buildings, d, raw.seed)?);
        }

        if !(raw.pathloss_exponent.is_finite() && raw.pathloss_exponent >= 0.0) {
            return Err(schema("pathloss_exponent", "must be finite and non-negative"));
        }

        Ok(Self {
            tx,
            rx,
            scatterers,
            buildings,
            radio,
            p_tx_dbm: r.p_tx_dbm,
            pathloss_exponent: raw.pathloss_exponent,
            gain_sigma_db: r.gain_sigma_db,
            seed: raw.seed,
        })
    }

    /// Overlap of the tx and rx trajectory supports.
    pub fn window(&self) -> (f64, f64) {
        let (a0, a1) = self.tx.support();
        let (b0, b1) = self.rx.support();
        (a0.max(b0), a1.min(b1))
    }
}

/// Time span of one stationarity region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpan {
    pub index: u32,
    pub t_start_s: f64,
    pub duration_s: f64,
}

impl RegionSpan {
    pub fn midpoint_s(&self) -> f64 {
        self.t_start_s + self.duration_s / 2.0
    }
}

/// Consecutive regions of length t_stat covering the simulation window.
pub fn segment_regions(scenario: &Scenario) -> Result<Vec<RegionSpan>> {
    let (start, end) = scenario.window();
    let t_stat = scenario.radio.t_stat;
    let count = ((end - start) / t_stat).floor() as i64;
    if count < 1 {
        return Err(Error::InvalidConfig(format!(
            "simulation window of {} s is shorter than one stationarity region ({} s)",
            end - start,
            t_stat
        )));
    }
    Ok((0..count as u32)
        .map(|r| RegionSpan { index: r, t_start_s: start + r as f64 * t_stat, duration_s: t_stat })
        .collect())
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Proper or touching intersection of segments ab and cd.
fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = d.sub(c).cross(a.sub(c));
    let d2 = d.sub(c).cross(b.sub(c));
    let d3 = b.sub(a).cross(c.sub(a));
    let d4 = b.sub(a).cross(d.sub(a));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True when no building polyline crosses the tx-rx segment.
pub fn los_clear(scenario: &Scenario, tx: Vec2, rx: Vec2) -> bool {
    !scenario.buildings.iter().any(|poly| {
        poly.windows(2).any(|seg| segments_intersect(tx, rx, seg[0], seg[1]))
    })
}

/// Rate of change of |p| given velocity v of the endpoint, d/dt |p|.
fn range_rate(p: Vec2, v: Vec2) -> f64 {
    p.dot(v) / p.norm()
}

const MIN_DISTANCE_M: f64 = 1e-6;

/// Generate the propagation paths of one stationarity region.
///
/// All kinematics are frozen at the region midpoint. Doppler is positive for
/// a closing path: f = -(f_C / c0) * d/dt(path length). Discrete and diffuse
/// amplitudes follow the distance-product law (d_tx d_rx)^(-gamma/2) times
/// the configured gain and a log-normal per-scatterer gain keyed by
/// (seed, seed_tag); starting phases are uniform keyed by
/// (seed, seed_tag, region).
pub fn compute_paths(scenario: &Scenario, region_index: u32) -> Result<StationarityRegion> {
    compute_paths_seeded(scenario, region_index, scenario.seed)
}

/// [`compute_paths`] with the master seed overridden, used to draw
/// independent realizations of the stochastic per-scatterer gains and phases.
pub fn compute_paths_seeded(
    scenario: &Scenario,
    region_index: u32,
    seed: u64,
) -> Result<StationarityRegion> {
    let regions = segment_regions(scenario)?;
    let span = *regions
        .get(region_index as usize)
        .ok_or_else(|| Error::InvalidConfig(format!("region {region_index} out of range")))?;
    let t = span.midpoint_s();
    let fc = scenario.radio.carrier_hz;
    let gamma = scenario.pathloss_exponent;
    let (p_tx, v_tx) = scenario.tx.state(t)?;
    let (p_rx, v_rx) = scenario.rx.state(t)?;
    let mut paths = Vec::new();

    let sep = p_rx.sub(p_tx);
    let d = sep.norm();
    if d < MIN_DISTANCE_M {
        return Err(Error::DegenerateGeometry(format!("tx-rx distance {d} m at t = {t} s")));
    }
    if los_clear(scenario, p_tx, p_rx) {
        let rate = range_rate(sep, v_rx.sub(v_tx));
        let delay = d / C0;
        // carrier phase of the direct path, in cycles
        let phase = (-fc * delay).rem_euclid(1.0);
        paths.push(PropagationPath::new(
            d.powf(-gamma / 2.0),
            phase,
            delay,
            -fc / C0 * rate,
            PathKind::Los,
        )?);
    }

    let normal = Normal::new(0.0, scenario.gain_sigma_db)
        .map_err(|e| Error::InvalidConfig(format!("gain sigma: {e}")))?;
    for s in &scenario.scatterers {
        let (p_s, v_s) = s.state(t)?;
        let leg_in = p_s.sub(p_tx);
        let leg_out = p_rx.sub(p_s);
        let (d1, d2) = (leg_in.norm(), leg_out.norm());
        if d1 < MIN_DISTANCE_M || d2 < MIN_DISTANCE_M {
            return Err(Error::DegenerateGeometry(format!(
                "scatterer tag {} coincides with a node at t = {t} s",
                s.seed_tag
            )));
        }
        let rate = range_rate(leg_in, v_s.sub(v_tx)) + range_rate(leg_out, v_rx.sub(v_s));
        let gain_draw: f64 = normal.sample(&mut keyed_rng(seed, &[KEY_GAIN, s.seed_tag]));
        let amplitude =
            (d1 * d2).powf(-gamma / 2.0) * 10f64.powf((s.gain_db + gain_draw) / 20.0);
        let phase: f64 = keyed_rng(seed, &[KEY_PHASE, s.seed_tag, region_index as u64])
            .random_range(0.0..1.0);
        paths.push(PropagationPath::new(
            amplitude,
            phase,
            (d1 + d2) / C0,
            -fc / C0 * rate,
            s.path_kind(),
        )?);
    }
    StationarityRegion::new(region_index, paths, span.duration_s)
}

/// Discrete time-variant frequency response of one region.
#[derive(Debug, Clone)]
pub struct GscmFrequencyResponse {
    data: Vec<Complex64>,
    pub m_samples: usize,
    pub n_k: usize,
    pub delta_f_hz: f64,
}

impl GscmFrequencyResponse {
    /// Subcarrier index of column ki; column 0 is k = -n_k/2.
    pub fn k_of(&self, ki: usize) -> i64 {
        ki as i64 - (self.n_k / 2) as i64
    }

    #[inline]
    pub fn at(&self, m: usize, ki: usize) -> Complex64 {
        self.data[m * self.n_k + ki]
    }
}

/// H[m, k] as the sum of the LOS term (baseband phase e^{-j 2 pi k df tau})
/// and the scatterer terms (passband phase e^{-j 2 pi (f_C + k df) tau}),
/// with each path's delay advanced by its Doppler across the region.
pub fn frequency_response(
    region: &StationarityRegion,
    delta_f_hz: f64,
    cfg: &SamplingConfig,
) -> Result<GscmFrequencyResponse> {
    cfg.validate()?;
    if delta_f_hz <= 0.0 || !delta_f_hz.is_finite() {
        return Err(Error::InvalidConfig(format!("delta_f must be positive, got {delta_f_hz}")));
    }
    let n_k = 2 * ((cfg.bandwidth_hz / (2.0 * delta_f_hz)).floor() as usize);
    if n_k == 0 {
        return Err(Error::InvalidConfig("delta_f larger than the bandwidth".into()));
    }
    let half = (n_k / 2) as i64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut data = vec![Complex64::ZERO; cfg.m_samples * n_k];
    for path in &region.paths {
        let los = path.kind == PathKind::Los;
        for m in 0..cfg.m_samples {
            let tau = path_delay_at(path, m, cfg);
            let row = &mut data[m * n_k..(m + 1) * n_k];
            let base = if los {
                // LOS amplitude advanced by its Doppler; no carrier factor
                path.weight() * Complex64::from_polar(1.0, two_pi * path.doppler_hz * m as f64 * cfg.t_s)
            } else {
                path.weight() * Complex64::from_polar(1.0, -two_pi * cfg.carrier_hz * tau)
            };
            for (ki, h) in row.iter_mut().enumerate() {
                let k = ki as i64 - half;
                *h += base * Complex64::from_polar(1.0, -two_pi * k as f64 * delta_f_hz * tau);
            }
        }
    }
    Ok(GscmFrequencyResponse { data, m_samples: cfg.m_samples, n_k, delta_f_hz })
}
