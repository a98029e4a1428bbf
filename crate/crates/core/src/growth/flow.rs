use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::mesh::{TopologySummary, TriangleMesh, Vec3};

use super::proximity::facing_gaps;
use super::{GrowthError, TangentPointEnergy, DEFAULT_ALPHA, DEFAULT_BETA};

pub const DEFAULT_SNAPSHOT_FRACTIONS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

const ARMIJO_C: f64 = 1e-4;
const LINE_SEARCH_HALVINGS: u32 = 12;
// Relative overshoot allowed past a snapshot threshold before the step is retried smaller.
const SNAPSHOT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthConfig {
    /// Closed interval the target area multiple is drawn from.
    pub target_area_multiplier: [f64; 2],
    /// Inflation displacement per iteration, in mean edge lengths.
    pub inflation_step_length: f64,
    /// Largest vertex displacement of the first line-search trial, in mean edge lengths.
    pub descent_step_length: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Pairs farther apart than this many mean edge lengths are ignored.
    pub cutoff_edge_lengths: f64,
    pub environment_penalty_weight: f64,
    pub environment_margin: f64,
    pub max_iterations: usize,
    /// Smallest step scale tried before an iteration is skipped.
    pub min_step_scale: f64,
    /// One Jacobi sweep of Laplacian smoothing on the energy gradient.
    pub smooth_gradient: bool,
    /// Weight of the tangential umbrella relaxation applied each iteration.
    pub tangential_relaxation: f64,
    /// Inflation fades out where a facing part of the surface is closer
    /// than twice this many mean edge lengths, and stops below it.
    pub proximity_fade_edge_lengths: f64,
    pub snapshot_fractions: Vec<f64>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            target_area_multiplier: [3.0, 5.0],
            inflation_step_length: 0.1,
            descent_step_length: 0.1,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            cutoff_edge_lengths: 10.0,
            environment_penalty_weight: 1.0,
            environment_margin: 0.05,
            max_iterations: 2000,
            min_step_scale: 1.0 / 64.0,
            smooth_gradient: false,
            tangential_relaxation: 0.25,
            proximity_fade_edge_lengths: 2.0,
            snapshot_fractions: DEFAULT_SNAPSHOT_FRACTIONS.to_vec(),
        }
    }
}

impl GrowthConfig {
    pub fn validate(&self) -> Result<(), GrowthError> {
        let bad = |m: String| Err(GrowthError::InvalidConfig(m));
        let [lo, hi] = self.target_area_multiplier;
        if !(lo >= 1.0) || !(lo <= hi) || !hi.is_finite() {
            return bad(format!("target area multiplier range [{lo}, {hi}] must satisfy 1 <= min <= max"));
        }
        if !(self.inflation_step_length >= 0.0) || !(self.descent_step_length >= 0.0) {
            return bad("step lengths must be nonnegative".into());
        }
        if !(self.environment_penalty_weight > 0.0) || !(self.environment_margin >= 0.0) {
            return bad("environment penalty weight must be positive and margin nonnegative".into());
        }
        if self.max_iterations == 0 || !(self.min_step_scale > 0.0 && self.min_step_scale <= 1.0) {
            return bad("max_iterations must be positive and min_step_scale in (0, 1]".into());
        }
        if !(self.cutoff_edge_lengths > 0.0) {
            return bad("cutoff must be positive".into());
        }
        let f = &self.snapshot_fractions;
        if f.is_empty() || f.windows(2).any(|w| !(w[0] < w[1])) || f.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return bad(format!("snapshot fractions {f:?} must be strictly increasing within [0, 1]"));
        }
        self.energy().validate()
    }

    pub fn energy(&self) -> TangentPointEnergy {
        TangentPointEnergy { alpha: self.alpha, beta: self.beta, cutoff: None }
    }

    pub fn draw_target<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let [lo, hi] = self.target_area_multiplier;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSnapshot {
    pub mesh: TriangleMesh,
    pub complexity_level: u32,
    pub area_ratio: f64,
    pub iteration: usize,
    pub chi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub area_ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub skipped_iterations: usize,
    /// Accepted states whose counts, chi or embedding differ from the seed.
    pub topology_violations: usize,
}

#[derive(Debug, Clone)]
pub struct GrowthOutcome {
    pub snapshots: Vec<GrowthSnapshot>,
    pub target_area_multiplier: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub stats: GrowthStats,
}

impl GrowthOutcome {
    pub fn completed(&self, config: &GrowthConfig) -> bool {
        self.snapshots.len() == config.snapshot_fractions.len() || self.target_area_multiplier <= 1.0
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,energy,area_ratio,accepted")?;
        for r in &self.trace {
            writeln!(out, "{},{:e},{:.9},{}", r.iteration, r.energy, r.area_ratio, r.accepted)?;
        }
        Ok(())
    }
}

struct Stepper<'a> {
    env: &'a Environment,
    config: &'a GrowthConfig,
    faces: &'a [[u32; 3]],
    neighbors: Vec<Vec<u32>>,
}

impl Stepper<'_> {
    fn energy(&self, mesh_scale: f64) -> TangentPointEnergy {
        self.config.energy().with_cutoff(Some(self.config.cutoff_edge_lengths * mesh_scale))
    }

    fn smoothed(&self, g: Vec<Vec3>) -> Vec<Vec3> {
        if !self.config.smooth_gradient {
            return g;
        }
        (0..g.len())
            .map(|i| {
                let n = &self.neighbors[i];
                let avg: Vec3 = n.iter().map(|&j| g[j as usize]).sum::<Vec3>() / n.len() as f64;
                0.5 * (g[i] + avg)
            })
            .collect()
    }

    fn relaxed(&self, x: &[Vec3], weight: f64) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); x.len()];
        for f in self.faces {
            let [a, b, c] = f.map(|i| i as usize);
            let n = (x[b] - x[a]).cross(&(x[c] - x[a]));
            normals[a] += n;
            normals[b] += n;
            normals[c] += n;
        }
        (0..x.len())
            .map(|i| {
                let nb = &self.neighbors[i];
                let avg: Vec3 = nb.iter().map(|&j| x[j as usize]).sum::<Vec3>() / nb.len() as f64;
                let n = normals[i].normalize();
                let delta = avg - x[i];
                x[i] + weight * (delta - delta.dot(&n) * n)
            })
            .collect()
    }

    /// Proposes new positions for one iteration at the given step scale.
    fn propose(&self, mesh: &TriangleMesh, scale: f64) -> Result<(Vec<Vec3>, f64), GrowthError> {
        let h = mesh.mean_edge_length();
        let cfg = self.config;
        let margin = cfg.environment_margin;

        // (1) inflation, faded out near obstacles and near facing surface
        let normals = mesh.vertex_normals();
        let gaps = facing_gaps(mesh, &self.neighbors, &normals, 2.0 * cfg.proximity_fade_edge_lengths * h, 0.0);
        let mut x: Vec<Vec3> = mesh
            .vertices()
            .iter()
            .zip(&normals)
            .zip(&gaps)
            .map(|((v, n), gap)| {
                let d = self.env.distance(v);
                let mut fade = if margin > 0.0 { ((d - margin) / margin).clamp(0.0, 1.0) } else { 1.0 };
                if cfg.proximity_fade_edge_lengths > 0.0 {
                    fade *= (gap / (cfg.proximity_fade_edge_lengths * h) - 1.0).clamp(0.0, 1.0);
                }
                v + cfg.inflation_step_length * scale * h * fade * n
            })
            .collect();

        // (2) repulsive descent with backtracking
        let energy = self.energy(h);
        let e0 = energy.energy_at(&x, self.faces)?;
        let mut e_final = e0;
        if cfg.descent_step_length > 0.0 {
            let raw = energy.gradient_at(&x, self.faces)?;
            let g = self.smoothed(raw.clone());
            let gmax = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let slope: f64 = g.iter().zip(&raw).map(|(a, b)| a.dot(b)).sum();
            if gmax > 0.0 && slope > 0.0 {
                let mut t = cfg.descent_step_length * scale * h / gmax;
                for _ in 0..LINE_SEARCH_HALVINGS {
                    let trial: Vec<Vec3> = x.iter().zip(&g).map(|(p, d)| p - t * d).collect();
                    if let Ok(e) = energy.energy_at(&trial, self.faces) {
                        if e <= e0 - ARMIJO_C * t * slope {
                            x = trial;
                            e_final = e;
                            break;
                        }
                    }
                    t *= 0.5;
                }
            }
        }

        // tangential relaxation keeps the one-rings from folding over
        if cfg.tangential_relaxation > 0.0 {
            x = self.relaxed(&x, cfg.tangential_relaxation * scale);
        }

        // (3) environment penalty
        if margin > 0.0 {
            for p in x.iter_mut() {
                let (d, grad) = self.env.distance_and_gradient(p);
                if d < margin {
                    *p += cfg.environment_penalty_weight * (margin - d) * grad;
                }
            }
        }
        Ok((x, e_final))
    }

    /// Step acceptance: valid faces, embedded, clear of every box.
    fn admissible(&self, mesh: &TriangleMesh, x: Vec<Vec3>) -> Option<TriangleMesh> {
        let next = match mesh.with_vertices(x) {
            Ok(m) => m,
            Err(e) => {
                log::debug!("step rejected: {e}");
                return None;
            }
        };
        if next.vertices().iter().any(|v| self.env.contains(v)) {
            log::debug!("step rejected: vertex inside obstacle");
            return None;
        }
        if (0..next.faces().len()).any(|f| self.env.intersects_triangle(&next.triangle(f))) {
            log::debug!("step rejected: face touches obstacle");
            return None;
        }
        if let Some((a, b)) = crate::mesh::first_self_intersection(next.vertices(), next.faces()) {
            log::debug!("step rejected: faces {a} and {b} intersect");
            return None;
        }
        Some(next)
    }
}

fn thresholds(config: &GrowthConfig, target: f64) -> Vec<f64> {
    config.snapshot_fractions.iter().map(|f| f * (target - 1.0) + 1.0).collect()
}

/// Grows a placed seed until its area reaches the drawn target multiple.
///
/// Each iteration inflates along vertex normals, takes a backtracking
/// descent step on the tangent-point energy, pushes vertices out of the
/// obstacle margin and then tests the result. Rejected steps are retried
/// at half the scale; below `min_step_scale` the iteration is skipped.
/// A snapshot is emitted the first time the area ratio reaches each
/// snapshot threshold.
pub fn grow(
    seed: &TriangleMesh,
    env: &Environment,
    config: &GrowthConfig,
    rng_seed: u64,
) -> Result<GrowthOutcome, GrowthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let target = config.draw_target(&mut rng);
    let seed_topology: TopologySummary = seed.topology();
    let chi = seed_topology.euler_characteristic;
    let area0 = seed.surface_area();
    let snap = |mesh: &TriangleMesh, level: usize, ratio: f64, iteration: usize| GrowthSnapshot {
        mesh: mesh.clone(),
        complexity_level: level as u32,
        area_ratio: ratio,
        iteration,
        chi,
    };

    let mut outcome = GrowthOutcome {
        snapshots: vec![snap(seed, 0, 1.0, 0)],
        target_area_multiplier: target,
        iterations: 0,
        trace: Vec::new(),
        stats: GrowthStats::default(),
    };
    if target <= 1.0 {
        return Ok(outcome);
    }
    let levels = thresholds(config, target);
    let mut next_level = levels.iter().position(|&t| t > 1.0).unwrap_or(levels.len());
    outcome.snapshots.truncate(1);
    for level in 1..next_level {
        outcome.snapshots.push(snap(seed, level, 1.0, 0));
    }

    let stepper = Stepper { env, config, faces: seed.faces(), neighbors: seed.vertex_neighbors() };
    let mut mesh = seed.clone();
    let mut ratio = 1.0;
    let mut scale = 1.0;
    let mut iteration = 0;
    while next_level < levels.len() && iteration < config.max_iterations {
        iteration += 1;
        let mut accepted = None;
        let mut energy = f64::NAN;
        while scale >= config.min_step_scale {
            let (x, e) = stepper.propose(&mesh, scale)?;
            energy = e;
            match stepper.admissible(&mesh, x) {
                Some(next) => {
                    let r = next.surface_area() / area0;
                    if r > levels[next_level] * (1.0 + SNAPSHOT_TOLERANCE) && scale * 0.5 >= config.min_step_scale {
                        scale *= 0.5;
                        continue;
                    }
                    accepted = Some((next, r));
                    break;
                }
                None => {
                    outcome.stats.rejected_steps += 1;
                    scale *= 0.5;
                }
            }
        }
        let was_accepted = accepted.is_some();
        match accepted {
            Some((next, r)) => {
                if next.topology() != seed_topology {
                    outcome.stats.topology_violations += 1;
                }
                mesh = next;
                ratio = r;
                outcome.stats.accepted_steps += 1;
                scale = (scale * 2.0).min(1.0);
                while next_level < levels.len() && ratio >= levels[next_level] {
                    outcome.snapshots.push(snap(&mesh, next_level, ratio, iteration));
                    next_level += 1;
                }
            }
            None => {
                outcome.stats.skipped_iterations += 1;
                scale = 1.0;
            }
        }
        outcome.trace.push(TraceRow { iteration, energy, area_ratio: ratio, accepted: was_accepted });
        log::trace!("iteration {iteration}: ratio {ratio:.4} energy {energy:e} scale {scale}");
    }
    outcome.iterations = iteration;
    if next_level < levels.len() && ratio < 1.0 + 0.2 * (target - 1.0) {
        return Err(GrowthError::Stalled { iterations: iteration, area_ratio: ratio });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Provenance;
    use crate::growth::{place_seed, PlacementParams};
    use crate::mesh::{make_genus_g_seed, Aabb, SeedParams};

    fn open_env() -> Environment {
        Environment::empty(Aabb { min: Vec3::zeros(), max: Vec3::repeat(20.0) })
    }

    fn placed(genus: u32) -> TriangleMesh {
        let seed = make_genus_g_seed(genus, &SeedParams::default()).unwrap();
        place_seed(&seed, &open_env(), &PlacementParams { rotation: [0.3, 0.2, 0.1], ..Default::default() }).unwrap()
    }

    fn config(target: f64) -> GrowthConfig {
        GrowthConfig { target_area_multiplier: [target, target], ..Default::default() }
    }

    #[test]
    fn unit_target_returns_seed() {
        let seed = placed(1);
        let out = grow(&seed, &open_env(), &config(1.0), 3).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].complexity_level, 0);
        assert_eq!(out.snapshots[0].mesh, seed);
    }

    #[test]
    fn completed_run_has_six_levels_at_even_increments() {
        let seed = placed(1);
        let out = grow(&seed, &open_env(), &config(2.0), 3).unwrap();
        assert_eq!(out.snapshots.len(), 6);
        for (k, s) in out.snapshots.iter().enumerate() {
            assert_eq!(s.complexity_level as usize, k);
            let expected = 1.0 + 0.2 * k as f64;
            assert!(s.area_ratio >= expected && s.area_ratio <= expected * 1.01, "{k}: {}", s.area_ratio);
            assert_eq!(s.chi, 0);
            assert_eq!(s.mesh.topology(), seed.topology());
            assert!(!s.mesh.has_self_intersection());
        }
        let last = out.snapshots.last().unwrap().area_ratio;
        assert!((last / 2.0 - 1.0).abs() < 0.02);
        assert_eq!(out.stats.topology_violations, 0);
        assert!(out.snapshots.windows(2).all(|w| w[0].area_ratio <= w[1].area_ratio));
    }

    #[test]
    fn growth_is_deterministic() {
        let seed = placed(2);
        let a = grow(&seed, &open_env(), &config(1.6), 9).unwrap();
        let b = grow(&seed, &open_env(), &config(1.6), 9).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn pure_descent_never_increases_energy() {
        let seed = placed(1);
        let cfg = GrowthConfig {
            inflation_step_length: 0.0,
            tangential_relaxation: 0.0,
            environment_margin: 0.0,
            max_iterations: 8,
            ..config(10.0)
        };
        let env = open_env();
        let stepper = Stepper { env: &env, config: &cfg, faces: seed.faces(), neighbors: seed.vertex_neighbors() };
        let mut mesh = seed.clone();
        let energy = cfg.energy();
        for _ in 0..8 {
            let e0 = energy.with_cutoff(Some(cfg.cutoff_edge_lengths * mesh.mean_edge_length())).energy(&mesh).unwrap();
            let (x, e1) = stepper.propose(&mesh, 1.0).unwrap();
            assert!(e1 <= e0);
            mesh = mesh.with_vertices(x).unwrap();
        }
    }

    #[test]
    fn obstacles_are_respected() {
        let seed = placed(0);
        let b = seed.bounds();
        // A slab just above the seed.
        let slab = Aabb { min: Vec3::new(0.0, 0.0, b.max.z + 0.1), max: Vec3::new(20.0, 20.0, b.max.z + 0.5) };
        let env = Environment::new(vec![slab], Aabb { min: Vec3::zeros(), max: Vec3::repeat(20.0) }, Provenance::Custom).unwrap();
        let out = grow(&seed, &env, &config(2.0), 1).unwrap();
        for s in &out.snapshots {
            assert!(s.mesh.vertices().iter().all(|v| v.z < slab.min.z));
        }
    }

    #[test]
    fn stalls_are_reported() {
        let seed = placed(0);
        let cfg = GrowthConfig { max_iterations: 1, ..config(50.0) };
        assert!(matches!(grow(&seed, &open_env(), &cfg, 1), Err(GrowthError::Stalled { iterations: 1, .. })));
    }

    #[test]
    fn invalid_configs_rejected() {
        let seed = placed(0);
        for cfg in [
            GrowthConfig { target_area_multiplier: [0.5, 2.0], ..Default::default() },
            GrowthConfig { beta: 3.0, ..Default::default() },
            GrowthConfig { snapshot_fractions: vec![0.0, 0.5, 0.4], ..Default::default() },
        ] {
            assert!(matches!(grow(&seed, &open_env(), &cfg, 0), Err(GrowthError::InvalidConfig(_))));
        }
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let seed = placed(0);
        let out = grow(&seed, &open_env(), &config(1.3), 2).unwrap();
        let mut buf = Vec::new();
        out.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iteration,energy,area_ratio,accepted");
        assert_eq!(text.lines().count(), out.trace.len() + 1);
    }
}
