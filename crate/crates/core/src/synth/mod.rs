//! Seeded synthetic place-recognition instances with controllable aliasing.
//!
//! Places sit on a straight track, `place_spacing` meters apart. Each place
//! has a random unit prototype descriptor; references and queries are the
//! prototype plus isotropic Gaussian noise, renormalized. Aliasing pairs a
//! place with a decoy half the track away whose prototype is the same
//! direction rotated by `alias_angle` radians, so the two look nearly
//! identical while being geographically distinct.
//!
//! Every random draw comes from [`rng::PortableRng`] in a fixed order, so a
//! configuration maps to the same bytes on every platform.

pub mod oracle;
pub mod rng;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, DescriptorSet, Pose, PoseMode, PoseTable};
use rng::PortableRng;

pub const REFS_FILE: &str = "refs.vprd";
pub const QUERIES_FILE: &str = "queries.vprd";
pub const REF_POSES_FILE: &str = "refs.csv";
pub const QUERY_GT_FILE: &str = "gt.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
/// Missing JSON fields take their [`Default`] values.
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_places: usize,
    pub refs_per_place: usize,
    pub n_queries: usize,
    pub dim: usize,
    /// Per-coordinate standard deviation of the noise added before renormalizing.
    pub noise_sigma: f64,
    /// Fraction of places, and so in expectation of queries, that have a
    /// near-duplicate decoy place elsewhere on the track.
    pub alias_rate: f64,
    /// Meters between consecutive place centers.
    pub place_spacing: f64,
    pub seed: u64,
    /// Angle in radians between a place prototype and its decoy's prototype.
    pub alias_angle: f64,
    /// Query noise is `noise_sigma * (1 + d)` with `d` uniform in
    /// `[-difficulty_spread, difficulty_spread]`, drawn per query.
    pub difficulty_spread: f64,
    /// Appearance change across a place. A capture at offset `u` in `[-1, 1]`
    /// from the place center (scaled to +-10% of the spacing) adds
    /// `viewpoint_scale * u` times a per-place unit direction, so similarity
    /// decays smoothly with the offset between captures. A decoy shares its
    /// twin's direction.
    pub viewpoint_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_places: 200,
            refs_per_place: 3,
            n_queries: 400,
            dim: 128,
            noise_sigma: 0.06,
            alias_rate: 0.0,
            place_spacing: 100.0,
            seed: 42,
            alias_angle: 0.1,
            difficulty_spread: 0.0,
            viewpoint_scale: 0.0,
        }
    }
}

impl SynthConfig {
    /// The alias-heavy benchmark instance: half the places have a decoy, six
    /// captures per place with smooth appearance change across the place.
    pub fn alias_heavy(seed: u64) -> Self {
        Self {
            refs_per_place: 6,
            noise_sigma: 0.03,
            alias_rate: 0.5,
            viewpoint_scale: 1.25,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_places == 0 || self.refs_per_place == 0 || self.n_queries == 0 {
            return bad("n_places, refs_per_place and n_queries must all be at least 1".into());
        }
        if self.dim < 2 {
            return bad(format!("dim must be at least 2, got {}", self.dim));
        }
        if !(0.0..=1.0).contains(&self.alias_rate) {
            return bad(format!("alias_rate {} is outside [0, 1]", self.alias_rate));
        }
        if self.alias_rate > 0.0 && self.n_places < 2 {
            return bad("aliasing needs at least 2 places".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if !(self.place_spacing > 0.0 && self.place_spacing.is_finite()) {
            return bad(format!("place_spacing must be > 0, got {}", self.place_spacing));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.alias_angle) {
            return bad(format!("alias_angle {} is outside [0, pi/2]", self.alias_angle));
        }
        if !(0.0..1.0).contains(&self.difficulty_spread) {
            return bad(format!(
                "difficulty_spread {} is outside [0, 1)",
                self.difficulty_spread
            ));
        }
        if !(self.viewpoint_scale >= 0.0 && self.viewpoint_scale.is_finite()) {
            return bad(format!(
                "viewpoint_scale must be >= 0, got {}",
                self.viewpoint_scale
            ));
        }
        Ok(())
    }

    /// Number of (place, decoy) pairs.
    pub fn alias_pairs(&self) -> usize {
        let pairs = (self.alias_rate * self.n_places as f64 / 2.0).round() as usize;
        pairs.min(self.n_places / 2)
    }

    pub fn n_refs(&self) -> usize {
        self.n_places * self.refs_per_place
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthInstance {
    pub refs: DescriptorSet,
    pub ref_poses: PoseTable,
    pub queries: DescriptorSet,
    pub query_gt: PoseTable,
    /// Place each query was drawn from, in query order.
    pub truth: Vec<usize>,
    /// Whether each query's place has a decoy.
    pub aliased: Vec<bool>,
}

impl SynthInstance {
    pub fn place_of_ref(&self, ref_id: u64, refs_per_place: usize) -> usize {
        ref_id as usize / refs_per_place
    }
}

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn capture(proto: &[f64], view: &[f64], shift: f64, sigma: f64, rng: &mut PortableRng) -> Vec<f32> {
    let mut v: Vec<f64> = proto
        .iter()
        .zip(view)
        .map(|(p, d)| p + shift * d + sigma * rng.normal())
        .collect();
    unit(&mut v);
    v.into_iter().map(|x| x as f32).collect()
}

/// Generates an instance; a pure function of `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<SynthInstance> {
    cfg.validate()?;
    let mut rng = PortableRng::new(cfg.seed);
    let dim = cfg.dim;

    let mut prototypes: Vec<Vec<f64>> = (0..cfg.n_places)
        .map(|_| {
            let mut p: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            unit(&mut p);
            p
        })
        .collect();

    let mut views: Vec<Vec<f64>> = (0..cfg.n_places)
        .map(|_| {
            let mut d: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            unit(&mut d);
            d
        })
        .collect();

    // Decoy of place j is place j + n/2, rotated off j's prototype.
    let half = cfg.n_places / 2;
    let mut has_decoy = vec![false; cfg.n_places];
    let (sin_a, cos_a) = rng::sin_cos(cfg.alias_angle);
    for j in 0..cfg.alias_pairs() {
        let base = prototypes[j].clone();
        let mut dir: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let along: f64 = dir.iter().zip(&base).map(|(d, b)| d * b).sum();
        dir.iter_mut().zip(&base).for_each(|(d, b)| *d -= along * b);
        unit(&mut dir);
        let mut twin: Vec<f64> = base
            .iter()
            .zip(&dir)
            .map(|(b, d)| cos_a * b + sin_a * d)
            .collect();
        unit(&mut twin);
        prototypes[j + half] = twin;
        views[j + half] = views[j].clone();
        has_decoy[j] = true;
        has_decoy[j + half] = true;
    }

    let spacing = cfg.place_spacing;
    let center = |p: usize| p as f64 * spacing;

    let mut ref_ids = Vec::with_capacity(cfg.n_refs());
    let mut ref_data = Vec::with_capacity(cfg.n_refs() * dim);
    let mut ref_poses = PoseTable::new(PoseMode::Planar);
    for (p, proto) in prototypes.iter().enumerate() {
        for r in 0..cfg.refs_per_place {
            let id = (p * cfg.refs_per_place + r) as u64;
            let u = rng.uniform_in(-1.0, 1.0);
            let x = center(p) + 0.1 * u * spacing;
            ref_poses.insert(id, Pose::Planar { x, y: 0.0 })?;
            let shift = cfg.viewpoint_scale * u;
            ref_data.extend(capture(proto, &views[p], shift, cfg.noise_sigma, &mut rng));
            ref_ids.push(id);
        }
    }

    let first_query_id = cfg.n_refs() as u64;
    let mut query_ids = Vec::with_capacity(cfg.n_queries);
    let mut query_data = Vec::with_capacity(cfg.n_queries * dim);
    let mut query_gt = PoseTable::new(PoseMode::Planar);
    let mut truth = Vec::with_capacity(cfg.n_queries);
    let mut aliased = Vec::with_capacity(cfg.n_queries);
    for i in 0..cfg.n_queries {
        let id = first_query_id + i as u64;
        let p = rng.below(cfg.n_places as u64) as usize;
        let u = rng.uniform_in(-1.0, 1.0);
        let x = center(p) + 0.1 * u * spacing;
        let y = rng.uniform_in(-0.05, 0.05) * spacing;
        let difficulty = 1.0 + rng.uniform_in(-cfg.difficulty_spread, cfg.difficulty_spread);
        query_gt.insert(id, Pose::Planar { x, y })?;
        let (shift, sigma) = (cfg.viewpoint_scale * u, cfg.noise_sigma * difficulty);
        query_data.extend(capture(&prototypes[p], &views[p], shift, sigma, &mut rng));
        query_ids.push(id);
        truth.push(p);
        aliased.push(has_decoy[p]);
    }

    Ok(SynthInstance {
        refs: DescriptorSet::new(ref_ids, dim, ref_data)?,
        ref_poses,
        queries: DescriptorSet::new(query_ids, dim, query_data)?,
        query_gt,
        truth,
        aliased,
    })
}

/// Writes the instance as `refs.vprd`, `queries.vprd`, `refs.csv`, `gt.csv`
/// and `truth.csv` (`query_id,place,aliased`) under `dir`.
pub fn write_instance(inst: &SynthInstance, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_descriptors(&inst.refs, dir.join(REFS_FILE))?;
    io::write_descriptors(&inst.queries, dir.join(QUERIES_FILE))?;
    io::write_poses(&inst.ref_poses, dir.join(REF_POSES_FILE))?;
    io::write_poses(&inst.query_gt, dir.join(QUERY_GT_FILE))?;
    io::write_atomic(&dir.join(TRUTH_FILE), |w| {
        use std::io::Write;
        writeln!(w, "query_id,place,aliased")?;
        for ((id, place), al) in inst.queries.ids().iter().zip(&inst.truth).zip(&inst.aliased) {
            writeln!(w, "{id},{place},{}", u8::from(*al))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            n_places: 20,
            refs_per_place: 2,
            n_queries: 30,
            dim: 16,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(a.queries, c.queries);
    }

    #[test]
    fn ids_disjoint_and_posed() {
        let inst = generate(&small()).unwrap();
        assert_eq!(inst.refs.len(), 40);
        for &id in inst.refs.ids() {
            assert!(inst.ref_poses.get(id).is_some());
        }
        for &q in inst.queries.ids() {
            assert!(!inst.refs.ids().contains(&q));
            assert!(inst.query_gt.get(q).is_some());
        }
    }

    #[test]
    fn decoys_are_far_and_close_in_descriptor_space() {
        let cfg = SynthConfig {
            alias_rate: 1.0,
            noise_sigma: 0.0,
            refs_per_place: 1,
            ..small()
        };
        assert_eq!(cfg.alias_pairs(), 10);
        let inst = generate(&cfg).unwrap();
        let a = inst.refs.row(0);
        let b = inst.refs.row(10);
        let cos: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
        assert!((cos - cfg.alias_angle.cos()).abs() < 1e-6);
        let (xa, _) = inst.ref_poses.planar(0).unwrap();
        let (xb, _) = inst.ref_poses.planar(10).unwrap();
        assert!((xb - xa).abs() >= cfg.place_spacing);
    }

    #[test]
    fn invalid_configs() {
        assert!(generate(&SynthConfig { dim: 1, ..small() }).is_err());
        assert!(generate(&SynthConfig { alias_rate: 1.5, ..small() }).is_err());
        assert!(generate(&SynthConfig { n_places: 1, alias_rate: 0.5, ..small() }).is_err());
        assert!(generate(&SynthConfig { noise_sigma: -1.0, ..small() }).is_err());
        let partial: SynthConfig = serde_json::from_str(r#"{"n_places":7}"#).unwrap();
        assert_eq!(partial, SynthConfig { n_places: 7, ..SynthConfig::default() });
        assert!(serde_json::from_str::<SynthConfig>(r#"{"n_place":7}"#).is_err());
    }
}
