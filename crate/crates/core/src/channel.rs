//! Channel synthesis: the radar scene, clustered communication channels and
//! the two radar/radio interference channels.
//!
//! All channels are small-scale only. Large-scale gains and transmit powers
//! enter exclusively through the per-link SNR terms.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::random::{complex_normal, laplacian};
use crate::C64;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One point reflector as seen by the colocated arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTarget {
    /// Small-scale complex reflection gain.
    pub gain: C64,
    /// Round-trip delay in seconds.
    pub delay: f64,
    /// Departure angle from the transmit array.
    pub aod: f64,
    /// Arrival angle at the receive array.
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTargetSet {
    pub targets: Vec<PointTarget>,
    pub carrier_freq: f64,
}

impl PointTargetSet {
    pub fn new(targets: Vec<PointTarget>, carrier_freq: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "carrier frequency must be positive, got {carrier_freq}"
            )));
        }
        for (p, t) in targets.iter().enumerate() {
            if !(t.delay.is_finite() && t.delay >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "target {p}: delay must be non-negative, got {}",
                    t.delay
                )));
            }
            for angle in [t.aod, t.aoa] {
                if !(angle.is_finite() && angle.abs() <= FRAC_PI_2) {
                    return Err(Error::InvalidArgument(format!(
                        "target {p}: angle {angle} outside [-pi/2, pi/2]"
                    )));
                }
            }
            if !(t.gain.re.is_finite() && t.gain.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "target {p}: gain must be finite"
                )));
            }
        }
        Ok(Self {
            targets,
            carrier_freq,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Carrier phase rotation `exp(-j*2*pi*fc*tau)` of target `t`.
    fn carrier_phase(&self, t: &PointTarget) -> C64 {
        // fc*tau is tens of thousands of cycles; keep only the fractional part
        let cycles = (self.carrier_freq * t.delay).fract();
        C64::from_polar(1.0, -2.0 * PI * cycles)
    }
}

/// Draws a monostatic scene: angles uniform on `[-pi/2, pi/2]`, ranges uniform
/// on `(0, max_range]`, complex standard normal gains, and equal arrival and
/// departure angles per target.
pub fn sample_radar_scene<R: Rng + ?Sized>(
    rng: &mut R,
    num_targets: usize,
    max_range: f64,
    carrier_freq: f64,
) -> Result<PointTargetSet> {
    if !(max_range.is_finite() && max_range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "max range must be positive, got {max_range}"
        )));
    }
    let targets = (0..num_targets)
        .map(|_| {
            let angle = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let range = max_range * (1.0 - rng.random::<f64>());
            let gain = complex_normal(rng);
            PointTarget {
                gain,
                delay: round_trip_delay(range),
                aod: angle,
                aoa: angle,
            }
        })
        .collect();
    PointTargetSet::new(targets, carrier_freq)
}

pub fn round_trip_delay(range: f64) -> f64 {
    2.0 * range / SPEED_OF_LIGHT
}

/// Which link a channel matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// Radar transmitter to radar receiver through the scene.
    Radar,
    /// Radio to radio.
    Communication,
    /// Radio transmitter to radar receiver.
    InterferenceTx,
    /// Radar transmitter to radio receiver.
    InterferenceRx,
}

/// An `Nr x Nt` channel together with the link it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<C64>,
    pub kind: ChannelKind,
}

impl ChannelMatrix {
    pub fn new(entries: DMatrix<C64>, kind: ChannelKind) -> Result<Self> {
        if entries.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::InvalidArgument(
                "channel entries must be finite".into(),
            ));
        }
        Ok(Self { entries, kind })
    }

    pub fn zeros(rows: usize, cols: usize, kind: ChannelKind) -> Self {
        Self {
            entries: DMatrix::zeros(rows, cols),
            kind,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }
}

/// `sum_p gain_p * exp(-j*2*pi*fc*tau_p) * a_rx(aoa_p) * a_tx(aod_p)^H`.
pub fn synth_point_target_channel(
    scene: &PointTargetSet,
    rx: &ArrayGeometry,
    tx: &ArrayGeometry,
    kind: ChannelKind,
) -> Result<ChannelMatrix> {
    let mut h = DMatrix::<C64>::zeros(rx.num_elements(), tx.num_elements());
    for t in &scene.targets {
        let ar = rx.steering_vector(t.aoa)?;
        let at = tx.steering_vector(t.aod)?;
        let coeff = t.gain * scene.carrier_phase(t);
        h.gerc(coeff, &ar, &at, C64::new(1.0, 0.0));
    }
    ChannelMatrix::new(h, kind)
}

/// Radar channel `H_rr` of the scene between the radar's own arrays.
pub fn synth_radar_channel(
    scene: &PointTargetSet,
    radar_rx: &ArrayGeometry,
    radar_tx: &ArrayGeometry,
) -> Result<ChannelMatrix> {
    synth_point_target_channel(scene, radar_rx, radar_tx, ChannelKind::Radar)
}

/// Interference channels derived from the radar's scene.
///
/// Returns `(H_ir, H_ri)`: radio transmitter to radar receiver
/// (`radar_rx.N x radio_tx.N`), and radar transmitter to radio receiver
/// (`radio_rx.N x radar_tx.N`).
pub fn synth_interference_channels(
    scene: &PointTargetSet,
    radio_tx: &ArrayGeometry,
    radio_rx: &ArrayGeometry,
    radar_tx: &ArrayGeometry,
    radar_rx: &ArrayGeometry,
) -> Result<(ChannelMatrix, ChannelMatrix)> {
    let h_ir = synth_point_target_channel(scene, radar_rx, radio_tx, ChannelKind::InterferenceTx)?;
    let h_ri = synth_point_target_channel(scene, radio_rx, radar_tx, ChannelKind::InterferenceRx)?;
    Ok((h_ir, h_ri))
}

/// Randomization ranges for the clustered channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Inclusive range for the number of clusters.
    pub clusters: (usize, usize),
    /// Inclusive range for the number of rays per cluster.
    pub rays: (usize, usize),
    /// Laplacian scale (radians) of ray angles about their cluster center.
    pub angle_spread: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            clusters: (1, 6),
            rays: (1, 10),
            angle_spread: 5f64.to_radians(),
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        let ok_range = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        if !ok_range(self.clusters) {
            return Err(Error::InvalidArgument(format!(
                "cluster range {:?} must satisfy 1 <= min <= max",
                self.clusters
            )));
        }
        if !ok_range(self.rays) {
            return Err(Error::InvalidArgument(format!(
                "ray range {:?} must satisfy 1 <= min <= max",
                self.rays
            )));
        }
        if !(self.angle_spread.is_finite() && self.angle_spread >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "angle spread must be non-negative, got {}",
                self.angle_spread
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub gain: C64,
    pub aoa: f64,
    pub aod: f64,
}

/// A realized set of clusters; `rays` holds `num_clusters * rays_per_cluster`
/// entries, cluster-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    pub rays: Vec<Ray>,
}

impl ClusterSpec {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, params: &ClusterParams) -> Result<Self> {
        params.validate()?;
        let num_clusters = rng.random_range(params.clusters.0..=params.clusters.1);
        let rays_per_cluster = rng.random_range(params.rays.0..=params.rays.1);
        let mut rays = Vec::with_capacity(num_clusters * rays_per_cluster);
        for _ in 0..num_clusters {
            let aoa_center = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            let aod_center = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            for _ in 0..rays_per_cluster {
                let aoa = aoa_center + laplacian(rng, params.angle_spread);
                let aod = aod_center + laplacian(rng, params.angle_spread);
                let gain = complex_normal(rng);
                rays.push(Ray { gain, aoa, aod });
            }
        }
        Ok(Self {
            num_clusters,
            rays_per_cluster,
            rays,
        })
    }

    /// Builds `sqrt(Nt*Nr/(Nrays*Nclust)) * sum gain * a_r(aoa) a_t(aod)^H`
    /// with unit-norm array responses, so that `E ||H||_F^2 = Nt * Nr`.
    pub fn channel(&self, rx: &ArrayGeometry, tx: &ArrayGeometry) -> Result<ChannelMatrix> {
        if self.num_clusters == 0
            || self.rays_per_cluster == 0
            || self.rays.len() != self.num_clusters * self.rays_per_cluster
        {
            return Err(Error::InvalidArgument(format!(
                "cluster spec has {} rays for {} clusters of {} rays",
                self.rays.len(),
                self.num_clusters,
                self.rays_per_cluster
            )));
        }
        let (nr, nt) = (rx.num_elements(), tx.num_elements());
        // sqrt(Nt*Nr / rays) times 1/sqrt(Nr) and 1/sqrt(Nt) for the unit-norm responses
        let scale = (1.0 / self.rays.len() as f64).sqrt();
        let mut h = DMatrix::<C64>::zeros(nr, nt);
        for ray in &self.rays {
            let ar = rx.steering_vector(ray.aoa)?;
            let at = tx.steering_vector(ray.aod)?;
            h.gerc(ray.gain * scale, &ar, &at, C64::new(1.0, 0.0));
        }
        ChannelMatrix::new(h, ChannelKind::Communication)
    }
}

/// Draws a clustered (ray/cluster) communication channel normalized so that
/// `E ||H||_F^2 = Nt * Nr`.
pub fn synth_clustered_channel<R: Rng + ?Sized>(
    rng: &mut R,
    rx: &ArrayGeometry,
    tx: &ArrayGeometry,
    params: &ClusterParams,
) -> Result<ChannelMatrix> {
    ClusterSpec::sample(rng, params)?.channel(rx, tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    fn ula(n: usize) -> ArrayGeometry {
        ArrayGeometry::ula(n).unwrap()
    }

    fn target(gain: f64, angle: f64) -> PointTarget {
        PointTarget {
            gain: C64::new(gain, 0.0),
            delay: 0.0,
            aod: angle,
            aoa: angle,
        }
    }

    fn singular_values(h: &DMatrix<C64>) -> Vec<f64> {
        let mut s: Vec<f64> = h.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    #[test]
    fn empty_scene() {
        let mut rng = rng_from_seed(1);
        let scene = sample_radar_scene(&mut rng, 0, 100.0, 60e9).unwrap();
        assert!(scene.is_empty());
        let h = synth_radar_channel(&scene, &ula(4), &ula(3)).unwrap();
        assert_eq!(h.shape(), (4, 3));
        assert!(h.entries.iter().all(|x| x.norm() == 0.0));
        let (h_ir, h_ri) =
            synth_interference_channels(&scene, &ula(32), &ula(32), &ula(3), &ula(4)).unwrap();
        assert_eq!(h_ir.shape(), (4, 32));
        assert_eq!(h_ri.shape(), (32, 3));
        assert!(h_ir.entries.iter().chain(h_ri.entries.iter()).all(|x| x.norm() == 0.0));
    }

    #[test]
    fn round_trip_delay_at_100m() {
        let tau = round_trip_delay(100.0);
        assert!((tau - 6.671e-7).abs() < 1e-10, "{tau}");
    }

    #[test]
    fn scene_respects_ranges_and_monostatic_angles() {
        let mut rng = rng_from_seed(3);
        let scene = sample_radar_scene(&mut rng, 600, 100.0, 60e9).unwrap();
        assert_eq!(scene.len(), 600);
        let max_delay = round_trip_delay(100.0);
        for t in &scene.targets {
            assert_eq!(t.aoa, t.aod);
            assert!(t.aoa.abs() <= FRAC_PI_2);
            assert!(t.delay > 0.0 && t.delay <= max_delay * (1.0 + 1e-12));
        }
        assert!(sample_radar_scene(&mut rng, 5, 0.0, 60e9).is_err());
    }

    #[test]
    fn scene_angles_pass_ks_uniformity() {
        // one-sample KS against U[-pi/2, pi/2]; 1% critical value ~ 1.628/sqrt(n)
        let n = 600;
        let critical = 1.628 / (n as f64).sqrt();
        for seed in 0..10 {
            let mut rng = rng_from_seed(seed);
            let scene = sample_radar_scene(&mut rng, n, 100.0, 60e9).unwrap();
            let mut u: Vec<f64> = scene
                .targets
                .iter()
                .map(|t| (t.aoa + FRAC_PI_2) / PI)
                .collect();
            u.sort_by(f64::total_cmp);
            let d = u
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let hi = (k + 1) as f64 / n as f64 - x;
                    let lo = x - k as f64 / n as f64;
                    hi.max(lo)
                })
                .fold(0.0, f64::max);
            assert!(d < critical, "seed {seed}: KS statistic {d} >= {critical}");
        }
    }

    #[test]
    fn broadside_target_gives_all_ones() {
        let scene = PointTargetSet::new(vec![target(1.0, 0.0)], 60e9).unwrap();
        let h = synth_radar_channel(&scene, &ula(4), &ula(3)).unwrap();
        assert_eq!(h.shape(), (4, 3));
        for x in h.entries.iter() {
            assert!((x - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let (h_ir, h_ri) =
            synth_interference_channels(&scene, &ula(5), &ula(6), &ula(3), &ula(4)).unwrap();
        assert_eq!(h_ir.shape(), (4, 5));
        assert_eq!(h_ri.shape(), (6, 3));
        assert_eq!(h_ir.kind, ChannelKind::InterferenceTx);
        assert_eq!(h_ri.kind, ChannelKind::InterferenceRx);
        for x in h_ir.entries.iter().chain(h_ri.entries.iter()) {
            assert!((x - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn opposite_gains_cancel() {
        let scene =
            PointTargetSet::new(vec![target(1.0, 0.4), target(-1.0, 0.4)], 60e9).unwrap();
        let h = synth_radar_channel(&scene, &ula(4), &ula(4)).unwrap();
        assert!(h.entries.iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn point_target_rank_is_bounded_by_target_count() {
        let mut rng = rng_from_seed(5);
        for num_targets in 1..=3 {
            for _ in 0..20 {
                let scene = sample_radar_scene(&mut rng, num_targets, 100.0, 60e9).unwrap();
                let h = synth_radar_channel(&scene, &ula(4), &ula(4)).unwrap();
                let s = singular_values(&h.entries);
                for &x in &s[num_targets..] {
                    assert!(x < 1e-10 * s[0], "N_p={num_targets}: {s:?}");
                }
            }
        }
    }

    #[test]
    fn two_targets_have_numerical_rank_two() {
        let mut rng = rng_from_seed(9);
        let scene = sample_radar_scene(&mut rng, 2, 100.0, 60e9).unwrap();
        let h = synth_radar_channel(&scene, &ula(4), &ula(4)).unwrap();
        let s = singular_values(&h.entries);
        assert!(s[1] > 1e-6 * s[0]);
        assert!(s[2] < 1e-10 * s[0]);
    }

    #[test]
    fn zeroing_one_target_removes_the_same_term_everywhere() {
        let mut rng = rng_from_seed(13);
        let scene = sample_radar_scene(&mut rng, 5, 100.0, 60e9).unwrap();
        let mut pruned = scene.clone();
        pruned.targets[2].gain = C64::new(0.0, 0.0);
        let only = PointTargetSet::new(vec![scene.targets[2]], scene.carrier_freq).unwrap();

        let (radio, radar_tx, radar_rx) = (ula(8), ula(3), ula(4));
        let full = (
            synth_radar_channel(&scene, &radar_rx, &radar_tx).unwrap(),
            synth_interference_channels(&scene, &radio, &radio, &radar_tx, &radar_rx).unwrap(),
        );
        let less = (
            synth_radar_channel(&pruned, &radar_rx, &radar_tx).unwrap(),
            synth_interference_channels(&pruned, &radio, &radio, &radar_tx, &radar_rx).unwrap(),
        );
        let term = (
            synth_radar_channel(&only, &radar_rx, &radar_tx).unwrap(),
            synth_interference_channels(&only, &radio, &radio, &radar_tx, &radar_rx).unwrap(),
        );
        let pairs = [
            (&full.0, &less.0, &term.0),
            (&full.1 .0, &less.1 .0, &term.1 .0),
            (&full.1 .1, &less.1 .1, &term.1 .1),
        ];
        for (f, l, t) in pairs {
            let diff = &f.entries - &l.entries - &t.entries;
            assert!(diff.map(|x| x.norm()).max() < 1e-12);
            let s = singular_values(&(&f.entries - &l.entries));
            assert!(s[1] < 1e-10 * s[0]);
        }
    }

    #[test]
    fn single_unit_ray_has_exact_norm() {
        let spec = ClusterSpec {
            num_clusters: 1,
            rays_per_cluster: 1,
            rays: vec![Ray {
                gain: C64::new(1.0, 0.0),
                aoa: 0.3,
                aod: -0.7,
            }],
        };
        let h = spec.channel(&ula(32), &ula(16)).unwrap();
        assert_eq!(h.shape(), (32, 16));
        assert!((h.entries.norm_squared() - 512.0).abs() < 1e-9);
    }

    #[test]
    fn single_ray_draw_is_rank_one() {
        let params = ClusterParams {
            clusters: (1, 1),
            rays: (1, 1),
            ..Default::default()
        };
        let mut rng = rng_from_seed(21);
        for _ in 0..10 {
            let h = synth_clustered_channel(&mut rng, &ula(32), &ula(32), &params).unwrap();
            let s = singular_values(&h.entries);
            assert!(s[1] < 1e-10 * s[0]);
        }
    }

    #[test]
    fn cluster_counts_stay_in_range() {
        let params = ClusterParams::default();
        let mut rng = rng_from_seed(2);
        let mut seen_clusters = [false; 7];
        let mut seen_rays = [false; 11];
        for _ in 0..2000 {
            let spec = ClusterSpec::sample(&mut rng, &params).unwrap();
            assert!((1..=6).contains(&spec.num_clusters));
            assert!((1..=10).contains(&spec.rays_per_cluster));
            assert_eq!(spec.rays.len(), spec.num_clusters * spec.rays_per_cluster);
            seen_clusters[spec.num_clusters] = true;
            seen_rays[spec.rays_per_cluster] = true;
        }
        assert!(seen_clusters[1..].iter().all(|&s| s));
        assert!(seen_rays[1..].iter().all(|&s| s));
    }

    #[test]
    fn bad_cluster_params_are_rejected() {
        let mut rng = rng_from_seed(0);
        for params in [
            ClusterParams { clusters: (0, 3), ..Default::default() },
            ClusterParams { rays: (4, 2), ..Default::default() },
            ClusterParams { angle_spread: -1.0, ..Default::default() },
        ] {
            assert!(synth_clustered_channel(&mut rng, &ula(4), &ula(4), &params).is_err());
        }
    }

    #[test]
    fn same_seed_same_channels() {
        let draw = |seed| {
            let mut rng = rng_from_seed(seed);
            let scene = sample_radar_scene(&mut rng, 50, 100.0, 60e9).unwrap();
            let h = synth_clustered_channel(&mut rng, &ula(8), &ula(8), &ClusterParams::default())
                .unwrap();
            (scene, h)
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42).1, draw(43).1);
    }
}
