//! Labeled synthetic dual-node traces.
//!
//! Every scenario event is drawn in the leveled, gravity-free vehicle frame
//! for both nodes, then gravity is added, the result is rotated into each
//! node's (optionally misaligned) sensor frame, Gaussian noise is added and
//! the sample is clipped to the full-scale range.
//!
//! Waveform families:
//!
//! * collision: damped 15 Hz lateral oscillation (τ = 30 ms) on `a_y`,
//!   positive first lobe for right-side impacts, ×0.4 on the far node;
//! * bumpy driving: vertical bursts at 8-12 Hz, short decaying bumps and
//!   sustained rough patches, with weaker `a_x`/`a_y` coupling;
//! * truck loading: short decaying vertical bursts peaking 6-15 m/s²;
//! * braking / sudden start / pull-away: one-sided `a_x` plateau with
//!   raised-cosine edges;
//! * load pickup / fork contact: weak multi-axis bursts below the trigger;
//! * idle: noise only.
//!
//! Output is fully determined by the specs, their seeds and the options.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::calibration::euler_321;
use crate::config::AnalysisConfig;
use crate::error::SynthError;
use crate::model::{Frame, ImuSample, MountPosition, SensorTrace, SeverityLabel, Zone};
use crate::power::PeakTiming;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollisionSeverity {
    VerySoft,
    Soft,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BumpSpeed {
    Normal,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BrakingIntensity {
    Soft,
    Hard,
    VeryHard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScenarioKind {
    Collision { zone: Zone, severity: CollisionSeverity },
    BumpyDriving { speed: BumpSpeed },
    TruckLoading,
    Braking { intensity: BrakingIntensity },
    SuddenStart,
    /// Gentle forward acceleration below the trigger level.
    PullAway,
    LoadPickup,
    ForkContact,
    Idle,
}

impl ScenarioKind {
    pub fn name(&self) -> String {
        match self {
            ScenarioKind::Collision { zone, severity } => {
                let s = match severity {
                    CollisionSeverity::VerySoft => "very soft",
                    CollisionSeverity::Soft => "soft",
                    CollisionSeverity::Hard => "hard",
                };
                format!("{s} {zone} collision")
            }
            ScenarioKind::BumpyDriving { speed: BumpSpeed::Normal } => "bumpy driving".into(),
            ScenarioKind::BumpyDriving { speed: BumpSpeed::Fast } => "fast bumps".into(),
            ScenarioKind::TruckLoading => "truck loading".into(),
            ScenarioKind::Braking { intensity } => match intensity {
                BrakingIntensity::Soft => "soft braking".into(),
                BrakingIntensity::Hard => "harsh braking".into(),
                BrakingIntensity::VeryHard => "very harsh braking".into(),
            },
            ScenarioKind::SuddenStart => "sudden start".into(),
            ScenarioKind::PullAway => "pull-away".into(),
            ScenarioKind::LoadPickup => "load pickup".into(),
            ScenarioKind::ForkContact => "fork contact".into(),
            ScenarioKind::Idle => "idle".into(),
        }
    }

    /// What the detector should report for this event.
    pub fn expected(&self) -> Expected {
        match *self {
            ScenarioKind::Collision { severity: CollisionSeverity::VerySoft, .. } => Expected::Nothing,
            ScenarioKind::Collision { zone, .. } => Expected::Collision(zone),
            ScenarioKind::BumpyDriving { speed: BumpSpeed::Normal } => Expected::Vibration(SeverityLabel::BT),
            ScenarioKind::BumpyDriving { speed: BumpSpeed::Fast } => Expected::Vibration(SeverityLabel::AT),
            ScenarioKind::TruckLoading => Expected::Vibration(SeverityLabel::BT),
            ScenarioKind::Braking { intensity: BrakingIntensity::Soft } => Expected::Nothing,
            ScenarioKind::Braking { .. } => Expected::HarshBraking,
            ScenarioKind::SuddenStart
            | ScenarioKind::PullAway
            | ScenarioKind::LoadPickup
            | ScenarioKind::ForkContact
            | ScenarioKind::Idle => Expected::Nothing,
        }
    }

    fn mirrored_side(self) -> Self {
        match self {
            ScenarioKind::Collision { zone, severity } => ScenarioKind::Collision {
                zone: zone.mirrored_side(),
                severity,
            },
            k => k,
        }
    }

    fn mirrored_end(self) -> Self {
        match self {
            ScenarioKind::Collision { zone, severity } => ScenarioKind::Collision {
                zone: zone.mirrored_end(),
                severity,
            },
            k => k,
        }
    }
}

/// Expected detector outcome for one injected event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expected {
    Collision(Zone),
    HarshBraking,
    Vibration(SeverityLabel),
    Nothing,
}

/// One injected event. `duration` is the active span starting at `t_onset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub t_onset: f64,
    pub duration: f64,
    pub rng_seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, t_onset: f64, duration: f64, rng_seed: u64) -> Self {
        Self {
            kind,
            t_onset,
            duration,
            rng_seed,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_onset + self.duration
    }
}

/// Sensor mounting misalignment in radians (3-2-1 Euler angles).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Misalignment {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Misalignment {
    pub fn degrees(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self {
            roll: roll.to_radians(),
            pitch: pitch.to_radians(),
            yaw: yaw.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    /// Per-axis Gaussian noise, m/s².
    pub noise_sigma: f64,
    pub noise_seed: u64,
    pub front_misalignment: Misalignment,
    pub back_misalignment: Misalignment,
    /// Quiet time after the last event.
    pub tail_s: f64,
    /// Minimum trace length.
    pub min_length_s: f64,
    pub front_node_id: String,
    pub back_node_id: String,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            noise_sigma: 0.05,
            noise_seed: 0,
            front_misalignment: Misalignment::default(),
            back_misalignment: Misalignment::default(),
            tail_s: 3.0,
            min_length_s: 0.0,
            front_node_id: "front".into(),
            back_node_id: "back".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub kind: ScenarioKind,
    pub onset: f64,
    pub end: f64,
    pub expected: Expected,
    pub onset_to_peak: f64,
}

impl TruthEvent {
    pub fn timing(&self) -> PeakTiming {
        PeakTiming {
            onset: self.onset,
            onset_to_peak: self.onset_to_peak,
        }
    }
}

/// One entry per injected spec, in spec order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub events: Vec<TruthEvent>,
}

impl GroundTruth {
    /// Truth after negating the lateral channel: sides swap.
    pub fn mirrored_side(&self) -> Self {
        self.map_kinds(ScenarioKind::mirrored_side)
    }

    /// Truth after exchanging the front and back traces.
    pub fn mirrored_end(&self) -> Self {
        self.map_kinds(ScenarioKind::mirrored_end)
    }

    fn map_kinds(&self, f: impl Fn(ScenarioKind) -> ScenarioKind) -> Self {
        Self {
            events: self
                .events
                .iter()
                .map(|e| {
                    let kind = f(e.kind);
                    TruthEvent {
                        kind,
                        expected: kind.expected(),
                        ..e.clone()
                    }
                })
                .collect(),
        }
    }
}

/// Leveled, gravity-free acceleration for both nodes on the output grid.
struct Canvas {
    rate: f64,
    front: Vec<[f64; 3]>,
    back: Vec<[f64; 3]>,
}

impl Canvas {
    fn new(n: usize, rate: f64) -> Self {
        Self {
            rate,
            front: vec![[0.0; 3]; n],
            back: vec![[0.0; 3]; n],
        }
    }

    fn node(&mut self, position: MountPosition) -> &mut Vec<[f64; 3]> {
        match position {
            MountPosition::Front => &mut self.front,
            MountPosition::Back => &mut self.back,
        }
    }

    /// Adds `gain * f(t - onset)` for grid times in `[onset, onset + span]`.
    fn add(&mut self, position: MountPosition, onset: f64, span: f64, gain: [f64; 3], f: impl Fn(f64) -> f64) {
        let rate = self.rate;
        let node = self.node(position);
        let first = (onset * rate).ceil().max(0.0) as usize;
        let last = (((onset + span) * rate).floor() as usize).min(node.len().saturating_sub(1));
        for (k, v) in node.iter_mut().enumerate().take(last + 1).skip(first) {
            let w = f(k as f64 / rate - onset);
            for (axis, g) in v.iter_mut().zip(gain) {
                *axis += g * w;
            }
        }
    }

    fn add_both(&mut self, onset: f64, span: f64, front: [f64; 3], back: [f64; 3], f: impl Fn(f64) -> f64 + Copy) {
        self.add(MountPosition::Front, onset, span, front, f);
        self.add(MountPosition::Back, onset, span, back, f);
    }
}

fn damped_sine(freq: f64, tau: f64, phase: f64) -> impl Fn(f64) -> f64 + Copy {
    move |t| (-t / tau).exp() * (TAU * freq * t + phase).sin()
}

/// Plateau of height 1 over `[0, length]` with raised-cosine edges of `ramp` s.
fn plateau(length: f64, ramp: f64) -> impl Fn(f64) -> f64 + Copy {
    move |t| {
        if t < 0.0 || t > length {
            0.0
        } else if t < ramp {
            0.5 * (1.0 - (PI * t / ramp).cos())
        } else if t > length - ramp {
            0.5 * (1.0 - (PI * (length - t) / ramp).cos())
        } else {
            1.0
        }
    }
}

const COLLISION_FREQ_HZ: f64 = 15.0;
const COLLISION_TAU_S: f64 = 0.03;
const FAR_NODE_GAIN: f64 = 0.4;

fn collision_peak_time() -> f64 {
    let w = TAU * COLLISION_FREQ_HZ;
    (w * COLLISION_TAU_S).atan() / w
}

/// Draws one spec onto the canvas and returns its onset-to-peak time.
fn draw(canvas: &mut Canvas, spec: &ScenarioSpec) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let onset = spec.t_onset;
    match spec.kind {
        ScenarioKind::Collision { zone, severity } => {
            // Mean-magnitude peak is about 0.46 of the near-node amplitude.
            let amplitude = match severity {
                CollisionSeverity::VerySoft => rng.gen_range(5.5..7.0),
                CollisionSeverity::Soft => rng.gen_range(14.0..18.0),
                CollisionSeverity::Hard => rng.gen_range(60.0..110.0),
            };
            let side = if zone.is_right() { 1.0 } else { -1.0 };
            let gain = [
                amplitude * rng.gen_range(-0.25..0.25),
                side * amplitude,
                amplitude * rng.gen_range(0.05..0.15),
            ];
            let far = gain.map(|g| g * FAR_NODE_GAIN);
            let span = spec.duration.clamp(0.03, 0.15);
            let wave = damped_sine(COLLISION_FREQ_HZ, COLLISION_TAU_S, 0.0);
            canvas.add(zone.position(), onset, span, gain, wave);
            canvas.add(zone.position().other(), onset, span, far, wave);
            collision_peak_time()
        }
        ScenarioKind::BumpyDriving { speed } => {
            let mut t = onset;
            while t < spec.t_end() {
                let amplitude = match speed {
                    BumpSpeed::Normal => rng.gen_range(8.0..16.0),
                    BumpSpeed::Fast => rng.gen_range(30.0..45.0),
                };
                let freq = rng.gen_range(8.0..12.0);
                let coupling = [rng.gen_range(0.25..0.4), rng.gen_range(0.05..0.15), 1.0];
                let phase = rng.gen_range(0.0..TAU);
                let rough = rng.gen_bool(0.3);
                let length: f64 = if rough {
                    rng.gen_range(1.5..2.5)
                } else {
                    rng.gen_range(0.3..0.5)
                };
                let length = length.min(spec.t_end() - t);
                let front = coupling.map(|c| c * amplitude);
                let back = front.map(|g| g * 0.85);
                if rough {
                    let env = plateau(length, 0.2);
                    canvas.add_both(t, length, front, back, move |s| {
                        env(s) * (TAU * freq * s + phase).sin()
                    });
                } else {
                    let wave = damped_sine(freq, 0.1, 0.0);
                    let env = plateau(length, 0.02);
                    canvas.add_both(t, length, front, back, move |s| env(s) * wave(s));
                }
                t += length + rng.gen_range(1.5..3.0);
            }
            peak_offset(canvas, spec)
        }
        ScenarioKind::TruckLoading => {
            let mut t = onset;
            while t < spec.t_end() {
                let amplitude = rng.gen_range(9.0..16.0);
                let freq = rng.gen_range(6.0..10.0);
                let front = [0.2 * amplitude, 0.1 * amplitude, amplitude];
                let back = front.map(|g| g * 0.7);
                let length = 0.35f64.min(spec.t_end() - t);
                let wave = damped_sine(freq, 0.06, 0.0);
                canvas.add_both(t, length, front, back, wave);
                t += rng.gen_range(2.0..4.0);
            }
            peak_offset(canvas, spec)
        }
        ScenarioKind::Braking { .. } | ScenarioKind::SuddenStart | ScenarioKind::PullAway => {
            let level = match spec.kind {
                ScenarioKind::Braking { intensity: BrakingIntensity::Soft } => -rng.gen_range(2.0..3.0),
                ScenarioKind::Braking { intensity: BrakingIntensity::Hard } => -rng.gen_range(6.5..7.5),
                ScenarioKind::Braking { intensity: BrakingIntensity::VeryHard } => -rng.gen_range(9.0..10.5),
                ScenarioKind::SuddenStart => rng.gen_range(6.5..7.5),
                _ => rng.gen_range(1.6..2.2),
            };
            // Nose dives under braking and squats under acceleration.
            let front = [level, 0.0, 0.08 * level];
            let back = [level, 0.0, -0.08 * level];
            canvas.add_both(onset, spec.duration, front, back, plateau(spec.duration, 0.3));
            peak_offset(canvas, spec)
        }
        ScenarioKind::LoadPickup | ScenarioKind::ForkContact => {
            let bursts = rng.gen_range(2..=4);
            let (front_gain, back_gain) = match spec.kind {
                ScenarioKind::ForkContact => (1.0, 0.4),
                _ => (1.0, 0.6),
            };
            for _ in 0..bursts {
                let at = onset + rng.gen_range(0.0..(spec.duration - 0.4).max(0.0));
                let amplitude = rng.gen_range(1.5..3.5);
                let dir = random_unit(&mut rng);
                let wave = damped_sine(rng.gen_range(4.0..8.0), 0.1, 0.0);
                let front = dir.map(|d| d * amplitude * front_gain);
                let back = dir.map(|d| d * amplitude * back_gain);
                canvas.add_both(at, 0.4, front, back, wave);
            }
            peak_offset(canvas, spec)
        }
        ScenarioKind::Idle => 0.0,
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let v = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let v = if v.norm() < 1e-6 { Vector3::z() } else { v.normalize() };
    [v.x, v.y, v.z]
}

/// Time from onset to the largest injected mean magnitude within the spec.
fn peak_offset(canvas: &Canvas, spec: &ScenarioSpec) -> f64 {
    let first = (spec.t_onset * canvas.rate).ceil().max(0.0) as usize;
    let last = ((spec.t_end() * canvas.rate).floor() as usize).min(canvas.front.len().saturating_sub(1));
    let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut best = (first, f64::MIN);
    for k in first..=last {
        let m = 0.5 * (norm(&canvas.front[k]) + norm(&canvas.back[k]));
        if m > best.1 {
            best = (k, m);
        }
    }
    best.0 as f64 / canvas.rate - spec.t_onset
}

/// Renders specs into tilted-frame front/back traces plus ground truth.
pub fn generate(
    specs: &[ScenarioSpec],
    opts: &SynthOptions,
    cfg: &AnalysisConfig,
) -> Result<(SensorTrace, SensorTrace, GroundTruth), SynthError> {
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by(|&a, &b| specs[a].t_onset.total_cmp(&specs[b].t_onset));
    for w in order.windows(2) {
        if specs[w[1]].t_onset < specs[w[0]].t_end() {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(SynthError::OverlappingSpecs(a, b));
        }
    }

    let end = specs
        .iter()
        .map(|s| s.t_end() + opts.tail_s)
        .fold(opts.min_length_s, f64::max);
    let rate = cfg.sample_rate;
    let n = (end * rate).ceil() as usize + 1;
    let mut canvas = Canvas::new(n, rate);
    let mut truth = GroundTruth::default();
    for spec in specs {
        let onset_to_peak = draw(&mut canvas, spec);
        truth.events.push(TruthEvent {
            kind: spec.kind,
            onset: spec.t_onset,
            end: spec.t_end(),
            expected: spec.kind.expected(),
            onset_to_peak,
        });
    }

    let noise = Normal::new(0.0, opts.noise_sigma.max(0.0)).expect("finite sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.noise_seed);
    let mut render = |leveled: &[[f64; 3]], m: &Misalignment, id: &str| {
        let rotation = euler_321(m.roll, m.pitch, m.yaw);
        let samples = leveled
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let tilted = rotation * Vector3::new(v[0], v[1], v[2] + cfg.gravity);
                let mut jitter = || if opts.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                ImuSample::clipped(
                    k as f64 / rate,
                    tilted.x + jitter(),
                    tilted.y + jitter(),
                    tilted.z + jitter(),
                )
            })
            .collect();
        SensorTrace::new(id, Frame::Tilted, rate, samples).expect("grid is increasing")
    };
    let front = render(&canvas.front, &opts.front_misalignment, &opts.front_node_id);
    let back = render(&canvas.back, &opts.back_misalignment, &opts.back_node_id);
    Ok((front, back, truth))
}

/// Negates `a_y` in every sample (left/right mirror of the vehicle).
pub fn mirror_lateral(trace: &SensorTrace) -> SensorTrace {
    trace.map_samples(|s| ImuSample { ay: -s.ay, ..*s })
}
