//! Scenario suite: synthetic counterparts of the field validation runs,
//! scored against ground truth, plus parameter sensitivity sweeps.
//!
//! Every scenario opens with a 3 s idle lead-in (tilt calibration) and a
//! gentle pull-away (yaw check), then its events from t = 8 s on.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::config::AnalysisConfig;
use crate::error::SynthError;
use crate::model::{EventKind, EventReport, SensorTrace, SeverityLabel, Zone};
use crate::pipeline::{analyze_pair, NodeSummary};
use crate::report::Format;
use crate::synth::{
    generate, mirror_lateral, BrakingIntensity, BumpSpeed, CollisionSeverity, Expected, GroundTruth, Misalignment,
    ScenarioKind, ScenarioSpec, SynthOptions,
};

/// Detections within this distance of a truth window are attributed to it.
pub const MATCH_TOLERANCE_S: f64 = 0.5;

const LEAD_IN_S: f64 = 3.0;
const PULL_AWAY_S: f64 = 2.5;
const FIRST_EVENT_S: f64 = 8.0;
const EVENT_SPACING_S: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Length of the benign endurance scenario; 0 disables it.
    pub endurance_s: f64,
    pub front_misalignment: Misalignment,
    pub back_misalignment: Misalignment,
    /// Negate `a_y` of both traces before analysis.
    pub mirror_lateral: bool,
    /// Feed the back trace as front and vice versa.
    pub swap_nodes: bool,
    pub noise_sigma: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            endurance_s: 3600.0,
            front_misalignment: Misalignment::default(),
            back_misalignment: Misalignment::default(),
            mirror_lateral: false,
            swap_nodes: false,
            noise_sigma: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub specs: Vec<ScenarioSpec>,
}

fn seed_for(seed: u64, scenario: usize, event: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((scenario as u64) << 32)
        .wrapping_add(event as u64)
}

struct Builder {
    seed: u64,
    scenario: usize,
    specs: Vec<ScenarioSpec>,
    t: f64,
}

impl Builder {
    fn new(seed: u64, scenario: usize) -> Self {
        let mut b = Self {
            seed,
            scenario,
            specs: Vec::new(),
            t: LEAD_IN_S,
        };
        b.push(ScenarioKind::PullAway, PULL_AWAY_S, 0.0);
        b.t = FIRST_EVENT_S;
        b
    }

    fn push(&mut self, kind: ScenarioKind, duration: f64, gap: f64) -> &mut Self {
        let seed = seed_for(self.seed, self.scenario, self.specs.len());
        self.specs.push(ScenarioSpec::new(kind, self.t, duration, seed));
        self.t += duration + gap;
        self
    }

    fn event(&mut self, kind: ScenarioKind, duration: f64) -> &mut Self {
        self.push(kind, duration, EVENT_SPACING_S)
    }

    fn collisions(&mut self, zone: Zone, grades: &[CollisionSeverity]) -> &mut Self {
        for &severity in grades {
            self.event(ScenarioKind::Collision { zone, severity }, 0.12);
        }
        self
    }

    fn build(&mut self, name: &'static str) -> Scenario {
        Scenario {
            name,
            specs: std::mem::take(&mut self.specs),
        }
    }
}

/// Benign traffic mix of at least `length_s` seconds.
fn endurance(seed: u64, scenario: usize, length_s: f64) -> Scenario {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed_for(seed, scenario, usize::MAX));
    let mut b = Builder::new(seed, scenario);
    while b.t < length_s {
        let (kind, duration) = match rng.gen_range(0..6) {
            0 => (ScenarioKind::Idle, rng.gen_range(20.0..60.0)),
            1 => (ScenarioKind::TruckLoading, rng.gen_range(20.0..40.0)),
            2 => (
                ScenarioKind::Braking {
                    intensity: BrakingIntensity::Soft,
                },
                rng.gen_range(1.5..3.0),
            ),
            3 => (
                ScenarioKind::BumpyDriving {
                    speed: BumpSpeed::Normal,
                },
                rng.gen_range(10.0..30.0),
            ),
            4 => (ScenarioKind::LoadPickup, rng.gen_range(2.0..4.0)),
            _ => (ScenarioKind::ForkContact, rng.gen_range(2.0..4.0)),
        };
        b.event(kind, duration);
    }
    b.build("endurance")
}

/// The scenario list: field-test analogues, the remaining collision zones,
/// sudden start and (if `endurance_s > 0`) the benign endurance run.
pub fn scenarios(seed: u64, endurance_s: f64) -> Vec<Scenario> {
    use CollisionSeverity::{Hard, Soft, VerySoft};
    let mut out = Vec::new();
    let mut next = |f: &dyn Fn(&mut Builder) -> Scenario| {
        let mut b = Builder::new(seed, out.len());
        out.push(f(&mut b));
    };
    next(&|b| {
        b.event(ScenarioKind::BumpyDriving { speed: BumpSpeed::Normal }, 30.0)
            .build("driving_bumpy_road")
    });
    next(&|b| {
        b.event(ScenarioKind::BumpyDriving { speed: BumpSpeed::Fast }, 20.0)
            .build("driving_bumpy_road_fast")
    });
    next(&|b| b.event(ScenarioKind::TruckLoading, 40.0).build("loading_truck"));
    next(&|b| {
        let soft = ScenarioKind::Braking {
            intensity: BrakingIntensity::Soft,
        };
        b.event(soft, 2.5).event(soft, 2.0).event(soft, 3.0).build("normal_braking")
    });
    next(&|b| {
        let hard = ScenarioKind::Braking {
            intensity: BrakingIntensity::Hard,
        };
        b.event(hard, 2.0).event(hard, 2.5).build("hard_braking")
    });
    next(&|b| {
        let very_hard = ScenarioKind::Braking {
            intensity: BrakingIntensity::VeryHard,
        };
        b.event(very_hard, 1.8)
            .event(very_hard, 2.2)
            .event(very_hard, 2.0)
            .build("hard_braking_2")
    });
    next(&|b| {
        b.collisions(Zone::RightBack, &[VerySoft, Soft, Hard, Hard, Hard])
            .build("collision_rb")
    });
    next(&|b| {
        b.collisions(Zone::LeftBack, &[Hard, Hard, Hard, Soft, Hard])
            .build("collision_lb")
    });
    next(&|b| {
        let pickup = ScenarioKind::LoadPickup;
        b.event(pickup, 3.0).event(pickup, 3.0).event(pickup, 3.0).build("picking_up_load")
    });
    next(&|b| {
        let fork = ScenarioKind::ForkContact;
        b.event(fork, 3.0).event(fork, 3.0).event(fork, 3.0).build("forks_up_down")
    });
    next(&|b| b.collisions(Zone::RightFront, &[Hard, Hard, Soft]).build("collision_rf"));
    next(&|b| b.collisions(Zone::LeftFront, &[Hard, Hard, Soft]).build("collision_lf"));
    next(&|b| b.event(ScenarioKind::SuddenStart, 2.0).build("sudden_start"));
    if endurance_s > 0.0 {
        let index = out.len();
        out.push(endurance(seed, index, endurance_s));
    }
    out
}

/// Detector classes scored by the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    Collision,
    HarshBraking,
    Vibration,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Collision, Class::HarshBraking, Class::Vibration];

    fn of_event(kind: &EventKind) -> Class {
        match kind {
            EventKind::Collision { .. } => Class::Collision,
            EventKind::HarshBraking => Class::HarshBraking,
            EventKind::VibrationShort { .. } | EventKind::VibrationLong { .. } => Class::Vibration,
        }
    }

    fn of_expected(e: &Expected) -> Option<Class> {
        match e {
            Expected::Collision(_) => Some(Class::Collision),
            Expected::HarshBraking => Some(Class::HarshBraking),
            Expected::Vibration(_) => Some(Class::Vibration),
            Expected::Nothing => None,
        }
    }
}

/// Pipeline output for one scenario next to its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub duration_s: f64,
    pub truth: GroundTruth,
    pub events: Vec<EventReport>,
    /// Truth index each event is attributed to, if any.
    pub attribution: Vec<Option<usize>>,
    pub yaw_flagged: bool,
    pub summary: String,
}

impl ScenarioOutcome {
    /// Events attributed to truth entry `i`.
    pub fn events_for(&self, i: usize) -> impl Iterator<Item = &EventReport> {
        self.events
            .iter()
            .zip(&self.attribution)
            .filter(move |(_, a)| **a == Some(i))
            .map(|(e, _)| e)
    }
}

fn attribute(events: &[EventReport], truth: &GroundTruth) -> Vec<Option<usize>> {
    events
        .iter()
        .map(|e| {
            let distance = |i: usize| {
                let t = &truth.events[i];
                (t.onset - e.t_end).max(e.t_start - t.end).max(0.0)
            };
            (0..truth.events.len())
                .filter(|&i| distance(i) <= MATCH_TOLERANCE_S)
                .min_by(|&a, &b| distance(a).total_cmp(&distance(b)))
        })
        .collect()
}

/// Run-length digest such as `1x short vibration BT, 3x RB collision`.
pub fn summarize(events: &[EventReport]) -> String {
    let mut runs: Vec<(String, usize)> = Vec::new();
    for e in events {
        let d = e.kind.describe();
        match runs.last_mut() {
            Some((last, n)) if *last == d => *n += 1,
            _ => runs.push((d, 1)),
        }
    }
    if runs.is_empty() {
        return "Nothing".into();
    }
    runs.iter()
        .map(|(d, n)| format!("{n}x {d}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Class,
    /// Detections of this class attributed to a truth event of this class.
    pub true_positives: usize,
    pub detections: usize,
    /// Truth events of this class with at least one matching detection.
    pub hits: usize,
    pub truths: usize,
}

impl ClassMetrics {
    /// 1 when nothing of the class was detected.
    pub fn precision(&self) -> f64 {
        ratio(self.true_positives, self.detections)
    }

    /// 1 when nothing of the class was expected.
    pub fn recall(&self) -> f64 {
        ratio(self.hits, self.truths)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteMetrics {
    pub classes: Vec<ClassMetrics>,
    /// Detected collisions with the expected zone.
    pub localized: usize,
    /// Detected collisions attributed to a collision truth event.
    pub localizable: usize,
    pub detected_events: usize,
}

impl SuiteMetrics {
    pub fn localization_accuracy(&self) -> f64 {
        ratio(self.localized, self.localizable)
    }
}

fn score(outcomes: &[ScenarioOutcome]) -> SuiteMetrics {
    let mut classes: Vec<ClassMetrics> = Class::ALL
        .iter()
        .map(|&class| ClassMetrics {
            class,
            true_positives: 0,
            detections: 0,
            hits: 0,
            truths: 0,
        })
        .collect();
    let slot = |c: Class| Class::ALL.iter().position(|&x| x == c).expect("listed class");
    let (mut localized, mut localizable, mut detected) = (0, 0, 0);
    for o in outcomes {
        detected += o.events.len();
        for (e, a) in o.events.iter().zip(&o.attribution) {
            let class = Class::of_event(&e.kind);
            let m = &mut classes[slot(class)];
            m.detections += 1;
            let expected = a.map(|i| o.truth.events[i].expected);
            if expected.and_then(|x| Class::of_expected(&x)) == Some(class) {
                m.true_positives += 1;
            }
            if let (Some(Expected::Collision(zone)), Some(found)) = (expected, e.kind.zone()) {
                localizable += 1;
                localized += usize::from(zone == found);
            }
        }
        for (i, t) in o.truth.events.iter().enumerate() {
            if let Some(class) = Class::of_expected(&t.expected) {
                let m = &mut classes[slot(class)];
                m.truths += 1;
                if o.events_for(i).any(|e| Class::of_event(&e.kind) == class) {
                    m.hits += 1;
                }
            }
        }
    }
    SuiteMetrics {
        classes,
        localized,
        localizable,
        detected_events: detected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn outcome<'a>(outcomes: &'a [ScenarioOutcome], name: &str) -> Option<&'a ScenarioOutcome> {
    outcomes.iter().find(|o| o.name == name)
}

fn collision_truths(outcomes: &[ScenarioOutcome], grade: CollisionSeverity) -> Vec<(&ScenarioOutcome, usize, Zone)> {
    let mut out = Vec::new();
    for o in outcomes {
        for (i, t) in o.truth.events.iter().enumerate() {
            if let ScenarioKind::Collision { zone, severity } = t.kind {
                if severity == grade {
                    out.push((o, i, zone));
                }
            }
        }
    }
    out
}

fn count_kind(o: &ScenarioOutcome, f: impl Fn(&EventKind) -> bool) -> usize {
    o.events.iter().filter(|e| f(&e.kind)).count()
}

/// The qualitative detection pattern every suite run must reproduce.
fn assertions(outcomes: &[ScenarioOutcome], opts: &SuiteOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let missing = |name: &str| check(name, false, "scenario not run".into());

    let hard = collision_truths(outcomes, CollisionSeverity::Hard);
    let hard_ok: Vec<_> = hard
        .iter()
        .filter(|(o, i, zone)| o.events_for(*i).any(|e| e.kind.zone() == Some(*zone)))
        .collect();
    checks.push(check(
        "hard collisions localized",
        !hard.is_empty() && hard_ok.len() == hard.len(),
        format!("{}/{} with correct zone", hard_ok.len(), hard.len()),
    ));

    let zones_found: Vec<Zone> = Zone::ALL
        .into_iter()
        .filter(|z| hard_ok.iter().any(|(_, _, zone)| zone == z))
        .collect();
    checks.push(check(
        "all four zones",
        zones_found.len() == 4,
        format!("{}/4 zones", zones_found.len()),
    ));

    let soft = collision_truths(outcomes, CollisionSeverity::Soft);
    let soft_collisions: Vec<_> = soft
        .iter()
        .flat_map(|(o, i, zone)| o.events_for(*i).filter_map(move |e| e.kind.zone().map(|z| (z, *zone))))
        .collect();
    let soft_wrong = soft_collisions.iter().filter(|(found, want)| found != want).count();
    checks.push(check(
        "soft collisions localized",
        soft_wrong == 0 && (soft.is_empty() || !soft_collisions.is_empty()),
        format!(
            "{} collision reports, {} wrong zone, {}/{} soft impacts reported as collision",
            soft_collisions.len(),
            soft_wrong,
            soft.iter()
                .filter(|(o, i, _)| o.events_for(*i).any(|e| e.kind.zone().is_some()))
                .count(),
            soft.len()
        ),
    ));

    let very_soft = collision_truths(outcomes, CollisionSeverity::VerySoft);
    let very_soft_hits = very_soft
        .iter()
        .filter(|(o, i, _)| o.events_for(*i).any(|e| e.kind.zone().is_some()))
        .count();
    checks.push(check(
        "very soft collisions silent",
        !very_soft.is_empty() && very_soft_hits == 0,
        format!("{very_soft_hits}/{} reported as collision", very_soft.len()),
    ));

    match outcome(outcomes, "collision_rb") {
        Some(o) => {
            let expected = if opts.mirror_lateral {
                Zone::LeftBack
            } else {
                Zone::RightBack
            };
            let expected = if opts.swap_nodes { expected.mirrored_end() } else { expected };
            let n = count_kind(o, |k| k.zone() == Some(expected));
            let others_ok = o
                .events
                .iter()
                .all(|e| e.kind.zone() == Some(expected) || e.kind.label() == Some(SeverityLabel::BT));
            checks.push(check(
                "rb collision pattern",
                n >= 3 && others_ok,
                format!("{} ({n}x {expected} collision)", o.summary),
            ));
        }
        None => checks.push(missing("rb collision pattern")),
    }

    for (name, label) in [("normal_braking", "soft braking silent"), ("sudden_start", "sudden start silent")] {
        match outcome(outcomes, name) {
            Some(o) => checks.push(check(label, o.events.is_empty(), o.summary.clone())),
            None => checks.push(missing(label)),
        }
    }

    for name in ["hard_braking", "hard_braking_2"] {
        let label = format!("{name} detected");
        match outcome(outcomes, name) {
            Some(o) => {
                let braking: Vec<usize> = (0..o.truth.events.len())
                    .filter(|&i| o.truth.events[i].expected == Expected::HarshBraking)
                    .collect();
                let hits = braking
                    .iter()
                    .filter(|&&i| o.events_for(i).any(|e| e.kind == EventKind::HarshBraking))
                    .count();
                checks.push(check(
                    &label,
                    !braking.is_empty() && hits == braking.len(),
                    format!("{hits}/{} brakings; {}", braking.len(), o.summary),
                ));
            }
            None => checks.push(missing(&label)),
        }
    }

    match outcome(outcomes, "loading_truck") {
        Some(o) => {
            let bt = count_kind(o, |k| k.label() == Some(SeverityLabel::BT));
            checks.push(check(
                "truck loading BT only",
                bt > 0 && bt == o.events.len(),
                o.summary.clone(),
            ));
        }
        None => checks.push(missing("truck loading BT only")),
    }

    match outcome(outcomes, "driving_bumpy_road_fast") {
        Some(o) => {
            let at = count_kind(o, |k| k.label() == Some(SeverityLabel::AT));
            checks.push(check("fast bumps AT", at >= 1, o.summary.clone()));
        }
        None => checks.push(missing("fast bumps AT")),
    }

    if opts.endurance_s > 0.0 {
        match outcome(outcomes, "endurance") {
            Some(o) => {
                let collisions = count_kind(o, |k| k.zone().is_some());
                let braking = count_kind(o, |k| *k == EventKind::HarshBraking);
                checks.push(check(
                    "endurance without false alarms",
                    o.duration_s >= opts.endurance_s && collisions == 0 && braking == 0,
                    format!(
                        "{:.0} s, {collisions} collision, {braking} harsh braking, {} events",
                        o.duration_s,
                        o.events.len()
                    ),
                ));
            }
            None => checks.push(missing("endurance without false alarms")),
        }
    }
    checks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub options: SuiteOptions,
    pub scenarios: Vec<ScenarioOutcome>,
    pub metrics: SuiteMetrics,
    pub checks: Vec<Check>,
}

impl ConfusionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => {
                let mut s = serde_json::to_string(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Human => self.render_human(),
        }
    }

    fn render_human(&self) -> String {
        let mut out = String::new();
        let width = self.scenarios.iter().map(|s| s.name.len()).max().unwrap_or(0);
        for s in &self.scenarios {
            let _ = writeln!(out, "{:width$}  {}", s.name, s.summary);
        }
        out.push('\n');
        let _ = writeln!(out, "{:<13} {:>9} {:>9} {:>10} {:>7}", "class", "precision", "recall", "detections", "truths");
        for m in &self.metrics.classes {
            let _ = writeln!(
                out,
                "{:<13} {:>9.3} {:>9.3} {:>10} {:>7}",
                format!("{:?}", m.class),
                m.precision(),
                m.recall(),
                m.detections,
                m.truths
            );
        }
        let _ = writeln!(
            out,
            "localization  {:.3} ({}/{})",
            self.metrics.localization_accuracy(),
            self.metrics.localized,
            self.metrics.localizable
        );
        out.push('\n');
        for c in &self.checks {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

fn synth_options(opts: &SuiteOptions, scenario: usize, cfg: &AnalysisConfig) -> SynthOptions {
    SynthOptions {
        noise_sigma: opts.noise_sigma,
        noise_seed: seed_for(opts.seed, scenario, usize::MAX - 1),
        front_misalignment: opts.front_misalignment,
        back_misalignment: opts.back_misalignment,
        front_node_id: cfg.front_node_id.clone(),
        back_node_id: cfg.back_node_id.clone(),
        ..SynthOptions::default()
    }
}

/// Applies the suite's mirror/swap options to a generated scenario.
pub fn prepare_traces(
    front: SensorTrace,
    back: SensorTrace,
    truth: GroundTruth,
    opts: &SuiteOptions,
) -> (SensorTrace, SensorTrace, GroundTruth) {
    let (mut front, mut back, mut truth) = (front, back, truth);
    if opts.mirror_lateral {
        front = mirror_lateral(&front);
        back = mirror_lateral(&back);
        truth = truth.mirrored_side();
    }
    if opts.swap_nodes {
        std::mem::swap(&mut front, &mut back);
        truth = truth.mirrored_end();
    }
    (front, back, truth)
}

fn run_one(
    index: usize,
    scenario: &Scenario,
    cfg: &AnalysisConfig,
    opts: &SuiteOptions,
) -> Result<(ScenarioOutcome, NodeSummary), SynthError> {
    let (front, back, truth) = generate(&scenario.specs, &synth_options(opts, index, cfg), cfg)?;
    let (front, back, truth) = prepare_traces(front, back, truth, opts);
    let duration_s = front.end().unwrap_or(0.0);
    let analysis = analyze_pair(&front, &back, cfg)?;
    let attribution = attribute(&analysis.events, &truth);
    let yaw_flagged = analysis.front.params.yaw_gross_misalignment || analysis.back.params.yaw_gross_misalignment;
    Ok((
        ScenarioOutcome {
            name: scenario.name.to_string(),
            duration_s,
            summary: summarize(&analysis.events),
            truth,
            events: analysis.events,
            attribution,
            yaw_flagged,
        },
        analysis.front,
    ))
}

/// Generates every scenario, runs the full pipeline on each (in parallel)
/// and scores the detections.
pub fn run_scenario_suite(cfg: &AnalysisConfig, opts: &SuiteOptions) -> Result<ConfusionReport, SynthError> {
    let list = scenarios(opts.seed, opts.endurance_s);
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = list
            .iter()
            .enumerate()
            .map(|(i, sc)| s.spawn(move || run_one(i, sc, cfg, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    });
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r?.0);
    }
    Ok(ConfusionReport {
        options: opts.clone(),
        metrics: score(&outcomes),
        checks: assertions(&outcomes, opts),
        scenarios: outcomes,
    })
}

/// Name accepted by [`sensitivity_sweep`] for the injected yaw (degrees).
pub const YAW_PARAMETER: &str = "yaw";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: SuiteMetrics,
    pub checks_passed: usize,
    pub checks_total: usize,
    /// Per-scenario digests, used to compare against the baseline.
    pub summaries: Vec<String>,
    pub yaw_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// Yaw sweeps: largest |angle| whose outcome matches the un-yawed run.
    pub max_unchanged_yaw_deg: Option<f64>,
}

impl SweepTable {
    pub fn render(&self, format: Format) -> String {
        if format == Format::Machine {
            let mut s = serde_json::to_string(self).expect("sweep serializes");
            s.push('\n');
            return s;
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>10} {:>8} {:>9} {:>9} {:>9} {:>8} {:>6}",
            self.parameter, "events", "coll P", "coll R", "local", "checks", "yaw!"
        );
        for r in &self.rows {
            let c = &r.metrics.classes[0];
            let _ = writeln!(
                out,
                "{:>10.3} {:>8} {:>9.3} {:>9.3} {:>9.3} {:>5}/{:<2} {:>6}",
                r.value,
                r.metrics.detected_events,
                c.precision(),
                c.recall(),
                r.metrics.localization_accuracy(),
                r.checks_passed,
                r.checks_total,
                if r.yaw_flagged { "yes" } else { "no" }
            );
        }
        if let Some(y) = self.max_unchanged_yaw_deg {
            let _ = writeln!(out, "largest yaw with unchanged outcome: {y:.3} deg");
        }
        out
    }
}

/// Reruns the suite for each value of `parameter` (an [`AnalysisConfig`]
/// key, or [`YAW_PARAMETER`] for a yaw misalignment in degrees applied to
/// both nodes).
pub fn sensitivity_sweep(
    parameter: &str,
    values: &[f64],
    cfg: &AnalysisConfig,
    opts: &SuiteOptions,
) -> Result<SweepTable, SynthError> {
    let yaw = parameter == YAW_PARAMETER;
    if !yaw && cfg.get(parameter).is_none() {
        return Err(SynthError::UnknownParameter(parameter.to_string()));
    }
    let run = |value: f64| -> Result<SweepRow, SynthError> {
        let mut cfg = cfg.clone();
        let mut opts = opts.clone();
        if yaw {
            opts.front_misalignment.yaw = value.to_radians();
            opts.back_misalignment.yaw = value.to_radians();
        } else {
            cfg.set(parameter, &value.to_string())
                .map_err(|e| SynthError::UnknownParameter(format!("{parameter}: {e}")))?;
        }
        let report = run_scenario_suite(&cfg, &opts)?;
        Ok(SweepRow {
            value,
            checks_passed: report.checks.iter().filter(|c| c.passed).count(),
            checks_total: report.checks.len(),
            summaries: report.scenarios.iter().map(|s| s.summary.clone()).collect(),
            yaw_flagged: report.scenarios.iter().any(|s| s.yaw_flagged),
            metrics: report.metrics,
        })
    };
    let rows = values.iter().map(|&v| run(v)).collect::<Result<Vec<_>, _>>()?;
    let max_unchanged_yaw_deg = if yaw {
        let baseline = run(0.0)?;
        let same = |r: &SweepRow| r.summaries == baseline.summaries && r.metrics == baseline.metrics;
        let mut by_angle: Vec<&SweepRow> = rows.iter().collect();
        by_angle.sort_by(|a, b| a.value.abs().total_cmp(&b.value.abs()));
        let mut best = 0.0;
        for r in by_angle {
            if !same(r) {
                break;
            }
            best = r.value.abs();
        }
        Some(best)
    } else {
        None
    };
    Ok(SweepTable {
        parameter: parameter.to_string(),
        rows,
        max_unchanged_yaw_deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::SegmentFeatures;
    use crate::model::MountPosition;
    use crate::synth::TruthEvent;

    fn event(kind: EventKind, t: f64) -> EventReport {
        EventReport {
            kind,
            t_start: t,
            t_end: t + 0.1,
            diagnostics: SegmentFeatures {
                duration: 0.1,
                net_area_ax: 0.0,
                total_area_ax: 0.0,
                ratio_ax: 0.0,
                net_ax: 0.0,
                net_ay: 0.0,
                dominant_node: MountPosition::Front,
                area_ay_dom: 0.0,
                area_az_dom: 0.0,
                peak_ay_dom: 0.0,
                net_ay_dom: 0.0,
                crossings: 0,
                crossing_rate: 0.0,
                peak_a_total_mean: 10.0,
            },
        }
    }

    fn rb(t: f64) -> EventReport {
        event(
            EventKind::Collision {
                zone: Zone::RightBack,
                peak: 10.0,
            },
            t,
        )
    }

    #[test]
    fn summary_runs() {
        let bt = event(EventKind::VibrationShort { label: SeverityLabel::BT }, 1.0);
        let events = vec![bt.clone(), rb(2.0), rb(3.0), rb(4.0), bt];
        assert_eq!(
            summarize(&events),
            "1x short vibration BT, 3x RB collision, 1x short vibration BT"
        );
        assert_eq!(summarize(&[]), "Nothing");
    }

    #[test]
    fn attribution_uses_tolerance() {
        let truth = GroundTruth {
            events: vec![
                TruthEvent {
                    kind: ScenarioKind::Idle,
                    onset: 1.0,
                    end: 2.0,
                    expected: Expected::Nothing,
                    onset_to_peak: 0.0,
                },
                TruthEvent {
                    kind: ScenarioKind::Idle,
                    onset: 5.0,
                    end: 5.1,
                    expected: Expected::Nothing,
                    onset_to_peak: 0.0,
                },
            ],
        };
        let events = [rb(0.45), rb(2.45), rb(3.0), rb(5.05)];
        assert_eq!(attribute(&events, &truth), vec![Some(0), Some(0), None, Some(1)]);
    }

    #[test]
    fn scenario_list_is_well_formed() {
        let list = scenarios(7, 3600.0);
        assert_eq!(list.len(), 14);
        let names: Vec<_> = list.iter().map(|s| s.name).collect();
        assert!(names.contains(&"collision_rb") && names.contains(&"endurance"));
        for s in &list {
            for w in s.specs.windows(2) {
                assert!(w[1].t_onset >= w[0].t_end());
            }
        }
        let endurance = list.last().unwrap();
        assert!(endurance.specs.last().unwrap().t_end() >= 3600.0);
        assert_eq!(scenarios(7, 0.0).len(), 13);
        assert_eq!(list, scenarios(7, 3600.0));
    }

    #[test]
    fn unknown_sweep_parameter() {
        let err = sensitivity_sweep("nope", &[1.0], &AnalysisConfig::default(), &SuiteOptions::default());
        assert_eq!(err.unwrap_err(), SynthError::UnknownParameter("nope".into()));
    }
}
