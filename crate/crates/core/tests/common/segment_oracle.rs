//! Quadratic segmentation reference: grow every trigger on its own, dedupe,
//! merge pairs until nothing changes, then filter by length.

use impact_core::config::AnalysisConfig;
use impact_core::model::Segment;
use impact_core::segmentation::MERGE_EPS_S;

pub fn brute_force(times: &[f64], m: &[f64], cfg: &AnalysisConfig) -> Vec<Segment> {
    let mut windows: Vec<(usize, usize)> = Vec::new();
    for k in 0..m.len() {
        if m[k] <= cfg.trigger_threshold || m[k].is_nan() {
            continue;
        }
        let mut lo = k;
        while lo > 0 && m[lo - 1] >= cfg.release_threshold {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < m.len() && m[hi + 1] >= cfg.release_threshold {
            hi += 1;
        }
        if !windows.contains(&(lo, hi)) {
            windows.push((lo, hi));
        }
    }
    loop {
        let mut changed = false;
        'outer: for a in 0..windows.len() {
            for b in 0..windows.len() {
                if a == b {
                    continue;
                }
                let (x, y) = (windows[a], windows[b]);
                if x.1 < y.0 && times[y.0] - times[x.1] <= cfg.merge_gap + MERGE_EPS_S {
                    windows[a] = (x.0.min(y.0), x.1.max(y.1));
                    windows.remove(b);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            break;
        }
    }
    windows.sort();
    windows
        .into_iter()
        .filter(|&(s, e)| times[e] - times[s] >= cfg.min_segment)
        .map(|(s, e)| {
            let mut peak = m[s];
            for v in &m[s..=e] {
                if *v > peak {
                    peak = *v;
                }
            }
            Segment {
                t_start: times[s],
                t_end: times[e],
                range: s..e + 1,
                peak_a_total_mean: peak,
            }
        })
        .collect()
}

/// Random pulse train on a 100 Hz grid: piecewise-constant levels spanning
/// quiet, release-band and trigger-band values, with small jitter.
pub fn random_pulse_train(rng: &mut impl rand::Rng, max_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(10..=max_len);
    let mut m = Vec::with_capacity(n);
    while m.len() < n {
        let level = match rng.gen_range(0..10) {
            0..=4 => rng.gen_range(0.0..1.0),
            5 | 6 => rng.gen_range(1.0..5.0),
            _ => rng.gen_range(5.0..40.0),
        };
        let len = match rng.gen_range(0..4) {
            0 => 1,
            1 => rng.gen_range(2..10),
            2 => rng.gen_range(10..60),
            _ => rng.gen_range(40..120),
        };
        for _ in 0..len {
            if m.len() < n {
                m.push(level + rng.gen_range(-0.05..0.05f64).max(-level));
            }
        }
    }
    let t = (0..n).map(|k| k as f64 / 100.0).collect();
    (t, m)
}
