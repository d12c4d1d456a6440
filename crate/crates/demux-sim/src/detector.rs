//! Click detection and coincidence machinery: efficiency, non-paralyzable
//! dead time, Gaussian timing jitter, n-fold sliding-window coincidences and
//! the two-input beamsplitter bench.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clock::TimeTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub dead_time_ps: i64,
    pub jitter_sigma_ps: f64,
}

/// Beamsplitter bench for two-photon interference between two channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomBenchSpec {
    pub input_a: u8,
    pub input_b: u8,
    /// Intensity reflectivity R; transmissivity is 1 - R.
    pub reflectivity: f64,
    /// Mean wavepacket overlap of paired photons (0 for cross-polarized).
    pub mutual_indistinguishability: f64,
    /// Residual path mismatch between the two inputs.
    pub relative_delay_ps: i64,
    /// Arrivals closer than this (after delay removal) pair up.
    pub pairing_window_ps: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectError {
    #[error("arrival stream is not sorted at index {0}")]
    UnsortedInput(usize),
}

/// Convert photon arrivals at one detector into time tags.
///
/// Each arrival survives with `efficiency` and is dropped if it arrives
/// within `dead_time_ps` of the previously accepted arrival (non-paralyzable:
/// a dropped arrival does not extend the dead time). Accepted arrivals are
/// timestamped at `arrival + Gaussian(0, jitter)` - jitter is timestamp
/// noise, so the dead-time gate acts on arrival order, not on the noisy
/// tags. Output is sorted and strictly increasing; a tag that would
/// duplicate the previous timestamp exactly is dropped, since one counter
/// channel cannot emit two tags in the same picosecond.
pub fn detect<R: Rng>(
    arrivals: &[i64],
    channel: u8,
    params: &DetectorParams,
    rng: &mut R,
) -> Result<Vec<TimeTag>, DetectError> {
    for (i, w) in arrivals.windows(2).enumerate() {
        if w[1] < w[0] {
            return Err(DetectError::UnsortedInput(i + 1));
        }
    }
    let jitter = if params.jitter_sigma_ps > 0.0 {
        Some(Normal::new(0.0, params.jitter_sigma_ps).expect("positive sigma"))
    } else {
        None
    };
    let mut tags: Vec<TimeTag> = Vec::with_capacity(
        (arrivals.len() as f64 * params.efficiency) as usize + 16,
    );
    let mut last_accepted: Option<i64> = None;
    for &t in arrivals {
        if params.efficiency < 1.0 && !rng.gen_bool(params.efficiency) {
            continue;
        }
        if let Some(prev) = last_accepted {
            if params.dead_time_ps > 0 && t - prev < params.dead_time_ps {
                continue;
            }
        }
        last_accepted = Some(t);
        let tagged = match &jitter {
            Some(n) => (t as f64 + n.sample(rng)).round() as i64,
            None => t,
        };
        tags.push(TimeTag::new(channel, tagged.max(0)));
    }
    // jitter can reorder tags; restore order and strict monotonicity
    tags.sort_by_key(|t| t.time_ps);
    tags.dedup_by_key(|t| t.time_ps);
    Ok(tags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub channels: Vec<u8>,
    pub window_ps: i64,
    pub count: u64,
    pub rate_hz: f64,
    pub rate_sigma_hz: f64,
}

/// Count n-fold coincidences across sorted tag streams.
///
/// A coincidence is an event where every stream has a tag inside one common
/// window anchored at the earliest unconsumed tag. On a match all matched
/// tags are consumed; otherwise only the anchor advances.
pub fn coincidence_count(
    streams: &[&[TimeTag]],
    window_ps: i64,
    duration_ps: i64,
) -> CoincidenceReport {
    let channels = streams
        .iter()
        .map(|s| s.first().map(|t| t.channel).unwrap_or(u8::MAX))
        .collect();
    let n = streams.len();
    let mut idx = vec![0usize; n];
    let mut count = 0u64;
    'outer: loop {
        // anchor = earliest current tag
        let mut anchor_time = i64::MAX;
        for k in 0..n {
            match streams[k].get(idx[k]) {
                Some(t) => anchor_time = anchor_time.min(t.time_ps),
                None => break 'outer,
            }
        }
        let deadline = anchor_time + window_ps;
        let mut all_in = true;
        for k in 0..n {
            while let Some(t) = streams[k].get(idx[k]) {
                if t.time_ps < anchor_time {
                    idx[k] += 1;
                } else {
                    break;
                }
            }
            match streams[k].get(idx[k]) {
                Some(t) if t.time_ps <= deadline => {}
                Some(_) => all_in = false,
                None => break 'outer,
            }
        }
        if all_in {
            count += 1;
            for i in idx.iter_mut() {
                *i += 1;
            }
        } else {
            // advance the stream holding the anchor
            for k in 0..n {
                if streams[k].get(idx[k]).map(|t| t.time_ps) == Some(anchor_time) {
                    idx[k] += 1;
                    break;
                }
            }
        }
    }
    let duration_s = duration_ps as f64 / 1e12;
    let rate_hz = count as f64 / duration_s;
    CoincidenceReport {
        channels,
        window_ps,
        count,
        rate_hz,
        rate_sigma_hz: (count as f64).sqrt() / duration_s,
    }
}

/// Merge two photon arrival streams on a beamsplitter.
///
/// Arrivals from the two inputs pair up when their times (after removing the
/// relative delay) differ by less than the pairing window. A paired pair
/// produces one photon in each output with probability
/// `R^2 + T^2 - 2 R T V` and otherwise bunches into a single output chosen
/// with the R/T split. Unpaired photons route independently, reflecting to
/// the first output with probability R.
pub fn hom_merge<R: Rng>(
    tags_a: &[i64],
    tags_b: &[i64],
    spec: &HomBenchSpec,
    rng: &mut R,
) -> (Vec<i64>, Vec<i64>) {
    let r = spec.reflectivity;
    let t = 1.0 - r;
    let p_coincide = (r * r + t * t - 2.0 * r * t * spec.mutual_indistinguishability)
        .clamp(0.0, 1.0);
    let mut out1 = Vec::new();
    let mut out2 = Vec::new();
    let mut ia = 0usize;
    let mut ib = 0usize;
    let route_single = |time: i64, out1: &mut Vec<i64>, out2: &mut Vec<i64>, rng: &mut R| {
        if rng.gen_bool(r) {
            out1.push(time);
        } else {
            out2.push(time);
        }
    };
    while ia < tags_a.len() && ib < tags_b.len() {
        let ta = tags_a[ia];
        let tb = tags_b[ib] + spec.relative_delay_ps;
        if (ta - tb).abs() < spec.pairing_window_ps {
            if rng.gen_bool(p_coincide) {
                // one photon per output; which input ends up where is
                // symmetric for the interfering pair
                if rng.gen_bool(0.5) {
                    out1.push(ta);
                    out2.push(tags_b[ib]);
                } else {
                    out1.push(tags_b[ib]);
                    out2.push(ta);
                }
            } else if rng.gen_bool(r) {
                out1.push(ta);
                out1.push(tags_b[ib]);
            } else {
                out2.push(ta);
                out2.push(tags_b[ib]);
            }
            ia += 1;
            ib += 1;
        } else if ta < tb {
            route_single(ta, &mut out1, &mut out2, rng);
            ia += 1;
        } else {
            route_single(tags_b[ib], &mut out1, &mut out2, rng);
            ib += 1;
        }
    }
    for &ta in &tags_a[ia..] {
        route_single(ta, &mut out1, &mut out2, rng);
    }
    for &tb in &tags_b[ib..] {
        route_single(tb, &mut out1, &mut out2, rng);
    }
    out1.sort_unstable();
    out2.sort_unstable();
    (out1, out2)
}
