//! Estimators and closed-form rate formulas: correlation histograms, the
//! second-order correlation at zero delay, switching metrics, source
//! efficiency, the n-fold coincidence-rate model and interference
//! visibilities with their standard corrections.

use serde::{Deserialize, Serialize};

/// A value with a one-sigma counting uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl std::fmt::Display for Measured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6} +- {:.6}", self.value, self.sigma)
    }
}

/// Start-stop correlation histogram with fixed-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    pub bin_width_ps: i64,
    /// Time of the left edge of bin 0.
    pub origin_ps: i64,
    pub counts: Vec<u64>,
    /// (start, stop) channel labels or sync-mode marker.
    pub meta: HistogramMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HistogramMeta {
    StartStop { start_channel: u8, stop_channel: u8 },
    Sync { stop_channel: u8, sync_divider: u32 },
}

impl CorrelationHistogram {
    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center_ps(&self, bin: usize) -> f64 {
        self.origin_ps as f64 + (bin as f64 + 0.5) * self.bin_width_ps as f64
    }

    /// Integrated counts in `[center - half_window, center + half_window)`.
    pub fn integrate_window(&self, center_ps: i64, half_window_ps: i64) -> u64 {
        let lo = center_ps - half_window_ps;
        let hi = center_ps + half_window_ps;
        let mut sum = 0u64;
        for (i, &c) in self.counts.iter().enumerate() {
            let bin_lo = self.origin_ps + i as i64 * self.bin_width_ps;
            let bin_center = bin_lo + self.bin_width_ps / 2;
            if bin_center >= lo && bin_center < hi {
                sum += c;
            }
        }
        sum
    }

    pub fn range_ps(&self) -> (i64, i64) {
        (
            self.origin_ps,
            self.origin_ps + self.counts.len() as i64 * self.bin_width_ps,
        )
    }
}

/// Accumulate stop-minus-start differences into a symmetric histogram over
/// `[-range_ps, +range_ps)`. Only every `sync_divider`-th start is retained.
/// Empty inputs produce an empty (all-zero) histogram.
pub fn build_histogram(
    start_times: &[i64],
    stop_times: &[i64],
    bin_width_ps: i64,
    range_ps: i64,
    sync_divider: u32,
    meta: HistogramMeta,
) -> CorrelationHistogram {
    assert!(bin_width_ps > 0 && range_ps > 0 && sync_divider >= 1);
    let n_bins = ((2 * range_ps + bin_width_ps - 1) / bin_width_ps) as usize;
    let origin_ps = -range_ps;
    let mut counts = vec![0u64; n_bins];
    let mut lo = 0usize;
    for (k, &start) in start_times.iter().enumerate() {
        if !(k as u32).is_multiple_of(sync_divider) {
            continue;
        }
        while lo < stop_times.len() && stop_times[lo] < start - range_ps {
            lo += 1;
        }
        for &stop in &stop_times[lo..] {
            let tau = stop - start;
            if tau >= range_ps {
                break;
            }
            let bin = ((tau + range_ps) / bin_width_ps) as usize;
            if bin < n_bins {
                counts[bin] += 1;
            }
        }
    }
    CorrelationHistogram {
        bin_width_ps,
        origin_ps,
        counts,
        meta,
    }
}

/// Start-stop histogram against a periodic sync train (clock divider mode):
/// starts are the instants `k * sync_period_ps` for `k` in `[0, n_syncs)`.
/// Equivalent to `build_histogram` with the generated train, without
/// materializing tens of millions of sync tags.
pub fn build_sync_histogram(
    stop_times: &[i64],
    sync_period_ps: i64,
    n_syncs: u64,
    bin_width_ps: i64,
    range_ps: i64,
    meta: HistogramMeta,
) -> CorrelationHistogram {
    assert!(bin_width_ps > 0 && range_ps > 0 && sync_period_ps > 0);
    let n_bins = ((2 * range_ps + bin_width_ps - 1) / bin_width_ps) as usize;
    let origin_ps = -range_ps;
    let mut counts = vec![0u64; n_bins];
    for &stop in stop_times {
        // sync indices with stop - sync in (-range, +range)
        let k_min = (stop - range_ps).div_euclid(sync_period_ps) + 1;
        let k_max = (stop + range_ps).div_euclid(sync_period_ps);
        for k in k_min.max(0)..=k_max.min(n_syncs as i64 - 1) {
            let tau = stop - k * sync_period_ps;
            if tau >= -range_ps && tau < range_ps {
                counts[((tau + range_ps) / bin_width_ps) as usize] += 1;
            }
        }
    }
    CorrelationHistogram {
        bin_width_ps,
        origin_ps,
        counts,
        meta,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("histogram does not span {required} side peaks on each side")]
    InsufficientSpan { required: u32 },
    #[error("side-peak counts are zero")]
    ZeroSidePeaks,
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("n = {n} exceeds channel count m = {m}")]
    OrderExceedsChannels { n: u32, m: u32 },
    #[error("reflectivity must lie strictly between 0 and 1")]
    DegenerateReflectivity,
    #[error("peak integration windows overlap: bin width or window too coarse")]
    OverlappingPeaks,
}

/// Second-order correlation at zero delay from a correlation histogram:
/// the center-peak integral over the mean side-peak integral, with Poisson
/// uncertainty propagation.
pub fn hbt_g2(
    histogram: &CorrelationHistogram,
    period_ps: i64,
    integration_window_ps: i64,
) -> Result<Measured, AnalyticsError> {
    let (lo, hi) = histogram.range_ps();
    let half = integration_window_ps / 2;
    let mut side_sum = 0u64;
    let mut side_peaks = 0u32;
    let mut k = 1i64;
    loop {
        let mut any = false;
        for center in [k * period_ps, -k * period_ps] {
            if center - half >= lo && center + half <= hi {
                side_sum += histogram.integrate_window(center, half);
                side_peaks += 1;
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    if side_peaks < 6 {
        return Err(AnalyticsError::InsufficientSpan { required: 3 });
    }
    if side_sum == 0 {
        return Err(AnalyticsError::ZeroSidePeaks);
    }
    let center = histogram.integrate_window(0, half) as f64;
    let side_mean = side_sum as f64 / side_peaks as f64;
    let g2 = center / side_mean;
    // var(g2) = g2^2 * (1/C + 1/S_total) for Poisson counts
    let rel_var = if center > 0.0 { 1.0 / center } else { 0.0 } + 1.0 / side_sum as f64;
    Ok(Measured {
        value: g2,
        sigma: g2 * rel_var.sqrt(),
    })
}

/// Per-channel switching figures extracted from sync histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingMetrics {
    /// Main-to-side integrated count ratio per channel.
    pub per_channel_er: Vec<f64>,
    /// `main / (main + side)` per channel.
    pub per_channel_eta_sw: Vec<f64>,
    pub mean_eta_sw: f64,
    pub std_eta_sw: f64,
}

/// Extract the switching efficiency of each channel from its sync histogram.
///
/// Main peaks repeat every `cycle_period_ps`; the main-peak offset within the
/// cycle is located at the histogram maximum. The three side-peak classes sit
/// at pulse-period offsets from the main peak. Each class is integrated over
/// `+- pulse_period/2` windows, averaged over its occurrences in the
/// histogram span; the channel extinction ratio is `main / sum(sides)`.
pub fn switching_metrics(
    histograms: &[CorrelationHistogram],
    cycle_period_ps: i64,
    pulse_period_ps: i64,
) -> Result<SwitchingMetrics, AnalyticsError> {
    let m = (cycle_period_ps / pulse_period_ps) as usize;
    let half = pulse_period_ps / 2;
    if cycle_period_ps % pulse_period_ps != 0 {
        return Err(AnalyticsError::OverlappingPeaks);
    }
    let mut per_channel_er = Vec::with_capacity(histograms.len());
    let mut per_channel_eta_sw = Vec::with_capacity(histograms.len());
    for hist in histograms {
        if hist.bin_width_ps > half {
            return Err(AnalyticsError::OverlappingPeaks);
        }
        let max_bin = hist
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(i, _)| i)
            .unwrap_or(0);
        let main_offset =
            (hist.bin_center_ps(max_bin) as i64).rem_euclid(cycle_period_ps);
        let (lo, hi) = hist.range_ps();
        // average integrated counts per occurrence for each offset class
        let mut class_mean = vec![0.0f64; m];
        for (class, mean) in class_mean.iter_mut().enumerate() {
            let offset = (main_offset + class as i64 * pulse_period_ps)
                .rem_euclid(cycle_period_ps);
            let mut total = 0u64;
            let mut occurrences = 0u64;
            let mut center = lo.div_euclid(cycle_period_ps) * cycle_period_ps + offset;
            while center + half <= hi {
                if center - half >= lo {
                    total += hist.integrate_window(center, half);
                    occurrences += 1;
                }
                center += cycle_period_ps;
            }
            if occurrences == 0 {
                return Err(AnalyticsError::InsufficientSpan { required: 1 });
            }
            *mean = total as f64 / occurrences as f64;
        }
        let main = class_mean[0];
        let side: f64 = class_mean[1..].iter().sum();
        if side == 0.0 {
            per_channel_er.push(f64::INFINITY);
            per_channel_eta_sw.push(1.0);
        } else {
            per_channel_er.push(main / side);
            per_channel_eta_sw.push(main / (main + side));
        }
    }
    let n = per_channel_eta_sw.len() as f64;
    let mean_eta_sw = per_channel_eta_sw.iter().sum::<f64>() / n;
    let std_eta_sw = (per_channel_eta_sw
        .iter()
        .map(|e| (e - mean_eta_sw).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SwitchingMetrics {
        per_channel_er,
        per_channel_eta_sw,
        mean_eta_sw,
        std_eta_sw,
    })
}

/// Fiber-coupled source efficiency from a detected count rate:
/// `(R_det / RR) / (eta_ch1 * eta_det)`.
pub fn source_efficiency(
    r_det_hz: f64,
    rr_hz: f64,
    eta_ch1: f64,
    eta_det: f64,
) -> Result<f64, AnalyticsError> {
    if rr_hz == 0.0 || eta_ch1 == 0.0 || eta_det == 0.0 {
        return Err(AnalyticsError::ZeroDenominator);
    }
    Ok(r_det_hz / rr_hz / (eta_ch1 * eta_det))
}

/// Parameter tuple of the detected n-fold coincidence-rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub rr_hz: f64,
    /// Output channel count of the demultiplexer.
    pub m: u32,
    pub eta_blinking: f64,
    pub eta_qd: f64,
    pub eta_routing: f64,
    pub eta_det: f64,
    pub eta_sw: f64,
}

/// One-sigma uncertainties of the rate-model parameters, propagated as
/// independent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateModelSigma {
    pub eta_blinking: f64,
    pub eta_qd: f64,
    pub eta_routing: f64,
    pub eta_det: f64,
    pub eta_sw: f64,
}

/// Detected n-fold coincidence rate of n distinct output channels clicking
/// simultaneously:
///
/// ```text
/// R(n) = RR/m * eta_blinking * (eta_qd/eta_blinking * eta_routing * eta_det)^n
///        * [ eta_sw^n + (m-1) * ((1-eta_sw)/(m-1))^n ]
/// ```
///
/// Blinking enters linearly because its timescale is long against the
/// switching cycle: the emitter is on or off for whole cycles at a time. The
/// bracket collects the all-correct and the m-1 uniformly-shifted all-wrong
/// routing patterns; an incorrectly routed photon can never share a time bin
/// with a correctly routed one, so mixed patterns contribute no simultaneous
/// n-fold clicks. For m = 1 the bracket is defined as 1.
pub fn analytic_coincidence_rate(n: u32, model: &RateModel) -> Result<f64, AnalyticsError> {
    if n > model.m || n == 0 {
        return Err(AnalyticsError::OrderExceedsChannels { n, m: model.m });
    }
    let per_photon = model.eta_qd / model.eta_blinking * model.eta_routing * model.eta_det;
    let bracket = rate_bracket(n, model.m, model.eta_sw);
    Ok(model.rr_hz / model.m as f64
        * model.eta_blinking
        * per_photon.powi(n as i32)
        * bracket)
}

fn rate_bracket(n: u32, m: u32, eta_sw: f64) -> f64 {
    if m < 2 {
        return 1.0;
    }
    let wrong = (1.0 - eta_sw) / (m - 1) as f64;
    eta_sw.powi(n as i32) + (m - 1) as f64 * wrong.powi(n as i32)
}

/// Rate with a one-sigma uncertainty from independent parameter errors
/// (central finite differences through the closed form).
pub fn analytic_coincidence_rate_with_sigma(
    n: u32,
    model: &RateModel,
    sigma: &RateModelSigma,
) -> Result<Measured, AnalyticsError> {
    let value = analytic_coincidence_rate(n, model)?;
    let mut var = 0.0;
    type Field = fn(&mut RateModel) -> &mut f64;
    let params: [(f64, Field); 5] = [
        (sigma.eta_blinking, |m| &mut m.eta_blinking),
        (sigma.eta_qd, |m| &mut m.eta_qd),
        (sigma.eta_routing, |m| &mut m.eta_routing),
        (sigma.eta_det, |m| &mut m.eta_det),
        (sigma.eta_sw, |m| &mut m.eta_sw),
    ];
    for (s, field) in params {
        if s == 0.0 {
            continue;
        }
        let h = s * 1e-3;
        let mut hi = *model;
        *field(&mut hi) += h;
        let mut lo = *model;
        *field(&mut lo) -= h;
        let d = (analytic_coincidence_rate(n, &hi)? - analytic_coincidence_rate(n, &lo)?)
            / (2.0 * h);
        var += (d * s).powi(2);
    }
    Ok(Measured {
        value,
        sigma: var.sqrt(),
    })
}

/// Raw interference visibility `1 - C_par / C_perp` from the normalized
/// center-peak integrals of the co- and cross-polarized runs.
pub fn hom_visibility_raw(c_parallel: f64, c_perpendicular: f64) -> Result<f64, AnalyticsError> {
    if c_perpendicular <= 0.0 {
        return Err(AnalyticsError::ZeroDenominator);
    }
    Ok(1.0 - c_parallel / c_perpendicular)
}

/// Alternative raw visibility `1 - 2A` with `A` the ratio of the center-peak
/// area to the mean uncorrelated-peak area of the co-polarized run alone.
pub fn hom_visibility_alternative(
    center_area: f64,
    mean_uncorrelated_area: f64,
) -> Result<f64, AnalyticsError> {
    if mean_uncorrelated_area <= 0.0 {
        return Err(AnalyticsError::ZeroDenominator);
    }
    Ok(1.0 - 2.0 * center_area / mean_uncorrelated_area)
}

/// Indistinguishability corrected for a finite g2 and an imperfect splitting
/// ratio: `(V_raw + g2) / (1 - g2) * (R^2 + T^2) / (2 R T)`.
pub fn hom_visibility_corrected(
    v_raw: f64,
    g2_zero: f64,
    reflectivity: f64,
) -> Result<f64, AnalyticsError> {
    if reflectivity <= 0.0 || reflectivity >= 1.0 {
        return Err(AnalyticsError::DegenerateReflectivity);
    }
    if g2_zero >= 1.0 {
        return Err(AnalyticsError::ZeroDenominator);
    }
    let r = reflectivity;
    let t = 1.0 - r;
    Ok((v_raw + g2_zero) / (1.0 - g2_zero) * (r * r + t * t) / (2.0 * r * t))
}
