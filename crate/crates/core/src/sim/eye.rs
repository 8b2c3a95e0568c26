use std::f64::consts::TAU;

use super::{SimError, Waveform};

/// Histogram resolution used for region detection.
pub const DEFAULT_BIN_WIDTH_UI: f64 = 0.005;
/// Empty gaps narrower than this join neighbouring regions; it absorbs the
/// sub-splitting caused by ISI beyond the bits that define a region.
pub const DEFAULT_MERGE_GAP_UI: f64 = 0.02;

/// Threshold crossing located by linear interpolation between samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub time_ui: f64,
    pub rising: bool,
}

/// Crossing between two consecutive samples, as a fraction of the sample
/// interval.
pub(crate) fn interpolate(a: f64, b: f64, threshold: f64) -> Option<(f64, bool)> {
    let rising = a < threshold && b >= threshold;
    let falling = a >= threshold && b < threshold;
    if !(rising || falling) {
        return None;
    }
    Some(((threshold - a) / (b - a), rising))
}

pub fn find_crossings(w: &Waveform, threshold: f64) -> Vec<Crossing> {
    let spu = w.samples_per_ui as f64;
    w.samples
        .windows(2)
        .enumerate()
        .filter_map(|(k, p)| {
            interpolate(p[0], p[1], threshold).map(|(frac, rising)| Crossing {
                time_ui: (k as f64 + frac) / spu,
                rising,
            })
        })
        .collect()
}

/// Contiguous run of occupied bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub start_ui: f64,
    pub end_ui: f64,
    pub count: u64,
    pub centroid_ui: f64,
}

impl Region {
    pub fn width_ui(&self) -> f64 {
        self.end_ui - self.start_ui
    }
}

/// Zero-crossing histogram over one UI. Phases are folded into
/// `[origin, origin + 1)` with the origin half a UI before the circular
/// mean, so a cluster near the bit boundary is not split.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeHistogram {
    pub bin_width: f64,
    pub origin_ui: f64,
    pub counts: Vec<u64>,
    pub total_crossings: u64,
    /// Extreme folded crossing phases.
    pub min_ui: f64,
    pub max_ui: f64,
}

impl EyeHistogram {
    pub fn bin_center(&self, k: usize) -> f64 {
        self.origin_ui + (k as f64 + 0.5) * self.bin_width
    }

    /// Spread of crossing phases: the window of susceptibility.
    pub fn window_ui(&self) -> f64 {
        self.max_ui - self.min_ui
    }

    pub fn eye_opening(&self) -> f64 {
        1.0 - self.window_ui()
    }

    pub fn peak_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Occupied-bin regions, bridging empty gaps narrower than `merge_gap_ui`.
    pub fn regions(&self, merge_gap_ui: f64) -> Vec<Region> {
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for (k, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            match spans.last_mut() {
                Some((_, end))
                    if k == *end + 1
                        || ((k - *end - 1) as f64) * self.bin_width < merge_gap_ui - 1e-12 =>
                {
                    *end = k
                }
                _ => spans.push((k, k)),
            }
        }
        spans
            .into_iter()
            .map(|(a, b)| {
                let count: u64 = self.counts[a..=b].iter().sum();
                let moment: f64 = (a..=b)
                    .map(|k| self.counts[k] as f64 * self.bin_center(k))
                    .sum();
                Region {
                    start_ui: self.origin_ui + a as f64 * self.bin_width,
                    end_ui: self.origin_ui + (b + 1) as f64 * self.bin_width,
                    count,
                    centroid_ui: moment / count as f64,
                }
            })
            .collect()
    }
}

impl EyeHistogram {
    /// Distances between consecutive region centroids.
    pub fn sub_windows(&self, merge_gap_ui: f64) -> Vec<f64> {
        self.regions(merge_gap_ui)
            .windows(2)
            .map(|w| w[1].centroid_ui - w[0].centroid_ui)
            .collect()
    }
}

pub fn crossing_histogram(
    w: &Waveform,
    threshold: f64,
    bin_width: f64,
) -> Result<EyeHistogram, SimError> {
    if w.duration_ui() < 2.0 {
        return Err(SimError::InvalidConfig(format!(
            "waveform must span at least 2 UI, got {}",
            w.duration_ui()
        )));
    }
    let bins = (1.0 / bin_width).round();
    if !(bin_width > 0.0) || bins < 1.0 || (bins * bin_width - 1.0).abs() > 1e-9 {
        return Err(SimError::InvalidConfig(format!(
            "bin width {bin_width} must divide one UI"
        )));
    }
    let bins = bins as usize;
    let phases: Vec<f64> = find_crossings(w, threshold)
        .iter()
        .map(|c| c.time_ui.rem_euclid(1.0))
        .collect();
    if phases.is_empty() {
        return Err(SimError::NoCrossings);
    }
    let (s, c) = phases.iter().fold((0.0, 0.0), |(s, c), &p| {
        (s + (TAU * p).sin(), c + (TAU * p).cos())
    });
    let mean = s.atan2(c) / TAU;
    let origin = mean - 0.5;

    let mut counts = vec![0u64; bins];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in phases.iter() {
        let rel = (p - origin).rem_euclid(1.0);
        lo = lo.min(rel);
        hi = hi.max(rel);
        counts[((rel / bin_width) as usize).min(bins - 1)] += 1;
    }
    Ok(EyeHistogram {
        bin_width,
        origin_ui: origin,
        counts,
        total_crossings: phases.len() as u64,
        min_ui: origin + lo,
        max_ui: origin + hi,
    })
}

/// Overlaid waveform segments of `span_ui` UI starting on each bit
/// boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeDiagram {
    pub samples_per_ui: usize,
    pub span_ui: usize,
    pub traces: Vec<Vec<f64>>,
}

impl EyeDiagram {
    pub fn time_ui(&self, k: usize) -> f64 {
        k as f64 / self.samples_per_ui as f64
    }
}

pub fn eye_diagram(w: &Waveform, span_ui: usize, max_traces: usize) -> EyeDiagram {
    let spu = w.samples_per_ui;
    let len = span_ui * spu + 1;
    let traces = (0..)
        .map(|i| i * spu)
        .take_while(|&start| start + len <= w.samples.len())
        .take(max_traces)
        .map(|start| w.samples[start..start + len].to_vec())
        .collect();
    EyeDiagram {
        samples_per_ui: spu,
        span_ui,
        traces,
    }
}

impl Waveform {
    /// Samples from `from_ui` onward, re-based to time zero.
    pub fn tail(&self, from_ui: usize) -> Waveform {
        let start = (from_ui * self.samples_per_ui).min(self.samples.len());
        Waveform {
            samples_per_ui: self.samples_per_ui,
            samples: self.samples[start..].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_wave_fills_one_bin() {
        let levels: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        let w = Waveform::square(&levels, 16);
        let h = crossing_histogram(&w, 0.5, 0.01).unwrap();
        assert_eq!(h.total_crossings, 63);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.regions(0.0).len(), 1);
        assert!(h.window_ui() < 1e-12);
    }

    #[test]
    fn boundary_cluster_is_not_split() {
        // alternate crossings at phases 0.975 and 0.025
        let edges: Vec<f64> = (0..10)
            .flat_map(|j| [2.0 * j as f64 + 0.975, 2.0 * j as f64 + 1.025])
            .collect();
        let samples = (0..=2000)
            .map(|k| (edges.iter().filter(|&&e| e <= k as f64 / 100.0).count() % 2) as f64)
            .collect();
        let w = Waveform {
            samples_per_ui: 100,
            samples,
        };
        let h = crossing_histogram(&w, 0.5, 0.01).unwrap();
        assert_eq!(h.total_crossings, 20);
        assert_eq!(h.regions(0.05).len(), 1);
        assert!((h.window_ui() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn interpolation_is_linear() {
        let w = Waveform {
            samples_per_ui: 16,
            samples: vec![0.0, 0.0, 1.0, 1.0, 0.25, 0.0],
        };
        let c = find_crossings(&w, 0.5);
        assert_eq!(c.len(), 2);
        assert!((c[0].time_ui - 1.5 / 16.0).abs() < 1e-15 && c[0].rising);
        assert!((c[1].time_ui - (3.0 + 0.5 / 0.75) / 16.0).abs() < 1e-15 && !c[1].rising);
    }

    #[test]
    fn region_merging() {
        let h = EyeHistogram {
            bin_width: 0.01,
            origin_ui: 0.0,
            counts: vec![0, 3, 0, 2, 0, 0, 0, 5, 5, 0],
            total_crossings: 15,
            min_ui: 0.01,
            max_ui: 0.09,
        };
        assert_eq!(h.regions(0.0).len(), 3);
        assert_eq!(h.regions(0.015).len(), 2);
        let r = h.regions(0.05);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].count, 15);
    }

    #[test]
    fn errors() {
        let w = Waveform::square(&[0.0, 0.0, 0.0], 16);
        assert!(matches!(
            crossing_histogram(&w, 0.5, 0.01),
            Err(SimError::NoCrossings)
        ));
        let short = Waveform::square(&[0.0], 16);
        assert!(crossing_histogram(&short, 0.5, 0.01).is_err());
        assert!(crossing_histogram(&w, 0.5, 0.3).is_err());
    }

    #[test]
    fn eye_traces_overlap_by_one_ui() {
        let levels: Vec<f64> = (0..10).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let w = Waveform::square(&levels, 16);
        let eye = eye_diagram(&w, 2, 100);
        assert_eq!(eye.traces.len(), 9);
        assert_eq!(eye.traces[0].len(), 33);
        assert_eq!(eye.traces[0][16..], eye.traces[1][..17]);
    }
}
