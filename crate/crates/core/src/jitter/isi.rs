use super::{update_direction, ModelError};
use crate::markov::{renormalize_row, AbsorbingChain, AbsorptionStats, StateLabel};

/// Most recent source event: a data crossing at one of the ISI trace
/// positions, or no transition for one (`X1`) or two (`X2`) cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LastEvent {
    A,
    B,
    C,
    D,
    X1,
    X2,
}

impl LastEvent {
    pub const ALL: [LastEvent; 6] = [
        LastEvent::A,
        LastEvent::B,
        LastEvent::C,
        LastEvent::D,
        LastEvent::X1,
        LastEvent::X2,
    ];

    /// Index into the trace's crossing positions, `None` for no transition.
    pub fn crossing_index(self) -> Option<usize> {
        match self {
            LastEvent::A => Some(0),
            LastEvent::B => Some(1),
            LastEvent::C => Some(2),
            LastEvent::D => Some(3),
            LastEvent::X1 | LastEvent::X2 => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            LastEvent::A => "A",
            LastEvent::B => "B",
            LastEvent::C => "C",
            LastEvent::D => "D",
            LastEvent::X1 => "X1",
            LastEvent::X2 => "X2",
        }
    }

    fn slot(self) -> usize {
        LastEvent::ALL.iter().position(|&e| e == self).unwrap()
    }

    /// The two equiprobable next events, derived from the source FSM.
    pub fn successors(self) -> [LastEvent; 2] {
        let entered: Vec<usize> = (0..8)
            .filter(|&s| {
                FSM_EDGES
                    .iter()
                    .any(|edges| edges.iter().any(|&(to, e)| to == s && e == self))
            })
            .collect();
        let first = entered[0];
        [FSM_EDGES[first][0].1, FSM_EDGES[first][1].1]
    }
}

/// `(b₋₁, b₀, b₁)` → crossing for one bit of ISI memory. A transition
/// happens when `b₀ ≠ b₁`; it crosses early (`A`) after a one-bit run and
/// late (`B`) after a longer run.
pub const ISI1_TABLE: [([u8; 3], Option<LastEvent>); 8] = [
    ([0, 0, 0], None),
    ([0, 0, 1], Some(LastEvent::B)),
    ([0, 1, 0], Some(LastEvent::A)),
    ([0, 1, 1], None),
    ([1, 0, 0], None),
    ([1, 0, 1], Some(LastEvent::A)),
    ([1, 1, 0], Some(LastEvent::B)),
    ([1, 1, 1], None),
];

/// Source FSM for two bits of ISI memory. State `s` holds the last three
/// bits (oldest in the high bit); `FSM_EDGES[s][bit] = (next state, event)`.
pub const FSM_EDGES: [[(usize, LastEvent); 2]; 8] = [
    [(0, LastEvent::X2), (1, LastEvent::D)],
    [(2, LastEvent::A), (3, LastEvent::X1)],
    [(4, LastEvent::X1), (5, LastEvent::B)],
    [(6, LastEvent::C), (7, LastEvent::X2)],
    [(0, LastEvent::X2), (1, LastEvent::C)],
    [(2, LastEvent::B), (3, LastEvent::X1)],
    [(4, LastEvent::X1), (5, LastEvent::A)],
    [(6, LastEvent::D), (7, LastEvent::X2)],
];

/// Discrete data traces: the crossing time of each transition is picked
/// from a small set of positions according to the preceding bits.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiTraceModel {
    order: u8,
    crossings: Vec<f64>,
}

impl IsiTraceModel {
    /// No ISI: every transition crosses at the same position.
    pub fn none(crossing: f64) -> Self {
        Self {
            order: 0,
            crossings: vec![crossing],
        }
    }

    pub fn one_bit(a: f64, b: f64) -> Result<Self, ModelError> {
        Self::with_order(1, vec![a, b])
    }

    pub fn two_bit(a: f64, b: f64, c: f64, d: f64) -> Result<Self, ModelError> {
        Self::with_order(2, vec![a, b, c, d])
    }

    fn with_order(order: u8, crossings: Vec<f64>) -> Result<Self, ModelError> {
        if crossings.windows(2).any(|w| !(w[0] < w[1])) || crossings.iter().any(|c| !c.is_finite())
        {
            return Err(ModelError::InvalidParameter(format!(
                "crossing positions must be finite and strictly increasing: {crossings:?}"
            )));
        }
        Ok(Self { order, crossings })
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn crossings(&self) -> &[f64] {
        &self.crossings
    }

    /// Number of past bits consulted besides the incoming one.
    pub fn history_len(&self) -> usize {
        self.order as usize + 1
    }

    /// Event produced when `next` follows `history` (oldest bit first,
    /// `history_len()` bits).
    pub fn event(&self, history: &[u8], next: u8) -> LastEvent {
        debug_assert_eq!(history.len(), self.history_len());
        let current = history[history.len() - 1];
        match self.order {
            0 => {
                if current != next {
                    LastEvent::A
                } else {
                    LastEvent::X1
                }
            }
            1 => {
                let key = [history[0], history[1], next];
                ISI1_TABLE
                    .iter()
                    .find(|(bits, _)| *bits == key)
                    .and_then(|&(_, e)| e)
                    .unwrap_or(LastEvent::X1)
            }
            _ => {
                let state = ((history[0] as usize) << 2)
                    | ((history[1] as usize) << 1)
                    | history[2] as usize;
                FSM_EDGES[state][next as usize].1
            }
        }
    }

    /// Crossing position of the transition into `next`, if any.
    pub fn crossing(&self, history: &[u8], next: u8) -> Option<f64> {
        self.event(history, next)
            .crossing_index()
            .map(|k| self.crossings[k])
    }
}

/// Birth–death chain for one bit of ISI memory on a window of
/// `width_steps` steps: crossing `A` at the left edge, `B` at the right edge,
/// both edges absorbing.
///
/// Row probabilities come from enumerating the eight equiprobable bit
/// patterns and applying the phase-detector rule.
pub fn isi1_chain(width_steps: usize) -> Result<AbsorbingChain, ModelError> {
    if width_steps < 2 {
        return Err(ModelError::WindowTooNarrow {
            min: 2,
            got: width_steps,
        });
    }
    let trace = IsiTraceModel::one_bit(0.0, width_steps as f64)?;
    let mut rows = Vec::with_capacity(width_steps + 1);
    rows.push(vec![(0, 1.0)]);
    for p in 1..width_steps {
        let mut row = Vec::new();
        for (bits, _) in ISI1_TABLE {
            let weight = 1.0 / 8.0;
            match trace.crossing(&bits[..2], bits[2]) {
                None => row.push((p, weight)),
                Some(c) => match update_direction(c, p as f64) {
                    Some(d) => row.push(((p as i64 + d as i64) as usize, weight)),
                    None => {
                        row.push((p - 1, weight / 2.0));
                        row.push((p + 1, weight / 2.0));
                    }
                },
            }
        }
        renormalize_row(p, &mut row)?;
        rows.push(row);
    }
    rows.push(vec![(width_steps, 1.0)]);
    Ok(AbsorbingChain::new(rows, &[0, width_steps])?)
}

/// Sub-window widths `A–B`, `B–C`, `C–D` in loop steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubWindows {
    pub ab: usize,
    pub bc: usize,
    pub cd: usize,
}

impl SubWindows {
    pub fn new(ab: usize, bc: usize, cd: usize) -> Result<Self, ModelError> {
        if ab == 0 || bc == 0 || cd == 0 {
            return Err(ModelError::EmptySubWindow([ab, bc, cd]));
        }
        Ok(Self { ab, bc, cd })
    }

    /// Converts widths given as fractions of the unit interval, with the
    /// fine step `tau_ui` (UI) and a loop step of `step_tau` fine steps,
    /// rounding each to the nearest whole loop step.
    pub fn from_ui_fractions(
        fractions: [f64; 3],
        tau_ui: f64,
        step_tau: f64,
    ) -> Result<Self, ModelError> {
        let steps = fractions.map(|f| (f / tau_ui / step_tau).round().max(0.0) as usize);
        Self::new(steps[0], steps[1], steps[2])
    }

    pub fn total(&self) -> usize {
        self.ab + self.bc + self.cd
    }

    /// Crossing positions `A, B, C, D` measured from `A`.
    pub fn crossings(&self) -> [usize; 4] {
        [0, self.ab, self.ab + self.bc, self.total()]
    }
}

/// Extended-state chain for two bits of ISI memory.
///
/// State space: clock positions strictly between `A` and `D`, each paired
/// with the last source event. State `0` is the left edge, the last state
/// the right edge; transient state `(p, e)` sits at `1 + 6(p−1) + slot(e)`.
#[derive(Debug, Clone)]
pub struct Isi2Chain {
    pub chain: AbsorbingChain,
    pub widths: SubWindows,
}

impl Isi2Chain {
    pub fn state(&self, position: usize, memory: LastEvent) -> usize {
        debug_assert!(position > 0 && position < self.widths.total());
        1 + 6 * (position - 1) + memory.slot()
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        1..self.widths.total()
    }

    /// Per-memory-state means at one clock position, in `LastEvent::ALL` order.
    pub fn memory_means(&self, stats: &AbsorptionStats, position: usize) -> [f64; 6] {
        LastEvent::ALL.map(|e| stats.mean_of(self.state(position, e)))
    }

    /// Mean absorption time per clock position: the plain average over the
    /// six memory states.
    pub fn position_means(&self, stats: &AbsorptionStats) -> Vec<(usize, f64)> {
        self.position_average(|s| stats.mean_of(s))
    }

    /// Standard deviation per position for a start drawn uniformly over
    /// the six memory states (mixture of the per-state distributions).
    pub fn position_stds(&self, stats: &AbsorptionStats) -> Vec<(usize, f64)> {
        self.positions()
            .map(|p| {
                let states = LastEvent::ALL.map(|e| self.state(p, e));
                let mean: f64 = states.iter().map(|&s| stats.mean_of(s)).sum::<f64>() / 6.0;
                let second: f64 = states
                    .iter()
                    .map(|&s| stats.variance_of(s) + stats.mean_of(s).powi(2))
                    .sum::<f64>()
                    / 6.0;
                (p, (second - mean * mean).max(0.0).sqrt())
            })
            .collect()
    }

    fn position_average(&self, f: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
        self.positions()
            .map(|p| {
                let sum: f64 = LastEvent::ALL.iter().map(|&e| f(self.state(p, e))).sum();
                (p, sum / 6.0)
            })
            .collect()
    }

    /// Initial distribution spread evenly over the six memory states of `position`.
    pub fn uniform_initial(&self, position: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.chain.n_states()];
        for e in LastEvent::ALL {
            v[self.state(position, e)] = 1.0 / 6.0;
        }
        v
    }
}

pub fn isi2_chain(widths: SubWindows) -> Result<Isi2Chain, ModelError> {
    let widths = SubWindows::new(widths.ab, widths.bc, widths.cd)?;
    let total = widths.total();
    let crossings = widths.crossings();
    let n_transient = 6 * (total - 1);
    let left = 0;
    let right = n_transient + 1;
    let index = |p: i64, e: LastEvent| -> usize {
        if p <= 0 {
            left
        } else if p >= total as i64 {
            right
        } else {
            1 + 6 * (p as usize - 1) + e.slot()
        }
    };

    let mut rows = vec![Vec::new(); n_transient + 2];
    let mut labels = vec![StateLabel::at(0.0); n_transient + 2];
    rows[left] = vec![(left, 1.0)];
    rows[right] = vec![(right, 1.0)];
    labels[right] = StateLabel::at(total as f64);
    for p in 1..total {
        for memory in LastEvent::ALL {
            let from = index(p as i64, memory);
            labels[from] = StateLabel {
                position: p as f64,
                memory: Some(memory.tag()),
            };
            let mut row = Vec::with_capacity(3);
            for next in memory.successors() {
                match next.crossing_index() {
                    None => row.push((index(p as i64, next), 0.5)),
                    Some(k) => match update_direction(crossings[k] as f64, p as f64) {
                        Some(d) => row.push((index(p as i64 + d as i64, next), 0.5)),
                        None => {
                            row.push((index(p as i64 - 1, next), 0.25));
                            row.push((index(p as i64 + 1, next), 0.25));
                        }
                    },
                }
            }
            renormalize_row(from, &mut row)?;
            rows[from] = row;
        }
    }
    let chain = AbsorbingChain::new(rows, &[left, right])?.with_labels(labels)?;
    Ok(Isi2Chain { chain, widths })
}
