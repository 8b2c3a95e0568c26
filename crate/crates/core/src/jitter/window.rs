use super::ModelError;

/// Window of susceptibility on the step grid, with the clock's starting
/// offset from the left edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    width_steps: usize,
    initial_offset_steps: usize,
}

impl WindowSpec {
    pub fn new(width_steps: usize, initial_offset_steps: usize) -> Result<Self, ModelError> {
        if width_steps == 0 {
            return Err(ModelError::WindowTooNarrow { min: 1, got: 0 });
        }
        if initial_offset_steps == 0 || initial_offset_steps >= width_steps {
            return Err(ModelError::OffsetOutsideWindow {
                offset: initial_offset_steps,
                width: width_steps,
            });
        }
        Ok(Self {
            width_steps,
            initial_offset_steps,
        })
    }

    /// Clock at `floor(width / 2)`; for odd widths both middle positions
    /// are equivalent by symmetry.
    pub fn centered(width_steps: usize) -> Result<Self, ModelError> {
        Self::new(width_steps, width_steps / 2)
    }

    pub fn width_steps(&self) -> usize {
        self.width_steps
    }

    pub fn initial_offset_steps(&self) -> usize {
        self.initial_offset_steps
    }

    /// Distance from the clock to the right edge.
    pub fn gamma(&self) -> usize {
        self.width_steps - self.initial_offset_steps
    }

    /// Position on the symmetric axis running from `-width/2` to `+width/2`.
    pub fn centered_position(&self) -> f64 {
        self.initial_offset_steps as f64 - self.width_steps as f64 / 2.0
    }
}
