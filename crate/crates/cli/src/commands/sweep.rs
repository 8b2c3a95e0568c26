use std::path::{Path, PathBuf};

use settle_core::jitter::{isi1_chain, WindowSpec};
use settle_core::markov::{transitions_for_confidence, ChainError};

use super::section;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Csv, OutputDir};

/// 1-bit-ISI chain per window size, started at the centre.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let s = section(&cfg.sweep, "sweep")?;
    if !(s.confidence > 0.0 && s.confidence < 1.0) {
        return Err(ChainError::ConfidenceOutOfRange(s.confidence).into());
    }
    let chains = s
        .window_steps
        .iter()
        .map(|&w| Ok((w, isi1_chain(w)?, WindowSpec::centered(w)?)))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut csv = Csv::new(&["window_steps", "n_at_confidence"]);
    for (w, chain, spec) in &chains {
        let n = transitions_for_confidence(
            chain,
            &chain.point_mass(spec.initial_offset_steps()),
            s.confidence,
        )?;
        csv.row(&[w.to_string(), n.to_string()]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_csv("sweep.csv", &csv)?;
    Ok(dir.written().to_vec())
}
