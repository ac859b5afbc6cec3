use crate::error::Result;
use crate::forward::{add_noise, assemble_msr, MsrMatrix, NoiseSpec};
use crate::imaging::{evaluate_map, ImagingMap};
use crate::scene::{discretize, make_directions, make_frequencies, ScattererCloud};

use super::ScenarioConfig;

/// Everything a scenario run produces in memory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub cloud: ScattererCloud,
    /// Noisy MSR matrices, one per frequency.
    pub matrices: Vec<MsrMatrix>,
    pub map: ImagingMap,
}

/// Scene → MSR per frequency → noise → imaging map.
///
/// Noise for frequency `k` is drawn from stream `k` of the configured seed,
/// so the result depends only on the configuration.
pub fn run_pipeline(cfg: &ScenarioConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let cloud = discretize(&cfg.cracks, cfg.discretization_spacing)?;
    let dirs = make_directions(cfg.n)?;
    let freqs = make_frequencies(cfg.lambda_min, cfg.lambda_max, cfg.k)?;
    let noise = NoiseSpec::new(cfg.snr_db, cfg.seed)?;
    let matrices = freqs
        .omegas()
        .iter()
        .enumerate()
        .map(|(k, &omega)| {
            let clean = assemble_msr(&cloud, omega, &dirs, cfg.convention)?;
            Ok(add_noise(&clean, &noise, k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = evaluate_map(&cfg.grid, &matrices, &dirs, cfg.tau)?;
    Ok(PipelineOutput {
        cloud,
        matrices,
        map,
    })
}
