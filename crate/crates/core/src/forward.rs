//! Synthetic multi-static response (MSR) data.
//!
//! Entries follow the small-crack asymptotic model: with
//! `c = -2π / (N ln(ρ/2))`, each scatterer `z` contributes
//! `c exp(iω(θ_n ∓ θ_m)·z)` to entry `(m, n)`.

use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{check_rho, DirectionSet, ScattererCloud};

/// Phase convention of the MSR entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `exp(iω(θ_n − θ_m)·z)`: Hermitian.
    Paper,
    /// `exp(iω(θ_n + θ_m)·z)`: complex symmetric, right singular vectors
    /// are conjugates of the left ones.
    #[default]
    Symmetric,
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Convention::Paper),
            "symmetric" => Ok(Convention::Symmetric),
            other => Err(Error::invalid(format!(
                "unknown convention {other:?} (expected \"paper\" or \"symmetric\")"
            ))),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Paper => "paper",
            Convention::Symmetric => "symmetric",
        })
    }
}

/// Normalized MSR matrix at one angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct MsrMatrix {
    pub entries: DMatrix<Complex64>,
    pub omega: f64,
    pub convention: Convention,
}

impl MsrMatrix {
    pub fn zeros(n: usize, omega: f64, convention: Convention) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
            omega,
            convention,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Noise level and seed. `snr_db = +∞` means noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn new(snr_db: f64, seed: u64) -> Result<Self> {
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid("SNR must be finite or +inf"));
        }
        Ok(Self { snr_db, seed })
    }
}

/// Positive prefactor `-2π / (N ln(ρ/2))`.
pub fn msr_prefactor(n: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(-2.0 * std::f64::consts::PI / (n as f64 * (rho / 2.0).ln()))
}

/// Assembles the MSR matrix of a scatterer cloud at frequency `omega`.
pub fn assemble_msr(
    cloud: &ScattererCloud,
    omega: f64,
    dirs: &DirectionSet,
    convention: Convention,
) -> Result<MsrMatrix> {
    let n = dirs.len();
    let c = msr_prefactor(n, cloud.rho())?;
    let mut entries = DMatrix::<Complex64>::zeros(n, n);
    let mut phases = vec![Complex64::new(0.0, 0.0); n];
    for z in cloud.points() {
        for (p, d) in phases.iter_mut().zip(dirs.as_slice()) {
            *p = Complex64::from_polar(1.0, omega * d.dot(*z));
        }
        for col in 0..n {
            let pn = phases[col] * c;
            for row in 0..n {
                let pm = match convention {
                    Convention::Paper => phases[row].conj(),
                    Convention::Symmetric => phases[row],
                };
                entries[(row, col)] += pm * pn;
            }
        }
    }
    Ok(MsrMatrix {
        entries,
        omega,
        convention,
    })
}

/// Adds complex white Gaussian noise scaled so that
/// `10 log10(‖M‖²_F / ‖noise‖²_F) = snr_db` exactly.
///
/// The random stream is keyed by `(spec.seed, stream)`; pipelines pass the
/// frequency index as `stream` so each frequency draws independent noise.
pub fn add_noise(m: &MsrMatrix, spec: &NoiseSpec, stream: u64) -> MsrMatrix {
    if spec.snr_db == f64::INFINITY {
        return m.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let n = m.dim();
    // Column-major fill order, fixed for reproducibility.
    let noise = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let signal = m.frobenius_norm();
    let raw = noise.norm();
    let target = signal * 10f64.powf(-spec.snr_db / 20.0);
    let scale = if raw > 0.0 { target / raw } else { 0.0 };
    MsrMatrix {
        entries: &m.entries + noise * Complex64::new(scale, 0.0),
        omega: m.omega,
        convention: m.convention,
    }
}
