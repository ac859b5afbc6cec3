use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crack_imaging::cli::{export_map, parse_config, run_pipeline};
use crack_imaging::Error;

/// Images perfectly conducting cracks from synthetic multi-static data.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(short, long)]
    config: PathBuf,

    /// Output base path; writes <base>.csv, <base>.json and optionally <base>.pgm.
    #[arg(short, long, default_value = "map")]
    output: PathBuf,

    /// Override the noise seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the SNR in dB ("inf" disables noise).
    #[arg(long)]
    snr: Option<String>,

    /// Resample the grid to RES x RES points over the same extent.
    #[arg(long, value_name = "RES")]
    grid_resolution: Option<usize>,

    /// Also write a PGM preview.
    #[arg(long)]
    pgm: bool,
}

fn run(args: &Args) -> Result<(), Error> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(snr) = &args.snr {
        cfg.snr_db = match snr.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => f64::INFINITY,
            s => s
                .parse()
                .map_err(|_| Error::Config(format!("--snr: cannot parse {snr:?}")))?,
        };
    }
    if let Some(res) = args.grid_resolution {
        cfg.set_grid_resolution(res)?;
    }
    cfg.validate()?;

    let out = run_pipeline(&cfg)?;
    let paths = export_map(&out.map, &cfg, &args.output, args.pgm)?;
    eprintln!(
        "{} scatterers, ranks {:?}, peak |E| = {:.6e}",
        out.cloud.len(),
        out.map.metadata.ranks,
        out.map.max_magnitude()
    );
    eprintln!("wrote {}", paths.csv.display());
    eprintln!("wrote {}", paths.metadata.display());
    if let Some(p) = paths.pgm {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
