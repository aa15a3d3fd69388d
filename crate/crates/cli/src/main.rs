mod error;
mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chromascreen::adapt::{optimize_palette, select_scheme, AdaptationResult, OptimizeOptions, Palette};
use chromascreen::color::{simulate_image, CvdKind, CvdProfile};
use chromascreen::engine::{classify, create_battery, simulated_respondent};
use chromascreen::plates::render_svg;
use chromascreen::ppm;
use chromascreen_service::adaptation::read_scheme_dir;
use chromascreen_service::{CatalogError, SeedMode, ServeError, ServerConfig};
use clap::{Parser, Subcommand};
use serde::Serialize;

use error::CliError;
use files::{print_json, read_bytes, read_json, svg_name, write_bytes, KeyFile, ResponseFile};

/// Color vision screening with generated pseudoisochromatic plates, and
/// palette adaptation for the deficiency found.
#[derive(Debug, Parser)]
#[command(name = "chromascreen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a PPM image as seen with a color vision deficiency.
    Simulate {
        #[arg(long)]
        kind: CvdKind,
        #[arg(long)]
        severity: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Generate a plate battery: one SVG per plate plus key.json.
    Battery {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a set of responses against a battery key.
    Classify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        responses: PathBuf,
    },
    /// Answer a battery as a simulated viewer would.
    Respond {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        kind: CvdKind,
        #[arg(long)]
        severity: f64,
    },
    /// Recolor a palette for a viewer, optionally choosing a scheme first.
    Adapt {
        #[arg(long)]
        palette: PathBuf,
        #[arg(long)]
        kind: CvdKind,
        #[arg(long)]
        severity: f64,
        /// Directory of alternative schemes to select from.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Optimizer options as JSON.
        #[arg(long)]
        options: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        default_palette: Option<PathBuf>,
        /// Every session uses this battery seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allowed CORS origin; may be repeated. Any origin when absent.
        #[arg(long = "allow-origin")]
        allow_origin: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { kind, severity, input, output } => simulate(profile(kind, severity)?, &input, &output),
        Command::Battery { seed, out } => battery(seed, &out),
        Command::Classify { key, responses } => {
            let key: KeyFile = read_json(&key)?;
            key.battery.validate()?;
            let responses: ResponseFile = read_json(&responses)?;
            if responses.battery_id != key.battery.id {
                return Err(CliError::mismatch(format!(
                    "responses are for battery {}, key is for {}",
                    responses.battery_id, key.battery.id
                )));
            }
            print_json(&classify(&key.battery, &responses.responses)?)
        }
        Command::Respond { key, kind, severity } => {
            let profile = profile(kind, severity)?;
            let key: KeyFile = read_json(&key)?;
            key.battery.validate()?;
            let responses = key.battery.plates.iter().map(|p| simulated_respondent(profile, p)).collect();
            print_json(&ResponseFile {
                battery_id: key.battery.id,
                responses,
            })
        }
        Command::Adapt { palette, kind, severity, catalog, options } => {
            let profile = profile(kind, severity)?;
            let palette: Palette = read_json(&palette)?;
            let options: OptimizeOptions = match options {
                Some(path) => read_json(&path)?,
                None => OptimizeOptions::default(),
            };
            print_json(&adapt(palette, profile, catalog.as_deref(), &options)?)
        }
        Command::Serve { port, state, catalog, default_palette, seed, allow_origin } => {
            let mut config = ServerConfig::new(port, state);
            config.catalog_dir = catalog;
            config.default_palette = default_palette;
            config.seed_mode = seed.map_or(SeedMode::PerSession, SeedMode::Fixed);
            config.allowed_origins = allow_origin;
            serve(config)
        }
    }
}

fn profile(kind: CvdKind, severity: f64) -> Result<CvdProfile, CliError> {
    CvdProfile::new(kind, severity).map_err(|e| CliError::usage(e.to_string()))
}

fn simulate(profile: CvdProfile, input: &Path, output: &Path) -> Result<(), CliError> {
    let bytes = read_bytes(input)?;
    let image = ppm::decode(&bytes).map_err(|e| CliError::usage(format!("{}: {e}", error::display(input))))?;
    write_bytes(output, &ppm::encode(&simulate_image(&image, profile)))
}

fn battery(seed: u64, out: &Path) -> Result<(), CliError> {
    let battery = create_battery(seed, None)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    for plate in &battery.plates {
        let path = out.join(svg_name(&plate.id));
        std::fs::write(&path, render_svg(plate)).map_err(|e| CliError::io(&path, e))?;
    }
    let key = KeyFile::new(battery);
    let path = out.join("key.json");
    let text = serde_json::to_string_pretty(&key).map_err(|e| CliError::usage(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    eprintln!("wrote {} plates to {}", key.files.len(), out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct Adapted {
    /// Chosen candidate when a catalog was given; 0 is the input palette.
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    #[serde(flatten)]
    result: AdaptationResult,
}

fn adapt(
    palette: Palette,
    profile: CvdProfile,
    catalog: Option<&Path>,
    options: &OptimizeOptions,
) -> Result<Adapted, CliError> {
    let Some(dir) = catalog else {
        return Ok(Adapted {
            scheme_index: None,
            scheme: None,
            result: optimize_palette(&palette, profile, options)?,
        });
    };
    let schemes = read_scheme_dir(dir).map_err(catalog_error)?;
    let candidates: Vec<Palette> = std::iter::once(palette).chain(schemes).collect();
    let (index, _) = select_scheme(&candidates, profile)?;
    let chosen = &candidates[index];
    Ok(Adapted {
        scheme_index: Some(index),
        scheme: Some(chosen.name().to_string()),
        result: optimize_palette(chosen, profile, options)?,
    })
}

fn catalog_error(e: CatalogError) -> CliError {
    match e {
        CatalogError::Io { path, source } => CliError::io(&path, source),
        CatalogError::Parse { .. } => CliError::usage(e.to_string()),
    }
}

fn serve(config: ServerConfig) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::environment(e.to_string()))?;
    let port = config.port;
    eprintln!("listening on http://127.0.0.1:{port}");
    runtime
        .block_on(chromascreen_service::serve(config, chromascreen_service::shutdown_signal()))
        .map_err(|e| match e {
            ServeError::Port => CliError::usage(e.to_string()),
            ServeError::Catalog(c) => catalog_error(c),
            ServeError::State(_) => CliError { code: error::IO, message: e.to_string() },
            ServeError::Bind { .. } | ServeError::Io(_) => CliError::environment(e.to_string()),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["chromascreen", "respond", "--key", "-", "--kind", "deutan", "--severity", "1"]).unwrap();
        assert!(matches!(cli.command, Command::Respond { kind: CvdKind::Deutan, .. }));
        assert!(Cli::try_parse_from(["chromascreen", "respond", "--key", "-", "--kind", "purple", "--severity", "1"]).is_err());
        assert!(Cli::try_parse_from(["chromascreen"]).is_err());
    }

    #[test]
    fn bad_severity_is_a_usage_error() {
        assert_eq!(profile(CvdKind::Protan, 1.5).unwrap_err().code, error::USAGE);
    }
}
