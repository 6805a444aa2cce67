mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landtopo::geo::CoordMode;
use landtopo::pipeline::LabelLevel;

/// Landslide failure-type classification from the persistent homology of
/// polygon outlines draped on a DEM.
///
/// Exit codes: 0 ok, 1 empty result, 2 I/O error, 3 invalid input or
/// config, 4 model mismatch. Logs go to stderr (RUST_LOG overrides the
/// level); data goes to files only.
#[derive(Parser, Debug)]
#[command(name = "landtopo", version)]
pub struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command that reads a run config.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run config. Every key is optional and unknown keys are
    /// rejected; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Master seed for every random choice [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Random-forest flags.
#[derive(Args, Debug, Clone, Default)]
pub struct ForestArgs {
    /// Trees per forest [default: 500].
    #[arg(long)]
    pub n_trees: Option<usize>,

    /// Features tried per split [default: ceil(sqrt(m)) for m features].
    #[arg(long)]
    pub p_features: Option<usize>,

    /// Maximum tree depth [default: unlimited].
    #[arg(long)]
    pub max_depth: Option<usize>,

    /// Minimum rows per leaf [default: 1].
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

/// Featurization flags; they must match between featurize and predict.
#[derive(Args, Debug, Clone, Default)]
pub struct FeaturizeArgs {
    /// Points resampled along each outline [default: 128].
    #[arg(long)]
    pub n_points: Option<usize>,

    /// Coordinate mode of the inventory; `geographic` is projected with a
    /// local equirectangular projection [default: the inventory's
    /// top-level "coords" member, else geographic].
    #[arg(long)]
    pub coords: Option<CoordMode>,

    /// Bins of the Betti and landscape curves on [0, cap] [default: 100].
    #[arg(long)]
    pub curve_bins: Option<usize>,

    /// Kernel width of the heat kernel and persistence image, `cap/K` or an
    /// absolute value in meters [default: cap/20].
    #[arg(long)]
    pub sigma_rule: Option<String>,

    /// Persistence engine [default: clearing].
    #[arg(long)]
    pub engine: Option<String>,

    /// Property holding the failure-type label [default: failure_type].
    #[arg(long)]
    pub label_key: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inventory + DEM to a feature CSV (18 topological columns, plus 8
    /// geometric ones with --with-geometry) and a `.meta.json` sidecar.
    /// Records that fail are logged and skipped; exit 1 if none succeed.
    Featurize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        feat: FeaturizeArgs,
        /// GeoJSON FeatureCollection of landslide polygons.
        #[arg(long)]
        inventory: PathBuf,
        /// ESRI ASCII elevation grid.
        #[arg(long)]
        dem: PathBuf,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
        /// Append the 8 geometric shape features.
        #[arg(long)]
        with_geometry: bool,
        /// Label column: failure class or sub-type [default: class].
        #[arg(long, value_enum, default_value_t = LabelLevelArg::Class)]
        label_level: LabelLevelArg,
    },

    /// Correlation pruning then recursive feature elimination, written as a
    /// JSON selection trace.
    Select {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        features: PathBuf,
        /// Output JSON trace.
        #[arg(long)]
        out: PathBuf,
        /// Features to keep [default: 6].
        #[arg(long)]
        k: Option<usize>,
        /// Absolute Pearson correlation above which the later of two
        /// columns is dropped [default: 0.9].
        #[arg(long)]
        threshold: Option<f64>,
    },

    /// Fits a forest and writes the model JSON plus a selection trace.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        features: PathBuf,
        /// Output model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Select K features (correlation prune at 0.9, then elimination;
        /// the config's selected_k, default 6, when given without a value).
        /// Without --select every column is used.
        #[arg(long, num_args = 0..=1, value_name = "K")]
        select: Option<Option<usize>>,
        /// Train on every row instead of down-sampling each class to the
        /// minority count [default: balanced].
        #[arg(long)]
        no_balance: bool,
        /// Selection trace path [default: <model>.selection.json].
        #[arg(long)]
        trace: Option<PathBuf>,
    },

    /// Repeated stratified k-fold cross-validation; JSON report plus a
    /// confusion-matrix CSV.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        features: PathBuf,
        /// Folds [default: 10].
        #[arg(long)]
        folds: Option<usize>,
        /// Repetitions of the whole k-fold split [default: 10].
        #[arg(long)]
        repeats: Option<usize>,
        /// Output JSON report.
        #[arg(long)]
        report: PathBuf,
        /// Confusion matrix CSV [default: <report>.confusion.csv].
        #[arg(long)]
        confusion: Option<PathBuf>,
        /// Comma-separated columns to evaluate [default: all].
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Train every fold on all its rows [default: balanced].
        #[arg(long)]
        no_balance: bool,
    },

    /// Labels an inventory with a trained model: the GeoJSON is written back
    /// with `predicted_class` and one `p_<class>` property per class.
    Predict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        feat: FeaturizeArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        dem: PathBuf,
        /// Output GeoJSON.
        #[arg(long)]
        out: PathBuf,
    },

    /// Scores records with a slide/flow/fall model and summarizes the class
    /// probabilities per group as quartiles.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        feat: FeaturizeArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        dem: PathBuf,
        /// Property whose value names each record's group [default: every
        /// record in group "all"].
        #[arg(long)]
        group_key: Option<String>,
        /// Output summary CSV.
        #[arg(long)]
        out: PathBuf,
        /// Per-record probabilities CSV [default: <out>.records.csv].
        #[arg(long)]
        records: Option<PathBuf>,
        /// Score every record, not only those labeled complex.
        #[arg(long)]
        all: bool,
    },

    /// Sample-efficiency sweep: train on N rows per class, score the rest.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        features: PathBuf,
        /// Comma-separated training sizes per class.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Random draws per size [default: 10].
        #[arg(long)]
        repeats: Option<usize>,
        /// Comma-separated columns to use [default: all].
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },

    /// Writes a labeled synthetic inventory (inventory.geojson), its
    /// elevation mosaic (dem.asc) and a manifest of every seed and
    /// parameter draw (manifest.json).
    Synth {
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Records per class.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Classes to generate.
        #[arg(long, value_delimiter = ',', default_value = "slide,flow,fall,complex")]
        classes: Vec<String>,
        /// Side of each record's tile in meters.
        #[arg(long, default_value_t = 640.0)]
        tile_size: f64,
        /// DEM cell size in meters.
        #[arg(long, default_value_t = 10.0)]
        cell_size: f64,
        /// Terrain override as CLASS=KIND (uniform_slope, channelized,
        /// cliff_talus); repeatable [default: slide=uniform_slope,
        /// flow=channelized, fall=cliff_talus, complex=channelized].
        #[arg(long = "dem-kind", value_name = "CLASS=KIND")]
        dem_kinds: Vec<String>,
    },
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelLevelArg {
    Class,
    SubType,
}

impl From<LabelLevelArg> for LabelLevel {
    fn from(v: LabelLevelArg) -> Self {
        match v {
            LabelLevelArg::Class => LabelLevel::Class,
            LabelLevelArg::SubType => LabelLevel::SubType,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
