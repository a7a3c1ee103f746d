mod plot;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use msh_core::bench::{
    load_dataset, load_labels, misclassification_error, presets, run_experiment, write_dataset, write_labels,
    write_summary_table, ExperimentInput, ExperimentSummary, Generator, Layout, SyntheticSpec,
};
use msh_core::{msh_fit_with_graph, ModelKind, MshConfig};

#[derive(Parser)]
#[command(name = "msh", version, about = "Robust multi-structure model fitting by mode seeking on hypergraphs")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "MSH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled dataset as CSV.
    Generate(GenerateArgs),
    /// Fit models to a CSV dataset.
    Fit(FitArgs),
    /// Misclassification error (%) of predicted labels against ground truth.
    ///
    /// Either file may be a label CSV or a labeled dataset.
    Eval { predicted: PathBuf, ground_truth: PathBuf },
    /// Repeated runs over a benchmark and a Std./Avg./Min. error table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DataPreset {
    /// 3D lines, 100 inliers each plus 400 outliers.
    Lines3d,
    /// Five planar lines through one point.
    Star5,
    /// Correspondences on three planes under distinct homographies.
    PlanarScene,
    /// Planar circles.
    Circles,
    /// Planar lines placed at random.
    Lines2d,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    preset: DataPreset,
    /// Number of structures.
    #[arg(long)]
    structures: Option<usize>,
    /// Inliers per structure.
    #[arg(long)]
    inliers: Option<usize>,
    #[arg(long)]
    outliers: Option<usize>,
    /// Inlier noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Line2d,
    Circle,
    Line3d,
    Homography,
    Fundamental,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Line2d => ModelKind::Line2D,
            Model::Circle => ModelKind::Circle2D,
            Model::Line3d => ModelKind::Line3D,
            Model::Homography => ModelKind::Homography,
            Model::Fundamental => ModelKind::Fundamental,
        }
    }
}

#[derive(Args)]
struct RunConfigArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Hypotheses to generate [default: 5000 for lines and circles, 10000 for
    /// homographies, 20000 for fundamental matrices]
    #[arg(long)]
    hypotheses: Option<usize>,
    /// K of the iterative scale estimator; the K-th smallest residual anchors
    /// each hypothesis scale.
    #[arg(long, default_value_t = 10)]
    k_ikose: usize,
    /// Inlier gate as a multiple of the estimated scale.
    #[arg(long, default_value_t = 2.5)]
    e_threshold: f64,
    /// Fraction of vertices kept by weight-aware sampling.
    #[arg(long, default_value_t = 0.15)]
    was_fraction: f64,
    /// Use every vertex instead of weight-aware sampling.
    #[arg(long)]
    no_was: bool,
    /// Leading entries of the distance trace searched for the largest drop.
    #[arg(long, default_value_t = 100)]
    drop_window: usize,
    /// Proximity sampling sigma [default: a tenth of the data bounding diagonal]
    #[arg(long)]
    proximity_sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Least-squares refit of each mode on its inliers.
    #[arg(long)]
    refine: bool,
}

impl RunConfigArgs {
    fn config(&self) -> MshConfig {
        let mut c = MshConfig::new(self.model.into()).with_seed(self.seed);
        if let Some(h) = self.hypotheses {
            c.hypotheses = h;
        }
        c.k = self.k_ikose;
        c.threshold = self.e_threshold;
        c.was_fraction = self.was_fraction;
        c.use_was = !self.no_was;
        c.drop_window = self.drop_window;
        c.proximity_sigma = self.proximity_sigma;
        c.refine = self.refine;
        c
    }
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV (one point per row, optional trailing label column).
    input: PathBuf,
    #[command(flatten)]
    run: RunConfigArgs,
    /// Fitting result as JSON; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Point labels as CSV (0 marks outliers).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Sorted minimum-distance trace as JSON.
    #[arg(long)]
    mtd_trace: Option<PathBuf>,
    /// Full hypergraph as JSON.
    #[arg(long)]
    hypergraph: Option<PathBuf>,
    /// SVG scatter of the labeled points.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    /// 3, 4, 5 and 6 lines in 3D.
    Lines3d,
    Star5,
    Planar,
    /// A labeled CSV given with --data and --model.
    Custom,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    table: Table,
    #[arg(long, default_value_t = 50)]
    repeats: usize,
    /// Master seed; data and fitting seeds of every repeat derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the hypothesis budget.
    #[arg(long)]
    hypotheses: Option<usize>,
    /// Override K of the scale estimator.
    #[arg(long)]
    k_ikose: Option<usize>,
    #[arg(long, required_if_eq("table", "custom"))]
    data: Option<PathBuf>,
    #[arg(long, value_enum, required_if_eq("table", "custom"))]
    model: Option<Model>,
    /// Per-repeat records as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Summary table as CSV; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Fit(args) => fit(args),
        Command::Eval { predicted, ground_truth } => eval(&predicted, &ground_truth),
        Command::Bench(args) => bench(args),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (generator, mut spec) = match args.preset {
        DataPreset::Lines3d => (Generator::Lines { dim: 3 }, SyntheticSpec::lines3d(args.structures.unwrap_or(3), 0)),
        DataPreset::Star5 => (Generator::Lines { dim: 2 }, SyntheticSpec::star5(0)),
        DataPreset::PlanarScene => (Generator::PlanarScene, SyntheticSpec::planar_scene(0)),
        DataPreset::Circles => (Generator::Circles, planar_spec(3, 0.5)),
        DataPreset::Lines2d => (Generator::Lines { dim: 2 }, planar_spec(3, 0.5)),
    };
    if let Some(s) = args.structures {
        spec.structure_count = s;
    }
    if let Some(n) = args.inliers {
        spec.inliers_per_structure = n;
    }
    if let Some(n) = args.outliers {
        spec.outlier_count = n;
    }
    if let Some(s) = args.sigma {
        spec.inlier_sigma = s;
    }
    spec.rng_seed = args.seed;
    let data = generator.generate(&spec)?;
    let mut out = sink(args.out.as_deref())?;
    write_dataset(&data, &mut out)?;
    out.flush()?;
    eprintln!("wrote {} points, {} structures", data.points.len(), spec.structure_count);
    Ok(())
}

fn planar_spec(structures: usize, sigma: f64) -> SyntheticSpec {
    SyntheticSpec {
        structure_count: structures,
        inliers_per_structure: 100,
        inlier_counts: None,
        outlier_count: 200,
        inlier_sigma: sigma,
        domain: vec![(0.0, 100.0); 2],
        layout: Layout::Random,
        rng_seed: 0,
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let data = load_dataset(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let config = args.run.config();
    let (result, graph) = msh_fit_with_graph(&data.points, &config)?;
    eprintln!(
        "{} modes from {} vertices ({} sampled) in {:.1} ms",
        result.mode_count(),
        result.vertex_count,
        result.sampled_count,
        result.timing.total.as_secs_f64() * 1e3
    );

    let mut out = sink(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &result)?;
    writeln!(out)?;
    out.flush()?;

    if let Some(p) = &args.labels {
        let mut w = create(p)?;
        write_labels(&result.labels, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &args.mtd_trace {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &result.mtd_trace)?;
        w.flush()?;
    }
    if let Some(p) = &args.hypergraph {
        let mut w = create(p)?;
        graph.write_json(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &args.plot {
        let mut w = create(p)?;
        plot::write_svg(&data.points, &result, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn eval(predicted: &Path, ground_truth: &Path) -> Result<()> {
    let pred = load_labels(predicted).with_context(|| format!("reading {}", predicted.display()))?;
    let gt = load_labels(ground_truth).with_context(|| format!("reading {}", ground_truth.display()))?;
    println!("{:.2}", misclassification_error(&pred, &gt)?);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut jobs = match args.table {
        Table::Lines3d => presets::lines3d_table(),
        Table::Star5 => vec![presets::star5()],
        Table::Planar => vec![presets::planar_scene()],
        Table::Custom => {
            let (Some(path), Some(model)) = (&args.data, args.model) else {
                bail!("custom benchmarks need --data and --model");
            };
            let data = load_dataset(path).with_context(|| format!("reading {}", path.display()))?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            vec![presets::Preset { name, input: ExperimentInput::Dataset(data), config: MshConfig::new(model.into()) }]
        }
    };
    let mut summaries: Vec<ExperimentSummary> = Vec::new();
    for job in &mut jobs {
        if let Some(h) = args.hypotheses {
            job.config.hypotheses = h;
        }
        if let Some(k) = args.k_ikose {
            job.config.k = k;
        }
        let s = run_experiment(job.name.clone(), &job.input, &job.config, args.repeats, args.seed)?;
        eprintln!(
            "{}: avg {:.2}% std {:.2} min {:.2}, correct count {:.0}%, {} failed",
            s.name,
            s.avg,
            s.std,
            s.min,
            100.0 * s.correct_count_rate,
            s.failures
        );
        summaries.push(s);
    }
    if let Some(p) = &args.json {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &summaries)?;
        w.flush()?;
    }
    let mut out = sink(args.csv.as_deref())?;
    write_summary_table(&summaries, "MSH", &mut out)?;
    out.flush()?;
    Ok(())
}
