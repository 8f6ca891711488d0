use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use visdiv::config::RunConfig;
use visdiv::features::Attribute;
use visdiv::pipeline::Pipeline;
use visdiv::{Error, Result};

#[derive(Parser)]
#[command(name = "visdiv", version, about = "Visual diversity of concept image sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter the manifest by size and cap, and drop exact duplicates
    Ingest(Common),
    /// Train the SURF visual vocabulary
    Codebook(Common),
    /// Compute the requested attributes for every ingested image
    Extract(Common),
    /// Select images per concept and compute eigenspectra
    Diversity(Common),
    /// Abstract vs. concrete classification
    Classify(Common),
    /// Concreteness-rating regression
    Regress(Common),
    /// Nearest-neighbour analysis
    Neighbors(Common),
    /// Corpus statistics and annotator agreement
    Stats {
        #[command(flatten)]
        common: Common,
        /// Ratings table (one row per item, one column per annotator)
        #[arg(long)]
        agreement: Option<PathBuf>,
    },
    /// Run every step and write summary.md
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        agreement: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    norms: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Images per concept
    #[arg(long)]
    condition: Option<usize>,
    /// Comma-separated attribute names, e.g. Color,HOG,ViT
    #[arg(long, value_delimiter = ',')]
    attributes: Option<Vec<Attribute>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => match (&self.manifest, &self.norms) {
                (Some(m), Some(n)) => RunConfig::new(m, n),
                _ => return Err(Error::Validation("pass --config, or both --manifest and --norms".into())),
            },
        };
        if let Some(m) = &self.manifest {
            cfg.manifest = m.clone();
        }
        if let Some(n) = &self.norms {
            cfg.norms = n.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.condition {
            cfg.condition = c;
        }
        if let Some(a) = &self.attributes {
            cfg.attributes = a.clone();
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<()> {
    let (common, agreement) = match &command {
        Command::Stats { common, agreement } | Command::Report { common, agreement } => (common, agreement.as_deref()),
        Command::Ingest(c)
        | Command::Codebook(c)
        | Command::Extract(c)
        | Command::Diversity(c)
        | Command::Classify(c)
        | Command::Regress(c)
        | Command::Neighbors(c) => (c, None),
    };
    let p = Pipeline::new(common.config()?)?;
    match command {
        Command::Ingest(_) => {
            let s = p.ingest()?;
            println!("kept {} of {} images", s.kept, s.input_records);
        }
        Command::Codebook(_) => {
            let s = p.codebook()?;
            println!("codebook k={} from {} descriptors", s.k, s.training_size);
        }
        Command::Extract(_) => {
            let s = p.extract()?;
            for (a, e) in &s.attributes {
                println!("{a}: {} rows ({} new, {} failed)", e.rows, e.new_rows, e.failures);
            }
        }
        Command::Diversity(_) => {
            let s = p.diversity()?;
            println!("{} concepts selected, {} dropped", s.concepts.len(), s.dropped.len());
        }
        Command::Classify(_) => {
            for r in p.classify()? {
                println!("{} / {:?}: weighted F1 {:.3}", r.feature_set, r.model, r.report.weighted_f1);
            }
        }
        Command::Regress(_) => {
            for r in p.regress()? {
                println!("{}: rho {:.3}, rmse {:.3}", r.feature_set, r.report.spearman_rho, r.report.rmse);
            }
        }
        Command::Neighbors(_) => {
            for r in p.neighbors()? {
                println!("{}: {:?}", r.attribute, r.per_class);
            }
        }
        Command::Stats { .. } => {
            let s = p.stats(agreement)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::Report { .. } => {
            println!("{}", p.report(agreement)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
