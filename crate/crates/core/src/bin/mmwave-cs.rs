use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mmwave_cs::harness::{
    self, config, emit_csv, memory_footprint, run_nmse_sweep, run_runtime_sweep, run_trial,
    summarize, Method, SweepSpec, Workspace,
};
use mmwave_cs::Error;

macro_rules! overrides {
    ($($field:ident),* $(,)?) => {
        /// Every config-file key as a flag; flags win over the file.
        #[derive(Args, Debug, Default)]
        struct Overrides {
            /// Flat key=value file applied before the flags
            #[arg(long, global = true)]
            config: Option<PathBuf>,
            /// Run one noiseless point instead of the SNR list
            #[arg(long, global = true)]
            noiseless: bool,
            $(
                #[arg(long, global = true, allow_hyphen_values = true, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl Overrides {
            fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field), x.as_str()));
                    }
                )*
                if self.noiseless {
                    v.push(("noiseless", "true"));
                }
                v
            }
        }
    };
}

overrides!(
    n_t,
    n_r,
    n_rf,
    q_slots,
    n_x,
    grid_n,
    n_paths,
    spacing_ratio,
    sigma_p2,
    sigma_n2,
    angle_mode,
    pilots,
    seed,
    snr,
    trials,
    methods,
    grid_sizes,
    out,
    ls_grid_n,
    stop,
    epsilon_rel,
    aggregation,
    element_cap,
    ls1d_gram_cap,
);

#[derive(Parser, Debug)]
#[command(name = "mmwave-cs", version, about = "Compressive mmWave channel estimation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// NMSE versus SNR for every requested method; writes CSV and prints a summary
    SweepNmse,
    /// Wall time versus grid size at 10 dB with n_x = n_y = grid_n
    SweepRuntime,
    /// One trial of one method at the highest SNR point (or noiseless)
    Single {
        #[arg(long)]
        method: Method,
    },
    /// Complex-element counts of the 1-D sensing matrix and the factored dictionaries
    Footprint,
}

fn build_spec(o: &Overrides) -> mmwave_cs::Result<SweepSpec> {
    let mut spec = match &o.config {
        Some(path) => config::load(path)?,
        None => SweepSpec::default(),
    };
    for (k, v) in o.pairs() {
        config::apply(&mut spec, k, v)?;
    }
    Ok(spec)
}

fn run(cli: &Cli) -> mmwave_cs::Result<()> {
    let spec = build_spec(&cli.overrides)?;
    match &cli.command {
        Command::SweepNmse => {
            let records = run_nmse_sweep(&spec)?;
            emit_csv(&records, &spec.output_path)?;
            for row in summarize(&records) {
                println!("{row}");
            }
            println!("wrote {} records to {}", records.len(), spec.output_path.display());
        }
        Command::SweepRuntime => {
            let report = run_runtime_sweep(&spec)?;
            let all = report.all_records();
            emit_csv(&all, &spec.output_path)?;
            for row in summarize(&all) {
                println!("{row}");
            }
            for (n, m, why) in &report.skipped {
                println!("skipped {m} at grid_n = {n}: {why}");
            }
            println!("wrote {} records to {}", all.len(), spec.output_path.display());
        }
        Command::Single { method } => {
            if *method == Method::Omp1dBuild {
                return Err(Error::Config("omp1d_build is not an estimator".into()));
            }
            spec.validate_nmse()?;
            let cfg = &spec.base_config;
            let snr = spec
                .snr_points()
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let ws = Workspace::new(cfg, &spec, &[*method])?;
            let (scenario, outcomes) = run_trial(&ws, cfg, &[*method], snr, cfg.seed)?;
            let outcome = outcomes.into_iter().next().expect("one method").1?;
            println!("method      {}", outcome.method);
            println!("seed        {}", cfg.seed);
            println!("snr_db      {snr}");
            if let Some(truth) = scenario.paths.grid_indices(cfg.grid_n) {
                println!("true pairs  {truth:?}");
            }
            let mut atoms = outcome.atoms.clone();
            if !method.is_pursuit() {
                // dense estimate: show the strongest coefficients only
                atoms.sort_by(|a, b| b.2.norm().total_cmp(&a.2.norm()));
                atoms.truncate(cfg.n_paths);
                println!("(strongest {} of {} coefficients)", atoms.len(), outcome.atoms.len());
            }
            for (i, j, g) in &atoms {
                println!("atom        ({i:>3}, {j:>3})  gain {:+.6} {:+.6}j", g.re, g.im);
            }
            let nmse = match outcome.nmse.as_db() {
                Some(v) => harness::records::format_float(v),
                None => "nan".into(),
            };
            println!("nmse_db     {nmse}");
            println!("iterations  {}", outcome.iterations);
            println!("wall_time_s {:.6e}", outcome.wall_time_s);
        }
        Command::Footprint => {
            spec.base_config.validate()?;
            let (flat, factored) = memory_footprint(&spec.base_config);
            println!("{flat} {factored}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
