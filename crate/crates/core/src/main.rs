use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddqaoa::bench::{self, BenchConfig, BenchReport, Manifest, Method};
use ddqaoa::cspp::{self, CsppInstance, GenConfig};
use ddqaoa::driver::DdqaoaConfig;
use ddqaoa::qubo;
use ddqaoa::Error;

#[derive(Parser)]
#[command(
    name = "ddqaoa",
    version,
    about = "Dynamic-depth QAOA for constrained shortest paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances as JSON files.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        edges: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Keep instances whose compiled ground states miss the optimum.
        #[arg(long)]
        allow_unsound: bool,
    },
    /// Solve an instance by path enumeration.
    SolveExact {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Optimize one instance with one method.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = RunMethod::Ddqaoa)]
        method: RunMethod,
        /// Depth for `fixed`; maximum depth for `ddqaoa`.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Run a batch comparison and write CSV reports.
    Bench {
        #[arg(long, default_value_t = 10)]
        edges: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value = "ddqaoa,p3,p5,p10,p15")]
        methods: String,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        p_max: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Print the comparison table of a report directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print the compiled Ising Hamiltonian of an instance.
    Hamiltonian {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RunMethod {
    Ddqaoa,
    Fixed,
}

#[derive(Args)]
struct Tuning {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
}

impl Tuning {
    fn apply(&self, cfg: &mut DdqaoaConfig) {
        if let Some(lr) = self.learning_rate {
            cfg.adam.learning_rate = lr;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(s) = self.sigma {
            cfg.sigma = s;
        }
        if let Some(k) = self.patience {
            cfg.patience_k = k;
        }
    }
}

/// Raw command-line arguments after the subcommand, paired up as flags.
fn echo_flags() -> BTreeMap<String, String> {
    let args: Vec<String> = std::env::args().skip(2).collect();
    let mut flags = BTreeMap::new();
    let mut i = 0;
    while i < args.len() {
        let key = args[i].trim_start_matches('-').to_string();
        match args.get(i + 1).filter(|v| !v.starts_with("--")) {
            Some(v) => {
                flags.insert(key, v.clone());
                i += 2;
            }
            None => {
                flags.insert(key, "true".into());
                i += 1;
            }
        }
    }
    flags
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::InvalidInstance(_)
            | Error::Json { .. }
            | Error::TooManyQubits { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            seed,
            edges,
            count,
            out,
            allow_unsound,
        } => {
            fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            let gen = GenConfig::default();
            for i in 0..count as u64 {
                let prepared = bench::prepare_instance(seed + i, edges, &gen, !allow_unsound)?;
                let path = out.join(format!("instance_{}.json", seed + i));
                prepared.instance.save(&path)?;
                println!("{}", path.display());
            }
        }
        Command::SolveExact { instance } => {
            let inst = CsppInstance::load(&instance)?;
            match cspp::solve_exact(&inst) {
                Some(best) => {
                    let path: Vec<String> = best.vertices.iter().map(ToString::to_string).collect();
                    println!("path      {}", path.join(" -> "));
                    println!("edges     {:?}", best.edge_indices);
                    println!("cost      {}", best.path_cost);
                    println!("resource  {} (limit {})", best.path_resource, inst.resource_limit());
                }
                None => println!("no feasible path"),
            }
        }
        Command::Hamiltonian { instance } => {
            let inst = CsppInstance::load(&instance)?;
            let p = qubo::default_penalties(&inst);
            let q = qubo::build_penalty_hamiltonian(&inst, p.rho, p.lambda)?;
            print!("{}", qubo::qubo_to_ising(&q).to_dump());
        }
        Command::Run {
            instance,
            method,
            p,
            steps,
            out,
            tuning,
        } => {
            let inst = CsppInstance::load(&instance)?;
            let mut cfg = DdqaoaConfig {
                n_opt_max: steps.unwrap_or_else(|| bench::default_steps(inst.num_edges())),
                ..DdqaoaConfig::default()
            };
            tuning.apply(&mut cfg);
            let method = match method {
                RunMethod::Ddqaoa => {
                    if let Some(p) = p {
                        cfg.p_max = p;
                    }
                    Method::Ddqaoa
                }
                RunMethod::Fixed => {
                    Method::Fixed(p.ok_or_else(|| Failure::Config("--method fixed requires --p".into()))?)
                }
            };
            cfg.validate()?;
            let compiled = qubo::compile(&inst, qubo::default_penalties(&inst))?;
            let prepared = bench::PreparedInstance {
                instance: inst,
                ising: compiled.ising,
                spectrum: compiled.spectrum,
                penalty_rejections: 0,
            };
            let row = bench::run_method(&prepared, method, &cfg)?;
            let m = row.metrics.clone();
            let rows = vec![row];
            let report = BenchReport {
                aggregates: bench::aggregate(&rows, &[method]),
                trends: bench::parameter_trend_stats(rows.iter().map(|r| (r.method, &r.record))),
                manifest: Manifest {
                    command: "run".into(),
                    flags: echo_flags(),
                    num_edges: prepared.instance.num_edges(),
                    seeds: vec![prepared.instance.seed()],
                    methods: vec![method],
                    ddqaoa: cfg,
                    generator: GenConfig::default(),
                    require_sound_penalties: false,
                    skipped: vec![],
                    penalty_rejections: 0,
                },
                rows,
            };
            bench::emit_report(&report, &out)?;
            println!("method        {method}");
            println!("expectation   {:.6}", m.expectation);
            println!("norm ratio    {:.6}", m.norm_ratio);
            println!("success prob  {:.6}", m.success_prob);
            println!("final depth   {}", m.final_depth);
            println!("cum. CNOTs    {}", m.cumulative_cnots);
        }
        Command::Bench {
            edges,
            count,
            methods,
            steps,
            seed,
            p_max,
            out,
            workers,
            tuning,
        } => {
            let mut ddqaoa = DdqaoaConfig {
                p_max,
                n_opt_max: steps.unwrap_or_else(|| bench::default_steps(edges)),
                ..DdqaoaConfig::default()
            };
            tuning.apply(&mut ddqaoa);
            let config = BenchConfig {
                num_edges: edges,
                count,
                base_seed: seed,
                methods: Method::parse_list(&methods)?,
                ddqaoa,
                workers,
                ..BenchConfig::default()
            };
            let report = bench::run_benchmark_with_flags(&config, "bench", echo_flags())?;
            bench::emit_report(&report, &out)?;
            let loaded = bench::load_report(&out)?;
            print!("{}", bench::format_table(&loaded));
        }
        Command::Report { input } => {
            let loaded = bench::load_report(&input)?;
            print!("{}", bench::format_table(&loaded));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
