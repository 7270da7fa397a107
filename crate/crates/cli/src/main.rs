//! `mcvqe`: batch front-end for the multicomponent VQE pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcvqe::ansatz::{format_params, OrbitalScope};
use mcvqe::mitigation::{FoldingSchedule, FoldingStyle};
use mcvqe::pipeline::{
    export_fcidump, parse_table_entries, run_fci, run_mitigation, run_pipeline, run_resources, table1, table1_entries,
    AnsatzSpec, ModeKind, RunConfig, Stage, StageError, TableRow,
};
use mcvqe::qubitops::Mapping;
use mcvqe::resources::ResourceReport;
use mcvqe::sim::NoiseSpec;
use mcvqe::vqe::Optimizer;
use mcvqe::Error;

#[derive(Parser)]
#[command(name = "mcvqe", version, about = "Multicomponent (electron + quantum proton/positron) VQE pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: SCF, Hamiltonian, VQE, FCI benchmark and resources.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also run folding + extrapolation on the optimized circuit.
        #[arg(long)]
        mitigate: bool,
    },
    /// Exact sector-restricted ground state.
    Fci {
        #[command(flatten)]
        common: Common,
    },
    /// Folded noisy executions and log-linear zero-noise extrapolation.
    Mitigated {
        #[command(flatten)]
        common: Common,
    },
    /// Gate counts, depth and feasibility of the transpiled ansatz circuit.
    Resources {
        #[command(flatten)]
        common: Common,
    },
    /// Energies and resources for every pool next to the published values.
    Table1 {
        #[command(flatten)]
        common: Common,
        /// Rows separated by `;`, each a label list or `lucj`; default is the
        /// six standard pools plus LUCJ.
        #[arg(long)]
        pools: Option<String>,
    },
    /// Writes the integrals in extended FCIDUMP form.
    ExportFcidump {
        #[command(flatten)]
        common: Common,
        /// Export AO rather than MO integrals.
        #[arg(long)]
        ao: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Reads an extended FCIDUMP and reports HF and FCI energies.
    ImportFcidump {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `hhq`, `psh`, or a system TOML file.
    #[arg(long)]
    system: Option<String>,
    /// Classical nucleus to quantum-center distance (bohr).
    #[arg(long)]
    bond_length: Option<f64>,
    /// Protonic s exponents, e.g. `4,8`.
    #[arg(long, value_delimiter = ',')]
    proton_exponents: Option<Vec<f64>>,
    #[arg(long)]
    proton_mass: Option<f64>,
    /// Extended FCIDUMP to use instead of computed integrals.
    #[arg(long)]
    integrals: Option<PathBuf>,
    /// `jw` or `bk`.
    #[arg(long)]
    mapping: Option<String>,
    /// `ucc:<labels>`, `lucj` or `adapt`.
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    lucj_layers: Option<usize>,
    /// `electrons` or `all`.
    #[arg(long)]
    lucj_orbitals: Option<String>,
    #[arg(long)]
    lucj_diagonal_k: bool,
    #[arg(long)]
    adapt_threshold: Option<f64>,
    #[arg(long)]
    adapt_max_steps: Option<usize>,
    /// `analytic` or `shots`.
    #[arg(long)]
    mode: Option<String>,
    /// `nelder_mead` or `spsa`.
    #[arg(long)]
    optimizer: Option<String>,
    /// Energy evaluations per optimizer start.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    /// `p1,p2,p_ro` or `default`.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise factors, e.g. `1,3,5`.
    #[arg(long)]
    fold: Option<String>,
    /// `full` or `partial`.
    #[arg(long)]
    fold_style: Option<String>,
    /// Repeated mitigation runs for the spread of E(0).
    #[arg(long)]
    repeats: Option<usize>,
    /// Average gate error for the feasibility heuristic.
    #[arg(long)]
    epsilon: Option<f64>,
    /// `line`, `none` or an edge list `0-1,1-2`.
    #[arg(long)]
    topology: Option<String>,
    /// Initial (or, for `mitigated`/`resources`, fixed) parameters.
    #[arg(long)]
    params_in: Option<PathBuf>,
    /// Extra copy of the optimized parameters.
    #[arg(long)]
    params_out: Option<PathBuf>,
    /// Output directory (default: $MCVQE_OUT_DIR, then ./mcvqe-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn config_error(error: Error) -> StageError {
    StageError {
        stage: Stage::Config,
        error,
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, StageError> {
        self.build().map(RunConfig::resolve).map_err(config_error)
    }

    fn build(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.system {
            c.system = v.clone();
        }
        if let Some(v) = self.bond_length {
            c.overrides.bond_length = Some(v);
        }
        if let Some(v) = &self.proton_exponents {
            c.overrides.proton_exponents = Some(v.clone());
        }
        if let Some(v) = self.proton_mass {
            c.overrides.proton_mass = Some(v);
        }
        if let Some(v) = &self.integrals {
            c.integrals = Some(v.clone());
        }
        if let Some(v) = &self.mapping {
            c.mapping = v.parse::<Mapping>()?;
        }
        if let Some(v) = &self.ansatz {
            c.ansatz = v.parse::<AnsatzSpec>()?;
        }
        if let Some(v) = self.lucj_layers {
            c.lucj.layers = v;
        }
        if let Some(v) = &self.lucj_orbitals {
            c.lucj.orbitals = v.parse::<OrbitalScope>()?;
        }
        if self.lucj_diagonal_k {
            c.lucj.diagonal_k = true;
        }
        if let Some(v) = self.adapt_threshold {
            c.adapt.threshold = v;
        }
        if let Some(v) = self.adapt_max_steps {
            c.adapt.max_steps = v;
        }
        if let Some(v) = &self.mode {
            c.mode = v.parse::<ModeKind>()?;
        }
        if let Some(v) = &self.optimizer {
            c.optimizer = Some(v.parse::<Optimizer>()?);
        }
        if let Some(v) = self.budget {
            c.vqe.budget = v;
        }
        if let Some(v) = self.restarts {
            c.vqe.restarts = v;
        }
        if let Some(v) = self.shots {
            c.shots = v;
        }
        if let Some(v) = &self.noise {
            c.noise = Some(if v.eq_ignore_ascii_case("default") {
                NoiseSpec::default()
            } else {
                v.parse::<NoiseSpec>()?
            });
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.fold {
            c.mitigation.schedule.factors = FoldingSchedule::parse_factors(v)?;
        }
        if let Some(v) = &self.fold_style {
            c.mitigation.schedule.style = v.parse::<FoldingStyle>()?;
        }
        if let Some(v) = self.repeats {
            c.mitigation.repeats = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = &self.topology {
            c.topology = v.clone();
        }
        if let Some(v) = &self.params_in {
            c.params_in = Some(v.clone());
        }
        if let Some(v) = &self.out_dir {
            c.out_dir = Some(v.clone());
        }
        Ok(c)
    }

    fn write_params(&self, params: &[f64]) -> Result<(), StageError> {
        if let Some(p) = &self.params_out {
            std::fs::write(p, format_params(params)).map_err(|e| StageError {
                stage: Stage::Output,
                error: e.into(),
            })?;
        }
        Ok(())
    }
}

fn print_artifacts(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn print_table(rows: &[TableRow]) {
    println!(
        "{:<26} {:>6} {:>6} {:>14} {:>12} {:>10}",
        "row", "cx", "depth", "energy", "reference", "delta"
    );
    for r in rows {
        let (cx, depth) = r
            .resources
            .as_ref()
            .map_or((String::new(), String::new()), |x| (x.count("cx").to_string(), x.depth.to_string()));
        let (e_ref, delta) = r.reference.map_or((String::new(), String::new()), |p| {
            (format!("{:.6}", p.energy), format!("{:+.2e}", r.energy - p.energy))
        });
        println!("{:<26} {cx:>6} {depth:>6} {:>14.8} {e_ref:>12} {delta:>10}", r.label, r.energy);
    }
}

fn execute(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Run { common, mitigate } => {
            let cfg = common.resolve()?;
            let (report, art) = run_pipeline(&cfg, mitigate)?;
            common.write_params(&report.optimized.result.params)?;
            print!("{}", report.summary());
            print_artifacts(&art.written);
        }
        Command::Fci { common } => {
            let cfg = common.resolve()?;
            let (prep, fci, art) = run_fci(&cfg)?;
            println!(
                "{}: E_FCI = {:.8}  E_HF = {:.8}  sector dimension = {}",
                prep.name, fci.energy, prep.e_hf, fci.sector_dim
            );
            print_artifacts(&art.written);
        }
        Command::Mitigated { common } => {
            let cfg = common.resolve()?;
            let (m, art) = run_mitigation(&cfg)?;
            print!("{}", m.summary());
            print_artifacts(&art.written);
        }
        Command::Resources { common } => {
            let cfg = common.resolve()?;
            let (r, art) = run_resources(&cfg)?;
            print!("{}", ResourceReport::table(&[(cfg.ansatz.to_string(), r)]));
            print_artifacts(&art.written);
        }
        Command::Table1 { common, pools } => {
            let cfg = common.resolve()?;
            let entries = match pools {
                Some(p) => parse_table_entries(&p).map_err(config_error)?,
                None => table1_entries(),
            };
            let (rows, art) = table1(&cfg, &entries)?;
            print_table(&rows);
            print_artifacts(&art.written);
        }
        Command::ExportFcidump { common, ao, output } => {
            let cfg = common.resolve()?;
            let path = export_fcidump(&cfg, ao, output.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::ImportFcidump { file, common } => {
            let mut cfg = common.resolve()?;
            cfg.integrals = Some(file);
            let (prep, fci, art) = run_fci(&cfg)?;
            println!(
                "{}: {} species, {} qubits, E_HF = {:.8}  E_FCI = {:.8}",
                prep.name,
                prep.mo.species.len(),
                prep.layout.n_modes(),
                prep.e_hf,
                fci.energy
            );
            print_artifacts(&art.written);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
