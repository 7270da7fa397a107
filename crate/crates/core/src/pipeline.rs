//! End-to-end drivers: system → integrals → SCF → Hamiltonian → ansatz →
//! VQE / FCI → resources → mitigation, plus artifact output.
//!
//! Every stage failure is reported as a [`StageError`] naming the stage.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::{build_pool, format_params, parse_params, trotter_circuit, Ansatz, ExcitationLabel, LucjAnsatz, OrbitalScope};
use crate::basis::{builtin_system, load_system_file, BuiltinSystem, SystemOverrides, SystemSpec};
use crate::error::{Error, Result};
use crate::exact::{fci_ground_state, FciResult};
use crate::fcidump::{load_fcidump, write_fcidump};
use crate::integrals::{build_integral_set, IntegralSet, Representation};
use crate::mitigation::{run_mitigated, run_repeated, FoldingSchedule, MitigatedRun, RepeatedRuns};
use crate::qubitops::{second_quantize, FermionOp, Mapping, ModeLayout, PauliSum};
use crate::resources::{report, transpile_basis, ResourceReport, Topology};
use crate::scf::{mo_transform, solve_neo_hf, NeoHfSolution, ScfOptions};
use crate::sim::{basis_state, expectation, run_with_params, sample_counts, Circuit, NoiseSpec};
use crate::vqe::{minimize, run_adapt, AdaptOptions, AdaptStep, EvalMode, Optimizer, VqeOptions, VqeResult};

/// Environment variable giving the default output directory.
pub const OUT_DIR_ENV: &str = "MCVQE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "mcvqe-out";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AnsatzSpec {
    /// Trotterized UCC over the listed excitation labels.
    Ucc(Vec<ExcitationLabel>),
    Lucj,
    Adapt,
}

impl AnsatzSpec {
    pub fn energy_label(&self) -> &'static str {
        match self {
            AnsatzSpec::Ucc(_) => "E_UCC",
            AnsatzSpec::Lucj => "E_LUCJ",
            AnsatzSpec::Adapt => "E_ADAPT",
        }
    }
}

impl FromStr for AnsatzSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "lucj" => return Ok(AnsatzSpec::Lucj),
            "adapt" => return Ok(AnsatzSpec::Adapt),
            _ => {}
        }
        match t.split_once(':') {
            Some((kind, labels)) if kind.eq_ignore_ascii_case("ucc") => Ok(AnsatzSpec::Ucc(ExcitationLabel::parse_list(labels)?)),
            _ => Err(Error::Config(format!("unknown ansatz `{t}` (expected ucc:<labels>, lucj or adapt)"))),
        }
    }
}

impl fmt::Display for AnsatzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnsatzSpec::Ucc(labels) => {
                let names: Vec<&str> = labels.iter().map(|l| l.name()).collect();
                write!(f, "ucc:{}", names.join(","))
            }
            AnsatzSpec::Lucj => f.write_str("lucj"),
            AnsatzSpec::Adapt => f.write_str("adapt"),
        }
    }
}

impl TryFrom<String> for AnsatzSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AnsatzSpec> for String {
    fn from(a: AnsatzSpec) -> String {
        a.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    #[default]
    Analytic,
    Shots,
}

impl FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(ModeKind::Analytic),
            "shots" => Ok(ModeKind::Shots),
            other => Err(Error::Config(format!("unknown mode `{other}` (expected analytic or shots)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LucjConfig {
    pub layers: usize,
    pub orbitals: OrbitalScope,
    pub diagonal_k: bool,
}

impl Default for LucjConfig {
    fn default() -> Self {
        LucjConfig {
            layers: 1,
            orbitals: OrbitalScope::default(),
            diagonal_k: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptConfig {
    pub threshold: f64,
    pub max_steps: usize,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        let d = AdaptOptions::default();
        AdaptConfig {
            threshold: d.threshold,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MitigationConfig {
    pub schedule: FoldingSchedule,
    /// Extra seeded repetitions used for the run-to-run spread of `E(0)`.
    pub repeats: usize,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig {
            schedule: FoldingSchedule::default(),
            repeats: 10,
        }
    }
}

/// Everything a run depends on. Parsed from TOML; command-line flags are
/// applied on top, then [`RunConfig::resolve`] fills derived defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `hhq`, `psh`, or a path to a system TOML file.
    pub system: String,
    pub overrides: SystemOverrides,
    /// Extended FCIDUMP to use instead of computing integrals. MO integrals
    /// skip the SCF; AO integrals go through it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrals: Option<PathBuf>,
    pub mapping: Mapping,
    pub ansatz: AnsatzSpec,
    pub lucj: LucjConfig,
    pub adapt: AdaptConfig,
    pub mode: ModeKind,
    /// Defaults to Nelder–Mead in analytic mode and SPSA in shots mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Optimizer>,
    /// Optimizer settings; `vqe.optimizer` and `vqe.seed` are overwritten by
    /// `optimizer` and `seed`.
    pub vqe: VqeOptions,
    pub scf: ScfOptions,
    pub shots: usize,
    /// Gate and readout noise for shots mode; absent means noiseless sampling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    pub seed: u64,
    pub mitigation: MitigationConfig,
    /// Average gate error used by the feasibility heuristic.
    pub epsilon: f64,
    /// `line`, `none`, or an edge list such as `0-1,1-2,0-4`.
    pub topology: String,
    /// Initial parameters (text, one per line).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_in: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: "hhq".into(),
            overrides: SystemOverrides::default(),
            integrals: None,
            mapping: Mapping::JordanWigner,
            ansatz: AnsatzSpec::Lucj,
            lucj: LucjConfig::default(),
            adapt: AdaptConfig::default(),
            mode: ModeKind::Analytic,
            optimizer: None,
            vqe: VqeOptions::default(),
            scf: ScfOptions::default(),
            shots: 4096,
            noise: None,
            seed: 7,
            mitigation: MitigationConfig::default(),
            epsilon: 1e-3,
            topology: "line".into(),
            params_in: None,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file, or the configuration header of any artifact.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.starts_with("# mcvqe ") {
            Self::from_artifact(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// Recovers the configuration embedded in an artifact header.
    pub fn from_artifact(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .skip(1)
            .map_while(|l| l.strip_prefix('#'))
            .map(|l| format!("{}\n", l.strip_prefix(' ').unwrap_or(l)))
            .collect();
        Self::from_toml(&body)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Fills derived defaults: optimizer by mode, seeds, output directory
    /// (flag or file, then `MCVQE_OUT_DIR`, then `mcvqe-out`).
    pub fn resolve(mut self) -> Self {
        let opt = self.optimizer.unwrap_or(match self.mode {
            ModeKind::Analytic => Optimizer::NelderMead,
            ModeKind::Shots => Optimizer::Spsa,
        });
        self.optimizer = Some(opt);
        self.vqe.optimizer = opt;
        self.vqe.seed = self.seed;
        if self.out_dir.is_none() {
            self.out_dir = Some(std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUT_DIR.into()));
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.lucj.layers == 0 {
            return Err(Error::Config("LUCJ needs at least one layer".into()));
        }
        if !(self.adapt.threshold > 0.0) {
            return Err(Error::Config(format!("ADAPT threshold must be positive, got {}", self.adapt.threshold)));
        }
        self.mitigation.schedule.validate()?;
        parse_topology(&self.topology, 1)?;
        Ok(())
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.mode {
            ModeKind::Analytic => EvalMode::Analytic,
            ModeKind::Shots => EvalMode::Shots {
                shots: self.shots,
                noise: self.noise,
                seed: self.seed,
            },
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| DEFAULT_OUT_DIR.into())
    }
}

/// Parses `line`, `none` or `a-b,c-d,…` for an `n`-qubit register.
pub fn parse_topology(s: &str, n: usize) -> Result<Option<Topology>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "none" | "" => Ok(None),
        "line" => Ok(Some(Topology::line(n))),
        edges => {
            let pairs = edges
                .split(',')
                .map(|e| {
                    let (a, b) = e.split_once('-').ok_or_else(|| Error::Config(format!("bad topology edge `{e}`")))?;
                    let p = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad topology edge `{e}`")));
                    Ok((p(a)?, p(b)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(Topology::from_edges("custom", pairs)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    System,
    Integrals,
    Scf,
    Hamiltonian,
    Ansatz,
    Vqe,
    Fci,
    Resources,
    Mitigation,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::System => "system",
            Stage::Integrals => "integrals",
            Stage::Scf => "scf",
            Stage::Hamiltonian => "hamiltonian",
            Stage::Ansatz => "ansatz",
            Stage::Vqe => "vqe",
            Stage::Fci => "fci",
            Stage::Resources => "resources",
            Stage::Mitigation => "mitigation",
            Stage::Output => "output",
        }
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl StageError {
    /// 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.stage == Stage::Config || self.error.is_config() {
            2
        } else {
            3
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {}", self.stage.name(), self.error)
    }
}

impl std::error::Error for StageError {}

pub type StageResult<T> = std::result::Result<T, StageError>;

trait AtStage<T> {
    fn at(self, stage: Stage) -> StageResult<T>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> StageResult<T> {
        self.map_err(|error| StageError { stage, error })
    }
}

/// Output of the classical stages.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub name: String,
    pub spec: Option<SystemSpec>,
    pub scf: Option<NeoHfSolution>,
    /// AO integrals when they were computed or imported in AO form.
    pub ao: Option<IntegralSet>,
    pub mo: IntegralSet,
    pub layout: ModeLayout,
    pub fermion: FermionOp,
    pub hamiltonian: PauliSum,
    pub e_hf: f64,
}

impl Prepared {
    pub fn counts(&self) -> Vec<usize> {
        self.layout.species.iter().map(|s| s.count).collect()
    }

    pub fn fci(&self, mapping: Mapping) -> Result<FciResult> {
        fci_ground_state(&self.hamiltonian, &self.layout, mapping, &self.counts())
    }
}

fn load_spec(cfg: &RunConfig) -> Result<(String, SystemSpec)> {
    match BuiltinSystem::parse(&cfg.system) {
        Ok(b) => Ok((b.name().to_string(), builtin_system(b, &cfg.overrides)?)),
        Err(e) => {
            let path = Path::new(&cfg.system);
            if !path.exists() {
                return Err(e);
            }
            if cfg.overrides != SystemOverrides::default() {
                return Err(Error::Config("overrides apply only to builtin systems".into()));
            }
            let spec = load_system_file(path)?;
            Ok((spec.name.clone(), spec))
        }
    }
}

/// Runs the classical stages up to the mapped Hamiltonian.
pub fn prepare(cfg: &RunConfig) -> StageResult<Prepared> {
    let (name, spec, ao) = match &cfg.integrals {
        Some(path) => {
            let ints = load_fcidump(path).at(Stage::Integrals)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "imported".into());
            (name, None, ints)
        }
        None => {
            let (name, spec) = load_spec(cfg).at(Stage::System)?;
            let ints = build_integral_set(&spec).at(Stage::Integrals)?;
            (name, Some(spec), ints)
        }
    };
    let (scf, ao, mo) = match ao.representation {
        Representation::Ao => {
            let sol = solve_neo_hf(&ao, &cfg.scf).at(Stage::Scf)?;
            let mo = mo_transform(&ao, &sol).at(Stage::Scf)?;
            (Some(sol), Some(ao), mo)
        }
        Representation::Mo => (None, None, ao),
    };
    let layout = ModeLayout::for_integrals(&mo);
    let fermion = second_quantize(&mo, &layout).at(Stage::Hamiltonian)?;
    let hamiltonian = cfg.mapping.map(&fermion);
    let n = layout.n_modes();
    let e_hf = match &scf {
        Some(s) => s.energy,
        None => {
            let occ = cfg.mapping.encode_occupation(layout.reference_occupation(), n);
            expectation(&basis_state(occ as usize, n), &hamiltonian).at(Stage::Hamiltonian)?
        }
    };
    Ok(Prepared {
        name,
        spec,
        scf,
        ao,
        mo,
        layout,
        fermion,
        hamiltonian,
        e_hf,
    })
}

/// Parameterized circuit family for the configured ansatz (not ADAPT).
pub fn build_ansatz(cfg: &RunConfig, layout: &ModeLayout) -> Result<Box<dyn Ansatz + Sync>> {
    match &cfg.ansatz {
        AnsatzSpec::Ucc(labels) => Ok(Box::new(trotter_circuit(&build_pool(labels, layout)?, cfg.mapping)?)),
        AnsatzSpec::Lucj => Ok(Box::new(
            LucjAnsatz::new(layout, cfg.mapping, cfg.lucj.layers)
                .with_orbital_scope(cfg.lucj.orbitals)
                .with_diagonal_k(cfg.lucj.diagonal_k),
        )),
        AnsatzSpec::Adapt => Err(Error::Config("ADAPT circuits are grown by the driver, not prebuilt".into())),
    }
}

fn initial_params(cfg: &RunConfig, n: usize) -> Result<Vec<f64>> {
    match &cfg.params_in {
        None => Ok(vec![0.0; n]),
        Some(path) => {
            let p = parse_params(&std::fs::read_to_string(path)?)?;
            if p.len() != n {
                return Err(Error::Config(format!("{} holds {} parameters, ansatz has {n}", path.display(), p.len())));
            }
            Ok(p)
        }
    }
}

/// Optimized circuit for the configured ansatz.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub result: VqeResult,
    /// Fully bound circuit at the optimum.
    pub circuit: Circuit,
    pub history: Option<Vec<AdaptStep>>,
}

pub fn optimize(cfg: &RunConfig, prep: &Prepared) -> StageResult<Optimized> {
    let mode = cfg.eval_mode();
    if cfg.ansatz == AnsatzSpec::Adapt {
        let pool = build_pool(&ExcitationLabel::ALL, &prep.layout).at(Stage::Ansatz)?;
        let opts = AdaptOptions {
            threshold: cfg.adapt.threshold,
            max_steps: cfg.adapt.max_steps,
            vqe: cfg.vqe.clone(),
        };
        let r = run_adapt(&pool, cfg.mapping, &prep.hamiltonian, &opts).at(Stage::Vqe)?;
        let circuit = r.circuit.bind(&r.result.params).at(Stage::Vqe)?;
        return Ok(Optimized {
            result: r.result,
            circuit,
            history: Some(r.history),
        });
    }
    let ansatz = build_ansatz(cfg, &prep.layout).at(Stage::Ansatz)?;
    let init = initial_params(cfg, ansatz.n_params()).at(Stage::Config)?;
    let result = minimize(&*ansatz, &prep.hamiltonian, &init, &cfg.vqe, &mode).at(Stage::Vqe)?;
    let circuit = ansatz.circuit(&result.params).at(Stage::Ansatz)?;
    Ok(Optimized {
        result,
        circuit,
        history: None,
    })
}

pub fn resource_report(cfg: &RunConfig, circuit: &Circuit) -> Result<ResourceReport> {
    let t = transpile_basis(circuit)?;
    let topo = parse_topology(&cfg.topology, t.n_qubits())?;
    Ok(report(&t, cfg.epsilon, topo.as_ref()))
}

#[derive(Debug, Clone)]
pub struct MitigationReport {
    pub run: MitigatedRun,
    pub repeated: Option<RepeatedRuns>,
    /// Statevector energy of the same circuit.
    pub noiseless: f64,
}

impl MitigationReport {
    pub fn summary(&self) -> String {
        let f = &self.run.fit;
        let mut s = format!(
            "E_raw(lambda=1) = {:.6} +/- {:.6}\nE_PIE = {:.6} +/- {:.6}\nE_noiseless = {:.6}\n",
            self.run.raw_energy(),
            self.run.raw.first().map_or(0.0, |p| p.stderr),
            f.e0,
            f.e0_stderr,
            self.noiseless
        );
        if let Some(r) = &self.repeated {
            s.push_str(&format!(
                "repeated runs = {}: mean E_PIE = {:.6}, std = {:.6}, mean fit stderr = {:.6}\n",
                r.e0.len(),
                r.mean,
                r.std,
                r.mean_fit_stderr
            ));
        }
        for p in &self.run.excluded {
            s.push_str(&format!("excluded lambda = {} (E = {:.6} >= 0)\n", p.lambda, p.energy));
        }
        s
    }
}

pub fn mitigate(cfg: &RunConfig, prep: &Prepared, circuit: &Circuit) -> StageResult<MitigationReport> {
    let noise = cfg.noise.unwrap_or_default();
    let m = &cfg.mitigation;
    let run = run_mitigated(circuit, &prep.hamiltonian, &m.schedule, cfg.shots, &noise, cfg.seed).at(Stage::Mitigation)?;
    let repeated = match m.repeats {
        0 => None,
        n => Some(run_repeated(circuit, &prep.hamiltonian, &m.schedule, cfg.shots, &noise, cfg.seed, n).at(Stage::Mitigation)?),
    };
    let noiseless = expectation(&run_with_params(circuit, &[], 0).at(Stage::Mitigation)?, &prep.hamiltonian).at(Stage::Mitigation)?;
    Ok(MitigationReport { run, repeated, noiseless })
}

/// Bound circuit at `params_in` when given, otherwise at the analytic optimum.
pub fn circuit_for(cfg: &RunConfig, prep: &Prepared) -> StageResult<(Circuit, Vec<f64>)> {
    if cfg.params_in.is_some() && cfg.ansatz != AnsatzSpec::Adapt {
        let ansatz = build_ansatz(cfg, &prep.layout).at(Stage::Ansatz)?;
        let params = initial_params(cfg, ansatz.n_params()).at(Stage::Config)?;
        return Ok((ansatz.circuit(&params).at(Stage::Ansatz)?, params));
    }
    let analytic = RunConfig {
        mode: ModeKind::Analytic,
        optimizer: Some(Optimizer::NelderMead),
        ..cfg.clone()
    }
    .resolve();
    let opt = optimize(&analytic, prep)?;
    Ok((opt.circuit, opt.result.params))
}

/// Folding and extrapolation for `mcvqe mitigated`.
pub fn run_mitigation(cfg: &RunConfig) -> StageResult<(MitigationReport, Artifacts)> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let (circuit, params) = circuit_for(cfg, &prep)?;
    let m = mitigate(cfg, &prep, &circuit)?;
    let mut art = Artifacts::new(cfg, "mitigated").at(Stage::Output)?;
    (|| -> Result<()> {
        art.write("params.txt", &format_params(&params))?;
        art.write("mitigation.csv", &m.run.plot_csv())?;
        art.write("mitigation.txt", &m.summary())?;
        Ok(())
    })()
    .at(Stage::Output)?;
    Ok((m, art))
}

/// Transpiled resource report for `mcvqe resources`.
pub fn run_resources(cfg: &RunConfig) -> StageResult<(ResourceReport, Artifacts)> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let (circuit, _) = circuit_for(cfg, &prep)?;
    let r = resource_report(cfg, &circuit).at(Stage::Resources)?;
    let rows = vec![(cfg.ansatz.to_string(), r.clone())];
    let mut art = Artifacts::new(cfg, "resources").at(Stage::Output)?;
    (|| -> Result<()> {
        art.write("resources.csv", &resources_csv(&rows))?;
        art.write("resources.txt", &ResourceReport::table(&rows))?;
        Ok(())
    })()
    .at(Stage::Output)?;
    Ok((r, art))
}

/// Results of [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: RunConfig,
    pub system: String,
    pub e_hf: f64,
    pub fci: FciResult,
    pub optimized: Optimized,
    pub resources: ResourceReport,
    pub mitigation: Option<MitigationReport>,
}

impl RunReport {
    pub fn energy(&self) -> f64 {
        self.optimized.result.energy
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} = {:.8}  E_HF = {:.8}  E_FCI = {:.8}",
            self.system,
            self.config.ansatz.energy_label(),
            self.energy(),
            self.e_hf,
            self.fci.energy
        )
    }

    pub fn summary(&self) -> String {
        let r = &self.optimized.result;
        let mut s = format!("{}\n", self.summary_line());
        s.push_str(&format!("ansatz = {}\nparameters = {}\n", self.config.ansatz, r.params.len()));
        if !r.mode.is_analytic() {
            s.push_str(&format!("stderr = {:.6}\n", r.stderr));
        }
        s.push_str(&format!(
            "optimizer = {}\nevaluations = {}\nconverged = {}\ncorrelation recovered = {:.4}%\n",
            r.optimizer,
            r.evaluations,
            r.converged,
            recovered(self.e_hf, r.energy, self.fci.energy)
        ));
        if let Some(h) = &self.optimized.history {
            for (k, step) in h.iter().enumerate() {
                s.push_str(&format!(
                    "adapt step {}: {} ({}) gradient = {:.3e} energy = {:.8}\n",
                    k + 1,
                    step.generator,
                    step.label,
                    step.gradient,
                    step.energy
                ));
            }
        }
        let rr = &self.resources;
        s.push_str(&format!(
            "gates = {} (cx {}), depth = {}, width = {}, d*w*eps = {:.3} ({})\n",
            rr.total,
            rr.count("cx"),
            rr.depth,
            rr.width,
            rr.ratio,
            if rr.feasible { "feasible" } else { "infeasible" }
        ));
        if let Some(m) = &self.mitigation {
            s.push_str(&m.summary());
        }
        s
    }
}

fn recovered(e_hf: f64, e: f64, e_fci: f64) -> f64 {
    let corr = e_hf - e_fci;
    if corr.abs() < 1e-14 {
        100.0
    } else {
        100.0 * (e_hf - e) / corr
    }
}

/// Writes artifacts, each prefixed by `#`-comment lines holding the resolved
/// configuration.
pub struct Artifacts {
    dir: PathBuf,
    header: String,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(cfg: &RunConfig, command: &str) -> Result<Self> {
        let dir = cfg.out_dir();
        std::fs::create_dir_all(&dir)?;
        let mut header = format!("# mcvqe {} {command}\n", env!("CARGO_PKG_VERSION"));
        for line in cfg.to_toml().lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        Ok(Artifacts {
            dir,
            header,
            written: Vec::new(),
        })
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, format!("{}{body}", self.header))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

fn write_prepared(art: &mut Artifacts, prep: &Prepared) -> Result<()> {
    art.write("integrals.fcidump", &write_fcidump(&prep.mo))?;
    let scf = match (&prep.scf, &prep.ao) {
        (Some(sol), Some(ao)) => sol.summary(ao),
        _ => format!("energy = {:.12}\nsource = imported MO integrals\n", prep.e_hf),
    };
    art.write("scf.txt", &scf)?;
    art.write("hamiltonian.txt", &prep.hamiltonian.to_text())?;
    Ok(())
}

fn fci_text(prep: &Prepared, fci: &FciResult) -> String {
    format!(
        "energy = {:.12}\nhf_energy = {:.12}\nsector_dim = {}\nfull_dim = {}\nresidual = {:.3e}\n",
        fci.energy, prep.e_hf, fci.sector_dim, fci.full_dim, fci.residual
    )
}

/// Full pipeline for `mcvqe run`; mitigation runs when `mitigate` is set.
pub fn run_pipeline(cfg: &RunConfig, mitigate_too: bool) -> StageResult<(RunReport, Artifacts)> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let fci = prep.fci(cfg.mapping).at(Stage::Fci)?;
    let optimized = optimize(cfg, &prep)?;
    let resources = resource_report(cfg, &optimized.circuit).at(Stage::Resources)?;
    let mitigation = if mitigate_too { Some(mitigate(cfg, &prep, &optimized.circuit)?) } else { None };
    let report = RunReport {
        config: cfg.clone(),
        system: prep.name.clone(),
        e_hf: prep.e_hf,
        fci,
        optimized,
        resources,
        mitigation,
    };
    let mut art = Artifacts::new(cfg, "run").at(Stage::Output)?;
    (|| -> Result<()> {
        write_prepared(&mut art, &prep)?;
        art.write("fci.txt", &fci_text(&prep, &report.fci))?;
        art.write("vqe_trace.csv", &report.optimized.result.trace_csv())?;
        art.write("params.txt", &format_params(&report.optimized.result.params))?;
        let rows = vec![(cfg.ansatz.to_string(), report.resources.clone())];
        art.write("resources.csv", &resources_csv(&rows))?;
        if let ModeKind::Shots = cfg.mode {
            let r = sample_counts(&report.optimized.circuit, &[], 0, &prep.hamiltonian, cfg.shots, None, cfg.seed)?;
            art.write("counts.csv", &r.counts_csv())?;
        }
        if let Some(m) = &report.mitigation {
            art.write("mitigation.csv", &m.run.plot_csv())?;
        }
        art.write("summary.txt", &report.summary())?;
        Ok(())
    })()
    .at(Stage::Output)?;
    Ok((report, art))
}

pub fn resources_csv(rows: &[(String, ResourceReport)]) -> String {
    let mut s = format!("{}\n", ResourceReport::CSV_HEADER);
    for (label, r) in rows {
        s.push_str(&r.csv_row(label));
        s.push('\n');
    }
    s
}

/// FCI benchmark only.
pub fn run_fci(cfg: &RunConfig) -> StageResult<(Prepared, FciResult, Artifacts)> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let fci = prep.fci(cfg.mapping).at(Stage::Fci)?;
    let mut art = Artifacts::new(cfg, "fci").at(Stage::Output)?;
    (|| -> Result<()> {
        write_prepared(&mut art, &prep)?;
        art.write("fci.txt", &fci_text(&prep, &fci))?;
        Ok(())
    })()
    .at(Stage::Output)?;
    Ok((prep, fci, art))
}

/// One row of the energy/resource table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub energy: f64,
    pub resources: Option<ResourceReport>,
    pub reference: Option<ReferenceRow>,
}

/// Published gate counts (rz, sx, cx, x, total, depth) and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub counts: Option<[usize; 6]>,
    pub energy: f64,
}

/// Entry of a table request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableEntry {
    Pool(Vec<ExcitationLabel>),
    Lucj,
}

impl TableEntry {
    pub fn label(&self) -> String {
        match self {
            TableEntry::Pool(l) => l.iter().map(|x| x.name()).collect::<Vec<_>>().join(","),
            TableEntry::Lucj => "lucj".into(),
        }
    }
}

/// The six pools and the LUCJ row of the standard table.
pub fn table1_entries() -> Vec<TableEntry> {
    use ExcitationLabel::*;
    let mut v: Vec<TableEntry> = [
        vec![T1e, T1p],
        vec![T1p, T2ee],
        vec![T1e, T2ee],
        vec![T2ee, T2ep],
        vec![T1e, T1p, T2ee, T2ep],
        ExcitationLabel::ALL.to_vec(),
    ]
    .into_iter()
    .map(TableEntry::Pool)
    .collect();
    v.push(TableEntry::Lucj);
    v
}

/// Parses `t1e,t1p;t2ee,t2ep;lucj`. The empty string is an empty request.
pub fn parse_table_entries(s: &str) -> Result<Vec<TableEntry>> {
    s.split(';')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            if e.eq_ignore_ascii_case("lucj") {
                Ok(TableEntry::Lucj)
            } else {
                Ok(TableEntry::Pool(ExcitationLabel::parse_list(e)?))
            }
        })
        .collect()
}

/// Published values for the builtin systems, keyed by row label.
pub fn reference_row(system: &str, label: &str) -> Option<ReferenceRow> {
    let rows: &[(&str, Option<[usize; 6]>, f64)] = match system.to_ascii_lowercase().as_str() {
        "hhq" => &[
            ("t1e,t1p", Some([55, 48, 47, 1, 151, 112]), -1.059569),
            ("t1p,t2ee", Some([109, 86, 68, 2, 265, 178]), -1.079396),
            ("t1e,t2ee", Some([144, 113, 80, 3, 340, 225]), -1.079406),
            ("t2ee,t2ep", Some([211, 170, 115, 4, 500, 329]), -1.079421),
            ("t1e,t1p,t2ee,t2ep", Some([246, 192, 129, 6, 573, 379]), -1.079431),
            ("t1e,t1p,t2ee,t2ep,t3eep", Some([499, 380, 227, 12, 1118, 743]), -1.079433),
            ("lucj", Some([39, 20, 16, 8, 83, 25]), -1.079406),
            ("hf", None, -1.059569),
            ("fci", None, -1.079434),
        ],
        "psh" => &[
            ("t1e,t1p", Some([55, 48, 47, 1, 151, 112]), -0.558727),
            ("t1p,t2ee", Some([107, 86, 68, 2, 263, 175]), -0.569124),
            ("t1e,t2ee", Some([144, 113, 80, 3, 340, 224]), -0.569124),
            ("t2ee,t2ep", Some([202, 166, 115, 5, 488, 328]), -0.572710),
            ("t1e,t1p,t2ee,t2ep", Some([234, 188, 129, 7, 558, 373]), -0.572710),
            ("t1e,t1p,t2ee,t2ep,t3eep", Some([475, 366, 227, 14, 1082, 727]), -0.572714),
            ("lucj", Some([55, 34, 20, 3, 112, 43]), -0.569178),
            ("hf", None, -0.558727),
            ("fci", None, -0.572838),
        ],
        _ => return None,
    };
    rows.iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, counts, energy)| ReferenceRow { counts, energy })
}

fn pool_key(labels: &[ExcitationLabel]) -> String {
    let mut sorted = labels.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted.iter().map(|l| l.name()).collect::<Vec<_>>().join(",")
}

/// Optimizes every requested entry analytically and tabulates energies and
/// transpiled resources next to the published values.
pub fn table1(cfg: &RunConfig, entries: &[TableEntry]) -> StageResult<(Vec<TableRow>, Artifacts)> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let fci = prep.fci(cfg.mapping).at(Stage::Fci)?;
    let reference_key = if cfg.integrals.is_none() && cfg.overrides == SystemOverrides::default() {
        cfg.system.clone()
    } else {
        String::new()
    };
    let analytic = RunConfig {
        mode: ModeKind::Analytic,
        params_in: None,
        ..cfg.clone()
    };
    let mut rows = Vec::new();
    for entry in entries {
        let (ansatz, key) = match entry {
            TableEntry::Pool(l) => (AnsatzSpec::Ucc(l.clone()), pool_key(l)),
            TableEntry::Lucj => (AnsatzSpec::Lucj, "lucj".to_string()),
        };
        let run_cfg = RunConfig { ansatz, ..analytic.clone() };
        let opt = optimize(&run_cfg, &prep)?;
        let res = resource_report(&run_cfg, &opt.circuit).at(Stage::Resources)?;
        rows.push(TableRow {
            label: entry.label(),
            energy: opt.result.energy,
            resources: Some(res),
            reference: reference_row(&reference_key, &key),
        });
    }
    for (label, energy) in [("hf", prep.e_hf), ("fci", fci.energy)] {
        rows.push(TableRow {
            label: label.into(),
            energy,
            resources: None,
            reference: reference_row(&reference_key, label),
        });
    }
    let mut art = Artifacts::new(cfg, "table1").at(Stage::Output)?;
    art.write("table1.csv", &table_csv(&rows)).at(Stage::Output)?;
    Ok((rows, art))
}

pub const TABLE_CSV_HEADER: &str =
    "row,rz,sx,cx,x,total,depth,energy,ref_rz,ref_sx,ref_cx,ref_x,ref_total,ref_depth,ref_energy,delta_energy";

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut s = format!("{TABLE_CSV_HEADER}\n");
    for r in rows {
        let ours = match &r.resources {
            Some(x) => format!("{},{},{},{},{},{}", x.count("rz"), x.count("sx"), x.count("cx"), x.count("x"), x.total, x.depth),
            None => ",,,,,".into(),
        };
        let (theirs, e_ref, delta) = match &r.reference {
            Some(p) => (
                p.counts.map_or(",,,,,".into(), |c| c.map(|v| v.to_string()).join(",")),
                format!("{:.6}", p.energy),
                format!("{:+.3e}", r.energy - p.energy),
            ),
            None => (",,,,,".into(), String::new(), String::new()),
        };
        s.push_str(&format!("\"{}\",{ours},{:.8},{theirs},{e_ref},{delta}\n", r.label, r.energy));
    }
    s
}

/// Exports the integrals (MO by default) of the configured system.
pub fn export_fcidump(cfg: &RunConfig, ao: bool, path: Option<&Path>) -> StageResult<PathBuf> {
    cfg.validate().at(Stage::Config)?;
    let prep = prepare(cfg)?;
    let ints = if ao {
        prep.ao.as_ref().ok_or_else(|| StageError {
            stage: Stage::Integrals,
            error: Error::Config("AO integrals are unavailable for imported MO integrals".into()),
        })?
    } else {
        &prep.mo
    };
    let art = Artifacts::new(cfg, "export-fcidump").at(Stage::Output)?;
    let path = path.map(Path::to_path_buf).unwrap_or_else(|| cfg.out_dir().join("integrals.fcidump"));
    std::fs::write(&path, format!("{}{}", art.header(), write_fcidump(ints)))
        .map_err(Error::from)
        .at(Stage::Output)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ansatz_spec_round_trips() {
        for s in ["ucc:t1e,t1p", "lucj", "adapt", "ucc:"] {
            let a: AnsatzSpec = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert!(matches!("ucc:t1e,t9x".parse::<AnsatzSpec>(), Err(Error::UnknownLabel(l)) if l == "t9x"));
        assert!("qaoa".parse::<AnsatzSpec>().is_err());
    }

    #[test]
    fn config_toml_round_trips_and_rejects_unknown_keys() {
        let cfg = RunConfig {
            ansatz: AnsatzSpec::Ucc(vec![ExcitationLabel::T2ee]),
            noise: Some(NoiseSpec::default()),
            mapping: Mapping::BravyiKitaev,
            ..RunConfig::default()
        }
        .resolve();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_toml("sistem = \"hhq\"").is_err());
        let partial = RunConfig::from_toml("system = \"psh\"\nmode = \"shots\"\n").unwrap().resolve();
        assert_eq!(partial.vqe.optimizer, Optimizer::Spsa);
    }

    #[test]
    fn topology_strings() {
        assert!(parse_topology("none", 6).unwrap().is_none());
        assert_eq!(parse_topology("line", 3).unwrap().unwrap().edges.len(), 2);
        assert!(parse_topology("0-1,1-4", 6).unwrap().unwrap().connects(4, 1));
        assert!(parse_topology("0_1", 6).is_err());
    }

    #[test]
    fn table_entries_parse() {
        assert!(parse_table_entries("").unwrap().is_empty());
        let e = parse_table_entries("t1e,t1p; lucj").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[1], TableEntry::Lucj);
        assert_eq!(table1_entries().len(), 7);
        assert_eq!(reference_row("HHq", "fci").unwrap().energy, -1.079434);
        assert!(reference_row("other", "fci").is_none());
    }

    #[test]
    fn stage_errors_classify_exit_codes() {
        let cfg = RunConfig {
            system: "no-such-system".into(),
            ..RunConfig::default()
        };
        let e = prepare(&cfg).unwrap_err();
        assert_eq!(e.stage, Stage::System);
        assert_eq!(e.exit_code(), 2);
        let numeric = StageError {
            stage: Stage::Scf,
            error: Error::ScfNotConverged {
                iterations: 1,
                last_energy: 0.0,
                density_change: 1.0,
            },
        };
        assert_eq!(numeric.exit_code(), 3);
        assert!(numeric.to_string().contains("`scf`"));
    }
}
