//! Subcommands and their JSON output.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetcalc::deform::{biham_mc_residual, mc_residual, miura_push, obstruction, Cochain, EpsilonDeformation, GradedSlice};
use jetcalc::dkdv::{
    dkdv_pencil, hierarchy, psi, psi_residual, psi_solution, quasi_trivialize, symmetry_space, QuasiTriviality,
};
use jetcalc::schouten::{are_compatible, bracket, d_h, is_hamiltonian};
use jetcalc::variational::{
    bivector_to_operator, normalize, operator_to_bivector, variational_derivative, EvolutionaryVF, MultiVector,
    OperatorMatrix, Slot,
};
use jetcalc::{Algebra, DiffOperator, SuperPolynomial};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::parse::{parse_density, parse_operator, ParseError};

#[derive(Parser, Debug)]
#[command(name = "jetcalc", version, about = "Exact variational calculus on jet space")]
pub struct Cli {
    #[command(flatten)]
    pub global: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Globals {
    /// Work in the algebra with u_1 inverted.
    #[arg(long, global = true)]
    pub hat: bool,
    #[arg(long, global = true)]
    pub max_order: Option<u16>,
    #[arg(long, global = true)]
    pub max_udeg: Option<i32>,
    /// Compact JSON (default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotArg {
    U,
    Theta,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Schouten bracket of the classes of two densities.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Total derivative.
    Dtot {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Variational derivative at a given level.
    Vder {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_enum, default_value = "u")]
        slot: SlotArg,
        #[arg(long, default_value_t = 0)]
        level: u16,
    },
    /// The operator sum_alpha theta_alpha delta/delta theta_alpha.
    Normalize {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    CheckHamiltonian { d: String },
    CheckCompatible { d1: String, d2: String },
    /// Hamiltonians H_{-1}, ..., H_N of the dispersionless KdV hierarchy.
    Hierarchy {
        #[arg(long)]
        n: usize,
    },
    /// Joint symmetries of the dispersionless KdV pencil in one degree.
    Symmetries {
        #[arg(long)]
        degree: i64,
    },
    /// Maurer-Cartan residuals of an epsilon-series read from a manifest.
    Obstruction { manifest: PathBuf },
    /// Quasi-triviality witness for (0, c_1), with c_1 = d_P int g theta dx or given directly.
    QuasiTrivialize {
        #[arg(long, required_unless_present = "c1", conflicts_with = "c1", allow_hyphen_values = true)]
        g: Option<String>,
        /// Bivector density of c_1.
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<String>,
        #[arg(long)]
        degree: i64,
    },
    /// Push an epsilon-series along exp(-eps^p ad_X).
    MiuraPush {
        manifest: PathBuf,
        /// Characteristic of X.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 1)]
        weight: usize,
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// The equation for the order-2 quasi-Miura correction of KdV.
    PsiCheck,
    /// Runs the built-in identities.
    Selftest,
}

/// Deformation manifest.
///
/// ```json
/// {"base": "D: u*del + 1/2*u_1", "corrections": {"2": "D: 3/2*del^3"}, "truncation": 4,
///  "partner": {"base": "D: del"}}
/// ```
///
/// Keys of `corrections` are powers of epsilon; `truncation` defaults to the
/// largest key. With a `partner` the pair is also checked as a pencil.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub base: String,
    #[serde(default)]
    pub corrections: BTreeMap<usize, String>,
    pub truncation: Option<usize>,
    #[serde(default)]
    pub hat: bool,
    pub partner: Option<Box<Manifest>>,
}

/// Exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    False = 1,
    Usage = 2,
}

#[derive(Debug)]
pub enum Failure {
    Parse(ParseError),
    Engine(jetcalc::Error),
    Input(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

impl From<jetcalc::Error> for Failure {
    fn from(e: jetcalc::Error) -> Self {
        Failure::Engine(e)
    }
}

type Outcome = Result<(Value, Status), Failure>;

fn success(v: Value) -> Outcome {
    Ok((v, Status::Success))
}

fn verdict(v: Value, holds: bool) -> Outcome {
    Ok((v, if holds { Status::Success } else { Status::False }))
}

impl Failure {
    pub fn to_json(&self) -> (Value, Status) {
        match self {
            Failure::Parse(e) => (
                json!({"error": {"code": "parse_error", "message": e.message, "column": e.column, "token": e.token, "expected": e.expected}}),
                Status::Usage,
            ),
            Failure::Engine(e) => (json!({"error": {"code": e.code(), "message": e.to_string()}}), Status::False),
            Failure::Input(m) => (json!({"error": {"code": "input", "message": m}}), Status::Usage),
        }
    }
}

/// Expression text, or standard input for `-`.
fn text(arg: &str) -> Result<String, Failure> {
    if arg != "-" {
        return Ok(arg.to_string());
    }
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(s.trim().to_string())
}

fn algebra(g: &Globals) -> Algebra {
    if g.hat {
        Algebra::HAT
    } else {
        Algebra::SCALAR
    }
}

fn density(arg: &str, alg: Algebra) -> Result<SuperPolynomial, Failure> {
    Ok(parse_density(&text(arg)?, alg)?)
}

fn operator(arg: &str, alg: Algebra) -> Result<DiffOperator, Failure> {
    Ok(parse_operator(&text(arg)?, alg)?)
}

fn bivector_of(op: DiffOperator) -> Result<MultiVector, Failure> {
    Ok(operator_to_bivector(&OperatorMatrix::scalar(op))?)
}

fn bivector_json(b: &MultiVector) -> Value {
    let op = bivector_to_operator(b).ok().map(|o| format!("D: {}", o.entry(1, 1)));
    json!({"density": b.rep().to_string(), "operator": op})
}

fn series(m: &Manifest, alg: Algebra) -> Result<EpsilonDeformation, Failure> {
    let alg = if m.hat { Algebra::HAT } else { alg };
    let base = bivector_of(parse_operator(&m.base, alg)?)?;
    let top = m.corrections.keys().max().copied().unwrap_or(0);
    if m.corrections.contains_key(&0) {
        return Err(Failure::Input("corrections start at epsilon^1".into()));
    }
    let mut corr = vec![MultiVector::zero(alg, 2); top];
    for (k, text) in &m.corrections {
        corr[k - 1] = bivector_of(parse_operator(text, alg)?)?;
    }
    Ok(EpsilonDeformation::new(base, corr, m.truncation.unwrap_or(top))?)
}

fn read_manifest(path: &PathBuf) -> Result<Manifest, Failure> {
    let s = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn class(dens: &SuperPolynomial) -> Result<MultiVector, Failure> {
    Ok(MultiVector::from_density(dens)?)
}

pub fn run(cli: &Cli) -> (Value, Status) {
    match dispatch(cli) {
        Ok(r) => r,
        Err(f) => f.to_json(),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let alg = algebra(g);
    match &cli.command {
        Command::Bracket { a, b } => {
            let r = bracket(&class(&density(a, alg)?)?, &class(&density(b, alg)?)?)?;
            success(json!({"bracket": r.rep().to_string(), "theta_degree": r.theta_degree()}))
        }
        Command::Dtot { expr } => success(json!({"result": density(expr, alg)?.total_derivative().to_string()})),
        Command::Vder { expr, slot, level } => {
            let s = match slot {
                SlotArg::U => Slot::U(1),
                SlotArg::Theta => Slot::Theta(1),
            };
            success(json!({"result": variational_derivative(&density(expr, alg)?, s, *level).to_string()}))
        }
        Command::Normalize { expr } => success(json!({"result": normalize(&density(expr, alg)?).to_string()})),
        Command::CheckHamiltonian { d } => {
            let b = bivector_of(operator(d, alg)?)?;
            let h = is_hamiltonian(&b)?;
            verdict(json!({"hamiltonian": h, "bivector": b.rep().to_string()}), h)
        }
        Command::CheckCompatible { d1, d2 } => {
            let p = bivector_of(operator(d1, alg)?)?;
            let q = bivector_of(operator(d2, alg)?)?;
            let c = are_compatible(&p, &q)?;
            verdict(json!({"compatible": c}), c)
        }
        Command::Hierarchy { n } => {
            let h = hierarchy(*n)?;
            let list: Vec<Value> = (-1..=*n as i64)
                .map(|i| json!({"index": i, "density": h.density(i).to_string()}))
                .collect();
            success(json!({"hierarchy": list}))
        }
        Command::Symmetries { degree } => {
            let slice = GradedSlice::bounds(g.max_order.unwrap_or((*degree).max(1) as u16), g.max_udeg.unwrap_or(6));
            let basis = symmetry_space(*degree, &slice)?;
            let chars: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
            success(json!({"degree": degree, "dimension": chars.len(), "basis": chars}))
        }
        Command::Obstruction { manifest } => obstruction_command(&read_manifest(manifest)?, alg),
        Command::QuasiTrivialize { g: gen, c1, degree } => {
            let s = Algebra::SCALAR;
            let c1 = match (gen, c1) {
                (Some(gen), _) => {
                    let gen = density(gen, s)?;
                    let x = MultiVector::from_density_with_degree(&(&gen * &s.theta(0)), 1)?;
                    d_h(dkdv_pencil().p(), &x)?
                }
                (None, Some(c)) => MultiVector::from_density_with_degree(&density(c, s)?, 2)?,
                (None, None) => return Err(Failure::Input("one of --g, --c1 is required".into())),
            };
            let tail = Cochain::new(vec![MultiVector::zero(s, 2), c1.clone()])?;
            match quasi_trivialize(&tail, *degree)? {
                QuasiTriviality::Trivialized(w) => success(json!({
                    "trivial": true,
                    "c1": c1.rep().to_string(),
                    "witness": w.b0.rep().to_string(),
                    "vector_field": w.vector_field.characteristic()[0].to_string(),
                })),
                QuasiTriviality::NontrivialAtDegreeZero => verdict(
                    json!({"trivial": false, "reason": "nontrivial_at_degree_zero", "c1": c1.rep().to_string()}),
                    false,
                ),
            }
        }
        Command::MiuraPush { manifest, x, weight, truncation } => {
            let m = read_manifest(manifest)?;
            let d = series(&m, alg)?;
            let n = truncation.unwrap_or(d.truncation());
            let vf = EvolutionaryVF::scalar(density(x, alg)?)?;
            let out = miura_push(&d, &vf, *weight, n)?;
            let terms: Vec<Value> = (0..=n)
                .map(|k| {
                    let mut t = bivector_json(&out.term(k));
                    t["order"] = json!(k);
                    t
                })
                .collect();
            success(json!({"terms": terms, "truncation": n}))
        }
        Command::PsiCheck => {
            let residual = psi_residual(&psi(), &Algebra::HAT.u(3));
            let solution = psi_solution();
            verdict(
                json!({
                    "holds": residual.is_zero(),
                    "psi": psi().to_string(),
                    "residual": residual.to_string(),
                    "solution": solution.to_string(),
                    "solution_holds": psi_residual(&solution, &Algebra::HAT.u(3)).is_zero(),
                }),
                residual.is_zero(),
            )
        }
        Command::Selftest => {
            let checks = crate::selftest::run()?;
            let passed = checks.values().all(|v| *v);
            verdict(json!({"checks": checks, "passed": passed}), passed)
        }
    }
}

fn obstruction_command(m: &Manifest, alg: Algebra) -> Outcome {
    let d = series(m, alg)?;
    let residuals = mc_residual(&d)?;
    let first = residuals.iter().position(|r| !r.is_zero());
    let res: Vec<String> = residuals.iter().map(|r| r.rep().to_string()).collect();
    let mut out = json!({
        "truncation": d.truncation(),
        "residuals": res,
        "maurer_cartan": first.is_none(),
        "first_violation": first,
    });
    if first.is_none() && d.truncation() > 0 {
        out["obstruction"] = json!(obstruction(&d, d.truncation())?.rep().to_string());
    }
    let mut holds = first.is_none();
    if let Some(p) = &m.partner {
        let q = series(p, alg)?;
        let (d, q) = if d.algebra() == q.algebra() { (d, q) } else { (d.to_hat()?, q.to_hat()?) };
        let pair = biham_mc_residual(&d, &q)?;
        let list: Vec<Value> = pair
            .iter()
            .map(|[a, b, c]| json!([a.rep().to_string(), b.rep().to_string(), c.rep().to_string()]))
            .collect();
        let ok = pair.iter().flatten().all(|r| r.is_zero());
        out["pencil_residuals"] = json!(list);
        out["pencil"] = json!(ok);
        holds &= ok;
    }
    verdict(out, holds)
}

/// JSON text in the requested layout.
pub fn render(v: &Value, g: &Globals) -> String {
    if g.pretty {
        serde_json::to_string_pretty(v).expect("serializable")
    } else {
        serde_json::to_string(v).expect("serializable")
    }
}
