//! Command-line front end. Every subcommand prints one JSON report; the exit
//! code is 0 on success, 1 when a check fails, 2 for usage errors and 3 for
//! numerical breakdown.

use bcmod::baker_akhiezer::{compute_xi, eigen_series};
use bcmod::commutant::{
    build_commutant, complete_principal_part, dim_dk, modular_free_slots, Commutant, GradedRingView, PrincipalPart,
};
use bcmod::elliptic::{eisenstein, EllipticConstants, ModularElement};
use bcmod::io::{parse_complex, parse_principal, OperatorJson, OperatorSource, SpectralSeriesJson};
use bcmod::modular::{verify_weight, verify_weight_based, BasedSample, Sample};
use bcmod::monodromy::{
    matrix_to_json, monodromy_matrix, sigma_permutation, ContinuationOptions, PathSpec, DEFAULT_CLEARANCE,
};
use bcmod::operator::DifferentialOperator;
use bcmod::scalar::{default_tolerance, Scalar};
use bcmod::spectral_curve::{
    bc_residual, char_poly, char_poly_cross_check, genus, rep_matrix, single_valued_criterion, PlaneCurve,
};
use bcmod::verify::{self, Check, LameRun, Report};
use bcmod::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bcmod", version, about = "Commuting differential operators, spectral curves and monodromy")]
struct Cli {
    /// Relative tolerance for z-constancy and commutator tests.
    #[arg(long, global = true, env = "BCMOD_TOL", allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Write an operator file.
    Operator {
        #[command(subcommand)]
        cmd: OperatorCmd,
    },
    /// Baker-Akhiezer coefficients.
    Ba {
        #[command(subcommand)]
        cmd: BaCmd,
    },
    Commutant {
        #[command(subcommand)]
        cmd: CommutantCmd,
    },
    Curve {
        #[command(subcommand)]
        cmd: CurveCmd,
    },
    Modular {
        #[command(subcommand)]
        cmd: ModularCmd,
    },
    Monodromy {
        #[command(subcommand)]
        cmd: MonodromyCmd,
    },
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum OperatorCmd {
    /// `d^2 - B wp` expanded at a center.
    Lame {
        #[arg(long, default_value = "2", allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value = "i", allow_hyphen_values = true)]
        omega: String,
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 24)]
        zorder: i64,
    },
}

#[derive(Args, Clone)]
struct OperatorArgs {
    /// `lame` for the built-in family, or an operator JSON file.
    #[arg(long, default_value = "lame")]
    operator: String,
    /// Lamé coupling `B` (built-in family only).
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    b: String,
    /// Lattice parameter (built-in family only).
    #[arg(long, default_value = "i", allow_hyphen_values = true)]
    omega: String,
    #[arg(long, allow_hyphen_values = true)]
    basepoint: Option<String>,
    #[arg(long, default_value_t = 24)]
    zorder: i64,
}

#[derive(Args, Clone)]
struct PrincipalArgs {
    /// `A_{-M}, ..., A_0` as a JSON array.
    #[arg(long, default_value = "[1,0,0,0]")]
    principal: String,
    /// Weight `K` of the principal part.
    #[arg(long)]
    weight: Option<i32>,
    /// Expected rank `M`; the principal part must then have `M + 1` entries.
    #[arg(long)]
    order: Option<usize>,
    /// Solve for the lower entries allowed by the weight.
    #[arg(long)]
    complete: bool,
    #[arg(long, default_value_t = 16)]
    smax: usize,
}

#[derive(Subcommand)]
enum BaCmd {
    Xi {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 8)]
        smax: usize,
    },
}

#[derive(Subcommand)]
enum CommutantCmd {
    Build {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        prin: PrincipalArgs,
        #[arg(long)]
        q_out: Option<PathBuf>,
        #[arg(long)]
        a_out: Option<PathBuf>,
    },
    Dim {
        #[arg(long = "K")]
        k: i64,
        #[arg(long = "M-cap")]
        m_cap: Option<i64>,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    Compute {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        prin: PrincipalArgs,
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    Genus {
        #[arg(long)]
        curve: PathBuf,
        /// Assert that some nonzero `A_s` has `s` coprime to `N`.
        #[arg(long)]
        coprime: bool,
    },
    VerifyBc {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        prin: PrincipalArgs,
        /// Check this curve instead of the computed one.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    VerifyWeights {
        #[command(flatten)]
        prin: PrincipalArgs,
        #[arg(long, default_value = "2", allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        omega_grid: Option<String>,
    },
}

#[derive(Subcommand)]
enum ModularCmd {
    VerifyWeight {
        /// wp, g2, g3, f10, f00, xi1 .. xi8
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        weight: i32,
        /// S, T or `a,b,c,d`.
        #[arg(long, default_value = "S", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        omega_grid: Option<String>,
        #[arg(long, default_value = "0.31+0.17i", allow_hyphen_values = true)]
        z: String,
    },
    Eisenstein {
        #[arg(long, default_value = "i", allow_hyphen_values = true)]
        omega: String,
        #[arg(long, default_value_t = 4)]
        weight: i32,
    },
}

#[derive(Subcommand)]
enum MonodromyCmd {
    Run {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long = "X", default_value = "2", allow_hyphen_values = true)]
        x: String,
        /// Loop JSON `{"vertices": [[re, im], ...]}`.
        #[arg(long = "loop")]
        loop_path: PathBuf,
        /// Principal part of `Q` for the branch permutation; omit to skip it.
        #[arg(long)]
        principal: Option<String>,
        #[arg(long)]
        weight: Option<i32>,
        #[arg(long, default_value_t = 1e-9)]
        ode_tol: f64,
        #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
        clearance: f64,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    All {
        #[arg(long, default_value = "lame")]
        preset: String,
        #[arg(long, default_value = "i", allow_hyphen_values = true)]
        omega: String,
        /// Semicolon-separated lattice parameters; overrides `--omega`.
        #[arg(long)]
        omega_grid: Option<String>,
        /// Also write one CSV row per (omega, check).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

struct Ctx {
    tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        tol: cli.tol.unwrap_or_else(default_tolerance),
    };
    if !ctx.tol.is_finite() || ctx.tol <= 0.0 {
        return finish(Err(Error::Usage("tolerance must be positive".into())), &cli.out);
    }
    let result = run(&cli.group, &ctx);
    finish(result, &cli.out)
}

fn finish(result: Result<Value>, out: &Option<PathBuf>) -> ExitCode {
    match result {
        Ok(report) => {
            let passed = report.get("passed").and_then(Value::as_bool).unwrap_or(true);
            let text = serde_json::to_string_pretty(&report).expect("serializable");
            if let Some(path) = out {
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("{}", json!({"error": e.to_string(), "exit_code": 2}));
                    return ExitCode::from(2);
                }
            } else {
                // a closed pipe downstream is not our failure
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", json!({"error": e.to_string(), "exit_code": code}));
            ExitCode::from(code as u8)
        }
    }
}

fn run(group: &Group, ctx: &Ctx) -> Result<Value> {
    match group {
        Group::Operator { cmd } => match cmd {
            OperatorCmd::Lame { b, omega, center, zorder } => {
                let src = OperatorSource::Lame {
                    b: parse_complex(b)?,
                    omega: parse_omega(omega)?,
                };
                let op = src.at(parse_complex(center)?, *zorder)?;
                Ok(serde_json::to_value(OperatorJson::from_operator(&op, src.family()))?)
            }
        },
        Group::Ba { cmd } => match cmd {
            BaCmd::Xi { op, smax } => ba_xi(op, *smax, ctx),
        },
        Group::Commutant { cmd } => match cmd {
            CommutantCmd::Build { op, prin, q_out, a_out } => commutant_build(op, prin, q_out, a_out, ctx),
            CommutantCmd::Dim { k, m_cap } => {
                let cap = m_cap.unwrap_or(*k);
                Ok(json!({
                    "K": k,
                    "M_cap": cap,
                    "dim": dim_dk(*k, cap),
                    "graded_pieces": GradedRingView::new(*k, cap),
                    "passed": true,
                }))
            }
        },
        Group::Curve { cmd } => match cmd {
            CurveCmd::Compute { op, prin, curve_out } => curve_compute(op, prin, curve_out, ctx),
            CurveCmd::Genus { curve, coprime } => {
                let f: PlaneCurve = serde_json::from_str(&std::fs::read_to_string(curve)?)?;
                let g = genus(&f)?;
                let crit = if *coprime {
                    Some(single_valued_criterion(f.n, &g, true)?)
                } else {
                    None
                };
                Ok(json!({
                    "genus": g,
                    "single_valued_criterion": crit,
                    "note": if crit.is_none() { Some("pass --coprime to evaluate the criterion") } else { None },
                    "passed": true,
                }))
            }
            CurveCmd::VerifyBc { op, prin, curve } => curve_verify_bc(op, prin, curve, ctx),
            CurveCmd::VerifyWeights { prin, b, omega_grid } => curve_verify_weights(prin, b, omega_grid, ctx),
        },
        Group::Modular { cmd } => match cmd {
            ModularCmd::VerifyWeight {
                quantity,
                weight,
                alpha,
                omega_grid,
                z,
            } => modular_verify_weight(quantity, *weight, alpha, omega_grid, z),
            ModularCmd::Eisenstein { omega, weight } => {
                let om = parse_omega(omega)?;
                let e = eisenstein(om, *weight)?;
                Ok(json!({
                    "omega": [om.re, om.im],
                    "weight": weight,
                    "value": [e.value.re, e.value.im],
                    "agreement": e.agreement,
                    "expansion": e.expansion,
                    "passed": true,
                }))
            }
        },
        Group::Monodromy { cmd } => match cmd {
            MonodromyCmd::Run {
                op,
                x,
                loop_path,
                principal,
                weight,
                ode_tol,
                clearance,
            } => monodromy_run(op, x, loop_path, principal, *weight, *ode_tol, *clearance, ctx),
        },
        Group::Verify { cmd } => match cmd {
            VerifyCmd::All {
                preset,
                omega,
                omega_grid,
                csv,
            } => verify_all(preset, omega, omega_grid, csv),
        },
    }
}

fn parse_omega(s: &str) -> Result<Scalar> {
    let om = parse_complex(s)?;
    if om.im <= 0.0 {
        return Err(Error::Usage(format!("lattice parameter {s} must have positive imaginary part")));
    }
    Ok(om)
}

fn parse_grid(s: &Option<String>, default: Vec<Scalar>) -> Result<Vec<Scalar>> {
    match s {
        None => Ok(default),
        Some(s) => s.split(';').filter(|t| !t.trim().is_empty()).map(parse_omega).collect(),
    }
}

fn source(op: &OperatorArgs) -> Result<OperatorSource> {
    if op.operator == "lame" {
        Ok(OperatorSource::Lame {
            b: parse_complex(&op.b)?,
            omega: parse_omega(&op.omega)?,
        })
    } else {
        OperatorSource::load(std::path::Path::new(&op.operator))
    }
}

fn operator_at(op: &OperatorArgs) -> Result<(OperatorSource, DifferentialOperator)> {
    let src = source(op)?;
    let w = match &op.basepoint {
        Some(s) => parse_complex(s)?,
        None => src.default_basepoint(),
    };
    let p = src.at(w, op.zorder)?;
    Ok((src, p))
}

fn principal(prin: &PrincipalArgs) -> Result<PrincipalPart> {
    let entries = parse_principal(&prin.principal)?;
    if let Some(m) = prin.order {
        if entries.len() != m + 1 {
            return Err(Error::Usage(format!(
                "rank {m} needs {} principal entries, got {}",
                m + 1,
                entries.len()
            )));
        }
    }
    if entries.is_empty() {
        return Err(Error::Usage("principal part is empty".into()));
    }
    let weight = prin.weight.unwrap_or(entries.len() as i32 - 1);
    PrincipalPart::new(weight, entries)
}

fn commutant_of(p: &DifferentialOperator, prin: &PrincipalArgs, ctx: &Ctx) -> Result<Commutant> {
    let part = principal(prin)?;
    let s_max = prin.smax.max(part.m);
    let ba = compute_xi(p, s_max)?;
    let part = if prin.complete {
        let free = modular_free_slots(part.weight as i64, part.m);
        complete_principal_part(p, &part, &free, &ba)?
    } else {
        part
    };
    build_commutant(p, &part, &ba, ctx.tol.max(1e-9))
}

fn report(fields: Value, checks: Vec<Check>) -> Value {
    let r = Report::new(checks);
    let mut v = fields;
    v["checks"] = serde_json::to_value(&r.checks).expect("serializable");
    v["passed"] = json!(r.passed);
    v
}

fn ba_xi(op: &OperatorArgs, smax: usize, ctx: &Ctx) -> Result<Value> {
    let (_, p) = operator_at(op)?;
    let ba = compute_xi(&p, smax)?;
    let normalization = ba.xi[1..].iter().map(|x| x.coeff_or_zero(0).norm()).fold(0.0, f64::max);
    let self_series = eigen_series(&p, &ba, ctx.tol.max(1e-9))?;
    let mut lam = vec![Scalar::new(0.0, 0.0); p.order + 1];
    lam[0] = Scalar::new(1.0, 0.0);
    let eigen_gap = (-(p.order as i64)..=self_series.s_max())
        .map(|s| {
            let target = if s == -(p.order as i64) { 1.0 } else { 0.0 };
            (self_series.coeffs.coeff_or_zero(s) - target).norm()
        })
        .fold(0.0, f64::max);
    let w = p.center();
    Ok(report(
        json!({
            "basepoint": [w.re, w.im],
            "order": p.order,
            "xi": ba.xi,
        }),
        vec![
            Check::below("xi.normalized_at_basepoint", normalization, 1e-12),
            Check::below("xi.eigen_equation", eigen_gap.max(self_series.z_dependence), 1e-9),
        ],
    ))
}

fn commutant_build(
    op: &OperatorArgs,
    prin: &PrincipalArgs,
    q_out: &Option<PathBuf>,
    a_out: &Option<PathBuf>,
    ctx: &Ctx,
) -> Result<Value> {
    let (_, p) = operator_at(op)?;
    let c = commutant_of(&p, prin, ctx)?;
    let q_json = OperatorJson::from_operator(&c.q, None);
    let a_json = SpectralSeriesJson::from(&c.spectral);
    if let Some(path) = q_out {
        std::fs::write(path, serde_json::to_string_pretty(&q_json)?)?;
    }
    if let Some(path) = a_out {
        std::fs::write(path, serde_json::to_string_pretty(&a_json)?)?;
    }
    Ok(report(
        json!({
            "Q": q_json,
            "A": a_json,
            "principal": c.spectral.principal().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        }),
        vec![
            Check::below("commutant.commutator", c.commutator_residual, 1e-8),
            Check::below("commutant.z_dependence", c.spectral.z_dependence, 1e-9),
        ],
    ))
}

fn curve_compute(op: &OperatorArgs, prin: &PrincipalArgs, curve_out: &Option<PathBuf>, ctx: &Ctx) -> Result<Value> {
    let (_, p) = operator_at(op)?;
    let c = commutant_of(&p, prin, ctx)?;
    let jm = rep_matrix(&p, &c.q)?;
    let f = char_poly(&jm, c.q.order, c.spectral.weight);
    if let Some(path) = curve_out {
        std::fs::write(path, serde_json::to_string_pretty(&f)?)?;
    }
    let g = genus(&f).ok();
    let coprime = c.spectral.has_coprime_term(p.order, 1e-9);
    let crit = match &g {
        Some(g) if coprime => Some(single_valued_criterion(p.order, g, true)?),
        _ => None,
    };
    Ok(report(
        json!({
            "curve": f,
            "genus": g,
            "single_valued_criterion": crit,
        }),
        vec![
            Check::below("curve.det_cross_check", char_poly_cross_check(&jm, &f), 1e-9),
            Check::below("curve.bc", bc_residual(&f, &p, &c.q, 1e-12)?, 1e-8),
        ],
    ))
}

fn curve_verify_bc(op: &OperatorArgs, prin: &PrincipalArgs, curve: &Option<PathBuf>, ctx: &Ctx) -> Result<Value> {
    let (_, p) = operator_at(op)?;
    let c = commutant_of(&p, prin, ctx)?;
    let f = match curve {
        Some(path) => serde_json::from_str::<PlaneCurve>(&std::fs::read_to_string(path)?)?,
        None => char_poly(&rep_matrix(&p, &c.q)?, c.q.order, c.spectral.weight),
    };
    let r = bc_residual(&f, &p, &c.q, 1e-12)?;
    Ok(report(json!({ "curve": f }), vec![Check::below("bc.residual", r, 1e-8)]))
}

fn curve_verify_weights(prin: &PrincipalArgs, b: &str, omega_grid: &Option<String>, ctx: &Ctx) -> Result<Value> {
    let b = parse_complex(b)?;
    let grid = parse_grid(omega_grid, verify::weight_samples())?;
    let base = {
        let run = LameRun::new(grid[0], b, Scalar::new(0.5, 0.0))?;
        let p = run.p.clone();
        let c = commutant_of(&p, prin, ctx)?;
        run.curve(&c)?.1
    };
    let kk = base
        .weight_k
        .ok_or_else(|| Error::Usage("pass --weight for the weight law".into()))?;
    let mut checks = Vec::new();
    for (j, k, _) in base.terms(1e-9) {
        let wt = base.coeff_weight(j, k).expect("weight known");
        if wt == 0 {
            continue;
        }
        let f = |om: Scalar, _z: Scalar| -> Result<Scalar> {
            let run = LameRun::new(om, b, Scalar::new(0.5, 0.0))?;
            let c = commutant_of(&run.p, prin, ctx)?;
            Ok(run.curve(&c)?.1.f(j, k))
        };
        let samples: Vec<Sample> = grid.iter().map(|&om| Sample::omega(om)).collect();
        for (name, alpha) in [("S", ModularElement::S), ("T", ModularElement::T)] {
            let r = verify_weight(&f, wt as i32, &alpha, &samples);
            let mut ch = Check::below(format!("weight.f{j}{k}.{name}"), r.max_rel_error, 1e-7);
            ch.passed &= r.checked > 0;
            checks.push(ch.with_note(format!("weight {wt}, {} samples", r.checked)));
        }
    }
    Ok(report(json!({ "K": kk, "curve": base }), checks))
}

fn modular_verify_weight(
    quantity: &str,
    weight: i32,
    alpha: &str,
    omega_grid: &Option<String>,
    z: &str,
) -> Result<Value> {
    let alpha = ModularElement::parse(alpha)?;
    let grid = parse_grid(omega_grid, verify::weight_samples())?;
    let z = parse_complex(z)?;
    let half = Scalar::new(0.5, 0.0);
    let r = match quantity {
        "wp" => {
            let f = |om: Scalar, z: Scalar| EllipticConstants::new(om)?.wp(z);
            let samples: Vec<Sample> = grid.iter().map(|&om| Sample { omega: om, z }).collect();
            verify_weight(&f, weight, &alpha, &samples)
        }
        "g2" | "g3" => {
            let wt = if quantity == "g2" { 4 } else { 6 };
            let f = move |om: Scalar, _z: Scalar| Ok(eisenstein(om, wt)?.value);
            let samples: Vec<Sample> = grid.iter().map(|&om| Sample::omega(om)).collect();
            verify_weight(&f, weight, &alpha, &samples)
        }
        "f10" | "f00" => {
            let j = if quantity == "f10" { 1 } else { 0 };
            let f = move |om: Scalar, _z: Scalar| -> Result<Scalar> {
                let run = LameRun::with_window(om, Scalar::new(2.0, 0.0), half, verify::Z_ORDER, 8)?;
                let q = run.commutant(&PrincipalPart::new(3, verify::monic(3))?, 1e-9)?;
                Ok(run.curve(&q)?.1.f(j, 0))
            };
            let samples: Vec<Sample> = grid.iter().map(|&om| Sample::omega(om)).collect();
            verify_weight(&f, weight, &alpha, &samples)
        }
        q if q.starts_with("xi") => {
            let s: usize = q[2..]
                .parse()
                .map_err(|_| Error::Usage(format!("unknown quantity {q}")))?;
            if s == 0 || s > 8 {
                return Err(Error::Usage("xi index must be in 1..=8".into()));
            }
            let f = move |om: Scalar, z: Scalar, w: Scalar| -> Result<Scalar> {
                let run = LameRun::with_window(om, Scalar::new(2.0, 0.0), w, verify::Z_ORDER, s)?;
                Ok(run.ba.xi[s].evaluate(z))
            };
            let samples: Vec<BasedSample> = grid
                .iter()
                .map(|&om| BasedSample {
                    omega: om,
                    z: half + (z - half) * 0.3,
                    w: half,
                })
                .collect();
            verify_weight_based(&f, weight, &alpha, &samples)
        }
        other => return Err(Error::Usage(format!("unknown quantity {other}"))),
    };
    let mut ch = Check::below(format!("weight.{quantity}"), r.max_rel_error, 1e-7);
    ch.passed &= r.checked > 0;
    Ok(report(json!({ "weight_report": r }), vec![ch]))
}

#[allow(clippy::too_many_arguments)]
fn monodromy_run(
    op: &OperatorArgs,
    x: &str,
    loop_path: &PathBuf,
    principal_text: &Option<String>,
    weight: Option<i32>,
    ode_tol: f64,
    clearance: f64,
    ctx: &Ctx,
) -> Result<Value> {
    if ode_tol.is_nan() || clearance.is_nan() || ode_tol <= 0.0 || clearance <= 0.0 {
        return Err(Error::Usage("tolerances must be positive".into()));
    }
    let path: PathSpec = serde_json::from_str(&std::fs::read_to_string(loop_path)?)?;
    let mut args = op.clone();
    let w = path.basepoint();
    args.basepoint = Some(format!("{}{:+}i", w.re, w.im));
    let (_, p) = operator_at(&args)?;
    let x = parse_complex(x)?;
    let opts = ContinuationOptions {
        tol: ode_tol,
        clearance,
        ..Default::default()
    };
    let m = monodromy_matrix(&p, x, &path, &opts)?;
    let eig = m.eigenvalues()?;
    let det = m.det();
    let mut checks = Vec::new();
    if p.order >= 2 && p.coeff_of(p.order - 1).magnitude() == 0.0 {
        checks.push(Check::below("monodromy.det", (det - Scalar::new(1.0, 0.0)).norm(), 1e-6));
    }
    let mut sigma = None;
    if let Some(text) = principal_text {
        let prin = PrincipalArgs {
            principal: text.clone(),
            weight,
            order: None,
            complete: false,
            smax: 16,
        };
        let c = commutant_of(&p, &prin, ctx)?;
        let s = sigma_permutation(&p, &c.q, x, &path, &opts)?;
        let n_fact: u64 = (1..=p.order as u64).product();
        checks.push(Check::flag(
            "monodromy.sigma_finite_order",
            s.pow(n_fact).is_identity(),
            format!("sigma = {:?}", s.perm),
        ));
        sigma = Some(s);
    }
    Ok(report(
        json!({
            "X": [x.re, x.im],
            "loop": path,
            "matrix": matrix_to_json(&m.matrix),
            "eigenvalues": eig.iter().map(|e| [e.re, e.im]).collect::<Vec<_>>(),
            "det": [det.re, det.im],
            "permutation": sigma,
        }),
        checks,
    ))
}

fn verify_all(preset: &str, omega: &str, omega_grid: &Option<String>, csv: &Option<PathBuf>) -> Result<Value> {
    if preset != "lame" {
        return Err(Error::Usage(format!("unknown preset {preset}; available: lame")));
    }
    let grid = parse_grid(omega_grid, vec![parse_omega(omega)?])?;
    // one job per lattice parameter, merged in grid order
    let results: Vec<Result<Report>> = std::thread::scope(|s| {
        let handles: Vec<_> = grid.iter().map(|&om| s.spawn(move || verify::run_all(om))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Verification("worker panicked".into()))))
            .collect()
    });
    let mut runs = Vec::new();
    let mut rows = vec!["omega_re,omega_im,check,passed,residual,threshold,informational".to_string()];
    let mut passed = true;
    for (om, r) in grid.iter().zip(results) {
        let r = r?;
        passed &= r.passed;
        for c in &r.checks {
            rows.push(format!(
                "{},{},{},{},{:e},{:e},{}",
                om.re, om.im, c.name, c.passed, c.residual, c.threshold, c.informational
            ));
        }
        let lam = OperatorSource::Lame {
            b: Scalar::new(2.0, 0.0),
            omega: *om,
        };
        let k = EllipticConstants::new(*om)?;
        runs.push(json!({
            "omega": [om.re, om.im],
            "operator": lam.family(),
            "g2_over_4": [k.g2.re / 4.0, k.g2.im / 4.0],
            "g3_over_4": [k.g3.re / 4.0, k.g3.im / 4.0],
            "passed": r.passed,
            "failures": r.failures().iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "checks": r.checks,
        }));
    }
    if let Some(path) = csv {
        std::fs::write(path, rows.join("\n") + "\n")?;
    }
    Ok(json!({ "preset": preset, "runs": runs, "passed": passed }))
}
