use std::path::Path;

use effham_core::apps::dispersive::{npad8_zeta, zeta4_value, zeta6_value, zeta_disp_value};
use effham_core::apps::near_resonant::{three_rotation_zeta, two_rotation_zeta};
use effham_core::apps::omega_zx_pipeline;
use effham_core::apps::DispersiveParams;
use effham_core::cqed::{cz_subspace_parameters, CqedParams, ModelParams};
use effham_core::expr::{emit, node_count, Evaluator, Format};
use effham_core::linalg::{eig_oracle, matrix_from_json, MatrixJson};
use effham_core::npad::{npad_diagonalize, NpadConfig};
use effham_core::rswt::{commutator_count_rswt, commutator_count_swt, rswt, RswtMode};
use effham_core::{Expr, ParamEnv, C64};
use serde_json::{json, Value};

use crate::config::load_params;
use crate::error::{CliError, CliResult};
use crate::figures::{chain_defaults, fig3_defaults, fig5_defaults};
use crate::table::fmt_num;
use crate::{Common, EmitFormat, Pipeline};

pub fn diag(matrix: &Path, c: &Common) -> CliResult<Value> {
    let text = std::fs::read_to_string(matrix).map_err(|e| CliError::Input(format!("{}: {e}", matrix.display())))?;
    let h = matrix_from_json(&text).map_err(CliError::input)?;
    let method = match c.method.as_slice() {
        [] => "npad",
        [m] => m.as_str(),
        _ => return Err(CliError::Input("diag takes a single --method".into())),
    };
    let oracle = eig_oracle(&h)?;
    let (result, eigenvalues) = match method {
        "npad" => {
            let cfg = NpadConfig::with_tolerance(c.tol.unwrap_or(NpadConfig::default().tolerance));
            let res = npad_diagonalize(&h, &cfg)?;
            if !res.converged {
                return Err(CliError::Compute(format!(
                    "no convergence after {} rotations",
                    res.rotations.len()
                )));
            }
            println!("rotations: {}", res.rotations.len());
            let mut v: Value = serde_json::from_str(&res.to_json()).expect("library JSON parses");
            let eig = res.sorted_diagonal();
            v["method"] = json!("npad");
            (v, eig)
        }
        "rswt" => {
            let order = c.order.unwrap_or(2);
            let (h_k, trace) = rswt(&h, order, &RswtMode::Full)?;
            if trace.bound_warning {
                eprintln!("warning: generator norm {:?} is at least 1/2", trace.s1_norm);
            }
            let mut eig = h_k.real_diagonal();
            eig.sort_by(f64::total_cmp);
            let v = json!({
                "method": "rswt",
                "order": order,
                "h_final": MatrixJson::from(&h_k),
                "trace": trace.to_json(),
            });
            (v, eig)
        }
        "oracle" => {
            println!("sweeps: {}", oracle.sweeps);
            (json!({ "method": "oracle", "sweeps": oracle.sweeps }), oracle.values.clone())
        }
        other => return Err(CliError::Input(format!("unknown method `{other}` (npad, rswt or oracle)"))),
    };
    let mut result = result;
    result["eigenvalues"] = json!(eigenvalues);
    std::fs::write(c.out.join("result.json"), serde_json::to_string_pretty(&result).expect("serializes"))?;

    let shown: Vec<String> = eigenvalues.iter().map(|&e| fmt_num(e)).collect();
    println!("eigenvalues: {}", shown.join(" "));
    let diff = eigenvalues
        .iter()
        .zip(&oracle.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max |diff| vs oracle: {diff:e}");
    Ok(result)
}

/// Published commutator counts for K = 2..8.
const TABLE_SWT: [u128; 7] = [1, 4, 11, 26, 57, 120, 247];
const TABLE_RSWT: [u128; 7] = [1, 2, 4, 5, 7, 8, 11];

pub fn counts(kmax: usize, check: bool) -> CliResult<()> {
    if kmax < 2 {
        return Err(CliError::Input("--kmax must be at least 2".into()));
    }
    println!("K,SWT,RSWT");
    for k in 2..=kmax {
        println!("{k},{},{}", commutator_count_swt(k)?, commutator_count_rswt(k)?);
    }
    if check {
        for (i, k) in (2..=8).enumerate() {
            let got = (commutator_count_swt(k)?, commutator_count_rswt(k)?);
            if got != (TABLE_SWT[i], TABLE_RSWT[i]) {
                return Err(CliError::Check(format!(
                    "K = {k}: got SWT {}, RSWT {}; expected {}, {}",
                    got.0, got.1, TABLE_SWT[i], TABLE_RSWT[i]
                )));
            }
        }
        println!("table check: 14/14 counts match for K = 2..8");
    }
    Ok(())
}

pub fn param_env(p: &CqedParams) -> ParamEnv {
    ParamEnv::new()
        .with("omega1", p.omega1)
        .with("omega2", p.omega2)
        .with("alpha1", p.alpha1)
        .with("alpha2", p.alpha2)
        .with("g1", p.g1)
        .with("g2", p.g2)
        .with("omega_r", p.omega_r)
        .with("Omega", p.drive)
        .with("omega_d", p.omega_d)
}

fn dispersive<T: effham_core::Scalar>(m: &ModelParams<T>) -> DispersiveParams<T> {
    DispersiveParams {
        d1: m.omega1.clone() - m.omega_r.clone(),
        d2: m.omega2.clone() - m.omega_r.clone(),
        a1: m.alpha1.clone(),
        a2: m.alpha2.clone(),
        g1: m.g1.clone(),
        g2: m.g2.clone(),
    }
}

fn run_pipeline<T: effham_core::Scalar>(which: Pipeline, m: &ModelParams<T>, levels: &[usize]) -> CliResult<T> {
    Ok(match which {
        Pipeline::TwoRotation | Pipeline::ThreeRotation => {
            let (d, big, _) = cz_subspace_parameters(m);
            if which == Pipeline::TwoRotation {
                two_rotation_zeta(d, big, m.g1.clone(), m.g2.clone())?
            } else {
                three_rotation_zeta(d, big, m.g1.clone(), m.g2.clone())?
            }
        }
        Pipeline::Zeta4 => zeta4_value(&dispersive(m)),
        Pipeline::Zeta6 => zeta6_value(&dispersive(m)),
        Pipeline::Disp => zeta_disp_value(&dispersive(m)),
        Pipeline::Npad8 => npad8_zeta(m, levels)?,
        Pipeline::OmegaZx => omega_zx_pipeline(m, levels)?,
    })
}

pub struct Emitted {
    pub text: String,
    pub node_count: usize,
    pub value: f64,
    pub numeric: f64,
}

/// Builds the symbolic result of a pipeline, renders it, and evaluates it
/// next to the same pipeline run on numbers at the configured point.
pub fn emit_expr(which: Pipeline, format: EmitFormat, c: &Common) -> CliResult<Emitted> {
    let (defaults, subsystems) = match which {
        Pipeline::TwoRotation | Pipeline::ThreeRotation => (fig3_defaults_at_detuning(), 2),
        Pipeline::Zeta4 | Pipeline::Zeta6 | Pipeline::Disp | Pipeline::Npad8 => (chain_point(), 3),
        Pipeline::OmegaZx => (CqedParams { drive: 0.03, ..fig5_defaults() }, 2),
    };
    let p = load_params(c.config.as_deref(), defaults, c.levels)?;
    let levels = p.levels.resolve(subsystems).map_err(CliError::input)?;
    let sym: Expr = run_pipeline(which, &ModelParams::<Expr>::symbolic(), &levels)?;
    let numeric = run_pipeline(which, &p.model::<C64>(), &levels)?.re;
    let env = param_env(&p);
    let value = Evaluator::new(&env).eval(&sym)?;
    let text = emit(
        &sym,
        match format {
            EmitFormat::Infix => Format::Infix,
            EmitFormat::GraphJson => Format::GraphJson,
        },
    );
    Ok(Emitted {
        node_count: node_count(&sym),
        text,
        value,
        numeric,
    })
}

fn fig3_defaults_at_detuning() -> CqedParams {
    CqedParams {
        omega1: 5.1,
        omega2: 5.0,
        ..fig3_defaults()
    }
}

fn chain_point() -> CqedParams {
    let a = 0.33;
    let dp = DispersiveParams::from_sum_difference(-1.5 * a, 0.4 * a, -a, 0.05);
    CqedParams {
        omega1: dp.d1,
        omega2: dp.d2,
        ..chain_defaults()
    }
}
