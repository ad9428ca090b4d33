//! Problem definition files: UTF-8 `key=value` lines with keys `name`, `T`,
//! `f`, `k1`, `k2`, and optional `exact`. Values of `f`, `k1`, `k2`, `exact`
//! are expressions; `#` starts a comment line. Where each symbol is allowed:
//!
//! * `f` — `t` and `B(...)`;
//! * `k1`, `k2` — `s` and `t` only (kernels are deterministic);
//! * `exact` — `t`, `B(...)`, and `ito(g_of_s)` for `∫₀ᵗ g(s) dB(s)`.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use svie_core::expr::{self, EvalEnv, Expr, Var};
use svie_core::solver::{ScalarField, SvieProblem};

#[derive(Debug, Default)]
struct RawFields {
    name: Option<String>,
    horizon: Option<String>,
    f: Option<String>,
    k1: Option<String>,
    k2: Option<String>,
    exact: Option<String>,
}

pub fn load(path: &Path) -> Result<SvieProblem> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading problem file {}", path.display()))?;
    parse_str(&text).with_context(|| format!("in problem file {}", path.display()))
}

pub fn parse_str(text: &str) -> Result<SvieProblem> {
    let mut raw = RawFields::default();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got `{line}`", line_no + 1);
        };
        let key = key.trim();
        let value = value.trim().to_string();
        let slot = match key {
            "name" => &mut raw.name,
            "T" => &mut raw.horizon,
            "f" => &mut raw.f,
            "k1" => &mut raw.k1,
            "k2" => &mut raw.k2,
            "exact" => &mut raw.exact,
            _ => bail!(
                "line {}: unknown key `{key}` (expected name, T, f, k1, k2, exact)",
                line_no + 1
            ),
        };
        if slot.is_some() {
            bail!("line {}: duplicate key `{key}`", line_no + 1);
        }
        *slot = Some(value);
    }

    let name = raw.name.context("missing required key `name`")?;
    let horizon_src = raw.horizon.context("missing required key `T`")?;
    let horizon: f64 = horizon_src
        .parse()
        .with_context(|| format!("T = `{horizon_src}` is not a number"))?;
    if !(horizon.is_finite() && horizon > 0.0) {
        bail!("T must be a positive finite number, got {horizon}");
    }

    let f_expr = parse_field("f", &raw.f.context("missing required key `f`")?)?;
    let k1_expr = parse_field("k1", &raw.k1.context("missing required key `k1`")?)?;
    let k2_expr = parse_field("k2", &raw.k2.context("missing required key `k2`")?)?;

    check_forcing(&f_expr)?;
    check_kernel("k1", &k1_expr)?;
    check_kernel("k2", &k2_expr)?;

    let problem = SvieProblem::new(
        name,
        horizon,
        scalar_from_expr(f_expr),
        kernel_from_expr(k1_expr.clone()),
        kernel_from_expr(k2_expr),
    )?;

    match raw.exact {
        Some(src) => {
            let exact_expr = parse_field("exact", &src)?;
            check_exact(&exact_expr)?;
            Ok(problem.with_exact(scalar_from_expr(exact_expr)))
        }
        None => Ok(problem),
    }
}

fn parse_field(key: &str, src: &str) -> Result<Expr> {
    expr::parse(src).with_context(|| format!("parsing `{key} = {src}`"))
}

fn check_forcing(expr: &Expr) -> Result<()> {
    if expr.references_var(Var::S) {
        bail!("`f` may not reference the kernel variable s");
    }
    if expr.references_ito() {
        bail!("`f` may not use ito(...); it is only available in `exact`");
    }
    Ok(())
}

fn check_kernel(key: &str, expr: &Expr) -> Result<()> {
    if expr.references_path() {
        bail!("`{key}` is deterministic and may not use B(...) or ito(...)");
    }
    Ok(())
}

fn check_exact(expr: &Expr) -> Result<()> {
    // s occurring inside ito(...) is the integration variable and is fine
    if expr.references_var(Var::S) {
        bail!("`exact` may not reference s outside ito(...)");
    }
    Ok(())
}

fn scalar_from_expr(expr: Expr) -> ScalarField {
    Arc::new(move |t, path| {
        expr::evaluate(&expr, &EvalEnv { t, s: None, path }).map_err(svie_core::Error::from)
    })
}

fn kernel_from_expr(expr: Expr) -> svie_core::solver::KernelField {
    Arc::new(move |s, t| {
        expr::evaluate(&expr, &EvalEnv::kernel(s, t)).map_err(svie_core::Error::from)
    })
}
