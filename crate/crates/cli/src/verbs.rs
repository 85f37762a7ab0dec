use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::json;

use ztrace::census::{closed_point_census, default_max_degree, weil_lower_bound_holds};
use ztrace::explicit_formula::{
    convergence_csv, verify_formula, Direction, FormulaConfig, FormulaData, TestFunction,
};
use ztrace::field_curve::{count_points, zeta_data, CurveSpec, ZetaData};
use ztrace::padic_transversal::NormConvention;
use ztrace::tate_lattice::{orbit_weight_report, LatticeData};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outcome;

/// A curve given by equation, or only by its Frobenius trace.
pub struct CurveInput {
    pub curve: Option<CurveSpec>,
    pub zeta: ZetaData,
}

pub fn parse_curve(text: &str) -> Result<CurveInput, CliError> {
    let keys: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.split_once('=').map_or(t, |(k, _)| k.trim()))
        .collect();
    if !keys.contains(&"a") {
        let curve: CurveSpec = text.parse()?;
        let zeta = zeta_data(&curve);
        return Ok(CurveInput {
            curve: Some(curve),
            zeta,
        });
    }
    let (mut p, mut f, mut a) = (None, 1u32, None);
    for tok in text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{tok}`")))?;
        let bad = |e: std::num::ParseIntError| CliError::Config(format!("bad value for {key}: {e}"));
        match key.trim() {
            "p" => p = Some(val.trim().parse::<u64>().map_err(bad)?),
            "f" => f = val.trim().parse::<u32>().map_err(bad)?,
            "a" => a = Some(val.trim().parse::<i64>().map_err(bad)?),
            other => return Err(CliError::Config(format!("unknown curve key `{other}`"))),
        }
    }
    let p = p.ok_or_else(|| CliError::Config("curve needs p".into()))?;
    let a = a.ok_or_else(|| CliError::Config("curve needs a".into()))?;
    Ok(CurveInput {
        curve: None,
        zeta: ZetaData::from_trace(p, f, a)?,
    })
}

pub fn require_curve(cfg: &RunConfig) -> Result<CurveInput, CliError> {
    let text = cfg
        .curve
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("`{}` needs --curve", cfg.command)))?;
    parse_curve(text)
}

pub fn parse_alpha(cfg: &RunConfig) -> Result<Option<TestFunction<f64>>, CliError> {
    cfg.alpha.as_deref().map(|s| s.parse().map_err(CliError::from)).transpose()
}

pub fn norm_convention(cfg: &RunConfig) -> NormConvention {
    if cfg.norm == "literal" {
        NormConvention::Literal
    } else {
        NormConvention::Conductor
    }
}

pub fn formula_config(cfg: &RunConfig) -> FormulaConfig<f64> {
    FormulaConfig {
        quadrature_tol: cfg.quadrature_tol,
        formula_tol: cfg.formula_tol,
        safety: cfg.safety,
    }
}

pub fn parse_lattice(cfg: &RunConfig) -> Result<LatticeData<f64>, CliError> {
    let text = match (&cfg.lattice, &cfg.curve) {
        (Some(l), _) => l.trim(),
        (None, Some(_)) => "curve",
        (None, None) => "gaussian",
    };
    match text {
        "gaussian" => return Ok(LatticeData::gaussian()),
        "eisenstein" => return Ok(LatticeData::eisenstein()),
        "curve" => return Ok(LatticeData::from_zeta(&require_curve(cfg)?.zeta)?),
        _ => {}
    }
    let params = text
        .strip_prefix("companion:")
        .ok_or_else(|| CliError::Config(format!("unknown lattice `{text}`")))?;
    let (mut a, mut q) = (None, None);
    for tok in params.split(',').filter(|t| !t.trim().is_empty()) {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{tok}`")))?;
        let val = val.trim();
        match key.trim() {
            "a" => a = Some(val.parse::<i64>().map_err(|e| CliError::Config(format!("bad a: {e}")))?),
            "q" => q = Some(val.parse::<u64>().map_err(|e| CliError::Config(format!("bad q: {e}")))?),
            other => return Err(CliError::Config(format!("unknown lattice key `{other}`"))),
        }
    }
    match (a, q) {
        (Some(a), Some(q)) => Ok(LatticeData::companion(a, q)?),
        _ => Err(CliError::Config("companion lattice needs a and q".into())),
    }
}

fn exact_q(q: u64) -> BigRational {
    BigRational::from(BigInt::from(q))
}

pub fn zeta(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input = require_curve(cfg)?;
    let zd = &input.zeta;
    let q = zd.q() as i64;
    let a = zd.trace();
    let count = q + 1 - a;
    let direct = input.curve.as_ref().map(count_points);
    let checks = json!({
        "hasse": a * a <= 4 * q,
        "re_rho_half": zd.zero_real_part_exact() == num_rational::Ratio::new(1, 2),
        "xi_norm_sq_is_q": zd.xi_norm_sq_exact() == exact_q(zd.q()),
        "point_count_matches": direct.map_or(true, |n| n as i64 == count),
    });
    let passed = checks.as_object().unwrap().values().all(|v| v == &json!(true));
    let report = json!({
        "curve": input.curve.as_ref().map(|c| c.to_string()),
        "zeta": zd.to_json(),
        "point_count": count,
        "supersingular": zd.is_supersingular(),
        "checks": checks,
        "passed": passed,
    });
    Ok(Outcome::new(report, passed))
}

pub fn census(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input = require_curve(cfg)?;
    let zd = &input.zeta;
    let depth = match (cfg.max_degree, parse_alpha(cfg)?) {
        (Some(d), _) => d,
        (None, Some(alpha)) => default_max_degree(zd.q(), alpha.support_radius()),
        (None, None) => 10,
    };
    let census = closed_point_census(zd, depth)?;
    let duality = census.reconstruct_point_counts() == census.point_counts();
    let positive = census.counts().iter().all(|b| b >= &BigInt::from(0));
    let weil = (1..=depth).all(|n| weil_lower_bound_holds(zd.q(), n, census.point_count(n)));
    if !duality {
        return Err(CliError::Internal("divisor sums do not reproduce the point counts".into()));
    }
    let passed = positive && weil;
    let report = json!({
        "curve": input.curve.as_ref().map(|c| c.to_string()),
        "census": census.to_json(),
        "checks": {"divisor_duality": duality, "positivity": positive, "weil_lower_bound": weil},
        "passed": passed,
    });
    Ok(Outcome::new(report, passed).with_csv(census.to_csv()))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input = require_curve(cfg)?;
    let alpha = parse_alpha(cfg)?.ok_or_else(|| CliError::Config("`verify` needs --alpha".into()))?;
    let zd = &input.zeta;
    let mut data = match cfg.max_degree {
        Some(d) => FormulaData::general(zd.q(), 1, zd.zeros::<f64>().to_vec(), closed_point_census(zd, d)?)?,
        None => FormulaData::from_zeta(zd, &alpha)?,
    };
    if let Some(g) = cfg.genus {
        data = data.with_genus(g);
    }
    let config = formula_config(cfg);
    let report = verify_formula(&data, &alpha, cfg.nu_max, &config)?;
    let passed = report.passed;
    let mut value = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    let obj = value.as_object_mut().unwrap();
    obj.insert("curve".into(), json!(input.curve.as_ref().map(|c| c.to_string())));
    obj.insert("trace".into(), json!(zd.trace()));
    obj.insert("alpha".into(), json!(alpha.to_string()));
    let mut outcome = Outcome::new(value, passed);
    if cfg.emit_plot.is_some() {
        outcome = outcome.with_csv(convergence_csv(&data, &alpha, cfg.nu_max, &config)?);
    }
    Ok(outcome)
}

pub fn weights(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ld = parse_lattice(cfg)?;
    let direction: Direction = cfg.direction.parse()?;
    let r = orbit_weight_report(&ld, cfg.k, direction)?;
    let q = BigInt::from(ld.q());
    let expected = match direction {
        Direction::Backward => BigRational::new(BigInt::one(), q.pow(cfg.k)),
        Direction::Forward => BigRational::one(),
    };
    let lq = (ld.q() as f64).ln();
    let passed = r.weight.weight == expected && r.weight.leaf_sign == 1 && r.leaf_jacobian > 0.0;
    let report = json!({
        "q": ld.q(),
        "trace": ld.trace(),
        "k": r.k,
        "direction": r.direction,
        "position": r.position,
        "leaf_jacobian": r.leaf_jacobian,
        "leaf_sign": r.weight.leaf_sign,
        "transversal_jacobian": r.transversal_jacobian.to_string(),
        "weight": r.weight.weight.to_string(),
        "expected_weight": expected.to_string(),
        "coefficient": r.coefficient,
        "expected_coefficient": lq * num_traits::ToPrimitive::to_f64(&expected).unwrap_or(f64::NAN),
        "passed": passed,
    });
    Ok(Outcome::new(report, passed))
}
