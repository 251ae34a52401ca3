use diffsym::geometry::ProjectableVectorField;
use diffsym::stochastic::{
    simulate, verify_symmetry_stochastically, Candidate as Target, TimeGrid, VerificationSummary, VerifyConfig,
};
use diffsym::symbolic::{normalize, zero_test, Expr};
use diffsym::symmetry::{
    check_symmetry, find_symmetries, kolmogorov_check, sde_determining_residuals, KolmogorovSymmetryCandidate,
    StochasticTransformation, SymmetryVerdict,
};

use crate::model::{time_scaling, Diagnostic, Model};
use crate::report::*;

/// A finished command: its report body and exit code.
pub struct Outcome<T> {
    pub body: T,
    pub code: u8,
}

fn verdict_code(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn lib_err(location: &str) -> impl Fn(diffsym::Error) -> Diagnostic + '_ {
    move |e| Diagnostic::new(location, e.to_string())
}

fn strings(v: &[Expr]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn verdict(v: &SymmetryVerdict) -> Verdict {
    Verdict {
        is_symmetry: v.is_symmetry,
        mu: Some(v.mu.to_string()),
        residuals: strings(&v.residuals),
        probabilistic: v.probabilistic,
    }
}

pub fn validate(model: &Model) -> Outcome<ValidateReport> {
    Outcome {
        body: ValidateReport {
            coordinates: model.coords.spatial().to_vec(),
            diffusor: model.diffusor.to_string(),
            has_sde: model.sde.is_some(),
            fields: model.fields.keys().cloned().collect(),
            bases: model.bases.keys().cloned().collect(),
            transformations: model.transformations.keys().cloned().collect(),
            diagnostics: Vec::new(),
        },
        code: 0,
    }
}

pub fn check(model: &Model, name: &str) -> Result<Outcome<CheckReport>, Diagnostic> {
    let cand = model.field(name)?;
    let v = check_symmetry(&cand.field, &model.diffusor).map_err(lib_err("check"))?;
    Ok(Outcome {
        code: verdict_code(v.is_symmetry),
        body: CheckReport {
            field: name.to_string(),
            candidate: cand.field.to_string(),
            verdict: verdict(&v),
        },
    })
}

pub fn find(model: &Model, name: &str) -> Result<Outcome<FindReport>, Diagnostic> {
    let basis = model.basis(name)?;
    let found = find_symmetries(&model.diffusor, basis).map_err(lib_err("find"))?;
    let generators = found
        .iter()
        .map(|x| Generator {
            tau: x.tau().to_string(),
            phi: strings(x.phis()),
        })
        .collect();
    Ok(Outcome {
        code: 0,
        body: FindReport {
            basis: name.to_string(),
            dimension: found.len(),
            generators,
        },
    })
}

pub enum VerifyTarget<'a> {
    Field(&'a str),
    Transformation(&'a str),
}

pub struct VerifyArgs<'a> {
    pub target: VerifyTarget<'a>,
    pub paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub flow_parameter: f64,
}

/// Uniform grid on `[0, horizon]` with step `dt`; `horizon / dt` must be an integer (up to 1e-9).
pub fn grid(dt: f64, horizon: f64) -> Result<TimeGrid, Diagnostic> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Diagnostic::new("--dt", format!("dt must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Diagnostic::new("--horizon", format!("horizon must be positive, got {horizon}")));
    }
    let ratio = horizon / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || !(2.0..=1e7).contains(&steps) {
        return Err(Diagnostic::new(
            "--dt",
            format!("horizon {horizon} is not between 2 and 1e7 whole steps of {dt}"),
        ));
    }
    TimeGrid::uniform(0.0, horizon, steps as usize).map_err(lib_err("--dt"))
}

pub fn verify(model: &Model, args: &VerifyArgs<'_>) -> Result<(Outcome<VerifyReport>, VerifyConfig), Diagnostic> {
    let grid = grid(args.dt, args.horizon)?;
    let mut config = VerifyConfig::new(model.x0.clone());
    config.grid = grid;
    config.paths = args.paths;
    config.seed = args.seed;
    config.flow_parameter = args.flow_parameter;
    let (label, summary, flow_parameter) = match args.target {
        VerifyTarget::Field(name) => {
            let cand = model.field(name)?;
            let s = verify_symmetry_stochastically(Target::Field(&cand.field), &model.diffusor, &config)
                .map_err(lib_err("verify"))?;
            (format!("field:{name}"), s, Some(config.flow_parameter))
        }
        VerifyTarget::Transformation(name) => {
            let map = model.transformation(name)?.compile().map_err(lib_err("verify"))?;
            let s = verify_symmetry_stochastically(Target::Map(&map), &model.diffusor, &config)
                .map_err(lib_err("verify"))?;
            (format!("transformation:{name}"), s, None)
        }
    };
    let body = VerifyReport {
        candidate: label,
        settings: VerifySettings {
            paths: config.paths,
            dt: args.dt,
            horizon: args.horizon,
            steps: config.grid.steps(),
            seed: config.seed,
            x0: config.x0.clone(),
            z_crit: config.z_crit,
            flow_parameter,
        },
        pass: summary.pass,
        max_abs_z: finite(summary.max_abs_z),
        reports: function_reports(&summary),
    };
    Ok((
        Outcome {
            code: verdict_code(body.pass),
            body,
        },
        config,
    ))
}

fn function_reports(s: &VerificationSummary) -> Vec<FunctionReport> {
    s.reports
        .iter()
        .map(|r| FunctionReport {
            function: r.function.clone(),
            codiffusor: r.codiffusor.clone(),
            checkpoints: r.checkpoints.clone(),
            scores: r
                .scores
                .iter()
                .map(|z| ScoreEntry {
                    from: z.from,
                    to: z.to,
                    weight: z.weight.clone(),
                    z: finite(z.z),
                })
                .collect(),
            max_abs_z: finite(r.max_abs_z),
            pass: r.pass,
        })
        .collect()
}

/// The untransformed ensemble the verification draws from.
pub fn source_ensemble(model: &Model, config: &VerifyConfig) -> Result<diffsym::stochastic::PathEnsemble, Diagnostic> {
    simulate(&model.diffusor, &config.x0, &config.grid, config.paths, config.seed).map_err(lib_err("--ensemble-out"))
}

fn sde_verdict(model: &Model, field: &ProjectableVectorField, c: &[Vec<Expr>]) -> Result<Verdict, Diagnostic> {
    let sde = model
        .sde
        .as_ref()
        .ok_or_else(|| Diagnostic::new("sde", "SDE comparison requested but the model has no `sde` block"))?;
    let a = time_scaling(field.tau()).ok_or_else(|| {
        Diagnostic::new(
            "compare",
            format!("tau = {} is not of the form a*t required for an SDE transformation", field.tau()),
        )
    })?;
    let t = StochasticTransformation::new(model.coords.clone(), field.phis().to_vec(), c.to_vec(), a)
        .map_err(lib_err("compare"))?;
    let residuals = sde_determining_residuals(&t, sde).map_err(lib_err("compare"))?;
    let mut is_symmetry = true;
    let mut probabilistic = false;
    for r in &residuals {
        let z = zero_test(r).map_err(lib_err("compare"))?;
        is_symmetry &= z.is_zero();
        probabilistic |= z.is_probabilistic();
    }
    Ok(Verdict {
        is_symmetry,
        mu: None,
        residuals: strings(&residuals),
        probabilistic,
    })
}

pub fn compare(model: &Model, name: &str) -> Result<Outcome<CompareReport>, Diagnostic> {
    let cand = model.field(name)?;
    let martingale = verdict(&check_symmetry(&cand.field, &model.diffusor).map_err(lib_err("compare"))?);
    let sde = match &cand.c {
        Some(c) => Some(sde_verdict(model, &cand.field, c)?),
        None => None,
    };
    let h = cand.h.clone().unwrap_or_else(Expr::zero);
    let z = KolmogorovSymmetryCandidate::new(cand.field.clone(), h.clone()).map_err(lib_err("compare"))?;
    let k = kolmogorov_check(&z, &model.diffusor).map_err(lib_err("compare"))?;
    let kolmogorov = KolmogorovLevel {
        h: normalize(&h).to_string(),
        pde_symmetry: k.pde_symmetry,
        martingale_symmetry: k.martingale_symmetry,
        residuals: strings(&k.pde_residuals),
        probabilistic: k.probabilistic,
    };
    let bridge_consistent = sde.as_ref().map(|s| !s.is_symmetry || martingale.is_symmetry);
    let affirmative = martingale.is_symmetry
        && kolmogorov.pde_symmetry
        && sde.as_ref().is_none_or(|s| s.is_symmetry)
        && bridge_consistent != Some(false);
    Ok(Outcome {
        code: verdict_code(affirmative),
        body: CompareReport {
            transformation: name.to_string(),
            martingale,
            sde,
            kolmogorov,
            bridge_consistent,
        },
    })
}
