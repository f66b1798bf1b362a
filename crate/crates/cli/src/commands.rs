use std::path::Path;
use std::process::ExitCode;

use magkit::asymptotics::{
    contribution_csv, contribution_sweep, log_grid, magnitude_sweep, sweep_csv, two_point_approximation,
    two_point_csv,
};
use magkit::embedding::{circumradius_equilibrium, similarity_embedding, verify_subspace_characterization};
use magkit::identities::{fiedler_bapat_block, identity_residuals, interlacing_check};
use magkit::linalg::to_rows;
use magkit::spaces::{three_point_cluster, three_point_golden, two_point};
use magkit::spd::{
    check_inverse_submodularity, check_shifted_submodularity, spd_certificate, spd_scale_threshold,
    spd_semialgebraic_check, SetFunctionReport,
};
use magkit::subspace::{delete_chain as run_delete_chain, subspace_magnitude_weighting, SubspaceResult};
use magkit::{Error, MetricSpace, SimilarityData, SubsetSelector};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Format, GridArgs, InputArgs, Kind, OutputArgs};

pub enum CommandError {
    Input(String),
    Math { error: Error, context: Value },
}

impl From<Error> for CommandError {
    fn from(error: Error) -> Self {
        if error.is_input_error() {
            CommandError::Input(error.to_string())
        } else {
            CommandError::Math {
                error,
                context: Value::Null,
            }
        }
    }
}

impl CommandError {
    pub fn report(self) -> ExitCode {
        match self {
            CommandError::Input(message) => {
                eprintln!("error: {message}");
                ExitCode::from(1)
            }
            CommandError::Math { error, context } => {
                let mut body = json!({ "error": error.kind(), "message": error.to_string() });
                if let Value::Object(extra) = context {
                    body.as_object_mut().expect("object").extend(extra);
                }
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
                eprintln!("error: {error}");
                ExitCode::from(2)
            }
        }
    }
}

type CmdResult = Result<(), CommandError>;

fn load(input: &InputArgs) -> Result<MetricSpace, CommandError> {
    let space = MetricSpace::read(&input.input)?;
    Ok(space.scale(input.t)?)
}

fn write(output: &OutputArgs, text: &str) -> CmdResult {
    match &output.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CommandError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(output: &OutputArgs, value: &T) -> CmdResult {
    if output.format == Some(Format::Csv) {
        return Err(CommandError::Input("this command only produces JSON".into()));
    }
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(output, &text)
}

/// "1,3,4" → 0-based indices.
fn parse_indices(text: &str, n: usize) -> Result<Vec<usize>, CommandError> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let k: usize = s
                .parse()
                .map_err(|_| CommandError::Input(format!("`{s}` is not a point index")))?;
            if k == 0 || k > n {
                return Err(CommandError::Input(format!(
                    "point {k} out of range 1..={n} (indices are 1-based)"
                )));
            }
            Ok(k - 1)
        })
        .collect()
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

pub fn compute(input: &InputArgs, output: &OutputArgs, tol_pd: Option<f64>) -> CmdResult {
    let space = load(input)?;
    let data = match tol_pd {
        Some(rel) if !(rel > 0.0 && rel.is_finite()) => {
            return Err(CommandError::Input(format!("--tol-pd must be positive, got {rel}")))
        }
        Some(rel) => SimilarityData::with_pd_cutoff(&space, rel),
        None => SimilarityData::new(&space),
    };
    let Some(w) = data.weighting() else {
        return Err(CommandError::Math {
            error: Error::NoSolution,
            context: json!({
                "definiteness": data.definiteness(),
                "eigenvalues": data.eigenvalues(),
            }),
        });
    };
    let magnitude = w.sum();
    let circumradius = if data.definiteness().is_positive_definite() {
        circumradius_equilibrium(data.z()).ok().map(|(r, _)| r)
    } else {
        None
    };
    let identities = identity_residuals(&space).ok().map(|r| {
        json!({
            "all_pass": r.all_pass(),
            "max_residual": r.max_residual(),
            "failures": r.failures().map(|c| c.name.clone()).collect::<Vec<_>>(),
        })
    });
    write_json(
        output,
        &json!({
            "n": space.len(),
            "t": input.t,
            "magnitude": magnitude,
            "weighting": w.as_slice(),
            "normalized_weighting": w.iter().map(|x| x / magnitude).collect::<Vec<_>>(),
            "definiteness": data.definiteness(),
            "eigenvalues": data.eigenvalues(),
            "residual": data.residual(),
            "circumradius": circumradius,
            "identities": identities,
        }),
    )
}

pub fn embed(input: &InputArgs, output: &OutputArgs, seed: u64, max_subsets: usize) -> CmdResult {
    let space = load(input)?;
    let embedding = similarity_embedding(&space)?;
    let check = verify_subspace_characterization(&space, max_subsets, seed)?;
    let n = space.len();
    let squared: Vec<Value> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| json!({ "i": i + 1, "j": j + 1, "value": embedding.squared_distance(i, j) }))
        .collect();
    write_json(
        output,
        &json!({
            "embedding": embedding.export(),
            "k": to_rows(embedding.k()),
            "squared_distances": squared,
            "subspace_check": {
                "subsets_checked": check.subsets_checked,
                "exhaustive": check.exhaustive,
                "max_abs_deviation": check.max_abs_deviation,
                "worst_subset": one_based(&check.worst_subset),
            },
        }),
    )
}

fn grid_from(args: &GridArgs, t_min: f64, t_max: f64) -> Result<Vec<f64>, CommandError> {
    Ok(log_grid(
        args.t_min.unwrap_or(t_min),
        args.t_max.unwrap_or(t_max),
        args.grid,
    )?)
}

pub fn sweep(input: &Path, grid: &GridArgs, output: &OutputArgs) -> CmdResult {
    let space = MetricSpace::read(input)?;
    let points = magnitude_sweep(&space, &grid_from(grid, 0.01, 100.0)?)?;
    match output.format {
        Some(Format::Json) => write_json(output, &points),
        _ => write(output, &sweep_csv(&points)),
    }
}

fn subspace_json(result: &SubspaceResult) -> Value {
    let report = result.report();
    json!({
        "points": one_based(&report.subset),
        "magnitude": report.magnitude,
        "weighting": report.weighting,
        "normalized_weighting": report.weighting.iter().map(|w| w / report.magnitude).collect::<Vec<_>>(),
        "kdag": report.kdag,
        "derivation": report.derivation,
        "warning": report.warning,
    })
}

pub fn subspace(input: &InputArgs, output: &OutputArgs, subset: Option<&str>, remove: Option<&str>) -> CmdResult {
    let space = load(input)?;
    let n = space.len();
    let selector = match (subset, remove) {
        (Some(keep), _) => SubsetSelector::new(parse_indices(keep, n)?),
        (None, Some(drop)) => SubsetSelector::new(parse_indices(drop, n)?).complement(n),
        (None, None) => return Err(CommandError::Input("pass --subset or --remove".into())),
    };
    let result = subspace_magnitude_weighting(&space, &selector)?;
    write_json(output, &subspace_json(&result))
}

pub fn delete_chain(input: &InputArgs, output: &OutputArgs, remove: &str) -> CmdResult {
    let space = load(input)?;
    let order = parse_indices(remove, space.len())?;
    let full = SubspaceResult::full(&space)?;
    let steps = run_delete_chain(&full, &order)?;
    let steps: Vec<Value> = order
        .iter()
        .zip(&steps)
        .map(|(x, step)| {
            let mut v = subspace_json(step);
            v["removed"] = json!(x + 1);
            v
        })
        .collect();
    write_json(
        output,
        &json!({ "initial": subspace_json(&full), "steps": steps }),
    )
}

pub fn spd(input: &InputArgs, output: &OutputArgs, t_max: Option<f64>) -> CmdResult {
    let space = load(input)?;
    let cert = spd_certificate(&space);
    let z = SimilarityData::new(&space).z().clone();
    let semialgebraic = spd_semialgebraic_check(&z).ok();
    let boundary: Vec<Value> = cert
        .boundary
        .iter()
        .map(|b| json!({ "quantity": b.quantity, "indices": one_based(&b.indices), "value": b.value }))
        .collect();
    let threshold = match t_max {
        Some(t_max) => {
            let r = spd_scale_threshold(&space, t_max)?;
            Some(json!({
                "t_star": r.t_star,
                "persistence_verified": r.persistence_verified,
                "evaluations": r.trace.len(),
            }))
        }
        None => None,
    };
    write_json(
        output,
        &json!({
            "verdict": cert.verdict,
            "is_pd": cert.is_pd,
            "w_positive": cert.w_positive,
            "c_positive": cert.c_positive,
            "characterizations": cert.characterizations,
            "consistent": cert.consistent(),
            "semialgebraic": semialgebraic,
            "boundary": boundary,
            "threshold": threshold,
        }),
    )
}

fn set_function_json(report: &SetFunctionReport) -> Value {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| json!({ "subset": one_based(&v.subset), "x": v.x + 1, "y": v.y + 1, "value": v.value }))
        .collect();
    let monotonicity: Vec<Value> = report
        .monotonicity_violations
        .iter()
        .map(|v| json!({ "smaller": one_based(&v.smaller), "larger": one_based(&v.larger), "value": v.value }))
        .collect();
    json!({
        "alpha": report.alpha,
        "kind": report.kind,
        "t": report.t,
        "hypothesis_holds": report.hypothesis_holds,
        "warnings": report.warnings,
        "violations": violations,
        "monotonicity_violations": monotonicity,
        "summary": report.summary,
    })
}

pub fn submodular(input: &InputArgs, output: &OutputArgs, kind: Kind, alpha: f64) -> CmdResult {
    let space = MetricSpace::read(&input.input)?;
    let report = match kind {
        Kind::Inverse => check_inverse_submodularity(&space.scale(input.t)?, alpha)?,
        Kind::Shifted => check_shifted_submodularity(&space, input.t, alpha)?,
    };
    write_json(output, &set_function_json(&report))
}

pub fn identities(input: &InputArgs, output: &OutputArgs) -> CmdResult {
    let space = load(input)?;
    let report = identity_residuals(&space)?;
    let interlacing = interlacing_check(&space);
    write_json(
        output,
        &json!({
            "all_pass": report.all_pass(),
            "max_residual": report.max_residual(),
            "checks": report.checks,
            "interlacing": interlacing,
        }),
    )
}

fn max_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn reproduce(target: &str, output: &OutputArgs, grid: &GridArgs, delta: f64) -> CmdResult {
    match target {
        "fig1" => {
            let t_min = grid.t_min.unwrap_or(0.0);
            let t_max = grid.t_max.unwrap_or(10.0);
            let count = grid.grid.unwrap_or(201);
            if !(t_min >= 0.0 && t_max > t_min && count >= 2) {
                return Err(Error::InvalidGrid("need 0 <= t_min < t_max and at least 2 points".into()).into());
            }
            let ts: Vec<f64> = (0..count)
                .map(|k| t_min + (t_max - t_min) * k as f64 / (count - 1) as f64)
                .collect();
            let rows = two_point_approximation(1.0, &ts)?;
            match output.format {
                Some(Format::Json) => write_json(output, &rows),
                _ => write(output, &two_point_csv(&rows)),
            }
        }
        "fig2" => {
            let rows = contribution_sweep(&three_point_cluster(), &grid_from(grid, 1e-4, 1e2)?)?;
            match output.format {
                Some(Format::Json) => write_json(output, &rows),
                _ => write(output, &contribution_csv(&rows)),
            }
        }
        "example-2-3" => {
            let space = three_point_golden();
            let data = SimilarityData::new(&space);
            let embedding = similarity_embedding(&space)?;
            let z_printed = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.1, 0.5, 1.0, 0.1, 0.1, 0.1, 1.0]);
            let k_printed = DMatrix::from_row_slice(
                3,
                3,
                &[1.9, -0.35, -1.55, -0.35, 1.9, -1.55, -1.55, -1.55, 3.1],
            ) / 9.0;
            let gram = embedding.gram();
            write_json(
                output,
                &json!({
                    "z": to_rows(data.z()),
                    "z_printed": to_rows(&z_printed),
                    "z_max_deviation": max_deviation(data.z(), &z_printed),
                    "k": to_rows(embedding.k()),
                    "k_printed": to_rows(&k_printed),
                    "k_max_deviation": max_deviation(embedding.k(), &k_printed),
                    "embedding_gram": to_rows(&gram),
                    "gram_max_deviation": max_deviation(&gram, &k_printed),
                    "squared_distances": [
                        embedding.squared_distance(0, 1),
                        embedding.squared_distance(0, 2),
                        embedding.squared_distance(1, 2),
                    ],
                    "magnitude": data.magnitude(),
                }),
            )
        }
        "example-fb-2pt" => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(CommandError::Input(format!("--delta must lie in (0, 1), got {delta}")));
            }
            let block = fiedler_bapat_block(&two_point(-delta.ln())?)?;
            let s = 1.0 / (1.0 - delta);
            let symbolic = DMatrix::from_row_slice(
                3,
                3,
                &[-(1.0 + delta), 1.0, 1.0, 1.0, s, -s, 1.0, -s, s],
            ) * 0.5;
            write_json(
                output,
                &json!({
                    "delta": delta,
                    "bordered": to_rows(&block.bordered),
                    "inverse_block": to_rows(&block.inverse_block),
                    "symbolic": to_rows(&symbolic),
                    "max_deviation": max_deviation(&block.inverse_block, &symbolic),
                    "residual": block.residual(),
                }),
            )
        }
        other => Err(Error::UnknownTarget(other.to_string()).into()),
    }
}
