use std::path::Path;
use std::process::ExitCode;

use frenetnd::curvature::{self, CurvatureProfile, CurvatureRecord};
use frenetnd::distortion::{self, BoundReport};
use frenetnd::frenet::{self, FrenetState, OrientationClass};
use frenetnd::heisenberg::{self, SpinChain};
use frenetnd::invariants::{self, Congruence, CongruenceVerdict, NormProfile};
use frenetnd::jets::{self, CurveJet};
use frenetnd::{io, selftest, Error, Result, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::input::{self, with_output};
use crate::*;

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Curvatures(args) => curvatures(args, cli.seed)?,
        Command::Reconstruct(args) => reconstruct(args)?,
        Command::Invariants(args) => invariants(args, cli.seed)?,
        Command::Congruent(args) => congruent(args)?,
        Command::Distort(args) => distort(args, cli.seed)?,
        Command::Heisenberg(args) => heisenberg(args, cli.seed)?,
        Command::Selftest(args) => return selftest(args, cli.seed),
    }
    Ok(ExitCode::SUCCESS)
}

/// Prints `value` as one JSON line on stdout.
fn print_json<T: Serialize>(value: &T) -> Result<()> {
    with_output(None, |w| {
        io::write_json(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn write_profile(profile: &CurvatureProfile, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) if input::is_csv(p) => with_output(path, |w| profile.write_csv(w)),
        _ => with_output(path, |w| {
            profile.write_json(&mut *w)?;
            if path.is_none() {
                writeln!(w)?;
            }
            Ok(())
        }),
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "stencil order must be a positive even number, got {order}"
        )));
    }
    Ok(())
}

fn source_jets(source: &CurveSource, exact: bool, order: usize, seed: u64) -> Result<Vec<CurveJet>> {
    match (exact, source.preset) {
        (true, Some(preset)) => {
            let curve = input::preset_curve(source, preset, seed)?;
            let n = curve.dim();
            input::grid(source)?.iter().map(|&t| curve.jet(t, n)).collect()
        }
        _ => {
            check_order(order)?;
            let samples = input::samples(source, seed)?;
            jets::differentiate(&samples, samples.dim(), order)
        }
    }
}

#[derive(Serialize)]
struct Range {
    min: f64,
    max: f64,
}

impl Range {
    fn of(values: &[f64]) -> Self {
        Range {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Serialize)]
struct CurvatureSummary {
    dim: usize,
    points: usize,
    speed: Range,
    kappa: Vec<Range>,
    max_cross_form_residual: f64,
    max_classical_residual: Option<f64>,
    max_volume_product_residual: f64,
}

fn curvatures(args: &CurvaturesArgs, seed: u64) -> Result<()> {
    let jets = source_jets(&args.source, args.exact, args.order, seed)?;
    let records: Vec<CurvatureRecord> = jets.iter().map(curvature::record).collect::<Result<_>>()?;
    let profile = CurvatureProfile::from_jets(&jets)?;
    write_profile(&profile, args.output.as_deref())?;
    if let Some(path) = &args.report {
        with_output(Some(path), |w| {
            for r in &records {
                io::write_json(&mut *w, r)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
    }
    if args.output.is_some() {
        let worst = |f: fn(&CurvatureRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
        let classical: Vec<f64> = records.iter().filter_map(|r| r.residuals.classical).collect();
        print_json(&CurvatureSummary {
            dim: profile.dim,
            points: profile.len(),
            speed: Range::of(&profile.speed),
            kappa: profile.kappa.iter().map(|k| Range::of(k)).collect(),
            max_cross_form_residual: worst(|r| r.residuals.cross_form),
            max_classical_residual: (!classical.is_empty()).then(|| classical.iter().copied().fold(0.0, f64::max)),
            max_volume_product_residual: worst(|r| r.residuals.volume_products),
        })?;
    }
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let profile = CurvatureProfile::read_json(input::open(&args.profile)?)?;
    let samples = frenet::integrate(&profile, &FrenetState::standard(profile.dim))?;
    input::write_samples(&samples, args.output.as_deref())
}

#[derive(Serialize)]
struct InvariantsSummary {
    dim: usize,
    points: usize,
    sgn: i8,
    kappa: Vec<Range>,
    /// Largest relative difference between the input norms and those of the rebuilt curve.
    norm_round_trip: f64,
    align_rms: Option<f64>,
    diameter: Option<f64>,
}

fn invariants(args: &InvariantsArgs, seed: u64) -> Result<()> {
    check_order(args.order)?;
    let (norms, original) = match &args.norms {
        Some(path) => (NormProfile::read_json(input::open(path)?)?, None),
        None => {
            let samples = input::samples(&args.source, seed)?;
            (NormProfile::from_samples(&samples, args.order)?, Some(samples))
        }
    };
    if let Some(path) = &args.norms_output {
        with_output(Some(path), |w| norms.write_json(w))?;
    }
    let profile = invariants::curvatures_from_norms(&norms, args.order)?;
    let rebuilt = frenet::integrate(&profile, &FrenetState::standard(norms.dim))?;
    if let Some(path) = &args.curve_output {
        input::write_samples(&rebuilt, Some(path))?;
    }
    let again = NormProfile::from_samples(&rebuilt, args.order)?;
    let fit = original
        .as_ref()
        .map(|o| frenet::align(&rebuilt, o, OrientationClass::Proper).map(|a| (a.rms, o.diameter())))
        .transpose()?;
    if args.output.is_some() {
        write_profile(&profile, args.output.as_deref())?;
    }
    print_json(&InvariantsSummary {
        dim: norms.dim,
        points: norms.len(),
        sgn: norms.sgn,
        kappa: profile.kappa.iter().map(|k| Range::of(k)).collect(),
        norm_round_trip: norms.max_relative_difference(&again)?,
        align_rms: fit.map(|f| f.0),
        diameter: fit.map(|f| f.1),
    })
}

#[derive(Serialize)]
struct CongruenceReport {
    #[serde(flatten)]
    verdict: CongruenceVerdict,
    /// RMS after the best isometry of the class implied by the verdict.
    align_rms: Option<f64>,
    diameter: f64,
}

pub fn verdict_text(v: Congruence) -> &'static str {
    match v {
        Congruence::Congruent => "congruent (orientation-preserving)",
        Congruence::Mirrored => "congruent (orientation-reversing)",
        Congruence::NotCongruent => "not congruent",
    }
}

fn congruent(args: &CongruentArgs) -> Result<()> {
    check_order(args.order)?;
    let a = input::read_samples(&args.first)?;
    let b = input::read_samples(&args.second)?;
    let p = NormProfile::from_samples(&a, args.order)?;
    let q = NormProfile::from_samples(&b, args.order)?;
    let verdict = invariants::congruence(&p, &q, args.rtol)?;
    let class = match verdict.verdict {
        Congruence::Congruent => OrientationClass::Proper,
        Congruence::Mirrored => OrientationClass::Improper,
        Congruence::NotCongruent => OrientationClass::Any,
    };
    let align_rms = (a.dim() == b.dim() && a.len() == b.len())
        .then(|| frenet::align(&a, &b, class).map(|f| f.rms))
        .transpose()?;
    let report = CongruenceReport {
        verdict,
        align_rms,
        diameter: a.diameter(),
    };
    with_output(None, |w| {
        writeln!(w, "{}", verdict_text(report.verdict.verdict))?;
        writeln!(w, "max relative norm difference {}", io::format_f64(report.verdict.max_relative_difference))?;
        writeln!(w, "tolerance {}", io::format_f64(report.verdict.tolerance))?;
        writeln!(w, "sgn {} {}", report.verdict.sgn.0, report.verdict.sgn.1)?;
        if let Some(rms) = report.align_rms {
            writeln!(w, "align rms {}", io::format_f64(rms))?;
        }
        Ok(())
    })?;
    if let Some(path) = &args.report {
        with_output(Some(path), |w| io::write_json(w, &report))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PointReport<'a> {
    t: f64,
    reports: &'a [BoundReport],
}

#[derive(Serialize)]
struct DistortSummary {
    points: usize,
    bounds: usize,
    violations: usize,
    condition: f64,
}

fn distort(args: &DistortArgs, seed: u64) -> Result<()> {
    if let Some(trials) = args.monte_carlo {
        let report = distortion::monte_carlo(trials, &args.dims, &mut ChaCha8Rng::seed_from_u64(seed))?;
        return with_output(args.output.as_deref(), |w| {
            io::write_json(&mut *w, &report)?;
            writeln!(w)?;
            Ok(())
        });
    }
    let path = args.matrix.as_ref().ok_or_else(|| Error::InvalidArgument("--matrix is required".into()))?;
    let l = input::read_matrix(path)?;
    let translation = match &args.translation {
        Some(v) => Vector::new(v.clone()),
        None => Vector::zeros(l.rows()),
    };
    let reports = match (args.exact, args.source.preset) {
        (true, Some(preset)) => {
            let curve = input::preset_curve(&args.source, preset, seed)?;
            distortion::verify_on_curve(&curve, &l, &translation, &input::grid(&args.source)?)?
        }
        _ => {
            check_order(args.order)?;
            let samples = input::samples(&args.source, seed)?;
            distortion::verify_on_samples(&samples, &l, &translation, args.order)?
        }
    };
    let points: Vec<PointReport> = reports.iter().map(|(t, r)| PointReport { t: *t, reports: r }).collect();
    with_output(args.output.as_deref(), |w| {
        io::write_json(&mut *w, &points)?;
        writeln!(w)?;
        Ok(())
    })?;
    if args.output.is_some() {
        print_json(&DistortSummary {
            points: reports.len(),
            bounds: reports.iter().map(|(_, r)| r.len()).sum(),
            violations: reports.iter().flat_map(|(_, r)| r).filter(|r| !r.satisfied).count(),
            condition: distortion::singular_values(&l)?.condition(),
        })?;
    }
    Ok(())
}

fn heisenberg(args: &HeisenbergArgs, seed: u64) -> Result<()> {
    let chain = match args.preset {
        ChainPreset::GreatCircle => SpinChain::great_circle(args.dim, args.sites, args.wave)?,
        ChainPreset::Random => {
            SpinChain::random_smooth(args.dim, args.sites, args.modes, &mut ChaCha8Rng::seed_from_u64(seed))?
        }
        ChainPreset::Constant => SpinChain::constant(args.dim, args.sites)?,
    };
    let dt = match args.dt {
        Some(dt) => dt,
        None if args.cfl > 0.0 => heisenberg::suggested_dt(args.dim, chain.dx(), args.cfl),
        None => return Err(Error::InvalidArgument("--cfl must be positive".into())),
    };
    let traj = heisenberg::simulate(&chain, args.t_end, dt, args.outputs, args.order)?;
    if let Some(path) = &args.trajectory {
        with_output(Some(path), |w| traj.write_json_lines(w))?;
    }
    let report = heisenberg::conserved_report(&traj)?;
    with_output(args.report.as_deref(), |w| {
        io::write_json(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

fn selftest(args: &SelftestArgs, seed: u64) -> Result<ExitCode> {
    let outcomes = match args.criterion {
        Some(id) => vec![selftest::run(id, seed)
            .ok_or_else(|| Error::InvalidArgument(format!("no criterion {id}")))?],
        None => selftest::run_all(seed),
    };
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    with_output(None, |w| {
        for o in &outcomes {
            writeln!(w, "{o}")?;
        }
        writeln!(w, "selftest: {passed} of {} criteria passed", outcomes.len())?;
        Ok(())
    })?;
    Ok(if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_orders_are_rejected() {
        assert!(check_order(3).is_err());
        assert!(check_order(0).is_err());
        assert!(check_order(6).is_ok());
    }

    #[test]
    fn ranges() {
        let r = Range::of(&[2.0, -1.0, 3.0]);
        assert_eq!((r.min, r.max), (-1.0, 3.0));
    }

    #[test]
    fn verdicts_read_naturally() {
        assert_eq!(verdict_text(Congruence::Mirrored), "congruent (orientation-reversing)");
    }
}
