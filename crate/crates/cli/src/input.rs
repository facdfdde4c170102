use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use frenetnd::jets::{self, AnalyticCurve, CurveSamples};
use frenetnd::{Error, Matrix, Result, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CurveSource, Preset};

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_samples(path: &Path) -> Result<CurveSamples> {
    let reader = open(path)?;
    if is_json(path) {
        CurveSamples::read_json(reader)
    } else {
        CurveSamples::read_csv(reader)
    }
}

pub fn write_samples(samples: &CurveSamples, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) if is_json(p) => with_output(path, |w| samples.write_json(w)),
        _ => with_output(path, |w| samples.write_csv(w)),
    }
}

/// Runs `f` on a buffered writer for `path`, or on stdout.
pub fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub fn preset_curve(source: &CurveSource, preset: Preset, seed: u64) -> Result<AnalyticCurve> {
    Ok(match preset {
        Preset::Helix => AnalyticCurve::helix(source.a, source.b),
        Preset::Circle => AnalyticCurve::circle(source.radius),
        Preset::DoubleHelix => AnalyticCurve::double_helix(source.alpha),
        Preset::Moment => AnalyticCurve::moment(source.dim)?,
        Preset::Line => {
            let direction = Vector::new((1..=source.dim).map(|i| i as f64).collect());
            AnalyticCurve::line(Vector::zeros(source.dim), direction)?
        }
        Preset::RandomFourier => AnalyticCurve::random_fourier(source.dim, &mut ChaCha8Rng::seed_from_u64(seed))?,
    })
}

/// Parameter grid of a preset: `t0, t0 + h, …` up to `t1`.
pub fn grid(source: &CurveSource) -> Result<Vec<f64>> {
    jets::uniform_grid(source.t0, source.t1, source.h)
}

pub fn samples(source: &CurveSource, seed: u64) -> Result<CurveSamples> {
    match (&source.input, source.preset) {
        (Some(path), _) => read_samples(path),
        (None, Some(preset)) => {
            let count = grid(source)?.len();
            preset_curve(source, preset, seed)?.sample(source.t0, source.h, count)
        }
        (None, None) => Err(Error::InvalidArgument("give either --input or --preset".into())),
    }
}

/// Parses a square matrix written as `n` lines of `n` reals.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("matrix row {}: `{tok}` is not a number", i + 1)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix file is empty".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse(format!(
            "matrix row {} has {} entries, expected {n}",
            i + 1,
            r.len()
        )));
    }
    Matrix::from_row_major(n, n, rows.concat())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}
