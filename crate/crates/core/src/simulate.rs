//! Exact-transition simulation of OU paths and of the terminal pair `(Y_T, I_T)`.
//!
//! Randomness is counter-based: path `k` draws from a ChaCha8 stream selected
//! by `(seed, k)`, and step `j` consumes the `j`-th normal of that stream, so
//! every value is a pure function of `(seed, path_index, step_index)`.

use crate::error::{Error, Result};
use crate::model::{require_unit_sigma, validate, OUParams, Path, SufficientStats};
use crate::scalar::{integrated_variance_kernel, one_minus_exp_over};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_steps: usize,
    pub seed: u64,
    pub n_paths: usize,
}

impl SimConfig {
    pub fn new(n_steps: usize, seed: u64, n_paths: usize) -> Self {
        SimConfig {
            n_steps,
            seed,
            n_paths,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
        }
        Ok(())
    }
}

/// Generator for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// One-step exact transition `Y' = α + (Y − α)·decay + sd·Z`.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub alpha: f64,
    pub decay: f64,
    pub sd: f64,
}

impl Transition {
    pub fn new(params: &OUParams, dt: f64) -> Self {
        let l = params.lambda;
        let var = if (l * dt).abs() < 1e-8 {
            dt * (1.0 - l * dt)
        } else {
            -(-2.0 * l * dt).exp_m1() / (2.0 * l)
        };
        Transition {
            alpha: params.alpha,
            decay: (-l * dt).exp(),
            sd: params.sigma * var.sqrt(),
        }
    }

    #[inline]
    pub fn step(&self, y: f64, z: f64) -> f64 {
        self.alpha + (y - self.alpha) * self.decay + self.sd * z
    }
}

/// Running trapezoid sums for `∫Y` and `∫Y²`.
#[derive(Clone, Copy, Debug)]
struct Trapezoid {
    h: f64,
    prev: f64,
    i: f64,
    j: f64,
}

impl Trapezoid {
    fn new(h: f64, y0: f64) -> Self {
        Trapezoid {
            h,
            prev: y0,
            i: 0.0,
            j: 0.0,
        }
    }

    #[inline]
    fn push(&mut self, y: f64) {
        self.i += 0.5 * self.h * (self.prev + y);
        self.j += 0.5 * self.h * (self.prev * self.prev + y * y);
        self.prev = y;
    }

    fn finish(&self, y0: f64, horizon: f64) -> SufficientStats {
        SufficientStats {
            y_t: self.prev,
            i_t: self.i,
            j_t: self.j,
            y0,
            horizon,
        }
    }
}

fn simulate_one(params: &OUParams, n_steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let tr = Transition::new(params, params.horizon / n_steps as f64);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut y = params.y0;
    values.push(y);
    for _ in 0..n_steps {
        let z: f64 = rng.sample(StandardNormal);
        y = tr.step(y, z);
        values.push(y);
    }
    values
}

fn grid(horizon: f64, n_steps: usize) -> Vec<f64> {
    let h = horizon / n_steps as f64;
    (0..=n_steps)
        .map(|k| if k == n_steps { horizon } else { k as f64 * h })
        .collect()
}

/// Simulates `config.n_paths` paths on a uniform grid with `config.n_steps` steps.
pub fn simulate_ou_exact(params: OUParams, config: SimConfig) -> Result<Vec<Path>> {
    let mut out = Vec::with_capacity(config.n_paths);
    for_each_path(params, config, |_, p| {
        out.push(p);
        Ok(())
    })?;
    Ok(out)
}

/// Generates the same paths as [`simulate_ou_exact`] one at a time.
pub fn for_each_path<F>(params: OUParams, config: SimConfig, mut f: F) -> Result<()>
where
    F: FnMut(usize, Path) -> Result<()>,
{
    let p = validate(params)?;
    config.validate()?;
    let times = grid(p.horizon, config.n_steps);
    for k in 0..config.n_paths {
        let mut rng = path_rng(config.seed, k as u64);
        let values = simulate_one(&p, config.n_steps, &mut rng);
        f(k, Path::new(times.clone(), values, Some(p))?)?;
    }
    Ok(())
}

/// Writes the header of a batch file.
pub fn write_batch_header<W: Write>(wr: &mut csv::Writer<W>) -> Result<()> {
    wr.write_record(["path_id", "t", "y"]).map_err(csv_err)
}

/// Appends one path of a batch file.
pub fn write_batch_rows<W: Write>(wr: &mut csv::Writer<W>, path_id: usize, path: &Path) -> Result<()> {
    for (t, y) in path.times().iter().zip(path.values()) {
        wr.write_record([path_id.to_string(), fmt17(*t), fmt17(*y)]).map_err(csv_err)?;
    }
    Ok(())
}

/// Streams sufficient statistics without storing paths. For every path, `f`
/// receives the path index and one `SufficientStats` per entry of `strides`,
/// computed on the sub-grid that keeps every `stride`-th point of the
/// `config.n_steps` grid. Coarser grids are exact subsamples, so all
/// resolutions share the same random numbers.
pub fn stream_stats<F>(params: OUParams, config: SimConfig, strides: &[usize], mut f: F) -> Result<()>
where
    F: FnMut(usize, &[SufficientStats]),
{
    let p = validate(params)?;
    config.validate()?;
    if strides.is_empty() {
        return Err(Error::InvalidConfig("at least one stride required".into()));
    }
    for &s in strides {
        if s == 0 || !config.n_steps.is_multiple_of(s) {
            return Err(Error::InvalidConfig(format!(
                "stride {s} must divide n_steps {}",
                config.n_steps
            )));
        }
    }
    let h = p.horizon / config.n_steps as f64;
    let tr = Transition::new(&p, h);
    let mut accs: Vec<Trapezoid> = strides.iter().map(|&s| Trapezoid::new(h * s as f64, p.y0)).collect();
    let mut out = vec![
        SufficientStats {
            y_t: 0.0,
            i_t: 0.0,
            j_t: 0.0,
            y0: p.y0,
            horizon: p.horizon,
        };
        strides.len()
    ];
    let single = strides.len() == 1 && strides[0] == 1;
    for k in 0..config.n_paths {
        let mut rng = path_rng(config.seed, k as u64);
        for a in accs.iter_mut() {
            *a = Trapezoid::new(a.h, p.y0);
        }
        let mut y = p.y0;
        if single {
            let acc = &mut accs[0];
            for _ in 0..config.n_steps {
                let z: f64 = rng.sample(StandardNormal);
                y = tr.step(y, z);
                acc.push(y);
            }
        } else {
            for step in 1..=config.n_steps {
                let z: f64 = rng.sample(StandardNormal);
                y = tr.step(y, z);
                for (a, &s) in accs.iter_mut().zip(strides) {
                    if step % s == 0 {
                        a.push(y);
                    }
                }
            }
        }
        for (o, a) in out.iter_mut().zip(accs.iter()) {
            *o = a.finish(p.y0, p.horizon);
        }
        f(k, &out);
    }
    Ok(())
}

/// Mean, variance and covariance of `(Y_T, I_T)` for unit σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminalMoments {
    pub mean_y: f64,
    pub var_y: f64,
    pub mean_i: f64,
    pub var_i: f64,
    pub cov_iy: f64,
}

pub fn terminal_moments(params: &OUParams) -> TerminalMoments {
    let (l, t) = (params.lambda, params.horizon);
    let x0 = params.y0 - params.alpha;
    let h1 = one_minus_exp_over(l * t);
    let h2 = one_minus_exp_over(2.0 * l * t);
    TerminalMoments {
        mean_y: params.alpha + x0 * (-l * t).exp(),
        var_y: t * h2,
        mean_i: params.alpha * t + x0 * t * h1,
        var_i: t * t * t * integrated_variance_kernel(l * t),
        cov_iy: 0.5 * t * t * h1 * h1,
    }
}

/// Samples `(Y_T, I_T)` from their exact joint Gaussian law (unit σ, λ ≠ 0).
pub fn simulate_terminal_joint(params: OUParams, config: SimConfig) -> Result<Vec<(f64, f64)>> {
    require_unit_sigma(&params)?;
    config.validate()?;
    if params.lambda == 0.0 {
        return Err(Error::LambdaZeroUnsupportedExact);
    }
    let m = terminal_moments(&params);
    let sy = m.var_y.sqrt();
    let beta = m.cov_iy / sy;
    let resid = (m.var_i - beta * beta).max(0.0).sqrt();
    Ok((0..config.n_paths)
        .map(|k| {
            let mut rng = path_rng(config.seed, k as u64);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            (m.mean_y + sy * z1, m.mean_i + beta * z1 + resid * z2)
        })
        .collect())
}

/// Trapezoid-rule sufficient statistics of a path.
pub fn path_to_stats(path: &Path) -> SufficientStats {
    let v = path.values();
    let h = path.horizon() / path.n_steps() as f64;
    let mut acc = Trapezoid::new(h, v[0]);
    for &y in &v[1..] {
        acc.push(y);
    }
    acc.finish(v[0], path.horizon())
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one path with header `t,y`.
pub fn write_path_csv<W: Write>(w: W, path: &Path) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "y"]).map_err(csv_err)?;
    for (t, y) in path.times().iter().zip(path.values()) {
        wr.write_record([fmt17(*t), fmt17(*y)]).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes a batch with header `path_id,t,y`.
pub fn write_batch_csv<W: Write>(w: W, paths: &[Path]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    write_batch_header(&mut wr)?;
    for (k, p) in paths.iter().enumerate() {
        write_batch_rows(&mut wr, k, p)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads either CSV layout written by this module.
pub fn read_paths_csv<R: Read>(r: R) -> Result<Vec<Path>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    let batch = match cols.as_slice() {
        ["t", "y"] => false,
        ["path_id", "t", "y"] => true,
        _ => {
            return Err(Error::MalformedInput {
                row: 0,
                column: headers.iter().collect::<Vec<_>>().join(","),
                message: "expected header `t,y` or `path_id,t,y`".into(),
            })
        }
    };
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let row = row + 2;
        let rec = rec.map_err(|e| Error::MalformedInput {
            row,
            column: "*".into(),
            message: e.to_string(),
        })?;
        let off = usize::from(batch);
        if rec.len() != cols.len() {
            return Err(Error::MalformedInput {
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", cols.len(), rec.len()),
            });
        }
        let parse = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = rec[i].trim().parse().map_err(|_| Error::MalformedInput {
                row,
                column: name.into(),
                message: format!("not a number: `{}`", &rec[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedInput {
                    row,
                    column: name.into(),
                    message: "non-finite value".into(),
                });
            }
            Ok(v)
        };
        let t = parse(off, "t")?;
        let y = parse(off + 1, "y")?;
        let id = if batch { rec[0].trim().to_string() } else { String::new() };
        match groups.last_mut() {
            Some(g) if g.0 == id => {
                g.1.push(t);
                g.2.push(y);
            }
            _ => groups.push((id, vec![t], vec![y])),
        }
    }
    if groups.is_empty() {
        return Err(Error::MalformedInput {
            row: 1,
            column: "*".into(),
            message: "no data rows".into(),
        });
    }
    groups
        .into_iter()
        .map(|(id, t, y)| {
            Path::new(t, y, None).map_err(|e| Error::MalformedInput {
                row: 0,
                column: "t".into(),
                message: format!("path `{id}`: {e}"),
            })
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path_stats() {
        let p = Path::new(vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![3.0; 5], None).unwrap();
        let s = path_to_stats(&p);
        assert_eq!((s.y_t, s.i_t, s.j_t), (3.0, 6.0, 18.0));
    }

    #[test]
    fn ramp_trapezoid() {
        let p = Path::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0], None).unwrap();
        let s = path_to_stats(&p);
        assert!((s.i_t - 0.5).abs() < 1e-15);
        assert!((s.j_t - 0.375).abs() < 1e-15);
    }

    #[test]
    fn small_lambda_variance_series() {
        let p = OUParams::unit(1e-12, 0.0, 0.0, 1.0);
        let tr = Transition::new(&p, 0.01);
        assert!((tr.sd * tr.sd - 0.01).abs() < 1e-15);
        let q = OUParams::unit(-1.0, 0.0, 0.0, 1.0);
        let tr = Transition::new(&q, 0.1);
        assert!((tr.sd * tr.sd - ((0.2f64).exp() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stride_subsample_matches_direct_coarse_stats() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 2.0);
        let cfg = SimConfig::new(8, 3, 2);
        let paths = simulate_ou_exact(p, cfg).unwrap();
        let mut got = Vec::new();
        stream_stats(p, cfg, &[1, 4], |_, s| got.push((s[0], s[1]))).unwrap();
        for (path, (fine, coarse)) in paths.iter().zip(got) {
            assert_eq!(path_to_stats(path), fine);
            let v = path.values();
            let sub = Path::new(vec![0.0, 1.0, 2.0], vec![v[0], v[4], v[8]], None).unwrap();
            let c = path_to_stats(&sub);
            assert!((c.j_t - coarse.j_t).abs() < 1e-14 && (c.i_t - coarse.i_t).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 1.0);
        let paths = simulate_ou_exact(p, SimConfig::new(10, 1, 3)).unwrap();
        let mut buf = Vec::new();
        write_batch_csv(&mut buf, &paths).unwrap();
        let back = read_paths_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in paths.iter().zip(&back) {
            assert_eq!(a.values(), b.values());
        }
        let mut one = Vec::new();
        write_path_csv(&mut one, &paths[0]).unwrap();
        assert!(std::str::from_utf8(&one).unwrap().starts_with("t,y\n"));
        let back = read_paths_csv(one.as_slice()).unwrap();
        assert_eq!(back[0].values(), paths[0].values());
    }

    #[test]
    fn malformed_csv_reports_row_and_column() {
        let bad = "t,y\n0,1\n0.5,abc\n";
        match read_paths_csv(bad.as_bytes()) {
            Err(Error::MalformedInput { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
