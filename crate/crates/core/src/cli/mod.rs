//! Batch command-line front end.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use num_complex::Complex64;
use serde::Serialize;

pub use config::{BoxConfig, GammaConfig, IoConfig, KGrid, RunConfig, Spacing, Task};

use crate::boxsim::{mode_sum, radial_mode_sum, BoxMethod, BoxOptions};
use crate::error::{Error, ErrorClass, Result};
use crate::pvmath::{euler_constant, gamma_regularized, DEFAULT_GAMMA_TERMS};
use crate::scatter1d::{solve_grid, write_csv};
use crate::scatter3d::{
    default_l_max, load_soperator, phase_shift_grid, save_spectra, KSelection, PhaseShiftSpectrum,
    DEFAULT_UNITARITY_TOL,
};
use crate::trace1d::{casimir_energy_1d, density_of_states, trace_direct, trace_reflection, WeightFunction};
use crate::trace3d::{arg_det_s_grid, casimir_energy_3d, re_tr_f_grid, DispersionInputs};

#[derive(Debug, Parser)]
#[command(name = "scatter-trace", version, about = "Trace formulas and Casimir energies from scattering data")]
pub struct Cli {
    #[arg(value_enum)]
    pub task: Task,
    #[arg(long)]
    pub config: PathBuf,
    /// Also write the density-of-states integrand.
    #[arg(long)]
    pub emit_integrand: bool,
    /// Output directory (overrides `io.output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One-line summary printed on success.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub task: Task,
    pub total: f64,
    pub error: f64,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "task={} total={:.12e} error={:.3e}",
            self.task.name(),
            self.total,
            self.error
        )
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Validation => 4,
    }
}

/// Parse arguments, run, print, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Ok(n) = std::env::var("SCATTER_TRACE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: configuration error in `SCATTER_TRACE_THREADS`: {n:?} is not a positive integer");
                return 2;
            }
        }
    }
    match run(&cli) {
        Ok(s) => {
            println!("{s}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<Summary> {
    let cfg = RunConfig::load(&cli.config)?;
    cfg.validate(cli.task)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.io.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let ctx = Ctx {
        cfg: &cfg,
        out: &out,
        emit: cli.emit_integrand,
    };
    match cli.task {
        Task::Scatter1d => ctx.scatter1d(),
        Task::Trace1d => ctx.trace1d(),
        Task::Casimir1d => ctx.casimir1d(),
        Task::Scatter3d => ctx.scatter3d(),
        Task::Casimir3d => ctx.casimir3d(),
        Task::Validate => ctx.validate(),
        Task::GammaDemo => ctx.gamma_demo(),
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    emit: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn summary(task: Task, total: f64, error: f64) -> Summary {
    Summary { task, total, error }
}

/// `(1/2π) d arg det S / dk` by central differences.
fn dos_3d(spectra: &[PhaseShiftSpectrum]) -> Vec<(f64, f64)> {
    let n = spectra.len();
    (0..n)
        .filter(|_| n >= 2)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            let d = (spectra[b].arg_det_s() - spectra[a].arg_det_s()) / (spectra[b].k - spectra[a].k);
            (spectra[i].k, d / (2.0 * std::f64::consts::PI))
        })
        .collect()
}

impl Ctx<'_> {
    fn solver_tol(&self) -> f64 {
        self.cfg.tol("solver", 1e-10)
    }

    fn emit_dos(&self, rows: Vec<(f64, f64)>) -> Result<()> {
        if self.emit {
            write_rows(
                &self.out.join("integrand.csv"),
                &["k", "rho"],
                rows.into_iter().map(|(k, r)| vec![k, r]),
            )?;
        }
        Ok(())
    }

    fn data_1d(&self) -> Result<Vec<crate::scatter1d::ScatterData1D>> {
        solve_grid(self.cfg.potential()?, &self.cfg.kgrid()?, self.solver_tol())
    }

    fn scatter1d(&self) -> Result<Summary> {
        let data = self.data_1d()?;
        let mut w = create(&self.out.join("scatter1d.csv"))?;
        write_csv(&data, &mut w)?;
        w.flush()?;
        self.emit_dos(density_of_states(&data))?;
        let worst = data.iter().fold(0.0_f64, |m, d| m.max(d.unitarity_defect()));
        if worst > self.cfg.tol("unitarity", 1e-8) {
            return Err(Error::Validation(format!("S(k) unitarity defect {worst:.3e}")));
        }
        Ok(summary(Task::Scatter1d, data.last().map_or(0.0, |d| d.arg_det_s()), worst))
    }

    fn trace1d(&self) -> Result<Summary> {
        let data = self.data_1d()?;
        let phi = self.cfg.phi()?;
        let direct = trace_direct(&data, phi)?;
        let refl = trace_reflection(&data, phi);
        #[derive(Serialize)]
        struct Out<'a> {
            direct: &'a crate::trace1d::TraceResult,
            reflection: Option<crate::trace1d::TraceResult>,
            reflection_error: Option<String>,
        }
        let (reflection, reflection_error) = match refl {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        write_json(
            &self.out.join("trace1d.json"),
            &Out {
                direct: &direct,
                reflection,
                reflection_error,
            },
        )?;
        self.emit_dos(density_of_states(&data))?;
        Ok(summary(Task::Trace1d, direct.value, direct.quadrature_error))
    }

    fn casimir1d(&self) -> Result<Summary> {
        let data = self.data_1d()?;
        let double = casimir_energy_1d(&data)?;
        let direct = trace_direct(&data, &WeightFunction::Casimir);
        #[derive(Serialize)]
        struct Out<'a> {
            double_integral: &'a crate::trace1d::TraceResult,
            direct: Option<crate::trace1d::TraceResult>,
            direct_error: Option<String>,
        }
        let (d, de) = match direct {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        write_json(
            &self.out.join("casimir1d.json"),
            &Out {
                double_integral: &double,
                direct: d,
                direct_error: de,
            },
        )?;
        self.emit_dos(density_of_states(&data))?;
        Ok(summary(Task::Casimir1d, double.value, double.quadrature_error))
    }

    /// Spectra and Born integrals, computed or ingested.
    fn spectra_3d(&self) -> Result<(Vec<PhaseShiftSpectrum>, Option<Vec<f64>>)> {
        if let Some(path) = &self.cfg.io.soperator {
            let sel = match &self.cfg.kgrid {
                Some(g) => KSelection::Range {
                    lo: g.k_min,
                    hi: g.k_max,
                },
                None => KSelection::All,
            };
            let ops = load_soperator(path, sel, Some(self.cfg.tol("unitarity", DEFAULT_UNITARITY_TOL)))?;
            let spectra = ops.iter().map(|o| o.spectrum()).collect::<Result<Vec<_>>>()?;
            let born = self.born_for(&spectra)?;
            return Ok((spectra, born));
        }
        let model = self.cfg.potential()?;
        let ks = self.cfg.kgrid()?;
        let spectra = phase_shift_grid(model, &ks, None, self.cfg.tol("phase_shift", 1e-9))?;
        let born = ks
            .iter()
            .map(|&k| model.volume_integral(k))
            .collect::<Result<Vec<_>>>()?;
        Ok((spectra, Some(born)))
    }

    fn born_for(&self, spectra: &[PhaseShiftSpectrum]) -> Result<Option<Vec<f64>>> {
        if let Some(p) = &self.cfg.io.born_integral {
            let mut r = csv::Reader::from_path(p)?;
            let mut tab: Vec<(f64, f64)> = Vec::new();
            for rec in r.records() {
                let rec = rec?;
                let parse = |i: usize| -> Result<f64> {
                    rec.get(i)
                        .and_then(|s| s.trim().parse().ok())
                        .ok_or_else(|| Error::Format(format!("{}: bad row {rec:?}", p.display())))
                };
                tab.push((parse(0)?, parse(1)?));
            }
            let born = spectra
                .iter()
                .map(|s| {
                    tab.iter()
                        .find(|(k, _)| (k - s.k).abs() <= 1e-12 * s.k)
                        .map(|(_, b)| *b)
                        .ok_or_else(|| {
                            Error::Format(format!("{} has no row for k = {}", p.display(), s.k))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Some(born));
        }
        match &self.cfg.potential {
            Some(m) => Ok(Some(
                spectra
                    .iter()
                    .map(|s| m.volume_integral(s.k))
                    .collect::<Result<Vec<_>>>()?,
            )),
            None => Ok(None),
        }
    }

    fn scatter3d(&self) -> Result<Summary> {
        let (spectra, born) = self.spectra_3d()?;
        if spectra.iter().all(|s| s.is_partial_wave()) {
            save_spectra(&self.out.join("phase_shifts.jsonl"), &spectra)?;
        }
        let ks: Vec<f64> = spectra.iter().map(|s| s.k).collect();
        let disp = match born {
            Some(b) if spectra.len() >= 8 => {
                let inputs = DispersionInputs::from_spectra(&spectra, b)?;
                let inner: Vec<f64> = ks[1..ks.len() - 1].to_vec();
                let r = re_tr_f_grid(&inputs, &inner)?;
                let a = arg_det_s_grid(&inputs, &inner)?;
                Some((r, a))
            }
            _ => None,
        };
        let rows = spectra.iter().enumerate().map(|(i, s)| {
            let tf = s.trace_f();
            let ld = s.log_det1();
            let (rd, ad) = match &disp {
                Some((r, a)) if i > 0 && i + 1 < spectra.len() => (r[i - 1].value, a[i - 1].value),
                _ => (f64::NAN, f64::NAN),
            };
            vec![
                s.k,
                s.sigma_bar(),
                s.hs_norm_squared(),
                tf.re,
                tf.im,
                rd,
                s.arg_det_s(),
                ad,
                ld.re,
                ld.im,
                s.max_abs_eta(),
            ]
        });
        write_rows(
            &self.out.join("scatter3d.csv"),
            &[
                "k",
                "sigma_bar",
                "hs_norm_squared",
                "re_tr_f",
                "im_tr_f",
                "re_tr_f_dispersion",
                "arg_det_s",
                "arg_det_s_dispersion",
                "re_log_det1",
                "im_log_det1",
                "max_abs_eta",
            ],
            rows.collect::<Vec<_>>(),
        )?;
        self.emit_dos(dos_3d(&spectra))?;
        let worst = match &disp {
            Some((r, _)) => r
                .iter()
                .zip(&spectra[1..])
                .map(|(r, s)| (r.value - s.trace_f().re).abs())
                .fold(0.0, f64::max),
            None => 0.0,
        };
        Ok(summary(
            Task::Scatter3d,
            spectra.last().map_or(0.0, |s| s.sigma_bar()),
            worst,
        ))
    }

    fn casimir3d(&self) -> Result<Summary> {
        let (spectra, born) = self.spectra_3d()?;
        let born = born.ok_or_else(|| Error::config("io.born_integral", "missing"))?;
        let inputs = DispersionInputs::from_spectra(&spectra, born)?;
        let c = casimir_energy_3d(&inputs)?;
        write_json(&self.out.join("casimir3d.json"), &c)?;
        if self.emit {
            let ig = inputs
                .kgrid
                .iter()
                .zip(&inputs.born_integral)
                .zip(&inputs.sigma_bar)
                .zip(&inputs.log_det1_arg)
                .map(|(((k, b), s), a)| vec![*k, *b, *s, *a]);
            write_rows(
                &self.out.join("casimir3d_integrands.csv"),
                &["k", "born_integral", "sigma_bar", "arg_det1"],
                ig.collect::<Vec<_>>(),
            )?;
        }
        self.emit_dos(dos_3d(&spectra))?;
        Ok(summary(Task::Casimir3d, c.total, c.error_estimate))
    }

    fn validate(&self) -> Result<Summary> {
        let model = self.cfg.potential()?;
        let phi = self.cfg.phi()?;
        let b = self.cfg.box_config()?;
        let grid = self.cfg.kgrid.as_ref().unwrap();
        let k_cut = b.k_cut.unwrap_or(grid.k_max);
        let opts = BoxOptions::with_method(b.method.unwrap_or(BoxMethod::MatrixFd));
        let threshold = self.cfg.tol("validate_gap", 1e-2);
        let (trace, oracle) = if let Some(l_max) = b.l_max {
            if model.is_delta() {
                return Err(Error::config("box.l_max", "radial validation needs a radial potential"));
            }
            let ks = self.cfg.kgrid()?;
            let spectra = phase_shift_grid(model, &ks, None, self.cfg.tol("phase_shift", 1e-9))?;
            let l_need = default_l_max(model, k_cut, self.cfg.tol("phase_shift", 1e-9));
            if l_max + 8 < l_need {
                eprintln!("warning: box.l_max = {l_max} is below the semiclassical estimate {l_need}");
            }
            let trace = trace_3d(&spectra, phi)?;
            (trace, radial_mode_sum(model, phi, l_max, &b.sizes, k_cut, &opts)?)
        } else {
            let data = self.data_1d()?;
            let t = trace_direct(&data, phi)?;
            (t.value, mode_sum(model, phi, &b.sizes, k_cut, &opts)?)
        };
        let scale = trace.abs().max(1e-300);
        write_rows(
            &self.out.join("validate.csv"),
            &["size", "mode_sum", "gap", "relative_gap"],
            oracle
                .per_size
                .iter()
                .map(|(l, s)| vec![*l, *s, (s - trace).abs(), (s - trace).abs() / scale])
                .chain(std::iter::once(vec![
                    f64::INFINITY,
                    oracle.value,
                    (oracle.value - trace).abs(),
                    (oracle.value - trace).abs() / scale,
                ]))
                .collect::<Vec<_>>(),
        )?;
        let rel = (oracle.value - trace).abs() / scale;
        if rel > threshold {
            return Err(Error::Validation(format!(
                "extrapolated mode sum {} vs trace {trace}: relative gap {rel:.3e} > {threshold:.1e}",
                oracle.value
            )));
        }
        Ok(summary(Task::Validate, trace, rel))
    }

    fn gamma_demo(&self) -> Result<Summary> {
        let g = self.cfg.gamma.as_ref().unwrap();
        let n = g.terms.unwrap_or(DEFAULT_GAMMA_TERMS);
        let gamma_const = euler_constant(n as u64);
        let mut worst = 0.0_f64;
        let mut rows = Vec::with_capacity(g.z.len());
        for &z in &g.z {
            let v = gamma_regularized(Complex64::new(z, 0.0), n, gamma_const)?;
            let reference = statrs::function::gamma::gamma(z);
            let rel = ((v.re - reference) / reference).abs();
            worst = worst.max(rel);
            rows.push(vec![z, v.re, v.im, reference, rel]);
        }
        write_rows(
            &self.out.join("gamma.csv"),
            &["z", "re", "im", "reference", "relative_error"],
            rows,
        )?;
        Ok(summary(Task::GammaDemo, gamma_const, worst))
    }
}

/// `-∫ dk/2π phi'(k) arg det S(k)` over tabulated 3D spectra.
fn trace_3d(spectra: &[PhaseShiftSpectrum], phi: &WeightFunction) -> Result<f64> {
    let ks: Vec<f64> = spectra.iter().map(|s| s.k).collect();
    let (_, dphi) = phi.sample(&ks);
    let g: Vec<f64> = spectra
        .iter()
        .zip(&dphi)
        .map(|(s, d)| -d * s.arg_det_s() / (2.0 * std::f64::consts::PI))
        .collect();
    let h = crate::trace1d::integrate_half_line(&ks, &g, "3D trace")?;
    Ok(h.head + h.grid + h.tail)
}
