//! The `formc` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bench::{flop_estimates, format_tsv, run_benchmark, BenchConfig, BenchError, ComplexityParams};
use crate::cases::TestCase;
use crate::codegen::{emit, CodegenError, EmitterFormat, EmitterOptions};
use crate::form::{expand_to_monomials, parse_form_file, Form, FormError};
use crate::reference::{make_quadrature, ElementError, ElementSpec, Shape};
use crate::runtime::{assemble_form, build_dofmap, interpolate, EvaluationPath, GlobalTensor, Mesh, RuntimeError};
use crate::tensor::{CompiledForm, TensorError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

#[derive(Parser, Debug)]
#[command(name = "formc", version, about = "Compile variational forms to element tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    C,
    Raw,
    Latex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Tensor,
    Quadrature,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate code for the forms of a form file.
    Compile {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "c")]
        format: Format,
        /// Output file; `-` writes to standard output. Defaults to the
        /// form file's stem with the format's extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Only emit the named form.
        #[arg(long)]
        form: Option<String>,
        /// Name of the generated C function.
        #[arg(long)]
        function: Option<String>,
        /// Significant digits of emitted constants (6 to 17).
        #[arg(long, default_value_t = 16)]
        precision: usize,
    },
    /// Print the Lagrange basis of the given degree at the points of an
    /// exact quadrature rule.
    Tabulate {
        /// interval, triangle or tetrahedron
        shape: String,
        degree: usize,
        /// Degree of the quadrature rule (defaults to twice the element degree).
        #[arg(long)]
        rule: Option<usize>,
    },
    /// Assemble a form over a mesh and write MatrixMarket output.
    Assemble {
        file: PathBuf,
        /// Mesh file, or `unit:<d>:<n>` for a generated unit box.
        mesh: String,
        #[arg(long, value_enum, default_value = "tensor")]
        path: PathArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Form to assemble; defaults to the first bilinear form.
        #[arg(long)]
        form: Option<String>,
        /// Constant value interpolated into every coefficient.
        #[arg(long, default_value_t = 1.0)]
        coefficient: f64,
    },
    /// Time tensor contraction against quadrature.
    Bench {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        qmin: usize,
        #[arg(long, default_value_t = 4)]
        qmax: usize,
        #[arg(long, default_value_t = crate::bench::MIN_ELEMENTS)]
        elements: usize,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        /// Cell dimensions to run, for example `2,3`. Defaults to the form's own.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long)]
        form: Option<String>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the operation-count model.
    Estimate {
        /// A test case (mass, poisson, navier-stokes, elasticity) or a form file.
        target: Option<String>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        nf: Option<usize>,
        #[arg(long)]
        nd: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        vector: bool,
        /// Print every degree from 1 to this one.
        #[arg(long)]
        qmax: Option<usize>,
    },
}

/// Parse `args` (including the program name), run, and return the exit
/// code. Errors are reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("formc: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_output(target: &Path, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    if target == Path::new("-") {
        return stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: target.to_path_buf(), source });
    }
    std::fs::write(target, text).map_err(|source| CliError::Io { path: target.to_path_buf(), source })
}

fn load_forms(path: &Path) -> Result<Vec<Form>, CliError> {
    Ok(parse_form_file(&read(path)?)?)
}

fn select<'a>(forms: &'a [Form], name: Option<&str>) -> Result<&'a Form, CliError> {
    match name {
        Some(n) => forms.iter().find(|f| f.name == n).ok_or_else(|| CliError::Usage(format!("no form named '{n}'"))),
        None => forms
            .iter()
            .find(|f| f.arity() == 2)
            .or_else(|| forms.first())
            .ok_or_else(|| CliError::Usage("the file defines no forms".into())),
    }
}

fn parse_shape(s: &str) -> Result<Shape, CliError> {
    [Shape::Interval, Shape::Triangle, Shape::Tetrahedron]
        .into_iter()
        .find(|shape| shape.name() == s)
        .ok_or_else(|| CliError::Usage(format!("unknown shape '{s}' (expected interval, triangle or tetrahedron)")))
}

fn load_mesh(spec: &str) -> Result<Mesh, CliError> {
    if let Some(rest) = spec.strip_prefix("unit:") {
        let parts: Vec<usize> = rest.split(':').filter_map(|p| p.parse().ok()).collect();
        return match parts[..] {
            [d, n] if (1..=3).contains(&d) && n > 0 => Ok(Mesh::unit_box(d, n)),
            _ => Err(CliError::Usage(format!("bad generated mesh '{spec}' (expected unit:<d>:<n>)"))),
        };
    }
    Ok(read(Path::new(spec))?.parse::<Mesh>()?)
}

fn vector_market(v: &[f64]) -> String {
    let mut s = format!("%%MatrixMarket matrix array real general\n{} 1\n", v.len());
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    s
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Compile { file, format, output, form, function, precision } => {
            let forms = load_forms(&file)?;
            let format = match format {
                Format::C => EmitterFormat::CSource,
                Format::Raw => EmitterFormat::Raw,
                Format::Latex => EmitterFormat::Latex,
            };
            let chosen: Vec<&Form> = match &form {
                Some(name) => vec![select(&forms, Some(name))?],
                None => forms.iter().collect(),
            };
            if chosen.len() > 1 && format != EmitterFormat::CSource {
                let names: Vec<&str> = chosen.iter().map(|f| f.name.as_str()).collect();
                return Err(CliError::Usage(format!(
                    "{format} output holds one form; choose one of {} with --form",
                    names.join(", ")
                )));
            }
            let mut text = String::new();
            for f in &chosen {
                let name = match (&function, chosen.len()) {
                    (Some(n), 1) => n.clone(),
                    (Some(n), _) => format!("{n}_{}", f.name),
                    (None, 1) => "eval".to_string(),
                    (None, _) => format!("eval_{}", f.name),
                };
                let options = EmitterOptions::default().with_function_name(&name).with_precision(precision)?;
                text.push_str(&emit(&CompiledForm::compile(f)?, format, &options));
            }
            let target = output.unwrap_or_else(|| {
                let stem = file.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "form".into());
                PathBuf::from(stem).with_extension(format.extension())
            });
            write_output(&target, &text, stdout)
        }
        Command::Tabulate { shape, degree, rule } => {
            let shape = parse_shape(&shape)?;
            let element = ElementSpec::scalar(shape, degree).build()?;
            let rule = make_quadrature(shape, rule.unwrap_or(2 * degree));
            let tab = element.tabulate(rule.points())?;
            let d = shape.dim();
            let mut s = format!("# {} degree {degree}: {} basis functions, {} points\n", shape.name(), element.space_dimension(), rule.len());
            s.push_str("point\tbasis\tvalue");
            (0..d).for_each(|a| {
                let _ = write!(s, "\td{a}");
            });
            s.push('\n');
            for q in 0..rule.len() {
                for k in 0..element.space_dimension() {
                    let _ = write!(s, "{q}\t{k}\t{:e}", tab.value(k, 0, q));
                    for a in 0..d {
                        let _ = write!(s, "\t{:e}", tab.gradient(k, 0, a, q));
                    }
                    s.push('\n');
                }
            }
            write_output(Path::new("-"), &s, stdout)
        }
        Command::Assemble { file, mesh, path, output, form, coefficient } => {
            let forms = load_forms(&file)?;
            let form = select(&forms, form.as_deref())?;
            let mesh = load_mesh(&mesh)?;
            let coefficients = form
                .coefficients
                .iter()
                .map(|e| Ok(interpolate(&mesh, &build_dofmap(&mesh, *e)?, |_, _| coefficient)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            let path = match path {
                PathArg::Tensor => EvaluationPath::Tensor,
                PathArg::Quadrature => EvaluationPath::Quadrature,
            };
            let text = match assemble_form(form, &mesh, path, &coefficients)? {
                GlobalTensor::Matrix(m) => m.to_matrix_market(),
                GlobalTensor::Vector(v) => vector_market(&v),
            };
            write_output(output.as_deref().unwrap_or(Path::new("-")), &text, stdout)
        }
        Command::Bench { file, qmin, qmax, elements, repetitions, dims, form, threads, output } => {
            let forms = load_forms(&file)?;
            let form = select(&forms, form.as_deref())?;
            let shapes = if dims.is_empty() {
                vec![form.shape()]
            } else {
                dims.iter()
                    .map(|&d| Shape::from_dimension(d).ok_or_else(|| CliError::Usage(format!("dimension {d} is not 1, 2 or 3"))))
                    .collect::<Result<_, _>>()?
            };
            if qmin == 0 || qmin > qmax {
                return Err(CliError::Usage(format!("empty degree range {qmin}..={qmax}")));
            }
            let config =
                BenchConfig { shapes, degrees: (qmin..=qmax).collect(), elements, repetitions, threads, ..BenchConfig::default() };
            let results = run_benchmark(form, &config)?;
            write_output(output.as_deref().unwrap_or(Path::new("-")), &format_tsv(&results), stdout)
        }
        Command::Estimate { target, q, d, nf, nd, r, vector, qmax } => {
            let mut base = match target.as_deref() {
                None => ComplexityParams { q: 1, d: 2, n_f: 0, n_d: 0, r: 2, vector: false },
                Some(t) => match t.parse::<TestCase>() {
                    Ok(case) => ComplexityParams::for_case(case, 1, 2),
                    Err(_) => params_of_form(select(&load_forms(Path::new(t))?, None)?)?,
                },
            };
            base.q = q.unwrap_or(base.q);
            base.d = d.unwrap_or(base.d);
            base.n_f = nf.unwrap_or(base.n_f);
            base.n_d = nd.unwrap_or(base.n_d);
            base.r = r.unwrap_or(base.r);
            base.vector |= vector;
            if !(1..=3).contains(&base.d) {
                return Err(CliError::Usage(format!("dimension {} is not 1, 2 or 3", base.d)));
            }
            let degrees: Vec<usize> = match qmax {
                Some(m) => (1..=m).collect(),
                None => vec![base.q],
            };
            let mut s = String::from("q\td\tn_f\tn_D\tT_T\tT_Q\tratio\n");
            for q in degrees {
                let p = ComplexityParams { q, ..base };
                let e = flop_estimates(p);
                let _ = writeln!(s, "{q}\t{}\t{}\t{}\t{}\t{}\t{:.4}", p.d, p.n_f, p.n_d, e.tensor, e.quadrature, e.ratio);
            }
            write_output(Path::new("-"), &s, stdout)
        }
    }
}

fn params_of_form(form: &Form) -> Result<ComplexityParams, CliError> {
    let monomials = expand_to_monomials(form)?;
    let n_f = monomials.iter().map(|m| m.coefficients.len()).max().unwrap_or(0);
    let n_d = monomials.iter().map(|m| m.num_derivatives()).max().unwrap_or(0);
    let q = form.arguments.iter().map(|e| e.degree).max().unwrap_or(1);
    let vector = form.arguments.iter().any(|e| e.num_components() > 1);
    Ok(ComplexityParams { q, d: form.shape().dim(), n_f, n_d, r: form.arity(), vector })
}
