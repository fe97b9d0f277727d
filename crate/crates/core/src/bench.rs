//! Operation-count model and the tensor-versus-quadrature timing harness.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cases::TestCase;
use crate::codegen::count_code_lines;
use crate::form::{Form, FormError};
use crate::reference::{make_quadrature, polynomial_dimension, Point, Shape};
use crate::runtime::{AffineMap, ElementEvaluator, QuadratureEvaluator, RuntimeError, TensorEvaluator};
use crate::tensor::{CompiledForm, TensorError};

/// Seed used when `FORMC_SEED` is unset.
pub const DEFAULT_SEED: u64 = 20_070_312;

/// Seed from the `FORMC_SEED` environment variable, or [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("FORMC_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("at least one repetition is required")]
    NoRepetitions,
    #[error("{0} elements requested, at least {MIN_ELEMENTS} are required")]
    TooFewElements(usize),
    #[error("{form} q={q} d={d}: entry {entry} is {tensor:e} by tensor contraction but {quadrature:e} by quadrature")]
    ValueMismatch { form: String, q: usize, d: usize, entry: usize, tensor: f64, quadrature: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Parameters of the operation-count model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityParams {
    pub q: usize,
    pub d: usize,
    /// Number of coefficient functions.
    pub n_f: usize,
    /// Number of differential operators.
    pub n_d: usize,
    pub r: usize,
    /// Vector-valued elements have `d` times as many basis functions.
    pub vector: bool,
}

impl ComplexityParams {
    pub fn for_case(case: TestCase, q: usize, d: usize) -> Self {
        ComplexityParams { q, d, n_f: case.num_functions(), n_d: case.num_derivatives(), r: 2, vector: case.is_vector() }
    }
}

/// Modelled operation counts per element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlopEstimate {
    pub tensor: f64,
    pub quadrature: f64,
    pub ratio: f64,
}

/// `T_T = n^r n^{n_f} d^{n_D}` and `T_Q = n^r N (n_f + n_D d + 1)` with
/// `N` the size of the collapsed rule for degree `(2 + n_f) q - n_D`.
pub fn flop_estimates(p: ComplexityParams) -> FlopEstimate {
    let shape = Shape::from_dimension(p.d.clamp(1, 3)).expect("dimension in 1..=3");
    let mut n = polynomial_dimension(p.d, p.q) as f64;
    if p.vector {
        n *= p.d as f64;
    }
    let degree = ((2 + p.n_f) * p.q).saturating_sub(p.n_d);
    let points = make_quadrature(shape, degree).len() as f64;
    let outer = n.powi(p.r as i32);
    let tensor = outer * n.powi(p.n_f as i32) * (p.d as f64).powi(p.n_d as i32);
    let quadrature = outer * points * (p.n_f + p.n_d * p.d + 1) as f64;
    FlopEstimate { tensor, quadrature, ratio: quadrature / tensor }
}

pub const MIN_ELEMENTS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub shapes: Vec<Shape>,
    pub degrees: Vec<usize>,
    pub elements: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Worker threads; 1 keeps timings stable.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            shapes: vec![Shape::Triangle, Shape::Tetrahedron],
            degrees: vec![1, 2, 3, 4],
            elements: MIN_ELEMENTS,
            repetitions: 5,
            seed: seed_from_env(),
            threads: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchResult {
    pub form: String,
    pub q: usize,
    pub d: usize,
    /// Per-entry time of the tensor path.
    pub t_tensor_ns: f64,
    /// Per-entry time of the quadrature path.
    pub t_quad_ns: f64,
    pub speedup: f64,
    pub elements: usize,
    pub lines: usize,
}

struct Workload {
    maps: Vec<AffineMap>,
    coefficients: Vec<Vec<Vec<f64>>>,
}

fn random_workload(shape: Shape, coefficient_dims: &[usize], elements: usize, rng: &mut ChaCha8Rng) -> Workload {
    let d = shape.dim();
    let reference = crate::reference::ReferenceCell::new(shape).vertices();
    let mut maps = Vec::with_capacity(elements);
    while maps.len() < elements {
        // perturbed reference cells keep the geometry well conditioned
        let vertices: Vec<Point> = reference
            .iter()
            .map(|v| {
                let mut p = *v;
                p.iter_mut().take(d).for_each(|x| *x += rng.gen_range(-0.25..0.25));
                p
            })
            .collect();
        if let Ok(map) = AffineMap::from_vertices(d, &vertices) {
            if map.det().abs() > 1e-2 {
                maps.push(map);
            }
        }
    }
    let coefficients = (0..elements)
        .map(|_| coefficient_dims.iter().map(|&n| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    Workload { maps, coefficients }
}

fn sweep(evaluator: &mut dyn ElementEvaluator, work: &Workload, range: std::ops::Range<usize>, out: &mut [f64]) -> f64 {
    let mut checksum = 0.0;
    for e in range {
        let w: Vec<&[f64]> = work.coefficients[e].iter().map(|v| v.as_slice()).collect();
        evaluator.evaluate(&work.maps[e], &w, out);
        checksum += out[0];
    }
    checksum
}

// Minimum wall time in seconds over the repetitions, after one warm-up pass.
fn time_path<'a, F>(make: F, work: &Workload, size: usize, repetitions: usize, threads: usize) -> Result<f64, BenchError>
where
    F: Fn() -> Result<Box<dyn ElementEvaluator + Send + 'a>, BenchError> + Sync,
{
    let n = work.maps.len();
    let mut evaluators: Vec<Box<dyn ElementEvaluator + Send + 'a>> = (0..threads).map(|_| make()).collect::<Result<_, _>>()?;
    let mut outs = vec![vec![0.0; size]; threads];
    let chunk = n.div_ceil(threads);
    let mut best = f64::INFINITY;
    for rep in 0..=repetitions {
        let start = Instant::now();
        if threads == 1 {
            black_box(sweep(evaluators[0].as_mut(), work, 0..n, &mut outs[0]));
        } else {
            let total: f64 = std::thread::scope(|s| {
                let handles: Vec<_> = evaluators
                    .iter_mut()
                    .zip(outs.iter_mut())
                    .enumerate()
                    .map(|(t, (ev, out))| {
                        let range = (t * chunk).min(n)..((t + 1) * chunk).min(n);
                        s.spawn(move || sweep(ev.as_mut(), work, range, out))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("benchmark worker")).sum()
            });
            black_box(total);
        }
        let elapsed = start.elapsed().as_secs_f64();
        if rep > 0 {
            best = best.min(elapsed);
        }
    }
    Ok(best)
}

fn cross_check(form: &Form, compiled: &CompiledForm, work: &Workload, q: usize) -> Result<(), BenchError> {
    let size = compiled.element_size();
    let mut tensor = TensorEvaluator::new(compiled);
    let mut quadrature = QuadratureEvaluator::new(form)?;
    let (mut a, mut b) = (vec![0.0; size], vec![0.0; size]);
    for e in 0..work.maps.len().min(32) {
        let w: Vec<&[f64]> = work.coefficients[e].iter().map(|v| v.as_slice()).collect();
        tensor.evaluate(&work.maps[e], &w, &mut a);
        quadrature.evaluate(&work.maps[e], &w, &mut b);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (entry, (x, y)) in a.iter().zip(&b).enumerate() {
            if (x - y).abs() > 1e-10 * scale + 1e-12 {
                return Err(BenchError::ValueMismatch {
                    form: form.name.clone(),
                    q,
                    d: compiled.shape.dim(),
                    entry,
                    tensor: *x,
                    quadrature: *y,
                });
            }
        }
    }
    Ok(())
}

/// Time both evaluation paths for `form` specialized to every requested
/// cell and degree. Only element-tensor evaluation is timed; maps and
/// coefficients are generated beforehand and shared by both paths.
pub fn run_benchmark(form: &Form, config: &BenchConfig) -> Result<Vec<BenchResult>, BenchError> {
    if config.repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    if config.elements < MIN_ELEMENTS {
        return Err(BenchError::TooFewElements(config.elements));
    }
    let threads = config.threads.max(1);
    let mut results = Vec::new();
    for &shape in &config.shapes {
        for &q in &config.degrees {
            let specialized = form.specialize(shape, q)?;
            let compiled = CompiledForm::compile(&specialized)?;
            let size = compiled.element_size();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((shape.dim() as u64) << 32) ^ q as u64);
            let work = random_workload(shape, &compiled.coefficient_dims(), config.elements, &mut rng);
            cross_check(&specialized, &compiled, &work, q)?;
            let tensor = time_path(|| Ok(Box::new(TensorEvaluator::new(&compiled))), &work, size, config.repetitions, threads)?;
            let quadrature =
                time_path(|| Ok(Box::new(QuadratureEvaluator::new(&specialized)?)), &work, size, config.repetitions, threads)?;
            let per_entry = 1e9 / (config.elements * size) as f64;
            results.push(BenchResult {
                form: specialized.name.clone(),
                q,
                d: shape.dim(),
                t_tensor_ns: tensor * per_entry,
                t_quad_ns: quadrature * per_entry,
                speedup: quadrature / tensor,
                elements: config.elements,
                lines: count_code_lines(&compiled),
            });
        }
    }
    Ok(results)
}

/// Tab-separated table with a header row.
pub fn format_tsv(results: &[BenchResult]) -> String {
    let mut s = String::from("form\tq\td\tt_tensor_ns\tt_quad_ns\tspeedup\tlines\n");
    for r in results {
        let _ = writeln!(s, "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.3}\t{}", r.form, r.q, r.d, r.t_tensor_ns, r.t_quad_ns, r.speedup, r.lines);
    }
    s
}
