//! Acceptance criteria 1-10. Each criterion prints one PASS or FAIL line.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use formc::bench::{flop_estimates, run_benchmark, BenchConfig, ComplexityParams};
use formc::cases::TestCase;
use formc::codegen::{emit_c, EmitterOptions};
use formc::form::{expand_to_monomials, parse_form_file, IndexRef};
use formc::reference::{make_quadrature, Point, Shape};
use formc::runtime::{
    apply_dirichlet, assemble_form, build_dofmap, cg_solve, interpolate, l2_error, AffineMap, ElementEvaluator,
    EvaluationPath, Mesh, QuadratureEvaluator, TensorEvaluator,
};
use formc::tensor::{classify_indices, CompiledForm, TensorError};

type Outcome = Result<String, String>;

fn check(ok: bool, message: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.into())
    }
}

/// Coefficient of `G0_0_0` in the statement for `block[entry]`.
fn block_coefficient(c: &str, entry: usize) -> Option<f64> {
    let prefix = format!("block[{entry}] = ");
    let line = c.lines().map(str::trim).find(|l| l.starts_with(&prefix))?;
    let rhs = line.strip_prefix(&prefix)?.trim_end_matches(';');
    let mut sign = 1.0;
    for token in rhs.split(' ') {
        match token {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t => {
                if let Some(value) = t.strip_suffix("*G0_0_0") {
                    return value.parse::<f64>().ok().map(|v| sign * v);
                }
            }
        }
    }
    None
}

fn criterion_1() -> Outcome {
    let form = TestCase::Poisson.form(Shape::Triangle, 3).map_err(|e| e.to_string())?;
    let compiled = CompiledForm::compile(&form).map_err(|e| e.to_string())?;
    check(compiled.element_size() == 100, format!("{} entries", compiled.element_size()))?;
    let c = emit_c(&compiled, &EmitterOptions::default());
    for (entry, expected) in [(0, 4.249999999999996e-01), (1, -8.749999999999993e-02), (99, 4.049999999999997e+00)] {
        let got = block_coefficient(&c, entry).ok_or(format!("block[{entry}] has no G0_0_0 term"))?;
        check((got - expected).abs() <= 1e-9, format!("block[{entry}]: {got:e} vs {expected:e}"))?;
    }
    Ok("block[0], block[1], block[99] coefficients of G0_0_0 match".into())
}

fn random_cell(shape: Shape, rng: &mut ChaCha8Rng) -> AffineMap {
    let d = shape.dim();
    loop {
        let vertices: Vec<Point> = (0..=d)
            .map(|_| {
                let mut p = [0.0; 3];
                p.iter_mut().take(d).for_each(|x| *x = rng.gen_range(-1.0..1.0));
                p
            })
            .collect();
        if let Ok(map) = AffineMap::from_vertices(d, &vertices) {
            if map.det().abs() > 1e-2 {
                return map;
            }
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut configurations = 0;
    let mut worst: f64 = 0.0;
    for case in TestCase::ALL {
        let qmax = if case.is_vector() { 4 } else { 6 };
        for shape in [Shape::Triangle, Shape::Tetrahedron] {
            for q in 1..=qmax {
                let form = case.form(shape, q).map_err(|e| e.to_string())?;
                let compiled = CompiledForm::compile(&form).map_err(|e| e.to_string())?;
                let mut tensor = TensorEvaluator::new(&compiled);
                let mut oracle = QuadratureEvaluator::new(&form).map_err(|e| e.to_string())?;
                let size = compiled.element_size();
                let (mut a, mut b) = (vec![0.0; size], vec![0.0; size]);
                for _ in 0..20 {
                    let map = random_cell(shape, &mut rng);
                    let w: Vec<Vec<f64>> = compiled
                        .coefficient_dims()
                        .iter()
                        .map(|&n| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                        .collect();
                    let w: Vec<&[f64]> = w.iter().map(|v| v.as_slice()).collect();
                    tensor.evaluate(&map, &w, &mut a);
                    oracle.evaluate(&map, &w, &mut b);
                    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
                        let err = (x - y).abs();
                        if err > (1e-10 * y.abs()).max(1e-12) {
                            return Err(format!("{case} {shape:?} q={q} entry {k}: {x:e} vs {y:e}"));
                        }
                        worst = worst.max(err / y.abs().max(1e-2));
                    }
                }
                configurations += 1;
            }
        }
    }
    Ok(format!("{configurations} configurations x 20 cells agree (largest scaled difference {worst:.1e})"))
}

fn criterion_3() -> Outcome {
    let identity = AffineMap::from_vertices(2, &[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).map_err(|e| e.to_string())?;
    let mass = CompiledForm::compile(&TestCase::Mass.form(Shape::Triangle, 1).unwrap()).map_err(|e| e.to_string())?;
    let mut out = vec![0.0; 9];
    TensorEvaluator::new(&mass).evaluate(&identity, &[], &mut out);
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
            check((out[i * 3 + j] - expected).abs() <= 1e-13, format!("mass[{i}][{j}] = {}", out[i * 3 + j]))?;
        }
    }
    let poisson = CompiledForm::compile(&TestCase::Poisson.form(Shape::Triangle, 1).unwrap()).map_err(|e| e.to_string())?;
    TensorEvaluator::new(&poisson).evaluate(&identity, &[], &mut out);
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            check((out[i * 3 + j] - expected[i][j]).abs() <= 1e-13, format!("stiffness[{i}][{j}] = {}", out[i * 3 + j]))?;
        }
    }
    Ok("P1 mass and stiffness on the reference triangle".into())
}

/// Returns (rank(A0) = r + rank(G) holds everywhere, monomials where
/// rank(G) != n_f + n_D, index errors behave).
fn criterion_4() -> Outcome {
    let mut violations = Vec::new();
    let mut monomials = 0;
    for case in TestCase::ALL {
        for shape in [Shape::Triangle, Shape::Tetrahedron] {
            let form = case.form(shape, 2).unwrap();
            let compiled = CompiledForm::compile(&form).map_err(|e| e.to_string())?;
            for term in &compiled.terms {
                monomials += 1;
                let m = &term.monomial;
                check(
                    term.reference.rank() == m.arity() + term.geometry.rank(),
                    format!("{case}: rank(A0) = {} but r + rank(G) = {}", term.reference.rank(), m.arity() + term.geometry.rank()),
                )?;
                let n_f = m.num_functions();
                let n_d = m.transforms.len();
                if term.geometry.rank() != n_f + n_d {
                    violations.push(format!("{case} {shape:?}: rank(G) = {} but n_f + n_D = {}", term.geometry.rank(), n_f + n_d));
                }
            }
        }
    }
    let header = "e = VectorElement(\"Lagrange\", \"triangle\", 1)\nv = BasisFunction(e)\nu = BasisFunction(e)\n\
                  i = Index()\nj = Index()\n";
    let classify = |body: &str| {
        let form = parse_form_file(&format!("{header}{body}")).unwrap().pop().unwrap();
        classify_indices(&expand_to_monomials(&form).unwrap()[0], &form.index_names)
    };
    check(classify("a = v[i]*u[0]*dx") == Err(TensorError::IndexOccursOnce("i".into())), "single occurrence accepted")?;
    check(classify("a = v[i]*u[i].dx(i)*dx") == Err(TensorError::IndexOccursThrice("i".into())), "triple occurrence accepted")?;
    check(classify("a = v[i]*u[i]*dx").is_ok(), "paired index rejected")?;
    if violations.is_empty() {
        Ok(format!("{monomials} monomials"))
    } else {
        Err(format!(
            "rank(A0) = r + rank(G) and index checks hold for {monomials} monomials, but rank(G) = n_f + n_D fails for {} of them: {}",
            violations.len(),
            violations.join("; ")
        ))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for p in 1..=10 {
        let tri = make_quadrature(Shape::Triangle, p);
        let tet = make_quadrature(Shape::Tetrahedron, p);
        for a in 0..=p {
            for b in 0..=p - a {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let got = tri.integrate(|x| x[0].powi(a as i32) * x[1].powi(b as i32));
                check((got - exact).abs() <= 1e-13, format!("triangle p={p} x^{a} y^{b}: {got:e} vs {exact:e}"))?;
                checked += 1;
                for c in 0..=p - a - b {
                    let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                    let got = tet.integrate(|x| x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32));
                    check((got - exact).abs() <= 1e-13, format!("tetrahedron p={p} x^{a} y^{b} z^{c}: {got:e} vs {exact:e}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} monomial integrals"))
}

fn criterion_6() -> Outcome {
    let mesh: Mesh = include_str!("../meshes/square2.mesh").parse().map_err(|e| format!("{e}"))?;
    check(mesh.num_cells() == 2, "mesh should have two triangles")?;
    for q in 1..=3 {
        let poisson = TestCase::Poisson.form(Shape::Triangle, q).unwrap();
        let a = assemble_form(&poisson, &mesh, EvaluationPath::Tensor, &[]).map_err(|e| e.to_string())?;
        let b = assemble_form(&poisson, &mesh, EvaluationPath::Quadrature, &[]).map_err(|e| e.to_string())?;
        let (a, b) = (a.as_matrix().unwrap(), b.as_matrix().unwrap());
        for (r, c, v) in a.entries() {
            check((v - b.get(r, c)).abs() <= 1e-10, format!("q={q} ({r},{c}): {v} vs {}", b.get(r, c)))?;
        }
        for (r, c, v) in b.entries() {
            check((v - a.get(r, c)).abs() <= 1e-10, format!("q={q} ({r},{c}) missing from tensor path"))?;
        }
        for r in 0..a.rows() {
            let sum: f64 = a.row(r).map(|(_, v)| v).sum();
            check(sum.abs() <= 1e-12, format!("q={q} row {r} sums to {sum:e}"))?;
        }
        let mass = TestCase::Mass.form(Shape::Triangle, q).unwrap();
        let m = assemble_form(&mass, &mesh, EvaluationPath::Tensor, &[]).map_err(|e| e.to_string())?;
        let total = m.as_matrix().unwrap().sum();
        check((total - 1.0).abs() <= 1e-12, format!("q={q} mass total {total}"))?;
    }
    Ok("Poisson paths agree, rows sum to zero and mass sums to the area for q = 1..3".into())
}

fn criterion_7() -> Outcome {
    use std::f64::consts::PI;
    let forms = parse_form_file(include_str!("../forms/PoissonP1.form")).map_err(|e| e.to_string())?;
    let (a, l) = (&forms[0], &forms[1]);
    let exact = |x: &Point| (PI * x[0]).sin() * (PI * x[1]).sin();
    let mut errors = Vec::new();
    for n in [4, 8, 16] {
        let mesh = Mesh::unit_square(n);
        let map = build_dofmap(&mesh, a.arguments[0]).map_err(|e| e.to_string())?;
        let source = build_dofmap(&mesh, l.coefficients[0]).map_err(|e| e.to_string())?;
        let f = interpolate(&mesh, &source, |x, _| 2.0 * PI * PI * exact(x)).map_err(|e| e.to_string())?;
        let matrix = assemble_form(a, &mesh, EvaluationPath::Tensor, &[]).map_err(|e| e.to_string())?;
        let rhs = assemble_form(l, &mesh, EvaluationPath::Tensor, &[f]).map_err(|e| e.to_string())?;
        let mut b = rhs.as_vector().unwrap().to_vec();
        let boundary = mesh.boundary_vertices();
        let matrix = apply_dirichlet(matrix.as_matrix().unwrap(), &mut b, &boundary, &vec![0.0; boundary.len()]);
        let mut u = vec![0.0; b.len()];
        cg_solve(&matrix, &b, &mut u, 1e-12, 10 * b.len()).map_err(|e| e.to_string())?;
        errors.push(l2_error(&mesh, &map, &u, exact).map_err(|e| e.to_string())?);
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    for r in &ratios {
        check((3.6..=4.4).contains(r), format!("error ratios {ratios:?} (errors {errors:?})"))?;
    }
    Ok(format!("L2 errors {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3}", errors[0], errors[1], errors[2], ratios[0], ratios[1]))
}

fn criterion_8() -> Outcome {
    let config = BenchConfig { degrees: vec![1, 2, 3, 4], ..BenchConfig::default() };
    let mut summary = Vec::new();
    for case in [TestCase::Mass, TestCase::Poisson] {
        let form = case.form(Shape::Triangle, 1).unwrap();
        let results = run_benchmark(&form, &config).map_err(|e| e.to_string())?;
        for r in &results {
            if r.q >= 2 {
                check(r.speedup > 1.0, format!("{case} q={} d={}: speedup {:.2}", r.q, r.d, r.speedup))?;
            }
        }
        let speedup = |q: usize, d: usize| results.iter().find(|r| r.q == q && r.d == d).map(|r| r.speedup).unwrap();
        if case == TestCase::Mass {
            check(
                speedup(4, 2) > speedup(1, 2),
                format!("mass 2D speedup q=4 {:.2} not above q=1 {:.2}", speedup(4, 2), speedup(1, 2)),
            )?;
        }
        let row: Vec<String> = results.iter().map(|r| format!("{}D q{} {:.1}", r.d, r.q, r.speedup)).collect();
        summary.push(format!("{case}: {}", row.join(", ")));
    }
    Ok(summary.join("; "))
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    for d in [2, 3] {
        let ratio = |q: usize| flop_estimates(ComplexityParams::for_case(TestCase::Mass, q, d)).ratio;
        let model = ratio(8) / ratio(7);
        let closed = (16.0f64 / 14.0).powi(d as i32);
        let rel = (model - closed).abs() / closed;
        check(rel <= 0.15, format!("d={d}: ratio(8)/ratio(7) = {model:.4}, (2q)^d growth {closed:.4}"))?;
        notes.push(format!("d={d}: {model:.4} vs {closed:.4} ({:.1}%)", 100.0 * rel));
    }
    Ok(notes.join(", "))
}

fn criterion_10() -> Outcome {
    let forms = parse_form_file(include_str!("../forms/Poisson.form")).map_err(|e| e.to_string())?;
    let a = forms.iter().find(|f| f.name == "a").ok_or("no form a")?;
    check(a.arity() == 2, format!("arity {}", a.arity()))?;
    let monomials = expand_to_monomials(a).map_err(|e| e.to_string())?;
    check(monomials.len() == 1, format!("{} monomials", monomials.len()))?;
    let m = &monomials[0];
    check(m.coefficients.is_empty(), "monomial has coefficients")?;
    let used: Vec<IndexRef> = m.arguments.iter().flat_map(|f| f.component.iter().chain(&f.derivatives).copied()).collect();
    check(used.len() == 2 && used[0] == used[1] && matches!(used[0], IndexRef::Free(_)), format!("indices {used:?}"))?;
    let declarations = "element = VectorElement(\"Lagrange\", \"triangle\", 2)\n\
                        v = BasisFunction(element)\nu = BasisFunction(element)\nw = Function(element)\n\
                        i = Index()\nj = Index()\n";
    let scalar = declarations.replace("VectorElement", "FiniteElement");
    for (decl, caption) in [(&scalar, "a = v*u*dx"), (&scalar, "a = v.dx(i)*u.dx(i)*dx"), (&declarations.to_string(), "a = v[i]*w[j]*u[i].dx(j)*dx")] {
        parse_form_file(&format!("{decl}{caption}\n")).map_err(|e| format!("'{caption}': {e}"))?;
    }
    Ok("verbatim Poisson file and the three caption forms parse".into())
}

struct Criterion {
    number: usize,
    run: fn() -> Outcome,
    limit: Duration,
    /// Criterion known to be unattainable as stated.
    expected_failure: bool,
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion { number: 1, run: criterion_1, limit: Duration::from_secs(5), expected_failure: false },
        Criterion { number: 2, run: criterion_2, limit: Duration::from_secs(60), expected_failure: false },
        Criterion { number: 3, run: criterion_3, limit: Duration::MAX, expected_failure: false },
        // the worked Navier-Stokes geometry tensor has rank 3 with
        // n_f + n_D = 2; elasticity cross terms have rank 4
        Criterion { number: 4, run: criterion_4, limit: Duration::MAX, expected_failure: true },
        Criterion { number: 5, run: criterion_5, limit: Duration::from_secs(10), expected_failure: false },
        Criterion { number: 6, run: criterion_6, limit: Duration::MAX, expected_failure: false },
        Criterion { number: 7, run: criterion_7, limit: Duration::from_secs(60), expected_failure: false },
        Criterion { number: 8, run: criterion_8, limit: Duration::from_secs(300), expected_failure: false },
        Criterion { number: 9, run: criterion_9, limit: Duration::MAX, expected_failure: false },
        Criterion { number: 10, run: criterion_10, limit: Duration::MAX, expected_failure: false },
    ];
    let mut unexpected = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.limit => Err(format!("took {elapsed:.1?}, limit {:?}", c.limit)),
            other => other,
        };
        let passed = outcome.is_ok();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let known = if !passed && c.expected_failure { " [known]" } else { "" };
        // written to the handle directly so the line survives output capture
        let _ = writeln!(std::io::stdout().lock(), "criterion {:>2}: {status}{known} ({elapsed:.2?}) {detail}", c.number);
        if passed == c.expected_failure {
            unexpected.push(c.number);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
