use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::cases::TestCase;
use crate::form::{expand_to_monomials, parse_form_file};
use crate::reference::Shape;

fn monomials(case: TestCase, shape: Shape, q: usize) -> Vec<IndexedMonomial> {
    let form = case.form(shape, q).unwrap();
    expand_to_monomials(&form).unwrap().iter().map(|m| classify_indices(m, &form.index_names).unwrap()).collect()
}

const P1_GRADIENTS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

#[test]
fn mass_p1_reference_tensor() {
    let m = &monomials(TestCase::Mass, Shape::Triangle, 1)[0];
    assert_eq!(m.geometry_rank(), 0);
    let a0 = compute_reference_tensor(m, None).unwrap();
    assert_eq!(a0.dims, vec![3, 3]);
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
            assert!((a0.get(&[i, j]) - expected).abs() < 1e-13);
        }
    }
    assert_eq!(drop_zeros(&a0, 0.0).len(), 9);
}

#[test]
fn poisson_p1_reference_tensor() {
    let m = &monomials(TestCase::Poisson, Shape::Triangle, 1)[0];
    let a0 = compute_reference_tensor(m, None).unwrap();
    assert_eq!(a0.dims, vec![3, 3, 2, 2]);
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    let expected = 0.5 * P1_GRADIENTS[i][a] * P1_GRADIENTS[j][b];
                    assert!((a0.get(&[i, j, a, b]) - expected).abs() < 1e-13);
                }
            }
        }
    }
    assert!((a0.get(&[1, 1, 0, 0]) - 0.5).abs() < 1e-13);
    assert_eq!(drop_zeros(&a0, DEFAULT_ZERO_TOLERANCE).len(), 16);
}

#[test]
fn poisson_p3_matches_published_coefficients() {
    let m = &monomials(TestCase::Poisson, Shape::Triangle, 3)[0];
    let a0 = compute_reference_tensor(m, None).unwrap();
    assert_eq!(a0.primary_dims(), &[10, 10]);
    assert!((a0.get(&[0, 0, 0, 0]) - 4.249999999999996e-01).abs() < 1e-9);
    assert!((a0.get(&[0, 1, 0, 0]) + 8.749999999999993e-02).abs() < 1e-9);
    assert!((a0.get(&[9, 9, 0, 0]) - 4.049999999999997e+00).abs() < 1e-9);
    // exact rational values of the same integrals
    assert!((a0.get(&[0, 0, 0, 0]) - 17.0 / 40.0).abs() < 1e-13);
    assert!((a0.get(&[9, 9, 0, 1]) - 81.0 / 40.0).abs() < 1e-12);
}

#[test]
fn all_zero_tensor_drops_everything() {
    let t = ReferenceTensor { dims: vec![2, 2], num_primary: 2, entries: vec![0.0; 4] };
    assert!(drop_zeros(&t, DEFAULT_ZERO_TOLERANCE).is_empty());
}

#[test]
fn classification_examples() {
    let mass = &monomials(TestCase::Mass, Shape::Triangle, 2)[0];
    assert!(mass.secondary.is_empty() && mass.reference_aux.is_empty() && mass.geometry_aux.is_empty());

    let poisson = &monomials(TestCase::Poisson, Shape::Tetrahedron, 1)[0];
    assert_eq!(poisson.secondary.iter().map(|s| s.kind).collect::<Vec<_>>(), vec![SecondaryKind::Direction; 2]);
    assert_eq!(poisson.geometry_aux, vec![3]);
    assert!(poisson.reference_aux.is_empty());
    assert_eq!(poisson.transforms[0].physical, GeoIndex::Auxiliary(0));

    let ns = &monomials(TestCase::NavierStokes, Shape::Triangle, 2)[0];
    let kinds: Vec<_> = ns.secondary.iter().map(|s| s.kind).collect();
    assert_eq!(
        kinds,
        vec![SecondaryKind::User { id: 1 }, SecondaryKind::Expansion { slot: 0 }, SecondaryKind::Direction]
    );
    assert_eq!(ns.secondary[1].range, 12);
    assert_eq!(ns.reference_aux, vec![2]);
    assert!(ns.geometry_aux.is_empty());
    assert_eq!(ns.transforms, vec![Transform { reference: 2, physical: GeoIndex::Secondary(0) }]);
    assert_eq!(ns.factors[0].component, Some(RefIndex::Auxiliary(0)));
    assert_eq!(ns.factors[2].component, Some(RefIndex::Secondary(0)));
    assert_eq!(ns.factors[0].component.unwrap().kind(), IndexKind::Auxiliary);

    let elasticity = monomials(TestCase::Elasticity, Shape::Triangle, 1);
    assert_eq!(elasticity.len(), 4);
    for m in &elasticity {
        assert_eq!(m.scalar, 0.25);
        // i and j are either both auxiliary or both secondary
        assert_eq!(m.geometry_rank() + m.reference_aux.len() + m.geometry_aux.len(), 4);
    }
}

#[test]
fn rank_bookkeeping() {
    for case in TestCase::ALL {
        for shape in [Shape::Triangle, Shape::Tetrahedron] {
            for m in monomials(case, shape, 2) {
                let a0 = compute_reference_tensor(&m, None).unwrap();
                let g = derive_geometry_expr(&m);
                assert_eq!(a0.rank() - m.arity(), g.rank());
                assert_eq!(g.rank(), m.num_functions() + m.num_transform_indices());
            }
        }
    }
}

fn classify_text(body: &str) -> Result<IndexedMonomial, TensorError> {
    let text = format!(
        "e = VectorElement(\"Lagrange\", \"triangle\", 1)\ns = FiniteElement(\"Lagrange\", \"triangle\", 1)\n\
         v = BasisFunction(e)\nu = BasisFunction(e)\np = BasisFunction(s)\ni = Index()\nj = Index()\n{body}"
    );
    let form = parse_form_file(&text).unwrap().pop().unwrap();
    classify_indices(&expand_to_monomials(&form).unwrap()[0], &form.index_names)
}

#[test]
fn classification_errors() {
    assert_eq!(classify_text("a = v[i]*u[0]*dx"), Err(TensorError::IndexOccursOnce("i".into())));
    assert_eq!(classify_text("a = v[i]*u[i].dx(i)*dx"), Err(TensorError::IndexOccursThrice("i".into())));
    assert!(matches!(classify_text("a = v*u[0]*dx"), Err(TensorError::ComponentMismatch(_))));
    assert!(matches!(classify_text("a = p[0]*u[0]*dx"), Err(TensorError::ComponentMismatch(_))));
    assert!(matches!(classify_text("a = v[2]*u[0]*dx"), Err(TensorError::FixedIndexOutOfRange { value: 2, range: 2 })));
    assert!(matches!(classify_text("a = v[0].dx(0).dx(1)*u[0]*dx"), Err(TensorError::UnsupportedDerivativeOrder(2))));
    let div = classify_text("a = v[i].dx(i)*p*dx").unwrap();
    assert_eq!(div.geometry_rank(), 2);
    assert_eq!(div.num_transform_indices(), 2);
}

#[test]
fn doubling_quadrature_degree_changes_nothing() {
    for case in TestCase::ALL {
        for m in monomials(case, Shape::Triangle, 2) {
            let a = compute_reference_tensor(&m, None).unwrap();
            let b = compute_reference_tensor(&m, Some(2 * m.integrand_degree.max(1))).unwrap();
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert!((x - y).abs() <= 1e-12, "{case}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn geometry_of_poisson() {
    let m = &monomials(TestCase::Poisson, Shape::Triangle, 1)[0];
    let g = derive_geometry_expr(m);
    assert_eq!(g.component_products(&[0, 1]).len(), 2);
    assert_eq!(
        g.component_products(&[0, 1])[1],
        vec![Atom::Jacobian { reference: 0, physical: 1 }, Atom::Jacobian { reference: 1, physical: 1 }]
    );
    let jac = [[2.0, 0.5, 0.0], [0.25, 3.0, 0.0], [0.0; 3]];
    let mut out = vec![0.0; 4];
    g.evaluate(1.5, &jac, &[], &mut out);
    let expected = 1.5 * (2.0 * 0.25 + 0.5 * 3.0);
    assert!((out[1] - expected).abs() < 1e-14);
}

#[test]
fn poisson_p1_element_tensor_on_reference_cell() {
    let form = TestCase::Poisson.form(Shape::Triangle, 1).unwrap();
    let cf = CompiledForm::compile(&form).unwrap();
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]];
    let mut out = vec![0.0; 9];
    cf.tabulate_tensor(1.0, &identity, &[], &mut out, &mut Vec::new());
    let expected = [1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5];
    for (a, b) in out.iter().zip(expected) {
        assert!((a - b).abs() < 1e-13);
    }
}

fn random_map(vertices: &[f64], d: usize) -> (f64, [[f64; 3]; 3]) {
    let b = DMatrix::from_fn(d, d, |i, j| vertices[(j + 1) * d + i] - vertices[i]);
    let inv = b.clone().try_inverse().unwrap();
    let mut g = [[0.0; 3]; 3];
    for a in 0..d {
        for j in 0..d {
            g[a][j] = inv[(a, j)];
        }
    }
    (b.determinant(), g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_forms_give_symmetric_tensors(
        vertices in prop::collection::vec(-1.0..1.0f64, 12),
        case in prop::sample::select(vec![TestCase::Mass, TestCase::Poisson, TestCase::Elasticity]),
        tet in any::<bool>(),
        q in 1usize..3,
    ) {
        let (shape, d) = if tet { (Shape::Tetrahedron, 3) } else { (Shape::Triangle, 2) };
        let (det, g) = random_map(&vertices, d);
        prop_assume!(det.abs() > 1e-3);
        let cf = CompiledForm::compile(&case.form(shape, q).unwrap()).unwrap();
        let n = cf.element_dims()[0];
        let mut out = vec![0.0; n * n];
        cf.tabulate_tensor(det, &g, &[], &mut out, &mut Vec::new());
        let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                prop_assert!((out[i * n + j] - out[j * n + i]).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn zero_skipping_is_sound(
        vertices in prop::collection::vec(-1.0..1.0f64, 6),
        case in prop::sample::select(TestCase::ALL.to_vec()),
        q in 1usize..4,
    ) {
        let (det, g) = random_map(&vertices, 2);
        prop_assume!(det.abs() > 1e-3);
        let form = case.form(Shape::Triangle, q).unwrap();
        let sparse = CompiledForm::compile(&form).unwrap();
        let dense = CompiledForm::compile_with_tolerance(&form, 0.0).unwrap();
        let w: Vec<f64> = (0..sparse.coefficient_dims().first().copied().unwrap_or(0)).map(|k| (k as f64).sin()).collect();
        let mut a = vec![0.0; sparse.element_size()];
        let mut b = a.clone();
        sparse.tabulate_tensor(det, &g, &[&w], &mut a, &mut Vec::new());
        dense.tabulate_tensor(det, &g, &[&w], &mut b, &mut Vec::new());
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}
