//! The form algebra: basis functions, coefficient functions, products and
//! sums, closed under `+`, `-`, `*`, scalar scaling and `.dx`.

use crate::reference::{ElementSpec, Shape};

use super::FormError;

/// Index reference as written in a form: a free (named) index or a literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexRef {
    Free(usize),
    Fixed(usize),
}

/// A (derivative of a) basis function of argument `slot`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisFunction {
    pub element: ElementSpec,
    pub slot: usize,
    pub component: Option<IndexRef>,
    pub derivatives: Vec<IndexRef>,
}

/// A (derivative of a) coefficient function bound to `slot`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Function {
    pub element: ElementSpec,
    pub slot: usize,
    pub component: Option<IndexRef>,
    pub derivatives: Vec<IndexRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Basis(BasisFunction),
    Function(Function),
}

impl Factor {
    pub fn element(&self) -> ElementSpec {
        match self {
            Factor::Basis(b) => b.element,
            Factor::Function(f) => f.element,
        }
    }

    fn push_derivative(&mut self, index: IndexRef) {
        match self {
            Factor::Basis(b) => b.derivatives.push(index),
            Factor::Function(f) => f.derivatives.push(index),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub scalar: f64,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Sum {
    pub terms: Vec<Product>,
}

/// Class of an algebra value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Basis,
    Function,
    Product,
    Sum,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Basis(BasisFunction),
    Function(Function),
    Product(Product),
    Sum(Sum),
}

impl From<BasisFunction> for Expr {
    fn from(b: BasisFunction) -> Self {
        Expr::Basis(b)
    }
}

impl From<Function> for Expr {
    fn from(f: Function) -> Self {
        Expr::Function(f)
    }
}

impl Expr {
    pub fn kind(&self) -> ExprKind {
        match self {
            Expr::Basis(_) => ExprKind::Basis,
            Expr::Function(_) => ExprKind::Function,
            Expr::Product(_) => ExprKind::Product,
            Expr::Sum(_) => ExprKind::Sum,
        }
    }

    /// Cell shape shared by all factors, `None` for an empty sum.
    pub fn shape(&self) -> Option<Shape> {
        match self {
            Expr::Basis(b) => Some(b.element.shape),
            Expr::Function(f) => Some(f.element.shape),
            Expr::Product(p) => p.factors.first().map(|f| f.element().shape),
            Expr::Sum(s) => s.terms.iter().find_map(|p| p.factors.first().map(|f| f.element().shape)),
        }
    }

    /// Flatten into a sum of products.
    pub fn into_sum(self) -> Sum {
        match self {
            Expr::Basis(b) => Sum { terms: vec![Product { scalar: 1.0, factors: vec![Factor::Basis(b)] }] },
            Expr::Function(f) => Sum { terms: vec![Product { scalar: 1.0, factors: vec![Factor::Function(f)] }] },
            Expr::Product(p) => Sum { terms: vec![p] },
            Expr::Sum(s) => s,
        }
    }

    fn check_cells(&self, other: &Expr) -> Result<(), FormError> {
        match (self.shape(), other.shape()) {
            (Some(a), Some(b)) if a != b => Err(FormError::IncompatibleCells(a, b)),
            _ => Ok(()),
        }
    }

    pub fn neg(self) -> Expr {
        self.scale(-1.0)
    }

    /// Multiply by a scalar; division by a scalar is `scale(1/alpha)`.
    pub fn scale(self, alpha: f64) -> Expr {
        match self {
            Expr::Basis(b) => Expr::Product(Product { scalar: alpha, factors: vec![Factor::Basis(b)] }),
            Expr::Product(mut p) => {
                p.scalar *= alpha;
                Expr::Product(p)
            }
            Expr::Function(f) => Expr::Sum(Sum {
                terms: vec![Product { scalar: alpha, factors: vec![Factor::Function(f)] }],
            }),
            Expr::Sum(mut s) => {
                s.terms.iter_mut().for_each(|p| p.scalar *= alpha);
                Expr::Sum(s)
            }
        }
    }

    pub fn add(self, other: Expr) -> Result<Expr, FormError> {
        self.check_cells(&other)?;
        let mut sum = self.into_sum();
        sum.terms.extend(other.into_sum().terms);
        Ok(Expr::Sum(sum))
    }

    pub fn sub(self, other: Expr) -> Result<Expr, FormError> {
        self.add(other.scale(-1.0))
    }

    pub fn mul(self, other: Expr) -> Result<Expr, FormError> {
        self.check_cells(&other)?;
        let product_like = |e: &Expr| matches!(e, Expr::Basis(_) | Expr::Product(_));
        if product_like(&self) && product_like(&other) {
            let a = self.into_sum().terms.pop().expect("single product");
            let b = other.into_sum().terms.pop().expect("single product");
            return Ok(Expr::Product(multiply_products(&a, &b)));
        }
        let lhs = self.into_sum();
        let rhs = other.into_sum();
        let mut terms = Vec::with_capacity(lhs.terms.len() * rhs.terms.len());
        for a in &lhs.terms {
            for b in &rhs.terms {
                terms.push(multiply_products(a, b));
            }
        }
        Ok(Expr::Sum(Sum { terms }))
    }

    /// Spatial derivative along `index`.
    pub fn dx(self, index: IndexRef) -> Expr {
        match self {
            Expr::Basis(mut b) => {
                b.derivatives.push(index);
                Expr::Product(Product { scalar: 1.0, factors: vec![Factor::Basis(b)] })
            }
            Expr::Function(mut f) => {
                f.derivatives.push(index);
                Expr::Sum(Sum { terms: vec![Product { scalar: 1.0, factors: vec![Factor::Function(f)] }] })
            }
            Expr::Product(p) => Expr::Sum(Sum { terms: differentiate_product(&p, index) }),
            Expr::Sum(s) => {
                Expr::Sum(Sum { terms: s.terms.iter().flat_map(|p| differentiate_product(p, index)).collect() })
            }
        }
    }

    /// Select a vector component. Only basis and coefficient functions carry
    /// components.
    pub fn component(self, index: IndexRef) -> Result<Expr, FormError> {
        match self {
            Expr::Basis(mut b) if b.component.is_none() => {
                b.component = Some(index);
                Ok(Expr::Basis(b))
            }
            Expr::Function(mut f) if f.component.is_none() => {
                f.component = Some(index);
                Ok(Expr::Function(f))
            }
            _ => Err(FormError::InvalidComponent(
                "components can be taken once, and only of basis or coefficient functions".into(),
            )),
        }
    }
}

fn multiply_products(a: &Product, b: &Product) -> Product {
    let mut factors = a.factors.clone();
    factors.extend(b.factors.iter().cloned());
    Product { scalar: a.scalar * b.scalar, factors }
}

fn differentiate_product(p: &Product, index: IndexRef) -> Vec<Product> {
    (0..p.factors.len())
        .map(|k| {
            let mut q = p.clone();
            q.factors[k].push_derivative(index);
            q
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::ElementSpec;

    fn basis(slot: usize) -> Expr {
        Expr::Basis(BasisFunction {
            element: ElementSpec::scalar(Shape::Triangle, 1),
            slot,
            component: None,
            derivatives: vec![],
        })
    }

    fn function() -> Expr {
        Expr::Function(Function {
            element: ElementSpec::scalar(Shape::Triangle, 1),
            slot: 0,
            component: None,
            derivatives: vec![],
        })
    }

    fn product() -> Expr {
        basis(0).mul(basis(1)).unwrap()
    }

    fn sum() -> Expr {
        basis(0).add(basis(1)).unwrap()
    }

    fn of(kind: ExprKind) -> Expr {
        match kind {
            ExprKind::Basis => basis(0),
            ExprKind::Function => function(),
            ExprKind::Product => product(),
            ExprKind::Sum => sum(),
        }
    }

    const KINDS: [ExprKind; 4] = [ExprKind::Basis, ExprKind::Function, ExprKind::Product, ExprKind::Sum];

    #[test]
    fn unary_operator_classes() {
        use ExprKind::*;
        let neg = [Product, Sum, Product, Sum];
        let dx = [Product, Sum, Sum, Sum];
        for (k, kind) in KINDS.iter().enumerate() {
            assert_eq!(of(*kind).neg().kind(), neg[k], "-{kind:?}");
            assert_eq!(of(*kind).dx(IndexRef::Fixed(0)).kind(), dx[k], "{kind:?}.dx");
        }
    }

    #[test]
    fn binary_operator_classes() {
        use ExprKind::*;
        let mul = [
            [Product, Sum, Product, Sum],
            [Sum, Sum, Sum, Sum],
            [Product, Sum, Product, Sum],
            [Sum, Sum, Sum, Sum],
        ];
        for (i, a) in KINDS.iter().enumerate() {
            for (j, b) in KINDS.iter().enumerate() {
                assert_eq!(of(*a).add(of(*b)).unwrap().kind(), Sum);
                assert_eq!(of(*a).sub(of(*b)).unwrap().kind(), Sum);
                assert_eq!(of(*a).mul(of(*b)).unwrap().kind(), mul[i][j], "{a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn double_negation() {
        let e = basis(0).neg().neg();
        match e {
            Expr::Product(p) => {
                assert_eq!(p.scalar, 1.0);
                assert_eq!(p.factors.len(), 1);
            }
            other => panic!("expected product, got {other:?}"),
        }
    }

    #[test]
    fn product_rule() {
        let e = product().dx(IndexRef::Free(0));
        let Expr::Sum(s) = e else { panic!() };
        assert_eq!(s.terms.len(), 2);
        for (k, term) in s.terms.iter().enumerate() {
            for (j, f) in term.factors.iter().enumerate() {
                let Factor::Basis(b) = f else { panic!() };
                assert_eq!(b.derivatives.len(), usize::from(j == k));
            }
        }
    }

    #[test]
    fn incompatible_cells() {
        let tet = Expr::Basis(BasisFunction {
            element: ElementSpec::scalar(Shape::Tetrahedron, 1),
            slot: 1,
            component: None,
            derivatives: vec![],
        });
        assert!(matches!(basis(0).mul(tet.clone()), Err(FormError::IncompatibleCells(..))));
        assert!(matches!(basis(0).add(tet), Err(FormError::IncompatibleCells(..))));
    }
}
