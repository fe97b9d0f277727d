//! The four standard test forms: mass matrix, Poisson stiffness, the
//! linearized Navier–Stokes advection term and linear elasticity.

use std::fmt;
use std::str::FromStr;

use crate::form::{parse_form_file, Form, FormError};
use crate::reference::Shape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestCase {
    Mass,
    Poisson,
    NavierStokes,
    Elasticity,
}

impl TestCase {
    pub const ALL: [TestCase; 4] = [TestCase::Mass, TestCase::Poisson, TestCase::NavierStokes, TestCase::Elasticity];

    pub fn name(self) -> &'static str {
        match self {
            TestCase::Mass => "mass",
            TestCase::Poisson => "poisson",
            TestCase::NavierStokes => "navier-stokes",
            TestCase::Elasticity => "elasticity",
        }
    }

    pub fn is_vector(self) -> bool {
        matches!(self, TestCase::NavierStokes | TestCase::Elasticity)
    }

    /// Number of coefficient functions.
    pub fn num_functions(self) -> usize {
        usize::from(self == TestCase::NavierStokes)
    }

    /// Number of differential operators.
    pub fn num_derivatives(self) -> usize {
        match self {
            TestCase::Mass => 0,
            TestCase::NavierStokes => 1,
            TestCase::Poisson | TestCase::Elasticity => 2,
        }
    }

    /// Form-file text for the given cell and degree.
    pub fn source(self, shape: Shape, degree: usize) -> String {
        let ctor = if self.is_vector() { "VectorElement" } else { "FiniteElement" };
        let mut text = format!(
            "element = {ctor}(\"Lagrange\", \"{shape}\", {degree})\n\n\
             v = BasisFunction(element)\nu = BasisFunction(element)\n"
        );
        if self == TestCase::NavierStokes {
            text.push_str("w = Function(element)\n");
        }
        text.push_str("i = Index()\nj = Index()\n\n");
        text.push_str(match self {
            TestCase::Mass => "a = v*u*dx\n",
            TestCase::Poisson => "a = v.dx(i)*u.dx(i)*dx\n",
            TestCase::NavierStokes => "a = v[i]*w[j]*u[i].dx(j)*dx\n",
            TestCase::Elasticity => "a = 0.25*(v[i].dx(j) + v[j].dx(i))*(u[i].dx(j) + u[j].dx(i))*dx\n",
        });
        text
    }

    pub fn form(self, shape: Shape, degree: usize) -> Result<Form, FormError> {
        let mut forms = parse_form_file(&self.source(shape, degree))?;
        Ok(forms.pop().expect("source defines one form"))
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown test case '{s}' (mass, poisson, navier-stokes, elasticity)"))
    }
}
