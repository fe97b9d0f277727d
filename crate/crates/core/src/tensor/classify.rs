use std::collections::HashMap;

use crate::form::{IndexRef, MonomialTerm};
use crate::reference::{ElementSpec, Shape, ValueRank};

use super::TensorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    Primary,
    Secondary,
    Auxiliary,
    Fixed,
}

/// An index position on the reference-tensor side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefIndex {
    /// Basis function of argument `slot`.
    Primary(usize),
    Secondary(usize),
    /// Summed while computing the reference tensor.
    Auxiliary(usize),
    Fixed(usize),
}

impl RefIndex {
    pub fn kind(self) -> IndexKind {
        match self {
            RefIndex::Primary(_) => IndexKind::Primary,
            RefIndex::Secondary(_) => IndexKind::Secondary,
            RefIndex::Auxiliary(_) => IndexKind::Auxiliary,
            RefIndex::Fixed(_) => IndexKind::Fixed,
        }
    }
}

/// An index position on the geometry-tensor side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoIndex {
    Secondary(usize),
    /// Summed while evaluating the geometry tensor.
    Auxiliary(usize),
    Fixed(usize),
}

/// What a secondary index runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SecondaryKind {
    /// Expansion index of coefficient `slot`.
    Expansion { slot: usize },
    /// Reference direction of one derivative.
    Direction,
    /// User index shared between a component and a derivative.
    User { id: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SecondaryIndex {
    pub kind: SecondaryKind,
    pub range: usize,
}

/// One reference basis factor `∂Φ_basis[component]/∂X_direction`.
#[derive(Clone, Debug, PartialEq)]
pub struct RefFactor {
    pub element: ElementSpec,
    pub basis: RefIndex,
    pub component: Option<RefIndex>,
    /// Secondary position of the reference direction, if differentiated.
    pub direction: Option<usize>,
}

/// One Jacobian-inverse factor `∂X_reference/∂x_physical`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transform {
    pub reference: usize,
    pub physical: GeoIndex,
}

/// Coefficient vector `w_slot` indexed by a secondary expansion index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoefficientRef {
    pub slot: usize,
    pub expansion: usize,
}

/// A monomial with every index classified.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedMonomial {
    pub scalar: f64,
    pub shape: Shape,
    /// Space dimension of each argument.
    pub primary_dims: Vec<usize>,
    /// Argument factors in slot order, then coefficient factors.
    pub factors: Vec<RefFactor>,
    pub transforms: Vec<Transform>,
    pub coefficients: Vec<CoefficientRef>,
    pub secondary: Vec<SecondaryIndex>,
    /// Ranges of the auxiliary indices summed in the reference tensor.
    pub reference_aux: Vec<usize>,
    /// Ranges of the auxiliary indices summed in the geometry tensor.
    pub geometry_aux: Vec<usize>,
    /// Polynomial degree of the reference integrand.
    pub integrand_degree: usize,
}

impl IndexedMonomial {
    pub fn arity(&self) -> usize {
        self.primary_dims.len()
    }

    /// Rank of the geometry tensor.
    pub fn geometry_rank(&self) -> usize {
        self.secondary.len()
    }

    pub fn reference_rank(&self) -> usize {
        self.arity() + self.secondary.len()
    }

    /// Number of coefficient factors.
    pub fn num_functions(&self) -> usize {
        self.coefficients.len()
    }

    /// Secondary index slots carried by derivative transforms: the
    /// reference direction, plus the physical direction when it is free.
    pub fn num_transform_indices(&self) -> usize {
        self.transforms.iter().map(|t| 1 + usize::from(matches!(t.physical, GeoIndex::Secondary(_)))).sum()
    }
}

#[derive(Clone, Copy)]
enum Side {
    Reference,
    Geometry,
}

struct View<'a> {
    element: ElementSpec,
    component: Option<IndexRef>,
    derivatives: &'a [IndexRef],
    // Some(slot) for arguments, None for coefficient `coeff`
    argument: Option<usize>,
    coeff: usize,
}

fn push(secondary: &mut Vec<SecondaryIndex>, kind: SecondaryKind, range: usize) -> usize {
    secondary.push(SecondaryIndex { kind, range });
    secondary.len() - 1
}

#[derive(Clone, Copy)]
enum UserKind {
    RefAux(usize),
    GeoAux(usize),
    Secondary,
}

/// Bound on secondary and geometry auxiliary indices per monomial.
pub const MAX_INDICES: usize = 16;

/// Classify every index of a monomial as primary, secondary, auxiliary or
/// fixed. `index_names` is used for diagnostics only.
pub fn classify_indices(m: &MonomialTerm, index_names: &[String]) -> Result<IndexedMonomial, TensorError> {
    let name = |id: usize| index_names.get(id).cloned().unwrap_or_else(|| format!("#{id}"));
    let shape = m.arguments[0].element.shape;
    let d = shape.dim();

    let views: Vec<View> = m
        .arguments
        .iter()
        .map(|a| View {
            element: a.element,
            component: a.component,
            derivatives: &a.derivatives,
            argument: Some(a.slot),
            coeff: 0,
        })
        .chain(m.coefficients.iter().map(|c| View {
            element: c.element,
            component: c.component,
            derivatives: &c.derivatives,
            argument: None,
            coeff: c.slot,
        }))
        .collect();

    let mut occurrences: HashMap<usize, Vec<Side>> = HashMap::new();
    for v in &views {
        if v.derivatives.len() > 1 {
            return Err(TensorError::UnsupportedDerivativeOrder(v.derivatives.len()));
        }
        match (v.element.value_rank, v.component) {
            (ValueRank::Scalar, Some(_)) => {
                return Err(TensorError::ComponentMismatch("component of a scalar-valued function".into()))
            }
            (ValueRank::Vector, None) => {
                return Err(TensorError::ComponentMismatch("vector-valued function used without a component".into()))
            }
            _ => {}
        }
        match v.component {
            Some(IndexRef::Fixed(n)) if n >= v.element.num_components() => {
                return Err(TensorError::FixedIndexOutOfRange { value: n, range: v.element.num_components() })
            }
            Some(IndexRef::Free(id)) => occurrences.entry(id).or_default().push(Side::Reference),
            _ => {}
        }
        for x in v.derivatives {
            match *x {
                IndexRef::Fixed(n) if n >= d => return Err(TensorError::FixedIndexOutOfRange { value: n, range: d }),
                IndexRef::Free(id) => occurrences.entry(id).or_default().push(Side::Geometry),
                IndexRef::Fixed(_) => {}
            }
        }
    }

    let mut ids: Vec<usize> = occurrences.keys().copied().collect();
    ids.sort_unstable();
    let mut user = HashMap::new();
    let mut reference_aux = Vec::new();
    let mut geometry_aux = Vec::new();
    for id in ids {
        let sides = &occurrences[&id];
        let kind = match sides.as_slice() {
            [_] => return Err(TensorError::IndexOccursOnce(name(id))),
            [Side::Reference, Side::Reference] => {
                reference_aux.push(d);
                UserKind::RefAux(reference_aux.len() - 1)
            }
            [Side::Geometry, Side::Geometry] => {
                geometry_aux.push(d);
                UserKind::GeoAux(geometry_aux.len() - 1)
            }
            [_, _] => UserKind::Secondary,
            _ => return Err(TensorError::IndexOccursThrice(name(id))),
        };
        user.insert(id, kind);
    }

    // Assign secondary positions: coefficients first (component, expansion,
    // derivative), then arguments (component, derivative).
    let mut secondary: Vec<SecondaryIndex> = Vec::new();
    let mut user_pos: HashMap<usize, usize> = HashMap::new();
    let mut user_secondary = |secondary: &mut Vec<SecondaryIndex>, id: usize| -> usize {
        *user_pos.entry(id).or_insert_with(|| push(secondary, SecondaryKind::User { id }, d))
    };

    let order: Vec<usize> = (m.arguments.len()..views.len()).chain(0..m.arguments.len()).collect();
    let mut factors: Vec<Option<RefFactor>> = vec![None; views.len()];
    let mut transforms = Vec::new();
    let mut coefficients = Vec::new();
    for k in order {
        let v = &views[k];
        let component = v.component.map(|c| match c {
            IndexRef::Fixed(n) => RefIndex::Fixed(n),
            IndexRef::Free(id) => match user[&id] {
                UserKind::RefAux(a) => RefIndex::Auxiliary(a),
                UserKind::Secondary => RefIndex::Secondary(user_secondary(&mut secondary, id)),
                UserKind::GeoAux(_) => unreachable!("component indices live on the reference side"),
            },
        });
        let basis = match v.argument {
            Some(slot) => RefIndex::Primary(slot),
            None => {
                let pos = push(&mut secondary, SecondaryKind::Expansion { slot: v.coeff }, v.element.space_dimension());
                coefficients.push(CoefficientRef { slot: v.coeff, expansion: pos });
                RefIndex::Secondary(pos)
            }
        };
        let direction = v.derivatives.first().map(|x| {
            let reference = push(&mut secondary, SecondaryKind::Direction, d);
            let physical = match *x {
                IndexRef::Fixed(n) => GeoIndex::Fixed(n),
                IndexRef::Free(id) => match user[&id] {
                    UserKind::GeoAux(a) => GeoIndex::Auxiliary(a),
                    UserKind::Secondary => GeoIndex::Secondary(user_secondary(&mut secondary, id)),
                    UserKind::RefAux(_) => unreachable!("derivative indices live on the geometry side"),
                },
            };
            transforms.push(Transform { reference, physical });
            reference
        });
        factors[k] = Some(RefFactor { element: v.element, basis, component, direction });
    }
    let most = secondary.len().max(geometry_aux.len());
    if most > MAX_INDICES {
        return Err(TensorError::TooManyIndices(most));
    }

    Ok(IndexedMonomial {
        scalar: m.scalar,
        shape,
        primary_dims: m.arguments.iter().map(|a| a.element.space_dimension()).collect(),
        factors: factors.into_iter().map(|f| f.expect("every factor visited")).collect(),
        transforms,
        coefficients,
        secondary,
        reference_aux,
        geometry_aux,
        integrand_degree: m.integrand_degree(),
    })
}
