//! Discrete calculus on a single time element.
//!
//! The primal grid carries `p + 1` GLL nodes and `p` edges between them; the
//! dual grid carries the `p` Gauss nodes, one inside each primal edge. All
//! operations here work in the reference coordinate `τ ∈ [-1, 1]`; the time
//! map `t(τ)` of an [`ElementGrid`] only enters through the metric factor
//! `√g = (t_end - t_start) / 2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spectral::{gauss_rule, gll_rule, EdgeBasis, NodalBasis, QuadratureRule};

/// Extra Gauss points (beyond `p`) used per sub-interval by [`reduce1`].
pub const REDUCE1_EXTRA_POINTS: usize = 4;

/// Order-dependent, time-independent data of one element.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    order: usize,
    primal: QuadratureRule,
    dual: QuadratureRule,
    primal_basis: NodalBasis,
    edge_basis: EdgeBasis,
    dual_basis: NodalBasis,
    /// `e_l(τ̃ʲ)`, p × p.
    edge_at_dual: Matrix,
    /// `l_k(τ̃ʲ)`, p × (p+1).
    nodal_at_dual: Matrix,
}

impl ReferenceElement {
    pub fn new(order: usize) -> Result<Self> {
        let primal = gll_rule(order)?;
        let dual = gauss_rule(order)?;
        let primal_basis = NodalBasis::from_rule(&primal);
        let edge_basis = EdgeBasis::new(primal_basis.clone())?;
        let dual_basis = NodalBasis::from_rule(&dual);
        let edge_at_dual = Matrix::from_rows(
            &dual.nodes().iter().map(|&x| edge_basis.eval_all(x)).collect::<Vec<_>>(),
        );
        let nodal_at_dual = Matrix::from_rows(
            &dual.nodes().iter().map(|&x| primal_basis.eval_all(x)).collect::<Vec<_>>(),
        );
        Ok(ReferenceElement {
            order,
            primal,
            dual,
            primal_basis,
            edge_basis,
            dual_basis,
            edge_at_dual,
            nodal_at_dual,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn primal_rule(&self) -> &QuadratureRule {
        &self.primal
    }

    pub fn dual_rule(&self) -> &QuadratureRule {
        &self.dual
    }

    pub fn primal_nodes(&self) -> &[f64] {
        self.primal.nodes()
    }

    pub fn dual_nodes(&self) -> &[f64] {
        self.dual.nodes()
    }

    pub fn dual_weights(&self) -> &[f64] {
        self.dual.weights()
    }

    pub fn primal_basis(&self) -> &NodalBasis {
        &self.primal_basis
    }

    pub fn edge_basis(&self) -> &EdgeBasis {
        &self.edge_basis
    }

    pub fn dual_basis(&self) -> &NodalBasis {
        &self.dual_basis
    }

    pub fn edge_at_dual(&self) -> &Matrix {
        &self.edge_at_dual
    }

    pub fn nodal_at_dual(&self) -> &Matrix {
        &self.nodal_at_dual
    }
}

/// A reference element placed on `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct ElementGrid {
    reference: Arc<ReferenceElement>,
    t_start: f64,
    t_end: f64,
}

impl ElementGrid {
    pub fn new(order: usize, t_start: f64, t_end: f64) -> Result<Self> {
        Self::with_reference(Arc::new(ReferenceElement::new(order)?), t_start, t_end)
    }

    pub fn with_reference(reference: Arc<ReferenceElement>, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "element needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(ElementGrid {
            reference,
            t_start,
            t_end,
        })
    }

    pub fn order(&self) -> usize {
        self.reference.order
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn shared_reference(&self) -> Arc<ReferenceElement> {
        Arc::clone(&self.reference)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// `√g = dt/dτ`.
    pub fn metric(&self) -> f64 {
        0.5 * (self.t_end - self.t_start)
    }

    pub fn time_of(&self, tau: f64) -> f64 {
        self.t_start + (tau + 1.0) * self.metric()
    }

    pub fn tau_of(&self, t: f64) -> f64 {
        if t == self.t_end {
            return 1.0;
        }
        if t == self.t_start {
            return -1.0;
        }
        (t - self.t_start) / self.metric() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CochainKind {
    /// Values at the `p + 1` primal nodes.
    Primal0,
    /// Integrals over the `p` primal edges.
    Primal1,
    /// Values at the `p` dual nodes.
    Dual0,
}

impl CochainKind {
    pub fn len_for_order(self, p: usize) -> usize {
        match self {
            CochainKind::Primal0 => p + 1,
            CochainKind::Primal1 | CochainKind::Dual0 => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    kind: CochainKind,
    values: Vec<f64>,
}

impl Cochain {
    pub fn new(kind: CochainKind, order: usize, values: Vec<f64>) -> Result<Self> {
        let expected = kind.len_for_order(order);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Cochain { kind, values })
    }

    pub fn zeros(kind: CochainKind, order: usize) -> Self {
        Cochain {
            kind,
            values: vec![0.0; kind.len_for_order(order)],
        }
    }

    pub fn kind(&self) -> CochainKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Order `p` of the element this cochain lives on.
    pub fn order(&self) -> usize {
        match self.kind {
            CochainKind::Primal0 => self.values.len() - 1,
            CochainKind::Primal1 | CochainKind::Dual0 => self.values.len(),
        }
    }

    fn expect_kind(&self, kind: CochainKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "expected a {kind:?} cochain, got {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Node-to-edge incidence `E₍₀,₁₎`: column `j` has `-1` at row `j - 1` and
/// `+1` at row `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    order: usize,
    entries: Vec<Vec<i8>>,
}

impl IncidenceMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `(p + 1)` rows by `p` columns.
    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row][col]
    }

    pub fn column_sums(&self) -> Vec<i32> {
        (0..self.order)
            .map(|j| self.entries.iter().map(|r| r[j] as i32).sum())
            .collect()
    }
}

pub fn incidence_matrix(p: usize) -> Result<IncidenceMatrix> {
    if p == 0 {
        return Err(Error::InvalidArgument("incidence matrix needs p >= 1".into()));
    }
    let mut entries = vec![vec![0i8; p]; p + 1];
    for j in 0..p {
        entries[j][j] = -1;
        entries[j + 1][j] = 1;
    }
    Ok(IncidenceMatrix { order: p, entries })
}

/// Discrete exterior derivative: `δc` on edge `l` is `c_l - c_{l-1}`.
pub fn coboundary(c: &Cochain, e: &IncidenceMatrix) -> Result<Cochain> {
    c.expect_kind(CochainKind::Primal0)?;
    if c.values.len() != e.order + 1 {
        return Err(Error::LengthMismatch {
            expected: e.order + 1,
            actual: c.values.len(),
        });
    }
    let values = (0..e.order)
        .map(|j| {
            e.entries
                .iter()
                .zip(&c.values)
                .map(|(row, v)| row[j] as f64 * v)
                .sum()
        })
        .collect();
    Ok(Cochain {
        kind: CochainKind::Primal1,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Primal,
    Dual,
}

fn sample<F: FnMut(f64) -> f64>(nodes: &[f64], mut f: F) -> Result<Vec<f64>> {
    nodes
        .iter()
        .map(|&x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { node: x, value: v })
            }
        })
        .collect()
}

/// Reduction of a 0-form: point samples at primal or dual nodes.
pub fn reduce0<F: FnMut(f64) -> f64>(f: F, grid: &ElementGrid, target: Target) -> Result<Cochain> {
    let r = grid.reference();
    match target {
        Target::Primal => Ok(Cochain {
            kind: CochainKind::Primal0,
            values: sample(r.primal_nodes(), f)?,
        }),
        Target::Dual => Ok(Cochain {
            kind: CochainKind::Dual0,
            values: sample(r.dual_nodes(), f)?,
        }),
    }
}

/// Reduction of a 1-form `density(τ) dτ`: integrals over the primal edges.
pub fn reduce1<F: FnMut(f64) -> f64>(mut density: F, grid: &ElementGrid) -> Result<Cochain> {
    let p = grid.order();
    let rule = gauss_rule(p + REDUCE1_EXTRA_POINTS)?;
    let nodes = grid.reference().primal_nodes();
    let values = nodes
        .windows(2)
        .map(|w| rule.integrate_on(w[0], w[1], &mut density))
        .collect::<Result<Vec<_>>>()?;
    Ok(Cochain {
        kind: CochainKind::Primal1,
        values,
    })
}

/// Reconstruction of a primal or dual 0-cochain at `x`.
pub fn reconstruct0(c: &Cochain, grid: &ElementGrid, x: f64) -> Result<f64> {
    let r = grid.reference();
    let basis = match c.kind {
        CochainKind::Primal0 => r.primal_basis(),
        CochainKind::Dual0 => r.dual_basis(),
        CochainKind::Primal1 => {
            return Err(Error::InvalidArgument("reconstruct0 needs a 0-cochain".into()))
        }
    };
    check_len(c, grid.order())?;
    Ok(basis.interpolate(&c.values, x))
}

/// Reconstruction of a 1-cochain: the `dτ` coefficient `Σ c_l e_l(x)`.
pub fn reconstruct1(c: &Cochain, grid: &ElementGrid, x: f64) -> Result<f64> {
    c.expect_kind(CochainKind::Primal1)?;
    check_len(c, grid.order())?;
    Ok(grid
        .reference()
        .edge_basis()
        .eval_all(x)
        .iter()
        .zip(&c.values)
        .map(|(e, v)| e * v)
        .sum())
}

fn check_len(c: &Cochain, p: usize) -> Result<()> {
    let expected = c.kind.len_for_order(p);
    if c.values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: c.values.len(),
        });
    }
    Ok(())
}

/// Canonical Hodge-⋆ from primal 1-cochains to dual 0-cochains: reconstruct,
/// apply `⋆dt = 1/√g` pointwise, sample at the dual nodes.
pub fn canonical_hodge_1to0(c: &Cochain, grid: &ElementGrid) -> Result<Cochain> {
    c.expect_kind(CochainKind::Primal1)?;
    check_len(c, grid.order())?;
    let inv_metric = 1.0 / grid.metric();
    let values = grid
        .reference()
        .edge_at_dual()
        .mul_vec(&c.values)
        .into_iter()
        .map(|v| v * inv_metric)
        .collect();
    Ok(Cochain {
        kind: CochainKind::Dual0,
        values,
    })
}

/// Diagonal of the dual 0-form mass matrix, `√g · w_j`.
pub fn galerkin_mass_dual(grid: &ElementGrid) -> Vec<f64> {
    let g = grid.metric();
    grid.reference().dual_weights().iter().map(|w| g * w).collect()
}

/// The same mass matrix assembled by explicit quadrature with a rule of
/// `p + 2` points (exact for the degree `2p - 2` integrand).
pub fn galerkin_mass_dual_full(grid: &ElementGrid) -> Result<Matrix> {
    let p = grid.order();
    let rule = gauss_rule(p + 2)?;
    let basis = grid.reference().dual_basis();
    let g = grid.metric();
    let mut m = Matrix::zeros(p, p);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let l = basis.eval_all(x);
        for i in 0..p {
            for j in 0..p {
                m[(i, j)] += w * l[i] * l[j] * g;
            }
        }
    }
    Ok(m)
}
