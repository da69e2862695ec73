//! Quadrature rules and polynomial bases on the reference interval [-1, 1].
//!
//! The primal 0-form basis is the Lagrange basis on Gauss-Lobatto-Legendre
//! nodes, the primal 1-form (edge) basis is built from its derivatives, and
//! the dual 0-form basis is the Lagrange basis on Gauss-Legendre nodes.

use crate::error::{Error, Result};

/// Largest polynomial order accepted by the rule generators.
pub const MAX_ORDER: usize = 64;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureFamily {
    GaussLobattoLegendre,
    GaussLegendre,
}

impl QuadratureFamily {
    fn name(self) -> &'static str {
        match self {
            QuadratureFamily::GaussLobattoLegendre => "Gauss-Lobatto-Legendre",
            QuadratureFamily::GaussLegendre => "Gauss-Legendre",
        }
    }
}

/// Nodes and weights on [-1, 1]. Nodes are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    family: QuadratureFamily,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn family(&self) -> QuadratureFamily {
        self.family
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(ξᵢ)`. Fails on the first node where `f` is not finite.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { node: x, value: v });
            }
            sum += w * v;
        }
        Ok(sum)
    }

    /// Integrates over `[a, b]` by the affine map from the reference interval.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(half * self.integrate(|x| f(mid + half * x))?)
    }
}

/// Free-function form of [`QuadratureRule::integrate`].
pub fn integrate_quad<F: FnMut(f64) -> f64>(rule: &QuadratureRule, f: F) -> Result<f64> {
    rule.integrate(f)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k holds on the closed interval.
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

fn check_order(n: usize, what: &str) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "{what} must be in 1..={MAX_ORDER}, got {n}"
        )));
    }
    Ok(())
}

/// Newton iteration on `g` starting from `x0`, where `step(x)` returns `g/g'`.
fn newton_root<F: Fn(f64) -> f64>(x0: f64, step: F) -> Option<f64> {
    let mut x = x0;
    for _ in 0..NEWTON_MAX_ITER {
        let dx = step(x);
        x -= dx;
        if dx.abs() <= NEWTON_STEP_TOL {
            return Some(x);
        }
    }
    None
}

/// Enforces `x_i = -x_{n-1-i}` so that rules are exactly symmetric.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// `p + 1` GLL nodes: the endpoints and the roots of `P'_p`.
pub fn gll_rule(p: usize) -> Result<QuadratureRule> {
    check_order(p, "GLL order")?;
    let n = p + 1;
    let pf = p as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    for i in 1..p {
        // Chebyshev-Gauss-Lobatto seed.
        let seed = -(std::f64::consts::PI * i as f64 / pf).cos();
        let root = newton_root(seed, |x| {
            let (pv, dpv) = legendre_eval(p, x);
            // Second derivative from the Legendre equation.
            let d2 = (2.0 * x * dpv - pf * (pf + 1.0) * pv) / (1.0 - x * x);
            dpv / d2
        })
        .ok_or(Error::RootFinding {
            family: QuadratureFamily::GaussLobattoLegendre.name(),
            size: n,
            iterations: NEWTON_MAX_ITER,
        })?;
        nodes[i] = root;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (pv, _) = legendre_eval(p, x);
            2.0 / (pf * (pf + 1.0) * pv * pv)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        family: QuadratureFamily::GaussLobattoLegendre,
        nodes,
        weights,
    })
}

/// `q` Gauss-Legendre nodes: the roots of `P_q`.
pub fn gauss_rule(q: usize) -> Result<QuadratureRule> {
    check_order(q, "Gauss rule size")?;
    let qf = q as f64;
    let mut nodes = Vec::with_capacity(q);
    for i in 0..q {
        // Chebyshev-Gauss seed, ascending.
        let seed = -(std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * qf)).cos();
        let root = newton_root(seed, |x| {
            let (pv, dpv) = legendre_eval(q, x);
            pv / dpv
        })
        .ok_or(Error::RootFinding {
            family: QuadratureFamily::GaussLegendre.name(),
            size: q,
            iterations: NEWTON_MAX_ITER,
        })?;
        nodes.push(root);
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (_, dpv) = legendre_eval(q, x);
            2.0 / ((1.0 - x * x) * dpv * dpv)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule {
        family: QuadratureFamily::GaussLegendre,
        nodes,
        weights,
    })
}

/// Lagrange basis on a set of distinct nodes, evaluated in barycentric form.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl NodalBasis {
    pub fn new(nodes: &[f64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("nodal basis needs at least one node".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
        }
        let bary = nodes
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &xk)| xj - xk)
                    .product();
                1.0 / prod
            })
            .collect();
        Ok(NodalBasis {
            nodes: nodes.to_vec(),
            bary,
        })
    }

    pub fn from_rule(rule: &QuadratureRule) -> Self {
        // Rule nodes are strictly increasing by construction.
        Self::new(rule.nodes()).expect("quadrature nodes are distinct")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Polynomial degree (number of nodes minus one).
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    fn node_index(&self, x: f64) -> Option<usize> {
        self.nodes.iter().position(|&n| n == x)
    }

    /// `{l_i(x)}`. Exact Kronecker values when `x` is a node. Also valid
    /// outside the node hull (extrapolation).
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        if let Some(m) = self.node_index(x) {
            out[m] = 1.0;
            return out;
        }
        let mut denom = 0.0;
        for j in 0..n {
            let t = self.bary[j] / (x - self.nodes[j]);
            out[j] = t;
            denom += t;
        }
        for v in &mut out {
            *v /= denom;
        }
        out
    }

    /// `{l'_i(x)}`.
    pub fn deriv_all(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        if n == 1 {
            return out;
        }
        if let Some(m) = self.node_index(x) {
            // Row m of the differentiation matrix.
            let xm = self.nodes[m];
            let mut diag = 0.0;
            for j in 0..n {
                if j != m {
                    let d = (self.bary[j] / self.bary[m]) / (xm - self.nodes[j]);
                    out[j] = d;
                    diag -= d;
                }
            }
            out[m] = diag;
            return out;
        }
        let l = self.eval_all(x);
        let inv: Vec<f64> = self.nodes.iter().map(|&xk| 1.0 / (x - xk)).collect();
        let total: f64 = inv.iter().sum();
        for j in 0..n {
            out[j] = l[j] * (total - inv[j]);
        }
        out
    }

    /// `Σ_k c_k l_k(x)`.
    pub fn interpolate(&self, coeffs: &[f64], x: f64) -> f64 {
        self.eval_all(x).iter().zip(coeffs).map(|(l, c)| l * c).sum()
    }
}

pub fn nodal_eval_all(basis: &NodalBasis, x: f64) -> Vec<f64> {
    basis.eval_all(x)
}

pub fn nodal_deriv_all(basis: &NodalBasis, x: f64) -> Vec<f64> {
    basis.deriv_all(x)
}

/// Edge (1-form) basis `e_i = -Σ_{k<i} l'_k`, `i = 1..=p`, built on a nodal
/// basis of degree `p`. The integral of `e_i` over the `j`-th sub-interval
/// is `δ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBasis {
    nodal: NodalBasis,
}

impl EdgeBasis {
    pub fn new(nodal: NodalBasis) -> Result<Self> {
        if nodal.degree() == 0 {
            return Err(Error::InvalidArgument("edge basis needs at least two nodes".into()));
        }
        Ok(EdgeBasis { nodal })
    }

    pub fn nodal(&self) -> &NodalBasis {
        &self.nodal
    }

    /// Number of edges `p`.
    pub fn len(&self) -> usize {
        self.nodal.degree()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let dl = self.nodal.deriv_all(x);
        let mut acc = 0.0;
        dl[..self.len()]
            .iter()
            .map(|d| {
                acc -= d;
                acc
            })
            .collect()
    }
}

pub fn edge_eval_all(basis: &EdgeBasis, x: f64) -> Vec<f64> {
    basis.eval_all(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn monomial_integral(d: u32) -> f64 {
        if d % 2 == 1 {
            0.0
        } else {
            2.0 / (d as f64 + 1.0)
        }
    }

    #[test]
    fn legendre_low_orders() {
        assert_eq!(legendre_eval(0, 0.3), (1.0, 0.0));
        assert_eq!(legendre_eval(1, -0.5), (-0.5, 1.0));
        let (v, d) = legendre_eval(2, 0.5);
        assert_abs_diff_eq!(v, -0.125, epsilon = 1e-16);
        assert_abs_diff_eq!(d, 1.5, epsilon = 1e-16);
    }

    #[test]
    fn legendre_endpoint_derivative() {
        for n in 1..20 {
            let (v, d) = legendre_eval(n, 1.0);
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(d, (n * (n + 1)) as f64 / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gll_small_rules() {
        let r = gll_rule(1).unwrap();
        assert_eq!(r.nodes(), &[-1.0, 1.0]);
        assert_eq!(r.weights(), &[1.0, 1.0]);

        let r = gll_rule(2).unwrap();
        for (a, b) in r.nodes().iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in r.weights().iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let r = gll_rule(3).unwrap();
        let s = 1.0 / 5f64.sqrt();
        for (a, b) in r.nodes().iter().zip([-1.0, -s, s, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in r.weights().iter().zip([1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for d in 0..=5 {
            let v = r.integrate(|x| x.powi(d as i32)).unwrap();
            assert_abs_diff_eq!(v, monomial_integral(d), epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_small_rules() {
        let r = gauss_rule(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_abs_diff_eq!(r.weights()[0], 2.0, epsilon = 1e-15);

        let r = gauss_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes()[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes()[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 1.0, epsilon = 1e-15);

        let r = gauss_rule(3).unwrap();
        let s = (0.6f64).sqrt();
        for (a, b) in r.nodes().iter().zip([-s, 0.0, s]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in r.weights().iter().zip([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for d in 0..=5 {
            let v = r.integrate(|x| x.powi(d as i32)).unwrap();
            assert_abs_diff_eq!(v, monomial_integral(d), epsilon = 1e-14);
        }
    }

    #[test]
    fn rule_invariants_up_to_max_order() {
        for n in 1..=MAX_ORDER {
            for rule in [gll_rule(n).unwrap(), gauss_rule(n).unwrap()] {
                assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
                assert!(rule.nodes().iter().all(|x| (-1.0..=1.0).contains(x)));
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                let total: f64 = rule.weights().iter().sum();
                assert_abs_diff_eq!(total, 2.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn quadrature_exactness() {
        for q in 1..=20 {
            let rule = gauss_rule(q).unwrap();
            for d in 0..=(2 * q as u32 - 1) {
                let v = rule.integrate(|x| x.powi(d as i32)).unwrap();
                assert_abs_diff_eq!(v, monomial_integral(d), epsilon = 1e-13);
            }
        }
        for p in 1..=20 {
            let rule = gll_rule(p).unwrap();
            for d in 0..=(2 * p as u32 - 1) {
                let v = rule.integrate(|x| x.powi(d as i32)).unwrap();
                assert_abs_diff_eq!(v, monomial_integral(d), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn integrate_quad_examples() {
        let g2 = gauss_rule(2).unwrap();
        assert_abs_diff_eq!(integrate_quad(&g2, |x| x * x * x).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(integrate_quad(&g2, |x| x * x).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let l2 = gll_rule(2).unwrap();
        assert_abs_diff_eq!(integrate_quad(&l2, |x| x.powi(4)).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn integrate_reports_non_finite_node() {
        let g = gauss_rule(1).unwrap();
        match g.integrate(|x| 1.0 / x) {
            Err(Error::NonFinite { node, .. }) => assert_eq!(node, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn order_bounds_rejected() {
        assert!(gll_rule(0).is_err());
        assert!(gauss_rule(0).is_err());
        assert!(gll_rule(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn nodal_eval_examples() {
        let b = NodalBasis::new(&[-1.0, 1.0]).unwrap();
        assert_eq!(b.eval_all(0.0), vec![0.5, 0.5]);
        let b = NodalBasis::new(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(b.eval_all(0.0), vec![0.0, 1.0, 0.0]);
        for (a, e) in b.eval_all(0.5).iter().zip([-0.125, 0.75, 0.375]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn nodal_deriv_examples() {
        let b = NodalBasis::new(&[-1.0, 1.0]).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let d = b.deriv_all(x);
            assert_abs_diff_eq!(d[0], -0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
        }
        let b = NodalBasis::new(&[-1.0, 0.0, 1.0]).unwrap();
        for (a, e) in b.deriv_all(0.0).iter().zip([-0.5, 0.0, 0.5]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }
        let s: f64 = b.deriv_all(0.37).iter().sum();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nodal_deriv_at_node_matches_nearby() {
        let b = NodalBasis::from_rule(&gll_rule(6).unwrap());
        let x = b.nodes()[2];
        let at = b.deriv_all(x);
        let near = b.deriv_all(x + 1e-9);
        for (a, n) in at.iter().zip(&near) {
            assert_abs_diff_eq!(*a, *n, epsilon = 1e-6);
        }
    }

    #[test]
    fn edge_examples() {
        let e = EdgeBasis::new(NodalBasis::new(&[-1.0, 1.0]).unwrap()).unwrap();
        for x in [-1.0, 0.2, 1.0] {
            assert_abs_diff_eq!(e.eval_all(x)[0], 0.5, epsilon = 1e-15);
        }

        let gll = gll_rule(2).unwrap();
        let e = EdgeBasis::new(NodalBasis::from_rule(&gll)).unwrap();
        let g8 = gauss_rule(8).unwrap();
        let n = gll.nodes();
        for l in 0..2 {
            for j in 1..=2 {
                let v = g8.integrate_on(n[j - 1], n[j], |x| e.eval_all(x)[l]).unwrap();
                let expected = if l + 1 == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v, expected, epsilon = 1e-13);
            }
        }

        let y: Vec<f64> = n.iter().map(|x| x * x).collect();
        let ev = e.eval_all(0.4);
        let d: f64 = (1..=2).map(|l| (y[l] - y[l - 1]) * ev[l - 1]).sum();
        assert_abs_diff_eq!(d, 0.8, epsilon = 1e-13);
    }

    #[test]
    fn nodal_basis_rejects_bad_nodes() {
        assert!(NodalBasis::new(&[]).is_err());
        assert!(NodalBasis::new(&[0.0, 0.0]).is_err());
        assert!(EdgeBasis::new(NodalBasis::new(&[0.0]).unwrap()).is_err());
    }
}
