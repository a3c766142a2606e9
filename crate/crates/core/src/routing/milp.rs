//! Edge-flow MILP with per-spill commodities, written as CPLEX-style LP text.
//!
//! `f_i_j_v = 1` when edge `(i, j)` lies on the route prefix that reaches spill `v`;
//! `f_i_j_j` therefore marks the edges actually driven. `u_j` are ordering
//! variables for subtour elimination.

use super::{Result, RoutingError};
use crate::scenario::MotionGraph;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub coef: f64,
    pub var: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<LinearTerm>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<LinearTerm>,
    pub constraints: Vec<Constraint>,
}

/// `(binary, continuous)` variable counts for `p` spills: `p^3 - p^2 + p` flow
/// binaries and `p` ordering variables.
pub fn milp_variable_count(p: usize) -> (usize, usize) {
    (p * p * p - p * p + p, p)
}

fn flow_name(i: usize, j: usize, v: usize) -> String {
    format!("f_{i}_{j}_{v}")
}

struct Builder {
    model: MilpModel,
    p: usize,
    /// Index of `f_i_j_v` in `(i * (p+1) + j) * (p+1) + v`, or `usize::MAX`.
    flow: Vec<usize>,
}

impl Builder {
    fn f(&self, i: usize, j: usize, v: usize) -> Option<usize> {
        let n = self.p + 1;
        let idx = self.flow[(i * n + j) * n + v];
        (idx != usize::MAX).then_some(idx)
    }

    fn push(&mut self, name: String, terms: Vec<LinearTerm>, sense: Sense, rhs: f64) {
        if !terms.is_empty() {
            self.model.constraints.push(Constraint { name, terms, sense, rhs });
        }
    }

    fn term(coef: f64, var: Option<usize>) -> Option<LinearTerm> {
        var.map(|var| LinearTerm { coef, var })
    }
}

/// Builds the model for `k` agents. Empty routes are allowed, so at most `k` agents
/// leave the depot.
pub fn export_milp(graph: &MotionGraph, k: usize) -> Result<MilpModel> {
    let p = graph.spill_count();
    if p == 0 {
        return Err(RoutingError::Config("model export needs at least one spill".into()));
    }
    let n = p + 1;
    let mut b = Builder {
        model: MilpModel {
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        },
        p,
        flow: vec![usize::MAX; n * n * n],
    };
    for v in 1..=p {
        for i in 0..=p {
            if i == v {
                continue;
            }
            for j in 1..=p {
                if i == j {
                    continue;
                }
                let idx = b.model.variables.len();
                b.model.variables.push(Variable {
                    name: flow_name(i, j, v),
                    kind: VarKind::Binary,
                    lower: 0.0,
                    upper: 1.0,
                });
                b.flow[(i * n + j) * n + v] = idx;
                b.model.objective.push(LinearTerm {
                    coef: graph.risk(v) * graph.cost(i, j),
                    var: idx,
                });
            }
        }
    }
    let u0 = b.model.variables.len();
    for j in 1..=p {
        b.model.variables.push(Variable {
            name: format!("u_{j}"),
            kind: VarKind::Continuous,
            lower: 1.0,
            upper: p as f64,
        });
    }
    let u = |j: usize| u0 + j - 1;

    let fleet = (1..=p).filter_map(|j| Builder::term(1.0, b.f(0, j, j))).collect();
    b.push("fleet".into(), fleet, Sense::Le, k as f64);

    for v in 1..=p {
        let t = (0..=p).filter(|&i| i != v).filter_map(|i| Builder::term(1.0, b.f(i, v, v))).collect();
        b.push(format!("term_{v}"), t, Sense::Ge, 1.0);
    }
    for v in 1..=p {
        let t = (1..=p).filter_map(|j| Builder::term(1.0, b.f(0, j, v))).collect();
        b.push(format!("start_{v}"), t, Sense::Eq, 1.0);
    }
    for i in 0..=p {
        for j in 1..=p {
            if i == j {
                continue;
            }
            let mut t: Vec<LinearTerm> = (1..=p)
                .filter(|&w| w != i && w != j)
                .filter_map(|w| Builder::term(1.0, b.f(i, j, w)))
                .collect();
            if t.is_empty() {
                continue;
            }
            t.extend(Builder::term(-(n as f64), b.f(i, j, j)));
            b.push(format!("link_{i}_{j}"), t, Sense::Le, 0.0);
        }
    }
    for v in 1..=p {
        for j in (1..=p).filter(|&j| j != v) {
            let mut t: Vec<LinearTerm> = (0..=p).filter(|&i| i != j).filter_map(|i| Builder::term(1.0, b.f(i, j, v))).collect();
            t.extend((1..=p).filter(|&l| l != j).filter_map(|l| Builder::term(-1.0, b.f(j, l, v))));
            b.push(format!("flow_{j}_{v}"), t, Sense::Eq, 0.0);
        }
    }
    for i in 1..=p {
        let t = (1..=p).filter(|&j| j != i).filter_map(|j| Builder::term(1.0, b.f(i, j, j))).collect();
        b.push(format!("succ_{i}"), t, Sense::Le, 1.0);
    }
    for i in 1..=p {
        for j in (1..=p).filter(|&j| j != i) {
            let mut t = vec![LinearTerm { coef: 1.0, var: u(i) }, LinearTerm { coef: -1.0, var: u(j) }];
            t.extend(Builder::term(p as f64, b.f(i, j, j)));
            b.push(format!("mtz_{i}_{j}"), t, Sense::Le, p as f64 - 1.0);
        }
    }
    Ok(b.model)
}

fn write_expr(out: &mut String, vars: &[Variable], terms: &[LinearTerm]) {
    for (n, t) in terms.iter().enumerate() {
        if n > 0 && n % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if t.coef < 0.0 { "-" } else { "+" };
        let mag = t.coef.abs();
        if n == 0 && sign == "+" {
            let _ = write!(out, " {} {}", mag, vars[t.var].name);
        } else {
            let _ = write!(out, " {sign} {} {}", mag, vars[t.var].name);
        }
    }
}

impl MilpModel {
    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|t| t.coef * x[t.var]).sum()
    }

    /// Checks every row and bound at absolute tolerance `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        let bounds_ok = self.variables.iter().zip(x).all(|(v, &xv)| {
            xv >= v.lower - tol && xv <= v.upper + tol && (v.kind == VarKind::Continuous || (xv - xv.round()).abs() <= tol)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: f64 = c.terms.iter().map(|t| t.coef * x[t.var]).sum();
                match c.sense {
                    Sense::Le => lhs <= c.rhs + tol,
                    Sense::Ge => lhs >= c.rhs - tol,
                    Sense::Eq => (lhs - c.rhs).abs() <= tol,
                }
            })
    }

    /// LP text with `Minimize`, `Subject To`, `Bounds`, `Binaries` and `End` sections.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ damage-minimizing routing, per-spill edge flows\n");
        out.push_str("Minimize\n obj:");
        write_expr(&mut out, &self.variables, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_expr(&mut out, &self.variables, &c.terms);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
        }
        out.push_str("Bounds\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        }
        out.push_str("Binaries\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        out.push_str("End\n");
        out
    }

    pub fn write_lp(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_lp_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spill_model() {
        let g = MotionGraph::from_costs(vec![vec![0.0, 4.0], vec![0.0, 0.0]], vec![0.0, 3.0]).unwrap();
        let m = export_milp(&g, 1).unwrap();
        assert_eq!(m.binary_count(), 1);
        assert_eq!(m.variables[0].name, "f_0_1_1");
        assert_eq!(m.objective_value(&[1.0, 1.0]), 12.0);
        assert!(m.is_feasible(&[1.0, 1.0], 1e-9));
        assert!(!m.is_feasible(&[0.0, 1.0], 1e-9));
    }

    #[test]
    fn counts_follow_formula() {
        for p in 1..=5 {
            let n = p + 1;
            let g = MotionGraph::from_costs(vec![vec![1.0; n]; n], vec![1.0; n]).unwrap();
            let m = export_milp(&g, 2).unwrap();
            assert_eq!((m.binary_count(), m.continuous_count()), milp_variable_count(p));
        }
    }

    #[test]
    fn lp_sections_in_order() {
        let g = MotionGraph::from_costs(vec![vec![1.0; 3]; 3], vec![1.0; 3]).unwrap();
        let text = export_milp(&g, 1).unwrap().to_lp_string();
        let pos: Vec<usize> = ["Minimize", "Subject To", "Bounds", "Binaries", "End"]
            .iter()
            .map(|s| text.find(s).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
