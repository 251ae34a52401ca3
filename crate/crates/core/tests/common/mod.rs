#![allow(dead_code)]

use std::collections::BTreeMap;

use diffsym::geometry::{Codiffusor, Diffeomorphism, Diffusor, OneForm, ProjectableVectorField, SymMatrix, VectorField};
use diffsym::symbolic::{normalize, parse_expr, substitute, CoordinateSystem, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn coords(m: usize) -> CoordinateSystem {
    let names = ["x", "y", "z"];
    CoordinateSystem::new(names[..m].iter().copied()).unwrap()
}

pub fn p(src: &str, c: &CoordinateSystem) -> Expr {
    normalize(&parse_expr(src, c).unwrap())
}

pub struct Fuzz {
    pub rng: ChaCha8Rng,
}

impl Fuzz {
    pub fn new(seed: u64) -> Fuzz {
        Fuzz {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn small(&mut self) -> i64 {
        self.rng.random_range(-3..=3)
    }

    pub fn nonzero(&mut self) -> i64 {
        loop {
            let k = self.small();
            if k != 0 {
                return k;
            }
        }
    }

    /// Random polynomial of total degree `<= deg` in the given variables.
    pub fn poly_in(&mut self, vars: &[Expr], deg: u32, terms: usize) -> Expr {
        let mut out = Vec::new();
        for _ in 0..terms {
            let mut factors = vec![Expr::int(self.small())];
            let d = self.rng.random_range(0..=deg);
            for _ in 0..d {
                let v = vars[self.rng.random_range(0..vars.len())].clone();
                factors.push(v);
            }
            out.push(Expr::product(factors));
        }
        normalize(&Expr::sum(out))
    }

    pub fn poly(&mut self, c: &CoordinateSystem, deg: u32) -> Expr {
        let vars: Vec<Expr> = (0..=c.dim()).map(|a| c.coordinate(a)).collect();
        self.poly_in(&vars, deg, 3)
    }

    pub fn time_poly(&mut self, deg: u32) -> Expr {
        self.poly_in(&[Expr::var("t")], deg, 2)
    }

    pub fn field(&mut self, c: &CoordinateSystem) -> VectorField {
        let comps = (0..=c.dim()).map(|_| self.poly(c, 2)).collect();
        VectorField::new(c.clone(), comps).unwrap()
    }

    pub fn projectable(&mut self, c: &CoordinateSystem) -> ProjectableVectorField {
        let phi = (0..c.dim()).map(|_| self.poly(c, 2)).collect();
        let tau = self.time_poly(2);
        ProjectableVectorField::new(c.clone(), phi, tau).unwrap()
    }

    pub fn diffusor(&mut self, c: &CoordinateSystem) -> Diffusor {
        let n = c.dim() + 1;
        let upper = (0..n * (n + 1) / 2).map(|_| self.poly(c, 2)).collect();
        let a = SymMatrix::from_upper(n, upper).unwrap();
        let b = (0..n).map(|_| self.poly(c, 2)).collect();
        Diffusor::new(c.clone(), a, b).unwrap()
    }

    pub fn standard_diffusor(&mut self, c: &CoordinateSystem) -> Diffusor {
        let m = c.dim();
        let a = (0..m * (m + 1) / 2).map(|_| self.poly(c, 2)).collect();
        let b = (0..m).map(|_| self.poly(c, 2)).collect();
        Diffusor::standard(c.clone(), a, b).unwrap()
    }

    pub fn codiffusor(&mut self, c: &CoordinateSystem) -> Codiffusor {
        let n = c.dim() + 1;
        let first = (0..n).map(|_| self.poly(c, 2)).collect();
        let upper = (0..n * (n + 1) / 2).map(|_| self.poly(c, 2)).collect();
        Codiffusor::new(c.clone(), first, SymMatrix::from_upper(n, upper).unwrap()).unwrap()
    }

    pub fn one_form(&mut self, c: &CoordinateSystem) -> OneForm {
        let comps = (0..=c.dim()).map(|_| self.poly(c, 2)).collect();
        OneForm::new(c.clone(), comps).unwrap()
    }

    /// Triangular projectable polynomial map with a polynomial inverse:
    /// `t' = a t + c`, `x_i' = k_i x_i + p_i(t, x_1..x_{i-1})`.
    pub fn diffeomorphism(&mut self, c: &CoordinateSystem) -> Diffeomorphism {
        let t = Expr::var("t");
        let a = self.nonzero();
        let shift = self.small();
        let f = normalize(&(Expr::int(a) * t.clone() + Expr::int(shift)));
        let f_inv = normalize(&(Expr::rational(1, a) * (t.clone() - Expr::int(shift))));
        let mut phi = Vec::new();
        let mut lower: Vec<Expr> = vec![t.clone()];
        // inverse components expressed in target variables, built in order
        let mut inv_map: BTreeMap<String, Expr> = BTreeMap::new();
        inv_map.insert("t".into(), f_inv.clone());
        let mut phi_inv = Vec::new();
        for i in 1..=c.dim() {
            let k = self.nonzero();
            let q = self.poly_in(&lower.clone(), 2, 2);
            let xi = c.coordinate(i);
            phi.push(normalize(&(Expr::int(k) * xi.clone() + q.clone())));
            // x_i = (x_i' - q(t, x_<i)) / k with earlier variables replaced by their inverses
            let q_src = substitute(&q, &inv_map);
            let inv_i = normalize(&(Expr::rational(1, k) * (xi.clone() - q_src)));
            inv_map.insert(c.name(i).to_string(), inv_i.clone());
            phi_inv.push(inv_i);
            lower.push(xi);
        }
        Diffeomorphism::new(c.clone(), f, phi)
            .unwrap()
            .with_inverse(f_inv, phi_inv)
            .unwrap()
    }
}
